// Copyright 2026 Chronos Contributors
// SPDX-License-Identifier: Apache-2.0

/// 1-based line and column of a token.
///
/// Spans compare equal unconditionally so that ASTs of reformatted sources
/// compare structurally.
#[derive(Debug, Clone, Copy, Default)]
pub struct Span {
    pub line: usize,
    pub column: usize,
}

impl Span {
    pub fn new(line: usize, column: usize) -> Self {
        Span { line, column }
    }
}

impl PartialEq for Span {
    fn eq(&self, _: &Self) -> bool {
        true
    }
}

impl Eq for Span {}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Ident {
    pub name: String,
    pub span: Span,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum BinOp {
    Add,
    Sub,
    Mul,
    Div,
}

impl BinOp {
    pub fn symbol(&self) -> &'static str {
        match self {
            BinOp::Add => "+",
            BinOp::Sub => "-",
            BinOp::Mul => "*",
            BinOp::Div => "/",
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub enum Expr {
    /// Decimal literal; `imaginary` for an `i` suffix.
    Number { value: f64, imaginary: bool, span: Span },
    Name(Ident),
    Vector { items: Vec<Expr>, span: Span },
    Matrix { rows: Vec<Vec<Expr>>, span: Span },
    Neg { expr: Box<Expr>, span: Span },
    Complement { expr: Box<Expr>, span: Span },
    Binary { op: BinOp, lhs: Box<Expr>, rhs: Box<Expr>, span: Span },
    Call { func: Ident, args: Vec<Expr>, span: Span },
}

impl Expr {
    pub fn span(&self) -> Span {
        match self {
            Expr::Number { span, .. }
            | Expr::Vector { span, .. }
            | Expr::Matrix { span, .. }
            | Expr::Neg { span, .. }
            | Expr::Complement { span, .. }
            | Expr::Binary { span, .. }
            | Expr::Call { span, .. } => *span,
            Expr::Name(id) => id.span,
        }
    }
}

/// Sum of product terms, e.g. `~a@t0 + {x@t0 + y@t0}{p@t2 + q@t2}`.
#[derive(Debug, Clone, PartialEq)]
pub struct HSum {
    pub terms: Vec<HTerm>,
    pub span: Span,
}

/// Juxtaposed factors, multiplied slot by slot.
#[derive(Debug, Clone, PartialEq)]
pub struct HTerm {
    pub factors: Vec<HFactor>,
    pub span: Span,
}

#[derive(Debug, Clone, PartialEq)]
pub enum HFactor {
    /// `name@time` or `~name@time`.
    Event { complement: bool, event: Ident, time: Ident },
    /// `*@time`.
    Identity { time: Ident },
    /// A declared history.
    Named(Ident),
    Group(HSum),
}

#[derive(Debug, Clone, PartialEq)]
pub enum Evolve {
    Step { from: Ident, to: Ident, unitary: Expr },
    Hamiltonian(Expr),
    Identity,
}

#[derive(Debug, Clone, PartialEq)]
pub enum Expectation {
    True,
    False,
    Meaningless,
    DataInconsistent,
    Value(Expr),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum ValueKind {
    Ket,
    Proj,
    Operator,
    Unitary,
    Density,
}

impl ValueKind {
    pub fn keyword(&self) -> &'static str {
        match self {
            ValueKind::Ket => "ket",
            ValueKind::Proj => "proj",
            ValueKind::Operator => "operator",
            ValueKind::Unitary => "unitary",
            ValueKind::Density => "density",
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum ToleranceKind {
    Structural,
    Probability,
}

#[derive(Debug, Clone, PartialEq)]
pub enum DeclKind {
    Space { dim: usize },
    Tolerance { kind: ToleranceKind, value: Expr },
    Value { kind: ValueKind, name: Ident, value: Expr },
    Times { entries: Vec<(Ident, Expr)> },
    Evolve(Evolve),
    History { name: Ident, value: HSum },
    Framework { name: Ident, value: HSum, within: Option<HTerm>, expect_inconsistent: bool },
    Assume { framework: Option<Ident>, value: HSum },
    Query { name: Ident, targets: Vec<HTerm>, conditions: Vec<HTerm>, within: Option<Ident>, expect: Option<Expectation> },
}

#[derive(Debug, Clone, PartialEq)]
pub struct Decl {
    pub kind: DeclKind,
    pub span: Span,
}

#[derive(Debug, Clone, PartialEq)]
pub struct Document {
    pub decls: Vec<Decl>,
}
