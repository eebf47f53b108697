// Copyright 2026 Chronos Contributors
// SPDX-License-Identifier: Apache-2.0

use std::sync::Arc;

use indexmap::IndexMap;
use num_complex::Complex64;

use super::ast::*;
use super::error::{ErrorCode, Result, ScenarioError};
use super::printer::term_text;
use super::{ElaborateOptions, Expected, FrameworkEntry, QuerySpec, Scenario};
use crate::framework::{AlgebraElement, Decomposition};
use crate::histories::{HistoryError, ProductHistory};
use crate::qalg::{
    make_projector, projector_from_kets, unitary_from_hamiltonian, CMatrix, ConsistencyMode, DensityMatrix, Ket,
    OperatorMetric, Projector, PropagatorFamily, QalgError, DEFAULT_TOL, SOFT_DIMENSION_CAP,
};
use crate::reasoning::{Framework, InitialData, ReasoningError, Tolerances};

#[derive(Debug, Clone)]
enum Value {
    Scalar(Complex64),
    Ket(Ket),
    Matrix(CMatrix),
    Proj(Projector),
}

impl Value {
    fn kind(&self) -> &'static str {
        match self {
            Value::Scalar(_) => "scalar",
            Value::Ket(_) => "ket",
            Value::Matrix(_) => "operator",
            Value::Proj(_) => "projector",
        }
    }
}

fn err(code: ErrorCode, span: Span, msg: impl Into<String>) -> ScenarioError {
    ScenarioError::new(code, span, msg)
}

fn qalg_err(e: QalgError, span: Span) -> ScenarioError {
    let code = match e {
        QalgError::DimensionMismatch { .. } | QalgError::NotSquare { .. } => ErrorCode::DimensionMismatch,
        QalgError::NotHermitian { .. } | QalgError::NotIdempotent { .. } | QalgError::NonIntegerTrace { .. } => {
            ErrorCode::NotAProjector
        }
        QalgError::ZeroVector => ErrorCode::ZeroVector,
        QalgError::NonCommuting { .. } => ErrorCode::NonCommuting,
        QalgError::NotUnitary { .. } => ErrorCode::NonUnitary,
        QalgError::UnknownTime(_) | QalgError::InvalidTimes | QalgError::StepCount { .. } => ErrorCode::BadTimes,
        QalgError::InvalidDensity(_) => ErrorCode::InvalidDensity,
        QalgError::Empty | QalgError::NonFinite => ErrorCode::NumericDomain,
    };
    err(code, span, e.to_string())
}

fn history_err(e: HistoryError, span: Span) -> ScenarioError {
    match e {
        HistoryError::Qalg(q) => qalg_err(q, span),
        HistoryError::NotAProjectorProduct(m) => err(ErrorCode::NonCommuting, span, m),
        other => err(ErrorCode::InvalidDecomposition, span, other.to_string()),
    }
}

struct Elaborator {
    name: String,
    dim: usize,
    tol: Tolerances,
    mode: ConsistencyMode,
    values: IndexMap<String, (ValueKind, Value)>,
    times: IndexMap<String, f64>,
    times_span: Option<Span>,
    steps: IndexMap<(String, String), (CMatrix, Span)>,
    hamiltonian: Option<(CMatrix, Span)>,
    identity_evolve: Option<Span>,
    warnings: Vec<String>,
}

pub(super) fn elaborate_document(doc: &Document, name: &str, options: &ElaborateOptions) -> Result<Scenario> {
    let first_span = doc.decls.first().map(|d| d.span).unwrap_or_default();
    let mut dim = None;
    let mut tol = Tolerances { structural: DEFAULT_TOL, probability: DEFAULT_TOL };
    for d in &doc.decls {
        match &d.kind {
            DeclKind::Space { dim: n } => {
                if dim.replace(*n).is_some() {
                    return Err(err(ErrorCode::SpaceDeclaration, d.span, "space is declared more than once"));
                }
            }
            DeclKind::Tolerance { kind, value } => {
                let v = constant_real(value)?;
                if !(v > 0.0 && v.is_finite()) {
                    return Err(err(ErrorCode::NumericDomain, value.span(), "tolerances must be positive"));
                }
                match kind {
                    ToleranceKind::Structural => tol.structural = v,
                    ToleranceKind::Probability => tol.probability = v,
                }
            }
            _ => {}
        }
    }
    let dim = dim.ok_or_else(|| err(ErrorCode::SpaceDeclaration, first_span, "missing `space dim N;` declaration"))?;
    if let Some(t) = options.tol {
        tol.structural = t;
    }
    if let Some(t) = options.tol_prob {
        tol.probability = t;
    }
    let mut e = Elaborator {
        name: name.to_string(),
        dim,
        tol,
        mode: options.mode.unwrap_or(ConsistencyMode::Strong),
        values: IndexMap::new(),
        times: IndexMap::new(),
        times_span: None,
        steps: IndexMap::new(),
        hamiltonian: None,
        identity_evolve: None,
        warnings: Vec::new(),
    };
    if dim > SOFT_DIMENSION_CAP {
        e.warnings.push(format!("dimension {dim} exceeds the soft cap of {SOFT_DIMENSION_CAP}"));
    }
    for d in &doc.decls {
        e.first_pass(d)?;
    }
    let dynamics = Arc::new(e.dynamics(first_span)?);
    let metric = e.metric(first_span)?;
    e.second_pass(doc, dynamics, metric)
}

/// Tolerances are read before anything else and may only use literals.
fn constant_real(e: &Expr) -> Result<f64> {
    let scratch = Elaborator {
        name: String::new(),
        dim: 1,
        tol: Tolerances::default(),
        mode: ConsistencyMode::Strong,
        values: IndexMap::new(),
        times: IndexMap::new(),
        times_span: None,
        steps: IndexMap::new(),
        hamiltonian: None,
        identity_evolve: None,
        warnings: Vec::new(),
    };
    scratch.real(e)
}

impl Elaborator {
    fn first_pass(&mut self, d: &Decl) -> Result<()> {
        match &d.kind {
            DeclKind::Value { kind, name, value } => {
                let v = self.eval(value)?;
                let v = self.coerce(*kind, v, value.span())?;
                self.values.insert(name.name.clone(), (*kind, v));
            }
            DeclKind::Times { entries } => {
                if self.times_span.replace(d.span).is_some() {
                    return Err(err(ErrorCode::BadTimes, d.span, "times are declared more than once"));
                }
                let mut last = f64::NEG_INFINITY;
                for (name, value) in entries {
                    let t = self.real(value)?;
                    if t <= last {
                        return Err(err(ErrorCode::BadTimes, value.span(), "times must be strictly increasing"));
                    }
                    last = t;
                    self.times.insert(name.name.clone(), t);
                }
            }
            DeclKind::Evolve(ev) => self.evolve(ev, d.span)?,
            _ => {}
        }
        Ok(())
    }

    fn evolve(&mut self, ev: &Evolve, span: Span) -> Result<()> {
        let already = !self.steps.is_empty() || self.hamiltonian.is_some() || self.identity_evolve.is_some();
        match ev {
            Evolve::Identity => {
                if already {
                    return Err(err(ErrorCode::BadTimes, span, "dynamics are already specified"));
                }
                self.identity_evolve = Some(span);
            }
            Evolve::Hamiltonian(h) => {
                if already {
                    return Err(err(ErrorCode::BadTimes, span, "dynamics are already specified"));
                }
                let m = self.matrix(h)?;
                self.check_dim(m.dim(), h.span())?;
                if !m.is_hermitian(self.tol.structural) {
                    return Err(err(ErrorCode::TypeError, h.span(), "hamiltonian must be Hermitian"));
                }
                self.hamiltonian = Some((m, h.span()));
            }
            Evolve::Step { from, to, unitary } => {
                if self.hamiltonian.is_some() || self.identity_evolve.is_some() {
                    return Err(err(ErrorCode::BadTimes, span, "dynamics are already specified"));
                }
                let a = self.time_index(from)?;
                let b = self.time_index(to)?;
                if b != a + 1 {
                    return Err(err(ErrorCode::BadTimes, to.span, "evolution steps must join adjacent times"));
                }
                let u = self.matrix(unitary)?;
                self.check_dim(u.dim(), unitary.span())?;
                let deviation = u.unitary_deviation();
                if deviation > self.tol.structural * self.dim as f64 {
                    return Err(err(
                        ErrorCode::NonUnitary,
                        unitary.span(),
                        format!("step is not unitary (deviation {deviation:.3e})"),
                    ));
                }
                if self.steps.insert((from.name.clone(), to.name.clone()), (u, span)).is_some() {
                    return Err(err(ErrorCode::BadTimes, span, "step is specified twice"));
                }
            }
        }
        Ok(())
    }

    fn time_index(&self, id: &Ident) -> Result<usize> {
        self.times
            .get_index_of(&id.name)
            .ok_or_else(|| err(ErrorCode::UnknownIdentifier, id.span, format!("unknown time `{}`", id.name)))
    }

    fn time(&self, id: &Ident) -> Result<f64> {
        self.time_index(id).map(|k| self.times[k])
    }

    fn dynamics(&self, fallback: Span) -> Result<PropagatorFamily> {
        let times: Vec<f64> = if self.times.is_empty() { vec![0.0] } else { self.times.values().copied().collect() };
        let span = self.times_span.unwrap_or(fallback);
        if let Some((h, hspan)) = &self.hamiltonian {
            return PropagatorFamily::from_hamiltonian(h, times, self.tol.structural).map_err(|e| qalg_err(e, *hspan));
        }
        if self.identity_evolve.is_some() || times.len() == 1 {
            return PropagatorFamily::identity(times, self.dim).map_err(|e| qalg_err(e, span));
        }
        let names: Vec<&String> = self.times.keys().collect();
        let mut steps = Vec::new();
        for w in names.windows(2) {
            match self.steps.get(&(w[0].clone(), w[1].clone())) {
                Some((u, _)) => steps.push(u.clone()),
                None => {
                    return Err(err(
                        ErrorCode::MissingDynamics,
                        span,
                        format!("no evolution given from `{}` to `{}`", w[0], w[1]),
                    ))
                }
            }
        }
        // unitarity was checked at tol·d above; the family uses the same bound
        PropagatorFamily::new(times, steps, self.dim, self.tol.structural * self.dim as f64).map_err(|e| qalg_err(e, span))
    }

    fn density(&self, name: &str, span: Span) -> Result<DensityMatrix> {
        match self.values.get(name) {
            Some((ValueKind::Density, Value::Matrix(m))) => {
                DensityMatrix::new(m.clone(), self.tol.structural).map_err(|e| qalg_err(e, span))
            }
            _ => Err(err(
                ErrorCode::InvalidDensity,
                span,
                format!("mode {} needs `density {name} = ...;`", self.mode),
            )),
        }
    }

    fn metric(&self, span: Span) -> Result<OperatorMetric> {
        Ok(match self.mode {
            ConsistencyMode::Strong => OperatorMetric::PlainComplex,
            ConsistencyMode::Weak => OperatorMetric::PlainReal,
            ConsistencyMode::Rho => OperatorMetric::InitialRho(self.density("rho", span)?),
            ConsistencyMode::RhoRho => {
                OperatorMetric::InitialFinalRho(self.density("rho", span)?, self.density("rho_final", span)?)
            }
        })
    }

    fn check_dim(&self, found: usize, span: Span) -> Result<()> {
        if found != self.dim {
            return Err(err(
                ErrorCode::DimensionMismatch,
                span,
                format!("expected dimension {}, found {found}", self.dim),
            ));
        }
        Ok(())
    }

    fn coerce(&self, kind: ValueKind, v: Value, span: Span) -> Result<Value> {
        match kind {
            ValueKind::Ket => match v {
                Value::Ket(_) => Ok(v),
                other => Err(err(ErrorCode::TypeError, span, format!("expected a ket, found {}", other.kind()))),
            },
            ValueKind::Proj => Ok(Value::Proj(self.projector(v, span)?)),
            ValueKind::Operator => Ok(Value::Matrix(self.as_matrix(v, span)?)),
            ValueKind::Unitary => {
                let m = self.as_matrix(v, span)?;
                let deviation = m.unitary_deviation();
                if deviation > self.tol.structural * m.dim() as f64 {
                    return Err(err(ErrorCode::NonUnitary, span, format!("not unitary (deviation {deviation:.3e})")));
                }
                Ok(Value::Matrix(m))
            }
            ValueKind::Density => {
                let m = match v {
                    Value::Ket(k) => Projector::from_ket(&k).map_err(|e| qalg_err(e, span))?.matrix().clone(),
                    other => self.as_matrix(other, span)?,
                };
                self.check_dim(m.dim(), span)?;
                DensityMatrix::new(m.clone(), self.tol.structural)
                    .map_err(|e| err(ErrorCode::InvalidDensity, span, e.to_string()))?;
                Ok(Value::Matrix(m))
            }
        }
    }

    fn projector(&self, v: Value, span: Span) -> Result<Projector> {
        match v {
            Value::Proj(p) => Ok(p),
            Value::Ket(k) => Projector::from_ket(&k).map_err(|e| qalg_err(e, span)),
            Value::Matrix(m) => make_projector(m, self.tol.structural).map_err(|e| qalg_err(e, span)),
            Value::Scalar(_) => Err(err(ErrorCode::TypeError, span, "expected a projector, found scalar")),
        }
    }

    fn as_matrix(&self, v: Value, span: Span) -> Result<CMatrix> {
        match v {
            Value::Matrix(m) => Ok(m),
            Value::Proj(p) => Ok(p.matrix().clone()),
            other => Err(err(ErrorCode::TypeError, span, format!("expected an operator, found {}", other.kind()))),
        }
    }

    fn matrix(&self, e: &Expr) -> Result<CMatrix> {
        let v = self.eval(e)?;
        self.as_matrix(v, e.span())
    }

    fn scalar(&self, e: &Expr) -> Result<Complex64> {
        match self.eval(e)? {
            Value::Scalar(z) => Ok(z),
            other => Err(err(ErrorCode::TypeError, e.span(), format!("expected a scalar, found {}", other.kind()))),
        }
    }

    fn real(&self, e: &Expr) -> Result<f64> {
        let z = self.scalar(e)?;
        if z.im.abs() > self.tol.structural || !z.re.is_finite() {
            return Err(err(ErrorCode::NumericDomain, e.span(), "expected a finite real number"));
        }
        Ok(z.re)
    }

    fn index(&self, e: &Expr) -> Result<usize> {
        let v = self.real(e)?;
        if v < 0.0 || v.fract() != 0.0 {
            return Err(err(ErrorCode::NumericDomain, e.span(), "expected a non-negative integer"));
        }
        Ok(v as usize)
    }

    fn finite(&self, z: Complex64, span: Span) -> Result<Value> {
        if z.re.is_finite() && z.im.is_finite() {
            Ok(Value::Scalar(z))
        } else {
            Err(err(ErrorCode::NumericDomain, span, "result is not a finite number"))
        }
    }

    fn eval(&self, e: &Expr) -> Result<Value> {
        match e {
            Expr::Number { value, imaginary, .. } => Ok(Value::Scalar(if *imaginary {
                Complex64::new(0.0, *value)
            } else {
                Complex64::new(*value, 0.0)
            })),
            Expr::Name(id) => self.name(id),
            Expr::Vector { items, span } => {
                let amps = items.iter().map(|x| self.scalar(x)).collect::<Result<Vec<_>>>()?;
                Ket::new(amps).map(Value::Ket).map_err(|e| qalg_err(e, *span))
            }
            Expr::Matrix { rows, span } => {
                let rows = rows
                    .iter()
                    .map(|r| r.iter().map(|x| self.scalar(x)).collect::<Result<Vec<_>>>())
                    .collect::<Result<Vec<_>>>()?;
                CMatrix::from_rows(&rows).map(Value::Matrix).map_err(|e| qalg_err(e, *span))
            }
            Expr::Neg { expr, span } => self.scale(Complex64::new(-1.0, 0.0), self.eval(expr)?, *span),
            Expr::Complement { expr, span } => {
                let p = self.projector(self.eval(expr)?, *span)?;
                Ok(Value::Proj(p.complement()))
            }
            Expr::Binary { op, lhs, rhs, span } => self.binary(*op, self.eval(lhs)?, self.eval(rhs)?, *span),
            Expr::Call { func, args, span } => self.call(func, args, *span),
        }
    }

    fn name(&self, id: &Ident) -> Result<Value> {
        match id.name.as_str() {
            "i" => return Ok(Value::Scalar(Complex64::new(0.0, 1.0))),
            "pi" => return Ok(Value::Scalar(Complex64::new(std::f64::consts::PI, 0.0))),
            "identity" => return Ok(Value::Proj(Projector::identity(self.dim))),
            "zero" => return Ok(Value::Proj(Projector::zero(self.dim))),
            _ => {}
        }
        self.values
            .get(&id.name)
            .map(|(_, v)| v.clone())
            .ok_or_else(|| err(ErrorCode::UnknownIdentifier, id.span, format!("unknown identifier `{}`", id.name)))
    }

    fn scale(&self, c: Complex64, v: Value, span: Span) -> Result<Value> {
        Ok(match v {
            Value::Scalar(z) => return self.finite(c * z, span),
            Value::Ket(k) => Value::Ket(k.scale(c)),
            Value::Matrix(m) => Value::Matrix(m.scale(c)),
            Value::Proj(p) => Value::Matrix(p.matrix().scale(c)),
        })
    }

    fn binary(&self, op: BinOp, a: Value, b: Value, span: Span) -> Result<Value> {
        use Value::*;
        let a = if let Proj(p) = a { Matrix(p.matrix().clone()) } else { a };
        let b = if let Proj(p) = b { Matrix(p.matrix().clone()) } else { b };
        let mismatch = |a: &Value, b: &Value| {
            err(
                ErrorCode::TypeError,
                span,
                format!("cannot apply `{}` to {} and {}", op.symbol(), a.kind(), b.kind()),
            )
        };
        let q = |e: QalgError| qalg_err(e, span);
        match (op, a, b) {
            (BinOp::Add, Scalar(x), Scalar(y)) => self.finite(x + y, span),
            (BinOp::Sub, Scalar(x), Scalar(y)) => self.finite(x - y, span),
            (BinOp::Mul, Scalar(x), Scalar(y)) => self.finite(x * y, span),
            (BinOp::Div, Scalar(x), Scalar(y)) => {
                if y.norm() == 0.0 {
                    return Err(err(ErrorCode::NumericDomain, span, "division by zero"));
                }
                self.finite(x / y, span)
            }
            (BinOp::Add, Ket(x), Ket(y)) => x.checked_add(&y).map(Ket).map_err(q),
            (BinOp::Sub, Ket(x), Ket(y)) => x.checked_sub(&y).map(Ket).map_err(q),
            (BinOp::Add, Matrix(x), Matrix(y)) => x.checked_add(&y).map(Matrix).map_err(q),
            (BinOp::Sub, Matrix(x), Matrix(y)) => x.checked_sub(&y).map(Matrix).map_err(q),
            (BinOp::Mul, Matrix(x), Matrix(y)) => x.checked_mul(&y).map(Matrix).map_err(q),
            (BinOp::Mul, Matrix(x), Ket(k)) => x.apply(&k).map(Ket).map_err(q),
            (BinOp::Mul, Scalar(c), v) | (BinOp::Mul, v @ (Ket(_) | Matrix(_)), Scalar(c)) => self.scale(c, v, span),
            (BinOp::Div, v @ (Ket(_) | Matrix(_)), Scalar(c)) => {
                if c.norm() == 0.0 {
                    return Err(err(ErrorCode::NumericDomain, span, "division by zero"));
                }
                self.scale(Complex64::new(1.0, 0.0) / c, v, span)
            }
            (_, a, b) => Err(mismatch(&a, &b)),
        }
    }

    fn call(&self, func: &Ident, args: &[Expr], span: Span) -> Result<Value> {
        let arity = |n: usize| -> Result<()> {
            if args.len() != n {
                Err(err(
                    ErrorCode::ArgumentCount,
                    span,
                    format!("`{}` takes {n} argument(s), found {}", func.name, args.len()),
                ))
            } else {
                Ok(())
            }
        };
        let q = |e: QalgError| qalg_err(e, span);
        let ket = |e: &Expr| -> Result<Ket> {
            match self.eval(e)? {
                Value::Ket(k) => Ok(k),
                other => Err(err(ErrorCode::TypeError, e.span(), format!("expected a ket, found {}", other.kind()))),
            }
        };
        let proj = |e: &Expr| -> Result<Projector> { self.projector(self.eval(e)?, e.span()) };
        match func.name.as_str() {
            "sqrt" | "exp" | "cos" | "sin" | "conj" => {
                arity(1)?;
                let z = self.scalar(&args[0])?;
                let r = match func.name.as_str() {
                    "sqrt" => z.sqrt(),
                    "exp" => z.exp(),
                    "cos" => z.cos(),
                    "sin" => z.sin(),
                    _ => z.conj(),
                };
                self.finite(r, span)
            }
            "normalize" => {
                arity(1)?;
                ket(&args[0])?.normalized().map(Value::Ket).map_err(q)
            }
            "basis" => {
                let (n, k) = match args.len() {
                    1 => (self.dim, self.index(&args[0])?),
                    2 => (self.index(&args[0])?, self.index(&args[1])?),
                    _ => return Err(err(ErrorCode::ArgumentCount, span, "`basis` takes 1 or 2 arguments")),
                };
                if n == 0 || k >= n {
                    return Err(err(ErrorCode::NumericDomain, span, format!("basis index {k} out of range for dimension {n}")));
                }
                Ket::basis(n, k).map(Value::Ket).map_err(q)
            }
            "span" => {
                if args.is_empty() {
                    return Err(err(ErrorCode::ArgumentCount, span, "`span` needs at least one ket"));
                }
                let kets = args.iter().map(ket).collect::<Result<Vec<_>>>()?;
                projector_from_kets(&kets, self.tol.structural).map(Value::Proj).map_err(q)
            }
            "dyad" => {
                arity(1)?;
                Projector::from_ket(&ket(&args[0])?).map(Value::Proj).map_err(q)
            }
            "outer" => {
                arity(2)?;
                CMatrix::outer(&ket(&args[0])?, &ket(&args[1])?).map(Value::Matrix).map_err(q)
            }
            "diag" => {
                if args.is_empty() {
                    return Err(err(ErrorCode::ArgumentCount, span, "`diag` needs at least one entry"));
                }
                let d = args.iter().map(|a| self.scalar(a)).collect::<Result<Vec<_>>>()?;
                CMatrix::diag(&d).map(Value::Matrix).map_err(q)
            }
            "kron" => {
                arity(2)?;
                match (self.eval(&args[0])?, self.eval(&args[1])?) {
                    (Value::Ket(a), Value::Ket(b)) => Ok(Value::Ket(a.kron(&b))),
                    (a, b) => {
                        let a = self.as_matrix(a, args[0].span())?;
                        let b = self.as_matrix(b, args[1].span())?;
                        Ok(Value::Matrix(a.kron(&b)))
                    }
                }
            }
            "expm" => {
                arity(2)?;
                let h = self.matrix(&args[0])?;
                if !h.is_hermitian(self.tol.structural) {
                    return Err(err(ErrorCode::TypeError, args[0].span(), "expm needs a Hermitian generator"));
                }
                let t = self.real(&args[1])?;
                unitary_from_hamiltonian(&h, t, 0.0, self.tol.structural).map(Value::Matrix).map_err(q)
            }
            "adjoint" => {
                arity(1)?;
                Ok(Value::Matrix(self.matrix(&args[0])?.adjoint()))
            }
            "complement" => {
                arity(1)?;
                Ok(Value::Proj(proj(&args[0])?.complement()))
            }
            "meet" | "join" => {
                arity(2)?;
                let (a, b) = (proj(&args[0])?, proj(&args[1])?);
                let r = if func.name == "meet" { a.meet(&b, self.tol.structural) } else { a.join(&b, self.tol.structural) };
                r.map(Value::Proj).map_err(q)
            }
            "identity" | "zero" => {
                arity(1)?;
                let n = self.index(&args[0])?;
                if n == 0 {
                    return Err(err(ErrorCode::NumericDomain, span, "dimension must be positive"));
                }
                Ok(Value::Proj(if func.name == "identity" { Projector::identity(n) } else { Projector::zero(n) }))
            }
            other => Err(err(ErrorCode::UnknownIdentifier, func.span, format!("unknown function `{other}`"))),
        }
    }

    fn event(&self, name: &Ident) -> Result<Projector> {
        let v = self.name(name)?;
        let p = self.projector(v, name.span)?;
        self.check_dim(p.dim(), name.span)?;
        Ok(p)
    }

    fn hsum(&self, s: &HSum, histories: &IndexMap<String, ProductHistory>) -> Result<Vec<ProductHistory>> {
        let mut out = Vec::new();
        for t in &s.terms {
            out.extend(self.hterm(t, histories)?);
        }
        Ok(out)
    }

    /// Cartesian slot-wise products; zero products are kept here and dropped
    /// by the caller where appropriate.
    fn hterm(&self, t: &HTerm, histories: &IndexMap<String, ProductHistory>) -> Result<Vec<ProductHistory>> {
        let mut acc: Option<Vec<ProductHistory>> = None;
        for f in &t.factors {
            let (items, span) = match f {
                HFactor::Event { complement, event, time } => {
                    let t = self.time(time)?;
                    let p = self.event(event)?;
                    let p = if *complement { p.complement() } else { p };
                    (vec![ProductHistory::single(t, p)], event.span)
                }
                HFactor::Identity { time } => {
                    (vec![ProductHistory::single(self.time(time)?, Projector::identity(self.dim))], time.span)
                }
                HFactor::Named(id) => {
                    let h = histories
                        .get(&id.name)
                        .ok_or_else(|| err(ErrorCode::UnknownIdentifier, id.span, format!("unknown history `{}`", id.name)))?;
                    (vec![h.clone()], id.span)
                }
                HFactor::Group(g) => (self.hsum(g, histories)?, g.span),
            };
            acc = Some(match acc {
                None => items,
                Some(prev) => {
                    let mut next = Vec::with_capacity(prev.len() * items.len());
                    for a in &prev {
                        for b in &items {
                            next.push(a.meet(b, self.tol.structural).map_err(|e| history_err(e, span))?);
                        }
                    }
                    next
                }
            });
        }
        Ok(acc.unwrap_or_default())
    }

    fn single_product(&self, t: &HTerm, histories: &IndexMap<String, ProductHistory>) -> Result<ProductHistory> {
        let mut v = self.hterm(t, histories)?;
        if v.len() != 1 {
            return Err(err(ErrorCode::TypeError, t.span, "expected a single product history, found a sum"));
        }
        Ok(v.remove(0))
    }

    fn second_pass(self, doc: &Document, dynamics: Arc<PropagatorFamily>, metric: OperatorMetric) -> Result<Scenario> {
        let mut histories: IndexMap<String, ProductHistory> = IndexMap::new();
        let mut frameworks: IndexMap<String, FrameworkEntry> = IndexMap::new();
        let mut data = InitialData::new(Arc::clone(&dynamics), metric.clone(), self.tol);
        let mut queries = Vec::new();
        let tol = self.tol.structural;
        for d in &doc.decls {
            match &d.kind {
                DeclKind::History { name, value } => {
                    let mut v = self.hsum(value, &histories)?;
                    if v.len() != 1 {
                        return Err(err(ErrorCode::TypeError, value.span, "a history must be a single product"));
                    }
                    histories.insert(name.name.clone(), v.remove(0));
                }
                DeclKind::Framework { name, value, within, expect_inconsistent } => {
                    let all = self.hsum(value, &histories)?;
                    let total = all.len();
                    let minimal: Vec<ProductHistory> = all.into_iter().filter(|h| !h.is_zero()).collect();
                    let dropped = total - minimal.len();
                    let decomposition = match within {
                        Some(cap) => {
                            let cap = self.single_product(cap, &histories)?;
                            Decomposition::with_cap(minimal, cap, tol)
                        }
                        None => Decomposition::new(minimal, tol),
                    }
                    .map_err(|e| err(ErrorCode::InvalidDecomposition, value.span, format!("framework `{}`: {e}", name.name)))?;
                    let decomposition = Arc::new(decomposition);
                    let (framework, report) =
                        match Framework::new(Arc::clone(&decomposition), Arc::clone(&dynamics), metric.clone()) {
                            Ok(f) => {
                                let r = f.report().clone();
                                (Some(f), r)
                            }
                            Err(ReasoningError::Inconsistent { report }) => (None, report),
                            Err(e) => return Err(err(ErrorCode::InvalidDecomposition, value.span, e.to_string())),
                        };
                    match (framework.is_some(), expect_inconsistent) {
                        (false, false) => {
                            return Err(err(
                                ErrorCode::InconsistentFramework,
                                name.span,
                                format!(
                                    "framework `{}` is not {}-consistent (worst overlap {:.3e})",
                                    name.name,
                                    report.mode,
                                    report.worst_magnitude()
                                ),
                            ))
                        }
                        (true, true) => {
                            return Err(err(
                                ErrorCode::UnexpectedConsistency,
                                name.span,
                                format!("framework `{}` is marked inconsistent but passes the check", name.name),
                            ))
                        }
                        _ => {}
                    }
                    frameworks.insert(
                        name.name.clone(),
                        FrameworkEntry {
                            name: name.name.clone(),
                            decomposition,
                            framework,
                            report,
                            expect_inconsistent: *expect_inconsistent,
                            dropped,
                            line: d.span.line,
                        },
                    );
                }
                DeclKind::Assume { framework, value } => {
                    let products: Vec<ProductHistory> =
                        self.hsum(value, &histories)?.into_iter().filter(|h| !h.is_zero()).collect();
                    let (f, element) = match framework {
                        Some(fid) => {
                            let entry = frameworks.get(&fid.name).ok_or_else(|| {
                                err(ErrorCode::UnknownIdentifier, fid.span, format!("unknown framework `{}`", fid.name))
                            })?;
                            let f = entry.framework.clone().ok_or_else(|| {
                                err(ErrorCode::InvalidData, fid.span, format!("framework `{}` is inconsistent", fid.name))
                            })?;
                            let mut acc = AlgebraElement::empty(f.decomposition());
                            for p in &products {
                                let e = f.element_of(p).ok_or_else(|| {
                                    err(ErrorCode::InvalidData, value.span, format!("not an element of framework `{}`", fid.name))
                                })?;
                                acc = acc.join(&e).expect("same owner");
                            }
                            (f, acc)
                        }
                        None => match self.partition_for(&products, &dynamics, &metric, value.span)? {
                            Some(pair) => pair,
                            None => continue,
                        },
                    };
                    data.assert(f, element).map_err(|e| err(ErrorCode::InvalidData, value.span, e.to_string()))?;
                }
                DeclKind::Query { name, targets, conditions, within, expect } => {
                    let t = targets.iter().map(|x| self.single_product(x, &histories)).collect::<Result<Vec<_>>>()?;
                    let c = conditions.iter().map(|x| self.single_product(x, &histories)).collect::<Result<Vec<_>>>()?;
                    let framework = match within {
                        Some(fid) => {
                            let entry = frameworks.get(&fid.name).ok_or_else(|| {
                                err(ErrorCode::UnknownIdentifier, fid.span, format!("unknown framework `{}`", fid.name))
                            })?;
                            Some(entry.framework.clone().ok_or_else(|| {
                                err(ErrorCode::InvalidData, fid.span, format!("framework `{}` is inconsistent", fid.name))
                            })?)
                        }
                        None => None,
                    };
                    let expected = match expect {
                        None => None,
                        Some(Expectation::True) => Some(Expected::True),
                        Some(Expectation::False) => Some(Expected::False),
                        Some(Expectation::Meaningless) => Some(Expected::Meaningless),
                        Some(Expectation::DataInconsistent) => Some(Expected::DataInconsistent),
                        Some(Expectation::Value(v)) => {
                            let p = self.real(v)?;
                            if !(0.0..=1.0).contains(&p) {
                                return Err(err(ErrorCode::NumericDomain, v.span(), "expected probability must lie in [0, 1]"));
                            }
                            Some(Expected::Probability(p))
                        }
                    };
                    let mut text = targets.iter().map(term_text).collect::<Vec<_>>().join(", ");
                    if !conditions.is_empty() {
                        text.push_str(" | ");
                        text.push_str(&conditions.iter().map(term_text).collect::<Vec<_>>().join(", "));
                    }
                    if let Some(w) = within {
                        text.push_str(" in ");
                        text.push_str(&w.name);
                    }
                    queries.push(QuerySpec {
                        name: name.name.clone(),
                        text,
                        targets: t,
                        conditions: c,
                        framework_name: within.as_ref().map(|w| w.name.clone()),
                        framework,
                        expected,
                        line: d.span.line,
                    });
                }
                _ => {}
            }
        }
        let mut kets = IndexMap::new();
        let mut projectors = IndexMap::new();
        let mut operators = IndexMap::new();
        for (name, (kind, v)) in self.values {
            match (kind, v) {
                (ValueKind::Ket, Value::Ket(k)) => {
                    kets.insert(name, k);
                }
                (ValueKind::Proj, Value::Proj(p)) => {
                    projectors.insert(name, p);
                }
                (_, Value::Matrix(m)) => {
                    operators.insert(name, m);
                }
                _ => {}
            }
        }
        Ok(Scenario {
            name: self.name,
            dim: self.dim,
            tolerances: self.tol,
            mode: self.mode,
            times: self.times,
            kets,
            projectors,
            operators,
            dynamics,
            metric,
            histories,
            frameworks,
            data,
            queries,
            warnings: self.warnings,
        })
    }

    /// `assume E@t;` without a framework asserts `E` in `{E, I−E}` at `t`.
    fn partition_for(
        &self,
        products: &[ProductHistory],
        dynamics: &Arc<PropagatorFamily>,
        metric: &OperatorMetric,
        span: Span,
    ) -> Result<Option<(Arc<Framework>, AlgebraElement)>> {
        let [p] = products else {
            return Err(err(ErrorCode::InvalidData, span, "assumption without a framework must be a single event"));
        };
        let slots: Vec<usize> = (0..p.grid().len()).filter(|&k| !p.events()[k].is_identity()).collect();
        let k = match slots.as_slice() {
            [] => return Ok(None),
            [k] => *k,
            _ => return Err(err(ErrorCode::InvalidData, span, "assumption without a framework must be a single event")),
        };
        let t = p.grid().labels()[k];
        let e = p.events()[k].clone();
        let d = Decomposition::new(
            vec![ProductHistory::single(t, e.clone()), ProductHistory::single(t, e.complement())],
            self.tol.structural,
        )
        .map_err(|e| err(ErrorCode::InvalidData, span, e.to_string()))?;
        let f = Framework::new(Arc::new(d), Arc::clone(dynamics), metric.clone())
            .map_err(|e| err(ErrorCode::InvalidData, span, e.to_string()))?;
        let el = AlgebraElement::minimal(f.decomposition(), 0);
        Ok(Some((f, el)))
    }
}
