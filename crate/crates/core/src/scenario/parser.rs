// Copyright 2026 Chronos Contributors
// SPDX-License-Identifier: Apache-2.0

use std::collections::HashMap;

use super::ast::*;
use super::error::{ErrorCode, Result, ScenarioError};
use super::lexer::{check_delimiters, tokenize, Tok, Token};

/// Words that cannot name declarations.
pub const RESERVED: &[&str] = &[
    "space", "dim", "tolerance", "prob", "ket", "proj", "operator", "unitary", "density", "times", "evolve",
    "identity", "hamiltonian", "history", "framework", "within", "expect", "inconsistent", "assume", "query", "in",
    "i", "pi", "zero", "true", "false", "meaningless",
];

pub fn parse_document(src: &str) -> Result<Document> {
    let tokens = tokenize(src)?;
    check_delimiters(&tokens)?;
    if tokens.is_empty() {
        return Err(ScenarioError::new(ErrorCode::EmptyDocument, Span::new(1, 1), "document has no declarations"));
    }
    let mut p = Parser { tokens, pos: 0, names: HashMap::new() };
    let mut decls = Vec::new();
    while p.pos < p.tokens.len() {
        decls.push(p.declaration()?);
    }
    Ok(Document { decls })
}

#[derive(Clone, Copy, PartialEq, Eq, Hash)]
enum Namespace {
    Value,
    Time,
    History,
    Framework,
    Query,
}

struct Parser {
    tokens: Vec<Token>,
    pos: usize,
    names: HashMap<(Namespace, String), Span>,
}

impl Parser {
    fn peek(&self) -> Option<&Tok> {
        self.tokens.get(self.pos).map(|t| &t.tok)
    }

    fn peek_at(&self, k: usize) -> Option<&Tok> {
        self.tokens.get(self.pos + k).map(|t| &t.tok)
    }

    fn span(&self) -> Span {
        self.tokens
            .get(self.pos)
            .or_else(|| self.tokens.last())
            .map(|t| t.span)
            .unwrap_or_default()
    }

    fn eof(&self, what: &str) -> ScenarioError {
        ScenarioError::new(ErrorCode::UnexpectedEof, self.span(), format!("input ends where {what} was expected"))
    }

    fn unexpected(&self, what: &str) -> ScenarioError {
        match self.tokens.get(self.pos) {
            None => self.eof(what),
            Some(t) => ScenarioError::new(
                ErrorCode::UnexpectedToken,
                t.span,
                format!("expected {what}, found {}", t.tok.describe()),
            ),
        }
    }

    fn bump(&mut self) -> Token {
        let t = self.tokens[self.pos].clone();
        self.pos += 1;
        t
    }

    fn eat(&mut self, tok: &Tok) -> bool {
        if self.peek() == Some(tok) {
            self.pos += 1;
            true
        } else {
            false
        }
    }

    fn expect(&mut self, tok: Tok) -> Result<Span> {
        if self.peek() == Some(&tok) {
            Ok(self.bump().span)
        } else {
            Err(self.unexpected(&tok.describe()))
        }
    }

    fn is_word(&self, word: &str) -> bool {
        matches!(self.peek(), Some(Tok::Ident(s)) if s == word)
    }

    fn eat_word(&mut self, word: &str) -> bool {
        if self.is_word(word) {
            self.pos += 1;
            true
        } else {
            false
        }
    }

    fn expect_word(&mut self, word: &str) -> Result<Span> {
        if self.is_word(word) {
            Ok(self.bump().span)
        } else {
            Err(self.unexpected(&format!("`{word}`")))
        }
    }

    fn semicolon(&mut self) -> Result<()> {
        if self.eat(&Tok::Semi) {
            return Ok(());
        }
        let prev = self.tokens[self.pos - 1].span;
        match self.tokens.get(self.pos) {
            None => Err(ScenarioError::new(ErrorCode::MissingSemicolon, prev, "missing `;` at end of declaration")),
            Some(t) if t.span.line > prev.line => {
                Err(ScenarioError::new(ErrorCode::MissingSemicolon, prev, "missing `;` at end of declaration"))
            }
            Some(_) => Err(self.unexpected("`;`")),
        }
    }

    fn ident(&mut self) -> Result<Ident> {
        match self.peek() {
            Some(Tok::Ident(_)) => {
                let t = self.bump();
                let Tok::Ident(name) = t.tok else { unreachable!() };
                Ok(Ident { name, span: t.span })
            }
            _ => Err(self.unexpected("identifier")),
        }
    }

    fn declare(&mut self, ns: Namespace) -> Result<Ident> {
        let id = self.ident()?;
        if RESERVED.contains(&id.name.as_str()) {
            return Err(ScenarioError::new(
                ErrorCode::UnexpectedToken,
                id.span,
                format!("`{}` is a reserved word", id.name),
            ));
        }
        if let Some(prev) = self.names.insert((ns, id.name.clone()), id.span) {
            return Err(ScenarioError::new(
                ErrorCode::DuplicateIdentifier,
                id.span,
                format!("`{}` is already declared on line {}", id.name, prev.line),
            ));
        }
        Ok(id)
    }

    fn declaration(&mut self) -> Result<Decl> {
        let span = self.span();
        let keyword = match self.peek() {
            Some(Tok::Ident(s)) => s.clone(),
            _ => return Err(self.unexpected("a declaration keyword")),
        };
        self.pos += 1;
        let kind = match keyword.as_str() {
            "space" => {
                self.expect_word("dim")?;
                let t = self.tokens.get(self.pos).cloned().ok_or_else(|| self.eof("a dimension"))?;
                let dim = match t.tok {
                    Tok::Number { value, imaginary: false } if value >= 1.0 && value.fract() == 0.0 => value as usize,
                    _ => return Err(self.unexpected("a positive integer dimension")),
                };
                self.pos += 1;
                DeclKind::Space { dim }
            }
            "tolerance" => {
                let kind = if self.eat_word("prob") { ToleranceKind::Probability } else { ToleranceKind::Structural };
                DeclKind::Tolerance { kind, value: self.expr()? }
            }
            "ket" | "proj" | "operator" | "unitary" | "density" => {
                let kind = match keyword.as_str() {
                    "ket" => ValueKind::Ket,
                    "proj" => ValueKind::Proj,
                    "operator" => ValueKind::Operator,
                    "unitary" => ValueKind::Unitary,
                    _ => ValueKind::Density,
                };
                let name = self.declare(Namespace::Value)?;
                self.expect(Tok::Eq)?;
                DeclKind::Value { kind, name, value: self.expr()? }
            }
            "times" => {
                let mut entries = Vec::new();
                loop {
                    let name = self.declare(Namespace::Time)?;
                    self.expect(Tok::Eq)?;
                    entries.push((name, self.expr()?));
                    if !self.eat(&Tok::Comma) {
                        break;
                    }
                }
                DeclKind::Times { entries }
            }
            "evolve" => {
                if self.eat_word("identity") {
                    DeclKind::Evolve(Evolve::Identity)
                } else if self.eat_word("hamiltonian") {
                    DeclKind::Evolve(Evolve::Hamiltonian(self.expr()?))
                } else {
                    let from = self.ident()?;
                    self.expect(Tok::Arrow)?;
                    let to = self.ident()?;
                    self.expect(Tok::Eq)?;
                    DeclKind::Evolve(Evolve::Step { from, to, unitary: self.expr()? })
                }
            }
            "history" => {
                let name = self.declare(Namespace::History)?;
                self.expect(Tok::Eq)?;
                DeclKind::History { name, value: self.hsum()? }
            }
            "framework" => {
                let name = self.declare(Namespace::Framework)?;
                self.expect(Tok::Eq)?;
                let value = self.hsum()?;
                let within = if self.eat_word("within") { Some(self.hterm()?) } else { None };
                let expect_inconsistent = if self.eat_word("expect") {
                    self.expect_word("inconsistent")?;
                    true
                } else {
                    false
                };
                DeclKind::Framework { name, value, within, expect_inconsistent }
            }
            "assume" => {
                let framework = if matches!(self.peek(), Some(Tok::Ident(_))) && self.peek_at(1) == Some(&Tok::Colon) {
                    let f = self.ident()?;
                    self.pos += 1;
                    Some(f)
                } else {
                    None
                };
                DeclKind::Assume { framework, value: self.hsum()? }
            }
            "query" => {
                let name = self.declare(Namespace::Query)?;
                self.expect(Tok::Eq)?;
                let targets = self.term_list()?;
                let conditions = if self.eat(&Tok::Bar) { self.term_list()? } else { Vec::new() };
                let within = if self.eat_word("in") { Some(self.ident()?) } else { None };
                let expect = if self.eat_word("expect") { Some(self.expectation()?) } else { None };
                DeclKind::Query { name, targets, conditions, within, expect }
            }
            other => {
                return Err(ScenarioError::new(ErrorCode::UnknownKeyword, span, format!("unknown declaration `{other}`")))
            }
        };
        self.semicolon()?;
        Ok(Decl { kind, span })
    }

    fn expectation(&mut self) -> Result<Expectation> {
        if self.eat_word("true") {
            Ok(Expectation::True)
        } else if self.eat_word("false") {
            Ok(Expectation::False)
        } else if self.eat_word("meaningless") {
            Ok(Expectation::Meaningless)
        } else if self.is_word("data") && self.peek_at(1) == Some(&Tok::Minus) {
            self.pos += 2;
            self.expect_word("inconsistent")?;
            Ok(Expectation::DataInconsistent)
        } else {
            Ok(Expectation::Value(self.expr()?))
        }
    }

    fn term_list(&mut self) -> Result<Vec<HTerm>> {
        let mut out = vec![self.hterm()?];
        while self.eat(&Tok::Comma) {
            out.push(self.hterm()?);
        }
        Ok(out)
    }

    fn hsum(&mut self) -> Result<HSum> {
        let span = self.span();
        let mut terms = vec![self.hterm()?];
        while self.eat(&Tok::Plus) {
            terms.push(self.hterm()?);
        }
        Ok(HSum { terms, span })
    }

    fn starts_factor(&self) -> bool {
        match self.peek() {
            Some(Tok::Tilde) | Some(Tok::Star) | Some(Tok::LBrace) => true,
            Some(Tok::Ident(s)) => !RESERVED.contains(&s.as_str()),
            _ => false,
        }
    }

    fn hterm(&mut self) -> Result<HTerm> {
        let span = self.span();
        if !self.starts_factor() {
            return Err(self.unexpected("a history term"));
        }
        let mut factors = Vec::new();
        while self.starts_factor() {
            factors.push(self.hfactor()?);
        }
        Ok(HTerm { factors, span })
    }

    fn hfactor(&mut self) -> Result<HFactor> {
        if self.eat(&Tok::LBrace) {
            let inner = self.hsum()?;
            self.expect(Tok::RBrace)?;
            return Ok(HFactor::Group(inner));
        }
        if self.eat(&Tok::Star) {
            self.expect(Tok::At)?;
            return Ok(HFactor::Identity { time: self.ident()? });
        }
        let complement = self.eat(&Tok::Tilde);
        let name = self.ident()?;
        if self.eat(&Tok::At) {
            Ok(HFactor::Event { complement, event: name, time: self.ident()? })
        } else if complement {
            Err(self.unexpected("`@` after a complemented event"))
        } else {
            Ok(HFactor::Named(name))
        }
    }

    fn expr(&mut self) -> Result<Expr> {
        let mut lhs = self.term()?;
        loop {
            let op = match self.peek() {
                Some(Tok::Plus) => BinOp::Add,
                Some(Tok::Minus) => BinOp::Sub,
                _ => return Ok(lhs),
            };
            let span = self.bump().span;
            let rhs = self.term()?;
            lhs = Expr::Binary { op, lhs: Box::new(lhs), rhs: Box::new(rhs), span };
        }
    }

    fn term(&mut self) -> Result<Expr> {
        let mut lhs = self.unary()?;
        loop {
            let op = match self.peek() {
                Some(Tok::Star) => BinOp::Mul,
                Some(Tok::Slash) => BinOp::Div,
                _ => return Ok(lhs),
            };
            let span = self.bump().span;
            let rhs = self.unary()?;
            lhs = Expr::Binary { op, lhs: Box::new(lhs), rhs: Box::new(rhs), span };
        }
    }

    fn unary(&mut self) -> Result<Expr> {
        let span = self.span();
        if self.eat(&Tok::Minus) {
            return Ok(Expr::Neg { expr: Box::new(self.unary()?), span });
        }
        if self.eat(&Tok::Tilde) {
            return Ok(Expr::Complement { expr: Box::new(self.unary()?), span });
        }
        self.primary()
    }

    fn primary(&mut self) -> Result<Expr> {
        let Some(t) = self.tokens.get(self.pos).cloned() else {
            return Err(self.eof("an expression"));
        };
        match t.tok {
            Tok::Number { value, imaginary } => {
                self.pos += 1;
                Ok(Expr::Number { value, imaginary, span: t.span })
            }
            Tok::Ident(_) => {
                let id = self.ident()?;
                if self.eat(&Tok::LParen) {
                    let mut args = Vec::new();
                    if !self.eat(&Tok::RParen) {
                        loop {
                            args.push(self.expr()?);
                            if self.eat(&Tok::RParen) {
                                break;
                            }
                            self.expect(Tok::Comma)?;
                        }
                    }
                    Ok(Expr::Call { span: id.span, func: id, args })
                } else {
                    Ok(Expr::Name(id))
                }
            }
            Tok::LParen => {
                self.pos += 1;
                let e = self.expr()?;
                self.expect(Tok::RParen)?;
                Ok(e)
            }
            Tok::LBracket => {
                self.pos += 1;
                if self.peek() == Some(&Tok::LBracket) {
                    let mut rows = Vec::new();
                    loop {
                        self.expect(Tok::LBracket)?;
                        rows.push(self.expr_list(Tok::RBracket)?);
                        if self.eat(&Tok::RBracket) {
                            break;
                        }
                        self.expect(Tok::Comma)?;
                    }
                    Ok(Expr::Matrix { rows, span: t.span })
                } else {
                    Ok(Expr::Vector { items: self.expr_list(Tok::RBracket)?, span: t.span })
                }
            }
            _ => Err(self.unexpected("an expression")),
        }
    }

    /// Comma-separated expressions up to and including `close`.
    fn expr_list(&mut self, close: Tok) -> Result<Vec<Expr>> {
        let mut items = vec![self.expr()?];
        loop {
            if self.eat(&close) {
                return Ok(items);
            }
            self.expect(Tok::Comma)?;
            items.push(self.expr()?);
        }
    }
}
