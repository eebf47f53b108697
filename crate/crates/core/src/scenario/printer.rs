// Copyright 2026 Chronos Contributors
// SPDX-License-Identifier: Apache-2.0

//! Canonical text form of a parsed document, one declaration per line.

use std::fmt::Write;

use super::ast::*;

pub fn print_document(doc: &Document) -> String {
    let mut out = String::new();
    for d in &doc.decls {
        print_decl(&mut out, d);
        out.push_str(";\n");
    }
    out
}

fn print_decl(out: &mut String, d: &Decl) {
    match &d.kind {
        DeclKind::Space { dim } => {
            let _ = write!(out, "space dim {dim}");
        }
        DeclKind::Tolerance { kind, value } => {
            out.push_str("tolerance ");
            if *kind == ToleranceKind::Probability {
                out.push_str("prob ");
            }
            expr(out, value, 0);
        }
        DeclKind::Value { kind, name, value } => {
            let _ = write!(out, "{} {} = ", kind.keyword(), name.name);
            expr(out, value, 0);
        }
        DeclKind::Times { entries } => {
            out.push_str("times ");
            for (k, (name, value)) in entries.iter().enumerate() {
                if k > 0 {
                    out.push_str(", ");
                }
                let _ = write!(out, "{} = ", name.name);
                expr(out, value, 0);
            }
        }
        DeclKind::Evolve(Evolve::Identity) => out.push_str("evolve identity"),
        DeclKind::Evolve(Evolve::Hamiltonian(h)) => {
            out.push_str("evolve hamiltonian ");
            expr(out, h, 0);
        }
        DeclKind::Evolve(Evolve::Step { from, to, unitary }) => {
            let _ = write!(out, "evolve {} -> {} = ", from.name, to.name);
            expr(out, unitary, 0);
        }
        DeclKind::History { name, value } => {
            let _ = write!(out, "history {} = ", name.name);
            hsum(out, value);
        }
        DeclKind::Framework { name, value, within, expect_inconsistent } => {
            let _ = write!(out, "framework {} = ", name.name);
            hsum(out, value);
            if let Some(w) = within {
                out.push_str(" within ");
                hterm(out, w);
            }
            if *expect_inconsistent {
                out.push_str(" expect inconsistent");
            }
        }
        DeclKind::Assume { framework, value } => {
            out.push_str("assume ");
            if let Some(f) = framework {
                let _ = write!(out, "{} : ", f.name);
            }
            hsum(out, value);
        }
        DeclKind::Query { name, targets, conditions, within, expect } => {
            let _ = write!(out, "query {} = ", name.name);
            term_list(out, targets);
            if !conditions.is_empty() {
                out.push_str(" | ");
                term_list(out, conditions);
            }
            if let Some(w) = within {
                let _ = write!(out, " in {}", w.name);
            }
            if let Some(e) = expect {
                out.push_str(" expect ");
                match e {
                    Expectation::True => out.push_str("true"),
                    Expectation::False => out.push_str("false"),
                    Expectation::Meaningless => out.push_str("meaningless"),
                    Expectation::DataInconsistent => out.push_str("data-inconsistent"),
                    Expectation::Value(v) => expr(out, v, 0),
                }
            }
        }
    }
}

/// Source form of a single history term.
pub(crate) fn term_text(t: &HTerm) -> String {
    let mut out = String::new();
    hterm(&mut out, t);
    out
}

fn term_list(out: &mut String, terms: &[HTerm]) {
    for (k, t) in terms.iter().enumerate() {
        if k > 0 {
            out.push_str(", ");
        }
        hterm(out, t);
    }
}

fn hsum(out: &mut String, s: &HSum) {
    for (k, t) in s.terms.iter().enumerate() {
        if k > 0 {
            out.push_str(" + ");
        }
        hterm(out, t);
    }
}

fn hterm(out: &mut String, t: &HTerm) {
    for (k, f) in t.factors.iter().enumerate() {
        if k > 0 {
            out.push(' ');
        }
        match f {
            HFactor::Event { complement, event, time } => {
                if *complement {
                    out.push('~');
                }
                let _ = write!(out, "{}@{}", event.name, time.name);
            }
            HFactor::Identity { time } => {
                let _ = write!(out, "*@{}", time.name);
            }
            HFactor::Named(n) => out.push_str(&n.name),
            HFactor::Group(s) => {
                out.push('{');
                hsum(out, s);
                out.push('}');
            }
        }
    }
}

/// Precedence levels: 0 additive, 1 multiplicative, 2 unary.
fn expr(out: &mut String, e: &Expr, level: u8) {
    match e {
        Expr::Number { value, imaginary, .. } => {
            let _ = write!(out, "{value}");
            if *imaginary {
                out.push('i');
            }
        }
        Expr::Name(id) => out.push_str(&id.name),
        Expr::Vector { items, .. } => {
            out.push('[');
            list(out, items);
            out.push(']');
        }
        Expr::Matrix { rows, .. } => {
            out.push('[');
            for (k, r) in rows.iter().enumerate() {
                if k > 0 {
                    out.push_str(", ");
                }
                out.push('[');
                list(out, r);
                out.push(']');
            }
            out.push(']');
        }
        Expr::Neg { expr: inner, .. } => {
            out.push('-');
            expr(out, inner, 2);
        }
        Expr::Complement { expr: inner, .. } => {
            out.push('~');
            expr(out, inner, 2);
        }
        Expr::Binary { op, lhs, rhs, .. } => {
            let own = match op {
                BinOp::Add | BinOp::Sub => 0,
                BinOp::Mul | BinOp::Div => 1,
            };
            let wrap = own < level;
            if wrap {
                out.push('(');
            }
            expr(out, lhs, own);
            let _ = write!(out, " {} ", op.symbol());
            expr(out, rhs, own + 1);
            if wrap {
                out.push(')');
            }
        }
        Expr::Call { func, args, .. } => {
            out.push_str(&func.name);
            out.push('(');
            list(out, args);
            out.push(')');
        }
    }
}

fn list(out: &mut String, items: &[Expr]) {
    for (k, e) in items.iter().enumerate() {
        if k > 0 {
            out.push_str(", ");
        }
        expr(out, e, 0);
    }
}
