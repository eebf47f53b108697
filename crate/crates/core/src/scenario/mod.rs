// Copyright 2026 Chronos Contributors
// SPDX-License-Identifier: Apache-2.0

//! The `.chs` scenario language: parsing, printing and elaboration into an
//! executable [`Scenario`]. The grammar is documented in
//! `docs/scenario-language.md`.

pub mod ast;
mod elaborate;
pub mod error;
mod lexer;
mod parser;
mod printer;

use std::sync::Arc;
use std::time::{Duration, Instant};

use indexmap::IndexMap;
use rayon::prelude::*;

use crate::framework::{ConsistencyReport, Decomposition};
use crate::histories::ProductHistory;
use crate::qalg::{CMatrix, ConsistencyMode, Ket, OperatorMetric, Projector, PropagatorFamily};
use crate::reasoning::{query, query_in, Framework, InitialData, ReasoningError, Tolerances, Verdict, VerdictKind};

pub use ast::{Document, Span};
pub use error::{ErrorCode, ScenarioError};
pub use parser::RESERVED;
pub use printer::print_document;

/// Scenario text with a label for diagnostics.
#[derive(Debug, Clone)]
pub struct ScenarioSource {
    pub name: String,
    pub text: String,
}

impl ScenarioSource {
    pub fn new(name: impl Into<String>, text: impl Into<String>) -> Self {
        ScenarioSource { name: name.into(), text: text.into() }
    }
}

/// Overrides applied on top of the document's own settings.
#[derive(Debug, Clone, Copy, Default)]
pub struct ElaborateOptions {
    pub mode: Option<ConsistencyMode>,
    pub tol: Option<f64>,
    pub tol_prob: Option<f64>,
}

pub fn parse(src: &ScenarioSource) -> error::Result<Document> {
    parser::parse_document(&src.text)
}

pub fn elaborate(doc: &Document, name: &str, options: &ElaborateOptions) -> error::Result<Scenario> {
    elaborate::elaborate_document(doc, name, options)
}

/// Parses and elaborates in one step.
pub fn load(src: &ScenarioSource, options: &ElaborateOptions) -> error::Result<Scenario> {
    elaborate(&parse(src)?, &src.name, options)
}

#[derive(Debug, Clone)]
pub struct FrameworkEntry {
    pub name: String,
    pub decomposition: Arc<Decomposition>,
    /// `None` for families declared `expect inconsistent`.
    pub framework: Option<Arc<Framework>>,
    pub report: ConsistencyReport,
    pub expect_inconsistent: bool,
    /// Zero products removed before the consistency check.
    pub dropped: usize,
    pub line: usize,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub enum Expected {
    True,
    False,
    Meaningless,
    DataInconsistent,
    Probability(f64),
}

impl Expected {
    pub fn describe(&self) -> String {
        match self {
            Expected::True => "true".into(),
            Expected::False => "false".into(),
            Expected::Meaningless => "meaningless".into(),
            Expected::DataInconsistent => "data-inconsistent".into(),
            Expected::Probability(p) => format!("{p}"),
        }
    }

    /// Whether `verdict` satisfies the expectation, comparing probabilities
    /// within `tol`.
    pub fn met_by(&self, verdict: &Verdict, tol: f64) -> bool {
        match self {
            Expected::True => verdict.kind == VerdictKind::True,
            Expected::False => verdict.kind == VerdictKind::False,
            Expected::Meaningless => verdict.kind == VerdictKind::Meaningless,
            Expected::DataInconsistent => verdict.kind == VerdictKind::DataInconsistent,
            Expected::Probability(p) => verdict.probability.is_some_and(|q| (q - p).abs() <= tol),
        }
    }
}

#[derive(Debug, Clone)]
pub struct QuerySpec {
    pub name: String,
    /// Canonical source text of the query.
    pub text: String,
    pub targets: Vec<ProductHistory>,
    pub conditions: Vec<ProductHistory>,
    pub framework_name: Option<String>,
    pub framework: Option<Arc<Framework>>,
    pub expected: Option<Expected>,
    pub line: usize,
}

#[derive(Debug, Clone)]
pub struct QueryOutcome {
    pub name: String,
    pub text: String,
    pub result: Result<Verdict, ReasoningError>,
    pub expected: Option<Expected>,
    pub expectation_met: Option<bool>,
    pub elapsed: Duration,
}

/// Fully resolved scenario.
#[derive(Debug, Clone)]
pub struct Scenario {
    pub name: String,
    pub dim: usize,
    pub tolerances: Tolerances,
    pub mode: ConsistencyMode,
    pub times: IndexMap<String, f64>,
    pub kets: IndexMap<String, Ket>,
    pub projectors: IndexMap<String, Projector>,
    /// Operators, unitaries and density matrices.
    pub operators: IndexMap<String, CMatrix>,
    pub dynamics: Arc<PropagatorFamily>,
    pub metric: OperatorMetric,
    pub histories: IndexMap<String, ProductHistory>,
    pub frameworks: IndexMap<String, FrameworkEntry>,
    pub data: InitialData,
    pub queries: Vec<QuerySpec>,
    pub warnings: Vec<String>,
}

impl Scenario {
    pub fn run_query(&self, q: &QuerySpec) -> QueryOutcome {
        let start = Instant::now();
        let result = match &q.framework {
            Some(f) => query_in(&self.data, f, &q.targets, &q.conditions),
            None => query(&self.data, &q.targets, &q.conditions),
        };
        let elapsed = start.elapsed();
        let expectation_met = match (&q.expected, &result) {
            (Some(e), Ok(v)) => Some(e.met_by(v, self.tolerances.probability.max(1e-9))),
            (Some(_), Err(_)) => Some(false),
            (None, _) => None,
        };
        QueryOutcome {
            name: q.name.clone(),
            text: q.text.clone(),
            result,
            expected: q.expected,
            expectation_met,
            elapsed,
        }
    }

    /// Runs every query concurrently; results keep declaration order.
    pub fn execute(&self) -> Vec<QueryOutcome> {
        self.queries.par_iter().map(|q| self.run_query(q)).collect()
    }

    pub fn query(&self, name: &str) -> Option<&QuerySpec> {
        self.queries.iter().find(|q| q.name == name)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    const SPIN: &str = "space dim 2;\n\
        ket zp = [1, 0];\nket zm = [0, 1];\n\
        ket xp = (zp + zm) / sqrt(2);\nket xm = (zp - zm) / sqrt(2);\n\
        times t0 = 0;\n\
        framework Z = zp@t0 + zm@t0;\nframework X = xp@t0 + xm@t0;\n\
        query pz = zp@t0 in Z expect 1/2;\nquery px = xm@t0 in X expect 0.5;\n";

    fn load_str(s: &str) -> Result<Scenario, ScenarioError> {
        load(&ScenarioSource::new("test", s), &ElaborateOptions::default())
    }

    #[test]
    fn spin_half_scenario_runs() {
        let sc = load_str(SPIN).unwrap();
        assert_eq!(sc.frameworks.len(), 2);
        let out = sc.execute();
        assert_eq!(out.len(), 2);
        for o in &out {
            assert_eq!(o.expectation_met, Some(true), "{o:?}");
            assert!((o.result.as_ref().unwrap().probability.unwrap() - 0.5).abs() < 1e-12);
        }
    }

    #[test]
    fn elaboration_errors() {
        let e = |s: &str| load_str(s).unwrap_err();
        assert_eq!(e("ket a = [1];").code, ErrorCode::SpaceDeclaration);
        let err = e("space dim 2;\nket a = [1, 0];\ntimes t0 = 0;\nframework f = a@t1 + ~a@t0;");
        assert_eq!((err.code, err.line()), (ErrorCode::UnknownIdentifier, 4));
        assert_eq!(e("space dim 2;\nproj p = [[1, 1], [0, 1]];").code, ErrorCode::NotAProjector);
        assert_eq!(e("space dim 2;\nunitary u = [[1, 1], [0, 1]];").code, ErrorCode::NonUnitary);
        assert_eq!(e("space dim 2;\nket a = normalize([0, 0]);").code, ErrorCode::ZeroVector);
        assert_eq!(e("space dim 2;\nket a = [1, 0] + [1, 0, 0];").code, ErrorCode::DimensionMismatch);
        assert_eq!(e("space dim 2;\nket a = sqrt(1, 2);").code, ErrorCode::ArgumentCount);
        assert_eq!(e("space dim 2;\ntimes t0 = 0, t1 = 1;").code, ErrorCode::MissingDynamics);
        assert_eq!(e("space dim 2;\ntimes t0 = 1, t1 = 0;").code, ErrorCode::BadTimes);
        assert_eq!(e("space dim 2;\nket a = 1 / 0;").code, ErrorCode::NumericDomain);
        assert_eq!(e("space dim 2;\nket a = [1, 0] * [1, 0];").code, ErrorCode::TypeError);
        assert_eq!(e("space dim 2;\nket a = [1,0];\ntimes t0=0;\nframework f = a@t0;").code, ErrorCode::InvalidDecomposition);
        assert_eq!(e("space dim 2;\ndensity rho = [[1, 0], [0, 1]];").code, ErrorCode::InvalidDensity);
        assert_eq!(
            e("space dim 2;\nket a = [1,0];\ntimes t0=0;\nframework f = a@t0 + ~a@t0 expect inconsistent;").code,
            ErrorCode::UnexpectedConsistency
        );
        assert_eq!(
            e("space dim 2;\nket a=[1,0];\nket b=[1,1];\ntimes t0=0;\nhistory h = a@t0 b@t0;").code,
            ErrorCode::NonCommuting
        );
    }

    #[test]
    fn zero_products_are_dropped_and_counted() {
        let src = "space dim 3;\nket a = basis(0);\nket b = basis(1);\nproj ab = span(a, b);\ntimes t0 = 0;\n\
                   framework f = {ab@t0 + ~ab@t0}{a@t0 + ~a@t0};";
        let sc = load_str(src).unwrap();
        let f = &sc.frameworks["f"];
        assert_eq!(f.decomposition.len(), 3);
        assert_eq!(f.dropped, 1);
    }

    #[test]
    fn rho_mode_requires_density() {
        let opts = ElaborateOptions { mode: Some(ConsistencyMode::Rho), ..Default::default() };
        let err = load(&ScenarioSource::new("t", SPIN), &opts).unwrap_err();
        assert_eq!(err.code, ErrorCode::InvalidDensity);
        let with_rho = format!("{SPIN}density rho = zp;\n");
        let sc = load(&ScenarioSource::new("t", with_rho), &opts).unwrap();
        assert!(matches!(sc.metric, OperatorMetric::InitialRho(_)));
    }
}
