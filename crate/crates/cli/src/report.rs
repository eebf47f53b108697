// Copyright 2026 Chronos Contributors
// SPDX-License-Identifier: Apache-2.0

//! Serializable result records. Field order is fixed so that output is
//! byte-stable for a given scenario and flag set, timing fields aside.

use serde::Serialize;

use chronos::framework::{ConsistencyReport, WorstPair};
use chronos::reasoning::{Framework, MeaninglessReason, Verdict};
use chronos::scenario::{FrameworkEntry, QueryOutcome, Scenario};

pub const RUN_SCHEMA: &str = "chronos.run/1";
pub const CHECK_SCHEMA: &str = "chronos.check/1";
pub const CORPUS_SCHEMA: &str = "chronos.corpus/1";
pub const ERROR_SCHEMA: &str = "chronos.error/1";

/// Rounds to 12 significant digits.
pub fn sig12(x: f64) -> f64 {
    if x == 0.0 {
        // keeps "-0.0" out of the output
        return 0.0;
    }
    if !x.is_finite() {
        return x;
    }
    format!("{x:.11e}").parse().unwrap_or(x)
}

#[derive(Debug, Serialize)]
pub struct Tolerances {
    pub structural: f64,
    pub probability: f64,
}

#[derive(Debug, Serialize)]
pub struct Pair {
    pub first: usize,
    pub second: usize,
    pub magnitude: f64,
}

impl From<&WorstPair> for Pair {
    fn from(w: &WorstPair) -> Self {
        Pair { first: w.first, second: w.second, magnitude: sig12(w.magnitude) }
    }
}

#[derive(Debug, Serialize)]
pub struct FrameworkSummary {
    pub elements: usize,
    pub grid: Vec<f64>,
    pub worst_magnitude: f64,
}

impl From<&Framework> for FrameworkSummary {
    fn from(f: &Framework) -> Self {
        FrameworkSummary {
            elements: f.len(),
            grid: f.decomposition().grid().labels().iter().map(|&t| sig12(t)).collect(),
            worst_magnitude: sig12(f.report().worst_magnitude()),
        }
    }
}

#[derive(Debug, Serialize)]
#[serde(tag = "kind", rename_all = "kebab-case")]
pub enum Reason {
    NonCommuting { time: f64, deviation: f64 },
    Inconsistent { worst: Option<Pair> },
    NotInFramework,
}

impl From<&MeaninglessReason> for Reason {
    fn from(m: &MeaninglessReason) -> Self {
        match m {
            MeaninglessReason::NonCommuting { time, deviation } => {
                Reason::NonCommuting { time: sig12(*time), deviation: sig12(*deviation) }
            }
            MeaninglessReason::Inconsistent { worst } => Reason::Inconsistent { worst: worst.as_ref().map(Pair::from) },
            MeaninglessReason::NotInFramework => Reason::NotInFramework,
        }
    }
}

#[derive(Debug, Serialize)]
pub struct QueryResult {
    pub id: String,
    pub query: String,
    /// Verdict kind, or `"error"` when evaluation failed.
    pub verdict: String,
    pub probability: Option<f64>,
    pub raw_probability: Option<f64>,
    pub framework: Option<FrameworkSummary>,
    pub reason: Option<Reason>,
    pub detail: Option<String>,
    pub error: Option<String>,
    pub expected: Option<String>,
    pub expectation_met: Option<bool>,
    pub elapsed_us: u64,
}

impl QueryResult {
    pub fn from_outcome(o: &QueryOutcome) -> Self {
        let base = QueryResult {
            id: o.name.clone(),
            query: o.text.clone(),
            verdict: "error".into(),
            probability: None,
            raw_probability: None,
            framework: None,
            reason: None,
            detail: None,
            error: None,
            expected: o.expected.map(|e| e.describe()),
            expectation_met: o.expectation_met,
            elapsed_us: o.elapsed.as_micros() as u64,
        };
        match &o.result {
            Ok(v) => Self::with_verdict(base, v),
            Err(e) => QueryResult { error: Some(e.to_string()), ..base },
        }
    }

    fn with_verdict(base: QueryResult, v: &Verdict) -> Self {
        QueryResult {
            verdict: v.kind.as_str().into(),
            probability: v.probability.map(sig12),
            raw_probability: v.raw_probability.map(sig12),
            framework: v.framework.as_deref().map(FrameworkSummary::from),
            reason: v.meaningless.as_ref().map(Reason::from),
            detail: v.detail.clone(),
            ..base
        }
    }
}

#[derive(Debug, Serialize)]
pub struct Summary {
    pub queries: usize,
    pub expectations_unmet: usize,
    pub errors: usize,
    pub data_inconsistent: usize,
}

#[derive(Debug, Serialize)]
pub struct RunReport {
    pub schema: &'static str,
    pub scenario: String,
    pub dimension: usize,
    pub mode: &'static str,
    pub tolerances: Tolerances,
    pub warnings: Vec<String>,
    pub queries: Vec<QueryResult>,
    pub summary: Summary,
}

impl RunReport {
    pub fn new(sc: &Scenario, outcomes: &[QueryOutcome]) -> Self {
        let queries: Vec<QueryResult> = outcomes.iter().map(QueryResult::from_outcome).collect();
        let summary = Summary {
            queries: queries.len(),
            expectations_unmet: queries.iter().filter(|q| q.expectation_met == Some(false)).count(),
            errors: queries.iter().filter(|q| q.error.is_some()).count(),
            data_inconsistent: queries.iter().filter(|q| q.verdict == "data-inconsistent").count(),
        };
        RunReport {
            schema: RUN_SCHEMA,
            scenario: sc.name.clone(),
            dimension: sc.dim,
            mode: sc.mode.as_str(),
            tolerances: Tolerances {
                structural: sc.tolerances.structural,
                probability: sc.tolerances.probability,
            },
            warnings: sc.warnings.clone(),
            queries,
            summary,
        }
    }
}

#[derive(Debug, Serialize)]
pub struct FrameworkCheck {
    pub name: String,
    pub line: usize,
    pub elements: usize,
    pub dropped: usize,
    pub grid: Vec<f64>,
    pub mode: &'static str,
    pub consistent: bool,
    pub expect_inconsistent: bool,
    pub single_time: bool,
    pub pairs_checked: usize,
    pub threshold: f64,
    pub worst: Option<Pair>,
}

impl FrameworkCheck {
    pub fn new(name: &str, f: &FrameworkEntry) -> Self {
        let r: &ConsistencyReport = &f.report;
        FrameworkCheck {
            name: name.to_string(),
            line: f.line,
            elements: f.decomposition.len(),
            dropped: f.dropped,
            grid: f.decomposition.grid().labels().iter().map(|&t| sig12(t)).collect(),
            mode: r.mode.as_str(),
            consistent: r.verdict,
            expect_inconsistent: f.expect_inconsistent,
            single_time: r.single_time,
            pairs_checked: r.pairs_checked,
            threshold: sig12(r.threshold),
            worst: r.worst.as_ref().map(Pair::from),
        }
    }
}

#[derive(Debug, Serialize)]
pub struct CheckReport {
    pub schema: &'static str,
    pub scenario: String,
    pub dimension: usize,
    pub mode: &'static str,
    pub frameworks: Vec<FrameworkCheck>,
}

impl CheckReport {
    pub fn new(sc: &Scenario) -> Self {
        CheckReport {
            schema: CHECK_SCHEMA,
            scenario: sc.name.clone(),
            dimension: sc.dim,
            mode: sc.mode.as_str(),
            frameworks: sc.frameworks.iter().map(|(n, f)| FrameworkCheck::new(n, f)).collect(),
        }
    }
}

#[derive(Debug, Serialize)]
pub struct CorpusItem {
    pub id: &'static str,
    pub description: &'static str,
}

#[derive(Debug, Serialize)]
pub struct CorpusList {
    pub schema: &'static str,
    pub entries: Vec<CorpusItem>,
}

#[derive(Debug, Serialize)]
pub struct ErrorReport {
    pub schema: &'static str,
    pub source: String,
    pub code: Option<&'static str>,
    pub line: Option<usize>,
    pub column: Option<usize>,
    pub message: String,
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn rounds_to_twelve_digits() {
        assert_eq!(sig12(1.0 / 3.0), 0.333333333333);
        assert_eq!(sig12(0.5), 0.5);
        assert_eq!(sig12(0.9999999999999), 1.0);
        assert_eq!(sig12(-1e-300 * 1e-300), 0.0);
        assert_eq!(sig12(123456789012345.0), 123456789012000.0);
    }
}
