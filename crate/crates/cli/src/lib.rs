// Copyright 2026 Chronos Contributors
// SPDX-License-Identifier: Apache-2.0

//! Command-line front end. [`dispatch`] does all the work and returns the
//! rendered output with an exit code, so the binary stays a thin wrapper.
//!
//! Exit codes: 0 success, 1 input or scenario error, 2 a query returned a
//! data-inconsistent verdict, 3 a query failed to evaluate or missed its
//! `expect` annotation.

pub mod report;

use std::fmt::Write;

use clap::{Args, Parser, Subcommand, ValueEnum};

use chronos::corpus;
use chronos::qalg::ConsistencyMode;
use chronos::scenario::{load, ElaborateOptions, Scenario, ScenarioError, ScenarioSource};

use report::{CheckReport, CorpusItem, CorpusList, ErrorReport, RunReport, CORPUS_SCHEMA, ERROR_SCHEMA};

pub const EXIT_OK: i32 = 0;
pub const EXIT_ERROR: i32 = 1;
pub const EXIT_DATA_INCONSISTENT: i32 = 2;
pub const EXIT_QUERY_FAILED: i32 = 3;

#[derive(Debug, Parser)]
#[command(name = "chronos", version, about = "Consistent-histories reasoning over .chs scenarios")]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Elaborate a scenario and execute its queries.
    Run(RunArgs),
    /// Print the consistency report of every declared framework.
    Check(RunArgs),
    /// Bundled scenarios.
    Corpus {
        #[command(subcommand)]
        action: CorpusAction,
    },
}

#[derive(Debug, Subcommand)]
pub enum CorpusAction {
    /// List the bundled scenarios.
    List {
        /// Emit JSON instead of text.
        #[arg(long)]
        json: bool,
    },
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum ModeArg {
    Weak,
    Strong,
    Rho,
    RhoRho,
}

impl From<ModeArg> for ConsistencyMode {
    fn from(m: ModeArg) -> Self {
        match m {
            ModeArg::Weak => ConsistencyMode::Weak,
            ModeArg::Strong => ConsistencyMode::Strong,
            ModeArg::Rho => ConsistencyMode::Rho,
            ModeArg::RhoRho => ConsistencyMode::RhoRho,
        }
    }
}

#[derive(Debug, Clone, Args)]
pub struct RunArgs {
    /// Path to a .chs file, or `corpus:NAME`.
    pub input: String,
    /// Emit JSON instead of text.
    #[arg(long)]
    pub json: bool,
    /// Consistency condition (default strong).
    #[arg(long, value_enum)]
    pub mode: Option<ModeArg>,
    /// Structural tolerance.
    #[arg(long, env = "CHRONOS_TOL", value_parser = positive)]
    pub tol: Option<f64>,
    /// Probability tolerance.
    #[arg(long, value_parser = positive)]
    pub tol_prob: Option<f64>,
}

fn positive(s: &str) -> Result<f64, String> {
    let v: f64 = s.trim().parse().map_err(|_| format!("`{s}` is not a number"))?;
    if v.is_finite() && v > 0.0 {
        Ok(v)
    } else {
        Err(format!("tolerance must be positive, got {s}"))
    }
}

impl RunArgs {
    pub fn options(&self) -> ElaborateOptions {
        ElaborateOptions { mode: self.mode.map(Into::into), tol: self.tol, tol_prob: self.tol_prob }
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Output {
    pub stdout: String,
    pub stderr: String,
    pub code: i32,
}

impl Output {
    fn ok(stdout: String, code: i32) -> Self {
        Output { stdout, stderr: String::new(), code }
    }
}

pub fn dispatch(cli: &Cli) -> Output {
    match &cli.command {
        Command::Run(args) => run(args),
        Command::Check(args) => check(args),
        Command::Corpus { action: CorpusAction::List { json } } => list_corpus(*json),
    }
}

pub fn read_source(input: &str) -> Result<ScenarioSource, String> {
    if let Some(id) = input.strip_prefix("corpus:") {
        return corpus::find(id).map(|e| e.source()).ok_or_else(|| format!("no corpus entry named `{id}`"));
    }
    std::fs::read_to_string(input)
        .map(|text| ScenarioSource::new(input, text))
        .map_err(|e| format!("cannot read {input}: {e}"))
}

enum Failure {
    Io(String),
    Scenario(ScenarioError),
}

fn prepare(args: &RunArgs) -> Result<Scenario, (String, Failure)> {
    let src = read_source(&args.input).map_err(|m| (args.input.clone(), Failure::Io(m)))?;
    load(&src, &args.options()).map_err(|e| (src.name.clone(), Failure::Scenario(e)))
}

fn failure_output(source: String, f: Failure, json: bool) -> Output {
    let report = match f {
        Failure::Io(message) => ErrorReport { schema: ERROR_SCHEMA, source, code: None, line: None, column: None, message },
        Failure::Scenario(e) => ErrorReport {
            schema: ERROR_SCHEMA,
            source,
            code: Some(e.code.as_str()),
            line: Some(e.span.line),
            column: Some(e.span.column),
            message: e.message,
        },
    };
    if json {
        return Output::ok(to_json(&report), EXIT_ERROR);
    }
    let stderr = match (report.code, report.line, report.column) {
        (Some(c), Some(l), Some(col)) => format!("{}:{l}:{col}: error[{c}]: {}\n", report.source, report.message),
        _ => format!("error: {}\n", report.message),
    };
    Output { stdout: String::new(), stderr, code: EXIT_ERROR }
}

fn to_json<T: serde::Serialize>(v: &T) -> String {
    let mut s = serde_json::to_string_pretty(v).expect("report types serialize");
    s.push('\n');
    s
}

pub fn run(args: &RunArgs) -> Output {
    let sc = match prepare(args) {
        Ok(sc) => sc,
        Err((source, f)) => return failure_output(source, f, args.json),
    };
    let outcomes = sc.execute();
    let report = RunReport::new(&sc, &outcomes);
    let code = if report.summary.data_inconsistent > 0 {
        EXIT_DATA_INCONSISTENT
    } else if report.summary.errors > 0 || report.summary.expectations_unmet > 0 {
        EXIT_QUERY_FAILED
    } else {
        EXIT_OK
    };
    let stdout = if args.json { to_json(&report) } else { render_run(&report) };
    Output::ok(stdout, code)
}

fn fmt_num(x: f64) -> String {
    let r = report::sig12(x);
    if r != 0.0 && !(1e-4..1e12).contains(&r.abs()) {
        format!("{r:e}")
    } else {
        format!("{r}")
    }
}

fn fmt_grid(g: &[f64]) -> String {
    g.iter().map(|&t| fmt_num(t)).collect::<Vec<_>>().join(", ")
}

fn render_run(r: &RunReport) -> String {
    let mut out = String::new();
    let _ = writeln!(out, "scenario {} (dim {}, {} consistency)", r.scenario, r.dimension, r.mode);
    for w in &r.warnings {
        let _ = writeln!(out, "warning: {w}");
    }
    for q in &r.queries {
        let _ = writeln!(out, "\nquery {} = {}", q.id, q.query);
        match (&q.error, q.probability) {
            (Some(e), _) => {
                let _ = writeln!(out, "  error: {e}");
            }
            (None, Some(p)) => {
                let _ = writeln!(out, "  verdict: {} (p = {})", q.verdict, fmt_num(p));
            }
            (None, None) => {
                let _ = writeln!(out, "  verdict: {}", q.verdict);
            }
        }
        if let Some(d) = &q.detail {
            let _ = writeln!(out, "  reason: {d}");
        }
        if let Some(f) = &q.framework {
            let _ = writeln!(
                out,
                "  framework: {} minimal elements on t = {}; worst overlap {}",
                f.elements,
                fmt_grid(&f.grid),
                fmt_num(f.worst_magnitude)
            );
        }
        if let Some(e) = &q.expected {
            let status = if q.expectation_met == Some(true) { "met" } else { "NOT MET" };
            let _ = writeln!(out, "  expected: {e} ({status})");
        }
    }
    let s = &r.summary;
    let _ = writeln!(
        out,
        "\n{} queries, {} unmet expectations, {} errors, {} data-inconsistent",
        s.queries, s.expectations_unmet, s.errors, s.data_inconsistent
    );
    out
}

pub fn check(args: &RunArgs) -> Output {
    let sc = match prepare(args) {
        Ok(sc) => sc,
        Err((source, f)) => return failure_output(source, f, args.json),
    };
    let report = CheckReport::new(&sc);
    if args.json {
        return Output::ok(to_json(&report), EXIT_OK);
    }
    let mut out = String::new();
    let _ = writeln!(out, "scenario {} (dim {}, {} consistency)", report.scenario, report.dimension, report.mode);
    for f in &report.frameworks {
        let verdict = match (f.consistent, f.expect_inconsistent) {
            (true, _) => "consistent",
            (false, true) => "inconsistent (expected)",
            (false, false) => "inconsistent",
        };
        let _ = write!(
            out,
            "framework {}: {verdict}; {} minimal elements on t = {}",
            f.name,
            f.elements,
            fmt_grid(&f.grid)
        );
        if f.dropped > 0 {
            let _ = write!(out, ", {} zero products dropped", f.dropped);
        }
        if f.single_time {
            out.push_str("; single time");
        }
        match &f.worst {
            Some(w) => {
                let _ = writeln!(
                    out,
                    "; worst overlap {} between elements {} and {} (threshold {}, {} pairs)",
                    fmt_num(w.magnitude),
                    w.first,
                    w.second,
                    fmt_num(f.threshold),
                    f.pairs_checked
                );
            }
            None => out.push('\n'),
        }
    }
    Output::ok(out, EXIT_OK)
}

pub fn list_corpus(json: bool) -> Output {
    if json {
        let list = CorpusList {
            schema: CORPUS_SCHEMA,
            entries: corpus::ENTRIES.iter().map(|e| CorpusItem { id: e.id, description: e.description }).collect(),
        };
        return Output::ok(to_json(&list), EXIT_OK);
    }
    let width = corpus::ENTRIES.iter().map(|e| e.id.len()).max().unwrap_or(0);
    let mut out = String::new();
    for e in corpus::ENTRIES {
        let _ = writeln!(out, "{:width$}  {}", e.id, e.description);
    }
    Output::ok(out, EXIT_OK)
}
