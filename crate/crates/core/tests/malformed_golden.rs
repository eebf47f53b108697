// Copyright 2026 Chronos Contributors
// SPDX-License-Identifier: Apache-2.0

//! Each file under `tests/malformed/` starts with `# expect: CODE line N`.

use std::fs;
use std::path::PathBuf;

use chronos::scenario::{load, ElaborateOptions, ScenarioSource};

fn golden_files() -> Vec<PathBuf> {
    let dir = PathBuf::from(env!("CARGO_MANIFEST_DIR")).join("tests/malformed");
    let mut files: Vec<PathBuf> =
        fs::read_dir(dir).unwrap().map(|e| e.unwrap().path()).filter(|p| p.extension().is_some_and(|x| x == "chs")).collect();
    files.sort();
    files
}

fn expectation(text: &str) -> (String, usize) {
    let head = text.lines().next().unwrap();
    let rest = head.strip_prefix("# expect: ").expect("header");
    let mut parts = rest.split_whitespace();
    let code = parts.next().unwrap().to_string();
    assert_eq!(parts.next(), Some("line"));
    (code, parts.next().unwrap().parse().unwrap())
}

#[test]
fn there_are_twenty_golden_files() {
    assert_eq!(golden_files().len(), 20);
}

#[test]
fn golden_files_fail_with_documented_codes() {
    for path in golden_files() {
        let text = fs::read_to_string(&path).unwrap();
        let (code, line) = expectation(&text);
        let name = path.file_name().unwrap().to_string_lossy().into_owned();
        let err = load(&ScenarioSource::new(&name, text), &ElaborateOptions::default())
            .err()
            .unwrap_or_else(|| panic!("{name} elaborated without error"));
        assert_eq!((err.code.as_str(), err.line()), (code.as_str(), line), "{name}: {err}");
        assert!(err.span.column >= 1, "{name}: missing column");
        assert!(name.starts_with(&code.to_lowercase()), "{name} is filed under the wrong code");
    }
}
