// Copyright 2026 Chronos Contributors
// SPDX-License-Identifier: Apache-2.0

//! Scenarios bundled with the library, addressable as `corpus:<id>`.

use crate::scenario::ScenarioSource;

#[derive(Debug, Clone, Copy)]
pub struct CorpusEntry {
    pub id: &'static str,
    pub description: &'static str,
    pub text: &'static str,
}

impl CorpusEntry {
    pub fn source(&self) -> ScenarioSource {
        ScenarioSource::new(format!("corpus:{}", self.id), self.text)
    }
}

/// The listed corpus, in presentation order.
pub const ENTRIES: &[CorpusEntry] = &[
    CorpusEntry {
        id: "spin-half",
        description: "spin-half particle: S_z and S_x at one time are incompatible",
        text: include_str!("../corpus/spin-half.chs"),
    },
    CorpusEntry {
        id: "oscillator",
        description: "truncated harmonic oscillator: energy levels versus superpositions",
        text: include_str!("../corpus/oscillator.chs"),
    },
    CorpusEntry {
        id: "spin-measurement",
        description: "spin measured by a pure-state apparatus, retrodiction of S_z and S_x",
        text: include_str!("../corpus/spin-measurement.chs"),
    },
    CorpusEntry {
        id: "spin-measurement-mixed",
        description: "spin measurement with a degenerate apparatus and rank-three pointers",
        text: include_str!("../corpus/spin-measurement-mixed.chs"),
    },
    CorpusEntry {
        id: "three-state",
        description: "three-state paradox: A and B each certain in separate frameworks",
        text: include_str!("../corpus/three-state.chs"),
    },
];

/// Shipped but not listed: an inconsistent family used as a diagnostic demo.
pub const EXTRAS: &[CorpusEntry] = &[CorpusEntry {
    id: "inconsistent-spin-chain",
    description: "S_z, S_x, S_z chain violating the consistency conditions",
    text: include_str!("../corpus/inconsistent-spin-chain.chs"),
}];

pub fn find(id: &str) -> Option<&'static CorpusEntry> {
    ENTRIES.iter().chain(EXTRAS).find(|e| e.id == id)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::scenario::{load, ElaborateOptions};

    #[test]
    fn every_entry_meets_its_expectations() {
        for e in ENTRIES.iter().chain(EXTRAS) {
            let sc = load(&e.source(), &ElaborateOptions::default()).unwrap_or_else(|err| panic!("{}: {err}", e.id));
            for o in sc.execute() {
                assert_eq!(o.expectation_met, Some(true), "{} / {}: {:?}", e.id, o.name, o.result);
            }
        }
    }

    #[test]
    fn ids_are_unique() {
        let mut ids: Vec<_> = ENTRIES.iter().chain(EXTRAS).map(|e| e.id).collect();
        ids.sort_unstable();
        ids.dedup();
        assert_eq!(ids.len(), ENTRIES.len() + EXTRAS.len());
        assert!(find("three-state").is_some() && find("nope").is_none());
    }
}
