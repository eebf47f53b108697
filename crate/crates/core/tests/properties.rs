// Copyright 2026 Chronos Contributors
// SPDX-License-Identifier: Apache-2.0

mod support;

use proptest::prelude::*;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

use support::checks;

fn rng(seed: u64) -> ChaCha8Rng {
    ChaCha8Rng::seed_from_u64(seed)
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(48))]

    #[test]
    fn born_rule(seed in any::<u64>(), d in 2usize..=6) {
        prop_assert!(checks::born_rule(&mut rng(seed), d) < 1e-9);
    }

    #[test]
    fn weight_is_additive_on_consistent_families(seed in any::<u64>()) {
        prop_assert!(checks::weight_additivity(&mut rng(seed)) < 1e-9);
    }

    #[test]
    fn weight_is_picture_independent(seed in any::<u64>()) {
        prop_assert!(checks::heisenberg_invariance(&mut rng(seed)) < 1e-9);
    }

    #[test]
    fn weights_of_identity_decompositions_sum_to_dimension(seed in any::<u64>()) {
        prop_assert!(checks::total_weight(&mut rng(seed)) < 1e-9);
    }

    #[test]
    fn refinement_is_transitive(seed in any::<u64>()) {
        prop_assert!(checks::refinement_transitivity(&mut rng(seed)) < 1e-9);
    }

    #[test]
    fn coarse_probabilities_survive_any_refinement(seed in any::<u64>()) {
        prop_assert!(checks::cross_refinement(&mut rng(seed)) < 1e-9);
    }

    #[test]
    fn conditional_below_certain_datum_is_theta(seed in any::<u64>()) {
        if let Some(dev) = checks::conditional_equals_theta(&mut rng(seed)) {
            prop_assert!(dev < 1e-9);
        }
    }

    #[test]
    fn refinement_splits_by_dimension(seed in any::<u64>()) {
        prop_assert!(checks::dimension_split(&mut rng(seed)) < 1e-12);
    }
}
