// Copyright 2026 Chronos Contributors
// SPDX-License-Identifier: Apache-2.0

//! One randomized case per call; each returns the largest deviation from
//! its oracle so callers can apply their own tolerance.

use std::sync::Arc;

use rand::Rng;

use chronos::framework::AlgebraElement;
use chronos::histories::{heisenberg_weight_operator, weight, ProductHistory};
use chronos::qalg::{op_inner, OperatorMetric, Projector};
use chronos::reasoning::{
    query, refine_distribution, Framework, InitialData, ProbabilityDistribution, Tolerances,
};

use super::*;

fn max_dev(a: &[f64], b: &[f64]) -> f64 {
    assert_eq!(a.len(), b.len());
    a.iter().zip(b).map(|(x, y)| (x - y).abs()).fold(0.0, f64::max)
}

/// Pure state at t0, random dynamics, random orthonormal basis at t1:
/// refined probabilities against `|⟨α|U ψ₀⟩|²`.
pub fn born_rule<R: Rng>(rng: &mut R, d: usize) -> f64 {
    let dynamics = Dynamics::random(rng, d, 2);
    let psi = random_state(rng, d);
    let p = dyad(&psi);
    let pc = M::identity(d, d) - &p;
    let f0 = Family { dim: d, times: vec![0.0], slots: vec![vec![p, pc]] }.framework(&dynamics);
    let mut data = InitialData::new(Arc::clone(&dynamics.family), OperatorMetric::PlainComplex, Tolerances::default());
    data.assert(Arc::clone(&f0), AlgebraElement::minimal(f0.decomposition(), 0)).unwrap();
    let basis = haar_unitary(rng, d);
    let evolved = &dynamics.steps[0] * nalgebra::DVector::from_vec(psi);
    let mut dev: f64 = 0.0;
    for a in 0..d {
        let col = basis.column(a);
        let expected = col.dotc(&evolved).norm_sqr();
        let target = ProductHistory::single(1.0, projector(&(col * col.adjoint())));
        let got = query(&data, &[target], &[]).unwrap().raw_probability.unwrap();
        dev = dev.max((got - expected).abs());
    }
    dev
}

fn random_consistent<R: Rng>(rng: &mut R) -> (Dynamics, Family) {
    let d = rng.random_range(2..=5);
    let n = rng.random_range(1..=3);
    let dynamics = Dynamics::random(rng, d, n);
    let family = consistent_family(rng, &dynamics, d, n, 3);
    (dynamics, family)
}

/// `W(X)` of a random element against the sum of oracle weights of its
/// minimal elements, and against the oracle weight of the summed operator.
pub fn weight_additivity<R: Rng>(rng: &mut R) -> f64 {
    let (dynamics, family) = random_consistent(rng);
    let f = family.framework(&dynamics);
    let minimal = family.minimal();
    let bits = random_bits(rng, minimal.len());
    let e = f.element(bits.clone()).unwrap();
    let got = f.weight_of(&e).unwrap();
    let d = family.dim;
    let mut sum_k = M::zeros(d, d);
    let mut sum_w = 0.0;
    for ((ix, _), on) in minimal.iter().zip(&bits) {
        if *on {
            let k = oracle_k(&family.events_of(ix), &dynamics.steps);
            sum_w += inner(&k, &k).re;
            sum_k += k;
        }
    }
    (got - sum_w).abs().max((got - inner(&sum_k, &sum_k).re).abs())
}

/// Schrödinger weight from the library against the oracle Heisenberg weight,
/// and the library Heisenberg operator at a random reference time.
pub fn heisenberg_invariance<R: Rng>(rng: &mut R) -> f64 {
    let d = rng.random_range(2..=5);
    let n = rng.random_range(1..=4);
    let dynamics = Dynamics::random(rng, d, n);
    let events: Vec<M> = (0..n)
        .map(|_| {
            let rank = rng.random_range(1..=d);
            let u = haar_unitary(rng, d);
            let cols = u.columns(0, rank);
            cols * cols.adjoint()
        })
        .collect();
    let grid = chronos::histories::TimeGrid::new((0..n).map(|t| t as f64).collect()).unwrap();
    let y = ProductHistory::new(grid, events.iter().map(projector).collect()).unwrap();
    let metric = OperatorMetric::PlainComplex;
    let w = weight(&y, &dynamics.family, &metric).unwrap();
    let oracle = oracle_heisenberg_weight(&events, &dynamics.steps);
    let r = rng.random_range(0..n) as f64;
    let kh = heisenberg_weight_operator(&y, &dynamics.family, r).unwrap();
    let wh = op_inner(kh.matrix(), kh.matrix(), &metric).unwrap().re;
    (w - oracle).abs().max((wh - oracle).abs())
}

/// `Σ W(Fᵢ) = d` for a consistent decomposition of the identity.
pub fn total_weight<R: Rng>(rng: &mut R) -> f64 {
    let (dynamics, family) = random_consistent(rng);
    let f = family.framework(&dynamics);
    let d = family.dim as f64;
    let lib: f64 = f.weights().iter().sum();
    let oracle: f64 = family
        .minimal()
        .iter()
        .map(|(ix, _)| {
            let k = oracle_k(&family.events_of(ix), &dynamics.steps);
            inner(&k, &k).re
        })
        .sum();
    (lib - d).abs().max((oracle - d).abs())
}

/// A distribution on the first slot of a three-time family, for the
/// refinement checks.
struct Chain {
    dynamics: Dynamics,
    family: Family,
    f1: Arc<Framework>,
    f2: Arc<Framework>,
    f3: Arc<Framework>,
}

fn chain<R: Rng>(rng: &mut R) -> Chain {
    let d = rng.random_range(2..=5);
    let dynamics = Dynamics::random(rng, d, 3);
    let family = consistent_family(rng, &dynamics, d, 3, 3);
    let f1 = family.prefix(1).framework(&dynamics);
    let f2 = family.prefix(2).framework(&dynamics);
    let f3 = family.framework(&dynamics);
    Chain { dynamics, family, f1, f2, f3 }
}

/// Refining to the same framework is the identity, and refining in two
/// steps equals refining in one.
pub fn refinement_transitivity<R: Rng>(rng: &mut R) -> f64 {
    let c = chain(rng);
    let pr = ProbabilityDistribution::assign(&c.f1, random_distribution(rng, c.f1.len()), TOL).unwrap();
    let same = refine_distribution(&pr, &c.f1, TOL).unwrap();
    let two = refine_distribution(&refine_distribution(&pr, &c.f2, TOL).unwrap(), &c.f3, TOL).unwrap();
    let one = refine_distribution(&pr, &c.f3, TOL).unwrap();
    max_dev(same.values(), pr.values()).max(max_dev(two.values(), one.values()))
}

/// `Pr(A)` for `A` in the coarse framework is the same in two different
/// refinements.
pub fn cross_refinement<R: Rng>(rng: &mut R) -> f64 {
    let c = chain(rng);
    let d = c.family.dim;
    let parts = rng.random_range(1..=3);
    let other_slot = grouped_projectors(&haar_unitary(rng, d), &random_sizes(rng, d, parts));
    let other = Family { dim: d, times: vec![0.0, 1.0], slots: vec![c.family.slots[0].clone(), other_slot] }
        .framework(&c.dynamics);
    let pr = ProbabilityDistribution::assign(&c.f1, random_distribution(rng, c.f1.len()), TOL).unwrap();
    let a = refine_distribution(&pr, &c.f2, TOL).unwrap();
    let b = refine_distribution(&pr, &other, TOL).unwrap();
    let mut dev: f64 = 0.0;
    for (k, p) in c.family.slots[0].iter().enumerate() {
        let h = ProductHistory::single(0.0, projector(p));
        let ea = c.f2.element_of(&h).unwrap();
        let eb = other.element_of(&h).unwrap();
        let pa = a.probability(&ea).unwrap();
        let pb = b.probability(&eb).unwrap();
        dev = dev.max((pa - pb).abs()).max((pa - pr.values()[k]).abs());
    }
    dev
}

/// With `Pr(D) = 1` on a minimal element `D`, refined conditionals on
/// elements below `D` equal `θ`.
pub fn conditional_equals_theta<R: Rng>(rng: &mut R) -> Option<f64> {
    let c = chain(rng);
    let a = rng.random_range(0..c.f1.len());
    let pr = ProbabilityDistribution::point_mass(&c.f1, a, TOL).unwrap();
    let fine = refine_distribution(&pr, &c.f3, TOL).unwrap();
    let minimal = c.family.minimal();
    let below: Vec<usize> = minimal
        .iter()
        .enumerate()
        .filter(|(i, (ix, _))| ix[0] == a && c.f3.is_dynamically_possible(*i))
        .map(|(i, _)| i)
        .collect();
    if below.is_empty() {
        return None;
    }
    let mut e_bits = vec![false; minimal.len()];
    for &i in &below {
        e_bits[i] = rng.random::<bool>();
    }
    e_bits[below[rng.random_range(0..below.len())]] = true;
    let e = c.f3.element(e_bits).unwrap();
    let e2 = c.f3.element(random_bits(rng, minimal.len())).unwrap();
    let lhs = fine.conditional(&e2, &e, TOL).unwrap();
    let rhs = c.f3.theta(&e2, &e).unwrap();
    Some((lhs - rhs).abs())
}

/// Single-time `D = D₁ + D₂` with `Pr(D) = p`, refined to `{D₁, D₂, Ĭ−D}`:
/// returns the deviation from `p·d₁/d` and `p·d₂/d`.
pub fn dimension_split<R: Rng>(rng: &mut R) -> f64 {
    let d = rng.random_range(3..=12);
    let k = rng.random_range(2..d);
    let d1 = rng.random_range(1..k);
    let u = haar_unitary(rng, d);
    let parts = grouped_projectors(&u, &[d1, k - d1, d - k]);
    let dd = &parts[0] + &parts[1];
    let dynamics = Dynamics::random(rng, d, 1);
    let coarse = Family { dim: d, times: vec![0.0], slots: vec![vec![dd, parts[2].clone()]] }.framework(&dynamics);
    let fine = Family { dim: d, times: vec![0.0], slots: vec![parts.clone()] }.framework(&dynamics);
    let p: f64 = rng.random();
    let pr = ProbabilityDistribution::assign(&coarse, vec![p, 1.0 - p], TOL).unwrap();
    let refined = refine_distribution(&pr, &fine, TOL).unwrap();
    let expect = [p * d1 as f64 / k as f64, p * (k - d1) as f64 / k as f64, 1.0 - p];
    max_dev(refined.values(), &expect)
}

/// Projector meet on a random noncommuting pair must fail.
pub fn noncommuting_meet_fails(p: &Projector, q: &Projector) -> bool {
    p.meet(q, TOL).is_err()
}
