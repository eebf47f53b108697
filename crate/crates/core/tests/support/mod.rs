// Copyright 2026 Chronos Contributors
// SPDX-License-Identifier: Apache-2.0

//! Random generators and raw-matrix oracles shared by the property suites
//! and the acceptance harness. Oracles work on bare `nalgebra` matrices and
//! never call the library's weight or consistency code.

#![allow(dead_code)]

pub mod checks;

use std::sync::Arc;

use nalgebra::DMatrix;
use num_complex::Complex64;
use rand::Rng;
use rand_distr::StandardNormal;

use chronos::framework::Decomposition;
use chronos::histories::{ProductHistory, TimeGrid};
use chronos::qalg::{make_projector, CMatrix, OperatorMetric, Projector, PropagatorFamily};
use chronos::reasoning::Framework;

pub type M = DMatrix<Complex64>;

pub const TOL: f64 = 1e-9;

fn gaussian<R: Rng>(rng: &mut R) -> Complex64 {
    Complex64::new(rng.sample(StandardNormal), rng.sample(StandardNormal))
}

/// Haar-distributed unitary from the QR decomposition of a Ginibre matrix.
pub fn haar_unitary<R: Rng>(rng: &mut R, d: usize) -> M {
    let g = M::from_fn(d, d, |_, _| gaussian(rng));
    let qr = g.qr();
    let (mut q, r) = (qr.q(), qr.r());
    for j in 0..d {
        let phase = r[(j, j)] / r[(j, j)].norm();
        for i in 0..d {
            q[(i, j)] *= phase;
        }
    }
    q
}

pub fn random_state<R: Rng>(rng: &mut R, d: usize) -> Vec<Complex64> {
    let v: Vec<Complex64> = (0..d).map(|_| gaussian(rng)).collect();
    let n = v.iter().map(|z| z.norm_sqr()).sum::<f64>().sqrt();
    v.into_iter().map(|z| z / n).collect()
}

pub fn dyad(v: &[Complex64]) -> M {
    M::from_fn(v.len(), v.len(), |i, j| v[i] * v[j].conj())
}

/// Splits `d` into `parts` positive sizes (fewer when `d < parts`).
pub fn random_sizes<R: Rng>(rng: &mut R, d: usize, parts: usize) -> Vec<usize> {
    let parts = parts.clamp(1, d);
    let mut cuts: Vec<usize> = (1..d).collect();
    for i in 0..cuts.len() {
        let j = rng.random_range(i..cuts.len());
        cuts.swap(i, j);
    }
    let mut cuts: Vec<usize> = cuts.into_iter().take(parts - 1).collect();
    cuts.sort_unstable();
    let mut sizes = Vec::with_capacity(parts);
    let mut prev = 0;
    for c in cuts.into_iter().chain(std::iter::once(d)) {
        sizes.push(c - prev);
        prev = c;
    }
    sizes
}

/// Projectors onto consecutive groups of columns of `basis`.
pub fn grouped_projectors(basis: &M, sizes: &[usize]) -> Vec<M> {
    let d = basis.nrows();
    let mut out = Vec::new();
    let mut start = 0;
    for &s in sizes {
        let cols = basis.columns(start, s);
        out.push(cols * cols.adjoint());
        start += s;
    }
    debug_assert_eq!(start, d);
    out
}

pub fn projector(m: &M) -> Projector {
    make_projector(CMatrix::new(m.clone()).unwrap(), TOL).unwrap()
}

pub fn inner(a: &M, b: &M) -> Complex64 {
    a.iter().zip(b.iter()).map(|(x, y)| x.conj() * y).sum()
}

/// `E₁U₁†E₂U₂†…Eₙ` where `steps[k]` evolves slot `k` to slot `k + 1`.
pub fn oracle_k(events: &[M], steps: &[M]) -> M {
    let mut k = events[0].clone();
    for j in 1..events.len() {
        k = &k * steps[j - 1].adjoint() * &events[j];
    }
    k
}

/// Weight from Heisenberg projectors referred to the first slot.
pub fn oracle_heisenberg_weight(events: &[M], steps: &[M]) -> f64 {
    let d = events[0].nrows();
    let mut w = M::identity(d, d);
    let mut k = M::identity(d, d);
    for (j, e) in events.iter().enumerate() {
        if j > 0 {
            w = &steps[j - 1] * &w;
        }
        k = &k * (w.adjoint() * e * &w);
    }
    inner(&k, &k).re
}

/// Random dynamics on the grid `0, 1, …, n-1`.
pub struct Dynamics {
    pub steps: Vec<M>,
    pub family: Arc<PropagatorFamily>,
}

impl Dynamics {
    pub fn random<R: Rng>(rng: &mut R, d: usize, n: usize) -> Self {
        let steps: Vec<M> = (1..n).map(|_| haar_unitary(rng, d)).collect();
        let family = PropagatorFamily::new(
            (0..n).map(|t| t as f64).collect(),
            steps.iter().map(|u| CMatrix::new(u.clone()).unwrap()).collect(),
            d,
            TOL,
        )
        .unwrap();
        Dynamics { steps, family: Arc::new(family) }
    }

    /// Evolution operator from time 0 to time `t`.
    pub fn evolve_to(&self, t: usize) -> M {
        let d = self.family.dim();
        self.steps[..t].iter().fold(M::identity(d, d), |acc, u| u * acc)
    }
}

/// Per-slot partitions of a product family with their raw matrices.
pub struct Family {
    pub dim: usize,
    pub times: Vec<f64>,
    pub slots: Vec<Vec<M>>,
}

impl Family {
    /// Minimal elements in lexicographic slot order with their index tuples.
    pub fn minimal(&self) -> Vec<(Vec<usize>, ProductHistory)> {
        let mut idx = vec![vec![]];
        for slot in &self.slots {
            idx = idx
                .into_iter()
                .flat_map(|p: Vec<usize>| {
                    (0..slot.len()).map(move |k| {
                        let mut q = p.clone();
                        q.push(k);
                        q
                    })
                })
                .collect();
        }
        let grid = TimeGrid::new(self.times.clone()).unwrap();
        idx.into_iter()
            .map(|ix| {
                let events = ix.iter().zip(&self.slots).map(|(&k, s)| projector(&s[k])).collect();
                let h = ProductHistory::new(grid.clone(), events).unwrap();
                (ix, h)
            })
            .collect()
    }

    pub fn events_of(&self, ix: &[usize]) -> Vec<M> {
        ix.iter().zip(&self.slots).map(|(&k, s)| s[k].clone()).collect()
    }

    pub fn decomposition(&self) -> Arc<Decomposition> {
        Arc::new(Decomposition::new(self.minimal().into_iter().map(|(_, h)| h).collect(), TOL).unwrap())
    }

    pub fn framework(&self, dynamics: &Dynamics) -> Arc<Framework> {
        Framework::new(self.decomposition(), Arc::clone(&dynamics.family), OperatorMetric::PlainComplex).unwrap()
    }

    /// Restriction to the first `n` slots.
    pub fn prefix(&self, n: usize) -> Family {
        Family { dim: self.dim, times: self.times[..n].to_vec(), slots: self.slots[..n].to_vec() }
    }
}

/// A family that is consistent by construction: every slot but the last is
/// diagonal in one Heisenberg basis, the last slot is an arbitrary partition.
pub fn consistent_family<R: Rng>(rng: &mut R, dynamics: &Dynamics, d: usize, n: usize, max_parts: usize) -> Family {
    let v = haar_unitary(rng, d);
    let mut slots = Vec::new();
    for t in 0..n {
        let parts = rng.random_range(1..=max_parts);
        let sizes = random_sizes(rng, d, parts);
        let basis = if t + 1 == n && n > 1 { haar_unitary(rng, d) } else { dynamics.evolve_to(t) * &v };
        // shuffle columns so groups are not aligned across slots
        let mut cols: Vec<usize> = (0..d).collect();
        for i in 0..d {
            let j = rng.random_range(i..d);
            cols.swap(i, j);
        }
        let shuffled = M::from_fn(d, d, |i, j| basis[(i, cols[j])]);
        slots.push(grouped_projectors(&shuffled, &sizes));
    }
    Family { dim: d, times: (0..n).map(|t| t as f64).collect(), slots }
}

/// Random probability vector on `n` outcomes.
pub fn random_distribution<R: Rng>(rng: &mut R, n: usize) -> Vec<f64> {
    let raw: Vec<f64> = (0..n).map(|_| rng.random::<f64>() + 0.05).collect();
    let s: f64 = raw.iter().sum();
    raw.into_iter().map(|x| x / s).collect()
}

/// Random subset of `0..n` as a bit vector.
pub fn random_bits<R: Rng>(rng: &mut R, n: usize) -> Vec<bool> {
    (0..n).map(|_| rng.random::<bool>()).collect()
}
