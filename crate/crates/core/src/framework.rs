// Copyright 2026 Chronos Contributors
// SPDX-License-Identifier: Apache-2.0

//! Decompositions of the history identity, their Boolean algebras, and
//! consistency checks.
//!
//! A [`Decomposition`] is a list of mutually orthogonal product histories
//! (the minimal elements) summing to a cap, usually the history identity.
//! Elements of the generated Boolean algebra are indicator vectors over the
//! minimal elements ([`AlgebraElement`]); no same-slot commutation is needed
//! beyond the orthogonality of the minimal elements themselves.
//!
//! The completeness check uses a trace argument: orthogonal subprojectors of
//! the cap whose ranks add up to the cap's rank must sum to the cap.

use std::sync::atomic::{AtomicU64, Ordering};
use std::sync::Arc;

use rayon::prelude::*;
use thiserror::Error;

use crate::histories::{weight_operator, HistoryError, HistorySum, ProductHistory, TimeGrid};
use crate::qalg::{op_inner, CMatrix, ConsistencyMode, OperatorMetric, PropagatorFamily, QalgError};

#[derive(Debug, Clone, PartialEq, Error)]
pub enum FrameworkError {
    #[error(transparent)]
    History(#[from] HistoryError),
    #[error(transparent)]
    Qalg(#[from] QalgError),
    #[error("a decomposition needs at least one minimal element")]
    Empty,
    #[error("minimal element {0} is the zero history")]
    ZeroElement(usize),
    #[error("minimal elements {0} and {1} are not orthogonal")]
    NotOrthogonal(usize, usize),
    #[error("minimal element {0} is not contained in the cap")]
    NotInCap(usize),
    #[error("minimal elements do not sum to the cap: rank {found} of {expected}")]
    IncompleteSum { expected: u128, found: u128 },
    #[error("elements of different decompositions cannot be combined")]
    OwnerMismatch,
    #[error("indicator has {found} entries for {expected} minimal elements")]
    IndicatorLength { expected: usize, found: usize },
    #[error("cap must be the identity or a single fixed event at the first or last time")]
    UnsupportedCap,
    #[error("decomposition is not consistent (worst overlap {magnitude:.3e})")]
    InconsistentInput { magnitude: f64 },
}

pub type Result<T> = std::result::Result<T, FrameworkError>;

static NEXT_ID: AtomicU64 = AtomicU64::new(1);

/// Minimal elements `Fᵢ` of a Boolean algebra of histories with their cap.
#[derive(Debug, Clone)]
pub struct Decomposition {
    id: u64,
    grid: TimeGrid,
    minimal: Vec<ProductHistory>,
    cap: ProductHistory,
    tol: f64,
}

impl Decomposition {
    /// Decomposition of the full history identity.
    pub fn new(minimal: Vec<ProductHistory>, tol: f64) -> Result<Self> {
        let first = minimal.first().ok_or(FrameworkError::Empty)?;
        let cap = ProductHistory::identity(first.grid().clone(), first.dim());
        Self::with_cap(minimal, cap, tol)
    }

    /// Decomposition of an arbitrary product-history cap (for example
    /// `A⊙I⊙…⊙I`). Every history is extended to the union grid.
    pub fn with_cap(minimal: Vec<ProductHistory>, cap: ProductHistory, tol: f64) -> Result<Self> {
        if minimal.is_empty() {
            return Err(FrameworkError::Empty);
        }
        let d = cap.dim();
        let mut grid = cap.grid().clone();
        for m in &minimal {
            if m.dim() != d {
                return Err(QalgError::DimensionMismatch { expected: d, found: m.dim() }.into());
            }
            grid = grid.union(m.grid());
        }
        let cap = cap.extend_to(&grid)?;
        let minimal = minimal
            .iter()
            .map(|m| m.extend_to(&grid))
            .collect::<std::result::Result<Vec<_>, _>>()?;
        for (i, m) in minimal.iter().enumerate() {
            if m.is_zero() {
                return Err(FrameworkError::ZeroElement(i));
            }
            if !m.is_contained_in(&cap, tol)? {
                return Err(FrameworkError::NotInCap(i));
            }
        }
        for i in 0..minimal.len() {
            for j in i + 1..minimal.len() {
                if !minimal[i].is_orthogonal_to(&minimal[j], tol)? {
                    return Err(FrameworkError::NotOrthogonal(i, j));
                }
            }
        }
        let found: u128 = minimal.iter().map(ProductHistory::rank).sum();
        let expected = cap.rank();
        if found != expected {
            return Err(FrameworkError::IncompleteSum { expected, found });
        }
        Ok(Decomposition { id: NEXT_ID.fetch_add(1, Ordering::Relaxed), grid, minimal, cap, tol })
    }

    pub fn id(&self) -> u64 {
        self.id
    }

    pub fn grid(&self) -> &TimeGrid {
        &self.grid
    }

    pub fn minimal(&self) -> &[ProductHistory] {
        &self.minimal
    }

    pub fn len(&self) -> usize {
        self.minimal.len()
    }

    pub fn is_empty(&self) -> bool {
        self.minimal.is_empty()
    }

    pub fn cap(&self) -> &ProductHistory {
        &self.cap
    }

    pub fn has_identity_cap(&self) -> bool {
        self.cap.is_identity()
    }

    pub fn dim(&self) -> usize {
        self.cap.dim()
    }

    pub fn tol(&self) -> f64 {
        self.tol
    }

    pub fn is_single_time(&self) -> bool {
        self.grid.len() == 1
    }

    /// Indicator of `y` as a sum of minimal elements, if it is one.
    ///
    /// Each minimal element must lie either inside `y` or orthogonal to it,
    /// and the contained ones must exhaust the rank of `y`.
    pub fn contains(&self, y: &ProductHistory) -> Option<Vec<bool>> {
        if y.dim() != self.dim() {
            return None;
        }
        let y = if self.grid.contains_grid(y.grid()) {
            y.extend_to(&self.grid).ok()?
        } else {
            y.restrict_to(&self.grid)?
        };
        if y.is_zero() {
            return Some(vec![false; self.len()]);
        }
        let mut bits = Vec::with_capacity(self.len());
        let mut rank = 0u128;
        for m in &self.minimal {
            if m.is_contained_in(&y, self.tol).ok()? {
                bits.push(true);
                rank += m.rank();
            } else if m.is_orthogonal_to(&y, self.tol).ok()? {
                bits.push(false);
            } else {
                return None;
            }
        }
        (rank == y.rank()).then_some(bits)
    }

    /// Adds `Ĭ − Ă` to a consistent decomposition of a fixed-event cap `Ă`.
    /// A cap that is already the identity is returned unchanged.
    pub fn complete_fixed_initial(&self, fam: &PropagatorFamily, metric: &OperatorMetric) -> Result<Decomposition> {
        if self.has_identity_cap() {
            return Ok(self.clone());
        }
        let fixed: Vec<usize> = (0..self.grid.len()).filter(|&k| !self.cap.events()[k].is_identity()).collect();
        let slot = match fixed.as_slice() {
            [k] if *k == 0 || *k + 1 == self.grid.len() => *k,
            _ => return Err(FrameworkError::UnsupportedCap),
        };
        let report = check_consistency(self, fam, metric, self.tol)?;
        if !report.verdict {
            return Err(FrameworkError::InconsistentInput { magnitude: report.worst_magnitude() });
        }
        let mut events = self.cap.events().to_vec();
        events[slot] = events[slot].complement();
        let mut minimal = self.minimal.clone();
        minimal.push(ProductHistory::new(self.grid.clone(), events)?);
        Decomposition::new(minimal, self.tol)
    }
}

/// Element `Σ υᵢ Fᵢ` of the Boolean algebra generated by a decomposition.
#[derive(Debug, Clone)]
pub struct AlgebraElement {
    owner: Arc<Decomposition>,
    bits: Vec<bool>,
}

impl PartialEq for AlgebraElement {
    fn eq(&self, other: &Self) -> bool {
        self.owner.id == other.owner.id && self.bits == other.bits
    }
}

impl AlgebraElement {
    pub fn new(owner: &Arc<Decomposition>, bits: Vec<bool>) -> Result<Self> {
        if bits.len() != owner.len() {
            return Err(FrameworkError::IndicatorLength { expected: owner.len(), found: bits.len() });
        }
        Ok(AlgebraElement { owner: Arc::clone(owner), bits })
    }

    /// The cap.
    pub fn full(owner: &Arc<Decomposition>) -> Self {
        AlgebraElement { owner: Arc::clone(owner), bits: vec![true; owner.len()] }
    }

    pub fn empty(owner: &Arc<Decomposition>) -> Self {
        AlgebraElement { owner: Arc::clone(owner), bits: vec![false; owner.len()] }
    }

    pub fn minimal(owner: &Arc<Decomposition>, index: usize) -> Self {
        let mut bits = vec![false; owner.len()];
        bits[index] = true;
        AlgebraElement { owner: Arc::clone(owner), bits }
    }

    /// Element equal to the history `y`, if the algebra contains it.
    pub fn of_history(owner: &Arc<Decomposition>, y: &ProductHistory) -> Option<Self> {
        owner.contains(y).map(|bits| AlgebraElement { owner: Arc::clone(owner), bits })
    }

    pub fn owner(&self) -> &Arc<Decomposition> {
        &self.owner
    }

    pub fn bits(&self) -> &[bool] {
        &self.bits
    }

    pub fn selected(&self) -> impl Iterator<Item = usize> + '_ {
        self.bits.iter().enumerate().filter(|(_, &b)| b).map(|(i, _)| i)
    }

    pub fn is_empty(&self) -> bool {
        !self.bits.iter().any(|&b| b)
    }

    pub fn is_full(&self) -> bool {
        self.bits.iter().all(|&b| b)
    }

    fn same_owner(&self, other: &AlgebraElement) -> Result<()> {
        if self.owner.id == other.owner.id {
            Ok(())
        } else {
            Err(FrameworkError::OwnerMismatch)
        }
    }

    /// Complement against the cap.
    pub fn negate(&self) -> AlgebraElement {
        AlgebraElement { owner: Arc::clone(&self.owner), bits: self.bits.iter().map(|b| !b).collect() }
    }

    pub fn meet(&self, other: &AlgebraElement) -> Result<AlgebraElement> {
        self.same_owner(other)?;
        let bits = self.bits.iter().zip(&other.bits).map(|(a, b)| *a && *b).collect();
        Ok(AlgebraElement { owner: Arc::clone(&self.owner), bits })
    }

    pub fn join(&self, other: &AlgebraElement) -> Result<AlgebraElement> {
        self.same_owner(other)?;
        let bits = self.bits.iter().zip(&other.bits).map(|(a, b)| *a || *b).collect();
        Ok(AlgebraElement { owner: Arc::clone(&self.owner), bits })
    }

    /// `other ≤ self`.
    pub fn includes(&self, other: &AlgebraElement) -> Result<bool> {
        self.same_owner(other)?;
        Ok(self.bits.iter().zip(&other.bits).all(|(a, b)| *a || !*b))
    }

    /// Selected minimal elements as a history sum; `None` for the zero element.
    pub fn history_sum(&self) -> Option<HistorySum> {
        let terms: Vec<ProductHistory> = self.selected().map(|i| self.owner.minimal[i].clone()).collect();
        HistorySum::new(terms, self.owner.tol).ok()
    }
}

/// Largest off-diagonal overlap found by a consistency check.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct WorstPair {
    pub first: usize,
    pub second: usize,
    pub magnitude: f64,
}

#[derive(Debug, Clone, PartialEq)]
pub struct ConsistencyReport {
    pub mode: ConsistencyMode,
    pub verdict: bool,
    /// `None` for decompositions with a single minimal element.
    pub worst: Option<WorstPair>,
    /// Orthogonality threshold actually applied, `tol · d`.
    pub threshold: f64,
    pub single_time: bool,
    pub pairs_checked: usize,
}

impl ConsistencyReport {
    pub fn worst_magnitude(&self) -> f64 {
        self.worst.map_or(0.0, |w| w.magnitude)
    }
}

/// Weight operators `K(Fᵢ)` of every minimal element.
pub fn minimal_weight_operators(d: &Decomposition, fam: &PropagatorFamily) -> Result<Vec<CMatrix>> {
    d.minimal
        .par_iter()
        .map(|m| weight_operator(m, fam).map(|k| k.into_matrix()))
        .collect::<std::result::Result<Vec<_>, _>>()
        .map_err(Into::into)
}

/// Pairwise overlap check on precomputed weight operators.
pub fn consistency_from_operators(
    ops: &[CMatrix],
    metric: &OperatorMetric,
    single_time: bool,
    tol: f64,
) -> Result<ConsistencyReport> {
    let mode = metric.mode();
    let n = ops.len();
    let pairs: Vec<(usize, usize)> = (0..n).flat_map(|i| (i + 1..n).map(move |j| (i, j))).collect();
    let magnitudes = pairs
        .par_iter()
        .map(|&(i, j)| {
            let z = op_inner(&ops[i], &ops[j], metric)?;
            Ok(match mode {
                ConsistencyMode::Weak => z.re.abs(),
                _ => z.norm(),
            })
        })
        .collect::<std::result::Result<Vec<f64>, QalgError>>()?;
    // first maximum in index order keeps the report independent of scheduling
    let mut worst: Option<WorstPair> = None;
    for (&(i, j), &m) in pairs.iter().zip(&magnitudes) {
        if worst.is_none_or(|w| m > w.magnitude) {
            worst = Some(WorstPair { first: i, second: j, magnitude: m });
        }
    }
    let dim = ops.first().map_or(1, CMatrix::dim);
    let threshold = tol * dim as f64;
    let verdict = single_time || worst.is_none_or(|w| w.magnitude <= threshold);
    Ok(ConsistencyReport { mode, verdict, worst, threshold, single_time, pairs_checked: pairs.len() })
}

/// Checks `⟨K(Fⱼ),K(Fₖ)⟩ ≈ 0` for all `j ≠ k` under the metric's mode.
/// Single-time decompositions always pass.
pub fn check_consistency(
    d: &Decomposition,
    fam: &PropagatorFamily,
    metric: &OperatorMetric,
    tol: f64,
) -> Result<ConsistencyReport> {
    let ops = minimal_weight_operators(d, fam)?;
    consistency_from_operators(&ops, metric, d.is_single_time(), tol)
}
