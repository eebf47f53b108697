// Copyright 2026 Chronos Contributors
// SPDX-License-Identifier: Apache-2.0

//! Multi-time product histories, weight operators and weights.
//!
//! A history `E₁⊙E₂⊙…⊙Eₙ` lives on the tensor product of `n` copies of the
//! single-time space, but nothing here ever forms that `dⁿ`-dimensional
//! operator. Products, orthogonality and containment are decided slot by
//! slot, and weights go through the `d×d` chain operator
//! `K = E₁T(t₁,t₂)E₂…T(tₙ₋₁,tₙ)Eₙ`.

use num_complex::Complex64;
use thiserror::Error;

use crate::qalg::{
    check_dim, op_inner, same_time, time_index, CMatrix, OperatorMetric, Projector, PropagatorFamily,
    QalgError,
};

#[derive(Debug, Clone, PartialEq, Error)]
pub enum HistoryError {
    #[error(transparent)]
    Qalg(#[from] QalgError),
    #[error("time grid must be nonempty, finite and strictly increasing")]
    InvalidGrid,
    #[error("target grid does not contain time {0}")]
    NotASuperset(f64),
    #[error("history has {events} events for a grid of {slots} times")]
    EventCount { events: usize, slots: usize },
    #[error("history terms {0} and {1} are not orthogonal")]
    NotOrthogonal(usize, usize),
    #[error("product of histories is not a projector: {0}")]
    NotAProjectorProduct(String),
    #[error("conditioning history has zero weight ({weight:.3e})")]
    ZeroConditionWeight { weight: f64 },
    #[error("a history sum needs at least one term")]
    Empty,
}

pub type Result<T> = std::result::Result<T, HistoryError>;

/// Strictly increasing time labels `t₁ < t₂ < … < tₙ`.
#[derive(Debug, Clone, PartialEq)]
pub struct TimeGrid(Vec<f64>);

impl TimeGrid {
    pub fn new(labels: Vec<f64>) -> Result<Self> {
        if labels.is_empty() || labels.iter().any(|t| !t.is_finite()) {
            return Err(HistoryError::InvalidGrid);
        }
        if labels.windows(2).any(|w| w[1] <= w[0] || same_time(w[0], w[1])) {
            return Err(HistoryError::InvalidGrid);
        }
        Ok(TimeGrid(labels))
    }

    pub fn single(t: f64) -> Self {
        TimeGrid(vec![t])
    }

    pub fn labels(&self) -> &[f64] {
        &self.0
    }

    pub fn len(&self) -> usize {
        self.0.len()
    }

    pub fn is_empty(&self) -> bool {
        self.0.is_empty()
    }

    pub fn first(&self) -> f64 {
        self.0[0]
    }

    pub fn index_of(&self, t: f64) -> Option<usize> {
        time_index(&self.0, t)
    }

    pub fn contains_grid(&self, other: &TimeGrid) -> bool {
        other.0.iter().all(|&t| self.index_of(t).is_some())
    }

    pub fn union(&self, other: &TimeGrid) -> TimeGrid {
        let mut all = self.0.clone();
        for &t in &other.0 {
            if self.index_of(t).is_none() {
                all.push(t);
            }
        }
        all.sort_by(f64::total_cmp);
        TimeGrid(all)
    }
}

/// One projector per grid slot; identity events are allowed.
#[derive(Debug, Clone, PartialEq)]
pub struct ProductHistory {
    grid: TimeGrid,
    events: Vec<Projector>,
}

impl ProductHistory {
    pub fn new(grid: TimeGrid, events: Vec<Projector>) -> Result<Self> {
        if events.len() != grid.len() {
            return Err(HistoryError::EventCount { events: events.len(), slots: grid.len() });
        }
        let d = events[0].dim();
        for e in &events {
            check_dim(d, e.dim())?;
        }
        Ok(ProductHistory { grid, events })
    }

    pub fn single(t: f64, event: Projector) -> Self {
        ProductHistory { grid: TimeGrid::single(t), events: vec![event] }
    }

    pub fn identity(grid: TimeGrid, dim: usize) -> Self {
        let events = vec![Projector::identity(dim); grid.len()];
        ProductHistory { grid, events }
    }

    pub fn grid(&self) -> &TimeGrid {
        &self.grid
    }

    pub fn events(&self) -> &[Projector] {
        &self.events
    }

    pub fn dim(&self) -> usize {
        self.events[0].dim()
    }

    pub fn event_at(&self, t: f64) -> Option<&Projector> {
        self.grid.index_of(t).map(|i| &self.events[i])
    }

    /// A product history is the zero operator as soon as one event is.
    pub fn is_zero(&self) -> bool {
        self.events.iter().any(Projector::is_zero)
    }

    pub fn is_identity(&self) -> bool {
        self.events.iter().all(Projector::is_identity)
    }

    /// Rank on history space: the product of the slot ranks.
    pub fn rank(&self) -> u128 {
        self.events.iter().map(|e| e.rank() as u128).product()
    }

    /// Inserts identity events at the target's new slots.
    pub fn extend_to(&self, target: &TimeGrid) -> Result<ProductHistory> {
        if let Some(&t) = self.grid.labels().iter().find(|&&t| target.index_of(t).is_none()) {
            return Err(HistoryError::NotASuperset(t));
        }
        let d = self.dim();
        let events = target
            .labels()
            .iter()
            .map(|&t| self.event_at(t).cloned().unwrap_or_else(|| Projector::identity(d)))
            .collect();
        Ok(ProductHistory { grid: target.clone(), events })
    }

    /// Drops slots outside `target`; `None` if a dropped slot is not the
    /// identity, in which case the history is not expressible on `target`.
    pub fn restrict_to(&self, target: &TimeGrid) -> Option<ProductHistory> {
        for (&t, e) in self.grid.labels().iter().zip(&self.events) {
            if target.index_of(t).is_none() && !e.is_identity() {
                return None;
            }
        }
        let d = self.dim();
        let events = target
            .labels()
            .iter()
            .map(|&t| self.event_at(t).cloned().unwrap_or_else(|| Projector::identity(d)))
            .collect();
        Some(ProductHistory { grid: target.clone(), events })
    }

    fn aligned(&self, other: &ProductHistory) -> Result<(ProductHistory, ProductHistory)> {
        check_dim(self.dim(), other.dim())?;
        let grid = self.grid.union(&other.grid);
        Ok((self.extend_to(&grid)?, other.extend_to(&grid)?))
    }

    /// Orthogonal on history space iff some slot has a vanishing product.
    pub fn is_orthogonal_to(&self, other: &ProductHistory, tol: f64) -> Result<bool> {
        let (a, b) = self.aligned(other)?;
        for (x, y) in a.events.iter().zip(&b.events) {
            if x.is_orthogonal_to(y, tol)? {
                return Ok(true);
            }
        }
        Ok(false)
    }

    /// `self ≤ other` as history projectors.
    pub fn is_contained_in(&self, other: &ProductHistory, tol: f64) -> Result<bool> {
        if self.is_zero() {
            return Ok(true);
        }
        let (a, b) = self.aligned(other)?;
        for (x, y) in a.events.iter().zip(&b.events) {
            if !y.contains(x, tol)? {
                return Ok(false);
            }
        }
        Ok(true)
    }

    /// Slot-wise product. Orthogonal histories give a zero history; otherwise
    /// every slot pair must commute for the product to be a projector.
    pub fn meet(&self, other: &ProductHistory, tol: f64) -> Result<ProductHistory> {
        let (a, b) = self.aligned(other)?;
        let slot_zero = a
            .events
            .iter()
            .zip(&b.events)
            .map(|(x, y)| x.is_orthogonal_to(y, tol))
            .collect::<std::result::Result<Vec<_>, _>>()?;
        if let Some(k) = slot_zero.iter().position(|&z| z) {
            let mut events = a.events.clone();
            events[k] = Projector::zero(a.dim());
            return Ok(ProductHistory { grid: a.grid, events });
        }
        let events = a
            .events
            .iter()
            .zip(&b.events)
            .map(|(x, y)| x.meet(y, tol))
            .collect::<std::result::Result<Vec<_>, _>>()
            .map_err(|e| HistoryError::NotAProjectorProduct(e.to_string()))?;
        Ok(ProductHistory { grid: a.grid, events })
    }

    pub fn approx_eq(&self, other: &ProductHistory, tol: f64) -> bool {
        self.grid.len() == other.grid.len()
            && self.grid.labels().iter().zip(other.grid.labels()).all(|(a, b)| same_time(*a, *b))
            && self.events.iter().zip(&other.events).all(|(a, b)| a.approx_eq(b, tol))
    }
}

/// Sum of pairwise-orthogonal product histories on a common grid.
#[derive(Debug, Clone, PartialEq)]
pub struct HistorySum {
    grid: TimeGrid,
    terms: Vec<ProductHistory>,
}

impl HistorySum {
    /// Extends every term to the union grid and checks pairwise orthogonality.
    pub fn new(terms: Vec<ProductHistory>, tol: f64) -> Result<Self> {
        let first = terms.first().ok_or(HistoryError::Empty)?;
        let d = first.dim();
        let mut grid = first.grid.clone();
        for t in &terms {
            check_dim(d, t.dim())?;
            grid = grid.union(&t.grid);
        }
        let terms = terms.iter().map(|t| t.extend_to(&grid)).collect::<Result<Vec<_>>>()?;
        for i in 0..terms.len() {
            for j in i + 1..terms.len() {
                if !terms[i].is_orthogonal_to(&terms[j], tol)? {
                    return Err(HistoryError::NotOrthogonal(i, j));
                }
            }
        }
        Ok(HistorySum { grid, terms })
    }

    pub fn from_product(y: ProductHistory) -> Self {
        HistorySum { grid: y.grid.clone(), terms: vec![y] }
    }

    pub fn terms(&self) -> &[ProductHistory] {
        &self.terms
    }

    pub fn grid(&self) -> &TimeGrid {
        &self.grid
    }

    pub fn dim(&self) -> usize {
        self.terms[0].dim()
    }

    /// Distributes the product over both sums, dropping zero terms.
    pub fn product(&self, other: &HistorySum, tol: f64) -> Result<HistorySum> {
        let mut terms = Vec::new();
        for x in &self.terms {
            for y in &other.terms {
                let m = x.meet(y, tol)?;
                if !m.is_zero() {
                    terms.push(m);
                }
            }
        }
        if terms.is_empty() {
            let grid = self.grid.union(&other.grid);
            let mut zero = ProductHistory::identity(grid, self.dim());
            zero.events[0] = Projector::zero(self.dim());
            terms.push(zero);
        }
        HistorySum::new(terms, tol).map_err(|e| match e {
            HistoryError::NotOrthogonal(i, j) => {
                HistoryError::NotAProjectorProduct(format!("product terms {i} and {j} overlap"))
            }
            other => other,
        })
    }
}

impl From<ProductHistory> for HistorySum {
    fn from(y: ProductHistory) -> Self {
        HistorySum::from_product(y)
    }
}

/// The chain operator `K(Y)` on the single-time space.
#[derive(Debug, Clone, PartialEq)]
pub struct WeightOperator(CMatrix);

impl WeightOperator {
    pub fn matrix(&self) -> &CMatrix {
        &self.0
    }

    pub fn into_matrix(self) -> CMatrix {
        self.0
    }
}

/// Anything with a weight operator: product histories directly, sums by
/// linearity.
pub trait History {
    fn grid(&self) -> &TimeGrid;
    fn weight_operator(&self, fam: &PropagatorFamily) -> Result<WeightOperator>;
}

fn slot_indices(grid: &TimeGrid, fam: &PropagatorFamily) -> Result<Vec<usize>> {
    grid.labels()
        .iter()
        .map(|&t| fam.index_of(t).ok_or(HistoryError::Qalg(QalgError::UnknownTime(t))))
        .collect()
}

/// `K(Y) = E₁T(t₁,t₂)E₂…T(tₙ₋₁,tₙ)Eₙ`.
pub fn weight_operator(y: &ProductHistory, fam: &PropagatorFamily) -> Result<WeightOperator> {
    check_dim(fam.dim(), y.dim())?;
    let idx = slot_indices(&y.grid, fam)?;
    let mut k = y.events[0].matrix().clone();
    for j in 1..idx.len() {
        let back = fam.propagator_by_index(idx[j - 1], idx[j]);
        k = &(&k * &back) * y.events[j].matrix();
    }
    Ok(WeightOperator(k))
}

/// Product of Heisenberg projectors `T(t_r,tⱼ)EⱼT(tⱼ,t_r)` for a reference
/// time `t_r` on the propagator grid.
pub fn heisenberg_weight_operator(y: &ProductHistory, fam: &PropagatorFamily, reference: f64) -> Result<WeightOperator> {
    check_dim(fam.dim(), y.dim())?;
    let idx = slot_indices(&y.grid, fam)?;
    let r = fam.index_of(reference).ok_or(HistoryError::Qalg(QalgError::UnknownTime(reference)))?;
    let mut k = CMatrix::identity(y.dim());
    for (j, e) in idx.iter().zip(&y.events) {
        let hat = &(&fam.propagator_by_index(r, *j) * e.matrix()) * &fam.propagator_by_index(*j, r);
        k = &k * &hat;
    }
    Ok(WeightOperator(k))
}

impl History for ProductHistory {
    fn grid(&self) -> &TimeGrid {
        &self.grid
    }

    fn weight_operator(&self, fam: &PropagatorFamily) -> Result<WeightOperator> {
        weight_operator(self, fam)
    }
}

impl History for HistorySum {
    fn grid(&self) -> &TimeGrid {
        &self.grid
    }

    fn weight_operator(&self, fam: &PropagatorFamily) -> Result<WeightOperator> {
        let mut total = CMatrix::zeros(self.dim());
        for t in &self.terms {
            total = &total + weight_operator(t, fam)?.matrix();
        }
        Ok(WeightOperator(total))
    }
}

/// `W(Y) = ⟨K(Y), K(Y)⟩` under `metric`.
pub fn weight<H: History + ?Sized>(y: &H, fam: &PropagatorFamily, metric: &OperatorMetric) -> Result<f64> {
    let k = y.weight_operator(fam)?;
    Ok(op_inner(k.matrix(), k.matrix(), metric)?.re)
}

/// `Σ W(term)`, equal to [`weight`] exactly when the terms' weight operators
/// are mutually orthogonal.
pub fn additive_weight(y: &HistorySum, fam: &PropagatorFamily, metric: &OperatorMetric) -> Result<f64> {
    y.terms.iter().map(|t| weight(t, fam, metric)).sum()
}

/// `θ(X|Y) = W(XY)/W(Y)`.
pub fn theta(x: &HistorySum, y: &HistorySum, fam: &PropagatorFamily, metric: &OperatorMetric, tol: f64) -> Result<f64> {
    let wy = weight(y, fam, metric)?;
    if wy <= tol * y.dim() as f64 {
        return Err(HistoryError::ZeroConditionWeight { weight: wy });
    }
    let xy = x.product(y, tol)?;
    Ok(weight(&xy, fam, metric)? / wy)
}

/// `|⟨K(Y), K(Ĭ − Y)⟩|`: a nonzero value means no consistent family can
/// contain `Y`.
pub fn individual_inconsistency(y: &ProductHistory, fam: &PropagatorFamily, metric: &OperatorMetric) -> Result<f64> {
    let k = y.weight_operator(fam)?;
    let full = ProductHistory::identity(y.grid.clone(), y.dim()).weight_operator(fam)?;
    let rest = full.matrix() - k.matrix();
    Ok(op_inner(k.matrix(), &rest, metric)?.norm())
}

/// `⟨K(a), K(b)⟩` convenience wrapper.
pub fn history_inner<A: History + ?Sized, B: History + ?Sized>(
    a: &A,
    b: &B,
    fam: &PropagatorFamily,
    metric: &OperatorMetric,
) -> Result<Complex64> {
    let ka = a.weight_operator(fam)?;
    let kb = b.weight_operator(fam)?;
    Ok(op_inner(ka.matrix(), kb.matrix(), metric)?)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::qalg::{projector_from_kets, Ket, DEFAULT_TOL};

    const S3: f64 = 0.577_350_269_189_625_8;

    fn ket(v: &[f64]) -> Ket {
        Ket::from_real(v).unwrap()
    }
    fn dyad(v: &[f64]) -> Projector {
        Projector::from_ket(&ket(v)).unwrap()
    }
    fn grid(ts: &[f64]) -> TimeGrid {
        TimeGrid::new(ts.to_vec()).unwrap()
    }

    #[test]
    fn grids_validate_and_merge() {
        assert!(TimeGrid::new(vec![]).is_err());
        assert!(TimeGrid::new(vec![1.0, 1.0]).is_err());
        assert!(TimeGrid::new(vec![2.0, 1.0]).is_err());
        let u = grid(&[0.0, 2.0]).union(&grid(&[1.0, 2.0]));
        assert_eq!(u.labels(), &[0.0, 1.0, 2.0]);
    }

    #[test]
    fn extension_inserts_identities() {
        let a = dyad(&[1.0, 0.0, 0.0]);
        let y = ProductHistory::single(0.0, a.clone());
        let big = grid(&[0.0, 1.0, 2.0]);
        let e = y.extend_to(&big).unwrap();
        assert!(e.events()[0].approx_eq(&a, 0.0));
        assert!(e.events()[1].is_identity() && e.events()[2].is_identity());
        assert_eq!(y.extend_to(y.grid()).unwrap(), y);
        assert_eq!(e.extend_to(&grid(&[0.0, 2.0])), Err(HistoryError::NotASuperset(1.0)));
        assert!(matches!(ProductHistory::new(big, vec![a]), Err(HistoryError::EventCount { .. })));
    }

    #[test]
    fn weight_is_invariant_under_extension() {
        let h = CMatrix::from_real_rows(&[vec![0.0, 1.0, 0.0], vec![1.0, 0.5, 0.2], vec![0.0, 0.2, -1.0]]).unwrap();
        let fam = PropagatorFamily::from_hamiltonian(&h, vec![0.0, 0.6, 1.5], DEFAULT_TOL).unwrap();
        let y = ProductHistory::new(grid(&[0.0, 1.5]), vec![dyad(&[1.0, 1.0, 0.0]), dyad(&[0.0, 1.0, 1.0])]).unwrap();
        let ext = y.extend_to(&grid(&[0.0, 0.6, 1.5])).unwrap();
        // direct chain with the inserted unitaries
        let t01 = fam.propagator(0.0, 0.6).unwrap();
        let t12 = fam.propagator(0.6, 1.5).unwrap();
        let k = &(&(ext.events()[0].matrix() * &t01) * &t12) * ext.events()[2].matrix();
        let oracle = op_inner(&k, &k, &OperatorMetric::PlainComplex).unwrap().re;
        let m = OperatorMetric::PlainComplex;
        assert!((weight(&y, &fam, &m).unwrap() - oracle).abs() < 1e-12);
        assert!((weight(&ext, &fam, &m).unwrap() - oracle).abs() < 1e-12);
    }

    fn three_state() -> (Projector, Projector, Projector, Projector, PropagatorFamily) {
        let phi = dyad(&[S3, S3, S3]);
        let psi = dyad(&[S3, S3, -S3]);
        let a = dyad(&[1.0, 0.0, 0.0]);
        let b = dyad(&[0.0, 1.0, 0.0]);
        (phi, psi, a, b, PropagatorFamily::identity(vec![0.0, 1.0, 2.0], 3).unwrap())
    }

    #[test]
    fn three_state_weight_operator() {
        let (phi, psi, a, _, fam) = three_state();
        let y = ProductHistory::new(grid(&[0.0, 1.0, 2.0]), vec![phi.clone(), a.clone(), psi.clone()]).unwrap();
        let k = weight_operator(&y, &fam).unwrap();
        let direct = &(phi.matrix() * a.matrix()) * psi.matrix();
        assert!(k.matrix().approx_eq(&direct, 1e-15));
        // |<Phi|A>|^2 |<A|Psi>|^2 = 1/9
        let w = weight(&y, &fam, &OperatorMetric::PlainComplex).unwrap();
        assert!((w - 1.0 / 9.0).abs() < 1e-14);
        let single = ProductHistory::single(1.0, a.clone());
        assert!(weight_operator(&single, &fam).unwrap().matrix().approx_eq(a.matrix(), 0.0));
    }

    #[test]
    fn heisenberg_path_matches_schrodinger_path() {
        let h = CMatrix::from_real_rows(&[vec![1.0, 0.3, 0.0], vec![0.3, 0.0, 0.7], vec![0.0, 0.7, -0.5]]).unwrap();
        let fam = PropagatorFamily::from_hamiltonian(&h, vec![0.0, 1.0, 2.5], DEFAULT_TOL).unwrap();
        let y = ProductHistory::new(
            grid(&[0.0, 1.0, 2.5]),
            vec![dyad(&[1.0, 0.0, 0.0]), dyad(&[1.0, 1.0, 0.0]), dyad(&[0.0, 1.0, -1.0])],
        )
        .unwrap();
        let k = weight_operator(&y, &fam).unwrap();
        for &r in fam.times() {
            let hat = heisenberg_weight_operator(&y, &fam, r).unwrap();
            // K̂ = T(t_r, t₁) K T(tₙ, t_r)
            let expected = &(&fam.propagator(r, 0.0).unwrap() * k.matrix()) * &fam.propagator(2.5, r).unwrap();
            assert!(hat.matrix().approx_eq(&expected, 1e-12));
            let m = OperatorMetric::PlainComplex;
            let w = op_inner(k.matrix(), k.matrix(), &m).unwrap().re;
            let w_hat = op_inner(hat.matrix(), hat.matrix(), &m).unwrap().re;
            assert!((w - w_hat).abs() < 1e-12);
        }
    }

    #[test]
    fn born_weight_of_two_time_history() {
        let psi0 = ket(&[0.6, 0.8]);
        let psi1 = ket(&[S3.sqrt(), (1.0 - S3).sqrt()]);
        let fam = PropagatorFamily::identity(vec![0.0, 1.0], 2).unwrap();
        let y = ProductHistory::new(
            grid(&[0.0, 1.0]),
            vec![Projector::from_ket(&psi0).unwrap(), Projector::from_ket(&psi1).unwrap()],
        )
        .unwrap();
        let expected = psi1.inner(&psi0).unwrap().norm_sqr();
        assert!((weight(&y, &fam, &OperatorMetric::PlainComplex).unwrap() - expected).abs() < 1e-14);
    }

    #[test]
    fn identity_history_weighs_the_dimension() {
        let h = CMatrix::from_real_rows(&[vec![0.0, 1.0], vec![1.0, 0.0]]).unwrap();
        let fam = PropagatorFamily::from_hamiltonian(&h, vec![0.0, 1.0, 3.0], DEFAULT_TOL).unwrap();
        let y = ProductHistory::identity(grid(&[0.0, 1.0, 3.0]), 2);
        assert!((weight(&y, &fam, &OperatorMetric::PlainComplex).unwrap() - 2.0).abs() < 1e-12);
    }

    #[test]
    fn theta_values() {
        let (phi, psi, a, _, fam) = three_state();
        let m = OperatorMetric::PlainComplex;
        let cond = HistorySum::from_product(
            ProductHistory::new(grid(&[0.0, 2.0]), vec![phi.clone(), psi.clone()]).unwrap(),
        );
        let target = HistorySum::from_product(ProductHistory::single(1.0, a));
        assert!((theta(&target, &cond, &fam, &m, DEFAULT_TOL).unwrap() - 1.0).abs() < 1e-12);
        assert!((theta(&cond, &cond, &fam, &m, DEFAULT_TOL).unwrap() - 1.0).abs() < 1e-12);

        // single-time split of a rank-3 subspace into ranks 1 and 2
        let fam5 = PropagatorFamily::identity(vec![0.0], 5).unwrap();
        let d = projector_from_kets(&[Ket::basis(5, 0).unwrap(), Ket::basis(5, 1).unwrap(), Ket::basis(5, 2).unwrap()], DEFAULT_TOL).unwrap();
        let d1 = Projector::from_ket(&Ket::basis(5, 1).unwrap()).unwrap();
        let th = theta(
            &ProductHistory::single(0.0, d1).into(),
            &ProductHistory::single(0.0, d).into(),
            &fam5,
            &m,
            DEFAULT_TOL,
        )
        .unwrap();
        assert!((th - 1.0 / 3.0).abs() < 1e-14);

        let zero_cond = HistorySum::from_product(ProductHistory::single(0.0, Projector::zero(3)));
        assert!(matches!(
            theta(&cond, &zero_cond, &fam, &m, DEFAULT_TOL),
            Err(HistoryError::ZeroConditionWeight { .. })
        ));
    }

    #[test]
    fn sums_are_linear_and_checked() {
        let fam = PropagatorFamily::identity(vec![0.0, 1.0], 2).unwrap();
        let zp = dyad(&[1.0, 0.0]);
        let zm = dyad(&[0.0, 1.0]);
        let xp = dyad(&[1.0, 1.0]);
        let g = grid(&[0.0, 1.0]);
        let a = ProductHistory::new(g.clone(), vec![zp.clone(), xp.clone()]).unwrap();
        let b = ProductHistory::new(g.clone(), vec![zm.clone(), xp.clone()]).unwrap();
        let sum = HistorySum::new(vec![a.clone(), b.clone()], DEFAULT_TOL).unwrap();
        let m = OperatorMetric::PlainComplex;
        // Z+X+ + Z-X+ = I⊙X+, weight 1
        assert!((weight(&sum, &fam, &m).unwrap() - 1.0).abs() < 1e-14);
        assert!((additive_weight(&sum, &fam, &m).unwrap() - 1.0).abs() < 1e-14);
        assert_eq!(HistorySum::new(vec![a.clone(), a], DEFAULT_TOL), Err(HistoryError::NotOrthogonal(0, 1)));
        assert!(HistorySum::new(vec![], DEFAULT_TOL).is_err());
    }

    #[test]
    fn meets_of_products() {
        let zp = dyad(&[1.0, 0.0]);
        let zm = dyad(&[0.0, 1.0]);
        let xp = dyad(&[1.0, 1.0]);
        let a = ProductHistory::single(0.0, zp.clone());
        let b = ProductHistory::single(1.0, xp.clone());
        let ab = a.meet(&b, DEFAULT_TOL).unwrap();
        assert_eq!(ab.grid().labels(), &[0.0, 1.0]);
        assert!(ab.is_contained_in(&a, DEFAULT_TOL).unwrap());
        assert!(ProductHistory::single(0.0, zm).meet(&a, DEFAULT_TOL).unwrap().is_zero());
        assert!(matches!(
            ProductHistory::single(0.0, xp).meet(&a, DEFAULT_TOL),
            Err(HistoryError::NotAProjectorProduct(_))
        ));
    }

    #[test]
    fn inconsistent_single_history_is_flagged() {
        // Z+ ⊙ X+ ⊙ Z+ with trivial dynamics has K(Y) = Z+/2, K(rest) = I - Z+/2
        let fam = PropagatorFamily::identity(vec![0.0, 1.0, 2.0], 2).unwrap();
        let y = ProductHistory::new(grid(&[0.0, 1.0, 2.0]), vec![dyad(&[1.0, 0.0]), dyad(&[1.0, 1.0]), dyad(&[1.0, 0.0])]).unwrap();
        let v = individual_inconsistency(&y, &fam, &OperatorMetric::PlainComplex).unwrap();
        // Tr[(Z+/2)(I - Z+/2)] = 1/2 - 1/4
        assert!((v - 0.25).abs() < 1e-14);
        let ok = ProductHistory::new(grid(&[0.0, 2.0]), vec![dyad(&[1.0, 0.0]), dyad(&[1.0, 0.0])]).unwrap();
        assert!(individual_inconsistency(&ok, &fam, &OperatorMetric::PlainComplex).unwrap() < 1e-14);
    }
}
