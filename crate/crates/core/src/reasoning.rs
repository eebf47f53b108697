// Copyright 2026 Chronos Contributors
// SPDX-License-Identifier: Apache-2.0

//! Probabilistic reasoning inside consistent frameworks.
//!
//! A [`Framework`] pairs a decomposition with dynamics and an operator
//! metric, and is only constructible when the decomposition is consistent.
//! Distributions are refined to finer frameworks by the `θ` rule, several
//! frameworks are combined into the common refinement generated by their
//! minimal elements, and [`query`] answers conditional-probability questions
//! against a set of initial data.

use std::sync::Arc;

use num_complex::Complex64;
use thiserror::Error;

use crate::framework::{
    consistency_from_operators, AlgebraElement, ConsistencyReport, Decomposition, FrameworkError, WorstPair,
};
use crate::histories::{weight_operator, HistoryError, ProductHistory, TimeGrid};
use crate::qalg::{op_inner, CMatrix, OperatorMetric, Projector, PropagatorFamily, QalgError, DEFAULT_TOL};

#[derive(Debug, Clone, PartialEq, Error)]
pub enum ReasoningError {
    #[error(transparent)]
    Framework(#[from] FrameworkError),
    #[error(transparent)]
    History(#[from] HistoryError),
    #[error(transparent)]
    Qalg(#[from] QalgError),
    #[error("family is not consistent (worst overlap {:.3e})", report.worst_magnitude())]
    Inconsistent { report: ConsistencyReport },
    #[error("probability {value} of element {index} is negative")]
    NegativeProbability { index: usize, value: f64 },
    #[error("probabilities sum to {sum}, not 1")]
    NotNormalized { sum: f64 },
    #[error("element {index} has zero weight but positive probability")]
    PositiveOnZeroWeight { index: usize },
    #[error("expected {expected} probabilities, found {found}")]
    LengthMismatch { expected: usize, found: usize },
    #[error("element belongs to a different framework")]
    OwnerMismatch,
    #[error("target framework is not a refinement of the source framework")]
    NotARefinement,
    #[error("frameworks use different dynamics or metrics")]
    MismatchedDynamics,
    #[error("events at t = {time} do not commute (deviation {deviation:.3e})")]
    NonCommutingFrameworks { time: f64, deviation: f64 },
    #[error("common refinement is inconsistent (worst overlap {:.3e})", report.worst_magnitude())]
    InconsistentRefinement { report: ConsistencyReport },
    #[error("frameworks have no nonzero common elements")]
    EmptyRefinement,
    #[error("initial data are incompatible: {0}")]
    IncompatibleData(String),
    #[error("initial data have zero weight ({weight:.3e})")]
    ZeroWeightData { weight: f64 },
    #[error("condition has zero probability ({value:.3e})")]
    ZeroConditionWeight { value: f64 },
    #[error("history is not an element of the framework")]
    NotInFramework,
}

pub type Result<T> = std::result::Result<T, ReasoningError>;

/// Structural and probability tolerances.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Tolerances {
    /// Projector, commutation and orthogonality checks; also scales the
    /// zero-weight cutoff `tol · d`.
    pub structural: f64,
    /// Band for normalization and true/false verdicts.
    pub probability: f64,
}

impl Default for Tolerances {
    fn default() -> Self {
        Tolerances { structural: DEFAULT_TOL, probability: DEFAULT_TOL }
    }
}

/// A consistent family with its dynamics and operator metric.
#[derive(Debug)]
pub struct Framework {
    decomposition: Arc<Decomposition>,
    dynamics: Arc<PropagatorFamily>,
    metric: OperatorMetric,
    report: ConsistencyReport,
    operators: Vec<CMatrix>,
    weights: Vec<f64>,
}

impl Framework {
    /// Fails with [`ReasoningError::Inconsistent`] carrying the full report.
    pub fn new(
        decomposition: Arc<Decomposition>,
        dynamics: Arc<PropagatorFamily>,
        metric: OperatorMetric,
    ) -> Result<Arc<Framework>> {
        let operators = decomposition
            .minimal()
            .iter()
            .map(|m| anchored_operator(m, &dynamics, &metric))
            .collect::<Result<Vec<_>>>()?;
        let report = consistency_from_operators(
            &operators,
            &metric,
            decomposition.is_single_time(),
            decomposition.tol(),
        )?;
        if !report.verdict {
            return Err(ReasoningError::Inconsistent { report });
        }
        let weights = operators
            .iter()
            .map(|k| op_inner(k, k, &metric).map(|z| z.re))
            .collect::<std::result::Result<Vec<_>, _>>()?;
        Ok(Arc::new(Framework { decomposition, dynamics, metric, report, operators, weights }))
    }

    /// `{Ĭ}` on the earliest time of the dynamics.
    pub fn trivial(dynamics: Arc<PropagatorFamily>, metric: OperatorMetric, tol: f64) -> Result<Arc<Framework>> {
        let t0 = dynamics.times()[0];
        let full = ProductHistory::identity(TimeGrid::single(t0), dynamics.dim());
        let d = Decomposition::new(vec![full], tol)?;
        Framework::new(Arc::new(d), dynamics, metric)
    }

    pub fn decomposition(&self) -> &Arc<Decomposition> {
        &self.decomposition
    }

    pub fn dynamics(&self) -> &Arc<PropagatorFamily> {
        &self.dynamics
    }

    pub fn metric(&self) -> &OperatorMetric {
        &self.metric
    }

    pub fn report(&self) -> &ConsistencyReport {
        &self.report
    }

    pub fn len(&self) -> usize {
        self.decomposition.len()
    }

    pub fn is_empty(&self) -> bool {
        self.decomposition.is_empty()
    }

    pub fn tol(&self) -> f64 {
        self.decomposition.tol()
    }

    /// Weights at or below this value count as zero.
    pub fn zero_cut(&self) -> f64 {
        self.tol() * self.decomposition.dim() as f64
    }

    /// `W(Fᵢ)` for every minimal element.
    pub fn weights(&self) -> &[f64] {
        &self.weights
    }

    pub fn is_dynamically_possible(&self, index: usize) -> bool {
        self.weights[index] > self.zero_cut()
    }

    pub fn element(&self, bits: Vec<bool>) -> Result<AlgebraElement> {
        Ok(AlgebraElement::new(&self.decomposition, bits)?)
    }

    pub fn element_of(&self, y: &ProductHistory) -> Option<AlgebraElement> {
        AlgebraElement::of_history(&self.decomposition, y)
    }

    fn owns(&self, e: &AlgebraElement) -> Result<()> {
        if e.owner().id() == self.decomposition.id() {
            Ok(())
        } else {
            Err(ReasoningError::OwnerMismatch)
        }
    }

    /// `K` of an element, by linearity over its minimal elements.
    pub fn operator_of(&self, e: &AlgebraElement) -> Result<CMatrix> {
        self.owns(e)?;
        let mut total = CMatrix::zeros(self.decomposition.dim());
        for i in e.selected() {
            total = &total + &self.operators[i];
        }
        Ok(total)
    }

    /// `W(Y) = ⟨K(Y), K(Y)⟩`.
    pub fn weight_of(&self, e: &AlgebraElement) -> Result<f64> {
        let k = self.operator_of(e)?;
        Ok(op_inner(&k, &k, &self.metric)?.re)
    }

    /// Weight of an arbitrary product history under this framework's
    /// dynamics and metric.
    pub fn history_weight(&self, y: &ProductHistory) -> Result<f64> {
        let k = anchored_operator(y, &self.dynamics, &self.metric)?;
        Ok(op_inner(&k, &k, &self.metric)?.re)
    }

    /// `θ(X|Y) = W(XY)/W(Y)`.
    pub fn theta(&self, x: &AlgebraElement, y: &AlgebraElement) -> Result<f64> {
        let wy = self.weight_of(y)?;
        if wy <= self.zero_cut() {
            return Err(ReasoningError::ZeroConditionWeight { value: wy });
        }
        Ok(self.weight_of(&x.meet(y)?)? / wy)
    }

    /// Tautology or contradiction relative to the dynamically possible
    /// minimal elements.
    pub fn classify(&self, e: &AlgebraElement) -> Result<Classification> {
        self.owns(e)?;
        let possible: Vec<usize> = (0..self.len()).filter(|&i| self.is_dynamically_possible(i)).collect();
        let bits = e.bits();
        Ok(if possible.iter().all(|&i| bits[i]) {
            Classification::Tautology
        } else if possible.iter().all(|&i| !bits[i]) {
            Classification::Contradiction
        } else {
            Classification::Contingent
        })
    }

    fn compatible_with(&self, other: &Framework) -> bool {
        (Arc::ptr_eq(&self.dynamics, &other.dynamics) || self.dynamics.same_as(&other.dynamics, self.tol()))
            && self.metric == other.metric
    }
}

/// Density metrics attach `ρ` to the earliest and `ρ′` to the latest time of
/// the dynamics, so histories are extended to reach them.
fn anchored_operator(y: &ProductHistory, fam: &PropagatorFamily, metric: &OperatorMetric) -> Result<CMatrix> {
    let times = fam.times();
    let anchor = match metric {
        OperatorMetric::InitialRho(_) => vec![times[0]],
        OperatorMetric::InitialFinalRho(..) => {
            let mut v = vec![times[0]];
            if times.len() > 1 {
                v.push(times[times.len() - 1]);
            }
            v
        }
        _ => Vec::new(),
    };
    let y = if anchor.is_empty() {
        y.clone()
    } else {
        let grid = y.grid().union(&TimeGrid::new(anchor).map_err(ReasoningError::from)?);
        y.extend_to(&grid)?
    };
    Ok(weight_operator(&y, fam)?.into_matrix())
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Classification {
    Tautology,
    Contradiction,
    Contingent,
}

/// Probabilities on the minimal elements of a framework.
#[derive(Debug, Clone)]
pub struct ProbabilityDistribution {
    owner: Arc<Framework>,
    values: Vec<f64>,
}

impl ProbabilityDistribution {
    /// Validates non-negativity, normalization and zero mass on
    /// dynamically impossible elements. Values within `tol` below zero are
    /// clamped.
    pub fn assign(owner: &Arc<Framework>, values: Vec<f64>, tol: f64) -> Result<Self> {
        if values.len() != owner.len() {
            return Err(ReasoningError::LengthMismatch { expected: owner.len(), found: values.len() });
        }
        let mut clean = Vec::with_capacity(values.len());
        for (index, &value) in values.iter().enumerate() {
            if !value.is_finite() || value < -tol {
                return Err(ReasoningError::NegativeProbability { index, value });
            }
            if value > tol && !owner.is_dynamically_possible(index) {
                return Err(ReasoningError::PositiveOnZeroWeight { index });
            }
            clean.push(value.max(0.0));
        }
        let sum: f64 = clean.iter().sum();
        if (sum - 1.0).abs() > tol {
            return Err(ReasoningError::NotNormalized { sum });
        }
        Ok(ProbabilityDistribution { owner: Arc::clone(owner), values: clean })
    }

    /// All mass on one minimal element.
    pub fn point_mass(owner: &Arc<Framework>, index: usize, tol: f64) -> Result<Self> {
        let mut values = vec![0.0; owner.len()];
        values[index] = 1.0;
        Self::assign(owner, values, tol)
    }

    pub fn owner(&self) -> &Arc<Framework> {
        &self.owner
    }

    pub fn values(&self) -> &[f64] {
        &self.values
    }

    /// `Pr(Y) = Σ_{Fᵢ ≤ Y} Pr(Fᵢ)`.
    pub fn probability(&self, e: &AlgebraElement) -> Result<f64> {
        self.owner.owns(e)?;
        Ok(e.selected().map(|i| self.values[i]).sum())
    }

    /// `Pr(X|Y) = Pr(XY)/Pr(Y)`.
    pub fn conditional(&self, x: &AlgebraElement, y: &AlgebraElement, tol: f64) -> Result<f64> {
        let py = self.probability(y)?;
        if py <= tol {
            return Err(ReasoningError::ZeroConditionWeight { value: py });
        }
        Ok(self.probability(&x.meet(y)?)? / py)
    }
}

/// For each coarse minimal element, the fine minimal elements it contains.
pub fn refinement_map(coarse: &Framework, fine: &Framework) -> Option<Vec<Vec<bool>>> {
    if !coarse.compatible_with(fine) {
        return None;
    }
    let map: Vec<Vec<bool>> = coarse
        .decomposition
        .minimal()
        .iter()
        .map(|m| fine.decomposition.contains(m))
        .collect::<Option<_>>()?;
    // fine elements must be covered exactly once
    let covered = (0..fine.len()).all(|j| map.iter().filter(|row| row[j]).count() == 1);
    covered.then_some(map)
}

pub fn is_refinement(coarse: &Framework, fine: &Framework) -> bool {
    refinement_map(coarse, fine).is_some()
}

/// `Pr′(G) = Σᵢ θ(G|Fᵢ) Pr(Fᵢ)`, skipping terms with `Pr(Fᵢ) = 0`.
///
/// `W(Fᵢ)` is evaluated directly from the coarse product history, so the
/// result is normalized only up to the consistency of the fine framework.
pub fn refine_distribution(pr: &ProbabilityDistribution, fine: &Arc<Framework>, tol: f64) -> Result<ProbabilityDistribution> {
    let coarse = &pr.owner;
    let map = refinement_map(coarse, fine).ok_or(ReasoningError::NotARefinement)?;
    let mut values = vec![0.0; fine.len()];
    for (i, row) in map.iter().enumerate() {
        let p = pr.values[i];
        if p == 0.0 {
            continue;
        }
        let wf = fine.history_weight(&coarse.decomposition.minimal()[i])?;
        if wf <= fine.zero_cut() {
            continue;
        }
        for (j, &inside) in row.iter().enumerate() {
            if inside {
                values[j] += fine.weights[j] / wf * p;
            }
        }
    }
    ProbabilityDistribution::assign(fine, values, tol)
}

/// Common refinement of several frameworks.
#[derive(Debug, Clone)]
pub struct Generated {
    pub framework: Arc<Framework>,
    /// `sources[g][k]`: index of the minimal element of framework `k` that
    /// contributes to generated element `g`.
    pub sources: Vec<Vec<usize>>,
}

/// Builds all nonzero slot-wise products of minimal elements, one from each
/// framework, after extending everything to the union grid.
///
/// Fails with [`ReasoningError::NonCommutingFrameworks`] when same-time
/// events do not commute and with [`ReasoningError::InconsistentRefinement`]
/// when the products do not form a consistent family.
pub fn generate_common(frameworks: &[Arc<Framework>]) -> Result<Generated> {
    let first = frameworks.first().ok_or(FrameworkError::Empty)?;
    if frameworks.iter().any(|f| !first.compatible_with(f)) {
        return Err(ReasoningError::MismatchedDynamics);
    }
    let tol = frameworks.iter().map(|f| f.tol()).fold(f64::INFINITY, f64::min);
    let grid = frameworks
        .iter()
        .skip(1)
        .fold(first.decomposition.grid().clone(), |g, f| g.union(f.decomposition.grid()));
    let extended: Vec<Vec<ProductHistory>> = frameworks
        .iter()
        .map(|f| {
            f.decomposition
                .minimal()
                .iter()
                .map(|m| m.extend_to(&grid))
                .collect::<std::result::Result<Vec<_>, _>>()
        })
        .collect::<std::result::Result<_, _>>()?;
    check_slot_commutation(&grid, &extended, tol)?;

    let mut products: Vec<(ProductHistory, Vec<usize>)> =
        extended[0].iter().enumerate().map(|(i, h)| (h.clone(), vec![i])).collect();
    for family in &extended[1..] {
        let mut next = Vec::new();
        for (h, src) in &products {
            for (j, m) in family.iter().enumerate() {
                let p = h.meet(m, tol)?;
                if !p.is_zero() {
                    let mut s = src.clone();
                    s.push(j);
                    next.push((p, s));
                }
            }
        }
        products = next;
    }
    if products.is_empty() {
        return Err(ReasoningError::EmptyRefinement);
    }
    let mut cap = first.decomposition.cap().extend_to(&grid)?;
    for f in &frameworks[1..] {
        cap = cap.meet(&f.decomposition.cap().extend_to(&grid)?, tol)?;
    }
    let (minimal, sources): (Vec<_>, Vec<_>) = products.into_iter().unzip();
    let d = Decomposition::with_cap(minimal, cap, tol)?;
    let framework = match Framework::new(Arc::new(d), Arc::clone(&first.dynamics), first.metric.clone()) {
        Err(ReasoningError::Inconsistent { report }) => return Err(ReasoningError::InconsistentRefinement { report }),
        other => other?,
    };
    Ok(Generated { framework, sources })
}

fn check_slot_commutation(grid: &TimeGrid, families: &[Vec<ProductHistory>], tol: f64) -> Result<()> {
    for (slot, &time) in grid.labels().iter().enumerate() {
        let distinct: Vec<Vec<&Projector>> = families
            .iter()
            .map(|fam| {
                let mut seen: Vec<&Projector> = Vec::new();
                for h in fam {
                    let e = &h.events()[slot];
                    if !e.is_identity() && !seen.iter().any(|s| s.approx_eq(e, tol)) {
                        seen.push(e);
                    }
                }
                seen
            })
            .collect();
        for a in 0..distinct.len() {
            for b in a + 1..distinct.len() {
                for p in &distinct[a] {
                    for q in &distinct[b] {
                        let pq = p.matrix() * q.matrix();
                        let deviation = (&pq - &pq.adjoint()).max_abs();
                        if deviation > tol {
                            return Err(ReasoningError::NonCommutingFrameworks { time, deviation });
                        }
                    }
                }
            }
        }
    }
    Ok(())
}

/// Frameworks whose cap is a fixed initial or final event get the
/// complementary element so that their cap becomes the identity.
fn completed(f: &Arc<Framework>) -> Result<Arc<Framework>> {
    if f.decomposition.has_identity_cap() {
        return Ok(Arc::clone(f));
    }
    let d = f.decomposition.complete_fixed_initial(&f.dynamics, &f.metric)?;
    Framework::new(Arc::new(d), Arc::clone(&f.dynamics), f.metric.clone())
}

/// Assertions `Pr(Dᵢ) = 1`, each inside its own framework.
#[derive(Debug, Clone)]
pub struct InitialData {
    dynamics: Arc<PropagatorFamily>,
    metric: OperatorMetric,
    tol: Tolerances,
    items: Vec<(Arc<Framework>, AlgebraElement)>,
}

impl InitialData {
    pub fn new(dynamics: Arc<PropagatorFamily>, metric: OperatorMetric, tol: Tolerances) -> Self {
        InitialData { dynamics, metric, tol, items: Vec::new() }
    }

    pub fn assert(&mut self, framework: Arc<Framework>, element: AlgebraElement) -> Result<()> {
        framework.owns(&element)?;
        if !(framework.dynamics.same_as(&self.dynamics, self.tol.structural) && framework.metric == self.metric) {
            return Err(ReasoningError::MismatchedDynamics);
        }
        self.items.push((framework, element));
        Ok(())
    }

    pub fn items(&self) -> &[(Arc<Framework>, AlgebraElement)] {
        &self.items
    }

    pub fn tolerances(&self) -> Tolerances {
        self.tol
    }

    pub fn dynamics(&self) -> &Arc<PropagatorFamily> {
        &self.dynamics
    }

    pub fn metric(&self) -> &OperatorMetric {
        &self.metric
    }
}

/// Framework, distribution and asserted element produced from initial data.
#[derive(Debug, Clone)]
pub struct DataFrame {
    pub framework: Arc<Framework>,
    pub distribution: ProbabilityDistribution,
    pub asserted: AlgebraElement,
}

/// Combines all assertions in the common refinement of their frameworks.
/// The product `D` of the asserted elements carries `Pr = θ(·|D)`.
pub fn combine_initial_data(data: &InitialData) -> Result<DataFrame> {
    let tol = data.tol;
    if data.items.is_empty() {
        let f = Framework::trivial(Arc::clone(&data.dynamics), data.metric.clone(), tol.structural)?;
        let asserted = AlgebraElement::full(f.decomposition());
        let distribution = ProbabilityDistribution::assign(&f, vec![1.0], tol.probability)?;
        return Ok(DataFrame { framework: f, distribution, asserted });
    }
    let frameworks: Vec<Arc<Framework>> = data.items.iter().map(|(f, _)| Arc::clone(f)).collect();
    let generated = match generate_common(&frameworks) {
        Ok(g) => g,
        Err(ReasoningError::NonCommutingFrameworks { time, deviation }) => {
            return Err(ReasoningError::IncompatibleData(format!(
                "events at t = {time} do not commute (deviation {deviation:.3e})"
            )))
        }
        Err(ReasoningError::InconsistentRefinement { report }) => {
            return Err(ReasoningError::IncompatibleData(format!(
                "combined family is inconsistent (worst overlap {:.3e})",
                report.worst_magnitude()
            )))
        }
        Err(ReasoningError::EmptyRefinement) => {
            return Err(ReasoningError::IncompatibleData("assertions have no common elements".into()))
        }
        Err(e) => return Err(e),
    };
    let mut bits: Vec<bool> = generated
        .sources
        .iter()
        .map(|src| data.items.iter().zip(src).all(|((_, e), &k)| e.bits()[k]))
        .collect();
    let mut framework = generated.framework;
    if !framework.decomposition.has_identity_cap() {
        framework = completed(&framework).map_err(|e| ReasoningError::IncompatibleData(e.to_string()))?;
        bits.push(false);
    }
    let asserted = framework.element(bits)?;
    let wd = framework.weight_of(&asserted)?;
    if wd <= framework.zero_cut() {
        return Err(ReasoningError::ZeroWeightData { weight: wd });
    }
    let values = (0..framework.len())
        .map(|g| if asserted.bits()[g] { framework.weights[g] / wd } else { 0.0 })
        .collect();
    let distribution = ProbabilityDistribution::assign(&framework, values, tol.probability)?;
    Ok(DataFrame { framework, distribution, asserted })
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum VerdictKind {
    Probability,
    True,
    False,
    Meaningless,
    DataInconsistent,
}

impl VerdictKind {
    pub fn as_str(&self) -> &'static str {
        match self {
            VerdictKind::Probability => "probability",
            VerdictKind::True => "true",
            VerdictKind::False => "false",
            VerdictKind::Meaningless => "meaningless",
            VerdictKind::DataInconsistent => "data-inconsistent",
        }
    }
}

impl std::fmt::Display for VerdictKind {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(self.as_str())
    }
}

/// Why a query has no probability.
#[derive(Debug, Clone, PartialEq)]
pub enum MeaninglessReason {
    NonCommuting { time: f64, deviation: f64 },
    Inconsistent { worst: Option<WorstPair> },
    NotInFramework,
}

impl std::fmt::Display for MeaninglessReason {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        match self {
            MeaninglessReason::NonCommuting { time, deviation } => {
                write!(f, "events at t = {time} do not commute (deviation {deviation:.3e})")
            }
            MeaninglessReason::Inconsistent { worst: Some(w) } => write!(
                f,
                "no consistent family contains the query: elements {} and {} overlap by {:.3e}",
                w.first, w.second, w.magnitude
            ),
            MeaninglessReason::Inconsistent { worst: None } => f.write_str("no consistent family contains the query"),
            MeaninglessReason::NotInFramework => f.write_str("query is not an element of the requested framework"),
        }
    }
}

#[derive(Debug, Clone)]
pub struct Verdict {
    pub kind: VerdictKind,
    /// Banded value: exactly 1 for true and 0 for false.
    pub probability: Option<f64>,
    /// Value before banding.
    pub raw_probability: Option<f64>,
    /// Framework in which the verdict was reached.
    pub framework: Option<Arc<Framework>>,
    pub meaningless: Option<MeaninglessReason>,
    pub detail: Option<String>,
}

impl Verdict {
    fn probability(p: f64, framework: Arc<Framework>, tol: f64) -> Verdict {
        let (kind, banded) = if p >= 1.0 - tol {
            (VerdictKind::True, 1.0)
        } else if p <= tol {
            (VerdictKind::False, 0.0)
        } else {
            (VerdictKind::Probability, p)
        };
        Verdict {
            kind,
            probability: Some(banded),
            raw_probability: Some(p),
            framework: Some(framework),
            meaningless: None,
            detail: None,
        }
    }

    fn meaningless(reason: MeaninglessReason, framework: Arc<Framework>) -> Verdict {
        Verdict {
            kind: VerdictKind::Meaningless,
            probability: None,
            raw_probability: None,
            framework: Some(framework),
            detail: Some(reason.to_string()),
            meaningless: Some(reason),
        }
    }

    fn data_inconsistent(reason: String) -> Verdict {
        Verdict {
            kind: VerdictKind::DataInconsistent,
            probability: None,
            raw_probability: None,
            framework: None,
            meaningless: None,
            detail: Some(reason),
        }
    }
}

fn single_time_partitions(
    histories: &[&ProductHistory],
    dynamics: &Arc<PropagatorFamily>,
    metric: &OperatorMetric,
    tol: f64,
) -> Result<Vec<Arc<Framework>>> {
    let mut seen: Vec<(f64, Projector)> = Vec::new();
    let mut out = Vec::new();
    for h in histories {
        for (&t, e) in h.grid().labels().iter().zip(h.events()) {
            if e.is_identity() || e.is_zero() {
                continue;
            }
            let dup = seen.iter().any(|(s, p)| *s == t && (p.approx_eq(e, tol) || p.approx_eq(&e.complement(), tol)));
            if dup {
                continue;
            }
            seen.push((t, e.clone()));
            let d = Decomposition::new(
                vec![ProductHistory::single(t, e.clone()), ProductHistory::single(t, e.complement())],
                tol,
            )?;
            out.push(Framework::new(Arc::new(d), Arc::clone(dynamics), metric.clone())?);
        }
    }
    Ok(out)
}

/// Conjunction of product histories, `None` for an empty list.
fn conjunction<'a>(hs: impl IntoIterator<Item = &'a ProductHistory>, tol: f64) -> Result<Option<ProductHistory>> {
    let mut acc: Option<ProductHistory> = None;
    for h in hs {
        acc = Some(match acc {
            None => h.clone(),
            Some(a) => a.meet(h, tol)?,
        });
    }
    Ok(acc)
}

fn element_or_full(f: &Framework, h: &Option<ProductHistory>) -> Result<AlgebraElement> {
    match h {
        None => Ok(AlgebraElement::full(f.decomposition())),
        Some(h) => f.element_of(h).ok_or(ReasoningError::NotInFramework),
    }
}

/// `Pr(T ∧ C) / Pr(C)`; only `T ∧ C` and `C` need to be elements.
fn evaluate(
    df: &DataFrame,
    generated: &Arc<Framework>,
    targets: &[ProductHistory],
    conditions: &[ProductHistory],
    tol: Tolerances,
) -> Result<Verdict> {
    let pr = refine_distribution(&df.distribution, generated, tol.probability)?;
    let c = conjunction(conditions, tol.structural)?;
    let tc = conjunction(targets.iter().chain(conditions), tol.structural)?;
    let condition = element_or_full(generated, &c)?;
    let joint = element_or_full(generated, &tc)?;
    let p = pr.conditional(&joint, &condition, tol.probability)?;
    Ok(Verdict::probability(p, Arc::clone(generated), tol.probability))
}

fn data_frame(data: &InitialData) -> Result<std::result::Result<DataFrame, Verdict>> {
    match combine_initial_data(data) {
        Ok(df) => Ok(Ok(df)),
        Err(ReasoningError::IncompatibleData(reason)) => Ok(Err(Verdict::data_inconsistent(reason))),
        Err(e @ ReasoningError::ZeroWeightData { .. }) => Ok(Err(Verdict::data_inconsistent(e.to_string()))),
        Err(e) => Err(e),
    }
}

/// `Pr(targets | conditions)` in the coarsest framework that contains the
/// initial data and a two-element partition for every event mentioned.
///
/// Targets and conditions are conjunctions of product histories.
pub fn query(data: &InitialData, targets: &[ProductHistory], conditions: &[ProductHistory]) -> Result<Verdict> {
    let tol = data.tol;
    let df = match data_frame(data)? {
        Ok(df) => df,
        Err(v) => return Ok(v),
    };
    if conditions.iter().any(ProductHistory::is_zero) {
        return Err(ReasoningError::ZeroConditionWeight { value: 0.0 });
    }
    if targets.iter().any(ProductHistory::is_zero) {
        return Ok(Verdict::probability(0.0, df.framework, tol.probability));
    }
    let mentioned: Vec<&ProductHistory> = targets.iter().chain(conditions).collect();
    let mut frameworks = vec![Arc::clone(&df.framework)];
    frameworks.extend(single_time_partitions(&mentioned, &data.dynamics, &data.metric, tol.structural)?);
    let generated = match generate_common(&frameworks) {
        Ok(g) => g.framework,
        Err(ReasoningError::NonCommutingFrameworks { time, deviation }) => {
            return Ok(Verdict::meaningless(MeaninglessReason::NonCommuting { time, deviation }, df.framework))
        }
        Err(ReasoningError::InconsistentRefinement { report }) => {
            return Ok(Verdict::meaningless(MeaninglessReason::Inconsistent { worst: report.worst }, df.framework))
        }
        Err(e) => return Err(e),
    };
    evaluate(&df, &generated, targets, conditions, tol)
}

/// As [`query`], but inside the common refinement of the data and an
/// explicitly chosen framework. The conjunction of conditions and its meet
/// with the targets must both be elements of the chosen framework.
pub fn query_in(
    data: &InitialData,
    framework: &Arc<Framework>,
    targets: &[ProductHistory],
    conditions: &[ProductHistory],
) -> Result<Verdict> {
    let tol = data.tol;
    let df = match data_frame(data)? {
        Ok(df) => df,
        Err(v) => return Ok(v),
    };
    let chosen = completed(framework)?;
    let generated = match generate_common(&[Arc::clone(&df.framework), Arc::clone(&chosen)]) {
        Ok(g) => g.framework,
        Err(ReasoningError::NonCommutingFrameworks { time, deviation }) => {
            return Ok(Verdict::meaningless(MeaninglessReason::NonCommuting { time, deviation }, chosen))
        }
        Err(ReasoningError::InconsistentRefinement { report }) => {
            return Ok(Verdict::meaningless(MeaninglessReason::Inconsistent { worst: report.worst }, chosen))
        }
        Err(e) => return Err(e),
    };
    let inside = |h: &Option<ProductHistory>| match h {
        None => true,
        Some(h) => h.is_zero() || chosen.element_of(h).is_some(),
    };
    let c = conjunction(conditions, tol.structural);
    let tc = conjunction(targets.iter().chain(conditions), tol.structural);
    let (Ok(c), Ok(tc)) = (c, tc) else {
        return Ok(Verdict::meaningless(MeaninglessReason::NotInFramework, chosen));
    };
    if !inside(&c) || !inside(&tc) {
        return Ok(Verdict::meaningless(MeaninglessReason::NotInFramework, chosen));
    }
    if conditions.iter().any(ProductHistory::is_zero) {
        return Err(ReasoningError::ZeroConditionWeight { value: 0.0 });
    }
    if targets.iter().any(ProductHistory::is_zero) {
        return Ok(Verdict::probability(0.0, generated, tol.probability));
    }
    evaluate(&df, &generated, targets, conditions, tol)
}

/// `⟨K(a), K(b)⟩` under a framework's metric, for diagnostics.
pub fn overlap(f: &Framework, a: &AlgebraElement, b: &AlgebraElement) -> Result<Complex64> {
    Ok(op_inner(&f.operator_of(a)?, &f.operator_of(b)?, &f.metric)?)
}
