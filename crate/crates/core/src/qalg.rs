// Copyright 2026 Chronos Contributors
// SPDX-License-Identifier: Apache-2.0

//! Dense complex linear algebra on a single-time Hilbert space.
//!
//! Everything the engine needs below the level of histories lives here:
//! square complex matrices, kets, validated projectors with their lattice
//! operations, the operator inner products used for weights and consistency,
//! and families of unitary propagators on a time grid.
//!
//! Matrices are small (desk scale, see [`SOFT_DIMENSION_CAP`]) and stored
//! densely on top of `nalgebra`.

use std::fmt;
use std::ops::{Add, Mul, Neg, Sub};

use nalgebra::{DMatrix, DVector, SymmetricEigen};
use num_complex::Complex64;
use thiserror::Error;

/// Default structural tolerance for hermiticity, idempotence, commutation and
/// orthogonality checks.
pub const DEFAULT_TOL: f64 = 1e-9;

/// Dimensions above this are accepted but not what the engine is tuned for.
pub const SOFT_DIMENSION_CAP: usize = 64;

const TIME_EPS: f64 = 1e-12;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum QalgError {
    #[error("matrix is not square ({rows}x{cols})")]
    NotSquare { rows: usize, cols: usize },
    #[error("matrix has zero dimension")]
    Empty,
    #[error("matrix or vector has a non-finite entry")]
    NonFinite,
    #[error("dimension mismatch: expected {expected}, found {found}")]
    DimensionMismatch { expected: usize, found: usize },
    #[error("not Hermitian: max |M - M^dagger| = {deviation:.3e} exceeds {tol:.3e}")]
    NotHermitian { deviation: f64, tol: f64 },
    #[error("not idempotent: max |P^2 - P| = {deviation:.3e} exceeds {tol:.3e}")]
    NotIdempotent { deviation: f64, tol: f64 },
    #[error("trace {trace} is not within {tol:.3e} of a nonnegative integer")]
    NonIntegerTrace { trace: f64, tol: f64 },
    #[error("zero vector cannot define a state or subspace")]
    ZeroVector,
    #[error("projectors do not commute: max |PQ - QP| = {deviation:.3e} exceeds {tol:.3e}")]
    NonCommuting { deviation: f64, tol: f64 },
    #[error("not unitary: max |U^dagger U - I| = {deviation:.3e} exceeds {tol:.3e}")]
    NotUnitary { deviation: f64, tol: f64 },
    #[error("time {0} is not on the propagator grid")]
    UnknownTime(f64),
    #[error("time labels must be finite and strictly increasing")]
    InvalidTimes,
    #[error("expected {expected} propagator steps for the time grid, found {found}")]
    StepCount { expected: usize, found: usize },
    #[error("invalid density matrix: {0}")]
    InvalidDensity(String),
}

pub type Result<T> = std::result::Result<T, QalgError>;

/// Square dense complex matrix.
#[derive(Clone, PartialEq)]
pub struct CMatrix(DMatrix<Complex64>);

impl fmt::Debug for CMatrix {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "CMatrix{}", self.0)
    }
}

impl CMatrix {
    pub fn new(m: DMatrix<Complex64>) -> Result<Self> {
        if m.nrows() != m.ncols() {
            return Err(QalgError::NotSquare { rows: m.nrows(), cols: m.ncols() });
        }
        if m.nrows() == 0 {
            return Err(QalgError::Empty);
        }
        if m.iter().any(|z| !z.re.is_finite() || !z.im.is_finite()) {
            return Err(QalgError::NonFinite);
        }
        Ok(CMatrix(m))
    }

    pub fn from_rows(rows: &[Vec<Complex64>]) -> Result<Self> {
        let n = rows.len();
        if n == 0 {
            return Err(QalgError::Empty);
        }
        for r in rows {
            if r.len() != n {
                return Err(QalgError::NotSquare { rows: n, cols: r.len() });
            }
        }
        Self::new(DMatrix::from_fn(n, n, |i, j| rows[i][j]))
    }

    pub fn from_real_rows(rows: &[Vec<f64>]) -> Result<Self> {
        let rows: Vec<Vec<Complex64>> = rows
            .iter()
            .map(|r| r.iter().map(|&x| Complex64::new(x, 0.0)).collect())
            .collect();
        Self::from_rows(&rows)
    }

    pub fn identity(dim: usize) -> Self {
        CMatrix(DMatrix::identity(dim, dim))
    }

    pub fn zeros(dim: usize) -> Self {
        CMatrix(DMatrix::zeros(dim, dim))
    }

    pub fn diag(values: &[Complex64]) -> Result<Self> {
        Self::new(DMatrix::from_diagonal(&DVector::from_column_slice(values)))
    }

    /// `|a⟩⟨b|`.
    pub fn outer(a: &Ket, b: &Ket) -> Result<Self> {
        check_dim(a.dim(), b.dim())?;
        Ok(CMatrix(&a.0 * b.0.adjoint()))
    }

    pub fn dim(&self) -> usize {
        self.0.nrows()
    }

    pub fn as_dmatrix(&self) -> &DMatrix<Complex64> {
        &self.0
    }

    pub fn into_dmatrix(self) -> DMatrix<Complex64> {
        self.0
    }

    pub fn get(&self, row: usize, col: usize) -> Complex64 {
        self.0[(row, col)]
    }

    pub fn adjoint(&self) -> Self {
        CMatrix(self.0.adjoint())
    }

    pub fn trace(&self) -> Complex64 {
        self.0.trace()
    }

    /// Largest entry modulus, the norm used for every structural check.
    pub fn max_abs(&self) -> f64 {
        self.0.iter().map(|z| z.norm()).fold(0.0, f64::max)
    }

    pub fn scale(&self, c: Complex64) -> Self {
        CMatrix(&self.0 * c)
    }

    pub fn kron(&self, other: &CMatrix) -> Self {
        CMatrix(self.0.kronecker(&other.0))
    }

    pub fn apply(&self, k: &Ket) -> Result<Ket> {
        check_dim(self.dim(), k.dim())?;
        Ok(Ket(&self.0 * &k.0))
    }

    pub fn checked_mul(&self, other: &CMatrix) -> Result<CMatrix> {
        check_dim(self.dim(), other.dim())?;
        Ok(CMatrix(&self.0 * &other.0))
    }

    pub fn checked_add(&self, other: &CMatrix) -> Result<CMatrix> {
        check_dim(self.dim(), other.dim())?;
        Ok(CMatrix(&self.0 + &other.0))
    }

    pub fn checked_sub(&self, other: &CMatrix) -> Result<CMatrix> {
        check_dim(self.dim(), other.dim())?;
        Ok(CMatrix(&self.0 - &other.0))
    }

    pub fn hermitian_deviation(&self) -> f64 {
        (&self.0 - self.0.adjoint()).iter().map(|z| z.norm()).fold(0.0, f64::max)
    }

    pub fn is_hermitian(&self, tol: f64) -> bool {
        self.hermitian_deviation() <= tol
    }

    pub fn unitary_deviation(&self) -> f64 {
        let n = self.dim();
        (self.0.adjoint() * &self.0 - DMatrix::<Complex64>::identity(n, n))
            .iter()
            .map(|z| z.norm())
            .fold(0.0, f64::max)
    }

    pub fn is_unitary(&self, tol: f64) -> bool {
        self.unitary_deviation() <= tol
    }

    pub fn approx_eq(&self, other: &CMatrix, tol: f64) -> bool {
        self.dim() == other.dim() && (&self.0 - &other.0).iter().all(|z| z.norm() <= tol)
    }

    /// Eigen-decomposition of a Hermitian matrix: ascending real eigenvalues
    /// and a unitary whose columns are the eigenvectors.
    pub fn hermitian_eigen(&self, tol: f64) -> Result<(Vec<f64>, CMatrix)> {
        let deviation = self.hermitian_deviation();
        if deviation > tol {
            return Err(QalgError::NotHermitian { deviation, tol });
        }
        let sym = (&self.0 + self.0.adjoint()) * Complex64::new(0.5, 0.0);
        let eig = SymmetricEigen::new(sym);
        let mut order: Vec<usize> = (0..self.dim()).collect();
        order.sort_by(|&a, &b| eig.eigenvalues[a].total_cmp(&eig.eigenvalues[b]));
        let values = order.iter().map(|&i| eig.eigenvalues[i]).collect();
        let vectors = DMatrix::from_fn(self.dim(), self.dim(), |r, c| eig.eigenvectors[(r, order[c])]);
        Ok((values, CMatrix(vectors)))
    }
}

impl Add for &CMatrix {
    type Output = CMatrix;
    fn add(self, rhs: &CMatrix) -> CMatrix {
        CMatrix(&self.0 + &rhs.0)
    }
}

impl Sub for &CMatrix {
    type Output = CMatrix;
    fn sub(self, rhs: &CMatrix) -> CMatrix {
        CMatrix(&self.0 - &rhs.0)
    }
}

impl Mul for &CMatrix {
    type Output = CMatrix;
    fn mul(self, rhs: &CMatrix) -> CMatrix {
        CMatrix(&self.0 * &rhs.0)
    }
}

impl Neg for &CMatrix {
    type Output = CMatrix;
    fn neg(self) -> CMatrix {
        CMatrix(-&self.0)
    }
}

/// Column state vector.
#[derive(Clone, PartialEq)]
pub struct Ket(DVector<Complex64>);

impl fmt::Debug for Ket {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "Ket{:?}", self.0.as_slice())
    }
}

impl Ket {
    pub fn new(amplitudes: Vec<Complex64>) -> Result<Self> {
        if amplitudes.is_empty() {
            return Err(QalgError::Empty);
        }
        if amplitudes.iter().any(|z| !z.re.is_finite() || !z.im.is_finite()) {
            return Err(QalgError::NonFinite);
        }
        Ok(Ket(DVector::from_vec(amplitudes)))
    }

    pub fn from_real(amplitudes: &[f64]) -> Result<Self> {
        Self::new(amplitudes.iter().map(|&x| Complex64::new(x, 0.0)).collect())
    }

    /// k-th computational basis vector.
    pub fn basis(dim: usize, k: usize) -> Result<Self> {
        if k >= dim {
            return Err(QalgError::DimensionMismatch { expected: dim, found: k + 1 });
        }
        let mut v = DVector::zeros(dim);
        v[k] = Complex64::new(1.0, 0.0);
        Ok(Ket(v))
    }

    pub fn dim(&self) -> usize {
        self.0.len()
    }

    pub fn amplitudes(&self) -> &[Complex64] {
        self.0.as_slice()
    }

    pub fn norm(&self) -> f64 {
        self.0.norm()
    }

    pub fn normalized(&self) -> Result<Ket> {
        let n = self.norm();
        if n == 0.0 || !n.is_finite() {
            return Err(QalgError::ZeroVector);
        }
        Ok(Ket(&self.0 / Complex64::new(n, 0.0)))
    }

    /// `⟨self|other⟩`.
    pub fn inner(&self, other: &Ket) -> Result<Complex64> {
        check_dim(self.dim(), other.dim())?;
        Ok(self.0.dotc(&other.0))
    }

    pub fn scale(&self, c: Complex64) -> Ket {
        Ket(&self.0 * c)
    }

    pub fn checked_add(&self, other: &Ket) -> Result<Ket> {
        check_dim(self.dim(), other.dim())?;
        Ok(Ket(&self.0 + &other.0))
    }

    pub fn checked_sub(&self, other: &Ket) -> Result<Ket> {
        check_dim(self.dim(), other.dim())?;
        Ok(Ket(&self.0 - &other.0))
    }

    pub fn kron(&self, other: &Ket) -> Ket {
        Ket(self.0.kronecker(&other.0))
    }

    pub fn approx_eq(&self, other: &Ket, tol: f64) -> bool {
        self.dim() == other.dim() && (&self.0 - &other.0).iter().all(|z| z.norm() <= tol)
    }
}

/// Orthogonal projector: a Hermitian idempotent matrix.
#[derive(Clone, PartialEq)]
pub struct Projector {
    matrix: CMatrix,
    rank: usize,
}

impl fmt::Debug for Projector {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_struct("Projector")
            .field("dim", &self.dim())
            .field("rank", &self.rank)
            .finish()
    }
}

/// Validates `m` as a projector and caches its rank.
pub fn make_projector(m: CMatrix, tol: f64) -> Result<Projector> {
    let dim = m.dim();
    let deviation = m.hermitian_deviation();
    if deviation > tol {
        return Err(QalgError::NotHermitian { deviation, tol });
    }
    let sym = CMatrix((&m.0 + m.0.adjoint()) * Complex64::new(0.5, 0.0));
    let deviation = (&(&sym * &sym) - &sym).max_abs();
    if deviation > tol {
        return Err(QalgError::NotIdempotent { deviation, tol });
    }
    let trace = sym.trace().re;
    let rounded = trace.round();
    let trace_tol = tol * dim as f64;
    if rounded < 0.0 || (trace - rounded).abs() > trace_tol {
        return Err(QalgError::NonIntegerTrace { trace, tol: trace_tol });
    }
    Ok(Projector { matrix: sym, rank: rounded as usize })
}

/// Projector onto the span of `kets`, built by modified Gram-Schmidt with a
/// second orthogonalization pass. Inputs are normalized first; a vector whose
/// residual falls below `tol * sqrt(dim)` is treated as dependent.
pub fn projector_from_kets(kets: &[Ket], tol: f64) -> Result<Projector> {
    let first = kets.first().ok_or(QalgError::Empty)?;
    let dim = first.dim();
    let cutoff = tol * (dim as f64).sqrt();
    let mut basis: Vec<DVector<Complex64>> = Vec::new();
    for k in kets {
        check_dim(dim, k.dim())?;
        if k.norm() <= tol {
            return Err(QalgError::ZeroVector);
        }
        let mut v = k.normalized()?.0;
        for _pass in 0..2 {
            for b in &basis {
                let c = b.dotc(&v);
                v -= b * c;
            }
        }
        let n = v.norm();
        if n >= cutoff {
            basis.push(v / Complex64::new(n, 0.0));
        }
    }
    let mut m = DMatrix::<Complex64>::zeros(dim, dim);
    for b in &basis {
        m += b * b.adjoint();
    }
    let rank = basis.len();
    let sym = (&m + m.adjoint()) * Complex64::new(0.5, 0.0);
    Ok(Projector { matrix: CMatrix(sym), rank })
}

/// `true` iff `max |PQ - QP| <= tol`.
pub fn commutes(p: &Projector, q: &Projector, tol: f64) -> Result<bool> {
    Ok(commutator_norm(p, q)? <= tol)
}

fn commutator_norm(p: &Projector, q: &Projector) -> Result<f64> {
    check_dim(p.dim(), q.dim())?;
    let pq = &p.matrix * &q.matrix;
    let qp = &q.matrix * &p.matrix;
    Ok((&pq - &qp).max_abs())
}

impl Projector {
    pub fn identity(dim: usize) -> Self {
        Projector { matrix: CMatrix::identity(dim), rank: dim }
    }

    pub fn zero(dim: usize) -> Self {
        Projector { matrix: CMatrix::zeros(dim), rank: 0 }
    }

    /// Dyad `|ψ⟩⟨ψ|` of the normalized ket.
    pub fn from_ket(k: &Ket) -> Result<Self> {
        let n = k.normalized()?;
        Ok(Projector { matrix: CMatrix::outer(&n, &n)?, rank: 1 })
    }

    pub fn matrix(&self) -> &CMatrix {
        &self.matrix
    }

    pub fn rank(&self) -> usize {
        self.rank
    }

    pub fn dim(&self) -> usize {
        self.matrix.dim()
    }

    pub fn is_zero(&self) -> bool {
        self.rank == 0
    }

    pub fn is_identity(&self) -> bool {
        self.rank == self.dim()
    }

    /// `I - P`.
    pub fn complement(&self) -> Projector {
        let dim = self.dim();
        Projector {
            matrix: &CMatrix::identity(dim) - &self.matrix,
            rank: dim - self.rank,
        }
    }

    /// `P ∧ Q = PQ`, defined only for commuting projectors.
    pub fn meet(&self, q: &Projector, tol: f64) -> Result<Projector> {
        let deviation = commutator_norm(self, q)?;
        if deviation > tol {
            return Err(QalgError::NonCommuting { deviation, tol });
        }
        let pq = &self.matrix * &q.matrix;
        let qp = &q.matrix * &self.matrix;
        // symmetrized product is exactly Hermitian
        let m = (&pq + &qp).scale(Complex64::new(0.5, 0.0));
        make_projector(m, tol)
    }

    /// `P ∨ Q = P + Q - PQ`.
    pub fn join(&self, q: &Projector, tol: f64) -> Result<Projector> {
        let meet = self.meet(q, tol)?;
        let m = &(&self.matrix + &q.matrix) - &meet.matrix;
        make_projector(m, tol)
    }

    pub fn commutes_with(&self, q: &Projector, tol: f64) -> Result<bool> {
        commutes(self, q, tol)
    }

    /// `max |PQ|`, zero when the ranges are orthogonal.
    pub fn overlap(&self, q: &Projector) -> Result<f64> {
        check_dim(self.dim(), q.dim())?;
        Ok((&self.matrix * &q.matrix).max_abs())
    }

    pub fn is_orthogonal_to(&self, q: &Projector, tol: f64) -> Result<bool> {
        Ok(self.overlap(q)? <= tol)
    }

    /// `true` iff `q ≤ self`, i.e. `self·q = q`.
    pub fn contains(&self, q: &Projector, tol: f64) -> Result<bool> {
        check_dim(self.dim(), q.dim())?;
        if q.rank > self.rank {
            return Ok(false);
        }
        Ok((&(&self.matrix * &q.matrix) - &q.matrix).max_abs() <= tol)
    }

    pub fn approx_eq(&self, q: &Projector, tol: f64) -> bool {
        self.rank == q.rank && self.matrix.approx_eq(&q.matrix, tol)
    }
}

/// Positive semidefinite Hermitian matrix with unit trace.
#[derive(Debug, Clone, PartialEq)]
pub struct DensityMatrix(CMatrix);

impl DensityMatrix {
    /// Validates hermiticity, unit trace and an eigenvalue floor of `-tol`.
    pub fn new(m: CMatrix, tol: f64) -> Result<Self> {
        let (values, _) = m.hermitian_eigen(tol).map_err(|e| match e {
            QalgError::NotHermitian { deviation, .. } => {
                QalgError::InvalidDensity(format!("not Hermitian (deviation {deviation:.3e})"))
            }
            other => other,
        })?;
        let trace = m.trace().re;
        if (trace - 1.0).abs() > tol * m.dim() as f64 {
            return Err(QalgError::InvalidDensity(format!("trace {trace} is not 1")));
        }
        if let Some(&low) = values.first() {
            if low < -tol {
                return Err(QalgError::InvalidDensity(format!("negative eigenvalue {low:.3e}")));
            }
        }
        Ok(DensityMatrix(m))
    }

    pub fn maximally_mixed(dim: usize) -> Self {
        DensityMatrix(CMatrix::identity(dim).scale(Complex64::new(1.0 / dim as f64, 0.0)))
    }

    pub fn matrix(&self) -> &CMatrix {
        &self.0
    }

    pub fn dim(&self) -> usize {
        self.0.dim()
    }
}

/// Which consistency condition an inner product implements.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum ConsistencyMode {
    Weak,
    Strong,
    Rho,
    RhoRho,
}

impl ConsistencyMode {
    pub fn as_str(&self) -> &'static str {
        match self {
            ConsistencyMode::Weak => "weak",
            ConsistencyMode::Strong => "strong",
            ConsistencyMode::Rho => "rho",
            ConsistencyMode::RhoRho => "rho-rho",
        }
    }
}

impl fmt::Display for ConsistencyMode {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

impl std::str::FromStr for ConsistencyMode {
    type Err = String;
    fn from_str(s: &str) -> std::result::Result<Self, String> {
        match s {
            "weak" => Ok(ConsistencyMode::Weak),
            "strong" => Ok(ConsistencyMode::Strong),
            "rho" => Ok(ConsistencyMode::Rho),
            "rho-rho" | "rho-rho'" => Ok(ConsistencyMode::RhoRho),
            other => Err(format!("unknown consistency mode `{other}`")),
        }
    }
}

/// Inner product on operators of the single-time space.
#[derive(Debug, Clone, PartialEq, Default)]
pub enum OperatorMetric {
    /// `Tr[A†B]`.
    #[default]
    PlainComplex,
    /// `Re Tr[A†B]`.
    PlainReal,
    /// `Tr[A†ρB]` with ρ attached to the earliest time.
    InitialRho(DensityMatrix),
    /// `Tr[A†ρBρ′]` with ρ′ attached to the latest time.
    InitialFinalRho(DensityMatrix, DensityMatrix),
}

impl OperatorMetric {
    pub fn mode(&self) -> ConsistencyMode {
        match self {
            OperatorMetric::PlainComplex => ConsistencyMode::Strong,
            OperatorMetric::PlainReal => ConsistencyMode::Weak,
            OperatorMetric::InitialRho(_) => ConsistencyMode::Rho,
            OperatorMetric::InitialFinalRho(..) => ConsistencyMode::RhoRho,
        }
    }
}

/// Operator inner product under `metric`. The plain-real kind returns a
/// complex number with zero imaginary part.
pub fn op_inner(a: &CMatrix, b: &CMatrix, metric: &OperatorMetric) -> Result<Complex64> {
    check_dim(a.dim(), b.dim())?;
    let plain = || -> Complex64 { a.0.iter().zip(b.0.iter()).map(|(x, y)| x.conj() * y).sum() };
    Ok(match metric {
        OperatorMetric::PlainComplex => plain(),
        OperatorMetric::PlainReal => Complex64::new(plain().re, 0.0),
        OperatorMetric::InitialRho(rho) => {
            check_dim(a.dim(), rho.dim())?;
            (a.0.adjoint() * &rho.0 .0 * &b.0).trace()
        }
        OperatorMetric::InitialFinalRho(rho, rho_final) => {
            check_dim(a.dim(), rho.dim())?;
            check_dim(a.dim(), rho_final.dim())?;
            (a.0.adjoint() * &rho.0 .0 * &b.0 * &rho_final.0 .0).trace()
        }
    })
}

/// `exp[-i (t_to - t_from) H]` in units with ħ = 1.
pub fn unitary_from_hamiltonian(h: &CMatrix, t_to: f64, t_from: f64, tol: f64) -> Result<CMatrix> {
    let (values, vectors) = h.hermitian_eigen(tol)?;
    let dt = t_to - t_from;
    let phases: Vec<Complex64> = values.iter().map(|&e| Complex64::from_polar(1.0, -dt * e)).collect();
    let d = CMatrix::diag(&phases)?;
    Ok(&(&vectors * &d) * &vectors.adjoint())
}

/// Unitary dynamics given as one map per adjacent pair of grid times.
#[derive(Debug, Clone, PartialEq)]
pub struct PropagatorFamily {
    times: Vec<f64>,
    steps: Vec<CMatrix>,
    dim: usize,
}

impl PropagatorFamily {
    /// `steps[k]` carries the system from `times[k]` to `times[k + 1]`.
    pub fn new(times: Vec<f64>, steps: Vec<CMatrix>, dim: usize, tol: f64) -> Result<Self> {
        validate_times(&times)?;
        if steps.len() + 1 != times.len() {
            return Err(QalgError::StepCount { expected: times.len() - 1, found: steps.len() });
        }
        for s in &steps {
            check_dim(dim, s.dim())?;
            let deviation = s.unitary_deviation();
            if deviation > tol {
                return Err(QalgError::NotUnitary { deviation, tol });
            }
        }
        Ok(PropagatorFamily { times, steps, dim })
    }

    /// Trivial dynamics: every map is the identity.
    pub fn identity(times: Vec<f64>, dim: usize) -> Result<Self> {
        validate_times(&times)?;
        let steps = vec![CMatrix::identity(dim); times.len() - 1];
        Ok(PropagatorFamily { times, steps, dim })
    }

    /// Steps generated by a time-independent Hamiltonian.
    pub fn from_hamiltonian(h: &CMatrix, times: Vec<f64>, tol: f64) -> Result<Self> {
        validate_times(&times)?;
        let steps = times
            .windows(2)
            .map(|w| unitary_from_hamiltonian(h, w[1], w[0], tol))
            .collect::<Result<Vec<_>>>()?;
        Self::new(times, steps, h.dim(), tol)
    }

    pub fn times(&self) -> &[f64] {
        &self.times
    }

    pub fn steps(&self) -> &[CMatrix] {
        &self.steps
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn index_of(&self, t: f64) -> Option<usize> {
        time_index(&self.times, t)
    }

    /// `T(t_to, t_from)`, composed from the stored adjacent maps.
    pub fn propagator(&self, t_to: f64, t_from: f64) -> Result<CMatrix> {
        let to = self.index_of(t_to).ok_or(QalgError::UnknownTime(t_to))?;
        let from = self.index_of(t_from).ok_or(QalgError::UnknownTime(t_from))?;
        Ok(self.propagator_by_index(to, from))
    }

    pub(crate) fn propagator_by_index(&self, to: usize, from: usize) -> CMatrix {
        if to == from {
            return CMatrix::identity(self.dim);
        }
        let (lo, hi) = if to > from { (from, to) } else { (to, from) };
        let mut forward = self.steps[lo].clone();
        for step in &self.steps[lo + 1..hi] {
            forward = step * &forward;
        }
        if to > from {
            forward
        } else {
            forward.adjoint()
        }
    }

    /// Same grid and maps within `tol`.
    pub fn same_as(&self, other: &PropagatorFamily, tol: f64) -> bool {
        self.dim == other.dim
            && self.times.len() == other.times.len()
            && self.times.iter().zip(&other.times).all(|(a, b)| same_time(*a, *b))
            && self.steps.iter().zip(&other.steps).all(|(a, b)| a.approx_eq(b, tol))
    }
}

pub(crate) fn same_time(a: f64, b: f64) -> bool {
    (a - b).abs() <= TIME_EPS * (1.0 + a.abs().max(b.abs()))
}

pub(crate) fn time_index(times: &[f64], t: f64) -> Option<usize> {
    times.iter().position(|&s| same_time(s, t))
}

fn validate_times(times: &[f64]) -> Result<()> {
    if times.is_empty() || times.iter().any(|t| !t.is_finite()) {
        return Err(QalgError::InvalidTimes);
    }
    if times.windows(2).any(|w| w[1] <= w[0] || same_time(w[0], w[1])) {
        return Err(QalgError::InvalidTimes);
    }
    Ok(())
}

pub(crate) fn check_dim(expected: usize, found: usize) -> Result<()> {
    if expected == found {
        Ok(())
    } else {
        Err(QalgError::DimensionMismatch { expected, found })
    }
}

pub fn c64(re: f64, im: f64) -> Complex64 {
    Complex64::new(re, im)
}
