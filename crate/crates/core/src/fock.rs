//! Bosonic Fock space over ℂⁿ, truncated at total quanta Σ m_j ≤ M.
//!
//! Grade truncation keeps a†(ξ) the exact adjoint of a(ξ), so a†(ξ) − a(ξ)
//! is exactly skew-adjoint and every truncated Weyl operator is unitary.
//! Relations that involve raising past the cutoff (the CCR, for example)
//! hold exactly on grades ≤ M − 1 only.

use nalgebra::{DMatrix, DVector, Dim, Matrix, RawStorage, SymmetricEigen};
use num_complex::Complex64;
use serde::{Deserialize, Serialize};
use std::collections::HashMap;
use std::f64::consts::SQRT_2;
use std::sync::Arc;
use thiserror::Error;

use crate::classical::ComplexAmplitude;
use crate::spectral::{complexify, SpectralModel};

/// Largest entry modulus of a complex matrix or vector.
pub trait MaxModulus {
    fn max_modulus(&self) -> f64;
}

impl<R: Dim, C: Dim, S: RawStorage<Complex64, R, C>> MaxModulus for Matrix<Complex64, R, C, S> {
    fn max_modulus(&self) -> f64 {
        self.iter().fold(0.0, |a, c| a.max(c.norm()))
    }
}

/// Largest Fock dimension built unless a caller asks for more.
pub const DEFAULT_MAX_DIM: usize = 200_000;
/// Tolerance for self-adjointness and unitarity checks on one-particle matrices.
pub const ONE_PARTICLE_TOLERANCE: f64 = 1e-10;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum FockError {
    #[error("Fock dimension {dim} exceeds the limit {limit}")]
    DimensionTooLarge { dim: u128, limit: usize },
    #[error("amplitude has {got} modes, basis has {expected}")]
    ModeMismatch { expected: usize, got: usize },
    #[error("operands live in different Fock bases")]
    BasisMismatch,
    #[error("matrix is not self-adjoint (deviation {0:e})")]
    NotSelfAdjoint(f64),
    #[error("matrix is not unitary (deviation {0:e})")]
    NotUnitary(f64),
    #[error("bad coefficient data: {0}")]
    BadCoefficients(String),
}

/// Signals that ‖ξ‖² exceeds M/4, past which truncation effects on
/// low-grade matrix elements stop being negligible.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct TruncationWarning {
    pub norm_squared: f64,
    pub cutoff: usize,
}

impl TruncationWarning {
    pub fn check(xi: &ComplexAmplitude, cutoff: usize) -> Option<Self> {
        let norm_squared = xi.norm_squared();
        (norm_squared > cutoff as f64 / 4.0).then_some(Self { norm_squared, cutoff })
    }
}

/// A value together with an optional truncation warning.
#[derive(Debug, Clone)]
pub struct Truncated<T> {
    pub value: T,
    pub warning: Option<TruncationWarning>,
}

/// Occupation-number basis {(m_1, …, m_n) : Σ m_j ≤ M}, graded by total
/// quanta and lexicographic within a grade.
#[derive(Debug)]
pub struct FockBasis {
    modes: usize,
    cutoff: usize,
    states: Vec<Vec<u32>>,
    index: HashMap<Vec<u32>, usize>,
    grade_start: Vec<usize>,
    lower: Vec<Option<usize>>,
    raise: Vec<Option<usize>>,
}

/// C(n + M, M) without overflow.
pub fn fock_dimension(modes: usize, cutoff: usize) -> u128 {
    let mut acc: u128 = 1;
    for k in 1..=cutoff as u128 {
        acc = acc.saturating_mul(modes as u128 + k) / k;
    }
    acc
}

impl FockBasis {
    pub fn new(modes: usize, cutoff: usize) -> Result<Arc<Self>, FockError> {
        Self::with_limit(modes, cutoff, DEFAULT_MAX_DIM)
    }

    pub fn with_limit(modes: usize, cutoff: usize, limit: usize) -> Result<Arc<Self>, FockError> {
        let dim = fock_dimension(modes, cutoff);
        if dim > limit as u128 {
            return Err(FockError::DimensionTooLarge { dim, limit });
        }
        let mut states = Vec::with_capacity(dim as usize);
        let mut grade_start = Vec::with_capacity(cutoff + 2);
        for grade in 0..=cutoff {
            grade_start.push(states.len());
            let mut current = vec![0u32; modes];
            push_grade(&mut states, &mut current, 0, grade as u32);
        }
        grade_start.push(states.len());

        let index: HashMap<Vec<u32>, usize> = states.iter().cloned().enumerate().map(|(i, s)| (s, i)).collect();
        let mut lower = vec![None; states.len() * modes];
        let mut raise = vec![None; states.len() * modes];
        for (i, s) in states.iter().enumerate() {
            let grade: u32 = s.iter().sum();
            for j in 0..modes {
                let mut t = s.clone();
                if s[j] > 0 {
                    t[j] -= 1;
                    lower[i * modes + j] = Some(index[&t]);
                    t[j] += 1;
                }
                if (grade as usize) < cutoff {
                    t[j] += 1;
                    raise[i * modes + j] = Some(index[&t]);
                }
            }
        }
        Ok(Arc::new(Self { modes, cutoff, states, index, grade_start, lower, raise }))
    }

    pub fn modes(&self) -> usize {
        self.modes
    }

    pub fn cutoff(&self) -> usize {
        self.cutoff
    }

    pub fn dim(&self) -> usize {
        self.states.len()
    }

    pub fn state(&self, i: usize) -> &[u32] {
        &self.states[i]
    }

    pub fn index_of(&self, occupation: &[u32]) -> Option<usize> {
        self.index.get(occupation).copied()
    }

    pub fn grade(&self, i: usize) -> usize {
        self.states[i].iter().sum::<u32>() as usize
    }

    /// Index range of the states with exactly `grade` quanta.
    pub fn grade_range(&self, grade: usize) -> std::ops::Range<usize> {
        self.grade_start[grade]..self.grade_start[grade + 1]
    }

    /// Index of the state m − e_j, if m_j > 0.
    pub fn lowered(&self, i: usize, j: usize) -> Option<usize> {
        self.lower[i * self.modes + j]
    }

    /// Index of the state m + e_j, if m is below the cutoff.
    pub fn raised(&self, i: usize, j: usize) -> Option<usize> {
        self.raise[i * self.modes + j]
    }

    fn same_as(&self, other: &FockBasis) -> bool {
        self.modes == other.modes && self.cutoff == other.cutoff
    }
}

fn push_grade(out: &mut Vec<Vec<u32>>, current: &mut Vec<u32>, pos: usize, remaining: u32) {
    let n = current.len();
    if n == 0 {
        if remaining == 0 {
            out.push(Vec::new());
        }
        return;
    }
    if pos == n - 1 {
        current[pos] = remaining;
        out.push(current.clone());
        return;
    }
    for v in 0..=remaining {
        current[pos] = v;
        push_grade(out, current, pos + 1, remaining - v);
    }
}

/// A vector of the truncated Fock space.
#[derive(Debug, Clone)]
pub struct FockVector {
    basis: Arc<FockBasis>,
    coeffs: DVector<Complex64>,
}

impl FockVector {
    pub fn new(basis: &Arc<FockBasis>, coeffs: DVector<Complex64>) -> Result<Self, FockError> {
        if coeffs.len() != basis.dim() {
            return Err(FockError::BadCoefficients(format!("expected {} coefficients, got {}", basis.dim(), coeffs.len())));
        }
        if coeffs.iter().any(|c| !c.is_finite()) {
            return Err(FockError::BadCoefficients("non-finite coefficient".into()));
        }
        Ok(Self { basis: basis.clone(), coeffs })
    }

    pub fn zeros(basis: &Arc<FockBasis>) -> Self {
        Self { basis: basis.clone(), coeffs: DVector::zeros(basis.dim()) }
    }

    /// The basis state with the given occupations.
    pub fn occupation(basis: &Arc<FockBasis>, occupation: &[u32]) -> Option<Self> {
        let i = basis.index_of(occupation)?;
        let mut v = Self::zeros(basis);
        v.coeffs[i] = Complex64::new(1.0, 0.0);
        Some(v)
    }

    pub fn basis(&self) -> &Arc<FockBasis> {
        &self.basis
    }

    pub fn coeffs(&self) -> &DVector<Complex64> {
        &self.coeffs
    }

    pub fn norm(&self) -> f64 {
        self.coeffs.norm()
    }

    pub fn normalized(&self) -> Self {
        Self { basis: self.basis.clone(), coeffs: &self.coeffs / Complex64::from(self.norm()) }
    }

    /// ⟨self|other⟩.
    pub fn inner(&self, other: &FockVector) -> Result<Complex64, FockError> {
        if !self.basis.same_as(&other.basis) {
            return Err(FockError::BasisMismatch);
        }
        Ok(self.coeffs.dotc(&other.coeffs))
    }

    /// Highest grade carrying a coefficient above `tol` in modulus.
    pub fn top_grade(&self, tol: f64) -> usize {
        (0..self.basis.dim()).filter(|&i| self.coeffs[i].norm() > tol).map(|i| self.basis.grade(i)).max().unwrap_or(0)
    }

    pub fn to_record(&self) -> FockVectorRecord {
        FockVectorRecord {
            n: self.basis.modes(),
            cutoff: self.basis.cutoff(),
            coeffs: self.coeffs.iter().map(|c| [c.re, c.im]).collect(),
        }
    }

    pub fn from_record(record: &FockVectorRecord) -> Result<Self, FockError> {
        let basis = FockBasis::new(record.n, record.cutoff)?;
        let coeffs = DVector::from_iterator(record.coeffs.len(), record.coeffs.iter().map(|c| Complex64::new(c[0], c[1])));
        Self::new(&basis, coeffs)
    }
}

/// JSON form `{"n":…,"M":…,"coeffs":[[re,im],…]}` in basis order.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct FockVectorRecord {
    pub n: usize,
    #[serde(rename = "M")]
    pub cutoff: usize,
    pub coeffs: Vec<[f64; 2]>,
}

/// A dense operator on the truncated Fock space.
#[derive(Debug, Clone)]
pub struct FockOperator {
    basis: Arc<FockBasis>,
    matrix: DMatrix<Complex64>,
}

impl FockOperator {
    pub fn from_matrix(basis: &Arc<FockBasis>, matrix: DMatrix<Complex64>) -> Result<Self, FockError> {
        if matrix.shape() != (basis.dim(), basis.dim()) {
            return Err(FockError::BadCoefficients("operator shape does not match basis".into()));
        }
        Ok(Self { basis: basis.clone(), matrix })
    }

    pub fn identity(basis: &Arc<FockBasis>) -> Self {
        Self { basis: basis.clone(), matrix: DMatrix::identity(basis.dim(), basis.dim()) }
    }

    pub fn zero(basis: &Arc<FockBasis>) -> Self {
        Self { basis: basis.clone(), matrix: DMatrix::zeros(basis.dim(), basis.dim()) }
    }

    pub fn basis(&self) -> &Arc<FockBasis> {
        &self.basis
    }

    pub fn matrix(&self) -> &DMatrix<Complex64> {
        &self.matrix
    }

    pub fn adjoint(&self) -> Self {
        Self { basis: self.basis.clone(), matrix: self.matrix.adjoint() }
    }

    fn same(&self, other: &FockOperator) -> Result<(), FockError> {
        if self.basis.same_as(&other.basis) {
            Ok(())
        } else {
            Err(FockError::BasisMismatch)
        }
    }

    pub fn compose(&self, other: &FockOperator) -> Result<Self, FockError> {
        self.same(other)?;
        Ok(Self { basis: self.basis.clone(), matrix: &self.matrix * &other.matrix })
    }

    pub fn plus(&self, other: &FockOperator) -> Result<Self, FockError> {
        self.same(other)?;
        Ok(Self { basis: self.basis.clone(), matrix: &self.matrix + &other.matrix })
    }

    pub fn minus(&self, other: &FockOperator) -> Result<Self, FockError> {
        self.same(other)?;
        Ok(Self { basis: self.basis.clone(), matrix: &self.matrix - &other.matrix })
    }

    pub fn scaled(&self, c: Complex64) -> Self {
        Self { basis: self.basis.clone(), matrix: &self.matrix * c }
    }

    /// [self, other].
    pub fn commutator(&self, other: &FockOperator) -> Result<Self, FockError> {
        self.compose(other)?.minus(&other.compose(self)?)
    }

    pub fn apply(&self, v: &FockVector) -> Result<FockVector, FockError> {
        if !self.basis.same_as(&v.basis) {
            return Err(FockError::BasisMismatch);
        }
        Ok(FockVector { basis: self.basis.clone(), coeffs: &self.matrix * &v.coeffs })
    }

    /// Largest entry modulus of the columns with grade ≤ `max_grade`.
    pub fn max_entry_on_grades(&self, max_grade: usize) -> f64 {
        let end = self.basis.grade_range(max_grade.min(self.basis.cutoff())).end;
        self.matrix.columns(0, end).iter().fold(0.0, |a, c| a.max(c.norm()))
    }

    /// Spectral norm of the columns with grade ≤ `max_grade`.
    pub fn norm_on_grades(&self, max_grade: usize) -> f64 {
        let end = self.basis.grade_range(max_grade.min(self.basis.cutoff())).end;
        self.matrix.columns(0, end).into_owned().singular_values().max()
    }

    /// Spectral norm.
    pub fn operator_norm(&self) -> f64 {
        self.matrix.singular_values().max()
    }

    /// ‖A − A*‖_max.
    pub fn hermiticity_defect(&self) -> f64 {
        (&self.matrix - self.matrix.adjoint()).max_modulus()
    }

    /// e^{−itA} for self-adjoint A, via eigendecomposition.
    pub fn unitary_exp(&self, t: f64) -> Result<Self, FockError> {
        let defect = self.hermiticity_defect();
        let scale = self.matrix.max_modulus().max(1.0);
        if defect > ONE_PARTICLE_TOLERANCE * scale {
            return Err(FockError::NotSelfAdjoint(defect));
        }
        let herm = (&self.matrix + self.matrix.adjoint()) * Complex64::from(0.5);
        Ok(Self { basis: self.basis.clone(), matrix: hermitian_exp(herm, t) })
    }
}

/// e^{−itH} = V diag(e^{−ith}) V*.
fn hermitian_exp(h: DMatrix<Complex64>, t: f64) -> DMatrix<Complex64> {
    let eig = SymmetricEigen::new(h);
    let phases = eig.eigenvalues.map(|e| Complex64::from_polar(1.0, -e * t));
    let v = &eig.eigenvectors;
    let mut scaled = v.clone();
    for (j, mut col) in scaled.column_iter_mut().enumerate() {
        col *= phases[j];
    }
    scaled * v.adjoint()
}

fn check_modes(basis: &FockBasis, xi: &ComplexAmplitude) -> Result<(), FockError> {
    if xi.dim() != basis.modes() {
        return Err(FockError::ModeMismatch { expected: basis.modes(), got: xi.dim() });
    }
    Ok(())
}

/// |0⟩.
pub fn vacuum(basis: &Arc<FockBasis>) -> FockVector {
    FockVector::occupation(basis, &vec![0; basis.modes()]).expect("vacuum is always in the basis")
}

/// a(ξ) = Σ ξ̄_j a(e_j), with a(e_j)|m⟩ = √m_j |m − e_j⟩.
pub fn annihilate(basis: &Arc<FockBasis>, xi: &ComplexAmplitude) -> Result<FockOperator, FockError> {
    check_modes(basis, xi)?;
    let mut m = DMatrix::zeros(basis.dim(), basis.dim());
    for col in 0..basis.dim() {
        let occ = basis.state(col);
        for j in 0..basis.modes() {
            if let Some(row) = basis.lowered(col, j) {
                m[(row, col)] += xi.0[j].conj() * (occ[j] as f64).sqrt();
            }
        }
    }
    FockOperator::from_matrix(basis, m)
}

/// a†(ξ), the adjoint of [`annihilate`]; zero on the top grade.
pub fn create(basis: &Arc<FockBasis>, xi: &ComplexAmplitude) -> Result<FockOperator, FockError> {
    Ok(annihilate(basis, xi)?.adjoint())
}

/// a(ξ)ψ without forming the matrix.
pub fn apply_annihilation(xi: &ComplexAmplitude, psi: &FockVector) -> Result<FockVector, FockError> {
    let basis = psi.basis();
    check_modes(basis, xi)?;
    let mut out = DVector::zeros(basis.dim());
    for col in 0..basis.dim() {
        let c = psi.coeffs[col];
        if c == Complex64::new(0.0, 0.0) {
            continue;
        }
        let occ = basis.state(col);
        for j in 0..basis.modes() {
            if let Some(row) = basis.lowered(col, j) {
                out[row] += xi.0[j].conj() * (occ[j] as f64).sqrt() * c;
            }
        }
    }
    Ok(FockVector { basis: basis.clone(), coeffs: out })
}

/// a†(ξ)ψ without forming the matrix.
pub fn apply_creation(xi: &ComplexAmplitude, psi: &FockVector) -> Result<FockVector, FockError> {
    let basis = psi.basis();
    check_modes(basis, xi)?;
    let mut out = DVector::zeros(basis.dim());
    for col in 0..basis.dim() {
        let c = psi.coeffs[col];
        if c == Complex64::new(0.0, 0.0) {
            continue;
        }
        let occ = basis.state(col);
        for j in 0..basis.modes() {
            if let Some(row) = basis.raised(col, j) {
                out[row] += xi.0[j] * ((occ[j] + 1) as f64).sqrt() * c;
            }
        }
    }
    Ok(FockVector { basis: basis.clone(), coeffs: out })
}

/// N = Σ_j a†(e_j) a(e_j), diagonal with entries Σ m_j.
pub fn number_operator(basis: &Arc<FockBasis>) -> FockOperator {
    let diag = DVector::from_iterator(basis.dim(), (0..basis.dim()).map(|i| Complex64::from(basis.grade(i) as f64)));
    FockOperator { basis: basis.clone(), matrix: DMatrix::from_diagonal(&diag) }
}

/// dΓ(A) = Σ_{ij} A_ij a†(e_i) a(e_j) for self-adjoint A.
pub fn d_gamma(basis: &Arc<FockBasis>, a: &DMatrix<Complex64>) -> Result<FockOperator, FockError> {
    let n = basis.modes();
    if a.shape() != (n, n) {
        return Err(FockError::ModeMismatch { expected: n, got: a.nrows() });
    }
    let defect = (a - a.adjoint()).max_modulus();
    if defect > ONE_PARTICLE_TOLERANCE * a.max_modulus().max(1.0) {
        return Err(FockError::NotSelfAdjoint(defect));
    }
    let mut m = DMatrix::zeros(basis.dim(), basis.dim());
    for col in 0..basis.dim() {
        let occ = basis.state(col);
        for j in 0..n {
            let Some(mid) = basis.lowered(col, j) else { continue };
            let lowered_amp = (occ[j] as f64).sqrt();
            let mid_occ = basis.state(mid);
            for i in 0..n {
                // raising back to the same grade never leaves the basis
                let row = basis.raised(mid, i).expect("grade preserved");
                let amp = lowered_amp * ((mid_occ[i] + 1) as f64).sqrt();
                m[(row, col)] += a[(i, j)] * amp;
            }
        }
    }
    FockOperator::from_matrix(basis, m)
}

/// Γ(U), acting as U^{⊗m} on the m-quanta sector.
///
/// Column m is Π_j a†(Ue_j)^{m_j}/√(m_j!) |0⟩.
pub fn gamma(basis: &Arc<FockBasis>, u: &DMatrix<Complex64>) -> Result<FockOperator, FockError> {
    let n = basis.modes();
    if u.shape() != (n, n) {
        return Err(FockError::ModeMismatch { expected: n, got: u.nrows() });
    }
    let defect = (u.adjoint() * u - DMatrix::<Complex64>::identity(n, n)).max_modulus();
    if defect > ONE_PARTICLE_TOLERANCE {
        return Err(FockError::NotUnitary(defect));
    }
    let images: Vec<ComplexAmplitude> = (0..n).map(|j| ComplexAmplitude(u.column(j).into_owned())).collect();
    let mut m = DMatrix::zeros(basis.dim(), basis.dim());
    for col in 0..basis.dim() {
        let mut v = vacuum(basis);
        for (j, &mj) in basis.state(col).iter().enumerate() {
            for k in 1..=mj {
                v = apply_creation(&images[j], &v)?;
                v.coeffs /= Complex64::from((k as f64).sqrt());
            }
        }
        m.set_column(col, &v.coeffs);
    }
    FockOperator::from_matrix(basis, m)
}

/// W_F(ξ) = exp(a†(ξ) − a(ξ)), exactly unitary in the truncated space.
pub fn weyl(basis: &Arc<FockBasis>, xi: &ComplexAmplitude) -> Result<Truncated<FockOperator>, FockError> {
    let a = annihilate(basis, xi)?;
    // H = i(a† − a) is self-adjoint and exp(a† − a) = e^{−iH}
    let generator = (a.matrix.adjoint() - &a.matrix) * Complex64::i();
    let matrix = hermitian_exp(generator, 1.0);
    Ok(Truncated {
        value: FockOperator { basis: basis.clone(), matrix },
        warning: TruncationWarning::check(xi, basis.cutoff()),
    })
}

/// |ξ⟩ with coefficients e^{−‖ξ‖²/2} Π_j ξ_j^{m_j}/√(m_j!); not renormalized.
pub fn coherent(basis: &Arc<FockBasis>, xi: &ComplexAmplitude) -> Result<Truncated<FockVector>, FockError> {
    check_modes(basis, xi)?;
    let prefactor = (-0.5 * xi.norm_squared()).exp();
    let coeffs = DVector::from_iterator(
        basis.dim(),
        (0..basis.dim()).map(|i| {
            basis.state(i).iter().zip(xi.0.iter()).fold(Complex64::from(prefactor), |acc, (&m, &z)| {
                acc * z.powu(m) / (0.5 * log_factorial(m as usize)).exp()
            })
        }),
    );
    Ok(Truncated {
        value: FockVector { basis: basis.clone(), coeffs },
        warning: TruncationWarning::check(xi, basis.cutoff()),
    })
}

pub(crate) fn log_factorial(k: usize) -> f64 {
    (1..=k).map(|j| (j as f64).ln()).sum()
}

/// e^{−r²} r^{2(M+1)}/(M+1)!, the leading Poisson tail beyond the cutoff;
/// bounds 1 − ‖P_M|ξ⟩‖ whenever r² ≤ (M + 2)/2.
pub fn coherent_tail_bound(norm: f64, cutoff: usize) -> f64 {
    if norm == 0.0 {
        return 0.0;
    }
    let r2 = norm * norm;
    (-r2 + (cutoff + 1) as f64 * r2.ln() - log_factorial(cutoff + 1)).exp()
}

/// η·Q = (a(Ω^{-1/2}η) + a†(Ω^{-1/2}η))/√2.
pub fn field_q(basis: &Arc<FockBasis>, s: &SpectralModel, eta: &DVector<f64>) -> Result<FockOperator, FockError> {
    let alpha = ComplexAmplitude::from_real(&(s.omega_inv_sqrt() * eta));
    quadrature_op(basis, &alpha)
}

fn quadrature_op(basis: &Arc<FockBasis>, alpha: &ComplexAmplitude) -> Result<FockOperator, FockError> {
    let a = annihilate(basis, alpha)?;
    let matrix = (&a.matrix + a.matrix.adjoint()) / Complex64::from(SQRT_2);
    FockOperator::from_matrix(basis, matrix)
}

/// η·P = (i/√2)(a†(Ω^{1/2}η) − a(Ω^{1/2}η̄)).
pub fn field_p(basis: &Arc<FockBasis>, s: &SpectralModel, eta: &DVector<f64>) -> Result<FockOperator, FockError> {
    let beta = ComplexAmplitude::from_real(&(s.omega_sqrt() * eta));
    let a = annihilate(basis, &beta)?;
    let matrix = (a.matrix.adjoint() - &a.matrix) * (Complex64::i() / SQRT_2);
    FockOperator::from_matrix(basis, matrix)
}

/// η·Q(t) = (a(ξ_t) + a†(ξ_t))/√2 with ξ_t = Ω^{-1/2} e^{iΩt} η.
pub fn heisenberg_field(
    basis: &Arc<FockBasis>,
    s: &SpectralModel,
    eta: &DVector<f64>,
    t: f64,
) -> Result<FockOperator, FockError> {
    check_modes(basis, &ComplexAmplitude::from_real(eta))?;
    let rotated = s
        .apply_complex_function(|w| Complex64::from_polar(1.0 / w.sqrt(), w * t), &eta.map(Complex64::from))
        .expect("positive frequencies");
    quadrature_op(basis, &ComplexAmplitude(rotated))
}

/// e^{iHt}(η·Q)e^{−iHt} with H = dΓ(Ω), by explicit conjugation.
pub fn heisenberg_field_by_conjugation(
    basis: &Arc<FockBasis>,
    s: &SpectralModel,
    eta: &DVector<f64>,
    t: f64,
) -> Result<FockOperator, FockError> {
    let h = d_gamma(basis, &complexify(s.omega()))?;
    let evolve = h.unitary_exp(t)?;
    evolve.adjoint().compose(&field_q(basis, s, eta)?)?.compose(&evolve)
}

/// ⟨0|Q_i Q_j|0⟩ = ½(Ω⁻¹)_ij for the Gaussian ground state.
pub fn vacuum_covariance(s: &SpectralModel, i: usize, j: usize) -> f64 {
    0.5 * s.omega_inv()[(i, j)]
}

/// ⟨ψ|A|ψ⟩.
pub fn expectation(psi: &FockVector, a: &FockOperator) -> Result<Complex64, FockError> {
    if !psi.basis.same_as(&a.basis) {
        return Err(FockError::BasisMismatch);
    }
    Ok(psi.coeffs.dotc(&(&a.matrix * &psi.coeffs)))
}

/// e^{c·a(ξ)}ψ as a terminating series: a(ξ) lowers the grade.
pub fn exp_annihilation(xi: &ComplexAmplitude, c: Complex64, psi: &FockVector) -> Result<FockVector, FockError> {
    let mut term = psi.clone();
    let mut total = psi.coeffs.clone();
    for k in 1..=psi.basis.cutoff() {
        term = apply_annihilation(xi, &term)?;
        term.coeffs *= c / Complex64::from(k as f64);
        if term.coeffs.iter().all(|z| *z == Complex64::new(0.0, 0.0)) {
            break;
        }
        total += &term.coeffs;
    }
    Ok(FockVector { basis: psi.basis.clone(), coeffs: total })
}

/// ⟨ψ|W_F(ξ)|ψ⟩ for the untruncated Weyl operator, evaluated through the
/// normal-ordered form W_F(ξ) = e^{−‖ξ‖²/2} e^{a†(ξ)} e^{−a(ξ)}:
/// the value is e^{−‖ξ‖²/2} ⟨e^{a(ξ)}ψ, e^{−a(ξ)}ψ⟩, a finite sum for
/// any vector of the truncated space.
pub fn weyl_expectation_exact(psi: &FockVector, xi: &ComplexAmplitude) -> Result<Complex64, FockError> {
    let left = exp_annihilation(xi, Complex64::new(1.0, 0.0), psi)?;
    let right = exp_annihilation(xi, Complex64::new(-1.0, 0.0), psi)?;
    Ok(left.coeffs.dotc(&right.coeffs) * (-0.5 * xi.norm_squared()).exp())
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::spectral::{decompose, CouplingMatrix};

    fn c(re: f64, im: f64) -> Complex64 {
        Complex64::new(re, im)
    }

    #[test]
    fn enumeration_is_graded_and_lexicographic() {
        let b = FockBasis::new(2, 2).unwrap();
        let states: Vec<Vec<u32>> = (0..b.dim()).map(|i| b.state(i).to_vec()).collect();
        assert_eq!(states, vec![vec![0, 0], vec![0, 1], vec![1, 0], vec![0, 2], vec![1, 1], vec![2, 0]]);
        assert_eq!(b.dim() as u128, fock_dimension(2, 2));
        for i in 0..b.dim() {
            assert_eq!(b.index_of(b.state(i)), Some(i));
        }
        assert_eq!(b.grade_range(1), 1..3);
    }

    #[test]
    fn dimension_matches_binomial_and_guard_trips() {
        assert_eq!(fock_dimension(4, 20), 10_626);
        assert_eq!(FockBasis::new(3, 5).unwrap().dim(), 56);
        assert!(matches!(FockBasis::with_limit(4, 20, 10_000), Err(FockError::DimensionTooLarge { .. })));
    }

    #[test]
    fn vacuum_is_annihilated() {
        let b = FockBasis::new(3, 4).unwrap();
        let v = vacuum(&b);
        assert_eq!(v.inner(&v).unwrap(), c(1.0, 0.0));
        let xi = ComplexAmplitude(DVector::from_vec(vec![c(0.3, 1.0), c(-2.0, 0.1), c(0.0, 0.7)]));
        assert_eq!(apply_annihilation(&xi, &v).unwrap().norm(), 0.0);
        assert_eq!(annihilate(&b, &xi).unwrap().apply(&v).unwrap().norm(), 0.0);
        assert_eq!(expectation(&v, &number_operator(&b)).unwrap(), c(0.0, 0.0));
    }

    #[test]
    fn single_creation_populates_one_quantum() {
        let b = FockBasis::new(3, 3).unwrap();
        let e1 = ComplexAmplitude::basis(3, 0);
        let out = create(&b, &e1).unwrap().apply(&vacuum(&b)).unwrap();
        let expected = FockVector::occupation(&b, &[1, 0, 0]).unwrap();
        assert!((out.coeffs() - expected.coeffs()).max_modulus() < 1e-15);
    }

    #[test]
    fn creation_is_adjoint_and_truncates_top_grade() {
        let b = FockBasis::new(2, 3).unwrap();
        let xi = ComplexAmplitude(DVector::from_vec(vec![c(0.4, -0.2), c(1.0, 0.5)]));
        let a = annihilate(&b, &xi).unwrap();
        let ad = create(&b, &xi).unwrap();
        assert_eq!(ad.matrix(), &a.matrix().adjoint());
        let top = FockVector::occupation(&b, &[2, 1]).unwrap();
        assert_eq!(ad.apply(&top).unwrap().norm(), 0.0);
        // sparse and dense actions agree
        let psi = FockVector::new(&b, DVector::from_fn(b.dim(), |i, _| c(i as f64 * 0.1, 1.0 - i as f64 * 0.05))).unwrap();
        assert!((apply_creation(&xi, &psi).unwrap().coeffs() - ad.apply(&psi).unwrap().coeffs()).max_modulus() < 1e-14);
        assert!((apply_annihilation(&xi, &psi).unwrap().coeffs() - a.apply(&psi).unwrap().coeffs()).max_modulus() < 1e-14);
    }

    #[test]
    fn two_creations_commute() {
        let b = FockBasis::new(2, 4).unwrap();
        let x1 = ComplexAmplitude(DVector::from_vec(vec![c(0.4, -0.2), c(1.0, 0.5)]));
        let x2 = ComplexAmplitude(DVector::from_vec(vec![c(-0.3, 0.0), c(0.2, 0.9)]));
        let v = vacuum(&b);
        let ab = apply_creation(&x1, &apply_creation(&x2, &v).unwrap()).unwrap();
        let ba = apply_creation(&x2, &apply_creation(&x1, &v).unwrap()).unwrap();
        assert!((ab.coeffs() - ba.coeffs()).max_modulus() < 1e-14);
    }

    #[test]
    fn ladder_ccr_below_cutoff() {
        let b = FockBasis::new(3, 5).unwrap();
        for i in 0..3 {
            for j in 0..3 {
                let a = annihilate(&b, &ComplexAmplitude::basis(3, i)).unwrap();
                let ad = create(&b, &ComplexAmplitude::basis(3, j)).unwrap();
                let mut comm = a.commutator(&ad).unwrap();
                if i == j {
                    comm = comm.minus(&FockOperator::identity(&b)).unwrap();
                }
                assert!(comm.max_entry_on_grades(4) < 1e-14);
            }
        }
    }

    #[test]
    fn number_operator_eigenvalues() {
        let b = FockBasis::new(3, 4).unwrap();
        let n = number_operator(&b);
        let v = FockVector::occupation(&b, &[1, 0, 2]).unwrap();
        let out = n.apply(&v).unwrap();
        assert!((out.coeffs() - v.coeffs() * c(3.0, 0.0)).max_modulus() < 1e-15);
        let id = d_gamma(&b, &DMatrix::identity(3, 3)).unwrap();
        assert!((id.matrix() - n.matrix()).max_modulus() < 1e-14);
    }

    #[test]
    fn d_gamma_rejects_non_hermitian() {
        let b = FockBasis::new(2, 2).unwrap();
        let m = DMatrix::from_row_slice(2, 2, &[c(1.0, 0.0), c(1.0, 0.0), c(0.0, 0.0), c(1.0, 0.0)]);
        assert!(matches!(d_gamma(&b, &m), Err(FockError::NotSelfAdjoint(_))));
    }

    #[test]
    fn gamma_of_identity_and_vacuum() {
        let b = FockBasis::new(2, 4).unwrap();
        let g = gamma(&b, &DMatrix::identity(2, 2)).unwrap();
        assert!((g.matrix() - DMatrix::<Complex64>::identity(b.dim(), b.dim())).max_modulus() < 1e-14);
        let theta = 0.4f64;
        let u = DMatrix::from_row_slice(2, 2, &[c(theta.cos(), 0.0), c(0.0, theta.sin()), c(0.0, theta.sin()), c(theta.cos(), 0.0)]);
        let g = gamma(&b, &u).unwrap();
        let v = g.apply(&vacuum(&b)).unwrap();
        assert!((v.coeffs() - vacuum(&b).coeffs()).max_modulus() < 1e-15);
        let bad = DMatrix::from_element(2, 2, c(1.0, 0.0));
        assert!(matches!(gamma(&b, &bad), Err(FockError::NotUnitary(_))));
    }

    #[test]
    fn weyl_at_zero_is_identity() {
        let b = FockBasis::new(2, 5).unwrap();
        let w = weyl(&b, &ComplexAmplitude::zeros(2)).unwrap();
        assert!((w.value.matrix() - DMatrix::<Complex64>::identity(b.dim(), b.dim())).max_modulus() < 1e-14);
        assert!(w.warning.is_none());
        let big = ComplexAmplitude(DVector::from_vec(vec![c(2.0, 0.0), c(0.0, 0.0)]));
        assert!(weyl(&b, &big).unwrap().warning.is_some());
    }

    #[test]
    fn coherent_at_zero_is_vacuum() {
        let b = FockBasis::new(3, 4).unwrap();
        let v = coherent(&b, &ComplexAmplitude::zeros(3)).unwrap().value;
        assert!((v.coeffs() - vacuum(&b).coeffs()).max_modulus() < 1e-15);
    }

    #[test]
    fn exact_weyl_expectation_on_vacuum() {
        let b = FockBasis::new(2, 3).unwrap();
        let xi = ComplexAmplitude(DVector::from_vec(vec![c(0.6, 0.2), c(-0.3, 0.5)]));
        let v = weyl_expectation_exact(&vacuum(&b), &xi).unwrap();
        assert!((v - c((-0.5 * xi.norm_squared()).exp(), 0.0)).norm() < 1e-15);
    }

    #[test]
    fn vacuum_covariance_uncoupled() {
        let s = decompose(&CouplingMatrix::new(DMatrix::from_diagonal(&DVector::from_vec(vec![4.0, 9.0]))).unwrap()).unwrap();
        assert!((vacuum_covariance(&s, 0, 0) - 0.25).abs() < 1e-15);
        assert!((vacuum_covariance(&s, 1, 1) - 1.0 / 6.0).abs() < 1e-15);
        assert!(vacuum_covariance(&s, 0, 1).abs() < 1e-15);
    }

    #[test]
    fn record_round_trip_and_validation() {
        let b = FockBasis::new(2, 2).unwrap();
        let v = coherent(&b, &ComplexAmplitude(DVector::from_vec(vec![c(0.1, 0.2), c(0.3, -0.1)]))).unwrap().value;
        let rec = v.to_record();
        let json = serde_json::to_string(&rec).unwrap();
        assert!(json.starts_with(r#"{"n":2,"M":2,"coeffs":[["#));
        let back = FockVector::from_record(&serde_json::from_str(&json).unwrap()).unwrap();
        assert_eq!(back.coeffs(), v.coeffs());
        let short = FockVectorRecord { n: 2, cutoff: 2, coeffs: vec![[1.0, 0.0]] };
        assert!(FockVector::from_record(&short).is_err());
    }

    #[test]
    fn basis_mismatch_is_reported() {
        let b1 = FockBasis::new(2, 2).unwrap();
        let b2 = FockBasis::new(2, 3).unwrap();
        assert_eq!(expectation(&vacuum(&b1), &number_operator(&b2)), Err(FockError::BasisMismatch));
        assert!(matches!(
            annihilate(&b1, &ComplexAmplitude::zeros(3)),
            Err(FockError::ModeMismatch { .. })
        ));
    }
}
