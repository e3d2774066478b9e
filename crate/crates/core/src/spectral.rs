//! Spectral calculus for the coupling matrix Ω².
//!
//! Every matrix function used elsewhere in the crate (Ω^λ, cos Ωt, sin Ωt,
//! e^{±iΩt}) is evaluated through one cached eigendecomposition held in
//! [`SpectralModel`].

use nalgebra::{DMatrix, DVector, SymmetricEigen};
use num_complex::Complex64;
use thiserror::Error;

/// Relative asymmetry tolerated in a coupling matrix.
pub const SYMMETRY_TOLERANCE: f64 = 1e-12;
/// Smallest admissible ratio λ_min / λ_max of Ω².
pub const POSITIVITY_THRESHOLD: f64 = 1e-10;
/// Tolerance used when validating externally supplied eigenpairs.
pub const EIGENPAIR_TOLERANCE: f64 = 1e-10;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum SpectralError {
    #[error("coupling matrix must be square and non-empty, got {rows}x{cols}")]
    BadShape { rows: usize, cols: usize },
    #[error("coupling matrix has non-finite entries")]
    NonFinite,
    #[error("coupling matrix is not symmetric (max asymmetry {asymmetry:e})")]
    NotSymmetric { asymmetry: f64 },
    #[error("coupling matrix is not positive definite: smallest eigenvalue {min:e}, largest {max:e} (zero mode)")]
    NotPositiveDefinite { min: f64, max: f64 },
    #[error("scalar function is not finite at frequency {frequency}")]
    FunctionSingular { frequency: f64 },
    #[error("vector length {got} does not match mode count {expected}")]
    DimensionMismatch { expected: usize, got: usize },
    #[error("supplied eigenpairs are inconsistent: {0}")]
    BadEigenpairs(String),
}

/// The real symmetric positive matrix Ω², in units of frequency squared.
#[derive(Debug, Clone, PartialEq)]
pub struct CouplingMatrix(DMatrix<f64>);

impl CouplingMatrix {
    /// Wraps a square matrix. Symmetry and positivity are checked by
    /// [`decompose`], so that a semidefinite matrix (a zero mode) can still
    /// be built and inspected.
    pub fn new(entries: DMatrix<f64>) -> Result<Self, SpectralError> {
        let (rows, cols) = entries.shape();
        if rows == 0 || rows != cols {
            return Err(SpectralError::BadShape { rows, cols });
        }
        if entries.iter().any(|x| !x.is_finite()) {
            return Err(SpectralError::NonFinite);
        }
        Ok(Self(entries))
    }

    pub fn from_rows(rows: &[Vec<f64>]) -> Result<Self, SpectralError> {
        let n = rows.len();
        if let Some(bad) = rows.iter().find(|r| r.len() != n) {
            return Err(SpectralError::BadShape { rows: n, cols: bad.len() });
        }
        Self::new(DMatrix::from_fn(n, n, |i, j| rows[i][j]))
    }

    pub fn dim(&self) -> usize {
        self.0.nrows()
    }

    pub fn matrix(&self) -> &DMatrix<f64> {
        &self.0
    }

    pub fn to_rows(&self) -> Vec<Vec<f64>> {
        (0..self.dim()).map(|i| self.0.row(i).iter().copied().collect()).collect()
    }

    fn check_symmetric(&self) -> Result<(), SpectralError> {
        let scale = self.0.amax();
        let asymmetry = (&self.0 - self.0.transpose()).amax();
        if asymmetry > SYMMETRY_TOLERANCE * scale.max(f64::MIN_POSITIVE) {
            return Err(SpectralError::NotSymmetric { asymmetry });
        }
        Ok(())
    }
}

/// Eigendecomposition Ω² = U diag(ω²) Uᵀ with ascending frequencies.
///
/// Immutable once built. The commonly used powers of Ω are cached.
#[derive(Debug, Clone)]
pub struct SpectralModel {
    source: CouplingMatrix,
    frequencies: DVector<f64>,
    modes: DMatrix<f64>,
    omega: DMatrix<f64>,
    omega_inv: DMatrix<f64>,
    omega_sqrt: DMatrix<f64>,
    omega_inv_sqrt: DMatrix<f64>,
}

/// Decomposes Ω², rejecting asymmetric input and (near-)zero modes.
pub fn decompose(m: &CouplingMatrix) -> Result<SpectralModel, SpectralError> {
    m.check_symmetric()?;
    let sym = (m.matrix() + m.matrix().transpose()) * 0.5;
    let eig = SymmetricEigen::new(sym);

    let n = m.dim();
    let mut order: Vec<usize> = (0..n).collect();
    order.sort_by(|&a, &b| eig.eigenvalues[a].total_cmp(&eig.eigenvalues[b]));

    let lambda_min = eig.eigenvalues[order[0]];
    let lambda_max = eig.eigenvalues[order[n - 1]];
    if !(lambda_max > 0.0) || lambda_min <= POSITIVITY_THRESHOLD * lambda_max {
        return Err(SpectralError::NotPositiveDefinite { min: lambda_min, max: lambda_max });
    }

    let frequencies = DVector::from_iterator(n, order.iter().map(|&k| eig.eigenvalues[k].sqrt()));
    let mut modes = DMatrix::zeros(n, n);
    for (col, &k) in order.iter().enumerate() {
        modes.set_column(col, &eig.eigenvectors.column(k));
    }
    Ok(SpectralModel::assemble(m.clone(), frequencies, modes))
}

impl SpectralModel {
    fn assemble(source: CouplingMatrix, frequencies: DVector<f64>, modes: DMatrix<f64>) -> Self {
        let build = |f: &dyn Fn(f64) -> f64| {
            let diag = DMatrix::from_diagonal(&frequencies.map(f));
            &modes * diag * modes.transpose()
        };
        let omega = build(&|w| w);
        let omega_inv = build(&|w| 1.0 / w);
        let omega_sqrt = build(&f64::sqrt);
        let omega_inv_sqrt = build(&|w| 1.0 / w.sqrt());
        Self { source, frequencies, modes, omega, omega_inv, omega_sqrt, omega_inv_sqrt }
    }

    /// Builds a model from externally chosen eigenpairs, e.g. a different
    /// orthonormal basis of a degenerate eigenspace. The pairs must be
    /// orthonormal and reproduce the source matrix.
    pub fn from_eigenpairs(
        source: CouplingMatrix,
        frequencies: DVector<f64>,
        modes: DMatrix<f64>,
    ) -> Result<Self, SpectralError> {
        let n = source.dim();
        if frequencies.len() != n || modes.shape() != (n, n) {
            return Err(SpectralError::BadEigenpairs("shape mismatch".into()));
        }
        if frequencies.iter().any(|&w| !(w > 0.0) || !w.is_finite()) {
            return Err(SpectralError::BadEigenpairs("frequencies must be positive".into()));
        }
        let gram = modes.transpose() * &modes - DMatrix::identity(n, n);
        if gram.amax() > EIGENPAIR_TOLERANCE {
            return Err(SpectralError::BadEigenpairs("modes are not orthonormal".into()));
        }
        let rebuilt = &modes * DMatrix::from_diagonal(&frequencies.map(|w| w * w)) * modes.transpose();
        let scale = source.matrix().amax();
        if (rebuilt - source.matrix()).amax() > EIGENPAIR_TOLERANCE * scale {
            return Err(SpectralError::BadEigenpairs("eigenpairs do not reconstruct Ω²".into()));
        }
        Ok(Self::assemble(source, frequencies, modes))
    }

    pub fn dim(&self) -> usize {
        self.frequencies.len()
    }

    /// ω_1 ≤ … ≤ ω_n.
    pub fn frequencies(&self) -> &DVector<f64> {
        &self.frequencies
    }

    /// Orthonormal eigenvectors, one per column, in frequency order.
    pub fn modes(&self) -> &DMatrix<f64> {
        &self.modes
    }

    pub fn source(&self) -> &CouplingMatrix {
        &self.source
    }

    pub fn omega(&self) -> &DMatrix<f64> {
        &self.omega
    }

    pub fn omega_inv(&self) -> &DMatrix<f64> {
        &self.omega_inv
    }

    pub fn omega_sqrt(&self) -> &DMatrix<f64> {
        &self.omega_sqrt
    }

    pub fn omega_inv_sqrt(&self) -> &DMatrix<f64> {
        &self.omega_inv_sqrt
    }

    /// U diag(ω²) Uᵀ.
    pub fn reconstruct(&self) -> DMatrix<f64> {
        self.real_function_matrix(|w| w * w).expect("ω² is finite")
    }

    /// The matrix U f(diag ω) Uᵀ.
    pub fn real_function_matrix<F>(&self, f: F) -> Result<DMatrix<f64>, SpectralError>
    where
        F: Fn(f64) -> f64,
    {
        let values = self.evaluate(|w| {
            let v = f(w);
            v.is_finite().then_some(v)
        })?;
        Ok(&self.modes * DMatrix::from_diagonal(&values) * self.modes.transpose())
    }

    /// The complex matrix U f(diag ω) Uᵀ, e.g. f(ω) = e^{-iωt}.
    pub fn complex_function_matrix<F>(&self, f: F) -> Result<DMatrix<Complex64>, SpectralError>
    where
        F: Fn(f64) -> Complex64,
    {
        let values = self.evaluate(|w| {
            let v = f(w);
            v.is_finite().then_some(v)
        })?;
        let u = self.modes.map(Complex64::from);
        Ok(&u * DMatrix::from_diagonal(&values) * u.transpose())
    }

    fn evaluate<T, F>(&self, f: F) -> Result<DVector<T>, SpectralError>
    where
        T: nalgebra::Scalar,
        F: Fn(f64) -> Option<T>,
    {
        let mut out = Vec::with_capacity(self.dim());
        for &w in self.frequencies.iter() {
            out.push(f(w).ok_or(SpectralError::FunctionSingular { frequency: w })?);
        }
        Ok(DVector::from_vec(out))
    }

    fn check_len(&self, len: usize) -> Result<(), SpectralError> {
        if len != self.dim() {
            return Err(SpectralError::DimensionMismatch { expected: self.dim(), got: len });
        }
        Ok(())
    }

    /// f(Ω) v for a real vector, without forming the matrix.
    pub fn apply_scalar_function<F>(&self, f: F, v: &DVector<f64>) -> Result<DVector<f64>, SpectralError>
    where
        F: Fn(f64) -> f64,
    {
        self.check_len(v.len())?;
        let values = self.evaluate(|w| {
            let x = f(w);
            x.is_finite().then_some(x)
        })?;
        let coords = self.modes.tr_mul(v).component_mul(&values);
        Ok(&self.modes * coords)
    }

    /// f(Ω) v for a complex vector and a complex-valued f.
    pub fn apply_complex_function<F>(
        &self,
        f: F,
        v: &DVector<Complex64>,
    ) -> Result<DVector<Complex64>, SpectralError>
    where
        F: Fn(f64) -> Complex64,
    {
        self.check_len(v.len())?;
        let values = self.evaluate(|w| {
            let x = f(w);
            x.is_finite().then_some(x)
        })?;
        let u = self.modes.map(Complex64::from);
        let coords = u.tr_mul(v).component_mul(&values);
        Ok(&u * coords)
    }

    /// Ω^λ.
    pub fn omega_power(&self, lambda: f64) -> DMatrix<f64> {
        self.real_function_matrix(|w| w.powf(lambda))
            .expect("positive frequencies have finite real powers")
    }

    /// e^{-iΩt} v.
    pub fn propagate(&self, t: f64, v: &DVector<Complex64>) -> DVector<Complex64> {
        self.apply_complex_function(|w| Complex64::from_polar(1.0, -w * t), v)
            .expect("unit phases are finite")
    }
}

/// Real symmetric matrix → complex matrix.
pub(crate) fn complexify(m: &DMatrix<f64>) -> DMatrix<Complex64> {
    m.map(Complex64::from)
}
