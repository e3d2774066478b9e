//! Classical phase space ℝⁿ ⊕ ℝⁿ of a free oscillator system.
//!
//! The symplectic form, the complex structure J, the Hamiltonian flow and
//! the map z_Ω onto ℂⁿ, plus the classical creation and annihilation
//! functions.

use nalgebra::DVector;
use num_complex::Complex64;
use std::f64::consts::SQRT_2;
use std::ops::{Add, Mul, Sub};
use thiserror::Error;

use crate::spectral::{complexify, SpectralModel};

#[derive(Debug, Error, Clone, PartialEq)]
pub enum ClassicalError {
    #[error("dimension mismatch: expected {expected}, got {got}")]
    DimensionMismatch { expected: usize, got: usize },
}

/// A classical state X = (q, p).
#[derive(Debug, Clone, PartialEq)]
pub struct PhaseVector {
    pub q: DVector<f64>,
    pub p: DVector<f64>,
}

impl PhaseVector {
    pub fn new(q: DVector<f64>, p: DVector<f64>) -> Result<Self, ClassicalError> {
        if q.len() != p.len() {
            return Err(ClassicalError::DimensionMismatch { expected: q.len(), got: p.len() });
        }
        Ok(Self { q, p })
    }

    pub fn from_slices(q: &[f64], p: &[f64]) -> Result<Self, ClassicalError> {
        Self::new(DVector::from_column_slice(q), DVector::from_column_slice(p))
    }

    pub fn zeros(n: usize) -> Self {
        Self { q: DVector::zeros(n), p: DVector::zeros(n) }
    }

    /// (e_j, 0).
    pub fn displacement(n: usize, j: usize) -> Self {
        let mut x = Self::zeros(n);
        x.q[j] = 1.0;
        x
    }

    /// (0, e_j).
    pub fn momentum(n: usize, j: usize) -> Self {
        let mut x = Self::zeros(n);
        x.p[j] = 1.0;
        x
    }

    pub fn dim(&self) -> usize {
        self.q.len()
    }

    pub fn norm(&self) -> f64 {
        (self.q.norm_squared() + self.p.norm_squared()).sqrt()
    }
}

impl Add for &PhaseVector {
    type Output = PhaseVector;
    fn add(self, rhs: &PhaseVector) -> PhaseVector {
        PhaseVector { q: &self.q + &rhs.q, p: &self.p + &rhs.p }
    }
}

impl Sub for &PhaseVector {
    type Output = PhaseVector;
    fn sub(self, rhs: &PhaseVector) -> PhaseVector {
        PhaseVector { q: &self.q - &rhs.q, p: &self.p - &rhs.p }
    }
}

impl Mul<f64> for &PhaseVector {
    type Output = PhaseVector;
    fn mul(self, c: f64) -> PhaseVector {
        PhaseVector { q: &self.q * c, p: &self.p * c }
    }
}

/// A vector of ℂⁿ, the image of phase space under z_Ω.
#[derive(Debug, Clone, PartialEq)]
pub struct ComplexAmplitude(pub DVector<Complex64>);

impl ComplexAmplitude {
    pub fn zeros(n: usize) -> Self {
        Self(DVector::zeros(n))
    }

    pub fn from_real(v: &DVector<f64>) -> Self {
        Self(v.map(Complex64::from))
    }

    /// The j-th standard basis vector.
    pub fn basis(n: usize, j: usize) -> Self {
        let mut z = Self::zeros(n);
        z.0[j] = Complex64::new(1.0, 0.0);
        z
    }

    pub fn dim(&self) -> usize {
        self.0.len()
    }

    pub fn norm(&self) -> f64 {
        self.0.norm()
    }

    pub fn norm_squared(&self) -> f64 {
        self.0.norm_squared()
    }

    /// Entrywise conjugate.
    pub fn conj(&self) -> Self {
        Self(self.0.map(|c| c.conj()))
    }

    /// ξ̄ · ξ', antilinear in the first slot.
    pub fn inner(&self, other: &ComplexAmplitude) -> Complex64 {
        self.0.dotc(&other.0)
    }

    pub fn scale(&self, c: Complex64) -> Self {
        Self(&self.0 * c)
    }
}

impl Add for &ComplexAmplitude {
    type Output = ComplexAmplitude;
    fn add(self, rhs: &ComplexAmplitude) -> ComplexAmplitude {
        ComplexAmplitude(&self.0 + &rhs.0)
    }
}

fn check(s: &SpectralModel, n: usize) -> Result<(), ClassicalError> {
    if s.dim() != n {
        return Err(ClassicalError::DimensionMismatch { expected: s.dim(), got: n });
    }
    Ok(())
}

fn check_pair(x: &PhaseVector, y: &PhaseVector) -> Result<(), ClassicalError> {
    if x.dim() != y.dim() {
        return Err(ClassicalError::DimensionMismatch { expected: x.dim(), got: y.dim() });
    }
    Ok(())
}

/// H(X) = ½ p·p + ½ q·Ω²q.
pub fn hamiltonian(s: &SpectralModel, x: &PhaseVector) -> Result<f64, ClassicalError> {
    check(s, x.dim())?;
    let omega2 = s.source().matrix();
    Ok(0.5 * x.p.dot(&x.p) + 0.5 * x.q.dot(&(omega2 * &x.q)))
}

/// s(X, X') = q·p' − q'·p.
pub fn symplectic_form(x: &PhaseVector, y: &PhaseVector) -> Result<f64, ClassicalError> {
    check_pair(x, y)?;
    Ok(x.q.dot(&y.p) - y.q.dot(&x.p))
}

/// JX = (−Ω⁻¹p, Ωq).
pub fn apply_j(s: &SpectralModel, x: &PhaseVector) -> Result<PhaseVector, ClassicalError> {
    check(s, x.dim())?;
    Ok(PhaseVector { q: -(s.omega_inv() * &x.p), p: s.omega() * &x.q })
}

/// Φ_t X = cos(Ωt) X − sin(Ωt) JX.
pub fn flow(s: &SpectralModel, x: &PhaseVector, t: f64) -> Result<PhaseVector, ClassicalError> {
    check(s, x.dim())?;
    let cos = s.real_function_matrix(|w| (w * t).cos()).expect("finite");
    // sin(Ωt)Ω⁻¹ and sin(Ωt)Ω evaluated spectrally
    let sin_over = s.real_function_matrix(|w| (w * t).sin() / w).expect("finite");
    let sin_times = s.real_function_matrix(|w| (w * t).sin() * w).expect("finite");
    Ok(PhaseVector {
        q: &cos * &x.q + sin_over * &x.p,
        p: &cos * &x.p - sin_times * &x.q,
    })
}

/// Hamiltonian vector field X_H X = −J(Ωq, Ωp) = (p, −Ω²q).
pub fn hamiltonian_vector_field(s: &SpectralModel, x: &PhaseVector) -> Result<PhaseVector, ClassicalError> {
    check(s, x.dim())?;
    let omega_x = PhaseVector { q: s.omega() * &x.q, p: s.omega() * &x.p };
    let j = apply_j(s, &omega_x)?;
    Ok(&j * -1.0)
}

/// g_Ω(X, Y) = s(X, JY).
pub fn g_metric(s: &SpectralModel, x: &PhaseVector, y: &PhaseVector) -> Result<f64, ClassicalError> {
    check_pair(x, y)?;
    symplectic_form(x, &apply_j(s, y)?)
}

/// ⟨X, Y⟩₊ = ½(g_Ω(X, Y) + i s(X, Y)).
pub fn inner_plus(s: &SpectralModel, x: &PhaseVector, y: &PhaseVector) -> Result<Complex64, ClassicalError> {
    let g = g_metric(s, x, y)?;
    let sym = symplectic_form(x, y)?;
    Ok(Complex64::new(0.5 * g, 0.5 * sym))
}

/// z_Ω(X) = (Ω^{1/2} q + i Ω^{-1/2} p)/√2.
pub fn z_map(s: &SpectralModel, x: &PhaseVector) -> Result<ComplexAmplitude, ClassicalError> {
    check(s, x.dim())?;
    let re = s.omega_sqrt() * &x.q / SQRT_2;
    let im = s.omega_inv_sqrt() * &x.p / SQRT_2;
    Ok(ComplexAmplitude(re.zip_map(&im, Complex64::new)))
}

/// z_Ω†(X) = (Ω^{1/2} q − i Ω^{-1/2} p)/√2.
pub fn z_dagger_map(s: &SpectralModel, x: &PhaseVector) -> Result<ComplexAmplitude, ClassicalError> {
    Ok(z_map(s, x)?.conj())
}

/// Inverse of z_Ω: q = √2 Ω^{-1/2} Re z, p = √2 Ω^{1/2} Im z.
pub fn z_inverse(s: &SpectralModel, z: &ComplexAmplitude) -> Result<PhaseVector, ClassicalError> {
    check(s, z.dim())?;
    let re = z.0.map(|c| c.re);
    let im = z.0.map(|c| c.im);
    Ok(PhaseVector { q: s.omega_inv_sqrt() * re * SQRT_2, p: s.omega_sqrt() * im * SQRT_2 })
}

/// Classical annihilation function a_c(ξ)(X) = ξ̄ · z_Ω(X).
pub fn annihilation_fn(s: &SpectralModel, xi: &ComplexAmplitude, x: &PhaseVector) -> Result<Complex64, ClassicalError> {
    check(s, xi.dim())?;
    Ok(xi.inner(&z_map(s, x)?))
}

/// Classical creation function a_c†(ξ)(X) = ξ · z_Ω†(X).
pub fn creation_fn(s: &SpectralModel, xi: &ComplexAmplitude, x: &PhaseVector) -> Result<Complex64, ClassicalError> {
    check(s, xi.dim())?;
    let zd = z_dagger_map(s, x)?;
    Ok(xi.0.iter().zip(zd.0.iter()).map(|(a, b)| a * b).sum())
}

/// H = ½ Σ_i ω_i (a_c†(η_i) a_c(η_i) + a_c(η̄_i) a_c†(η̄_i)).
pub fn hamiltonian_via_modes(s: &SpectralModel, x: &PhaseVector) -> Result<f64, ClassicalError> {
    check(s, x.dim())?;
    let mut total = 0.0;
    for (i, &w) in s.frequencies().iter().enumerate() {
        let eta = ComplexAmplitude::from_real(&s.modes().column(i).into_owned());
        let eta_bar = eta.conj();
        let first = creation_fn(s, &eta, x)? * annihilation_fn(s, &eta, x)?;
        let second = annihilation_fn(s, &eta_bar, x)? * creation_fn(s, &eta_bar, x)?;
        total += 0.5 * w * (first + second).re;
    }
    Ok(total)
}

/// A linear function on phase space.
#[derive(Debug, Clone, PartialEq)]
pub enum LinearObservable {
    /// X ↦ η·q
    Field(DVector<f64>),
    /// X ↦ η·p
    Momentum(DVector<f64>),
    /// X ↦ s(Y, X)
    Symplectic(PhaseVector),
    /// X ↦ ξ̄·z_Ω(X)
    Annihilation(ComplexAmplitude),
    /// X ↦ ξ·z_Ω†(X)
    Creation(ComplexAmplitude),
}

impl LinearObservable {
    fn dim(&self) -> usize {
        match self {
            Self::Field(v) | Self::Momentum(v) => v.len(),
            Self::Symplectic(y) => y.dim(),
            Self::Annihilation(z) | Self::Creation(z) => z.dim(),
        }
    }

    /// Complex coefficient vectors (α, β) with f(X) = α·q + β·p.
    pub fn gradient(&self, s: &SpectralModel) -> Result<(DVector<Complex64>, DVector<Complex64>), ClassicalError> {
        check(s, self.dim())?;
        let c = |v: &DVector<f64>| v.map(Complex64::from);
        let i = Complex64::i();
        Ok(match self {
            Self::Field(eta) => (c(eta), DVector::zeros(eta.len())),
            Self::Momentum(eta) => (DVector::zeros(eta.len()), c(eta)),
            Self::Symplectic(y) => (c(&-&y.p), c(&y.q)),
            Self::Annihilation(xi) => {
                let bar = xi.conj().0;
                (
                    complexify(s.omega_sqrt()) * &bar / Complex64::from(SQRT_2),
                    complexify(s.omega_inv_sqrt()) * &bar * i / Complex64::from(SQRT_2),
                )
            }
            Self::Creation(xi) => (
                complexify(s.omega_sqrt()) * &xi.0 / Complex64::from(SQRT_2),
                complexify(s.omega_inv_sqrt()) * &xi.0 * (-i) / Complex64::from(SQRT_2),
            ),
        })
    }

    pub fn evaluate(&self, s: &SpectralModel, x: &PhaseVector) -> Result<Complex64, ClassicalError> {
        check(s, x.dim())?;
        let (alpha, beta) = self.gradient(s)?;
        let q = x.q.map(Complex64::from);
        let p = x.p.map(Complex64::from);
        Ok(alpha.dot(&q) + beta.dot(&p))
    }
}

/// {f, g} = ∂_q f·∂_p g − ∂_p f·∂_q g, a constant for linear observables.
pub fn poisson_bracket(
    s: &SpectralModel,
    f: &LinearObservable,
    g: &LinearObservable,
) -> Result<Complex64, ClassicalError> {
    let (af, bf) = f.gradient(s)?;
    let (ag, bg) = g.gradient(s)?;
    Ok(af.dot(&bg) - bf.dot(&ag))
}
