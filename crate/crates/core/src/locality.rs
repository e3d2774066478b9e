//! Regions, local Weyl generators and strict localization of vacuum
//! excitations.
//!
//! A state ψ ≠ |0⟩ is a strictly local excitation in B when
//! ⟨ψ|W_F(z_Ω(Y))|ψ⟩ = ⟨0|W_F(z_Ω(Y))|0⟩ for every Y supported in the
//! complement of B. Finite-quanta states with this property exist exactly
//! when Ω fails to be strongly non-local on B, i.e. when some h ≠ 0 has
//! both h and Ωh supported in B.

use nalgebra::{DMatrix, DVector};
use num_complex::Complex64;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, StandardNormal};
use serde::{Deserialize, Serialize};
use std::f64::consts::PI;
use std::sync::Arc;
use thiserror::Error;

use crate::classical::{z_map, ComplexAmplitude, PhaseVector};
use crate::fock::{
    annihilate, apply_annihilation, apply_creation, coherent_tail_bound, create, exp_annihilation, vacuum_covariance, weyl,
    weyl_expectation_exact, FockBasis, FockError, FockVector, TruncationWarning,
};
use crate::optimize::{nelder_mead_restarts, NelderMeadOptions};
use crate::spectral::SpectralModel;

/// Singular values below this fraction of the reference scale count as zero.
pub const RANK_THRESHOLD: f64 = 1e-9;
/// Tolerance on ‖ξ'‖ = 1.
pub const NORMALIZATION_TOLERANCE: f64 = 1e-10;
/// Chebyshev coefficients below this fraction of the largest are ignored.
pub const DEGREE_FLOOR: f64 = 1e-6;
pub const DEFAULT_SAMPLE_SEED: u64 = 0x5EED;
pub const KNIGHT_STARTS: usize = 8;
/// Starts used for the closed-form one-quantum minimum.
pub const ANALYTIC_STARTS: usize = 24;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum LocalityError {
    #[error("invalid region: {0}")]
    BadRegion(String),
    #[error("amplitude is not normalized (norm {0})")]
    NotNormalized(f64),
    #[error("no finite-quanta state other than the vacuum lives in grade 0")]
    NotApplicable,
    #[error("quanta {quanta} exceeds cutoff − 2 = {limit}")]
    QuantaTooLarge { quanta: usize, limit: i64 },
    #[error("sites must differ")]
    SameSite,
    #[error("model has {model} sites, basis has {basis} modes")]
    ModeMismatch { model: usize, basis: usize },
    #[error(transparent)]
    Fock(#[from] FockError),
}

/// A sorted, duplicate-free subset of {0, …, n−1}.
#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct Region {
    n: usize,
    sites: Vec<usize>,
}

impl Region {
    pub fn new(n: usize, sites: &[usize]) -> Result<Self, LocalityError> {
        let mut sorted = sites.to_vec();
        sorted.sort_unstable();
        if sorted.windows(2).any(|w| w[0] == w[1]) {
            return Err(LocalityError::BadRegion("duplicate site".into()));
        }
        if let Some(&last) = sorted.last() {
            if last >= n {
                return Err(LocalityError::BadRegion(format!("site {last} outside 0..{n}")));
            }
        }
        Ok(Self { n, sites: sorted })
    }

    pub fn empty(n: usize) -> Self {
        Self { n, sites: Vec::new() }
    }

    pub fn full(n: usize) -> Self {
        Self { n, sites: (0..n).collect() }
    }

    pub fn sites(&self) -> &[usize] {
        &self.sites
    }

    pub fn complement(&self) -> Vec<usize> {
        (0..self.n).filter(|j| !self.sites.contains(j)).collect()
    }

    pub fn total_sites(&self) -> usize {
        self.n
    }

    pub fn len(&self) -> usize {
        self.sites.len()
    }

    pub fn is_empty(&self) -> bool {
        self.sites.is_empty()
    }

    /// Every region of `n` sites with size in `sizes`, in lexicographic order.
    pub fn all_of_size(n: usize, sizes: std::ops::RangeInclusive<usize>) -> Vec<Region> {
        (0u64..1 << n)
            .map(|mask| (0..n).filter(|j| mask >> j & 1 == 1).collect::<Vec<_>>())
            .filter(|s| sizes.contains(&s.len()))
            .map(|sites| Region { n, sites })
            .collect()
    }
}

/// The phase vectors (e_j, 0) and (0, e_j), j ∈ B, spanning ℋ(B, Ω).
#[derive(Debug, Clone)]
pub struct LocalGeneratorSet {
    pub region: Region,
    pub generators: Vec<PhaseVector>,
}

impl LocalGeneratorSet {
    pub fn new(region: &Region) -> Self {
        let n = region.total_sites();
        let generators = region
            .sites()
            .iter()
            .flat_map(|&j| [PhaseVector::displacement(n, j), PhaseVector::momentum(n, j)])
            .collect();
        Self { region: region.clone(), generators }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct LocalityVerdict {
    pub strongly_nonlocal: bool,
    /// Unit h with h and Ωh supported in B, present iff not strongly non-local.
    pub witness: Option<Vec<f64>>,
    pub span_rank: usize,
    pub equivalence_consistent: bool,
}

fn check_region(s: &SpectralModel, b: &Region) -> Result<(), LocalityError> {
    if b.total_sites() != s.dim() {
        return Err(LocalityError::BadRegion(format!("region is over {} sites, model has {}", b.total_sites(), s.dim())));
    }
    Ok(())
}

/// Null-space test on Ω[Bᶜ, B] plus the complement-span rank.
///
/// Singular values are compared against 1e−9·‖Ω‖ rather than the
/// submatrix's own largest singular value, so a submatrix that is zero up
/// to roundoff is recognised as zero.
pub fn strongly_nonlocal(s: &SpectralModel, b: &Region) -> Result<LocalityVerdict, LocalityError> {
    check_region(s, b)?;
    let span_rank = complement_span_rank(s, b)?;
    let n = s.dim();
    let (strong, witness) = if b.is_empty() {
        (true, None)
    } else {
        let comp = b.complement();
        let cols = b.len();
        // pad to at least square so the SVD exposes a full right basis
        let rows = comp.len().max(cols);
        let mut sub = DMatrix::<f64>::zeros(rows, cols);
        for (r, &i) in comp.iter().enumerate() {
            for (c, &j) in b.sites().iter().enumerate() {
                sub[(r, c)] = s.omega()[(i, j)];
            }
        }
        let svd = sub.svd(false, true);
        let v_t = svd.v_t.expect("requested");
        let scale = s.frequencies().max();
        let (k_min, &sigma_min) = svd
            .singular_values
            .iter()
            .enumerate()
            .min_by(|a, b| a.1.total_cmp(b.1))
            .expect("non-empty region");
        if sigma_min > RANK_THRESHOLD * scale {
            (true, None)
        } else {
            let h_b = v_t.row(k_min);
            let mut h = vec![0.0; n];
            for (c, &j) in b.sites().iter().enumerate() {
                h[j] = h_b[c];
            }
            // fix the sign so the largest entry is positive
            let lead = h.iter().copied().fold(0.0f64, |a, x| if x.abs() > a.abs() { x } else { a });
            if lead < 0.0 {
                h.iter_mut().for_each(|x| *x = -*x);
            }
            (false, Some(h))
        }
    };
    Ok(LocalityVerdict {
        strongly_nonlocal: strong,
        witness,
        span_rank,
        equivalence_consistent: strong == (span_rank == n),
    })
}

/// The family {Ω^{1/2}e_j, Ω^{−1/2}e_j : j ∈ Bᶜ} as columns; its complex
/// span is z_Ω(ℋ(Bᶜ, Ω)).
fn complement_family(s: &SpectralModel, b: &Region) -> DMatrix<f64> {
    let comp = b.complement();
    let n = s.dim();
    let mut m = DMatrix::zeros(n, 2 * comp.len());
    for (c, &j) in comp.iter().enumerate() {
        m.set_column(2 * c, &s.omega_sqrt().column(j));
        m.set_column(2 * c + 1, &s.omega_inv_sqrt().column(j));
    }
    m
}

/// Rank of z_Ω(ℋ(Bᶜ, Ω)) over ℂ.
pub fn complement_span_rank(s: &SpectralModel, b: &Region) -> Result<usize, LocalityError> {
    check_region(s, b)?;
    let family = complement_family(s, b);
    if family.ncols() == 0 {
        return Ok(0);
    }
    let sv = family.singular_values();
    let top = sv.max();
    Ok(sv.iter().filter(|&&x| x > RANK_THRESHOLD * top).count())
}

/// Whether the null-space test and the span-rank test agree.
pub fn knight_equivalence_check(s: &SpectralModel, b: &Region) -> Result<bool, LocalityError> {
    Ok(strongly_nonlocal(s, b)?.equivalence_consistent)
}

/// Orthonormal basis of z_Ω(ℋ(Bᶜ, Ω)) as columns.
fn complement_span_basis(s: &SpectralModel, b: &Region) -> DMatrix<f64> {
    let family = complement_family(s, b);
    if family.ncols() == 0 {
        return DMatrix::zeros(s.dim(), 0);
    }
    let svd = family.svd(true, false);
    let u = svd.u.expect("requested");
    let top = svd.singular_values.max();
    let keep: Vec<usize> = (0..svd.singular_values.len()).filter(|&k| svd.singular_values[k] > RANK_THRESHOLD * top).collect();
    DMatrix::from_fn(s.dim(), keep.len(), |i, c| u[(i, keep[c])])
}

/// ‖P_W ξ'‖ with W = span_ℂ z_Ω(ℋ(Bᶜ, Ω)); zero iff a†(ξ')|0⟩ is strictly
/// localized in B.
pub fn one_quantum_localization_residual(
    s: &SpectralModel,
    b: &Region,
    xi: &ComplexAmplitude,
) -> Result<f64, LocalityError> {
    check_region(s, b)?;
    let norm = xi.norm();
    if (norm - 1.0).abs() > NORMALIZATION_TOLERANCE || xi.dim() != s.dim() {
        return Err(LocalityError::NotNormalized(norm));
    }
    let w = complement_span_basis(s, b).map(Complex64::from);
    Ok((w.adjoint() * &xi.0).norm())
}

/// Which phase vectors supported outside B the Weyl comparison samples.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SampleSpec {
    pub amplitudes: Vec<f64>,
    pub random_count: usize,
    pub random_scale: f64,
    pub seed: u64,
}

impl Default for SampleSpec {
    fn default() -> Self {
        Self { amplitudes: vec![0.25, 0.5, 1.0], random_count: 20, random_scale: 1.5, seed: DEFAULT_SAMPLE_SEED }
    }
}

impl SampleSpec {
    pub fn with_seed(seed: u64) -> Self {
        Self { seed, ..Self::default() }
    }
}

/// z_Ω(Y) for every sampled Y ∈ ℋ(Bᶜ, Ω): scaled generators first, then
/// seeded Gaussian combinations of all generators.
pub fn sample_amplitudes(s: &SpectralModel, b: &Region, spec: &SampleSpec) -> Vec<ComplexAmplitude> {
    let generators = LocalGeneratorSet::new(&Region { n: b.total_sites(), sites: b.complement() }).generators;
    if generators.is_empty() {
        return Vec::new();
    }
    let mut out = Vec::new();
    for g in &generators {
        for &a in &spec.amplitudes {
            out.push(z_map(s, &(g * a)).expect("dimensions agree"));
        }
    }
    let mut rng = ChaCha8Rng::seed_from_u64(spec.seed);
    for _ in 0..spec.random_count {
        let mut y = PhaseVector::zeros(s.dim());
        for g in &generators {
            let c: f64 = StandardNormal.sample(&mut rng);
            y = &y + &(g * (c * spec.random_scale));
        }
        out.push(z_map(s, &y).expect("dimensions agree"));
    }
    out
}

/// sup over the sample of |⟨ψ|W_F(ξ)|ψ⟩ − e^{−‖ξ‖²/2}|.
///
/// The expectation is evaluated exactly (normal-ordered, untruncated), so
/// the only inputs are ψ and the sampled amplitudes.
pub fn weyl_deviation(psi: &FockVector, s: &SpectralModel, b: &Region, spec: &SampleSpec) -> Result<f64, LocalityError> {
    check_region(s, b)?;
    if psi.basis().modes() != s.dim() {
        return Err(LocalityError::ModeMismatch { model: s.dim(), basis: psi.basis().modes() });
    }
    let mut worst = 0.0f64;
    for xi in sample_amplitudes(s, b, spec) {
        let value = weyl_expectation_exact(psi, &xi)?;
        worst = worst.max((value - Complex64::from((-0.5 * xi.norm_squared()).exp())).norm());
    }
    Ok(worst)
}

#[derive(Debug, Clone)]
pub struct KnightReport {
    pub min_residual: f64,
    pub argmin: FockVector,
    pub quanta: usize,
    pub seed: u64,
    pub starts: usize,
    pub evaluations: usize,
    /// Some start ran out of evaluations before converging.
    pub budget_exhausted: bool,
}

/// Per-sample quadratic forms: ⟨ψ|W_F(ξ_s)|ψ⟩ = ψ* A_s ψ on grades 1..N.
fn sample_forms(basis: &Arc<FockBasis>, samples: &[ComplexAmplitude], quanta: usize) -> Result<Vec<(DMatrix<Complex64>, f64)>, FockError> {
    let lo = basis.grade_range(1).start;
    let hi = basis.grade_range(quanta).end;
    let k = hi - lo;
    let mut forms = Vec::with_capacity(samples.len());
    for xi in samples {
        let mut plus = DMatrix::<Complex64>::zeros(hi, k);
        let mut minus = DMatrix::<Complex64>::zeros(hi, k);
        for c in 0..k {
            let state = FockVector::occupation(basis, basis.state(lo + c)).expect("index in basis");
            let ep = exp_annihilation(xi, Complex64::new(1.0, 0.0), &state)?;
            let em = exp_annihilation(xi, Complex64::new(-1.0, 0.0), &state)?;
            plus.set_column(c, &ep.coeffs().rows(0, hi));
            minus.set_column(c, &em.coeffs().rows(0, hi));
        }
        let gauss = (-0.5 * xi.norm_squared()).exp();
        forms.push((plus.adjoint() * minus * Complex64::from(gauss), gauss));
    }
    Ok(forms)
}

fn params_to_state(x: &[f64]) -> DVector<Complex64> {
    DVector::from_iterator(x.len() / 2, x.chunks(2).map(|c| Complex64::new(c[0], c[1])))
}

/// x* A x for x packed as [re, im] pairs and A square.
fn packed_quadratic_form(a: &DMatrix<Complex64>, x: &[f64]) -> Complex64 {
    let k = a.nrows();
    let data = a.as_slice();
    let mut total = Complex64::new(0.0, 0.0);
    for c in 0..k {
        let col = &data[c * k..(c + 1) * k];
        let mut s = Complex64::new(0.0, 0.0);
        for (r, entry) in col.iter().enumerate() {
            s += Complex64::new(x[2 * r], -x[2 * r + 1]) * entry;
        }
        total += s * Complex64::new(x[2 * c], x[2 * c + 1]);
    }
    total
}

fn minimax_deviation(forms: &[(DMatrix<Complex64>, f64)], x: &[f64]) -> f64 {
    let norm2: f64 = x.iter().map(|v| v * v).sum();
    if norm2 < 1e-300 {
        return f64::INFINITY;
    }
    forms
        .iter()
        .map(|(a, gauss)| (packed_quadratic_form(a, x) / norm2 - gauss).norm())
        .fold(0.0, f64::max)
}

/// Searches normalized states with quanta in 1..=N for the smallest
/// [`weyl_deviation`]. The vacuum ray is excluded, since a localized
/// excitation must differ from the vacuum; N = 0 is therefore
/// [`LocalityError::NotApplicable`].
pub fn knight_search(
    s: &SpectralModel,
    b: &Region,
    basis: &Arc<FockBasis>,
    quanta: usize,
    spec: &SampleSpec,
) -> Result<KnightReport, LocalityError> {
    check_region(s, b)?;
    if basis.modes() != s.dim() {
        return Err(LocalityError::ModeMismatch { model: s.dim(), basis: basis.modes() });
    }
    if quanta == 0 {
        return Err(LocalityError::NotApplicable);
    }
    if quanta as i64 > basis.cutoff() as i64 - 2 {
        return Err(LocalityError::QuantaTooLarge { quanta, limit: basis.cutoff() as i64 - 2 });
    }
    let samples = sample_amplitudes(s, b, spec);
    let forms = sample_forms(basis, &samples, quanta)?;
    let lo = basis.grade_range(1).start;
    let k = basis.grade_range(quanta).end - lo;
    let objective = |x: &[f64]| minimax_deviation(&forms, x);

    let mut rng = ChaCha8Rng::seed_from_u64(spec.seed);
    let opts = NelderMeadOptions { initial_step: 0.2, max_evals: 4000 * (k + 1), f_tol: 1e-13, x_tol: 1e-8 };
    let mut best: Option<(f64, Vec<f64>)> = None;
    let mut evaluations = 0;
    let mut budget_exhausted = false;
    for _ in 0..KNIGHT_STARTS {
        let x0: Vec<f64> = (0..2 * k).map(|_| StandardNormal.sample(&mut rng)).collect();
        let m = nelder_mead_restarts(objective, &x0, &opts, 8);
        evaluations += m.evals;
        budget_exhausted |= !m.converged;
        if best.as_ref().is_none_or(|(v, _)| m.value < *v) {
            best = Some((m.value, m.x));
        }
    }
    let (min_residual, x) = best.expect("at least one start");
    let v = params_to_state(&x);
    let v = &v / Complex64::from(v.norm());
    let mut coeffs = DVector::zeros(basis.dim());
    coeffs.rows_mut(lo, k).copy_from(&v);
    Ok(KnightReport {
        min_residual,
        argmin: FockVector::new(basis, coeffs)?,
        quanta,
        seed: spec.seed,
        starts: KNIGHT_STARTS,
        evaluations,
        budget_exhausted,
    })
}

/// min over unit ξ' of max_s e^{−‖ξ_s‖²/2}|ξ̄'·ξ_s|², the one-quantum
/// Weyl deviation in closed form, with the minimizing ξ'.
pub fn one_quantum_minimum(s: &SpectralModel, b: &Region, spec: &SampleSpec) -> Result<(f64, ComplexAmplitude), LocalityError> {
    check_region(s, b)?;
    let n = s.dim();
    // e^{−‖ξ‖²/4} ξ, so each term is a plain squared overlap
    let weighted: Vec<Vec<Complex64>> = sample_amplitudes(s, b, spec)
        .iter()
        .map(|xi| {
            let w = (-0.25 * xi.norm_squared()).exp();
            xi.0.iter().map(|c| c * w).collect()
        })
        .collect();
    let objective = |x: &[f64]| {
        let norm2: f64 = x.iter().map(|v| v * v).sum();
        if norm2 < 1e-300 {
            return f64::INFINITY;
        }
        weighted
            .iter()
            .map(|zeta| {
                let overlap: Complex64 = zeta.iter().enumerate().map(|(j, z)| Complex64::new(x[2 * j], -x[2 * j + 1]) * z).sum();
                overlap.norm_sqr()
            })
            .fold(0.0, f64::max)
            / norm2
    };
    let mut rng = ChaCha8Rng::seed_from_u64(spec.seed ^ 0xA11A);
    let opts = NelderMeadOptions { initial_step: 0.2, max_evals: 4000 * (n + 1), f_tol: 1e-13, x_tol: 1e-8 };
    let mut best: Option<(f64, Vec<f64>)> = None;
    for _ in 0..ANALYTIC_STARTS {
        let x0: Vec<f64> = (0..2 * n).map(|_| StandardNormal.sample(&mut rng)).collect();
        let m = nelder_mead_restarts(objective, &x0, &opts, 8);
        if best.as_ref().is_none_or(|(v, _)| m.value < *v) {
            best = Some((m.value, m.x));
        }
    }
    let (value, x) = best.expect("at least one start");
    let v = params_to_state(&x);
    Ok((value, ComplexAmplitude(&v / Complex64::from(v.norm()))))
}

#[derive(Debug, Clone, Serialize)]
pub struct DegreeProbe {
    pub degree: usize,
    pub top_grade: usize,
    /// Chebyshev coefficients [re, im] of f on [−1, 1].
    pub chebyshev: Vec<[f64; 2]>,
    /// The same polynomial in the monomial basis.
    pub monomial: Vec<[f64; 2]>,
    pub warning: Option<TruncationWarning>,
}

/// Fits f(t) = ⟨ψ|W_F(tξ)|ψ⟩ e^{t²‖ξ‖²/2} on 4N+5 Chebyshev nodes in
/// [−1, 1], using the truncated Weyl operator, and reports the highest
/// coefficient above 1e−6 of the largest. For ψ with at most N quanta
/// the exact f is a polynomial of degree ≤ 2N. A warning is attached when
/// ‖ξ‖² > M/4 or when the tail bound at M − N exceeds a tenth of the floor.
pub fn polynomial_degree_probe(psi: &FockVector, xi: &ComplexAmplitude) -> Result<DegreeProbe, LocalityError> {
    let basis = psi.basis();
    let top_grade = psi.top_grade(0.0);
    let m = 4 * top_grade + 5;
    let warning = TruncationWarning::check(xi, basis.cutoff()).or_else(|| {
        // the fit is only as good as the truncated tail beyond grade N
        let slack = basis.cutoff().saturating_sub(top_grade);
        (coherent_tail_bound(xi.norm(), slack) > 0.1 * DEGREE_FLOOR)
            .then_some(TruncationWarning { norm_squared: xi.norm_squared(), cutoff: basis.cutoff() })
    });

    // W(tξ) = exp(t(a† − a)): one eigendecomposition serves every node
    let a = annihilate(basis, xi)?;
    let generator = (create(basis, xi)?.matrix() - a.matrix()) * Complex64::i();
    let eig = nalgebra::SymmetricEigen::new(generator);
    let projected = eig.eigenvectors.adjoint() * psi.coeffs();
    let weights: Vec<f64> = projected.iter().map(|c| c.norm_sqr()).collect();
    let r2 = xi.norm_squared();

    let nodes: Vec<f64> = (0..m).map(|k| (PI * (k as f64 + 0.5) / m as f64).cos()).collect();
    let values: Vec<Complex64> = nodes
        .iter()
        .map(|&t| {
            let ev: Complex64 = weights
                .iter()
                .zip(eig.eigenvalues.iter())
                .map(|(w, h)| Complex64::from_polar(*w, -h * t))
                .sum();
            ev * (0.5 * t * t * r2).exp()
        })
        .collect();

    let mut cheb: Vec<Complex64> = (0..m)
        .map(|j| {
            let sum: Complex64 = (0..m).map(|k| values[k] * (PI * j as f64 * (k as f64 + 0.5) / m as f64).cos()).sum();
            sum * (2.0 / m as f64)
        })
        .collect();
    cheb[0] *= 0.5;
    let largest = cheb.iter().fold(0.0f64, |acc, c| acc.max(c.norm()));
    let degree = (0..m).rev().find(|&j| cheb[j].norm() > DEGREE_FLOOR * largest).unwrap_or(0);
    let monomial = chebyshev_to_monomial(&cheb);
    Ok(DegreeProbe {
        degree,
        top_grade,
        chebyshev: cheb.iter().map(|c| [c.re, c.im]).collect(),
        monomial: monomial.iter().map(|c| [c.re, c.im]).collect(),
        warning,
    })
}

fn chebyshev_to_monomial(cheb: &[Complex64]) -> Vec<Complex64> {
    let m = cheb.len();
    let mut out = vec![Complex64::new(0.0, 0.0); m];
    let mut prev = vec![0.0; m];
    let mut cur = vec![0.0; m];
    for (j, c) in cheb.iter().enumerate() {
        let next = match j {
            0 => {
                let mut t = vec![0.0; m];
                t[0] = 1.0;
                t
            }
            1 => {
                let mut t = vec![0.0; m];
                t[1] = 1.0;
                t
            }
            _ => {
                let mut t = vec![0.0; m];
                for i in 0..m - 1 {
                    t[i + 1] += 2.0 * cur[i];
                }
                for i in 0..m {
                    t[i] -= prev[i];
                }
                t
            }
        };
        for i in 0..m {
            out[i] += c * next[i];
        }
        prev = std::mem::replace(&mut cur, next);
    }
    out
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct NewtonWignerDemo {
    pub excited: f64,
    pub vacuum: f64,
    pub difference: f64,
    /// ((Ω^{−1/2})_ij)².
    pub closed_form: f64,
}

/// ⟨1_i|Q_j²|1_i⟩ against ⟨0|Q_j²|0⟩: a quantum placed at site i changes
/// the position spread at site j whenever (Ω^{−1/2})_ij ≠ 0.
pub fn newton_wigner_demo(
    s: &SpectralModel,
    i: usize,
    j: usize,
    basis: &Arc<FockBasis>,
) -> Result<NewtonWignerDemo, LocalityError> {
    let n = s.dim();
    if basis.modes() != n {
        return Err(LocalityError::ModeMismatch { model: n, basis: basis.modes() });
    }
    if i >= n || j >= n {
        return Err(LocalityError::BadRegion(format!("site outside 0..{n}")));
    }
    if i == j {
        return Err(LocalityError::SameSite);
    }
    if basis.cutoff() < 2 {
        return Err(LocalityError::QuantaTooLarge { quanta: 1, limit: basis.cutoff() as i64 - 1 });
    }
    // η·Q = (a(α) + a†(α))/√2 with α = Ω^{-1/2}e_j, applied to a†(e_i)|0⟩
    let alpha = ComplexAmplitude::from_real(&s.omega_inv_sqrt().column(j).into_owned());
    let mut occupation = vec![0u32; n];
    occupation[i] = 1;
    let one = FockVector::occupation(basis, &occupation).expect("cutoff ≥ 1");
    let lowered = apply_annihilation(&alpha, &one)?;
    let raised = apply_creation(&alpha, &one)?;
    let excited = 0.5 * (lowered.coeffs() + raised.coeffs()).norm_squared();
    let vac = vacuum_covariance(s, j, j);
    Ok(NewtonWignerDemo {
        excited,
        vacuum: vac,
        difference: excited - vac,
        closed_form: s.omega_inv_sqrt()[(i, j)].powi(2),
    })
}

/// ⟨ψ|W_F(ξ)|ψ⟩ from the truncated Weyl matrix.
pub fn truncated_weyl_expectation(psi: &FockVector, xi: &ComplexAmplitude) -> Result<Complex64, LocalityError> {
    let w = weyl(psi.basis(), xi)?;
    Ok(crate::fock::expectation(psi, &w.value)?)
}
