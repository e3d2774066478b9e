//! Concrete oscillator systems: rings, d-dimensional lattices and custom
//! coupling matrices, their dispersion relations, and infrared diagnostics
//! for scale-space membership on the infinite lattice.

use nalgebra::DMatrix;
use num_complex::Complex64;
use serde::{Deserialize, Serialize};
use std::f64::consts::PI;
use thiserror::Error;

use crate::quadrature::{integrate_box, QuadratureError};
use crate::spectral::{decompose, CouplingMatrix, SpectralError, SpectralModel};

/// Slope threshold, relative to the integral scale, above which a family
/// of partial integrals is read as divergent.
pub const DIVERGENCE_SLOPE_FRACTION: f64 = 0.05;
/// Maximum residual of the log-linear fit, as a fraction of the range of
/// the partial integrals, for a log-divergence verdict.
pub const FIT_RESIDUAL_FRACTION: f64 = 0.10;
/// Tail increments shrinking by at most 2^{-0.05} per halving of ε count
/// as non-decaying (divergent).
pub const DIVERGENT_DECAY_EXPONENT: f64 = 0.05;
/// Tail increments shrinking by at least 2^{-0.15} per halving count as
/// a convergent geometric tail.
pub const CONVERGENT_DECAY_EXPONENT: f64 = 0.15;
/// Cutoffs ε = 2^{-k} used by [`classify_scale_membership`].
pub const CUTOFF_EXPONENTS: std::ops::RangeInclusive<i32> = 3..=12;
/// Relative accuracy requested from each quadrature shell.
pub const SHELL_TOLERANCE: f64 = 1e-9;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum ModelError {
    #[error("invalid model: {0}")]
    Invalid(String),
    #[error("dispersion and quadrature need a periodic ring or lattice")]
    NotTranslationInvariant,
    #[error("wave vector has {got} components, model dimension is {expected}")]
    BadWaveVector { expected: usize, got: usize },
    #[error("cutoff {0} outside (0, 1/4]")]
    BadCutoff(f64),
    #[error("zero mode: {0}")]
    ZeroMode(SpectralError),
    #[error(transparent)]
    Spectral(#[from] SpectralError),
    #[error("quadrature failed: {0}")]
    QuadratureFailure(#[from] QuadratureError),
    #[error("classification inconclusive (slope {slope:e}, fit residual {residual_fraction:.3} of range)")]
    Inconclusive { slope: f64, residual_fraction: f64 },
}

fn default_periodic() -> bool {
    true
}

/// A concrete oscillator system.
///
/// Serialized with a `variant` tag, e.g.
/// `{"variant":"ring","n":4,"omega_w":0.5,"omega_n":0.5}`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "variant", rename_all = "lowercase", deny_unknown_fields)]
pub enum ModelSpec {
    Ring {
        n: usize,
        omega_w: f64,
        omega_n: f64,
    },
    Lattice {
        d: usize,
        extent: Vec<usize>,
        omega_w: f64,
        omega_n: f64,
        #[serde(default = "default_periodic")]
        periodic: bool,
    },
    Custom {
        matrix: Vec<Vec<f64>>,
    },
}

impl ModelSpec {
    /// Ring parametrized by ω₀ and ν = ω_n²/ω₀².
    pub fn ring_from_nu(n: usize, omega0: f64, nu: f64) -> Self {
        let (omega_w, omega_n) = split_couplings(1, omega0, nu);
        Self::Ring { n, omega_w, omega_n }
    }

    /// Periodic cubic lattice with `side` sites per axis, parametrized by ω₀ and ν.
    pub fn lattice_from_nu(d: usize, side: usize, omega0: f64, nu: f64) -> Self {
        let (omega_w, omega_n) = split_couplings(d, omega0, nu);
        Self::Lattice { d, extent: vec![side; d], omega_w, omega_n, periodic: true }
    }

    pub fn validate(&self) -> Result<(), ModelError> {
        let check_freqs = |w: f64, c: f64| {
            if !(w.is_finite() && c.is_finite()) || w < 0.0 || c < 0.0 {
                return Err(ModelError::Invalid("omega_w and omega_n must be finite and ≥ 0".into()));
            }
            if w == 0.0 && c == 0.0 {
                return Err(ModelError::Invalid("omega_w and omega_n cannot both vanish".into()));
            }
            Ok(())
        };
        match self {
            Self::Ring { n, omega_w, omega_n } => {
                if *n == 0 {
                    return Err(ModelError::Invalid("ring needs at least one site".into()));
                }
                check_freqs(*omega_w, *omega_n)
            }
            Self::Lattice { d, extent, omega_w, omega_n, .. } => {
                if *d == 0 || extent.len() != *d || extent.iter().any(|&e| e == 0) {
                    return Err(ModelError::Invalid("lattice needs d ≥ 1 and d positive extents".into()));
                }
                check_freqs(*omega_w, *omega_n)
            }
            Self::Custom { matrix } => {
                CouplingMatrix::from_rows(matrix)?;
                Ok(())
            }
        }
    }

    /// Spatial dimension: 1 for rings, d for lattices, `None` for custom matrices.
    pub fn spatial_dim(&self) -> Option<usize> {
        match self {
            Self::Ring { .. } => Some(1),
            Self::Lattice { d, .. } => Some(*d),
            Self::Custom { .. } => None,
        }
    }

    pub fn site_count(&self) -> usize {
        match self {
            Self::Ring { n, .. } => *n,
            Self::Lattice { extent, .. } => extent.iter().product(),
            Self::Custom { matrix } => matrix.len(),
        }
    }

    fn couplings(&self) -> Option<(f64, f64)> {
        match self {
            Self::Ring { omega_w, omega_n, .. } | Self::Lattice { omega_w, omega_n, .. } => {
                Some((*omega_w, *omega_n))
            }
            Self::Custom { .. } => None,
        }
    }

    /// ω₀² = ω_w² + 2d ω_n².
    pub fn omega0_squared(&self) -> Option<f64> {
        let d = self.spatial_dim()? as f64;
        let (w, c) = self.couplings()?;
        Some(w * w + 2.0 * d * c * c)
    }

    /// ν = ω_n² / ω₀².
    pub fn nu(&self) -> Option<f64> {
        let (_, c) = self.couplings()?;
        Some(c * c / self.omega0_squared()?)
    }

    /// True when ν sits at its maximum 1/(2d), i.e. ω_w = 0.
    pub fn has_zero_mode(&self) -> bool {
        matches!(self.couplings(), Some((w, _)) if w == 0.0)
    }

    fn is_translation_invariant(&self) -> bool {
        match self {
            Self::Ring { .. } => true,
            Self::Lattice { periodic, .. } => *periodic,
            Self::Custom { .. } => false,
        }
    }
}

fn split_couplings(d: usize, omega0: f64, nu: f64) -> (f64, f64) {
    let w0sq = omega0 * omega0;
    let omega_n = (nu * w0sq).sqrt();
    let omega_w = (w0sq * (1.0 - 2.0 * d as f64 * nu)).max(0.0).sqrt();
    (omega_w, omega_n)
}

/// Row-major linear index of a lattice site.
pub fn site_index(extent: &[usize], coords: &[usize]) -> usize {
    coords.iter().zip(extent).fold(0, |acc, (&c, &e)| acc * e + c)
}

/// Inverse of [`site_index`].
pub fn site_coords(extent: &[usize], mut index: usize) -> Vec<usize> {
    let mut coords = vec![0; extent.len()];
    for axis in (0..extent.len()).rev() {
        coords[axis] = index % extent[axis];
        index /= extent[axis];
    }
    coords
}

/// Assembles Ω² for the model. Neighbour contributions accumulate, so a
/// periodic axis of length 1 or 2 folds both neighbours onto the same entry.
pub fn build_omega_squared(m: &ModelSpec) -> Result<CouplingMatrix, ModelError> {
    m.validate()?;
    let matrix = match m {
        ModelSpec::Custom { matrix } => return Ok(CouplingMatrix::from_rows(matrix)?),
        ModelSpec::Ring { n, omega_n, .. } => {
            stencil(&[*n], true, m.omega0_squared().unwrap(), omega_n * omega_n)
        }
        ModelSpec::Lattice { extent, omega_n, periodic, .. } => {
            stencil(extent, *periodic, m.omega0_squared().unwrap(), omega_n * omega_n)
        }
    };
    Ok(CouplingMatrix::new(matrix)?)
}

fn stencil(extent: &[usize], periodic: bool, diag: f64, hop: f64) -> DMatrix<f64> {
    let sites: usize = extent.iter().product();
    let mut a = DMatrix::zeros(sites, sites);
    for i in 0..sites {
        a[(i, i)] += diag;
        let coords = site_coords(extent, i);
        for axis in 0..extent.len() {
            let len = extent[axis];
            for step in [-1isize, 1] {
                let c = coords[axis] as isize + step;
                let wrapped = if periodic {
                    c.rem_euclid(len as isize) as usize
                } else if c < 0 || c >= len as isize {
                    continue;
                } else {
                    c as usize
                };
                let mut nb = coords.clone();
                nb[axis] = wrapped;
                a[(i, site_index(extent, &nb))] -= hop;
            }
        }
    }
    a
}

/// Builds and decomposes Ω²; a semidefinite model is reported as a zero mode.
pub fn spectral_model(m: &ModelSpec) -> Result<SpectralModel, ModelError> {
    let omega2 = build_omega_squared(m)?;
    decompose(&omega2).map_err(|e| match e {
        SpectralError::NotPositiveDefinite { .. } => ModelError::ZeroMode(e),
        other => ModelError::Spectral(other),
    })
}

/// ω(k)² = ω₀²[1 − 2ν Σ_i cos 2πk_i].
pub fn dispersion(m: &ModelSpec, k: &[f64]) -> Result<f64, ModelError> {
    if !m.is_translation_invariant() {
        return Err(ModelError::NotTranslationInvariant);
    }
    let d = m.spatial_dim().unwrap();
    if k.len() != d {
        return Err(ModelError::BadWaveVector { expected: d, got: k.len() });
    }
    Ok(dispersion_unchecked(m.omega0_squared().unwrap(), m.nu().unwrap(), k))
}

fn dispersion_unchecked(w0sq: f64, nu: f64, k: &[f64]) -> f64 {
    // 1 − 2ν Σ cos = (1 − 2dν) + 4ν Σ sin²(πk): exact cancellation near k = 0
    let d = k.len() as f64;
    let sines: f64 = k.iter().map(|&ki| (PI * ki).sin().powi(2)).sum();
    (w0sq * ((1.0 - 2.0 * d * nu) + 4.0 * nu * sines)).max(0.0)
}

/// ω(k)² on the discrete reciprocal grid k = j/L of a finite periodic
/// model, in row-major site order. These are the eigenvalues of Ω².
pub fn dispersion_on_grid(m: &ModelSpec) -> Result<Vec<f64>, ModelError> {
    let extent = match m {
        ModelSpec::Ring { n, .. } => vec![*n],
        ModelSpec::Lattice { extent, periodic: true, .. } => extent.clone(),
        _ => return Err(ModelError::NotTranslationInvariant),
    };
    let sites: usize = extent.iter().product();
    (0..sites)
        .map(|i| {
            let k: Vec<f64> = site_coords(&extent, i)
                .iter()
                .zip(&extent)
                .map(|(&j, &len)| j as f64 / len as f64)
                .collect();
            dispersion(m, &k)
        })
        .collect()
}

/// A finitely supported displacement profile on ℤ^d: q = Σ c_x δ_x, with
/// Fourier transform q̂(k) = Σ c_x e^{−2πi k·x}.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CompactProfile {
    pub sites: Vec<(Vec<i64>, f64)>,
}

impl CompactProfile {
    /// δ₀ in dimension d.
    pub fn delta(d: usize) -> Self {
        Self { sites: vec![(vec![0; d], 1.0)] }
    }

    pub fn fourier(&self, k: &[f64]) -> Complex64 {
        self.sites
            .iter()
            .map(|(x, c)| {
                let phase: f64 = x.iter().zip(k).map(|(&xi, &ki)| xi as f64 * ki).sum();
                Complex64::from_polar(*c, -2.0 * PI * phase)
            })
            .sum()
    }
}

/// ∫ over the Brillouin zone [−½, ½]^d minus the cube |k|_∞ < ε of
/// |q̂(k)|² ω(k)^{2λ} dk.
///
/// The excluded neighbourhood is a sup-norm cube; the domain is split into
/// dyadic cubic shells around k = 0, each integrated by adaptive
/// tensor-product Gauss–Legendre.
pub fn infrared_partial_integral<F>(
    m: &ModelSpec,
    lambda: f64,
    qhat: F,
    eps: f64,
) -> Result<f64, ModelError>
where
    F: Fn(&[f64]) -> Complex64,
{
    if !(eps > 0.0 && eps <= 0.25) {
        return Err(ModelError::BadCutoff(eps));
    }
    let radii = shell_radii(eps);
    shell_integrals(m, lambda, &qhat, &radii).map(|parts| parts.iter().sum())
}

fn shell_radii(eps: f64) -> Vec<f64> {
    let mut radii = vec![0.5];
    let mut r = 0.5;
    while r * 0.5 > eps * (1.0 + 1e-12) {
        r *= 0.5;
        radii.push(r);
    }
    if (r - eps).abs() > 1e-15 * eps {
        radii.push(eps);
    }
    radii
}

fn shell_integrals<F>(m: &ModelSpec, lambda: f64, qhat: &F, radii: &[f64]) -> Result<Vec<f64>, ModelError>
where
    F: Fn(&[f64]) -> Complex64,
{
    if !m.is_translation_invariant() {
        return Err(ModelError::NotTranslationInvariant);
    }
    m.validate()?;
    let d = m.spatial_dim().unwrap();
    let w0sq = m.omega0_squared().unwrap();
    let nu = m.nu().unwrap();
    let integrand = |k: &[f64]| {
        let w2 = dispersion_unchecked(w0sq, nu, k);
        qhat(k).norm_sqr() * w2.powf(lambda)
    };
    radii
        .windows(2)
        .map(|pair| {
            let (outer, inner) = (pair[0], pair[1]);
            let mut total = 0.0;
            for (lo, hi) in shell_boxes(d, inner, outer) {
                total += integrate_box(&integrand, &lo, &hi, SHELL_TOLERANCE)?;
            }
            Ok(total)
        })
        .collect()
}

/// The 3^d − 1 boxes tiling {inner ≤ |k|_∞ ≤ outer}.
fn shell_boxes(d: usize, inner: f64, outer: f64) -> Vec<(Vec<f64>, Vec<f64>)> {
    let segments = [(-outer, -inner), (-inner, inner), (inner, outer)];
    let mut boxes = Vec::new();
    for code in 0..3usize.pow(d as u32) {
        let mut c = code;
        let mut lo = Vec::with_capacity(d);
        let mut hi = Vec::with_capacity(d);
        let mut all_middle = true;
        for _ in 0..d {
            let seg = segments[c % 3];
            all_middle &= c % 3 == 1;
            lo.push(seg.0);
            hi.push(seg.1);
            c /= 3;
        }
        if !all_middle {
            boxes.push((lo, hi));
        }
    }
    boxes
}

/// Numerical verdict on whether ∫|q̂|² ω^{2λ} is finite.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(tag = "verdict", rename_all = "lowercase")]
pub enum ScaleMembership {
    Convergent { value: f64 },
    Divergent { log_slope: f64 },
}

/// Partial integrals and fit diagnostics behind a membership verdict.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct MembershipReport {
    pub cutoffs: Vec<f64>,
    pub partial_integrals: Vec<f64>,
    pub log_slope: f64,
    pub intercept: f64,
    pub integral_scale: f64,
    pub residual_fraction: f64,
    /// a in Δ_{k+1}/Δ_k ≈ 2^{-a} over the last increments: a > 0 for
    /// convergent tails, a ≈ 0 for logarithmic and a < 0 for power growth.
    pub decay_exponent: f64,
    /// `None` when the data fit neither a convergent nor a divergent pattern.
    pub membership: Option<ScaleMembership>,
}

/// Computes partial integrals at ε = 2^{-3} … 2^{-12} and classifies them.
///
/// The partial integrals are fitted linearly against log(1/ε). A slope at
/// most [`DIVERGENCE_SLOPE_FRACTION`] of the largest partial integral, or
/// tail increments decaying with exponent ≥ [`CONVERGENT_DECAY_EXPONENT`],
/// means convergence; the value is then extrapolated with Aitken's Δ².
/// Otherwise growing increments, or non-decaying ones with a log-linear fit
/// residual within [`FIT_RESIDUAL_FRACTION`] of the range, mean divergence.
/// Anything in between is inconclusive.
pub fn scale_membership_report<F>(m: &ModelSpec, lambda: f64, qhat: F) -> Result<MembershipReport, ModelError>
where
    F: Fn(&[f64]) -> Complex64,
{
    let last = *CUTOFF_EXPONENTS.end();
    let radii: Vec<f64> = (1..=last).map(|k| 0.5f64.powi(k)).collect();
    let shells = shell_integrals(m, lambda, &qhat, &radii)?;

    let mut cutoffs = Vec::new();
    let mut partials = Vec::new();
    let mut running = 0.0;
    for (idx, shell) in shells.iter().enumerate() {
        running += shell;
        // shell idx spans [2^{-(idx+2)}, 2^{-(idx+1)}]
        let exponent = idx as i32 + 2;
        if CUTOFF_EXPONENTS.contains(&exponent) {
            cutoffs.push(0.5f64.powi(exponent));
            partials.push(running);
        }
    }

    let xs: Vec<f64> = cutoffs.iter().map(|e| (1.0 / e).ln()).collect();
    let (slope, intercept) = least_squares(&xs, &partials);
    let scale = partials.iter().fold(0.0f64, |a, &b| a.max(b.abs()));
    let (lo, hi) = partials.iter().fold((f64::INFINITY, f64::NEG_INFINITY), |(lo, hi), &v| (lo.min(v), hi.max(v)));
    let range = hi - lo;
    let max_dev = xs
        .iter()
        .zip(&partials)
        .map(|(x, y)| (y - (intercept + slope * x)).abs())
        .fold(0.0, f64::max);
    let residual_fraction = if range > 0.0 { max_dev / range } else { 0.0 };

    let increments: Vec<f64> = partials.windows(2).map(|w| w[1] - w[0]).collect();
    let decay_exponent = tail_decay_exponent(&increments);

    let membership = if slope <= DIVERGENCE_SLOPE_FRACTION * scale || decay_exponent >= CONVERGENT_DECAY_EXPONENT {
        Some(ScaleMembership::Convergent { value: aitken(&partials) })
    } else if decay_exponent < 0.0 || (decay_exponent <= DIVERGENT_DECAY_EXPONENT && residual_fraction <= FIT_RESIDUAL_FRACTION) {
        Some(ScaleMembership::Divergent { log_slope: slope })
    } else {
        None
    };

    Ok(MembershipReport {
        cutoffs,
        partial_integrals: partials,
        log_slope: slope,
        intercept,
        integral_scale: scale,
        residual_fraction,
        decay_exponent,
        membership,
    })
}

/// [`scale_membership_report`] reduced to its verdict.
pub fn classify_scale_membership<F>(m: &ModelSpec, lambda: f64, qhat: F) -> Result<ScaleMembership, ModelError>
where
    F: Fn(&[f64]) -> Complex64,
{
    let report = scale_membership_report(m, lambda, qhat)?;
    report.membership.ok_or(ModelError::Inconclusive {
        slope: report.log_slope,
        residual_fraction: report.residual_fraction,
    })
}

fn least_squares(xs: &[f64], ys: &[f64]) -> (f64, f64) {
    let n = xs.len() as f64;
    let mx = xs.iter().sum::<f64>() / n;
    let my = ys.iter().sum::<f64>() / n;
    let sxy: f64 = xs.iter().zip(ys).map(|(x, y)| (x - mx) * (y - my)).sum();
    let sxx: f64 = xs.iter().map(|x| (x - mx).powi(2)).sum();
    let slope = sxy / sxx;
    (slope, my - slope * mx)
}

/// −log₂ of the geometric mean ratio of the last three increments;
/// +∞ when the tail has stopped growing altogether.
fn tail_decay_exponent(increments: &[f64]) -> f64 {
    let tail = &increments[increments.len().saturating_sub(4)..];
    if tail.iter().any(|&d| d <= 0.0) {
        return f64::INFINITY;
    }
    let ratios = tail.len() - 1;
    let log_ratio: f64 = tail.windows(2).map(|w| (w[1] / w[0]).log2()).sum();
    -log_ratio / ratios as f64
}

fn aitken(values: &[f64]) -> f64 {
    let n = values.len();
    let last = values[n - 1];
    if n < 3 {
        return last;
    }
    let d1 = values[n - 2] - values[n - 3];
    let d2 = last - values[n - 2];
    let denom = d2 - d1;
    if d1 == 0.0 || denom.abs() < 1e-300 {
        return last;
    }
    let ratio = d2 / d1;
    if !(0.0..1.0).contains(&ratio) {
        return last;
    }
    last - d2 * d2 / denom
}
