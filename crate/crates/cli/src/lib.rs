//! Subcommand implementations behind the `bosefield` binary.
//!
//! Each command turns a validated [`RunConfig`] into an [`Outcome`]: a JSON
//! document, a CSV projection of its main table, and an exit status. Nothing
//! here touches the filesystem except [`load_model`].

use std::fmt::Write as _;
use std::path::Path;

use bosefield::classical::{apply_j, flow, hamiltonian, symplectic_form, PhaseVector};
use bosefield::fock::{
    apply_creation, coherent_tail_bound, fock_dimension, vacuum, FockBasis, FockError, FockVector, FockVectorRecord,
    TruncationWarning, DEFAULT_MAX_DIM,
};
use bosefield::locality::{
    knight_search, newton_wigner_demo, polynomial_degree_probe, sample_amplitudes, strongly_nonlocal, LocalityError,
    LocalityVerdict, NewtonWignerDemo, Region, SampleSpec, DEGREE_FLOOR,
};
use bosefield::models::{
    build_omega_squared, dispersion_on_grid, scale_membership_report, spectral_model, CompactProfile, ModelError,
    ModelSpec, ScaleMembership,
};
use bosefield::spectral::SpectralModel;
use bosefield::ComplexAmplitude;
use nalgebra::{DVector, SymmetricEigen};
use num_complex::Complex64;
use serde::Serialize;
use thiserror::Error;

pub const SCHEMA: &str = "bosefield/1";
pub const MAX_DIM_ENV: &str = "BOSEFIELD_MAX_DIM";
/// Relative tolerance for the grid-versus-eigenvalue cross-check.
pub const SPECTRUM_TOLERANCE: f64 = 1e-8;
/// Absolute tolerance for the Fock-versus-closed-form vacuum checks.
pub const VACUUM_TOLERANCE: f64 = 1e-9;
/// Norm of the amplitude used by the polynomial-degree probe.
pub const PROBE_NORM: f64 = 0.5;
/// The probe diagonalizes a dense generator, so its basis is capped here.
pub const PROBE_MAX_DIM: usize = 2000;

#[derive(Debug, Error)]
pub enum CliError {
    #[error("{0}")]
    Validation(String),
    #[error("{0}")]
    Numerical(String),
    #[error("i/o: {0}")]
    Io(#[from] std::io::Error),
}

impl CliError {
    pub fn exit_code(&self) -> i32 {
        match self {
            Self::Validation(_) | Self::Io(_) => 2,
            Self::Numerical(_) => 3,
        }
    }
}

impl From<ModelError> for CliError {
    fn from(e: ModelError) -> Self {
        match e {
            ModelError::ZeroMode(_) | ModelError::QuadratureFailure(_) => Self::Numerical(e.to_string()),
            other => Self::Validation(other.to_string()),
        }
    }
}

impl From<LocalityError> for CliError {
    fn from(e: LocalityError) -> Self {
        match e {
            LocalityError::Fock(FockError::DimensionTooLarge { .. }) => Self::Validation(e.to_string()),
            LocalityError::Fock(_) => Self::Numerical(e.to_string()),
            other => Self::Validation(other.to_string()),
        }
    }
}

impl From<FockError> for CliError {
    fn from(e: FockError) -> Self {
        LocalityError::from(e).into()
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Status {
    Ok,
    /// Output was produced but carries a zero-mode or truncation warning.
    Warning,
    Inconclusive,
}

impl Status {
    pub fn exit_code(self) -> i32 {
        match self {
            Self::Ok => 0,
            Self::Warning => 3,
            Self::Inconclusive => 4,
        }
    }
}

#[derive(Debug, Clone)]
pub struct Outcome {
    pub json: String,
    pub csv: String,
    pub status: Status,
}

/// Subcommand parameters, already parsed from flags.
#[derive(Debug, Clone, PartialEq, Serialize)]
#[serde(tag = "command", rename_all = "lowercase")]
pub enum Params {
    Dispersion,
    Evolve { q: Option<Vec<f64>>, p: Option<Vec<f64>>, t_end: f64, steps: usize },
    Locality { region: Vec<usize>, quanta: usize, cutoff: Option<usize>, seed: u64 },
    Infrared { lambda: f64 },
    Vacuum { region: Option<Vec<usize>>, cutoff: usize },
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct RunConfig {
    pub model: ModelSpec,
    pub params: Params,
    pub max_dim: usize,
}

impl RunConfig {
    pub fn new(model: ModelSpec, params: Params, max_dim: usize) -> Result<Self, CliError> {
        let config = Self { model, params, max_dim };
        config.validate()?;
        Ok(config)
    }

    fn validate(&self) -> Result<(), CliError> {
        self.model.validate()?;
        let n = self.model.site_count();
        let check_sites = |sites: &[usize]| -> Result<(), CliError> {
            Region::new(n, sites)?;
            Ok(())
        };
        match &self.params {
            Params::Dispersion => {}
            Params::Evolve { q, p, t_end, steps } => {
                for v in [q, p].into_iter().flatten() {
                    if v.len() != n {
                        return Err(CliError::Validation(format!("initial vector has {} entries, model has {n} sites", v.len())));
                    }
                    if v.iter().any(|x| !x.is_finite()) {
                        return Err(CliError::Validation("initial vector must be finite".into()));
                    }
                }
                if !t_end.is_finite() {
                    return Err(CliError::Validation("t-end must be finite".into()));
                }
                if *steps == 0 {
                    return Err(CliError::Validation("steps must be positive".into()));
                }
            }
            Params::Locality { region, quanta, cutoff, .. } => {
                check_sites(region)?;
                if *quanta == 0 {
                    return Err(CliError::Validation("quanta must be at least 1".into()));
                }
                if let Some(m) = cutoff {
                    if quanta + 2 > *m {
                        return Err(CliError::Validation(format!("quanta {quanta} needs cutoff ≥ {}", quanta + 2)));
                    }
                }
            }
            Params::Infrared { lambda } => {
                if !lambda.is_finite() {
                    return Err(CliError::Validation("lambda must be finite".into()));
                }
                if self.model.spatial_dim().is_none() {
                    return Err(CliError::Validation("infrared needs a ring or lattice model".into()));
                }
            }
            Params::Vacuum { region, cutoff } => {
                if let Some(r) = region {
                    check_sites(r)?;
                }
                if *cutoff < 2 {
                    return Err(CliError::Validation("vacuum needs cutoff ≥ 2".into()));
                }
            }
        }
        Ok(())
    }
}

/// Parses `--model`: inline JSON when it starts with `{`, a file path otherwise.
pub fn load_model(arg: &str) -> Result<ModelSpec, CliError> {
    let text = if arg.trim_start().starts_with('{') {
        arg.to_string()
    } else {
        std::fs::read_to_string(Path::new(arg)).map_err(|e| CliError::Validation(format!("cannot read model {arg}: {e}")))?
    };
    serde_json::from_str(&text).map_err(|e| CliError::Validation(format!("bad model JSON: {e}")))
}

/// Fock dimension cap from the environment, defaulting to [`DEFAULT_MAX_DIM`].
pub fn max_dim_from_env() -> Result<usize, CliError> {
    match std::env::var(MAX_DIM_ENV) {
        Ok(v) => v
            .trim()
            .parse()
            .map_err(|_| CliError::Validation(format!("{MAX_DIM_ENV} must be a positive integer, got {v:?}"))),
        Err(_) => Ok(DEFAULT_MAX_DIM),
    }
}

pub fn run(config: &RunConfig) -> Result<Outcome, CliError> {
    match &config.params {
        Params::Dispersion => cmd_dispersion(config),
        Params::Evolve { q, p, t_end, steps } => cmd_evolve(config, q.as_deref(), p.as_deref(), *t_end, *steps),
        Params::Locality { region, quanta, cutoff, seed } => cmd_locality(config, region, *quanta, *cutoff, *seed),
        Params::Infrared { lambda } => cmd_infrared(config, *lambda),
        Params::Vacuum { region, cutoff } => cmd_vacuum(config, region.as_deref(), *cutoff),
    }
}

#[derive(Serialize)]
struct Envelope<'a, T: Serialize> {
    schema: &'static str,
    config: &'a RunConfig,
    #[serde(flatten)]
    body: T,
}

fn render<T: Serialize>(config: &RunConfig, body: T) -> String {
    let mut s = serde_json::to_string_pretty(&Envelope { schema: SCHEMA, config, body }).expect("serializable");
    s.push('\n');
    s
}

fn csv_line(out: &mut String, fields: impl IntoIterator<Item = String>) {
    let line: Vec<String> = fields.into_iter().collect();
    writeln!(out, "{}", line.join(",")).expect("string write");
}

fn model_for(config: &RunConfig) -> Result<SpectralModel, CliError> {
    Ok(spectral_model(&config.model)?)
}

#[derive(Serialize)]
struct DispersionRow {
    k: Vec<f64>,
    omega_squared: f64,
}

#[derive(Serialize)]
struct DispersionBody {
    rows: Vec<DispersionRow>,
    eigenvalue_check: bool,
    max_eigenvalue_error: f64,
    zero_mode: bool,
}

fn cmd_dispersion(config: &RunConfig) -> Result<Outcome, CliError> {
    let m = &config.model;
    let values = dispersion_on_grid(m)?;
    let extent = match m {
        ModelSpec::Ring { n, .. } => vec![*n],
        ModelSpec::Lattice { extent, .. } => extent.clone(),
        ModelSpec::Custom { .. } => unreachable!("rejected by dispersion_on_grid"),
    };
    let rows: Vec<DispersionRow> = values
        .iter()
        .enumerate()
        .map(|(i, &w2)| DispersionRow {
            k: bosefield::models::site_coords(&extent, i)
                .iter()
                .zip(&extent)
                .map(|(&j, &len)| j as f64 / len as f64)
                .collect(),
            omega_squared: w2,
        })
        .collect();

    let omega2 = build_omega_squared(m)?;
    let mut eigen: Vec<f64> = SymmetricEigen::new(omega2.matrix().clone()).eigenvalues.iter().copied().collect();
    let mut grid = values.clone();
    eigen.sort_by(f64::total_cmp);
    grid.sort_by(f64::total_cmp);
    let scale = m.omega0_squared().unwrap_or(1.0).max(f64::MIN_POSITIVE);
    let max_err = eigen.iter().zip(&grid).map(|(a, b)| (a - b).abs()).fold(0.0, f64::max);
    let zero_mode = m.has_zero_mode();

    let mut csv = String::new();
    let d = extent.len();
    csv_line(&mut csv, (0..d).map(|i| format!("k{i}")).chain(["omega_squared".to_string()]));
    for row in &rows {
        csv_line(&mut csv, row.k.iter().map(|k| k.to_string()).chain([row.omega_squared.to_string()]));
    }
    let body = DispersionBody {
        rows,
        eigenvalue_check: max_err <= SPECTRUM_TOLERANCE * scale,
        max_eigenvalue_error: max_err,
        zero_mode,
    };
    Ok(Outcome {
        json: render(config, body),
        csv,
        status: if zero_mode { Status::Warning } else { Status::Ok },
    })
}

#[derive(Serialize)]
struct TrajectoryRow {
    t: f64,
    q: Vec<f64>,
    p: Vec<f64>,
    energy: f64,
    symplectic_residual: f64,
}

#[derive(Serialize)]
struct EvolveBody {
    rows: Vec<TrajectoryRow>,
    max_energy_drift: f64,
    max_symplectic_residual: f64,
}

fn cmd_evolve(config: &RunConfig, q: Option<&[f64]>, p: Option<&[f64]>, t_end: f64, steps: usize) -> Result<Outcome, CliError> {
    let s = model_for(config)?;
    let n = s.dim();
    let q0 = q.map(DVector::from_column_slice).unwrap_or_else(|| DVector::from_fn(n, |i, _| if i == 0 { 1.0 } else { 0.0 }));
    let p0 = p.map(DVector::from_column_slice).unwrap_or_else(|| DVector::zeros(n));
    let x0 = PhaseVector::new(q0, p0).map_err(|e| CliError::Validation(e.to_string()))?;
    let numerical = |e: bosefield::classical::ClassicalError| CliError::Numerical(e.to_string());
    // reference partner for the symplectic-invariance column
    let y0 = apply_j(&s, &x0).map_err(numerical)?;
    let sigma0 = symplectic_form(&x0, &y0).map_err(numerical)?;
    let h0 = hamiltonian(&s, &x0).map_err(numerical)?;

    let mut rows = Vec::with_capacity(steps + 1);
    for k in 0..=steps {
        let t = t_end * k as f64 / steps as f64;
        let xt = flow(&s, &x0, t).map_err(numerical)?;
        let yt = flow(&s, &y0, t).map_err(numerical)?;
        rows.push(TrajectoryRow {
            t,
            energy: hamiltonian(&s, &xt).map_err(numerical)?,
            symplectic_residual: (symplectic_form(&xt, &yt).map_err(numerical)? - sigma0).abs(),
            q: xt.q.iter().copied().collect(),
            p: xt.p.iter().copied().collect(),
        });
    }
    let drift = rows.iter().map(|r| (r.energy - h0).abs()).fold(0.0, f64::max);
    let residual = rows.iter().map(|r| r.symplectic_residual).fold(0.0, f64::max);

    let mut csv = String::new();
    csv_line(
        &mut csv,
        ["t".to_string()]
            .into_iter()
            .chain((0..n).map(|i| format!("q{i}")))
            .chain((0..n).map(|i| format!("p{i}")))
            .chain(["energy".to_string(), "symplectic_residual".to_string()]),
    );
    for r in &rows {
        csv_line(
            &mut csv,
            [r.t.to_string()]
                .into_iter()
                .chain(r.q.iter().map(|v| v.to_string()))
                .chain(r.p.iter().map(|v| v.to_string()))
                .chain([r.energy.to_string(), r.symplectic_residual.to_string()]),
        );
    }
    let body = EvolveBody { rows, max_energy_drift: drift, max_symplectic_residual: residual };
    Ok(Outcome { json: render(config, body), csv, status: Status::Ok })
}

#[derive(Serialize)]
struct SearchSummary {
    quanta: usize,
    cutoff: usize,
    min_residual: f64,
    seed: u64,
    starts: usize,
    evaluations: usize,
    budget_exhausted: bool,
    argmin: FockVectorRecord,
}

#[derive(Serialize)]
struct ProbeSummary {
    amplitude: Vec<[f64; 2]>,
    cutoff: usize,
    degree: usize,
    top_grade: usize,
    degree_bound: usize,
    within_bound: bool,
    truncation_warning: Option<TruncationWarning>,
}

/// Smallest cutoff whose tail beyond grade N is negligible at the probe's
/// coefficient floor.
pub fn probe_cutoff(norm: f64, quanta: usize) -> usize {
    let mut m = quanta + 2;
    while coherent_tail_bound(norm, m - quanta) > 0.1 * DEGREE_FLOOR {
        m += 1;
    }
    m
}

/// Copies ψ into a basis with a larger cutoff.
fn embed(psi: &FockVector, target: &std::sync::Arc<FockBasis>) -> Result<FockVector, CliError> {
    let source = psi.basis();
    let mut coeffs = DVector::zeros(target.dim());
    for i in 0..source.dim() {
        let j = target.index_of(source.state(i)).expect("target cutoff is larger");
        coeffs[j] = psi.coeffs()[i];
    }
    Ok(FockVector::new(target, coeffs)?)
}

#[derive(Serialize)]
struct LocalityBody {
    region: Region,
    verdict: LocalityVerdict,
    localizable: bool,
    search: SearchSummary,
    probe: Option<ProbeSummary>,
    probe_skipped: Option<String>,
}

fn cmd_locality(config: &RunConfig, sites: &[usize], quanta: usize, cutoff: Option<usize>, seed: u64) -> Result<Outcome, CliError> {
    let s = model_for(config)?;
    let n = s.dim();
    let region = Region::new(n, sites)?;
    let cutoff = cutoff.unwrap_or((quanta + 2).max(3));
    let basis = FockBasis::with_limit(n, cutoff, config.max_dim)?;
    let spec = SampleSpec::with_seed(seed);

    let verdict = strongly_nonlocal(&s, &region)?;
    let report = knight_search(&s, &region, &basis, quanta, &spec)?;

    // probe along the first sampled outside direction, rescaled
    let direction = sample_amplitudes(&s, &region, &spec)
        .into_iter()
        .next()
        .unwrap_or_else(|| ComplexAmplitude::basis(n, 0));
    let xi = direction.scale(Complex64::from(PROBE_NORM / direction.norm()));
    let probe_m = probe_cutoff(PROBE_NORM, quanta).max(cutoff);
    let probe_dim = fock_dimension(n, probe_m);
    let (probe, probe_skipped) = if probe_dim > PROBE_MAX_DIM.min(config.max_dim) as u128 {
        (None, Some(format!("probe basis n={n}, M={probe_m} has dimension {probe_dim}, above {}", PROBE_MAX_DIM.min(config.max_dim))))
    } else {
        let probe_basis = FockBasis::with_limit(n, probe_m, config.max_dim)?;
        let fit = polynomial_degree_probe(&embed(&report.argmin, &probe_basis)?, &xi)?;
        let summary = ProbeSummary {
            amplitude: xi.0.iter().map(|c| [c.re, c.im]).collect(),
            cutoff: probe_m,
            degree: fit.degree,
            top_grade: fit.top_grade,
            degree_bound: 2 * fit.top_grade,
            within_bound: fit.degree <= 2 * fit.top_grade,
            truncation_warning: fit.warning,
        };
        (Some(summary), None)
    };
    let warned = probe.as_ref().is_some_and(|p| p.truncation_warning.is_some());

    let mut csv = String::new();
    csv_line(
        &mut csv,
        ["strongly_nonlocal", "span_rank", "equivalence_consistent", "min_residual", "probe_degree"].map(String::from),
    );
    csv_line(
        &mut csv,
        [
            verdict.strongly_nonlocal.to_string(),
            verdict.span_rank.to_string(),
            verdict.equivalence_consistent.to_string(),
            report.min_residual.to_string(),
            probe.as_ref().map(|p| p.degree.to_string()).unwrap_or_default(),
        ],
    );
    let body = LocalityBody {
        localizable: !verdict.strongly_nonlocal,
        region,
        verdict,
        search: SearchSummary {
            quanta,
            cutoff,
            min_residual: report.min_residual,
            seed: report.seed,
            starts: report.starts,
            evaluations: report.evaluations,
            budget_exhausted: report.budget_exhausted,
            argmin: report.argmin.to_record(),
        },
        probe,
        probe_skipped,
    };
    Ok(Outcome {
        json: render(config, body),
        csv,
        status: if warned { Status::Warning } else { Status::Ok },
    })
}

#[derive(Serialize)]
struct InfraredBody {
    d: usize,
    nu: f64,
    lambda: f64,
    profile: CompactProfile,
    cutoffs: Vec<f64>,
    partial_integrals: Vec<f64>,
    log_slope: f64,
    residual_fraction: f64,
    decay_exponent: f64,
    verdict: &'static str,
    value: Option<f64>,
}

fn cmd_infrared(config: &RunConfig, lambda: f64) -> Result<Outcome, CliError> {
    let m = &config.model;
    let d = m.spatial_dim().expect("validated");
    let profile = CompactProfile::delta(d);
    let report = scale_membership_report(m, lambda, |k| profile.fourier(k))?;
    let (verdict, value, status) = match report.membership {
        Some(ScaleMembership::Convergent { value }) => ("convergent", Some(value), Status::Ok),
        Some(ScaleMembership::Divergent { .. }) => ("divergent", None, Status::Ok),
        None => ("inconclusive", None, Status::Inconclusive),
    };
    let mut csv = String::new();
    csv_line(&mut csv, ["epsilon", "partial_integral"].map(String::from));
    for (e, v) in report.cutoffs.iter().zip(&report.partial_integrals) {
        csv_line(&mut csv, [e.to_string(), v.to_string()]);
    }
    let body = InfraredBody {
        d,
        nu: m.nu().expect("ring or lattice"),
        lambda,
        profile,
        cutoffs: report.cutoffs,
        partial_integrals: report.partial_integrals,
        log_slope: report.log_slope,
        residual_fraction: report.residual_fraction,
        decay_exponent: report.decay_exponent,
        verdict,
        value,
    };
    Ok(Outcome { json: render(config, body), csv, status })
}

#[derive(Serialize)]
struct NewtonWignerRow {
    i: usize,
    j: usize,
    #[serde(flatten)]
    demo: NewtonWignerDemo,
}

#[derive(Serialize)]
struct VacuumBody {
    covariance: Vec<Vec<f64>>,
    site_variance: Vec<f64>,
    newton_wigner: Vec<NewtonWignerRow>,
    fock_covariance_error: f64,
    fock_agreement: bool,
}

fn cmd_vacuum(config: &RunConfig, sites: Option<&[usize]>, cutoff: usize) -> Result<Outcome, CliError> {
    let s = model_for(config)?;
    let n = s.dim();
    let covariance: Vec<Vec<f64>> = (0..n).map(|i| (0..n).map(|j| 0.5 * s.omega_inv()[(i, j)]).collect()).collect();
    let site_variance: Vec<f64> = (0..n).map(|j| covariance[j][j]).collect();

    // Fock side: Q_j|0⟩ = a†(Ω^{-1/2}e_j)|0⟩/√2
    let basis = FockBasis::with_limit(n, cutoff, config.max_dim)?;
    let vac = vacuum(&basis);
    let mut excitations = Vec::with_capacity(n);
    for j in 0..n {
        let alpha = ComplexAmplitude::from_real(&s.omega_inv_sqrt().column(j).into_owned());
        excitations.push(apply_creation(&alpha, &vac)?);
    }
    let mut cov_err = 0.0f64;
    for i in 0..n {
        for j in 0..n {
            let fock = 0.5 * excitations[i].inner(&excitations[j])?.re;
            cov_err = cov_err.max((fock - covariance[i][j]).abs());
        }
    }

    let sources: Vec<usize> = sites.map(<[usize]>::to_vec).unwrap_or_else(|| vec![0]);
    let mut rows = Vec::new();
    for &i in &sources {
        for j in (0..n).filter(|&j| j != i) {
            rows.push(NewtonWignerRow { i, j, demo: newton_wigner_demo(&s, i, j, &basis)? });
        }
    }
    let nw_err = rows.iter().map(|r| (r.demo.difference - r.demo.closed_form).abs()).fold(0.0, f64::max);

    let mut csv = String::new();
    csv_line(&mut csv, ["i", "j", "excited", "vacuum", "difference", "closed_form"].map(String::from));
    for r in &rows {
        csv_line(
            &mut csv,
            [
                r.i.to_string(),
                r.j.to_string(),
                r.demo.excited.to_string(),
                r.demo.vacuum.to_string(),
                r.demo.difference.to_string(),
                r.demo.closed_form.to_string(),
            ],
        );
    }
    let body = VacuumBody {
        covariance,
        site_variance,
        newton_wigner: rows,
        fock_covariance_error: cov_err,
        fock_agreement: cov_err <= VACUUM_TOLERANCE && nw_err <= VACUUM_TOLERANCE,
    };
    Ok(Outcome { json: render(config, body), csv, status: Status::Ok })
}

#[cfg(test)]
mod tests {
    use super::*;
    use bosefield::locality::DEFAULT_SAMPLE_SEED;

    fn config(model: &str, params: Params) -> RunConfig {
        RunConfig::new(load_model(model).unwrap(), params, DEFAULT_MAX_DIM).unwrap()
    }

    #[test]
    fn inline_model_parsing() {
        let m = load_model(r#"{"variant":"ring","n":3,"omega_w":1.0,"omega_n":0.5}"#).unwrap();
        assert_eq!(m.site_count(), 3);
        assert!(matches!(load_model(r#"{"variant":"ring","n":3}"#), Err(CliError::Validation(_))));
        assert!(matches!(load_model("/nonexistent/model.json"), Err(CliError::Validation(_))));
    }

    #[test]
    fn validation_happens_before_computation() {
        let m = load_model(r#"{"variant":"custom","matrix":[[2,1],[1,2]]}"#).unwrap();
        let bad_region = Params::Locality { region: vec![2], quanta: 1, cutoff: None, seed: 1 };
        assert!(matches!(RunConfig::new(m.clone(), bad_region, 10), Err(CliError::Validation(_))));
        let bad_cutoff = Params::Locality { region: vec![0], quanta: 2, cutoff: Some(3), seed: 1 };
        assert!(matches!(RunConfig::new(m.clone(), bad_cutoff, 10), Err(CliError::Validation(_))));
        let custom_ir = Params::Infrared { lambda: -0.5 };
        assert!(matches!(RunConfig::new(m.clone(), custom_ir, 10), Err(CliError::Validation(_))));
        let bad_q = Params::Evolve { q: Some(vec![1.0]), p: None, t_end: 1.0, steps: 2 };
        assert!(matches!(RunConfig::new(m, bad_q, 10), Err(CliError::Validation(_))));
    }

    #[test]
    fn dimension_cap_is_a_validation_error() {
        let c = RunConfig::new(
            load_model(r#"{"variant":"custom","matrix":[[2,1],[1,2]]}"#).unwrap(),
            Params::Locality { region: vec![0], quanta: 1, cutoff: None, seed: 1 },
            5,
        )
        .unwrap();
        assert!(matches!(run(&c), Err(CliError::Validation(_))));
    }

    #[test]
    fn zero_mode_exit_statuses() {
        let zero = r#"{"variant":"ring","n":4,"omega_w":0.0,"omega_n":1.0}"#;
        let out = run(&config(zero, Params::Dispersion)).unwrap();
        assert_eq!(out.status, Status::Warning);
        let err = run(&config(zero, Params::Vacuum { region: None, cutoff: 2 })).unwrap_err();
        assert_eq!(err.exit_code(), 3);
    }

    #[test]
    fn csv_has_header_and_rows() {
        let out = run(&config(r#"{"variant":"ring","n":4,"omega_w":1.0,"omega_n":0.5}"#, Params::Dispersion)).unwrap();
        let lines: Vec<&str> = out.csv.lines().collect();
        assert_eq!(lines[0], "k0,omega_squared");
        assert_eq!(lines.len(), 5);
    }

    #[test]
    fn default_seed_is_recorded() {
        let c = config(
            r#"{"variant":"custom","matrix":[[2,0],[0,3]]}"#,
            Params::Locality { region: vec![0], quanta: 1, cutoff: None, seed: DEFAULT_SAMPLE_SEED },
        );
        let v: serde_json::Value = serde_json::from_str(&run(&c).unwrap().json).unwrap();
        assert_eq!(v["schema"], SCHEMA);
        assert_eq!(v["search"]["seed"], DEFAULT_SAMPLE_SEED);
        assert_eq!(v["localizable"], true);
    }
}
