//! Adaptive tensor-product Gauss–Legendre quadrature on boxes.

use std::f64::consts::PI;
use std::sync::OnceLock;
use thiserror::Error;

const ORDER: usize = 10;
const MAX_DEPTH: u32 = 40;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum QuadratureError {
    #[error("no convergence after {0} bisections")]
    DepthExceeded(u32),
    #[error("integrand is not finite")]
    NonFinite,
}

/// Nodes and weights on [−1, 1], by Newton iteration on P_n.
pub fn gauss_legendre(n: usize) -> (Vec<f64>, Vec<f64>) {
    let mut nodes = vec![0.0; n];
    let mut weights = vec![0.0; n];
    for i in 0..n.div_ceil(2) {
        let mut x = (PI * (i as f64 + 0.75) / (n as f64 + 0.5)).cos();
        let mut dp = 0.0;
        for _ in 0..100 {
            let (mut p0, mut p1) = (1.0, x);
            for k in 2..=n {
                let p2 = ((2 * k - 1) as f64 * x * p1 - (k - 1) as f64 * p0) / k as f64;
                p0 = p1;
                p1 = p2;
            }
            dp = n as f64 * (x * p1 - p0) / (x * x - 1.0);
            let dx = p1 / dp;
            x -= dx;
            if dx.abs() < 1e-16 {
                break;
            }
        }
        nodes[i] = -x;
        nodes[n - 1 - i] = x;
        let w = 2.0 / ((1.0 - x * x) * dp * dp);
        weights[i] = w;
        weights[n - 1 - i] = w;
    }
    (nodes, weights)
}

fn rule() -> &'static (Vec<f64>, Vec<f64>) {
    static RULE: OnceLock<(Vec<f64>, Vec<f64>)> = OnceLock::new();
    RULE.get_or_init(|| gauss_legendre(ORDER))
}

fn tensor_rule<F: Fn(&[f64]) -> f64>(f: &F, lo: &[f64], hi: &[f64]) -> f64 {
    let (nodes, weights) = rule();
    let d = lo.len();
    let half: Vec<f64> = lo.iter().zip(hi).map(|(a, b)| 0.5 * (b - a)).collect();
    let mid: Vec<f64> = lo.iter().zip(hi).map(|(a, b)| 0.5 * (b + a)).collect();
    let mut idx = vec![0usize; d];
    let mut point = vec![0.0; d];
    let mut total = 0.0;
    loop {
        let mut w = 1.0;
        for axis in 0..d {
            point[axis] = mid[axis] + half[axis] * nodes[idx[axis]];
            w *= weights[idx[axis]];
        }
        total += w * f(&point);
        let mut axis = 0;
        loop {
            if axis == d {
                return total * half.iter().product::<f64>();
            }
            idx[axis] += 1;
            if idx[axis] < nodes.len() {
                break;
            }
            idx[axis] = 0;
            axis += 1;
        }
    }
}

fn children(lo: &[f64], hi: &[f64]) -> Vec<(Vec<f64>, Vec<f64>)> {
    let d = lo.len();
    (0..1usize << d)
        .map(|mask| {
            let mut clo = lo.to_vec();
            let mut chi = hi.to_vec();
            for axis in 0..d {
                let m = 0.5 * (lo[axis] + hi[axis]);
                if mask >> axis & 1 == 0 {
                    chi[axis] = m;
                } else {
                    clo[axis] = m;
                }
            }
            (clo, chi)
        })
        .collect()
}

/// Integrates `f` over the box [lo, hi] to relative accuracy `rel_tol`,
/// bisecting every axis wherever the one-level refinement disagrees with
/// the parent estimate. Summation order is fixed, so results are
/// reproducible bit for bit.
pub fn integrate_box<F: Fn(&[f64]) -> f64>(f: &F, lo: &[f64], hi: &[f64], rel_tol: f64) -> Result<f64, QuadratureError> {
    let coarse = tensor_rule(f, lo, hi);
    if !coarse.is_finite() {
        return Err(QuadratureError::NonFinite);
    }
    let tol = rel_tol * coarse.abs().max(f64::MIN_POSITIVE);
    refine(f, lo, hi, coarse, tol, 0)
}

fn refine<F: Fn(&[f64]) -> f64>(
    f: &F,
    lo: &[f64],
    hi: &[f64],
    estimate: f64,
    tol: f64,
    depth: u32,
) -> Result<f64, QuadratureError> {
    let kids = children(lo, hi);
    let parts: Vec<f64> = kids.iter().map(|(a, b)| tensor_rule(f, a, b)).collect();
    let refined: f64 = parts.iter().sum();
    if !refined.is_finite() {
        return Err(QuadratureError::NonFinite);
    }
    if (refined - estimate).abs() <= tol {
        return Ok(refined);
    }
    if depth >= MAX_DEPTH {
        return Err(QuadratureError::DepthExceeded(depth));
    }
    let share = tol / kids.len() as f64;
    let mut total = 0.0;
    for ((a, b), part) in kids.iter().zip(parts) {
        total += refine(f, a, b, part, share, depth + 1)?;
    }
    Ok(total)
}
