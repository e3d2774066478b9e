//! Nelder–Mead simplex minimization.

#[derive(Debug, Clone, Copy)]
pub struct NelderMeadOptions {
    pub initial_step: f64,
    pub max_evals: usize,
    /// Stop once the spread of simplex values falls below this.
    pub f_tol: f64,
    /// ... and every vertex lies within this distance of the best one.
    pub x_tol: f64,
}

impl Default for NelderMeadOptions {
    fn default() -> Self {
        Self { initial_step: 0.1, max_evals: 20_000, f_tol: 1e-14, x_tol: 1e-10 }
    }
}

#[derive(Debug, Clone)]
pub struct Minimum {
    pub x: Vec<f64>,
    pub value: f64,
    pub evals: usize,
    pub converged: bool,
}

pub fn nelder_mead<F: FnMut(&[f64]) -> f64>(mut f: F, x0: &[f64], opts: &NelderMeadOptions) -> Minimum {
    let n = x0.len();
    let mut simplex: Vec<Vec<f64>> = vec![x0.to_vec()];
    for i in 0..n {
        let mut v = x0.to_vec();
        v[i] += if v[i].abs() > 1e-8 { opts.initial_step * v[i].abs().max(1.0) } else { opts.initial_step };
        simplex.push(v);
    }
    let mut values: Vec<f64> = simplex.iter().map(|v| f(v)).collect();
    let mut evals = n + 1;

    loop {
        let mut pairs: Vec<(f64, Vec<f64>)> = values.drain(..).zip(simplex.drain(..)).collect();
        pairs.sort_by(|a, b| a.0.total_cmp(&b.0));
        (values, simplex) = pairs.into_iter().unzip();

        let spread = values[n] - values[0];
        let size = simplex[1..]
            .iter()
            .map(|v| v.iter().zip(&simplex[0]).map(|(a, b)| (a - b).abs()).fold(0.0, f64::max))
            .fold(0.0, f64::max);
        if spread <= opts.f_tol && size <= opts.x_tol {
            return Minimum { x: simplex[0].clone(), value: values[0], evals, converged: true };
        }
        if evals >= opts.max_evals {
            return Minimum { x: simplex[0].clone(), value: values[0], evals, converged: false };
        }

        let centroid: Vec<f64> = (0..n).map(|k| simplex[..n].iter().map(|v| v[k]).sum::<f64>() / n as f64).collect();
        let along = |t: f64| -> Vec<f64> { (0..n).map(|k| centroid[k] + t * (simplex[n][k] - centroid[k])).collect() };

        let reflected = along(-1.0);
        let fr = f(&reflected);
        evals += 1;
        if fr < values[0] {
            let expanded = along(-2.0);
            let fe = f(&expanded);
            evals += 1;
            if fe < fr {
                simplex[n] = expanded;
                values[n] = fe;
            } else {
                simplex[n] = reflected;
                values[n] = fr;
            }
            continue;
        }
        if fr < values[n - 1] {
            simplex[n] = reflected;
            values[n] = fr;
            continue;
        }
        let (contracted, fc) = if fr < values[n] {
            let c = along(-0.5);
            let fc = f(&c);
            (c, fc)
        } else {
            let c = along(0.5);
            let fc = f(&c);
            (c, fc)
        };
        evals += 1;
        if fc < values[n].min(fr) {
            simplex[n] = contracted;
            values[n] = fc;
            continue;
        }
        for i in 1..=n {
            let shrunk: Vec<f64> = simplex[i].iter().zip(&simplex[0]).map(|(a, b)| b + 0.5 * (a - b)).collect();
            values[i] = f(&shrunk);
            simplex[i] = shrunk;
        }
        evals += n;
    }
}

/// Runs [`nelder_mead`] repeatedly from the latest minimum until a restart
/// no longer improves the value by more than `f_tol`.
pub fn nelder_mead_restarts<F: FnMut(&[f64]) -> f64>(
    mut f: F,
    x0: &[f64],
    opts: &NelderMeadOptions,
    max_restarts: usize,
) -> Minimum {
    let mut best = nelder_mead(&mut f, x0, opts);
    let mut evals = best.evals;
    for _ in 0..max_restarts {
        let next = nelder_mead(&mut f, &best.x, opts);
        evals += next.evals;
        let improved = best.value - next.value;
        if next.value < best.value {
            best = next;
        }
        if improved <= opts.f_tol {
            break;
        }
    }
    best.evals = evals;
    best
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn rosenbrock() {
        let f = |x: &[f64]| (1.0 - x[0]).powi(2) + 100.0 * (x[1] - x[0] * x[0]).powi(2);
        let m = nelder_mead_restarts(f, &[-1.2, 1.0], &NelderMeadOptions::default(), 5);
        assert!(m.converged);
        assert!((m.x[0] - 1.0).abs() < 1e-6 && (m.x[1] - 1.0).abs() < 1e-6);
    }

    #[test]
    fn nonsmooth_max_of_abs() {
        let f = |x: &[f64]| (x[0] - 0.3).abs().max((x[1] + 0.7).abs());
        let m = nelder_mead_restarts(f, &[2.0, 2.0], &NelderMeadOptions::default(), 10);
        assert!(m.value < 1e-8);
    }

    #[test]
    fn budget_is_respected() {
        let f = |x: &[f64]| x.iter().map(|v| v * v).sum::<f64>();
        let opts = NelderMeadOptions { max_evals: 30, ..Default::default() };
        let m = nelder_mead(f, &[1.0; 6], &opts);
        assert!(!m.converged);
        assert!(m.evals < 30 + 8);
    }
}
