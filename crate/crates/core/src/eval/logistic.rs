//! Five-parameter logistic remap of objective scores onto MOS.
//!
//! ```text
//! f(x) = b1 * (1/2 - 1 / (1 + exp(b2 * (x - b3)))) + b4 * x + b5
//! ```
//!
//! fitted by least squares with a Nelder-Mead simplex.

use serde::Serialize;

use crate::error::{Error, Result};
use crate::output::{fixed_vec, Fixed};

/// Maximum simplex iterations per run.
pub const MAX_ITERATIONS: usize = 5000;
/// Simplex spread tolerance on both parameters and objective.
pub const TOLERANCE: f64 = 1e-10;
/// Extra runs started from perturbed copies of the best point.
pub const RESTARTS: usize = 3;

pub fn logistic(beta: &[f64; 5], x: f64) -> f64 {
    let [b1, b2, b3, b4, b5] = *beta;
    b1 * (0.5 - 1.0 / (1.0 + (b2 * (x - b3)).exp())) + b4 * x + b5
}

/// Fitted remap and diagnostics.
#[derive(Debug, Clone, PartialEq)]
pub struct FitParams {
    pub beta: [f64; 5],
    pub residual_rmse: f64,
    pub iterations: usize,
    pub converged: bool,
}

impl FitParams {
    pub fn apply(&self, x: f64) -> f64 {
        logistic(&self.beta, x)
    }

    pub fn remap(&self, xs: &[f64]) -> Vec<f64> {
        xs.iter().map(|&x| self.apply(x)).collect()
    }
}

#[derive(Serialize)]
struct FitJson {
    beta: Vec<Fixed>,
    residual_rmse: Fixed,
    iterations: usize,
    converged: bool,
}

impl Serialize for FitParams {
    fn serialize<S: serde::Serializer>(&self, s: S) -> std::result::Result<S::Ok, S::Error> {
        FitJson {
            beta: fixed_vec(&self.beta),
            residual_rmse: Fixed(self.residual_rmse),
            iterations: self.iterations,
            converged: self.converged,
        }
        .serialize(s)
    }
}

struct SimplexRun {
    best: Vec<f64>,
    value: f64,
    iterations: usize,
    converged: bool,
}

/// Standard Nelder-Mead (reflection 1, expansion 2, contraction 1/2,
/// shrink 1/2). Stops when every vertex lies within `tol` of the best in
/// both position and objective, or after `max_iter` iterations.
fn nelder_mead<F>(f: &F, start: &[f64], steps: &[f64], max_iter: usize, tol: f64) -> SimplexRun
where
    F: Fn(&[f64]) -> f64,
{
    let dim = start.len();
    let mut simplex: Vec<Vec<f64>> = Vec::with_capacity(dim + 1);
    simplex.push(start.to_vec());
    for i in 0..dim {
        let mut v = start.to_vec();
        v[i] += steps[i];
        simplex.push(v);
    }
    let eval = |v: &[f64]| {
        let y = f(v);
        if y.is_nan() {
            f64::INFINITY
        } else {
            y
        }
    };
    let mut values: Vec<f64> = simplex.iter().map(|v| eval(v)).collect();

    let mut iterations = 0;
    let mut converged = false;
    while iterations < max_iter {
        let mut order: Vec<usize> = (0..=dim).collect();
        order.sort_by(|&a, &b| values[a].total_cmp(&values[b]));
        simplex = order.iter().map(|&i| simplex[i].clone()).collect();
        values = order.iter().map(|&i| values[i]).collect();

        let x_spread = simplex[1..]
            .iter()
            .flat_map(|v| v.iter().zip(&simplex[0]).map(|(a, b)| (a - b).abs()))
            .fold(0.0, f64::max);
        let f_spread = values[1..]
            .iter()
            .map(|v| (v - values[0]).abs())
            .fold(0.0, f64::max);
        if x_spread <= tol && f_spread <= tol {
            converged = true;
            break;
        }
        iterations += 1;

        let centroid: Vec<f64> = (0..dim)
            .map(|j| simplex[..dim].iter().map(|v| v[j]).sum::<f64>() / dim as f64)
            .collect();
        let toward = |coef: f64| -> Vec<f64> {
            centroid
                .iter()
                .zip(&simplex[dim])
                .map(|(c, w)| c + coef * (c - w))
                .collect()
        };

        let reflected = toward(1.0);
        let fr = eval(&reflected);
        if fr < values[0] {
            let expanded = toward(2.0);
            let fe = eval(&expanded);
            if fe < fr {
                simplex[dim] = expanded;
                values[dim] = fe;
            } else {
                simplex[dim] = reflected;
                values[dim] = fr;
            }
            continue;
        }
        if fr < values[dim - 1] {
            simplex[dim] = reflected;
            values[dim] = fr;
            continue;
        }
        let (contracted, fc) = if fr < values[dim] {
            let c = toward(0.5);
            let fc = eval(&c);
            (c, fc)
        } else {
            let c = toward(-0.5);
            let fc = eval(&c);
            (c, fc)
        };
        if fc < values[dim].min(fr) {
            simplex[dim] = contracted;
            values[dim] = fc;
            continue;
        }
        for i in 1..=dim {
            let shrunk: Vec<f64> = simplex[0]
                .iter()
                .zip(&simplex[i])
                .map(|(b, v)| b + 0.5 * (v - b))
                .collect();
            values[i] = eval(&shrunk);
            simplex[i] = shrunk;
        }
    }
    let best = (0..=dim)
        .min_by(|&a, &b| values[a].total_cmp(&values[b]))
        .unwrap_or(0);
    SimplexRun {
        best: simplex[best].clone(),
        value: values[best],
        iterations,
        converged,
    }
}

fn mean(xs: &[f64]) -> f64 {
    xs.iter().sum::<f64>() / xs.len() as f64
}

fn population_std(xs: &[f64]) -> f64 {
    let m = mean(xs);
    (xs.iter().map(|x| (x - m) * (x - m)).sum::<f64>() / xs.len() as f64).sqrt()
}

fn median(xs: &[f64]) -> f64 {
    let mut s = xs.to_vec();
    s.sort_by(f64::total_cmp);
    let n = s.len();
    if n % 2 == 1 {
        s[n / 2]
    } else {
        0.5 * (s[n / 2 - 1] + s[n / 2])
    }
}

fn mse(beta: &[f64; 5], x: &[f64], y: &[f64]) -> f64 {
    x.iter()
        .zip(y)
        .map(|(&a, &b)| {
            let r = logistic(beta, a) - b;
            r * r
        })
        .sum::<f64>()
        / x.len() as f64
}

fn as_beta(v: &[f64]) -> [f64; 5] {
    [v[0], v[1], v[2], v[3], v[4]]
}

/// Least-squares straight line `y = a x + b`, as a degenerate logistic.
fn linear_fit(x: &[f64], y: &[f64]) -> [f64; 5] {
    let (mx, my) = (mean(x), mean(y));
    let sxy: f64 = x.iter().zip(y).map(|(a, b)| (a - mx) * (b - my)).sum();
    let sxx: f64 = x.iter().map(|a| (a - mx) * (a - mx)).sum();
    let slope = sxy / sxx;
    [0.0, 1.0, mx, slope, my - slope * mx]
}

/// Fits the remap. Never worse than the identity, constant-mean or
/// least-squares linear maps on the same data.
pub fn fit_logistic(x: &[f64], y: &[f64]) -> Result<FitParams> {
    if x.len() != y.len() {
        return Err(Error::DegenerateInput(format!(
            "length mismatch: {} vs {}",
            x.len(),
            y.len()
        )));
    }
    if x.len() < 5 {
        return Err(Error::DegenerateInput(format!(
            "logistic fit needs at least 5 points, got {}",
            x.len()
        )));
    }
    if x.iter().chain(y).any(|v| !v.is_finite()) {
        return Err(Error::DegenerateInput("non-finite value".into()));
    }
    let std_x = population_std(x);
    if std_x == 0.0 {
        return Err(Error::DegenerateInput("all predictions are equal".into()));
    }

    let (y_min, y_max) = y
        .iter()
        .fold((f64::INFINITY, f64::NEG_INFINITY), |(lo, hi), &v| (lo.min(v), hi.max(v)));
    let x_range = x.iter().fold(f64::NEG_INFINITY, |m, &v| m.max(v))
        - x.iter().fold(f64::INFINITY, |m, &v| m.min(v));
    let y_range = (y_max - y_min).max(f64::EPSILON);
    let std_y = population_std(y).max(f64::EPSILON);

    let initial = [y_max - y_min, 4.0 / std_x, median(x), 0.0, mean(y)];
    // per-parameter fallback scales for zero-valued coordinates
    let scales = [y_range, 1.0 / std_x, std_x, y_range / x_range, std_y];
    let steps_for = |v: &[f64]| -> Vec<f64> {
        v.iter()
            .zip(scales)
            .map(|(p, s)| if *p != 0.0 { 0.1 * p.abs().max(0.01 * s) } else { 0.1 * s })
            .collect()
    };

    let objective = |v: &[f64]| mse(&as_beta(v), x, y);
    let mut run = nelder_mead(&objective, &initial, &steps_for(&initial), MAX_ITERATIONS, TOLERANCE);
    let mut iterations = run.iterations;
    let mut best = run.best.clone();
    let mut best_value = run.value;
    let mut converged = run.converged;

    const PERTURBATIONS: [[f64; 5]; RESTARTS] = [
        [1.0, 0.5, 1.0, 1.0, 1.0],
        [1.0, 2.0, 1.0, 1.0, 1.0],
        [1.1, 1.0, 1.0, 0.9, 1.0],
    ];
    for factors in PERTURBATIONS {
        let start: Vec<f64> = best.iter().zip(factors).map(|(b, f)| b * f).collect();
        run = nelder_mead(&objective, &start, &steps_for(&start), MAX_ITERATIONS, TOLERANCE);
        iterations += run.iterations;
        if run.value <= best_value {
            best = run.best.clone();
            best_value = run.value;
            converged = run.converged;
        }
    }

    let mut beta = as_beta(&best);
    for candidate in [
        linear_fit(x, y),
        [0.0, 1.0, 0.0, 1.0, 0.0],
        [0.0, 1.0, 0.0, 0.0, mean(y)],
    ] {
        let value = mse(&candidate, x, y);
        if value < best_value {
            beta = candidate;
            best_value = value;
        }
    }

    Ok(FitParams {
        beta,
        residual_rmse: best_value.max(0.0).sqrt(),
        iterations,
        converged,
    })
}
