use serde::{Deserialize, Serialize};

use super::LabeledMatrix;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct LogisticParams {
    /// Inverse regularization strength; the penalty is `||w||² / (2 C n)`.
    pub c: f64,
    pub max_iter: usize,
    pub tol: f64,
}

impl Default for LogisticParams {
    fn default() -> Self {
        Self {
            c: 1.0,
            max_iter: 5000,
            tol: 1e-6,
        }
    }
}

pub(crate) fn sigmoid(z: f64) -> f64 {
    if z >= 0.0 {
        1.0 / (1.0 + (-z).exp())
    } else {
        let e = z.exp();
        e / (1.0 + e)
    }
}

/// `ln(1 + e^z)` without overflow.
pub(crate) fn softplus(z: f64) -> f64 {
    if z > 0.0 {
        z + (-z).exp().ln_1p()
    } else {
        z.exp().ln_1p()
    }
}

/// Mean log-loss plus `lambda/2 ||w||²`; the bias is not penalized.
pub fn objective(w: &[f64], b: f64, data: &LabeledMatrix, lambda: f64) -> f64 {
    let n = data.len() as f64;
    let loss: f64 = data
        .rows()
        .zip(&data.labels)
        .map(|(x, &y)| {
            let z = dot(w, x) + b;
            // -[y ln p + (1-y) ln(1-p)]
            softplus(z) - y as f64 * z
        })
        .sum::<f64>()
        / n;
    loss + 0.5 * lambda * w.iter().map(|v| v * v).sum::<f64>()
}

/// Gradient of [`objective`] with respect to `(w, b)`.
pub fn gradient(w: &[f64], b: f64, data: &LabeledMatrix, lambda: f64) -> (Vec<f64>, f64) {
    let n = data.len() as f64;
    let mut gw = vec![0.0; w.len()];
    let mut gb = 0.0;
    for (x, &y) in data.rows().zip(&data.labels) {
        let r = sigmoid(dot(w, x) + b) - y as f64;
        gb += r;
        for (g, xi) in gw.iter_mut().zip(x) {
            *g += r * xi;
        }
    }
    for (g, wi) in gw.iter_mut().zip(w) {
        *g = *g / n + lambda * wi;
    }
    (gw, gb / n)
}

pub(crate) fn dot(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| x * y).sum()
}

pub(crate) struct Fit {
    pub w: Vec<f64>,
    pub b: f64,
    pub iterations: usize,
    pub converged: bool,
}

/// Full-batch gradient descent with Armijo backtracking, starting from zero.
pub(crate) fn fit(data: &LabeledMatrix, p: &LogisticParams) -> Fit {
    let lambda = 1.0 / (p.c * data.len() as f64);
    let d = data.dim();
    let mut w = vec![0.0; d];
    let mut b = 0.0;
    let mut step = 1.0;
    let mut f = objective(&w, b, data, lambda);
    let mut iterations = 0;
    let mut converged = false;
    let mut trial = vec![0.0; d];
    while iterations < p.max_iter {
        let (gw, gb) = gradient(&w, b, data, lambda);
        let g2 = gw.iter().map(|v| v * v).sum::<f64>() + gb * gb;
        if g2.sqrt() < p.tol {
            converged = true;
            break;
        }
        iterations += 1;
        // grow optimistically, then backtrack until sufficient decrease
        step *= 2.0;
        loop {
            for ((t, wi), gi) in trial.iter_mut().zip(&w).zip(&gw) {
                *t = wi - step * gi;
            }
            let tb = b - step * gb;
            let ft = objective(&trial, tb, data, lambda);
            if ft <= f - 0.5 * step * g2 || step < 1e-12 {
                std::mem::swap(&mut w, &mut trial);
                b = tb;
                f = ft;
                break;
            }
            step *= 0.5;
        }
    }
    Fit {
        w,
        b,
        iterations,
        converged,
    }
}
