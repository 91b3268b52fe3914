use serde::{Deserialize, Serialize};

use super::logistic::dot;
use super::LabeledMatrix;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct SvmParams {
    pub c: f64,
    pub max_epochs: usize,
    /// Stop when the projected-gradient spread of an epoch falls below this.
    pub tol: f64,
}

impl Default for SvmParams {
    fn default() -> Self {
        Self {
            c: 1.0,
            max_epochs: 1000,
            tol: 1e-3,
        }
    }
}

pub(crate) struct Fit {
    pub w: Vec<f64>,
    pub b: f64,
    pub epochs: usize,
    pub converged: bool,
}

/// Dual coordinate descent for the hinge-loss linear SVM
/// `min ½||w||² + C Σ max(0, 1 - y wᵀx)`, with the bias as an extra
/// constant feature. Examples are visited in their stored order.
pub(crate) fn fit(data: &LabeledMatrix, p: &SvmParams) -> Fit {
    let n = data.len();
    let d = data.dim();
    let mut w = vec![0.0; d];
    let mut b = 0.0;
    let mut alpha = vec![0.0; n];
    let y: Vec<f64> = data.labels.iter().map(|&l| if l == 1 { 1.0 } else { -1.0 }).collect();
    let q: Vec<f64> = data.rows().map(|x| dot(x, x) + 1.0).collect();
    let mut epochs = 0;
    let mut converged = false;
    while epochs < p.max_epochs {
        epochs += 1;
        let (mut pg_max, mut pg_min) = (f64::NEG_INFINITY, f64::INFINITY);
        for i in 0..n {
            let x = data.row(i);
            let g = y[i] * (dot(&w, x) + b) - 1.0;
            let pg = if alpha[i] <= 0.0 {
                g.min(0.0)
            } else if alpha[i] >= p.c {
                g.max(0.0)
            } else {
                g
            };
            pg_max = pg_max.max(pg);
            pg_min = pg_min.min(pg);
            if pg != 0.0 {
                let old = alpha[i];
                alpha[i] = (old - g / q[i]).clamp(0.0, p.c);
                let delta = (alpha[i] - old) * y[i];
                for (wj, xj) in w.iter_mut().zip(x) {
                    *wj += delta * xj;
                }
                b += delta;
            }
        }
        if pg_max - pg_min < p.tol {
            converged = true;
            break;
        }
    }
    Fit {
        w,
        b,
        epochs,
        converged,
    }
}
