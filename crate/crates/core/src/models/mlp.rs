use nalgebra::{DMatrix, DVector};
use rand::Rng;
use serde::{Deserialize, Serialize};

use super::logistic::{sigmoid, softplus};
use super::LabeledMatrix;
use crate::seeding;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct MlpParams {
    pub hidden: usize,
    pub learning_rate: f64,
    pub epochs: usize,
    pub l2: f64,
    /// Weights start uniform in `[-init_scale, init_scale]`.
    pub init_scale: f64,
}

impl Default for MlpParams {
    fn default() -> Self {
        Self {
            hidden: 64,
            learning_rate: 0.01,
            epochs: 2000,
            l2: 1e-4,
            init_scale: 0.1,
        }
    }
}

/// One tanh hidden layer and a logistic output unit.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Mlp {
    pub dim: usize,
    pub hidden: usize,
    /// Input-to-hidden weights, row-major `dim × hidden`.
    pub w1: Vec<f64>,
    pub b1: Vec<f64>,
    pub w2: Vec<f64>,
    pub b2: f64,
}

impl Mlp {
    /// Weights drawn in order w1 (row-major) then w2; biases start at 0.
    pub fn init(dim: usize, p: &MlpParams, seed: u64) -> Self {
        let mut rng = seeding::rng(seed);
        let s = p.init_scale;
        let w1 = (0..dim * p.hidden).map(|_| rng.gen_range(-s..=s)).collect();
        let w2 = (0..p.hidden).map(|_| rng.gen_range(-s..=s)).collect();
        Self {
            dim,
            hidden: p.hidden,
            w1,
            b1: vec![0.0; p.hidden],
            w2,
            b2: 0.0,
        }
    }

    pub fn probability(&self, x: &[f64]) -> f64 {
        let mut z = self.b2;
        for j in 0..self.hidden {
            let mut a = self.b1[j];
            for (k, xk) in x.iter().enumerate() {
                a += xk * self.w1[k * self.hidden + j];
            }
            z += a.tanh() * self.w2[j];
        }
        sigmoid(z)
    }

    /// Flattened parameters: w1, b1, w2, b2.
    pub fn params(&self) -> Vec<f64> {
        let mut v = self.w1.clone();
        v.extend(&self.b1);
        v.extend(&self.w2);
        v.push(self.b2);
        v
    }

    pub fn set_params(&mut self, v: &[f64]) {
        let (n1, h) = (self.w1.len(), self.hidden);
        self.w1.copy_from_slice(&v[..n1]);
        self.b1.copy_from_slice(&v[n1..n1 + h]);
        self.w2.copy_from_slice(&v[n1 + h..n1 + 2 * h]);
        self.b2 = v[n1 + 2 * h];
    }
}

/// Batch workspace so training allocates once.
struct Workspace {
    x: DMatrix<f64>,
    xt: DMatrix<f64>,
    y: DVector<f64>,
    a: DMatrix<f64>,
    w1: DMatrix<f64>,
    dw1: DMatrix<f64>,
}

impl Workspace {
    fn new(data: &LabeledMatrix, net: &Mlp) -> Self {
        let n = data.len();
        let x = DMatrix::from_fn(n, net.dim, |i, k| data.row(i)[k]);
        Self {
            xt: x.transpose(),
            x,
            y: DVector::from_iterator(n, data.labels.iter().map(|&l| l as f64)),
            a: DMatrix::zeros(n, net.hidden),
            w1: DMatrix::from_row_slice(net.dim, net.hidden, &net.w1),
            dw1: DMatrix::zeros(net.dim, net.hidden),
        }
    }

    /// Loss and gradient at the parameters held in `self.w1` and `net`.
    /// Gradients come back in `self.dw1` and the returned tuple.
    fn loss_grad(&mut self, net: &Mlp, l2: f64) -> (f64, Vec<f64>, Vec<f64>, f64) {
        let n = self.x.nrows();
        let h = net.hidden;
        self.x.mul_to(&self.w1, &mut self.a);
        let mut loss = 0.0;
        let mut db1 = vec![0.0; h];
        let mut dw2 = vec![0.0; h];
        let mut db2 = 0.0;
        let mut dz = vec![0.0; n];
        for i in 0..n {
            let mut z = net.b2;
            for j in 0..h {
                let t = (self.a[(i, j)] + net.b1[j]).tanh();
                self.a[(i, j)] = t;
                z += t * net.w2[j];
            }
            loss += softplus(z) - self.y[i] * z;
            dz[i] = (sigmoid(z) - self.y[i]) / n as f64;
            db2 += dz[i];
        }
        // a now holds tanh activations; turn it into dL/d(pre-activation)
        for j in 0..h {
            for i in 0..n {
                let t = self.a[(i, j)];
                dw2[j] += t * dz[i];
                let g = dz[i] * net.w2[j] * (1.0 - t * t);
                self.a[(i, j)] = g;
                db1[j] += g;
            }
        }
        self.xt.mul_to(&self.a, &mut self.dw1);
        let mut reg = 0.0;
        for (g, w) in self.dw1.iter_mut().zip(self.w1.iter()) {
            *g += l2 * w;
            reg += w * w;
        }
        for (g, w) in dw2.iter_mut().zip(&net.w2) {
            *g += l2 * w;
            reg += w * w;
        }
        (loss / n as f64 + 0.5 * l2 * reg, db1, dw2, db2)
    }
}

/// Objective (mean log-loss + `l2/2` times the squared weights) and its
/// gradient in [`Mlp::params`] order.
pub fn objective_and_gradient(net: &Mlp, data: &LabeledMatrix, l2: f64) -> (f64, Vec<f64>) {
    let mut ws = Workspace::new(data, net);
    let (loss, db1, dw2, db2) = ws.loss_grad(net, l2);
    let mut g = Vec::with_capacity(net.w1.len() + 2 * net.hidden + 1);
    for k in 0..net.dim {
        for j in 0..net.hidden {
            g.push(ws.dw1[(k, j)]);
        }
    }
    g.extend(db1);
    g.extend(dw2);
    g.push(db2);
    (loss, g)
}

/// Full-batch gradient descent for a fixed number of epochs.
pub(crate) fn fit(data: &LabeledMatrix, p: &MlpParams, seed: u64) -> Mlp {
    let mut net = Mlp::init(data.dim(), p, seed);
    let mut ws = Workspace::new(data, &net);
    for _ in 0..p.epochs {
        let (_, db1, dw2, db2) = ws.loss_grad(&net, p.l2);
        for (w, g) in ws.w1.iter_mut().zip(ws.dw1.iter()) {
            *w -= p.learning_rate * g;
        }
        for j in 0..net.hidden {
            net.b1[j] -= p.learning_rate * db1[j];
            net.w2[j] -= p.learning_rate * dw2[j];
        }
        net.b2 -= p.learning_rate * db2;
    }
    for k in 0..net.dim {
        for j in 0..net.hidden {
            net.w1[k * net.hidden + j] = ws.w1[(k, j)];
        }
    }
    net
}
