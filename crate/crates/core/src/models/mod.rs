//! The four classifier families, trained deterministically on standardized
//! features. Only the network depends on the seed.

mod data;
mod logistic;
mod mlp;
mod svm;
mod tree;

use std::fmt;
use std::path::Path;
use std::str::FromStr;

use rand::Rng;
use serde::{Deserialize, Serialize};

pub use data::{LabeledMatrix, Standardizer};
pub use logistic::LogisticParams;
pub use mlp::{Mlp, MlpParams};
pub use svm::SvmParams;
pub use tree::{Node, TreeParams};

use crate::error::{Error, Result};
use crate::seeding;

pub const MODEL_FORMAT_VERSION: u32 = 1;

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
pub enum ModelKind {
    #[serde(rename = "LR")]
    Lr,
    #[serde(rename = "SVM")]
    Svm,
    #[serde(rename = "NN")]
    Nn,
    #[serde(rename = "DT")]
    Dt,
}

impl ModelKind {
    /// Canonical reporting order.
    pub const ALL: [ModelKind; 4] = [ModelKind::Lr, ModelKind::Svm, ModelKind::Nn, ModelKind::Dt];

    pub fn as_str(self) -> &'static str {
        match self {
            ModelKind::Lr => "LR",
            ModelKind::Svm => "SVM",
            ModelKind::Nn => "NN",
            ModelKind::Dt => "DT",
        }
    }

    pub fn uses_seed(self) -> bool {
        self == ModelKind::Nn
    }
}

impl fmt::Display for ModelKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

impl FromStr for ModelKind {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s.to_ascii_uppercase().as_str() {
            "LR" => Ok(ModelKind::Lr),
            "SVM" => Ok(ModelKind::Svm),
            "NN" => Ok(ModelKind::Nn),
            "DT" => Ok(ModelKind::Dt),
            _ => Err(Error::Config(format!("unknown model {s:?}"))),
        }
    }
}

#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct Hyperparams {
    pub lr: LogisticParams,
    pub svm: SvmParams,
    pub dt: TreeParams,
    pub nn: MlpParams,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "type", rename_all = "snake_case")]
pub enum Parameters {
    Linear { weights: Vec<f64>, bias: f64 },
    Tree { nodes: Vec<Node> },
    Network(Mlp),
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TrainingInfo {
    /// Optimizer iterations, epochs, or tree depth for DT.
    pub iterations: usize,
    pub converged: bool,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TrainedModel {
    pub format_version: u32,
    pub kind: ModelKind,
    pub hyperparams: Hyperparams,
    pub standardizer: Standardizer,
    pub parameters: Parameters,
    pub seed: u64,
    pub info: TrainingInfo,
}

/// Fits `kind` on `data`. `seed` only affects the network.
pub fn train(kind: ModelKind, data: &LabeledMatrix, hp: &Hyperparams, seed: u64) -> Result<TrainedModel> {
    let [neg, pos] = data.class_counts();
    if neg == 0 || pos == 0 {
        return Err(Error::DegenerateData(format!(
            "training data has {neg} negative and {pos} positive rows"
        )));
    }
    let standardizer = Standardizer::fit(data);
    let z = standardizer.transform(data);
    let (parameters, info) = match kind {
        ModelKind::Lr => {
            let f = logistic::fit(&z, &hp.lr);
            (
                Parameters::Linear {
                    weights: f.w,
                    bias: f.b,
                },
                TrainingInfo {
                    iterations: f.iterations,
                    converged: f.converged,
                },
            )
        }
        ModelKind::Svm => {
            let f = svm::fit(&z, &hp.svm);
            (
                Parameters::Linear {
                    weights: f.w,
                    bias: f.b,
                },
                TrainingInfo {
                    iterations: f.epochs,
                    converged: f.converged,
                },
            )
        }
        ModelKind::Dt => {
            let nodes = tree::fit(&z, &hp.dt);
            let depth = tree::depth(&nodes);
            (
                Parameters::Tree { nodes },
                TrainingInfo {
                    iterations: depth,
                    converged: true,
                },
            )
        }
        ModelKind::Nn => {
            let net = mlp::fit(&z, &hp.nn, seed);
            (
                Parameters::Network(net),
                TrainingInfo {
                    iterations: hp.nn.epochs,
                    converged: true,
                },
            )
        }
    };
    Ok(TrainedModel {
        format_version: MODEL_FORMAT_VERSION,
        kind,
        hyperparams: hp.clone(),
        standardizer,
        parameters,
        seed,
        info,
    })
}

impl TrainedModel {
    pub fn dim(&self) -> usize {
        self.standardizer.mean.len()
    }

    /// LR/NN: 1 iff probability > 0.5; SVM: 1 iff margin > 0; DT: leaf label.
    pub fn predict(&self, rows: &LabeledMatrix) -> Result<Vec<u8>> {
        if rows.dim() != self.dim() {
            return Err(Error::Schema(format!(
                "model expects {} features, got {}",
                self.dim(),
                rows.dim()
            )));
        }
        let mut z = Vec::with_capacity(rows.dim());
        Ok(rows
            .rows()
            .map(|r| {
                self.standardizer.transform_row(r, &mut z);
                self.decide(&z)
            })
            .collect())
    }

    fn decide(&self, z: &[f64]) -> u8 {
        match (&self.parameters, self.kind) {
            (Parameters::Linear { weights, bias }, ModelKind::Lr) => {
                u8::from(logistic::sigmoid(logistic::dot(weights, z) + bias) > 0.5)
            }
            (Parameters::Linear { weights, bias }, _) => u8::from(logistic::dot(weights, z) + bias > 0.0),
            (Parameters::Tree { nodes }, _) => tree::predict(nodes, z),
            (Parameters::Network(net), _) => u8::from(net.probability(z) > 0.5),
        }
    }

    pub fn to_json(&self) -> Result<String> {
        Ok(serde_json::to_string_pretty(self)?)
    }

    pub fn from_json(s: &str) -> Result<Self> {
        let m: TrainedModel = serde_json::from_str(s)?;
        if m.format_version != MODEL_FORMAT_VERSION {
            return Err(Error::Schema(format!(
                "model format version {} is not supported (expected {MODEL_FORMAT_VERSION})",
                m.format_version
            )));
        }
        Ok(m)
    }

    pub fn save(&self, path: &Path) -> Result<()> {
        std::fs::write(path, self.to_json()?).map_err(|e| Error::io(path, e))
    }

    pub fn load(path: &Path) -> Result<Self> {
        Self::from_json(&std::fs::read_to_string(path).map_err(|e| Error::io(path, e))?)
    }
}

/// Analytic gradient of the LR objective (mean log-loss plus `lambda/2 ||w||²`).
pub fn logistic_gradient(w: &[f64], b: f64, data: &LabeledMatrix, lambda: f64) -> (Vec<f64>, f64) {
    logistic::gradient(w, b, data, lambda)
}

/// Maximum relative difference between analytic and central-difference
/// gradients (`h = 1e-5`) at seeded random parameters.
pub fn gradient_check(kind: ModelKind, data: &LabeledMatrix, seed: u64) -> Result<f64> {
    const H: f64 = 1e-5;
    let rel = |a: f64, n: f64| (a - n).abs() / (a.abs() + n.abs()).max(1e-6);
    let mut rng = seeding::rng(seed);
    let z = Standardizer::fit(data).transform(data);
    match kind {
        ModelKind::Lr => {
            let lambda = 1.0 / z.len() as f64;
            let mut w: Vec<f64> = (0..z.dim()).map(|_| rng.gen_range(-0.5..0.5)).collect();
            let mut b = rng.gen_range(-0.5..0.5);
            let (gw, gb) = logistic::gradient(&w, b, &z, lambda);
            let mut worst: f64 = 0.0;
            for i in 0..w.len() {
                let orig = w[i];
                w[i] = orig + H;
                let up = logistic::objective(&w, b, &z, lambda);
                w[i] = orig - H;
                let down = logistic::objective(&w, b, &z, lambda);
                w[i] = orig;
                worst = worst.max(rel(gw[i], (up - down) / (2.0 * H)));
            }
            let orig = b;
            b = orig + H;
            let up = logistic::objective(&w, b, &z, lambda);
            b = orig - H;
            let down = logistic::objective(&w, b, &z, lambda);
            worst = worst.max(rel(gb, (up - down) / (2.0 * H)));
            Ok(worst)
        }
        ModelKind::Nn => {
            let p = MlpParams {
                hidden: 8,
                init_scale: 0.5,
                ..MlpParams::default()
            };
            let mut net = Mlp::init(z.dim(), &p, rng.gen());
            for b in net.b1.iter_mut() {
                *b = rng.gen_range(-0.5..0.5);
            }
            let (_, g) = mlp::objective_and_gradient(&net, &z, p.l2);
            let mut theta = net.params();
            let mut worst: f64 = 0.0;
            for i in 0..theta.len() {
                let orig = theta[i];
                theta[i] = orig + H;
                net.set_params(&theta);
                let up = mlp::objective_and_gradient(&net, &z, p.l2).0;
                theta[i] = orig - H;
                net.set_params(&theta);
                let down = mlp::objective_and_gradient(&net, &z, p.l2).0;
                theta[i] = orig;
                worst = worst.max(rel(g[i], (up - down) / (2.0 * H)));
            }
            Ok(worst)
        }
        other => Err(Error::Parameter(format!("{other} has no gradient to check"))),
    }
}
