use noiseprobe::models::{
    gradient_check, logistic_gradient, train, Hyperparams, LabeledMatrix, ModelKind, Parameters, TrainedModel,
};
use noiseprobe::seeding;
use noiseprobe::Error;
use rand_distr_free::normal;

mod rand_distr_free {
    use rand::Rng;

    /// Box-Muller standard normal.
    pub fn normal(rng: &mut impl Rng) -> f64 {
        let u1: f64 = rng.gen_range(f64::EPSILON..1.0);
        let u2: f64 = rng.gen();
        (-2.0 * u1.ln()).sqrt() * (2.0 * std::f64::consts::PI * u2).cos()
    }
}

fn ids(n: usize) -> Vec<String> {
    (0..n).map(|i| format!("r{i}")).collect()
}

/// Two Gaussian blobs whose centres are 6 sigma apart, clipped to ±2.5 sigma,
/// so a 1-sigma margin always remains.
fn blobs(n_per_class: usize, seed: u64) -> LabeledMatrix {
    let mut rng = seeding::rng(seed);
    let mut rows = Vec::new();
    let mut labels = Vec::new();
    for class in 0..2u8 {
        let centre = if class == 0 { -3.0 } else { 3.0 };
        for _ in 0..n_per_class {
            let a = normal(&mut rng).clamp(-2.5, 2.5);
            let b = normal(&mut rng);
            rows.push(vec![centre + a, 10.0 * b + 4.0]);
            labels.push(class);
        }
    }
    LabeledMatrix::new(rows, labels, ids(2 * n_per_class)).unwrap()
}

fn random_rows(n: usize, d: usize, seed: u64) -> LabeledMatrix {
    let mut rng = seeding::rng(seed);
    let rows: Vec<Vec<f64>> = (0..n).map(|_| (0..d).map(|_| normal(&mut rng)).collect()).collect();
    let labels = (0..n).map(|i| (i % 2) as u8).collect();
    LabeledMatrix::new(rows, labels, ids(n)).unwrap()
}

#[test]
fn every_model_separates_the_blobs() {
    let data = blobs(30, 1);
    for kind in ModelKind::ALL {
        let m = train(kind, &data, &Hyperparams::default(), 7).unwrap();
        let pred = m.predict(&data).unwrap();
        assert_eq!(pred, data.labels, "{kind} training accuracy below 1");
    }
}

#[test]
fn single_class_is_degenerate() {
    let mut data = blobs(5, 2);
    data.labels.iter_mut().for_each(|l| *l = 0);
    for kind in ModelKind::ALL {
        assert!(matches!(
            train(kind, &data, &Hyperparams::default(), 1),
            Err(Error::DegenerateData(_))
        ));
    }
}

#[test]
fn training_is_bit_exact() {
    let data = random_rows(30, 6, 3);
    for kind in ModelKind::ALL {
        let a = train(kind, &data, &Hyperparams::default(), 11).unwrap();
        let b = train(kind, &data, &Hyperparams::default(), 11).unwrap();
        assert_eq!(a, b, "{kind}");
    }
}

#[test]
fn only_the_network_depends_on_the_seed() {
    let data = random_rows(30, 6, 4);
    for kind in ModelKind::ALL {
        let a = train(kind, &data, &Hyperparams::default(), 1).unwrap();
        let b = train(kind, &data, &Hyperparams::default(), 2).unwrap();
        if kind == ModelKind::Nn {
            assert_ne!(a.parameters, b.parameters);
        } else {
            assert_eq!(a.parameters, b.parameters, "{kind}");
        }
    }
}

#[test]
fn zero_linear_model_predicts_negative() {
    let data = blobs(4, 5);
    let mut m = train(ModelKind::Lr, &data, &Hyperparams::default(), 0).unwrap();
    m.parameters = Parameters::Linear {
        weights: vec![0.0; 2],
        bias: 0.0,
    };
    assert!(m.predict(&data).unwrap().iter().all(|&p| p == 0));
    m.kind = ModelKind::Svm;
    assert!(m.predict(&data).unwrap().iter().all(|&p| p == 0));
}

#[test]
fn shallow_tree_predicts_the_majority() {
    let rows: Vec<Vec<f64>> = (0..20).map(|i| vec![i as f64]).collect();
    let labels: Vec<u8> = (0..20).map(|i| u8::from(i != 3 && i != 11)).collect();
    let data = LabeledMatrix::new(rows, labels, ids(20)).unwrap();
    let mut hp = Hyperparams::default();
    hp.dt.max_depth = 0;
    let m = train(ModelKind::Dt, &data, &hp, 0).unwrap();
    assert!(m.predict(&data).unwrap().iter().all(|&p| p == 1));
    // even split leaf goes to 0
    let tie = LabeledMatrix::new(vec![vec![0.0], vec![1.0]], vec![0, 1], ids(2)).unwrap();
    assert_eq!(
        train(ModelKind::Dt, &tie, &hp, 0).unwrap().predict(&tie).unwrap(),
        vec![0, 0]
    );
}

#[test]
fn dimension_mismatch_is_a_schema_error() {
    let m = train(ModelKind::Lr, &blobs(4, 6), &Hyperparams::default(), 0).unwrap();
    let wrong = random_rows(4, 3, 0);
    assert!(matches!(m.predict(&wrong), Err(Error::Schema(_))));
}

#[test]
fn gradients_match_finite_differences() {
    let data = random_rows(10, 5, 9);
    let lr = gradient_check(ModelKind::Lr, &data, 1).unwrap();
    assert!(lr < 1e-6, "LR {lr}");
    let nn = gradient_check(ModelKind::Nn, &data, 1).unwrap();
    assert!(nn < 1e-4, "NN {nn}");
}

#[test]
fn zero_weight_bias_gradient_closed_form() {
    // centred data, w = 0, b = 0: every probability is 1/2
    let data = LabeledMatrix::new(
        vec![vec![-1.0], vec![1.0], vec![-2.0], vec![2.0], vec![0.0]],
        vec![1, 1, 0, 1, 0],
        ids(5),
    )
    .unwrap();
    let (_, gb) = logistic_gradient(&[0.0], 0.0, &data, 0.2);
    let mean_label = 3.0 / 5.0;
    // gradient of the loss; the log-likelihood ascent direction is its negative
    assert!((-gb - (mean_label - 0.5)).abs() < 1e-9);
}

#[test]
fn scaling_a_column_changes_nothing() {
    let data = random_rows(40, 4, 12);
    let mut scaled_rows: Vec<Vec<f64>> = data.rows().map(|r| r.to_vec()).collect();
    for r in scaled_rows.iter_mut() {
        r[2] *= 1000.0;
    }
    let scaled = LabeledMatrix::new(scaled_rows, data.labels.clone(), data.clip_ids.clone()).unwrap();
    for kind in ModelKind::ALL {
        let a = train(kind, &data, &Hyperparams::default(), 3)
            .unwrap()
            .predict(&data)
            .unwrap();
        let b = train(kind, &scaled, &Hyperparams::default(), 3)
            .unwrap()
            .predict(&scaled)
            .unwrap();
        assert_eq!(a, b, "{kind}");
    }
}

#[test]
fn json_round_trip() {
    let data = blobs(6, 8);
    let dir = tempfile::tempdir().unwrap();
    for kind in ModelKind::ALL {
        let m = train(kind, &data, &Hyperparams::default(), 5).unwrap();
        let p = dir.path().join(format!("{kind}.json"));
        m.save(&p).unwrap();
        let back = TrainedModel::load(&p).unwrap();
        assert_eq!(back, m);
        assert_eq!(back.predict(&data).unwrap(), m.predict(&data).unwrap());
    }
    let mut bad: serde_json::Value = serde_json::from_str(
        &train(ModelKind::Lr, &data, &Hyperparams::default(), 0)
            .unwrap()
            .to_json()
            .unwrap(),
    )
    .unwrap();
    bad["format_version"] = 99.into();
    assert!(TrainedModel::from_json(&bad.to_string()).is_err());
}
