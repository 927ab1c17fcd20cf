//! One-hidden-layer neural network: logistic-sigmoid hidden activation,
//! softmax output, cross-entropy loss, full-batch gradient descent.
//!
//! Parameters initialize uniform(-0.5, 0.5) from the spec seed, drawn in a
//! fixed order (hidden weights row by row, hidden biases, output weights,
//! output biases), which makes training bit-deterministic.

use super::{init_rng, sigmoid, softmax, uniform_init, Hyperparameters, TrainingData, CLASS_COUNT};
use crate::{Error, Result};

#[derive(Debug, Clone, PartialEq)]
pub struct AnnModel {
    pub schema_version: String,
    pub n_features: usize,
    pub hidden_units: usize,
    /// Hidden weights, one row per hidden unit.
    pub w1: Vec<Vec<f64>>,
    pub b1: Vec<f64>,
    /// Output weights, one row per class.
    pub w2: Vec<Vec<f64>>,
    pub b2: Vec<f64>,
}

impl AnnModel {
    fn init(schema_version: String, n_features: usize, hidden: usize, seed: u64) -> Self {
        let mut rng = init_rng(seed);
        let w1 = (0..hidden)
            .map(|_| (0..n_features).map(|_| uniform_init(&mut rng)).collect())
            .collect();
        let b1 = (0..hidden).map(|_| uniform_init(&mut rng)).collect();
        let w2 = (0..CLASS_COUNT)
            .map(|_| (0..hidden).map(|_| uniform_init(&mut rng)).collect())
            .collect();
        let b2 = (0..CLASS_COUNT).map(|_| uniform_init(&mut rng)).collect();
        Self {
            schema_version,
            n_features,
            hidden_units: hidden,
            w1,
            b1,
            w2,
            b2,
        }
    }

    fn hidden_activations(&self, x: &[u8]) -> Vec<f64> {
        (0..self.hidden_units)
            .map(|h| {
                let z = self.b1[h]
                    + self.w1[h]
                        .iter()
                        .zip(x)
                        .map(|(w, &v)| w * f64::from(v))
                        .sum::<f64>();
                sigmoid(z)
            })
            .collect()
    }

    /// Pre-softmax class scores.
    pub fn scores(&self, x: &[u8]) -> [f64; CLASS_COUNT] {
        let hidden = self.hidden_activations(x);
        self.output_scores(&hidden)
    }

    fn output_scores(&self, hidden: &[f64]) -> [f64; CLASS_COUNT] {
        let mut scores = [0.0; CLASS_COUNT];
        for (c, score) in scores.iter_mut().enumerate() {
            *score = self.b2[c]
                + self.w2[c].iter().zip(hidden).map(|(w, a)| w * a).sum::<f64>();
        }
        scores
    }
}

struct Gradients {
    w1: Vec<Vec<f64>>,
    b1: Vec<f64>,
    w2: Vec<Vec<f64>>,
    b2: Vec<f64>,
}

/// Backpropagated full-batch mean-cross-entropy loss and gradients.
fn loss_and_grad(model: &AnnModel, l2: f64, data: &TrainingData) -> (f64, Gradients) {
    let hidden = model.hidden_units;
    let n = data.len() as f64;
    let mut grads = Gradients {
        w1: vec![vec![0.0; model.n_features]; hidden],
        b1: vec![0.0; hidden],
        w2: vec![vec![0.0; hidden]; CLASS_COUNT],
        b2: vec![0.0; CLASS_COUNT],
    };
    let mut loss = 0.0;

    for (x, y) in data.rows() {
        let a1 = model.hidden_activations(x);
        let proba = softmax(model.output_scores(&a1));
        loss -= proba[y.index()].max(f64::MIN_POSITIVE).ln();

        let mut delta_out = [0.0; CLASS_COUNT];
        for c in 0..CLASS_COUNT {
            delta_out[c] = proba[c] - f64::from(c == y.index());
            grads.b2[c] += delta_out[c];
            for (g, a) in grads.w2[c].iter_mut().zip(&a1) {
                *g += delta_out[c] * a;
            }
        }
        for (h, &a) in a1.iter().enumerate() {
            let upstream: f64 = (0..CLASS_COUNT).map(|c| delta_out[c] * model.w2[c][h]).sum();
            let delta_hidden = upstream * a * (1.0 - a);
            grads.b1[h] += delta_hidden;
            let row = &mut grads.w1[h];
            for (j, &v) in x.iter().enumerate() {
                if v == 1 {
                    row[j] += delta_hidden;
                }
            }
        }
    }

    loss /= n;
    let mut penalty = 0.0;
    for h in 0..hidden {
        for (g, &w) in grads.w1[h].iter_mut().zip(&model.w1[h]) {
            *g = *g / n + l2 * w;
            penalty += 0.5 * l2 * w * w;
        }
        grads.b1[h] /= n;
    }
    for c in 0..CLASS_COUNT {
        for (g, &w) in grads.w2[c].iter_mut().zip(&model.w2[c]) {
            *g = *g / n + l2 * w;
            penalty += 0.5 * l2 * w * w;
        }
        grads.b2[c] /= n;
    }
    (loss + penalty, grads)
}

pub(super) fn train(hyper: &Hyperparameters, data: &TrainingData) -> Result<AnnModel> {
    let mut model = AnnModel::init(
        data.schema_version.clone(),
        data.n_features(),
        hyper.hidden_units.max(1),
        hyper.seed,
    );
    let lr = hyper.learning_rate;
    for epoch in 0..hyper.epochs {
        let (loss, grads) = loss_and_grad(&model, hyper.l2, data);
        if !loss.is_finite() {
            return Err(Error::NonFiniteLoss { epoch });
        }
        for h in 0..model.hidden_units {
            for (w, g) in model.w1[h].iter_mut().zip(&grads.w1[h]) {
                *w -= lr * g;
            }
            model.b1[h] -= lr * grads.b1[h];
        }
        for c in 0..CLASS_COUNT {
            for (w, g) in model.w2[c].iter_mut().zip(&grads.w2[c]) {
                *w -= lr * g;
            }
            model.b2[c] -= lr * grads.b2[c];
        }
    }
    // The last update is otherwise unchecked.
    if hyper.epochs > 0 && !loss_and_grad(&model, hyper.l2, data).0.is_finite() {
        return Err(Error::NonFiniteLoss { epoch: hyper.epochs });
    }
    Ok(model)
}

// ---------------------------------------------------------------------------
// Flat-parameter view for gradient checking
// ---------------------------------------------------------------------------

fn param_count(hidden: usize, n_features: usize) -> usize {
    hidden * n_features + hidden + CLASS_COUNT * hidden + CLASS_COUNT
}

fn model_from_flat(point: &[f64], hidden: usize, n_features: usize) -> AnnModel {
    assert_eq!(point.len(), param_count(hidden, n_features));
    let mut it = point.iter().copied();
    let mut take = |n: usize| -> Vec<f64> { (0..n).map(|_| it.next().unwrap()).collect() };
    let w1 = (0..hidden).map(|_| take(n_features)).collect();
    let b1 = take(hidden);
    let w2 = (0..CLASS_COUNT).map(|_| take(hidden)).collect();
    let b2 = take(CLASS_COUNT);
    AnnModel {
        schema_version: "check".into(),
        n_features,
        hidden_units: hidden,
        w1,
        b1,
        w2,
        b2,
    }
}

pub(super) fn random_point(hyper: &Hyperparameters, n_features: usize) -> Vec<f64> {
    let hidden = hyper.hidden_units.max(1);
    let mut rng = init_rng(hyper.seed);
    (0..param_count(hidden, n_features))
        .map(|_| uniform_init(&mut rng))
        .collect()
}

pub(super) fn flat_loss(point: &[f64], hyper: &Hyperparameters, data: &TrainingData) -> f64 {
    let model = model_from_flat(point, hyper.hidden_units.max(1), data.n_features());
    loss_and_grad(&model, hyper.l2, data).0
}

pub(super) fn flat_grad(point: &[f64], hyper: &Hyperparameters, data: &TrainingData) -> Vec<f64> {
    let model = model_from_flat(point, hyper.hidden_units.max(1), data.n_features());
    let (_, grads) = loss_and_grad(&model, hyper.l2, data);
    let mut flat = Vec::with_capacity(point.len());
    for row in grads.w1 {
        flat.extend(row);
    }
    flat.extend(grads.b1);
    for row in grads.w2 {
        flat.extend(row);
    }
    flat.extend(grads.b2);
    flat
}
