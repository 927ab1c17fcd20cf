//! Multinomial logistic regression trained by full-batch gradient descent.
//!
//! Loss: mean cross-entropy plus an L2 penalty on the weights (biases are
//! not regularized). Parameters start at zero, so training needs no
//! randomness and is trivially deterministic.

use super::{
    init_rng, softmax, uniform_init, Hyperparameters, LinearModel, TrainingData, CLASS_COUNT,
};
use crate::{Error, Result};

pub(super) fn train(hyper: &Hyperparameters, data: &TrainingData) -> Result<LinearModel> {
    let mut model = LinearModel::zeros(data.schema_version.clone(), data.n_features());
    for epoch in 0..hyper.epochs {
        let (loss, grad_w, grad_b) = loss_and_grad(&model, hyper.l2, data);
        if !loss.is_finite() {
            return Err(Error::NonFiniteLoss { epoch });
        }
        for c in 0..CLASS_COUNT {
            for (w, g) in model.weights[c].iter_mut().zip(&grad_w[c]) {
                *w -= hyper.learning_rate * g;
            }
            model.bias[c] -= hyper.learning_rate * grad_b[c];
        }
    }
    // The last update is otherwise unchecked.
    if hyper.epochs > 0 && !loss_and_grad(&model, hyper.l2, data).0.is_finite() {
        return Err(Error::NonFiniteLoss { epoch: hyper.epochs });
    }
    Ok(model)
}

/// Loss and full-batch gradient in one pass.
fn loss_and_grad(
    model: &LinearModel,
    l2: f64,
    data: &TrainingData,
) -> (f64, Vec<Vec<f64>>, Vec<f64>) {
    let f = model.n_features;
    let n = data.len() as f64;
    let mut grad_w = vec![vec![0.0; f]; CLASS_COUNT];
    let mut grad_b = vec![0.0; CLASS_COUNT];
    let mut loss = 0.0;

    for (x, y) in data.rows() {
        let proba = softmax(model.scores(x));
        loss -= proba[y.index()].max(f64::MIN_POSITIVE).ln();
        for c in 0..CLASS_COUNT {
            let delta = proba[c] - f64::from(c == y.index());
            grad_b[c] += delta;
            let row = &mut grad_w[c];
            for (j, &v) in x.iter().enumerate() {
                if v == 1 {
                    row[j] += delta;
                }
            }
        }
    }

    loss /= n;
    let mut penalty = 0.0;
    for c in 0..CLASS_COUNT {
        for (g, &w) in grad_w[c].iter_mut().zip(&model.weights[c]) {
            *g = *g / n + l2 * w;
            penalty += 0.5 * l2 * w * w;
        }
        grad_b[c] /= n;
    }
    (loss + penalty, grad_w, grad_b)
}

// ---------------------------------------------------------------------------
// Flat-parameter view for gradient checking
// ---------------------------------------------------------------------------

fn model_from_flat(point: &[f64], n_features: usize) -> LinearModel {
    let mut model = LinearModel::zeros("check", n_features);
    let mut it = point.iter();
    for c in 0..CLASS_COUNT {
        for w in model.weights[c].iter_mut() {
            *w = *it.next().expect("flat point length");
        }
    }
    for b in model.bias.iter_mut() {
        *b = *it.next().expect("flat point length");
    }
    assert!(it.next().is_none(), "flat point too long");
    model
}

pub(super) fn random_point(hyper: &Hyperparameters, n_features: usize) -> Vec<f64> {
    let mut rng = init_rng(hyper.seed);
    (0..CLASS_COUNT * n_features + CLASS_COUNT)
        .map(|_| uniform_init(&mut rng))
        .collect()
}

pub(super) fn flat_loss(point: &[f64], l2: f64, data: &TrainingData) -> f64 {
    let model = model_from_flat(point, data.n_features());
    let mut loss = 0.0;
    for (x, y) in data.rows() {
        let proba = softmax(model.scores(x));
        loss -= proba[y.index()].max(f64::MIN_POSITIVE).ln();
    }
    loss /= data.len() as f64;
    for row in &model.weights {
        for &w in row {
            loss += 0.5 * l2 * w * w;
        }
    }
    loss
}

pub(super) fn flat_grad(point: &[f64], l2: f64, data: &TrainingData) -> Vec<f64> {
    let model = model_from_flat(point, data.n_features());
    let (_, grad_w, grad_b) = loss_and_grad(&model, l2, data);
    let mut flat = Vec::with_capacity(point.len());
    for row in grad_w {
        flat.extend(row);
    }
    flat.extend(grad_b);
    flat
}
