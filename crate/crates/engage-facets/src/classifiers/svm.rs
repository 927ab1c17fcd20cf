//! Linear one-vs-rest SVM trained with hinge-loss subgradient descent.
//!
//! Pegasos-style schedule: regularization `lambda = 1 / (C * n)`, step size
//! `1 / (lambda * t)` with a global step counter, one seeded shuffle of the
//! sample order per epoch. All three binary problems share each pass. The
//! bias is unregularized and updated only on margin violations.

use super::{init_rng, Hyperparameters, LinearModel, TrainingData, CLASS_COUNT};
use rand::Rng;

pub(super) fn train(hyper: &Hyperparameters, data: &TrainingData) -> LinearModel {
    let n = data.len();
    let lambda = 1.0 / (hyper.margin_c * n as f64);
    let mut model = LinearModel::zeros(data.schema_version.clone(), data.n_features());
    let mut rng = init_rng(hyper.seed);
    let mut order: Vec<usize> = (0..n).collect();
    let features: Vec<&[u8]> = data.rows().map(|(x, _)| x).collect();
    let labels: Vec<usize> = data.rows().map(|(_, y)| y.index()).collect();

    let mut t = 1u64;
    for _ in 0..hyper.epochs {
        for i in 0..n {
            let j = rng.random_range(i..n);
            order.swap(i, j);
        }
        for &i in &order {
            let eta = 1.0 / (lambda * t as f64);
            let shrink = 1.0 - eta * lambda;
            let x = features[i];
            for c in 0..CLASS_COUNT {
                let y = if labels[i] == c { 1.0 } else { -1.0 };
                let score = model.bias[c]
                    + model.weights[c]
                        .iter()
                        .zip(x)
                        .map(|(w, &v)| w * f64::from(v))
                        .sum::<f64>();
                let weights = &mut model.weights[c];
                if y * score < 1.0 {
                    for (j, w) in weights.iter_mut().enumerate() {
                        *w = shrink * *w + eta * y * f64::from(x[j]);
                    }
                    model.bias[c] += eta * y;
                } else {
                    for w in weights.iter_mut() {
                        *w *= shrink;
                    }
                }
            }
            t += 1;
        }
    }
    model
}
