//! Bernoulli Naive Bayes with Laplace smoothing.

use super::{Hyperparameters, TrainingData, CLASS_COUNT};

/// Class priors and per-feature Bernoulli parameters, stored in log space.
#[derive(Debug, Clone, PartialEq)]
pub struct NaiveBayesModel {
    pub schema_version: String,
    pub n_features: usize,
    pub log_prior: Vec<f64>,
    /// `log P(x_j = 1 | class)`, one row per class.
    pub log_p: Vec<Vec<f64>>,
    /// `log P(x_j = 0 | class)`, one row per class.
    pub log_q: Vec<Vec<f64>>,
}

impl NaiveBayesModel {
    /// Unnormalized log posterior per class.
    pub fn log_posterior(&self, x: &[u8]) -> [f64; CLASS_COUNT] {
        let mut scores = [0.0; CLASS_COUNT];
        for (c, score) in scores.iter_mut().enumerate() {
            let mut s = self.log_prior[c];
            for (j, &v) in x.iter().enumerate() {
                s += if v == 1 {
                    self.log_p[c][j]
                } else {
                    self.log_q[c][j]
                };
            }
            *score = s;
        }
        scores
    }
}

/// Estimates smoothed class-conditional probabilities:
/// `P(x_j = 1 | c) = (count_cj + alpha) / (n_c + 2 alpha)`, which keeps every
/// probability strictly inside (0, 1).
pub(super) fn train(hyper: &Hyperparameters, data: &TrainingData) -> NaiveBayesModel {
    let alpha = hyper.smoothing;
    let f = data.n_features();
    let n = data.len() as f64;
    let class_counts = data.class_counts();

    let mut feature_counts = vec![vec![0.0f64; f]; CLASS_COUNT];
    for (x, y) in data.rows() {
        let counts = &mut feature_counts[y.index()];
        for (j, &v) in x.iter().enumerate() {
            if v == 1 {
                counts[j] += 1.0;
            }
        }
    }

    let mut log_prior = vec![0.0; CLASS_COUNT];
    let mut log_p = vec![vec![0.0; f]; CLASS_COUNT];
    let mut log_q = vec![vec![0.0; f]; CLASS_COUNT];
    for c in 0..CLASS_COUNT {
        let n_c = class_counts[c] as f64;
        log_prior[c] = (n_c / n).ln();
        for j in 0..f {
            let theta = (feature_counts[c][j] + alpha) / (n_c + 2.0 * alpha);
            log_p[c][j] = theta.ln();
            log_q[c][j] = (1.0 - theta).ln();
        }
    }

    NaiveBayesModel {
        schema_version: data.schema_version.clone(),
        n_features: f,
        log_prior,
        log_p,
        log_q,
    }
}
