//! From-scratch multiclass classifiers sharing one train/predict contract:
//! Bernoulli Naive Bayes, multinomial logistic regression, linear SVM
//! (one-vs-rest), and a one-hidden-layer neural network.
//!
//! All training is single-threaded and deterministic for a given seed.
//! Feature vectors are binary; class order is fixed to
//! [behavioral, emotional, mental].

mod ann;
mod naive_bayes;
mod logistic;
mod serialize;
mod svm;

use std::fmt;
use std::str::FromStr;

use rand::Rng;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

use crate::dataset::{Facet, LabeledDataset, LabeledRow};
use crate::{Error, Result};

pub use ann::AnnModel;
pub use naive_bayes::NaiveBayesModel;
pub use serialize::{model_from_text, model_to_text};

pub const CLASS_COUNT: usize = Facet::COUNT;

/// The implemented classifier kinds.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum ClassifierKind {
    NaiveBayes,
    Logistic,
    LinearSvm,
    Ann,
}

impl ClassifierKind {
    pub const ALL: [ClassifierKind; 4] = [
        ClassifierKind::NaiveBayes,
        ClassifierKind::Logistic,
        ClassifierKind::LinearSvm,
        ClassifierKind::Ann,
    ];

    pub fn token(self) -> &'static str {
        match self {
            ClassifierKind::NaiveBayes => "naive_bayes",
            ClassifierKind::Logistic => "logistic",
            ClassifierKind::LinearSvm => "linear_svm",
            ClassifierKind::Ann => "ann",
        }
    }
}

impl fmt::Display for ClassifierKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.token())
    }
}

impl FromStr for ClassifierKind {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        Self::ALL
            .iter()
            .copied()
            .find(|k| k.token() == s)
            .ok_or_else(|| Error::InvalidConfig(format!("unknown classifier '{s}'")))
    }
}

/// Complete hyperparameter set. Fields irrelevant to a kind are ignored by
/// its trainer.
#[derive(Debug, Clone, PartialEq)]
pub struct Hyperparameters {
    pub hidden_units: usize,
    pub learning_rate: f64,
    pub epochs: usize,
    pub l2: f64,
    pub smoothing: f64,
    pub margin_c: f64,
    pub seed: u64,
}

/// A classifier kind with its full hyperparameter set.
#[derive(Debug, Clone, PartialEq)]
pub struct ClassifierSpec {
    pub kind: ClassifierKind,
    pub hyper: Hyperparameters,
}

impl ClassifierSpec {
    /// A spec with the kind's default hyperparameters.
    pub fn new(kind: ClassifierKind, seed: u64) -> Self {
        let hyper = match kind {
            ClassifierKind::NaiveBayes => Hyperparameters {
                hidden_units: 0,
                learning_rate: 0.0,
                epochs: 0,
                l2: 0.0,
                smoothing: 1.0,
                margin_c: 0.0,
                seed,
            },
            ClassifierKind::Logistic => Hyperparameters {
                hidden_units: 0,
                learning_rate: 0.1,
                epochs: 500,
                l2: 1e-4,
                smoothing: 0.0,
                margin_c: 0.0,
                seed,
            },
            ClassifierKind::LinearSvm => Hyperparameters {
                hidden_units: 0,
                learning_rate: 0.0,
                epochs: 30,
                l2: 0.0,
                smoothing: 0.0,
                margin_c: 1.0,
                seed,
            },
            ClassifierKind::Ann => Hyperparameters {
                hidden_units: 16,
                learning_rate: 0.5,
                epochs: 300,
                l2: 0.0,
                smoothing: 0.0,
                margin_c: 0.0,
                seed,
            },
        };
        Self { kind, hyper }
    }
}

/// A borrowed view of training rows: binary feature vectors with facet
/// labels.
pub struct TrainingData<'a> {
    pub schema_version: String,
    features: Vec<&'a [u8]>,
    labels: Vec<Facet>,
}

impl<'a> TrainingData<'a> {
    pub fn new(
        schema_version: impl Into<String>,
        features: Vec<&'a [u8]>,
        labels: Vec<Facet>,
    ) -> Result<Self> {
        if features.len() != labels.len() {
            return Err(Error::LengthMismatch {
                context: "training data",
                left: features.len(),
                right: labels.len(),
            });
        }
        if features.is_empty() {
            return Err(Error::EmptyStream);
        }
        let width = features[0].len();
        for row in &features {
            if row.len() != width {
                return Err(Error::LengthMismatch {
                    context: "training data row width",
                    left: width,
                    right: row.len(),
                });
            }
        }
        Ok(Self {
            schema_version: schema_version.into(),
            features,
            labels,
        })
    }

    pub fn from_rows(schema_version: impl Into<String>, rows: &'a [LabeledRow]) -> Result<Self> {
        Self::new(
            schema_version,
            rows.iter().map(|r| r.features.as_slice()).collect(),
            rows.iter().map(|r| r.facet).collect(),
        )
    }

    /// Rows of `dataset` selected by `indices`, in the given order.
    pub fn from_indices(dataset: &'a LabeledDataset, indices: &[usize]) -> Result<Self> {
        Self::new(
            dataset.schema_version.clone(),
            indices
                .iter()
                .map(|&i| dataset.rows[i].features.as_slice())
                .collect(),
            indices.iter().map(|&i| dataset.rows[i].facet).collect(),
        )
    }

    pub fn len(&self) -> usize {
        self.features.len()
    }

    pub fn is_empty(&self) -> bool {
        self.features.is_empty()
    }

    pub fn n_features(&self) -> usize {
        self.features[0].len()
    }

    pub fn rows(&self) -> impl Iterator<Item = (&[u8], Facet)> + '_ {
        self.features.iter().copied().zip(self.labels.iter().copied())
    }

    pub fn class_counts(&self) -> [usize; CLASS_COUNT] {
        let mut counts = [0; CLASS_COUNT];
        for &label in &self.labels {
            counts[label.index()] += 1;
        }
        counts
    }
}

/// Linear decision function: per-class scores `w_c . x + b_c` mapped through
/// softmax. Shared by logistic regression and the linear SVM.
#[derive(Debug, Clone, PartialEq)]
pub struct LinearModel {
    pub schema_version: String,
    pub n_features: usize,
    /// One weight row per class.
    pub weights: Vec<Vec<f64>>,
    pub bias: Vec<f64>,
}

impl LinearModel {
    pub fn zeros(schema_version: impl Into<String>, n_features: usize) -> Self {
        Self {
            schema_version: schema_version.into(),
            n_features,
            weights: vec![vec![0.0; n_features]; CLASS_COUNT],
            bias: vec![0.0; CLASS_COUNT],
        }
    }

    pub fn scores(&self, x: &[u8]) -> [f64; CLASS_COUNT] {
        let mut scores = [0.0; CLASS_COUNT];
        for (c, score) in scores.iter_mut().enumerate() {
            *score = self.bias[c]
                + self.weights[c]
                    .iter()
                    .zip(x)
                    .map(|(w, &v)| w * f64::from(v))
                    .sum::<f64>();
        }
        scores
    }
}

/// A trained model of any kind, immutable and safe to share for prediction.
#[derive(Debug, Clone, PartialEq)]
pub enum TrainedModel {
    NaiveBayes(NaiveBayesModel),
    Logistic(LinearModel),
    LinearSvm(LinearModel),
    Ann(AnnModel),
}

impl TrainedModel {
    pub fn kind(&self) -> ClassifierKind {
        match self {
            TrainedModel::NaiveBayes(_) => ClassifierKind::NaiveBayes,
            TrainedModel::Logistic(_) => ClassifierKind::Logistic,
            TrainedModel::LinearSvm(_) => ClassifierKind::LinearSvm,
            TrainedModel::Ann(_) => ClassifierKind::Ann,
        }
    }

    pub fn schema_version(&self) -> &str {
        match self {
            TrainedModel::NaiveBayes(m) => &m.schema_version,
            TrainedModel::Logistic(m) | TrainedModel::LinearSvm(m) => &m.schema_version,
            TrainedModel::Ann(m) => &m.schema_version,
        }
    }

    pub fn n_features(&self) -> usize {
        match self {
            TrainedModel::NaiveBayes(m) => m.n_features,
            TrainedModel::Logistic(m) | TrainedModel::LinearSvm(m) => m.n_features,
            TrainedModel::Ann(m) => m.n_features,
        }
    }

    /// Class probabilities for one feature vector: non-negative, summing to
    /// one within 1e-9.
    pub fn predict_proba(&self, x: &[u8]) -> Result<[f64; CLASS_COUNT]> {
        if x.len() != self.n_features() {
            return Err(Error::SchemaMismatch {
                expected: format!("{} features", self.n_features()),
                found: format!("{} features", x.len()),
            });
        }
        let scores = match self {
            TrainedModel::NaiveBayes(m) => m.log_posterior(x),
            TrainedModel::Logistic(m) | TrainedModel::LinearSvm(m) => m.scores(x),
            TrainedModel::Ann(m) => m.scores(x),
        };
        Ok(softmax(scores))
    }

    /// The argmax facet; ties break toward the earlier class in
    /// [behavioral, emotional, mental] order.
    pub fn predict(&self, x: &[u8]) -> Result<Facet> {
        let proba = self.predict_proba(x)?;
        Ok(argmax_facet(&proba))
    }
}

/// First-maximum argmax over class order.
pub fn argmax_facet(proba: &[f64; CLASS_COUNT]) -> Facet {
    let mut best = 0;
    for (c, &p) in proba.iter().enumerate().skip(1) {
        if p > proba[best] {
            best = c;
        }
    }
    Facet::from_index(best).expect("class index in range")
}

/// Numerically stable softmax.
pub(crate) fn softmax(scores: [f64; CLASS_COUNT]) -> [f64; CLASS_COUNT] {
    let max = scores.iter().cloned().fold(f64::NEG_INFINITY, f64::max);
    let mut out = [0.0; CLASS_COUNT];
    let mut total = 0.0;
    for (o, s) in out.iter_mut().zip(&scores) {
        *o = (s - max).exp();
        total += *o;
    }
    for o in &mut out {
        *o /= total;
    }
    out
}

pub(crate) fn sigmoid(z: f64) -> f64 {
    1.0 / (1.0 + (-z).exp())
}

/// Uniform(-0.5, 0.5) parameter initialization stream.
pub(crate) fn init_rng(seed: u64) -> ChaCha8Rng {
    ChaCha8Rng::seed_from_u64(seed)
}

pub(crate) fn uniform_init(rng: &mut ChaCha8Rng) -> f64 {
    rng.random::<f64>() - 0.5
}

/// Trains a model of the spec's kind. Requires at least one row per class;
/// deterministic for a given seed.
pub fn train(spec: &ClassifierSpec, data: &TrainingData) -> Result<TrainedModel> {
    for (facet, count) in Facet::ALL.iter().zip(data.class_counts()) {
        if count == 0 {
            return Err(Error::MissingFacet(facet.name()));
        }
    }
    match spec.kind {
        ClassifierKind::NaiveBayes => Ok(TrainedModel::NaiveBayes(naive_bayes::train(
            &spec.hyper,
            data,
        ))),
        ClassifierKind::Logistic => Ok(TrainedModel::Logistic(logistic::train(
            &spec.hyper,
            data,
        )?)),
        ClassifierKind::LinearSvm => Ok(TrainedModel::LinearSvm(svm::train(&spec.hyper, data))),
        ClassifierKind::Ann => Ok(TrainedModel::Ann(ann::train(&spec.hyper, data)?)),
    }
}

/// Compares analytic gradients of the training loss against central finite
/// differences (step 1e-5) at a seeded random parameter point. Returns the
/// maximum relative error over all parameters.
///
/// Only the gradient-trained kinds (logistic, ann) are supported.
pub fn gradient_check(spec: &ClassifierSpec, data: &TrainingData) -> Result<f64> {
    const STEP: f64 = 1e-5;
    match spec.kind {
        ClassifierKind::Logistic => {
            let point = logistic::random_point(&spec.hyper, data.n_features());
            let analytic = logistic::flat_grad(&point, spec.hyper.l2, data);
            let loss = |p: &[f64]| logistic::flat_loss(p, spec.hyper.l2, data);
            Ok(max_relative_error(&point, &analytic, loss, STEP))
        }
        ClassifierKind::Ann => {
            let point = ann::random_point(&spec.hyper, data.n_features());
            let analytic = ann::flat_grad(&point, &spec.hyper, data);
            let loss = |p: &[f64]| ann::flat_loss(p, &spec.hyper, data);
            Ok(max_relative_error(&point, &analytic, loss, STEP))
        }
        kind => Err(Error::UnsupportedOperation {
            kind: kind.token().into(),
            operation: "gradient_check".into(),
        }),
    }
}

fn max_relative_error<F: Fn(&[f64]) -> f64>(
    point: &[f64],
    analytic: &[f64],
    loss: F,
    step: f64,
) -> f64 {
    let mut max_err: f64 = 0.0;
    let mut probe = point.to_vec();
    for i in 0..point.len() {
        probe[i] = point[i] + step;
        let plus = loss(&probe);
        probe[i] = point[i] - step;
        let minus = loss(&probe);
        probe[i] = point[i];
        let numeric = (plus - minus) / (2.0 * step);
        let err = (analytic[i] - numeric).abs() / (analytic[i].abs() + numeric.abs()).max(1e-3);
        max_err = max_err.max(err);
    }
    max_err
}

/// Mean cross-entropy of a model's probabilities on a dataset. Test and
/// report helper.
pub fn mean_cross_entropy(model: &TrainedModel, data: &TrainingData) -> Result<f64> {
    let mut total = 0.0;
    for (x, y) in data.rows() {
        let p = model.predict_proba(x)?;
        total -= p[y.index()].max(f64::MIN_POSITIVE).ln();
    }
    Ok(total / data.len() as f64)
}

/// Fraction of rows whose prediction matches the label.
pub fn training_accuracy(model: &TrainedModel, data: &TrainingData) -> Result<f64> {
    let mut correct = 0usize;
    for (x, y) in data.rows() {
        if model.predict(x)? == y {
            correct += 1;
        }
    }
    Ok(correct as f64 / data.len() as f64)
}
