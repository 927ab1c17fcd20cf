//! Run configuration: built-in defaults, overridden by a plain-text
//! key-value config file, overridden by command-line flags (flags win).

use std::path::PathBuf;

use engage_facets::classifiers::{ClassifierKind, ClassifierSpec};

use crate::CliError;

/// Optional per-kind hyperparameter overrides from the config file.
#[derive(Debug, Clone, Default)]
pub struct HyperOverrides {
    pub nb_smoothing: Option<f64>,
    pub logistic_learning_rate: Option<f64>,
    pub logistic_epochs: Option<usize>,
    pub logistic_l2: Option<f64>,
    pub svm_epochs: Option<usize>,
    pub svm_c: Option<f64>,
    pub ann_hidden_units: Option<usize>,
    pub ann_learning_rate: Option<f64>,
    pub ann_epochs: Option<usize>,
}

#[derive(Debug, Clone)]
pub struct RunConfig {
    pub seed: u64,
    pub frame_rate_hz: f64,
    pub k: usize,
    pub schema_version: String,
    pub classifiers: Vec<ClassifierKind>,
    pub input: Option<PathBuf>,
    pub out: Option<PathBuf>,
    pub keywords_path: Option<PathBuf>,
    pub n_interactions: usize,
    pub duration_ms: u64,
    pub hyper: HyperOverrides,
}

impl Default for RunConfig {
    fn default() -> Self {
        Self {
            seed: 42,
            frame_rate_hz: 25.0,
            k: 5,
            schema_version: "v1".into(),
            classifiers: ClassifierKind::ALL.to_vec(),
            input: None,
            out: None,
            keywords_path: None,
            n_interactions: 4,
            duration_ms: 660_000,
            hyper: HyperOverrides::default(),
        }
    }
}

impl RunConfig {
    /// Applies `key = value` lines from a config file. Unknown keys and
    /// unparsable values are usage errors.
    pub fn apply_file(&mut self, text: &str, path: &str) -> Result<(), CliError> {
        for (idx, raw) in text.lines().enumerate() {
            let line = raw.trim();
            if line.is_empty() || line.starts_with('#') {
                continue;
            }
            let (key, value) = line.split_once('=').ok_or_else(|| {
                CliError::usage(format!("{path}:{}: expected `key = value`", idx + 1))
            })?;
            self.apply(key.trim(), value.trim())
                .map_err(|e| CliError::usage(format!("{path}:{}: {}", idx + 1, e.message)))?;
        }
        Ok(())
    }

    pub fn apply(&mut self, key: &str, value: &str) -> Result<(), CliError> {
        fn parse<T: std::str::FromStr>(key: &str, value: &str) -> Result<T, CliError> {
            value
                .parse()
                .map_err(|_| CliError::usage(format!("bad value '{value}' for {key}")))
        }
        match key {
            "seed" => self.seed = parse(key, value)?,
            "frame_rate" => self.frame_rate_hz = parse(key, value)?,
            "k" => self.k = parse(key, value)?,
            "schema" => self.schema_version = value.to_string(),
            "classifiers" => {
                self.classifiers = value
                    .split(',')
                    .map(|t| {
                        t.trim()
                            .parse::<ClassifierKind>()
                            .map_err(|e| CliError::usage(e.to_string()))
                    })
                    .collect::<Result<_, _>>()?;
            }
            "input" => self.input = Some(PathBuf::from(value)),
            "out" => self.out = Some(PathBuf::from(value)),
            "keywords" => self.keywords_path = Some(PathBuf::from(value)),
            "n_interactions" => self.n_interactions = parse(key, value)?,
            "duration_ms" => self.duration_ms = parse(key, value)?,
            "nb_smoothing" => self.hyper.nb_smoothing = Some(parse(key, value)?),
            "logistic_learning_rate" => {
                self.hyper.logistic_learning_rate = Some(parse(key, value)?)
            }
            "logistic_epochs" => self.hyper.logistic_epochs = Some(parse(key, value)?),
            "logistic_l2" => self.hyper.logistic_l2 = Some(parse(key, value)?),
            "svm_epochs" => self.hyper.svm_epochs = Some(parse(key, value)?),
            "svm_c" => self.hyper.svm_c = Some(parse(key, value)?),
            "ann_hidden_units" => self.hyper.ann_hidden_units = Some(parse(key, value)?),
            "ann_learning_rate" => self.hyper.ann_learning_rate = Some(parse(key, value)?),
            "ann_epochs" => self.hyper.ann_epochs = Some(parse(key, value)?),
            other => {
                return Err(CliError::usage(format!("unknown config key '{other}'")));
            }
        }
        Ok(())
    }

    /// The full classifier spec for `kind`: defaults with any configured
    /// overrides applied. The run seed is always present.
    pub fn spec_for(&self, kind: ClassifierKind) -> ClassifierSpec {
        let mut spec = ClassifierSpec::new(kind, self.seed);
        let h = &self.hyper;
        match kind {
            ClassifierKind::NaiveBayes => {
                if let Some(v) = h.nb_smoothing {
                    spec.hyper.smoothing = v;
                }
            }
            ClassifierKind::Logistic => {
                if let Some(v) = h.logistic_learning_rate {
                    spec.hyper.learning_rate = v;
                }
                if let Some(v) = h.logistic_epochs {
                    spec.hyper.epochs = v;
                }
                if let Some(v) = h.logistic_l2 {
                    spec.hyper.l2 = v;
                }
            }
            ClassifierKind::LinearSvm => {
                if let Some(v) = h.svm_epochs {
                    spec.hyper.epochs = v;
                }
                if let Some(v) = h.svm_c {
                    spec.hyper.margin_c = v;
                }
            }
            ClassifierKind::Ann => {
                if let Some(v) = h.ann_hidden_units {
                    spec.hyper.hidden_units = v;
                }
                if let Some(v) = h.ann_learning_rate {
                    spec.hyper.learning_rate = v;
                }
                if let Some(v) = h.ann_epochs {
                    spec.hyper.epochs = v;
                }
            }
        }
        spec
    }

    pub fn validate(&self) -> Result<(), CliError> {
        if self.k < 2 {
            return Err(CliError::usage(format!("k must be at least 2, got {}", self.k)));
        }
        if !(self.frame_rate_hz > 0.0 && self.frame_rate_hz <= 1000.0) {
            return Err(CliError::usage(format!(
                "frame rate must be in (0, 1000] Hz, got {}",
                self.frame_rate_hz
            )));
        }
        if self.classifiers.is_empty() {
            return Err(CliError::usage("no classifiers selected"));
        }
        if self.duration_ms == 0 {
            return Err(CliError::usage("duration_ms must be positive"));
        }
        Ok(())
    }
}
