//! Cross-validated evaluation: confusion matrices (rows = predicted,
//! columns = actual), per-class TPR/FPR/precision/recall/F-score, and
//! text/JSON report rendering.
//!
//! The confusion orientation is fixed so that column sums equal per-class
//! instance counts regardless of classifier. Metrics display at 3 decimals
//! and accuracy at 2 decimals in percent, rounded half-up. Cross-validation
//! pools test predictions from all folds into a single matrix.

use serde::{Deserialize, Serialize};

use crate::classifiers::{train, ClassifierSpec, TrainingData};
use crate::dataset::{stratified_kfold, Facet, LabeledDataset};
use crate::{Error, Result};

/// 3x3 integer confusion counts; `counts[predicted][actual]`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
pub struct ConfusionMatrix {
    pub counts: [[u64; Facet::COUNT]; Facet::COUNT],
}

impl ConfusionMatrix {
    pub fn new(counts: [[u64; Facet::COUNT]; Facet::COUNT]) -> Self {
        Self { counts }
    }

    /// Accumulates (predicted, actual) pairs.
    pub fn from_pairs(pairs: &[(Facet, Facet)]) -> Self {
        let mut matrix = Self::default();
        for &(predicted, actual) in pairs {
            matrix.record(predicted, actual);
        }
        matrix
    }

    pub fn record(&mut self, predicted: Facet, actual: Facet) {
        self.counts[predicted.index()][actual.index()] += 1;
    }

    pub fn add(&mut self, other: &ConfusionMatrix) {
        for p in 0..Facet::COUNT {
            for a in 0..Facet::COUNT {
                self.counts[p][a] += other.counts[p][a];
            }
        }
    }

    pub fn row_sum(&self, class: usize) -> u64 {
        self.counts[class].iter().sum()
    }

    pub fn column_sum(&self, class: usize) -> u64 {
        (0..Facet::COUNT).map(|p| self.counts[p][class]).sum()
    }

    pub fn trace(&self) -> u64 {
        (0..Facet::COUNT).map(|c| self.counts[c][c]).sum()
    }

    pub fn total(&self) -> u64 {
        self.counts.iter().flatten().sum()
    }
}

/// Per-class rates. `recall` equals `tpr`; `f_score` is the harmonic mean of
/// precision and recall.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ClassRates {
    pub tpr: f64,
    pub fpr: f64,
    pub precision: f64,
    pub recall: f64,
    #[serde(rename = "f")]
    pub f_score: f64,
    /// Set when the class row sums to zero (the classifier never predicted
    /// the class) and precision is reported as 0 by convention.
    #[serde(default, skip_serializing_if = "std::ops::Not::not")]
    pub precision_undefined: bool,
}

/// Per-class rates in class order plus overall accuracy.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ClassMetrics {
    pub behavioral: ClassRates,
    pub emotional: ClassRates,
    pub mental: ClassRates,
    pub accuracy: f64,
}

impl ClassMetrics {
    pub fn class(&self, facet: Facet) -> &ClassRates {
        match facet {
            Facet::Behavioral => &self.behavioral,
            Facet::Emotional => &self.emotional,
            Facet::Mental => &self.mental,
        }
    }
}

/// Computes the Table-style per-class metrics from a confusion matrix.
///
/// For class c: recall = tpr = counts[c][c] / colsum(c);
/// precision = counts[c][c] / rowsum(c);
/// fpr = (rowsum(c) - counts[c][c]) / (total - colsum(c));
/// accuracy = trace / total. A zero column is an error; a zero row reports
/// precision 0 with a flag.
pub fn class_metrics(matrix: &ConfusionMatrix) -> Result<ClassMetrics> {
    let total = matrix.total();
    let mut rates = [ClassRates {
        tpr: 0.0,
        fpr: 0.0,
        precision: 0.0,
        recall: 0.0,
        f_score: 0.0,
        precision_undefined: false,
    }; Facet::COUNT];

    for facet in Facet::ALL {
        let c = facet.index();
        let col = matrix.column_sum(c);
        if col == 0 {
            return Err(Error::ZeroColumn(facet.name()));
        }
        let row = matrix.row_sum(c);
        let hit = matrix.counts[c][c] as f64;
        let recall = hit / col as f64;
        let (precision, undefined) = if row == 0 {
            (0.0, true)
        } else {
            (hit / row as f64, false)
        };
        let negatives = (total - col) as f64;
        let fpr = (row as f64 - hit) / negatives;
        let f_score = if precision + recall > 0.0 {
            2.0 * precision * recall / (precision + recall)
        } else {
            0.0
        };
        rates[c] = ClassRates {
            tpr: recall,
            fpr,
            precision,
            recall,
            f_score,
            precision_undefined: undefined,
        };
    }

    Ok(ClassMetrics {
        behavioral: rates[0],
        emotional: rates[1],
        mental: rates[2],
        accuracy: matrix.trace() as f64 / total as f64,
    })
}

// ---------------------------------------------------------------------------
// Rounding and display
// ---------------------------------------------------------------------------

/// Half-up rounding to `decimals` places (for non-negative values).
pub fn round_half_up(value: f64, decimals: u32) -> f64 {
    let scale = 10f64.powi(decimals as i32);
    (value * scale + 0.5).floor() / scale
}

/// A rate formatted at 3 decimals, half-up.
pub fn fmt_rate(value: f64) -> String {
    format!("{:.3}", round_half_up(value, 3))
}

/// An accuracy formatted as a percentage at 2 decimals, half-up.
pub fn fmt_pct(value: f64) -> String {
    format!("{:.2}", round_half_up(value * 100.0, 2))
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct ClassRatesDisplay {
    pub tpr: String,
    pub fpr: String,
    pub precision: String,
    pub recall: String,
    pub f: String,
}

impl ClassRatesDisplay {
    fn from_rates(rates: &ClassRates) -> Self {
        Self {
            tpr: fmt_rate(rates.tpr),
            fpr: fmt_rate(rates.fpr),
            precision: fmt_rate(rates.precision),
            recall: fmt_rate(rates.recall),
            f: fmt_rate(rates.f_score),
        }
    }
}

/// Rounded values exactly as shown in the text report.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct MetricsDisplay {
    pub accuracy_pct: String,
    pub behavioral: ClassRatesDisplay,
    pub emotional: ClassRatesDisplay,
    pub mental: ClassRatesDisplay,
}

impl MetricsDisplay {
    pub fn from_metrics(metrics: &ClassMetrics) -> Self {
        Self {
            accuracy_pct: fmt_pct(metrics.accuracy),
            behavioral: ClassRatesDisplay::from_rates(&metrics.behavioral),
            emotional: ClassRatesDisplay::from_rates(&metrics.emotional),
            mental: ClassRatesDisplay::from_rates(&metrics.mental),
        }
    }

    fn class(&self, facet: Facet) -> &ClassRatesDisplay {
        match facet {
            Facet::Behavioral => &self.behavioral,
            Facet::Emotional => &self.emotional,
            Facet::Mental => &self.mental,
        }
    }
}

// ---------------------------------------------------------------------------
// Cross-validation
// ---------------------------------------------------------------------------

/// One fold's held-out result.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct FoldResult {
    pub fold: usize,
    pub confusion: ConfusionMatrix,
    pub accuracy: f64,
}

/// A classifier's cross-validated evaluation: per-fold results, the pooled
/// confusion matrix, and metrics at full precision plus rounded display
/// values.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct EvaluationReport {
    pub classifier: String,
    pub seed: u64,
    pub k: usize,
    pub folds: Vec<FoldResult>,
    pub confusion: ConfusionMatrix,
    pub metrics: ClassMetrics,
    pub accuracy: f64,
    pub display: MetricsDisplay,
}

impl EvaluationReport {
    /// Builds the derived metric fields from a pooled confusion matrix.
    pub fn from_confusion(
        classifier: impl Into<String>,
        seed: u64,
        k: usize,
        folds: Vec<FoldResult>,
        confusion: ConfusionMatrix,
    ) -> Result<Self> {
        let metrics = class_metrics(&confusion)?;
        Ok(Self {
            classifier: classifier.into(),
            seed,
            k,
            folds,
            confusion,
            accuracy: metrics.accuracy,
            display: MetricsDisplay::from_metrics(&metrics),
            metrics,
        })
    }
}

/// Stratified k-fold cross-validation of one classifier spec: trains on the
/// complement of each fold, predicts the fold, pools the confusion counts.
/// Deterministic for fixed seeds; training errors carry the fold index.
pub fn cross_validate(
    dataset: &LabeledDataset,
    spec: &ClassifierSpec,
    k: usize,
    seed: u64,
) -> Result<EvaluationReport> {
    let folds = stratified_kfold(dataset, k, seed)?;
    let mut in_test = vec![false; dataset.len()];
    let mut pooled = ConfusionMatrix::default();
    let mut fold_results = Vec::with_capacity(k);

    for (fold_idx, fold) in folds.iter().enumerate() {
        for &i in fold {
            in_test[i] = true;
        }
        let train_indices: Vec<usize> =
            (0..dataset.len()).filter(|&i| !in_test[i]).collect();
        let training = TrainingData::from_indices(dataset, &train_indices)
            .map_err(|e| Error::FoldFailed {
                fold: fold_idx,
                source: Box::new(e),
            })?;
        let model = train(spec, &training).map_err(|e| Error::FoldFailed {
            fold: fold_idx,
            source: Box::new(e),
        })?;

        let mut fold_matrix = ConfusionMatrix::default();
        for &i in fold {
            let row = &dataset.rows[i];
            let predicted = model.predict(&row.features).map_err(|e| Error::FoldFailed {
                fold: fold_idx,
                source: Box::new(e),
            })?;
            fold_matrix.record(predicted, row.facet);
        }
        pooled.add(&fold_matrix);
        fold_results.push(FoldResult {
            fold: fold_idx,
            accuracy: fold_matrix.trace() as f64 / fold_matrix.total() as f64,
            confusion: fold_matrix,
        });
        for &i in fold {
            in_test[i] = false;
        }
    }

    EvaluationReport::from_confusion(spec.kind.token(), seed, k, fold_results, pooled)
}

// ---------------------------------------------------------------------------
// Report documents
// ---------------------------------------------------------------------------

/// The full evaluation document: a classifier comparison plus per-classifier
/// detail blocks.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PipelineReport {
    pub seed: u64,
    pub k: usize,
    pub schema_version: String,
    pub balanced_total: usize,
    pub per_class: usize,
    pub reports: Vec<EvaluationReport>,
    #[serde(default, skip_serializing_if = "std::ops::Not::not")]
    pub incomplete: bool,
    #[serde(default, skip_serializing_if = "Vec::is_empty")]
    pub errors: Vec<String>,
}

/// Output format of [`render_report`].
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum ReportFormat {
    Text,
    Json,
}

/// Renders the confusion matrix and class-metric rows shared by the text
/// report and the standalone metrics command.
pub fn render_confusion_and_metrics(matrix: &ConfusionMatrix, metrics: &ClassMetrics) -> String {
    let display = MetricsDisplay::from_metrics(metrics);
    let mut out = String::new();
    out.push_str("confusion matrix (rows = predicted, columns = actual)\n");
    out.push_str(&format!(
        "  {:<12}{:>12}{:>12}{:>12}\n",
        "", "behavioral", "emotional", "mental"
    ));
    for facet in Facet::ALL {
        let row = matrix.counts[facet.index()];
        out.push_str(&format!(
            "  {:<12}{:>12}{:>12}{:>12}\n",
            facet.name(),
            row[0],
            row[1],
            row[2]
        ));
    }
    out.push_str("class metrics\n");
    out.push_str(&format!(
        "  {:<12}{:>12}{:>12}{:>12}\n",
        "metric", "behavioral", "emotional", "mental"
    ));
    type DisplayGetter = fn(&ClassRatesDisplay) -> &String;
    let metric_rows: [(&str, DisplayGetter); 5] = [
        ("tpr", |d| &d.tpr),
        ("fpr", |d| &d.fpr),
        ("precision", |d| &d.precision),
        ("recall", |d| &d.recall),
        ("f_score", |d| &d.f),
    ];
    for (name, get) in metric_rows {
        out.push_str(&format!(
            "  {:<12}{:>12}{:>12}{:>12}\n",
            name,
            get(display.class(Facet::Behavioral)),
            get(display.class(Facet::Emotional)),
            get(display.class(Facet::Mental))
        ));
    }
    if Facet::ALL
        .iter()
        .any(|&f| metrics.class(f).precision_undefined)
    {
        out.push_str("  note: precision reported as 0 for classes never predicted\n");
    }
    out.push_str(&format!("accuracy: {}%\n", display.accuracy_pct));
    out
}

fn render_text(report: &PipelineReport) -> String {
    let mut out = String::new();
    out.push_str("engagement facet evaluation\n");
    out.push_str(&format!(
        "seed {}  k {}  schema {}\n",
        report.seed, report.k, report.schema_version
    ));
    out.push_str(&format!(
        "balanced instances: {} ({} per class)\n",
        report.balanced_total, report.per_class
    ));
    if report.incomplete {
        out.push_str("status: INCOMPLETE\n");
        for error in &report.errors {
            out.push_str(&format!("  error: {error}\n"));
        }
    }
    if !report.reports.is_empty() {
        out.push_str("\nclassifier accuracy (%)\n");
        for entry in &report.reports {
            out.push_str(&format!(
                "  {:<12}{:>8}\n",
                entry.classifier, entry.display.accuracy_pct
            ));
        }
    }
    for entry in &report.reports {
        out.push_str(&format!("\n== {} ==\n", entry.classifier));
        out.push_str(&render_confusion_and_metrics(&entry.confusion, &entry.metrics));
        out.push_str("fold accuracy (%)\n");
        for fold in &entry.folds {
            out.push_str(&format!("  fold {}  {}\n", fold.fold, fmt_pct(fold.accuracy)));
        }
    }
    out
}

/// Renders the report document, mirroring the accuracy-table, confusion
/// matrix, and class-metric layouts in the text format; JSON carries full
/// precision plus the rounded display values.
pub fn render_report(report: &PipelineReport, format: ReportFormat) -> Result<String> {
    match format {
        ReportFormat::Text => Ok(render_text(report)),
        ReportFormat::Json => {
            let mut json = serde_json::to_string_pretty(report)?;
            json.push('\n');
            Ok(json)
        }
    }
}

/// Parses a JSON report document.
pub fn parse_report_json(text: &str) -> Result<PipelineReport> {
    Ok(serde_json::from_str(text)?)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::classifiers::ClassifierKind;
    use crate::dataset::{LabeledRow, Provenance};
    use crate::features::FEATURE_COUNT;
    use crate::timeline::Owner;

    /// A fixed balanced-set confusion matrix with hand-checked metrics, used
    /// as the oracle throughout.
    pub(crate) fn reference_matrix() -> ConfusionMatrix {
        ConfusionMatrix::new([[6347, 1318, 916], [384, 4893, 1153], [683, 1203, 5345]])
    }

    fn signal_dataset(per_class: usize) -> LabeledDataset {
        let mut dataset = LabeledDataset::new("v1");
        for facet in Facet::ALL {
            for i in 0..per_class {
                let mut features = vec![0u8; FEATURE_COUNT];
                features[facet.index()] = 1;
                // A couple of irrelevant always-on columns.
                features[10] = 1;
                features[20] = (i % 2) as u8;
                dataset.rows.push(LabeledRow {
                    features,
                    facet,
                    provenance: Provenance {
                        interaction_id: "sig".into(),
                        participant: Owner::Participant1,
                        frame_index: facet.index() * per_class + i,
                    },
                });
            }
        }
        dataset
    }

    #[test]
    fn confusion_records_pairs_in_predicted_by_actual_orientation() {
        let matrix =
            ConfusionMatrix::from_pairs(&[(Facet::Behavioral, Facet::Emotional)]);
        assert_eq!(matrix.counts[0][1], 1);
        assert_eq!(matrix.total(), 1);

        let perfect = ConfusionMatrix::from_pairs(&[
            (Facet::Behavioral, Facet::Behavioral),
            (Facet::Emotional, Facet::Emotional),
            (Facet::Mental, Facet::Mental),
        ]);
        assert_eq!(perfect.trace(), 3);
        assert_eq!(perfect.counts[0][0], 1);
    }

    #[test]
    fn reference_matrix_columns_sum_to_7414() {
        let matrix = reference_matrix();
        for c in 0..3 {
            assert_eq!(matrix.column_sum(c), 7414);
        }
        assert_eq!(matrix.total(), 22_242);
    }

    #[test]
    fn reference_matrix_reproduces_hand_checked_metrics() {
        let metrics = class_metrics(&reference_matrix()).unwrap();
        let display = MetricsDisplay::from_metrics(&metrics);

        assert_eq!(display.behavioral.tpr, "0.856");
        assert_eq!(display.behavioral.fpr, "0.151");
        assert_eq!(display.behavioral.precision, "0.740");
        assert_eq!(display.behavioral.f, "0.794");

        assert_eq!(display.emotional.tpr, "0.660");
        assert_eq!(display.emotional.fpr, "0.104");
        assert_eq!(display.emotional.precision, "0.761");
        assert_eq!(display.emotional.f, "0.707");

        assert_eq!(display.mental.tpr, "0.721");
        assert_eq!(display.mental.fpr, "0.127");
        assert_eq!(display.mental.precision, "0.739");
        assert_eq!(display.mental.f, "0.730");

        assert_eq!(display.accuracy_pct, "74.57");
        // recall = tpr by definition.
        for facet in Facet::ALL {
            let rates = metrics.class(facet);
            assert_eq!(rates.tpr, rates.recall);
        }
    }

    #[test]
    fn balanced_accuracy_equals_mean_recall() {
        let metrics = class_metrics(&reference_matrix()).unwrap();
        let mean_recall = (metrics.behavioral.recall
            + metrics.emotional.recall
            + metrics.mental.recall)
            / 3.0;
        assert!((metrics.accuracy - mean_recall).abs() < 1e-12);
    }

    #[test]
    fn metrics_are_scale_invariant() {
        let base = class_metrics(&reference_matrix()).unwrap();
        let mut scaled = reference_matrix();
        for row in &mut scaled.counts {
            for v in row {
                *v *= 7;
            }
        }
        let scaled = class_metrics(&scaled).unwrap();
        for facet in Facet::ALL {
            let (a, b) = (base.class(facet), scaled.class(facet));
            assert!((a.tpr - b.tpr).abs() < 1e-12);
            assert!((a.fpr - b.fpr).abs() < 1e-12);
            assert!((a.precision - b.precision).abs() < 1e-12);
            assert!((a.f_score - b.f_score).abs() < 1e-12);
        }
        assert!((base.accuracy - scaled.accuracy).abs() < 1e-12);
    }

    #[test]
    fn zero_column_is_an_error_and_zero_row_sets_the_flag() {
        let no_actual_emotional =
            ConfusionMatrix::new([[5, 0, 1], [1, 0, 1], [0, 0, 4]]);
        assert!(matches!(
            class_metrics(&no_actual_emotional),
            Err(Error::ZeroColumn("emotional"))
        ));

        let never_predicts_behavioral =
            ConfusionMatrix::new([[0, 0, 0], [5, 4, 1], [1, 2, 5]]);
        let metrics = class_metrics(&never_predicts_behavioral).unwrap();
        assert_eq!(metrics.behavioral.precision, 0.0);
        assert!(metrics.behavioral.precision_undefined);
        assert!(!metrics.emotional.precision_undefined);
    }

    #[test]
    fn identity_matrix_metrics_are_perfect() {
        let matrix = ConfusionMatrix::new([[100, 0, 0], [0, 100, 0], [0, 0, 100]]);
        let metrics = class_metrics(&matrix).unwrap();
        for facet in Facet::ALL {
            let rates = metrics.class(facet);
            assert_eq!(rates.tpr, 1.0);
            assert_eq!(rates.fpr, 0.0);
            assert_eq!(rates.precision, 1.0);
            assert_eq!(rates.f_score, 1.0);
        }
        assert_eq!(metrics.accuracy, 1.0);
    }

    #[test]
    fn uniform_matrix_accuracy_is_one_third() {
        let matrix = ConfusionMatrix::new([[4, 4, 4], [4, 4, 4], [4, 4, 4]]);
        let metrics = class_metrics(&matrix).unwrap();
        assert!((metrics.accuracy - 1.0 / 3.0).abs() < 1e-12);
    }

    #[test]
    fn cross_validation_covers_every_row_exactly_once() {
        let dataset = signal_dataset(2); // 6 rows
        let spec = ClassifierSpec::new(ClassifierKind::NaiveBayes, 5);
        let report = cross_validate(&dataset, &spec, 2, 5).unwrap();
        assert_eq!(report.confusion.total(), 6);
        assert_eq!(report.folds.len(), 2);
    }

    #[test]
    fn logistic_on_separable_data_exceeds_90_percent() {
        let dataset = signal_dataset(25);
        let spec = ClassifierSpec::new(ClassifierKind::Logistic, 7);
        let report = cross_validate(&dataset, &spec, 5, 7).unwrap();
        assert!(report.accuracy >= 0.90, "accuracy {}", report.accuracy);
        assert_eq!(report.confusion.total() as usize, dataset.len());
    }

    #[test]
    fn cross_validation_is_deterministic() {
        let dataset = signal_dataset(10);
        let spec = ClassifierSpec::new(ClassifierKind::Ann, 3);
        let a = cross_validate(&dataset, &spec, 3, 9).unwrap();
        let b = cross_validate(&dataset, &spec, 3, 9).unwrap();
        assert_eq!(a, b);
    }

    #[test]
    fn column_sums_are_invariant_across_classifiers() {
        let dataset = signal_dataset(10);
        let nb = cross_validate(
            &dataset,
            &ClassifierSpec::new(ClassifierKind::NaiveBayes, 1),
            5,
            1,
        )
        .unwrap();
        let lr = cross_validate(
            &dataset,
            &ClassifierSpec::new(ClassifierKind::Logistic, 1),
            5,
            1,
        )
        .unwrap();
        for c in 0..3 {
            assert_eq!(nb.confusion.column_sum(c), lr.confusion.column_sum(c));
            assert_eq!(nb.confusion.column_sum(c), 10);
        }
    }

    fn table_report() -> PipelineReport {
        let report = EvaluationReport::from_confusion(
            "ann",
            42,
            5,
            vec![],
            reference_matrix(),
        )
        .unwrap();
        PipelineReport {
            seed: 42,
            k: 5,
            schema_version: "v1".into(),
            balanced_total: 22_242,
            per_class: 7_414,
            reports: vec![report],
            incomplete: false,
            errors: vec![],
        }
    }

    #[test]
    fn text_report_metric_rows_match_reference_values() {
        let text = render_report(&table_report(), ReportFormat::Text).unwrap();
        assert!(text.contains("ann"));
        assert!(text.contains("tpr                0.856       0.660       0.721"));
        assert!(text.contains("fpr                0.151       0.104       0.127"));
        assert!(text.contains("precision          0.740       0.761       0.739"));
        assert!(text.contains("f_score            0.794       0.707       0.730"));
        assert!(text.contains("accuracy: 74.57%"));
    }

    #[test]
    fn empty_comparison_omits_the_accuracy_section() {
        let mut report = table_report();
        report.reports.clear();
        let text = render_report(&report, ReportFormat::Text).unwrap();
        assert!(!text.contains("classifier accuracy"));
    }

    #[test]
    fn json_report_round_trips_at_display_precision() {
        let report = table_report();
        let json = render_report(&report, ReportFormat::Json).unwrap();
        let parsed = parse_report_json(&json).unwrap();
        assert_eq!(parsed, report);
        let text_a = render_report(&report, ReportFormat::Text).unwrap();
        let text_b = render_report(&parsed, ReportFormat::Text).unwrap();
        assert_eq!(text_a, text_b);
    }
}
