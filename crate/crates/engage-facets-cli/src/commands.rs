//! The four pipeline commands. All outputs are written atomically
//! (temp file + rename) and are byte-identical for identical configuration
//! and seed.

use std::fs;
use std::path::{Path, PathBuf};

use log::info;

use engage_facets::classifiers::{model_to_text, train, TrainingData};
use engage_facets::dataset::{
    attach_labels, balance, stratified_kfold, write_dataset_csv, write_folds_csv,
    read_dataset_csv, LabeledDataset,
};
use engage_facets::evaluation::{
    class_metrics, cross_validate, render_confusion_and_metrics, render_report,
    ConfusionMatrix, PipelineReport, ReportFormat,
};
use engage_facets::features::{assemble_features, FeatureSchema, KeywordConfig};
use engage_facets::synthgen::{generate_corpus, ScenarioConfig};
use engage_facets::timeline::{
    discretize, parse_tier_file, write_tier_file, Channel, ColumnKey, InteractionBundle, Owner,
};

use crate::config::RunConfig;
use crate::CliError;

fn io_err(path: &Path, e: impl std::fmt::Display) -> CliError {
    CliError::io(format!("{}: {e}", path.display()))
}

fn write_atomic(path: &Path, content: &str) -> Result<(), CliError> {
    let file_name = path
        .file_name()
        .and_then(|n| n.to_str())
        .ok_or_else(|| CliError::io(format!("bad output path {}", path.display())))?;
    let tmp = path.with_file_name(format!("{file_name}.tmp"));
    fs::write(&tmp, content).map_err(|e| io_err(&tmp, e))?;
    fs::rename(&tmp, path).map_err(|e| io_err(path, e))
}

fn load_keywords(config: &RunConfig) -> Result<KeywordConfig, CliError> {
    match &config.keywords_path {
        None => Ok(KeywordConfig::default()),
        Some(path) => {
            let text = fs::read_to_string(path).map_err(|e| io_err(path, e))?;
            KeywordConfig::parse(&text)
                .map_err(|e| CliError::usage(format!("{}: {e}", path.display())))
        }
    }
}

fn schema_for(config: &RunConfig) -> Result<FeatureSchema, CliError> {
    FeatureSchema::by_version(&config.schema_version)
        .map_err(|e| CliError::usage(e.to_string()))
}

// ---------------------------------------------------------------------------
// generate
// ---------------------------------------------------------------------------

/// Ground-truth sidecar: per-frame engagement states for both participants
/// at the configured frame rate.
fn truth_csv(bundle: &InteractionBundle, frame_rate_hz: f64) -> Result<String, CliError> {
    let mut clocked = bundle.clone();
    clocked.frame_rate_hz = frame_rate_hz;
    let table = discretize(&clocked).map_err(|e| CliError::io(e.to_string()))?;
    let p1 = table
        .column(ColumnKey::new(Owner::Participant1, Channel::EngagementState))
        .map_err(|e| CliError::io(e.to_string()))?;
    let p2 = table
        .column(ColumnKey::new(Owner::Participant2, Channel::EngagementState))
        .map_err(|e| CliError::io(e.to_string()))?;
    let mut out = String::from("frame_index,p1_state,p2_state\n");
    for (i, (a, b)) in p1.iter().zip(p2).enumerate() {
        out.push_str(&format!("{i},{a},{b}\n"));
    }
    Ok(out)
}

pub fn cmd_generate(config: &RunConfig) -> Result<(), CliError> {
    if config.n_interactions == 0 {
        return Err(CliError::usage("--n-interactions must be at least 1"));
    }
    let out = config.out.clone().unwrap_or_else(|| PathBuf::from("corpus"));
    let keywords = load_keywords(config)?;

    let mut base = ScenarioConfig::default_config(config.seed);
    base.keywords = keywords;
    if config.duration_ms != base.span_ms() {
        // Keep the default 60/40 informative/quiz split.
        let informative = (config.duration_ms * 3 / 5).max(1);
        base.phases[0].duration_ms = informative;
        base.phases[1].duration_ms = (config.duration_ms - informative).max(1);
    }

    let bundles = generate_corpus(config.n_interactions, &base, config.seed)
        .map_err(|e| CliError::usage(e.to_string()))?;

    for bundle in &bundles {
        let dir = out.join(&bundle.interaction_id);
        fs::create_dir_all(&dir).map_err(|e| io_err(&dir, e))?;
        write_atomic(&dir.join("tiers.tsv"), &write_tier_file(&bundle.tiers))?;
        write_atomic(&dir.join("truth.csv"), &truth_csv(bundle, config.frame_rate_hz)?)?;
    }
    info!(
        "generated {} interactions ({} ms each) under {}",
        bundles.len(),
        base.span_ms(),
        out.display()
    );
    Ok(())
}

// ---------------------------------------------------------------------------
// extract
// ---------------------------------------------------------------------------

fn interaction_dirs(input: &Path) -> Result<Vec<PathBuf>, CliError> {
    let mut dirs: Vec<PathBuf> = fs::read_dir(input)
        .map_err(|e| io_err(input, e))?
        .filter_map(|entry| entry.ok().map(|e| e.path()))
        .filter(|p| p.join("tiers.tsv").is_file())
        .collect();
    dirs.sort();
    if dirs.is_empty() {
        return Err(CliError::io(format!(
            "{}: no interaction directories with tiers.tsv found",
            input.display()
        )));
    }
    Ok(dirs)
}

pub fn cmd_extract(config: &RunConfig) -> Result<(), CliError> {
    let input = config.input.clone().unwrap_or_else(|| PathBuf::from("corpus"));
    let out = config.out.clone().unwrap_or_else(|| PathBuf::from("features"));
    let schema = schema_for(config)?;
    let keywords = load_keywords(config)?;
    fs::create_dir_all(&out).map_err(|e| io_err(&out, e))?;

    let mut written = 0usize;
    for dir in interaction_dirs(&input)? {
        let tier_path = dir.join("tiers.tsv");
        let text = fs::read_to_string(&tier_path).map_err(|e| io_err(&tier_path, e))?;
        let tiers = parse_tier_file(&text).map_err(|e| io_err(&tier_path, e))?;
        let id = dir
            .file_name()
            .and_then(|n| n.to_str())
            .unwrap_or("interaction")
            .to_string();
        let bundle = InteractionBundle::from_tiers(id, tiers, config.frame_rate_hz)
            .map_err(|e| CliError::usage(e.to_string()))?;
        let table = discretize(&bundle).map_err(|e| io_err(&tier_path, e))?;

        for owner in [Owner::Participant1, Owner::Participant2] {
            let matrix = assemble_features(&table, owner, &schema, &keywords)
                .map_err(|e| io_err(&tier_path, e))?;
            let states = table
                .column(ColumnKey::new(owner, Channel::EngagementState))
                .map_err(|e| io_err(&tier_path, e))?;
            let rows = attach_labels(&matrix, states).map_err(|e| io_err(&tier_path, e))?;
            let dataset = LabeledDataset {
                schema_version: schema.version.clone(),
                rows,
            };
            let csv = write_dataset_csv(&dataset, &schema)
                .map_err(|e| CliError::io(e.to_string()))?;
            let name = format!("{}_{}.csv", bundle.interaction_id, owner.token());
            write_atomic(&out.join(name), &csv)?;
            written += 1;
        }
    }
    info!("wrote {written} feature files under {}", out.display());
    Ok(())
}

// ---------------------------------------------------------------------------
// evaluate
// ---------------------------------------------------------------------------

fn feature_files(input: &Path) -> Result<Vec<PathBuf>, CliError> {
    let mut files: Vec<PathBuf> = fs::read_dir(input)
        .map_err(|e| io_err(input, e))?
        .filter_map(|entry| entry.ok().map(|e| e.path()))
        .filter(|p| p.extension().is_some_and(|e| e == "csv"))
        .collect();
    files.sort();
    if files.is_empty() {
        return Err(CliError::io(format!(
            "{}: no feature csv files found",
            input.display()
        )));
    }
    Ok(files)
}

pub fn cmd_evaluate(config: &RunConfig) -> Result<(), CliError> {
    let input = config.input.clone().unwrap_or_else(|| PathBuf::from("features"));
    let out = config.out.clone().unwrap_or_else(|| PathBuf::from("reports"));
    let schema = schema_for(config)?;
    fs::create_dir_all(&out).map_err(|e| io_err(&out, e))?;

    let mut pooled = LabeledDataset::new(schema.version.clone());
    for path in feature_files(&input)? {
        let text = fs::read_to_string(&path).map_err(|e| io_err(&path, e))?;
        let part = read_dataset_csv(&text).map_err(|e| io_err(&path, e))?;
        if part.schema_version != pooled.schema_version {
            return Err(CliError::usage(format!(
                "{}: schema {} does not match {}",
                path.display(),
                part.schema_version,
                pooled.schema_version
            )));
        }
        pooled.rows.extend(part.rows);
    }
    info!("pooled {} labeled rows", pooled.len());

    let balanced =
        balance(&pooled, config.seed).map_err(|e| CliError::usage(e.to_string()))?;
    let per_class = balanced.class_counts()[0];
    write_atomic(
        &out.join("balanced.csv"),
        &write_dataset_csv(&balanced, &schema).map_err(|e| CliError::io(e.to_string()))?,
    )?;

    let folds = stratified_kfold(&balanced, config.k, config.seed)
        .map_err(|e| CliError::usage(e.to_string()))?;
    write_atomic(&out.join("folds.csv"), &write_folds_csv(&folds))?;

    let models_dir = out.join("models");
    fs::create_dir_all(&models_dir).map_err(|e| io_err(&models_dir, e))?;

    let mut reports = Vec::new();
    let mut errors = Vec::new();
    for &kind in &config.classifiers {
        let spec = config.spec_for(kind);
        match cross_validate(&balanced, &spec, config.k, config.seed) {
            Ok(report) => {
                info!("{kind}: pooled accuracy {}%", report.display.accuracy_pct);
                reports.push(report);
            }
            Err(e) => {
                errors.push(format!("{kind}: {e}"));
                continue;
            }
        }
        // A final model trained on the full balanced set.
        let full = TrainingData::from_rows(schema.version.clone(), &balanced.rows)
            .and_then(|data| train(&spec, &data));
        match full {
            Ok(model) => {
                write_atomic(
                    &models_dir.join(format!("{}.model", kind.token())),
                    &model_to_text(&model),
                )?;
            }
            Err(e) => errors.push(format!("{kind}: final model: {e}")),
        }
    }

    let report = PipelineReport {
        seed: config.seed,
        k: config.k,
        schema_version: schema.version.clone(),
        balanced_total: balanced.len(),
        per_class,
        reports,
        incomplete: !errors.is_empty(),
        errors: errors.clone(),
    };
    write_atomic(
        &out.join("report.txt"),
        &render_report(&report, ReportFormat::Text).map_err(|e| CliError::io(e.to_string()))?,
    )?;
    write_atomic(
        &out.join("report.json"),
        &render_report(&report, ReportFormat::Json).map_err(|e| CliError::io(e.to_string()))?,
    )?;

    if !errors.is_empty() {
        return Err(CliError::numerical(format!(
            "evaluation incomplete: {}",
            errors.join("; ")
        )));
    }
    Ok(())
}

// ---------------------------------------------------------------------------
// metrics
// ---------------------------------------------------------------------------

fn parse_matrix(text: &str) -> Result<ConfusionMatrix, CliError> {
    let rows: Vec<&str> = text.lines().filter(|l| !l.trim().is_empty()).collect();
    if rows.len() != 3 {
        return Err(CliError::usage(format!(
            "expected 3 matrix rows, found {}",
            rows.len()
        )));
    }
    let mut counts = [[0u64; 3]; 3];
    for (p, line) in rows.iter().enumerate() {
        let fields: Vec<&str> = line.split(',').map(str::trim).collect();
        if fields.len() != 3 {
            return Err(CliError::usage(format!(
                "row {}: expected 3 comma-separated values",
                p + 1
            )));
        }
        for (a, field) in fields.iter().enumerate() {
            counts[p][a] = field.parse().map_err(|_| {
                CliError::usage(format!("row {}: '{field}' is not a non-negative integer", p + 1))
            })?;
        }
    }
    Ok(ConfusionMatrix::new(counts))
}

pub fn cmd_metrics(matrix_path: &Path) -> Result<(), CliError> {
    let text = fs::read_to_string(matrix_path).map_err(|e| io_err(matrix_path, e))?;
    let matrix = parse_matrix(&text)?;
    let metrics = class_metrics(&matrix).map_err(|e| CliError::usage(e.to_string()))?;
    print!("{}", render_confusion_and_metrics(&matrix, &metrics));
    Ok(())
}
