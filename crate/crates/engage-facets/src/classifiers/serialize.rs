//! Versioned flat text serialization for trained models.
//!
//! Layout: a format line, `kind`, `schema`, and `classes` headers, then
//! shape-prefixed parameter arrays (`param <name> <dims...>` followed by one
//! line of values per row), terminated by `end`. Values are decimal with 17
//! significant digits, so deserialization reproduces every `f64` bit-exactly.

use std::collections::BTreeMap;

use super::{AnnModel, LinearModel, NaiveBayesModel, TrainedModel, CLASS_COUNT};
use crate::dataset::Facet;
use crate::{Error, Result};

const FORMAT_LINE: &str = "engage-facets-model v1";

fn fmt_value(v: f64) -> String {
    format!("{v:.16e}")
}

fn write_matrix(out: &mut String, name: &str, rows: &[Vec<f64>]) {
    out.push_str(&format!("param {name} {} {}\n", rows.len(), rows[0].len()));
    for row in rows {
        let line: Vec<String> = row.iter().map(|&v| fmt_value(v)).collect();
        out.push_str(&line.join(" "));
        out.push('\n');
    }
}

fn write_vector(out: &mut String, name: &str, values: &[f64]) {
    out.push_str(&format!("param {name} {}\n", values.len()));
    let line: Vec<String> = values.iter().map(|&v| fmt_value(v)).collect();
    out.push_str(&line.join(" "));
    out.push('\n');
}

/// Serializes a trained model to the flat text format.
pub fn model_to_text(model: &TrainedModel) -> String {
    let mut out = String::new();
    out.push_str(FORMAT_LINE);
    out.push('\n');
    out.push_str(&format!("kind {}\n", model.kind().token()));
    out.push_str(&format!("schema {}\n", model.schema_version()));
    let class_names: Vec<&str> = Facet::ALL.iter().map(|f| f.name()).collect();
    out.push_str(&format!("classes {}\n", class_names.join(" ")));
    match model {
        TrainedModel::NaiveBayes(m) => {
            write_vector(&mut out, "log_prior", &m.log_prior);
            write_matrix(&mut out, "log_p", &m.log_p);
            write_matrix(&mut out, "log_q", &m.log_q);
        }
        TrainedModel::Logistic(m) | TrainedModel::LinearSvm(m) => {
            write_matrix(&mut out, "weights", &m.weights);
            write_vector(&mut out, "bias", &m.bias);
        }
        TrainedModel::Ann(m) => {
            write_matrix(&mut out, "w1", &m.w1);
            write_vector(&mut out, "b1", &m.b1);
            write_matrix(&mut out, "w2", &m.w2);
            write_vector(&mut out, "b2", &m.b2);
        }
    }
    out.push_str("end\n");
    out
}

enum Param {
    Vector(Vec<f64>),
    Matrix(Vec<Vec<f64>>),
}

fn bad(message: impl Into<String>) -> Error {
    Error::ModelFormat(message.into())
}

fn parse_values(line: &str, expected: usize, name: &str) -> Result<Vec<f64>> {
    let values: Vec<f64> = line
        .split_ascii_whitespace()
        .map(|t| t.parse::<f64>().map_err(|_| bad(format!("bad value '{t}' in {name}"))))
        .collect::<Result<_>>()?;
    if values.len() != expected {
        return Err(bad(format!(
            "param {name}: expected {expected} values per row, found {}",
            values.len()
        )));
    }
    Ok(values)
}

/// Parses the flat text format back into a trained model.
pub fn model_from_text(text: &str) -> Result<TrainedModel> {
    let mut lines = text.lines();
    if lines.next() != Some(FORMAT_LINE) {
        return Err(bad("missing format line"));
    }
    let kind = lines
        .next()
        .and_then(|l| l.strip_prefix("kind "))
        .ok_or_else(|| bad("missing kind line"))?
        .to_string();
    let schema = lines
        .next()
        .and_then(|l| l.strip_prefix("schema "))
        .ok_or_else(|| bad("missing schema line"))?
        .to_string();
    let classes = lines
        .next()
        .and_then(|l| l.strip_prefix("classes "))
        .ok_or_else(|| bad("missing classes line"))?;
    let expected_classes: Vec<&str> = Facet::ALL.iter().map(|f| f.name()).collect();
    if classes.split_ascii_whitespace().collect::<Vec<_>>() != expected_classes {
        return Err(bad(format!("unexpected class order '{classes}'")));
    }

    let mut params: BTreeMap<String, Param> = BTreeMap::new();
    let mut saw_end = false;
    while let Some(line) = lines.next() {
        if line == "end" {
            saw_end = true;
            break;
        }
        let rest = line
            .strip_prefix("param ")
            .ok_or_else(|| bad(format!("unexpected line '{line}'")))?;
        let mut tokens = rest.split_ascii_whitespace();
        let name = tokens.next().ok_or_else(|| bad("param without a name"))?.to_string();
        let dims: Vec<usize> = tokens
            .map(|t| t.parse().map_err(|_| bad(format!("bad dimension '{t}'"))))
            .collect::<Result<_>>()?;
        let value = match dims.as_slice() {
            [len] => {
                let line = lines.next().ok_or_else(|| bad("truncated param"))?;
                Param::Vector(parse_values(line, *len, &name)?)
            }
            [rows, cols] => {
                let mut matrix = Vec::with_capacity(*rows);
                for _ in 0..*rows {
                    let line = lines.next().ok_or_else(|| bad("truncated param"))?;
                    matrix.push(parse_values(line, *cols, &name)?);
                }
                Param::Matrix(matrix)
            }
            _ => return Err(bad(format!("param {name}: unsupported rank"))),
        };
        params.insert(name, value);
    }
    if !saw_end {
        return Err(bad("missing end line"));
    }

    let take_vector = |params: &mut BTreeMap<String, Param>, name: &str| -> Result<Vec<f64>> {
        match params.remove(name) {
            Some(Param::Vector(v)) => Ok(v),
            Some(Param::Matrix(_)) => Err(bad(format!("param {name} should be 1-d"))),
            None => Err(bad(format!("missing param {name}"))),
        }
    };
    let take_matrix =
        |params: &mut BTreeMap<String, Param>, name: &str| -> Result<Vec<Vec<f64>>> {
            match params.remove(name) {
                Some(Param::Matrix(m)) => Ok(m),
                Some(Param::Vector(_)) => Err(bad(format!("param {name} should be 2-d"))),
                None => Err(bad(format!("missing param {name}"))),
            }
        };
    let check_classes = |rows: usize, name: &str| -> Result<()> {
        if rows != CLASS_COUNT {
            return Err(bad(format!("param {name}: expected {CLASS_COUNT} rows")));
        }
        Ok(())
    };

    let model = match kind.as_str() {
        "naive_bayes" => {
            let log_prior = take_vector(&mut params, "log_prior")?;
            let log_p = take_matrix(&mut params, "log_p")?;
            let log_q = take_matrix(&mut params, "log_q")?;
            check_classes(log_prior.len(), "log_prior")?;
            check_classes(log_p.len(), "log_p")?;
            check_classes(log_q.len(), "log_q")?;
            if log_p[0].len() != log_q[0].len() {
                return Err(bad("log_p and log_q widths differ"));
            }
            TrainedModel::NaiveBayes(NaiveBayesModel {
                schema_version: schema,
                n_features: log_p[0].len(),
                log_prior,
                log_p,
                log_q,
            })
        }
        "logistic" | "linear_svm" => {
            let weights = take_matrix(&mut params, "weights")?;
            let bias = take_vector(&mut params, "bias")?;
            check_classes(weights.len(), "weights")?;
            check_classes(bias.len(), "bias")?;
            let linear = LinearModel {
                schema_version: schema,
                n_features: weights[0].len(),
                weights,
                bias,
            };
            if kind == "logistic" {
                TrainedModel::Logistic(linear)
            } else {
                TrainedModel::LinearSvm(linear)
            }
        }
        "ann" => {
            let w1 = take_matrix(&mut params, "w1")?;
            let b1 = take_vector(&mut params, "b1")?;
            let w2 = take_matrix(&mut params, "w2")?;
            let b2 = take_vector(&mut params, "b2")?;
            let hidden = w1.len();
            if b1.len() != hidden || w2.first().map(Vec::len) != Some(hidden) {
                return Err(bad("inconsistent hidden layer shapes"));
            }
            check_classes(w2.len(), "w2")?;
            check_classes(b2.len(), "b2")?;
            TrainedModel::Ann(AnnModel {
                schema_version: schema,
                n_features: w1.first().map(Vec::len).unwrap_or(0),
                hidden_units: hidden,
                w1,
                b1,
                w2,
                b2,
            })
        }
        other => return Err(bad(format!("unknown kind '{other}'"))),
    };
    if !params.is_empty() {
        let extra: Vec<&String> = params.keys().collect();
        return Err(bad(format!("unexpected params {extra:?}")));
    }
    Ok(model)
}
