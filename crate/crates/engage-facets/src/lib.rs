//! Engagement facet classification pipeline for multi-party human-robot
//! interaction recordings.
//!
//! The crate covers the full path from annotation tier files to evaluation
//! reports:
//!
//! - [`timeline`]: tier-file parsing and discretization onto a frame clock,
//! - [`features`]: contextual and relational feature streams assembled into
//!   39-column binary feature matrices,
//! - [`dataset`]: facet labeling, class balancing, stratified folds,
//! - [`classifiers`]: from-scratch Naive Bayes, logistic regression, linear
//!   SVM, and one-hidden-layer neural network with a shared train/predict
//!   contract,
//! - [`evaluation`]: cross-validation, confusion matrices, per-class metrics,
//!   and report rendering,
//! - [`synthgen`]: a seeded synthetic corpus generator for end-to-end runs.
//!
//! All operations are deterministic for a fixed seed.

pub mod classifiers;
pub mod dataset;
mod error;
pub mod evaluation;
pub mod features;
pub mod synthgen;
pub mod timeline;
pub mod vocab;

pub use error::{Error, Result};
