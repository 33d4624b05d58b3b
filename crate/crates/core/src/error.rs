//! Crate-wide error type.

use std::path::PathBuf;
use thiserror::Error;

/// Errors produced by ingestion, evaluation and analysis operations.
#[derive(Debug, Error)]
pub enum Error {
    #[error("i/o error: {0}")]
    Io(#[from] std::io::Error),

    #[error("csv error: {0}")]
    Csv(#[from] csv::Error),

    #[error("missing file: {0}")]
    MissingFile(PathBuf),

    #[error("malformed header: {0}")]
    MalformedHeader(String),

    #[error("duplicate station id: {0}")]
    DuplicateStation(String),

    #[error("invalid series for station {station}: {reason}")]
    InvalidSeries { station: String, reason: String },

    #[error("coordinates out of range: lon {lon}, lat {lat}")]
    InvalidCoordinates { lon: f64, lat: f64 },

    #[error("length mismatch: {forecasts} forecasts vs {targets} targets")]
    LengthMismatch { forecasts: usize, targets: usize },

    #[error("need at least {need} values, got {got}")]
    TooFewValues { need: usize, got: usize },

    #[error("non-finite input at index {0}")]
    NonFinite(usize),

    #[error("zero target at index {index}; percentage metric undefined")]
    ZeroTarget { index: usize },

    #[error("benchmark metric zero; improvement undefined")]
    ZeroBenchmark,

    #[error("need at least two distinct base methods")]
    TooFewBases,

    #[error("series too short: need {need} values, got {got}")]
    SeriesTooShort { need: usize, got: usize },

    #[error("degenerate series: zero variance")]
    DegenerateSeries,

    #[error("nonpositive mean; coefficient of variation undefined")]
    NonpositiveMean,

    #[error("unknown feature: {0}")]
    UnknownFeature(String),

    #[error("unknown covariate: {0}")]
    UnknownCovariate(String),

    #[error("covariate {0} has no usable values")]
    EmptyCovariate(String),

    #[error("zero variance in predictor")]
    ZeroVariancePredictor,

    #[error("unknown method token: {0}")]
    UnknownMethod(String),

    #[error("unknown metric name: {0}")]
    UnknownMetric(String),

    #[error("empty input: {0}")]
    EmptyInput(&'static str),
}

pub type Result<T> = std::result::Result<T, Error>;
