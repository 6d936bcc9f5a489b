// SPDX-License-Identifier: MIT OR Apache-2.0

use std::fmt;

/// Which standardized process a degeneracy refers to.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Process {
    /// The weighted within-group count `R_w`.
    Within,
    /// The difference `R_1 - R_2`.
    Diff,
}

impl fmt::Display for Process {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Process::Within => f.write_str("R_w"),
            Process::Diff => f.write_str("R_diff"),
        }
    }
}

#[derive(Debug, thiserror::Error)]
pub enum Error {
    #[error("parse error on line {line}: {msg}")]
    Parse { line: usize, msg: String },

    /// Non-finite cell; `row` and `col` are 1-based.
    #[error("non-finite value at row {row}, column {col}")]
    Validation { row: usize, col: usize },

    #[error("at least 5 observations are required, got {0}")]
    TooFewObservations(usize),

    #[error("cannot find {k} neighbors among {n} points")]
    NotEnoughNeighbors { k: usize, n: usize },

    #[error("variance of {process} vanishes at t = {t}{}", degenerate_hint(*.process))]
    DegenerateVariance { t: usize, process: Process },

    #[error("C_w(t) has a vanishing denominator at t = {0}")]
    DegenerateDenominator(usize),

    #[error("integer overflow while computing {0}")]
    IntegerOverflow(&'static str),

    #[error("no threshold in [{lo}, {hi}] attains tail probability {alpha}")]
    NoRoot { alpha: f64, lo: f64, hi: f64 },

    #[error("invalid graph: {0}")]
    InvalidGraph(String),

    #[error("invalid parameter: {0}")]
    InvalidParameter(String),

    #[error("unknown distribution family or scenario `{0}`")]
    UnknownFamily(String),

    #[error(transparent)]
    Io(#[from] std::io::Error),

    #[error(transparent)]
    Json(#[from] serde_json::Error),
}

fn degenerate_hint(process: Process) -> &'static str {
    match process {
        Process::Diff => " (in-degrees all equal k; perturb k or data)",
        Process::Within => " (fewer than 5 observations or a degenerate graph)",
    }
}

pub type Result<T> = std::result::Result<T, Error>;

impl Error {
    pub(crate) fn invalid(msg: impl Into<String>) -> Self {
        Error::InvalidParameter(msg.into())
    }
}
