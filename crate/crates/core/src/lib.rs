// SPDX-License-Identifier: MIT OR Apache-2.0

//! Offline change-point detection for long, high-dimensional sequences.
//!
//! The pipeline builds a directed k-nearest-neighbor graph over the
//! observations with a kd-tree, scans the max-type edge-count statistic
//! `M(t) = max(Z_w(t), |Z_diff(t)|)` over a candidate window, and calibrates
//! the maximum either with a skewness-corrected analytic tail approximation
//! or with a seeded permutation null.
//!
//! Node ids are 0-based everywhere in the API. Time indices `t` count the
//! observations in the first segment and therefore run over `1..n`.
//!
//! ```no_run
//! use knncp::detector::{detect_single, DetectOptions};
//! use knncp::matrix_io::{load_matrix, Format};
//!
//! let data = load_matrix("series.csv", Format::Csv).unwrap();
//! let report = detect_single(&data, &DetectOptions::default()).unwrap();
//! println!("tau = {:?}, p = {:?}", report.tau_hat(), report.p_value());
//! ```

#![forbid(unsafe_code)]

pub mod analytic;
pub mod detector;
pub mod edge_stats;
mod error;
pub mod knn;
pub mod matrix_io;
pub mod permutation;
pub mod report;
pub mod simlab;

pub use error::{Error, Process, Result};
pub use knn::{DirectedKnnGraph, GraphOptions};
pub use matrix_io::DataMatrix;
