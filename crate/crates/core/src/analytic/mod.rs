// SPDX-License-Identifier: MIT OR Apache-2.0

//! Analytic control of the type I error: triple-configuration counts,
//! third moments, and the skewness-corrected tail approximation of the
//! scan maximum.

pub mod shapes;
pub mod skewness;
pub mod tail;
pub mod triples;

pub use skewness::{raw_third_moments, third_moments, RawThirdMoments};
pub use tail::{c_functions, nu, skew_factor, AnalyticContext, TailApproximation};
pub use triples::{triple_config_counts, TripleConfigCounts};
