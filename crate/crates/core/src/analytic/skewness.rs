// SPDX-License-Identifier: MIT OR Apache-2.0

//! Raw third moments of `(R_1(t), R_2(t))` under the permutation null and
//! the skewness of `Z_w(t)` and `Z_diff(t)`.
//!
//! For an ordered edge triple of shape `l`, `R_1^3` counts it when all of
//! its nodes fall at times `<= t`. `R_1^2 R_2` counts it when the first two
//! edges fall early and the third late, which is only possible when the
//! third edge shares no node with the others. Averaging over the three
//! positions gives a weight that depends on the shape alone.

use super::shapes::TRIPLE_SHAPES;
use super::triples::TripleConfigCounts;
use crate::edge_stats::{falling_ratio, null_moments, split_probability, within_weights};
use crate::edge_stats::{PairConfigCounts, VARIANCE_TOLERANCE};
use crate::error::{Error, Process, Result};

/// `E[R_1^3]`, `E[R_1^2 R_2]`, `E[R_1 R_2^2]`, `E[R_2^3]`.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct RawThirdMoments {
    pub r1_cubed: f64,
    pub r1_sq_r2: f64,
    pub r1_r2_sq: f64,
    pub r2_cubed: f64,
}

pub fn raw_third_moments(triples: &TripleConfigCounts, n: usize, t: usize) -> RawThirdMoments {
    let s = n - t;
    let mut m = RawThirdMoments {
        r1_cubed: 0.0,
        r1_sq_r2: 0.0,
        r1_r2_sq: 0.0,
        r2_cubed: 0.0,
    };
    for (shape, &count) in TRIPLE_SHAPES.iter().zip(triples.counts.iter()) {
        let nodes = shape.nodes as usize;
        if count == 0 || nodes > n {
            continue;
        }
        let count = count as f64;
        m.r1_cubed += count * falling_ratio(t, n, nodes);
        m.r2_cubed += count * falling_ratio(s, n, nodes);
        let (mut early, mut late) = (0.0, 0.0);
        for pos in 0..3 {
            if shape.solo_disjoint[pos] {
                let rest = shape.rest_nodes[pos] as usize;
                early += split_probability(n, t, rest, 2);
                late += split_probability(n, s, rest, 2);
            }
        }
        m.r1_sq_r2 += count * early / 3.0;
        m.r1_r2_sq += count * late / 3.0;
    }
    m
}

/// `gamma = E[Z^3]` for `Z = (a R_1 + b R_2 - mu) / sigma`.
fn standardized_third(
    raw: &RawThirdMoments,
    a: f64,
    b: f64,
    mean: f64,
    var: f64,
) -> f64 {
    let third = a * a * a * raw.r1_cubed
        + 3.0 * a * a * b * raw.r1_sq_r2
        + 3.0 * a * b * b * raw.r1_r2_sq
        + b * b * b * raw.r2_cubed;
    (third - 3.0 * mean * var - mean * mean * mean) / var.powf(1.5)
}

/// `(gamma_w(t), gamma_diff(t))`.
pub fn third_moments(
    triples: &TripleConfigCounts,
    pairs: &PairConfigCounts,
    n: usize,
    t: usize,
) -> Result<(f64, f64)> {
    let m = null_moments(pairs, n, t);
    let raw = raw_third_moments(triples, n, t);
    let (a, b) = within_weights(n, t);
    let var_w = a * a * m.var1 + b * b * m.var2 + 2.0 * a * b * m.cov;
    let var_d = m.var1 + m.var2 - 2.0 * m.cov;
    let floor = VARIANCE_TOLERANCE * m.scale.max(1.0);
    if !(var_w > floor) {
        return Err(Error::DegenerateVariance {
            t,
            process: Process::Within,
        });
    }
    if !(var_d > floor) {
        return Err(Error::DegenerateVariance {
            t,
            process: Process::Diff,
        });
    }
    let mean_w = a * m.mean1 + b * m.mean2;
    let mean_d = m.mean1 - m.mean2;
    Ok((
        standardized_third(&raw, a, b, mean_w, var_w),
        standardized_third(&raw, 1.0, -1.0, mean_d, var_d),
    ))
}
