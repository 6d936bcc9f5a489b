// SPDX-License-Identifier: MIT OR Apache-2.0

//! Seeded permutation null for the scan maximum.
//!
//! Replicate `r` draws its permutation from `ChaCha8Rng` seeded with the
//! plan seed and switched to stream `r`, so every replicate is reproducible
//! on its own and replicates can run in any order on any number of threads.
//! The graph never changes; a replicate only reassigns observation times to
//! nodes and recounts the edges in `O(nk)`.

use rand::seq::SliceRandom;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;

use crate::edge_stats::{pair_config_counts, EdgeCountProfile, Standardizer, Window};
use crate::error::{Error, Result};
use crate::knn::DirectedKnnGraph;

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct PermutationPlan {
    pub replicates: usize,
    pub seed: u64,
    pub window: Window,
}

impl PermutationPlan {
    pub fn new(replicates: usize, seed: u64, window: Window) -> Result<Self> {
        if replicates == 0 {
            return Err(Error::invalid("at least one permutation replicate is required"));
        }
        Ok(Self {
            replicates,
            seed,
            window,
        })
    }
}

/// The generator for replicate `r`.
pub fn replicate_rng(seed: u64, r: usize) -> ChaCha8Rng {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    rng.set_stream(r as u64);
    rng
}

/// Node-to-time assignment of replicate `r`: a uniform permutation of
/// `1..=n` by Fisher-Yates.
pub fn replicate_times(n: usize, seed: u64, r: usize) -> Vec<usize> {
    let mut times: Vec<usize> = (1..=n).collect();
    times.shuffle(&mut replicate_rng(seed, r));
    times
}

struct Scratch {
    times: Vec<usize>,
    profile: EdgeCountProfile,
    up: Vec<i64>,
    down: Vec<i64>,
}

/// `max M(t)` for each replicate of `plan`, in replicate order.
pub fn replicate_maxima(
    g: &DirectedKnnGraph,
    standardizer: &Standardizer,
    plan: &PermutationPlan,
) -> Vec<f64> {
    let n = g.n();
    (0..plan.replicates)
        .into_par_iter()
        .map_init(
            || Scratch {
                times: Vec::with_capacity(n),
                profile: EdgeCountProfile::empty(n),
                up: vec![0; n + 1],
                down: vec![0; n + 1],
            },
            |s, r| {
                s.times.clear();
                s.times.extend(1..=n);
                s.times.shuffle(&mut replicate_rng(plan.seed, r));
                s.profile.fill(g, &s.times, &mut s.up, &mut s.down);
                standardizer.max_stat(&s.profile).1
            },
        )
        .collect()
}

/// `(p_hat, se)` with `p_hat = (1 + #{max >= observed}) / (B + 1)`.
pub fn pvalue_from_maxima(maxima: &[f64], observed_max: f64) -> (f64, f64) {
    let b = maxima.len() as f64;
    let exceed = maxima.iter().filter(|&&m| m >= observed_max).count() as f64;
    let p = (1.0 + exceed) / (b + 1.0);
    (p, (p * (1.0 - p) / b).sqrt())
}

/// The order statistic of rank `ceil((1 - alpha)(B + 1))`, capped at `B`.
pub fn quantile_from_maxima(maxima: &[f64], alpha: f64) -> f64 {
    let mut sorted = maxima.to_vec();
    sorted.sort_by(f64::total_cmp);
    let b = sorted.len();
    let rank = ((1.0 - alpha) * (b as f64 + 1.0)).ceil() as usize;
    sorted[rank.clamp(1, b) - 1]
}

fn standardizer(g: &DirectedKnnGraph, window: Window) -> Result<Standardizer> {
    Standardizer::new(&pair_config_counts(g)?, window)
}

pub fn permutation_pvalue(
    g: &DirectedKnnGraph,
    observed_max: f64,
    plan: &PermutationPlan,
) -> Result<(f64, f64)> {
    let st = standardizer(g, plan.window)?;
    Ok(pvalue_from_maxima(&replicate_maxima(g, &st, plan), observed_max))
}

pub fn permutation_critical_value(
    g: &DirectedKnnGraph,
    alpha: f64,
    plan: &PermutationPlan,
) -> Result<f64> {
    if !(alpha > 0.0 && alpha < 1.0) {
        return Err(Error::invalid(format!("alpha = {alpha} must lie in (0, 1)")));
    }
    let st = standardizer(g, plan.window)?;
    Ok(quantile_from_maxima(&replicate_maxima(g, &st, plan), alpha))
}

/// Monte-Carlo estimates of the joint moments of `(R_1(t), R_2(t))` with
/// their standard errors, indexed by `(a, b)` for `E[R_1^a R_2^b]`.
#[derive(Clone, Debug, PartialEq)]
pub struct MonteCarloMoments {
    pub replicates: usize,
    /// `(a, b, mean, se)` for every `1 <= a + b <= 3`.
    pub raw: Vec<(u32, u32, f64, f64)>,
}

impl MonteCarloMoments {
    pub fn get(&self, a: u32, b: u32) -> (f64, f64) {
        self.raw
            .iter()
            .find(|r| r.0 == a && r.1 == b)
            .map(|r| (r.2, r.3))
            .expect("moment order between 1 and 3")
    }
}

/// Samples `(R_1(t), R_2(t))` over random relabelings.
pub fn monte_carlo_moments(
    g: &DirectedKnnGraph,
    t: usize,
    replicates: usize,
    seed: u64,
) -> MonteCarloMoments {
    let n = g.n();
    let samples: Vec<(f64, f64)> = (0..replicates)
        .into_par_iter()
        .map(|r| {
            let p = EdgeCountProfile::from_times(g, &replicate_times(n, seed, r));
            (p.r1(t) as f64, p.r2(t) as f64)
        })
        .collect();
    let orders = [(1, 0), (0, 1), (2, 0), (1, 1), (0, 2), (3, 0), (2, 1), (1, 2), (0, 3)];
    let m = replicates as f64;
    let raw = orders
        .iter()
        .map(|&(a, b)| {
            let vals: Vec<f64> = samples
                .iter()
                .map(|&(x, y)| x.powi(a as i32) * y.powi(b as i32))
                .collect();
            let mean = vals.iter().sum::<f64>() / m;
            let var = vals.iter().map(|v| (v - mean).powi(2)).sum::<f64>() / (m - 1.0).max(1.0);
            (a, b, mean, (var / m).sqrt())
        })
        .collect();
    MonteCarloMoments { replicates, raw }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn pvalue_floor_and_ceiling() {
        let maxima = [1.0, 2.0, 3.0];
        assert_eq!(pvalue_from_maxima(&maxima, f64::INFINITY).0, 0.25);
        assert_eq!(pvalue_from_maxima(&maxima, 0.0).0, 1.0);
    }

    #[test]
    fn quantile_rank() {
        let maxima: Vec<f64> = (1..=99).map(f64::from).collect();
        assert_eq!(quantile_from_maxima(&maxima, 0.05), 95.0);
        assert_eq!(quantile_from_maxima(&maxima, 0.5), 50.0);
    }

    #[test]
    fn replicate_streams_differ_and_repeat() {
        assert_eq!(replicate_times(20, 7, 3), replicate_times(20, 7, 3));
        assert_ne!(replicate_times(20, 7, 3), replicate_times(20, 7, 4));
        let mut sorted = replicate_times(20, 7, 3);
        sorted.sort_unstable();
        assert_eq!(sorted, (1..=20).collect::<Vec<_>>());
    }
}
