// SPDX-License-Identifier: MIT OR Apache-2.0

mod common;

use common::{gaussian, naive_r};
use knncp::edge_stats::{null_moments, pair_config_counts, within_weights, Standardizer, Window};
use knncp::knn::build_graph;
use knncp::permutation::{
    permutation_critical_value, permutation_pvalue, quantile_from_maxima, replicate_maxima,
    replicate_times, PermutationPlan,
};
use knncp::DirectedKnnGraph;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

fn graph(n: usize, d: usize, k: usize, seed: u64) -> DirectedKnnGraph {
    build_graph(&gaussian(&mut ChaCha8Rng::seed_from_u64(seed), n, d), k, 0.0).unwrap()
}

#[test]
fn unbeatable_observation_gives_the_floor() {
    let g = graph(80, 3, 4, 1);
    let plan = PermutationPlan::new(199, 5, Window::default_for(80)).unwrap();
    let (p, se) = permutation_pvalue(&g, f64::INFINITY, &plan).unwrap();
    assert_eq!(p, 1.0 / 200.0);
    assert!(se > 0.0);
    let (p, _) = permutation_pvalue(&g, f64::NEG_INFINITY, &plan).unwrap();
    assert_eq!(p, 1.0);
}

#[test]
fn fixed_seed_is_bit_identical() {
    let g = graph(150, 4, 5, 2);
    let plan = PermutationPlan::new(500, 77, Window::default_for(150)).unwrap();
    let a = permutation_pvalue(&g, 2.5, &plan).unwrap();
    let b = permutation_pvalue(&g, 2.5, &plan).unwrap();
    assert_eq!(a.0.to_bits(), b.0.to_bits());
    assert_eq!(a.1.to_bits(), b.1.to_bits());

    let other = PermutationPlan { seed: 78, ..plan };
    let st = Standardizer::new(&pair_config_counts(&g).unwrap(), plan.window).unwrap();
    assert_ne!(replicate_maxima(&g, &st, &plan), replicate_maxima(&g, &st, &other));
}

#[test]
fn replicates_match_naive_recomputation() {
    let n = 120;
    let g = graph(n, 3, 3, 3);
    let window = Window::new(10, 110);
    let plan = PermutationPlan::new(10, 4, window).unwrap();
    let pairs = pair_config_counts(&g).unwrap();
    let st = Standardizer::new(&pairs, window).unwrap();
    let maxima = replicate_maxima(&g, &st, &plan);
    let edges: Vec<_> = g.edges().collect();
    for (r, &got) in maxima.iter().enumerate() {
        let times = replicate_times(n, plan.seed, r);
        let mut best = f64::NEG_INFINITY;
        for t in window.iter() {
            let (r1, r2) = naive_r(&edges, &times, t);
            let (r1, r2) = (r1 as f64, r2 as f64);
            let m = null_moments(&pairs, n, t);
            let (a, b) = within_weights(n, t);
            let var_w = a * a * m.var1 + b * b * m.var2 + 2.0 * a * b * m.cov;
            let var_d = m.var1 + m.var2 - 2.0 * m.cov;
            let z_w = (a * r1 + b * r2 - a * m.mean1 - b * m.mean2) / var_w.sqrt();
            let z_d = (r1 - r2 - m.mean1 + m.mean2) / var_d.sqrt();
            best = best.max(z_w.max(z_d.abs()));
        }
        assert!((got - best).abs() < 1e-9, "replicate {r}: {got} vs {best}");
    }
}

#[test]
fn half_level_quantile_is_the_median() {
    let g = graph(100, 3, 3, 5);
    let plan = PermutationPlan::new(999, 6, Window::default_for(100)).unwrap();
    let st = Standardizer::new(&pair_config_counts(&g).unwrap(), plan.window).unwrap();
    let mut maxima = replicate_maxima(&g, &st, &plan);
    maxima.sort_by(f64::total_cmp);
    assert_eq!(permutation_critical_value(&g, 0.5, &plan).unwrap(), maxima[499]);
    assert_eq!(quantile_from_maxima(&maxima, 0.05), maxima[949]);
}

#[test]
fn critical_value_is_stable_across_seeds() {
    let g = graph(1000, 10, 3, 7);
    let w = Window::symmetric(1000, 100);
    let a = permutation_critical_value(&g, 0.05, &PermutationPlan::new(10_000, 1, w).unwrap()).unwrap();
    let b = permutation_critical_value(&g, 0.05, &PermutationPlan::new(10_000, 2, w).unwrap()).unwrap();
    assert!((a - b).abs() < 0.05, "{a} vs {b}");
    assert!((a - 3.26).abs() <= 0.05, "{a}");
}

#[test]
fn zero_replicates_are_rejected() {
    assert!(PermutationPlan::new(0, 1, Window::new(2, 5)).is_err());
}
