// SPDX-License-Identifier: MIT OR Apache-2.0

mod common;

use common::{exhaustive_moments, for_each_permutation, naive_r, random_digraph, rel_close};
use knncp::analytic::{raw_third_moments, third_moments, triple_config_counts};
use knncp::edge_stats::{
    null_moments, pair_config_counts, within_weights, EdgeCountProfile, NullFractions,
    Standardizer, Window,
};
use knncp::DirectedKnnGraph;
use rand::seq::SliceRandom;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

#[test]
fn fractions_boundary() {
    for n in [5usize, 9, 100] {
        let f = NullFractions::new(n, n - 1);
        let lhs = f.p1 * (n * (n - 1)) as f64;
        assert!((lhs - ((n - 1) * (n - 2)) as f64).abs() < 1e-9);
    }
}

#[test]
fn all_moments_match_exhaustive_permutation() {
    let mut rng = ChaCha8Rng::seed_from_u64(3);
    let tol = 1e-10;
    for n in 5..=7 {
        for k in 1..=2 {
            for _ in 0..20 {
                let g = random_digraph(&mut rng, n, k);
                let pairs = pair_config_counts(&g).unwrap();
                let triples = triple_config_counts(&g, &pairs).unwrap();
                for t in 1..n {
                    let e = exhaustive_moments(&g, t);
                    let m = null_moments(&pairs, n, t);
                    let ctx = format!("n={n} k={k} t={t}");
                    assert!(rel_close(m.mean1, e[1][0], tol), "E R1 {ctx}");
                    assert!(rel_close(m.mean2, e[0][1], tol), "E R2 {ctx}");
                    assert!(rel_close(m.var1, e[2][0] - e[1][0].powi(2), tol), "Var R1 {ctx}");
                    assert!(rel_close(m.var2, e[0][2] - e[0][1].powi(2), tol), "Var R2 {ctx}");
                    assert!(rel_close(m.cov, e[1][1] - e[1][0] * e[0][1], tol), "Cov {ctx}");

                    let r = raw_third_moments(&triples, n, t);
                    assert!(rel_close(r.r1_cubed, e[3][0], tol), "E R1^3 {ctx}");
                    assert!(rel_close(r.r1_sq_r2, e[2][1], tol), "E R1^2 R2 {ctx}");
                    assert!(rel_close(r.r1_r2_sq, e[1][2], tol), "E R1 R2^2 {ctx}");
                    assert!(rel_close(r.r2_cubed, e[0][3], tol), "E R2^3 {ctx}");
                }
            }
        }
    }
}

#[test]
fn skewness_matches_exhaustive_third_moment() {
    let mut rng = ChaCha8Rng::seed_from_u64(4);
    let n = 7;
    for _ in 0..10 {
        let g = random_digraph(&mut rng, n, 2);
        let pairs = pair_config_counts(&g).unwrap();
        if pairs.in_regular() {
            continue;
        }
        let triples = triple_config_counts(&g, &pairs).unwrap();
        let edges: Vec<(usize, usize)> = g.edges().collect();
        for t in 2..n - 1 {
            let (a, b) = within_weights(n, t);
            let mut zs = Vec::new();
            for_each_permutation(n, |p| {
                let times: Vec<usize> = p.iter().map(|v| v + 1).collect();
                let (r1, r2) = naive_r(&edges, &times, t);
                zs.push((a * r1 as f64 + b * r2 as f64, r1 as f64 - r2 as f64));
            });
            let standardized_cube = |f: &dyn Fn(&(f64, f64)) -> f64| {
                let m = zs.iter().map(f).sum::<f64>() / zs.len() as f64;
                let v = zs.iter().map(|z| (f(z) - m).powi(2)).sum::<f64>() / zs.len() as f64;
                let c3 = zs.iter().map(|z| (f(z) - m).powi(3)).sum::<f64>() / zs.len() as f64;
                (v, c3 / v.powf(1.5))
            };
            let (vw, gw) = standardized_cube(&|z| z.0);
            let (vd, gd) = standardized_cube(&|z| z.1);
            match third_moments(&triples, &pairs, n, t) {
                Ok((gamma_w, gamma_diff)) => {
                    assert!((gamma_w - gw).abs() < 1e-8, "gamma_w t={t}: {gamma_w} vs {gw}");
                    assert!((gamma_diff - gd).abs() < 1e-8, "gamma_diff t={t}: {gamma_diff} vs {gd}");
                }
                Err(_) => assert!(vw < 1e-9 || vd < 1e-9, "t={t} rejected with variances {vw}, {vd}"),
            }
        }
    }
}

fn knn_like_graph(n: usize, k: usize, seed: u64) -> DirectedKnnGraph {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let data = common::gaussian(&mut rng, n, 5);
    knncp::knn::build_graph(&data, k, 0.0).unwrap()
}

#[test]
fn monte_carlo_moments_large_graph() {
    let (n, k, t) = (1000, 3, 500);
    let g = knn_like_graph(n, k, 5);
    let pairs = pair_config_counts(&g).unwrap();
    let m = null_moments(&pairs, n, t);
    let edges: Vec<(usize, usize)> = g.edges().collect();

    let reps = 100_000;
    let mut rng = ChaCha8Rng::seed_from_u64(6);
    let mut times: Vec<usize> = (1..=n).collect();
    let mut xs = Vec::with_capacity(reps);
    for _ in 0..reps {
        times.shuffle(&mut rng);
        let (r1, r2) = naive_r(&edges, &times, t);
        xs.push((r1 as f64, r2 as f64));
    }
    let b = reps as f64;
    let mean = |f: &dyn Fn(&(f64, f64)) -> f64| xs.iter().map(f).sum::<f64>() / b;
    let check = |name: &str, f: &dyn Fn(&(f64, f64)) -> f64, target: f64| {
        let mu = mean(f);
        let sd = (xs.iter().map(|x| (f(x) - mu).powi(2)).sum::<f64>() / (b - 1.0)).sqrt();
        let se = sd / b.sqrt();
        assert!((mu - target).abs() <= 3.0 * se, "{name}: {mu} vs {target} (se {se})");
    };
    let (m1, m2) = (m.mean1, m.mean2);
    check("E R1", &|x| x.0, m1);
    check("E R2", &|x| x.1, m2);
    check("Var R1", &|x| (x.0 - m1).powi(2), m.var1);
    check("Var R2", &|x| (x.1 - m2).powi(2), m.var2);
    check("Cov", &|x| (x.0 - m1) * (x.1 - m2), m.cov);

    let triples = triple_config_counts(&g, &pairs).unwrap();
    let r = raw_third_moments(&triples, n, t);
    check("E R1^3", &|x| x.0.powi(3), r.r1_cubed);
    check("E R1^2 R2", &|x| x.0 * x.0 * x.1, r.r1_sq_r2);
    check("E R2^3", &|x| x.1.powi(3), r.r2_cubed);
}

#[test]
fn standardized_within_process_has_unit_scale() {
    let (n, k) = (200, 3);
    let g = knn_like_graph(n, k, 7);
    let t = n / 2;
    let st = Standardizer::new(&pair_config_counts(&g).unwrap(), Window::new(t, t)).unwrap();
    let mut rng = ChaCha8Rng::seed_from_u64(8);
    let mut times: Vec<usize> = (1..=n).collect();
    let reps = 10_000;
    let mut zs = Vec::with_capacity(reps);
    for _ in 0..reps {
        times.shuffle(&mut rng);
        let p = EdgeCountProfile::from_times(&g, &times);
        zs.push(st.scan(&p).at(t));
    }
    let stats = |f: &dyn Fn(&(f64, f64, f64)) -> f64| {
        let m = zs.iter().map(f).sum::<f64>() / reps as f64;
        let v = zs.iter().map(|z| (f(z) - m).powi(2)).sum::<f64>() / (reps - 1) as f64;
        (m, v)
    };
    for (name, (m, v)) in [("z_w", stats(&|z| z.0)), ("z_diff", stats(&|z| z.1))] {
        assert!(m.abs() <= 0.05, "{name} mean {m}");
        assert!((0.9..=1.1).contains(&v), "{name} variance {v}");
    }
}
