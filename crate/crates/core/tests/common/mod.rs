// SPDX-License-Identifier: MIT OR Apache-2.0

// Helpers shared by the integration tests. Everything here is written from
// the definitions and deliberately avoids the library's own counting code.

#![allow(dead_code)]

use std::collections::HashMap;

use knncp::analytic::shapes::TRIPLE_SHAPES;
use knncp::{DataMatrix, DirectedKnnGraph};
use rand::seq::index::sample;
use rand::Rng;
use rand_distr::{Distribution, StandardNormal};

/// A random digraph with out-degree `k` and no self-loops.
pub fn random_digraph<R: Rng>(rng: &mut R, n: usize, k: usize) -> DirectedKnnGraph {
    let mut targets = Vec::with_capacity(n * k);
    for i in 0..n {
        for j in sample(rng, n - 1, k) {
            targets.push(if j >= i { j + 1 } else { j });
        }
    }
    DirectedKnnGraph::from_targets(n, k, targets).unwrap()
}

pub fn gaussian<R: Rng>(rng: &mut R, n: usize, d: usize) -> DataMatrix {
    let v: Vec<f64> = (0..n * d).map(|_| StandardNormal.sample(rng)).collect();
    DataMatrix::new(n, d, v).unwrap()
}

/// `(R_1(t), R_2(t))` by looking at every edge; `time_of[i]` is 1-based.
pub fn naive_r(edges: &[(usize, usize)], time_of: &[usize], t: usize) -> (u64, u64) {
    let mut r1 = 0;
    let mut r2 = 0;
    for &(i, j) in edges {
        let (a, b) = (time_of[i], time_of[j]);
        if a <= t && b <= t {
            r1 += 1;
        }
        if a > t && b > t {
            r2 += 1;
        }
    }
    (r1, r2)
}

/// Calls `f` on every permutation of `0..n` (Heap's algorithm).
pub fn for_each_permutation(n: usize, mut f: impl FnMut(&[usize])) {
    let mut a: Vec<usize> = (0..n).collect();
    let mut c = vec![0usize; n];
    f(&a);
    let mut i = 0;
    while i < n {
        if c[i] < i {
            if i % 2 == 0 {
                a.swap(0, i);
            } else {
                a.swap(c[i], i);
            }
            f(&a);
            c[i] += 1;
            i = 0;
        } else {
            c[i] = 0;
            i += 1;
        }
    }
}

pub fn rel_close(a: f64, b: f64, tol: f64) -> bool {
    (a - b).abs() <= tol * a.abs().max(b.abs()).max(1.0)
}

pub type Edge = (usize, usize);

// Pair shapes straight from the pictures: identical, mutual, head-to-tail
// chain, tail-to-head chain, common tail, common head, nothing shared.
pub fn pair_shape(e: Edge, f: Edge) -> usize {
    let shared = [e.0 == f.0, e.0 == f.1, e.1 == f.0, e.1 == f.1];
    match shared {
        [true, _, _, true] => 1,
        [_, true, true, _] => 2,
        [_, _, true, _] => 3,
        [_, true, _, _] => 4,
        [true, _, _, _] => 5,
        [_, _, _, true] => 6,
        _ => 7,
    }
}

pub fn brute_pairs(g: &DirectedKnnGraph) -> [u128; 7] {
    let edges: Vec<Edge> = g.edges().collect();
    let mut c = [0u128; 7];
    for &e in &edges {
        for &f in &edges {
            c[pair_shape(e, f) - 1] += 1;
        }
    }
    c
}

// Two ordered triples have the same shape when some reordering of the edges
// and a bijection of node labels carries one onto the other.
pub fn isomorphic(a: [Edge; 3], b: [Edge; 3]) -> bool {
    let orders = [[0, 1, 2], [0, 2, 1], [1, 0, 2], [1, 2, 0], [2, 0, 1], [2, 1, 0]];
    'order: for ord in orders {
        let mut fwd: HashMap<usize, usize> = HashMap::new();
        let mut back: HashMap<usize, usize> = HashMap::new();
        for (slot, &o) in ord.iter().enumerate() {
            let (x, y) = a[o];
            let (u, v) = b[slot];
            for (p, q) in [(x, u), (y, v)] {
                if *fwd.entry(p).or_insert(q) != q || *back.entry(q).or_insert(p) != p {
                    continue 'order;
                }
            }
        }
        return true;
    }
    false
}

pub fn triple_shape(t: [Edge; 3]) -> usize {
    let hits: Vec<usize> = TRIPLE_SHAPES
        .iter()
        .enumerate()
        .filter(|(_, s)| isomorphic(t, s.edges.map(|(a, b)| (a as usize, b as usize))))
        .map(|(l, _)| l + 1)
        .collect();
    assert_eq!(hits.len(), 1, "{t:?} matches shapes {hits:?}");
    hits[0]
}

pub fn brute_triples(g: &DirectedKnnGraph) -> [u128; 24] {
    let edges: Vec<Edge> = g.edges().collect();
    let mut cache: HashMap<[Edge; 3], usize> = HashMap::new();
    let mut c = [0u128; 24];
    for &e in &edges {
        for &f in &edges {
            for &h in &edges {
                let t = [e, f, h];
                let l = *cache.entry(t).or_insert_with(|| triple_shape(t));
                c[l - 1] += 1;
            }
        }
    }
    c
}

/// `E[R_1^a R_2^b]` for `a + b <= 3` over all `n!` relabelings, indexed
/// `[a][b]`.
pub fn exhaustive_moments(g: &DirectedKnnGraph, t: usize) -> [[f64; 4]; 4] {
    let edges: Vec<(usize, usize)> = g.edges().collect();
    let mut sums = [[0f64; 4]; 4];
    let mut count = 0f64;
    let mut times = vec![0; g.n()];
    for_each_permutation(g.n(), |p| {
        for (i, &v) in p.iter().enumerate() {
            times[i] = v + 1;
        }
        let (r1, r2) = naive_r(&edges, &times, t);
        let (x, y) = (r1 as f64, r2 as f64);
        for (a, row) in sums.iter_mut().enumerate() {
            for (b, s) in row.iter_mut().enumerate().take(4 - a) {
                *s += x.powi(a as i32) * y.powi(b as i32);
            }
        }
        count += 1.0;
    });
    sums.map(|row| row.map(|s| s / count))
}

pub fn dist(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| (x - y) * (x - y)).sum::<f64>().sqrt()
}

/// Every other row of `data`, sorted by (distance, index).
pub fn ranked(data: &DataMatrix, q: usize) -> Vec<(f64, usize)> {
    let mut all: Vec<(f64, usize)> = (0..data.n())
        .filter(|&j| j != q)
        .map(|j| (dist(data.row(q), data.row(j)), j))
        .collect();
    all.sort_by(|a, b| a.0.total_cmp(&b.0).then(a.1.cmp(&b.1)));
    all
}

pub fn exact_lists(data: &DataMatrix, k: usize) -> Vec<Vec<usize>> {
    (0..data.n())
        .map(|q| ranked(data, q).into_iter().take(k).map(|(_, j)| j).collect())
        .collect()
}
