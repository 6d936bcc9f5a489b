// SPDX-License-Identifier: MIT OR Apache-2.0

//! Regenerates `TRIPLE_SHAPES` in `src/analytic/shapes.rs`.
//!
//! The representatives below are numbered to match the counting formulas in
//! `triples.rs`. The program checks that they are pairwise non-isomorphic
//! and that every ordered edge triple of a batch of random digraphs is
//! isomorphic to one of them, then prints the table.
//!
//! cargo run -p knncp --example gen_triple_table

use knncp::analytic::shapes::{canonical_code, derive_shape};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

const REPRESENTATIVES: [(&str, [(u8, u8); 3]); 24] = [
    ("one edge three times", [(0, 1), (0, 1), (0, 1)]),
    ("doubled edge and its reverse", [(0, 1), (0, 1), (1, 0)]),
    ("chain, first edge doubled", [(0, 1), (0, 1), (1, 2)]),
    ("shared head, one edge doubled", [(0, 2), (0, 2), (1, 2)]),
    ("mutual pair and an out-edge", [(0, 1), (1, 0), (0, 2)]),
    ("mutual pair and an in-edge", [(0, 1), (1, 0), (2, 0)]),
    ("shared tail, one edge doubled", [(0, 1), (0, 1), (0, 2)]),
    ("chain, second edge doubled", [(0, 1), (1, 2), (1, 2)]),
    ("directed 3-cycle", [(0, 1), (1, 2), (2, 0)]),
    ("transitive triangle", [(0, 1), (1, 2), (0, 2)]),
    ("doubled edge and a disjoint edge", [(0, 1), (0, 1), (2, 3)]),
    ("mutual pair and a disjoint edge", [(0, 1), (1, 0), (2, 3)]),
    ("directed path of length 3", [(0, 1), (1, 2), (2, 3)]),
    ("chain ending in a shared head", [(0, 1), (1, 2), (3, 2)]),
    ("shared tail feeding a shared head", [(0, 1), (0, 2), (3, 2)]),
    ("shared tail continuing into a chain", [(0, 1), (0, 2), (1, 3)]),
    ("in-star of three", [(1, 0), (2, 0), (3, 0)]),
    ("out-star of three", [(0, 1), (0, 2), (0, 3)]),
    ("star with two out and one in", [(0, 1), (0, 2), (3, 0)]),
    ("star with two in and one out", [(1, 0), (2, 0), (0, 3)]),
    ("chain and a disjoint edge", [(0, 1), (1, 2), (3, 4)]),
    ("shared tail and a disjoint edge", [(0, 1), (0, 2), (3, 4)]),
    ("shared head and a disjoint edge", [(1, 0), (2, 0), (3, 4)]),
    ("three disjoint edges", [(0, 1), (2, 3), (4, 5)]),
];

fn to_usize(e: [(u8, u8); 3]) -> [(usize, usize); 3] {
    e.map(|(a, b)| (a as usize, b as usize))
}

fn random_digraph(rng: &mut ChaCha8Rng, n: usize, k: usize) -> Vec<(usize, usize)> {
    let mut edges = Vec::new();
    for i in 0..n {
        let mut picked = Vec::new();
        while picked.len() < k {
            let j = rng.random_range(0..n);
            if j != i && !picked.contains(&j) {
                picked.push(j);
            }
        }
        edges.extend(picked.into_iter().map(|j| (i, j)));
    }
    edges
}

fn main() {
    let codes: Vec<[u8; 6]> = REPRESENTATIVES
        .iter()
        .map(|(_, e)| canonical_code(to_usize(*e)))
        .collect();
    for i in 0..codes.len() {
        for j in 0..i {
            assert_ne!(codes[i], codes[j], "shapes {} and {} coincide", j + 1, i + 1);
        }
    }

    let mut rng = ChaCha8Rng::seed_from_u64(24);
    let mut seen = [0u64; 24];
    for _ in 0..40 {
        let n = rng.random_range(6..=10);
        let k = rng.random_range(1..=3);
        let edges = random_digraph(&mut rng, n, k);
        for &a in &edges {
            for &b in &edges {
                for &c in &edges {
                    let code = canonical_code([a, b, c]);
                    let l = codes
                        .iter()
                        .position(|x| *x == code)
                        .unwrap_or_else(|| panic!("unmatched triple {a:?} {b:?} {c:?}"));
                    seen[l] += 1;
                }
            }
        }
    }
    assert!(seen.iter().all(|&c| c > 0), "some shape never occurred: {seen:?}");

    println!("pub const TRIPLE_SHAPES: [TripleShape; 24] = [");
    for (l, (name, edges)) in REPRESENTATIVES.iter().enumerate() {
        let s = derive_shape(*edges);
        println!("    // {}: {name}", l + 1);
        println!(
            "    shape({:?}, {}, {:?}, {:?}),",
            s.edges, s.nodes, s.rest_nodes, s.solo_disjoint
        );
    }
    println!("];");
}
