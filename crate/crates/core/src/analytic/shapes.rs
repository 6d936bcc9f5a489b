// SPDX-License-Identifier: MIT OR Apache-2.0

//! Node-sharing shapes of ordered edge pairs and triples drawn with
//! replacement from a directed graph without self-loops.
//!
//! There are 7 pair shapes and 24 triple shapes. Each triple shape is stored
//! with a representative on nodes `0..nodes` and the side-assignment
//! metadata needed for third moments. The derived columns of
//! [`TRIPLE_SHAPES`] are generated by `examples/gen_triple_table.rs`.

use std::sync::OnceLock;

/// One of the 24 triple shapes.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct TripleShape {
    /// A representative triple.
    pub edges: [(u8, u8); 3],
    /// Distinct nodes spanned by the triple.
    pub nodes: u8,
    /// Distinct nodes spanned by the other two edges when edge `s` is set
    /// aside.
    pub rest_nodes: [u8; 3],
    /// Whether edge `s` shares no node with the other two.
    pub solo_disjoint: [bool; 3],
}

const fn shape(
    edges: [(u8, u8); 3],
    nodes: u8,
    rest_nodes: [u8; 3],
    solo_disjoint: [bool; 3],
) -> TripleShape {
    TripleShape {
        edges,
        nodes,
        rest_nodes,
        solo_disjoint,
    }
}

// @generated by examples/gen_triple_table.rs
pub const TRIPLE_SHAPES: [TripleShape; 24] = [
    // 1: one edge three times
    shape([(0, 1), (0, 1), (0, 1)], 2, [2, 2, 2], [false, false, false]),
    // 2: doubled edge and its reverse
    shape([(0, 1), (0, 1), (1, 0)], 2, [2, 2, 2], [false, false, false]),
    // 3: chain, first edge doubled
    shape([(0, 1), (0, 1), (1, 2)], 3, [3, 3, 2], [false, false, false]),
    // 4: shared head, one edge doubled
    shape([(0, 2), (0, 2), (1, 2)], 3, [3, 3, 2], [false, false, false]),
    // 5: mutual pair and an out-edge
    shape([(0, 1), (1, 0), (0, 2)], 3, [3, 3, 2], [false, false, false]),
    // 6: mutual pair and an in-edge
    shape([(0, 1), (1, 0), (2, 0)], 3, [3, 3, 2], [false, false, false]),
    // 7: shared tail, one edge doubled
    shape([(0, 1), (0, 1), (0, 2)], 3, [3, 3, 2], [false, false, false]),
    // 8: chain, second edge doubled
    shape([(0, 1), (1, 2), (1, 2)], 3, [2, 3, 3], [false, false, false]),
    // 9: directed 3-cycle
    shape([(0, 1), (1, 2), (2, 0)], 3, [3, 3, 3], [false, false, false]),
    // 10: transitive triangle
    shape([(0, 1), (1, 2), (0, 2)], 3, [3, 3, 3], [false, false, false]),
    // 11: doubled edge and a disjoint edge
    shape([(0, 1), (0, 1), (2, 3)], 4, [4, 4, 2], [false, false, true]),
    // 12: mutual pair and a disjoint edge
    shape([(0, 1), (1, 0), (2, 3)], 4, [4, 4, 2], [false, false, true]),
    // 13: directed path of length 3
    shape([(0, 1), (1, 2), (2, 3)], 4, [3, 4, 3], [false, false, false]),
    // 14: chain ending in a shared head
    shape([(0, 1), (1, 2), (3, 2)], 4, [3, 4, 3], [false, false, false]),
    // 15: shared tail feeding a shared head
    shape([(0, 1), (0, 2), (3, 2)], 4, [3, 4, 3], [false, false, false]),
    // 16: shared tail continuing into a chain
    shape([(0, 1), (0, 2), (1, 3)], 4, [4, 3, 3], [false, false, false]),
    // 17: in-star of three
    shape([(1, 0), (2, 0), (3, 0)], 4, [3, 3, 3], [false, false, false]),
    // 18: out-star of three
    shape([(0, 1), (0, 2), (0, 3)], 4, [3, 3, 3], [false, false, false]),
    // 19: star with two out and one in
    shape([(0, 1), (0, 2), (3, 0)], 4, [3, 3, 3], [false, false, false]),
    // 20: star with two in and one out
    shape([(1, 0), (2, 0), (0, 3)], 4, [3, 3, 3], [false, false, false]),
    // 21: chain and a disjoint edge
    shape([(0, 1), (1, 2), (3, 4)], 5, [4, 4, 3], [false, false, true]),
    // 22: shared tail and a disjoint edge
    shape([(0, 1), (0, 2), (3, 4)], 5, [4, 4, 3], [false, false, true]),
    // 23: shared head and a disjoint edge
    shape([(1, 0), (2, 0), (3, 4)], 5, [4, 4, 3], [false, false, true]),
    // 24: three disjoint edges
    shape([(0, 1), (2, 3), (4, 5)], 6, [4, 4, 4], [true, true, true]),
];

/// Derives the metadata columns from a representative.
pub fn derive_shape(edges: [(u8, u8); 3]) -> TripleShape {
    let node_set = |sel: &[usize]| {
        let mut v: Vec<u8> = sel
            .iter()
            .flat_map(|&s| [edges[s].0, edges[s].1])
            .collect();
        v.sort_unstable();
        v.dedup();
        v
    };
    let all = node_set(&[0, 1, 2]);
    let mut rest_nodes = [0u8; 3];
    let mut solo_disjoint = [false; 3];
    for s in 0..3 {
        let others: Vec<usize> = (0..3).filter(|&o| o != s).collect();
        let rest = node_set(&others);
        rest_nodes[s] = rest.len() as u8;
        solo_disjoint[s] = !rest.contains(&edges[s].0) && !rest.contains(&edges[s].1);
    }
    TripleShape {
        edges,
        nodes: all.len() as u8,
        rest_nodes,
        solo_disjoint,
    }
}

const ORDERINGS: [[usize; 3]; 6] = [
    [0, 1, 2],
    [0, 2, 1],
    [1, 0, 2],
    [1, 2, 0],
    [2, 0, 1],
    [2, 1, 0],
];

/// Isomorphism-invariant code of an unordered edge multiset: the smallest
/// first-appearance relabeling over all orderings of the edges.
pub fn canonical_code(edges: [(usize, usize); 3]) -> [u8; 6] {
    let mut best = [u8::MAX; 6];
    for ord in ORDERINGS {
        let mut seen: [usize; 6] = [usize::MAX; 6];
        let mut used = 0;
        let mut code = [0u8; 6];
        for (slot, &e) in ord.iter().enumerate() {
            let (a, b) = edges[e];
            for (h, node) in [a, b].into_iter().enumerate() {
                let label = match seen[..used].iter().position(|&s| s == node) {
                    Some(p) => p,
                    None => {
                        seen[used] = node;
                        used += 1;
                        used - 1
                    }
                };
                code[2 * slot + h] = label as u8;
            }
        }
        if code < best {
            best = code;
        }
    }
    best
}

fn representative_codes() -> &'static [[u8; 6]; 24] {
    static CODES: OnceLock<[[u8; 6]; 24]> = OnceLock::new();
    CODES.get_or_init(|| {
        let mut codes = [[0u8; 6]; 24];
        for (code, s) in codes.iter_mut().zip(TRIPLE_SHAPES.iter()) {
            let e = s.edges.map(|(a, b)| (a as usize, b as usize));
            *code = canonical_code(e);
        }
        codes
    })
}

/// The 1-based shape number of an ordered edge triple.
///
/// # Panics
///
/// If an edge is a self-loop.
pub fn classify_triple(edges: [(usize, usize); 3]) -> usize {
    assert!(edges.iter().all(|(a, b)| a != b), "self-loop in triple");
    let code = canonical_code(edges);
    representative_codes()
        .iter()
        .position(|c| *c == code)
        .map(|p| p + 1)
        .expect("every loop-free triple has one of the 24 shapes")
}

/// The 1-based pair shape of an ordered edge pair: 1 identical, 2 mutual,
/// 3 head of the first is the tail of the second, 4 the reverse chain,
/// 5 shared tail, 6 shared head, 7 disjoint.
pub fn classify_pair(e: (usize, usize), f: (usize, usize)) -> usize {
    if e == f {
        1
    } else if e == (f.1, f.0) {
        2
    } else if e.1 == f.0 {
        3
    } else if e.0 == f.1 {
        4
    } else if e.0 == f.0 {
        5
    } else if e.1 == f.1 {
        6
    } else {
        7
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn frozen_columns_match_representatives() {
        for (l, s) in TRIPLE_SHAPES.iter().enumerate() {
            assert_eq!(*s, derive_shape(s.edges), "shape {}", l + 1);
        }
    }

    #[test]
    fn representatives_are_pairwise_non_isomorphic() {
        let mut codes = representative_codes().to_vec();
        codes.sort_unstable();
        codes.dedup();
        assert_eq!(codes.len(), 24);
    }

    #[test]
    fn classification_ignores_order_and_labels() {
        let a = classify_triple([(4, 9), (9, 2), (2, 4)]);
        let b = classify_triple([(2, 4), (4, 9), (9, 2)]);
        assert_eq!(a, 9);
        assert_eq!(a, b);
        assert_eq!(classify_triple([(5, 6), (5, 6), (5, 6)]), 1);
        assert_eq!(classify_triple([(0, 1), (2, 3), (4, 5)]), 24);
    }
}
