// SPDX-License-Identifier: MIT OR Apache-2.0

//! A kd-tree over the rows of a [`DataMatrix`] with (1+eps)-approximate
//! k-nearest-neighbor search.
//!
//! Nodes split at the median of the coordinate with the largest spread.
//! Search descends to the leaf holding the query first and then visits
//! the far side of each split only when the incremental lower bound on the
//! distance to that cell, inflated by `(1+eps)^2`, does not exceed the
//! current k-th best squared distance.

use crate::error::{Error, Result};
use crate::matrix_io::DataMatrix;

pub const DEFAULT_BUCKET_SIZE: usize = 16;

// Keeps eps = 0 exact when the incremental bound and a point distance tie
// but round differently; a cell at exactly the current k-th distance may
// still hold a tie with a smaller index, so it must be visited.
const BOUND_SLACK: f64 = 1.0 + 1e-10;

#[derive(Clone, Debug)]
enum Node {
    Leaf {
        start: usize,
        end: usize,
    },
    Split {
        dim: usize,
        cut: f64,
        left: usize,
        right: usize,
    },
}

#[derive(Clone, Debug)]
pub struct KdTree<'a> {
    data: &'a DataMatrix,
    order: Vec<usize>,
    nodes: Vec<Node>,
    bucket_size: usize,
}

const LANES: usize = 8;

/// Squared Euclidean distance. Coordinates are accumulated in eight
/// interleaved partial sums so the loop vectorizes; the summation order is
/// fixed, so results are reproducible and symmetric in `a` and `b`.
#[inline]
pub fn sq_dist(a: &[f64], b: &[f64]) -> f64 {
    let mut acc = [0.0f64; LANES];
    let (ca, ra) = (a.chunks_exact(LANES), a.chunks_exact(LANES).remainder());
    let rb = b.chunks_exact(LANES).remainder();
    for (x, y) in ca.zip(b.chunks_exact(LANES)) {
        for l in 0..LANES {
            let diff = x[l] - y[l];
            acc[l] += diff * diff;
        }
    }
    let mut tail = 0.0;
    for (x, y) in ra.iter().zip(rb) {
        let diff = x - y;
        tail += diff * diff;
    }
    ((acc[0] + acc[4]) + (acc[1] + acc[5])) + ((acc[2] + acc[6]) + (acc[3] + acc[7])) + tail
}

impl<'a> KdTree<'a> {
    pub fn build(data: &'a DataMatrix, bucket_size: usize) -> Result<Self> {
        if bucket_size == 0 {
            return Err(Error::invalid("bucket size must be positive"));
        }
        let mut tree = Self {
            data,
            order: (0..data.n()).collect(),
            nodes: Vec::new(),
            bucket_size,
        };
        tree.build_node(0, data.n());
        Ok(tree)
    }

    fn build_node(&mut self, start: usize, end: usize) -> usize {
        let id = self.nodes.len();
        self.nodes.push(Node::Leaf { start, end });
        if end - start <= self.bucket_size {
            return id;
        }
        let (dim, spread) = self.widest_dim(start, end);
        if spread <= 0.0 {
            // all points coincide
            return id;
        }
        let data = self.data;
        let mid = start + (end - start) / 2;
        let key = |i: &usize| (data.row(*i)[dim], *i);
        self.order[start..end].select_nth_unstable_by(mid - start, |a, b| {
            key(a).partial_cmp(&key(b)).expect("finite coordinates")
        });
        let cut = data.row(self.order[mid])[dim];
        let left = self.build_node(start, mid);
        let right = self.build_node(mid, end);
        self.nodes[id] = Node::Split {
            dim,
            cut,
            left,
            right,
        };
        id
    }

    fn widest_dim(&self, start: usize, end: usize) -> (usize, f64) {
        let d = self.data.d();
        let mut lo = self.data.row(self.order[start]).to_vec();
        let mut hi = lo.clone();
        for &i in &self.order[start + 1..end] {
            for ((l, h), &v) in lo.iter_mut().zip(hi.iter_mut()).zip(self.data.row(i)) {
                if v < *l {
                    *l = v;
                } else if v > *h {
                    *h = v;
                }
            }
        }
        (0..d)
            .map(|j| (j, hi[j] - lo[j]))
            .fold((0, f64::NEG_INFINITY), |best, cur| {
                if cur.1 > best.1 {
                    cur
                } else {
                    best
                }
            })
    }

    pub fn len(&self) -> usize {
        self.order.len()
    }

    pub fn is_empty(&self) -> bool {
        self.order.is_empty()
    }

    pub fn num_leaves(&self) -> usize {
        self.nodes
            .iter()
            .filter(|n| matches!(n, Node::Leaf { .. }))
            .count()
    }

    /// Number of edges on the longest root-to-leaf path.
    pub fn depth(&self) -> usize {
        fn walk(nodes: &[Node], id: usize) -> usize {
            match nodes[id] {
                Node::Leaf { .. } => 0,
                Node::Split { left, right, .. } => 1 + walk(nodes, left).max(walk(nodes, right)),
            }
        }
        walk(&self.nodes, 0)
    }

    /// Row ids of every leaf bucket, in tree order.
    pub fn leaves(&self) -> Vec<&[usize]> {
        self.nodes
            .iter()
            .filter_map(|n| match *n {
                Node::Leaf { start, end } => Some(&self.order[start..end]),
                Node::Split { .. } => None,
            })
            .filter(|s| !s.is_empty())
            .collect()
    }

    /// The `k` nearest rows to row `query`, excluding itself, ordered by
    /// distance with ties going to the smaller row index. With `eps > 0`
    /// the r-th returned distance is at most `(1+eps)` times the true r-th
    /// nearest distance.
    pub fn knn(&self, query: usize, k: usize, eps: f64) -> Result<Vec<usize>> {
        Ok(self
            .knn_with_distances(query, k, eps)?
            .into_iter()
            .map(|(_, i)| i)
            .collect())
    }

    /// Like [`knn`](Self::knn) but also returns squared distances.
    pub fn knn_with_distances(&self, query: usize, k: usize, eps: f64) -> Result<Vec<(f64, usize)>> {
        let n = self.len();
        if k == 0 {
            return Err(Error::invalid("k must be positive"));
        }
        if k >= n {
            return Err(Error::NotEnoughNeighbors { k, n });
        }
        if !(eps >= 0.0) || !eps.is_finite() {
            return Err(Error::invalid(format!("eps must be a finite non-negative number, got {eps}")));
        }
        if query >= n {
            return Err(Error::invalid(format!("query {query} out of range")));
        }
        let q = self.data.row(query);
        let mut search = Search {
            tree: self,
            query,
            q,
            k,
            inflate: (1.0 + eps) * (1.0 + eps),
            best: Vec::with_capacity(k + 1),
            offsets: vec![0.0; self.data.d()],
        };
        search.visit(0, 0.0);
        Ok(search.best)
    }
}

struct Search<'t, 'a> {
    tree: &'t KdTree<'a>,
    query: usize,
    q: &'t [f64],
    k: usize,
    inflate: f64,
    // sorted ascending by (distance, index)
    best: Vec<(f64, usize)>,
    offsets: Vec<f64>,
}

impl Search<'_, '_> {
    fn worst(&self) -> f64 {
        if self.best.len() < self.k {
            f64::INFINITY
        } else {
            self.best[self.k - 1].0
        }
    }

    fn offer(&mut self, dist: f64, idx: usize) {
        if self.best.len() == self.k {
            let (wd, wi) = self.best[self.k - 1];
            if (dist, idx) >= (wd, wi) {
                return;
            }
            self.best.pop();
        }
        let pos = self
            .best
            .partition_point(|&(bd, bi)| (bd, bi) < (dist, idx));
        self.best.insert(pos, (dist, idx));
    }

    fn visit(&mut self, node: usize, rd: f64) {
        match self.tree.nodes[node] {
            Node::Leaf { start, end } => {
                let data = self.tree.data;
                for &i in &self.tree.order[start..end] {
                    if i != self.query {
                        let dist = sq_dist(self.q, data.row(i));
                        self.offer(dist, i);
                    }
                }
            }
            Node::Split {
                dim,
                cut,
                left,
                right,
            } => {
                let diff = self.q[dim] - cut;
                let (near, far) = if diff <= 0.0 { (left, right) } else { (right, left) };
                self.visit(near, rd);
                let old = self.offsets[dim];
                let far_rd = rd - old * old + diff * diff;
                if far_rd * self.inflate <= self.worst() * BOUND_SLACK {
                    self.offsets[dim] = diff;
                    self.visit(far, far_rd);
                    self.offsets[dim] = old;
                }
            }
        }
    }
}

/// Exhaustive k-NN for one row, with the same ordering and tie rule as the
/// tree search.
pub fn brute_force_knn(data: &DataMatrix, query: usize, k: usize) -> Result<Vec<usize>> {
    let n = data.n();
    if k == 0 {
        return Err(Error::invalid("k must be positive"));
    }
    if k >= n {
        return Err(Error::NotEnoughNeighbors { k, n });
    }
    let q = data.row(query);
    let mut cand: Vec<(f64, usize)> = (0..n)
        .filter(|&i| i != query)
        .map(|i| (sq_dist(q, data.row(i)), i))
        .collect();
    let cmp = |a: &(f64, usize), b: &(f64, usize)| a.partial_cmp(b).expect("finite distances");
    cand.select_nth_unstable_by(k - 1, cmp);
    cand.truncate(k);
    cand.sort_unstable_by(cmp);
    Ok(cand.into_iter().map(|(_, i)| i).collect())
}
