// SPDX-License-Identifier: MIT OR Apache-2.0

//! Directed k-nearest-neighbor graphs.
//!
//! An edge `i -> j` means row `j` is among row `i`'s `k` (approximate)
//! nearest neighbors under the Euclidean metric. Every node has out-degree
//! exactly `k`; in-degrees vary and drive the null moments.

mod kdtree;

use std::io::{BufWriter, Read, Write};

use rayon::prelude::*;

use crate::error::{Error, Result};
use crate::matrix_io::DataMatrix;

pub use kdtree::{brute_force_knn, sq_dist, KdTree, DEFAULT_BUCKET_SIZE};

/// Knobs for graph construction that do not change the output contract.
#[derive(Clone, Debug, PartialEq)]
pub struct GraphOptions {
    pub bucket_size: usize,
    /// Above this dimension the kd-tree is skipped in favor of exhaustive
    /// search, which is faster once the tree stops pruning.
    pub brute_force_dim: usize,
}

impl Default for GraphOptions {
    fn default() -> Self {
        Self {
            bucket_size: DEFAULT_BUCKET_SIZE,
            brute_force_dim: 4096,
        }
    }
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct DirectedKnnGraph {
    n: usize,
    k: usize,
    // out-neighbors of node i at targets[i*k..(i+1)*k], nearest first
    targets: Vec<usize>,
    // sorted copy for membership tests
    sorted_targets: Vec<usize>,
    in_offsets: Vec<usize>,
    in_sources: Vec<usize>,
}

impl DirectedKnnGraph {
    /// Builds a graph from flattened out-neighbor lists (`k` per node).
    pub fn from_targets(n: usize, k: usize, targets: Vec<usize>) -> Result<Self> {
        if k == 0 {
            return Err(Error::InvalidGraph("out-degree must be positive".into()));
        }
        if targets.len() != n * k {
            return Err(Error::InvalidGraph(format!(
                "expected {} targets, got {}",
                n * k,
                targets.len()
            )));
        }
        let mut sorted_targets = targets.clone();
        for (i, chunk) in sorted_targets.chunks_mut(k).enumerate() {
            chunk.sort_unstable();
            for (pos, &j) in chunk.iter().enumerate() {
                if j >= n {
                    return Err(Error::InvalidGraph(format!("target {j} out of range")));
                }
                if j == i {
                    return Err(Error::InvalidGraph(format!("self-loop at node {i}")));
                }
                if pos > 0 && chunk[pos - 1] == j {
                    return Err(Error::InvalidGraph(format!("duplicate edge {i} -> {j}")));
                }
            }
        }
        let mut in_offsets = vec![0usize; n + 1];
        for &j in &targets {
            in_offsets[j + 1] += 1;
        }
        for i in 0..n {
            in_offsets[i + 1] += in_offsets[i];
        }
        let mut fill = in_offsets.clone();
        let mut in_sources = vec![0usize; n * k];
        for (i, chunk) in targets.chunks(k).enumerate() {
            for &j in chunk {
                in_sources[fill[j]] = i;
                fill[j] += 1;
            }
        }
        Ok(Self {
            n,
            k,
            targets,
            sorted_targets,
            in_offsets,
            in_sources,
        })
    }

    /// Builds a graph from an edge list; every node in `0..n` must have the
    /// same out-degree.
    pub fn from_edges(n: usize, edges: &[(usize, usize)]) -> Result<Self> {
        if n == 0 {
            return Err(Error::InvalidGraph("graph has no nodes".into()));
        }
        let mut out: Vec<Vec<usize>> = vec![Vec::new(); n];
        for &(i, j) in edges {
            if i >= n || j >= n {
                return Err(Error::InvalidGraph(format!("edge {i} -> {j} out of range")));
            }
            out[i].push(j);
        }
        let k = out[0].len();
        if let Some(i) = out.iter().position(|o| o.len() != k) {
            return Err(Error::InvalidGraph(format!(
                "node {i} has out-degree {} but node 0 has {k}",
                out[i].len()
            )));
        }
        Self::from_targets(n, k, out.concat())
    }

    pub fn n(&self) -> usize {
        self.n
    }

    pub fn k(&self) -> usize {
        self.k
    }

    pub fn num_edges(&self) -> usize {
        self.n * self.k
    }

    pub fn out_neighbors(&self, i: usize) -> &[usize] {
        &self.targets[i * self.k..(i + 1) * self.k]
    }

    /// `D_i`: the nodes pointing at `i`, in increasing order.
    pub fn in_neighbors(&self, i: usize) -> &[usize] {
        &self.in_sources[self.in_offsets[i]..self.in_offsets[i + 1]]
    }

    pub fn in_degree(&self, i: usize) -> usize {
        self.in_offsets[i + 1] - self.in_offsets[i]
    }

    pub fn has_edge(&self, i: usize, j: usize) -> bool {
        self.sorted_targets[i * self.k..(i + 1) * self.k]
            .binary_search(&j)
            .is_ok()
    }

    /// Edges grouped by source, each group ordered nearest first.
    pub fn edges(&self) -> impl Iterator<Item = (usize, usize)> + '_ {
        self.targets
            .chunks(self.k)
            .enumerate()
            .flat_map(|(i, c)| c.iter().map(move |&j| (i, j)))
    }

    /// True when every in-degree equals `k`, the case in which `R_diff`
    /// is constant.
    pub fn is_in_regular(&self) -> bool {
        (0..self.n).all(|i| self.in_degree(i) == self.k)
    }

    /// Writes `source,target` lines with 1-based ids.
    pub fn write_edge_csv<W: Write>(&self, writer: W) -> Result<()> {
        let mut w = BufWriter::new(writer);
        writeln!(w, "source,target")?;
        for (i, j) in self.edges() {
            writeln!(w, "{},{}", i + 1, j + 1)?;
        }
        w.flush()?;
        Ok(())
    }

    /// Reads a `source,target` edge list with 1-based ids. The node count is
    /// the largest id seen.
    pub fn read_edge_csv<R: Read>(reader: R) -> Result<Self> {
        let mut rdr = csv::ReaderBuilder::new()
            .has_headers(false)
            .trim(csv::Trim::All)
            .from_reader(reader);
        let mut edges = Vec::new();
        let mut n = 0usize;
        for (idx, rec) in rdr.records().enumerate() {
            let line = idx + 1;
            let rec = rec.map_err(|e| Error::Parse {
                line,
                msg: e.to_string(),
            })?;
            if rec.len() != 2 {
                return Err(Error::Parse {
                    line,
                    msg: format!("expected 2 columns, found {}", rec.len()),
                });
            }
            let ids = (rec[0].parse::<usize>(), rec[1].parse::<usize>());
            let (s, t) = match ids {
                (Ok(s), Ok(t)) => (s, t),
                _ if idx == 0 => continue,
                _ => {
                    return Err(Error::Parse {
                        line,
                        msg: "node ids must be positive integers".into(),
                    })
                }
            };
            if s == 0 || t == 0 {
                return Err(Error::Parse {
                    line,
                    msg: "node ids are 1-based".into(),
                });
            }
            n = n.max(s).max(t);
            edges.push((s - 1, t - 1));
        }
        Self::from_edges(n, &edges)
    }
}

/// Builds the directed k-NN graph with default options.
pub fn build_graph(data: &DataMatrix, k: usize, eps: f64) -> Result<DirectedKnnGraph> {
    build_graph_with(data, k, eps, &GraphOptions::default())
}

pub fn build_graph_with(
    data: &DataMatrix,
    k: usize,
    eps: f64,
    opts: &GraphOptions,
) -> Result<DirectedKnnGraph> {
    let n = data.n();
    if k == 0 {
        return Err(Error::invalid("k must be positive"));
    }
    if k >= n {
        return Err(Error::NotEnoughNeighbors { k, n });
    }
    let lists: Vec<Vec<usize>> = if data.d() > opts.brute_force_dim {
        (0..n)
            .into_par_iter()
            .map(|i| brute_force_knn(data, i, k))
            .collect::<Result<_>>()?
    } else {
        let tree = KdTree::build(data, opts.bucket_size)?;
        (0..n)
            .into_par_iter()
            .map(|i| tree.knn(i, k, eps))
            .collect::<Result<_>>()?
    };
    DirectedKnnGraph::from_targets(n, k, lists.concat())
}
