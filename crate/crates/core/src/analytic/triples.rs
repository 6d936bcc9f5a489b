// SPDX-License-Identifier: MIT OR Apache-2.0

//! Counts of ordered edge triples in each of the 24 triple shapes, in
//! `O(nk^2)` time.
//!
//! Shape numbers follow [`super::shapes::TRIPLE_SHAPES`]. Everything is
//! evaluated in checked `i128`, so an overflow is reported rather than
//! wrapped.

use serde::{Deserialize, Serialize};

use crate::edge_stats::PairConfigCounts;
use crate::error::{Error, Result};
use crate::knn::DirectedKnnGraph;

/// `N^(1)..N^(24)` with the auxiliary sums they are built from.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct TripleConfigCounts {
    pub n: usize,
    pub k: usize,
    /// `N^(l)` at index `l - 1`.
    pub counts: [u128; 24],
    /// Sum over mutual ordered pairs `((i,j),(j,i))` of `|D_i| + |D_j| - 2`.
    pub mutual_in_degree_sum: u128,
    /// Chains `((i,j),(j,v))`, `v != i`, closed by an edge `(v,i)`.
    pub cyclic_chains: u128,
    /// Chains closed by a shortcut `(i,v)`.
    pub transitive_chains: u128,
    /// Sum over chains of `|D_v| - 1`.
    pub chain_end_in_degree_sum: u128,
    /// Sum over ordered pairs of distinct out-edges of a common tail `i`
    /// of `|D_i|`.
    pub shared_tail_in_degree_sum: u128,
}

impl TripleConfigCounts {
    /// `N^(l)`, 1-based.
    pub fn get(&self, l: usize) -> u128 {
        self.counts[l - 1]
    }

    pub fn total(&self) -> u128 {
        self.counts.iter().sum()
    }
}

struct Checked(&'static str);

impl Checked {
    fn err(&self) -> Error {
        Error::IntegerOverflow(self.0)
    }
    fn add(&self, a: i128, b: i128) -> Result<i128> {
        a.checked_add(b).ok_or_else(|| self.err())
    }
    fn sub(&self, a: i128, b: i128) -> Result<i128> {
        a.checked_sub(b).ok_or_else(|| self.err())
    }
    fn mul(&self, a: i128, b: i128) -> Result<i128> {
        a.checked_mul(b).ok_or_else(|| self.err())
    }
    fn sum(&self, terms: &[i128]) -> Result<i128> {
        terms.iter().try_fold(0i128, |acc, &x| self.add(acc, x))
    }
    fn int(&self, v: u128) -> Result<i128> {
        i128::try_from(v).map_err(|_| self.err())
    }
}

fn choose3(x: i128) -> i128 {
    if x < 3 {
        0
    } else {
        x * (x - 1) * (x - 2) / 6
    }
}

pub fn triple_config_counts(
    g: &DirectedKnnGraph,
    pairs: &PairConfigCounts,
) -> Result<TripleConfigCounts> {
    let ck = Checked("triple configuration counts");
    let n = g.n();
    let k = g.k() as i128;
    let nk = ck.mul(n as i128, k)?;
    let deg = |i: usize| g.in_degree(i) as i128;

    let mut mutual_deg = 0i128;
    let mut cyclic = 0i128;
    let mut transitive = 0i128;
    let mut chain_end = 0i128;
    let mut tail_deg = 0i128;
    let mut in_triples = 0i128;
    for i in 0..n {
        let di = deg(i);
        tail_deg = ck.add(tail_deg, ck.mul(k * (k - 1), di)?)?;
        in_triples = ck.add(in_triples, choose3(di))?;
        for &j in g.out_neighbors(i) {
            let dj = deg(j);
            if g.has_edge(j, i) {
                mutual_deg = ck.add(mutual_deg, di + dj - 2)?;
            }
            for &v in g.out_neighbors(j) {
                if v == i {
                    continue;
                }
                cyclic += i128::from(g.has_edge(v, i));
                transitive += i128::from(g.has_edge(i, v));
                chain_end = ck.add(chain_end, deg(v) - 1)?;
            }
        }
    }

    let c: Vec<i128> = pairs.c.iter().map(|&v| ck.int(v)).collect::<Result<_>>()?;
    let (c2, c3, c5, c6, c7) = (c[1], c[2], c[4], c[5], c[6]);
    let nk2 = nk - 2;

    let mut v = [0i128; 25];
    v[1] = nk;
    v[2] = ck.mul(3, c2)?;
    v[3] = ck.mul(3, c3)?;
    v[4] = ck.mul(3, c6)?;
    v[5] = ck.mul(ck.mul(6, c2)?, k - 1)?;
    v[6] = ck.mul(3, mutual_deg)?;
    v[7] = ck.mul(3, c5)?;
    v[8] = ck.mul(3, c3)?;
    v[9] = ck.mul(2, cyclic)?;
    v[10] = ck.mul(6, transitive)?;
    v[11] = ck.mul(3, c7)?;
    v[12] = ck.sub(ck.mul(ck.mul(3, c2)?, nk2)?, v[5] + v[6])?;
    v[13] = ck.sub(ck.mul(ck.mul(6, k)?, c3)?, ck.add(v[6], ck.mul(3, v[9])?)?)?;
    v[14] = ck.sub(ck.mul(6, chain_end)?, v[10])?;
    v[15] = ck.sub(ck.mul(ck.mul(6, k - 1)?, c6)?, v[10])?;
    v[16] = ck.sub(ck.mul(ck.mul(6, k)?, c5)?, ck.add(v[5], v[10])?)?;
    v[17] = ck.mul(6, in_triples)?;
    v[18] = ck.mul(ck.mul(6, n as i128)?, choose3(k))?;
    v[19] = ck.sub(ck.mul(3, tail_deg)?, v[5])?;
    v[20] = ck.sub(ck.mul(ck.mul(3, k)?, c6)?, v[6])?;
    v[21] = ck.sub(
        ck.mul(ck.mul(6, c3)?, nk2)?,
        ck.sum(&[
            v[5],
            v[6],
            v[10],
            v[14],
            v[16],
            ck.mul(3, v[9])?,
            ck.mul(2, v[13])?,
            ck.mul(2, v[19])?,
            ck.mul(2, v[20])?,
        ])?,
    )?;
    v[22] = ck.sub(
        ck.mul(ck.mul(3, c5)?, nk2)?,
        ck.sum(&[v[5], v[10], v[15], v[16], v[19], ck.mul(3, v[18])?])?,
    )?;
    v[23] = ck.sub(
        ck.mul(ck.mul(3, c6)?, nk2)?,
        ck.sum(&[v[6], v[10], v[14], v[15], v[20], ck.mul(3, v[17])?])?,
    )?;
    let cube = ck.mul(ck.mul(nk, nk)?, nk)?;
    v[24] = ck.sub(cube, ck.sum(&v[1..24])?)?;

    let mut counts = [0u128; 24];
    for (l, out) in counts.iter_mut().enumerate() {
        *out = u128::try_from(v[l + 1]).map_err(|_| {
            Error::InvalidGraph(format!("negative count for triple shape {}", l + 1))
        })?;
    }
    let u = |x: i128| x as u128;
    Ok(TripleConfigCounts {
        n,
        k: g.k(),
        counts,
        mutual_in_degree_sum: u(mutual_deg),
        cyclic_chains: u(cyclic),
        transitive_chains: u(transitive),
        chain_end_in_degree_sum: u(chain_end),
        shared_tail_in_degree_sum: u(tail_deg),
    })
}
