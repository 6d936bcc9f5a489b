// SPDX-License-Identifier: MIT OR Apache-2.0

//! Edge-count processes, pair-configuration counts, exact permutation-null
//! moments and the standardized scan `M(t) = max(Z_w(t), |Z_diff(t)|)`.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Process, Result};
use crate::knn::DirectedKnnGraph;

/// Variances at or below this fraction of the raw second moments they are
/// computed from are treated as exactly zero.
pub const VARIANCE_TOLERANCE: f64 = 1e-12;

/// Relative gap below which two values of `M(t)` are treated as equal when
/// locating the maximum. Mirror-image splits give the same statistic in
/// exact arithmetic but can differ in the last bits after standardization.
pub const TIE_TOLERANCE: f64 = 1e-12;

/// `R_1(t)` and `R_2(t)` for `t = 1..n-1`.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct EdgeCountProfile {
    r1: Vec<u64>,
    r2: Vec<u64>,
}

impl EdgeCountProfile {
    /// Profile of `g` when node `i` is observed at time `time_of[i]`
    /// (a permutation of `1..=n`).
    pub fn from_times(g: &DirectedKnnGraph, time_of: &[usize]) -> Self {
        let n = g.n();
        let mut profile = Self {
            r1: vec![0; n.saturating_sub(1)],
            r2: vec![0; n.saturating_sub(1)],
        };
        let mut up = vec![0i64; n + 1];
        let mut down = vec![0i64; n + 1];
        profile.fill(g, time_of, &mut up, &mut down);
        profile
    }

    /// Recomputes in place using caller-owned scratch of length `n + 1`.
    pub(crate) fn fill(
        &mut self,
        g: &DirectedKnnGraph,
        time_of: &[usize],
        up: &mut [i64],
        down: &mut [i64],
    ) {
        let n = g.n();
        up.iter_mut().for_each(|v| *v = 0);
        down.iter_mut().for_each(|v| *v = 0);
        for (i, j) in g.edges() {
            let (a, b) = (time_of[i], time_of[j]);
            // R_1(t) counts the edge for t >= max, R_2(t) for t < min
            up[a.max(b)] += 1;
            down[a.min(b)] += 1;
        }
        let mut r1 = 0i64;
        let mut r2 = g.num_edges() as i64;
        for t in 1..n {
            r1 += up[t];
            r2 -= down[t];
            self.r1[t - 1] = r1 as u64;
            self.r2[t - 1] = r2 as u64;
        }
    }

    pub(crate) fn empty(n: usize) -> Self {
        Self {
            r1: vec![0; n.saturating_sub(1)],
            r2: vec![0; n.saturating_sub(1)],
        }
    }

    pub fn n(&self) -> usize {
        self.r1.len() + 1
    }

    pub fn r1(&self, t: usize) -> u64 {
        self.r1[t - 1]
    }

    pub fn r2(&self, t: usize) -> u64 {
        self.r2[t - 1]
    }

    pub fn r1_values(&self) -> &[u64] {
        &self.r1
    }

    pub fn r2_values(&self) -> &[u64] {
        &self.r2
    }
}

/// Profile in the observed time order.
pub fn edge_count_profile(g: &DirectedKnnGraph) -> EdgeCountProfile {
    let times: Vec<usize> = (1..=g.n()).collect();
    EdgeCountProfile::from_times(g, &times)
}

/// Counts of ordered edge pairs in each of the seven pair configurations:
/// identical, mutual, the two chain orders, shared tail, shared head and
/// disjoint.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct PairConfigCounts {
    pub n: usize,
    pub k: usize,
    pub c: [u128; 7],
}

impl PairConfigCounts {
    pub fn nk(&self) -> u128 {
        (self.n * self.k) as u128
    }

    /// Pairs spanning two distinct nodes.
    pub fn d1(&self) -> u128 {
        self.c[0] + self.c[1]
    }

    /// Pairs spanning three distinct nodes.
    pub fn d2(&self) -> u128 {
        self.c[2] + self.c[3] + self.c[4] + self.c[5]
    }

    /// Pairs spanning four distinct nodes.
    pub fn d3(&self) -> u128 {
        self.c[6]
    }

    /// All in-degrees equal `k` exactly when `sum |D_i|^2 = n k^2`.
    pub fn in_regular(&self) -> bool {
        let (n, k) = (self.n as u128, self.k as u128);
        self.c[5] == n * k * k - n * k
    }
}

pub fn pair_config_counts(g: &DirectedKnnGraph) -> Result<PairConfigCounts> {
    let n = g.n();
    let k = g.k();
    let nk = (n * k) as u128;
    let mut mutual = 0u128;
    let mut chains = 0u128;
    let mut in_pairs = 0u128;
    for i in 0..n {
        for &j in g.in_neighbors(i) {
            let back = u128::from(g.has_edge(i, j));
            mutual += back;
            chains += k as u128 - back;
        }
        let deg = g.in_degree(i) as u128;
        in_pairs += deg * deg - deg;
    }
    let overflow = || Error::IntegerOverflow("pair configuration counts");
    let shared_tail = nk * (k as u128 - 1);
    let total = nk.checked_mul(nk).ok_or_else(overflow)?;
    let partial = nk + mutual + 2 * chains + shared_tail + in_pairs;
    let disjoint = total.checked_sub(partial).ok_or_else(overflow)?;
    Ok(PairConfigCounts {
        n,
        k,
        c: [nk, mutual, chains, chains, shared_tail, in_pairs, disjoint],
    })
}

/// `top (top-1) ... (top-m+1) / (bottom (bottom-1) ... (bottom-m+1))`,
/// zero when `top < m`.
pub(crate) fn falling_ratio(top: usize, bottom: usize, m: usize) -> f64 {
    if top < m {
        return 0.0;
    }
    (0..m).fold(1.0, |acc, i| acc * (top - i) as f64 / (bottom - i) as f64)
}

/// Probability that `m1` fixed distinct nodes all land at times `<= t` and
/// `m2` further distinct nodes all land at times `> t`.
pub(crate) fn split_probability(n: usize, t: usize, m1: usize, m2: usize) -> f64 {
    if t < m1 || n - t < m2 {
        return 0.0;
    }
    falling_ratio(t, n, m1) * falling_ratio(n - t, n - m1, m2)
}

/// The combinatorial fractions that appear in the null moments.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct NullFractions {
    pub p1: f64,
    pub p2: f64,
    pub p3: f64,
    pub q1: f64,
    pub q2: f64,
    pub q3: f64,
    pub r: f64,
}

impl NullFractions {
    pub fn new(n: usize, t: usize) -> Self {
        let s = n - t;
        Self {
            p1: falling_ratio(t, n, 2),
            p2: falling_ratio(t, n, 3),
            p3: falling_ratio(t, n, 4),
            q1: falling_ratio(s, n, 2),
            q2: falling_ratio(s, n, 3),
            q3: falling_ratio(s, n, 4),
            r: split_probability(n, t, 2, 2),
        }
    }
}

/// Permutation-null mean, variance and covariance of `(R_1(t), R_2(t))`.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct Moments {
    pub t: usize,
    pub mean1: f64,
    pub mean2: f64,
    pub var1: f64,
    pub var2: f64,
    pub cov: f64,
    /// `E[R_1^2] + E[R_2^2]`, the magnitude the variances cancel against.
    pub scale: f64,
}

pub fn null_moments(counts: &PairConfigCounts, n: usize, t: usize) -> Moments {
    let f = NullFractions::new(n, t);
    let nk = counts.nk() as f64;
    let (d1, d2, d3) = (counts.d1() as f64, counts.d2() as f64, counts.d3() as f64);
    let mean1 = nk * f.p1;
    let mean2 = nk * f.q1;
    let sq1 = d1 * f.p1 + d2 * f.p2 + d3 * f.p3;
    let sq2 = d1 * f.q1 + d2 * f.q2 + d3 * f.q3;
    Moments {
        t,
        mean1,
        mean2,
        var1: sq1 - mean1 * mean1,
        var2: sq2 - mean2 * mean2,
        cov: d3 * f.r - mean1 * mean2,
        scale: sq1 + sq2,
    }
}

/// Null moments for every `t = 1..n-1`.
#[derive(Clone, Debug)]
pub struct MomentTable {
    n: usize,
    rows: Vec<Moments>,
}

impl MomentTable {
    pub fn new(counts: &PairConfigCounts) -> Self {
        let n = counts.n;
        Self {
            n,
            rows: (1..n).map(|t| null_moments(counts, n, t)).collect(),
        }
    }

    pub fn n(&self) -> usize {
        self.n
    }

    pub fn at(&self, t: usize) -> &Moments {
        &self.rows[t - 1]
    }
}

/// Inclusive range `[n0, n1]` of candidate split points.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct Window {
    pub n0: usize,
    pub n1: usize,
}

impl Window {
    pub fn new(n0: usize, n1: usize) -> Self {
        Self { n0, n1 }
    }

    /// `n0 = max(ceil(0.05 n), 2)`, `n1 = n - n0`.
    pub fn default_for(n: usize) -> Self {
        Self::symmetric(n, (n as f64 * 0.05).ceil() as usize)
    }

    /// `[n0, n - n0]`, with `n0` raised to 2: `R_w` is constant at `t = 1`
    /// and `t = n - 1`.
    pub fn symmetric(n: usize, n0: usize) -> Self {
        let n0 = n0.max(2);
        Self {
            n0,
            n1: n.saturating_sub(n0),
        }
    }

    pub fn is_empty(&self) -> bool {
        self.n0 > self.n1
    }

    pub fn len(&self) -> usize {
        if self.is_empty() {
            0
        } else {
            self.n1 - self.n0 + 1
        }
    }

    pub fn iter(&self) -> std::ops::RangeInclusive<usize> {
        self.n0..=self.n1
    }

    pub fn validate(&self, n: usize) -> Result<()> {
        if self.n0 < 1 || self.n1 > n.saturating_sub(1) || self.is_empty() {
            return Err(Error::invalid(format!(
                "window [{}, {}] must satisfy 1 <= n0 <= n1 <= {}",
                self.n0,
                self.n1,
                n.saturating_sub(1)
            )));
        }
        Ok(())
    }
}

/// Weights of `R_w(t) = a R_1(t) + b R_2(t)`.
pub fn within_weights(n: usize, t: usize) -> (f64, f64) {
    let denom = (n - 2) as f64;
    ((n - t - 1) as f64 / denom, (t - 1) as f64 / denom)
}

#[derive(Clone, Copy, Debug)]
struct Coeffs {
    a: f64,
    b: f64,
    mean_w: f64,
    sd_w: f64,
    mean_diff: f64,
    sd_diff: f64,
}

/// Per-t centering and scaling for `Z_w` and `Z_diff` over a window. The
/// coefficients depend only on the graph, so one standardizer serves every
/// relabeling of the nodes.
#[derive(Clone, Debug)]
pub struct Standardizer {
    n: usize,
    window: Window,
    coeffs: Vec<Coeffs>,
}

impl Standardizer {
    pub fn new(counts: &PairConfigCounts, window: Window) -> Result<Self> {
        let n = counts.n;
        if n < crate::matrix_io::MIN_OBSERVATIONS {
            return Err(Error::TooFewObservations(n));
        }
        window.validate(n)?;
        if counts.in_regular() {
            return Err(Error::DegenerateVariance {
                t: window.n0,
                process: Process::Diff,
            });
        }
        let coeffs = window
            .iter()
            .map(|t| {
                let m = null_moments(counts, n, t);
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
                Ok(Coeffs {
                    a,
                    b,
                    mean_w: a * m.mean1 + b * m.mean2,
                    sd_w: var_w.sqrt(),
                    mean_diff: m.mean1 - m.mean2,
                    sd_diff: var_d.sqrt(),
                })
            })
            .collect::<Result<_>>()?;
        Ok(Self { n, window, coeffs })
    }

    pub fn window(&self) -> Window {
        self.window
    }

    pub fn n(&self) -> usize {
        self.n
    }

    #[inline]
    fn z_at(&self, profile: &EdgeCountProfile, t: usize) -> (f64, f64) {
        let c = &self.coeffs[t - self.window.n0];
        let (r1, r2) = (profile.r1(t) as f64, profile.r2(t) as f64);
        let z_w = (c.a * r1 + c.b * r2 - c.mean_w) / c.sd_w;
        let z_diff = (r1 - r2 - c.mean_diff) / c.sd_diff;
        (z_w, z_diff)
    }

    /// `(argmax, max)` of `M(t)` over the window; the smallest `t` wins ties,
    /// where values within [`TIE_TOLERANCE`] of each other count as tied.
    pub fn max_stat(&self, profile: &EdgeCountProfile) -> (usize, f64) {
        let mut best = (self.window.n0, f64::NEG_INFINITY);
        for t in self.window.iter() {
            let (z_w, z_diff) = self.z_at(profile, t);
            let m = z_w.max(z_diff.abs());
            let beats = if best.1 == f64::NEG_INFINITY {
                m > best.1
            } else {
                m - best.1 > TIE_TOLERANCE * best.1.abs().max(1.0)
            };
            if beats {
                best = (t, m);
            }
        }
        best
    }

    pub fn scan(&self, profile: &EdgeCountProfile) -> ScanProcesses {
        let len = self.window.len();
        let mut z_w = Vec::with_capacity(len);
        let mut z_diff = Vec::with_capacity(len);
        let mut m = Vec::with_capacity(len);
        for t in self.window.iter() {
            let (w, d) = self.z_at(profile, t);
            z_w.push(w);
            z_diff.push(d);
            m.push(w.max(d.abs()));
        }
        let (argmax, max) = self.max_stat(profile);
        ScanProcesses {
            window: self.window,
            z_w,
            z_diff,
            m,
            argmax,
            max,
        }
    }
}

/// `Z_w`, `Z_diff` and `M` over a window, with the location and value of
/// the maximum of `M`.
#[derive(Clone, Debug, PartialEq)]
pub struct ScanProcesses {
    pub window: Window,
    pub z_w: Vec<f64>,
    pub z_diff: Vec<f64>,
    pub m: Vec<f64>,
    pub argmax: usize,
    pub max: f64,
}

impl ScanProcesses {
    pub fn at(&self, t: usize) -> (f64, f64, f64) {
        let i = t - self.window.n0;
        (self.z_w[i], self.z_diff[i], self.m[i])
    }
}

/// Standardizes `profile` with the null moments of `counts` over `window`.
pub fn scan_processes(
    profile: &EdgeCountProfile,
    counts: &PairConfigCounts,
    window: Window,
) -> Result<ScanProcesses> {
    Ok(Standardizer::new(counts, window)?.scan(profile))
}
