// SPDX-License-Identifier: MIT OR Apache-2.0

//! Single change-point tests and multiple change-point estimation by seeded
//! binary segmentation.

use std::fmt;
use std::str::FromStr;

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::analytic::{triple_config_counts, AnalyticContext};
use crate::edge_stats::{edge_count_profile, pair_config_counts, Standardizer, Window};
use crate::error::{Error, Result};
use crate::knn::{build_graph_with, DirectedKnnGraph, GraphOptions};
use crate::matrix_io::{DataMatrix, MIN_OBSERVATIONS};
use crate::permutation::{pvalue_from_maxima, replicate_maxima, PermutationPlan};
use crate::report::{InputInfo, Params, ScanReport, ScanResult, Traces};

/// Below this many observations the automatic mode uses permutations.
pub const ANALYTIC_MIN_N: usize = 500;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum PValueMode {
    Analytic,
    Permutation,
    Both,
}

impl PValueMode {
    /// Analytic from [`ANALYTIC_MIN_N`] observations on, permutation below.
    pub fn auto(n: usize) -> Self {
        if n >= ANALYTIC_MIN_N {
            PValueMode::Analytic
        } else {
            PValueMode::Permutation
        }
    }

    fn analytic(self) -> bool {
        matches!(self, PValueMode::Analytic | PValueMode::Both)
    }

    fn permutation(self) -> bool {
        matches!(self, PValueMode::Permutation | PValueMode::Both)
    }
}

impl fmt::Display for PValueMode {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            PValueMode::Analytic => "analytic",
            PValueMode::Permutation => "permutation",
            PValueMode::Both => "both",
        })
    }
}

impl FromStr for PValueMode {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "analytic" => Ok(PValueMode::Analytic),
            "permutation" | "perm" => Ok(PValueMode::Permutation),
            "both" => Ok(PValueMode::Both),
            other => Err(Error::invalid(format!("unknown p-value mode `{other}`"))),
        }
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct DetectOptions {
    pub k: usize,
    pub eps: f64,
    /// `None` selects [`Window::default_for`].
    pub window: Option<Window>,
    pub alpha: f64,
    /// `None` selects [`PValueMode::auto`].
    pub mode: Option<PValueMode>,
    pub replicates: usize,
    pub seed: u64,
    /// Keep per-t traces in the report.
    pub traces: bool,
    pub graph: GraphOptions,
}

impl Default for DetectOptions {
    fn default() -> Self {
        Self {
            k: 5,
            eps: 0.0,
            window: None,
            alpha: 0.05,
            mode: None,
            replicates: 1000,
            seed: 0,
            traces: false,
            graph: GraphOptions::default(),
        }
    }
}

impl DetectOptions {
    fn validate(&self) -> Result<()> {
        if self.k == 0 {
            return Err(Error::invalid("k must be positive"));
        }
        if !(self.eps >= 0.0 && self.eps.is_finite()) {
            return Err(Error::invalid(format!("eps = {} must be finite and >= 0", self.eps)));
        }
        if !(self.alpha > 0.0 && self.alpha <= 1.0) {
            return Err(Error::invalid(format!("alpha = {} must lie in (0, 1]", self.alpha)));
        }
        if self.replicates == 0 {
            return Err(Error::invalid("replicates must be positive"));
        }
        Ok(())
    }
}

/// Builds the graph on `data` and tests for a single change-point.
pub fn detect_single(data: &DataMatrix, opts: &DetectOptions) -> Result<ScanReport> {
    opts.validate()?;
    if data.n() < MIN_OBSERVATIONS {
        return Err(Error::TooFewObservations(data.n()));
    }
    let g = build_graph_with(data, opts.k, opts.eps, &opts.graph)?;
    detect_on_graph(&g, Some(data.d()), opts)
}

/// Tests for a single change-point on a given graph. `d` is only recorded
/// in the report.
pub fn detect_on_graph(
    g: &DirectedKnnGraph,
    d: Option<usize>,
    opts: &DetectOptions,
) -> Result<ScanReport> {
    opts.validate()?;
    let n = g.n();
    if n < MIN_OBSERVATIONS {
        return Err(Error::TooFewObservations(n));
    }
    let window = opts.window.unwrap_or_else(|| Window::default_for(n));
    let mode = opts.mode.unwrap_or_else(|| PValueMode::auto(n));
    let params = Params {
        k: g.k(),
        eps: opts.eps,
        n0: window.n0,
        n1: window.n1,
        alpha: opts.alpha,
        mode: mode.to_string(),
        replicates: mode.permutation().then_some(opts.replicates),
        seed: mode.permutation().then_some(opts.seed),
        offset: None,
    };
    let report = ScanReport::new(InputInfo { n, d }, params);
    if window.is_empty() {
        return Ok(report.untested(format!(
            "empty candidate window [{}, {}]",
            window.n0, window.n1
        )));
    }
    window.validate(n)?;

    let pairs = pair_config_counts(g)?;
    let standardizer = Standardizer::new(&pairs, window)?;
    let profile = edge_count_profile(g);
    let scan = standardizer.scan(&profile);
    let mut report = report;
    let mut result = ScanResult {
        tested: true,
        tau_hat: Some(scan.argmax),
        max_stat: Some(scan.max),
        ..ScanResult::default()
    };
    if mode.analytic() {
        let triples = triple_config_counts(g, &pairs)?;
        let ctx = AnalyticContext::from_counts(&pairs, &triples, window)?;
        let tail = ctx.tail_probability(scan.max);
        result.p_analytic = Some(tail.p_m);
        report.diagnostics.skipped_t = tail.skipped_t + tail.uncorrected_t;
    }
    if mode.permutation() {
        let plan = PermutationPlan::new(opts.replicates, opts.seed, window)?;
        let maxima = replicate_maxima(g, &standardizer, &plan);
        let (p, se) = pvalue_from_maxima(&maxima, scan.max);
        result.p_perm = Some(p);
        result.se = Some(se);
    }
    let p = result.p_perm.or(result.p_analytic).expect("some p-value was computed");
    result.reject = Some(p <= opts.alpha);
    report.result = result;
    if opts.traces {
        report.traces = Some(Traces::new(&profile, &scan));
    }
    Ok(report)
}

/// Rows `start..end` (0-based, end exclusive) of the input.
#[derive(Clone, Copy, Debug, PartialEq, Eq, PartialOrd, Ord, Serialize, Deserialize)]
pub struct SeededInterval {
    pub start: usize,
    pub end: usize,
}

impl SeededInterval {
    pub fn len(&self) -> usize {
        self.end - self.start
    }

    pub fn is_empty(&self) -> bool {
        self.end <= self.start
    }

    fn within(&self, lo: usize, hi: usize) -> bool {
        self.start >= lo && self.end <= hi
    }
}

/// Seeded intervals with decay 1/2: level `j` has length `l_j = n / 2^(j-1)`
/// and `2 ceil(n / l_j) - 1` evenly shifted copies, so neighbours overlap
/// by half. Levels continue while `l_j >= min_len`; the full range is
/// always included.
pub fn seeded_intervals(n: usize, min_len: usize) -> Vec<SeededInterval> {
    let mut out = vec![SeededInterval { start: 0, end: n }];
    let mut level = 2;
    loop {
        let len = n as f64 / 2f64.powi(level - 1);
        if len < min_len.max(1) as f64 {
            break;
        }
        let count = 2 * (n as f64 / len).ceil() as usize - 1;
        let shift = (n as f64 - len) / (count - 1) as f64;
        for i in 0..count {
            let start = (i as f64 * shift).round() as usize;
            let end = ((i as f64 * shift + len).round() as usize).min(n);
            out.push(SeededInterval { start, end });
        }
        level += 1;
    }
    out.dedup();
    out
}

#[derive(Clone, Debug, PartialEq)]
pub struct SegmentationOptions {
    /// Per-interval test settings; the window is always the default window
    /// of the interval.
    pub detect: DetectOptions,
    /// Minimum distance between change-points and from the ends of the
    /// sequence. `None` selects `max(10, ceil(0.1 n))`.
    pub min_seg: Option<usize>,
    pub max_depth: usize,
    /// Divide `alpha` by the number of seeded intervals.
    pub bonferroni: bool,
}

impl Default for SegmentationOptions {
    fn default() -> Self {
        Self {
            detect: DetectOptions::default(),
            min_seg: None,
            max_depth: 8,
            bonferroni: false,
        }
    }
}

/// One seeded interval and its test.
#[derive(Clone, Debug, PartialEq)]
pub struct IntervalTest {
    pub interval: SeededInterval,
    /// `None` when the interval could not be tested.
    pub report: Option<ScanReport>,
    pub skipped: Option<String>,
}

impl IntervalTest {
    /// Global change-point implied by the interval's estimate: the number of
    /// observations before the break.
    pub fn change_point(&self) -> Option<usize> {
        let r = self.report.as_ref()?;
        Some(self.interval.start + r.tau_hat()?)
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct SegmentationResult {
    /// Accepted change-points in increasing order; `tau` means rows
    /// `..tau` and `tau..` (0-based) lie on different sides.
    pub change_points: Vec<usize>,
    /// Report of the interval that produced each change-point, with
    /// `params.offset` set to the interval start.
    pub reports: Vec<ScanReport>,
    /// Every seeded interval and its outcome, in schedule order.
    pub schedule: Vec<IntervalTest>,
    pub alpha_per_test: f64,
    pub min_seg: usize,
}

fn splitmix64(mut z: u64) -> u64 {
    z = z.wrapping_add(0x9e37_79b9_7f4a_7c15);
    z = (z ^ (z >> 30)).wrapping_mul(0xbf58_476d_1ce4_e5b9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94d0_49bb_1331_11eb);
    z ^ (z >> 31)
}

/// Permutation seed used for the interval `[start, end)`.
pub fn interval_seed(seed: u64, interval: SeededInterval) -> u64 {
    splitmix64(seed ^ splitmix64(((interval.start as u64) << 32) ^ interval.end as u64))
}

fn test_interval(data: &DataMatrix, iv: SeededInterval, opts: &DetectOptions) -> IntervalTest {
    let skip = |reason: String| IntervalTest {
        interval: iv,
        report: None,
        skipped: Some(reason),
    };
    if iv.len() < MIN_OBSERVATIONS || iv.len() <= opts.k {
        return skip(format!("interval of {} rows is too short", iv.len()));
    }
    let sub = match data.slice_rows(iv.start, iv.end) {
        Ok(s) => s,
        Err(e) => return skip(e.to_string()),
    };
    let mut o = opts.clone();
    o.window = None;
    o.seed = interval_seed(opts.seed, iv);
    match detect_single(&sub, &o) {
        Ok(mut report) if report.result.tested => {
            report.params.offset = Some(iv.start);
            IntervalTest {
                interval: iv,
                report: Some(report),
                skipped: None,
            }
        }
        Ok(report) => skip(report.result.reason.unwrap_or_default()),
        Err(e) => skip(e.to_string()),
    }
}

/// Multiple change-points by seeded binary segmentation.
///
/// Every seeded interval is tested once on a graph built from its own rows.
/// Starting from the whole sequence, the significant interval inside the
/// current segment with the smallest p-value (larger statistic on ties)
/// whose estimate keeps `min_seg` from both segment ends supplies the next
/// change-point, and the two flanks are searched in turn, down to
/// `max_depth` levels.
pub fn detect_multiple(data: &DataMatrix, opts: &SegmentationOptions) -> Result<SegmentationResult> {
    opts.detect.validate()?;
    let n = data.n();
    if n < MIN_OBSERVATIONS {
        return Err(Error::TooFewObservations(n));
    }
    let min_seg = opts
        .min_seg
        .unwrap_or_else(|| 10.max((n as f64 * 0.1).ceil() as usize));
    if min_seg == 0 {
        return Err(Error::invalid("min_seg must be positive"));
    }
    let intervals = seeded_intervals(n, 2 * min_seg);
    let alpha = if opts.bonferroni {
        opts.detect.alpha / intervals.len() as f64
    } else {
        opts.detect.alpha
    };
    let mut detect = opts.detect.clone();
    detect.alpha = alpha;
    let schedule: Vec<IntervalTest> = intervals
        .par_iter()
        .map(|&iv| test_interval(data, iv, &detect))
        .collect();

    let mut change_points = Vec::new();
    let mut reports = Vec::new();
    let mut stack = vec![(0usize, n, 0usize)];
    while let Some((lo, hi, depth)) = stack.pop() {
        if depth >= opts.max_depth || hi - lo < 2 * min_seg {
            continue;
        }
        let mut candidates: Vec<&IntervalTest> = schedule
            .iter()
            .filter(|it| it.interval.within(lo, hi))
            .filter(|it| it.report.as_ref().is_some_and(|r| r.rejected()))
            .filter(|it| {
                let cp = it.change_point().expect("tested interval has an estimate");
                cp >= lo + min_seg && cp + min_seg <= hi
            })
            .collect();
        let stat = |r: &ScanReport| r.result.max_stat.unwrap_or(f64::NEG_INFINITY);
        candidates.sort_by(|a, b| {
            let (ra, rb) = (a.report.as_ref().unwrap(), b.report.as_ref().unwrap());
            let pa = ra.p_value().unwrap_or(1.0);
            let pb = rb.p_value().unwrap_or(1.0);
            pa.total_cmp(&pb)
                .then(stat(rb).total_cmp(&stat(ra)))
                .then(a.interval.cmp(&b.interval))
        });
        let Some(best) = candidates.first() else {
            continue;
        };
        let cp = best.change_point().unwrap();
        change_points.push(cp);
        reports.push(best.report.clone().unwrap());
        // right flank first on the stack so the left is searched first
        stack.push((cp, hi, depth + 1));
        stack.push((lo, cp, depth + 1));
    }
    let mut order: Vec<usize> = (0..change_points.len()).collect();
    order.sort_by_key(|&i| change_points[i]);
    Ok(SegmentationResult {
        change_points: order.iter().map(|&i| change_points[i]).collect(),
        reports: order.iter().map(|&i| reports[i].clone()).collect(),
        schedule,
        alpha_per_test: alpha,
        min_seg,
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn schedule_for_1000() {
        let iv = seeded_intervals(1000, 200);
        // lengths 1000, 500 (3 copies), 250 (7 copies)
        assert_eq!(iv.len(), 11);
        assert_eq!(iv[1], SeededInterval { start: 0, end: 500 });
        assert_eq!(iv[2], SeededInterval { start: 250, end: 750 });
        assert_eq!(iv[10], SeededInterval { start: 750, end: 1000 });
    }

    #[test]
    fn schedule_with_large_min_len_is_global_only() {
        assert_eq!(seeded_intervals(100, 100), vec![SeededInterval { start: 0, end: 100 }]);
    }

    #[test]
    fn mode_names_round_trip() {
        for m in [PValueMode::Analytic, PValueMode::Permutation, PValueMode::Both] {
            assert_eq!(m.to_string().parse::<PValueMode>().unwrap(), m);
        }
        assert_eq!(PValueMode::auto(499), PValueMode::Permutation);
        assert_eq!(PValueMode::auto(500), PValueMode::Analytic);
    }
}
