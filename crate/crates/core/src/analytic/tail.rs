// SPDX-License-Identifier: MIT OR Apache-2.0

//! Skewness-corrected tail approximation for `max M(t)` and the
//! critical-value solver.
//!
//! `P(max Z_w > b) ~ b phi(b) sum_t S_w(t) C_w(t) nu(sqrt(2 b^2 C_w(t)))`
//! and likewise for `|Z_diff|` with an extra factor of two for the two
//! tails. The two maxima are treated as independent, so
//! `p_M = 1 - (1 - p_w)(1 - p_diff)`.

use super::skewness::third_moments;
use super::triples::{triple_config_counts, TripleConfigCounts};
use crate::edge_stats::{pair_config_counts, PairConfigCounts, Window};
use crate::error::{Error, Result};
use crate::knn::DirectedKnnGraph;

/// Standard normal density.
pub fn phi(x: f64) -> f64 {
    (-0.5 * x * x).exp() / (2.0 * std::f64::consts::PI).sqrt()
}

/// Standard normal distribution function.
pub fn big_phi(x: f64) -> f64 {
    0.5 * libm::erfc(-x / std::f64::consts::SQRT_2)
}

/// Overshoot correction `nu(x) ~ (2/x)(Phi(x/2) - 1/2) / ((x/2) Phi(x/2) + phi(x/2))`.
pub fn nu(x: f64) -> f64 {
    if x < 1e-8 {
        return 1.0;
    }
    let h = 0.5 * x;
    (2.0 / x) * (big_phi(h) - 0.5) / (h * big_phi(h) + phi(h))
}

/// `(C_w(t), C_diff(t))`. `C_w` has a zero denominator at `t = 1` and
/// `t = n - 1`.
pub fn c_functions(n: usize, t: usize) -> Result<(f64, f64)> {
    if t == 0 || t >= n {
        return Err(Error::invalid(format!("t = {t} outside 1..{n}")));
    }
    let (nf, tf) = (n as f64, t as f64);
    let c_diff = nf / (2.0 * tf * (nf - tf));
    if t == 1 || t == n - 1 {
        return Err(Error::DegenerateDenominator(t));
    }
    let quad = (t as i128 - 1) * (t as i128 - (n as i128 - 1));
    let c_w = nf * (nf - 1.0) * (2.0 * tf * tf / nf - 2.0 * tf + 1.0)
        / (2.0 * tf * (nf - tf) * quad as f64);
    Ok((c_w, c_diff))
}

/// `S(t)` for skewness `gamma` at threshold `b`, or `None` when
/// `1 + 2 b gamma <= 0`.
pub fn skew_factor(b: f64, gamma: f64) -> Option<f64> {
    let disc = 1.0 + 2.0 * b * gamma;
    if !(disc > 0.0) {
        return None;
    }
    let root = disc.sqrt();
    // (-1 + root) / gamma, written to stay finite as gamma -> 0
    let theta = 2.0 * b / (1.0 + root);
    let expo = 0.5 * (b - theta).powi(2) + gamma * theta.powi(3) / 6.0;
    Some(expo.exp() / root)
}

#[derive(Clone, Copy, Debug, PartialEq)]
struct Point {
    c_w: Option<f64>,
    c_diff: f64,
    gamma_w: f64,
    gamma_diff: f64,
}

/// Everything the tail approximation needs for one graph and window.
#[derive(Clone, Debug)]
pub struct AnalyticContext {
    n: usize,
    window: Window,
    points: Vec<Point>,
    degenerate_endpoints: usize,
}

/// One evaluation of the approximation at threshold `b`.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct TailApproximation {
    pub b: f64,
    pub p_w: f64,
    pub p_diff: f64,
    pub p_m: f64,
    /// Window points left out of the `Z_w` sum because `C_w` is undefined.
    pub skipped_t: usize,
    /// Points where `1 + 2 b gamma <= 0` and the uncorrected term was used.
    pub uncorrected_t: usize,
}

impl AnalyticContext {
    pub fn from_graph(g: &DirectedKnnGraph, window: Window) -> Result<Self> {
        let pairs = pair_config_counts(g)?;
        let triples = triple_config_counts(g, &pairs)?;
        Self::from_counts(&pairs, &triples, window)
    }

    pub fn from_counts(
        pairs: &PairConfigCounts,
        triples: &TripleConfigCounts,
        window: Window,
    ) -> Result<Self> {
        let n = pairs.n;
        if n < crate::matrix_io::MIN_OBSERVATIONS {
            return Err(Error::TooFewObservations(n));
        }
        window.validate(n)?;
        let mut degenerate_endpoints = 0;
        let points = window
            .iter()
            .map(|t| {
                let (gamma_w, gamma_diff) = third_moments(triples, pairs, n, t)?;
                let (c_w, c_diff) = match c_functions(n, t) {
                    Ok((w, d)) => (Some(w), d),
                    Err(Error::DegenerateDenominator(_)) => {
                        degenerate_endpoints += 1;
                        let tf = t as f64;
                        (None, n as f64 / (2.0 * tf * (n as f64 - tf)))
                    }
                    Err(e) => return Err(e),
                };
                Ok(Point {
                    c_w,
                    c_diff,
                    gamma_w,
                    gamma_diff,
                })
            })
            .collect::<Result<_>>()?;
        Ok(Self {
            n,
            window,
            points,
            degenerate_endpoints,
        })
    }

    /// The same context with all skewness set to zero, which gives the
    /// uncorrected Gaussian-process approximation.
    pub fn without_skewness(mut self) -> Self {
        for p in &mut self.points {
            p.gamma_w = 0.0;
            p.gamma_diff = 0.0;
        }
        self
    }

    pub fn n(&self) -> usize {
        self.n
    }

    pub fn window(&self) -> Window {
        self.window
    }

    /// `(gamma_w(t), gamma_diff(t))` for `t` in the window.
    pub fn skewness(&self, t: usize) -> (f64, f64) {
        let p = &self.points[t - self.window.n0];
        (p.gamma_w, p.gamma_diff)
    }

    pub fn tail_probability(&self, b: f64) -> TailApproximation {
        let mut sum_w = 0.0;
        let mut sum_diff = 0.0;
        let mut uncorrected = 0;
        for p in &self.points {
            if let Some(c_w) = p.c_w {
                let s = skew_factor(b, p.gamma_w).unwrap_or_else(|| {
                    uncorrected += 1;
                    1.0
                });
                sum_w += s * c_w * nu((2.0 * b * b * c_w).sqrt());
            }
            let s = skew_factor(b, p.gamma_diff).unwrap_or_else(|| {
                uncorrected += 1;
                1.0
            });
            sum_diff += s * p.c_diff * nu((2.0 * b * b * p.c_diff).sqrt());
        }
        let lead = b * phi(b);
        let p_w = (lead * sum_w).clamp(0.0, 1.0);
        let p_diff = (2.0 * lead * sum_diff).clamp(0.0, 1.0);
        TailApproximation {
            b,
            p_w,
            p_diff,
            p_m: 1.0 - (1.0 - p_w) * (1.0 - p_diff),
            skipped_t: self.degenerate_endpoints,
            uncorrected_t: uncorrected,
        }
    }

    /// The threshold `b*` with `p_M(b*) = alpha`, by bisection on `[1, 10]`,
    /// widened once to `[0.1, 20]` when `alpha` is not bracketed.
    pub fn critical_value(&self, alpha: f64) -> Result<f64> {
        if !(alpha > 0.0 && alpha < 1.0) {
            return Err(Error::invalid(format!("alpha = {alpha} must lie in (0, 1)")));
        }
        let p = |b: f64| self.tail_probability(b).p_m;
        let brackets = |lo: f64, hi: f64| p(lo) >= alpha && p(hi) <= alpha;
        let (mut lo, mut hi) = if brackets(1.0, 10.0) {
            (1.0, 10.0)
        } else if brackets(0.1, 20.0) {
            (0.1, 20.0)
        } else {
            return Err(Error::NoRoot {
                alpha,
                lo: 0.1,
                hi: 20.0,
            });
        };
        while hi - lo > 1e-3 {
            let mid = 0.5 * (lo + hi);
            let pm = p(mid);
            if (pm - alpha).abs() <= 1e-4 {
                return Ok(mid);
            }
            if pm > alpha {
                lo = mid;
            } else {
                hi = mid;
            }
        }
        Ok(0.5 * (lo + hi))
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn normal_functions() {
        assert!((big_phi(0.0) - 0.5).abs() < 1e-16);
        assert!((big_phi(1.959963984540054) - 0.975).abs() < 1e-15);
        assert!((phi(0.0) - 0.3989422804014327).abs() < 1e-16);
    }

    #[test]
    fn nu_limits() {
        assert!((nu(1e-6) - 1.0).abs() < 1e-6);
        assert!(nu(50.0) < 0.01);
    }

    #[test]
    fn c_diff_at_half() {
        let (_, d) = c_functions(1000, 500).unwrap();
        assert!((d - 2.0 / 1000.0).abs() < 1e-15);
        assert!(matches!(c_functions(1000, 1), Err(Error::DegenerateDenominator(1))));
        assert!(matches!(c_functions(1000, 999), Err(Error::DegenerateDenominator(999))));
    }

    #[test]
    fn c_w_positive_inside() {
        for t in 2..99 {
            let (w, _) = c_functions(100, t).unwrap();
            assert!(w > 0.0, "t = {t}");
        }
    }

    #[test]
    fn zero_skewness_factor_is_one() {
        assert_eq!(skew_factor(3.0, 0.0), Some(1.0));
        assert!((skew_factor(3.0, 1e-14).unwrap() - 1.0).abs() < 1e-12);
        assert_eq!(skew_factor(3.0, -0.5), None);
    }
}
