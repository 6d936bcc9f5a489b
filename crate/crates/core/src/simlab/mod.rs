// SPDX-License-Identifier: MIT OR Apache-2.0

//! Synthetic sequences with a single distributional change, and the size,
//! power, type II and sensitivity studies run on them.
//!
//! Every distribution here has the form `x_j = mean_j + sd_j z_j`, where
//! `z = L u` for i.i.d. innovations `u` and `L` the lower Cholesky factor
//! of the AR(1) correlation `rho^|i-j|`. The factor is applied through the
//! recursion `z_1 = u_1`, `z_j = rho z_{j-1} + sqrt(1 - rho^2) u_j`, which
//! costs `O(d)` per row.

mod config;
mod scenarios;
mod studies;

pub use config::{preset, preset_names, StudyConfig, StudyKind};
pub use scenarios::{
    power_scenario, sensitivity_scenario, size_scenario, type2_scenario, ChangeKind,
    POWER_DIMS, POWER_PUBLISHED, TYPE2_PUBLISHED,
};
pub use studies::{
    run_power_study, run_sensitivity_study, run_size_study, run_study, run_type2_study,
    write_rows_csv, PowerRow, SensitivityRow, SizeRow, StudyOutput,
};

use std::fmt;
use std::str::FromStr;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::{Beta, ChiSquared, Distribution, Gamma, LogNormal, StandardNormal, StudentT, Weibull};

use crate::error::{Error, Result};
use crate::matrix_io::DataMatrix;

/// Distribution of the i.i.d. innovations.
#[derive(Clone, Copy, Debug, PartialEq)]
pub enum Marginal {
    Normal,
    ChiSquared { df: f64 },
    /// `chi^2_df - df`.
    CenteredChiSquared { df: f64 },
    StudentT { df: f64 },
    /// Scale `lambda`, shape `k`.
    Weibull { scale: f64, shape: f64 },
    Gamma { shape: f64, scale: f64 },
    Beta { a: f64, b: f64 },
    LogNormal { mu: f64, sigma: f64 },
}

enum Sampler {
    Normal,
    ChiSquared(ChiSquared<f64>, f64),
    StudentT(StudentT<f64>),
    Weibull(Weibull<f64>),
    Gamma(Gamma<f64>),
    Beta(Beta<f64>),
    LogNormal(LogNormal<f64>),
}

impl Sampler {
    #[inline]
    fn sample<R: Rng>(&self, rng: &mut R) -> f64 {
        match self {
            Sampler::Normal => rng.sample(StandardNormal),
            Sampler::ChiSquared(d, shift) => d.sample(rng) - shift,
            Sampler::StudentT(d) => d.sample(rng),
            Sampler::Weibull(d) => d.sample(rng),
            Sampler::Gamma(d) => d.sample(rng),
            Sampler::Beta(d) => d.sample(rng),
            Sampler::LogNormal(d) => d.sample(rng),
        }
    }
}

fn bad(what: &str, e: impl fmt::Display) -> Error {
    Error::invalid(format!("{what}: {e}"))
}

impl Marginal {
    fn sampler(&self) -> Result<Sampler> {
        let positive = |name: &str, v: f64| {
            if v > 0.0 && v.is_finite() {
                Ok(())
            } else {
                Err(Error::invalid(format!("{name} must be positive, got {v}")))
            }
        };
        Ok(match *self {
            Marginal::Normal => Sampler::Normal,
            Marginal::ChiSquared { df } => {
                positive("chi-square degrees of freedom", df)?;
                Sampler::ChiSquared(ChiSquared::new(df).map_err(|e| bad("chisq", e))?, 0.0)
            }
            Marginal::CenteredChiSquared { df } => {
                positive("chi-square degrees of freedom", df)?;
                Sampler::ChiSquared(ChiSquared::new(df).map_err(|e| bad("chisq", e))?, df)
            }
            Marginal::StudentT { df } => {
                positive("t degrees of freedom", df)?;
                Sampler::StudentT(StudentT::new(df).map_err(|e| bad("t", e))?)
            }
            Marginal::Weibull { scale, shape } => {
                positive("Weibull scale", scale)?;
                positive("Weibull shape", shape)?;
                Sampler::Weibull(Weibull::new(scale, shape).map_err(|e| bad("weibull", e))?)
            }
            Marginal::Gamma { shape, scale } => {
                positive("Gamma shape", shape)?;
                positive("Gamma scale", scale)?;
                Sampler::Gamma(Gamma::new(shape, scale).map_err(|e| bad("gamma", e))?)
            }
            Marginal::Beta { a, b } => {
                positive("Beta shape", a)?;
                positive("Beta shape", b)?;
                Sampler::Beta(Beta::new(a, b).map_err(|e| bad("beta", e))?)
            }
            Marginal::LogNormal { mu, sigma } => {
                positive("log-normal sigma", sigma)?;
                Sampler::LogNormal(LogNormal::new(mu, sigma).map_err(|e| bad("lognormal", e))?)
            }
        })
    }

    /// Mean and variance of one draw.
    pub fn moments(&self) -> (f64, f64) {
        match *self {
            Marginal::Normal => (0.0, 1.0),
            Marginal::ChiSquared { df } => (df, 2.0 * df),
            Marginal::CenteredChiSquared { df } => (0.0, 2.0 * df),
            Marginal::StudentT { df } => (0.0, if df > 2.0 { df / (df - 2.0) } else { f64::INFINITY }),
            Marginal::Weibull { scale, shape } => {
                let g1 = libm::tgamma(1.0 + 1.0 / shape);
                let g2 = libm::tgamma(1.0 + 2.0 / shape);
                (scale * g1, scale * scale * (g2 - g1 * g1))
            }
            Marginal::Gamma { shape, scale } => (shape * scale, shape * scale * scale),
            Marginal::Beta { a, b } => {
                let s = a + b;
                (a / s, a * b / (s * s * (s + 1.0)))
            }
            Marginal::LogNormal { mu, sigma } => {
                let s2 = sigma * sigma;
                ((mu + s2 / 2.0).exp(), (s2.exp() - 1.0) * (2.0 * mu + s2).exp())
            }
        }
    }
}

impl fmt::Display for Marginal {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match *self {
            Marginal::Normal => write!(f, "normal"),
            Marginal::ChiSquared { df } => write!(f, "chisq({df})"),
            Marginal::CenteredChiSquared { df } => write!(f, "cchisq({df})"),
            Marginal::StudentT { df } => write!(f, "t({df})"),
            Marginal::Weibull { scale, shape } => write!(f, "weibull({scale},{shape})"),
            Marginal::Gamma { shape, scale } => write!(f, "gamma({shape},{scale})"),
            Marginal::Beta { a, b } => write!(f, "beta({a},{b})"),
            Marginal::LogNormal { mu, sigma } => write!(f, "lognormal({mu},{sigma})"),
        }
    }
}

impl FromStr for Marginal {
    type Err = Error;

    /// `normal`, `chisq(df)`, `cchisq(df)`, `t(df)`, `weibull(scale,shape)`,
    /// `gamma(shape,scale)`, `beta(a,b)`, `lognormal(mu,sigma)`.
    fn from_str(s: &str) -> Result<Self> {
        let s = s.trim();
        let (name, args) = match s.find('(') {
            Some(p) if s.ends_with(')') => (&s[..p], &s[p + 1..s.len() - 1]),
            _ => (s, ""),
        };
        let args: Vec<f64> = if args.trim().is_empty() {
            Vec::new()
        } else {
            args.split(',')
                .map(|a| {
                    a.trim()
                        .parse::<f64>()
                        .map_err(|_| Error::invalid(format!("bad number `{a}` in `{s}`")))
                })
                .collect::<Result<_>>()?
        };
        let want = |n: usize| {
            if args.len() == n {
                Ok(())
            } else {
                Err(Error::invalid(format!("`{name}` takes {n} parameter(s)")))
            }
        };
        let m = match name.trim().to_ascii_lowercase().as_str() {
            "normal" | "gaussian" => {
                want(0)?;
                Marginal::Normal
            }
            "chisq" => {
                want(1)?;
                Marginal::ChiSquared { df: args[0] }
            }
            "cchisq" => {
                want(1)?;
                Marginal::CenteredChiSquared { df: args[0] }
            }
            "t" => {
                want(1)?;
                Marginal::StudentT { df: args[0] }
            }
            "weibull" => {
                want(2)?;
                Marginal::Weibull {
                    scale: args[0],
                    shape: args[1],
                }
            }
            "gamma" => {
                want(2)?;
                Marginal::Gamma {
                    shape: args[0],
                    scale: args[1],
                }
            }
            "beta" => {
                want(2)?;
                Marginal::Beta {
                    a: args[0],
                    b: args[1],
                }
            }
            "lognormal" => {
                want(2)?;
                Marginal::LogNormal {
                    mu: args[0],
                    sigma: args[1],
                }
            }
            other => return Err(Error::UnknownFamily(other.to_string())),
        };
        m.sampler()?;
        Ok(m)
    }
}

/// A per-coordinate value: `head` on the first `head_len` coordinates and
/// `tail` on the rest.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct CoordValue {
    pub head: f64,
    pub head_len: usize,
    pub tail: f64,
}

impl CoordValue {
    pub fn constant(v: f64) -> Self {
        Self {
            head: v,
            head_len: 0,
            tail: v,
        }
    }

    pub fn first(m: usize, head: f64, tail: f64) -> Self {
        Self {
            head,
            head_len: m,
            tail,
        }
    }

    #[inline]
    pub fn at(&self, j: usize) -> f64 {
        if j < self.head_len {
            self.head
        } else {
            self.tail
        }
    }
}

/// `x_j = mean_j + sd_j z_j` with `z` an AR(1)-correlated transform of
/// i.i.d. innovations.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct Model {
    pub innovation: Marginal,
    /// AR(1) correlation; 0 gives independent coordinates.
    pub rho: f64,
    pub mean: CoordValue,
    pub sd: CoordValue,
}

impl Model {
    pub fn iid(innovation: Marginal) -> Self {
        Self {
            innovation,
            rho: 0.0,
            mean: CoordValue::constant(0.0),
            sd: CoordValue::constant(1.0),
        }
    }

    pub fn standard_normal() -> Self {
        Self::iid(Marginal::Normal)
    }

    pub fn with_rho(mut self, rho: f64) -> Self {
        self.rho = rho;
        self
    }

    pub fn with_mean(mut self, mean: CoordValue) -> Self {
        self.mean = mean;
        self
    }

    pub fn with_sd(mut self, sd: CoordValue) -> Self {
        self.sd = sd;
        self
    }

    fn validate(&self) -> Result<()> {
        if !(self.rho > -1.0 && self.rho < 1.0) {
            return Err(Error::invalid(format!("rho = {} must lie in (-1, 1)", self.rho)));
        }
        for v in [self.sd.head, self.sd.tail] {
            if !(v > 0.0 && v.is_finite()) {
                return Err(Error::invalid(format!("standard deviation {v} must be positive")));
            }
        }
        Ok(())
    }
}

impl fmt::Display for Model {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}", self.innovation)?;
        if self.rho != 0.0 {
            write!(f, " rho={}", self.rho)?;
        }
        for (name, v, default) in [("mean", self.mean, 0.0), ("sd", self.sd, 1.0)] {
            if v.head_len > 0 && v.head != v.tail {
                write!(f, " {name}={:.4}x{}", v.head, v.head_len)?;
                if v.tail != default {
                    write!(f, "+{:.4}", v.tail)?;
                }
            } else if v.tail != default {
                write!(f, " {name}={:.4}", v.tail)?;
            }
        }
        Ok(())
    }
}

/// A sequence design: rows `1..=tau` from `f0`, the rest from `f1`.
#[derive(Clone, Debug, PartialEq)]
pub struct Scenario {
    pub name: String,
    pub n: usize,
    pub d: usize,
    /// `None` for a sequence without change.
    pub tau: Option<usize>,
    pub f0: Model,
    pub f1: Model,
    pub seed: u64,
}

impl Scenario {
    pub fn validate(&self) -> Result<()> {
        if self.d == 0 || self.n == 0 {
            return Err(Error::invalid("n and d must be positive"));
        }
        if let Some(tau) = self.tau {
            if tau == 0 || tau >= self.n {
                return Err(Error::invalid(format!("tau = {tau} must lie in 1..{}", self.n)));
            }
        }
        self.f0.validate()?;
        self.f1.validate()
    }
}

fn fill_row<R: Rng>(row: &mut [f64], model: &Model, sampler: &Sampler, rng: &mut R) {
    let rho = model.rho;
    let scale = (1.0 - rho * rho).sqrt();
    let mut z = 0.0;
    for (j, x) in row.iter_mut().enumerate() {
        let u = sampler.sample(rng);
        z = if j == 0 { u } else { rho * z + scale * u };
        *x = model.mean.at(j) + model.sd.at(j) * z;
    }
}

/// Replicate `r` of the scenario. Replicates use disjoint streams of a
/// generator seeded with `scenario.seed`.
pub fn generate(scenario: &Scenario, replicate: usize) -> Result<DataMatrix> {
    scenario.validate()?;
    let (n, d) = (scenario.n, scenario.d);
    let s0 = scenario.f0.innovation.sampler()?;
    let s1 = scenario.f1.innovation.sampler()?;
    let mut rng = ChaCha8Rng::seed_from_u64(scenario.seed);
    rng.set_stream(replicate as u64);
    let tau = scenario.tau.unwrap_or(n);
    let mut values = vec![0.0; n * d];
    for (i, row) in values.chunks_exact_mut(d).enumerate() {
        if i < tau {
            fill_row(row, &scenario.f0, &s0, &mut rng);
        } else {
            fill_row(row, &scenario.f1, &s1, &mut rng);
        }
    }
    DataMatrix::new(n, d, values)
}
