// SPDX-License-Identifier: MIT OR Apache-2.0

//! The published simulation designs.

use std::fmt;
use std::str::FromStr;

use super::{CoordValue, Marginal, Model, Scenario};
use crate::error::{Error, Result};

/// Dimensions of the five columns of the power and type II tables.
pub const POWER_DIMS: [usize; 5] = [25, 100, 500, 1000, 2000];

/// Correlation of the AR(1) covariance `Sigma_ij = 0.6^|i-j|`.
pub const SIGMA_RHO: f64 = 0.6;

/// Published rejections out of 100 for scenarios S1..S6.
pub const POWER_PUBLISHED: [[u32; 5]; 6] = [
    [75, 76, 65, 58, 83],
    [94, 84, 63, 64, 69],
    [69, 78, 87, 90, 99],
    [74, 88, 89, 88, 89],
    [71, 81, 85, 85, 89],
    [85, 75, 73, 86, 85],
];

/// Published non-rejection fractions for type II settings 1..6.
pub const TYPE2_PUBLISHED: [[f64; 5]; 6] = [
    [0.16, 0.32, 0.13, 0.11, 0.13],
    [0.19, 0.17, 0.11, 0.18, 0.23],
    [0.12, 0.15, 0.34, 0.28, 0.33],
    [0.32, 0.29, 0.25, 0.11, 0.12],
    [0.23, 0.19, 0.05, 0.03, 0.19],
    [0.25, 0.14, 0.04, 0.05, 0.16],
];

const S1_DELTA: [f64; 5] = [0.10, 0.20, 0.45, 0.63, 0.89];
const S1_B: [f64; 5] = [1.10, 1.06, 1.03, 1.02, 1.02];
const S2_DELTA: [f64; 5] = [0.20, 0.40, 0.67, 0.63, 0.89];
const S2_B: [f64; 5] = [1.8, 2.4, 3.2, 4.8, 6.2];
const S3_B: [f64; 5] = [1.10, 1.06, 1.03, 1.02, 1.02];
const S4_RHO: [f64; 5] = [0.53, 0.50, 0.48, 0.47, 0.46];
const S5_DELTA: [f64; 5] = [0.05, 0.10, 0.22, 0.32, 0.45];
const S5_B: [f64; 5] = [1.10, 1.08, 1.05, 1.04, 1.03];
const S6_DELTA: [f64; 5] = [0.20, 0.40, 0.67, 0.63, 0.89];
const S6_B: [f64; 5] = [1.14, 1.08, 1.05, 1.04, 1.03];

const CHISQ_NU1: [f64; 5] = [3.27, 3.20, 3.15, 3.12, 3.09];
const WEIBULL_LAMBDA1: [f64; 5] = [1.8, 2.4, 3.2, 4.8, 6.2];
const GAMMA_SHAPE1: [f64; 5] = [1.09, 1.08, 1.05, 1.04, 1.03];
const GAMMA_SCALE1: [f64; 5] = [1.050, 1.040, 1.030, 1.025, 1.020];
const BETA_SHAPE1: [f64; 5] = [0.590, 0.550, 0.530, 0.520, 0.512];

fn column(col: usize) -> Result<usize> {
    POWER_DIMS
        .get(col)
        .copied()
        .ok_or_else(|| Error::invalid(format!("table column {col} out of range 0..5")))
}

/// An i.i.d. standard Gaussian sequence without change.
pub fn size_scenario(n: usize, d: usize, seed: u64) -> Scenario {
    Scenario {
        name: "null".into(),
        n,
        d,
        tau: None,
        f0: Model::standard_normal(),
        f1: Model::standard_normal(),
        seed,
    }
}

/// Power scenario `s` (1..=6) at table column `col` (0..5, `d` from
/// [`POWER_DIMS`]). S1-S4 are Gaussian; S5 and S6 use centered `chi^2_3`
/// and `t_5` innovations.
pub fn power_scenario(s: usize, col: usize, n: usize, tau: usize, seed: u64) -> Result<Scenario> {
    let d = column(col)?;
    let sigma = Model::standard_normal().with_rho(SIGMA_RHO);
    let ident = Model::standard_normal();
    let shift = |delta: f64, m: usize| CoordValue::first(m, delta / (m as f64).sqrt(), 0.0);
    let (f0, f1) = match s {
        1 => (
            sigma,
            sigma
                .with_mean(shift(S1_DELTA[col], d))
                .with_sd(CoordValue::constant(S1_B[col].sqrt())),
        ),
        2 => (
            ident,
            ident
                .with_mean(shift(S2_DELTA[col], 5))
                .with_sd(CoordValue::first(5, S2_B[col].sqrt(), 1.0)),
        ),
        3 => (ident, ident.with_sd(CoordValue::constant(S3_B[col].sqrt()))),
        4 => (sigma, ident.with_rho(S4_RHO[col])),
        5 | 6 => {
            let (innovation, delta, b) = if s == 5 {
                (Marginal::CenteredChiSquared { df: 3.0 }, S5_DELTA[col], S5_B[col])
            } else {
                (Marginal::StudentT { df: 5.0 }, S6_DELTA[col], S6_B[col])
            };
            let base = Model::iid(innovation).with_rho(SIGMA_RHO);
            (
                base,
                base.with_mean(shift(delta, d))
                    .with_sd(CoordValue::constant(b.sqrt())),
            )
        }
        _ => return Err(Error::UnknownFamily(format!("S{s}"))),
    };
    Ok(Scenario {
        name: format!("S{s}"),
        n,
        d,
        tau: Some(tau),
        f0,
        f1,
        seed,
    })
}

/// Type II setting `s` (1..=6) at table column `col`, with i.i.d.
/// coordinates.
pub fn type2_scenario(s: usize, col: usize, n: usize, tau: usize, seed: u64) -> Result<Scenario> {
    let d = column(col)?;
    let (f0, f1) = match s {
        1 => (
            Marginal::ChiSquared { df: 3.0 },
            Marginal::ChiSquared { df: CHISQ_NU1[col] },
        ),
        2 => (
            Marginal::Weibull { scale: 1.0, shape: 1.0 },
            Marginal::Weibull {
                scale: WEIBULL_LAMBDA1[col],
                shape: 1.0,
            },
        ),
        3 => (
            Marginal::Gamma { shape: 1.0, scale: 1.0 },
            Marginal::Gamma {
                shape: GAMMA_SHAPE1[col],
                scale: 1.0,
            },
        ),
        4 => (
            Marginal::Gamma { shape: 1.0, scale: 1.0 },
            Marginal::Gamma {
                shape: 1.0,
                scale: GAMMA_SCALE1[col],
            },
        ),
        5 => (
            Marginal::Beta { a: 0.5, b: 0.5 },
            Marginal::Beta {
                a: BETA_SHAPE1[col],
                b: 0.5,
            },
        ),
        6 => (
            Marginal::Beta { a: 0.5, b: 0.5 },
            Marginal::Beta {
                a: 0.5,
                b: BETA_SHAPE1[col],
            },
        ),
        _ => return Err(Error::UnknownFamily(format!("setting {s}"))),
    };
    Ok(Scenario {
        name: format!("T{s}"),
        n,
        d,
        tau: Some(tau),
        f0: Model::iid(f0),
        f1: Model::iid(f1),
        seed,
    })
}

/// The five change types of the sensitivity study.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum ChangeKind {
    Mean,
    Variance,
    Covariance,
    Skewness,
    Kurtosis,
}

impl ChangeKind {
    pub const ALL: [ChangeKind; 5] = [
        ChangeKind::Mean,
        ChangeKind::Variance,
        ChangeKind::Covariance,
        ChangeKind::Skewness,
        ChangeKind::Kurtosis,
    ];

    /// Change sizes swept by default: `||Delta||_2`, the per-coordinate
    /// variance root `a`, `Delta rho`, skewness and excess kurtosis.
    pub fn default_sizes(self) -> Vec<f64> {
        let steps = |start: f64, step: f64| (0..10).map(|i| start + step * i as f64).collect();
        match self {
            ChangeKind::Mean => steps(0.1, 0.1),
            ChangeKind::Variance => steps(1.002, 0.002),
            ChangeKind::Covariance => steps(0.02, 0.02),
            ChangeKind::Skewness => steps(0.2, 0.2),
            ChangeKind::Kurtosis => steps(0.01, 0.01),
        }
    }

    /// Whether the number of changed coordinates matters.
    pub fn uses_dc(self) -> bool {
        matches!(self, ChangeKind::Mean | ChangeKind::Variance)
    }
}

impl fmt::Display for ChangeKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            ChangeKind::Mean => "mean",
            ChangeKind::Variance => "variance",
            ChangeKind::Covariance => "covariance",
            ChangeKind::Skewness => "skewness",
            ChangeKind::Kurtosis => "kurtosis",
        })
    }
}

impl FromStr for ChangeKind {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        ChangeKind::ALL
            .into_iter()
            .find(|k| k.to_string() == s.trim())
            .ok_or_else(|| Error::UnknownFamily(s.trim().to_string()))
    }
}

/// A sensitivity design of the given kind and size. `dc` is the number of
/// changed coordinates for mean and variance changes.
///
/// * mean: `||Delta||_2 = size` spread evenly over `dc` coordinates;
/// * variance: each of `dc` coordinates gets variance `size^(d/dc)`, so the
///   covariance determinant becomes `size^d`;
/// * covariance: AR(1) correlation drops from 0.6 to `0.6 - size`;
/// * skewness: `N(nu, 2 nu)` becomes `chi^2_nu` with `sqrt(8/nu) = size`;
/// * kurtosis: `N(0, 1)` becomes `t_nu` with `6/(nu - 4) = size`.
pub fn sensitivity_scenario(
    kind: ChangeKind,
    size: f64,
    dc: usize,
    n: usize,
    tau: usize,
    d: usize,
    seed: u64,
) -> Result<Scenario> {
    let dc = dc.clamp(1, d);
    let ident = Model::standard_normal();
    let (f0, f1) = match kind {
        ChangeKind::Mean => (
            ident,
            ident.with_mean(CoordValue::first(dc, size / (dc as f64).sqrt(), 0.0)),
        ),
        ChangeKind::Variance => {
            if !(size > 0.0) {
                return Err(Error::invalid("variance change must be positive"));
            }
            let var = size.powf(d as f64 / dc as f64);
            (ident, ident.with_sd(CoordValue::first(dc, var.sqrt(), 1.0)))
        }
        ChangeKind::Covariance => (
            ident.with_rho(SIGMA_RHO),
            ident.with_rho(SIGMA_RHO - size),
        ),
        ChangeKind::Skewness => {
            if !(size > 0.0) {
                return Err(Error::invalid("skewness must be positive"));
            }
            let nu = 8.0 / (size * size);
            (
                ident
                    .with_mean(CoordValue::constant(nu))
                    .with_sd(CoordValue::constant((2.0 * nu).sqrt())),
                Model::iid(Marginal::ChiSquared { df: nu }),
            )
        }
        ChangeKind::Kurtosis => {
            if !(size > 0.0) {
                return Err(Error::invalid("excess kurtosis must be positive"));
            }
            (ident, Model::iid(Marginal::StudentT { df: 4.0 + 6.0 / size }))
        }
    };
    Ok(Scenario {
        name: format!("{kind}"),
        n,
        d,
        tau: Some(tau),
        f0,
        f1,
        seed,
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn s1_first_column_design() {
        let s = power_scenario(1, 0, 1000, 250, 0).unwrap();
        assert_eq!(s.d, 25);
        let a = s.f1.mean.at(0);
        assert!(((a * a * 25.0).sqrt() - 0.10).abs() < 1e-12);
        assert!((s.f1.sd.at(7).powi(2) - 1.10).abs() < 1e-12);
    }

    #[test]
    fn chi_square_setting_one() {
        let s = type2_scenario(1, 0, 1000, 250, 0).unwrap();
        assert_eq!(s.f1.innovation, Marginal::ChiSquared { df: 3.27 });
    }

    #[test]
    fn s3_with_unit_b_is_null() {
        let mut s = power_scenario(3, 0, 100, 25, 0).unwrap();
        s.f1.sd = CoordValue::constant(1.0);
        assert_eq!(s.f0, s.f1);
    }

    #[test]
    fn unknown_names() {
        assert!(matches!(power_scenario(7, 0, 10, 5, 0), Err(Error::UnknownFamily(_))));
        assert!(matches!("shape".parse::<ChangeKind>(), Err(Error::UnknownFamily(_))));
    }
}
