// SPDX-License-Identifier: MIT OR Apache-2.0

//! Replicated simulation studies and their CSV tables.

use std::io::Write;

use rayon::prelude::*;
use serde::Serialize;

use super::config::{StudyConfig, StudyKind};
use super::scenarios::{
    power_scenario, sensitivity_scenario, size_scenario, type2_scenario, POWER_DIMS,
    POWER_PUBLISHED, TYPE2_PUBLISHED,
};
use super::{generate, Scenario};
use crate::detector::{detect_single, interval_seed, DetectOptions, SeededInterval};
use crate::edge_stats::Window;
use crate::error::{Error, Result};

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct SizeRow {
    pub alpha: f64,
    pub replicates: usize,
    pub rejections: usize,
    pub fraction: f64,
    /// Binomial standard error at the nominal level.
    pub se: f64,
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct PowerRow {
    pub scenario: String,
    pub d: usize,
    pub design: String,
    pub replicates: usize,
    pub rejections: usize,
    pub power: f64,
    pub type2_error: f64,
    /// Published value on the same scale as the table it comes from:
    /// rejections out of 100 for power, a fraction for type II error.
    pub published: Option<f64>,
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct SensitivityRow {
    pub kind: String,
    pub dc: usize,
    pub size: f64,
    pub replicates: usize,
    pub detections: usize,
    pub fraction: f64,
}

#[derive(Clone, Debug, PartialEq)]
pub enum StudyOutput {
    Size(Vec<SizeRow>),
    Power(Vec<PowerRow>),
    Type2(Vec<PowerRow>),
    Sensitivity(Vec<SensitivityRow>),
}

impl StudyOutput {
    pub fn write_csv<W: Write>(&self, w: W) -> Result<()> {
        match self {
            StudyOutput::Size(r) => write_rows_csv(r, w),
            StudyOutput::Power(r) | StudyOutput::Type2(r) => write_rows_csv(r, w),
            StudyOutput::Sensitivity(r) => write_rows_csv(r, w),
        }
    }
}

pub fn write_rows_csv<T: Serialize, W: Write>(rows: &[T], w: W) -> Result<()> {
    let mut out = csv::Writer::from_writer(w);
    for r in rows {
        out.serialize(r).map_err(|e| Error::invalid(format!("csv: {e}")))?;
    }
    out.flush()?;
    Ok(())
}

fn detect_options(cfg: &StudyConfig, n: usize, alpha: f64) -> DetectOptions {
    DetectOptions {
        k: cfg.k,
        eps: cfg.eps,
        window: cfg.n0.map(|n0| Window::symmetric(n, n0)),
        alpha,
        mode: cfg.mode,
        replicates: cfg.permutations,
        seed: cfg.seed,
        traces: false,
        graph: Default::default(),
    }
}

/// The decision p-value of each replicate of `scenario`.
pub(crate) fn replicate_pvalues(
    scenario: &Scenario,
    replicates: usize,
    opts: &DetectOptions,
) -> Result<Vec<f64>> {
    (0..replicates)
        .into_par_iter()
        .map(|r| {
            let data = generate(scenario, r)?;
            let mut o = opts.clone();
            o.seed = interval_seed(opts.seed ^ scenario.seed, SeededInterval { start: r, end: r + 1 });
            let report = detect_single(&data, &o)?;
            Ok(report.p_value().unwrap_or(1.0))
        })
        .collect()
}

pub fn run_size_study(cfg: &StudyConfig) -> Result<Vec<SizeRow>> {
    let mut scenario = size_scenario(cfg.n, cfg.d, cfg.seed);
    scenario.f0 = scenario.f0.with_rho(cfg.rho);
    scenario.f0.innovation = cfg.family;
    scenario.f1 = scenario.f0;
    let opts = detect_options(cfg, cfg.n, cfg.alpha);
    let p = replicate_pvalues(&scenario, cfg.replicates, &opts)?;
    let b = cfg.replicates as f64;
    Ok(cfg
        .alphas
        .iter()
        .map(|&alpha| {
            let rejections = p.iter().filter(|&&v| v <= alpha).count();
            SizeRow {
                alpha,
                replicates: cfg.replicates,
                rejections,
                fraction: rejections as f64 / b,
                se: (alpha * (1.0 - alpha) / b).sqrt(),
            }
        })
        .collect())
}

fn table_cases(cfg: &StudyConfig) -> Result<Vec<(usize, usize)>> {
    cfg.cases
        .iter()
        .map(|&(s, d)| {
            let col = POWER_DIMS
                .iter()
                .position(|&x| x == d)
                .ok_or_else(|| Error::invalid(format!("d = {d} is not a table column")))?;
            Ok((s, col))
        })
        .collect()
}

fn run_table(cfg: &StudyConfig, type2: bool) -> Result<Vec<PowerRow>> {
    let mut rows = Vec::new();
    for (s, col) in table_cases(cfg)? {
        let scenario = if type2 {
            type2_scenario(s, col, cfg.n, cfg.tau, cfg.seed)?
        } else {
            power_scenario(s, col, cfg.n, cfg.tau, cfg.seed)?
        };
        let opts = detect_options(cfg, cfg.n, cfg.alpha);
        let p = replicate_pvalues(&scenario, cfg.replicates, &opts)?;
        let rejections = p.iter().filter(|&&v| v <= cfg.alpha).count();
        let power = rejections as f64 / cfg.replicates as f64;
        let published = if type2 {
            TYPE2_PUBLISHED.get(s - 1).map(|r| r[col])
        } else {
            POWER_PUBLISHED.get(s - 1).map(|r| f64::from(r[col]))
        };
        rows.push(PowerRow {
            scenario: scenario.name.clone(),
            d: scenario.d,
            design: scenario.f1.to_string(),
            replicates: cfg.replicates,
            rejections,
            power,
            type2_error: 1.0 - power,
            published,
        });
    }
    Ok(rows)
}

/// Rejections at level `alpha` for each `(scenario, d)` case.
pub fn run_power_study(cfg: &StudyConfig) -> Result<Vec<PowerRow>> {
    run_table(cfg, false)
}

/// Non-rejections at level `alpha` for each `(setting, d)` case.
pub fn run_type2_study(cfg: &StudyConfig) -> Result<Vec<PowerRow>> {
    run_table(cfg, true)
}

/// Detection fractions against change size for each change kind; mean and
/// variance changes are swept for every `dc`.
pub fn run_sensitivity_study(cfg: &StudyConfig) -> Result<Vec<SensitivityRow>> {
    let mut rows = Vec::new();
    for &kind in &cfg.kinds {
        let sizes = cfg.sizes.clone().unwrap_or_else(|| kind.default_sizes());
        let dcs = if kind.uses_dc() { cfg.dc.clone() } else { vec![cfg.d] };
        for &dc in &dcs {
            for &size in &sizes {
                let scenario =
                    sensitivity_scenario(kind, size, dc, cfg.n, cfg.tau, cfg.d, cfg.seed)?;
                let opts = detect_options(cfg, cfg.n, cfg.alpha);
                let p = replicate_pvalues(&scenario, cfg.replicates, &opts)?;
                let detections = p.iter().filter(|&&v| v <= cfg.alpha).count();
                rows.push(SensitivityRow {
                    kind: kind.to_string(),
                    dc: dc.min(cfg.d),
                    size,
                    replicates: cfg.replicates,
                    detections,
                    fraction: detections as f64 / cfg.replicates as f64,
                });
            }
        }
    }
    Ok(rows)
}

pub fn run_study(cfg: &StudyConfig) -> Result<StudyOutput> {
    cfg.validate()?;
    Ok(match cfg.study {
        StudyKind::Size => StudyOutput::Size(run_size_study(cfg)?),
        StudyKind::Power => StudyOutput::Power(run_power_study(cfg)?),
        StudyKind::Type2 => StudyOutput::Type2(run_type2_study(cfg)?),
        StudyKind::Sensitivity => StudyOutput::Sensitivity(run_sensitivity_study(cfg)?),
    })
}
