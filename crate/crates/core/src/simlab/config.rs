// SPDX-License-Identifier: MIT OR Apache-2.0

//! Plain-text study configurations.
//!
//! One `key = value` per line; `#` starts a comment. Lists are
//! comma-separated. Power and type II cases are `scenario:d` pairs, for
//! example `cases = 1:25, 3:2000, 4:100`.

use std::fmt;
use std::str::FromStr;

use super::scenarios::{ChangeKind, POWER_DIMS};
use super::Marginal;
use crate::detector::PValueMode;
use crate::error::{Error, Result};

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum StudyKind {
    Size,
    Power,
    Type2,
    Sensitivity,
}

impl fmt::Display for StudyKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            StudyKind::Size => "size",
            StudyKind::Power => "power",
            StudyKind::Type2 => "type2",
            StudyKind::Sensitivity => "sensitivity",
        })
    }
}

impl FromStr for StudyKind {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "size" => Ok(StudyKind::Size),
            "power" => Ok(StudyKind::Power),
            "type2" => Ok(StudyKind::Type2),
            "sensitivity" => Ok(StudyKind::Sensitivity),
            other => Err(Error::UnknownFamily(other.to_string())),
        }
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct StudyConfig {
    pub study: StudyKind,
    pub n: usize,
    pub tau: usize,
    /// Dimension for size and sensitivity studies.
    pub d: usize,
    pub replicates: usize,
    pub seed: u64,
    pub k: usize,
    pub eps: f64,
    pub n0: Option<usize>,
    pub alpha: f64,
    /// Levels reported by the size study.
    pub alphas: Vec<f64>,
    pub mode: Option<PValueMode>,
    pub permutations: usize,
    /// Innovation family of the size study.
    pub family: Marginal,
    /// AR(1) correlation of the size study.
    pub rho: f64,
    /// `(scenario number, d)` pairs for power and type II studies.
    pub cases: Vec<(usize, usize)>,
    pub kinds: Vec<ChangeKind>,
    pub dc: Vec<usize>,
    pub sizes: Option<Vec<f64>>,
}

fn all_cases() -> Vec<(usize, usize)> {
    (1..=6).flat_map(|s| POWER_DIMS.map(|d| (s, d))).collect()
}

impl StudyConfig {
    pub fn new(study: StudyKind) -> Self {
        Self {
            study,
            n: 1000,
            tau: 250,
            d: 25,
            replicates: 100,
            seed: 1,
            k: 5,
            eps: 0.0,
            n0: None,
            alpha: 0.05,
            alphas: vec![0.10, 0.05, 0.01],
            mode: Some(PValueMode::Analytic),
            permutations: 1000,
            family: Marginal::Normal,
            rho: 0.0,
            cases: all_cases(),
            kinds: ChangeKind::ALL.to_vec(),
            dc: vec![1000, 200, 50, 10, 1],
            sizes: None,
        }
    }

    pub fn validate(&self) -> Result<()> {
        if self.replicates == 0 || self.n < 5 || self.d == 0 || self.k == 0 {
            return Err(Error::invalid("n >= 5 and positive d, k, replicates are required"));
        }
        if self.tau == 0 || self.tau >= self.n {
            return Err(Error::invalid(format!("tau = {} must lie in 1..{}", self.tau, self.n)));
        }
        if !(self.alpha > 0.0 && self.alpha <= 1.0) {
            return Err(Error::invalid("alpha must lie in (0, 1]"));
        }
        Ok(())
    }

    /// Parses a configuration; keys not given keep the defaults of the
    /// study named by `study`.
    pub fn parse(text: &str) -> Result<Self> {
        let mut pairs = Vec::new();
        for (i, raw) in text.lines().enumerate() {
            let line = raw.split('#').next().unwrap_or("").trim();
            if line.is_empty() {
                continue;
            }
            let (key, value) = line.split_once('=').ok_or_else(|| Error::Parse {
                line: i + 1,
                msg: format!("expected key = value, got `{line}`"),
            })?;
            pairs.push((i + 1, key.trim().to_string(), value.trim().to_string()));
        }
        let base = match pairs.iter().find(|(_, k, _)| k == "preset") {
            Some((_, _, name)) => preset(name)?,
            None => {
                let study = pairs
                    .iter()
                    .find(|(_, k, _)| k == "study")
                    .map(|(_, _, v)| v.parse::<StudyKind>())
                    .transpose()?
                    .ok_or_else(|| Error::invalid("configuration needs `study` or `preset`"))?;
                StudyConfig::new(study)
            }
        };
        let mut cfg = base;
        for (line, key, value) in pairs {
            cfg.set(&key, &value).map_err(|e| match e {
                Error::UnknownFamily(_) => e,
                other => Error::Parse {
                    line,
                    msg: other.to_string(),
                },
            })?;
        }
        cfg.validate()?;
        Ok(cfg)
    }

    /// Sets one key.
    pub fn set(&mut self, key: &str, value: &str) -> Result<()> {
        fn num<T: FromStr>(key: &str, v: &str) -> Result<T> {
            v.trim()
                .parse()
                .map_err(|_| Error::invalid(format!("bad value `{v}` for `{key}`")))
        }
        fn list<T: FromStr>(key: &str, v: &str) -> Result<Vec<T>> {
            v.split(',').map(|x| num(key, x)).collect()
        }
        match key {
            "preset" => {}
            "study" => self.study = value.parse()?,
            "n" => self.n = num(key, value)?,
            "tau" => self.tau = num(key, value)?,
            "d" => self.d = num(key, value)?,
            "replicates" => self.replicates = num(key, value)?,
            "seed" => self.seed = num(key, value)?,
            "k" => self.k = num(key, value)?,
            "eps" => self.eps = num(key, value)?,
            "n0" => self.n0 = Some(num(key, value)?),
            "alpha" => self.alpha = num(key, value)?,
            "alphas" => self.alphas = list(key, value)?,
            "mode" => {
                self.mode = match value {
                    "auto" => None,
                    m => Some(m.parse()?),
                }
            }
            "permutations" => self.permutations = num(key, value)?,
            "family" => self.family = value.parse()?,
            "rho" => self.rho = num(key, value)?,
            "cases" => {
                self.cases = value
                    .split(',')
                    .map(|c| {
                        let (s, d) = c.trim().split_once(':').ok_or_else(|| {
                            Error::invalid(format!("case `{c}` must be scenario:d"))
                        })?;
                        let s: usize = num(key, s.trim_start_matches(['S', 's', 'T', 't']))?;
                        if !(1..=6).contains(&s) {
                            return Err(Error::UnknownFamily(format!("S{s}")));
                        }
                        Ok((s, num(key, d)?))
                    })
                    .collect::<Result<_>>()?
            }
            "kinds" => {
                self.kinds = value
                    .split(',')
                    .map(str::parse)
                    .collect::<Result<_>>()?
            }
            "dc" => self.dc = list(key, value)?,
            "sizes" => self.sizes = Some(list(key, value)?),
            other => return Err(Error::invalid(format!("unknown key `{other}`"))),
        }
        Ok(())
    }
}

/// Names accepted by [`preset`].
pub fn preset_names() -> &'static [&'static str] {
    &[
        "tableV",
        "tableV-scaled",
        "tableVI",
        "tableVII",
        "tableVII-spot",
        "sensitivity",
        "sensitivity-scaled",
    ]
}

/// Published study designs. The `-scaled` and `-spot` variants keep the
/// design but cut replicates or cases to desk scale.
pub fn preset(name: &str) -> Result<StudyConfig> {
    let mut c = match name {
        "tableV" | "tableV-scaled" => {
            let mut c = StudyConfig::new(StudyKind::Size);
            c.d = 25;
            c.replicates = if name == "tableV" { 10_000 } else { 1000 };
            c
        }
        "tableVI" => StudyConfig::new(StudyKind::Type2),
        "tableVII" => StudyConfig::new(StudyKind::Power),
        "tableVII-spot" => {
            let mut c = StudyConfig::new(StudyKind::Power);
            c.cases = vec![(1, 25), (3, 2000), (4, 100)];
            c
        }
        "sensitivity" | "sensitivity-scaled" => {
            let mut c = StudyConfig::new(StudyKind::Sensitivity);
            c.d = 1000;
            if name == "sensitivity-scaled" {
                c.d = 100;
                c.replicates = 20;
                c.dc = vec![100, 10, 1];
            }
            c
        }
        other => return Err(Error::UnknownFamily(other.to_string())),
    };
    c.seed = 2024;
    Ok(c)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn parse_overrides_preset() {
        let c = StudyConfig::parse("preset = tableV-scaled\nreplicates = 10 # quick\n").unwrap();
        assert_eq!(c.study, StudyKind::Size);
        assert_eq!(c.replicates, 10);
        assert_eq!(c.d, 25);
    }

    #[test]
    fn parse_cases_and_kinds() {
        let c = StudyConfig::parse("study = power\ncases = S1:25, 4:100\n").unwrap();
        assert_eq!(c.cases, vec![(1, 25), (4, 100)]);
        let c = StudyConfig::parse("study = sensitivity\nkinds = mean,kurtosis").unwrap();
        assert_eq!(c.kinds, vec![ChangeKind::Mean, ChangeKind::Kurtosis]);
    }

    #[test]
    fn errors() {
        assert!(matches!(StudyConfig::parse("study = power\ncases = 9:25"), Err(Error::UnknownFamily(_))));
        assert!(matches!(preset("tableX"), Err(Error::UnknownFamily(_))));
        assert!(matches!(StudyConfig::parse("study = size\nbogus = 1"), Err(Error::Parse { line: 2, .. })));
        assert!(StudyConfig::parse("n = 10").is_err());
    }
}
