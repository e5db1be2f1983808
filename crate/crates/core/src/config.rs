//! Flat key-value configuration and built-in presets.
//!
//! A configuration file is flat TOML. Every key is optional and overrides
//! the preset named by `preset` (or `example1-desk` when absent):
//!
//! ```toml
//! preset = "example2-desk"
//! mu = -0.4
//! sigma = 1.2
//! tau = 1.0
//! horizon = 8.0
//! f = "linear:0.6"
//! g = "linear:1"
//! psi = 1.0
//! scheme = "strang"
//! rho_grid = [-0.9, 0.0, 0.9]
//! dt_grid = [0.015625, 0.0078125]
//! dt_reference = 6.103515625e-5
//! n_trajectories = 200
//! n_groups = 20
//! group_size = 10
//! seed = 2026
//! ```

use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::experiment::{Scheme, StudyConfig};
use crate::model::{Coefficient, InitialFunction, SddeProblem};

pub const DEFAULT_SEED: u64 = 2026;

pub const DESK_RHO_GRID: [f64; 7] = [-0.9, -0.6, -0.3, 0.0, 0.3, 0.6, 0.9];

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Preset {
    Example1Desk,
    Example2Desk,
    Example1Paper,
    Example2Paper,
}

impl Preset {
    pub const ALL: [Preset; 4] = [
        Preset::Example1Desk,
        Preset::Example2Desk,
        Preset::Example1Paper,
        Preset::Example2Paper,
    ];

    pub fn name(self) -> &'static str {
        match self {
            Preset::Example1Desk => "example1-desk",
            Preset::Example2Desk => "example2-desk",
            Preset::Example1Paper => "example1-paper",
            Preset::Example2Paper => "example2-paper",
        }
    }

    /// Same equation at the other scale.
    pub fn at_paper_scale(self) -> Self {
        match self {
            Preset::Example1Desk | Preset::Example1Paper => Preset::Example1Paper,
            Preset::Example2Desk | Preset::Example2Paper => Preset::Example2Paper,
        }
    }

    pub fn config(self) -> StudyConfig {
        let problem = match self {
            Preset::Example1Desk | Preset::Example1Paper => SddeProblem::example1(0.0),
            Preset::Example2Desk | Preset::Example2Paper => SddeProblem::example2(0.0),
        }
        .expect("preset problems are valid");
        match self {
            Preset::Example1Desk | Preset::Example2Desk => StudyConfig {
                problem,
                scheme: Scheme::LieTrotter,
                rho_grid: DESK_RHO_GRID.to_vec(),
                dt_grid: (6..=10).map(|k| 2f64.powi(-k)).collect(),
                dt_reference: 2f64.powi(-14),
                n_trajectories: 200,
                n_groups: 20,
                group_size: 10,
                master_seed: DEFAULT_SEED,
            },
            Preset::Example1Paper | Preset::Example2Paper => StudyConfig {
                problem,
                scheme: Scheme::LieTrotter,
                rho_grid: (-9..=9).map(|k| k as f64 / 10.0).collect(),
                dt_grid: (10..=14).map(|k| 2f64.powi(-k)).collect(),
                dt_reference: 2f64.powi(-18),
                n_trajectories: 500,
                n_groups: 20,
                group_size: 25,
                master_seed: DEFAULT_SEED,
            },
        }
    }
}

impl fmt::Display for Preset {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for Preset {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        Preset::ALL
            .into_iter()
            .find(|p| p.name() == s)
            .ok_or_else(|| Error::Config(format!("unknown preset `{s}`")))
    }
}

/// Flat configuration; absent keys fall back to the preset.
#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ConfigFile {
    #[serde(skip_serializing_if = "Option::is_none")]
    pub preset: Option<Preset>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub mu: Option<f64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub sigma: Option<f64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub tau: Option<f64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub horizon: Option<f64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub f: Option<String>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub g: Option<String>,
    /// Constant initial value.
    #[serde(skip_serializing_if = "Option::is_none")]
    pub psi: Option<f64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub scheme: Option<Scheme>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub rho_grid: Option<Vec<f64>>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub dt_grid: Option<Vec<f64>>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub dt_reference: Option<f64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub n_trajectories: Option<usize>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub n_groups: Option<usize>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub group_size: Option<usize>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub seed: Option<u64>,
}

impl ConfigFile {
    pub fn parse(text: &str) -> Result<Self> {
        toml::from_str(text).map_err(|e| Error::Config(e.to_string()))
    }

    pub fn to_toml(&self) -> String {
        toml::to_string(self).expect("flat config always serializes")
    }

    /// Complete flat description of `config`.
    pub fn from_study(config: &StudyConfig) -> Result<Self> {
        let p = config.problem.params();
        let psi = match p.psi {
            InitialFunction::Constant(c) => c,
            InitialFunction::Tabulated { .. } => {
                return Err(Error::Config("tabulated initial data has no flat form".into()))
            }
        };
        let coefficient = |c: &Coefficient| match c {
            Coefficient::Linear(_) => Ok(c.to_string()),
            Coefficient::Custom { name, .. } => Err(Error::Config(format!(
                "custom coefficient `{name}` has no flat form"
            ))),
        };
        Ok(Self {
            preset: None,
            mu: Some(p.mu),
            sigma: Some(p.sigma),
            tau: Some(p.tau),
            horizon: Some(p.horizon),
            f: Some(coefficient(&p.f)?),
            g: Some(coefficient(&p.g)?),
            psi: Some(psi),
            scheme: Some(config.scheme),
            rho_grid: Some(config.rho_grid.clone()),
            dt_grid: Some(config.dt_grid.clone()),
            dt_reference: Some(config.dt_reference),
            n_trajectories: Some(config.n_trajectories),
            n_groups: Some(config.n_groups),
            group_size: Some(config.group_size),
            seed: Some(config.master_seed),
        })
    }

    /// Applies the keys present here on top of `base` and validates the result.
    pub fn apply(&self, base: StudyConfig) -> Result<StudyConfig> {
        let mut p = base.problem.params();
        if let Some(v) = self.mu {
            p.mu = v;
        }
        if let Some(v) = self.sigma {
            p.sigma = v;
        }
        if let Some(v) = self.tau {
            p.tau = v;
        }
        if let Some(v) = self.horizon {
            p.horizon = v;
        }
        if let Some(v) = &self.f {
            p.f = v.parse()?;
        }
        if let Some(v) = &self.g {
            p.g = v.parse()?;
        }
        if let Some(v) = self.psi {
            p.psi = InitialFunction::Constant(v);
        }
        let mut cfg = StudyConfig {
            problem: SddeProblem::new(p)?,
            ..base
        };
        if let Some(v) = self.scheme {
            cfg.scheme = v;
        }
        if let Some(v) = &self.rho_grid {
            cfg.rho_grid = v.clone();
        }
        if let Some(v) = &self.dt_grid {
            cfg.dt_grid = v.clone();
        }
        if let Some(v) = self.dt_reference {
            cfg.dt_reference = v;
        }
        if let Some(v) = self.n_groups {
            cfg.n_groups = v;
        }
        if let Some(v) = self.group_size {
            cfg.group_size = v;
        }
        match self.n_trajectories {
            Some(v) => cfg.n_trajectories = v,
            None if self.n_groups.is_some() || self.group_size.is_some() => {
                cfg.n_trajectories = cfg.n_groups * cfg.group_size
            }
            None => {}
        }
        if let Some(v) = self.seed {
            cfg.master_seed = v;
        }
        cfg.validate()?;
        Ok(cfg)
    }

    /// Preset named in the file (default `example1-desk`) with overrides applied.
    pub fn resolve(&self) -> Result<StudyConfig> {
        self.apply(self.preset.unwrap_or(Preset::Example1Desk).config())
    }
}
