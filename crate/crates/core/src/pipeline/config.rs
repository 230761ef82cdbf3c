//! Campaign configuration files (JSON or TOML).
//!
//! ```toml
//! seed = 7
//! jobs = 1
//! qois = ["voltage", "temperature", "eta_pl"]
//!
//! [space]
//! preset = "screened"
//!
//! [protocol]
//! c_rate = 2.2
//! v_max = 4.1
//!
//! [pce]
//! degree = 2
//! n_train = 300
//!
//! [solver]
//! max_step = 1.0
//!
//! [tune]
//! epsilon = 0.05
//! pairs = [[2.2, 4.1], [2.0, 4.08]]
//! ```

use std::path::Path;

use serde::{Deserialize, Serialize};

use super::campaign::CampaignConfig;
use super::mc::DEFAULT_MC_RUNS;
use super::tune::TuneGrid;
use crate::battery::{Protocol, Qoi, SolverOptions};
use crate::error::{Error, Result};
use crate::inputs::{build_reference_space, Design, ParameterSpace, SCREENED_REFERENCE_NAMES};

#[derive(Debug, Clone, Copy, Default, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum SpacePreset {
    /// All 24 reference parameters.
    #[default]
    Reference,
    /// The 11 parameters kept after screening.
    Screened,
}

#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct SpaceSection {
    pub preset: SpacePreset,
    /// Keep only these names of the preset.
    pub select: Option<Vec<String>>,
    /// Fully custom space; overrides `preset` and `select`.
    pub params: Option<ParameterSpace>,
}

impl SpaceSection {
    pub fn resolve(&self) -> Result<ParameterSpace> {
        if let Some(p) = &self.params {
            return Ok(p.clone());
        }
        let base = build_reference_space();
        let base = match self.preset {
            SpacePreset::Reference => base,
            SpacePreset::Screened => base.restrict(&SCREENED_REFERENCE_NAMES)?,
        };
        match &self.select {
            Some(names) => base.restrict(names),
            None => Ok(base),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct PceSection {
    pub degree: usize,
    pub n_train: usize,
    pub validation_fraction: f64,
    pub n_surrogate_samples: usize,
    pub ci_level: f64,
    pub r2_gate: f64,
    pub design: Design,
}

impl Default for PceSection {
    fn default() -> Self {
        PceSection {
            degree: 2,
            n_train: 300,
            validation_fraction: 0.2,
            n_surrogate_samples: 10_000,
            ci_level: 0.95,
            r2_gate: 0.8,
            design: Design::LatinHypercube,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct TuneSection {
    pub epsilon: f64,
    #[serde(flatten)]
    pub grid: TuneGrid,
    /// Evaluate every candidate instead of stopping at the first admissible one.
    pub exhaustive: bool,
}

impl Default for TuneSection {
    fn default() -> Self {
        TuneSection {
            epsilon: 0.05,
            grid: TuneGrid::pairs(&[(2.2, 4.1), (2.0, 4.08)]),
            exhaustive: false,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct McSection {
    pub n_runs: usize,
    /// Space of the baseline; defaults to the full reference space.
    pub space: Option<SpaceSection>,
}

impl Default for McSection {
    fn default() -> Self {
        McSection {
            n_runs: DEFAULT_MC_RUNS,
            space: None,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct FileConfig {
    pub seed: u64,
    pub jobs: usize,
    pub qois: Vec<Qoi>,
    pub space: SpaceSection,
    pub protocol: Protocol,
    pub pce: PceSection,
    pub solver: SolverOptions,
    pub tune: TuneSection,
    pub mc: McSection,
}

impl Default for FileConfig {
    fn default() -> Self {
        FileConfig {
            seed: 42,
            jobs: 0,
            qois: Qoi::ALL.to_vec(),
            space: SpaceSection::default(),
            protocol: Protocol::default(),
            pce: PceSection::default(),
            solver: SolverOptions::default(),
            tune: TuneSection::default(),
            mc: McSection::default(),
        }
    }
}

impl FileConfig {
    /// Reads `.json` or `.toml` by extension.
    pub fn load(path: impl AsRef<Path>) -> Result<Self> {
        let path = path.as_ref();
        let text = std::fs::read_to_string(path)?;
        match path.extension().and_then(|e| e.to_str()) {
            Some("json") => Self::from_json_str(&text),
            Some("toml") => Self::from_toml_str(&text),
            other => Err(Error::Config(format!(
                "unsupported config extension {:?} (use .json or .toml)",
                other.unwrap_or("")
            ))),
        }
    }

    pub fn from_json_str(text: &str) -> Result<Self> {
        serde_json::from_str(text).map_err(|e| Error::Config(e.to_string()))
    }

    pub fn from_toml_str(text: &str) -> Result<Self> {
        toml::from_str(text).map_err(|e| Error::Config(e.to_string()))
    }

    pub fn campaign(&self) -> Result<CampaignConfig> {
        let p = &self.pce;
        let cfg = CampaignConfig {
            space: self.space.resolve()?,
            protocol: self.protocol.clone(),
            n_train: p.n_train,
            validation_fraction: p.validation_fraction,
            degree: p.degree,
            n_surrogate_samples: p.n_surrogate_samples,
            ci_level: p.ci_level,
            seed: self.seed,
            qois: self.qois.clone(),
            r2_gate: p.r2_gate,
            design: p.design,
            jobs: self.jobs,
        };
        cfg.validate()?;
        Ok(cfg)
    }

    /// Campaign settings for the Monte Carlo baseline.
    pub fn mc_campaign(&self) -> Result<CampaignConfig> {
        let space = match &self.mc.space {
            Some(s) => s.resolve()?,
            None => build_reference_space(),
        };
        Ok(CampaignConfig {
            space,
            ..self.campaign()?
        })
    }
}
