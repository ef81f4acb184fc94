use std::path::Path;

use anyhow::{bail, Context, Result};
use serde::{Deserialize, Serialize};

use oscitrack::models::{flat_system, hovercraft, submarine, Faccs, HovercraftParams, SubmarineParams};
use oscitrack::synthesis::{self, OscMode, ReferenceCurve, Regime};
use oscitrack::IntegratorConfig;

pub const SCHEMA_VERSION: u32 = 1;

/// Top-level experiment description.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ExperimentConfig {
    pub schema_version: u32,
    pub name: String,
    #[serde(default)]
    pub seed: u64,
    pub model: ModelConfig,
    #[serde(default)]
    pub check: CheckConfig,
    pub reference: Option<ReferenceConfig>,
    pub synthesis: Option<SynthesisConfig>,
    #[serde(default)]
    pub integrator: IntegratorConfig,
    #[serde(default)]
    pub output: OutputConfig,
    pub sweep: Option<SweepConfig>,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum ModelKind {
    Submarine,
    Hovercraft,
    Flat,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ModelConfig {
    pub kind: ModelKind,
    pub submarine: Option<SubmarineParams>,
    pub hovercraft: Option<HovercraftParams>,
    pub flat: Option<FlatConfig>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct FlatConfig {
    pub dim: usize,
    /// Constant control directions, one row per control.
    pub directions: Vec<Vec<f64>>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct CheckConfig {
    pub max_level: usize,
    pub samples: usize,
    pub half_width: f64,
}

impl Default for CheckConfig {
    fn default() -> Self {
        Self { max_level: 2, samples: 20, half_width: 2.0 }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum CurveKind {
    SubmarineLine,
    SubmarineRest,
    HovercraftSideways,
    HovercraftRest,
    Polynomial,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ReferenceConfig {
    pub curve: CurveKind,
    #[serde(default = "default_t1")]
    pub t1: f64,
    /// Per phase component, polynomial coefficients in increasing degree.
    pub coefficients: Option<Vec<Vec<f64>>>,
    /// Initial phase state; defaults to the reference at `t = 0`.
    pub initial: Option<Vec<f64>>,
}

fn default_t1() -> f64 {
    1.0
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum SynthMode {
    Auto,
    Z,
    H,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SynthesisConfig {
    #[serde(default = "default_mode")]
    pub mode: SynthMode,
    /// Family level; defaults to the certifying level.
    pub level: Option<usize>,
    pub epsilon: f64,
    pub regime: Option<Regime>,
    #[serde(default = "default_period")]
    pub period: f64,
    #[serde(default = "default_grid")]
    pub grid: usize,
    #[serde(default)]
    pub osc_mode: OscMode,
}

fn default_mode() -> SynthMode {
    SynthMode::Auto
}

fn default_period() -> f64 {
    oscitrack::sequences::DEFAULT_PERIOD
}

fn default_grid() -> usize {
    synthesis::DEFAULT_GRID
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct OutputConfig {
    /// Phase components compared against the reference.
    pub metric: Vec<String>,
    /// Samples of the law written to `law.csv`.
    pub law_points: usize,
    pub svg: bool,
}

impl Default for OutputConfig {
    fn default() -> Self {
        Self { metric: Vec::new(), law_points: 2001, svg: true }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SweepConfig {
    pub eps_list: Vec<f64>,
}

impl ExperimentConfig {
    pub fn from_toml(text: &str) -> Result<Self> {
        let cfg: Self = toml::from_str(text).context("invalid experiment config")?;
        cfg.validate()?;
        Ok(cfg)
    }

    pub fn load(path: &Path) -> Result<Self> {
        let text = std::fs::read_to_string(path).with_context(|| format!("reading {}", path.display()))?;
        Self::from_toml(&text).with_context(|| format!("in {}", path.display()))
    }

    pub fn to_toml(&self) -> Result<String> {
        Ok(toml::to_string(self)?)
    }

    pub fn validate(&self) -> Result<()> {
        if self.schema_version != SCHEMA_VERSION {
            bail!("unsupported schema_version {} (expected {SCHEMA_VERSION})", self.schema_version);
        }
        let m = &self.model;
        let ok = match m.kind {
            ModelKind::Submarine => m.hovercraft.is_none() && m.flat.is_none(),
            ModelKind::Hovercraft => m.submarine.is_none() && m.flat.is_none(),
            ModelKind::Flat => m.flat.is_some() && m.submarine.is_none() && m.hovercraft.is_none(),
        };
        if !ok {
            bail!("model parameters do not match model kind {:?}", m.kind);
        }
        if let Some(s) = &self.synthesis {
            if !(s.epsilon > 0.0 && s.epsilon < 1.0) {
                bail!("synthesis.epsilon must lie in (0, 1)");
            }
            if !(s.period > 0.0) {
                bail!("synthesis.period must be positive");
            }
        }
        if let Some(r) = &self.reference {
            if r.curve == CurveKind::Polynomial && r.coefficients.is_none() {
                bail!("polynomial reference needs `coefficients`");
            }
        }
        Ok(())
    }

    pub fn build_system(&self) -> Result<Faccs> {
        let m = &self.model;
        Ok(match m.kind {
            ModelKind::Submarine => submarine(m.submarine.unwrap_or_default())?,
            ModelKind::Hovercraft => hovercraft(m.hovercraft.unwrap_or_default())?,
            ModelKind::Flat => {
                let f = m.flat.as_ref().expect("validated");
                flat_system(f.dim, &f.directions)?
            }
        })
    }

    pub fn build_reference(&self) -> Result<ReferenceCurve> {
        let r = self.reference.as_ref().context("config has no [reference] section")?;
        let horizon = (0.0, r.t1);
        let m = &self.model;
        Ok(match r.curve {
            CurveKind::SubmarineLine => {
                if r.t1 != 1.0 {
                    bail!("submarine_line is defined on [0, 1]");
                }
                synthesis::submarine_line(&m.submarine.unwrap_or_default())
            }
            CurveKind::SubmarineRest => synthesis::submarine_rest(horizon),
            CurveKind::HovercraftSideways => synthesis::hovercraft_sideways(&m.hovercraft.unwrap_or_default(), horizon),
            CurveKind::HovercraftRest => synthesis::hovercraft_rest(horizon),
            CurveKind::Polynomial => {
                synthesis::polynomial("polynomial", horizon, r.coefficients.clone().expect("validated"))
            }
        })
    }
}
