use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Exponent regime for the nested time scales `ε_i = ε_{i−1}^p`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum Regime {
    #[serde(rename = "H3")]
    H3,
    #[serde(rename = "H_sharp")]
    HSharp,
    #[serde(rename = "Z4")]
    Z4,
    #[serde(rename = "Z_sharp")]
    ZSharp,
    #[serde(rename = "const2")]
    Const2,
}

impl Regime {
    pub fn exponent(self) -> f64 {
        match self {
            Regime::H3 => 3.0,
            Regime::HSharp => 2.5 + (5f64.sqrt() / 2.0 - 1.0),
            Regime::Z4 => 4.0,
            Regime::ZSharp => 3.0 + (3f64.sqrt() - 1.0),
            Regime::Const2 => 2.5,
        }
    }

    pub fn name(self) -> &'static str {
        match self {
            Regime::H3 => "H3",
            Regime::HSharp => "H_sharp",
            Regime::Z4 => "Z4",
            Regime::ZSharp => "Z_sharp",
            Regime::Const2 => "const2",
        }
    }
}

impl fmt::Display for Regime {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for Regime {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        [Regime::H3, Regime::HSharp, Regime::Z4, Regime::ZSharp, Regime::Const2]
            .into_iter()
            .find(|r| r.name() == s)
            .ok_or_else(|| Error::Config(format!("unknown regime `{s}`")))
    }
}

/// Time scales `ε₁ = ε > ε₂ > … > ε_l`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct EpsSchedule {
    pub master: f64,
    pub regime: Regime,
    /// `exponents[i]` maps `ε_{i+1}` to `ε_{i+2}`.
    pub exponents: Vec<f64>,
    pub eps: Vec<f64>,
}

impl EpsSchedule {
    pub fn levels(&self) -> usize {
        self.eps.len()
    }

    /// Scale used by step `s` (1-based) of a backward recursion.
    pub fn step(&self, s: usize) -> f64 {
        self.eps[s - 1]
    }

    pub fn smallest(&self) -> f64 {
        self.eps[self.eps.len() - 1]
    }
}

pub fn eta_schedule(epsilon: f64, levels: usize, regime: Regime) -> Result<EpsSchedule> {
    if !(epsilon > 0.0 && epsilon < 1.0) {
        return Err(Error::Precondition(format!("epsilon must lie in (0, 1), got {epsilon}")));
    }
    if levels == 0 {
        return Err(Error::Precondition("a schedule needs at least one level".into()));
    }
    if regime == Regime::Const2 && levels != 2 {
        return Err(Error::Precondition(format!("regime const2 needs exactly 2 levels, got {levels}")));
    }
    let p = regime.exponent();
    let mut eps = vec![epsilon];
    for _ in 1..levels {
        let next = eps[eps.len() - 1].powf(p);
        eps.push(next);
    }
    Ok(EpsSchedule { master: epsilon, regime, exponents: vec![p; levels - 1], eps })
}
