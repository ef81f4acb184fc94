use std::io::Write;

use serde::Serialize;
use serde_json::{json, Value};

use super::coef::Coef;
use super::schedule::EpsSchedule;
use crate::dynamics::{write_table_csv, ControlInput};
use crate::error::{Error, Result};
use crate::models::Faccs;

/// Oscillating pairs emitted when descending from `level`.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct StepRecord {
    pub level: usize,
    pub eps: f64,
    /// `(left, right, profile index)`.
    pub pairs: Vec<(String, String, usize)>,
}

/// Open-loop law `t ↦ u(t) ∈ ℝ^k`.
#[derive(Debug, Clone)]
pub struct ControlLaw {
    pub system: String,
    pub horizon: (f64, f64),
    pub labels: Vec<String>,
    pub channels: Vec<Coef>,
    pub schedule: Option<EpsSchedule>,
    pub steps: Vec<StepRecord>,
}

impl ControlLaw {
    pub fn new(
        system: &Faccs,
        horizon: (f64, f64),
        channels: Vec<Coef>,
        schedule: Option<EpsSchedule>,
        steps: Vec<StepRecord>,
    ) -> Result<Self> {
        if channels.len() != system.num_controls() {
            return Err(Error::Dimension { expected: system.num_controls(), found: channels.len() });
        }
        if let Some(s) = &schedule {
            if s.eps.windows(2).any(|w| !(w[1] < w[0])) {
                return Err(Error::Precondition(format!("schedule {:?} is not strictly decreasing", s.eps)));
            }
        }
        Ok(Self {
            system: system.name().to_string(),
            horizon,
            labels: system.controls().iter().map(|y| y.label().to_string()).collect(),
            channels,
            schedule,
            steps,
        })
    }

    /// Law with constant zero channels.
    pub fn zero(system: &Faccs, horizon: (f64, f64)) -> Result<Self> {
        Self::new(system, horizon, vec![Coef::zero(); system.num_controls()], None, Vec::new())
    }

    pub fn is_oscillatory(&self) -> bool {
        self.fastest_period().is_some()
    }

    /// Largest `|u_a(t)|` per channel over `n` uniform samples.
    pub fn amplitudes(&self, n: usize) -> Vec<f64> {
        self.channels.iter().map(|c| c.sup_on(self.horizon.0, self.horizon.1, n)).collect()
    }

    /// Samples `(t, u₁ … u_k)` on `points` uniform times.
    pub fn sample(&self, points: usize) -> Vec<Vec<f64>> {
        let (a, b) = self.horizon;
        let n = points.max(2);
        (0..n)
            .map(|i| {
                let t = a + (b - a) * i as f64 / (n - 1) as f64;
                let mut row = vec![t];
                row.extend(self.eval(t));
                row
            })
            .collect()
    }

    pub fn write_csv<W: Write>(&self, w: W, points: usize) -> Result<()> {
        let mut header = vec!["t"];
        header.extend(self.labels.iter().map(String::as_str));
        write_table_csv(w, &header, &self.sample(points))
    }

    /// Structure of the law as JSON.
    pub fn to_json(&self) -> Value {
        json!({
            "system": self.system,
            "horizon": [self.horizon.0, self.horizon.1],
            "schedule": self.schedule,
            "steps": self.steps,
            "fastest_period": self.fastest_period(),
            "channels": self
                .labels
                .iter()
                .zip(&self.channels)
                .map(|(l, c)| json!({ "label": l, "coefficient": c.to_json() }))
                .collect::<Vec<_>>(),
        })
    }
}

impl ControlInput for ControlLaw {
    fn channels(&self) -> usize {
        self.channels.len()
    }

    fn eval_into(&self, t: f64, out: &mut [f64]) {
        for (o, c) in out.iter_mut().zip(&self.channels) {
            *o = c.eval(t);
        }
    }

    fn fastest_period(&self) -> Option<f64> {
        self.channels.iter().filter_map(|c| c.fastest_period()).min_by(|a, b| a.partial_cmp(b).unwrap())
    }
}
