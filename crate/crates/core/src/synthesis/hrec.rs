use std::sync::Arc;

use super::coef::Coef;
use super::law::{ControlLaw, StepRecord};
use super::param::{ParamMode, Parameterization};
use super::schedule::EpsSchedule;
use crate::cones::{HFamily, HKind};
use crate::error::{Error, Result};
use crate::models::Faccs;
use crate::sequences::{pairing, PsiSequence};

/// One descent step: coefficients on the generators of `𝓗_i` become
/// coefficients on `𝓗_{i−1}`.
///
/// A cone element `F − Σ_b α_b ⟨G_b:G_b⟩` with weight `λ` passes `λ F` down and
/// turns each term into `(1/ε) ψ_j(t/ε) √(λ α_b) G_b`; each signed
/// coefficient of `G_b = Σ s_k X_k` is split into `max{±ψ, 0}` legs on `X_k`
/// and on its negation.
pub fn h_step(
    family: &HFamily,
    level: usize,
    coefficients: &[Coef],
    psi: &Arc<PsiSequence>,
    step: usize,
    eps: f64,
) -> Result<(Vec<Coef>, StepRecord)> {
    let upper = family.level(level);
    let lower = family.level(level - 1).len();
    if coefficients.len() != upper.len() {
        return Err(Error::Dimension { expected: upper.len(), found: coefficients.len() });
    }
    let mut out: Vec<Vec<Coef>> = coefficients[..lower].iter().map(|c| vec![c.clone()]).collect();
    let mut record = StepRecord { level, eps, pairs: Vec::new() };
    let mut counter = 0;
    for (g, lam) in upper[lower..].iter().zip(&coefficients[lower..]) {
        if lam.is_zero() {
            continue;
        }
        if let Some(c) = lam.as_const() {
            if c < 0.0 {
                return Err(Error::Precondition(format!("negative cone coefficient {c} on {}", g.label())));
            }
        }
        let HKind::Cone(elem) = &g.kind else {
            return Err(Error::Structure(format!("{} has no cone decomposition", g.label())));
        };
        for &(c, id) in &elem.f {
            out[id].push(lam.clone().scale(c));
        }
        for (alpha, terms) in &elem.terms {
            counter += 1;
            let j = pairing(step, counter)?;
            let osc = Coef::osc(psi.member(j)?, eps);
            let w = lam.clone().scale(*alpha).sqrt();
            record.pairs.push((g.label().to_string(), g.label().to_string(), j));
            for &(s, id) in terms {
                let gen = &family.generators[id];
                let (neg, mu) = gen
                    .negation
                    .ok_or_else(|| Error::Structure(format!("{} is not lineal", gen.label())))?;
                if id >= lower || neg >= lower {
                    return Err(Error::Structure(format!("{} is not a lower-level lineal generator", gen.label())));
                }
                let amp = w.clone().scale(s.abs());
                let sign = s.signum();
                out[id].push(osc.clone().scale(sign).pos_part().mul(amp.clone()));
                out[neg].push(osc.clone().scale(-sign).pos_part().mul(amp.scale(mu)));
            }
        }
    }
    Ok((out.into_iter().map(Coef::sum).collect(), record))
}

/// Backward recursion from a conic parameterization on `𝓗_l` to the controls.
pub fn recursion_h(
    system: &Faccs,
    family: &HFamily,
    param: &Parameterization,
    schedule: Option<&EpsSchedule>,
    horizon: (f64, f64),
    period: f64,
) -> Result<ControlLaw> {
    if param.mode != ParamMode::H {
        return Err(Error::Precondition("recursion_h needs an H-mode parameterization".into()));
    }
    let l = param.level;
    if l > 0 {
        let s = schedule.ok_or_else(|| Error::Precondition(format!("a level-{l} law needs an epsilon schedule")))?;
        if s.levels() != l {
            return Err(Error::Precondition(format!("schedule has {} levels, parameterization {l}", s.levels())));
        }
    }
    let psi = Arc::new(PsiSequence::new(period)?);
    let mut coefs = param.coefficients.clone();
    let mut records = Vec::new();
    for i in (1..=l).rev() {
        let step = l - i + 1;
        let (next, rec) = h_step(family, i, &coefs, &psi, step, schedule.expect("checked").step(step))?;
        coefs = next;
        records.push(rec);
    }
    let mut channels = vec![Vec::new(); system.num_controls()];
    for (g, c) in family.level(0).iter().zip(coefs) {
        match g.kind {
            HKind::Control { a, sign } => channels[a].push(c.scale(sign)),
            HKind::Cone(_) => return Err(Error::Structure(format!("{} at level 0", g.label()))),
        }
    }
    ControlLaw::new(system, horizon, channels.into_iter().map(Coef::sum).collect(), schedule.cloned(), records)
}
