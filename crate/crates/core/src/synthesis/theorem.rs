use std::sync::Arc;

use serde::{Deserialize, Serialize};

use super::coef::Coef;
use super::law::{ControlLaw, StepRecord};
use super::param::{coefficient_from_samples, ParamMode, Parameterization};
use super::reference::ReferenceCurve;
use super::schedule::EpsSchedule;
use crate::cones::linalg::{columns, lstsq, residual_inf};
use crate::cones::{BracketNode, BracketTree, ZFamily, DEDUPE_TOL, MEMBERSHIP_TOL};
use crate::error::{Error, Result};
use crate::models::Faccs;
use crate::sequences::{lo, phi, PeriodicFn};

/// Which unit oscillations a step emits.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum OscMode {
    /// Every pair `c < a` of the family carries `φ_lo(c,a)`, whether or not
    /// its pair coefficient vanishes; `lo` is taken over the whole family.
    All,
    /// Only pairs with a nonzero coefficient oscillate; `lo` is taken over
    /// the members that appear in such a pair.
    #[default]
    ActivePairs,
}

/// Slow and oscillatory parts of one application of the construction on a
/// family `X_1 … X_k`.
#[derive(Debug, Clone)]
pub struct TheoremStep {
    pub eps: f64,
    pub slow: Vec<Coef>,
    /// `osc[a]` lists `(amplitude, φ)` with `u_osc,a(τ, t) = Σ amplitude(t) φ(τ)`.
    pub osc: Vec<Vec<(Coef, PeriodicFn)>>,
    /// `(b, c, lo)` for each oscillating pair (zero-based `b < c`).
    pub pairs: Vec<(usize, usize, usize)>,
}

impl TheoremStep {
    /// `u_slow,a(t) + (1/ε) u_osc,a(t/ε, t)` for every `a`.
    pub fn combined(&self) -> Vec<Coef> {
        self.slow
            .iter()
            .zip(&self.osc)
            .map(|(s, os)| {
                let mut terms = vec![s.clone()];
                for (amp, f) in os {
                    terms.push(amp.clone().mul(Coef::osc(f.clone(), self.eps)));
                }
                Coef::sum(terms)
            })
            .collect()
    }
}

/// `σ_b`: coefficients of `⟨X_b:X_b⟩` on the family, `None` when the
/// product vanishes.
pub type SigmaFn<'a> = dyn FnMut(usize) -> Result<Option<Vec<Coef>>> + 'a;

/// One application of the slow/oscillatory construction.
///
/// `direct[a]` is `u_ref,a`; `pairs` holds `(b, c, u_ref,bc)` with `b < c`.
/// `u_slow,a = u_ref,a + Σ_b (n_b + Σ_{c>b} u_bc²/4) σ_ba` where `n_b` counts
/// the unit oscillations carried by channel `b`.
pub fn theorem_step(
    direct: &[Coef],
    pairs: &[(usize, usize, Coef)],
    sigma: &mut SigmaFn<'_>,
    eps: f64,
    period: f64,
    mode: OscMode,
) -> Result<TheoremStep> {
    let k = direct.len();
    if !(eps > 0.0) {
        return Err(Error::Precondition(format!("epsilon must be positive, got {eps}")));
    }
    for &(b, c, _) in pairs {
        if !(b < c && c < k) {
            return Err(Error::Structure(format!("pair ({}, {}) is not ordered within a family of {k}", b + 1, c + 1)));
        }
    }
    let active: Vec<&(usize, usize, Coef)> = pairs.iter().filter(|(_, _, u)| !u.is_zero()).collect();
    // indices of the family used for lo numbering
    let sub: Vec<usize> = match mode {
        OscMode::All => (0..k).collect(),
        OscMode::ActivePairs => {
            let mut v: Vec<usize> = active.iter().flat_map(|(b, c, _)| [*b, *c]).collect();
            v.sort_unstable();
            v.dedup();
            v
        }
    };
    let pos = |x: usize| sub.iter().position(|&y| y == x).expect("member of subfamily") + 1;
    let ks = sub.len();
    let mut osc: Vec<Vec<(Coef, PeriodicFn)>> = vec![Vec::new(); k];
    let mut weight: Vec<Vec<Coef>> = vec![Vec::new(); k];
    let mut out_pairs = Vec::new();
    let oscillating: Vec<(usize, usize, Coef)> = match mode {
        OscMode::All => {
            let mut all = Vec::new();
            for c in 0..k {
                for a in c + 1..k {
                    let u = pairs.iter().find(|(b, cc, _)| *b == c && *cc == a).map(|p| p.2.clone()).unwrap_or_default();
                    all.push((c, a, u));
                }
            }
            all
        }
        OscMode::ActivePairs => active.iter().map(|p| (*p).clone()).collect(),
    };
    for (b, c, u) in oscillating {
        let idx = lo(pos(b), pos(c), ks)?;
        let f = phi(idx, period)?;
        // channel c: unit φ; channel b: −½ u φ
        osc[c].push((Coef::Const(1.0), f.clone()));
        weight[c].push(Coef::Const(1.0));
        if !u.is_zero() {
            osc[b].push((u.clone().scale(-0.5), f));
            weight[b].push(u.clone().mul(u).scale(0.25));
        }
        out_pairs.push((b, c, idx));
    }
    let mut slow: Vec<Vec<Coef>> = direct.iter().map(|d| vec![d.clone()]).collect();
    for b in 0..k {
        let w = Coef::sum(std::mem::take(&mut weight[b]));
        if w.is_zero() {
            continue;
        }
        if let Some(sig) = sigma(b)? {
            for (a, s) in sig.into_iter().enumerate() {
                if !s.is_zero() {
                    slow[a].push(w.clone().mul(s));
                }
            }
        }
    }
    Ok(TheoremStep { eps, slow: slow.into_iter().map(Coef::sum).collect(), osc, pairs: out_pairs })
}

/// Splits the members of `𝒵_i` into members of `𝒵_{i−1}` and pairs of them.
pub fn decompose_level(family: &ZFamily, level: usize, coefficients: &[Coef]) -> Result<(Vec<Coef>, Vec<(usize, usize, Coef)>)> {
    let lower = family.level(level - 1).len();
    let upper = family.level(level);
    if coefficients.len() != upper.len() {
        return Err(Error::Dimension { expected: upper.len(), found: coefficients.len() });
    }
    let mut direct = coefficients[..lower].to_vec();
    direct.resize(lower, Coef::zero());
    let mut pairs = Vec::new();
    for (tree, coef) in upper[lower..].iter().zip(&coefficients[lower..]) {
        let BracketNode::Sym(l, r) = tree.node() else {
            return Err(Error::Structure(format!("{} is not a symmetric product", tree.label())));
        };
        let find = |t: &Arc<BracketTree>| family.index_of(t).filter(|&i| i < lower);
        let (Some(i), Some(j)) = (find(l), find(r)) else {
            return Err(Error::Structure(format!("{} is not built from level-{} members", tree.label(), level - 1)));
        };
        if coef.is_zero() {
            continue;
        }
        if i == j {
            return Err(Error::Structure(format!(
                "{} is a diagonal product; only products of distinct members can be generated by oscillations",
                tree.label()
            )));
        }
        pairs.push((i.min(j), i.max(j), coef.clone()));
    }
    Ok((direct, pairs))
}

/// `σ_b(t)` along the reference: least-squares coefficients of `⟨X_b:X_b⟩`
/// on `members` at `γ(t)`, splined over `grid`.
pub fn sigma_along(
    system: &Faccs,
    members: &[Arc<BracketTree>],
    b: usize,
    gamma: &ReferenceCurve,
    grid: &[f64],
) -> Result<Option<Vec<Coef>>> {
    let n = system.base_dim();
    let target = BracketTree::sym(system, &members[b], &members[b])?;
    let mut samples = vec![Vec::with_capacity(grid.len()); members.len()];
    let mut sup = 0.0_f64;
    for &t in grid {
        let q = &gamma.eval(t)[..n];
        let y = target.eval(q);
        let norm = y.iter().fold(0.0_f64, |m, v| m.max(v.abs()));
        sup = sup.max(norm);
        let vals: Vec<Vec<f64>> = members.iter().map(|m| m.eval(q)).collect();
        let a = columns(&vals, system.fiber_dim());
        let x = lstsq(&a, &y);
        let res = residual_inf(&a, &x, &y);
        if res > MEMBERSHIP_TOL * norm.max(1.0) {
            return Err(Error::Hypothesis(format!(
                "{} is not in the span of the family at t = {t} (residual {res:.3e})",
                target.label()
            )));
        }
        for (s, v) in samples.iter_mut().zip(x) {
            s.push(v);
        }
    }
    if sup < DEDUPE_TOL {
        return Ok(None);
    }
    Ok(Some(samples.iter().map(|s| coefficient_from_samples(grid, s)).collect::<Result<_>>()?))
}

/// Backward recursion from a parameterization on `𝒵_l` down to the control
/// fields, one construction step per level with scale `ε_{l−i+1}` at level `i`.
pub fn recursion_z(
    system: &Faccs,
    family: &ZFamily,
    param: &Parameterization,
    gamma: &ReferenceCurve,
    schedule: Option<&EpsSchedule>,
    period: f64,
    mode: OscMode,
) -> Result<ControlLaw> {
    if param.mode != ParamMode::Z {
        return Err(Error::Precondition("recursion_z needs a Z-mode parameterization".into()));
    }
    let l = param.level;
    if l > 0 {
        let s = schedule.ok_or_else(|| Error::Precondition(format!("a level-{l} law needs an epsilon schedule")))?;
        if s.levels() != l {
            return Err(Error::Precondition(format!("schedule has {} levels, parameterization {l}", s.levels())));
        }
    }
    let mut coefs = param.coefficients.clone();
    let mut records = Vec::new();
    for i in (1..=l).rev() {
        let step = l - i + 1;
        let eps = schedule.expect("checked").step(step);
        let (direct, pairs) = decompose_level(family, i, &coefs)?;
        let members = family.level(i - 1);
        let mut sigma = |b: usize| sigma_along(system, members, b, gamma, &param.grid);
        let st = theorem_step(&direct, &pairs, &mut sigma, eps, period, mode)?;
        let labels = |x: usize| members[x].label().to_string();
        records.push(StepRecord {
            level: i,
            eps,
            pairs: st.pairs.iter().map(|&(b, c, idx)| (labels(b), labels(c), idx)).collect(),
        });
        log::debug!("level {i} -> {}: eps {eps:.3e}, {} oscillating pairs", i - 1, st.pairs.len());
        coefs = st.combined();
    }
    ControlLaw::new(system, gamma.horizon(), coefs, schedule.cloned(), records)
}

/// Single-step law on the control fields from a level-1 parameterization.
pub fn synth_theorem_12_26(
    system: &Faccs,
    family: &ZFamily,
    param: &Parameterization,
    gamma: &ReferenceCurve,
    epsilon: f64,
    period: f64,
    mode: OscMode,
) -> Result<ControlLaw> {
    if param.level != 1 {
        return Err(Error::Precondition(format!("expected a level-1 parameterization, got level {}", param.level)));
    }
    let schedule = EpsSchedule { master: epsilon, regime: super::schedule::Regime::Z4, exponents: vec![], eps: vec![epsilon] };
    recursion_z(system, family, param, gamma, Some(&schedule), period, mode)
}
