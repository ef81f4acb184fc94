use std::fmt::{self, Write as _};
use std::sync::Arc;

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use serde::Serialize;

use super::family::{generate_h, generate_z, HFamily, ZFamily, DEDUPE_TOL};
use super::linalg::{columns, lstsq, nnls, numerical_rank, residual_inf, SIGMA_TOL};
use super::tree::BracketTree;
use crate::error::{Error, Result};
use crate::geometry::VectorField;
use crate::models::Faccs;

/// Absolute tolerance for membership residuals.
pub const MEMBERSHIP_TOL: f64 = 1e-8;
/// Largest level accepted by [`certify`].
pub const MAX_CERTIFY_LEVEL: usize = 4;

/// Numerical rank of the family values at `q` (fiber block).
pub fn span_rank(family: &[&VectorField], q: &[f64], sigma_tol: f64) -> usize {
    let Some(first) = family.first() else { return 0 };
    let vals: Vec<Vec<f64>> = family.iter().map(|f| f.eval(q)).collect();
    numerical_rank(&columns(&vals, first.out_dim()), sigma_tol)
}

/// Per-state least-squares fit of a target against a family.
#[derive(Debug, Clone, Serialize)]
pub struct MembershipFit {
    /// Max over states of the sup-norm fit error.
    pub residual: f64,
    /// Max over states of the fit error divided by the target's sup-norm.
    pub relative: f64,
    /// `coefficients[s][b]` multiplies family member `b` at state `s`.
    pub coefficients: Vec<Vec<f64>>,
    /// States where the family matrix was rank deficient.
    pub rank_deficient: Vec<usize>,
}

impl MembershipFit {
    pub fn holds(&self, tol: f64) -> bool {
        self.residual <= tol
    }
}

pub fn membership_residual(target: &VectorField, family: &[&VectorField], states: &[Vec<f64>]) -> MembershipFit {
    let mut fit = MembershipFit { residual: 0.0, relative: 0.0, coefficients: Vec::new(), rank_deficient: Vec::new() };
    for (s, q) in states.iter().enumerate() {
        let b = target.eval(q);
        let vals: Vec<Vec<f64>> = family.iter().map(|f| f.eval(q)).collect();
        let a = columns(&vals, b.len());
        if numerical_rank(&a, SIGMA_TOL) < family.len() {
            fit.rank_deficient.push(s);
        }
        let c = lstsq(&a, &b);
        let r = residual_inf(&a, &c, &b);
        let norm = b.iter().fold(0.0_f64, |m, x| m.max(x.abs()));
        fit.residual = fit.residual.max(r);
        if norm > 0.0 {
            fit.relative = fit.relative.max(r / norm);
        }
        fit.coefficients.push(c);
    }
    fit
}

/// True when the cone generated by `values` contains `±e_i` for every `i`.
pub fn cone_spans(values: &[Vec<f64>], dim: usize, tol: f64) -> bool {
    let a = columns(values, dim);
    (0..dim).all(|i| {
        [1.0, -1.0].iter().all(|&s| {
            let mut e = vec![0.0; dim];
            e[i] = s;
            let x = nnls(&a, &e);
            residual_inf(&a, &x, &e) <= tol
        })
    })
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum Status {
    Satisfied,
    Violated,
    Undecided,
}

impl fmt::Display for Status {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Status::Satisfied => "satisfied",
            Status::Violated => "violated",
            Status::Undecided => "undecided",
        })
    }
}

#[derive(Debug, Clone, Serialize)]
pub struct Verdict {
    pub status: Status,
    /// Smallest certifying level, when satisfied.
    pub level: Option<usize>,
    pub detail: String,
}

#[derive(Debug, Clone, Serialize)]
pub struct RankSummary {
    pub family: String,
    pub level: usize,
    pub size: usize,
    pub min_rank: usize,
    pub max_rank: usize,
    /// Number of states where the family spans the fiber.
    pub full_at: usize,
}

#[derive(Debug, Clone, Serialize)]
pub struct MembershipEntry {
    pub condition: String,
    pub target: String,
    pub level: usize,
    pub residual: f64,
    pub relative: f64,
    pub holds: bool,
}

#[derive(Debug, Clone, Serialize)]
pub struct TrackabilityReport {
    pub system: String,
    pub fiber_dim: usize,
    pub states: usize,
    pub sigma_tol: f64,
    pub membership_tol: f64,
    pub max_level: usize,
    pub ranks: Vec<RankSummary>,
    pub memberships: Vec<MembershipEntry>,
    pub pruned: Vec<String>,
    pub theorem_12_26: Verdict,
    pub corollary_z: Verdict,
    pub corollary_h: Verdict,
}

impl TrackabilityReport {
    /// Overall outcome: satisfied if any certificate holds, otherwise
    /// undecided if any is undecided, otherwise violated.
    pub fn overall(&self) -> Status {
        let all = [&self.theorem_12_26, &self.corollary_z, &self.corollary_h];
        if all.iter().any(|v| v.status == Status::Satisfied) {
            Status::Satisfied
        } else if all.iter().any(|v| v.status == Status::Undecided) {
            Status::Undecided
        } else {
            Status::Violated
        }
    }

    /// The strongest certificate that holds, e.g. `corollary_Z at l=2`.
    pub fn headline(&self) -> String {
        let named = [("theorem_12_26", &self.theorem_12_26), ("corollary_Z", &self.corollary_z), ("corollary_H", &self.corollary_h)];
        for (name, v) in named {
            if v.status == Status::Satisfied {
                return format!("{name} at l={}", v.level.unwrap_or(0));
            }
        }
        format!("not certified ({})", self.overall())
    }

    pub fn to_text(&self) -> String {
        let mut s = String::new();
        let _ = writeln!(s, "system: {}", self.system);
        let _ = writeln!(s, "fiber dimension: {}", self.fiber_dim);
        let _ = writeln!(s, "sample states: {} (results hold at sampled states)", self.states);
        let _ = writeln!(s, "\nranks:");
        for r in &self.ranks {
            let _ = writeln!(
                s,
                "  {:<8} l={} size={:<3} rank {}..{} full at {}/{}",
                r.family, r.level, r.size, r.min_rank, r.max_rank, r.full_at, self.states
            );
        }
        let _ = writeln!(s, "\nmemberships (tol {:.1e}):", self.membership_tol);
        for m in &self.memberships {
            let _ = writeln!(
                s,
                "  [{}] {} l={} {}: residual {:.3e} (relative {:.3e})",
                if m.holds { "ok" } else { "FAIL" },
                m.condition,
                m.level,
                m.target,
                m.residual,
                m.relative
            );
        }
        if !self.pruned.is_empty() {
            let _ = writeln!(s, "\npruned:");
            for p in &self.pruned {
                let _ = writeln!(s, "  {p}");
            }
        }
        let _ = writeln!(s, "\nverdicts:");
        for (name, v) in [("theorem_12_26", &self.theorem_12_26), ("corollary_Z", &self.corollary_z), ("corollary_H", &self.corollary_h)] {
            let lvl = v.level.map(|l| format!(" at l={l}")).unwrap_or_default();
            let _ = writeln!(s, "  {name}: {}{lvl} ({})", v.status, v.detail);
        }
        let _ = writeln!(s, "\ncertificate: {}", self.headline());
        s
    }

    /// Flat `key=value` lines.
    pub fn to_kv(&self) -> String {
        let mut s = String::new();
        let _ = writeln!(s, "system={}", self.system);
        let _ = writeln!(s, "states={}", self.states);
        for r in &self.ranks {
            let _ = writeln!(s, "rank.{}.{}.min={}", r.family, r.level, r.min_rank);
            let _ = writeln!(s, "rank.{}.{}.full_at={}", r.family, r.level, r.full_at);
        }
        for (i, m) in self.memberships.iter().enumerate() {
            let _ = writeln!(s, "membership.{i}.target={}", m.target);
            let _ = writeln!(s, "membership.{i}.residual={:e}", m.residual);
        }
        for (name, v) in [("theorem_12_26", &self.theorem_12_26), ("corollary_z", &self.corollary_z), ("corollary_h", &self.corollary_h)] {
            let _ = writeln!(s, "{name}.status={}", v.status);
            if let Some(l) = v.level {
                let _ = writeln!(s, "{name}.level={l}");
            }
        }
        let _ = writeln!(s, "overall={}", self.overall());
        s
    }
}

/// Base points drawn uniformly from `[−half_width, half_width]`, rotation
/// block projected.
pub fn sample_states(system: &Faccs, count: usize, half_width: f64, seed: u64) -> Vec<Vec<f64>> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    (0..count).map(|_| system.sample_point(&mut rng, half_width).base).collect()
}

fn rank_summary(name: &str, level: usize, fields: &[&VectorField], states: &[Vec<f64>], m: usize) -> RankSummary {
    let ranks: Vec<usize> = states.iter().map(|q| span_rank(fields, q, SIGMA_TOL)).collect();
    RankSummary {
        family: name.into(),
        level,
        size: fields.len(),
        min_rank: ranks.iter().copied().min().unwrap_or(0),
        max_rank: ranks.iter().copied().max().unwrap_or(0),
        full_at: ranks.iter().filter(|&&r| r == m).count(),
    }
}

fn rank_status(r: &RankSummary, n: usize) -> Status {
    if r.full_at == n {
        Status::Satisfied
    } else if r.full_at == 0 {
        Status::Violated
    } else {
        Status::Undecided
    }
}

fn fields(trees: &[Arc<BracketTree>]) -> Vec<&VectorField> {
    trees.iter().map(|t| t.field()).collect()
}

/// Families built during certification, reused by synthesis.
#[derive(Debug, Clone)]
pub struct Certificate {
    pub report: TrackabilityReport,
    pub z: ZFamily,
    pub h: HFamily,
}

/// Evaluates the trackability certificates at the given base states.
pub fn certify(system: &Faccs, max_level: usize, states: &[Vec<f64>]) -> Result<TrackabilityReport> {
    Ok(certify_with_families(system, max_level, states)?.report)
}

pub fn certify_with_families(system: &Faccs, max_level: usize, states: &[Vec<f64>]) -> Result<Certificate> {
    if max_level > MAX_CERTIFY_LEVEL {
        return Err(Error::Precondition(format!("max_level {max_level} exceeds {MAX_CERTIFY_LEVEL}")));
    }
    if states.is_empty() {
        return Err(Error::Precondition("no sample states".into()));
    }
    let m = system.fiber_dim();
    let n = states.len();
    let mut ranks = Vec::new();
    let mut memberships = Vec::new();

    // Sym^(1): controls and all first-level products, unpruned.
    let ys: Vec<Arc<BracketTree>> = (0..system.num_controls()).map(|a| BracketTree::generator(system, a)).collect::<Result<_>>()?;
    let mut sym1 = ys.clone();
    let mut diag = Vec::new();
    for i in 0..ys.len() {
        for j in i..ys.len() {
            let t = BracketTree::sym(system, &ys[i], &ys[j])?;
            if i == j {
                diag.push(t.clone());
            }
            sym1.push(t);
        }
    }
    let r1 = rank_summary("sym1", 1, &fields(&sym1), states, m);
    let rank_ok = rank_status(&r1, n);
    ranks.push(r1.clone());
    let yfields = fields(&ys);
    let mut diag_ok = true;
    for d in &diag {
        let fit = membership_residual(d.field(), &yfields, states);
        diag_ok &= fit.holds(MEMBERSHIP_TOL);
        memberships.push(MembershipEntry {
            condition: "theorem_12_26".into(),
            target: d.label().into(),
            level: 0,
            residual: fit.residual,
            relative: fit.relative,
            holds: fit.holds(MEMBERSHIP_TOL),
        });
    }
    let theorem = match (rank_ok, diag_ok) {
        (Status::Satisfied, true) => Verdict { status: Status::Satisfied, level: Some(0), detail: format!("Sym^(1) rank {m}") },
        (Status::Undecided, true) => Verdict {
            status: Status::Undecided,
            level: None,
            detail: format!("Sym^(1) full rank at {}/{n} states", r1.full_at),
        },
        (_, false) => Verdict { status: Status::Violated, level: None, detail: "<Y_a:Y_a> not in span of controls".into() },
        _ => Verdict { status: Status::Violated, level: None, detail: format!("Sym^(1) rank {} < {m}", r1.max_rank) },
    };

    // Corollary on 𝒵_l.
    let z = generate_z(system, max_level, DEDUPE_TOL, states)?;
    let mut zverdict = None;
    let mut z_best = Status::Violated;
    let mut members_ok = true;
    for l in 0..=max_level {
        if l > 0 && members_ok {
            // ⟨Z:Z⟩ ∈ span 𝒵_{l−1} for every Z ∈ 𝒵_{l−1}
            let fam = z.level(l - 1);
            let ff = fields(fam);
            for zt in fam {
                let zz = BracketTree::sym(system, zt, zt)?;
                let fit = membership_residual(zz.field(), &ff, states);
                members_ok &= fit.holds(MEMBERSHIP_TOL);
                memberships.push(MembershipEntry {
                    condition: "corollary_Z".into(),
                    target: zz.label().into(),
                    level: l - 1,
                    residual: fit.residual,
                    relative: fit.relative,
                    holds: fit.holds(MEMBERSHIP_TOL),
                });
            }
        }
        let r = rank_summary("Z", l, &fields(z.level(l)), states, m);
        let st = rank_status(&r, n);
        ranks.push(r);
        if !members_ok {
            zverdict.get_or_insert(Verdict {
                status: Status::Violated,
                level: None,
                detail: format!("<Z:Z> membership fails below level {l}"),
            });
            continue;
        }
        match st {
            Status::Satisfied => {
                zverdict.get_or_insert(Verdict { status: Status::Satisfied, level: Some(l), detail: format!("Z_{l} spans the fiber") });
            }
            Status::Undecided => z_best = Status::Undecided,
            Status::Violated => {}
        }
    }
    let corollary_z = zverdict.unwrap_or(Verdict {
        status: z_best,
        level: None,
        detail: format!("Z_{max_level} does not span the fiber at all states"),
    });

    // Corollary on 𝓗_l.
    let h = generate_h(system, max_level, DEDUPE_TOL, states)?;
    let mut corollary_h = None;
    let mut h_best = Status::Violated;
    for l in 0..=max_level {
        let gens = h.level(l);
        let full: Vec<bool> = states
            .iter()
            .map(|q| {
                let vals: Vec<Vec<f64>> = gens.iter().map(|g| g.tree.eval(q)).collect();
                let scale = vals.iter().flatten().fold(1.0_f64, |s, v| s.max(v.abs()));
                cone_spans(&vals, m, 1e-9 * scale)
            })
            .collect();
        let full_at = full.iter().filter(|&&b| b).count();
        let gf: Vec<&VectorField> = gens.iter().map(|g| g.tree.field()).collect();
        let mut r = rank_summary("H", l, &gf, states, m);
        r.full_at = full_at;
        let st = rank_status(&r, n);
        ranks.push(r);
        match st {
            Status::Satisfied => {
                corollary_h.get_or_insert(Verdict { status: Status::Satisfied, level: Some(l), detail: format!("H_{l} cone is the whole fiber") });
            }
            Status::Undecided => h_best = Status::Undecided,
            Status::Violated => {}
        }
    }
    let corollary_h = corollary_h.unwrap_or(Verdict {
        status: h_best,
        level: None,
        detail: format!("H_{max_level} cone does not cover the fiber at all states"),
    });

    let pruned = z
        .pruned
        .iter()
        .map(|p| format!("Z l={} {} {:?}", p.level, p.label, p.reason))
        .chain(h.pruned.iter().map(|p| format!("H l={} {} {:?}", p.level, p.label, p.reason)))
        .collect();
    let report = TrackabilityReport {
        system: system.name().to_string(),
        fiber_dim: m,
        states: n,
        sigma_tol: SIGMA_TOL,
        membership_tol: MEMBERSHIP_TOL,
        max_level,
        ranks,
        memberships,
        pruned,
        theorem_12_26: theorem,
        corollary_z,
        corollary_h,
    };
    Ok(Certificate { report, z, h })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::models::{flat_system, hovercraft, submarine, HovercraftParams, SubmarineParams};

    #[test]
    fn submarine_certificate() {
        let s = submarine(SubmarineParams::default()).unwrap();
        let states = sample_states(&s, 20, 2.0, 1);
        let rep = certify(&s, 2, &states).unwrap();
        assert_eq!(rep.theorem_12_26.status, Status::Violated);
        let sym1 = rep.ranks.iter().find(|r| r.family == "sym1").unwrap();
        assert_eq!((sym1.min_rank, sym1.max_rank), (5, 5));
        assert_eq!(rep.corollary_z.status, Status::Satisfied);
        assert_eq!(rep.corollary_z.level, Some(2));
        assert!(rep.memberships.iter().filter(|m| m.condition == "corollary_Z").all(|m| m.residual < 1e-8));
        assert_eq!(rep.headline(), "corollary_Z at l=2");
    }

    #[test]
    fn hovercraft_certificate() {
        let h = hovercraft(HovercraftParams::default()).unwrap();
        let states = sample_states(&h, 20, 2.0, 2);
        let rep = certify(&h, 1, &states).unwrap();
        assert_eq!(rep.theorem_12_26.status, Status::Violated);
        assert_eq!(rep.corollary_h.status, Status::Satisfied);
        assert_eq!(rep.corollary_h.level, Some(1));
        assert_eq!(rep.headline(), "corollary_H at l=1");
    }

    #[test]
    fn flat_fully_actuated() {
        let dirs = vec![vec![1.0, 0.0], vec![0.0, 1.0]];
        let f = flat_system(2, &dirs).unwrap();
        let states = sample_states(&f, 20, 2.0, 3);
        let rep = certify(&f, 0, &states).unwrap();
        assert_eq!(rep.theorem_12_26.status, Status::Satisfied);
        assert_eq!(rep.theorem_12_26.level, Some(0));
        assert_eq!(rep.overall(), Status::Satisfied);
        assert!(rep.to_kv().contains("theorem_12_26.status=satisfied"));
    }

    #[test]
    fn hovercraft_diagonal_residual() {
        let p = HovercraftParams::default();
        let h = hovercraft(p).unwrap();
        let states = sample_states(&h, 20, 2.0, 4);
        let y1 = BracketTree::generator(&h, 0).unwrap();
        let y2 = BracketTree::generator(&h, 1).unwrap();
        let d = BracketTree::sym(&h, &y1, &y1).unwrap();
        let fit = membership_residual(d.field(), &[y1.field(), y2.field()], &states);
        assert!((fit.residual - 2.0 * p.c / p.e).abs() < 1e-6);
        let own = membership_residual(y1.field(), &[y1.field(), y2.field()], &states);
        assert!(own.residual < 1e-12);
        assert!(own.coefficients.iter().all(|c| (c[0] - 1.0).abs() < 1e-12 && c[1].abs() < 1e-12));
    }

    #[test]
    fn rank_queries() {
        let s = submarine(SubmarineParams::default()).unwrap();
        let q = &sample_states(&s, 1, 2.0, 5)[0];
        let ys: Vec<_> = (0..3).map(|a| BracketTree::generator(&s, a).unwrap()).collect();
        assert_eq!(span_rank(&fields(&ys), q, SIGMA_TOL), 3);
        assert_eq!(span_rank(&[], q, SIGMA_TOL), 0);
    }
}
