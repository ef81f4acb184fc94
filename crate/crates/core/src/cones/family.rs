use std::sync::Arc;

use super::linalg::{columns, lstsq, residual_inf};
use super::tree::{BracketTree, Weight};
use crate::error::Result;
use crate::models::Faccs;

/// Default absolute threshold below which a generated field counts as zero.
pub const DEDUPE_TOL: f64 = 1e-9;
/// Relative threshold for "parallel to an existing member".
pub const PARALLEL_TOL: f64 = 1e-8;

#[derive(Debug, Clone, PartialEq)]
pub enum PruneReason {
    Zero { sup: f64 },
    Parallel { to: String },
}

#[derive(Debug, Clone)]
pub struct PruneRecord {
    pub label: String,
    pub level: usize,
    pub reason: PruneReason,
    pub tree: Arc<BracketTree>,
}

/// The family `𝒵_l` as a list of bracket trees in generation order.
#[derive(Debug, Clone)]
pub struct ZFamily {
    pub members: Vec<Arc<BracketTree>>,
    /// `level_sizes[i]` = number of members of `𝒵_i`.
    pub level_sizes: Vec<usize>,
    pub pruned: Vec<PruneRecord>,
}

impl ZFamily {
    pub fn max_level(&self) -> usize {
        self.level_sizes.len() - 1
    }

    /// Members of `𝒵_i`.
    pub fn level(&self, i: usize) -> &[Arc<BracketTree>] {
        &self.members[..self.level_sizes[i.min(self.max_level())]]
    }

    pub fn index_of(&self, tree: &Arc<BracketTree>) -> Option<usize> {
        self.members.iter().position(|m| Arc::ptr_eq(m, tree))
    }
}

fn sup_norm(values: &[Vec<f64>]) -> f64 {
    values.iter().flat_map(|v| v.iter()).fold(0.0_f64, |m, x| m.max(x.abs()))
}

/// True when `v` is a multiple of `w` at every state; with `positive`,
/// the multiple must also be positive.
fn parallel_everywhere(v: &[Vec<f64>], w: &[Vec<f64>], positive: bool) -> bool {
    v.iter().zip(w).all(|(a, b)| {
        let na = a.iter().fold(0.0_f64, |m, x| m.max(x.abs()));
        let nb = b.iter().fold(0.0_f64, |m, x| m.max(x.abs()));
        if na == 0.0 {
            return true;
        }
        if nb == 0.0 {
            return false;
        }
        let m = columns(std::slice::from_ref(b), b.len());
        let c = lstsq(&m, a);
        residual_inf(&m, &c, a) <= PARALLEL_TOL * na && (!positive || c[0] > 0.0)
    })
}

fn values_at(tree: &BracketTree, states: &[Vec<f64>]) -> Vec<Vec<f64>> {
    states.iter().map(|q| tree.eval(q)).collect()
}

/// `𝒵_0 = 𝒴`, `𝒵_l = 𝒵_{l−1} ∪ {⟨Z_a:Z_b⟩}` with numerically zero or
/// parallel products pruned. `states` are base points used for the tests.
pub fn generate_z(system: &Faccs, l: usize, dedupe_tol: f64, states: &[Vec<f64>]) -> Result<ZFamily> {
    let mut members = Vec::new();
    let mut values = Vec::new();
    for a in 0..system.num_controls() {
        let t = BracketTree::generator(system, a)?;
        values.push(values_at(&t, states));
        members.push(t);
    }
    let mut level_sizes = vec![members.len()];
    let mut pruned = Vec::new();
    for level in 1..=l {
        let prev = members.len();
        for i in 0..prev {
            for j in i..prev {
                if members[i].level().max(members[j].level()) + 1 != level {
                    continue;
                }
                let t = BracketTree::sym(system, &members[i], &members[j])?;
                let v = values_at(&t, states);
                let sup = sup_norm(&v);
                if sup < dedupe_tol {
                    log::debug!("prune {} (level {level}): zero, sup {sup:.2e}", t.label());
                    pruned.push(PruneRecord { label: t.label().to_string(), level, reason: PruneReason::Zero { sup }, tree: t.clone() });
                    continue;
                }
                if let Some(k) = (0..members.len()).find(|&k| parallel_everywhere(&v, &values[k], false)) {
                    log::debug!("prune {} (level {level}): parallel to {}", t.label(), members[k].label());
                    pruned.push(PruneRecord {
                        label: t.label().to_string(),
                        level,
                        reason: PruneReason::Parallel { to: members[k].label().to_string() },
                        tree: t.clone(),
                    });
                    continue;
                }
                values.push(v);
                members.push(t);
            }
        }
        level_sizes.push(members.len());
    }
    Ok(ZFamily { members, level_sizes, pruned })
}

/// Kind of a conic generator of `𝓗_l`.
#[derive(Debug, Clone)]
pub enum HKind {
    /// `sign · Y_a`.
    Control { a: usize, sign: f64 },
    /// An element `F − Σ α_b ⟨G_b:G_b⟩` introduced at its level.
    Cone(Arc<HConeElement>),
}

/// `F − Σ_b α_b ⟨G_b : G_b⟩` with `F` a nonnegative combination of earlier
/// generators and each `G_b = Σ s_k X_k` a combination of lineal generators.
#[derive(Debug, Clone)]
pub struct HConeElement {
    pub level: usize,
    /// `(c ≥ 0, generator id)` terms of `F`.
    pub f: Vec<(f64, usize)>,
    /// `(α_b ≥ 0, [(s_k, lineal generator id)])`.
    pub terms: Vec<(f64, Vec<(f64, usize)>)>,
}

/// A conic generator with its field (as a tree).
#[derive(Debug, Clone)]
pub struct HGenerator {
    pub id: usize,
    pub level: usize,
    pub kind: HKind,
    pub tree: Arc<BracketTree>,
    /// Id `n` and ratio `μ > 0` with `−field(self) = μ · field(n)` when the
    /// generator is lineal.
    pub negation: Option<(usize, f64)>,
}

impl HGenerator {
    pub fn is_lineal(&self) -> bool {
        self.negation.is_some()
    }

    pub fn label(&self) -> &str {
        self.tree.label()
    }
}

/// The conic families `𝓗_0 ⊆ 𝓗_1 ⊆ … ⊆ 𝓗_l`.
#[derive(Debug, Clone)]
pub struct HFamily {
    pub generators: Vec<HGenerator>,
    /// `level_sizes[i]` = number of generators of `𝓗_i`.
    pub level_sizes: Vec<usize>,
    pub pruned: Vec<PruneRecord>,
}

impl HFamily {
    pub fn max_level(&self) -> usize {
        self.level_sizes.len() - 1
    }

    pub fn level(&self, i: usize) -> &[HGenerator] {
        &self.generators[..self.level_sizes[i.min(self.max_level())]]
    }
}

/// Scalings tried in the combinations `X_a + s X_b` of lineal generators.
pub const H_SCALINGS: [f64; 10] = [0.25, -0.25, 0.5, -0.5, 1.0, -1.0, 2.0, -2.0, 4.0, -4.0];

/// Builds a cone element `−α ⟨G:G⟩` and its tree.
pub fn cone_element(
    system: &Faccs,
    generators: &[HGenerator],
    level: usize,
    alpha: f64,
    g: Vec<(f64, usize)>,
) -> Result<(HConeElement, Arc<BracketTree>)> {
    let gt = if g.len() == 1 && g[0].0 == 1.0 {
        generators[g[0].1].tree.clone()
    } else {
        BracketTree::combo(g.iter().map(|(s, id)| (Weight::Const(*s), generators[*id].tree.clone())).collect())?
    };
    let gg = BracketTree::sym(system, &gt, &gt)?;
    let tree = BracketTree::combo(vec![(Weight::Const(-alpha), gg)])?;
    Ok((HConeElement { level, f: Vec::new(), terms: vec![(alpha, g)] }, tree))
}

/// Generates `𝓗_0 … 𝓗_l` from constant-coefficient lineal combinations.
/// New elements are `−⟨G:G⟩` for `G` a lineal generator or `X_a + s X_b`
/// with `s` from [`H_SCALINGS`]; elements that are zero or positive
/// multiples of existing generators at every sample state are pruned.
pub fn generate_h(system: &Faccs, l: usize, dedupe_tol: f64, states: &[Vec<f64>]) -> Result<HFamily> {
    let mut gens: Vec<HGenerator> = Vec::new();
    let mut values: Vec<Vec<Vec<f64>>> = Vec::new();
    for a in 0..system.num_controls() {
        let y = BracketTree::generator(system, a)?;
        let neg = BracketTree::combo(vec![(Weight::Const(-1.0), y.clone())])?;
        let (ip, im) = (gens.len(), gens.len() + 1);
        for (tree, sign, n) in [(y, 1.0, im), (neg, -1.0, ip)] {
            values.push(values_at(&tree, states));
            gens.push(HGenerator { id: gens.len(), level: 0, kind: HKind::Control { a, sign }, tree, negation: Some((n, 1.0)) });
        }
    }
    let mut level_sizes = vec![gens.len()];
    let mut pruned = Vec::new();
    for level in 1..=l {
        let lineal: Vec<usize> = gens.iter().filter(|g| g.is_lineal()).map(|g| g.id).collect();
        // one representative per ± pair
        let reps: Vec<usize> = lineal.iter().copied().filter(|&i| gens[i].negation.is_some_and(|(n, _)| n > i)).collect();
        let mut candidates: Vec<Vec<(f64, usize)>> = reps.iter().map(|&i| vec![(1.0, i)]).collect();
        for (x, &i) in reps.iter().enumerate() {
            for &j in &reps[x + 1..] {
                for s in H_SCALINGS {
                    candidates.push(vec![(1.0, i), (s, j)]);
                }
            }
        }
        let before = gens.len();
        for g in candidates {
            // skip combinations made only of generators older than the previous level
            if g.iter().all(|(_, id)| gens[*id].level + 1 < level) {
                continue;
            }
            let (elem, tree) = cone_element(system, &gens, level, 1.0, g)?;
            let v = values_at(&tree, states);
            let sup = sup_norm(&v);
            if sup < dedupe_tol {
                pruned.push(PruneRecord { label: tree.label().to_string(), level, reason: PruneReason::Zero { sup }, tree: tree.clone() });
                continue;
            }
            if let Some(k) = (0..gens.len()).find(|&k| parallel_everywhere(&v, &values[k], true)) {
                pruned.push(PruneRecord {
                    label: tree.label().to_string(),
                    level,
                    reason: PruneReason::Parallel { to: gens[k].label().to_string() },
                    tree: tree.clone(),
                });
                continue;
            }
            let id = gens.len();
            values.push(v);
            gens.push(HGenerator { id, level, kind: HKind::Cone(Arc::new(elem)), tree, negation: None });
        }
        // lineal detection among new elements
        for i in before..gens.len() {
            if gens[i].negation.is_some() {
                continue;
            }
            for k in 0..gens.len() {
                if k == i {
                    continue;
                }
                let neg: Vec<Vec<f64>> = values[i].iter().map(|v| v.iter().map(|x| -x).collect()).collect();
                if parallel_everywhere(&neg, &values[k], true) {
                    if let Some(mu) = constant_ratio(&neg, &values[k]) {
                        gens[i].negation = Some((k, mu));
                        if gens[k].negation.is_none() {
                            gens[k].negation = Some((i, 1.0 / mu));
                        }
                        break;
                    }
                }
            }
        }
        level_sizes.push(gens.len());
    }
    Ok(HFamily { generators: gens, level_sizes, pruned })
}

/// `μ` with `a = μ b` at every state when the ratio is constant.
fn constant_ratio(a: &[Vec<f64>], b: &[Vec<f64>]) -> Option<f64> {
    let mut mu: Option<f64> = None;
    for (x, y) in a.iter().zip(b) {
        let (i, &ym) = y.iter().enumerate().max_by(|p, q| p.1.abs().partial_cmp(&q.1.abs()).unwrap())?;
        if ym == 0.0 {
            continue;
        }
        let r = x[i] / ym;
        match mu {
            None => mu = Some(r),
            Some(m) if (m - r).abs() <= 1e-8 * m.abs().max(1.0) => {}
            Some(_) => return None,
        }
    }
    mu.filter(|m| *m > 0.0)
}
