use std::fmt;
use std::sync::Arc;

use crate::error::{Error, Result};
use crate::geometry::VectorField;
use crate::models::Faccs;

/// Coefficient of a term in a linear combination of fields.
#[derive(Clone)]
pub enum Weight {
    Const(f64),
    /// Smooth scalar function on the base (a field with `out_dim == 1`).
    Function(VectorField),
}

impl fmt::Debug for Weight {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Weight::Const(c) => write!(f, "{c}"),
            Weight::Function(w) => write!(f, "w[{}]", w.label()),
        }
    }
}

impl Weight {
    pub fn value(&self, q: &[f64]) -> f64 {
        match self {
            Weight::Const(c) => *c,
            Weight::Function(w) => w.eval(q)[0],
        }
    }

    pub fn directional(&self, q: &[f64], d: &[f64]) -> f64 {
        match self {
            Weight::Const(_) => 0.0,
            Weight::Function(w) => w.directional(q, d)[0],
        }
    }

    pub fn as_const(&self) -> Option<f64> {
        match self {
            Weight::Const(c) => Some(*c),
            Weight::Function(_) => None,
        }
    }
}

#[derive(Debug, Clone)]
pub enum BracketNode {
    /// Control field `Y_a` (zero-based).
    Generator(usize),
    /// `⟨left : right⟩`.
    Sym(Arc<BracketTree>, Arc<BracketTree>),
    /// `Σ w_i T_i`.
    Combo(Vec<(Weight, Arc<BracketTree>)>),
}

/// Expression tree recording how a field was built from the control fields.
#[derive(Clone)]
pub struct BracketTree {
    node: BracketNode,
    level: usize,
    field: VectorField,
    label: String,
}

impl fmt::Debug for BracketTree {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{} (level {})", self.label, self.level)
    }
}

impl BracketTree {
    pub fn generator(system: &Faccs, a: usize) -> Result<Arc<Self>> {
        let y = system
            .control(a)
            .ok_or_else(|| Error::Config(format!("no control field with index {a}")))?;
        Ok(Arc::new(Self {
            node: BracketNode::Generator(a),
            level: 0,
            field: y.clone(),
            label: format!("Y{}", a + 1),
        }))
    }

    pub fn sym(system: &Faccs, left: &Arc<Self>, right: &Arc<Self>) -> Result<Arc<Self>> {
        let field = system.symmetric_product(&left.field, &right.field)?;
        let label = format!("<{}:{}>", left.label, right.label);
        Ok(Arc::new(Self {
            node: BracketNode::Sym(left.clone(), right.clone()),
            level: left.level.max(right.level) + 1,
            field: field.with_label(label.clone()),
            label,
        }))
    }

    pub fn combo(terms: Vec<(Weight, Arc<Self>)>) -> Result<Arc<Self>> {
        let first = terms.first().ok_or_else(|| Error::Config("empty combination".into()))?;
        let chart = first.1.field.chart().clone();
        let m = first.1.field.out_dim();
        let level = terms.iter().map(|(_, t)| t.level).max().unwrap_or(0);
        let label = terms
            .iter()
            .map(|(w, t)| match w {
                Weight::Const(c) if *c == 1.0 => t.label.clone(),
                Weight::Const(c) => format!("{c}*{}", t.label),
                Weight::Function(f) => format!("{}*{}", f.label(), t.label),
            })
            .collect::<Vec<_>>()
            .join(" + ");
        let t1 = terms.clone();
        let t2 = terms.clone();
        let field = VectorField::new(chart, m, move |q| {
            let mut out = vec![0.0; m];
            for (w, t) in &t1 {
                let c = w.value(q);
                if c != 0.0 {
                    for (o, v) in out.iter_mut().zip(t.field.eval(q)) {
                        *o += c * v;
                    }
                }
            }
            out
        })
        .with_directional(move |q, d| {
            let mut out = vec![0.0; m];
            for (w, t) in &t2 {
                let c = w.value(q);
                let dc = w.directional(q, d);
                if c != 0.0 {
                    for (o, v) in out.iter_mut().zip(t.field.directional(q, d)) {
                        *o += c * v;
                    }
                }
                if dc != 0.0 {
                    for (o, v) in out.iter_mut().zip(t.field.eval(q)) {
                        *o += dc * v;
                    }
                }
            }
            out
        })
        .with_label(label.clone());
        Ok(Arc::new(Self { node: BracketNode::Combo(terms), level, field, label }))
    }

    pub fn node(&self) -> &BracketNode {
        &self.node
    }

    pub fn level(&self) -> usize {
        self.level
    }

    pub fn field(&self) -> &VectorField {
        &self.field
    }

    pub fn label(&self) -> &str {
        &self.label
    }

    pub fn eval(&self, q: &[f64]) -> Vec<f64> {
        self.field.eval(q)
    }

    /// Rebuilds the field bottom-up from the control fields and evaluates it.
    pub fn eval_recursive(&self, system: &Faccs, q: &[f64]) -> Result<Vec<f64>> {
        Ok(self.rebuild(system)?.eval(q))
    }

    fn rebuild(&self, system: &Faccs) -> Result<VectorField> {
        match &self.node {
            BracketNode::Generator(a) => Ok(system.control_checked(*a)?.clone()),
            BracketNode::Sym(l, r) => system.symmetric_product(&l.rebuild(system)?, &r.rebuild(system)?),
            BracketNode::Combo(terms) => {
                let rebuilt = terms
                    .iter()
                    .map(|(w, t)| {
                        let f = t.rebuild(system)?;
                        Ok((w.clone(), Arc::new(Self { node: t.node.clone(), level: t.level, field: f, label: t.label.clone() })))
                    })
                    .collect::<Result<Vec<_>>>()?;
                Ok(Self::combo(rebuilt)?.field.clone())
            }
        }
    }
}
