use std::fmt;
use std::sync::Arc;

use nalgebra::DMatrix;

use super::field::{ensure_same_chart, mat_vec, Chart, JacobianFn};
use crate::error::{Error, Result};

/// Christoffel symbols at one point, `Γ^i_{jr}` stored as `data[(i·m + j)·m + r]`.
#[derive(Debug, Clone, PartialEq)]
pub struct Christoffel {
    m: usize,
    data: Vec<f64>,
}

impl Christoffel {
    pub fn zeros(m: usize) -> Self {
        Self { m, data: vec![0.0; m * m * m] }
    }

    pub fn dim(&self) -> usize {
        self.m
    }

    #[inline]
    pub fn get(&self, i: usize, j: usize, r: usize) -> f64 {
        self.data[(i * self.m + j) * self.m + r]
    }

    #[inline]
    pub fn set(&mut self, i: usize, j: usize, r: usize, value: f64) {
        self.data[(i * self.m + j) * self.m + r] = value;
    }

    /// `(Γ^i_{jr})_i` for fixed `(j, r)`.
    pub fn column(&self, j: usize, r: usize) -> Vec<f64> {
        (0..self.m).map(|i| self.get(i, j, r)).collect()
    }

    /// `Γ(x, y)^i = Σ_{j,r} Γ^i_{jr} x^j y^r`.
    pub fn contract(&self, x: &[f64], y: &[f64]) -> Vec<f64> {
        let m = self.m;
        let mut out = vec![0.0; m];
        for (i, o) in out.iter_mut().enumerate() {
            let mut s = 0.0;
            for j in 0..m {
                if x[j] == 0.0 {
                    continue;
                }
                for r in 0..m {
                    s += self.get(i, j, r) * x[j] * y[r];
                }
            }
            *o = s;
        }
        out
    }

    pub fn asymmetry(&self) -> f64 {
        let m = self.m;
        let mut worst = 0.0_f64;
        for i in 0..m {
            for j in 0..m {
                for r in (j + 1)..m {
                    worst = worst.max((self.get(i, j, r) - self.get(i, r, j)).abs());
                }
            }
        }
        worst
    }
}

/// Frame in which tangent vectors of the configuration manifold are expressed.
#[derive(Clone)]
pub enum Frame {
    /// Coordinate frame `∂/∂q^i`.
    Coordinate,
    /// Moving frame `e_j(q) = Σ_i K_{ij}(q) ∂/∂q^i`; the closure returns the
    /// `n × m` matrix `K(q)`.
    Moving(JacobianFn),
}

impl fmt::Debug for Frame {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Frame::Coordinate => write!(f, "Coordinate"),
            Frame::Moving(_) => write!(f, "Moving"),
        }
    }
}

pub type ChristoffelFn = Arc<dyn Fn(&[f64]) -> Christoffel + Send + Sync>;

/// An affine connection given by its Christoffel symbols relative to a frame.
///
/// With a moving frame the covariant derivative reads
/// `∇_X Y = DY·(K X) + Γ(X, Y)` where `X, Y` are frame components.
#[derive(Clone)]
pub struct Connection {
    chart: Arc<Chart>,
    fiber_dim: usize,
    frame: Frame,
    christoffel: ChristoffelFn,
    torsion_free: bool,
}

impl fmt::Debug for Connection {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_struct("Connection")
            .field("chart", &self.chart.to_string())
            .field("fiber_dim", &self.fiber_dim)
            .field("frame", &self.frame)
            .field("torsion_free", &self.torsion_free)
            .finish()
    }
}

impl Connection {
    /// Connection in the coordinate frame.
    pub fn coordinate<G>(chart: Arc<Chart>, christoffel: G, torsion_free: bool) -> Self
    where
        G: Fn(&[f64]) -> Christoffel + Send + Sync + 'static,
    {
        let n = chart.dim();
        Self { chart, fiber_dim: n, frame: Frame::Coordinate, christoffel: Arc::new(christoffel), torsion_free }
    }

    pub fn moving_frame<K, G>(chart: Arc<Chart>, fiber_dim: usize, frame: K, christoffel: G, torsion_free: bool) -> Self
    where
        K: Fn(&[f64]) -> DMatrix<f64> + Send + Sync + 'static,
        G: Fn(&[f64]) -> Christoffel + Send + Sync + 'static,
    {
        Self {
            chart,
            fiber_dim,
            frame: Frame::Moving(Arc::new(frame)),
            christoffel: Arc::new(christoffel),
            torsion_free,
        }
    }

    /// Euclidean connection, `Γ ≡ 0`.
    pub fn flat(chart: Arc<Chart>) -> Self {
        let n = chart.dim();
        Self::coordinate(chart, move |_| Christoffel::zeros(n), true)
    }

    pub fn chart(&self) -> &Arc<Chart> {
        &self.chart
    }

    pub fn fiber_dim(&self) -> usize {
        self.fiber_dim
    }

    pub fn frame(&self) -> &Frame {
        &self.frame
    }

    pub fn is_torsion_free(&self) -> bool {
        self.torsion_free
    }

    pub fn christoffel(&self, q: &[f64]) -> Christoffel {
        let g = (self.christoffel)(q);
        debug_assert_eq!(g.dim(), self.fiber_dim);
        g
    }

    /// `(Γ^i_{jr}(q))_i`.
    pub fn gamma(&self, q: &[f64], j: usize, r: usize) -> Vec<f64> {
        self.christoffel(q).column(j, r)
    }

    /// Coordinate expression `K(q) x` of frame components `x`.
    pub fn frame_apply(&self, q: &[f64], x: &[f64]) -> Vec<f64> {
        match &self.frame {
            Frame::Coordinate => x.to_vec(),
            Frame::Moving(k) => mat_vec(&k(q), x),
        }
    }

    /// Largest `|Γ^i_{jr} − Γ^i_{rj}|` over the supplied points; errors when the
    /// connection is declared torsion-free and the asymmetry exceeds `tol`.
    pub fn check_symmetry(&self, points: &[Vec<f64>], tol: f64) -> Result<f64> {
        let mut worst = 0.0_f64;
        for p in points {
            ensure_point(&self.chart, p)?;
            worst = worst.max(self.christoffel(p).asymmetry());
        }
        if self.torsion_free && worst > tol {
            return Err(Error::Precondition(format!(
                "connection declared torsion-free but Christoffel asymmetry is {worst:.3e}"
            )));
        }
        Ok(worst)
    }

    pub(crate) fn ensure_chart(&self, other: &Chart) -> Result<()> {
        ensure_same_chart(&self.chart, other)
    }
}

fn ensure_point(chart: &Chart, p: &[f64]) -> Result<()> {
    if p.len() != chart.dim() {
        return Err(Error::Dimension { expected: chart.dim(), found: p.len() });
    }
    Ok(())
}
