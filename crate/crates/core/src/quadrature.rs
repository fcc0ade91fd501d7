//! Product quadrature rules.
//!
//! Every integral in the crate is a flat sum over the nodes of a
//! [`ProductRule`], visited in row-major order (last axis fastest), and
//! reduced with [`pairwise_sum`]. The pairwise split points depend only on
//! the number of terms, so the result is bit-identical whether or not the
//! recursion is executed in parallel.

use std::ops::Add;

use num_complex::Complex64;

use crate::error::{input, Error, Result};
use crate::state::GridAxis;

/// Terms below this count are summed sequentially.
const PAIRWISE_BLOCK: usize = 64;
/// Terms above this count are split across rayon tasks.
const PARALLEL_THRESHOLD: usize = 1 << 14;

/// Largest Gauss–Hermite order for which the scaled Hermite recurrence
/// stays inside the f64 exponent range.
pub const MAX_GAUSS_HERMITE_POINTS: usize = 300;

#[derive(Debug, Clone, Copy, PartialEq)]
pub enum AxisKind {
    Midpoint(GridAxis),
    GaussHermite { scale: f64 },
}

/// Nodes and plain integration weights along one axis: `∫ f(x) dx ≈ Σ wᵢ f(xᵢ)`.
#[derive(Debug, Clone, PartialEq)]
pub struct AxisRule {
    nodes: Vec<f64>,
    weights: Vec<f64>,
    kind: AxisKind,
}

impl AxisRule {
    pub fn midpoint(axis: &GridAxis) -> Self {
        let delta = axis.delta();
        AxisRule {
            nodes: (0..axis.points).map(|i| axis.node(i)).collect(),
            weights: vec![delta; axis.points],
            kind: AxisKind::Midpoint(*axis),
        }
    }

    /// Gauss–Hermite rule for the weight `e^{-(x/s)²}`, with the weight
    /// folded into the returned plain weights. It integrates
    /// `e^{-(x/s)²} p(x)` exactly for polynomials of degree `≤ 2·points - 1`.
    pub fn gauss_hermite(points: usize, scale: f64) -> Result<Self> {
        if points == 0 || points > MAX_GAUSS_HERMITE_POINTS {
            return input(format!(
                "Gauss-Hermite order must be in 1..={MAX_GAUSS_HERMITE_POINTS}, got {points}"
            ));
        }
        if !(scale.is_finite() && scale > 0.0) {
            return input(format!("Gauss-Hermite scale must be positive, got {scale}"));
        }
        let (z, w) = hermite_nodes(points);
        Ok(AxisRule {
            nodes: z.iter().map(|zi| zi * scale).collect(),
            weights: w.iter().map(|wi| wi * scale).collect(),
            kind: AxisKind::GaussHermite { scale },
        })
    }

    pub fn nodes(&self) -> &[f64] {
        &self.nodes
    }

    pub fn weights(&self) -> &[f64] {
        &self.weights
    }

    pub fn kind(&self) -> AxisKind {
        self.kind
    }

    pub fn len(&self) -> usize {
        self.nodes.len()
    }

    pub fn is_empty(&self) -> bool {
        self.nodes.is_empty()
    }
}

/// Nodes in ascending order and plain weights `wᵢ e^{zᵢ²}` of the physicists'
/// Gauss–Hermite rule, by Newton iteration on the orthonormal Hermite
/// functions. Carrying the `e^{-z²/2}` factor inside the recurrence keeps the
/// plain weights accurate to full relative precision out in the tails.
fn hermite_nodes(n: usize) -> (Vec<f64>, Vec<f64>) {
    let pim4 = std::f64::consts::PI.powf(-0.25);
    let nf = n as f64;
    let mut z_desc = vec![0.0; n];
    let mut w_desc = vec![0.0; n];
    let mut z = 0.0f64;
    for i in 0..n.div_ceil(2) {
        z = match i {
            0 => (2.0 * nf + 1.0).sqrt() - 1.85575 * (2.0 * nf + 1.0).powf(-1.0 / 6.0),
            1 => z - 1.14 * nf.powf(0.426) / z,
            2 => 1.86 * z - 0.86 * z_desc[0],
            3 => 1.91 * z - 0.91 * z_desc[1],
            _ => 2.0 * z - z_desc[i - 2],
        };
        let mut pp = 0.0;
        for _ in 0..100 {
            let mut p1 = pim4 * (-0.5 * z * z).exp();
            let mut p2 = 0.0;
            for j in 1..=n {
                let jf = j as f64;
                let p3 = p2;
                p2 = p1;
                p1 = z * (2.0 / jf).sqrt() * p2 - ((jf - 1.0) / jf).sqrt() * p3;
            }
            // at a root the -z·ψ term of the derivative vanishes, so `pp`
            // alone feeds the weight
            pp = (2.0 * nf).sqrt() * p2;
            let dz = p1 / (pp - z * p1);
            z -= dz;
            if dz.abs() <= 1e-15 * z.abs().max(1.0) {
                break;
            }
        }
        let w = 2.0 / (pp * pp);
        z_desc[i] = z;
        z_desc[n - 1 - i] = -z;
        w_desc[i] = w;
        w_desc[n - 1 - i] = w;
    }
    if n % 2 == 1 {
        z_desc[n / 2] = 0.0;
    }
    z_desc.reverse();
    w_desc.reverse();
    (z_desc, w_desc)
}

/// Tensor product of per-axis rules.
#[derive(Debug, Clone, PartialEq)]
pub struct ProductRule {
    axes: Vec<AxisRule>,
}

impl ProductRule {
    pub fn new(axes: Vec<AxisRule>) -> Result<Self> {
        if axes.is_empty() {
            return input("a product rule needs at least one axis");
        }
        if axes.iter().any(|a| a.is_empty()) {
            return input("every axis of a product rule needs at least one node");
        }
        if axes.iter().flat_map(|a| a.weights.iter()).any(|w| !(*w > 0.0)) {
            return input("quadrature weights must be strictly positive");
        }
        Ok(ProductRule { axes })
    }

    pub fn midpoint(axes: &[GridAxis]) -> Result<Self> {
        ProductRule::new(axes.iter().map(AxisRule::midpoint).collect())
    }

    /// Product Gauss–Hermite rule with one scale per axis.
    pub fn gauss_hermite(points_per_axis: usize, scales: &[f64]) -> Result<Self> {
        let axes = scales
            .iter()
            .map(|&s| AxisRule::gauss_hermite(points_per_axis, s))
            .collect::<Result<Vec<_>>>()?;
        ProductRule::new(axes)
    }

    pub fn axes(&self) -> &[AxisRule] {
        &self.axes
    }

    pub fn dims(&self) -> usize {
        self.axes.len()
    }

    pub fn shape(&self) -> Vec<usize> {
        self.axes.iter().map(AxisRule::len).collect()
    }

    pub fn total_nodes(&self) -> usize {
        self.axes.iter().map(AxisRule::len).product()
    }

    /// Per-axis node indices of a row-major linear index.
    pub fn multi_index(&self, mut linear: usize) -> Vec<usize> {
        let mut idx = vec![0; self.axes.len()];
        for (k, axis) in self.axes.iter().enumerate().rev() {
            idx[k] = linear % axis.len();
            linear /= axis.len();
        }
        idx
    }

    pub fn coordinates(&self, linear: usize) -> Vec<f64> {
        self.multi_index(linear)
            .iter()
            .zip(&self.axes)
            .map(|(&i, a)| a.nodes[i])
            .collect()
    }

    /// Product weights of every node, row-major.
    pub fn weights(&self) -> Vec<f64> {
        let mut out = vec![1.0];
        for axis in &self.axes {
            out = out
                .iter()
                .flat_map(|&w| axis.weights.iter().map(move |&v| w * v))
                .collect();
        }
        out
    }

    /// Midpoint axes when every axis came from a [`GridAxis`].
    pub fn grid_axes(&self) -> Option<Vec<GridAxis>> {
        self.axes
            .iter()
            .map(|a| match a.kind {
                AxisKind::Midpoint(g) => Some(g),
                AxisKind::GaussHermite { .. } => None,
            })
            .collect()
    }
}

/// `Σ f(node)·Π weights` over all nodes of `rule`.
pub fn integrate<F>(rule: &ProductRule, f: F) -> Result<Complex64>
where
    F: Fn(&[f64]) -> Complex64,
{
    let weights = rule.weights();
    let mut terms = Vec::with_capacity(weights.len());
    for (i, w) in weights.iter().enumerate() {
        let x = rule.coordinates(i);
        let v = f(&x);
        if !(v.re.is_finite() && v.im.is_finite()) {
            return Err(Error::NonFinite { node: x });
        }
        terms.push(v * w);
    }
    Ok(pairwise_sum(&terms))
}

/// Real-valued variant of [`integrate`].
pub fn integrate_real<F>(rule: &ProductRule, f: F) -> Result<f64>
where
    F: Fn(&[f64]) -> f64,
{
    integrate(rule, |x| Complex64::new(f(x), 0.0)).map(|z| z.re)
}

/// Pairwise (cascade) summation with deterministic split points.
pub fn pairwise_sum<T>(terms: &[T]) -> T
where
    T: Copy + Default + Add<Output = T> + Send + Sync,
{
    if terms.len() <= PAIRWISE_BLOCK {
        return terms.iter().fold(T::default(), |acc, &t| acc + t);
    }
    let (lo, hi) = terms.split_at(terms.len() / 2);
    if terms.len() >= PARALLEL_THRESHOLD {
        let (a, b) = rayon::join(|| pairwise_sum(lo), || pairwise_sum(hi));
        a + b
    } else {
        pairwise_sum(lo) + pairwise_sum(hi)
    }
}
