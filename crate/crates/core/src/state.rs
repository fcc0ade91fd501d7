//! State representations, bipartitions and evaluation of wavefunctions.
//!
//! A [`GridState`] stores amplitudes of `φ(x₁,…,xₙ)` at the nodes of a
//! [`ProductRule`], row-major with the last axis fastest. The discrete norm
//! `Σ |φᵢ|² wᵢ` is 1 for every constructed state. A [`GaussianPureState`]
//! is the analytic wavefunction `𝒩 exp(-½ xᵀA x)` with complex symmetric `A`.

use faer::{Mat, Side};
use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::error::{input, Error, Result};
use crate::linalg;
use crate::quadrature::{pairwise_sum, ProductRule};

/// Allowed deviation of a stored state's discrete norm from 1.
pub const NORM_TOLERANCE: f64 = 1e-9;
/// Mass lost to a truncated domain above which `discretize` warns.
pub const TRUNCATION_WARNING: f64 = 1e-3;
/// Condition number of `Re(A)` above which `discretize` flags a ridge.
pub const CONDITION_WARNING: f64 = 100.0;

/// Uniform midpoint axis: nodes `min + (i + ½)Δ`, weights `Δ`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct GridAxis {
    pub min: f64,
    pub max: f64,
    pub points: usize,
}

impl GridAxis {
    pub fn new(min: f64, max: f64, points: usize) -> Result<Self> {
        let axis = GridAxis { min, max, points };
        axis.validate()?;
        Ok(axis)
    }

    /// Symmetric box `[-half_width, half_width]`.
    pub fn symmetric(half_width: f64, points: usize) -> Result<Self> {
        GridAxis::new(-half_width, half_width, points)
    }

    pub fn validate(&self) -> Result<()> {
        if !(self.min.is_finite() && self.max.is_finite()) || self.max <= self.min {
            return input(format!("axis needs finite max > min, got [{}, {}]", self.min, self.max));
        }
        if self.points < 2 {
            return input(format!("axis needs at least 2 points, got {}", self.points));
        }
        Ok(())
    }

    pub fn delta(&self) -> f64 {
        (self.max - self.min) / self.points as f64
    }

    pub fn node(&self, i: usize) -> f64 {
        self.min + (i as f64 + 0.5) * self.delta()
    }
}

/// Wavefunction sampled on a product quadrature grid.
#[derive(Debug, Clone, PartialEq)]
pub struct GridState {
    rule: ProductRule,
    amplitudes: Vec<Complex64>,
}

impl GridState {
    /// Midpoint-grid state. Fails unless the discrete norm is 1 within
    /// [`NORM_TOLERANCE`].
    pub fn new(axes: Vec<GridAxis>, amplitudes: Vec<Complex64>) -> Result<Self> {
        for a in &axes {
            a.validate()?;
        }
        GridState::on_rule(ProductRule::midpoint(&axes)?, amplitudes)
    }

    pub fn on_rule(rule: ProductRule, amplitudes: Vec<Complex64>) -> Result<Self> {
        let state = GridState::unchecked(rule, amplitudes)?;
        let defect = (state.norm_squared() - 1.0).abs();
        if !(defect <= NORM_TOLERANCE) {
            return Err(Error::InvalidState(format!(
                "discrete norm deviates from 1 by {defect:.3e}"
            )));
        }
        Ok(state)
    }

    /// Rescales `amplitudes` to unit discrete norm.
    pub fn normalized(rule: ProductRule, mut amplitudes: Vec<Complex64>) -> Result<Self> {
        let mass = GridState::unchecked(rule.clone(), amplitudes.clone())?.norm_squared();
        if !(mass > 0.0 && mass.is_finite()) {
            return Err(Error::Degenerate(format!("cannot normalize a state of mass {mass}")));
        }
        let s = 1.0 / mass.sqrt();
        amplitudes.iter_mut().for_each(|a| *a *= s);
        GridState::on_rule(rule, amplitudes)
    }

    /// Shape and finiteness checks only; the norm is not enforced.
    pub fn unchecked(rule: ProductRule, amplitudes: Vec<Complex64>) -> Result<Self> {
        if amplitudes.len() != rule.total_nodes() {
            return input(format!(
                "expected {} amplitudes for shape {:?}, got {}",
                rule.total_nodes(),
                rule.shape(),
                amplitudes.len()
            ));
        }
        if amplitudes.iter().any(|a| !(a.re.is_finite() && a.im.is_finite())) {
            return input("amplitudes must be finite");
        }
        Ok(GridState { rule, amplitudes })
    }

    pub fn rule(&self) -> &ProductRule {
        &self.rule
    }

    pub fn amplitudes(&self) -> &[Complex64] {
        &self.amplitudes
    }

    pub fn n_axes(&self) -> usize {
        self.rule.dims()
    }

    pub fn shape(&self) -> Vec<usize> {
        self.rule.shape()
    }

    pub fn len(&self) -> usize {
        self.amplitudes.len()
    }

    pub fn is_empty(&self) -> bool {
        self.amplitudes.is_empty()
    }

    pub fn weights(&self) -> Vec<f64> {
        self.rule.weights()
    }

    pub fn norm_squared(&self) -> f64 {
        let terms: Vec<f64> = self
            .amplitudes
            .iter()
            .zip(self.rule.weights())
            .map(|(a, w)| a.norm_sqr() * w)
            .collect();
        pairwise_sum(&terms)
    }

    pub fn linear_index(&self, index: &[usize]) -> Result<usize> {
        let shape = self.shape();
        if index.len() != shape.len() {
            return input(format!("expected {} indices, got {}", shape.len(), index.len()));
        }
        let mut lin = 0;
        for (k, (&i, &n)) in index.iter().zip(&shape).enumerate() {
            if i >= n {
                return input(format!("index {i} out of range 0..{n} on axis {k}"));
            }
            lin = lin * n + i;
        }
        Ok(lin)
    }

    /// Amplitude at the node with the given per-axis indices.
    pub fn evaluate_grid(&self, index: &[usize]) -> Result<Complex64> {
        Ok(self.amplitudes[self.linear_index(index)?])
    }

    /// Same state with every amplitude multiplied by `f(linear index)`.
    pub fn map_amplitudes(&self, f: impl Fn(usize, Complex64) -> Complex64) -> Result<GridState> {
        let amps = self.amplitudes.iter().enumerate().map(|(i, &a)| f(i, a)).collect();
        GridState::unchecked(self.rule.clone(), amps)
    }
}

/// `ψ(x) = 𝒩 exp(-½ xᵀA x)` with complex symmetric `A` and positive-definite `Re(A)`.
#[derive(Debug, Clone)]
pub struct GaussianPureState {
    precision: Mat<Complex64>,
    normalization: f64,
}

impl GaussianPureState {
    pub fn new(precision: Mat<Complex64>) -> Result<Self> {
        let n = precision.nrows();
        if n == 0 || precision.ncols() != n {
            return input(format!(
                "precision matrix must be square and non-empty, got {}x{}",
                precision.nrows(),
                precision.ncols()
            ));
        }
        let scale = (0..n)
            .flat_map(|i| (0..n).map(move |j| (i, j)))
            .map(|(i, j)| precision[(i, j)].norm())
            .fold(1.0f64, f64::max);
        for i in 0..n {
            for j in 0..n {
                let a = precision[(i, j)];
                if !(a.re.is_finite() && a.im.is_finite()) {
                    return input("precision matrix entries must be finite");
                }
                if (a - precision[(j, i)]).norm() > 1e-12 * scale {
                    return input(format!("precision matrix is not symmetric at ({i}, {j})"));
                }
            }
        }
        let re = Mat::<f64>::from_fn(n, n, |i, j| precision[(i, j)].re);
        if re.llt(Side::Lower).is_err() {
            return input("Re(A) is not positive definite; the state is not normalizable");
        }
        let det = linalg::determinant(&re);
        let normalization = (det / std::f64::consts::PI.powi(n as i32)).powf(0.25);
        Ok(GaussianPureState {
            precision,
            normalization,
        })
    }

    /// Precision matrix from the diagonal `a_k` and upper-triangle couplings
    /// `c_kj` of the exponent `a_k x_k² + Σ_{j>k} c_kj x_k x_j`.
    pub fn from_couplings(diagonal: &[f64], couplings: &[(usize, usize, Complex64)]) -> Result<Self> {
        let n = diagonal.len();
        let mut a = Mat::<Complex64>::from_fn(n, n, |i, j| {
            if i == j {
                Complex64::new(diagonal[i], 0.0)
            } else {
                Complex64::new(0.0, 0.0)
            }
        });
        for &(k, j, c) in couplings {
            if k >= n || j >= n || k == j {
                return input(format!("invalid coupling index ({k}, {j}) for n = {n}"));
            }
            a[(k, j)] += c / 2.0;
            a[(j, k)] += c / 2.0;
        }
        GaussianPureState::new(a)
    }

    /// `ψ(x₁, x₂) ∝ exp(-½(a x₁² + b x₂² + c x₁x₂))`.
    pub fn two_mode(a: f64, b: f64, c: Complex64) -> Result<Self> {
        GaussianPureState::from_couplings(&[a, b], &[(0, 1, c)])
    }

    pub fn n(&self) -> usize {
        self.precision.nrows()
    }

    pub fn precision(&self) -> &Mat<Complex64> {
        &self.precision
    }

    /// `(det Re(A) / πⁿ)^{1/4}`.
    pub fn normalization(&self) -> f64 {
        self.normalization
    }

    pub fn real_part(&self) -> Mat<f64> {
        let n = self.n();
        Mat::from_fn(n, n, |i, j| self.precision[(i, j)].re)
    }

    pub fn imag_part(&self) -> Mat<f64> {
        let n = self.n();
        Mat::from_fn(n, n, |i, j| self.precision[(i, j)].im)
    }

    /// Ratio of extreme eigenvalues of `Re(A)`.
    pub fn condition_number(&self) -> Result<f64> {
        let ev = linalg::symmetric_eigenvalues(&self.real_part())?;
        Ok(ev[ev.len() - 1] / ev[0])
    }

    pub fn evaluate(&self, x: &[f64]) -> Result<Complex64> {
        if x.len() != self.n() {
            return input(format!("expected {} coordinates, got {}", self.n(), x.len()));
        }
        Ok(self.evaluate_unchecked(x))
    }

    pub(crate) fn evaluate_unchecked(&self, x: &[f64]) -> Complex64 {
        let n = self.n();
        let mut q = Complex64::new(0.0, 0.0);
        for i in 0..n {
            let mut row = Complex64::new(0.0, 0.0);
            for j in 0..n {
                row += self.precision[(i, j)] * x[j];
            }
            q += row * x[i];
        }
        (-0.5 * q).exp() * self.normalization
    }
}

/// Free-function form of [`GaussianPureState::evaluate`].
pub fn evaluate_gaussian(state: &GaussianPureState, x: &[f64]) -> Result<Complex64> {
    state.evaluate(x)
}

/// Free-function form of [`GridState::evaluate_grid`].
pub fn evaluate_grid(state: &GridState, index: &[usize]) -> Result<Complex64> {
    state.evaluate_grid(index)
}

/// A Gaussian sampled on a grid, with the diagnostics of the sampling.
#[derive(Debug, Clone)]
pub struct Discretized {
    pub state: GridState,
    /// `|1 - Σ|ψ(xᵢ)|² wᵢ|` before renormalization.
    pub mass_defect: f64,
    pub condition_number: f64,
    pub warnings: Vec<String>,
}

/// Samples `state` at the midpoint nodes of `axes` and renormalizes.
pub fn discretize(state: &GaussianPureState, axes: &[GridAxis]) -> Result<Discretized> {
    if axes.len() != state.n() {
        return input(format!("expected {} axes, got {}", state.n(), axes.len()));
    }
    for a in axes {
        a.validate()?;
    }
    sample_on_rule(state, &ProductRule::midpoint(axes)?)
}

/// Samples `state` at the nodes of an arbitrary product rule and renormalizes.
pub fn sample_on_rule(state: &GaussianPureState, rule: &ProductRule) -> Result<Discretized> {
    if rule.dims() != state.n() {
        return input(format!("expected a {}-axis rule, got {}", state.n(), rule.dims()));
    }
    let raw: Vec<Complex64> = (0..rule.total_nodes())
        .map(|i| state.evaluate_unchecked(&rule.coordinates(i)))
        .collect();
    let mass = GridState::unchecked(rule.clone(), raw.clone())?.norm_squared();
    let mass_defect = (1.0 - mass).abs();
    let condition_number = state.condition_number()?;
    let mut warnings = Vec::new();
    if mass_defect > TRUNCATION_WARNING {
        warnings.push(format!(
            "truncation: grid captures {mass:.6} of the probability mass (defect {mass_defect:.3e}); enlarge the domain"
        ));
    }
    if condition_number > CONDITION_WARNING {
        warnings.push(format!(
            "conditioning: Re(A) has condition number {condition_number:.1}; the density is a narrow ridge"
        ));
    }
    Ok(Discretized {
        state: GridState::normalized(rule.clone(), raw)?,
        mass_defect,
        condition_number,
        warnings,
    })
}

/// The subset `M` of degrees of freedom; `M̄` is always derived.
#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub struct Bipartition {
    n: usize,
    members: Vec<usize>,
}

impl Bipartition {
    pub fn new(n: usize, members: impl IntoIterator<Item = usize>) -> Result<Self> {
        let mut members: Vec<usize> = members.into_iter().collect();
        members.sort_unstable();
        members.dedup();
        if let Some(&bad) = members.iter().find(|&&k| k >= n) {
            return input(format!("axis {bad} out of range for n = {n}"));
        }
        if members.is_empty() || members.len() >= n {
            return input(format!(
                "bipartition needs 1 <= |M| <= n - 1, got |M| = {} with n = {n}",
                members.len()
            ));
        }
        Ok(Bipartition { n, members })
    }

    /// Comma-separated zero-based axis indices, e.g. `"0,2"`.
    pub fn parse(spec: &str, n: usize) -> Result<Self> {
        let members = spec
            .split(',')
            .map(|s| {
                s.trim()
                    .parse::<usize>()
                    .map_err(|_| Error::Input(format!("bad axis index {s:?} in {spec:?}")))
            })
            .collect::<Result<Vec<_>>>()?;
        Bipartition::new(n, members)
    }

    pub fn n(&self) -> usize {
        self.n
    }

    pub fn members(&self) -> &[usize] {
        &self.members
    }

    pub fn contains(&self, axis: usize) -> bool {
        self.members.binary_search(&axis).is_ok()
    }

    pub fn complement_members(&self) -> Vec<usize> {
        (0..self.n).filter(|k| !self.contains(*k)).collect()
    }

    /// The bipartition with `M` and `M̄` exchanged.
    pub fn complement(&self) -> Bipartition {
        Bipartition {
            n: self.n,
            members: self.complement_members(),
        }
    }

    pub fn check_state(&self, state: &GridState) -> Result<()> {
        if state.n_axes() != self.n {
            return input(format!(
                "bipartition is for {} axes but the state has {}",
                self.n,
                state.n_axes()
            ));
        }
        Ok(())
    }
}

/// Selector matrices: `𝕄` (diagonal 0/1 over `M`) and `ℕ₁ = [𝟙 0]`, `ℕ₂ = [0 𝟙]`.
#[derive(Debug, Clone)]
pub struct ProjectionMasks {
    pub m_mask: Mat<f64>,
    pub n1: Mat<f64>,
    pub n2: Mat<f64>,
}

pub fn build_masks(bipartition: &Bipartition) -> ProjectionMasks {
    let n = bipartition.n();
    let one = |b: bool| if b { 1.0 } else { 0.0 };
    ProjectionMasks {
        m_mask: Mat::from_fn(n, n, |i, j| one(i == j && bipartition.contains(i))),
        n1: Mat::from_fn(n, 2 * n, |i, j| one(j == i)),
        n2: Mat::from_fn(n, 2 * n, |i, j| one(j == i + n)),
    }
}

/// Index bookkeeping between a full grid and its `M` / `M̄` blocks.
///
/// Block indices are row-major over the block's axes taken in increasing
/// axis order, so `M` need not be contiguous.
#[derive(Debug, Clone)]
pub struct BlockLayout {
    m_size: usize,
    rest_size: usize,
    split: Vec<(usize, usize)>,
    join: Vec<usize>,
}

impl BlockLayout {
    pub fn new(shape: &[usize], bipartition: &Bipartition) -> Result<Self> {
        if shape.len() != bipartition.n() {
            return input(format!(
                "bipartition is for {} axes but the grid has {}",
                bipartition.n(),
                shape.len()
            ));
        }
        let m_axes = bipartition.members();
        let rest_axes = bipartition.complement_members();
        let m_size: usize = m_axes.iter().map(|&k| shape[k]).product();
        let rest_size: usize = rest_axes.iter().map(|&k| shape[k]).product();
        let total = m_size * rest_size;
        let mut split = Vec::with_capacity(total);
        let mut join = vec![0; total];
        let mut idx = vec![0usize; shape.len()];
        for lin in 0..total {
            let mut rem = lin;
            for k in (0..shape.len()).rev() {
                idx[k] = rem % shape[k];
                rem /= shape[k];
            }
            let block = |axes: &[usize]| axes.iter().fold(0, |acc, &k| acc * shape[k] + idx[k]);
            let (im, ir) = (block(m_axes), block(&rest_axes));
            split.push((im, ir));
            join[im * rest_size + ir] = lin;
        }
        Ok(BlockLayout {
            m_size,
            rest_size,
            split,
            join,
        })
    }

    pub fn for_state(state: &GridState, bipartition: &Bipartition) -> Result<Self> {
        bipartition.check_state(state)?;
        BlockLayout::new(&state.shape(), bipartition)
    }

    pub fn m_size(&self) -> usize {
        self.m_size
    }

    pub fn rest_size(&self) -> usize {
        self.rest_size
    }

    pub fn total(&self) -> usize {
        self.split.len()
    }

    /// `(M index, M̄ index)` of a full linear index.
    pub fn split(&self, linear: usize) -> (usize, usize) {
        self.split[linear]
    }

    pub fn join(&self, m: usize, rest: usize) -> usize {
        self.join[m * self.rest_size + rest]
    }
}

/// Amplitudes reshaped to `φ[y][x̄]` with `y ∈ M`, `x̄ ∈ M̄`, plus block weights.
#[derive(Debug, Clone)]
pub struct BipartiteAmplitudes {
    pub m_size: usize,
    pub rest_size: usize,
    /// Row-major `m_size × rest_size`.
    pub psi: Vec<Complex64>,
    pub m_weights: Vec<f64>,
    pub rest_weights: Vec<f64>,
}

impl BipartiteAmplitudes {
    pub fn new(state: &GridState, bipartition: &Bipartition) -> Result<Self> {
        let layout = BlockLayout::for_state(state, bipartition)?;
        let block_weights = |axes: &[usize]| {
            let mut out = vec![1.0];
            for &k in axes {
                let w = state.rule().axes()[k].weights();
                out = out.iter().flat_map(|&a| w.iter().map(move |&b| a * b)).collect();
            }
            out
        };
        let mut psi = vec![Complex64::new(0.0, 0.0); layout.total()];
        for (lin, &a) in state.amplitudes().iter().enumerate() {
            let (im, ir) = layout.split(lin);
            psi[im * layout.rest_size() + ir] = a;
        }
        Ok(BipartiteAmplitudes {
            m_size: layout.m_size(),
            rest_size: layout.rest_size(),
            psi,
            m_weights: block_weights(bipartition.members()),
            rest_weights: block_weights(&bipartition.complement_members()),
        })
    }

    /// The vector `⟨y|ψ⟩` over `M̄`.
    pub fn slice(&self, y: usize) -> &[Complex64] {
        &self.psi[y * self.rest_size..(y + 1) * self.rest_size]
    }

    pub fn at(&self, y: usize, x: usize) -> Complex64 {
        self.psi[y * self.rest_size + x]
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use std::f64::consts::PI;

    fn c(re: f64) -> Complex64 {
        Complex64::new(re, 0.0)
    }

    #[test]
    fn axis_nodes_are_midpoints() {
        let a = GridAxis::new(-1.0, 1.0, 4).unwrap();
        assert_eq!(a.delta(), 0.5);
        assert_eq!(a.node(0), -0.75);
        assert_eq!(a.node(3), 0.75);
        assert!(GridAxis::new(1.0, 1.0, 4).is_err());
        assert!(GridAxis::new(0.0, 1.0, 1).is_err());
    }

    #[test]
    fn single_node_mass_sets_amplitude() {
        let a = GridAxis::new(0.0, 1.0, 4).unwrap();
        let b = GridAxis::new(0.0, 3.0, 2).unwrap();
        let mut amps = vec![c(0.0); 8];
        let value = 1.0 / (a.delta() * b.delta()).sqrt();
        amps[5] = c(value);
        let s = GridState::new(vec![a, b], amps).unwrap();
        assert_eq!(s.evaluate_grid(&[2, 1]).unwrap(), c(value));
        assert!(s.evaluate_grid(&[4, 0]).is_err());
        assert!(s.evaluate_grid(&[0]).is_err());
    }

    #[test]
    fn product_state_is_row_major() {
        let a = GridAxis::new(0.0, 1.0, 3).unwrap();
        let f = [1.0, 2.0, 3.0];
        let g = [0.5, -1.0, 4.0];
        let amps: Vec<Complex64> = f.iter().flat_map(|&fi| g.iter().map(move |&gj| c(fi * gj))).collect();
        let s = GridState::normalized(ProductRule::midpoint(&[a, a]).unwrap(), amps).unwrap();
        let scale = s.evaluate_grid(&[0, 0]).unwrap().re / (f[0] * g[0]);
        for i in 0..3 {
            for j in 0..3 {
                let v = s.evaluate_grid(&[i, j]).unwrap().re;
                assert!((v - scale * f[i] * g[j]).abs() < 1e-15);
            }
        }
    }

    #[test]
    fn unnormalized_state_is_rejected() {
        let a = GridAxis::new(0.0, 1.0, 2).unwrap();
        let err = GridState::new(vec![a, a], vec![c(0.9); 4]).unwrap_err();
        assert!(matches!(err, Error::InvalidState(_)));
    }

    #[test]
    fn gaussian_normalization_matches_two_mode_branches() {
        let s = GaussianPureState::two_mode(1.0, 1.0, c(0.0)).unwrap();
        let v = s.evaluate(&[0.0, 0.0]).unwrap();
        assert!((v.re - PI.powf(-0.5)).abs() < 1e-15);
        assert!((v.re - 0.5642).abs() < 1e-4);
        // real branch: [2π/√(4ab - c²)]^{-1/2}
        let s = GaussianPureState::two_mode(1.0, 1.0, c(1.0)).unwrap();
        let expected = (2.0 * PI / 3.0f64.sqrt()).powf(-0.5);
        assert!((s.evaluate(&[0.0, 0.0]).unwrap().re - expected).abs() < 1e-15);
        assert!((expected - 0.5250).abs() < 1e-4);
        // imaginary branch: (π/√(ab))^{-1/2}, independent of m
        let s = GaussianPureState::two_mode(2.0, 0.5, Complex64::new(0.0, 3.0)).unwrap();
        assert!((s.normalization() - PI.powf(-0.5)).abs() < 1e-15);
    }

    #[test]
    fn gaussian_rejects_non_pd_and_asymmetric() {
        assert!(GaussianPureState::two_mode(1.0, 1.0, c(2.0)).is_err());
        assert!(GaussianPureState::two_mode(-1.0, 1.0, c(0.0)).is_err());
        let mut a = Mat::<Complex64>::from_fn(2, 2, |i, j| if i == j { c(1.0) } else { c(0.1) });
        a[(0, 1)] = c(0.2);
        assert!(GaussianPureState::new(a).is_err());
    }

    #[test]
    fn gaussian_is_even_and_decays_along_rays() {
        let s = GaussianPureState::two_mode(1.3, 0.7, Complex64::new(0.4, 0.0)).unwrap();
        let x = [0.3, -1.1];
        let v = s.evaluate(&x).unwrap();
        assert_eq!(v, s.evaluate(&[-0.3, 1.1]).unwrap());
        let mut prev = f64::INFINITY;
        for t in 1..20 {
            let m = s.evaluate(&[0.3 * t as f64, -1.1 * t as f64]).unwrap().norm();
            assert!(m < prev);
            prev = m;
        }
    }

    #[test]
    fn discretize_samples_exactly_then_renormalizes() {
        let g = GaussianPureState::two_mode(1.0, 1.0, c(0.0)).unwrap();
        let axes = [GridAxis::symmetric(6.0, 64).unwrap(); 2];
        let d = discretize(&g, &axes).unwrap();
        assert!(d.mass_defect < 1e-12, "{}", d.mass_defect);
        assert!(d.warnings.is_empty());
        assert!((d.state.norm_squared() - 1.0).abs() < 1e-12);
        // before renormalization the sample equals the analytic value
        let scale = (1.0 - d.mass_defect).sqrt();
        let node = [axes[0].node(10), axes[1].node(40)];
        let sampled = d.state.evaluate_grid(&[10, 40]).unwrap() * scale;
        assert!((sampled - g.evaluate(&node).unwrap()).norm() < 1e-15);
    }

    #[test]
    fn discretize_flags_ridge_states() {
        let g = GaussianPureState::two_mode(1.0, 1.0, c(1.99)).unwrap();
        let d = discretize(&g, &[GridAxis::symmetric(6.0, 64).unwrap(); 2]).unwrap();
        assert!(d.condition_number > CONDITION_WARNING);
        assert!(d.warnings.iter().any(|w| w.starts_with("conditioning")));
        // the marginal standard deviation is about 7, far beyond the box
        assert!(d.mass_defect > TRUNCATION_WARNING);
        assert!((d.state.norm_squared() - 1.0).abs() < 1e-12);
    }

    #[test]
    fn degenerate_axes_still_produce_valid_state() {
        let g = GaussianPureState::two_mode(1.0, 1.0, c(0.0)).unwrap();
        let d = discretize(&g, &[GridAxis::new(0.0, 1.0, 2).unwrap(); 2]).unwrap();
        assert!((d.state.norm_squared() - 1.0).abs() < 1e-12);
        assert!(!d.warnings.is_empty());
    }

    #[test]
    fn masks_follow_members() {
        let m = build_masks(&Bipartition::new(2, [0]).unwrap());
        assert_eq!(m.m_mask[(0, 0)], 1.0);
        assert_eq!(m.m_mask[(1, 1)], 0.0);
        let m = build_masks(&Bipartition::new(3, [0, 2]).unwrap());
        let diag: Vec<f64> = (0..3).map(|i| m.m_mask[(i, i)]).collect();
        assert_eq!(diag, vec![1.0, 0.0, 1.0]);
        let sq = &m.m_mask * &m.m_mask;
        assert_eq!(sq, m.m_mask);
        let x: Mat<f64> = Mat::from_fn(6, 1, |i, _| i as f64);
        let first = &m.n1 * &x;
        let second = &m.n2 * &x;
        assert_eq!((0..3).map(|i| first[(i, 0)]).collect::<Vec<_>>(), vec![0.0, 1.0, 2.0]);
        assert_eq!((0..3).map(|i| second[(i, 0)]).collect::<Vec<_>>(), vec![3.0, 4.0, 5.0]);
    }

    #[test]
    fn bipartition_validation() {
        assert!(Bipartition::new(2, [0, 1]).is_err());
        assert!(Bipartition::new(2, []).is_err());
        assert!(Bipartition::new(2, [2]).is_err());
        assert!(Bipartition::new(1, [0]).is_err());
        let b = Bipartition::parse(" 2,0", 3).unwrap();
        assert_eq!(b.members(), &[0, 2]);
        assert_eq!(b.complement_members(), vec![1]);
        assert!(Bipartition::parse("0,x", 3).is_err());
    }

    #[test]
    fn block_layout_round_trips_non_contiguous() {
        let b = Bipartition::new(3, [0, 2]).unwrap();
        let layout = BlockLayout::new(&[2, 3, 4], &b).unwrap();
        assert_eq!(layout.m_size(), 8);
        assert_eq!(layout.rest_size(), 3);
        for lin in 0..24 {
            let (m, r) = layout.split(lin);
            assert_eq!(layout.join(m, r), lin);
        }
        // (i0, i1, i2) = (1, 2, 3) → lin = 1*12 + 2*4 + 3 = 23; M index = 1*4 + 3 = 7, rest = 2
        assert_eq!(layout.split(23), (7, 2));
    }
}
