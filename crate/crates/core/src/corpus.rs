//! Seeded random states for tests, the acceptance suite and the CLI.
//!
//! Every generator takes an explicit RNG or seed, so a corpus is fully
//! determined by its seed.

use faer::Mat;
use num_complex::Complex64;
use rand::Rng;
use rand_chacha::rand_core::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rand_distr::StandardNormal;

use crate::concurrence::tensor_product;
use crate::error::{input, Result};
use crate::quadrature::ProductRule;
use crate::state::{Bipartition, GaussianPureState, GridAxis, GridState};
use crate::wigner::DoubledPoint;

pub const MIN_CORPUS_POINTS: usize = 8;
pub const MAX_CORPUS_POINTS: usize = 24;
/// Relative size of the entangling term in [`CorpusKind::PerturbedProduct`].
pub const PERTURBATION: f64 = 0.1;

pub fn rng_from_seed(seed: u64) -> ChaCha8Rng {
    ChaCha8Rng::seed_from_u64(seed)
}

fn normal(rng: &mut impl Rng) -> f64 {
    rng.sample(StandardNormal)
}

pub fn complex_normal(rng: &mut impl Rng) -> Complex64 {
    Complex64::new(normal(rng), normal(rng))
}

pub fn random_vector(rng: &mut impl Rng, len: usize) -> Vec<Complex64> {
    (0..len).map(|_| complex_normal(rng)).collect()
}

/// Axis with `points` nodes on a box `[-u, v]`, `u, v ∈ [2, 6]`.
pub fn random_axis(rng: &mut impl Rng, points: usize) -> Result<GridAxis> {
    let lo = -rng.random_range(2.0..6.0);
    let hi = rng.random_range(2.0..6.0);
    GridAxis::new(lo, hi, points)
}

/// `count` axes with `min..=max` points each.
pub fn random_axes(rng: &mut impl Rng, count: usize, min: usize, max: usize) -> Result<Vec<GridAxis>> {
    if min < 2 || max < min {
        return input(format!("invalid point range {min}..={max}"));
    }
    (0..count)
        .map(|_| {
            let p = rng.random_range(min..=max);
            random_axis(rng, p)
        })
        .collect()
}

/// Normalized state with i.i.d. complex Gaussian amplitudes.
pub fn random_grid_state(rng: &mut impl Rng, axes: &[GridAxis]) -> Result<GridState> {
    let rule = ProductRule::midpoint(axes)?;
    let amps = random_vector(rng, rule.total_nodes());
    GridState::normalized(rule, amps)
}

fn sub_rule(axes: &[GridAxis], members: &[usize]) -> Result<ProductRule> {
    ProductRule::midpoint(&members.iter().map(|&k| axes[k]).collect::<Vec<_>>())
}

/// Normalized `f ⊗ g` with random factors on `M` and `M̄`.
pub fn random_product_state(
    rng: &mut impl Rng,
    axes: &[GridAxis],
    bipartition: &Bipartition,
) -> Result<GridState> {
    if axes.len() != bipartition.n() {
        return input("axes and bipartition disagree on the number of degrees of freedom");
    }
    let m_rule = sub_rule(axes, bipartition.members())?;
    let r_rule = sub_rule(axes, &bipartition.complement_members())?;
    let f = random_vector(rng, m_rule.total_nodes());
    let g = random_vector(rng, r_rule.total_nodes());
    let f = GridState::normalized(m_rule, f)?;
    let g = GridState::normalized(r_rule, g)?;
    let p = tensor_product(&f, &g, bipartition)?;
    GridState::normalized(p.rule().clone(), p.amplitudes().to_vec())
}

/// Normalized 2-axis state `Σ_{k<rank} u_k(y) v_k(x)` with random `u_k`, `v_k`.
pub fn schmidt_state(rng: &mut impl Rng, axes: &[GridAxis; 2], rank: usize) -> Result<GridState> {
    if rank == 0 || rank > axes[0].points.min(axes[1].points) {
        return input(format!("rank {rank} does not fit a {}x{} grid", axes[0].points, axes[1].points));
    }
    let (ny, nx) = (axes[0].points, axes[1].points);
    let u: Vec<Vec<Complex64>> = (0..rank).map(|_| random_vector(rng, ny)).collect();
    let v: Vec<Vec<Complex64>> = (0..rank).map(|_| random_vector(rng, nx)).collect();
    let amps = (0..ny * nx)
        .map(|lin| {
            let (y, x) = (lin / nx, lin % nx);
            (0..rank).map(|k| u[k][y] * v[k][x]).sum()
        })
        .collect();
    GridState::normalized(ProductRule::midpoint(axes)?, amps)
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum CorpusKind {
    Random,
    Product,
    Schmidt(usize),
    PerturbedProduct,
}

impl CorpusKind {
    /// Whether the generator produces a product state by construction.
    pub fn is_product(&self) -> bool {
        matches!(self, CorpusKind::Product)
    }
}

#[derive(Debug, Clone)]
pub struct CorpusState {
    pub kind: CorpusKind,
    pub seed: u64,
    pub state: GridState,
}

fn entry_seed(seed: u64, i: usize) -> u64 {
    seed.wrapping_mul(0x9E37_79B9_7F4A_7C15).wrapping_add(i as u64)
}

/// Two-axis corpus cycling random, product, Schmidt rank 2–4 and perturbed
/// product states, with 8–24 points per axis on random boxes. `M = {0}`.
pub fn two_axis_corpus(seed: u64, count: usize) -> Result<Vec<CorpusState>> {
    let bip = Bipartition::new(2, [0])?;
    (0..count)
        .map(|i| {
            let s = entry_seed(seed, i);
            let mut rng = rng_from_seed(s);
            let axes = random_axes(&mut rng, 2, MIN_CORPUS_POINTS, MAX_CORPUS_POINTS)?;
            let (kind, state) = match i % 4 {
                0 => (CorpusKind::Random, random_grid_state(&mut rng, &axes)?),
                1 => (CorpusKind::Product, random_product_state(&mut rng, &axes, &bip)?),
                2 => {
                    let rank = rng.random_range(2..=4);
                    (CorpusKind::Schmidt(rank), schmidt_state(&mut rng, &[axes[0], axes[1]], rank)?)
                }
                _ => {
                    let p = random_product_state(&mut rng, &axes, &bip)?;
                    let noise = random_grid_state(&mut rng, &axes)?;
                    let amps = p
                        .amplitudes()
                        .iter()
                        .zip(noise.amplitudes())
                        .map(|(a, b)| a + b * PERTURBATION)
                        .collect();
                    (CorpusKind::PerturbedProduct, GridState::normalized(p.rule().clone(), amps)?)
                }
            };
            Ok(CorpusState { kind, seed: s, state })
        })
        .collect()
}

/// Product states on `n ∈ {2, 3}` axes with a random bipartition, often
/// non-contiguous for `n = 3`. Axes have 3–6 points.
pub fn product_corpus(seed: u64, count: usize) -> Result<Vec<(GridState, Bipartition)>> {
    (0..count)
        .map(|i| {
            let mut rng = rng_from_seed(entry_seed(seed, i));
            let n = 2 + i % 2;
            let axes = random_axes(&mut rng, n, 3, 6)?;
            let bip = random_bipartition(&mut rng, n)?;
            Ok((random_product_state(&mut rng, &axes, &bip)?, bip))
        })
        .collect()
}

/// A uniformly chosen proper non-empty subset of `0..n`.
pub fn random_bipartition(rng: &mut impl Rng, n: usize) -> Result<Bipartition> {
    if n < 2 {
        return input("a bipartition needs at least two degrees of freedom");
    }
    let mask = rng.random_range(1..(1u64 << n) - 1);
    Bipartition::new(n, (0..n).filter(|k| mask >> k & 1 == 1))
}

/// Gaussian with `Re A = BBᵀ + I` and symmetric `Im A` of i.i.d. normal
/// entries. With `separable_for`, couplings across the bipartition are zero.
pub fn random_gaussian(
    rng: &mut impl Rng,
    n: usize,
    separable_for: Option<&Bipartition>,
) -> Result<GaussianPureState> {
    let b = Mat::<f64>::from_fn(n, n, |_, _| normal(rng) / (n as f64).sqrt());
    let bbt = &b * b.transpose();
    let mut im = Mat::<f64>::zeros(n, n);
    for i in 0..n {
        for j in i..n {
            let v = normal(rng) * 0.5;
            im[(i, j)] = v;
            im[(j, i)] = v;
        }
    }
    let cut = |i: usize, j: usize| separable_for.is_some_and(|bip| bip.contains(i) != bip.contains(j));
    let a = Mat::<Complex64>::from_fn(n, n, |i, j| {
        if cut(i, j) {
            Complex64::new(0.0, 0.0)
        } else {
            let diag = if i == j { 1.0 } else { 0.0 };
            Complex64::new(bbt[(i, j)] + diag, im[(i, j)])
        }
    });
    GaussianPureState::new(a)
}

/// Doubled phase-space points with i.i.d. `N(0, spread²)` coordinates.
pub fn random_doubled_points(rng: &mut impl Rng, n: usize, count: usize, spread: f64) -> Vec<DoubledPoint> {
    (0..count)
        .map(|_| DoubledPoint {
            x: (0..2 * n).map(|_| spread * normal(rng)).collect(),
            p: (0..2 * n).map(|_| spread * normal(rng)).collect(),
        })
        .collect()
}
