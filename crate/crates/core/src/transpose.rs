//! The doubled-space permutation `Λ_m`, `ρ̃`, partial transposes and the
//! operator routes D and E.
//!
//! Operators on a grid are stored as matrices with symmetric weighting
//! `Kᵢⱼ = √wᵢ k(xᵢ, xⱼ) √wⱼ`, so Hermitian kernels give Hermitian matrices and
//! matrix traces, products and eigenvalues approximate those of the operator.

use faer::Mat;
use num_complex::Complex64;
use serde::Serialize;

use crate::error::{Error, Result};
use crate::linalg;
use crate::quadrature::pairwise_sum;
use crate::state::{build_masks, Bipartition, BlockLayout, GridState};

/// Allowed negative radicand in route E before it is reported as an error.
pub const RADICAND_TOLERANCE: f64 = 1e-12;
/// Largest anti-Hermitian residual of `ρ_PT` accepted before eigensolving.
pub const HERMITIAN_RESIDUAL_LIMIT: f64 = 1e-12;

/// `Λ_m` acting on pairs of linear grid indices: the `M` components of the
/// two copies are exchanged.
#[derive(Debug, Clone)]
pub struct LambdaPermutation {
    layout: BlockLayout,
}

impl LambdaPermutation {
    pub fn new(shape: &[usize], bipartition: &Bipartition) -> Result<Self> {
        Ok(LambdaPermutation {
            layout: BlockLayout::new(shape, bipartition)?,
        })
    }

    pub fn for_state(state: &GridState, bipartition: &Bipartition) -> Result<Self> {
        Ok(LambdaPermutation {
            layout: BlockLayout::for_state(state, bipartition)?,
        })
    }

    /// Number of nodes of one copy of the grid.
    pub fn grid_len(&self) -> usize {
        self.layout.total()
    }

    pub fn apply(&self, i1: usize, i2: usize) -> (usize, usize) {
        let (m1, r1) = self.layout.split(i1);
        let (m2, r2) = self.layout.split(i2);
        (self.layout.join(m2, r1), self.layout.join(m1, r2))
    }

    /// Action on a doubled-grid linear index `i1·N + i2`.
    pub fn apply_linear(&self, k: usize) -> usize {
        let n = self.grid_len();
        let (j1, j2) = self.apply(k / n, k % n);
        j1 * n + j2
    }

    /// Exhaustive check that `Λ_m² = 𝟙` on every doubled-grid index.
    pub fn is_involution(&self) -> bool {
        let n = self.grid_len();
        (0..n * n).all(|k| self.apply_linear(self.apply_linear(k)) == k)
    }
}

/// The `2n × 2n` matrix `[[𝟙-𝕄, 𝕄], [𝕄, 𝟙-𝕄]]`.
pub fn lambda_matrix(bipartition: &Bipartition) -> Mat<f64> {
    let n = bipartition.n();
    let masks = build_masks(bipartition);
    Mat::from_fn(2 * n, 2 * n, |i, j| {
        let (bi, bj) = (i / n, j / n);
        let (ii, jj) = (i % n, j % n);
        let m = masks.m_mask[(ii, jj)];
        if bi == bj {
            if ii == jj {
                1.0 - m
            } else {
                0.0
            }
        } else {
            m
        }
    })
}

/// `Λ_m X` for a doubled coordinate vector `X = (x₁, x₂)`.
pub fn lambda_coordinates(bipartition: &Bipartition, x: &[f64]) -> Vec<f64> {
    let n = bipartition.n();
    let mut out = x.to_vec();
    for &k in bipartition.members() {
        out.swap(k, k + n);
    }
    out
}

/// Weighted matrix of a kernel over linearized grid indices.
#[derive(Debug, Clone)]
pub struct DiscreteOperator {
    matrix: Mat<Complex64>,
    sqrt_weights: Vec<f64>,
}

impl DiscreteOperator {
    pub fn from_kernel(weights: &[f64], kernel: impl Fn(usize, usize) -> Complex64) -> Self {
        let sqrt_weights: Vec<f64> = weights.iter().map(|w| w.sqrt()).collect();
        let n = weights.len();
        let matrix = Mat::from_fn(n, n, |i, j| kernel(i, j) * (sqrt_weights[i] * sqrt_weights[j]));
        DiscreteOperator {
            matrix,
            sqrt_weights,
        }
    }

    pub(crate) fn from_matrix(matrix: Mat<Complex64>, sqrt_weights: Vec<f64>) -> Self {
        DiscreteOperator {
            matrix,
            sqrt_weights,
        }
    }

    pub fn dim(&self) -> usize {
        self.sqrt_weights.len()
    }

    pub fn matrix(&self) -> &Mat<Complex64> {
        &self.matrix
    }

    /// Unweighted kernel value `k(xᵢ, xⱼ)`.
    pub fn kernel(&self, i: usize, j: usize) -> Complex64 {
        self.matrix[(i, j)] / (self.sqrt_weights[i] * self.sqrt_weights[j])
    }

    pub fn trace(&self) -> Complex64 {
        let d: Vec<Complex64> = (0..self.dim()).map(|i| self.matrix[(i, i)]).collect();
        pairwise_sum(&d)
    }

    /// Operator product; both factors must share the grid.
    pub fn compose(&self, other: &DiscreteOperator) -> DiscreteOperator {
        DiscreteOperator {
            matrix: &self.matrix * &other.matrix,
            sqrt_weights: self.sqrt_weights.clone(),
        }
    }

    pub fn adjoint(&self) -> DiscreteOperator {
        DiscreteOperator {
            matrix: self.matrix.adjoint().to_owned(),
            sqrt_weights: self.sqrt_weights.clone(),
        }
    }

    /// `‖self - other‖²_HS`.
    pub fn hs_distance_squared(&self, other: &DiscreteOperator) -> f64 {
        let cols: Vec<f64> = (0..self.dim())
            .map(|j| {
                let col: Vec<f64> = (0..self.dim())
                    .map(|i| (self.matrix[(i, j)] - other.matrix[(i, j)]).norm_sqr())
                    .collect();
                pairwise_sum(&col)
            })
            .collect();
        pairwise_sum(&cols)
    }

    pub fn hs_norm_squared(&self) -> f64 {
        let cols: Vec<f64> = (0..self.dim())
            .map(|j| {
                let col: Vec<f64> = (0..self.dim()).map(|i| self.matrix[(i, j)].norm_sqr()).collect();
                pairwise_sum(&col)
            })
            .collect();
        pairwise_sum(&cols)
    }

    /// `max |Kᵢⱼ - K̄ⱼᵢ| / 2`, the anti-Hermitian part in max norm.
    pub fn anti_hermitian_residual(&self) -> f64 {
        let mut r = 0.0f64;
        for j in 0..self.dim() {
            for i in 0..=j {
                r = r.max((self.matrix[(i, j)] - self.matrix[(j, i)].conj()).norm() / 2.0);
            }
        }
        r
    }

    pub fn max_abs_difference(&self, other: &DiscreteOperator) -> f64 {
        linalg::max_abs_diff(&self.matrix, &other.matrix)
    }

    /// Kronecker product over a [`BlockLayout`]: `(A ⊗ B)[(u_M,u_M̄),(v_M,v_M̄)]`.
    pub fn block_tensor(a: &DiscreteOperator, b: &DiscreteOperator, layout: &BlockLayout) -> DiscreteOperator {
        let n = layout.total();
        let split: Vec<(usize, usize)> = (0..n).map(|i| layout.split(i)).collect();
        let matrix = Mat::from_fn(n, n, |i, j| {
            let (im, ir) = split[i];
            let (jm, jr) = split[j];
            a.matrix[(im, jm)] * b.matrix[(ir, jr)]
        });
        let sqrt_weights = split
            .iter()
            .map(|&(im, ir)| a.sqrt_weights[im] * b.sqrt_weights[ir])
            .collect();
        DiscreteOperator {
            matrix,
            sqrt_weights,
        }
    }

    pub fn transpose(&self) -> DiscreteOperator {
        DiscreteOperator {
            matrix: self.matrix.transpose().to_owned(),
            sqrt_weights: self.sqrt_weights.clone(),
        }
    }
}

struct Split<'a> {
    amps: &'a [Complex64],
    weights: Vec<f64>,
    split: Vec<(usize, usize)>,
    layout: BlockLayout,
}

impl<'a> Split<'a> {
    fn new(state: &'a GridState, bipartition: &Bipartition) -> Result<Self> {
        let layout = BlockLayout::for_state(state, bipartition)?;
        Ok(Split {
            amps: state.amplitudes(),
            weights: state.weights(),
            split: (0..layout.total()).map(|i| layout.split(i)).collect(),
            layout,
        })
    }

    /// `φ(u_M, v_M̄)`
    fn cross(&self, u: usize, v: usize) -> Complex64 {
        self.amps[self.layout.join(self.split[u].0, self.split[v].1)]
    }
}

/// `max |Φ̃(X) - Φ̃(Λ_m X)|` over the doubled grid, with `Φ̃(i₁,i₂) = φᵢ₁φᵢ₂`.
pub fn lambda_invariance_gap(state: &GridState, bipartition: &Bipartition) -> Result<f64> {
    let lambda = LambdaPermutation::for_state(state, bipartition)?;
    let amps = state.amplitudes();
    let n = amps.len();
    let mut gap = 0.0f64;
    for i1 in 0..n {
        for i2 in 0..n {
            let (j1, j2) = lambda.apply(i1, i2);
            gap = gap.max((amps[i1] * amps[i2] - amps[j1] * amps[j2]).norm());
        }
    }
    Ok(gap)
}

/// `ρ = |ψ⟩⟨ψ|`, kernel `φ(u)φ*(v)`.
pub fn build_rho(state: &GridState) -> DiscreteOperator {
    let a = state.amplitudes();
    DiscreteOperator::from_kernel(&state.weights(), |i, j| a[i] * a[j].conj())
}

/// `ρ_PT` with kernel `φ(u_M, v_M̄) φ*(v_M, u_M̄)`.
pub fn build_rho_pt(state: &GridState, bipartition: &Bipartition) -> Result<DiscreteOperator> {
    let s = Split::new(state, bipartition)?;
    Ok(DiscreteOperator::from_kernel(&s.weights, |u, v| {
        s.cross(u, v) * s.cross(v, u).conj()
    }))
}

/// `ρ̃ = |ψ⟩⟨ψ*|`, kernel `φ(u)φ(v)`.
pub fn build_rho_tilde(state: &GridState) -> DiscreteOperator {
    let a = state.amplitudes();
    DiscreteOperator::from_kernel(&state.weights(), |i, j| a[i] * a[j])
}

/// Partial transpose of `ρ̃`, kernel `φ(u_M, v_M̄) φ(v_M, u_M̄)`.
pub fn build_rho_tilde_pt(state: &GridState, bipartition: &Bipartition) -> Result<DiscreteOperator> {
    let s = Split::new(state, bipartition)?;
    Ok(DiscreteOperator::from_kernel(&s.weights, |u, v| s.cross(u, v) * s.cross(v, u)))
}

/// Route D: `‖ρ̃ - ρ̃_PT‖²_HS`.
pub fn concurrence_route_d(state: &GridState, bipartition: &Bipartition) -> Result<f64> {
    let rho_tilde = build_rho_tilde(state);
    let rho_tilde_pt = build_rho_tilde_pt(state, bipartition)?;
    Ok(rho_tilde.hs_distance_squared(&rho_tilde_pt))
}

/// Reduced density matrices of both blocks as weighted operators.
pub(crate) fn block_reductions(
    state: &GridState,
    bipartition: &Bipartition,
) -> Result<(DiscreteOperator, DiscreteOperator)> {
    let rho_m = crate::spectral::reduce(state, bipartition)?;
    let rho_rest = crate::spectral::reduce(state, &bipartition.complement())?;
    Ok((rho_m.operator().clone(), rho_rest.operator().clone()))
}

/// Max-norm gaps of the factorizations of `ρ_PT²`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct PtSquareGaps {
    /// `‖ρ_PT² - ρ_M ⊗ ρ_M̄ᵀ‖_max`
    pub pt_square: f64,
    /// `‖ρ̃_PT ρ̃_PT† - ρ_M ⊗ ρ_M̄‖_max`
    pub tilde_product: f64,
    /// `‖ρ_PT² - ρ_M ⊗ ρ_M̄‖_max`; vanishes only when `ρ_M̄` is real symmetric.
    pub untransposed: f64,
}

impl PtSquareGaps {
    pub fn max(&self) -> f64 {
        self.pt_square.max(self.tilde_product)
    }
}

/// All factorization gaps of `ρ_PT²` and `ρ̃_PT ρ̃_PT†`.
pub fn pt_square_gaps(state: &GridState, bipartition: &Bipartition) -> Result<PtSquareGaps> {
    let layout = BlockLayout::for_state(state, bipartition)?;
    let (rho_m, rho_rest) = block_reductions(state, bipartition)?;
    let rho_pt = build_rho_pt(state, bipartition)?;
    let pt_sq = rho_pt.compose(&rho_pt);
    let tilde_pt = build_rho_tilde_pt(state, bipartition)?;
    let tilde_sq = tilde_pt.compose(&tilde_pt.adjoint());
    let plain = DiscreteOperator::block_tensor(&rho_m, &rho_rest, &layout);
    let transposed = DiscreteOperator::block_tensor(&rho_m, &rho_rest.transpose(), &layout);
    Ok(PtSquareGaps {
        pt_square: pt_sq.max_abs_difference(&transposed),
        tilde_product: tilde_sq.max_abs_difference(&plain),
        untransposed: pt_sq.max_abs_difference(&plain),
    })
}

/// Larger of the two unconditional factorization gaps of `ρ_PT²`.
pub fn pt_square_factorization_gap(state: &GridState, bipartition: &Bipartition) -> Result<f64> {
    Ok(pt_square_gaps(state, bipartition)?.max())
}

/// `Tr ρ_PT` and `Tr ρ_PT²`.
pub fn pt_traces(state: &GridState, bipartition: &Bipartition) -> Result<(f64, f64)> {
    let rho_pt = build_rho_pt(state, bipartition)?;
    Ok((rho_pt.trace().re, rho_pt.compose(&rho_pt).trace().re))
}

/// `Tr ρ_PT⁴` as `‖ρ_PT²‖²_HS`.
pub fn pt_fourth_trace(state: &GridState, bipartition: &Bipartition) -> Result<f64> {
    let rho_pt = build_rho_pt(state, bipartition)?;
    Ok(rho_pt.compose(&rho_pt).hs_norm_squared())
}

/// Route E: `2[1 - √Tr ρ_PT⁴]`.
pub fn concurrence_route_e(state: &GridState, bipartition: &Bipartition) -> Result<f64> {
    let t4 = pt_fourth_trace(state, bipartition)?;
    if t4 < -RADICAND_TOLERANCE {
        return Err(Error::Numeric(format!("Tr ρ_PT⁴ = {t4:e} is negative")));
    }
    Ok(2.0 * (1.0 - t4.max(0.0).sqrt()))
}

/// Smallest eigenvalue of the partial transpose and the Hermitization residual.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct PptSpectrum {
    pub min_eigenvalue: f64,
    pub anti_hermitian_residual: f64,
}

pub fn ppt_spectrum(state: &GridState, bipartition: &Bipartition) -> Result<PptSpectrum> {
    let rho_pt = build_rho_pt(state, bipartition)?;
    let residual = rho_pt.anti_hermitian_residual();
    if residual >= HERMITIAN_RESIDUAL_LIMIT {
        return Err(Error::Numeric(format!(
            "ρ_PT anti-Hermitian residual {residual:e} exceeds {HERMITIAN_RESIDUAL_LIMIT:e}"
        )));
    }
    let k = rho_pt.matrix();
    let herm = Mat::from_fn(k.nrows(), k.ncols(), |i, j| (k[(i, j)] + k[(j, i)].conj()) * 0.5);
    let ev = linalg::hermitian_eigenvalues(&herm)?;
    Ok(PptSpectrum {
        min_eigenvalue: ev[0],
        anti_hermitian_residual: residual,
    })
}

/// Smallest eigenvalue of the Hermitized `ρ_PT`.
pub fn ppt_min_eigenvalue(state: &GridState, bipartition: &Bipartition) -> Result<f64> {
    Ok(ppt_spectrum(state, bipartition)?.min_eigenvalue)
}
