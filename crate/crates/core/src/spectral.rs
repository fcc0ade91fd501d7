//! Reduced density matrices, purity, entropy and the Hilbert–Schmidt identity.

use faer::Mat;
use serde::Serialize;

use crate::error::{Error, Result};
use crate::linalg;
use crate::state::{BipartiteAmplitudes, Bipartition, GridState};
use crate::transpose::{concurrence_route_d, DiscreteOperator};

/// Eigenvalues at or below this are dropped from the entropy sum.
pub const ENTROPY_EIGENVALUE_FLOOR: f64 = 1e-14;
/// Most negative eigenvalue tolerated by [`von_neumann_entropy`].
pub const NEGATIVE_EIGENVALUE_LIMIT: f64 = -1e-8;
/// Slack on the purity range `[0, 1]`.
pub const PURITY_SLACK: f64 = 1e-9;

/// `ρ_M` on the grid of the `M` block.
#[derive(Debug, Clone)]
pub struct ReducedDensity {
    operator: DiscreteOperator,
    bipartition: Bipartition,
}

/// Invariant diagnostics of a [`ReducedDensity`].
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct ReducedDiagnostics {
    pub anti_hermitian_residual: f64,
    pub trace_defect: f64,
    pub min_eigenvalue: f64,
}

impl ReducedDensity {
    pub fn operator(&self) -> &DiscreteOperator {
        &self.operator
    }

    pub fn bipartition(&self) -> &Bipartition {
        &self.bipartition
    }

    pub fn dim(&self) -> usize {
        self.operator.dim()
    }

    /// Eigenvalues in ascending order.
    pub fn eigenvalues(&self) -> Result<Vec<f64>> {
        linalg::hermitian_eigenvalues(self.operator.matrix())
    }

    pub fn diagnostics(&self) -> Result<ReducedDiagnostics> {
        Ok(ReducedDiagnostics {
            anti_hermitian_residual: self.operator.anti_hermitian_residual(),
            trace_defect: (self.operator.trace().re - 1.0).abs(),
            min_eigenvalue: self.eigenvalues()?[0],
        })
    }
}

/// `ρ_M(y, y') = Σ_x̄ φ(y, x̄) φ*(y', x̄) w_x̄`, symmetrically weighted on `M`.
pub fn reduce(state: &GridState, bipartition: &Bipartition) -> Result<ReducedDensity> {
    let ba = BipartiteAmplitudes::new(state, bipartition)?;
    let sm: Vec<f64> = ba.m_weights.iter().map(|w| w.sqrt()).collect();
    let sr: Vec<f64> = ba.rest_weights.iter().map(|w| w.sqrt()).collect();
    let b = Mat::from_fn(ba.m_size, ba.rest_size, |y, x| ba.at(y, x) * (sm[y] * sr[x]));
    let rho = &b * b.adjoint();
    Ok(ReducedDensity {
        operator: DiscreteOperator::from_matrix(rho, sm),
        bipartition: bipartition.clone(),
    })
}

/// `Tr ρ_M² = Σ λ²`.
pub fn purity(rd: &ReducedDensity) -> Result<f64> {
    let p: f64 = rd.eigenvalues()?.iter().map(|l| l * l).sum();
    if !(-PURITY_SLACK..=1.0 + PURITY_SLACK).contains(&p) {
        return Err(Error::Numeric(format!(
            "purity {p} outside [0, 1]; the discretization is not trustworthy"
        )));
    }
    Ok(p)
}

/// Route C: `2(1 - Tr ρ_M²)`.
pub fn concurrence_route_c(state: &GridState, bipartition: &Bipartition) -> Result<f64> {
    Ok(2.0 * (1.0 - purity(&reduce(state, bipartition)?)?))
}

fn checked_eigenvalues(rd: &ReducedDensity) -> Result<Vec<f64>> {
    let ev = rd.eigenvalues()?;
    if ev[0] < NEGATIVE_EIGENVALUE_LIMIT {
        return Err(Error::Numeric(format!(
            "reduced density has eigenvalue {:e} below {NEGATIVE_EIGENVALUE_LIMIT:e}",
            ev[0]
        )));
    }
    Ok(ev)
}

/// `S = -Σ λ ln λ` over eigenvalues above [`ENTROPY_EIGENVALUE_FLOOR`].
pub fn von_neumann_entropy(rd: &ReducedDensity) -> Result<f64> {
    let s: f64 = checked_eigenvalues(rd)?
        .iter()
        .filter(|&&l| l > ENTROPY_EIGENVALUE_FLOOR)
        .map(|l| -l * l.ln())
        .sum();
    Ok(s.max(0.0))
}

/// `⟨(𝟙 - ρ)ᵏ⟩ = Σ λ(1 - λ)ᵏ`.
pub fn deficit_moment(rd: &ReducedDensity, k: u32) -> Result<f64> {
    Ok(checked_eigenvalues(rd)?
        .iter()
        .filter(|&&l| l > ENTROPY_EIGENVALUE_FLOOR)
        .map(|l| l * (1.0 - l).powi(k as i32))
        .sum())
}

/// Truncations of `-⟨ln ρ⟩ = Σₖ ⟨(𝟙-ρ)ᵏ⟩/k`.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct EntropySeries {
    pub entropy: f64,
    /// `partial_sums[k-1] = Σ_{j≤k} ⟨(𝟙-ρ)ʲ⟩/j`
    pub partial_sums: Vec<f64>,
    /// Upper bounds on `entropy - partial_sums[k-1]`.
    pub tail_bounds: Vec<f64>,
}

pub fn entropy_series(rd: &ReducedDensity, terms: u32) -> Result<EntropySeries> {
    let ev: Vec<f64> = checked_eigenvalues(rd)?
        .into_iter()
        .filter(|&l| l > ENTROPY_EIGENVALUE_FLOOR)
        .collect();
    let entropy = ev.iter().map(|l| -l * l.ln()).sum::<f64>().max(0.0);
    let mut partial_sums = Vec::with_capacity(terms as usize);
    let mut tail_bounds = Vec::with_capacity(terms as usize);
    let mut acc = 0.0;
    for k in 1..=terms {
        let kf = k as f64;
        acc += ev.iter().map(|l| l * (1.0 - l).powi(k as i32)).sum::<f64>() / kf;
        partial_sums.push(acc);
        // λ Σ_{j>k} (1-λ)ʲ/j ≤ (1-λ)^{k+1}/(k+1)
        tail_bounds.push(ev.iter().map(|l| (1.0 - l).powi(k as i32 + 1)).sum::<f64>() / (kf + 1.0));
    }
    Ok(EntropySeries {
        entropy,
        partial_sums,
        tail_bounds,
    })
}

/// `|‖ρ̃ - ρ̃_PT‖²_HS + 2 Tr ρ_M² - 2|`.
pub fn hs_identity_gap(state: &GridState, bipartition: &Bipartition) -> Result<f64> {
    let d = concurrence_route_d(state, bipartition)?;
    let p = purity(&reduce(state, bipartition)?)?;
    Ok((d + 2.0 * p - 2.0).abs())
}

#[cfg(test)]
mod tests {
    use super::*;
    use num_complex::Complex64;
    use crate::quadrature::ProductRule;
    use crate::state::GridAxis;
    use std::f64::consts::LN_2;

    fn c(re: f64, im: f64) -> Complex64 {
        Complex64::new(re, im)
    }

    fn diag(values: &[f64]) -> Mat<Complex64> {
        Mat::from_fn(values.len(), values.len(), |i, j| c(if i == j { values[i] } else { 0.0 }, 0.0))
    }

    fn bell() -> GridState {
        let h = 0.5f64.sqrt();
        GridState::new(
            vec![GridAxis::new(0.0, 2.0, 2).unwrap(); 2],
            vec![c(h, 0.0), c(0.0, 0.0), c(0.0, 0.0), c(h, 0.0)],
        )
        .unwrap()
    }

    fn product() -> GridState {
        let f = [c(0.6, 0.0), c(0.0, 0.8), c(0.1, 0.1)];
        let g = [c(0.3, 0.4), c(0.5, -0.1)];
        let amps: Vec<Complex64> = f.iter().flat_map(|a| g.iter().map(move |b| a * b)).collect();
        let axes = [GridAxis::new(-1.0, 1.0, 3).unwrap(), GridAxis::new(0.0, 3.0, 2).unwrap()];
        GridState::normalized(ProductRule::midpoint(&axes).unwrap(), amps).unwrap()
    }

    fn weak(eps: f64) -> GridState {
        // Schmidt weights 1-ε and ε on a 2×2 unit grid
        let amps = vec![c((1.0 - eps).sqrt(), 0.0), c(0.0, 0.0), c(0.0, 0.0), c(eps.sqrt(), 0.0)];
        GridState::new(vec![GridAxis::new(0.0, 2.0, 2).unwrap(); 2], amps).unwrap()
    }

    #[test]
    fn bell_reduction_is_maximally_mixed() {
        let bip = Bipartition::new(2, [0]).unwrap();
        let rd = reduce(&bell(), &bip).unwrap();
        let m = rd.operator().matrix();
        assert!((m[(0, 0)].re - 0.5).abs() < 1e-15 && (m[(1, 1)].re - 0.5).abs() < 1e-15);
        assert!(m[(0, 1)].norm() < 1e-15);
        assert!((purity(&rd).unwrap() - 0.5).abs() < 1e-15);
        assert!((concurrence_route_c(&bell(), &bip).unwrap() - 1.0).abs() < 1e-14);
        assert!((von_neumann_entropy(&rd).unwrap() - LN_2).abs() < 1e-14);
        assert!(hs_identity_gap(&bell(), &bip).unwrap() < 1e-14);
    }

    #[test]
    fn product_reduction_is_pure() {
        let s = product();
        for m in [0, 1] {
            let bip = Bipartition::new(2, [m]).unwrap();
            let rd = reduce(&s, &bip).unwrap();
            let d = rd.diagnostics().unwrap();
            assert!(d.anti_hermitian_residual < 1e-15 && d.trace_defect < 1e-12);
            assert!(d.min_eigenvalue > -1e-12);
            assert!((purity(&rd).unwrap() - 1.0).abs() < 1e-12);
            assert!(von_neumann_entropy(&rd).unwrap() < 1e-9);
            assert!(hs_identity_gap(&s, &bip).unwrap() < 1e-12);
        }
    }

    #[test]
    fn purity_is_the_same_on_both_sides() {
        let s = weak(0.3);
        let bip = Bipartition::new(2, [0]).unwrap();
        let a = purity(&reduce(&s, &bip).unwrap()).unwrap();
        let b = purity(&reduce(&s, &bip.complement()).unwrap()).unwrap();
        assert!((a - b).abs() < 1e-14);
        assert!((a - (0.49 + 0.09)).abs() < 1e-14);
    }

    #[test]
    fn series_brackets_the_entropy() {
        let bip = Bipartition::new(2, [0]).unwrap();
        for eps in [1e-6, 1e-3, 0.05, 0.3] {
            let s = weak(eps);
            let rd = reduce(&s, &bip).unwrap();
            let series = entropy_series(&rd, 6).unwrap();
            let e2 = concurrence_route_c(&s, &bip).unwrap();
            assert!((series.partial_sums[0] - e2 / 2.0).abs() < 1e-14);
            assert!(series.entropy > e2 / 2.0);
            for (sk, bound) in series.partial_sums.iter().zip(&series.tail_bounds) {
                assert!(*sk <= series.entropy + 1e-15);
                assert!(series.entropy - sk <= bound + 1e-15);
            }
            let expected = -(1.0 - eps) * (1.0 - eps).ln() - eps * eps.ln();
            assert!((series.entropy - expected).abs() < 1e-13);
        }
    }

    #[test]
    fn entropy_rejects_negative_spectrum() {
        let bip = Bipartition::new(2, [0]).unwrap();
        let mut rd = reduce(&bell(), &bip).unwrap();
        rd.operator = DiscreteOperator::from_matrix(diag(&[1.1, -0.1]), vec![1.0, 1.0]);
        assert!(matches!(von_neumann_entropy(&rd), Err(Error::Numeric(_))));
        rd.operator = DiscreteOperator::from_matrix(diag(&[1.5, 1.5]), vec![1.0, 1.0]);
        assert!(matches!(purity(&rd), Err(Error::Numeric(_))));
    }
}
