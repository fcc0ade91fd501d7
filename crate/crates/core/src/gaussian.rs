//! Closed forms for two-mode Gaussians and the precision-matrix separability
//! criterion for `n`-mode Gaussians.
//!
//! The two-mode family is `ψ(x, y) = 𝒩₂ exp(-½(a x² + b y² + c x y))` with
//! `c` either real (`|c| < 2√(ab)`) or purely imaginary (`c = i m`).

use std::f64::consts::PI;
use std::str::FromStr;

use faer::Mat;
use num_complex::Complex64;
use serde::Serialize;

use crate::error::{input, Error, Result};
use crate::linalg;
use crate::quadrature::ProductRule;
use crate::state::{Bipartition, GaussianPureState};

/// Cross-block entries at or below this magnitude count as zero.
pub const CROSS_BLOCK_TOLERANCE: f64 = 1e-12;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum Branch {
    RealC,
    ImagC,
}

impl FromStr for Branch {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s.trim().to_ascii_lowercase().as_str() {
            "real" | "real_c" => Ok(Branch::RealC),
            "imag" | "imaginary" | "imag_c" => Ok(Branch::ImagC),
            other => input(format!("unknown branch {other:?}; use real or imag")),
        }
    }
}

/// Parameters of the two-mode family. On the imaginary branch `c` holds `m`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct TwoModeGaussianSpec {
    pub a: f64,
    pub b: f64,
    pub c: f64,
    pub branch: Branch,
}

impl TwoModeGaussianSpec {
    pub fn new(a: f64, b: f64, c: f64, branch: Branch) -> Result<Self> {
        if !(a > 0.0 && b > 0.0 && a.is_finite() && b.is_finite()) {
            return input(format!("a and b must be positive and finite, got a = {a}, b = {b}"));
        }
        if !c.is_finite() {
            return input(format!("c must be finite, got {c}"));
        }
        let spec = TwoModeGaussianSpec { a, b, c, branch };
        spec.check_physical()?;
        Ok(spec)
    }

    /// Branch inferred from a complex `c`; mixed phases are rejected.
    pub fn from_complex(a: f64, b: f64, c: Complex64) -> Result<Self> {
        match (c.re != 0.0, c.im != 0.0) {
            (true, true) => input(format!(
                "c = {c} is neither purely real nor purely imaginary; use the grid backend"
            )),
            (false, true) => TwoModeGaussianSpec::new(a, b, c.im, Branch::ImagC),
            _ => TwoModeGaussianSpec::new(a, b, c.re, Branch::RealC),
        }
    }

    /// Limit on `|c|` for the real branch.
    pub fn real_bound(&self) -> f64 {
        2.0 * (self.a * self.b).sqrt()
    }

    fn check_physical(&self) -> Result<()> {
        if self.branch == Branch::RealC && self.c.abs() >= self.real_bound() {
            return Err(Error::Unphysical(format!(
                "|c| = {} must stay below 2√(ab) = {} for a normalizable state",
                self.c.abs(),
                self.real_bound()
            )));
        }
        Ok(())
    }

    pub fn coupling(&self) -> Complex64 {
        match self.branch {
            Branch::RealC => Complex64::new(self.c, 0.0),
            Branch::ImagC => Complex64::new(0.0, self.c),
        }
    }

    pub fn to_state(&self) -> Result<GaussianPureState> {
        GaussianPureState::two_mode(self.a, self.b, self.coupling())
    }
}

/// `E² = 2[1 - √(4ab-c²)/(2√(ab))]` or `2[1 - 2√(ab)/√(4ab+m²)]`.
pub fn closed_form_concurrence(spec: &TwoModeGaussianSpec) -> Result<f64> {
    spec.check_physical()?;
    let (a, b, c) = (spec.a, spec.b, spec.c);
    Ok(match spec.branch {
        Branch::RealC => 2.0 * (1.0 - (4.0 * a * b - c * c).sqrt() / (2.0 * (a * b).sqrt())),
        Branch::ImagC => 2.0 * (1.0 - 2.0 * (a * b).sqrt() / (4.0 * a * b + c * c).sqrt()),
    })
}

/// `𝒩₂ = [2π/√(4ab-c²)]^{-1/2}` or `(π/√(ab))^{-1/2}`.
pub fn closed_form_normalization(spec: &TwoModeGaussianSpec) -> Result<f64> {
    spec.check_physical()?;
    let (a, b, c) = (spec.a, spec.b, spec.c);
    Ok(match spec.branch {
        Branch::RealC => (2.0 * PI / (4.0 * a * b - c * c).sqrt()).powf(-0.5),
        Branch::ImagC => (PI / (a * b).sqrt()).powf(-0.5),
    })
}

/// Verdict of the cross-block criterion with the largest offending entry.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct GaussianSeparability {
    pub separable: bool,
    /// `(k, j, |A_kj|)` with `k ∈ M`, `j ∈ M̄`, largest magnitude.
    pub witness: Option<(usize, usize, f64)>,
}

/// Separable iff every `A[k][j]` with `k ∈ M`, `j ∈ M̄` vanishes.
pub fn gaussian_separability(precision: &Mat<Complex64>, bipartition: &Bipartition) -> Result<GaussianSeparability> {
    let state = GaussianPureState::new(precision.clone())?;
    if state.n() != bipartition.n() {
        return input(format!(
            "bipartition is for {} modes but A is {}x{}",
            bipartition.n(),
            state.n(),
            state.n()
        ));
    }
    let mut best: Option<(usize, usize, f64)> = None;
    for &k in bipartition.members() {
        for j in bipartition.complement_members() {
            let mag = precision[(k, j)].norm();
            if mag > CROSS_BLOCK_TOLERANCE && best.is_none_or(|b| mag > b.2) {
                best = Some((k, j, mag));
            }
        }
    }
    Ok(GaussianSeparability {
        separable: best.is_none(),
        witness: best,
    })
}

/// Exact `Tr ρ_M²` of an `n`-mode Gaussian from a `2n`-dimensional
/// Gaussian integral over `(y, y', x̄, x̄')`.
pub fn gaussian_purity(state: &GaussianPureState, bipartition: &Bipartition) -> Result<f64> {
    let n = state.n();
    if n != bipartition.n() {
        return input(format!("bipartition is for {} modes, state has {n}", bipartition.n()));
    }
    let m_axes = bipartition.members();
    let rest_axes = bipartition.complement_members();
    let (mm, mr) = (m_axes.len(), rest_axes.len());
    let dim = 2 * n;
    // slot of each full-mode coordinate inside z = (y, y', x̄, x̄')
    let slots = |primed_y: bool, primed_x: bool| -> Vec<usize> {
        let mut s = vec![0; n];
        for (i, &k) in m_axes.iter().enumerate() {
            s[k] = if primed_y { mm + i } else { i };
        }
        for (i, &k) in rest_axes.iter().enumerate() {
            s[k] = 2 * mm + if primed_x { mr + i } else { i };
        }
        s
    };
    let a = state.precision();
    let mut q = Mat::<Complex64>::zeros(dim, dim);
    // ψ(y,x̄) ψ*(y',x̄) ψ(y',x̄') ψ*(y,x̄')
    for (py, px, conj) in [(false, false, false), (true, false, true), (true, true, false), (false, true, true)] {
        let s = slots(py, px);
        for i in 0..n {
            for j in 0..n {
                let v = if conj { a[(i, j)].conj() } else { a[(i, j)] };
                q[(s[i], s[j])] += v;
            }
        }
    }
    let det = linalg::complex_determinant(&q);
    let norm4 = state.normalization().powi(4);
    // ∫ exp(-½ zᵀQz) dz = (2π)^{n} / √det Q; the purity is real and positive
    Ok(norm4 * (2.0 * PI).powi(n as i32) / det.norm().sqrt())
}

/// `2[1 - Tr ρ_M²]` for an `n`-mode Gaussian.
pub fn gaussian_concurrence(state: &GaussianPureState, bipartition: &Bipartition) -> Result<f64> {
    Ok(2.0 * (1.0 - gaussian_purity(state, bipartition)?))
}

/// Product Gauss–Hermite rule matched to `|ψ|²`: `s_k = √((Re A)⁻¹_kk)`.
pub fn gauss_hermite_rule_for(state: &GaussianPureState, points: usize) -> Result<ProductRule> {
    let cov = linalg::inverse(&state.real_part());
    let scales: Vec<f64> = (0..state.n()).map(|k| cov[(k, k)].sqrt()).collect();
    ProductRule::gauss_hermite(points, &scales)
}

/// One row of a closed-form sweep; unphysical rows carry NaN values.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct SweepRow {
    pub c: f64,
    pub e2: f64,
    pub norm: f64,
}

impl SweepRow {
    pub fn is_physical(&self) -> bool {
        self.e2.is_finite() && self.norm.is_finite()
    }
}

/// `steps` evenly spaced values from `min` to `max`; one step gives `[min]`.
pub fn linspace(min: f64, max: f64, steps: usize) -> Result<Vec<f64>> {
    if steps == 0 {
        return input("a sweep needs at least one step");
    }
    if !(min.is_finite() && max.is_finite()) || max < min {
        return input(format!("sweep range needs finite min <= max, got [{min}, {max}]"));
    }
    if steps == 1 {
        return Ok(vec![min]);
    }
    let last = (steps - 1) as f64;
    let mut v: Vec<f64> = (0..steps).map(|i| min + (max - min) * (i as f64 / last)).collect();
    v[steps - 1] = max;
    Ok(v)
}

/// Closed-form `(c, E², 𝒩₂)` rows.
pub fn sweep_concurrence(a: f64, b: f64, branch: Branch, c_values: &[f64]) -> Result<Vec<SweepRow>> {
    // validates a and b once
    TwoModeGaussianSpec::new(a, b, 0.0, branch)?;
    c_values
        .iter()
        .map(|&c| match TwoModeGaussianSpec::new(a, b, c, branch) {
            Ok(spec) => Ok(SweepRow {
                c,
                e2: closed_form_concurrence(&spec)?,
                norm: closed_form_normalization(&spec)?,
            }),
            Err(Error::Unphysical(_)) => Ok(SweepRow {
                c,
                e2: f64::NAN,
                norm: f64::NAN,
            }),
            Err(e) => Err(e),
        })
        .collect()
}
