//! Wigner functions of Gaussian and gridded states and the phase-space forms
//! of the separability and concurrence identities.
//!
//! Convention: `W(x, p) = π⁻ⁿ ∫ ψ*(x+y) ψ(x-y) e^{2i p·y} dy`, so `∫W = 1` and
//! `Tr(ρσ) = (2π)ⁿ ∫ W_ρ W_σ`. For `ψ = 𝒩 exp(-½ xᵀA x)` with `A = R + iJ`
//! this gives `W = π⁻ⁿ exp(-xᵀRx - (p+Jx)ᵀR⁻¹(p+Jx))`.

use std::f64::consts::PI;

use faer::Mat;
use num_complex::Complex64;

use crate::error::{input, Error, Result};
use crate::linalg;
use crate::quadrature::{integrate, integrate_real, ProductRule};
use crate::state::{Bipartition, GaussianPureState, GridState};
use crate::transpose::lambda_coordinates;

/// Closed-form Wigner function of a Gaussian pure state.
#[derive(Debug, Clone)]
pub struct GaussianWigner {
    n: usize,
    r: Mat<f64>,
    j: Mat<f64>,
    r_inv: Mat<f64>,
}

impl GaussianWigner {
    pub fn new(state: &GaussianPureState) -> Self {
        let r = state.real_part();
        GaussianWigner {
            n: state.n(),
            r_inv: linalg::inverse(&r),
            j: state.imag_part(),
            r,
        }
    }

    pub fn n(&self) -> usize {
        self.n
    }

    pub fn evaluate(&self, x: &[f64], p: &[f64]) -> Result<f64> {
        if x.len() != self.n || p.len() != self.n {
            return input(format!(
                "phase-space point needs {} + {} coordinates, got {} + {}",
                self.n,
                self.n,
                x.len(),
                p.len()
            ));
        }
        Ok(self.evaluate_unchecked(x, p))
    }

    fn evaluate_unchecked(&self, x: &[f64], p: &[f64]) -> f64 {
        let n = self.n;
        let shifted: Vec<f64> = (0..n)
            .map(|i| p[i] + (0..n).map(|k| self.j[(i, k)] * x[k]).sum::<f64>())
            .collect();
        let mut e = 0.0;
        for i in 0..n {
            for k in 0..n {
                e += x[i] * self.r[(i, k)] * x[k] + shifted[i] * self.r_inv[(i, k)] * shifted[k];
            }
        }
        PI.powi(-(n as i32)) * (-e).exp()
    }

    /// `Q` of `W ∝ exp(-ξᵀQξ)` with `ξ = (x, p)`.
    pub fn phase_space_precision(&self) -> Mat<f64> {
        let n = self.n;
        let jr = &self.j * &self.r_inv;
        let jrj = &jr * &self.j;
        Mat::from_fn(2 * n, 2 * n, |a, b| match (a < n, b < n) {
            (true, true) => self.r[(a, b)] + jrj[(a, b)],
            (true, false) => jr[(a, b - n)],
            (false, true) => jr[(b, a - n)],
            (false, false) => self.r_inv[(a - n, b - n)],
        })
    }

    /// Product Gauss–Hermite rule over `(x, p)` matched to the marginal widths of `W`.
    pub fn phase_space_rule(&self, points: usize) -> Result<ProductRule> {
        self.rule_for_power(points, 1.0)
    }

    /// Rule matched to `W^power`.
    fn rule_for_power(&self, points: usize, power: f64) -> Result<ProductRule> {
        let cov = linalg::inverse(&self.phase_space_precision());
        let scales: Vec<f64> = (0..2 * self.n)
            .map(|k| (cov[(k, k)] / power).sqrt())
            .collect();
        ProductRule::gauss_hermite(points, &scales)
    }
}

/// `W(x, p)` of a Gaussian pure state.
pub fn wigner_gaussian(state: &GaussianPureState, x: &[f64], p: &[f64]) -> Result<f64> {
    GaussianWigner::new(state).evaluate(x, p)
}

/// `W(x, p)` by Gauss–Hermite quadrature of the defining integral, as an
/// independent check of the closed form.
pub fn wigner_gaussian_quadrature(
    state: &GaussianPureState,
    x: &[f64],
    p: &[f64],
    points: usize,
) -> Result<f64> {
    let n = state.n();
    if x.len() != n || p.len() != n {
        return input("phase-space point has the wrong dimension");
    }
    let r = state.real_part();
    // the y-integrand decays like exp(-yᵀRy)
    let scales: Vec<f64> = (0..n).map(|k| 1.0 / r[(k, k)].sqrt()).collect();
    let rule = ProductRule::gauss_hermite(points, &scales)?;
    let v = integrate(&rule, |y| {
        let plus: Vec<f64> = (0..n).map(|k| x[k] + y[k]).collect();
        let minus: Vec<f64> = (0..n).map(|k| x[k] - y[k]).collect();
        let phase: f64 = 2.0 * (0..n).map(|k| p[k] * y[k]).sum::<f64>();
        state.evaluate_unchecked(&plus).conj()
            * state.evaluate_unchecked(&minus)
            * Complex64::from_polar(1.0, phase)
    })?;
    Ok(v.re * PI.powi(-(n as i32)))
}

/// `∫W dx dp` on the matched Gauss–Hermite rule.
pub fn wigner_normalization(state: &GaussianPureState, points: usize) -> Result<f64> {
    let w = GaussianWigner::new(state);
    let n = w.n();
    let rule = w.phase_space_rule(points)?;
    integrate_real(&rule, |xi| w.evaluate_unchecked(&xi[..n], &xi[n..]))
}

/// A doubled phase-space point `(X, P)` with `X = (x₁, x₂)`, `P = (p₁, p₂)`.
#[derive(Debug, Clone, PartialEq)]
pub struct DoubledPoint {
    pub x: Vec<f64>,
    pub p: Vec<f64>,
}

fn doubled_value(w: &GaussianWigner, pt: &DoubledPoint) -> f64 {
    let n = w.n();
    w.evaluate_unchecked(&pt.x[..n], &pt.p[..n]) * w.evaluate_unchecked(&pt.x[n..], &pt.p[n..])
}

/// `max |W̃(X,P) - W̃(Λ_m X, Λ_m P)|` over the samples, `W̃ = W(x₁,p₁) W(x₂,p₂)`.
pub fn wigner_invariance_gap(
    state: &GaussianPureState,
    bipartition: &Bipartition,
    samples: &[DoubledPoint],
) -> Result<f64> {
    let n = state.n();
    if bipartition.n() != n {
        return input(format!("bipartition is for {} modes, state has {n}", bipartition.n()));
    }
    let w = GaussianWigner::new(state);
    let mut gap = 0.0f64;
    for s in samples {
        if s.x.len() != 2 * n || s.p.len() != 2 * n {
            return input(format!("doubled point needs {} + {} coordinates", 2 * n, 2 * n));
        }
        let moved = DoubledPoint {
            x: lambda_coordinates(bipartition, &s.x),
            p: lambda_coordinates(bipartition, &s.p),
        };
        gap = gap.max((doubled_value(&w, s) - doubled_value(&w, &moved)).abs());
    }
    Ok(gap)
}

/// Partial transpose on mode `flip` in phase space: `p_flip → -p_flip`.
fn flipped_wigner<'a>(w: &'a GaussianWigner, flip: usize) -> impl Fn(&[f64], &[f64]) -> f64 + 'a {
    move |x, p| {
        let mut q = p.to_vec();
        q[flip] = -q[flip];
        w.evaluate_unchecked(x, &q)
    }
}

fn two_mode_wigner(state: &GaussianPureState, bipartition: &Bipartition) -> Result<(GaussianWigner, usize, usize)> {
    if state.n() != 2 || bipartition.n() != 2 {
        return input("the phase-space partial transpose is implemented for two modes only");
    }
    let kept = bipartition.members()[0];
    Ok((GaussianWigner::new(state), kept, 1 - kept))
}

/// Phase-space traces of the partial transpose of a two-mode Gaussian.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct PhaseSpaceTraces {
    /// `(2π)² ∫ W_PT²`, which is `Tr ρ_PT²`.
    pub pt_square: f64,
    /// `∫ W[ρ_PT⁴]`: `ρ_PT⁴ = ρ_M² ⊗ (ρ_M̄ᵀ)²`, so the integral is
    /// `(2π ∫ W_A²)(2π ∫ W_B²)` with `W_A`, `W_B` the one-mode marginals of `W_PT`.
    pub pt_fourth: f64,
    /// Pointwise `∫ W_PT(ξ)⁴ dξ`, kept for comparison; it is not a trace.
    pub pointwise_fourth_power: f64,
}

/// Gauss–Hermite evaluation of [`PhaseSpaceTraces`] with `points` nodes per
/// phase-space axis.
pub fn phase_space_pt_traces(
    state: &GaussianPureState,
    bipartition: &Bipartition,
    points: usize,
) -> Result<PhaseSpaceTraces> {
    let (w, kept, flip) = two_mode_wigner(state, bipartition)?;
    let w_pt = flipped_wigner(&w, flip);
    // ξ = (x₁, x₂, p₁, p₂); the flip leaves the diagonal widths unchanged
    let square_rule = w.rule_for_power(points, 2.0)?;
    let pt_square =
        (2.0 * PI).powi(2) * integrate_real(&square_rule, |xi| w_pt(&xi[..2], &xi[2..]).powi(2))?;
    let pointwise_fourth_power = integrate_real(&w.rule_for_power(points, 4.0)?, |xi| {
        w_pt(&xi[..2], &xi[2..]).powi(4)
    })?;

    let base = w.phase_space_rule(points)?;
    let mode_rule = |rule: &ProductRule, k: usize| {
        ProductRule::new(vec![rule.axes()[k].clone(), rule.axes()[k + 2].clone()])
    };
    let marginal_square = |mode: usize| -> Result<f64> {
        let other = 1 - mode;
        let outer = mode_rule(&square_rule, mode)?;
        let inner = mode_rule(&base, other)?;
        let marginal = |xm: f64, pm: f64| -> Result<f64> {
            integrate_real(&inner, |v| {
                let (mut x, mut p) = ([0.0; 2], [0.0; 2]);
                x[mode] = xm;
                p[mode] = pm;
                x[other] = v[0];
                p[other] = v[1];
                w_pt(&x, &p)
            })
        };
        let err = std::cell::RefCell::new(None);
        let v = integrate_real(&outer, |u| match marginal(u[0], u[1]) {
            Ok(m) => m * m,
            Err(e) => {
                *err.borrow_mut() = Some(e);
                f64::NAN
            }
        });
        match err.into_inner() {
            Some(e) => Err(e),
            None => v,
        }
    };
    let pt_fourth = (2.0 * PI * marginal_square(kept)?) * (2.0 * PI * marginal_square(flip)?);
    Ok(PhaseSpaceTraces {
        pt_square,
        pt_fourth,
        pointwise_fourth_power,
    })
}

/// `2[1 - √∫W[ρ_PT⁴]]` for a two-mode Gaussian.
pub fn wigner_fourth_moment_concurrence(
    state: &GaussianPureState,
    bipartition: &Bipartition,
    points: usize,
) -> Result<f64> {
    let t = phase_space_pt_traces(state, bipartition, points)?;
    if t.pt_fourth < 0.0 {
        return Err(Error::Numeric(format!("∫W[ρ_PT⁴] = {:e} is negative", t.pt_fourth)));
    }
    Ok(2.0 * (1.0 - t.pt_fourth.sqrt()))
}

/// Discrete Wigner function of a midpoint-grid state at a node:
/// `W(xᵢ, p) ≈ π⁻ⁿ Σ_k ψ*(xᵢ₊ₖ) ψ(xᵢ₋ₖ) e^{2i p·kΔ} ΠΔ`, with the shift `k`
/// running over offsets that keep both nodes on the grid.
pub fn wigner_grid(state: &GridState, node: &[usize], p: &[f64]) -> Result<f64> {
    let axes = state
        .rule()
        .grid_axes()
        .ok_or_else(|| Error::Input("the grid Wigner function needs a midpoint grid".into()))?;
    let shape = state.shape();
    let n = shape.len();
    if node.len() != n || p.len() != n {
        return input(format!("expected {n} node indices and {n} momenta"));
    }
    state.linear_index(node)?;
    // per-axis offset ranges: -min(i, N-1-i) ..= min(i, N-1-i)
    let reach: Vec<i64> = (0..n)
        .map(|k| node[k].min(shape[k] - 1 - node[k]) as i64)
        .collect();
    let counts: Vec<usize> = reach.iter().map(|r| (2 * r + 1) as usize).collect();
    let total: usize = counts.iter().product();
    let amps = state.amplitudes();
    let mut acc = Complex64::new(0.0, 0.0);
    let mut k = vec![0i64; n];
    for lin in 0..total {
        let mut rem = lin;
        for a in (0..n).rev() {
            k[a] = (rem % counts[a]) as i64 - reach[a];
            rem /= counts[a];
        }
        let (mut plus, mut minus, mut phase) = (0usize, 0usize, 0.0);
        for a in 0..n {
            plus = plus * shape[a] + (node[a] as i64 + k[a]) as usize;
            minus = minus * shape[a] + (node[a] as i64 - k[a]) as usize;
            phase += 2.0 * p[a] * k[a] as f64 * axes[a].delta();
        }
        acc += amps[plus].conj() * amps[minus] * Complex64::from_polar(1.0, phase);
    }
    let cell: f64 = axes.iter().map(|a| a.delta()).product();
    Ok(acc.re * cell * PI.powi(-(n as i32)))
}
