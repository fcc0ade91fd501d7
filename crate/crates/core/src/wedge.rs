//! Wedge products of sampled complex functions and the Lagrange identity.
//!
//! A sampled function is a vector of values at grid nodes together with the
//! nodes' quadrature weights. The wedge `f ∧ g` is stored on the strictly
//! ordered pairs `i < j` of linear node indices, so `|xᵢ⟩∧|xᵢ⟩ = 0` and
//! `|xⱼ⟩∧|xᵢ⟩ = -|xᵢ⟩∧|xⱼ⟩` are built into the storage. Norms carry the pair
//! measure `wᵢ wⱼ`, which makes the discrete Lagrange identity
//!
//! `‖f‖²‖g‖² - |⟨f,g⟩|² = Σ_{i<j} |fᵢgⱼ - fⱼgᵢ|² wᵢwⱼ`
//!
//! hold exactly in exact arithmetic.

use num_complex::Complex64;

use crate::error::{input, Error, Result};
use crate::quadrature::pairwise_sum;

/// `p` of a bivector p-norm.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum PNorm {
    One,
    Two,
    Infinity,
}

impl PNorm {
    pub fn from_value(p: f64) -> Result<Self> {
        if p == 1.0 {
            Ok(PNorm::One)
        } else if p == 2.0 {
            Ok(PNorm::Two)
        } else if p == f64::INFINITY {
            Ok(PNorm::Infinity)
        } else {
            input(format!("unsupported p-norm {p}; use 1, 2 or infinity"))
        }
    }
}

impl std::str::FromStr for PNorm {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s.trim().to_ascii_lowercase().as_str() {
            "1" => Ok(PNorm::One),
            "2" => Ok(PNorm::Two),
            "inf" | "infinity" | "∞" => Ok(PNorm::Infinity),
            other => input(format!("unsupported p-norm {other:?}; use 1, 2 or inf")),
        }
    }
}

/// Grade-2 element over the ordered pairs `i < j` of a sampled index set.
#[derive(Debug, Clone, PartialEq)]
pub struct Bivector {
    len: usize,
    coefficients: Vec<Complex64>,
    weights: Vec<f64>,
}

fn pair_offset(len: usize, i: usize) -> usize {
    i * len - i * (i + 1) / 2
}

impl Bivector {
    pub fn len(&self) -> usize {
        self.len
    }

    pub fn is_empty(&self) -> bool {
        self.coefficients.is_empty()
    }

    pub fn weights(&self) -> &[f64] {
        &self.weights
    }

    /// Coefficient of `|xᵢ⟩∧|xⱼ⟩` for any ordering of `i` and `j`.
    pub fn coefficient(&self, i: usize, j: usize) -> Complex64 {
        use std::cmp::Ordering::*;
        match i.cmp(&j) {
            Less => self.coefficients[pair_offset(self.len, i) + (j - i - 1)],
            Greater => -self.coefficient(j, i),
            Equal => Complex64::new(0.0, 0.0),
        }
    }

    /// `(i, j, coefficient)` over the stored pairs.
    pub fn pairs(&self) -> impl Iterator<Item = (usize, usize, Complex64)> + '_ {
        (0..self.len).flat_map(move |i| {
            ((i + 1)..self.len).map(move |j| (i, j, self.coefficient(i, j)))
        })
    }
}

fn check_lengths(f: &[Complex64], g: &[Complex64], weights: &[f64]) -> Result<()> {
    if f.len() != g.len() || f.len() != weights.len() {
        return input(format!(
            "wedge operands need equal lengths, got {}, {} and {} weights",
            f.len(),
            g.len(),
            weights.len()
        ));
    }
    if weights.iter().any(|w| !(*w > 0.0)) {
        return input("wedge weights must be positive");
    }
    Ok(())
}

/// `f ∧ g` with coefficients `fᵢgⱼ - fⱼgᵢ` for `j > i`.
pub fn wedge(f: &[Complex64], g: &[Complex64], weights: &[f64]) -> Result<Bivector> {
    check_lengths(f, g, weights)?;
    let len = f.len();
    let mut coefficients = Vec::with_capacity(len * len.saturating_sub(1) / 2);
    for i in 0..len {
        for j in (i + 1)..len {
            coefficients.push(f[i] * g[j] - f[j] * g[i]);
        }
    }
    Ok(Bivector {
        len,
        coefficients,
        weights: weights.to_vec(),
    })
}

/// Weighted p-norm `(Σ_{i<j} |cᵢⱼ|ᵖ wᵢwⱼ)^{1/p}`; `p = ∞` is the plain max.
pub fn bivector_p_norm(b: &Bivector, p: PNorm) -> f64 {
    let w = &b.weights;
    match p {
        PNorm::Infinity => b.coefficients.iter().map(|c| c.norm()).fold(0.0, f64::max),
        PNorm::One => {
            let terms: Vec<f64> = b.pairs().map(|(i, j, c)| c.norm() * w[i] * w[j]).collect();
            pairwise_sum(&terms)
        }
        PNorm::Two => {
            let terms: Vec<f64> = b.pairs().map(|(i, j, c)| c.norm_sqr() * w[i] * w[j]).collect();
            pairwise_sum(&terms).sqrt()
        }
    }
}

/// `‖f ∧ g‖_p` without materializing the bivector.
pub(crate) fn wedge_norm(f: &[Complex64], g: &[Complex64], w: &[f64], p: PNorm) -> f64 {
    let len = f.len();
    let mut acc = 0.0f64;
    for i in 0..len {
        for j in (i + 1)..len {
            let c = f[i] * g[j] - f[j] * g[i];
            match p {
                PNorm::One => acc += c.norm() * w[i] * w[j],
                PNorm::Two => acc += c.norm_sqr() * w[i] * w[j],
                PNorm::Infinity => acc = acc.max(c.norm()),
            }
        }
    }
    if p == PNorm::Two {
        acc.sqrt()
    } else {
        acc
    }
}

/// Both sides of the discrete Lagrange identity.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct LagrangeSides {
    /// `‖f‖²‖g‖² - |⟨f,g⟩|²`
    pub lhs: f64,
    /// `Σ_{i<j} |fᵢgⱼ - fⱼgᵢ|² wᵢwⱼ`
    pub rhs: f64,
    /// `‖f‖²‖g‖²`, the natural scale of both sides.
    pub scale: f64,
}

pub fn lagrange_sides(f: &[Complex64], g: &[Complex64], weights: &[f64]) -> Result<LagrangeSides> {
    check_lengths(f, g, weights)?;
    let nf: Vec<f64> = f.iter().zip(weights).map(|(a, w)| a.norm_sqr() * w).collect();
    let ng: Vec<f64> = g.iter().zip(weights).map(|(a, w)| a.norm_sqr() * w).collect();
    let inner: Vec<Complex64> = f
        .iter()
        .zip(g)
        .zip(weights)
        .map(|((a, b), w)| a * b.conj() * w)
        .collect();
    let scale = pairwise_sum(&nf) * pairwise_sum(&ng);
    let lhs = scale - pairwise_sum(&inner).norm_sqr();
    let mut rows = Vec::with_capacity(f.len());
    for i in 0..f.len() {
        let row: Vec<f64> = ((i + 1)..f.len())
            .map(|j| (f[i] * g[j] - f[j] * g[i]).norm_sqr() * weights[i] * weights[j])
            .collect();
        rows.push(pairwise_sum(&row));
    }
    Ok(LagrangeSides {
        lhs,
        rhs: pairwise_sum(&rows),
        scale,
    })
}

/// `|LHS - RHS| / ‖f‖²‖g‖²` for the discrete Lagrange identity, zero when
/// either vector vanishes.
pub fn lagrange_identity_gap(f: &[Complex64], g: &[Complex64], weights: &[f64]) -> Result<f64> {
    let s = lagrange_sides(f, g, weights)?;
    if s.scale == 0.0 {
        return Ok((s.lhs - s.rhs).abs());
    }
    Ok((s.lhs - s.rhs).abs() / s.scale)
}
