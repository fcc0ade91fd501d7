//! Squared concurrence by the wedge, overlap and `Λ_m` routes, the `(f, p, q)`
//! measure family and separability certificates.
//!
//! Every route works on weighted amplitudes `a(y, x̄) = φ(y, x̄) √(w_y w_x̄)`,
//! so the quadrature weights never appear inside the inner loops.

use std::str::FromStr;

use num_complex::Complex64;
use rayon::prelude::*;
use serde::Serialize;

use crate::error::{input, Error, Result};
use crate::quadrature::{pairwise_sum, ProductRule};
use crate::spectral::concurrence_route_c;
use crate::state::{sample_on_rule, BipartiteAmplitudes, Bipartition, GaussianPureState, GridState};
use crate::transpose::{concurrence_route_d, concurrence_route_e, LambdaPermutation};
use crate::wedge::{wedge_norm, PNorm};

/// Default verdict threshold on the weighted squared wedge coefficient.
pub const DEFAULT_THRESHOLD: f64 = 1e-8;
/// Largest `G_M² G_M̄²` evaluated in full by routes A and Λ.
pub const QUARTIC_BUDGET: usize = 1 << 28;
/// Largest grid on which the `N × N` operator routes D and E are built.
pub const OPERATOR_BUDGET: usize = 2304;
/// Product-state reconstruction error above which factors are rejected.
pub const RECONSTRUCTION_TOLERANCE: f64 = 1e-9;


/// `φ` as a dense `m × r` matrix of weighted amplitudes.
#[derive(Debug, Clone)]
struct Weighted {
    m: usize,
    r: usize,
    a: Vec<Complex64>,
}

impl Weighted {
    fn new(ba: &BipartiteAmplitudes) -> Self {
        let sm: Vec<f64> = ba.m_weights.iter().map(|w| w.sqrt()).collect();
        let sr: Vec<f64> = ba.rest_weights.iter().map(|w| w.sqrt()).collect();
        let a = (0..ba.m_size)
            .flat_map(|y| (0..ba.rest_size).map(move |x| (y, x)))
            .map(|(y, x)| ba.at(y, x) * (sm[y] * sr[x]))
            .collect();
        Weighted {
            m: ba.m_size,
            r: ba.rest_size,
            a,
        }
    }

    fn row(&self, y: usize) -> &[Complex64] {
        &self.a[y * self.r..(y + 1) * self.r]
    }

    /// Every `stride`-th row and column, renormalized to unit mass.
    fn strided(&self, stride: usize) -> Result<Self> {
        let ys: Vec<usize> = (0..self.m).step_by(stride).collect();
        let xs: Vec<usize> = (0..self.r).step_by(stride).collect();
        let mut a: Vec<Complex64> = ys
            .iter()
            .flat_map(|&y| xs.iter().map(move |&x| (y, x)))
            .map(|(y, x)| self.a[y * self.r + x])
            .collect();
        let mass: Vec<f64> = a.iter().map(|z| z.norm_sqr()).collect();
        let mass = pairwise_sum(&mass);
        if !(mass > 0.0) {
            return Err(Error::Degenerate(format!(
                "stride-{stride} sub-grid carries no probability mass"
            )));
        }
        let s = 1.0 / mass.sqrt();
        a.iter_mut().for_each(|z| *z *= s);
        Ok(Weighted {
            m: ys.len(),
            r: xs.len(),
            a,
        })
    }

    fn quartic_cost(&self) -> usize {
        (self.m * self.m).saturating_mul(self.r * self.r)
    }

    /// Σ over all `y, y', x̄, x̄'` of the squared wedge coefficient.
    fn wedge_sum(&self) -> f64 {
        let rows: Vec<f64> = (0..self.m)
            .into_par_iter()
            .map(|y| {
                let ry = self.row(y);
                let per: Vec<f64> = ((y + 1)..self.m)
                    .map(|yp| {
                        let rp = self.row(yp);
                        let mut acc = 0.0;
                        for x in 0..self.r {
                            for xp in (x + 1)..self.r {
                                acc += (rp[x] * ry[xp] - rp[xp] * ry[x]).norm_sqr();
                            }
                        }
                        acc
                    })
                    .collect();
                pairwise_sum(&per)
            })
            .collect();
        // the four orderings of (y, y') and (x̄, x̄') contribute equally
        4.0 * pairwise_sum(&rows)
    }

    /// `2[1 - Σ |K(y', y)|²]` with `K(y', y) = Σ_x̄ a(y', x̄) a*(y, x̄)`.
    fn overlap_route(&self) -> f64 {
        let rows: Vec<f64> = (0..self.m)
            .into_par_iter()
            .map(|yp| {
                let rp = self.row(yp);
                let per: Vec<f64> = (0..self.m)
                    .map(|y| {
                        let ry = self.row(y);
                        let k: Complex64 = rp.iter().zip(ry).map(|(u, v)| u * v.conj()).sum();
                        k.norm_sqr()
                    })
                    .collect();
                pairwise_sum(&per)
            })
            .collect();
        2.0 * (1.0 - pairwise_sum(&rows))
    }
}

fn lambda_sum(b: &[Complex64], lambda: &LambdaPermutation) -> f64 {
    let n = b.len();
    let rows: Vec<f64> = (0..n)
        .into_par_iter()
        .map(|i1| {
            let per: Vec<f64> = (0..n)
                .map(|i2| {
                    let (j1, j2) = lambda.apply(i1, i2);
                    (b[i1] * b[i2] * (b[j1] * b[j2]).conj()).re
                })
                .collect();
            pairwise_sum(&per)
        })
        .collect();
    2.0 * (1.0 - pairwise_sum(&rows))
}

fn weighted(state: &GridState, bipartition: &Bipartition) -> Result<Weighted> {
    Ok(Weighted::new(&BipartiteAmplitudes::new(state, bipartition)?))
}

/// Route A: the direct wedge integral over all four blocks.
pub fn concurrence_route_a(state: &GridState, bipartition: &Bipartition) -> Result<f64> {
    Ok(weighted(state, bipartition)?.wedge_sum())
}

/// Route B: `2[1 - ∫∫ |K(y', y)|²]` through the overlap kernel.
pub fn concurrence_route_b(state: &GridState, bipartition: &Bipartition) -> Result<f64> {
    Ok(weighted(state, bipartition)?.overlap_route())
}

/// Route Λ: `2[1 - Re⟨Φ̃, Φ̃∘Λ_m⟩]` on the doubled grid.
pub fn concurrence_route_lambda(state: &GridState, bipartition: &Bipartition) -> Result<f64> {
    let lambda = LambdaPermutation::for_state(state, bipartition)?;
    let b: Vec<Complex64> = state
        .amplitudes()
        .iter()
        .zip(state.weights())
        .map(|(a, w)| a * w.sqrt())
        .collect();
    Ok(lambda_sum(&b, &lambda))
}

/// Monotone map `f` of the measure family.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum FamilyFn {
    Identity,
    TwoXSquared,
    Power(f64),
}

impl FamilyFn {
    pub fn validate(&self) -> Result<()> {
        match *self {
            FamilyFn::Power(alpha) if !(alpha > 0.0 && alpha.is_finite()) => {
                input(format!("power exponent must be positive, got {alpha}"))
            }
            _ => Ok(()),
        }
    }

    pub fn apply(&self, x: f64) -> f64 {
        match *self {
            FamilyFn::Identity => x,
            FamilyFn::TwoXSquared => 2.0 * x * x,
            FamilyFn::Power(alpha) => x.powf(alpha),
        }
    }
}

impl FromStr for FamilyFn {
    type Err = Error;

    /// `identity`, `two_x_squared` or `power:<α>`.
    fn from_str(s: &str) -> Result<Self> {
        let f = match s.trim() {
            "identity" => FamilyFn::Identity,
            "two_x_squared" => FamilyFn::TwoXSquared,
            other => match other.strip_prefix("power:") {
                Some(a) => FamilyFn::Power(
                    a.parse()
                        .map_err(|_| Error::Input(format!("bad power exponent {a:?}")))?,
                ),
                None => return input(format!("unknown family function {other:?}")),
            },
        };
        f.validate()?;
        Ok(f)
    }
}

/// `ℰ = [∫∫ f(‖slice_y' ∧ slice_y‖_p) dy dy']^{1/q}`.
pub fn family_measure(
    state: &GridState,
    bipartition: &Bipartition,
    f: FamilyFn,
    p: PNorm,
    q: f64,
) -> Result<f64> {
    f.validate()?;
    if !(q > 0.0 && q.is_finite()) {
        return input(format!("q must be positive, got {q}"));
    }
    let ba = BipartiteAmplitudes::new(state, bipartition)?;
    let rows: Vec<f64> = (0..ba.m_size)
        .into_par_iter()
        .map(|y| {
            let per: Vec<f64> = ((y + 1)..ba.m_size)
                .map(|yp| {
                    let norm = wedge_norm(ba.slice(yp), ba.slice(y), &ba.rest_weights, p);
                    f.apply(norm) * ba.m_weights[y] * ba.m_weights[yp]
                })
                .collect();
            pairwise_sum(&per)
        })
        .collect();
    // ordered pairs: (y, y') and (y', y) contribute equally, y = y' gives f(0) = 0
    let total = 2.0 * pairwise_sum(&rows);
    Ok(total.max(0.0).powf(1.0 / q))
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "lowercase")]
pub enum Verdict {
    Separable,
    Entangled,
}

/// The largest weighted squared wedge coefficient and where it occurs.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct EntanglementWitness {
    /// Block indices `(y, y')` into the `M` grid and `(x̄, x̄')` into the `M̄` grid.
    pub m_indices: (usize, usize),
    pub rest_indices: (usize, usize),
    pub y: Vec<f64>,
    pub y_prime: Vec<f64>,
    pub x: Vec<f64>,
    pub x_prime: Vec<f64>,
    /// `|φ(y,x̄)φ(y',x̄') - φ(y,x̄')φ(y',x̄)|² w_y w_y' w_x̄ w_x̄'`
    pub magnitude: f64,
}

/// Normalized factor states with `ψ ≈ f ⊗ g`.
#[derive(Debug, Clone)]
pub struct SeparableFactors {
    pub m_state: GridState,
    pub rest_state: GridState,
    pub reference_slice: usize,
    /// `max |φ(y, x̄) - f(y) g(x̄)|`
    pub reconstruction_error: f64,
}

#[derive(Debug, Clone)]
pub enum Evidence {
    Witness(EntanglementWitness),
    Factors(SeparableFactors),
}

#[derive(Debug, Clone)]
pub struct SeparabilityCertificate {
    pub verdict: Verdict,
    pub threshold: f64,
    pub max_coefficient: f64,
    pub evidence: Evidence,
}

impl SeparabilityCertificate {
    pub fn witness(&self) -> Option<&EntanglementWitness> {
        match &self.evidence {
            Evidence::Witness(w) => Some(w),
            Evidence::Factors(_) => None,
        }
    }

    pub fn factors(&self) -> Option<&SeparableFactors> {
        match &self.evidence {
            Evidence::Factors(f) => Some(f),
            Evidence::Witness(_) => None,
        }
    }
}

fn block_rule(state: &GridState, axes: &[usize]) -> Result<ProductRule> {
    ProductRule::new(axes.iter().map(|&k| state.rule().axes()[k].clone()).collect())
}

/// `(max, y, y', x̄, x̄')` over strictly ordered pairs, first occurrence on ties.
fn max_coefficient(w: &Weighted) -> (f64, usize, usize, usize, usize) {
    let best = (0..w.m)
        .into_par_iter()
        .map(|y| {
            let ry = w.row(y);
            let mut best = (-1.0, y, y, 0, 0);
            for yp in (y + 1)..w.m {
                let rp = w.row(yp);
                for x in 0..w.r {
                    for xp in (x + 1)..w.r {
                        let c = (ry[x] * rp[xp] - ry[xp] * rp[x]).norm_sqr();
                        if c > best.0 {
                            best = (c, y, yp, x, xp);
                        }
                    }
                }
            }
            best
        })
        .collect::<Vec<_>>();
    best.into_iter()
        .fold((0.0, 0, 0, 0, 0), |acc, b| if b.0 > acc.0 { b } else { acc })
}

/// Threshold-relative separability verdict with a witness or the factors.
pub fn decide_separability(
    state: &GridState,
    bipartition: &Bipartition,
    threshold: f64,
) -> Result<SeparabilityCertificate> {
    if !(threshold >= 0.0) {
        return input(format!("threshold must be non-negative, got {threshold}"));
    }
    let ba = BipartiteAmplitudes::new(state, bipartition)?;
    let w = Weighted::new(&ba);
    let norms: Vec<f64> = (0..w.m)
        .map(|y| w.row(y).iter().map(|z| z.norm_sqr()).sum::<f64>())
        .collect();
    let (y_hat, &top) = norms
        .iter()
        .enumerate()
        .fold((0, &norms[0]), |acc, (i, n)| if *n > *acc.1 { (i, n) } else { acc });
    if !(top > 0.0) {
        return Err(Error::Degenerate("every slice of the state vanishes".into()));
    }
    let (max_c, y, yp, x, xp) = max_coefficient(&w);
    let m_rule = block_rule(state, bipartition.members())?;
    let rest_rule = block_rule(state, &bipartition.complement_members())?;
    if max_c > threshold {
        return Ok(SeparabilityCertificate {
            verdict: Verdict::Entangled,
            threshold,
            max_coefficient: max_c,
            evidence: Evidence::Witness(EntanglementWitness {
                m_indices: (y, yp),
                rest_indices: (x, xp),
                y: m_rule.coordinates(y),
                y_prime: m_rule.coordinates(yp),
                x: rest_rule.coordinates(x),
                x_prime: rest_rule.coordinates(xp),
                magnitude: max_c,
            }),
        });
    }
    // g = slice_ŷ / ‖slice_ŷ‖ and f(y) = ⟨slice_ŷ, slice_y⟩ / ‖slice_ŷ‖
    let reference = ba.slice(y_hat);
    let ref_norm2: f64 = reference
        .iter()
        .zip(&ba.rest_weights)
        .map(|(a, w)| a.norm_sqr() * w)
        .sum();
    let ref_norm = ref_norm2.sqrt();
    let g: Vec<Complex64> = reference.iter().map(|a| a / ref_norm).collect();
    let f: Vec<Complex64> = (0..ba.m_size)
        .map(|yy| {
            let s: Complex64 = ba
                .slice(yy)
                .iter()
                .zip(reference)
                .zip(&ba.rest_weights)
                .map(|((a, r), w)| r.conj() * a * w)
                .sum();
            s / ref_norm
        })
        .collect();
    let m_state = GridState::normalized(m_rule, f)?;
    let rest_state = GridState::normalized(rest_rule, g)?;
    let mut err = 0.0f64;
    for yy in 0..ba.m_size {
        for xx in 0..ba.rest_size {
            let rebuilt = m_state.amplitudes()[yy] * rest_state.amplitudes()[xx];
            err = err.max((ba.at(yy, xx) - rebuilt).norm());
        }
    }
    Ok(SeparabilityCertificate {
        verdict: Verdict::Separable,
        threshold,
        max_coefficient: max_c.max(0.0),
        evidence: Evidence::Factors(SeparableFactors {
            m_state,
            rest_state,
            reference_slice: y_hat,
            reconstruction_error: err,
        }),
    })
}

/// `f ⊗ g` over the block layout of `bipartition`.
pub fn tensor_product(
    m_state: &GridState,
    rest_state: &GridState,
    bipartition: &Bipartition,
) -> Result<GridState> {
    let n = bipartition.n();
    if m_state.n_axes() != bipartition.members().len() || rest_state.n_axes() + m_state.n_axes() != n {
        return input("factor axes do not match the bipartition");
    }
    let mut axes = vec![None; n];
    for (i, &k) in bipartition.members().iter().enumerate() {
        axes[k] = Some(m_state.rule().axes()[i].clone());
    }
    for (i, k) in bipartition.complement_members().into_iter().enumerate() {
        axes[k] = Some(rest_state.rule().axes()[i].clone());
    }
    let rule = ProductRule::new(axes.into_iter().map(Option::unwrap).collect())?;
    let layout = crate::state::BlockLayout::new(&rule.shape(), bipartition)?;
    let amps = (0..layout.total())
        .map(|lin| {
            let (y, x) = layout.split(lin);
            m_state.amplitudes()[y] * rest_state.amplitudes()[x]
        })
        .collect();
    GridState::unchecked(rule, amps)
}

/// Selectable routes of a [`ConcurrenceReport`].
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize)]
pub enum Route {
    A,
    B,
    C,
    Lambda,
    D,
    E,
}

impl Route {
    pub const DEFAULT: [Route; 4] = [Route::A, Route::B, Route::C, Route::Lambda];
    pub const ALL: [Route; 6] = [Route::A, Route::B, Route::C, Route::Lambda, Route::D, Route::E];
}

impl FromStr for Route {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s.trim().to_ascii_lowercase().as_str() {
            "a" | "wedge" => Ok(Route::A),
            "b" | "overlap" => Ok(Route::B),
            "c" | "purity" => Ok(Route::C),
            "lambda" | "l" => Ok(Route::Lambda),
            "d" | "hs" => Ok(Route::D),
            "e" | "pt4" => Ok(Route::E),
            other => input(format!("unknown route {other:?}")),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ConcurrenceReport {
    #[serde(skip_serializing_if = "Option::is_none")]
    pub route_a_wedge: Option<f64>,
    /// Set when route A ran on every `stride`-th node of each block.
    #[serde(skip_serializing_if = "Option::is_none")]
    pub route_a_stride: Option<usize>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub route_b_overlap: Option<f64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub route_c_purity: Option<f64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub route_lambda: Option<f64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub route_lambda_stride: Option<usize>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub route_d_hilbert_schmidt: Option<f64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub route_e_pt_fourth: Option<f64>,
    pub max_pairwise_gap: f64,
    pub verdict: Verdict,
    pub threshold: f64,
    pub max_wedge_coefficient: f64,
    pub warnings: Vec<String>,
}

impl ConcurrenceReport {
    /// Every computed full-grid route value, in route order.
    pub fn values(&self) -> Vec<(Route, f64)> {
        let mut out = Vec::new();
        let pairs = [
            (Route::A, self.route_a_wedge.filter(|_| self.route_a_stride.is_none())),
            (Route::B, self.route_b_overlap),
            (Route::C, self.route_c_purity),
            (Route::Lambda, self.route_lambda.filter(|_| self.route_lambda_stride.is_none())),
            (Route::D, self.route_d_hilbert_schmidt),
            (Route::E, self.route_e_pt_fourth),
        ];
        for (r, v) in pairs {
            if let Some(v) = v {
                out.push((r, v));
            }
        }
        out
    }
}

fn stride_for(w: &Weighted) -> usize {
    let mut s = 1;
    while w.strided(s).map(|x| x.quartic_cost()).unwrap_or(0) > QUARTIC_BUDGET {
        s += 1;
    }
    s
}

/// Runs the requested routes on one grid state.
pub fn concurrence_report(
    state: &GridState,
    bipartition: &Bipartition,
    routes: &[Route],
    threshold: f64,
) -> Result<ConcurrenceReport> {
    bipartition.check_state(state)?;
    let w = weighted(state, bipartition)?;
    let want = |r: Route| routes.contains(&r);
    let mut warnings = Vec::new();
    let mut sub_gaps = Vec::new();

    let full_b = w.overlap_route();
    let quartic_stride = if w.quartic_cost() > QUARTIC_BUDGET { stride_for(&w) } else { 1 };
    let sub = if quartic_stride > 1 && (want(Route::A) || want(Route::Lambda)) {
        warnings.push(format!(
            "routes A and Λ evaluated on a stride-{quartic_stride} sub-grid"
        ));
        Some(w.strided(quartic_stride)?)
    } else {
        None
    };
    let sub_b = sub.as_ref().map(Weighted::overlap_route);

    let route_a = if want(Route::A) {
        let v = match &sub {
            Some(s) => {
                let v = s.wedge_sum();
                sub_gaps.push((v - sub_b.unwrap()).abs());
                v
            }
            None => w.wedge_sum(),
        };
        Some(v)
    } else {
        None
    };
    let route_lambda = if want(Route::Lambda) {
        let v = match &sub {
            Some(s) => {
                let lambda = LambdaPermutation::new(&[s.m, s.r], &Bipartition::new(2, [0])?)?;
                let v = lambda_sum(&s.a, &lambda);
                sub_gaps.push((v - sub_b.unwrap()).abs());
                v
            }
            None => concurrence_route_lambda(state, bipartition)?,
        };
        Some(v)
    } else {
        None
    };
    let route_c = if want(Route::C) {
        Some(concurrence_route_c(state, bipartition)?)
    } else {
        None
    };
    let operator_ok = state.len() <= OPERATOR_BUDGET;
    if !operator_ok && (want(Route::D) || want(Route::E)) {
        warnings.push(format!(
            "routes D and E skipped: {} nodes exceed the operator budget of {OPERATOR_BUDGET}",
            state.len()
        ));
    }
    let route_d = if want(Route::D) && operator_ok {
        Some(concurrence_route_d(state, bipartition)?)
    } else {
        None
    };
    let route_e = if want(Route::E) && operator_ok {
        Some(concurrence_route_e(state, bipartition)?)
    } else {
        None
    };
    let cert = decide_separability(state, bipartition, threshold)?;

    let stride = |on: bool| (on && sub.is_some()).then_some(quartic_stride);
    let mut report = ConcurrenceReport {
        route_a_wedge: route_a,
        route_a_stride: stride(route_a.is_some()),
        route_b_overlap: want(Route::B).then_some(full_b),
        route_c_purity: route_c,
        route_lambda,
        route_lambda_stride: stride(route_lambda.is_some()),
        route_d_hilbert_schmidt: route_d,
        route_e_pt_fourth: route_e,
        max_pairwise_gap: 0.0,
        verdict: cert.verdict,
        threshold,
        max_wedge_coefficient: cert.max_coefficient,
        warnings,
    };
    let mut values: Vec<f64> = report.values().into_iter().map(|(_, v)| v).collect();
    if !want(Route::B) && values.len() == 1 && sub.is_none() {
        values.push(full_b);
    }
    let mut gap = sub_gaps.into_iter().fold(0.0, f64::max);
    for (i, a) in values.iter().enumerate() {
        for b in &values[i + 1..] {
            gap = gap.max((a - b).abs());
        }
    }
    report.max_pairwise_gap = gap;
    Ok(report)
}

/// Discretizes `state` on `rule` and reports routes A, B, C and Λ.
pub fn concurrence_gaussian_numeric(
    state: &GaussianPureState,
    bipartition: &Bipartition,
    rule: &ProductRule,
) -> Result<ConcurrenceReport> {
    let d = sample_on_rule(state, rule)?;
    let mut report = concurrence_report(&d.state, bipartition, &Route::DEFAULT, DEFAULT_THRESHOLD)?;
    let mut warnings = d.warnings;
    warnings.append(&mut report.warnings);
    report.warnings = warnings;
    Ok(report)
}
