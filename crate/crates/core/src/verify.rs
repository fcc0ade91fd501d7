//! The identity checks behind `cvconc verify`.

use rayon::prelude::*;
use serde::Serialize;

use crate::concurrence::{concurrence_report, decide_separability, Route, Verdict, OPERATOR_BUDGET};
use crate::error::Result;
use crate::spectral::{hs_identity_gap, reduce, von_neumann_entropy};
use crate::state::{BipartiteAmplitudes, Bipartition, GridState, NORM_TOLERANCE};
use crate::transpose::{pt_square_factorization_gap, pt_traces, ppt_min_eigenvalue, LambdaPermutation};
use crate::wedge::lagrange_identity_gap;

pub const IDENTITY_TOLERANCE: f64 = 1e-10;
pub const LAGRANGE_TOLERANCE: f64 = 1e-12;
pub const ENTROPY_SLACK: f64 = 1e-9;
/// `E²` above which `ρ_PT` must show a clearly negative eigenvalue.
pub const ENTANGLED_E2: f64 = 1e-3;
pub const ENTANGLED_EIGENVALUE: f64 = -1e-6;
pub const SEPARABLE_EIGENVALUE: f64 = -1e-8;
/// Slices used for the Lagrange check; all pairs among them are tested.
pub const LAGRANGE_SLICES: usize = 16;
/// Largest `M̄` block for which the Lagrange check builds bivectors.
pub const LAGRANGE_MAX_REST: usize = 1024;

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Check {
    pub name: String,
    pub measured: f64,
    pub tolerance: f64,
    pub pass: bool,
}

impl Check {
    fn at_most(name: &str, measured: f64, tolerance: f64) -> Self {
        Check {
            name: name.into(),
            measured,
            tolerance,
            pass: measured <= tolerance,
        }
    }

    fn at_least(name: &str, measured: f64, tolerance: f64) -> Self {
        Check {
            name: name.into(),
            measured,
            tolerance,
            pass: measured >= tolerance,
        }
    }

    fn below(name: &str, measured: f64, tolerance: f64) -> Self {
        Check {
            name: name.into(),
            measured,
            tolerance,
            pass: measured < tolerance,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Skipped {
    pub name: String,
    pub reason: String,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct VerificationReport {
    pub checks: Vec<Check>,
    pub skipped: Vec<Skipped>,
    /// False when the state is not normalized; later checks are then skipped.
    pub state_valid: bool,
    pub pass: bool,
}

impl VerificationReport {
    fn finish(checks: Vec<Check>, skipped: Vec<Skipped>, state_valid: bool) -> Self {
        let pass = state_valid && checks.iter().all(|c| c.pass);
        VerificationReport {
            checks,
            skipped,
            state_valid,
            pass,
        }
    }

    pub fn failures(&self) -> impl Iterator<Item = &Check> {
        self.checks.iter().filter(|c| !c.pass)
    }
}

fn lagrange_gap(ba: &BipartiteAmplitudes) -> Result<f64> {
    let slices: Vec<usize> = if ba.m_size <= LAGRANGE_SLICES {
        (0..ba.m_size).collect()
    } else {
        (0..LAGRANGE_SLICES).map(|k| k * ba.m_size / LAGRANGE_SLICES).collect()
    };
    let pairs: Vec<(usize, usize)> = slices
        .iter()
        .enumerate()
        .flat_map(|(i, &a)| slices[i + 1..].iter().map(move |&b| (a, b)))
        .collect();
    let gaps = pairs
        .par_iter()
        .map(|&(a, b)| lagrange_identity_gap(ba.slice(a), ba.slice(b), &ba.rest_weights))
        .collect::<Result<Vec<_>>>()?;
    Ok(gaps.into_iter().fold(0.0, f64::max))
}

/// `(Σ w w |Φ̃ - Φ̃∘Λ|², max √(w w)|Φ̃ - Φ̃∘Λ|)` over the doubled grid.
fn weighted_lambda_gaps(state: &GridState, bipartition: &Bipartition) -> Result<(f64, f64)> {
    let lambda = LambdaPermutation::for_state(state, bipartition)?;
    let w = state.weights();
    let b: Vec<_> = state
        .amplitudes()
        .iter()
        .zip(&w)
        .map(|(a, w)| a * w.sqrt())
        .collect();
    let n = b.len();
    let (sum, max) = (0..n)
        .into_par_iter()
        .map(|i1| {
            let mut s = 0.0;
            let mut m = 0.0f64;
            for i2 in 0..n {
                let (j1, j2) = lambda.apply(i1, i2);
                let d = (b[i1] * b[i2] - b[j1] * b[j2]).norm_sqr();
                s += d;
                m = m.max(d);
            }
            (s, m)
        })
        .reduce(|| (0.0, 0.0), |a, b| (a.0 + b.0, a.1.max(b.1)));
    Ok((sum, max.sqrt()))
}

/// Runs every identity check on a possibly unnormalized grid state.
pub fn verify_state(
    state: &GridState,
    bipartition: &Bipartition,
    threshold: f64,
) -> Result<VerificationReport> {
    bipartition.check_state(state)?;
    let mut checks = Vec::new();
    let mut skipped = Vec::new();
    let defect = (state.norm_squared() - 1.0).abs();
    checks.push(Check::at_most("normalization", defect, NORM_TOLERANCE));
    if defect > NORM_TOLERANCE {
        skipped.push(Skipped {
            name: "identities".into(),
            reason: "state is not normalized".into(),
        });
        return Ok(VerificationReport::finish(checks, skipped, false));
    }

    let ba = BipartiteAmplitudes::new(state, bipartition)?;
    if ba.rest_size <= LAGRANGE_MAX_REST {
        checks.push(Check::at_most("lagrange_identity", lagrange_gap(&ba)?, LAGRANGE_TOLERANCE));
    } else {
        skipped.push(Skipped {
            name: "lagrange_identity".into(),
            reason: format!("M̄ block of {} nodes exceeds {LAGRANGE_MAX_REST}", ba.rest_size),
        });
    }

    let operators = state.len() <= OPERATOR_BUDGET;
    let routes: &[Route] = if operators { &Route::ALL } else { &Route::DEFAULT };
    let report = concurrence_report(state, bipartition, routes, threshold)?;
    checks.push(Check::at_most("route_agreement", report.max_pairwise_gap, IDENTITY_TOLERANCE));
    let e2 = report
        .route_b_overlap
        .or(report.route_c_purity)
        .unwrap_or_default();

    let (lambda_sq, lambda_max) = weighted_lambda_gaps(state, bipartition)?;
    checks.push(Check::at_most("lambda_gap_vs_concurrence", (lambda_sq - e2).abs(), IDENTITY_TOLERANCE));

    let cert = decide_separability(state, bipartition, threshold)?;
    let separable = cert.verdict == Verdict::Separable;
    if separable {
        checks.push(Check::at_most("lambda_invariance_separable", lambda_max * lambda_max, threshold));
    }

    if operators {
        let (t1, t2) = pt_traces(state, bipartition)?;
        checks.push(Check::at_most("trace_rho_pt", (t1 - 1.0).abs(), IDENTITY_TOLERANCE));
        checks.push(Check::at_most("trace_rho_pt_squared", (t2 - 1.0).abs(), IDENTITY_TOLERANCE));
        checks.push(Check::at_most(
            "pt_square_factorization",
            pt_square_factorization_gap(state, bipartition)?,
            IDENTITY_TOLERANCE,
        ));
        checks.push(Check::at_most("hs_identity", hs_identity_gap(state, bipartition)?, IDENTITY_TOLERANCE));
        let min_eig = ppt_min_eigenvalue(state, bipartition)?;
        if separable {
            checks.push(Check::at_least("ppt_separable", min_eig, SEPARABLE_EIGENVALUE));
        } else if e2 > ENTANGLED_E2 {
            checks.push(Check::below("ppt_entangled", min_eig, ENTANGLED_EIGENVALUE));
        } else {
            skipped.push(Skipped {
                name: "ppt".into(),
                reason: format!("weakly entangled (E² = {e2:.3e}); no eigenvalue pin applies"),
            });
        }
    } else {
        skipped.push(Skipped {
            name: "operator_identities".into(),
            reason: format!("{} nodes exceed the operator budget of {OPERATOR_BUDGET}", state.len()),
        });
    }

    let s = von_neumann_entropy(&reduce(state, bipartition)?)?;
    checks.push(Check::at_most("entropy_bound", e2 / 2.0 - s, ENTROPY_SLACK));
    if separable {
        checks.push(Check::below("entropy_separable", s, ENTROPY_SLACK));
    }
    Ok(VerificationReport::finish(checks, skipped, true))
}
