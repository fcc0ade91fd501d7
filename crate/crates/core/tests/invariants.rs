use cvconc::concurrence::{
    concurrence_report, concurrence_route_a, concurrence_route_b, concurrence_route_lambda, decide_separability,
    family_measure, FamilyFn, Route, Verdict,
};
use cvconc::corpus::{random_axes, random_grid_state, random_product_state, rng_from_seed, two_axis_corpus};
use cvconc::quadrature::ProductRule;
use cvconc::spectral::{concurrence_route_c, entropy_series, purity, reduce, von_neumann_entropy};
use cvconc::state::{Bipartition, GaussianPureState, GridAxis, GridState};
use cvconc::transpose::{
    concurrence_route_d, concurrence_route_e, ppt_min_eigenvalue, pt_square_factorization_gap, pt_traces,
    LambdaPermutation,
};
use cvconc::wedge::{lagrange_identity_gap, PNorm};
use cvconc::Complex64;
use proptest::prelude::*;

fn axis() -> impl Strategy<Value = GridAxis> {
    (2usize..=7, -6.0..-1.0f64, 1.0..6.0f64).prop_map(|(p, lo, hi)| GridAxis::new(lo, hi, p).unwrap())
}

fn amplitudes(len: usize) -> impl Strategy<Value = Vec<Complex64>> {
    prop::collection::vec((-1.0..1.0f64, -1.0..1.0f64), len)
        .prop_map(|v| v.into_iter().map(|(re, im)| Complex64::new(re, im)).collect())
}

/// Normalized states on `n` random axes; all-zero draws are nudged.
fn grid_state(n: usize) -> impl Strategy<Value = GridState> {
    prop::collection::vec(axis(), n).prop_flat_map(|axes| {
        let len = axes.iter().map(|a| a.points).product();
        amplitudes(len).prop_map(move |mut amps| {
            amps[0] += Complex64::new(1e-3, 0.0);
            GridState::normalized(ProductRule::midpoint(&axes).unwrap(), amps).unwrap()
        })
    })
}

fn m0() -> Bipartition {
    Bipartition::new(2, [0]).unwrap()
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]

    #[test]
    fn renormalized_states_have_unit_norm(s in grid_state(2)) {
        prop_assert!((s.norm_squared() - 1.0).abs() < 1e-12);
    }

    #[test]
    fn routes_agree_on_identical_data(s in grid_state(2)) {
        let bip = m0();
        let a = concurrence_route_a(&s, &bip).unwrap();
        let b = concurrence_route_b(&s, &bip).unwrap();
        let l = concurrence_route_lambda(&s, &bip).unwrap();
        let c = concurrence_route_c(&s, &bip).unwrap();
        let d = concurrence_route_d(&s, &bip).unwrap();
        let e = concurrence_route_e(&s, &bip).unwrap();
        prop_assert!((a - b).abs() < 1e-11);
        prop_assert!((a - l).abs() < 1e-11);
        prop_assert!((a - d).abs() < 1e-11);
        prop_assert!((a - c).abs() < 1e-10);
        prop_assert!((a - e).abs() < 1e-10);
        prop_assert!((-1e-12..=2.0 + 1e-9).contains(&a));
    }

    #[test]
    fn concurrence_is_symmetric_in_the_bipartition(s in grid_state(3), k in 0usize..3) {
        let bip = Bipartition::new(3, [k]).unwrap();
        let e_m = concurrence_route_c(&s, &bip).unwrap();
        let e_rest = concurrence_route_c(&s, &bip.complement()).unwrap();
        prop_assert!((e_m - e_rest).abs() < 1e-10);
        let p_m = purity(&reduce(&s, &bip).unwrap()).unwrap();
        let p_rest = purity(&reduce(&s, &bip.complement()).unwrap()).unwrap();
        prop_assert!((p_m - p_rest).abs() < 1e-10);
    }

    #[test]
    fn local_phases_leave_concurrence_unchanged(
        s in grid_state(2),
        theta in prop::collection::vec(-10.0..10.0f64, 7),
        eta in prop::collection::vec(-10.0..10.0f64, 7),
    ) {
        let bip = m0();
        let nx = s.shape()[1];
        let rotated = s
            .map_amplitudes(|i, a| a * Complex64::from_polar(1.0, theta[i / nx] + eta[i % nx]))
            .unwrap();
        let before = concurrence_route_a(&s, &bip).unwrap();
        let after = concurrence_route_a(&rotated, &bip).unwrap();
        prop_assert!((before - after).abs() < 1e-11);
    }

    #[test]
    fn family_preset_is_the_root_of_route_a(s in grid_state(2)) {
        let bip = m0();
        let f = family_measure(&s, &bip, FamilyFn::TwoXSquared, PNorm::Two, 2.0).unwrap();
        let a = concurrence_route_a(&s, &bip).unwrap();
        prop_assert!((f - a.max(0.0).sqrt()).abs() < 1e-12);
    }

    #[test]
    fn operator_identities_hold(s in grid_state(2)) {
        let bip = m0();
        let (t1, t2) = pt_traces(&s, &bip).unwrap();
        prop_assert!((t1 - 1.0).abs() < 1e-10);
        prop_assert!((t2 - 1.0).abs() < 1e-10);
        prop_assert!(pt_square_factorization_gap(&s, &bip).unwrap() < 1e-10);
    }

    #[test]
    fn entropy_dominates_half_the_concurrence(s in grid_state(2)) {
        let bip = m0();
        let e2 = concurrence_route_b(&s, &bip).unwrap();
        let ent = von_neumann_entropy(&reduce(&s, &bip).unwrap()).unwrap();
        prop_assert!(ent >= e2 / 2.0 - 1e-9);
    }

    #[test]
    fn lagrange_identity_on_random_pairs(
        (f, g, w) in (2usize..=200).prop_flat_map(|n| (
            amplitudes(n),
            amplitudes(n),
            prop::collection::vec(0.01..2.0f64, n),
        ))
    ) {
        prop_assert!(lagrange_identity_gap(&f, &g, &w).unwrap() < 1e-12);
    }

    #[test]
    fn gaussian_is_even(
        diag in prop::collection::vec(0.3..3.0f64, 3),
        c01 in -0.5..0.5f64, c12 in -0.5..0.5f64, m02 in -2.0..2.0f64,
        x in prop::collection::vec(-3.0..3.0f64, 3),
    ) {
        let g = GaussianPureState::from_couplings(
            &diag,
            &[(0, 1, Complex64::new(c01, 0.0)), (1, 2, Complex64::new(c12, 0.0)), (0, 2, Complex64::new(0.0, m02))],
        );
        prop_assume!(g.is_ok());
        let g = g.unwrap();
        let neg: Vec<f64> = x.iter().map(|v| -v).collect();
        let (p, q) = (g.evaluate(&x).unwrap(), g.evaluate(&neg).unwrap());
        prop_assert_eq!(p, q);
        prop_assert_eq!(p * q, p * p);
    }
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(24))]

    #[test]
    fn axis_permutation_with_matching_bipartition(s in grid_state(3), k in 0usize..3) {
        // reorder axes as (2, 0, 1): old axis j lands at position perm[j]
        let perm = [1usize, 2, 0];
        let shape = s.shape();
        let axes = s.rule().grid_axes().unwrap().to_vec();
        let new_axes: Vec<GridAxis> = vec![axes[2], axes[0], axes[1]];
        let new_shape = [shape[2], shape[0], shape[1]];
        let mut amps = vec![Complex64::new(0.0, 0.0); s.len()];
        for (lin, a) in s.amplitudes().iter().enumerate() {
            let i = [lin / (shape[1] * shape[2]), lin / shape[2] % shape[1], lin % shape[2]];
            let mut j = [0; 3];
            for ax in 0..3 {
                j[perm[ax]] = i[ax];
            }
            amps[(j[0] * new_shape[1] + j[1]) * new_shape[2] + j[2]] = *a;
        }
        let moved = GridState::new(new_axes, amps).unwrap();
        let bip = Bipartition::new(3, [k]).unwrap();
        let moved_bip = Bipartition::new(3, [perm[k]]).unwrap();
        let r1 = concurrence_report(&s, &bip, &Route::ALL, 1e-10).unwrap();
        let r2 = concurrence_report(&moved, &moved_bip, &Route::ALL, 1e-10).unwrap();
        for ((ra, va), (rb, vb)) in r1.values().into_iter().zip(r2.values()) {
            prop_assert_eq!(ra, rb);
            prop_assert!((va - vb).abs() < 1e-12, "{:?}: {} vs {}", ra, va, vb);
        }
        prop_assert_eq!(r1.verdict, r2.verdict);
    }
}

#[test]
fn lambda_is_an_involution_on_small_grids() {
    for nx in 1..=16 {
        for ny in [2, 5, 16] {
            for bip in [m0(), m0().complement()] {
                let lam = LambdaPermutation::new(&[nx.max(2), ny], &bip).unwrap();
                assert!(lam.is_involution());
                let len = lam.grid_len();
                for i1 in 0..len {
                    for i2 in 0..len {
                        let (j1, j2) = lam.apply(i1, i2);
                        assert_eq!(lam.apply(j1, j2), (i1, i2));
                    }
                }
            }
        }
    }
}

#[test]
fn route_agreement_on_larger_grids() {
    let bip = m0();
    for seed in 0..12u64 {
        let mut rng = rng_from_seed(1000 + seed);
        let axes = random_axes(&mut rng, 2, 20, 32).unwrap();
        let s = random_grid_state(&mut rng, &axes).unwrap();
        let a = concurrence_route_a(&s, &bip).unwrap();
        let b = concurrence_route_b(&s, &bip).unwrap();
        let l = concurrence_route_lambda(&s, &bip).unwrap();
        assert!((a - b).abs() < 1e-11 && (a - l).abs() < 1e-11, "seed {seed}: {a} {b} {l}");
    }
}

#[test]
fn faithfulness_on_the_corpus() {
    let bip = m0();
    for c in two_axis_corpus(99, 40).unwrap() {
        let e2 = concurrence_route_b(&c.state, &bip).unwrap();
        let verdict = decide_separability(&c.state, &bip, 1e-10).unwrap().verdict;
        assert_eq!(e2.abs() < 1e-10, verdict == Verdict::Separable, "{:?} E² = {e2}", c.kind);
    }
}

#[test]
fn ppt_matches_the_verdict_on_the_corpus() {
    let bip = m0();
    for c in two_axis_corpus(5, 24).unwrap() {
        let cert = decide_separability(&c.state, &bip, 1e-8).unwrap();
        let min = ppt_min_eigenvalue(&c.state, &bip).unwrap();
        assert_eq!(min >= -1e-8, cert.verdict == Verdict::Separable, "{:?}: {min}", c.kind);
    }
}

#[test]
fn weakly_entangled_entropy_series() {
    // a product state plus a small second product term
    let bip = m0();
    let mut checked = 0;
    for seed in 0..20u64 {
        let mut rng = rng_from_seed(seed);
        let axes = random_axes(&mut rng, 2, 8, 12).unwrap();
        let p = random_product_state(&mut rng, &axes, &bip).unwrap();
        let q = random_product_state(&mut rng, &axes, &bip).unwrap();
        let amps = p.amplitudes().iter().zip(q.amplitudes()).map(|(a, b)| a + b * 0.1).collect();
        let weak = GridState::normalized(p.rule().clone(), amps).unwrap();
        let e2 = concurrence_route_b(&weak, &bip).unwrap();
        if !(1e-6..0.05).contains(&e2) {
            continue;
        }
        checked += 1;
        let series = entropy_series(&reduce(&weak, &bip).unwrap(), 3).unwrap();
        assert!((series.partial_sums[0] - e2 / 2.0).abs() < 1e-12);
        assert!(series.entropy > e2 / 2.0);
        for k in 0..3 {
            assert!(series.partial_sums[k] <= series.entropy + 1e-12);
            assert!(series.entropy - series.partial_sums[k] <= series.tail_bounds[k] + 1e-12);
        }
    }
    assert!(checked >= 10, "{checked}");
}
