mod common;

use cfwp_core::hypotheses::check_c_on;
use cfwp_core::integrator::DEFAULT_REL_TOL;
use cfwp_core::verdict::classify_mode;
use cfwp_core::{
    check_all, coefficients, integrate, verify_identities, ModeIndex, RadialModel, ShootOptions,
    Status, Verdict, WarpExpr,
};
use proptest::prelude::*;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

use common::*;

fn mode_strategy() -> impl Strategy<Value = ModeIndex> {
    (-4i64..=4, prop::bool::ANY, -5.0f64..5.0)
        .prop_map(|(k, e, lambda)| ModeIndex::new(k, 0, if e { 1 } else { -1 }, lambda))
}

fn family_strategy() -> impl Strategy<Value = (f64, f64, f64, f64)> {
    (0.5f64..2.0, 0.5f64..2.0, 0.1f64..10.0, 0.1f64..10.0)
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(256))]

    #[test]
    fn canonical_text_reparses_to_the_same_tree(seed in any::<u64>()) {
        let e = random_expr(&mut ChaCha8Rng::seed_from_u64(seed), 5);
        let text = e.canonical();
        let back = WarpExpr::parse(&text, &PARAMS).unwrap();
        prop_assert_eq!(&back, &e);
        prop_assert_eq!(back.canonical(), text);
    }

    #[test]
    fn evaluation_is_bitwise_repeatable(seed in any::<u64>(), t in 1e-3f64..1e3) {
        let f = bindings().bind(&random_expr(&mut ChaCha8Rng::seed_from_u64(seed), 5)).unwrap();
        match (f.eval(t), f.eval(t)) {
            (Ok(x), Ok(y)) => prop_assert_eq!(x.to_bits(), y.to_bits()),
            (Err(x), Err(y)) => prop_assert_eq!(x.to_string(), y.to_string()),
            _ => prop_assert!(false, "outcome changed between calls"),
        }
    }

    #[test]
    fn derivative_matches_finite_differences(seed in any::<u64>(), t in 0.1f64..10.0) {
        let f = bindings().bind(&random_expr(&mut ChaCha8Rng::seed_from_u64(seed), 4)).unwrap();
        let eval = |x: f64| f.eval(x).unwrap_or(f64::NAN);
        let h = 1e-5 * t.max(1.0);
        let near = [t - 2.0 * h, t - h, t, t + h, t + 2.0 * h].map(eval);
        prop_assume!(near.iter().all(|v| v.is_finite() && v.abs() < 1e3));
        let fd = central_difference(eval, t);
        let fd_half = {
            let h2 = h / 2.0;
            (8.0 * (eval(t + h2) - eval(t - h2)) - (eval(t + 2.0 * h2) - eval(t - 2.0 * h2)))
                / (12.0 * h2)
        };
        prop_assume!((fd - fd_half).abs() <= 1e-8 * fd.abs().max(1.0));
        let d = f.derivative().eval(t);
        prop_assume!(matches!(d, Ok(v) if v.is_finite()));
        let d = d.unwrap();
        prop_assert!((d - fd).abs() <= 1e-7 * d.abs().max(1.0), "d={} fd={}", d, fd);
    }
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]

    #[test]
    fn trace_identity_holds_pointwise(p in family_strategy(), mode in mode_strategy(), t in 1e-6f64..1e6) {
        let g = iwai_katayama(p.0, p.1, p.2, p.3);
        let c = coefficients(&g, mode).unwrap();
        prop_assert!(c.trace_identity_residual(t).unwrap() <= 1e-12);
    }

    #[test]
    fn chirality_flip_negates_the_diagonal(p in family_strategy(), mode in mode_strategy(), t in 1e-6f64..1e6) {
        let g = iwai_katayama(p.0, p.1, p.2, p.3);
        let flipped = ModeIndex { epsilon: -mode.epsilon, ..mode };
        let (r1, s1, t1) = coefficients(&g, mode).unwrap().entries(t).unwrap();
        let (r2, s2, t2) = coefficients(&g, flipped).unwrap().entries(t).unwrap();
        prop_assert_eq!(r1, -r2);
        prop_assert_eq!(t1, -t2);
        prop_assert_eq!(s1, s2);
    }

    #[test]
    fn hypotheses_ignore_the_probe_phase(p in family_strategy()) {
        let g = iwai_katayama(p.0, p.1, p.2, p.3);
        let first: Vec<Status> = check_all(&g).iter().map(|r| r.status).collect();
        let again: Vec<Status> = check_all(&g).iter().map(|r| r.status).collect();
        prop_assert_eq!(&first, &again);
        let flat = euclidean(1);
        prop_assert_eq!(
            check_c_on(&flat, false).unwrap().status,
            check_c_on(&flat, true).unwrap().status
        );
    }
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(16))]

    /// With `(-1)^l` held fixed, flipping the off-diagonal sign is the same as
    /// negating `lambda`; `(U, W) -> (U, -W)` carries solutions across.
    #[test]
    fn off_diagonal_sign_flip_conjugates_solutions(mode in mode_strategy(), u0 in -1.0f64..1.0, w0 in -1.0f64..1.0) {
        prop_assume!(u0.abs() + w0.abs() > 0.1);
        let g = iwai_katayama(1.0, 1.0, 1.0, 1.0);
        let g = cfwp_core::reparametrize(&g).unwrap().geometry;
        let mirrored = ModeIndex { lambda: -mode.lambda, ..mode };
        let a = integrate(&coefficients(&g, mode).unwrap(), 0.5, 5.0, [u0, w0], DEFAULT_REL_TOL).unwrap();
        let b = integrate(&coefficients(&g, mirrored).unwrap(), 0.5, 5.0, [u0, -w0], DEFAULT_REL_TOL).unwrap();
        let ([ua, wa], [ub, wb]) = (a.last().1, b.last().1);
        let size = ua.abs().max(wa.abs());
        prop_assert!((ua - ub).abs() <= 1e-8 * size && (wa + wb).abs() <= 1e-8 * size);
    }

    #[test]
    fn raw_and_substituted_systems_agree(mode in mode_strategy()) {
        let r = verify_identities(&euclidean(1), mode).unwrap();
        let c = r.check("transport").unwrap();
        prop_assert_eq!(c.status, cfwp_core::verdict::IdentityStatus::Pass, "{:?}", c);
    }

    #[test]
    fn decoupled_modes_match_the_closed_form(p in family_strategy(), k in -4i64..=4, e in prop::bool::ANY) {
        let g = iwai_katayama(p.0, p.1, p.2, p.3);
        let g = cfwp_core::reparametrize(&g).unwrap().geometry;
        let mode = ModeIndex::new(k, 0, if e { 1 } else { -1 }, 0.0);
        let r = verify_identities(&g, mode).unwrap();
        let c = r.check("decoupling").unwrap();
        prop_assert_eq!(c.status, cfwp_core::verdict::IdentityStatus::Pass, "{:?}", c);
    }

    #[test]
    fn tightening_never_swaps_definite_verdicts(mode in mode_strategy(), curved in prop::bool::ANY) {
        let g = if curved { iwai_katayama(1.0, 1.0, 1.0, 1.0) } else { euclidean(1) };
        let model = RadialModel::new(g).unwrap();
        let loose = ShootOptions { rel_tol: 1e-8, ..ShootOptions::default() };
        let tight = ShootOptions { rel_tol: 1e-10, ..ShootOptions::default() };
        let a = classify_mode(&model, mode, &loose).unwrap().verdict();
        let b = classify_mode(&model, mode, &tight).unwrap().verdict();
        prop_assert!(
            !matches!((a, b), (Verdict::NoL2, Verdict::CandidateL2) | (Verdict::CandidateL2, Verdict::NoL2)),
            "{:?} -> {:?}", a, b
        );
    }

    #[test]
    fn admissible_geometries_have_no_candidates(p in family_strategy(), mode in mode_strategy()) {
        let model = RadialModel::new(iwai_katayama(p.0, p.1, p.2, p.3)).unwrap();
        prop_assume!(model.hypotheses_ok());
        let v = classify_mode(&model, mode, &ShootOptions::default()).unwrap();
        prop_assert_ne!(v.verdict(), Verdict::CandidateL2);
    }
}
