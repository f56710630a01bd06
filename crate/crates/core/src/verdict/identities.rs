use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::Serialize;

use crate::exprfn::{integrate_adaptive, QuadError};
use crate::geometry::{log_nodes, CfwpGeometry, Window};
use crate::integrator::{
    indicial, integrate, solve_bounded, IntegrateError, ShootOptions, Trajectory, DEFAULT_REL_TOL,
};
use crate::linalg::det_cols;
use crate::modes::{
    coefficients, raw_system, substitution_weight, ModeError, ModeIndex, RadialCoeffs,
};

const TRACE_POINTS: usize = 512;
const TRACE_TOL: f64 = 1e-12;
const DET_TOL: f64 = 1e-8;
const DET_PIECES_PER_DECADE: usize = 32;
const CLOSED_FORM_TOL: f64 = 1e-8;
const TRANSPORT_TOL: f64 = 1e-6;
const INEQUALITY_TOL: f64 = 1e-9;
const SEED: u64 = 0x5eed_c0de;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "lowercase")]
pub enum IdentityStatus {
    Pass,
    Fail,
    Skipped,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct IdentityCheck {
    pub name: &'static str,
    pub status: IdentityStatus,
    pub max_residual: Option<f64>,
    pub threshold: f64,
    pub note: String,
}

impl IdentityCheck {
    fn measured(
        name: &'static str,
        residual: f64,
        threshold: f64,
        note: impl Into<String>,
    ) -> Self {
        let status = if residual <= threshold {
            IdentityStatus::Pass
        } else {
            IdentityStatus::Fail
        };
        IdentityCheck {
            name,
            status,
            max_residual: Some(residual),
            threshold,
            note: note.into(),
        }
    }

    fn skipped(name: &'static str, threshold: f64, note: impl Into<String>) -> Self {
        IdentityCheck {
            name,
            status: IdentityStatus::Skipped,
            max_residual: None,
            threshold,
            note: note.into(),
        }
    }

    fn failed(name: &'static str, threshold: f64, note: impl Into<String>) -> Self {
        IdentityCheck {
            name,
            status: IdentityStatus::Fail,
            max_residual: None,
            threshold,
            note: note.into(),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct IdentityReport {
    pub geometry: String,
    pub mode: ModeIndex,
    pub checks: Vec<IdentityCheck>,
    pub all_pass: bool,
}

impl IdentityReport {
    pub fn check(&self, name: &str) -> Option<&IdentityCheck> {
        self.checks.iter().find(|c| c.name == name)
    }
}

fn quad(f: impl Fn(f64) -> f64, a: f64, b: f64) -> Result<f64, QuadError> {
    let (lo, hi, sign) = if a <= b { (a, b, 1.0) } else { (b, a, -1.0) };
    match integrate_adaptive(f, lo, hi, 1e-13) {
        Ok(q) => Ok(sign * q.value),
        Err(QuadError::ToleranceNotMet { estimate, .. }) => Ok(sign * estimate),
        Err(e) => Err(e),
    }
}

fn rel(got: f64, want: f64) -> f64 {
    if want == 0.0 {
        got.abs()
    } else {
        (got - want).abs() / want.abs()
    }
}

/// A moderate interval inside the window for the closed-form checks.
fn test_interval(w: &Window) -> (f64, f64) {
    let (a, b) = (0.5f64.max(w.t_min), 5.0f64.min(w.t_max));
    if a < b {
        (a, b)
    } else {
        let (l, h) = (w.t_min.ln(), w.t_max.ln());
        ((l + 0.25 * (h - l)).exp(), (l + 0.75 * (h - l)).exp())
    }
}

fn err_note(e: impl std::fmt::Display) -> String {
    format!("evaluation failed: {e}")
}

fn trace_check(c: &RadialCoeffs, w: &Window) -> IdentityCheck {
    let mut rng = ChaCha8Rng::seed_from_u64(SEED);
    let (l, h) = (w.t_min.ln(), w.t_max.ln());
    let mut worst: f64 = 0.0;
    for _ in 0..TRACE_POINTS {
        let t = rng.gen_range(l..h).exp();
        match c.trace_identity_residual(t) {
            Ok(r) => worst = worst.max(r),
            Err(e) => return IdentityCheck::failed("ine", TRACE_TOL, err_note(e)),
        }
    }
    IdentityCheck::measured(
        "ine",
        worst,
        TRACE_TOL,
        format!("rho + tau against the fiber term at {TRACE_POINTS} random points"),
    )
}

fn determinant_check(c: &RadialCoeffs, a: f64, b: f64) -> IdentityCheck {
    // det is multiplicative over subintervals; short pieces keep the two
    // columns far from parallel.
    let run = || -> Result<f64, String> {
        let cuts = log_nodes(a, b, DET_PIECES_PER_DECADE);
        let mut log_det = 0.0;
        for w in cuts.windows(2) {
            let e1 = integrate(c, w[0], w[1], [1.0, 0.0], DEFAULT_REL_TOL).map_err(err_note)?;
            let e2 = integrate(c, w[0], w[1], [0.0, 1.0], DEFAULT_REL_TOL).map_err(err_note)?;
            log_det += det_cols(&e1.last().1, &e2.last().1).ln();
        }
        let g = c.geometry();
        let e = c.mode().chiral_parity();
        let expo = quad(
            |t| {
                let al = g.alpha.value_or_nan(t);
                -e * g.beta.value_or_nan(t) / (2.0 * al * al)
            },
            a,
            b,
        )
        .map_err(err_note)?;
        Ok((log_det - expo).exp_m1().abs())
    };
    match run() {
        Ok(r) => IdentityCheck::measured(
            "determinant",
            r,
            DET_TOL,
            format!("det of the fundamental matrix on [{a}, {b}]"),
        ),
        Err(note) => IdentityCheck::failed("determinant", DET_TOL, note),
    }
}

/// Sign making `sigma` nonnegative; the inequalities are stated for `S = s U W`.
fn orientation(c: &RadialCoeffs) -> f64 {
    if c.mode().parity() * c.mode().lambda < 0.0 {
        -1.0
    } else {
        1.0
    }
}

fn inequality_checks(c: &RadialCoeffs, trajectories: &[Trajectory]) -> [IdentityCheck; 2] {
    let s = orientation(c);
    let g = c.geometry();
    let mut worst_in: f64 = 0.0;
    let mut worst_bound: f64 = 0.0;
    let mut positive_nodes = 0usize;
    for tr in trajectories {
        let mut run_start: Option<usize> = None;
        let mut run_max: f64 = 0.0;
        let mut decay = 0.0;
        for i in 0..tr.nodes.len() {
            let t = tr.nodes[i];
            let [u, w] = tr.states[i];
            let p = s * u * w;
            if p <= 0.0 {
                run_start = None;
                continue;
            }
            positive_nodes += 1;
            let (rho, sigma, tau) = match c.entries(t) {
                Ok(v) => v,
                Err(e) => {
                    let n = err_note(e);
                    return [
                        IdentityCheck::failed("in", INEQUALITY_TOL, n.clone()),
                        IdentityCheck::failed("uwnega", INEQUALITY_TOL, n),
                    ];
                }
            };
            let al = g.alpha.value_or_nan(t);
            let sq = u * u + w * w;
            let lhs = (rho + tau) * p + s * sigma * sq + p / (std::f64::consts::SQRT_2 * al);
            worst_in = worst_in.max((-lhs / sq).max(0.0));

            match run_start {
                None => {
                    run_start = Some(i);
                    run_max = p;
                    decay = 0.0;
                }
                Some(x) => {
                    let inv = |t: f64| 1.0 / (std::f64::consts::SQRT_2 * g.alpha.value_or_nan(t));
                    decay += quad(inv, tr.nodes[i - 1], t).unwrap_or(f64::NAN);
                    run_max = run_max.max(p);
                    let [ux, wx] = tr.states[x];
                    let floor = s * ux * wx * (-decay).exp();
                    worst_bound = worst_bound.max((floor - p).max(0.0) / run_max);
                }
            }
        }
    }
    let note = if positive_nodes == 0 {
        "no node with U W of the sign of sigma; vacuous".to_string()
    } else {
        format!("{positive_nodes} nodes with U W of the sign of sigma")
    };
    [
        IdentityCheck::measured("in", worst_in, INEQUALITY_TOL, note.clone()),
        IdentityCheck::measured("uwnega", worst_bound, INEQUALITY_TOL, note),
    ]
}

fn special_case_check(c: &RadialCoeffs, a: f64, b: f64) -> IdentityCheck {
    let mode = c.mode();
    let g = c.geometry();
    if !mode.is_special_case(g.m) {
        return IdentityCheck::skipped(
            "d",
            CLOSED_FORM_TOL,
            "needs k = 0, m = 2l + 1 and (-1)^l = -epsilon",
        );
    }
    let s = orientation(c);
    let run = || -> Result<f64, String> {
        let tr = integrate(c, a, b, [1.0, -0.3 * s], DEFAULT_REL_TOL).map_err(err_note)?;
        let d = |y: [f64; 2]| y[0] - s * y[1];
        let lam = mode.lambda.abs();
        let expo = quad(
            |t| {
                let al = g.alpha.value_or_nan(t);
                g.beta.value_or_nan(t) / (4.0 * al * al) - lam / al
            },
            a,
            b,
        )
        .map_err(err_note)?;
        Ok(rel(d(tr.last().1), d(tr.first().1) * expo.exp()))
    };
    match run() {
        Ok(r) => IdentityCheck::measured("d", r, CLOSED_FORM_TOL, "D = U - sign(sigma) W"),
        Err(n) => IdentityCheck::failed("d", CLOSED_FORM_TOL, n),
    }
}

fn decoupling_check(c: &RadialCoeffs, a: f64, b: f64) -> IdentityCheck {
    if c.mode().lambda != 0.0 {
        return IdentityCheck::skipped("decoupling", CLOSED_FORM_TOL, "needs lambda = 0");
    }
    let run = || -> Result<f64, String> {
        let tr = integrate(c, a, b, [1.0, 0.7], DEFAULT_REL_TOL).map_err(err_note)?;
        let ir = quad(|t| c.rho(t).unwrap_or(f64::NAN), a, b).map_err(err_note)?;
        let it = quad(|t| c.tau(t).unwrap_or(f64::NAN), a, b).map_err(err_note)?;
        let y = tr.last().1;
        Ok(rel(y[0], ir.exp()).max(rel(y[1], 0.7 * it.exp())))
    };
    match run() {
        Ok(r) => IdentityCheck::measured(
            "decoupling",
            r,
            CLOSED_FORM_TOL,
            "U and W against exp of the diagonal integrals",
        ),
        Err(n) => IdentityCheck::failed("decoupling", CLOSED_FORM_TOL, n),
    }
}

fn transport_check(geom: &CfwpGeometry, mode: ModeIndex, a: f64, b: f64) -> IdentityCheck {
    let raw = match raw_system(geom, mode) {
        Ok(r) => r,
        Err(ModeError::TabulatedProfileUnsupported) => {
            return IdentityCheck::skipped(
                "transport",
                TRANSPORT_TOL,
                "tabulated profiles have no exact derivatives",
            )
        }
        Err(e) => return IdentityCheck::failed("transport", TRANSPORT_TOL, e.to_string()),
    };
    let run = || -> Result<f64, String> {
        let c = coefficients(geom, mode).map_err(|e| e.to_string())?;
        let w = substitution_weight(geom);
        let (u0, w0) = (1.0, 0.5);
        let wa = w.value(a).map_err(err_note)?;
        let wb = w.value(b).map_err(err_note)?;
        let small = integrate(&raw, a, b, [u0, w0], DEFAULT_REL_TOL).map_err(err_note)?;
        let big = integrate(&c, a, b, [u0 * wa, w0 * wa], DEFAULT_REL_TOL).map_err(err_note)?;
        let (ys, yb) = (small.last().1, big.last().1);
        let scale = yb[0].abs().max(yb[1].abs());
        Ok((0..2)
            .map(|i| (ys[i] * wb - yb[i]).abs() / scale)
            .fold(0.0, f64::max))
    };
    match run() {
        Ok(r) => IdentityCheck::measured(
            "transport",
            r,
            TRANSPORT_TOL,
            "(u, w) times the weight against (U, W)",
        ),
        Err(n) => IdentityCheck::failed("transport", TRANSPORT_TOL, n),
    }
}

/// Runs the identity suite for one mode on `geom`.
pub fn verify_identities(
    geom: &CfwpGeometry,
    mode: ModeIndex,
) -> Result<IdentityReport, ModeError> {
    let c = coefficients(geom, mode)?;
    let (a, b) = test_interval(&geom.window);

    let mut trajectories = Vec::new();
    let mut notes = Vec::new();
    let lo = 1e-3f64.max(geom.window.t_min);
    let hi = 1e3f64.min(geom.window.t_max);
    match integrate(&c, lo, hi, [1.0, orientation(&c)], DEFAULT_REL_TOL) {
        Ok(tr) => trajectories.push(tr),
        Err(IntegrateError::Overflow { partial, .. }) => trajectories.push(*partial),
        Err(e) => notes.push(err_note(e)),
    }
    if let Ok(data) = indicial(&c) {
        let opts = ShootOptions {
            t_max: 1e3,
            horizons: vec![10.0, 100.0, 1e3],
            ..ShootOptions::default()
        };
        if let Ok(runs) = solve_bounded(&c, &data, &opts) {
            trajectories.extend(runs.into_iter().map(|r| r.trajectory));
        }
    }

    let [ineq, bound] = if notes.is_empty() {
        inequality_checks(&c, &trajectories)
    } else {
        let n = notes.join("; ");
        [
            IdentityCheck::failed("in", INEQUALITY_TOL, n.clone()),
            IdentityCheck::failed("uwnega", INEQUALITY_TOL, n),
        ]
    };
    let checks = vec![
        trace_check(&c, &geom.window),
        determinant_check(&c, a, b),
        ineq,
        bound,
        special_case_check(&c, a, b),
        decoupling_check(&c, a, b),
        transport_check(geom, mode, a, b),
    ];
    let all_pass = checks.iter().all(|c| c.status != IdentityStatus::Fail);
    Ok(IdentityReport {
        geometry: geom.label.clone(),
        mode,
        checks,
        all_pass,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::exprfn::ParamBinding;
    use crate::geometry::{preset, reparametrize, PresetName};
    use std::f64::consts::SQRT_2;

    fn euclidean() -> CfwpGeometry {
        preset(
            PresetName::Euclidean,
            &ParamBinding::new(),
            1,
            Window::default(),
        )
        .unwrap()
    }

    fn status(r: &IdentityReport, name: &str) -> IdentityStatus {
        r.check(name).unwrap().status
    }

    #[test]
    fn flat_space_suite_passes() {
        let r = verify_identities(&euclidean(), ModeIndex::new(0, 0, 1, SQRT_2)).unwrap();
        assert!(r.all_pass, "{:#?}", r.checks);
        for name in ["ine", "determinant", "in", "uwnega", "transport"] {
            assert_eq!(status(&r, name), IdentityStatus::Pass, "{name}");
        }
        assert_eq!(status(&r, "d"), IdentityStatus::Skipped);
        assert_eq!(status(&r, "decoupling"), IdentityStatus::Skipped);
    }

    #[test]
    fn zero_eigenvalue_runs_the_decoupled_form() {
        let r = verify_identities(&euclidean(), ModeIndex::new(0, 0, 1, 0.0)).unwrap();
        assert_eq!(status(&r, "decoupling"), IdentityStatus::Pass);
        assert_eq!(status(&r, "d"), IdentityStatus::Skipped);
        assert!(r.all_pass, "{:#?}", r.checks);
    }

    #[test]
    fn special_case_closed_form() {
        for lambda in [0.5, 1.0, 2.0, -1.0] {
            let r = verify_identities(&euclidean(), ModeIndex::new(0, 0, -1, lambda)).unwrap();
            let d = r.check("d").unwrap();
            assert_eq!(d.status, IdentityStatus::Pass, "{lambda}: {d:?}");
            assert!(r.all_pass, "{:#?}", r.checks);
        }
    }

    #[test]
    fn tabulated_geometry_skips_transport() {
        let p = ParamBinding::new()
            .with("a", 1.0)
            .with("b", 1.0)
            .with("c", 1.0)
            .with("d", 1.0);
        let g = preset(PresetName::IwaiKatayama, &p, 1, Window::default()).unwrap();
        let r = reparametrize(&g).unwrap();
        let rep = verify_identities(&r.geometry, ModeIndex::new(2, 0, -1, 0.7)).unwrap();
        assert_eq!(status(&rep, "transport"), IdentityStatus::Skipped);
        assert!(rep.all_pass, "{:#?}", rep.checks);
    }
}
