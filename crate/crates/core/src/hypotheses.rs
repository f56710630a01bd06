//! Certified-numeric classification of the vanishing-criterion hypotheses.
//!
//! Every check returns a three-valued [`Status`]; a definite answer is only
//! given when the evidence meets an explicit decision rule.

use rayon::prelude::*;
use serde::{Serialize, Serializer};

use crate::exprfn::{integrate_adaptive, EvalError, QuadError};
use crate::geometry::{check_int_condition, hint_matches, AsymptoticHint, CfwpGeometry, Profile};
use crate::improper::{horizon_trend, Status, Trend};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Condition {
    A,
    B,
    C,
    APrime,
    BPrime,
    CPrime,
    Int,
}

impl Condition {
    pub fn as_str(self) -> &'static str {
        match self {
            Condition::A => "a",
            Condition::B => "b",
            Condition::C => "c",
            Condition::APrime => "a'",
            Condition::BPrime => "b'",
            Condition::CPrime => "c'",
            Condition::Int => "int",
        }
    }
}

impl Serialize for Condition {
    fn serialize<S: Serializer>(&self, s: S) -> Result<S::Ok, S::Error> {
        s.serialize_str(self.as_str())
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct HypothesisReport {
    pub condition: Condition,
    pub status: Status,
    /// `(probe point or horizon, value)` pairs.
    pub evidence: Vec<(f64, f64)>,
    pub narrative: String,
}

impl HypothesisReport {
    fn new(
        condition: Condition,
        status: Status,
        evidence: Vec<(f64, f64)>,
        narrative: String,
    ) -> Self {
        HypothesisReport {
            condition,
            status,
            evidence,
            narrative,
        }
    }

    fn from_error(condition: Condition, err: impl std::fmt::Display) -> Self {
        HypothesisReport::new(
            condition,
            Status::Inconclusive,
            Vec::new(),
            format!("evaluation failed: {err}"),
        )
    }
}

/// Conjunction of the statuses of `reports`.
pub fn aggregate(reports: &[HypothesisReport]) -> Status {
    Status::all(reports.iter().map(|r| r.status))
}

const A_HORIZONS: [f64; 4] = [1e2, 1e3, 1e4, 1e5];
const A_NODES_PER_DECADE: usize = 256;
const SATURATION_DECADES: i32 = 15;
const SATURATION_REL: f64 = 1e-10;
const EXPONENT_SLACK: f64 = 1e-12;

fn seg_integral<F: Fn(f64) -> f64>(f: F, lo: f64, hi: f64) -> Result<f64, QuadError> {
    match integrate_adaptive(f, lo, hi, 1e-12) {
        Ok(q) => Ok(q.value),
        Err(QuadError::ToleranceNotMet { estimate, .. }) => Ok(estimate),
        Err(e) => Err(e),
    }
}

/// Partial integrals `∫_x^{h x} g(t) exp(-∫_x^t 1/(sqrt(2) alpha))` over the
/// horizons, by Simpson's rule in `ln t` on a fine grid where the inner
/// exponent is integrated segment by segment.
fn outer_partials(
    alpha: &Profile,
    weight: Option<&Profile>,
    x: f64,
) -> Result<Vec<f64>, QuadError> {
    let inv = |t: f64| 1.0 / (std::f64::consts::SQRT_2 * alpha.value_or_nan(t));
    let decades = A_HORIZONS[A_HORIZONS.len() - 1].log10().round() as usize;
    // Even number of panels per decade for Simpson pairs.
    let n = decades * A_NODES_PER_DECADE;
    let h = 10f64.ln() / A_NODES_PER_DECADE as f64;
    let nodes: Vec<f64> = (0..=n).map(|k| x * (k as f64 * h).exp()).collect();
    let inner: Vec<f64> = nodes
        .par_windows(2)
        .map(|w| seg_integral(inv, w[0], w[1]))
        .collect::<Result<_, _>>()?;
    let mut exponent = 0.0;
    let mut integrand = Vec::with_capacity(n + 1);
    for (k, &t) in nodes.iter().enumerate() {
        if k > 0 {
            exponent += inner[k - 1];
        }
        let g = match weight {
            Some(p) => p.value_or_nan(t),
            None => 1.0,
        };
        // dt = t du
        integrand.push(g * (-exponent).exp() * t);
    }
    let mut partials = Vec::with_capacity(A_HORIZONS.len());
    let mut acc = 0.0;
    let mut k = 0;
    for j in 1..=decades {
        let end = j * A_NODES_PER_DECADE;
        while k < end {
            acc += h / 3.0 * (integrand[k] + 4.0 * integrand[k + 1] + integrand[k + 2]);
            k += 2;
        }
        if j >= 2 {
            partials.push(acc);
        }
    }
    if partials.iter().any(|v| !v.is_finite()) {
        return Err(QuadError::NonFinite { x });
    }
    Ok(partials)
}

/// True when `∫_x^∞ 1/(sqrt(2) alpha)` visibly saturates: the relative
/// increment over the last decade probed (up to `1e15 x`) is below 1e-10.
fn inner_saturates(alpha: &Profile, x: f64) -> bool {
    let inv = |t: f64| 1.0 / (std::f64::consts::SQRT_2 * alpha.value_or_nan(t));
    let mut total = 0.0;
    let mut last_inc = f64::INFINITY;
    for j in 1..=SATURATION_DECADES {
        let lo = x * 10f64.powi(j - 1);
        let hi = lo * 10.0;
        match seg_integral(inv, lo, hi) {
            Ok(v) => {
                total += v;
                last_inc = v;
            }
            Err(_) => return false,
        }
    }
    total > 0.0 && last_inc / total < SATURATION_REL
}

/// Growth class of `∫^∞ gamma` read from its hint: `Some(true)` diverges.
fn weight_integral_diverges(gamma: &Profile, hint: &AsymptoticHint) -> Option<bool> {
    if !hint_matches(gamma, hint) {
        return None;
    }
    match *hint {
        AsymptoticHint::Power { exponent, .. } => Some(exponent >= -1.0),
        AsymptoticHint::BoundedBelow { .. } => Some(true),
        AsymptoticHint::None => None,
    }
}

/// Condition (a): `∫_x^∞ exp(-∫_x^t 1/(sqrt(2) alpha)) dt = ∞`.
pub fn check_a(alpha: &Profile, x: f64, hint: &AsymptoticHint) -> HypothesisReport {
    check_a_impl(Condition::A, alpha, None, x, hint, &AsymptoticHint::None)
}

/// Condition (a'): the outer integrand carries the conformal factor.
pub fn check_a_prime(
    alpha: &Profile,
    gamma: &Profile,
    x: f64,
    alpha_hint: &AsymptoticHint,
    gamma_hint: &AsymptoticHint,
) -> HypothesisReport {
    check_a_impl(
        Condition::APrime,
        alpha,
        Some(gamma),
        x,
        alpha_hint,
        gamma_hint,
    )
}

fn check_a_impl(
    condition: Condition,
    alpha: &Profile,
    gamma: Option<&Profile>,
    x: f64,
    alpha_hint: &AsymptoticHint,
    gamma_hint: &AsymptoticHint,
) -> HypothesisReport {
    if !(x > 0.0 && x.is_finite()) {
        return HypothesisReport::from_error(
            condition,
            format!("base point x = {x} must be positive"),
        );
    }
    let partials = match outer_partials(alpha, gamma, x) {
        Ok(p) => p,
        Err(e) => return HypothesisReport::from_error(condition, e),
    };
    let evidence: Vec<(f64, f64)> = A_HORIZONS
        .iter()
        .map(|h| h * x)
        .zip(partials.iter().copied())
        .collect();
    let report = |status, narrative: String| {
        HypothesisReport::new(condition, status, evidence.clone(), narrative)
    };

    // How the weight behaves at infinity, when it is known.
    let weight_power = match (gamma, gamma_hint) {
        (None, _) => Some(0.0),
        (Some(g), AsymptoticHint::Power { exponent, .. }) if hint_matches(g, gamma_hint) => {
            Some(*exponent)
        }
        _ => None,
    };
    let weight_diverges = match gamma {
        None => Some(true),
        Some(g) => weight_integral_diverges(g, gamma_hint),
    };
    let bounded_below_branch = |why: String| {
        match weight_diverges {
        Some(true) => report(Status::Holds, format!("{why}; the integrand is bounded below by a multiple of the weight, whose integral diverges")),
        Some(false) => report(Status::Inconclusive, format!("{why}; the weight is integrable, so the bound is not enough")),
        None => report(Status::Inconclusive, format!("{why}; no usable hint for the weight")),
    }
    };

    if hint_matches(alpha, alpha_hint) {
        if let AsymptoticHint::Power {
            exponent: p,
            coefficient: c,
        } = *alpha_hint
        {
            if (p - 1.0).abs() <= EXPONENT_SLACK {
                let e = 1.0 / (std::f64::consts::SQRT_2 * c);
                return match (weight_power, gamma) {
                    (Some(q), _) => {
                        // integrand ~ t^(q - e)
                        let status = if q - e >= -1.0 - EXPONENT_SLACK { Status::Holds } else { Status::Fails };
                        report(status, format!("alpha ~ {c} t: integrand ~ t^({q} - {e:.6}), {}",
                            if status == Status::Holds { "not integrable" } else { "integrable" }))
                    }
                    (None, Some(_)) if weight_diverges == Some(true) && e <= 1.0 + EXPONENT_SLACK => report(
                        Status::Holds,
                        format!("alpha ~ {c} t gives decay t^(-{e:.6}) no faster than 1/t against a weight bounded below"),
                    ),
                    _ => report(Status::Inconclusive, format!("alpha ~ {c} t but the weight's growth is unknown")),
                };
            }
            if p > 1.0 {
                return bounded_below_branch(format!(
                    "alpha ~ t^{p} with p > 1: ∫ 1/alpha converges"
                ));
            }
            return match (weight_power, gamma) {
                (Some(_), _) => report(
                    Status::Fails,
                    format!("alpha ~ t^{p} with p < 1: the integrand decays faster than any power"),
                ),
                _ => report(
                    Status::Inconclusive,
                    format!("alpha ~ t^{p} with p < 1, but the weight's growth is unknown"),
                ),
            };
        }
    }

    if inner_saturates(alpha, x) {
        return bounded_below_branch("∫_x^t 1/(sqrt(2) alpha) saturates".into());
    }
    match horizon_trend(&partials) {
        Trend::Divergent => report(Status::Holds, "partial integrals grow without bound".into()),
        Trend::Convergent => report(Status::Fails, "partial integrals saturate".into()),
        Trend::Inconclusive => report(
            Status::Inconclusive,
            "growth of the partial integrals is undecided on the horizons probed".into(),
        ),
    }
}

const B_PROBES: [f64; 7] = [1e-3, 1e-4, 1e-5, 1e-6, 1e-7, 1e-8, 1e-9];
const B_SMALL: f64 = 1e-6;
const B_BOUNDED: f64 = 1e-3;

fn limit_zero<F: Fn(f64) -> Result<f64, EvalError>>(
    condition: Condition,
    f: F,
    what: &str,
) -> Result<HypothesisReport, EvalError> {
    let mut evidence = Vec::with_capacity(B_PROBES.len());
    for &t in &B_PROBES {
        evidence.push((t, f(t)?));
    }
    let v: Vec<f64> = evidence.iter().map(|e| e.1).collect();
    let decreasing = v.windows(2).all(|w| w[1] < w[0]);
    let last = v[v.len() - 1];
    // Power-law decay at a rate of at least t^(1/4).
    let rate = 10f64.powf(-0.25);
    let decaying = v[v.len() - 4..].windows(2).all(|w| w[1] <= rate * w[0]);
    let (status, narrative) = if decreasing && (last < B_SMALL || decaying) {
        (
            Status::Holds,
            format!("{what} decreases monotonically to {last:.3e} at t = 1e-9"),
        )
    } else if v.iter().all(|&x| x >= B_BOUNDED) {
        (
            Status::Fails,
            format!("{what} stays above {B_BOUNDED:e} on every probe"),
        )
    } else {
        (
            Status::Inconclusive,
            format!("{what} neither clearly vanishes nor stays bounded away from 0"),
        )
    };
    Ok(HypothesisReport::new(
        condition, status, evidence, narrative,
    ))
}

/// Condition (b): `alpha(t) -> 0` as `t -> 0`.
pub fn check_b(geom: &CfwpGeometry) -> Result<HypothesisReport, EvalError> {
    limit_zero(Condition::B, |t| geom.alpha.value(t), "alpha")
}

/// Condition (b'): `gamma(t) alpha(t) -> 0` as `t -> 0`.
pub fn check_b_prime(geom: &CfwpGeometry) -> Result<HypothesisReport, EvalError> {
    let gamma = match &geom.gamma {
        Some(g) => g,
        None => {
            return check_b(geom).map(|r| HypothesisReport {
                condition: Condition::BPrime,
                ..r
            })
        }
    };
    limit_zero(
        Condition::BPrime,
        |t| Ok(gamma.value(t)? * geom.alpha.value(t)?),
        "gamma*alpha",
    )
}

const C_TIE: f64 = 1e-12;
const C_REFINE: f64 = 1e-6;
const C_WIDTH: f64 = 1e-10;

/// Margins of both inequalities, each relative to the larger of its sides.
fn c_margins(geom: &CfwpGeometry, t: f64) -> Result<(f64, f64), EvalError> {
    let a = geom.alpha.value(t)?;
    let b = geom.beta.value(t)?;
    let two_a2 = 2.0 * a * a;
    let b2 = b * b;
    let m = geom.m as f64;
    let floor = (m - 1.0) / m * two_a2;
    Ok(((two_a2 - b2) / two_a2.max(b2), (b2 - floor) / b2.max(floor)))
}

/// Golden-section minimization of `f` over `[lo, hi]` in `ln t`.
fn refine_min<F: Fn(f64) -> f64>(f: F, lo: f64, hi: f64) -> (f64, f64) {
    let g = (5f64.sqrt() - 1.0) / 2.0;
    let (mut a, mut b) = (lo.ln(), hi.ln());
    let mut c = b - g * (b - a);
    let mut d = a + g * (b - a);
    let (mut fc, mut fd) = (f(c.exp()), f(d.exp()));
    while (b - a) > C_WIDTH {
        if fc < fd {
            b = d;
            d = c;
            fd = fc;
            c = b - g * (b - a);
            fc = f(c.exp());
        } else {
            a = c;
            c = d;
            fc = fd;
            d = a + g * (b - a);
            fd = f(d.exp());
        }
    }
    if fc < fd {
        (c.exp(), fc)
    } else {
        (d.exp(), fd)
    }
}

/// Condition (c): `2 alpha^2 >= beta^2 > (m-1)/m 2 alpha^2` on the probe
/// grid, with equality admitted on the left only.
pub fn check_c(geom: &CfwpGeometry) -> Result<HypothesisReport, EvalError> {
    check_c_on(geom, false)
}

/// [`check_c`] on the probe grid shifted by half a step.
pub fn check_c_on(geom: &CfwpGeometry, half_step: bool) -> Result<HypothesisReport, EvalError> {
    check_c_impl(Condition::C, geom, half_step)
}

fn check_c_impl(
    condition: Condition,
    geom: &CfwpGeometry,
    half_step: bool,
) -> Result<HypothesisReport, EvalError> {
    let grid = geom.window.probe_grid(half_step);
    let mut margins = Vec::with_capacity(grid.len());
    for &t in &grid {
        margins.push(c_margins(geom, t)?);
    }
    let mut left = (grid[0], f64::INFINITY);
    let mut right = (grid[0], f64::INFINITY);
    let n = grid.len();
    for side in 0..2 {
        let pick = |k: usize| {
            if side == 0 {
                margins[k].0
            } else {
                margins[k].1
            }
        };
        let best = if side == 0 { &mut left } else { &mut right };
        for k in 0..n {
            let v = pick(k);
            let mut cand = (grid[k], v);
            let local_min = (k == 0 || pick(k - 1) >= v) && (k + 1 == n || pick(k + 1) >= v);
            if local_min && v > C_TIE && v <= C_REFINE {
                let lo = grid[k.saturating_sub(1)];
                let hi = grid[(k + 1).min(n - 1)];
                let f = |t: f64| {
                    c_margins(geom, t)
                        .map(|m| if side == 0 { m.0 } else { m.1 })
                        .unwrap_or(f64::NAN)
                };
                let r = refine_min(f, lo, hi);
                if r.1 < cand.1 {
                    cand = r;
                }
            }
            if cand.1 < best.1 {
                *best = cand;
            }
        }
    }
    let evidence = vec![left, right];
    let (status, narrative) = if left.1 < -C_TIE {
        (
            Status::Fails,
            format!(
                "2 alpha^2 < beta^2 at t = {:.6e} (relative margin {:.3e})",
                left.0, left.1
            ),
        )
    } else if right.1 < -C_TIE {
        (
            Status::Fails,
            format!(
                "beta^2 < (m-1)/m 2 alpha^2 at t = {:.6e} (relative margin {:.3e})",
                right.0, right.1
            ),
        )
    } else if right.1 <= C_TIE {
        (
            Status::Inconclusive,
            format!(
                "strict inequality is tied within 1e-12 at t = {:.6e}",
                right.0
            ),
        )
    } else {
        let eq = if left.1 <= C_TIE {
            " (left side with equality)"
        } else {
            ""
        };
        (
            Status::Holds,
            format!(
                "both inequalities hold on the probe grid{eq}; minimal right margin {:.3e}",
                right.1
            ),
        )
    };
    Ok(HypothesisReport::new(
        condition, status, evidence, narrative,
    ))
}

/// The condition on the diffeomorphism `s = ∫_0^t gamma`.
pub fn check_int(geom: &CfwpGeometry) -> HypothesisReport {
    match check_int_condition(geom) {
        Ok(r) => HypothesisReport::new(Condition::Int, r.status, r.evidence, r.narrative),
        Err(e) => HypothesisReport::from_error(Condition::Int, e),
    }
}

/// Base point of the exponent integral in condition (a).
pub const A_BASE_POINT: f64 = 1.0;

/// (a), (b), (c) without a conformal factor; (int), (a'), (b'), (c') with one.
pub fn check_all(geom: &CfwpGeometry) -> Vec<HypothesisReport> {
    let conditions: &[Condition] = if geom.gamma.is_some() {
        &[
            Condition::Int,
            Condition::APrime,
            Condition::BPrime,
            Condition::CPrime,
        ]
    } else {
        &[Condition::A, Condition::B, Condition::C]
    };
    conditions.par_iter().map(|&c| run_one(geom, c)).collect()
}

fn run_one(geom: &CfwpGeometry, c: Condition) -> HypothesisReport {
    let folded = |r: Result<HypothesisReport, EvalError>| {
        r.unwrap_or_else(|e| HypothesisReport::from_error(c, e))
    };
    match c {
        Condition::A => check_a(&geom.alpha, A_BASE_POINT, &geom.hints.alpha),
        Condition::APrime => match &geom.gamma {
            Some(g) => check_a_prime(
                &geom.alpha,
                g,
                A_BASE_POINT,
                &geom.hints.alpha,
                &geom.hints.gamma,
            ),
            None => check_a(&geom.alpha, A_BASE_POINT, &geom.hints.alpha),
        },
        Condition::B => folded(check_b(geom)),
        Condition::BPrime => folded(check_b_prime(geom)),
        Condition::C => folded(check_c_impl(Condition::C, geom, false)),
        Condition::CPrime => folded(check_c_impl(Condition::CPrime, geom, false)),
        Condition::Int => check_int(geom),
    }
}
