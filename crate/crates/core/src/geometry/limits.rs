use serde::Serialize;

use super::{AsymptoticHint, CfwpGeometry, GeometryError, Profile};
use crate::exprfn::{integrate_adaptive, QuadError};
use crate::improper::{classify_increments, horizon_trend, partial_integrals, Status, Trend};

/// Smooth-completion targets for `alpha/t` and `beta/t` at the origin.
pub const SMOOTH_ALPHA: f64 = std::f64::consts::FRAC_1_SQRT_2;
pub const SMOOTH_BETA: f64 = 1.0;
const SMOOTH_TOL: f64 = 1e-4;
const LIMIT_PROBES: [f64; 3] = [1e-4, 1e-5, 1e-6];

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct CompletionLimits {
    pub alpha_ratio: f64,
    pub beta_ratio: f64,
    /// Necessary condition for a smooth one-point completion.
    pub smooth: bool,
    /// `(t, alpha(t)/t, beta(t)/t)` at the probe points.
    pub samples: Vec<(f64, f64, f64)>,
}

/// Limits of `alpha(t)/t` and `beta(t)/t` as `t -> 0`, accelerated by an
/// Aitken step over three decades.
pub fn completion_limits(geom: &CfwpGeometry) -> Result<CompletionLimits, GeometryError> {
    let mut samples = Vec::with_capacity(LIMIT_PROBES.len());
    for &t in &LIMIT_PROBES {
        let a = geom.alpha.value(t).map_err(|source| GeometryError::Eval {
            profile: "alpha",
            source,
        })?;
        let b = geom.beta.value(t).map_err(|source| GeometryError::Eval {
            profile: "beta",
            source,
        })?;
        samples.push((t, a / t, b / t));
    }
    let ra: Vec<f64> = samples.iter().map(|s| s.1).collect();
    let rb: Vec<f64> = samples.iter().map(|s| s.2).collect();
    let alpha_ratio = accelerate("alpha", &ra)?;
    let beta_ratio = accelerate("beta", &rb)?;
    let smooth = (alpha_ratio - SMOOTH_ALPHA).abs() <= SMOOTH_TOL
        && (beta_ratio - SMOOTH_BETA).abs() <= SMOOTH_TOL;
    Ok(CompletionLimits {
        alpha_ratio,
        beta_ratio,
        smooth,
        samples,
    })
}

fn accelerate(profile: &'static str, r: &[f64]) -> Result<f64, GeometryError> {
    let (r1, r2, r3) = (r[0], r[1], r[2]);
    let growing = r3.abs() > r2.abs() && r2.abs() > r1.abs() && r3.abs() >= 2.0 * r2.abs();
    if !r3.is_finite() || growing {
        return Err(GeometryError::LimitDiverges { profile, last: r3 });
    }
    let d1 = r2 - r1;
    let d2 = r3 - r2;
    let den = d2 - d1;
    if d2.abs() < d1.abs() && den.abs() > f64::MIN_POSITIVE {
        Ok(r3 - d2 * d2 / den)
    } else {
        Ok(r3)
    }
}

/// Outcome of the diffeomorphism condition on the conformal factor.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct IntCondition {
    pub status: Status,
    pub near_zero: Status,
    pub at_infinity: Status,
    /// `(upper limit, integral)` pairs: `∫_0^1 gamma` first, then `∫_1^T gamma`.
    pub evidence: Vec<(f64, f64)>,
    pub narrative: String,
}

const INT_HORIZONS: [f64; 4] = [10.0, 1e2, 1e3, 1e4];

/// Whether `∫_0^1 gamma < ∞` and `∫_0^∞ gamma = ∞`.
pub fn check_int_condition(geom: &CfwpGeometry) -> Result<IntCondition, GeometryError> {
    let gamma = geom.gamma.as_ref().ok_or(GeometryError::MissingGamma)?;
    let f = |t: f64| gamma.value_or_nan(t);
    let mut evidence = Vec::new();
    let mut notes = Vec::new();

    let near_zero = match integrate_adaptive(f, 0.0, 1.0, 1e-8) {
        Ok(q) => {
            evidence.push((1.0, q.value));
            notes.push(format!("∫_0^1 gamma = {:.6e} converges", q.value));
            Status::Holds
        }
        Err(err) => {
            let mut inc = Vec::new();
            for j in (0..10).rev() {
                let hi = 10f64.powi(-j);
                let lo = hi / 10.0;
                match integrate_adaptive(f, lo, hi, 1e-8) {
                    Ok(q) => inc.push(q.value),
                    Err(QuadError::ToleranceNotMet { estimate, .. }) => inc.push(estimate),
                    Err(_) => inc.push(f64::INFINITY),
                }
            }
            // Decades ordered from 1 toward 0.
            inc.reverse();
            evidence.push((1.0, err.estimate().unwrap_or(f64::INFINITY)));
            match classify_increments(&inc) {
                Trend::Divergent => {
                    notes.push(
                        "∫_0^1 gamma diverges: decade increments do not shrink toward 0".into(),
                    );
                    Status::Fails
                }
                Trend::Convergent => {
                    notes.push("∫_0^1 gamma converges by decade increments".into());
                    Status::Holds
                }
                Trend::Inconclusive => {
                    notes.push(format!("∫_0^1 gamma undecided ({err})"));
                    Status::Inconclusive
                }
            }
        }
    };

    let partials = partial_integrals(f, 1.0, &INT_HORIZONS, 1e-10).unwrap_or_default();
    evidence.extend(INT_HORIZONS.iter().copied().zip(partials.iter().copied()));
    let hint = geom.hints.gamma;
    let at_infinity = if hint_matches(gamma, &hint) {
        match hint {
            AsymptoticHint::Power { exponent, .. } if exponent >= -1.0 => {
                notes.push(format!(
                    "gamma ~ t^{exponent} at infinity: ∫ gamma diverges"
                ));
                Status::Holds
            }
            AsymptoticHint::Power { exponent, .. } => {
                notes.push(format!(
                    "gamma ~ t^{exponent} at infinity: ∫ gamma converges"
                ));
                Status::Fails
            }
            AsymptoticHint::BoundedBelow { bound } => {
                notes.push(format!("gamma >= {bound} at infinity: ∫ gamma diverges"));
                Status::Holds
            }
            AsymptoticHint::None => unreachable!("hint_matches rejects an absent hint"),
        }
    } else {
        if !hint.is_none() {
            notes.push("asymptotic hint for gamma disagrees with the profile; ignored".into());
        }
        match horizon_trend(&partials) {
            Trend::Divergent => {
                notes.push("partial integrals of gamma grow without bound".into());
                Status::Holds
            }
            Trend::Convergent => {
                notes.push("partial integrals of gamma saturate".into());
                Status::Fails
            }
            Trend::Inconclusive => {
                notes.push("growth of ∫ gamma at infinity undecided".into());
                Status::Inconclusive
            }
        }
    };
    Ok(IntCondition {
        status: near_zero.and(at_infinity),
        near_zero,
        at_infinity,
        evidence,
        narrative: notes.join("; "),
    })
}

const HINT_PROBES: [f64; 3] = [1e4, 1e5, 1e6];

/// Checks a hint against the profile at large `t`. An absent hint never matches.
pub fn hint_matches(p: &Profile, hint: &AsymptoticHint) -> bool {
    match *hint {
        AsymptoticHint::None => false,
        AsymptoticHint::Power {
            exponent,
            coefficient,
        } => {
            if !(coefficient > 0.0 && exponent.is_finite()) {
                return false;
            }
            let t = HINT_PROBES[HINT_PROBES.len() - 1];
            match p.value(t) {
                Ok(v) => {
                    let r = v / (coefficient * t.powf(exponent));
                    (0.5..=2.0).contains(&r)
                }
                Err(_) => false,
            }
        }
        AsymptoticHint::BoundedBelow { bound } => {
            bound > 0.0
                && HINT_PROBES
                    .iter()
                    .all(|&t| p.value(t).map(|v| v >= 0.5 * bound).unwrap_or(false))
        }
    }
}
