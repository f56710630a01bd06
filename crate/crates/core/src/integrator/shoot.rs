use serde::{Deserialize, Serialize};
use thiserror::Error;

use super::indicial::IndicialData;
use super::{integrate_with_nodes, rk, IntegrateError, Trajectory, DEFAULT_REL_TOL};
use crate::exprfn::EvalError;
use crate::linalg::{det_cols, norm, sym_eigen, Vec2};
use crate::modes::LinearSystem;

/// Eigenvalue gap of `M(T_max)` below which the recessive direction is undefined.
const MIN_GAP: f64 = 1e-10;

/// Endpoints, tolerance and probe points of the two-sided shoot.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct ShootOptions {
    pub t_init: f64,
    pub t_max: f64,
    pub rel_tol: f64,
    /// Matching points; the residual is the smallest over these.
    pub t_mid: Vec<f64>,
    /// Horizons of the partial L² integrals.
    pub horizons: Vec<f64>,
}

impl Default for ShootOptions {
    fn default() -> Self {
        ShootOptions {
            t_init: 1e-6,
            t_max: 1e4,
            rel_tol: DEFAULT_REL_TOL,
            t_mid: vec![1.0, 10.0],
            horizons: vec![10.0, 100.0, 1e3, 1e4],
        }
    }
}

impl ShootOptions {
    pub fn validate(&self) -> Result<(), String> {
        if !(self.t_init > 0.0 && self.t_init < self.t_max && self.t_max.is_finite()) {
            return Err(format!(
                "need 0 < t_init < t_max, got {} and {}",
                self.t_init, self.t_max
            ));
        }
        if !(self.rel_tol > 0.0 && self.rel_tol < 1e-2) {
            return Err(format!(
                "rel_tol must lie in (0, 1e-2), got {}",
                self.rel_tol
            ));
        }
        if self.t_mid.is_empty() {
            return Err("t_mid must not be empty".into());
        }
        let inside = |x: &f64| *x > self.t_init && *x <= self.t_max;
        if !self.t_mid.iter().all(|x| inside(x) && *x < self.t_max) {
            return Err("every t_mid must lie strictly between t_init and t_max".into());
        }
        if self.horizons.len() < 3 || !self.horizons.iter().all(inside) {
            return Err("need at least three horizons in (t_init, t_max]".into());
        }
        if !self.horizons.windows(2).all(|w| w[1] > w[0]) {
            return Err("horizons must be increasing".into());
        }
        Ok(())
    }
}

/// A forward solution started along an admissible indicial direction.
#[derive(Debug, Clone, PartialEq)]
pub struct BoundedRun {
    pub exponent: f64,
    pub direction: Vec2,
    pub trajectory: Trajectory,
    /// Where the state blew up, when it did; the trajectory then stops there.
    pub overflow: Option<f64>,
}

/// Integrates every admissible direction forward from `t_init` to `t_max`.
pub fn solve_bounded(
    sys: &dyn LinearSystem,
    data: &IndicialData,
    opts: &ShootOptions,
) -> Result<Vec<BoundedRun>, IntegrateError> {
    let mut extra = opts.t_mid.clone();
    extra.extend_from_slice(&opts.horizons);
    let mut runs = Vec::with_capacity(data.admissible.len());
    for &i in &data.admissible {
        let mu = data.exponents[i];
        let v = data.directions[i];
        let amp = opts.t_init.powf(mu);
        // Only the direction matters for a linear system.
        let amp = if amp.is_normal() && amp < 1e100 {
            amp
        } else {
            1.0
        };
        let init = [amp * v[0], amp * v[1]];
        let (trajectory, overflow) =
            match integrate_with_nodes(sys, opts.t_init, opts.t_max, init, opts.rel_tol, &extra) {
                Ok(tr) => (tr, None),
                Err(IntegrateError::Overflow { t, partial }) => (*partial, Some(t)),
                Err(e) => return Err(e),
            };
        runs.push(BoundedRun {
            exponent: mu,
            direction: v,
            trajectory,
            overflow,
        });
    }
    Ok(runs)
}

#[derive(Debug, Clone, PartialEq, Error)]
pub enum MatchError {
    #[error("no admissible direction at the origin")]
    EmptyBoundedSet,
    #[error("eigenvalues of M(T_max) are within {gap:.3e}; no recessive direction")]
    DegenerateDirection { gap: f64 },
    #[error("forward solution has no state at t = {t} (blow-up earlier)")]
    MissingForwardState { t: f64 },
    #[error("backward shoot failed near t = {t:e}")]
    BackwardFailed { t: f64 },
    #[error(transparent)]
    Eval(#[from] EvalError),
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct MatchResult {
    /// Smallest normalized determinant over the matching points.
    pub residual: f64,
    pub per_t_mid: Vec<(f64, f64)>,
    /// Most decaying direction of `M(T_max)`.
    pub recessive: Vec2,
    pub gap: f64,
}

/// Compares the bounded-at-0 solutions with the recessive solution at
/// infinity, traced back from `t_max` through its angle
/// `theta' = sigma (cos^2 - sin^2) + (tau - rho) sin cos`.
pub fn match_infinity(
    sys: &dyn LinearSystem,
    data: &IndicialData,
    runs: &[BoundedRun],
    opts: &ShootOptions,
) -> Result<MatchResult, MatchError> {
    if data.bounded_dim() == 0 || runs.is_empty() {
        return Err(MatchError::EmptyBoundedSet);
    }
    let m = sys.matrix(opts.t_max)?;
    let eig = sym_eigen(&m);
    let gap = eig.values[0] - eig.values[1];
    if gap.is_nan() || gap < MIN_GAP {
        return Err(MatchError::DegenerateDirection { gap });
    }
    let recessive = eig.vectors[1];
    let mut t_mid = opts.t_mid.clone();
    t_mid.sort_by(|a, b| b.total_cmp(a));
    t_mid.dedup();

    if data.bounded_dim() == 2 {
        return Ok(MatchResult {
            residual: 0.0,
            per_t_mid: t_mid.iter().map(|&t| (t, 0.0)).collect(),
            recessive,
            gap,
        });
    }

    let theta0 = recessive[1].atan2(recessive[0]);
    let flow = |t: f64, th: &[f64; 1]| -> Result<[f64; 1], EvalError> {
        let m = sys.matrix(t)?;
        let (s, c) = th[0].sin_cos();
        Ok([m[0][1] * (c * c - s * s) + (m[1][1] - m[0][0]) * s * c])
    };
    let mut angles = Vec::with_capacity(t_mid.len());
    let t_end = *t_mid.last().unwrap();
    rk::drive(
        flow,
        opts.t_max,
        t_end,
        [theta0],
        opts.rel_tol,
        1.0,
        &t_mid,
        |s| {
            if s.stop.is_some() {
                angles.push((s.t1, s.y1[0]));
            }
            true
        },
    )
    .map_err(|e| match e {
        rk::DriveError::Eval(e) => MatchError::Eval(e),
        rk::DriveError::StepUnderflow { t, .. }
        | rk::DriveError::NonFinite { t }
        | rk::DriveError::TooManySteps { t }
        | rk::DriveError::Halted { t } => MatchError::BackwardFailed { t },
    })?;

    let forward = &runs[0].trajectory;
    let mut per_t_mid = Vec::with_capacity(angles.len());
    for (t, theta) in angles {
        let v0 = forward
            .state_at(t)
            .ok_or(MatchError::MissingForwardState { t })?;
        let vinf = [theta.cos(), theta.sin()];
        let r = det_cols(&v0, &vinf).abs() / (norm(&v0) * norm(&vinf));
        per_t_mid.push((t, r));
    }
    per_t_mid.reverse();
    let residual = per_t_mid.iter().map(|p| p.1).fold(f64::INFINITY, f64::min);
    Ok(MatchResult {
        residual,
        per_t_mid,
        recessive,
        gap,
    })
}
