//! Adaptive integration of the 2x2 radial systems, Frobenius data at the
//! singular endpoint and two-sided shooting.

mod indicial;
mod rk;
mod shoot;

use std::fmt::Write as _;

use thiserror::Error;

use crate::exprfn::EvalError;
use crate::geometry::log_nodes;
use crate::linalg::{mat_vec, Vec2};
use crate::modes::LinearSystem;

pub use indicial::{indicial, indicial_system, weight_threshold, IndicialData, IndicialError};
pub use rk::StepStats;
pub use shoot::{match_infinity, solve_bounded, BoundedRun, MatchError, MatchResult, ShootOptions};

pub const DEFAULT_REL_TOL: f64 = 1e-10;
/// Minimum number of log-spaced output nodes per trajectory.
pub const OUTPUT_NODES: usize = 256;
/// States beyond this magnitude count as blow-up.
pub const OVERFLOW: f64 = 1e300;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum IntegrateError {
    #[error("invalid integration request: {0}")]
    InvalidInput(String),
    #[error("step size underflow at t = {t:e}")]
    StepUnderflow { t: f64 },
    #[error("state exceeded {OVERFLOW:e} after t = {t:e}")]
    Overflow { t: f64, partial: Box<Trajectory> },
    #[error("step budget exhausted at t = {t:e}")]
    TooManySteps { t: f64 },
    #[error(transparent)]
    Eval(#[from] EvalError),
}

/// Solution samples on a strictly increasing grid.
#[derive(Debug, Clone, PartialEq)]
pub struct Trajectory {
    pub nodes: Vec<f64>,
    pub states: Vec<Vec2>,
    /// `∫ (U^2 + W^2)` from the starting point of the integration to each node.
    pub l2: Vec<f64>,
    pub rel_tol: f64,
    pub stats: StepStats,
}

impl Trajectory {
    fn index_of(&self, t: f64) -> Option<usize> {
        let i = self.nodes.partition_point(|&x| x < t * (1.0 - 1e-13));
        (i < self.nodes.len() && (self.nodes[i] - t).abs() <= 1e-13 * t.abs()).then_some(i)
    }

    /// State at a node of the grid.
    pub fn state_at(&self, t: f64) -> Option<Vec2> {
        self.index_of(t).map(|i| self.states[i])
    }

    /// Accumulated `∫ (U^2 + W^2)` at a node of the grid.
    pub fn l2_at(&self, t: f64) -> Option<f64> {
        self.index_of(t).map(|i| self.l2[i])
    }

    pub fn first(&self) -> (f64, Vec2) {
        (self.nodes[0], self.states[0])
    }

    pub fn last(&self) -> (f64, Vec2) {
        let n = self.nodes.len() - 1;
        (self.nodes[n], self.states[n])
    }

    /// CSV with header `t,U,W` and 17 significant digits.
    pub fn to_csv(&self) -> String {
        let mut out = String::from("t,U,W\n");
        for (t, s) in self.nodes.iter().zip(&self.states) {
            let _ = writeln!(out, "{t:.16e},{:.16e},{:.16e}", s[0], s[1]);
        }
        out
    }
}

const GAUSS4: [(f64, f64); 4] = [
    (-0.861_136_311_594_052_6, 0.347_854_845_137_453_9),
    (-0.339_981_043_584_856_3, 0.652_145_154_862_546_1),
    (0.339_981_043_584_856_3, 0.652_145_154_862_546_1),
    (0.861_136_311_594_052_6, 0.347_854_845_137_453_9),
];

/// `∫ |y|^2` over one step from the cubic Hermite interpolant, which is
/// exact for the squared cubic.
fn step_l2(t0: f64, y0: &Vec2, f0: &Vec2, t1: f64, y1: &Vec2, f1: &Vec2) -> f64 {
    let h = t1 - t0;
    let mut acc = 0.0;
    for &(x, w) in &GAUSS4 {
        let s = 0.5 * (x + 1.0);
        let h00 = (1.0 + 2.0 * s) * (1.0 - s) * (1.0 - s);
        let h10 = s * (1.0 - s) * (1.0 - s);
        let h01 = s * s * (3.0 - 2.0 * s);
        let h11 = s * s * (s - 1.0);
        let mut sq = 0.0;
        for i in 0..2 {
            let v = h00 * y0[i] + h10 * h * f0[i] + h01 * y1[i] + h11 * h * f1[i];
            sq += v * v;
        }
        acc += w * sq;
    }
    0.5 * h.abs() * acc
}

/// Integrates `y' = M(t) y` from `t0` to `t1` (either direction) with output
/// on [`OUTPUT_NODES`] log-spaced nodes.
pub fn integrate(
    sys: &dyn LinearSystem,
    t0: f64,
    t1: f64,
    init: Vec2,
    rel_tol: f64,
) -> Result<Trajectory, IntegrateError> {
    integrate_with_nodes(sys, t0, t1, init, rel_tol, &[])
}

/// As [`integrate`], with additional output nodes inside the interval.
pub fn integrate_with_nodes(
    sys: &dyn LinearSystem,
    t0: f64,
    t1: f64,
    init: Vec2,
    rel_tol: f64,
    extra: &[f64],
) -> Result<Trajectory, IntegrateError> {
    if !(t0 > 0.0 && t1 > 0.0 && t0.is_finite() && t1.is_finite()) || t0 == t1 {
        return Err(IntegrateError::InvalidInput(format!(
            "endpoints must be distinct positive numbers, got {t0} and {t1}"
        )));
    }
    if !(rel_tol > 0.0 && rel_tol < 1.0) {
        return Err(IntegrateError::InvalidInput(format!(
            "relative tolerance must lie in (0, 1), got {rel_tol}"
        )));
    }
    let scale = init[0].abs().max(init[1].abs());
    if !scale.is_finite() || scale == 0.0 {
        return Err(IntegrateError::InvalidInput(
            "initial state must be finite and nonzero".into(),
        ));
    }
    // Integrate the normalized state; linearity makes rescaling exact up to rounding.
    let y0 = [init[0] / scale, init[1] / scale];
    let forward = t1 > t0;
    let (lo, hi) = if forward { (t0, t1) } else { (t1, t0) };
    let per_decade = (OUTPUT_NODES as f64 / (hi / lo).log10()).ceil().max(1.0) as usize;
    let mut stops = log_nodes(lo, hi, per_decade);
    stops.extend(extra.iter().copied().filter(|&x| x > lo && x < hi));
    stops.sort_by(f64::total_cmp);
    stops.dedup_by(|a, b| (*a - *b).abs() <= 1e-13 * b.abs());
    *stops.first_mut().unwrap() = lo;
    *stops.last_mut().unwrap() = hi;
    if !forward {
        stops.reverse();
    }
    // The starting point is recorded directly, not as a stop.
    let stops = &stops[1..];

    let mut nodes = vec![t0];
    let mut states = vec![init];
    let mut l2 = vec![0.0];
    let mut acc = 0.0;
    let limit = (OVERFLOW / scale).min(OVERFLOW);
    let mut overflow_at = None;
    let f = |t: f64, y: &[f64; 2]| sys.matrix(t).map(|m| mat_vec(&m, y));
    let result = rk::drive(f, t0, t1, y0, rel_tol, 0.0, stops, |s| {
        if s.y1[0].abs().max(s.y1[1].abs()) > limit {
            overflow_at = Some(s.t0);
            return false;
        }
        acc += step_l2(s.t0, s.y0, s.f0, s.t1, s.y1, s.f1) * scale * scale;
        if s.stop.is_some() {
            nodes.push(s.t1);
            states.push([s.y1[0] * scale, s.y1[1] * scale]);
            l2.push(acc);
        }
        true
    });
    let finish = |nodes: Vec<f64>, states: Vec<Vec2>, l2: Vec<f64>, stats| {
        let mut tr = Trajectory {
            nodes,
            states,
            l2,
            rel_tol,
            stats,
        };
        if !forward {
            tr.nodes.reverse();
            tr.states.reverse();
            tr.l2.reverse();
        }
        tr
    };
    match result {
        Ok(stats) => Ok(finish(nodes, states, l2, stats)),
        // Non-finite stages only arise when the state is about to blow up.
        Err(rk::DriveError::Halted { .. } | rk::DriveError::NonFinite { .. }) => {
            let t = overflow_at.unwrap_or(*nodes.last().unwrap());
            let partial = finish(nodes, states, l2, StepStats::default());
            Err(IntegrateError::Overflow {
                t,
                partial: Box::new(partial),
            })
        }
        Err(rk::DriveError::Eval(e)) => Err(IntegrateError::Eval(e)),
        Err(rk::DriveError::StepUnderflow { t, .. }) => Err(IntegrateError::StepUnderflow { t }),
        Err(rk::DriveError::TooManySteps { t }) => Err(IntegrateError::TooManySteps { t }),
    }
}
