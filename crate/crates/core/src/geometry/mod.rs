//! Metric data of a circle-fibered warped product: the base dimension `m`,
//! the warping profiles `alpha`, `beta`, and an optional conformal factor.

mod limits;
mod presets;
mod reparam;
pub mod table;

use std::fmt;
use std::sync::Arc;

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::exprfn::{BoundExpr, EvalError, ParamBinding, ParseError, QuadError, WarpExpr};
use crate::improper::Status;

pub use limits::{
    check_int_condition, completion_limits, hint_matches, CompletionLimits, IntCondition,
};
pub use presets::{preset, PresetName};
pub use reparam::{reparametrize, ReparamResult, NODES_PER_DECADE};
pub use table::{log_nodes, LogTable, TableError};

/// Number of points of the logarithmic probe grid.
pub const PROBE_POINTS: usize = 4096;

#[derive(Debug, Error)]
pub enum GeometryError {
    #[error("cannot parse {profile}: {source}")]
    Parse {
        profile: &'static str,
        source: ParseError,
    },
    #[error("{profile}: {source}")]
    Eval {
        profile: &'static str,
        source: EvalError,
    },
    #[error("invalid parameters: {0}")]
    InvalidParams(String),
    #[error("{profile} is not positive at t = {t} (value {value})")]
    NotPositive {
        profile: &'static str,
        t: f64,
        value: f64,
    },
    #[error(
        "conformal factor does not give a diffeomorphism of the half-line (int condition {0:?})"
    )]
    IntConditionFailed(Status),
    #[error("quadrature failed: {0}")]
    Quadrature(#[from] QuadError),
    #[error("limit of {profile}(t)/t diverges as t -> 0 (last estimate {last})")]
    LimitDiverges { profile: &'static str, last: f64 },
    #[error("invalid working window [{0}, {1}]")]
    InvalidWindow(f64, f64),
    #[error("geometry has no conformal factor")]
    MissingGamma,
    #[error("tabulation failed: {0}")]
    Table(#[from] TableError),
}

/// Behavior of a profile as `t -> infinity`, supplied alongside the formula.
#[derive(Debug, Clone, Copy, PartialEq, Default, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "kebab-case", deny_unknown_fields)]
pub enum AsymptoticHint {
    /// `f(t) ~ coefficient * t^exponent`.
    Power { exponent: f64, coefficient: f64 },
    /// `f(t) >= bound > 0` for large `t`.
    BoundedBelow { bound: f64 },
    #[default]
    None,
}

impl AsymptoticHint {
    pub fn is_none(&self) -> bool {
        matches!(self, AsymptoticHint::None)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Default, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Hints {
    #[serde(default, skip_serializing_if = "AsymptoticHint::is_none")]
    pub alpha: AsymptoticHint,
    #[serde(default, skip_serializing_if = "AsymptoticHint::is_none")]
    pub beta: AsymptoticHint,
    #[serde(default, skip_serializing_if = "AsymptoticHint::is_none")]
    pub gamma: AsymptoticHint,
}

/// A positive radial function, either symbolic or tabulated.
#[derive(Debug, Clone)]
pub enum Profile {
    Symbolic(BoundExpr),
    Tabulated(Arc<LogTable>),
}

impl Profile {
    pub fn value(&self, t: f64) -> Result<f64, EvalError> {
        match self {
            Profile::Symbolic(e) => e.eval(t),
            Profile::Tabulated(tab) => {
                if t > 0.0 && t.is_finite() {
                    Ok(tab.eval(t))
                } else {
                    Err(EvalError::InvalidPoint(t))
                }
            }
        }
    }

    /// Value, with evaluation failures mapped to NaN (for quadrature closures).
    pub fn value_or_nan(&self, t: f64) -> f64 {
        self.value(t).unwrap_or(f64::NAN)
    }

    /// Exact derivative; `None` for tabulated profiles.
    pub fn derivative(&self) -> Option<Profile> {
        match self {
            Profile::Symbolic(e) => Some(Profile::Symbolic(e.derivative())),
            Profile::Tabulated(_) => None,
        }
    }

    pub fn is_symbolic(&self) -> bool {
        matches!(self, Profile::Symbolic(_))
    }

    pub fn describe(&self) -> String {
        match self {
            Profile::Symbolic(e) => e.canonical(),
            Profile::Tabulated(t) => {
                let (lo, hi) = t.range();
                format!("tabulated[{} nodes on {lo:e}..{hi:e}]", t.len())
            }
        }
    }
}

/// Interval of `t` on which "for all t" statements are probed.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Window {
    pub t_min: f64,
    pub t_max: f64,
}

impl Default for Window {
    fn default() -> Self {
        Window {
            t_min: 1e-8,
            t_max: 1e6,
        }
    }
}

impl Window {
    pub fn new(t_min: f64, t_max: f64) -> Result<Window, GeometryError> {
        if !(t_min > 0.0 && t_max > t_min && t_max.is_finite()) {
            return Err(GeometryError::InvalidWindow(t_min, t_max));
        }
        Ok(Window { t_min, t_max })
    }

    /// `n` log-uniform points; `half_step` shifts every interior point by half
    /// a grid step (the last point is dropped to stay inside the window).
    pub fn log_grid(&self, n: usize, half_step: bool) -> Vec<f64> {
        let (a, b) = (self.t_min.ln(), self.t_max.ln());
        let step = (b - a) / (n - 1) as f64;
        if half_step {
            (0..n - 1)
                .map(|k| (a + (k as f64 + 0.5) * step).exp())
                .collect()
        } else {
            (0..n).map(|k| (a + k as f64 * step).exp()).collect()
        }
    }

    pub fn probe_grid(&self, half_step: bool) -> Vec<f64> {
        self.log_grid(PROBE_POINTS, half_step)
    }
}

/// The metric data `(m, alpha, beta, gamma)`.
#[derive(Debug, Clone)]
pub struct CfwpGeometry {
    pub m: u32,
    pub alpha: Profile,
    pub beta: Profile,
    pub gamma: Option<Profile>,
    pub hints: Hints,
    pub window: Window,
    pub label: String,
}

impl CfwpGeometry {
    /// Validates positivity of every profile on the probe grid of `window`.
    pub fn new(
        m: u32,
        alpha: Profile,
        beta: Profile,
        gamma: Option<Profile>,
        hints: Hints,
        window: Window,
    ) -> Result<CfwpGeometry, GeometryError> {
        if m == 0 {
            return Err(GeometryError::InvalidParams("m must be at least 1".into()));
        }
        let g = CfwpGeometry {
            m,
            alpha,
            beta,
            gamma,
            hints,
            window,
            label: String::from("custom"),
        };
        for t in window.probe_grid(false) {
            g.check_positive("alpha", &g.alpha, t)?;
            g.check_positive("beta", &g.beta, t)?;
            if let Some(c) = &g.gamma {
                g.check_positive("gamma", c, t)?;
            }
        }
        Ok(g)
    }

    fn check_positive(
        &self,
        profile: &'static str,
        p: &Profile,
        t: f64,
    ) -> Result<(), GeometryError> {
        let value = p
            .value(t)
            .map_err(|source| GeometryError::Eval { profile, source })?;
        if value > 0.0 && value.is_finite() {
            Ok(())
        } else {
            Err(GeometryError::NotPositive { profile, t, value })
        }
    }

    pub fn with_label(mut self, label: impl Into<String>) -> Self {
        self.label = label.into();
        self
    }

    /// Weight `beta^(1/2) alpha^m` relating the two radial systems.
    pub fn substitution_weight(&self, t: f64) -> Result<f64, EvalError> {
        let a = self.alpha.value(t)?;
        let b = self.beta.value(t)?;
        Ok(b.sqrt() * a.powi(self.m as i32))
    }

    /// Logarithmic derivative `w'/w = beta'/(2 beta) + m alpha'/alpha`;
    /// `None` unless both profiles are symbolic.
    pub fn substitution_log_derivative(&self, t: f64) -> Option<Result<f64, EvalError>> {
        let da = self.alpha.derivative()?;
        let db = self.beta.derivative()?;
        Some((|| {
            let a = self.alpha.value(t)?;
            let b = self.beta.value(t)?;
            Ok(db.value(t)? / (2.0 * b) + self.m as f64 * da.value(t)? / a)
        })())
    }

    pub fn descriptor(&self) -> GeometryDescriptor {
        GeometryDescriptor {
            label: self.label.clone(),
            m: self.m,
            alpha: self.alpha.describe(),
            beta: self.beta.describe(),
            gamma: self.gamma.as_ref().map(Profile::describe),
            hints: self.hints,
            window: self.window,
        }
    }
}

impl fmt::Display for CfwpGeometry {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(
            f,
            "{} (m = {}, alpha = {}, beta = {}",
            self.label,
            self.m,
            self.alpha.describe(),
            self.beta.describe()
        )?;
        if let Some(g) = &self.gamma {
            write!(f, ", gamma = {}", g.describe())?;
        }
        write!(f, ")")
    }
}

/// Serializable summary of a geometry for reports.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct GeometryDescriptor {
    pub label: String,
    pub m: u32,
    pub alpha: String,
    pub beta: String,
    pub gamma: Option<String>,
    pub hints: Hints,
    pub window: Window,
}

/// Geometry block of a configuration document.
///
/// Either `preset` or both `alpha` and `beta` must be given.
#[derive(Debug, Clone, PartialEq, Default, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct GeometrySpec {
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub preset: Option<PresetName>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub m: Option<u32>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub alpha: Option<String>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub beta: Option<String>,
    #[serde(default)]
    pub gamma: Option<String>,
    #[serde(default)]
    pub params: ParamBinding,
    #[serde(default)]
    pub hints: Hints,
}

impl GeometrySpec {
    pub fn build(&self, window: Window) -> Result<CfwpGeometry, GeometryError> {
        if let Some(name) = self.preset {
            if self.alpha.is_some() || self.beta.is_some() || self.gamma.is_some() {
                return Err(GeometryError::InvalidParams(
                    "a preset geometry cannot also give alpha, beta or gamma".into(),
                ));
            }
            let mut g = preset(name, &self.params, self.m.unwrap_or(1), window)?;
            merge_hints(&mut g.hints, &self.hints);
            return Ok(g);
        }
        let m = self
            .m
            .ok_or_else(|| GeometryError::InvalidParams("missing `m`".into()))?;
        let alpha = self
            .alpha
            .as_deref()
            .ok_or_else(|| GeometryError::InvalidParams("missing `alpha`".into()))?;
        let beta = self
            .beta
            .as_deref()
            .ok_or_else(|| GeometryError::InvalidParams("missing `beta`".into()))?;
        let alpha = parse_profile("alpha", alpha, &self.params)?;
        let beta = parse_profile("beta", beta, &self.params)?;
        let gamma = match &self.gamma {
            Some(text) => Some(parse_profile("gamma", text, &self.params)?),
            None => None,
        };
        CfwpGeometry::new(m, alpha, beta, gamma, self.hints, window)
    }
}

fn merge_hints(into: &mut Hints, from: &Hints) {
    if !from.alpha.is_none() {
        into.alpha = from.alpha;
    }
    if !from.beta.is_none() {
        into.beta = from.beta;
    }
    if !from.gamma.is_none() {
        into.gamma = from.gamma;
    }
}

pub(crate) fn parse_profile(
    profile: &'static str,
    text: &str,
    params: &ParamBinding,
) -> Result<Profile, GeometryError> {
    let expr = WarpExpr::parse(text, &params.names())
        .map_err(|source| GeometryError::Parse { profile, source })?;
    let bound = params
        .bind(&expr)
        .map_err(|source| GeometryError::Eval { profile, source })?;
    Ok(Profile::Symbolic(bound))
}
