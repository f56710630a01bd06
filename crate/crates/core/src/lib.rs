//! Radial mode analysis of the Dirac operator on circle-fibered warped
//! products over complex projective space.
//!
//! A geometry is a triple `(m, alpha, beta)` of warping profiles, optionally
//! rescaled by a radial conformal factor `gamma`. Harmonic spinors reduce,
//! mode by mode, to a real 2x2 linear system on the half-line; this crate
//! builds those systems, checks the hypotheses of the vanishing criterion,
//! and classifies each mode by two-sided shooting.

pub mod exprfn;
pub mod geometry;
pub mod hypotheses;
pub mod improper;
pub mod integrator;
pub mod linalg;
pub mod modes;
pub mod report;
pub mod verdict;

pub use exprfn::{ParamBinding, WarpExpr};
pub use geometry::{
    preset, reparametrize, CfwpGeometry, GeometryError, GeometrySpec, PresetName, Profile, Window,
};
pub use hypotheses::{check_all, Condition, HypothesisReport};
pub use improper::{Status, Trend};
pub use integrator::{integrate, IndicialData, ShootOptions, Trajectory};
pub use modes::{coefficients, raw_system, LinearSystem, ModeIndex, RadialCoeffs};
pub use verdict::{
    classify_mode, classify_system, sweep, verify_identities, ModeVerdict, RadialModel, SweepGrid,
    SweepReport, Verdict,
};
