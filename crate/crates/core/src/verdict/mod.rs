//! Per-mode verdicts, parameter sweeps and the identity suite.

mod identities;
mod sweep;

use serde::Serialize;

use crate::geometry::{reparametrize, CfwpGeometry, GeometryError, ReparamResult};
use crate::hypotheses::{aggregate, check_all, HypothesisReport};
use crate::improper::{classify_increments, Status, Trend};
use crate::integrator::{
    indicial_system, match_infinity, solve_bounded, weight_threshold, BoundedRun, IndicialData,
    MatchResult, ShootOptions,
};
use crate::linalg::Vec2;
use crate::modes::{coefficients, LinearSystem, ModeError, ModeIndex};

pub use identities::{verify_identities, IdentityCheck, IdentityReport, IdentityStatus};
pub use sweep::{sweep, KRange, SweepEntry, SweepError, SweepGrid, SweepReport, SweepSummary};

/// Residuals above this floor separate the bounded and recessive subspaces.
pub const RESIDUAL_FLOOR: f64 = 1e-3;
/// Residuals below this ceiling signal a candidate bound state.
pub const CANDIDATE_CEILING: f64 = 1e-6;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize)]
pub enum Verdict {
    #[serde(rename = "no-L2")]
    NoL2,
    #[serde(rename = "candidate-L2")]
    CandidateL2,
    #[serde(rename = "inconclusive")]
    Inconclusive,
}

impl Verdict {
    pub fn as_str(self) -> &'static str {
        match self {
            Verdict::NoL2 => "no-L2",
            Verdict::CandidateL2 => "candidate-L2",
            Verdict::Inconclusive => "inconclusive",
        }
    }
}

/// Partial L² integrals of one bounded-at-0 solution.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct L2Probe {
    pub exponent: f64,
    pub direction: Vec2,
    /// `(T, P(T))` for every horizon reached.
    pub partials: Vec<(f64, f64)>,
    /// `P(T_1)` followed by the successive differences.
    pub increments: Vec<f64>,
    pub trend: Trend,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub overflow: Option<f64>,
}

/// Outcome of the two-sided shoot for one linear system.
#[derive(Debug, Clone, Serialize)]
pub struct ShootOutcome {
    #[serde(rename = "boundedDim")]
    pub bounded_dim: usize,
    #[serde(rename = "l2Divergent")]
    pub l2_divergent: Vec<bool>,
    #[serde(rename = "matchingResidual")]
    pub matching_residual: Option<f64>,
    pub verdict: Verdict,
    pub indicial: Option<IndicialData>,
    pub probes: Vec<L2Probe>,
    pub matching: Option<MatchResult>,
    pub notes: Vec<String>,
    #[serde(skip)]
    pub runs: Vec<BoundedRun>,
}

impl ShootOutcome {
    fn inconclusive(note: String) -> ShootOutcome {
        ShootOutcome {
            bounded_dim: 0,
            l2_divergent: Vec::new(),
            matching_residual: None,
            verdict: Verdict::Inconclusive,
            indicial: None,
            probes: Vec::new(),
            matching: None,
            notes: vec![note],
            runs: Vec::new(),
        }
    }
}

fn probe(run: &BoundedRun, horizons: &[f64]) -> L2Probe {
    let tr = &run.trajectory;
    let partials: Vec<(f64, f64)> = horizons
        .iter()
        .filter_map(|&h| tr.l2_at(h).map(|p| (h, p)))
        .collect();
    let mut increments = Vec::with_capacity(partials.len());
    let mut prev = 0.0;
    for &(_, p) in &partials {
        increments.push(p - prev);
        prev = p;
    }
    let trend = if run.overflow.is_some() {
        Trend::Divergent
    } else {
        classify_increments(&increments)
    };
    L2Probe {
        exponent: run.exponent,
        direction: run.direction,
        partials,
        increments,
        trend,
        overflow: run.overflow,
    }
}

fn decide(l2_divergent: &[bool], residual: Option<f64>) -> Verdict {
    match residual {
        Some(r) if r < CANDIDATE_CEILING => Verdict::CandidateL2,
        Some(r) if r > RESIDUAL_FLOOR && l2_divergent.iter().all(|&d| d) => Verdict::NoL2,
        _ => Verdict::Inconclusive,
    }
}

/// Shoots from both ends of `sys` and combines the evidence; failures fold
/// into an inconclusive verdict.
pub fn classify_system(
    sys: &dyn LinearSystem,
    threshold: f64,
    opts: &ShootOptions,
) -> ShootOutcome {
    let data = match indicial_system(sys, threshold) {
        Ok(d) => d,
        Err(e) => return ShootOutcome::inconclusive(format!("indicial analysis: {e}")),
    };
    let bounded_dim = data.bounded_dim();
    let mut out = ShootOutcome {
        bounded_dim,
        indicial: Some(data.clone()),
        ..ShootOutcome::inconclusive(String::new())
    };
    out.notes.clear();
    if bounded_dim == 0 {
        out.verdict = Verdict::NoL2;
        out.notes
            .push("no indicial exponent reaches the boundedness threshold".into());
        return out;
    }
    let runs = match solve_bounded(sys, &data, opts) {
        Ok(r) => r,
        Err(e) => {
            out.notes.push(format!("forward integration: {e}"));
            return out;
        }
    };
    out.probes = runs.iter().map(|r| probe(r, &opts.horizons)).collect();
    out.l2_divergent = out
        .probes
        .iter()
        .map(|p| p.trend == Trend::Divergent)
        .collect();
    for p in &out.probes {
        if let Some(t) = p.overflow {
            out.notes
                .push(format!("forward solution blew up after t = {t:e}"));
        }
    }
    match match_infinity(sys, &data, &runs, opts) {
        Ok(m) => {
            out.matching_residual = Some(m.residual);
            out.matching = Some(m);
        }
        Err(e) => out.notes.push(format!("matching: {e}")),
    }
    out.runs = runs;
    out.verdict = decide(&out.l2_divergent, out.matching_residual);
    out
}

/// A geometry prepared for mode analysis: hypotheses evaluated on the
/// original profiles, and the profiles in which the radial systems are
/// integrated (reparametrized when a conformal factor is present).
#[derive(Debug, Clone)]
pub struct RadialModel {
    pub geometry: CfwpGeometry,
    pub working: CfwpGeometry,
    pub reparam: Option<ReparamResult>,
    pub hypotheses: Vec<HypothesisReport>,
    pub hypotheses_status: Status,
}

impl RadialModel {
    pub fn new(geom: CfwpGeometry) -> Result<RadialModel, GeometryError> {
        let hypotheses = check_all(&geom);
        let hypotheses_status = aggregate(&hypotheses);
        let (working, reparam) = if geom.gamma.is_some() {
            let r = reparametrize(&geom)?;
            (r.geometry.clone(), Some(r))
        } else {
            (geom.clone(), None)
        };
        Ok(RadialModel {
            geometry: geom,
            working,
            reparam,
            hypotheses,
            hypotheses_status,
        })
    }

    pub fn hypotheses_ok(&self) -> bool {
        self.hypotheses_status == Status::Holds
    }
}

#[derive(Debug, Clone, Serialize)]
pub struct ModeVerdict {
    pub mode: ModeIndex,
    #[serde(rename = "hypothesesOk")]
    pub hypotheses_ok: bool,
    #[serde(flatten)]
    pub outcome: ShootOutcome,
}

impl ModeVerdict {
    pub fn verdict(&self) -> Verdict {
        self.outcome.verdict
    }
}

/// Classifies one mode of a prepared geometry.
pub fn classify_mode(
    model: &RadialModel,
    mode: ModeIndex,
    opts: &ShootOptions,
) -> Result<ModeVerdict, ModeError> {
    let coeffs = coefficients(&model.working, mode)?;
    let outcome = match weight_threshold(&model.working) {
        Ok(threshold) => classify_system(&coeffs, threshold, opts),
        Err(e) => ShootOutcome::inconclusive(format!("weight threshold: {e}")),
    };
    Ok(ModeVerdict {
        mode,
        hypotheses_ok: model.hypotheses_ok(),
        outcome,
    })
}
