use rayon::prelude::*;
use serde::{Deserialize, Serialize};
use thiserror::Error;

use super::{classify_mode, RadialModel, Verdict};
use crate::geometry::GeometryDescriptor;
use crate::hypotheses::HypothesisReport;
use crate::improper::Status;
use crate::integrator::ShootOptions;
use crate::modes::{ModeError, ModeIndex};

pub const MAX_K_VALUES: usize = 64;
pub const MAX_LAMBDA_VALUES: usize = 1024;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum SweepError {
    #[error("resource limit: {0}")]
    ResourceLimit(String),
    #[error("invalid sweep grid: {0}")]
    InvalidInput(String),
    #[error(transparent)]
    Mode(#[from] ModeError),
}

/// Inclusive range of effective auxiliary powers, written `[lo, hi]`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(from = "[i64; 2]", into = "[i64; 2]")]
pub struct KRange {
    pub lo: i64,
    pub hi: i64,
}

impl From<[i64; 2]> for KRange {
    fn from(v: [i64; 2]) -> Self {
        KRange { lo: v[0], hi: v[1] }
    }
}

impl From<KRange> for [i64; 2] {
    fn from(r: KRange) -> Self {
        [r.lo, r.hi]
    }
}

impl KRange {
    pub fn len(&self) -> usize {
        if self.hi < self.lo {
            0
        } else {
            (self.hi - self.lo) as usize + 1
        }
    }

    pub fn is_empty(&self) -> bool {
        self.len() == 0
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SweepGrid {
    pub k: KRange,
    pub l: Vec<u32>,
    pub epsilon: Vec<i8>,
    pub lambda: Vec<f64>,
}

impl SweepGrid {
    /// Modes in grid order: `k` outermost, then `l`, `epsilon`, `lambda`.
    pub fn modes(&self, m: u32) -> Result<Vec<ModeIndex>, SweepError> {
        if self.k.is_empty() || self.l.is_empty() || self.epsilon.is_empty() {
            return Err(SweepError::InvalidInput(
                "k, l and epsilon ranges must be nonempty".into(),
            ));
        }
        if self.lambda.is_empty() {
            return Err(SweepError::InvalidInput("lambda grid is empty".into()));
        }
        if self.k.len() > MAX_K_VALUES {
            return Err(SweepError::ResourceLimit(format!(
                "{} values of k exceed the limit of {MAX_K_VALUES}",
                self.k.len()
            )));
        }
        if self.lambda.len() > MAX_LAMBDA_VALUES {
            return Err(SweepError::ResourceLimit(format!(
                "{} values of lambda exceed the limit of {MAX_LAMBDA_VALUES}",
                self.lambda.len()
            )));
        }
        let mut modes = Vec::new();
        for k in self.k.lo..=self.k.hi {
            for &l in &self.l {
                for &e in &self.epsilon {
                    for &lambda in &self.lambda {
                        let mode = ModeIndex::new(k, l, e, lambda);
                        mode.validate(m)?;
                        modes.push(mode);
                    }
                }
            }
        }
        Ok(modes)
    }
}

#[derive(Debug, Clone, Serialize)]
pub struct SweepEntry {
    pub mode: ModeIndex,
    pub verdict: Verdict,
    pub residual: Option<f64>,
    #[serde(rename = "boundedDim")]
    pub bounded_dim: usize,
    /// One list per bounded solution: `P(T_1)` and the successive differences.
    pub p_increments: Vec<Vec<f64>>,
    #[serde(skip_serializing_if = "Vec::is_empty")]
    pub notes: Vec<String>,
}

#[derive(Debug, Clone, Serialize)]
pub struct WorstMode {
    pub mode: ModeIndex,
    pub residual: f64,
}

#[derive(Debug, Clone, Serialize)]
pub struct SweepSummary {
    pub total: usize,
    #[serde(rename = "no-L2")]
    pub no_l2: usize,
    #[serde(rename = "candidate-L2")]
    pub candidate_l2: usize,
    pub inconclusive: usize,
    pub headline: String,
    pub hypotheses: Status,
    /// Mode with the smallest matching residual.
    pub worst: Option<WorstMode>,
}

#[derive(Debug, Clone, Serialize)]
pub struct SweepReport {
    pub geometry: GeometryDescriptor,
    pub hypotheses: Vec<HypothesisReport>,
    pub grid: Vec<SweepEntry>,
    pub summary: SweepSummary,
}

impl SweepReport {
    pub fn count(&self, v: Verdict) -> usize {
        self.grid.iter().filter(|e| e.verdict == v).count()
    }
}

fn headline(no_l2: usize, total: usize) -> String {
    if no_l2 == total {
        "no-L2: 100%".into()
    } else {
        format!("no-L2: {:.1}%", 100.0 * no_l2 as f64 / total as f64)
    }
}

/// Classifies every grid point in parallel; the report lists them in grid order.
pub fn sweep(
    model: &RadialModel,
    grid: &SweepGrid,
    opts: &ShootOptions,
) -> Result<SweepReport, SweepError> {
    let modes = grid.modes(model.working.m)?;
    let verdicts = modes
        .par_iter()
        .map(|&mode| classify_mode(model, mode, opts))
        .collect::<Result<Vec<_>, _>>()?;
    let entries: Vec<SweepEntry> = verdicts
        .into_iter()
        .map(|v| SweepEntry {
            mode: v.mode,
            verdict: v.outcome.verdict,
            residual: v.outcome.matching_residual,
            bounded_dim: v.outcome.bounded_dim,
            p_increments: v
                .outcome
                .probes
                .iter()
                .map(|p| p.increments.clone())
                .collect(),
            notes: v.outcome.notes,
        })
        .collect();
    let count = |v: Verdict| entries.iter().filter(|e| e.verdict == v).count();
    let no_l2 = count(Verdict::NoL2);
    let worst = entries
        .iter()
        .filter_map(|e| e.residual.map(|r| (e.mode, r)))
        .min_by(|a, b| a.1.total_cmp(&b.1))
        .map(|(mode, residual)| WorstMode { mode, residual });
    let summary = SweepSummary {
        total: entries.len(),
        no_l2,
        candidate_l2: count(Verdict::CandidateL2),
        inconclusive: count(Verdict::Inconclusive),
        headline: headline(no_l2, entries.len()),
        hypotheses: model.hypotheses_status,
        worst,
    };
    Ok(SweepReport {
        geometry: model.geometry.descriptor(),
        hypotheses: model.hypotheses.clone(),
        grid: entries,
        summary,
    })
}
