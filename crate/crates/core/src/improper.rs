//! Decision rules for improper integrals probed on finite horizons.
//!
//! Divergence of an improper integral is not decidable from finitely many
//! samples, so every rule here has an explicit inconclusive outcome.

use serde::{Deserialize, Serialize};

use crate::exprfn::{integrate_adaptive, QuadError};

/// Three-valued outcome of a hypothesis check.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Status {
    Holds,
    Fails,
    Inconclusive,
}

impl Status {
    /// Conjunction: fails dominates, then inconclusive.
    pub fn and(self, other: Status) -> Status {
        match (self, other) {
            (Status::Fails, _) | (_, Status::Fails) => Status::Fails,
            (Status::Inconclusive, _) | (_, Status::Inconclusive) => Status::Inconclusive,
            _ => Status::Holds,
        }
    }

    pub fn all<I: IntoIterator<Item = Status>>(it: I) -> Status {
        it.into_iter().fold(Status::Holds, Status::and)
    }
}

/// Observed behavior of partial integrals.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Trend {
    Divergent,
    Convergent,
    Inconclusive,
}

/// Increment ratio at or above which the last increment signals divergence.
pub const DIVERGENT_RATIO: f64 = 0.5;
/// Ratio at or below which every increment must shrink to signal convergence.
pub const CONVERGENT_RATIO: f64 = 0.1;

fn ratio(cur: f64, prev: f64) -> f64 {
    if prev == 0.0 {
        if cur == 0.0 {
            0.0
        } else {
            f64::INFINITY
        }
    } else {
        cur / prev
    }
}

/// Classifies a sequence of nonnegative increments between successive
/// horizons: divergent when the last increment is at least half the previous
/// one, convergent when every successive ratio is at most 0.1.
pub fn classify_increments(increments: &[f64]) -> Trend {
    if increments.len() < 2 {
        return Trend::Inconclusive;
    }
    let n = increments.len();
    if increments.iter().any(|x| x.is_infinite()) {
        return Trend::Divergent;
    }
    if ratio(increments[n - 1], increments[n - 2]) >= DIVERGENT_RATIO {
        return Trend::Divergent;
    }
    if increments
        .windows(2)
        .all(|w| ratio(w[1], w[0]) <= CONVERGENT_RATIO)
    {
        return Trend::Convergent;
    }
    Trend::Inconclusive
}

/// Geometric-horizon rule for partial integrals `P(T_j)` of a positive
/// integrand: divergent only if the last partial integral exceeds 1e3 and the
/// increments keep growing; convergent if increments shrink geometrically
/// with ratio at most 0.1; otherwise inconclusive.
pub fn horizon_trend(partials: &[f64]) -> Trend {
    if partials.len() < 3 {
        return Trend::Inconclusive;
    }
    let inc: Vec<f64> = partials.windows(2).map(|w| w[1] - w[0]).collect();
    let last = partials[partials.len() - 1];
    if last > 1e3 && inc.windows(2).all(|w| w[1] - w[0] > 0.0) {
        return Trend::Divergent;
    }
    if inc
        .windows(2)
        .all(|w| ratio(w[1].abs(), w[0].abs()) <= CONVERGENT_RATIO)
    {
        return Trend::Convergent;
    }
    Trend::Inconclusive
}

/// Cumulative integrals of `f` from `start` to each horizon.
pub fn partial_integrals<F: Fn(f64) -> f64>(
    f: F,
    start: f64,
    horizons: &[f64],
    rel_tol: f64,
) -> Result<Vec<f64>, QuadError> {
    let mut out = Vec::with_capacity(horizons.len());
    let mut acc = 0.0;
    let mut left = start;
    for &h in horizons {
        let seg = match integrate_adaptive(&f, left, h, rel_tol) {
            Ok(q) => q.value,
            Err(QuadError::ToleranceNotMet { estimate, .. }) => estimate,
            Err(e) => return Err(e),
        };
        acc += seg;
        out.push(acc);
        left = h;
    }
    Ok(out)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn increment_rules() {
        assert_eq!(classify_increments(&[1.0, 2.0, 4.0]), Trend::Divergent);
        assert_eq!(classify_increments(&[1.0, 1.0, 1.0]), Trend::Divergent);
        assert_eq!(
            classify_increments(&[1.0, 0.05, 0.001, 0.0]),
            Trend::Convergent
        );
        assert_eq!(classify_increments(&[1.0, 0.3, 0.09]), Trend::Inconclusive);
        assert_eq!(classify_increments(&[1.0]), Trend::Inconclusive);
    }

    #[test]
    fn horizon_rules() {
        // P(T) = T over decades: growing increments, exceeds 1e3.
        assert_eq!(horizon_trend(&[10.0, 100.0, 1e3, 1e4]), Trend::Divergent);
        // Harmonic growth stays small: undecided.
        let ln10 = 10f64.ln();
        assert_eq!(
            horizon_trend(&[ln10, 2.0 * ln10, 3.0 * ln10, 4.0 * ln10]),
            Trend::Inconclusive
        );
        // Saturating integral.
        assert_eq!(horizon_trend(&[0.9, 0.99999, 1.0, 1.0]), Trend::Convergent);
    }

    #[test]
    fn status_conjunction() {
        assert_eq!(Status::all([Status::Holds, Status::Holds]), Status::Holds);
        assert_eq!(
            Status::all([Status::Holds, Status::Inconclusive]),
            Status::Inconclusive
        );
        assert_eq!(
            Status::all([Status::Inconclusive, Status::Fails]),
            Status::Fails
        );
    }
}
