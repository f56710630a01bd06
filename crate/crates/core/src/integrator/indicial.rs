use serde::Serialize;
use thiserror::Error;

use crate::exprfn::EvalError;
use crate::geometry::CfwpGeometry;
use crate::linalg::{max_abs, max_abs_diff, sym_eigen, Mat2, Vec2};
use crate::modes::{LinearSystem, RadialCoeffs};

const PROBES: [f64; 3] = [1e-4, 1e-5, 1e-6];
const MAX_DRIFT: f64 = 1e-3;
/// Slack granted to exponents sitting exactly on the threshold.
const ADMISSIBLE_SLACK: f64 = 1e-9;
const SLOPE_SAMPLES: usize = 21;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum IndicialError {
    #[error("t*M(t) does not settle near t = 0 (relative drift {drift:.3e})")]
    IrregularSingularity { drift: f64 },
    #[error(transparent)]
    Eval(#[from] EvalError),
}

/// Leading-order behavior `y ~ t^mu v` of solutions at the singular endpoint.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct IndicialData {
    #[serde(rename = "residueMatrix")]
    pub residue_matrix: Mat2,
    /// Eigenvalues of the residue matrix, largest first.
    pub exponents: [f64; 2],
    pub directions: [Vec2; 2],
    pub threshold: f64,
    /// Indices into `exponents` of the directions bounded by the weight.
    pub admissible: Vec<usize>,
    pub drift: f64,
}

impl IndicialData {
    pub fn bounded_dim(&self) -> usize {
        self.admissible.len()
    }
}

fn scaled(sys: &dyn LinearSystem, t: f64) -> Result<Mat2, EvalError> {
    let m = sys.matrix(t)?;
    Ok([[t * m[0][0], t * m[0][1]], [t * m[1][0], t * m[1][1]]])
}

fn richardson(coarse: &Mat2, fine: &Mat2) -> Mat2 {
    let mut out = [[0.0; 2]; 2];
    for i in 0..2 {
        for j in 0..2 {
            out[i][j] = fine[i][j] + (fine[i][j] - coarse[i][j]) / 9.0;
        }
    }
    out
}

/// Residue matrix, exponents and admissible directions of `sys` for a given
/// boundedness threshold.
pub fn indicial_system(
    sys: &dyn LinearSystem,
    threshold: f64,
) -> Result<IndicialData, IndicialError> {
    let a: Vec<Mat2> = PROBES
        .iter()
        .map(|&t| scaled(sys, t))
        .collect::<Result<_, _>>()?;
    let early = richardson(&a[0], &a[1]);
    let late = richardson(&a[1], &a[2]);
    let drift = max_abs_diff(&early, &late) / max_abs(&late).max(1.0);
    if drift.is_nan() || drift >= MAX_DRIFT {
        return Err(IndicialError::IrregularSingularity { drift });
    }
    // Symmetrize away rounding in the off-diagonal pair.
    let off = 0.5 * (late[0][1] + late[1][0]);
    let residue = [[late[0][0], off], [off, late[1][1]]];
    let eig = sym_eigen(&residue);
    let admissible = (0..2)
        .filter(|&i| eig.values[i] >= threshold - ADMISSIBLE_SLACK)
        .collect();
    Ok(IndicialData {
        residue_matrix: residue,
        exponents: eig.values,
        directions: eig.vectors,
        threshold,
        admissible,
        drift,
    })
}

/// Least-squares log-log slope of `beta^(1/2) alpha^m` over `[1e-6, 1e-4]`.
pub fn weight_threshold(geom: &CfwpGeometry) -> Result<f64, EvalError> {
    let (lo, hi) = (1e-6f64.ln(), 1e-4f64.ln());
    let mut pts = Vec::with_capacity(SLOPE_SAMPLES);
    for i in 0..SLOPE_SAMPLES {
        let x = lo + (hi - lo) * i as f64 / (SLOPE_SAMPLES - 1) as f64;
        pts.push((x, geom.substitution_weight(x.exp())?.ln()));
    }
    let n = pts.len() as f64;
    let mx = pts.iter().map(|p| p.0).sum::<f64>() / n;
    let my = pts.iter().map(|p| p.1).sum::<f64>() / n;
    let sxy: f64 = pts.iter().map(|p| (p.0 - mx) * (p.1 - my)).sum();
    let sxx: f64 = pts.iter().map(|p| (p.0 - mx).powi(2)).sum();
    Ok(sxy / sxx)
}

/// Indicial data of a mode, with the threshold taken from its geometry.
pub fn indicial(coeffs: &RadialCoeffs) -> Result<IndicialData, IndicialError> {
    let threshold = weight_threshold(coeffs.geometry())?;
    indicial_system(coeffs, threshold)
}
