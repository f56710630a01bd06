//! Mode bookkeeping and the coefficient fields of the radial systems.

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::exprfn::EvalError;
use crate::geometry::{CfwpGeometry, Profile};
use crate::linalg::Mat2;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum ModeError {
    #[error("l = {l} is outside 0..={max} for m = {m}", max = m.saturating_sub(1))]
    InvalidL { l: u32, m: u32 },
    #[error("epsilon must be +1 or -1, got {0}")]
    InvalidEpsilon(i8),
    #[error("lambda must be finite, got {0}")]
    NonFiniteLambda(f64),
    #[error("the (u, w) system needs symbolic profiles for exact derivatives")]
    TabulatedProfileUnsupported,
}

/// One spinor mode: effective auxiliary power `k`, Kähler index `l`,
/// chirality `epsilon` and base eigenvalue `lambda`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ModeIndex {
    pub k: i64,
    pub l: u32,
    pub epsilon: i8,
    pub lambda: f64,
}

impl ModeIndex {
    pub fn new(k: i64, l: u32, epsilon: i8, lambda: f64) -> ModeIndex {
        ModeIndex {
            k,
            l,
            epsilon,
            lambda,
        }
    }

    pub fn validate(&self, m: u32) -> Result<(), ModeError> {
        if self.l >= m {
            return Err(ModeError::InvalidL { l: self.l, m });
        }
        if self.epsilon != 1 && self.epsilon != -1 {
            return Err(ModeError::InvalidEpsilon(self.epsilon));
        }
        if !self.lambda.is_finite() {
            return Err(ModeError::NonFiniteLambda(self.lambda));
        }
        Ok(())
    }

    /// `(-1)^l`.
    pub fn parity(&self) -> f64 {
        if self.l.is_multiple_of(2) {
            1.0
        } else {
            -1.0
        }
    }

    /// `epsilon (-1)^l`.
    pub fn chiral_parity(&self) -> f64 {
        self.epsilon as f64 * self.parity()
    }

    /// `k = 0`, `m = 2l + 1`, `(-1)^l = -epsilon`: the case where the
    /// diagonal entries coincide.
    pub fn is_special_case(&self, m: u32) -> bool {
        self.k == 0 && m == 2 * self.l + 1 && self.chiral_parity() == -1.0
    }
}

/// A real 2x2 linear system `y' = M(t) y`.
pub trait LinearSystem: Send + Sync {
    fn matrix(&self, t: f64) -> Result<Mat2, EvalError>;
}

impl<T: LinearSystem + ?Sized> LinearSystem for &T {
    fn matrix(&self, t: f64) -> Result<Mat2, EvalError> {
        (**self).matrix(t)
    }
}

/// A system given by a closure, for synthetic test problems.
pub struct FnSystem<F>(pub F);

impl<F: Fn(f64) -> Mat2 + Send + Sync> LinearSystem for FnSystem<F> {
    fn matrix(&self, t: f64) -> Result<Mat2, EvalError> {
        Ok((self.0)(t))
    }
}

/// Symmetric coefficient field `[[rho, sigma], [sigma, tau]]` of the
/// substituted system in `(U, W)`.
#[derive(Debug, Clone)]
pub struct RadialCoeffs {
    geom: CfwpGeometry,
    mode: ModeIndex,
}

impl RadialCoeffs {
    pub fn geometry(&self) -> &CfwpGeometry {
        &self.geom
    }

    pub fn mode(&self) -> ModeIndex {
        self.mode
    }

    /// `(rho, sigma, tau)` at `t`.
    pub fn entries(&self, t: f64) -> Result<(f64, f64, f64), EvalError> {
        let a = self.geom.alpha.value(t)?;
        let b = self.geom.beta.value(t)?;
        Ok(entries(self.geom.m, &self.mode, a, b))
    }

    pub fn rho(&self, t: f64) -> Result<f64, EvalError> {
        Ok(self.entries(t)?.0)
    }

    pub fn sigma(&self, t: f64) -> Result<f64, EvalError> {
        Ok(self.entries(t)?.1)
    }

    pub fn tau(&self, t: f64) -> Result<f64, EvalError> {
        Ok(self.entries(t)?.2)
    }

    /// Relative residual of `rho + tau + epsilon (-1)^l beta / (2 alpha^2) = 0`.
    pub fn trace_identity_residual(&self, t: f64) -> Result<f64, EvalError> {
        let a = self.geom.alpha.value(t)?;
        let b = self.geom.beta.value(t)?;
        let (rho, _, tau) = entries(self.geom.m, &self.mode, a, b);
        let rhs = self.mode.chiral_parity() * b / (2.0 * a * a);
        let scale = rho.abs() + tau.abs() + rhs.abs();
        Ok(if scale == 0.0 {
            0.0
        } else {
            (rho + tau + rhs).abs() / scale
        })
    }
}

fn entries(m: u32, mode: &ModeIndex, a: f64, b: f64) -> (f64, f64, f64) {
    let m = m as f64;
    let l = mode.l as f64;
    let k = mode.k as f64;
    let e = mode.chiral_parity();
    let a2 = a * a;
    let b2 = b * b;
    let den = 4.0 * b * a2;
    let rho = e * ((2.0 * l - m) * b2 + 2.0 * a2 * k) / den;
    let tau = e * ((m - 2.0 * (l + 1.0)) * b2 - 2.0 * a2 * k) / den;
    let sigma = mode.parity() * mode.lambda / a;
    (rho, sigma, tau)
}

impl LinearSystem for RadialCoeffs {
    fn matrix(&self, t: f64) -> Result<Mat2, EvalError> {
        let (rho, sigma, tau) = self.entries(t)?;
        Ok([[rho, sigma], [sigma, tau]])
    }
}

pub fn coefficients(geom: &CfwpGeometry, mode: ModeIndex) -> Result<RadialCoeffs, ModeError> {
    mode.validate(geom.m)?;
    Ok(RadialCoeffs {
        geom: geom.clone(),
        mode,
    })
}

/// Coefficient field of the system in `(u, w)` before the substitution
/// `U = u beta^(1/2) alpha^m`; it carries the derivative terms.
#[derive(Debug, Clone)]
pub struct RawCoeffs {
    geom: CfwpGeometry,
    mode: ModeIndex,
    dalpha: Profile,
    dbeta: Profile,
}

impl RawCoeffs {
    pub fn mode(&self) -> ModeIndex {
        self.mode
    }
}

impl LinearSystem for RawCoeffs {
    fn matrix(&self, t: f64) -> Result<Mat2, EvalError> {
        let a = self.geom.alpha.value(t)?;
        let b = self.geom.beta.value(t)?;
        let da = self.dalpha.value(t)?;
        let db = self.dbeta.value(t)?;
        let m = self.geom.m as f64;
        let l = self.mode.l as f64;
        let k = self.mode.k as f64;
        let e = self.mode.chiral_parity();
        let a2 = a * a;
        let b2 = b * b;
        let den = 4.0 * b * a2;
        let shared = -2.0 * a2 * db - 4.0 * m * a * da * b;
        let u = (e * (2.0 * l - m) * b2 + shared + e * 2.0 * a2 * k) / den;
        let w = (e * (m - 2.0 * (l + 1.0)) * b2 + shared - e * 2.0 * a2 * k) / den;
        let off = self.mode.parity() * self.mode.lambda / a;
        Ok([[u, off], [off, w]])
    }
}

pub fn raw_system(geom: &CfwpGeometry, mode: ModeIndex) -> Result<RawCoeffs, ModeError> {
    mode.validate(geom.m)?;
    let (Some(dalpha), Some(dbeta)) = (geom.alpha.derivative(), geom.beta.derivative()) else {
        return Err(ModeError::TabulatedProfileUnsupported);
    };
    Ok(RawCoeffs {
        geom: geom.clone(),
        mode,
        dalpha,
        dbeta,
    })
}

/// The weight `w(t) = beta(t)^(1/2) alpha(t)^m`.
#[derive(Debug, Clone)]
pub struct SubstitutionWeight {
    geom: CfwpGeometry,
}

impl SubstitutionWeight {
    pub fn value(&self, t: f64) -> Result<f64, EvalError> {
        self.geom.substitution_weight(t)
    }

    /// `w'/w`, available for symbolic profiles.
    pub fn log_derivative(&self, t: f64) -> Option<Result<f64, EvalError>> {
        self.geom.substitution_log_derivative(t)
    }
}

pub fn substitution_weight(geom: &CfwpGeometry) -> SubstitutionWeight {
    SubstitutionWeight { geom: geom.clone() }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::exprfn::ParamBinding;
    use crate::geometry::{preset, reparametrize, PresetName, Window};

    fn euclidean(m: u32) -> CfwpGeometry {
        preset(
            PresetName::Euclidean,
            &ParamBinding::new(),
            m,
            Window::default(),
        )
        .unwrap()
    }

    fn ik() -> CfwpGeometry {
        let p = ParamBinding::new()
            .with("a", 1.0)
            .with("b", 1.0)
            .with("c", 1.0)
            .with("d", 1.0);
        preset(PresetName::IwaiKatayama, &p, 1, Window::default()).unwrap()
    }

    #[test]
    fn flat_space_entries() {
        let lambda = 0.7;
        let c = coefficients(&euclidean(1), ModeIndex::new(0, 0, 1, lambda)).unwrap();
        for &t in &[1e-3, 0.5, 2.0, 300.0] {
            let (rho, sigma, tau) = c.entries(t).unwrap();
            assert!((rho + 0.5 / t).abs() <= 1e-15 * (0.5 / t));
            assert!((tau + 0.5 / t).abs() <= 1e-15 * (0.5 / t));
            assert!((sigma - 2f64.sqrt() * lambda / t).abs() <= 1e-15 * sigma.abs());
        }
    }

    #[test]
    fn zero_lambda_decouples() {
        let c = coefficients(&ik(), ModeIndex::new(3, 0, -1, 0.0)).unwrap();
        assert_eq!(c.sigma(0.37).unwrap(), 0.0);
        let r = raw_system(&ik(), ModeIndex::new(3, 0, -1, 0.0)).unwrap();
        let m = r.matrix(0.37).unwrap();
        assert_eq!((m[0][1], m[1][0]), (0.0, 0.0));
    }

    #[test]
    fn raw_diagonal_matches_substitution_oracle() {
        // Hand substitution at t = 1: numerator -1 - 1 + 0 - 2 = -4 over 4 * 1 * 1/2.
        let r = raw_system(&euclidean(1), ModeIndex::new(0, 0, 1, 1.0)).unwrap();
        let m = r.matrix(1.0).unwrap();
        assert!((m[0][0] + 2.0).abs() < 1e-14, "{}", m[0][0]);
        // w-diagonal: (-1) - 1 - 0 - 2 over 2.
        assert!((m[1][1] + 2.0).abs() < 1e-14);
        assert!((m[0][1] - 2f64.sqrt()).abs() < 1e-14);
    }

    #[test]
    fn raw_system_differs_from_substituted_by_log_weight() {
        let g = ik();
        let mode = ModeIndex::new(2, 0, -1, 0.8);
        let c = coefficients(&g, mode).unwrap();
        let r = raw_system(&g, mode).unwrap();
        let w = substitution_weight(&g);
        for &t in &[1e-4, 0.03, 1.0, 17.0, 4e3] {
            let shift = w.log_derivative(t).unwrap().unwrap();
            let mc = c.matrix(t).unwrap();
            let mr = r.matrix(t).unwrap();
            for i in 0..2 {
                let want = mc[i][i] - shift;
                assert!(
                    (mr[i][i] - want).abs() <= 1e-13 * want.abs().max(1.0),
                    "t={t}"
                );
            }
        }
    }

    #[test]
    fn raw_system_rejects_tabulated_profiles() {
        let r = reparametrize(&ik()).unwrap();
        assert!(matches!(
            raw_system(&r.geometry, ModeIndex::new(0, 0, 1, 1.0)),
            Err(ModeError::TabulatedProfileUnsupported)
        ));
    }

    #[test]
    fn trace_identity_on_tabulated_profiles() {
        let r = reparametrize(&ik()).unwrap();
        let c = coefficients(&r.geometry, ModeIndex::new(2, 0, -1, 0.3)).unwrap();
        let (rho, _, tau) = c.entries(1.0).unwrap();
        let a = r.geometry.alpha.value(1.0).unwrap();
        let b = r.geometry.beta.value(1.0).unwrap();
        let rhs = b / (2.0 * a * a);
        assert!((rho + tau - rhs).abs() <= 1e-12 * rhs);
    }

    #[test]
    fn chirality_flip_negates_the_diagonal() {
        let g = ik();
        let p = coefficients(&g, ModeIndex::new(-3, 0, 1, 1.5)).unwrap();
        let n = coefficients(&g, ModeIndex::new(-3, 0, -1, 1.5)).unwrap();
        for &t in &[1e-5, 0.2, 9.0] {
            let (a, b, c) = p.entries(t).unwrap();
            let (x, y, z) = n.entries(t).unwrap();
            assert_eq!((a, b, c), (-x, y, -z));
        }
    }

    #[test]
    fn weight_values() {
        let w = substitution_weight(&euclidean(1));
        assert!((w.value(4.0).unwrap() - 4.0 * 2f64.sqrt()).abs() < 1e-14);
    }

    #[test]
    fn weight_slope_in_s_near_the_origin() {
        let r = reparametrize(&ik()).unwrap();
        let w = substitution_weight(&r.geometry);
        let (s0, s1) = (1e-5, 1e-3);
        let slope = (w.value(s1).unwrap() / w.value(s0).unwrap()).ln() / (s1 / s0).ln();
        assert!((slope - 1.5).abs() < 0.05, "{slope}");
    }

    #[test]
    fn mode_validation() {
        assert!(ModeIndex::new(0, 1, 1, 0.0).validate(1).is_err());
        assert!(ModeIndex::new(0, 0, 0, 0.0).validate(1).is_err());
        assert!(ModeIndex::new(0, 0, 1, f64::NAN).validate(1).is_err());
        assert!(ModeIndex::new(0, 1, -1, 0.0).validate(3).is_ok());
        assert!(ModeIndex::new(0, 0, -1, 1.0).is_special_case(1));
        assert!(!ModeIndex::new(0, 0, 1, 1.0).is_special_case(1));
        let json = r#"{"k": -2, "l": 0, "epsilon": -1, "lambda": 0.5}"#;
        let m: ModeIndex = serde_json::from_str(json).unwrap();
        assert_eq!(m, ModeIndex::new(-2, 0, -1, 0.5));
    }
}
