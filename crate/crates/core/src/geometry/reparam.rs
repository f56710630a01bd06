use std::sync::Arc;

use rayon::prelude::*;

use super::table::{log_nodes, LogTable};
use super::{check_int_condition, CfwpGeometry, GeometryError, Hints, Profile, Window};
use crate::exprfn::{integrate_adaptive, QuadError};
use crate::improper::Status;

/// Tabulation density of the reparametrized profiles.
pub const NODES_PER_DECADE: usize = 2048;
const SEGMENT_TOL: f64 = 1e-13;
const MAX_DECADE_STEPS: usize = 60;

/// A geometry expressed in the arclength-like coordinate `s = ∫_0^t gamma`.
#[derive(Debug, Clone)]
pub struct ReparamResult {
    /// Profiles `gamma*alpha`, `gamma*beta` as functions of `s`, with no
    /// conformal factor left. Its window is the original window read in `s`.
    pub geometry: CfwpGeometry,
    s_table: Arc<LogTable>,
}

impl ReparamResult {
    pub fn s_of_t(&self, t: f64) -> f64 {
        self.s_table.eval(t)
    }

    pub fn t_of_s(&self, s: f64) -> f64 {
        self.s_table.invert(s)
    }

    /// Range of `t` covered by the tables.
    pub fn t_range(&self) -> (f64, f64) {
        self.s_table.range()
    }

    /// `(s, t, alpha~, beta~)` at every tabulation node.
    pub fn samples(&self) -> Vec<(f64, f64, f64, f64)> {
        let (Profile::Tabulated(a), Profile::Tabulated(b)) =
            (&self.geometry.alpha, &self.geometry.beta)
        else {
            unreachable!("reparametrized profiles are always tabulated")
        };
        self.s_table
            .nodes()
            .zip(a.nodes().zip(b.nodes()))
            .map(|((t, s), ((_, av), (_, bv)))| (s, t, av, bv))
            .collect()
    }
}

fn integral(gamma: &Profile, lo: f64, hi: f64) -> Result<f64, QuadError> {
    match integrate_adaptive(|t| gamma.value_or_nan(t), lo, hi, SEGMENT_TOL) {
        Ok(q) => Ok(q.value),
        Err(QuadError::ToleranceNotMet { estimate, .. }) => Ok(estimate),
        Err(e) => Err(e),
    }
}

/// Rewrites `gamma^2 (dt^2 + alpha^2 g_B + beta^2 xi^2)` as an unscaled
/// geometry in `s = ∫_0^t gamma`.
pub fn reparametrize(geom: &CfwpGeometry) -> Result<ReparamResult, GeometryError> {
    let gamma = geom.gamma.as_ref().ok_or(GeometryError::MissingGamma)?;
    let int = check_int_condition(geom)?;
    if int.status != Status::Holds {
        return Err(GeometryError::IntConditionFailed(int.status));
    }
    let target = geom.window;

    let mut t_lo = target.t_min;
    let mut steps = 0;
    while integral(gamma, 0.0, t_lo)? > target.t_min {
        t_lo /= 10.0;
        steps += 1;
        if steps > MAX_DECADE_STEPS {
            return Err(GeometryError::IntConditionFailed(Status::Inconclusive));
        }
    }
    let s_one = integral(gamma, 0.0, 1.0)?;
    let mut t_hi = target.t_max.max(1.0);
    let mut steps = 0;
    while s_one + integral(gamma, 1.0, t_hi)? < target.t_max {
        t_hi *= 10.0;
        steps += 1;
        if steps > MAX_DECADE_STEPS {
            return Err(GeometryError::IntConditionFailed(Status::Inconclusive));
        }
    }

    let t = log_nodes(t_lo, t_hi, NODES_PER_DECADE);
    let s0 = integral(gamma, 0.0, t[0])?;
    let segments: Vec<f64> = t
        .par_windows(2)
        .map(|w| integral(gamma, w[0], w[1]))
        .collect::<Result<_, _>>()?;
    let mut s = Vec::with_capacity(t.len());
    s.push(s0);
    for seg in segments {
        let last = s[s.len() - 1];
        s.push(last + seg);
    }

    let eval = |p: &Profile, name: &'static str, x: f64| {
        p.value(x).map_err(|source| GeometryError::Eval {
            profile: name,
            source,
        })
    };
    let mut at = Vec::with_capacity(t.len());
    let mut bt = Vec::with_capacity(t.len());
    for &x in &t {
        let g = eval(gamma, "gamma", x)?;
        at.push(g * eval(&geom.alpha, "alpha", x)?);
        bt.push(g * eval(&geom.beta, "beta", x)?);
    }
    let alpha = LogTable::new(&s, &at)?;
    let beta = LogTable::new(&s, &bt)?;
    let s_table = LogTable::new(&t, &s)?;
    let geometry = CfwpGeometry::new(
        geom.m,
        Profile::Tabulated(Arc::new(alpha)),
        Profile::Tabulated(Arc::new(beta)),
        None,
        Hints::default(),
        Window::new(target.t_min, target.t_max)?,
    )?
    .with_label(format!("{} in s", geom.label));
    Ok(ReparamResult {
        geometry,
        s_table: Arc::new(s_table),
    })
}

#[cfg(test)]
mod tests {
    use super::super::{preset, GeometrySpec, PresetName};
    use super::*;
    use crate::exprfn::ParamBinding;

    fn euclidean_with(gamma: &str) -> CfwpGeometry {
        euclidean_on(gamma, Window::default())
    }

    // exp(-t) underflows to zero before the default window ends.
    fn euclidean_on(gamma: &str, window: Window) -> CfwpGeometry {
        GeometrySpec {
            m: Some(1),
            alpha: Some("t/sqrt(2)".into()),
            beta: Some("t".into()),
            gamma: Some(gamma.into()),
            ..Default::default()
        }
        .build(window)
        .unwrap()
    }

    fn ik(a: f64) -> CfwpGeometry {
        let p = ParamBinding::new()
            .with("a", a)
            .with("b", 1.0)
            .with("c", 1.0)
            .with("d", 1.0);
        preset(PresetName::IwaiKatayama, &p, 1, Window::default()).unwrap()
    }

    #[test]
    fn unit_factor_is_the_identity() {
        let g = euclidean_with("1");
        let r = reparametrize(&g).unwrap();
        for s in g.window.probe_grid(true) {
            let a = r.geometry.alpha.value(s).unwrap();
            assert!((a / g.alpha.value(s).unwrap() - 1.0).abs() < 1e-10, "s={s}");
            assert!((r.t_of_s(s) / s - 1.0).abs() < 1e-10);
        }
    }

    #[test]
    fn constant_factor_rescales() {
        let r = reparametrize(&euclidean_with("2")).unwrap();
        let a = r.geometry.alpha.value(1.0).unwrap();
        assert!((a - std::f64::consts::FRAC_1_SQRT_2).abs() < 1e-10);
    }

    #[test]
    fn four_dimensional_family_is_smooth_in_s() {
        let r = reparametrize(&ik(1.0)).unwrap();
        let s = 1e-4;
        let a = r.geometry.alpha.value(s).unwrap() / s;
        let b = r.geometry.beta.value(s).unwrap() / s;
        assert!((a - std::f64::consts::FRAC_1_SQRT_2).abs() < 1e-2, "{a}");
        assert!((b - 1.0).abs() < 1e-2, "{b}");
    }

    #[test]
    fn round_trip_and_pointwise_accuracy() {
        let g = ik(1.0);
        let r = reparametrize(&g).unwrap();
        let gamma = g.gamma.as_ref().unwrap();
        // Closed form s(t) = sqrt(t(1+t)) + asinh(sqrt(t)) for a = b = 1.
        for k in 0..200 {
            let t = 1e-8 * 10f64.powf(14.0 * (k as f64 + 0.3) / 200.0);
            let exact = (t * (1.0 + t)).sqrt() + t.sqrt().asinh();
            assert!((r.s_of_t(t) / exact - 1.0).abs() < 1e-9, "t={t}");
            let s = r.s_of_t(t);
            assert!((r.s_of_t(r.t_of_s(s)) / s - 1.0).abs() < 1e-12);
            let tt = r.t_of_s(s);
            let want = gamma.value(tt).unwrap() * g.alpha.value(tt).unwrap();
            let got = r.geometry.alpha.value(s).unwrap();
            assert!((got / want - 1.0).abs() < 1e-8, "s={s}: {got} vs {want}");
        }
    }

    #[test]
    fn failing_int_condition_is_refused() {
        assert!(matches!(
            reparametrize(&euclidean_on("exp(-t)", Window::new(1e-8, 100.0).unwrap())),
            Err(GeometryError::IntConditionFailed(Status::Fails))
        ));
    }
}
