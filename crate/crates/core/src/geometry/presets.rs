use serde::{Deserialize, Serialize};

use super::{parse_profile, AsymptoticHint, CfwpGeometry, GeometryError, Hints, Window};
use crate::exprfn::ParamBinding;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum PresetName {
    Euclidean,
    TaubNut,
    IwaiKatayama,
}

impl PresetName {
    pub fn as_str(self) -> &'static str {
        match self {
            PresetName::Euclidean => "euclidean",
            PresetName::TaubNut => "taub-nut",
            PresetName::IwaiKatayama => "iwai-katayama",
        }
    }

    fn required(self) -> &'static [&'static str] {
        match self {
            PresetName::Euclidean => &[],
            PresetName::TaubNut => &["a", "b"],
            PresetName::IwaiKatayama => &["a", "b", "c", "d"],
        }
    }
}

/// Flat space and the two four-dimensional families.
pub fn preset(
    name: PresetName,
    params: &ParamBinding,
    m: u32,
    window: Window,
) -> Result<CfwpGeometry, GeometryError> {
    if m == 0 {
        return Err(GeometryError::InvalidParams("m must be at least 1".into()));
    }
    let required = name.required();
    for key in params.0.keys() {
        if !required.contains(&key.as_str()) {
            return Err(GeometryError::InvalidParams(format!(
                "unknown parameter `{key}` for preset {}",
                name.as_str()
            )));
        }
    }
    for key in required {
        match params.get(key) {
            None => {
                return Err(GeometryError::InvalidParams(format!(
                    "preset {} needs parameter `{key}`",
                    name.as_str()
                )))
            }
            Some(v) if !(v > 0.0 && v.is_finite()) => {
                return Err(GeometryError::InvalidParams(format!(
                    "parameter `{key}` must be positive, got {v}"
                )))
            }
            Some(_) => {}
        }
    }
    if name != PresetName::Euclidean && m != 1 {
        return Err(GeometryError::InvalidParams(format!(
            "preset {} is four-dimensional and needs m = 1, got {m}",
            name.as_str()
        )));
    }
    let sqrt2 = std::f64::consts::SQRT_2;
    let (alpha, beta, gamma) = match name {
        PresetName::Euclidean => ("t/sqrt(2)", "t", None),
        PresetName::TaubNut => ("sqrt(2)*t", "2*t/(1+b*t)", Some("sqrt((a+b*t)/t)")),
        PresetName::IwaiKatayama => (
            "sqrt(2)*t",
            "2*t/sqrt(1+c*t+d*t^2)",
            Some("sqrt((a+b*t)/t)"),
        ),
    };
    let hints = match name {
        PresetName::Euclidean => Hints {
            alpha: AsymptoticHint::Power {
                exponent: 1.0,
                coefficient: std::f64::consts::FRAC_1_SQRT_2,
            },
            ..Hints::default()
        },
        _ => Hints {
            alpha: AsymptoticHint::Power {
                exponent: 1.0,
                coefficient: sqrt2,
            },
            beta: AsymptoticHint::None,
            gamma: AsymptoticHint::BoundedBelow {
                bound: params.get("b").unwrap_or(0.0).sqrt(),
            },
        },
    };
    let gamma = match gamma {
        Some(text) => Some(parse_profile("gamma", text, params)?),
        None => None,
    };
    let g = CfwpGeometry::new(
        m,
        parse_profile("alpha", alpha, params)?,
        parse_profile("beta", beta, params)?,
        gamma,
        hints,
        window,
    )?;
    Ok(g.with_label(name.as_str()))
}
