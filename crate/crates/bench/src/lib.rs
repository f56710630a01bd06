//! Fixtures shared by the pipeline benchmarks.

use cfwp_core::geometry::{preset, PresetName, Window};
use cfwp_core::{CfwpGeometry, ModeIndex, ParamBinding, SweepGrid};

pub fn flat() -> CfwpGeometry {
    preset(
        PresetName::Euclidean,
        &ParamBinding::new(),
        1,
        Window::default(),
    )
    .expect("flat space is a valid preset")
}

pub fn four_dimensional() -> CfwpGeometry {
    let p = ParamBinding::new()
        .with("a", 1.0)
        .with("b", 1.0)
        .with("c", 1.0)
        .with("d", 1.0);
    preset(PresetName::IwaiKatayama, &p, 1, Window::default()).expect("unit parameters are valid")
}

pub fn sample_mode() -> ModeIndex {
    ModeIndex::new(1, 0, 1, std::f64::consts::SQRT_2)
}

/// A 3 x 2 x 5 slice of the vanishing grid.
pub fn small_grid() -> SweepGrid {
    serde_json::from_str(
        r#"{"k": [-1, 1], "l": [0], "epsilon": [1, -1], "lambda": [0.0, 0.5, -1.0, 2.0, -5.0]}"#,
    )
    .expect("grid literal parses")
}
