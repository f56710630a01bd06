use std::path::{Path, PathBuf};

use cfwp_core::geometry::{GeometryError, Window};
use cfwp_core::verdict::SweepGrid;
use cfwp_core::{CfwpGeometry, GeometrySpec, ModeIndex, ShootOptions};
use serde::{Deserialize, Serialize};
use serde_json::{Map, Value};

use crate::error::CliError;

pub const WINDOW_ENV: &str = "CFWP_WINDOW";

#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct OutputPaths {
    #[serde(default)]
    pub out: Option<PathBuf>,
    #[serde(default)]
    pub csv_dir: Option<PathBuf>,
}

/// One run of any subcommand. Blocks a command does not use are ignored.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct RunConfig {
    pub geometry: GeometrySpec,
    #[serde(default)]
    pub window: Option<Window>,
    #[serde(default)]
    pub mode: Option<ModeIndex>,
    #[serde(default)]
    pub sweep: Option<SweepGrid>,
    #[serde(default)]
    pub shoot: ShootOptions,
    #[serde(default)]
    pub output: OutputPaths,
}

impl RunConfig {
    pub fn window(&self) -> Result<Window, CliError> {
        let w = self.window.unwrap_or_default();
        Window::new(w.t_min, w.t_max).map_err(CliError::config)
    }

    pub fn build_geometry(&self) -> Result<CfwpGeometry, CliError> {
        self.geometry
            .build(self.window()?)
            .map_err(|e: GeometryError| CliError::Config(format!("geometry: {e}")))
    }

    pub fn require_mode(&self) -> Result<ModeIndex, CliError> {
        self.mode
            .ok_or_else(|| CliError::Config("the configuration has no `mode` block".into()))
    }

    pub fn require_sweep(&self) -> Result<&SweepGrid, CliError> {
        self.sweep
            .as_ref()
            .ok_or_else(|| CliError::Config("the configuration has no `sweep` block".into()))
    }
}

/// Reads `path`, applies the window variable and then every `key=value`
/// override, and deserializes strictly.
pub fn load(
    path: &Path,
    overrides: &[String],
    env_window: Option<&str>,
) -> Result<RunConfig, CliError> {
    let text = std::fs::read_to_string(path)
        .map_err(|e| CliError::Io(format!("cannot read {}: {e}", path.display())))?;
    let mut doc: Value = serde_json::from_str(&text)
        .map_err(|e| CliError::Config(format!("{}: {e}", path.display())))?;
    if let Some(w) = env_window {
        let (t_min, t_max) = parse_window(w)?;
        set_path(&mut doc, "window.t_min", t_min.into())?;
        set_path(&mut doc, "window.t_max", t_max.into())?;
    }
    for item in overrides {
        let (key, raw) = item
            .split_once('=')
            .ok_or_else(|| CliError::Config(format!("--set expects key=value, got `{item}`")))?;
        let value = serde_json::from_str(raw).unwrap_or_else(|_| Value::String(raw.to_string()));
        set_path(&mut doc, key.trim(), value)?;
    }
    let cfg: RunConfig = serde_json::from_value(doc)
        .map_err(|e| CliError::Config(format!("{}: {e}", path.display())))?;
    cfg.shoot.validate().map_err(CliError::Config)?;
    Ok(cfg)
}

fn parse_window(text: &str) -> Result<(f64, f64), CliError> {
    let bad = || CliError::Config(format!("{WINDOW_ENV} must read `tmin,tmax`, got `{text}`"));
    let (a, b) = text.split_once(',').ok_or_else(bad)?;
    let a: f64 = a.trim().parse().map_err(|_| bad())?;
    let b: f64 = b.trim().parse().map_err(|_| bad())?;
    Window::new(a, b).map_err(CliError::config)?;
    Ok((a, b))
}

/// Sets a dotted path, creating intermediate objects as needed.
fn set_path(doc: &mut Value, key: &str, value: Value) -> Result<(), CliError> {
    let parts: Vec<&str> = key.split('.').collect();
    if parts.iter().any(|p| p.is_empty()) {
        return Err(CliError::Config(format!("malformed override key `{key}`")));
    }
    let mut node = doc;
    for (i, part) in parts.iter().enumerate() {
        let Value::Object(map) = node else {
            return Err(CliError::Config(format!(
                "override `{key}`: `{}` is not an object",
                parts[..i].join(".")
            )));
        };
        if i + 1 == parts.len() {
            map.insert(part.to_string(), value);
            return Ok(());
        }
        node = map
            .entry(part.to_string())
            .or_insert_with(|| Value::Object(Map::new()));
    }
    unreachable!("the key has at least one component")
}
