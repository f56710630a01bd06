use std::fmt::Write as _;
use std::path::{Path, PathBuf};

use cfwp_core::geometry::{GeometryDescriptor, GeometryError};
use cfwp_core::hypotheses::aggregate;
use cfwp_core::report::{to_csv, to_json_string};
use cfwp_core::verdict::{classify_mode, SweepError};
use cfwp_core::{
    check_all, reparametrize, sweep, verify_identities, HypothesisReport, ModeVerdict, RadialModel,
    Status, Verdict,
};
use serde::Serialize;

use crate::config::RunConfig;
use crate::error::CliError;
use crate::output::{csv_file, emit};

pub const EXIT_OK: i32 = 0;
pub const EXIT_NEGATIVE: i32 = 2;
pub const EXIT_INCONCLUSIVE: i32 = 3;

pub struct Outputs {
    pub out: Option<PathBuf>,
    pub csv_dir: Option<PathBuf>,
}

impl Outputs {
    fn csv_dir(&self) -> Result<Option<&Path>, CliError> {
        match &self.csv_dir {
            Some(d) => {
                std::fs::create_dir_all(d)
                    .map_err(|e| CliError::Io(format!("{}: {e}", d.display())))?;
                Ok(Some(d))
            }
            None => Ok(None),
        }
    }
}

fn status_code(s: Status) -> i32 {
    match s {
        Status::Holds => EXIT_OK,
        Status::Fails => EXIT_NEGATIVE,
        Status::Inconclusive => EXIT_INCONCLUSIVE,
    }
}

fn json<T: Serialize + ?Sized>(v: &T) -> Result<String, CliError> {
    to_json_string(v).map_err(|e| CliError::Io(format!("serialization: {e}")))
}

fn refuse_geometry(e: GeometryError) -> CliError {
    match e {
        GeometryError::IntConditionFailed(s) => CliError::Refused(
            status_code(s),
            format!("cannot reparametrize: condition (int) {s:?}"),
        ),
        other => CliError::Config(format!("geometry: {other}")),
    }
}

fn model(cfg: &RunConfig) -> Result<RadialModel, CliError> {
    RadialModel::new(cfg.build_geometry()?).map_err(refuse_geometry)
}

fn file_stem(condition: &str) -> String {
    condition.replace('\'', "-prime")
}

pub fn check(cfg: &RunConfig, out: &Outputs) -> Result<i32, CliError> {
    let geom = cfg.build_geometry()?;
    let reports = check_all(&geom);
    emit(out.out.as_deref(), &json(&reports)?)?;
    if let Some(dir) = out.csv_dir()? {
        for r in &reports {
            let rows = r.evidence.iter().map(|&(x, v)| vec![x, v]);
            let name = format!("{}.csv", file_stem(r.condition.as_str()));
            csv_file(dir, &name, &to_csv(&["x", "value"], rows))?;
        }
    }
    let status = aggregate(&reports);
    for r in &reports {
        eprintln!("{:>4}: {:?}", r.condition.as_str(), r.status);
    }
    eprintln!("hypotheses: {status:?}");
    Ok(status_code(status))
}

#[derive(Serialize)]
struct SolveReport<'a> {
    geometry: GeometryDescriptor,
    hypotheses: &'a [HypothesisReport],
    #[serde(flatten)]
    result: &'a ModeVerdict,
}

fn verdict_code(v: Verdict) -> i32 {
    match v {
        Verdict::NoL2 => EXIT_OK,
        Verdict::CandidateL2 => EXIT_NEGATIVE,
        Verdict::Inconclusive => EXIT_INCONCLUSIVE,
    }
}

pub fn solve_mode(cfg: &RunConfig, out: &Outputs) -> Result<i32, CliError> {
    let mode = cfg.require_mode()?;
    let model = model(cfg)?;
    mode.validate(model.working.m).map_err(CliError::config)?;
    let result = classify_mode(&model, mode, &cfg.shoot).map_err(CliError::config)?;
    let report = SolveReport {
        geometry: model.geometry.descriptor(),
        hypotheses: &model.hypotheses,
        result: &result,
    };
    emit(out.out.as_deref(), &json(&report)?)?;
    if let Some(dir) = out.csv_dir()? {
        for (i, run) in result.outcome.runs.iter().enumerate() {
            csv_file(dir, &format!("bounded-{i}.csv"), &run.trajectory.to_csv())?;
        }
    }
    eprintln!(
        "mode (k={}, l={}, epsilon={}, lambda={}): {}",
        mode.k,
        mode.l,
        mode.epsilon,
        mode.lambda,
        result.verdict().as_str()
    );
    Ok(verdict_code(result.verdict()))
}

pub fn sweep_modes(cfg: &RunConfig, out: &Outputs) -> Result<i32, CliError> {
    let grid = cfg.require_sweep()?;
    let model = model(cfg)?;
    let report = sweep(&model, grid, &cfg.shoot).map_err(|e| match e {
        SweepError::ResourceLimit(_) | SweepError::InvalidInput(_) | SweepError::Mode(_) => {
            CliError::config(e)
        }
    })?;
    emit(out.out.as_deref(), &json(&report)?)?;
    if let Some(dir) = out.csv_dir()? {
        let mut text = String::from("k,l,epsilon,lambda,verdict,residual,boundedDim\n");
        for e in &report.grid {
            let residual = e.residual.map(|r| format!("{r:.16e}")).unwrap_or_default();
            let _ = writeln!(
                text,
                "{},{},{},{:.16e},{},{residual},{}",
                e.mode.k,
                e.mode.l,
                e.mode.epsilon,
                e.mode.lambda,
                e.verdict.as_str(),
                e.bounded_dim
            );
        }
        csv_file(dir, "sweep.csv", &text)?;
    }
    let s = &report.summary;
    eprintln!(
        "{} modes: {} no-L2, {} candidate-L2, {} inconclusive ({})",
        s.total, s.no_l2, s.candidate_l2, s.inconclusive, s.headline
    );
    Ok(if s.candidate_l2 > 0 {
        EXIT_NEGATIVE
    } else if s.inconclusive > 0 {
        EXIT_INCONCLUSIVE
    } else {
        EXIT_OK
    })
}

pub fn lemmas(cfg: &RunConfig, out: &Outputs) -> Result<i32, CliError> {
    let mode = cfg.require_mode()?;
    let model = model(cfg)?;
    let report = verify_identities(&model.working, mode).map_err(CliError::config)?;
    emit(out.out.as_deref(), &json(&report)?)?;
    for c in &report.checks {
        eprintln!("{:>12}: {:?}", c.name, c.status);
    }
    Ok(if report.all_pass {
        EXIT_OK
    } else {
        EXIT_NEGATIVE
    })
}

pub fn reparam(cfg: &RunConfig, out: &Outputs) -> Result<i32, CliError> {
    let geom = cfg.build_geometry()?;
    if geom.gamma.is_none() {
        return Err(CliError::Config(
            "reparam needs a geometry with a conformal factor `gamma`".into(),
        ));
    }
    let r = reparametrize(&geom).map_err(refuse_geometry)?;
    let samples = r.samples();
    let rows = samples.iter().map(|&(s, _, a, b)| vec![s, a, b]);
    emit(out.out.as_deref(), &to_csv(&["s", "alpha", "beta"], rows))?;
    eprintln!(
        "{} nodes, s in [{:e}, {:e}]",
        samples.len(),
        samples[0].0,
        samples[samples.len() - 1].0
    );
    Ok(EXIT_OK)
}
