//! Run configuration and on-disk formats: trajectory CSV, model and report
//! JSON.

use std::fs::File;
use std::io::{BufReader, BufWriter, Read, Write};
use std::path::Path;

use serde::{Deserialize, Serialize};

use crate::controller::Phase;
use crate::dynamics::{kinematics, JointTorques, LegParams, LegState};
use crate::error::{Error, Result};
use crate::experiment::{
    EvalReport, LayerTrace, ModelColumns, SampleRanges, SimConfig, Trajectory, TrajectoryRow,
};
use crate::grp::{GrpConfig, GrpLayer, GrpModel};

pub const MODEL_FORMAT_VERSION: u32 = 1;

pub const FIXED_COLUMNS: [&str; 12] = [
    "t",
    "phi_h",
    "phi_k",
    "phi_h_dot",
    "phi_k_dot",
    "alpha",
    "alpha_dot",
    "l",
    "tau_h",
    "tau_k",
    "phase",
    "contact",
];

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct TrainingConfig {
    pub episodes: usize,
    /// Number of demonstration tasks cycled through during training.
    pub demo_count: usize,
}

impl Default for TrainingConfig {
    fn default() -> Self {
        Self {
            episodes: 2000,
            demo_count: 40,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct EvaluationConfig {
    pub trajectories: usize,
    /// A layer counts as active once its π exceeds this.
    pub activity_threshold: f64,
}

impl Default for EvaluationConfig {
    fn default() -> Self {
        Self {
            trajectories: 20,
            activity_threshold: 0.1,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct Seeds {
    /// Demonstration task sampling.
    pub demo: u64,
    /// Weight initialisation; the knee model uses `init + 1`.
    pub init: u64,
    /// Evaluation task sampling.
    pub eval: u64,
}

impl Default for Seeds {
    fn default() -> Self {
        Self {
            demo: 1,
            init: 11,
            eval: 3,
        }
    }
}

/// Everything a CLI run needs. Every field has a default, so an empty JSON
/// object is a valid config.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct RunConfig {
    pub sim: SimConfig,
    pub ranges: SampleRanges,
    /// Hip model settings; `seed` is replaced by `seeds.init`.
    pub hip: GrpConfig,
    /// Knee model settings; `seed` is replaced by `seeds.init + 1`.
    pub knee: GrpConfig,
    pub training: TrainingConfig,
    pub evaluation: EvaluationConfig,
    pub seeds: Seeds,
}

impl Default for RunConfig {
    fn default() -> Self {
        Self {
            sim: SimConfig::default(),
            ranges: SampleRanges::default(),
            hip: GrpConfig::default(),
            knee: GrpConfig {
                m: 3,
                ..GrpConfig::default()
            },
            training: TrainingConfig::default(),
            evaluation: EvaluationConfig::default(),
            seeds: Seeds::default(),
        }
    }
}

fn prefixed(section: &str, err: Error) -> Error {
    match err {
        Error::Config { key, reason } => Error::Config {
            key: format!("{section}.{key}"),
            reason,
        },
        other => other,
    }
}

impl RunConfig {
    pub fn from_json(text: &str) -> Result<Self> {
        let de = &mut serde_json::Deserializer::from_str(text);
        let cfg: RunConfig = serde_path_to_error::deserialize(de).map_err(|e| Error::Config {
            key: e.path().to_string(),
            reason: e.into_inner().to_string(),
        })?;
        cfg.validate()?;
        Ok(cfg)
    }

    pub fn load(path: &Path) -> Result<Self> {
        let mut text = String::new();
        File::open(path)?.read_to_string(&mut text)?;
        Self::from_json(&text)
    }

    pub fn validate(&self) -> Result<()> {
        self.sim.validate().map_err(|e| prefixed("sim", e))?;
        self.ranges.validate().map_err(|e| prefixed("ranges", e))?;
        self.hip.validate().map_err(|e| prefixed("hip", e))?;
        self.knee.validate().map_err(|e| prefixed("knee", e))?;
        if self.training.episodes == 0 {
            return Err(Error::config("training.episodes", "must be at least 1"));
        }
        if self.training.demo_count == 0 {
            return Err(Error::config("training.demo_count", "must be at least 1"));
        }
        if self.evaluation.trajectories == 0 {
            return Err(Error::config(
                "evaluation.trajectories",
                "must be at least 1",
            ));
        }
        let th = self.evaluation.activity_threshold;
        if !(th > 0.0 && th <= 1.0) {
            return Err(Error::config(
                "evaluation.activity_threshold",
                "must lie in (0, 1]",
            ));
        }
        Ok(())
    }

    pub fn hip_config(&self) -> GrpConfig {
        GrpConfig {
            seed: self.seeds.init,
            ..self.hip
        }
    }

    pub fn knee_config(&self) -> GrpConfig {
        GrpConfig {
            seed: self.seeds.init.wrapping_add(1),
            ..self.knee
        }
    }
}

/// Serialized form of a [`GrpModel`].
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ModelFile {
    pub format_version: u32,
    pub config: GrpConfig,
    pub gamma: f64,
    pub episode_count: u64,
    pub layers: Vec<GrpLayer>,
}

impl From<&GrpModel> for ModelFile {
    fn from(model: &GrpModel) -> Self {
        Self {
            format_version: MODEL_FORMAT_VERSION,
            config: model.config,
            gamma: model.gamma,
            episode_count: model.episode_count,
            layers: model.layers.clone(),
        }
    }
}

impl ModelFile {
    pub fn into_model(self) -> Result<GrpModel> {
        if self.format_version != MODEL_FORMAT_VERSION {
            return Err(Error::config(
                "format_version",
                format!("unsupported version {}", self.format_version),
            ));
        }
        self.config.validate()?;
        if self.layers.len() != self.config.m {
            return Err(Error::config(
                "layers",
                format!(
                    "{} layers but config.m = {}",
                    self.layers.len(),
                    self.config.m
                ),
            ));
        }
        if !(self.gamma.is_finite() && self.gamma > 0.0) {
            return Err(Error::config("gamma", "must be finite and positive"));
        }
        Ok(GrpModel {
            layers: self.layers,
            gamma: self.gamma,
            config: self.config,
            episode_count: self.episode_count,
        })
    }
}

fn write_json<T: Serialize>(path: &Path, value: &T) -> Result<()> {
    let mut out = BufWriter::new(File::create(path)?);
    serde_json::to_writer_pretty(&mut out, value)?;
    out.write_all(b"\n")?;
    out.flush()?;
    Ok(())
}

pub fn write_model(path: &Path, model: &GrpModel) -> Result<()> {
    write_json(path, &ModelFile::from(model))
}

pub fn read_model(path: &Path) -> Result<GrpModel> {
    let file: ModelFile = serde_json::from_reader(BufReader::new(File::open(path)?))?;
    file.into_model()
}

pub fn write_report(path: &Path, report: &EvalReport) -> Result<()> {
    write_json(path, report)
}

pub fn read_report(path: &Path) -> Result<EvalReport> {
    Ok(serde_json::from_reader(BufReader::new(File::open(path)?))?)
}

/// Generic JSON writer shared by the CLI for manifests and logs.
pub fn write_json_file<T: Serialize>(path: &Path, value: &T) -> Result<()> {
    write_json(path, value)
}

/// 17 significant digits, enough to recover every `f64` exactly.
pub fn format_float(v: f64) -> String {
    format!("{v:.16e}")
}

pub fn trajectory_header(models: &[ModelColumns]) -> Vec<String> {
    let mut cols: Vec<String> = FIXED_COLUMNS.iter().map(|s| s.to_string()).collect();
    for model in models {
        for k in 1..=model.m {
            for quantity in ["G", "pi", "r"] {
                cols.push(format!("{}_{quantity}_{k}", model.name));
            }
        }
    }
    cols
}

pub fn write_trajectory<W: Write>(out: W, traj: &Trajectory) -> Result<()> {
    let mut w = csv::Writer::from_writer(out);
    w.write_record(trajectory_header(&traj.models))?;
    let mut record: Vec<String> = Vec::new();
    for row in &traj.rows {
        record.clear();
        let s = &row.state;
        for v in [
            s.t,
            s.phi_h,
            s.phi_k,
            s.phi_h_dot,
            s.phi_k_dot,
            row.kin.alpha,
            row.kin.alpha_dot,
            row.kin.l,
            row.torques.tau_h,
            row.torques.tau_k,
        ] {
            record.push(format_float(v));
        }
        record.push(row.phase.number().to_string());
        record.push(u8::from(row.contact).to_string());
        for (trace, cols) in row.layers.iter().zip(&traj.models) {
            if trace.m() != cols.m {
                return Err(Error::Internal(format!(
                    "model {} has {} layers in a row, header says {}",
                    cols.name,
                    trace.m(),
                    cols.m
                )));
            }
            for k in 0..trace.m() {
                record.push(format_float(trace.g[k]));
                record.push(format_float(trace.pi[k]));
                record.push(format_float(trace.r[k]));
            }
        }
        w.write_record(&record)?;
    }
    w.flush()?;
    Ok(())
}

pub fn write_trajectory_file(path: &Path, traj: &Trajectory) -> Result<()> {
    write_trajectory(BufWriter::new(File::create(path)?), traj)
}

fn parse_models(header: &csv::StringRecord) -> Result<Vec<ModelColumns>> {
    let parse_err = |reason: String| Error::Parse { line: 1, reason };
    if header.len() < FIXED_COLUMNS.len() {
        return Err(parse_err(format!(
            "expected at least {} columns, found {}",
            FIXED_COLUMNS.len(),
            header.len()
        )));
    }
    for (i, want) in FIXED_COLUMNS.iter().enumerate() {
        if &header[i] != *want {
            return Err(parse_err(format!(
                "column {} should be `{want}`, found `{}`",
                i + 1,
                &header[i]
            )));
        }
    }
    let extra: Vec<&str> = header.iter().skip(FIXED_COLUMNS.len()).collect();
    if extra.len() % 3 != 0 {
        return Err(parse_err(
            "layer columns must come in G/pi/r triples".into(),
        ));
    }
    let mut models: Vec<ModelColumns> = Vec::new();
    for (idx, triple) in extra.chunks(3).enumerate() {
        let name = triple[0]
            .strip_suffix(|c: char| c.is_ascii_digit())
            .and_then(|_| triple[0].rsplit_once("_G_"))
            .map(|(name, _)| name.to_string())
            .ok_or_else(|| parse_err(format!("bad layer column `{}`", triple[0])))?;
        let k = match models.last_mut() {
            Some(last) if last.name == name => {
                last.m += 1;
                last.m
            }
            _ => {
                models.push(ModelColumns {
                    name: name.clone(),
                    m: 1,
                });
                1
            }
        };
        let expected = ["G", "pi", "r"].map(|q| format!("{name}_{q}_{k}"));
        if triple
            != expected
                .iter()
                .map(String::as_str)
                .collect::<Vec<_>>()
                .as_slice()
        {
            return Err(parse_err(format!(
                "layer columns {} to {} should be {}",
                FIXED_COLUMNS.len() + 3 * idx + 1,
                FIXED_COLUMNS.len() + 3 * idx + 3,
                expected.join(",")
            )));
        }
    }
    Ok(models)
}

/// Reads a trajectory written by [`write_trajectory`]. Foot and knee
/// positions are not stored and are recomputed from the joint state with
/// `params`.
pub fn read_trajectory<R: Read>(input: R, params: &LegParams) -> Result<Trajectory> {
    let mut rd = csv::ReaderBuilder::new()
        .has_headers(false)
        .flexible(true)
        .from_reader(input);
    let mut records = rd.records();
    let header = match records.next() {
        Some(rec) => rec.map_err(|e| Error::Parse {
            line: 1,
            reason: e.to_string(),
        })?,
        None => {
            return Err(Error::Parse {
                line: 1,
                reason: "empty file".into(),
            })
        }
    };
    let models = parse_models(&header)?;
    let width = header.len();
    let mut rows = Vec::new();
    for rec in records {
        let rec = rec.map_err(|e| Error::Parse {
            line: e.position().map_or(0, |p| p.line()),
            reason: e.to_string(),
        })?;
        let line = rec.position().map_or(0, |p| p.line());
        let err = |reason: String| Error::Parse { line, reason };
        if rec.len() != width {
            return Err(err(format!("expected {width} fields, found {}", rec.len())));
        }
        let float = |i: usize| -> Result<f64> {
            rec[i]
                .trim()
                .parse::<f64>()
                .map_err(|e| err(format!("column `{}`: {e}", &header[i])))
        };
        let state = LegState {
            t: float(0)?,
            phi_h: float(1)?,
            phi_k: float(2)?,
            phi_h_dot: float(3)?,
            phi_k_dot: float(4)?,
        };
        let mut kin = kinematics(&state, params);
        kin.alpha = float(5)?;
        kin.alpha_dot = float(6)?;
        kin.l = float(7)?;
        let torques = JointTorques::new(float(8)?, float(9)?);
        let phase = rec[10]
            .trim()
            .parse::<u8>()
            .ok()
            .and_then(Phase::from_number)
            .ok_or_else(|| err(format!("phase must be 1, 2 or 3, found `{}`", &rec[10])))?;
        let contact = match rec[11].trim() {
            "0" => false,
            "1" => true,
            other => return Err(err(format!("contact must be 0 or 1, found `{other}`"))),
        };
        let mut layers = Vec::with_capacity(models.len());
        let mut col = FIXED_COLUMNS.len();
        for model in &models {
            let mut trace = LayerTrace::default();
            for _ in 0..model.m {
                trace.g.push(float(col)?);
                trace.pi.push(float(col + 1)?);
                trace.r.push(float(col + 2)?);
                col += 3;
            }
            layers.push(trace);
        }
        rows.push(TrajectoryRow {
            state,
            kin,
            torques,
            phase,
            contact,
            layers,
        });
    }
    Ok(Trajectory {
        models,
        rows,
        diverged: false,
    })
}

pub fn read_trajectory_file(path: &Path, params: &LegParams) -> Result<Trajectory> {
    read_trajectory(BufReader::new(File::open(path)?), params)
}
