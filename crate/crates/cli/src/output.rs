//! CSV and run-manifest writers.
//!
//! Each scenario produces `<scenario>.csv`, whose first line is a
//! `# schema: ...` comment followed by the header row, and
//! `<scenario>.manifest.toml` holding everything that varies between
//! otherwise identical runs (timestamp) or describes how the rows were made.

use std::fs;
use std::io::{self, Write};
use std::path::{Path, PathBuf};
use std::time::{SystemTime, UNIX_EPOCH};

use serde::Serialize;
use thiserror::Error;

use crate::config::SweepConfig;
use crate::runner::{steady_sign_changes, IdentityRecord, Records, RowKey, RunResult, SweepRecord};
use crate::scenario::OutputKind;

/// Where the steady divergence is expected.
pub const DIVERGENCE_TARGET: f64 = 0.12;

#[derive(Debug, Error)]
pub enum OutputError {
    #[error("cannot write {path}: {source}")]
    Io { path: PathBuf, source: io::Error },
    #[error("csv: {0}")]
    Csv(#[from] csv::Error),
    #[error("manifest: {0}")]
    Manifest(#[from] toml::ser::Error),
}

fn float(x: f64) -> String {
    format!("{x:.16e}")
}

fn key_fields(key: &RowKey) -> [String; 6] {
    [
        key.scenario.clone(),
        key.state_id.clone(),
        key.class.clone(),
        key.seed.map(|s| s.to_string()).unwrap_or_default(),
        float(key.t_b),
        key.t.to_string(),
    ]
}

fn sweep_fields(r: &SweepRecord) -> Vec<String> {
    let mut fields = key_fields(&r.key).to_vec();
    match &r.values {
        Some(v) => fields.extend([
            float(v.j_a),
            float(v.j_b),
            float(v.j_c),
            float(v.alpha_a),
            float(v.alpha_c),
            float(v.djb),
            v.diverged.to_string(),
            float(v.alpha_gap),
        ]),
        None => {
            fields.extend(std::iter::repeat_n(float(f64::NAN), 6));
            fields.push("false".into());
            fields.push(float(f64::NAN));
        }
    }
    fields
}

fn identity_fields(r: &IdentityRecord) -> Vec<String> {
    let mut fields = key_fields(&r.key).to_vec();
    match &r.values {
        Some(v) => fields.extend([
            float(v.lhs),
            float(v.rhs),
            float(v.residual()),
            float(v.relative()),
            v.diverged.to_string(),
        ]),
        None => {
            fields.extend(std::iter::repeat_n(float(f64::NAN), 4));
            fields.push("false".into());
        }
    }
    fields
}

pub fn write_csv<W: Write>(mut out: W, records: &Records) -> Result<(), OutputError> {
    let kind = match records {
        Records::Sweep(_) => OutputKind::Sweep,
        Records::Identity(_) => OutputKind::Identity,
    };
    writeln!(out, "# schema: {}", kind.schema()).map_err(|source| OutputError::Io {
        path: PathBuf::from("<csv>"),
        source,
    })?;
    let mut writer = csv::Writer::from_writer(out);
    writer.write_record(kind.columns())?;
    match records {
        Records::Sweep(rows) => {
            for r in rows {
                writer.write_record(sweep_fields(r))?;
            }
        }
        Records::Identity(rows) => {
            for r in rows {
                writer.write_record(identity_fields(r))?;
            }
        }
    }
    writer.flush().map_err(|source| OutputError::Io {
        path: PathBuf::from("<csv>"),
        source,
    })?;
    Ok(())
}

#[derive(Debug, Serialize)]
struct Manifest {
    run: RunSection,
    model: ModelSection,
    numerics: NumericsSection,
    grid: GridSection,
    #[serde(skip_serializing_if = "Option::is_none")]
    divergence: Option<DivergenceSection>,
    #[serde(rename = "failure", skip_serializing_if = "Vec::is_empty")]
    failures: Vec<FailureEntry>,
}

#[derive(Debug, Serialize)]
struct RunSection {
    scenario: String,
    schema: &'static str,
    csv: String,
    rows: usize,
    code_version: &'static str,
    timestamp_unix: u64,
    master_seed: u64,
    jobs: usize,
    generator: &'static str,
}

#[derive(Debug, Serialize)]
struct ModelSection {
    t_a: f64,
    t_c: f64,
    kappa: f64,
    omega_ab: f64,
    omega_bc: f64,
    omega_ca: f64,
    zero_frequency: String,
}

#[derive(Debug, Serialize)]
struct NumericsSection {
    stencil_h: f64,
    integrator: &'static str,
    dt: f64,
}

#[derive(Debug, Serialize)]
struct GridSection {
    t_b_count: usize,
    t_b_min: f64,
    t_b_max: f64,
    times: Vec<f64>,
    steady: bool,
    states: usize,
}

#[derive(Debug, Serialize)]
struct DivergenceSection {
    /// Interpolated sign changes of the steady dJ_B/dT_B in (0.05, 0.2).
    sign_changes: Vec<f64>,
    target: f64,
    #[serde(skip_serializing_if = "Option::is_none")]
    deviation: Option<f64>,
}

#[derive(Debug, Serialize)]
struct FailureEntry {
    t_b: f64,
    #[serde(skip_serializing_if = "Option::is_none")]
    state_id: Option<String>,
    message: String,
}

pub const GENERATOR: &str =
    "ChaCha20 (rand_chacha 0.9), seed_from_u64(master_seed + k), stream = class index";

fn manifest(cfg: &SweepConfig, result: &RunResult, csv_name: &str) -> Manifest {
    let divergence = match &result.records {
        Records::Sweep(rows) if cfg.steady => {
            let sign_changes = steady_sign_changes(rows, 0.05, 0.2);
            let deviation = match sign_changes.as_slice() {
                [only] => Some(only - DIVERGENCE_TARGET),
                _ => None,
            };
            Some(DivergenceSection {
                sign_changes,
                target: DIVERGENCE_TARGET,
                deviation,
            })
        }
        _ => None,
    };
    let timestamp_unix = SystemTime::now()
        .duration_since(UNIX_EPOCH)
        .map(|d| d.as_secs())
        .unwrap_or(0);
    Manifest {
        run: RunSection {
            scenario: cfg.scenario.clone(),
            schema: cfg.output.schema(),
            csv: csv_name.to_string(),
            rows: result.records.len(),
            code_version: env!("CARGO_PKG_VERSION"),
            timestamp_unix,
            master_seed: cfg.master_seed,
            jobs: cfg.jobs,
            generator: GENERATOR,
        },
        model: ModelSection {
            t_a: cfg.model.t_a,
            t_c: cfg.model.t_c,
            kappa: cfg.model.kappa,
            omega_ab: cfg.model.couplings.omega_ab,
            omega_bc: cfg.model.couplings.omega_bc,
            omega_ca: cfg.model.couplings.omega_ca,
            zero_frequency: cfg.model.zero_frequency.to_string(),
        },
        numerics: NumericsSection {
            stencil_h: cfg.stencil.h,
            integrator: "classical-rk4",
            dt: cfg.integrator.dt(),
        },
        grid: GridSection {
            t_b_count: cfg.t_b.len(),
            t_b_min: cfg.t_b.iter().cloned().fold(f64::INFINITY, f64::min),
            t_b_max: cfg.t_b.iter().cloned().fold(f64::NEG_INFINITY, f64::max),
            times: cfg.times.clone(),
            steady: cfg.steady,
            states: cfg.states.expand(cfg.master_seed).len(),
        },
        divergence,
        failures: result
            .failures
            .iter()
            .map(|f| FailureEntry {
                t_b: f.t_b,
                state_id: f.state_id.clone(),
                message: f.message.clone(),
            })
            .collect(),
    }
}

pub struct WrittenFiles {
    pub csv: PathBuf,
    pub manifest: PathBuf,
}

pub fn write_outputs(
    cfg: &SweepConfig,
    result: &RunResult,
    dir: &Path,
) -> Result<WrittenFiles, OutputError> {
    let io_err = |path: &Path| {
        let path = path.to_path_buf();
        move |source| OutputError::Io { path, source }
    };
    fs::create_dir_all(dir).map_err(io_err(dir))?;
    let csv_name = format!("{}.csv", cfg.scenario);
    let csv_path = dir.join(&csv_name);
    let file = fs::File::create(&csv_path).map_err(io_err(&csv_path))?;
    write_csv(io::BufWriter::new(file), &result.records)?;

    let manifest_path = dir.join(format!("{}.manifest.toml", cfg.scenario));
    let text = toml::to_string(&manifest(cfg, result, &csv_name))?;
    fs::write(&manifest_path, text).map_err(io_err(&manifest_path))?;
    Ok(WrittenFiles {
        csv: csv_path,
        manifest: manifest_path,
    })
}
