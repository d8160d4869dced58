//! Executes a sweep over `(initial state × T_B × t)`.
//!
//! Each `T_B` is one work item: the five stencil models are built once and
//! shared by every initial state and output time at that temperature. Work
//! items run on a bounded rayon pool; rows are sorted afterwards, so the
//! output does not depend on scheduling.

use std::cmp::Ordering;
use std::fmt;

use qtt_core::{
    alpha_gap, AmplificationResult, DensityMatrix, IdentityResidual, ObservableError, Regime,
    StateSpec, StencilModels,
};
use rayon::prelude::*;
use thiserror::Error;

use crate::config::SweepConfig;
use crate::scenario::OutputKind;

#[derive(Debug, Clone, Copy, PartialEq)]
pub enum TimePoint {
    At(f64),
    Steady,
}

impl TimePoint {
    fn cmp_key(&self, other: &Self) -> Ordering {
        match (self, other) {
            (TimePoint::At(a), TimePoint::At(b)) => a.total_cmp(b),
            (TimePoint::At(_), TimePoint::Steady) => Ordering::Less,
            (TimePoint::Steady, TimePoint::At(_)) => Ordering::Greater,
            (TimePoint::Steady, TimePoint::Steady) => Ordering::Equal,
        }
    }
}

impl fmt::Display for TimePoint {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            TimePoint::At(t) => write!(f, "{t:.16e}"),
            TimePoint::Steady => f.write_str("steady"),
        }
    }
}

/// Identifying columns shared by every output schema.
#[derive(Debug, Clone, PartialEq)]
pub struct RowKey {
    pub scenario: String,
    pub state_id: String,
    pub class: String,
    pub seed: Option<u64>,
    pub t_b: f64,
    pub t: TimePoint,
}

impl RowKey {
    fn sort_cmp(&self, other: &Self) -> Ordering {
        self.state_id
            .cmp(&other.state_id)
            .then_with(|| self.t.cmp_key(&other.t))
            .then_with(|| self.t_b.total_cmp(&other.t_b))
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SweepValues {
    pub j_a: f64,
    pub j_b: f64,
    pub j_c: f64,
    pub alpha_a: f64,
    pub alpha_c: f64,
    pub djb: f64,
    pub diverged: bool,
    /// NaN when diverged.
    pub alpha_gap: f64,
}

impl From<&AmplificationResult> for SweepValues {
    fn from(r: &AmplificationResult) -> Self {
        Self {
            j_a: r.currents.j_a,
            j_b: r.currents.j_b,
            j_c: r.currents.j_c,
            alpha_a: r.alpha_a,
            alpha_c: r.alpha_c,
            djb: r.djb,
            diverged: r.diverged,
            alpha_gap: alpha_gap(r).unwrap_or(f64::NAN),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct IdentityValues {
    pub lhs: f64,
    pub rhs: f64,
    pub diverged: bool,
}

impl IdentityValues {
    fn new(result: &AmplificationResult, residual: &IdentityResidual) -> Self {
        Self {
            lhs: residual.lhs,
            rhs: residual.rhs,
            diverged: result.diverged,
        }
    }

    pub fn residual(&self) -> f64 {
        IdentityResidual {
            lhs: self.lhs,
            rhs: self.rhs,
        }
        .absolute()
    }

    pub fn relative(&self) -> f64 {
        IdentityResidual {
            lhs: self.lhs,
            rhs: self.rhs,
        }
        .relative()
    }
}

/// One output row; `values` is `None` when the point failed.
#[derive(Debug, Clone, PartialEq)]
pub struct Record<V> {
    pub key: RowKey,
    pub values: Option<V>,
}

pub type SweepRecord = Record<SweepValues>;
pub type IdentityRecord = Record<IdentityValues>;

#[derive(Debug, Clone, PartialEq)]
pub struct Failure {
    pub t_b: f64,
    pub state_id: Option<String>,
    pub message: String,
}

#[derive(Debug, Clone, PartialEq)]
pub enum Records {
    Sweep(Vec<SweepRecord>),
    Identity(Vec<IdentityRecord>),
}

impl Records {
    pub fn len(&self) -> usize {
        match self {
            Records::Sweep(r) => r.len(),
            Records::Identity(r) => r.len(),
        }
    }

    pub fn is_empty(&self) -> bool {
        self.len() == 0
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct RunResult {
    pub records: Records,
    pub failures: Vec<Failure>,
}

#[derive(Debug, Error)]
pub enum RunError {
    #[error("cannot start worker pool: {0}")]
    Pool(#[from] rayon::ThreadPoolBuildError),
}

/// How one schema evaluates a prepared stencil.
trait Kind: Sync {
    type Values: Send + Clone;

    fn steady(models: &StencilModels) -> Result<Self::Values, ObservableError>;

    fn transient(
        models: &StencilModels,
        cfg: &SweepConfig,
        rho0: &[(StateSpec, DensityMatrix)],
    ) -> Result<Vec<Result<Vec<Self::Values>, ObservableError>>, ObservableError>;
}

struct SweepKind;

impl Kind for SweepKind {
    type Values = SweepValues;

    fn steady(models: &StencilModels) -> Result<SweepValues, ObservableError> {
        Ok(SweepValues::from(&models.steady()?))
    }

    fn transient(
        models: &StencilModels,
        cfg: &SweepConfig,
        states: &[(StateSpec, DensityMatrix)],
    ) -> Result<Vec<Result<Vec<SweepValues>, ObservableError>>, ObservableError> {
        let prepared = models.prepare(&cfg.times, &cfg.integrator)?;
        Ok(states
            .iter()
            .map(|(_, rho)| {
                prepared
                    .evaluate(rho)
                    .map(|rs| rs.iter().map(SweepValues::from).collect())
            })
            .collect())
    }
}

struct IdentityKind;

impl Kind for IdentityKind {
    type Values = IdentityValues;

    fn steady(models: &StencilModels) -> Result<IdentityValues, ObservableError> {
        let result = models.steady()?;
        let residual = models.identity_residual(&Regime::Steady, &Default::default())?;
        Ok(IdentityValues::new(&result, &residual))
    }

    fn transient(
        models: &StencilModels,
        cfg: &SweepConfig,
        states: &[(StateSpec, DensityMatrix)],
    ) -> Result<Vec<Result<Vec<IdentityValues>, ObservableError>>, ObservableError> {
        let prepared = models.prepare(&cfg.times, &cfg.integrator)?;
        Ok(states
            .iter()
            .map(|(_, rho)| {
                prepared.evaluate_with_identity(rho).map(|rs| {
                    rs.iter()
                        .map(|(r, residual)| IdentityValues::new(r, residual))
                        .collect()
                })
            })
            .collect())
    }
}

fn key(cfg: &SweepConfig, spec: Option<&StateSpec>, t_b: f64, t: TimePoint) -> RowKey {
    RowKey {
        scenario: cfg.scenario.clone(),
        state_id: spec.map_or_else(|| "steady".to_string(), StateSpec::id),
        class: spec.map_or("steady", StateSpec::class_name).to_string(),
        seed: spec.and_then(StateSpec::seed).map(|s| s.0),
        t_b,
        t,
    }
}

fn run_point<K: Kind>(
    cfg: &SweepConfig,
    states: &[(StateSpec, DensityMatrix)],
    t_b: f64,
) -> (Vec<Record<K::Values>>, Vec<Failure>) {
    let mut rows = Vec::new();
    let mut failures = Vec::new();
    // steady rows are state independent; without states emit a single one
    let steady_specs: Vec<Option<&StateSpec>> = if states.is_empty() {
        vec![None]
    } else {
        states.iter().map(|(s, _)| Some(s)).collect()
    };

    let fail_all = |rows: &mut Vec<Record<K::Values>>, failures: &mut Vec<Failure>, e: String| {
        failures.push(Failure {
            t_b,
            state_id: None,
            message: e,
        });
        if cfg.steady {
            for spec in &steady_specs {
                rows.push(Record {
                    key: key(cfg, *spec, t_b, TimePoint::Steady),
                    values: None,
                });
            }
        }
        for (spec, _) in states {
            for &t in &cfg.times {
                rows.push(Record {
                    key: key(cfg, Some(spec), t_b, TimePoint::At(t)),
                    values: None,
                });
            }
        }
    };

    let models = match StencilModels::new(&cfg.model, t_b, &cfg.stencil) {
        Ok(m) => m,
        Err(e) => {
            fail_all(&mut rows, &mut failures, e.to_string());
            return (rows, failures);
        }
    };

    if cfg.steady {
        let steady = match K::steady(&models) {
            Ok(v) => Some(v),
            Err(e) => {
                failures.push(Failure {
                    t_b,
                    state_id: Some("steady".into()),
                    message: e.to_string(),
                });
                None
            }
        };
        for spec in &steady_specs {
            rows.push(Record {
                key: key(cfg, *spec, t_b, TimePoint::Steady),
                values: steady.clone(),
            });
        }
    }

    if !cfg.times.is_empty() && !states.is_empty() {
        match K::transient(&models, cfg, states) {
            Ok(per_state) => {
                for ((spec, _), outcome) in states.iter().zip(per_state) {
                    match outcome {
                        Ok(values) => {
                            for (&t, v) in cfg.times.iter().zip(values) {
                                rows.push(Record {
                                    key: key(cfg, Some(spec), t_b, TimePoint::At(t)),
                                    values: Some(v),
                                });
                            }
                        }
                        Err(e) => {
                            failures.push(Failure {
                                t_b,
                                state_id: Some(spec.id()),
                                message: e.to_string(),
                            });
                            for &t in &cfg.times {
                                rows.push(Record {
                                    key: key(cfg, Some(spec), t_b, TimePoint::At(t)),
                                    values: None,
                                });
                            }
                        }
                    }
                }
            }
            Err(e) => {
                failures.push(Failure {
                    t_b,
                    state_id: None,
                    message: e.to_string(),
                });
                for (spec, _) in states {
                    for &t in &cfg.times {
                        rows.push(Record {
                            key: key(cfg, Some(spec), t_b, TimePoint::At(t)),
                            values: None,
                        });
                    }
                }
            }
        }
    }
    (rows, failures)
}

fn run_kind<K: Kind>(
    cfg: &SweepConfig,
) -> Result<(Vec<Record<K::Values>>, Vec<Failure>), RunError> {
    let states: Vec<(StateSpec, DensityMatrix)> = cfg
        .states
        .expand(cfg.master_seed)
        .into_iter()
        .map(|spec| {
            let rho = spec.density();
            (spec, rho)
        })
        .collect();
    let pool = rayon::ThreadPoolBuilder::new()
        .num_threads(cfg.jobs)
        .build()?;
    let per_point: Vec<_> = pool.install(|| {
        cfg.t_b
            .par_iter()
            .map(|&t_b| run_point::<K>(cfg, &states, t_b))
            .collect()
    });
    let mut rows = Vec::new();
    let mut failures = Vec::new();
    for (r, f) in per_point {
        rows.extend(r);
        failures.extend(f);
    }
    rows.sort_by(|a, b| a.key.sort_cmp(&b.key));
    failures.sort_by(|a, b| {
        a.t_b
            .total_cmp(&b.t_b)
            .then_with(|| a.state_id.cmp(&b.state_id))
    });
    Ok((rows, failures))
}

pub fn run(cfg: &SweepConfig) -> Result<RunResult, RunError> {
    Ok(match cfg.output {
        OutputKind::Sweep => {
            let (rows, failures) = run_kind::<SweepKind>(cfg)?;
            RunResult {
                records: Records::Sweep(rows),
                failures,
            }
        }
        OutputKind::Identity => {
            let (rows, failures) = run_kind::<IdentityKind>(cfg)?;
            RunResult {
                records: Records::Identity(rows),
                failures,
            }
        }
    })
}

/// Sign changes of the steady `∂J_B/∂T_B` between adjacent grid points in
/// `(lo, hi)`, linearly interpolated.
pub fn steady_sign_changes(rows: &[SweepRecord], lo: f64, hi: f64) -> Vec<f64> {
    let first_state = match rows.iter().find(|r| r.key.t == TimePoint::Steady) {
        Some(r) => r.key.state_id.clone(),
        None => return Vec::new(),
    };
    let mut points: Vec<(f64, f64)> = rows
        .iter()
        .filter(|r| r.key.t == TimePoint::Steady && r.key.state_id == first_state)
        .filter(|r| r.key.t_b > lo && r.key.t_b < hi)
        .filter_map(|r| r.values.map(|v| (r.key.t_b, v.djb)))
        .collect();
    points.sort_by(|a, b| a.0.total_cmp(&b.0));
    points
        .windows(2)
        .filter(|w| w[0].1.signum() != w[1].1.signum())
        .map(|w| {
            let ((x0, y0), (x1, y1)) = (w[0], w[1]);
            x0 - y0 * (x1 - x0) / (y1 - y0)
        })
        .collect()
}
