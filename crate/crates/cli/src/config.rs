//! Sweep configuration: scenario defaults plus overrides from a TOML file
//! and the command line.

use std::fs;
use std::path::{Path, PathBuf};

use qtt_core::{
    CouplingConfig, IntegratorConfig, ModelTemplate, StateClass, StateSpec, StencilConfig,
    ZeroFrequencyChannel,
};
use serde::Deserialize;
use thiserror::Error;

use crate::scenario::{OutputKind, Scenario};

#[derive(Debug, Error)]
pub enum ConfigError {
    #[error("cannot read config {path}: {source}")]
    Io {
        path: PathBuf,
        source: std::io::Error,
    },
    #[error("invalid config {path}: {source}")]
    Parse {
        path: PathBuf,
        source: toml::de::Error,
    },
    #[error("unknown scenario {0:?}; `qtt list` shows the catalog")]
    UnknownScenario(String),
    #[error("temperature {name} must be positive and finite, got {value}")]
    Temperature { name: &'static str, value: f64 },
    #[error("kappa must be positive and finite, got {0}")]
    Kappa(f64),
    #[error("couplings must be finite")]
    Couplings,
    #[error("{0} grid is empty")]
    EmptyGrid(&'static str),
    #[error("smallest T_B = {t_b} must exceed 2h = {}", 2.0 * h)]
    StencilDomain { t_b: f64, h: f64 },
    #[error("stencil step h must be positive and finite, got {0}")]
    StencilStep(f64),
    #[error("integrator step must lie in (0, 0.01], got {0}")]
    IntegratorStep(f64),
    #[error("times must be finite and non-negative, got {0}")]
    Time(f64),
    #[error("unknown state {0:?}")]
    State(String),
    #[error("unknown zero-frequency policy {0:?}")]
    ZeroFrequency(String),
}

/// Which initial states a sweep runs over.
#[derive(Debug, Clone, PartialEq, Default)]
pub struct StateSelection {
    pub named: Vec<StateSpec>,
    pub random_classes: Vec<StateClass>,
    /// Samples per class; sample `k` uses seed `master_seed + k`.
    pub random_count: u64,
}

impl StateSelection {
    pub fn expand(&self, master_seed: u64) -> Vec<StateSpec> {
        let mut specs = self.named.clone();
        for &class in &self.random_classes {
            for k in 0..self.random_count {
                specs.push(StateSpec::Random {
                    class,
                    seed: master_seed.wrapping_add(k).into(),
                });
            }
        }
        specs
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct SweepConfig {
    pub scenario: String,
    pub output: OutputKind,
    pub model: ModelTemplate,
    pub t_b: Vec<f64>,
    pub times: Vec<f64>,
    /// Also emit steady-state rows (`t = steady`).
    pub steady: bool,
    pub states: StateSelection,
    pub stencil: StencilConfig,
    pub integrator: IntegratorConfig,
    /// Worker threads; 0 uses every available core.
    pub jobs: usize,
    pub master_seed: u64,
    pub out_dir: PathBuf,
}

/// Default `T_B` grid: 150 log-spaced points on `[0.004, 0.8]` plus 50
/// evenly spaced points inside `(0.10, 0.16)` around the steady divergence.
pub fn default_t_b_grid() -> Vec<f64> {
    let (lo, hi) = (0.004_f64, 0.8_f64);
    let mut grid: Vec<f64> = (0..150)
        .map(|k| lo * (hi / lo).powf(k as f64 / 149.0))
        .collect();
    grid.extend((1..=50).map(|k| 0.10 + 0.06 * k as f64 / 51.0));
    normalize_grid(grid)
}

pub fn default_times() -> Vec<f64> {
    vec![0.1, 0.3, 0.8, 3.0, 6.0, 10.0]
}

/// Sorted, with near-duplicates removed.
pub fn normalize_grid(mut grid: Vec<f64>) -> Vec<f64> {
    grid.sort_by(f64::total_cmp);
    grid.dedup_by(|a, b| (*a - *b).abs() <= 1e-12 * b.abs().max(1.0));
    grid
}

impl SweepConfig {
    pub fn validate(&self) -> Result<(), ConfigError> {
        for (name, value) in [("T_A", self.model.t_a), ("T_C", self.model.t_c)] {
            if !(value.is_finite() && value > 0.0) {
                return Err(ConfigError::Temperature { name, value });
            }
        }
        if !(self.model.kappa.is_finite() && self.model.kappa > 0.0) {
            return Err(ConfigError::Kappa(self.model.kappa));
        }
        if !self.model.couplings.is_finite() {
            return Err(ConfigError::Couplings);
        }
        if self.t_b.is_empty() {
            return Err(ConfigError::EmptyGrid("T_B"));
        }
        for &value in &self.t_b {
            if !(value.is_finite() && value > 0.0) {
                return Err(ConfigError::Temperature { name: "T_B", value });
            }
        }
        let h = self.stencil.h;
        if !(h.is_finite() && h > 0.0) {
            return Err(ConfigError::StencilStep(h));
        }
        let min = self.t_b.iter().cloned().fold(f64::INFINITY, f64::min);
        if min <= 2.0 * h {
            return Err(ConfigError::StencilDomain { t_b: min, h });
        }
        if self.times.is_empty() && !self.steady {
            return Err(ConfigError::EmptyGrid("time"));
        }
        for &t in &self.times {
            if !(t.is_finite() && t >= 0.0) {
                return Err(ConfigError::Time(t));
            }
        }
        if self.states.expand(self.master_seed).is_empty() && !self.times.is_empty() {
            return Err(ConfigError::EmptyGrid("initial-state"));
        }
        Ok(())
    }
}

/// Overrides read from a TOML file. Every key is optional.
#[derive(Debug, Clone, Default, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ConfigFile {
    pub seed: Option<u64>,
    pub jobs: Option<usize>,
    pub out: Option<PathBuf>,
    #[serde(default)]
    pub model: ModelSection,
    #[serde(default)]
    pub grid: GridSection,
    #[serde(default)]
    pub states: StatesSection,
    #[serde(default)]
    pub numerics: NumericsSection,
}

#[derive(Debug, Clone, Default, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ModelSection {
    pub t_a: Option<f64>,
    pub t_c: Option<f64>,
    pub kappa: Option<f64>,
    /// `[ω_AB, ω_BC, ω_CA]`
    pub couplings: Option<[f64; 3]>,
    pub zero_frequency: Option<String>,
}

#[derive(Debug, Clone, Default, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct GridSection {
    pub t_b: Option<Vec<f64>>,
    pub times: Option<Vec<f64>>,
    pub steady: Option<bool>,
}

#[derive(Debug, Clone, Default, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct StatesSection {
    pub named: Option<Vec<String>>,
    pub random_classes: Option<Vec<String>>,
    pub random_count: Option<u64>,
}

#[derive(Debug, Clone, Default, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct NumericsSection {
    pub h: Option<f64>,
    pub dt: Option<f64>,
}

impl ConfigFile {
    pub fn load(path: &Path) -> Result<Self, ConfigError> {
        let text = fs::read_to_string(path).map_err(|source| ConfigError::Io {
            path: path.to_path_buf(),
            source,
        })?;
        toml::from_str(&text).map_err(|source| ConfigError::Parse {
            path: path.to_path_buf(),
            source,
        })
    }

    pub fn apply(&self, cfg: &mut SweepConfig) -> Result<(), ConfigError> {
        if let Some(seed) = self.seed {
            cfg.master_seed = seed;
        }
        if let Some(jobs) = self.jobs {
            cfg.jobs = jobs;
        }
        if let Some(out) = &self.out {
            cfg.out_dir = out.clone();
        }

        let m = &self.model;
        if let Some(v) = m.t_a {
            cfg.model.t_a = v;
        }
        if let Some(v) = m.t_c {
            cfg.model.t_c = v;
        }
        if let Some(v) = m.kappa {
            cfg.model.kappa = v;
        }
        if let Some([ab, bc, ca]) = m.couplings {
            cfg.model.couplings = CouplingConfig::new(ab, bc, ca);
        }
        if let Some(policy) = &m.zero_frequency {
            cfg.model.zero_frequency = policy
                .parse::<ZeroFrequencyChannel>()
                .map_err(|_| ConfigError::ZeroFrequency(policy.clone()))?;
        }

        if let Some(t_b) = &self.grid.t_b {
            cfg.t_b = normalize_grid(t_b.clone());
        }
        if let Some(times) = &self.grid.times {
            cfg.times = normalize_grid(times.clone());
        }
        if let Some(steady) = self.grid.steady {
            cfg.steady = steady;
        }

        if let Some(named) = &self.states.named {
            cfg.states.named = named
                .iter()
                .map(|s| s.parse().map_err(|_| ConfigError::State(s.clone())))
                .collect::<Result<_, _>>()?;
        }
        if let Some(classes) = &self.states.random_classes {
            cfg.states.random_classes = classes
                .iter()
                .map(|s| s.parse().map_err(|_| ConfigError::State(s.clone())))
                .collect::<Result<_, _>>()?;
        }
        if let Some(count) = self.states.random_count {
            cfg.states.random_count = count;
        }

        if let Some(h) = self.numerics.h {
            cfg.stencil = StencilConfig { h };
        }
        if let Some(dt) = self.numerics.dt {
            cfg.integrator =
                IntegratorConfig::new(dt).map_err(|_| ConfigError::IntegratorStep(dt))?;
        }
        Ok(())
    }
}

/// Command-line overrides, applied after the config file.
#[derive(Debug, Clone, Default)]
pub struct Overrides {
    pub config: Option<PathBuf>,
    pub seed: Option<u64>,
    pub out: Option<PathBuf>,
    pub jobs: Option<usize>,
}

pub fn resolve(scenario: &str, overrides: &Overrides) -> Result<SweepConfig, ConfigError> {
    let scenario =
        Scenario::find(scenario).ok_or_else(|| ConfigError::UnknownScenario(scenario.into()))?;
    let mut cfg = scenario.defaults();
    if let Some(path) = &overrides.config {
        ConfigFile::load(path)?.apply(&mut cfg)?;
    }
    if let Some(seed) = overrides.seed {
        cfg.master_seed = seed;
    }
    if let Some(out) = &overrides.out {
        cfg.out_dir = out.clone();
    }
    if let Some(jobs) = overrides.jobs {
        cfg.jobs = jobs;
    }
    cfg.validate()?;
    Ok(cfg)
}

#[cfg(test)]
mod tests {
    use super::*;
    use qtt_core::{ParadigmState, Seed};

    #[test]
    fn default_grid_shape() {
        let grid = default_t_b_grid();
        assert_eq!(grid.len(), 200);
        assert!((grid[0] - 0.004).abs() < 1e-15);
        assert!((grid[199] - 0.8).abs() < 1e-12);
        assert!(grid.windows(2).all(|w| w[0] < w[1]));
        let dense = grid.iter().filter(|t| **t > 0.10 && **t < 0.16).count();
        assert!(dense >= 50);
    }

    #[test]
    fn file_overrides_defaults() {
        let text = r#"
            seed = 9
            [model]
            t_a = 0.3
            couplings = [1.0, 0.5, 0.0]
            zero_frequency = "drop"
            [grid]
            t_b = [0.2, 0.1]
            times = [0.5]
            [states]
            named = ["w", "ghz-prime"]
            random_classes = ["product"]
            random_count = 2
            [numerics]
            h = 0.002
        "#;
        let file: ConfigFile = toml::from_str(text).unwrap();
        let mut cfg = Scenario::find("ghz-transient").unwrap().defaults();
        file.apply(&mut cfg).unwrap();
        cfg.validate().unwrap();
        assert_eq!(cfg.master_seed, 9);
        assert_eq!(cfg.model.t_a, 0.3);
        assert_eq!(cfg.model.couplings.omega_bc, 0.5);
        assert_eq!(cfg.model.zero_frequency, ZeroFrequencyChannel::Drop);
        assert_eq!(cfg.t_b, vec![0.1, 0.2]);
        assert_eq!(cfg.stencil.h, 0.002);
        let specs = cfg.states.expand(cfg.master_seed);
        assert_eq!(specs.len(), 4);
        assert_eq!(specs[0], StateSpec::Paradigm(ParadigmState::W));
        assert_eq!(
            specs[3],
            StateSpec::Random {
                class: StateClass::Product,
                seed: Seed(10)
            }
        );
    }

    #[test]
    fn unknown_keys_are_rejected() {
        assert!(toml::from_str::<ConfigFile>("[grid]\ntb = [0.1]").is_err());
    }

    #[test]
    fn validation_catches_bad_values() {
        let base = Scenario::find("ghz-transient").unwrap().defaults();

        let mut cfg = base.clone();
        cfg.t_b = vec![0.0015, 0.1];
        assert!(matches!(
            cfg.validate(),
            Err(ConfigError::StencilDomain { .. })
        ));

        let mut cfg = base.clone();
        cfg.model.t_c = -0.1;
        assert!(matches!(cfg.validate(), Err(ConfigError::Temperature { .. })));

        let mut cfg = base.clone();
        cfg.t_b.clear();
        assert!(matches!(cfg.validate(), Err(ConfigError::EmptyGrid(_))));

        let mut cfg = base;
        cfg.times = vec![-1.0];
        assert!(matches!(cfg.validate(), Err(ConfigError::Time(_))));
    }

    #[test]
    fn bad_states_and_steps_in_file() {
        let mut cfg = Scenario::find("ghz-transient").unwrap().defaults();
        let file: ConfigFile = toml::from_str("[states]\nnamed = [\"nope\"]").unwrap();
        assert!(matches!(file.apply(&mut cfg), Err(ConfigError::State(_))));
        let file: ConfigFile = toml::from_str("[numerics]\ndt = 0.5").unwrap();
        assert!(matches!(
            file.apply(&mut cfg),
            Err(ConfigError::IntegratorStep(_))
        ));
    }

    #[test]
    fn unknown_scenario() {
        assert!(matches!(
            resolve("nope", &Overrides::default()),
            Err(ConfigError::UnknownScenario(_))
        ));
    }
}
