//! Catalog of canned scenarios.

use std::path::PathBuf;

use qtt_core::{
    ExampleState, IntegratorConfig, ModelTemplate, ParadigmState, StateClass, StateSpec,
    StencilConfig,
};
use serde::Serialize;

use crate::config::{default_t_b_grid, default_times, StateSelection, SweepConfig};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "kebab-case")]
pub enum OutputKind {
    /// Heat currents and amplification factors.
    Sweep,
    /// Both sides of the amplification identity.
    Identity,
}

pub const SWEEP_COLUMNS: [&str; 14] = [
    "scenario", "state_id", "class", "seed", "T_B", "t", "J_A", "J_B", "J_C", "alpha_A",
    "alpha_C", "dJB_dTB", "diverged", "alpha_gap",
];

pub const IDENTITY_COLUMNS: [&str; 11] = [
    "scenario", "state_id", "class", "seed", "T_B", "t", "lhs", "rhs", "residual", "relative",
    "diverged",
];

impl OutputKind {
    pub fn schema(self) -> &'static str {
        match self {
            OutputKind::Sweep => "qtt-sweep/1",
            OutputKind::Identity => "qtt-identity/1",
        }
    }

    pub fn columns(self) -> &'static [&'static str] {
        match self {
            OutputKind::Sweep => &SWEEP_COLUMNS,
            OutputKind::Identity => &IDENTITY_COLUMNS,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct Scenario {
    pub name: &'static str,
    /// Figure family the output feeds, if any.
    pub figure: Option<&'static str>,
    pub output: OutputKind,
    pub description: &'static str,
}

pub const CATALOG: [Scenario; 12] = [
    Scenario {
        name: "steady-sweep",
        figure: None,
        output: OutputKind::Sweep,
        description: "steady-state currents and amplification vs T_B",
    },
    Scenario {
        name: "ghz-transient",
        figure: Some("F1"),
        output: OutputKind::Sweep,
        description: "GHZ initial state, alpha vs T_B at t = 0.1 .. 10 and steady",
    },
    Scenario {
        name: "w-transient",
        figure: None,
        output: OutputKind::Sweep,
        description: "W initial state, alpha vs T_B at t = 0.1 .. 10 and steady",
    },
    Scenario {
        name: "k000-transient",
        figure: None,
        output: OutputKind::Sweep,
        description: "|000> initial state, alpha vs T_B at t = 0.1 .. 10 and steady",
    },
    Scenario {
        name: "k001-transient",
        figure: Some("F2"),
        output: OutputKind::Sweep,
        description: "|001> initial state, alpha vs T_B at t = 0.1 .. 10 and steady",
    },
    Scenario {
        name: "k011-transient",
        figure: Some("F3"),
        output: OutputKind::Sweep,
        description: "|011> initial state, alpha vs T_B at t = 0.1 .. 10 and steady",
    },
    Scenario {
        name: "random-examples",
        figure: Some("F4"),
        output: OutputKind::Sweep,
        description: "one random state each from the GHZ, W, A:BC and product classes",
    },
    Scenario {
        name: "necessarily-transient",
        figure: Some("F5"),
        output: OutputKind::Sweep,
        description: "the four tabulated example states at t = 0.1 over the full T_B range",
    },
    Scenario {
        name: "time-scan",
        figure: Some("F6"),
        output: OutputKind::Sweep,
        description: "GHZ' and W' example states, alpha vs t at T_B = 0.05, 0.13, 0.26, 0.36",
    },
    Scenario {
        name: "random-scan",
        figure: Some("F7a"),
        output: OutputKind::Sweep,
        description: "350 random states (7 classes x 50) at t = 0.1, alpha_gap vs T_B",
    },
    Scenario {
        name: "gap-time-scan",
        figure: Some("F7b"),
        output: OutputKind::Sweep,
        description: "350 random states at T_B = 0.08, alpha_gap vs t",
    },
    Scenario {
        name: "identity-check",
        figure: None,
        output: OutputKind::Identity,
        description: "residual of alpha_A + alpha_C + 1 against the energy-rate derivative",
    },
];

/// Evenly spaced `(0, end]` with `count` points.
fn linear_times(end: f64, count: usize) -> Vec<f64> {
    (1..=count).map(|k| end * k as f64 / count as f64).collect()
}

impl Scenario {
    pub fn find(name: &str) -> Option<Scenario> {
        CATALOG.iter().copied().find(|s| s.name == name)
    }

    pub fn defaults(&self) -> SweepConfig {
        let paradigm = |p| StateSelection {
            named: vec![StateSpec::Paradigm(p)],
            ..StateSelection::default()
        };
        let scan = StateSelection {
            named: Vec::new(),
            random_classes: StateClass::SCANNED.to_vec(),
            random_count: 50,
        };
        let mut cfg = SweepConfig {
            scenario: self.name.to_string(),
            output: self.output,
            model: ModelTemplate::default(),
            t_b: default_t_b_grid(),
            times: default_times(),
            steady: true,
            states: StateSelection::default(),
            stencil: StencilConfig::default(),
            integrator: IntegratorConfig::default(),
            jobs: 0,
            master_seed: 0,
            out_dir: PathBuf::from("out"),
        };
        match self.name {
            "steady-sweep" => {
                cfg.times.clear();
            }
            "ghz-transient" | "identity-check" => cfg.states = paradigm(ParadigmState::Ghz),
            "w-transient" => cfg.states = paradigm(ParadigmState::W),
            "k000-transient" => cfg.states = paradigm(ParadigmState::K000),
            "k001-transient" => cfg.states = paradigm(ParadigmState::K001),
            "k011-transient" => cfg.states = paradigm(ParadigmState::K011),
            "random-examples" => {
                cfg.states = StateSelection {
                    named: [
                        StateClass::Ghz,
                        StateClass::WZ,
                        StateClass::BiseparableA,
                        StateClass::Product,
                    ]
                    .into_iter()
                    .map(|class| StateSpec::Random {
                        class,
                        seed: 0.into(),
                    })
                    .collect(),
                    ..StateSelection::default()
                };
            }
            "necessarily-transient" => {
                cfg.times = vec![0.1];
                cfg.states = StateSelection {
                    named: ExampleState::ALL.map(StateSpec::Example).to_vec(),
                    ..StateSelection::default()
                };
            }
            "time-scan" => {
                cfg.t_b = vec![0.05, 0.13, 0.26, 0.36];
                cfg.times = linear_times(10.0, 500);
                cfg.states = StateSelection {
                    named: vec![
                        StateSpec::Example(ExampleState::Ghz),
                        StateSpec::Example(ExampleState::W),
                    ],
                    ..StateSelection::default()
                };
            }
            "random-scan" => {
                cfg.times = vec![0.1];
                cfg.steady = false;
                cfg.states = scan;
            }
            "gap-time-scan" => {
                cfg.t_b = vec![0.08];
                cfg.times = linear_times(10.0, 100);
                cfg.steady = false;
                cfg.states = scan;
            }
            _ => unreachable!("catalog entry without defaults: {}", self.name),
        }
        cfg
    }
}

#[derive(Debug, Serialize)]
struct CatalogEntry {
    name: &'static str,
    figure: Option<&'static str>,
    schema: &'static str,
    columns: &'static [&'static str],
    description: &'static str,
}

#[derive(Debug, Serialize)]
struct Catalog {
    scenario: Vec<CatalogEntry>,
}

/// The catalog as TOML (`[[scenario]]` tables).
pub fn list_scenarios() -> String {
    let catalog = Catalog {
        scenario: CATALOG
            .iter()
            .map(|s| CatalogEntry {
                name: s.name,
                figure: s.figure,
                schema: s.output.schema(),
                columns: s.output.columns(),
                description: s.description,
            })
            .collect(),
    };
    toml::to_string(&catalog).expect("catalog serializes")
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn every_entry_has_valid_defaults() {
        for s in CATALOG {
            let cfg = s.defaults();
            cfg.validate().unwrap_or_else(|e| panic!("{}: {e}", s.name));
            assert_eq!(cfg.scenario, s.name);
        }
    }

    #[test]
    fn random_scan_has_350_states() {
        let cfg = Scenario::find("random-scan").unwrap().defaults();
        assert_eq!(cfg.states.expand(cfg.master_seed).len(), 350);
        assert_eq!(cfg.times, vec![0.1]);
    }

    #[test]
    fn catalog_is_machine_readable() {
        let text = list_scenarios();
        let parsed: toml::Value = toml::from_str(&text).unwrap();
        let entries = parsed["scenario"].as_array().unwrap();
        assert_eq!(entries.len(), CATALOG.len());
        let names: Vec<&str> = entries.iter().map(|e| e["name"].as_str().unwrap()).collect();
        assert!(names.contains(&"steady-sweep"));
        assert!(names.contains(&"identity-check"));
        for e in entries {
            assert!(e["columns"].as_array().unwrap().len() >= 11);
            assert!(e["schema"].as_str().unwrap().starts_with("qtt-"));
        }
    }

    #[test]
    fn sweep_columns_match_record_order() {
        assert_eq!(SWEEP_COLUMNS[0], "scenario");
        assert_eq!(SWEEP_COLUMNS[13], "alpha_gap");
    }
}
