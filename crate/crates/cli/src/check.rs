//! Quick invariant suite behind `qtt check`.

use qtt_core::linalg::max_abs;
use qtt_core::{
    density_of, evolve, heat_currents, master_rhs, paradigm_state, sample_random, steady_state,
    DensityMatrix, IntegratorConfig, ModelTemplate, ParadigmState, Seed, StateClass,
};

#[derive(Debug, Clone, PartialEq)]
pub struct CheckOutcome {
    pub name: &'static str,
    pub passed: bool,
    pub detail: String,
}

fn physicality(template: &ModelTemplate) -> CheckOutcome {
    let mut states: Vec<(String, DensityMatrix)> = ParadigmState::ALL
        .iter()
        .map(|p| (p.to_string(), density_of(&paradigm_state(*p))))
        .collect();
    for class in StateClass::SCANNED {
        for seed in 0..2 {
            let spec = format!("{class}/{seed}");
            states.push((spec, density_of(&sample_random(class, Seed(seed)))));
        }
    }
    let cfg = IntegratorConfig::default();
    for t_b in [0.05, 0.13, 0.36] {
        let model = match template.at(t_b) {
            Ok(m) => m,
            Err(e) => return fail("physicality", e.to_string()),
        };
        for (name, rho) in &states {
            if let Err(e) = evolve(&model, rho, 10.0, &cfg, &[0.1, 0.3, 0.8, 3.0, 6.0]) {
                return fail("physicality", format!("{name} at T_B = {t_b}: {e}"));
            }
        }
    }
    pass(
        "physicality",
        format!("{} states x 3 temperatures to t = 10", states.len()),
    )
}

fn sum_rule(template: &ModelTemplate) -> CheckOutcome {
    let mut worst = 0.0_f64;
    for k in 0..10 {
        let t_b = 0.004 * 200f64.powf(k as f64 / 9.0);
        let sum = template
            .at(t_b)
            .map_err(|e| e.to_string())
            .and_then(|m| {
                let ss = steady_state(&m).map_err(|e| e.to_string())?;
                heat_currents(&m, &ss).map_err(|e| e.to_string())
            })
            .map(|j| j.sum().abs());
        match sum {
            Ok(s) => worst = worst.max(s),
            Err(e) => return fail("steady sum rule", format!("T_B = {t_b}: {e}")),
        }
    }
    verdict("steady sum rule", worst <= 1e-10, format!("max |sum J| = {worst:.3e}"))
}

fn gibbs(template: &ModelTemplate) -> CheckOutcome {
    let mut worst_rhs = 0.0_f64;
    let mut worst_state = 0.0_f64;
    for t in [0.1, 0.2, 0.5] {
        let equal = ModelTemplate {
            t_a: t,
            t_c: t,
            ..*template
        };
        let model = match equal.at(t) {
            Ok(m) => m,
            Err(e) => return fail("gibbs fixed point", e.to_string()),
        };
        let g = DensityMatrix::gibbs(model.hamiltonian(), t);
        worst_rhs = worst_rhs.max(max_abs(&master_rhs(&model, g.matrix())));
        match steady_state(&model) {
            Ok(ss) => worst_state = worst_state.max(max_abs(&(ss.matrix() - g.matrix()))),
            Err(e) => return fail("gibbs fixed point", e.to_string()),
        }
    }
    verdict(
        "gibbs fixed point",
        worst_rhs <= 1e-10 && worst_state <= 1e-8,
        format!("max |L(gibbs)| = {worst_rhs:.3e}, max |ss - gibbs| = {worst_state:.3e}"),
    )
}

fn pass(name: &'static str, detail: String) -> CheckOutcome {
    verdict(name, true, detail)
}

fn fail(name: &'static str, detail: String) -> CheckOutcome {
    verdict(name, false, detail)
}

fn verdict(name: &'static str, passed: bool, detail: String) -> CheckOutcome {
    CheckOutcome {
        name,
        passed,
        detail,
    }
}

pub fn run_checks(template: &ModelTemplate) -> Vec<CheckOutcome> {
    vec![physicality(template), sum_rule(template), gibbs(template)]
}
