//! Heat currents and amplification factors.
//!
//! `J_X = Tr[H 𝒟_X(ρ)]` is the energy flow from bath `X` into the system.
//! The amplification factors are `α_A = (∂J_A/∂T_B)/(∂J_B/∂T_B)` and
//! `α_C = (∂J_C/∂T_B)/(∂J_B/∂T_B)`, with derivatives from a five-point
//! central stencil in `T_B`. In the transient regime the initial state and
//! the elapsed time stay fixed while `T_B` moves.

use thiserror::Error;

use crate::dynamics::{
    evolve_with, DensityMatrix, DynamicsError, IntegratorConfig, Liouvillian, SampledPropagator,
    StationarySpace, Trajectory,
};
use crate::linalg::{from_coordinates, Matrix8, COORDS};
use crate::model::{
    dissipator, master_rhs, ModelError, ModelTemplate, QubitLabel, TransistorModel,
};

/// `|∂J_B/∂T_B|` below this marks the amplification as diverged.
pub const DIVERGENCE_THRESHOLD: f64 = 1e-12;

/// Magnitude reported for α when the denominator vanishes.
pub const DIVERGED_SENTINEL: f64 = 1e300;

/// Largest imaginary part tolerated in `Tr[H 𝒟_X(ρ)]`.
pub const IMAGINARY_TOLERANCE: f64 = 1e-10;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum ObservableError {
    #[error(transparent)]
    Model(#[from] ModelError),
    #[error(transparent)]
    Dynamics(#[from] DynamicsError),
    #[error("stencil step must be positive and finite, got {0}")]
    InvalidStep(f64),
    #[error("stencil reaches T_B - 2h = {} <= 0 (T_B = {t_b}, h = {h})", t_b - 2.0 * h)]
    StencilDomain { t_b: f64, h: f64 },
    #[error("heat current from bath {bath} has imaginary part {value:e}")]
    ImaginaryCurrent { bath: QubitLabel, value: f64 },
    #[error("amplification diverged at T_B = {t_b}: dJ_B/dT_B = {djb:e}")]
    Diverged { t_b: f64, djb: f64 },
}

#[derive(Debug, Clone, Copy, PartialEq, Default)]
pub struct HeatCurrents {
    pub j_a: f64,
    pub j_b: f64,
    pub j_c: f64,
}

impl HeatCurrents {
    pub fn get(&self, bath: QubitLabel) -> f64 {
        match bath {
            QubitLabel::A => self.j_a,
            QubitLabel::B => self.j_b,
            QubitLabel::C => self.j_c,
        }
    }

    pub fn sum(&self) -> f64 {
        self.j_a + self.j_b + self.j_c
    }
}

pub fn heat_current(
    model: &TransistorModel,
    bath: QubitLabel,
    rho: &Matrix8,
) -> Result<f64, ObservableError> {
    let value = (model.hamiltonian().matrix() * dissipator(model, bath, rho)).trace();
    if value.im.abs() > IMAGINARY_TOLERANCE {
        return Err(ObservableError::ImaginaryCurrent {
            bath,
            value: value.im,
        });
    }
    Ok(value.re)
}

pub fn heat_currents(
    model: &TransistorModel,
    rho: &DensityMatrix,
) -> Result<HeatCurrents, ObservableError> {
    let m = rho.matrix();
    Ok(HeatCurrents {
        j_a: heat_current(model, QubitLabel::A, m)?,
        j_b: heat_current(model, QubitLabel::B, m)?,
        j_c: heat_current(model, QubitLabel::C, m)?,
    })
}

/// Heat currents as real linear functionals on Hermitian coordinates.
#[derive(Debug, Clone)]
struct CurrentFunctionals {
    weights: [[f64; COORDS]; 3],
}

impl CurrentFunctionals {
    fn new(model: &TransistorModel) -> Self {
        let h = model.hamiltonian().matrix();
        let mut weights = [[0.0; COORDS]; 3];
        let mut unit = [0.0; COORDS];
        for k in 0..COORDS {
            unit[k] = 1.0;
            let basis = from_coordinates(&unit);
            unit[k] = 0.0;
            for bath in QubitLabel::ALL {
                weights[bath.slot()][k] = (h * dissipator(model, bath, &basis)).trace().re;
            }
        }
        Self { weights }
    }

    fn evaluate(&self, rho: &DensityMatrix) -> HeatCurrents {
        let x = rho.coordinates();
        let dot = |w: &[f64; COORDS]| w.iter().zip(&x).map(|(a, b)| a * b).sum::<f64>();
        HeatCurrents {
            j_a: dot(&self.weights[QubitLabel::A.slot()]),
            j_b: dot(&self.weights[QubitLabel::B.slot()]),
            j_c: dot(&self.weights[QubitLabel::C.slot()]),
        }
    }
}

/// `[f(x−2h) − 8f(x−h) + 8f(x+h) − f(x+2h)] / 12h`, exact for polynomials
/// of degree ≤ 4.
pub fn five_point_derivative<F: FnMut(f64) -> f64>(mut f: F, x: f64, h: f64) -> f64 {
    stencil_combination(
        [f(x - 2.0 * h), f(x - h), f(x + h), f(x + 2.0 * h)],
        h,
    )
}

/// Stencil applied to values at `x−2h, x−h, x+h, x+2h`.
pub fn stencil_combination(values: [f64; 4], h: f64) -> f64 {
    (values[0] - 8.0 * values[1] + 8.0 * values[2] - values[3]) / (12.0 * h)
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct StencilConfig {
    pub h: f64,
}

impl Default for StencilConfig {
    fn default() -> Self {
        Self { h: 1e-3 }
    }
}

impl StencilConfig {
    pub fn validate(&self, t_b: f64) -> Result<(), ObservableError> {
        if !(self.h.is_finite() && self.h > 0.0) {
            return Err(ObservableError::InvalidStep(self.h));
        }
        if !(t_b - 2.0 * self.h > 0.0) {
            return Err(ObservableError::StencilDomain { t_b, h: self.h });
        }
        Ok(())
    }

    /// `T_B − 2h, T_B − h, T_B + h, T_B + 2h`.
    pub fn points(&self, t_b: f64) -> [f64; 4] {
        let h = self.h;
        [t_b - 2.0 * h, t_b - h, t_b + h, t_b + 2.0 * h]
    }
}

#[derive(Debug, Clone, PartialEq)]
pub enum Regime {
    Steady,
    Transient { rho0: DensityMatrix, time: f64 },
}

#[derive(Debug, Clone, PartialEq)]
pub struct AmplificationResult {
    pub t_b: f64,
    /// `None` in the steady regime.
    pub time: Option<f64>,
    pub h: f64,
    /// Currents at the stencil centre.
    pub currents: HeatCurrents,
    pub dja: f64,
    pub djb: f64,
    pub djc: f64,
    pub alpha_a: f64,
    pub alpha_c: f64,
    pub diverged: bool,
}

impl AmplificationResult {
    fn from_stencil(
        t_b: f64,
        time: Option<f64>,
        h: f64,
        currents: HeatCurrents,
        shifted: &[HeatCurrents; 4],
    ) -> Self {
        let derivative = |bath: QubitLabel| {
            stencil_combination(std::array::from_fn(|k| shifted[k].get(bath)), h)
        };
        let dja = derivative(QubitLabel::A);
        let djb = derivative(QubitLabel::B);
        let djc = derivative(QubitLabel::C);
        let diverged = djb.abs() < DIVERGENCE_THRESHOLD;
        let ratio = |num: f64| {
            if diverged {
                let sign = if djb < 0.0 { -1.0 } else { 1.0 };
                num.signum() * sign * DIVERGED_SENTINEL
            } else {
                num / djb
            }
        };
        Self {
            t_b,
            time,
            h,
            currents,
            dja,
            djb,
            djc,
            alpha_a: ratio(dja),
            alpha_c: ratio(djc),
            diverged,
        }
    }
}

/// `||α_A| − |α_C||`.
pub fn alpha_gap(result: &AmplificationResult) -> Result<f64, ObservableError> {
    if result.diverged {
        return Err(ObservableError::Diverged {
            t_b: result.t_b,
            djb: result.djb,
        });
    }
    Ok((result.alpha_a.abs() - result.alpha_c.abs()).abs())
}

#[derive(Debug, Clone)]
struct StencilPoint {
    model: TransistorModel,
    generator: Liouvillian,
    currents: CurrentFunctionals,
}

impl StencilPoint {
    fn new(template: &ModelTemplate, t_b: f64) -> Result<Self, ObservableError> {
        let model = template.at(t_b)?;
        let generator = Liouvillian::new(&model);
        let currents = CurrentFunctionals::new(&model);
        Ok(Self {
            model,
            generator,
            currents,
        })
    }

    fn steady(&self) -> Result<DensityMatrix, ObservableError> {
        Ok(StationarySpace::new(&self.generator)?.project(&DensityMatrix::maximally_mixed())?)
    }

    fn evolved(
        &self,
        rho0: &DensityMatrix,
        time: f64,
        cfg: &IntegratorConfig,
    ) -> Result<DensityMatrix, ObservableError> {
        let traj = evolve_with(&self.generator, rho0, time, cfg, &[])?;
        Ok(traj.samples.into_iter().last().expect("end sample").rho)
    }

    fn state(
        &self,
        regime: &Regime,
        cfg: &IntegratorConfig,
    ) -> Result<DensityMatrix, ObservableError> {
        match regime {
            Regime::Steady => self.steady(),
            Regime::Transient { rho0, time } => self.evolved(rho0, *time, cfg),
        }
    }

    /// `Tr[H ρ̇]` from the full master equation.
    fn energy_rate(&self, rho: &DensityMatrix) -> f64 {
        (self.model.hamiltonian().matrix() * master_rhs(&self.model, rho.matrix()))
            .trace()
            .re
    }
}

/// The five models (centre plus four stencil points) behind one
/// amplification evaluation, with their generators prebuilt.
#[derive(Debug, Clone)]
pub struct StencilModels {
    t_b: f64,
    h: f64,
    center: StencilPoint,
    shifted: [StencilPoint; 4],
}

impl StencilModels {
    pub fn new(
        template: &ModelTemplate,
        t_b: f64,
        stencil: &StencilConfig,
    ) -> Result<Self, ObservableError> {
        stencil.validate(t_b)?;
        let center = StencilPoint::new(template, t_b)?;
        let points = stencil.points(t_b);
        let shifted = [
            StencilPoint::new(template, points[0])?,
            StencilPoint::new(template, points[1])?,
            StencilPoint::new(template, points[2])?,
            StencilPoint::new(template, points[3])?,
        ];
        Ok(Self {
            t_b,
            h: stencil.h,
            center,
            shifted,
        })
    }

    pub fn t_b(&self) -> f64 {
        self.t_b
    }

    pub fn center_model(&self) -> &TransistorModel {
        &self.center.model
    }

    pub fn evaluate(
        &self,
        regime: &Regime,
        cfg: &IntegratorConfig,
    ) -> Result<AmplificationResult, ObservableError> {
        let time = match regime {
            Regime::Steady => None,
            Regime::Transient { time, .. } => Some(*time),
        };
        let center = self.center.currents.evaluate(&self.center.state(regime, cfg)?);
        let mut shifted = [HeatCurrents::default(); 4];
        for (slot, point) in shifted.iter_mut().zip(&self.shifted) {
            *slot = point.currents.evaluate(&point.state(regime, cfg)?);
        }
        Ok(AmplificationResult::from_stencil(
            self.t_b, time, self.h, center, &shifted,
        ))
    }

    pub fn steady(&self) -> Result<AmplificationResult, ObservableError> {
        self.evaluate(&Regime::Steady, &IntegratorConfig::default())
    }

    /// Dense propagators for all five models at `times`, for evaluating many
    /// initial states.
    pub fn prepare(
        &self,
        times: &[f64],
        cfg: &IntegratorConfig,
    ) -> Result<PreparedStencil<'_>, ObservableError> {
        let center = SampledPropagator::new(&self.center.generator, cfg, times)?;
        let shifted = [
            SampledPropagator::new(&self.shifted[0].generator, cfg, times)?,
            SampledPropagator::new(&self.shifted[1].generator, cfg, times)?,
            SampledPropagator::new(&self.shifted[2].generator, cfg, times)?,
            SampledPropagator::new(&self.shifted[3].generator, cfg, times)?,
        ];
        Ok(PreparedStencil {
            models: self,
            times: times.to_vec(),
            center,
            shifted,
        })
    }

    pub fn identity_residual(
        &self,
        regime: &Regime,
        cfg: &IntegratorConfig,
    ) -> Result<IdentityResidual, ObservableError> {
        let result = self.evaluate(regime, cfg)?;
        let mut rates = [0.0; 4];
        for (slot, point) in rates.iter_mut().zip(&self.shifted) {
            *slot = point.energy_rate(&point.state(regime, cfg)?);
        }
        let lhs = result.alpha_a + result.alpha_c + 1.0;
        let rhs = stencil_combination(rates, self.h) / result.djb;
        Ok(IdentityResidual { lhs, rhs })
    }
}

/// [`StencilModels`] with propagators fixed to a list of output times.
#[derive(Debug, Clone)]
pub struct PreparedStencil<'a> {
    models: &'a StencilModels,
    times: Vec<f64>,
    center: SampledPropagator,
    shifted: [SampledPropagator; 4],
}

impl PreparedStencil<'_> {
    pub fn times(&self) -> &[f64] {
        &self.times
    }

    fn trajectories(&self, rho0: &DensityMatrix) -> Result<[Trajectory; 5], ObservableError> {
        Ok([
            self.center.propagate(rho0)?,
            self.shifted[0].propagate(rho0)?,
            self.shifted[1].propagate(rho0)?,
            self.shifted[2].propagate(rho0)?,
            self.shifted[3].propagate(rho0)?,
        ])
    }

    fn result_at(&self, trajectories: &[Trajectory; 5], t: f64) -> AmplificationResult {
        let m = self.models;
        let at = |k: usize| trajectories[k].at(t).expect("sampled at every requested time");
        let center = m.center.currents.evaluate(at(0));
        let shifted: [HeatCurrents; 4] =
            std::array::from_fn(|k| m.shifted[k].currents.evaluate(at(k + 1)));
        AmplificationResult::from_stencil(m.t_b, Some(t), m.h, center, &shifted)
    }

    /// One result per requested time (in order), all from `rho0`.
    pub fn evaluate(
        &self,
        rho0: &DensityMatrix,
    ) -> Result<Vec<AmplificationResult>, ObservableError> {
        let trajectories = self.trajectories(rho0)?;
        Ok(self
            .times
            .iter()
            .map(|&t| self.result_at(&trajectories, t))
            .collect())
    }

    /// Like [`PreparedStencil::evaluate`], with the identity residual at
    /// each time.
    pub fn evaluate_with_identity(
        &self,
        rho0: &DensityMatrix,
    ) -> Result<Vec<(AmplificationResult, IdentityResidual)>, ObservableError> {
        let trajectories = self.trajectories(rho0)?;
        let m = self.models;
        Ok(self
            .times
            .iter()
            .map(|&t| {
                let result = self.result_at(&trajectories, t);
                let rates: [f64; 4] = std::array::from_fn(|k| {
                    let rho = trajectories[k + 1].at(t).expect("sampled");
                    m.shifted[k].energy_rate(rho)
                });
                let residual = IdentityResidual {
                    lhs: result.alpha_a + result.alpha_c + 1.0,
                    rhs: stencil_combination(rates, m.h) / result.djb,
                };
                (result, residual)
            })
            .collect())
    }
}

pub fn amplification(
    template: &ModelTemplate,
    t_b: f64,
    regime: &Regime,
    stencil: &StencilConfig,
    integrator: &IntegratorConfig,
) -> Result<AmplificationResult, ObservableError> {
    StencilModels::new(template, t_b, stencil)?.evaluate(regime, integrator)
}

/// Both sides of `α_A + α_C + 1 = (∂/∂T_B Tr[H ρ̇]) / (∂J_B/∂T_B)`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct IdentityResidual {
    pub lhs: f64,
    pub rhs: f64,
}

impl IdentityResidual {
    pub fn absolute(&self) -> f64 {
        (self.lhs - self.rhs).abs()
    }

    pub fn relative(&self) -> f64 {
        let scale = self.lhs.abs().max(self.rhs.abs());
        if scale == 0.0 {
            0.0
        } else {
            self.absolute() / scale
        }
    }
}

pub fn transient_identity_residual(
    template: &ModelTemplate,
    t_b: f64,
    regime: &Regime,
    stencil: &StencilConfig,
    integrator: &IntegratorConfig,
) -> Result<IdentityResidual, ObservableError> {
    StencilModels::new(template, t_b, stencil)?.identity_residual(regime, integrator)
}

/// Steady-state `∂J_B/∂T_B` at `t_b`.
pub fn steady_djb(
    template: &ModelTemplate,
    t_b: f64,
    stencil: &StencilConfig,
) -> Result<f64, ObservableError> {
    Ok(StencilModels::new(template, t_b, stencil)?.steady()?.djb)
}

/// Sign changes of the steady `∂J_B/∂T_B` in `[lo, hi]`, found on a uniform
/// grid of `samples` points and refined by bisection.
pub fn locate_denominator_zeros(
    template: &ModelTemplate,
    lo: f64,
    hi: f64,
    samples: usize,
    stencil: &StencilConfig,
) -> Result<Vec<f64>, ObservableError> {
    let samples = samples.max(2);
    let grid: Vec<f64> = (0..samples)
        .map(|k| lo + (hi - lo) * k as f64 / (samples - 1) as f64)
        .collect();
    let values = grid
        .iter()
        .map(|&t| steady_djb(template, t, stencil))
        .collect::<Result<Vec<_>, _>>()?;
    let mut zeros = Vec::new();
    for k in 0..samples - 1 {
        let (mut a, mut b) = (grid[k], grid[k + 1]);
        let (mut fa, fb) = (values[k], values[k + 1]);
        if fa == 0.0 {
            zeros.push(a);
            continue;
        }
        if fa.signum() == fb.signum() || fb == 0.0 {
            continue;
        }
        while b - a > 1e-10 {
            let mid = 0.5 * (a + b);
            let fm = steady_djb(template, mid, stencil)?;
            if fm == 0.0 {
                a = mid;
                b = mid;
                break;
            }
            if fm.signum() == fa.signum() {
                a = mid;
                fa = fm;
            } else {
                b = mid;
            }
        }
        zeros.push(0.5 * (a + b));
    }
    if values[samples - 1] == 0.0 {
        zeros.push(grid[samples - 1]);
    }
    Ok(zeros)
}
