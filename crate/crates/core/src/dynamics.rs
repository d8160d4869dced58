//! Time evolution under the master equation and stationary states.
//!
//! The generator is assembled once per model as a real 64×64 matrix acting
//! on Hermitian coordinates (see [`crate::linalg`]), by applying
//! [`master_rhs`] to each coordinate basis element. Integration is classical
//! fixed-step fourth-order Runge–Kutta. Two routes share the same step plan:
//!
//! * [`evolve`] steps one state at a time with the sparse generator;
//! * [`SampledPropagator`] multiplies out the RK4 one-step map into dense
//!   per-segment matrices, which pays off when many initial states share a
//!   model (sweeps over random states).
//!
//! Stationary states come from the null space of the generator. The model
//! conserves the global parity `σx⊗σx⊗σx`, so that null space is
//! two-dimensional; a state is selected by projecting a reference state
//! along the conserved quantities (left null vectors).

use std::collections::HashMap;
use std::fmt;

use nalgebra::{DMatrix, DVector};
use thiserror::Error;

use crate::linalg::{
    from_coordinates, hermiticity_defect, hermitian_eigenvalues, to_coordinates, trace_distance,
    Matrix8, C64, COORDS, DIM,
};
use crate::model::{master_rhs, Hamiltonian, TransistorModel};

/// Largest step accepted by [`IntegratorConfig::new`]. With the default
/// rates (the stiffest is `𝒥(2)(1+n) ≈ 2`) this keeps ≥ 50 steps per
/// relaxation time.
pub const MAX_STEP: f64 = 0.01;

/// Singular values at or below this bound span the stationary space.
pub const NULL_TOLERANCE: f64 = 1e-10;

/// The first singular value above the stationary space must reach this.
pub const GAP_TOLERANCE: f64 = 1e-6;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Violation {
    Trace,
    Hermiticity,
    Positivity,
}

impl fmt::Display for Violation {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Violation::Trace => "trace conservation",
            Violation::Hermiticity => "hermiticity",
            Violation::Positivity => "positivity",
        })
    }
}

#[derive(Debug, Clone, PartialEq, Error)]
pub enum DynamicsError {
    #[error("not a density matrix: {kind} defect {value:e}")]
    InvalidState { kind: Violation, value: f64 },
    #[error("{kind} violated at t = {time}: defect {value:e}; the step size is probably too large")]
    InvariantViolation {
        time: f64,
        kind: Violation,
        value: f64,
    },
    #[error("integrator step must lie in (0, {MAX_STEP}], got {0}")]
    InvalidStep(f64),
    #[error("end time must be finite and >= 0, got {0}")]
    InvalidEndTime(f64),
    #[error("sample times must be strictly increasing within [0, {t_end}]")]
    InvalidSampleTimes { t_end: f64 },
    #[error("no stationary state: smallest singular value {0:e} exceeds {NULL_TOLERANCE:e}")]
    NoStationaryState(f64),
    #[error(
        "stationary space of dimension {nullity} is not separated from the rest of the spectrum \
         (next singular value {next:e} < {GAP_TOLERANCE:e})"
    )]
    IllConditionedNullSpace { nullity: usize, next: f64 },
    #[error("reference state has no well-defined projection onto the stationary space")]
    SingularProjection,
}

/// Tolerances that every sampled state of a trajectory must meet.
const TRAJECTORY_TRACE_TOL: f64 = 1e-8;
const TRAJECTORY_HERMITICITY_TOL: f64 = 1e-10;
const TRAJECTORY_POSITIVITY_TOL: f64 = 1e-8;

/// 8×8 Hermitian, unit-trace, positive semidefinite matrix.
#[derive(Debug, Clone, PartialEq)]
pub struct DensityMatrix(Matrix8);

impl DensityMatrix {
    pub const HERMITICITY_TOL: f64 = 1e-10;
    pub const TRACE_TOL: f64 = 1e-10;
    pub const POSITIVITY_TOL: f64 = 1e-8;

    pub fn new(m: Matrix8) -> Result<Self, DynamicsError> {
        let herm = hermiticity_defect(&m);
        if herm > Self::HERMITICITY_TOL {
            return Err(DynamicsError::InvalidState {
                kind: Violation::Hermiticity,
                value: herm,
            });
        }
        let tr = (m.trace() - C64::new(1.0, 0.0)).norm();
        if tr > Self::TRACE_TOL {
            return Err(DynamicsError::InvalidState {
                kind: Violation::Trace,
                value: tr,
            });
        }
        let min = hermitian_eigenvalues(&m)[0];
        if min < -Self::POSITIVITY_TOL {
            return Err(DynamicsError::InvalidState {
                kind: Violation::Positivity,
                value: min,
            });
        }
        Ok(Self(m))
    }

    pub(crate) fn new_unchecked(m: Matrix8) -> Self {
        Self(m)
    }

    pub fn maximally_mixed() -> Self {
        Self(Matrix8::identity().scale(1.0 / DIM as f64))
    }

    /// `e^{−H/T} / Z`.
    pub fn gibbs(h: &Hamiltonian, temperature: f64) -> Self {
        let e = h.energies();
        let e_min = e.iter().cloned().fold(f64::INFINITY, f64::min);
        let weights: Vec<f64> = e.iter().map(|x| (-(x - e_min) / temperature).exp()).collect();
        let z: f64 = weights.iter().sum();
        let mut m = Matrix8::zeros();
        for (i, w) in weights.iter().enumerate() {
            m[(i, i)] = C64::new(w / z, 0.0);
        }
        Self(m)
    }

    pub fn matrix(&self) -> &Matrix8 {
        &self.0
    }

    pub fn into_matrix(self) -> Matrix8 {
        self.0
    }

    pub fn trace(&self) -> f64 {
        self.0.trace().re
    }

    pub fn purity(&self) -> f64 {
        (self.0 * self.0).trace().re
    }

    pub fn min_eigenvalue(&self) -> f64 {
        hermitian_eigenvalues(&self.0)[0]
    }

    pub fn populations(&self) -> [f64; DIM] {
        std::array::from_fn(|i| self.0[(i, i)].re)
    }

    pub fn trace_distance(&self, other: &DensityMatrix) -> f64 {
        trace_distance(&self.0, &other.0)
    }

    pub fn coordinates(&self) -> [f64; COORDS] {
        to_coordinates(&self.0)
    }
}

fn check_sample(time: f64, m: &Matrix8) -> Result<(), DynamicsError> {
    let tr = (m.trace().re - 1.0).abs();
    if tr > TRAJECTORY_TRACE_TOL {
        return Err(DynamicsError::InvariantViolation {
            time,
            kind: Violation::Trace,
            value: tr,
        });
    }
    let herm = hermiticity_defect(m);
    if herm > TRAJECTORY_HERMITICITY_TOL {
        return Err(DynamicsError::InvariantViolation {
            time,
            kind: Violation::Hermiticity,
            value: herm,
        });
    }
    let min = hermitian_eigenvalues(m)[0];
    if min < -TRAJECTORY_POSITIVITY_TOL {
        return Err(DynamicsError::InvariantViolation {
            time,
            kind: Violation::Positivity,
            value: min,
        });
    }
    Ok(())
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum IntegrationMethod {
    #[default]
    ClassicalRk4,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct IntegratorConfig {
    dt: f64,
    pub method: IntegrationMethod,
}

impl IntegratorConfig {
    pub fn new(dt: f64) -> Result<Self, DynamicsError> {
        if !(dt > 0.0 && dt <= MAX_STEP) {
            return Err(DynamicsError::InvalidStep(dt));
        }
        Ok(Self {
            dt,
            method: IntegrationMethod::ClassicalRk4,
        })
    }

    pub fn dt(&self) -> f64 {
        self.dt
    }
}

impl Default for IntegratorConfig {
    fn default() -> Self {
        Self {
            dt: 1e-3,
            method: IntegrationMethod::ClassicalRk4,
        }
    }
}

/// Number of full steps and the shortened final step covering `span`.
fn step_plan(span: f64, dt: f64) -> (usize, Option<f64>) {
    let ratio = span / dt;
    let nearest = ratio.round();
    if (ratio - nearest).abs() <= 1e-9 * nearest.max(1.0) {
        return (nearest as usize, None);
    }
    let full = ratio.floor();
    let rest = span - full * dt;
    (full as usize, (rest > 0.0).then_some(rest))
}

/// Compressed-row real matrix; only used for generator–vector products.
#[derive(Debug, Clone)]
struct SparseRows {
    starts: Vec<usize>,
    columns: Vec<usize>,
    values: Vec<f64>,
}

impl SparseRows {
    fn from_dense(m: &DMatrix<f64>) -> Self {
        let mut starts = Vec::with_capacity(m.nrows() + 1);
        let mut columns = Vec::new();
        let mut values = Vec::new();
        starts.push(0);
        for i in 0..m.nrows() {
            for j in 0..m.ncols() {
                let v = m[(i, j)];
                if v != 0.0 {
                    columns.push(j);
                    values.push(v);
                }
            }
            starts.push(values.len());
        }
        Self {
            starts,
            columns,
            values,
        }
    }

    fn apply(&self, x: &[f64; COORDS], out: &mut [f64; COORDS]) {
        for (i, slot) in out.iter_mut().enumerate() {
            let mut acc = 0.0;
            for k in self.starts[i]..self.starts[i + 1] {
                acc += self.values[k] * x[self.columns[k]];
            }
            *slot = acc;
        }
    }
}

/// The master-equation generator in Hermitian coordinates.
#[derive(Debug, Clone)]
pub struct Liouvillian {
    dense: DMatrix<f64>,
    sparse: SparseRows,
}

impl Liouvillian {
    pub fn new(model: &TransistorModel) -> Self {
        let mut dense = DMatrix::zeros(COORDS, COORDS);
        let mut unit = [0.0; COORDS];
        for k in 0..COORDS {
            unit[k] = 1.0;
            let image = to_coordinates(&master_rhs(model, &from_coordinates(&unit)));
            unit[k] = 0.0;
            for (i, v) in image.iter().enumerate() {
                dense[(i, k)] = *v;
            }
        }
        let sparse = SparseRows::from_dense(&dense);
        Self { dense, sparse }
    }

    pub fn matrix(&self) -> &DMatrix<f64> {
        &self.dense
    }

    pub fn nonzeros(&self) -> usize {
        self.sparse.values.len()
    }

    pub fn apply(&self, x: &[f64; COORDS], out: &mut [f64; COORDS]) {
        self.sparse.apply(x, out);
    }

    /// One classical RK4 step of length `dt`, in place.
    pub fn rk4_step(&self, x: &mut [f64; COORDS], dt: f64) {
        let mut k1 = [0.0; COORDS];
        let mut k2 = [0.0; COORDS];
        let mut k3 = [0.0; COORDS];
        let mut k4 = [0.0; COORDS];
        let mut tmp = [0.0; COORDS];

        self.apply(x, &mut k1);
        for i in 0..COORDS {
            tmp[i] = x[i] + 0.5 * dt * k1[i];
        }
        self.apply(&tmp, &mut k2);
        for i in 0..COORDS {
            tmp[i] = x[i] + 0.5 * dt * k2[i];
        }
        self.apply(&tmp, &mut k3);
        for i in 0..COORDS {
            tmp[i] = x[i] + dt * k3[i];
        }
        self.apply(&tmp, &mut k4);
        for i in 0..COORDS {
            x[i] += dt / 6.0 * (k1[i] + 2.0 * k2[i] + 2.0 * k3[i] + k4[i]);
        }
    }

    /// The RK4 one-step map `I + hL + (hL)²/2 + (hL)³/6 + (hL)⁴/24`, which
    /// is exactly what [`Liouvillian::rk4_step`] applies for a linear
    /// autonomous generator.
    pub fn rk4_step_matrix(&self, dt: f64) -> DMatrix<f64> {
        let identity = DMatrix::<f64>::identity(COORDS, COORDS);
        let hl = &self.dense * dt;
        // Horner: I + hL (I + hL/2 (I + hL/3 (I + hL/4)))
        let mut acc = &identity + &hl * 0.25;
        acc = &identity + (&hl * &acc) * (1.0 / 3.0);
        acc = &identity + (&hl * &acc) * 0.5;
        &identity + &hl * &acc
    }

    fn advance(&self, x: &mut [f64; COORDS], span: f64, dt: f64) {
        let (full, rest) = step_plan(span, dt);
        for _ in 0..full {
            self.rk4_step(x, dt);
        }
        if let Some(rest) = rest {
            self.rk4_step(x, rest);
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct Sample {
    pub time: f64,
    pub rho: DensityMatrix,
}

/// States at the requested output times, in increasing time order.
#[derive(Debug, Clone, PartialEq, Default)]
pub struct Trajectory {
    pub samples: Vec<Sample>,
}

impl Trajectory {
    pub fn times(&self) -> Vec<f64> {
        self.samples.iter().map(|s| s.time).collect()
    }

    pub fn last(&self) -> Option<&Sample> {
        self.samples.last()
    }

    pub fn at(&self, time: f64) -> Option<&DensityMatrix> {
        self.samples
            .iter()
            .find(|s| s.time == time)
            .map(|s| &s.rho)
    }

    pub fn len(&self) -> usize {
        self.samples.len()
    }

    pub fn is_empty(&self) -> bool {
        self.samples.is_empty()
    }
}

/// Validated output schedule: requested times plus `t_end`.
fn output_times(t_end: f64, sample_times: &[f64]) -> Result<Vec<f64>, DynamicsError> {
    if !(t_end.is_finite() && t_end >= 0.0) {
        return Err(DynamicsError::InvalidEndTime(t_end));
    }
    let mut times = Vec::with_capacity(sample_times.len() + 1);
    let mut previous = f64::NEG_INFINITY;
    for &t in sample_times {
        if !(t.is_finite() && t >= 0.0 && t <= t_end && t > previous) {
            return Err(DynamicsError::InvalidSampleTimes { t_end });
        }
        times.push(t);
        previous = t;
    }
    if times.last() != Some(&t_end) {
        times.push(t_end);
    }
    Ok(times)
}

/// Integrate from `rho0` to `t_end`, returning the states at `sample_times`
/// (and always at `t_end`). Every sample is checked for trace drift,
/// Hermiticity and negativity; nothing is renormalized.
pub fn evolve(
    model: &TransistorModel,
    rho0: &DensityMatrix,
    t_end: f64,
    cfg: &IntegratorConfig,
    sample_times: &[f64],
) -> Result<Trajectory, DynamicsError> {
    evolve_with(&Liouvillian::new(model), rho0, t_end, cfg, sample_times)
}

/// [`evolve`] with a prebuilt generator.
pub fn evolve_with(
    generator: &Liouvillian,
    rho0: &DensityMatrix,
    t_end: f64,
    cfg: &IntegratorConfig,
    sample_times: &[f64],
) -> Result<Trajectory, DynamicsError> {
    let times = output_times(t_end, sample_times)?;
    let mut x = rho0.coordinates();
    let mut now = 0.0;
    let mut samples = Vec::with_capacity(times.len());
    for &t in &times {
        generator.advance(&mut x, t - now, cfg.dt());
        now = t;
        let m = from_coordinates(&x);
        check_sample(t, &m)?;
        samples.push(Sample {
            time: t,
            rho: DensityMatrix::new_unchecked(m),
        });
    }
    Ok(Trajectory { samples })
}

fn matrix_power(base: &DMatrix<f64>, mut exponent: usize) -> DMatrix<f64> {
    let mut result = DMatrix::<f64>::identity(base.nrows(), base.ncols());
    let mut square = base.clone();
    while exponent > 0 {
        if exponent & 1 == 1 {
            result = &square * &result;
        }
        exponent >>= 1;
        if exponent > 0 {
            square = &square * &square;
        }
    }
    result
}

/// Dense RK4 propagators between consecutive output times, reusable for any
/// number of initial states.
#[derive(Debug, Clone)]
pub struct SampledPropagator {
    times: Vec<f64>,
    segments: Vec<DMatrix<f64>>,
}

impl SampledPropagator {
    /// Output times are `sample_times` plus their maximum (so an empty list
    /// gives only `t = 0`).
    pub fn new(
        generator: &Liouvillian,
        cfg: &IntegratorConfig,
        sample_times: &[f64],
    ) -> Result<Self, DynamicsError> {
        let t_end = sample_times.last().copied().unwrap_or(0.0);
        let times = output_times(t_end, sample_times)?;
        let step = generator.rk4_step_matrix(cfg.dt());
        let mut powers: HashMap<usize, DMatrix<f64>> = HashMap::new();
        let mut segments = Vec::with_capacity(times.len());
        let mut now = 0.0;
        for &t in &times {
            let (full, rest) = step_plan(t - now, cfg.dt());
            now = t;
            let mut segment = powers
                .entry(full)
                .or_insert_with(|| matrix_power(&step, full))
                .clone();
            if let Some(rest) = rest {
                segment = generator.rk4_step_matrix(rest) * segment;
            }
            segments.push(segment);
        }
        Ok(Self { times, segments })
    }

    pub fn times(&self) -> &[f64] {
        &self.times
    }

    pub fn propagate(&self, rho0: &DensityMatrix) -> Result<Trajectory, DynamicsError> {
        let mut x = DVector::from_column_slice(&rho0.coordinates());
        let mut samples = Vec::with_capacity(self.times.len());
        for (&t, segment) in self.times.iter().zip(&self.segments) {
            x = segment * x;
            let m = from_coordinates(x.as_slice());
            check_sample(t, &m)?;
            samples.push(Sample {
                time: t,
                rho: DensityMatrix::new_unchecked(m),
            });
        }
        Ok(Trajectory { samples })
    }
}

/// Null space of the generator together with the conserved quantities that
/// fix which stationary state a given initial state relaxes to.
#[derive(Debug, Clone)]
pub struct StationarySpace {
    right: DMatrix<f64>,
    left: DMatrix<f64>,
    singular_values: Vec<f64>,
}

impl StationarySpace {
    pub fn new(generator: &Liouvillian) -> Result<Self, DynamicsError> {
        let svd = generator.matrix().clone().svd(true, true);
        let u = svd.u.as_ref().expect("requested U");
        let v_t = svd.v_t.as_ref().expect("requested V^T");
        let mut order: Vec<usize> = (0..svd.singular_values.len()).collect();
        order.sort_by(|&a, &b| svd.singular_values[a].total_cmp(&svd.singular_values[b]));
        let singular_values: Vec<f64> = order.iter().map(|&k| svd.singular_values[k]).collect();

        let nullity = singular_values
            .iter()
            .take_while(|s| **s <= NULL_TOLERANCE)
            .count();
        if nullity == 0 {
            return Err(DynamicsError::NoStationaryState(singular_values[0]));
        }
        if let Some(&next) = singular_values.get(nullity) {
            if next < GAP_TOLERANCE {
                return Err(DynamicsError::IllConditionedNullSpace { nullity, next });
            }
        }
        let right = DMatrix::from_fn(COORDS, nullity, |i, c| v_t[(order[c], i)]);
        let left = DMatrix::from_fn(COORDS, nullity, |i, c| u[(i, order[c])]);
        Ok(Self {
            right,
            left,
            singular_values,
        })
    }

    pub fn nullity(&self) -> usize {
        self.right.ncols()
    }

    /// All singular values of the generator, ascending.
    pub fn singular_values(&self) -> &[f64] {
        &self.singular_values
    }

    /// The stationary state that `rho0` relaxes to: the component of `rho0`
    /// in the null space, taken along the decaying modes.
    pub fn project(&self, rho0: &DensityMatrix) -> Result<DensityMatrix, DynamicsError> {
        let x0 = DVector::from_column_slice(&rho0.coordinates());
        let overlap = self.left.transpose() * &self.right;
        let rhs = self.left.transpose() * x0;
        let weights = overlap
            .lu()
            .solve(&rhs)
            .ok_or(DynamicsError::SingularProjection)?;
        let x = &self.right * weights;
        let m = from_coordinates(x.as_slice());
        let m = (m + m.adjoint()).scale(0.5);
        let tr = m.trace().re;
        if !(tr.is_finite() && tr.abs() > f64::EPSILON) {
            return Err(DynamicsError::SingularProjection);
        }
        DensityMatrix::new(m.unscale(tr))
    }
}

/// Stationary state reached from the maximally mixed state. It carries no
/// parity coherence; at equal bath temperatures it is the Gibbs state.
pub fn steady_state(model: &TransistorModel) -> Result<DensityMatrix, DynamicsError> {
    steady_state_from(model, &DensityMatrix::maximally_mixed())
}

/// Stationary state reached from `rho0`.
pub fn steady_state_from(
    model: &TransistorModel,
    rho0: &DensityMatrix,
) -> Result<DensityMatrix, DynamicsError> {
    StationarySpace::new(&Liouvillian::new(model))?.project(rho0)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::linalg::max_abs;
    use crate::model::{ModelTemplate, ZeroFrequencyChannel};

    fn default_model() -> TransistorModel {
        TransistorModel::with_temperatures(0.2, 0.08, 0.02).unwrap()
    }

    fn ghz() -> DensityMatrix {
        let mut m = Matrix8::zeros();
        for (i, j) in [(0, 0), (0, 7), (7, 0), (7, 7)] {
            m[(i, j)] = C64::new(0.5, 0.0);
        }
        DensityMatrix::new(m).unwrap()
    }

    #[test]
    fn density_matrix_validation() {
        assert!(DensityMatrix::new(Matrix8::identity().scale(0.125)).is_ok());
        let err = DensityMatrix::new(Matrix8::identity().scale(0.2)).unwrap_err();
        assert!(matches!(
            err,
            DynamicsError::InvalidState {
                kind: Violation::Trace,
                ..
            }
        ));
        let mut skew = Matrix8::identity().scale(0.125);
        skew[(0, 1)] = C64::new(0.01, 0.0);
        assert!(matches!(
            DensityMatrix::new(skew).unwrap_err(),
            DynamicsError::InvalidState {
                kind: Violation::Hermiticity,
                ..
            }
        ));
        let mut negative = Matrix8::zeros();
        negative[(0, 0)] = C64::new(1.5, 0.0);
        negative[(1, 1)] = C64::new(-0.5, 0.0);
        assert!(matches!(
            DensityMatrix::new(negative).unwrap_err(),
            DynamicsError::InvalidState {
                kind: Violation::Positivity,
                ..
            }
        ));
    }

    #[test]
    fn step_plan_hits_end_time() {
        assert_eq!(step_plan(0.1, 1e-3), (100, None));
        assert_eq!(step_plan(0.0, 1e-3), (0, None));
        let (full, rest) = step_plan(0.1005, 1e-3);
        assert_eq!(full, 100);
        assert!((rest.unwrap() - 5e-4).abs() < 1e-12);
        assert_eq!(step_plan(4.8, 1e-3), (4800, None));
    }

    #[test]
    fn integrator_rejects_large_steps() {
        assert!(IntegratorConfig::new(0.0).is_err());
        assert!(IntegratorConfig::new(0.05).is_err());
        assert!(IntegratorConfig::new(0.01).is_ok());
    }

    #[test]
    fn generator_matches_master_rhs() {
        let model = default_model();
        let l = Liouvillian::new(&model);
        let rho = ghz();
        let mut out = [0.0; COORDS];
        l.apply(&rho.coordinates(), &mut out);
        let direct = master_rhs(&model, rho.matrix());
        assert!(max_abs(&(from_coordinates(&out) - direct)) < 1e-14);
        let dense = l.matrix() * DVector::from_column_slice(&rho.coordinates());
        assert!(max_abs(&(from_coordinates(dense.as_slice()) - direct)) < 1e-14);
    }

    #[test]
    fn zero_time_is_identity() {
        let traj = evolve(
            &default_model(),
            &ghz(),
            0.0,
            &IntegratorConfig::default(),
            &[],
        )
        .unwrap();
        assert_eq!(traj.len(), 1);
        assert_eq!(traj.samples[0].time, 0.0);
        assert_eq!(traj.samples[0].rho, ghz());
    }

    #[test]
    fn sample_times_are_validated() {
        let model = default_model();
        let cfg = IntegratorConfig::default();
        for bad in [vec![0.2, 0.1], vec![0.5, 2.0], vec![-0.1], vec![0.1, 0.1]] {
            assert!(matches!(
                evolve(&model, &ghz(), 1.0, &cfg, &bad),
                Err(DynamicsError::InvalidSampleTimes { .. })
            ));
        }
        assert!(evolve(&model, &ghz(), f64::NAN, &cfg, &[]).is_err());
        let traj = evolve(&model, &ghz(), 0.25, &cfg, &[0.0, 0.1]).unwrap();
        assert_eq!(traj.times(), vec![0.0, 0.1, 0.25]);
    }

    #[test]
    fn rk4_matrix_equals_stepping() {
        let l = Liouvillian::new(&default_model());
        let p = l.rk4_step_matrix(0.01);
        let x = ghz().coordinates();
        let mut stepped = x;
        l.rk4_step(&mut stepped, 0.01);
        let via_matrix = &p * DVector::from_column_slice(&x);
        for i in 0..COORDS {
            assert!((stepped[i] - via_matrix[i]).abs() < 1e-15);
        }
    }

    #[test]
    fn propagator_agrees_with_stepping() {
        let model = default_model();
        let cfg = IntegratorConfig::default();
        let times = [0.05, 0.1, 0.3, 0.8, 1.2345];
        let l = Liouvillian::new(&model);
        let stepped = evolve_with(&l, &ghz(), 1.2345, &cfg, &times).unwrap();
        let propagated = SampledPropagator::new(&l, &cfg, &times)
            .unwrap()
            .propagate(&ghz())
            .unwrap();
        assert_eq!(stepped.times(), propagated.times());
        for (a, b) in stepped.samples.iter().zip(&propagated.samples) {
            assert!(max_abs(&(a.rho.matrix() - b.rho.matrix())) < 1e-12);
        }
    }

    #[test]
    fn gibbs_trajectory_is_stationary() {
        for t in [0.1, 0.5] {
            let template = ModelTemplate {
                t_a: t,
                t_c: t,
                ..ModelTemplate::default()
            };
            let model = template.at(t).unwrap();
            let gibbs = DensityMatrix::gibbs(model.hamiltonian(), t);
            let traj = evolve(&model, &gibbs, 5.0, &IntegratorConfig::default(), &[1.0]).unwrap();
            for s in &traj.samples {
                assert!(max_abs(&(s.rho.matrix() - gibbs.matrix())) <= 1e-8);
            }
        }
    }

    #[test]
    fn stationary_space_is_two_dimensional() {
        for t_b in [0.004, 0.05, 0.12, 0.36, 0.8] {
            let model = TransistorModel::with_temperatures(0.2, t_b, 0.02).unwrap();
            let space = StationarySpace::new(&Liouvillian::new(&model)).unwrap();
            assert_eq!(space.nullity(), 2, "T_B = {t_b}");
        }
    }

    #[test]
    fn steady_state_is_gibbs_at_equal_temperatures() {
        for t in [0.1, 0.2, 0.5] {
            let template = ModelTemplate {
                t_a: t,
                t_c: t,
                ..ModelTemplate::default()
            };
            let model = template.at(t).unwrap();
            let ss = steady_state(&model).unwrap();
            let gibbs = DensityMatrix::gibbs(model.hamiltonian(), t);
            assert!(max_abs(&(ss.matrix() - gibbs.matrix())) <= 1e-8, "T = {t}");
        }
    }

    #[test]
    fn steady_state_annihilated_by_generator() {
        let model = default_model();
        let ss = steady_state(&model).unwrap();
        assert!(max_abs(&master_rhs(&model, ss.matrix())) < 1e-12);
        let from_ghz = steady_state_from(&model, &ghz()).unwrap();
        assert!(max_abs(&master_rhs(&model, from_ghz.matrix())) < 1e-12);
        // GHZ carries parity +1, the canonical state parity 0
        assert!(from_ghz.trace_distance(&ss) > 0.4);
    }

    #[test]
    fn ghz_relaxes_to_its_parity_sector_steady_state() {
        let model = default_model();
        let target = steady_state_from(&model, &ghz()).unwrap();
        let traj = evolve(&model, &ghz(), 50.0, &IntegratorConfig::default(), &[10.0]).unwrap();
        let at10 = traj.at(10.0).unwrap().trace_distance(&target);
        let at50 = traj.at(50.0).unwrap().trace_distance(&target);
        assert!(at10 < 1e-4, "t = 10: {at10:e}");
        assert!(at50 < 1e-9, "t = 50: {at50:e}");
    }

    #[test]
    fn invariant_violation_is_reported() {
        // A step this long is outside the RK4 stability region for these rates.
        let model = default_model();
        let l = Liouvillian::new(&model);
        let cfg = IntegratorConfig { dt: 1.4, method: IntegrationMethod::ClassicalRk4 };
        let err = evolve_with(&l, &ghz(), 200.0, &cfg, &[]).unwrap_err();
        assert!(matches!(err, DynamicsError::InvariantViolation { .. }), "{err:?}");
    }

    #[test]
    fn drop_policy_steady_state_exists_at_high_temperature() {
        let template = ModelTemplate {
            t_a: 1.0,
            t_c: 0.5,
            zero_frequency: ZeroFrequencyChannel::Drop,
            ..ModelTemplate::default()
        };
        let model = template.at(0.8).unwrap();
        let ss = steady_state(&model).unwrap();
        assert!(max_abs(&master_rhs(&model, ss.matrix())) < 1e-12);
    }
}
