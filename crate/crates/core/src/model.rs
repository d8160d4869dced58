//! System Hamiltonian, Bohr spectrum, bath eigenoperators and the master
//! equation right-hand side.
//!
//! Basis convention: `|abc⟩` with qubit order `A, B, C`, index `4a + 2b + c`,
//! and `|0⟩` the `σz = +1` eigenstate. Indices are 0-based here, so the state
//! usually written `|1⟩ = |000⟩` is index 0 and `|8⟩ = |111⟩` is index 7.

use std::fmt;
use std::str::FromStr;

use num_complex::Complex64;
use thiserror::Error;

use crate::linalg::{anticommutator, Matrix8, C64, DIM};

/// Frequencies closer than this are treated as the same Bohr frequency.
pub const FREQUENCY_TOLERANCE: f64 = 1e-9;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum ModelError {
    #[error("bath {label} temperature must be finite and > 0, got {temperature}")]
    NonPositiveTemperature { label: QubitLabel, temperature: f64 },
    #[error("bath {label} coupling strength kappa must be finite and >= 0, got {kappa}")]
    InvalidKappa { label: QubitLabel, kappa: f64 },
    #[error("coupling energies must be finite, got {0:?}")]
    NonFiniteCoupling(CouplingConfig),
    #[error("Bose occupation needs omega > 0 and T > 0, got omega = {omega}, T = {temperature}")]
    OccupationDomain { omega: f64, temperature: f64 },
    #[error("baths must be given in the order A, B, C")]
    BathOrder,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub enum QubitLabel {
    A,
    B,
    C,
}

impl QubitLabel {
    pub const ALL: [QubitLabel; 3] = [QubitLabel::A, QubitLabel::B, QubitLabel::C];

    /// Bit of the basis index that holds this qubit.
    pub fn mask(self) -> usize {
        match self {
            QubitLabel::A => 0b100,
            QubitLabel::B => 0b010,
            QubitLabel::C => 0b001,
        }
    }

    /// Tensor-product slot: 0 for A, 1 for B, 2 for C.
    pub fn slot(self) -> usize {
        self as usize
    }

    /// `σz` eigenvalue of this qubit in basis state `index`.
    pub fn spin(self, index: usize) -> f64 {
        if index & self.mask() == 0 {
            1.0
        } else {
            -1.0
        }
    }
}

impl fmt::Display for QubitLabel {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let s = match self {
            QubitLabel::A => "A",
            QubitLabel::B => "B",
            QubitLabel::C => "C",
        };
        f.write_str(s)
    }
}

/// Pairwise `σz⊗σz` coupling energies (ħ = 1).
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct CouplingConfig {
    pub omega_ab: f64,
    pub omega_bc: f64,
    pub omega_ca: f64,
}

impl CouplingConfig {
    pub fn new(omega_ab: f64, omega_bc: f64, omega_ca: f64) -> Self {
        Self {
            omega_ab,
            omega_bc,
            omega_ca,
        }
    }

    pub fn is_finite(&self) -> bool {
        self.omega_ab.is_finite() && self.omega_bc.is_finite() && self.omega_ca.is_finite()
    }
}

impl Default for CouplingConfig {
    fn default() -> Self {
        Self::new(1.0, 1.0, 0.0)
    }
}

/// How the zero-frequency part of a bath coupling enters the dissipator.
///
/// With an Ohmic spectral density the rates `𝒥(ω)(1+n)` and `𝒥(ω)n` both
/// tend to `κT` as `ω → 0⁺`, so a transition between degenerate levels
/// keeps a finite, temperature-controlled rate. For bath B at the default
/// couplings this is the only channel that moves population between the
/// `E = 0` states, and it is what makes `T_B` control the A→C current.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Hash)]
pub enum ZeroFrequencyChannel {
    /// Keep `A_X(0)` (Hermitian) with total rate `κ T_X`.
    #[default]
    OhmicLimit,
    /// Sum over strictly positive frequencies only; ω = 0 groups are
    /// reported in [`BathChannels::dropped`].
    Drop,
}

impl fmt::Display for ZeroFrequencyChannel {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            ZeroFrequencyChannel::OhmicLimit => f.write_str("ohmic-limit"),
            ZeroFrequencyChannel::Drop => f.write_str("drop"),
        }
    }
}

impl FromStr for ZeroFrequencyChannel {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s {
            "ohmic-limit" => Ok(Self::OhmicLimit),
            "drop" => Ok(Self::Drop),
            other => Err(format!(
                "unknown zero-frequency policy '{other}' (expected 'ohmic-limit' or 'drop')"
            )),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct BathConfig {
    pub label: QubitLabel,
    pub temperature: f64,
    pub kappa: f64,
}

impl BathConfig {
    pub fn new(label: QubitLabel, temperature: f64) -> Result<Self, ModelError> {
        Self::with_kappa(label, temperature, 1.0)
    }

    pub fn with_kappa(label: QubitLabel, temperature: f64, kappa: f64) -> Result<Self, ModelError> {
        if !(temperature.is_finite() && temperature > 0.0) {
            return Err(ModelError::NonPositiveTemperature { label, temperature });
        }
        if !(kappa.is_finite() && kappa >= 0.0) {
            return Err(ModelError::InvalidKappa { label, kappa });
        }
        Ok(Self {
            label,
            temperature,
            kappa,
        })
    }

    /// Ohmic spectral density `𝒥(ω) = κω`.
    pub fn spectral_density(&self, omega: f64) -> f64 {
        self.kappa * omega
    }
}

/// Diagonal system Hamiltonian in the computational basis.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Hamiltonian {
    energies: [f64; DIM],
}

impl Hamiltonian {
    pub fn from_energies(energies: [f64; DIM]) -> Self {
        Self { energies }
    }

    pub fn energies(&self) -> &[f64; DIM] {
        &self.energies
    }

    pub fn energy(&self, index: usize) -> f64 {
        self.energies[index]
    }

    pub fn matrix(&self) -> Matrix8 {
        let mut m = Matrix8::zeros();
        for (i, e) in self.energies.iter().enumerate() {
            m[(i, i)] = C64::new(*e, 0.0);
        }
        m
    }
}

/// `H = Σ (ω_XY / 2) σz^X σz^Y` over `(A,B), (B,C), (C,A)`.
pub fn build_hamiltonian(cfg: &CouplingConfig) -> Hamiltonian {
    use QubitLabel::{A, B, C};
    let mut energies = [0.0; DIM];
    for (i, e) in energies.iter_mut().enumerate() {
        *e = 0.5 * cfg.omega_ab * A.spin(i) * B.spin(i)
            + 0.5 * cfg.omega_bc * B.spin(i) * C.spin(i)
            + 0.5 * cfg.omega_ca * C.spin(i) * A.spin(i);
    }
    Hamiltonian { energies }
}

/// A single-qubit flip `from → to` with `E_from − E_to = ω ≥ 0`.
///
/// For ω = 0 the orientation is `lower index → higher index`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct Transition {
    pub from: usize,
    pub to: usize,
}

#[derive(Debug, Clone, PartialEq)]
pub struct TransitionGroup {
    pub frequency: f64,
    pub transitions: Vec<Transition>,
}

impl TransitionGroup {
    pub fn is_zero_frequency(&self) -> bool {
        self.frequency <= FREQUENCY_TOLERANCE
    }
}

/// All flips of `bath`'s qubit, grouped by Bohr frequency (highest first).
pub fn bohr_spectrum(h: &Hamiltonian, bath: QubitLabel) -> Vec<TransitionGroup> {
    let mut groups: Vec<TransitionGroup> = Vec::new();
    for i in 0..DIM {
        let j = i ^ bath.mask();
        if j < i {
            continue;
        }
        let gap = h.energy(i) - h.energy(j);
        let (transition, frequency) = if gap.abs() <= FREQUENCY_TOLERANCE {
            (Transition { from: i, to: j }, 0.0)
        } else if gap > 0.0 {
            (Transition { from: i, to: j }, gap)
        } else {
            (Transition { from: j, to: i }, -gap)
        };
        match groups
            .iter_mut()
            .find(|g| (g.frequency - frequency).abs() <= FREQUENCY_TOLERANCE)
        {
            Some(g) => g.transitions.push(transition),
            None => groups.push(TransitionGroup {
                frequency,
                transitions: vec![transition],
            }),
        }
    }
    for g in &mut groups {
        g.transitions.sort();
    }
    groups.sort_by(|a, b| b.frequency.total_cmp(&a.frequency));
    groups
}

/// `n = 1/(e^{ω/T} − 1)`, evaluated as `e^{−ω/T}/(1 − e^{−ω/T})` so that
/// large `ω/T` underflows to 0 instead of overflowing.
pub fn bose_occupation(omega: f64, temperature: f64) -> Result<f64, ModelError> {
    if !(omega > 0.0 && temperature > 0.0) || !omega.is_finite() || !temperature.is_finite() {
        return Err(ModelError::OccupationDomain { omega, temperature });
    }
    let x = omega / temperature;
    Ok((-x).exp() / -(-x).exp_m1())
}

/// One bath eigenoperator `A_X(ω)` together with its emission and
/// absorption rates.
#[derive(Debug, Clone, PartialEq)]
pub struct JumpOperator {
    pub bath: QubitLabel,
    pub frequency: f64,
    pub matrix: Matrix8,
    /// Rate multiplying `D[A]`: `𝒥(ω)(1 + n)`.
    pub rate_down: f64,
    /// Rate multiplying `D[A†]`: `𝒥(ω) n`.
    pub rate_up: f64,
    adjoint: Matrix8,
    lowering_product: Matrix8,
    raising_product: Matrix8,
}

impl JumpOperator {
    fn new(bath: QubitLabel, frequency: f64, matrix: Matrix8, rate_down: f64, rate_up: f64) -> Self {
        let adjoint = matrix.adjoint();
        Self {
            bath,
            frequency,
            lowering_product: adjoint * matrix,
            raising_product: matrix * adjoint,
            adjoint,
            matrix,
            rate_down,
            rate_up,
        }
    }

    /// `γ↓ (AρA† − ½{A†A, ρ}) + γ↑ (A†ρA − ½{AA†, ρ})`.
    pub fn dissipate(&self, rho: &Matrix8) -> Matrix8 {
        let a = &self.matrix;
        let ad = &self.adjoint;
        let mut out = Matrix8::zeros();
        if self.rate_down != 0.0 {
            let term = a * rho * ad - anticommutator(&self.lowering_product, rho).scale(0.5);
            out += term.scale(self.rate_down);
        }
        if self.rate_up != 0.0 {
            let term = ad * rho * a - anticommutator(&self.raising_product, rho).scale(0.5);
            out += term.scale(self.rate_up);
        }
        out
    }
}

/// The dissipative channels of one bath.
#[derive(Debug, Clone, PartialEq)]
pub struct BathChannels {
    pub config: BathConfig,
    pub operators: Vec<JumpOperator>,
    /// Zero-frequency groups left out under [`ZeroFrequencyChannel::Drop`].
    pub dropped: Vec<TransitionGroup>,
}

impl BathChannels {
    pub fn dissipate(&self, rho: &Matrix8) -> Matrix8 {
        self.operators
            .iter()
            .fold(Matrix8::zeros(), |acc, op| acc + op.dissipate(rho))
    }
}

pub fn jump_operators(
    h: &Hamiltonian,
    bath: &BathConfig,
    policy: ZeroFrequencyChannel,
) -> Result<BathChannels, ModelError> {
    let mut operators = Vec::new();
    let mut dropped = Vec::new();
    let one = Complex64::new(1.0, 0.0);
    for group in bohr_spectrum(h, bath.label) {
        let mut matrix = Matrix8::zeros();
        if group.is_zero_frequency() {
            if policy == ZeroFrequencyChannel::Drop {
                dropped.push(group);
                continue;
            }
            for t in &group.transitions {
                matrix[(t.to, t.from)] = one;
                matrix[(t.from, t.to)] = one;
            }
            // A(0) is Hermitian, so D[A] and D[A†] coincide; the limit rate
            // κT is shared evenly between the two terms.
            let rate = 0.5 * bath.kappa * bath.temperature;
            operators.push(JumpOperator::new(bath.label, 0.0, matrix, rate, rate));
        } else {
            for t in &group.transitions {
                matrix[(t.to, t.from)] = one;
            }
            let n = bose_occupation(group.frequency, bath.temperature)?;
            let j = bath.spectral_density(group.frequency);
            operators.push(JumpOperator::new(
                bath.label,
                group.frequency,
                matrix,
                j * (1.0 + n),
                j * n,
            ));
        }
    }
    Ok(BathChannels {
        config: *bath,
        operators,
        dropped,
    })
}

/// Hamiltonian plus the three baths with their eigenoperators. Immutable
/// once built; every field regenerates deterministically from the inputs.
#[derive(Debug, Clone, PartialEq)]
pub struct TransistorModel {
    couplings: CouplingConfig,
    hamiltonian: Hamiltonian,
    zero_frequency: ZeroFrequencyChannel,
    baths: [BathChannels; 3],
}

impl TransistorModel {
    pub fn new(
        couplings: CouplingConfig,
        baths: [BathConfig; 3],
        zero_frequency: ZeroFrequencyChannel,
    ) -> Result<Self, ModelError> {
        if !couplings.is_finite() {
            return Err(ModelError::NonFiniteCoupling(couplings));
        }
        if baths
            .iter()
            .zip(QubitLabel::ALL)
            .any(|(b, label)| b.label != label)
        {
            return Err(ModelError::BathOrder);
        }
        for b in &baths {
            BathConfig::with_kappa(b.label, b.temperature, b.kappa)?;
        }
        let hamiltonian = build_hamiltonian(&couplings);
        let [a, b, c] = baths;
        Ok(Self {
            couplings,
            hamiltonian,
            zero_frequency,
            baths: [
                jump_operators(&hamiltonian, &a, zero_frequency)?,
                jump_operators(&hamiltonian, &b, zero_frequency)?,
                jump_operators(&hamiltonian, &c, zero_frequency)?,
            ],
        })
    }

    /// Default couplings, κ = 1 and the Ohmic-limit zero-frequency channel.
    pub fn with_temperatures(t_a: f64, t_b: f64, t_c: f64) -> Result<Self, ModelError> {
        ModelTemplate {
            t_a,
            t_c,
            ..ModelTemplate::default()
        }
        .at(t_b)
    }

    pub fn couplings(&self) -> &CouplingConfig {
        &self.couplings
    }

    pub fn hamiltonian(&self) -> &Hamiltonian {
        &self.hamiltonian
    }

    pub fn zero_frequency(&self) -> ZeroFrequencyChannel {
        self.zero_frequency
    }

    pub fn channels(&self, bath: QubitLabel) -> &BathChannels {
        &self.baths[bath.slot()]
    }

    pub fn temperature(&self, bath: QubitLabel) -> f64 {
        self.baths[bath.slot()].config.temperature
    }

    pub fn jump_operators(&self) -> impl Iterator<Item = &JumpOperator> {
        self.baths.iter().flat_map(|b| b.operators.iter())
    }

    /// Number of single-flip transitions across all baths, including
    /// zero-frequency ones.
    pub fn transition_count(&self) -> usize {
        QubitLabel::ALL
            .iter()
            .map(|&label| {
                bohr_spectrum(&self.hamiltonian, label)
                    .iter()
                    .map(|g| g.transitions.len())
                    .sum::<usize>()
            })
            .sum()
    }
}

/// Everything about a model except `T_B`, which the amplification factors
/// differentiate against.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ModelTemplate {
    pub couplings: CouplingConfig,
    pub t_a: f64,
    pub t_c: f64,
    pub kappa: f64,
    pub zero_frequency: ZeroFrequencyChannel,
}

impl Default for ModelTemplate {
    fn default() -> Self {
        Self {
            couplings: CouplingConfig::default(),
            t_a: 0.2,
            t_c: 0.02,
            kappa: 1.0,
            zero_frequency: ZeroFrequencyChannel::OhmicLimit,
        }
    }
}

impl ModelTemplate {
    pub fn at(&self, t_b: f64) -> Result<TransistorModel, ModelError> {
        TransistorModel::new(
            self.couplings,
            [
                BathConfig::with_kappa(QubitLabel::A, self.t_a, self.kappa)?,
                BathConfig::with_kappa(QubitLabel::B, t_b, self.kappa)?,
                BathConfig::with_kappa(QubitLabel::C, self.t_c, self.kappa)?,
            ],
            self.zero_frequency,
        )
    }
}

/// `ℒ_X[ρ]` for one bath.
pub fn dissipator(model: &TransistorModel, bath: QubitLabel, rho: &Matrix8) -> Matrix8 {
    model.channels(bath).dissipate(rho)
}

/// `dρ/dt = −i[H, ρ] + Σ_X ℒ_X[ρ]`.
pub fn master_rhs(model: &TransistorModel, rho: &Matrix8) -> Matrix8 {
    let e = model.hamiltonian().energies();
    // H is diagonal: [H, ρ]_ij = (E_i − E_j) ρ_ij
    let mut out = Matrix8::from_fn(|i, j| rho[(i, j)] * C64::new(0.0, -(e[i] - e[j])));
    for label in QubitLabel::ALL {
        out += dissipator(model, label, rho);
    }
    out
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::linalg::{commutator, hermiticity_defect, max_abs};
    use proptest::prelude::*;

    fn default_model(t_b: f64) -> TransistorModel {
        TransistorModel::with_temperatures(0.2, t_b, 0.02).unwrap()
    }

    fn projector(index: usize) -> Matrix8 {
        let mut m = Matrix8::zeros();
        m[(index, index)] = C64::new(1.0, 0.0);
        m
    }

    /// Random valid density matrix `G G† / Tr` from 128 reals.
    fn density_from(values: &[f64]) -> Matrix8 {
        let g = Matrix8::from_fn(|i, j| C64::new(values[8 * i + j], values[64 + 8 * i + j]));
        let rho = g * g.adjoint();
        let tr = rho.trace();
        rho.unscale(tr.re)
    }

    #[test]
    fn hamiltonian_zero_couplings() {
        let h = build_hamiltonian(&CouplingConfig::new(0.0, 0.0, 0.0));
        assert_eq!(h.energies(), &[0.0; 8]);
    }

    #[test]
    fn hamiltonian_default_couplings() {
        let h = build_hamiltonian(&CouplingConfig::default());
        assert_eq!(h.energies(), &[1.0, 0.0, -1.0, 0.0, 0.0, -1.0, 0.0, 1.0]);
    }

    #[test]
    fn hamiltonian_all_couplings() {
        let h = build_hamiltonian(&CouplingConfig::new(1.0, 1.0, 1.0));
        assert_eq!(
            h.energies(),
            &[1.5, -0.5, -0.5, -0.5, -0.5, -0.5, -0.5, 1.5]
        );
    }

    #[test]
    fn listed_spectrum_is_a_pure_ac_coupling() {
        // E = (1, -1, 1, -1, -1, 1, -1, 1)
        let h = build_hamiltonian(&CouplingConfig::new(0.0, 0.0, 2.0));
        assert_eq!(h.energies(), &[1.0, -1.0, 1.0, -1.0, -1.0, 1.0, -1.0, 1.0]);
        let groups = bohr_spectrum(&h, QubitLabel::B);
        assert_eq!(groups.len(), 1);
        assert!(groups[0].is_zero_frequency());
    }

    #[test]
    fn bohr_spectrum_bath_a() {
        let h = build_hamiltonian(&CouplingConfig::default());
        let groups = bohr_spectrum(&h, QubitLabel::A);
        assert_eq!(groups.len(), 1);
        assert_eq!(groups[0].frequency, 1.0);
        let pairs: Vec<_> = groups[0].transitions.iter().map(|t| (t.from, t.to)).collect();
        assert_eq!(pairs, vec![(0, 4), (1, 5), (6, 2), (7, 3)]);
    }

    #[test]
    fn bohr_spectrum_bath_b() {
        let h = build_hamiltonian(&CouplingConfig::default());
        let groups = bohr_spectrum(&h, QubitLabel::B);
        assert_eq!(groups.len(), 2);
        assert_eq!(groups[0].frequency, 2.0);
        let high: Vec<_> = groups[0].transitions.iter().map(|t| (t.from, t.to)).collect();
        assert_eq!(high, vec![(0, 2), (7, 5)]);
        assert_eq!(groups[1].frequency, 0.0);
        let zero: Vec<_> = groups[1].transitions.iter().map(|t| (t.from, t.to)).collect();
        assert_eq!(zero, vec![(1, 3), (4, 6)]);
    }

    #[test]
    fn bohr_spectrum_degenerate_when_uncoupled() {
        let h = build_hamiltonian(&CouplingConfig::new(0.0, 0.0, 0.0));
        for label in QubitLabel::ALL {
            let groups = bohr_spectrum(&h, label);
            assert_eq!(groups.len(), 1);
            assert_eq!(groups[0].frequency, 0.0);
            assert_eq!(groups[0].transitions.len(), 4);
        }
    }

    #[test]
    fn twelve_transitions_at_default_couplings() {
        assert_eq!(default_model(0.08).transition_count(), 12);
    }

    #[test]
    fn occupation_values() {
        let n = bose_occupation(1.0, 0.2).unwrap();
        assert!((n - 1.0 / (5.0_f64.exp() - 1.0)).abs() < 1e-18);
        assert!((n - 6.783_654_906_304_231e-3).abs() < 1e-15);

        let tiny = bose_occupation(2.0, 0.02).unwrap();
        assert!(tiny.is_finite() && tiny > 0.0);
        assert!((tiny / (-100.0_f64).exp() - 1.0).abs() < 1e-12);

        let huge = bose_occupation(800.0, 1.0).unwrap();
        assert_eq!(huge, 0.0);

        for x in [1e-3, 1e-6, 1e-9] {
            let n = bose_occupation(x, 1.0).unwrap();
            assert!((n * x - 1.0).abs() < x);
        }
    }

    #[test]
    fn occupation_domain_errors() {
        assert!(bose_occupation(0.0, 0.1).is_err());
        assert!(bose_occupation(-1.0, 0.1).is_err());
        assert!(bose_occupation(1.0, 0.0).is_err());
        assert!(bose_occupation(1.0, -0.3).is_err());
    }

    #[test]
    fn bath_config_rejects_bad_inputs() {
        assert!(BathConfig::new(QubitLabel::A, 0.0).is_err());
        assert!(BathConfig::new(QubitLabel::A, f64::NAN).is_err());
        assert!(BathConfig::with_kappa(QubitLabel::A, 0.1, -1.0).is_err());
        assert!(BathConfig::new(QubitLabel::A, 0.1).is_ok());
    }

    #[test]
    fn model_rejects_misordered_baths() {
        let a = BathConfig::new(QubitLabel::A, 0.2).unwrap();
        let b = BathConfig::new(QubitLabel::B, 0.1).unwrap();
        let c = BathConfig::new(QubitLabel::C, 0.02).unwrap();
        let err = TransistorModel::new(
            CouplingConfig::default(),
            [b, a, c],
            ZeroFrequencyChannel::OhmicLimit,
        );
        assert_eq!(err, Err(ModelError::BathOrder));
        let err = TransistorModel::new(
            CouplingConfig::new(f64::INFINITY, 1.0, 0.0),
            [a, b, c],
            ZeroFrequencyChannel::OhmicLimit,
        );
        assert!(matches!(err, Err(ModelError::NonFiniteCoupling(_))));
    }

    #[test]
    fn jump_operator_bath_a() {
        let h = build_hamiltonian(&CouplingConfig::default());
        let bath = BathConfig::new(QubitLabel::A, 0.2).unwrap();
        let ch = jump_operators(&h, &bath, ZeroFrequencyChannel::OhmicLimit).unwrap();
        assert_eq!(ch.operators.len(), 1);
        let op = &ch.operators[0];
        let n = 1.0 / (5.0_f64.exp() - 1.0);
        assert_eq!(op.frequency, 1.0);
        assert!((op.rate_down - (1.0 + n)).abs() < 1e-15);
        assert!((op.rate_up - n).abs() < 1e-15);
    }

    #[test]
    fn jump_operators_bath_b_drop_policy() {
        let h = build_hamiltonian(&CouplingConfig::default());
        let bath = BathConfig::new(QubitLabel::B, 0.08).unwrap();
        let ch = jump_operators(&h, &bath, ZeroFrequencyChannel::Drop).unwrap();
        assert_eq!(ch.operators.len(), 1);
        assert_eq!(ch.operators[0].frequency, 2.0);
        for t in [(1, 3), (3, 1), (4, 6), (6, 4)] {
            assert_eq!(ch.operators[0].matrix[t], C64::new(0.0, 0.0));
        }
        assert_eq!(ch.dropped.len(), 1);
        let pairs: Vec<_> = ch.dropped[0].transitions.iter().map(|t| (t.from, t.to)).collect();
        assert_eq!(pairs, vec![(1, 3), (4, 6)]);
    }

    #[test]
    fn jump_operators_bath_b_ohmic_limit() {
        let h = build_hamiltonian(&CouplingConfig::default());
        let bath = BathConfig::new(QubitLabel::B, 0.08).unwrap();
        let ch = jump_operators(&h, &bath, ZeroFrequencyChannel::OhmicLimit).unwrap();
        assert!(ch.dropped.is_empty());
        assert_eq!(ch.operators.len(), 2);
        let zero = &ch.operators[1];
        assert_eq!(zero.frequency, 0.0);
        assert!((zero.rate_down + zero.rate_up - 0.08).abs() < 1e-15);
        assert_eq!(zero.matrix, zero.matrix.adjoint());
        assert_eq!(zero.matrix[(3, 1)], C64::new(1.0, 0.0));
        assert_eq!(zero.matrix[(1, 3)], C64::new(1.0, 0.0));
    }

    #[test]
    fn no_operators_without_couplings() {
        let h = build_hamiltonian(&CouplingConfig::new(0.0, 0.0, 0.0));
        for label in QubitLabel::ALL {
            let bath = BathConfig::new(label, 0.3).unwrap();
            let ch = jump_operators(&h, &bath, ZeroFrequencyChannel::Drop).unwrap();
            assert!(ch.operators.is_empty());
            assert_eq!(ch.dropped.len(), 1);
        }
    }

    #[test]
    fn eigenoperator_identity() {
        for cfg in [
            CouplingConfig::default(),
            CouplingConfig::new(1.0, 1.0, 1.0),
            CouplingConfig::new(0.7, -1.3, 0.4),
        ] {
            let baths = [
                BathConfig::new(QubitLabel::A, 0.2).unwrap(),
                BathConfig::new(QubitLabel::B, 0.1).unwrap(),
                BathConfig::new(QubitLabel::C, 0.02).unwrap(),
            ];
            let model = TransistorModel::new(cfg, baths, ZeroFrequencyChannel::OhmicLimit).unwrap();
            let h = model.hamiltonian().matrix();
            for op in model.jump_operators() {
                let defect = commutator(&h, &op.matrix) + op.matrix.scale(op.frequency);
                assert!(max_abs(&defect) <= 1e-12, "{op:?}");
                for i in 0..DIM {
                    for j in 0..DIM {
                        if op.matrix[(i, j)] != C64::new(0.0, 0.0) {
                            assert_eq!(i ^ j, op.bath.mask());
                        }
                    }
                }
            }
        }
    }

    #[test]
    fn dissipator_single_population() {
        let model = default_model(0.08);
        let out = dissipator(&model, QubitLabel::A, &projector(0));
        let n = bose_occupation(1.0, 0.2).unwrap();
        assert!((out[(4, 4)].re - (1.0 + n)).abs() < 1e-14);
        assert!((out[(0, 0)].re + (1.0 + n)).abs() < 1e-14);
    }

    #[test]
    fn dissipator_vanishes_without_couplings() {
        let model = TransistorModel::new(
            CouplingConfig::new(0.0, 0.0, 0.0),
            [
                BathConfig::new(QubitLabel::A, 0.2).unwrap(),
                BathConfig::new(QubitLabel::B, 0.1).unwrap(),
                BathConfig::new(QubitLabel::C, 0.02).unwrap(),
            ],
            ZeroFrequencyChannel::Drop,
        )
        .unwrap();
        let mixed = Matrix8::identity().scale(1.0 / 8.0);
        for label in QubitLabel::ALL {
            assert_eq!(max_abs(&dissipator(&model, label, &mixed)), 0.0);
        }
    }

    #[test]
    fn diagonal_states_stay_diagonal() {
        let model = default_model(0.1);
        let mut rho = Matrix8::zeros();
        for i in 0..DIM {
            rho[(i, i)] = C64::new((i + 1) as f64 / 36.0, 0.0);
        }
        let d = master_rhs(&model, &rho);
        for i in 0..DIM {
            for j in 0..DIM {
                if i != j {
                    assert!(d[(i, j)].norm() < 1e-15);
                }
            }
        }
    }

    #[test]
    fn gibbs_state_is_fixed_point_at_equal_temperatures() {
        for policy in [ZeroFrequencyChannel::OhmicLimit, ZeroFrequencyChannel::Drop] {
            for t in [0.1, 0.2, 0.5] {
                let template = ModelTemplate {
                    t_a: t,
                    t_c: t,
                    zero_frequency: policy,
                    ..ModelTemplate::default()
                };
                let model = template.at(t).unwrap();
                let e = model.hamiltonian().energies();
                let z: f64 = e.iter().map(|x| (-x / t).exp()).sum();
                let gibbs = Matrix8::from_fn(|i, j| {
                    if i == j {
                        C64::new((-e[i] / t).exp() / z, 0.0)
                    } else {
                        C64::new(0.0, 0.0)
                    }
                });
                assert!(max_abs(&master_rhs(&model, &gibbs)) <= 1e-10);
            }
        }
    }

    proptest! {
        #![proptest_config(ProptestConfig::with_cases(100))]

        #[test]
        fn dissipators_are_traceless_and_hermitian(
            values in prop::collection::vec(-1.0_f64..1.0, 128),
            t_b in 0.004_f64..0.8,
        ) {
            let rho = density_from(&values);
            let model = default_model(t_b);
            for label in QubitLabel::ALL {
                let d = dissipator(&model, label, &rho);
                prop_assert!(d.trace().norm() <= 1e-12);
                prop_assert!(hermiticity_defect(&d) <= 1e-12);
            }
            let total = master_rhs(&model, &rho);
            prop_assert!(total.trace().norm() <= 1e-12);
            prop_assert!(hermiticity_defect(&total) <= 1e-12);
        }

        #[test]
        fn master_rhs_is_affine_linear(
            v1 in prop::collection::vec(-1.0_f64..1.0, 128),
            v2 in prop::collection::vec(-1.0_f64..1.0, 128),
            a in -2.0_f64..3.0,
        ) {
            let model = default_model(0.13);
            let (r1, r2) = (density_from(&v1), density_from(&v2));
            let b = 1.0 - a;
            let lhs = master_rhs(&model, &(r1.scale(a) + r2.scale(b)));
            let rhs = master_rhs(&model, &r1).scale(a) + master_rhs(&model, &r2).scale(b);
            prop_assert!(max_abs(&(lhs - rhs)) <= 1e-12);
        }
    }
}
