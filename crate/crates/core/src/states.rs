//! Initial states: paradigm kets, fixed example states with tabulated
//! coefficients, and seeded random samples from entanglement classes.
//!
//! Amplitudes are indexed `4a + 2b + c` for `|abc⟩`, qubit `A` most
//! significant, matching [`crate::model`].

use std::fmt;
use std::str::FromStr;

use nalgebra::DMatrix;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha20Rng;
use rand_distr::StandardNormal;
use thiserror::Error;

use crate::dynamics::DensityMatrix;
use crate::linalg::{Matrix8, C64, DIM};
use crate::model::QubitLabel;

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum StateError {
    #[error("state has zero norm")]
    ZeroNorm,
    #[error("unknown paradigm state {0:?} (expected one of ghz, w, k000, k001, k011)")]
    UnknownParadigm(String),
    #[error("unknown example state {0:?}")]
    UnknownExample(String),
    #[error("unknown state class {0:?}")]
    UnknownClass(String),
    #[error("malformed state spec {0:?}")]
    MalformedSpec(String),
}

/// Unit-norm three-qubit ket.
#[derive(Debug, Clone, PartialEq)]
pub struct PureState {
    amplitudes: [C64; DIM],
}

impl PureState {
    /// Normalizes `amplitudes`.
    pub fn new(amplitudes: [C64; DIM]) -> Result<Self, StateError> {
        let norm = amplitudes.iter().map(|z| z.norm_sqr()).sum::<f64>().sqrt();
        if !(norm.is_finite() && norm > 0.0) {
            return Err(StateError::ZeroNorm);
        }
        Ok(Self {
            amplitudes: amplitudes.map(|z| z / norm),
        })
    }

    fn basis(index: usize) -> Self {
        let mut amplitudes = [C64::new(0.0, 0.0); DIM];
        amplitudes[index] = C64::new(1.0, 0.0);
        Self { amplitudes }
    }

    pub fn amplitudes(&self) -> &[C64; DIM] {
        &self.amplitudes
    }

    pub fn norm(&self) -> f64 {
        self.amplitudes.iter().map(|z| z.norm_sqr()).sum::<f64>().sqrt()
    }

    pub fn projector(&self) -> Matrix8 {
        Matrix8::from_fn(|i, j| self.amplitudes[i] * self.amplitudes[j].conj())
    }

    /// Reduced density matrix on `keep` (in the given order).
    pub fn reduced(&self, keep: &[QubitLabel]) -> DMatrix<C64> {
        let traced: Vec<QubitLabel> = QubitLabel::ALL
            .into_iter()
            .filter(|q| !keep.contains(q))
            .collect();
        let compose = |kept_bits: usize, traced_bits: usize| -> usize {
            let mut index = 0;
            for (k, q) in keep.iter().enumerate() {
                if kept_bits >> (keep.len() - 1 - k) & 1 == 1 {
                    index |= q.mask();
                }
            }
            for (k, q) in traced.iter().enumerate() {
                if traced_bits >> (traced.len() - 1 - k) & 1 == 1 {
                    index |= q.mask();
                }
            }
            index
        };
        let n = 1 << keep.len();
        DMatrix::from_fn(n, n, |i, j| {
            (0..1 << traced.len())
                .map(|t| self.amplitudes[compose(i, t)] * self.amplitudes[compose(j, t)].conj())
                .sum()
        })
    }

    /// `Tr ρ_keep²`.
    pub fn marginal_purity(&self, keep: &[QubitLabel]) -> f64 {
        let r = self.reduced(keep);
        (&r * &r).trace().re
    }
}

pub fn density_of(state: &PureState) -> DensityMatrix {
    DensityMatrix::new_unchecked(state.projector())
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum ParadigmState {
    Ghz,
    W,
    K000,
    K001,
    K011,
}

impl ParadigmState {
    pub const ALL: [ParadigmState; 5] = [
        ParadigmState::Ghz,
        ParadigmState::W,
        ParadigmState::K000,
        ParadigmState::K001,
        ParadigmState::K011,
    ];

    pub fn name(self) -> &'static str {
        match self {
            ParadigmState::Ghz => "ghz",
            ParadigmState::W => "w",
            ParadigmState::K000 => "k000",
            ParadigmState::K001 => "k001",
            ParadigmState::K011 => "k011",
        }
    }
}

impl fmt::Display for ParadigmState {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for ParadigmState {
    type Err = StateError;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s.to_ascii_lowercase().as_str() {
            "ghz" => Ok(ParadigmState::Ghz),
            "w" => Ok(ParadigmState::W),
            "k000" | "000" => Ok(ParadigmState::K000),
            "k001" | "001" => Ok(ParadigmState::K001),
            "k011" | "011" => Ok(ParadigmState::K011),
            _ => Err(StateError::UnknownParadigm(s.to_string())),
        }
    }
}

pub fn paradigm_state(which: ParadigmState) -> PureState {
    let one = C64::new(1.0, 0.0);
    match which {
        ParadigmState::Ghz => {
            let mut a = [C64::new(0.0, 0.0); DIM];
            a[0] = one;
            a[7] = one;
            PureState::new(a).expect("nonzero")
        }
        ParadigmState::W => {
            let mut a = [C64::new(0.0, 0.0); DIM];
            a[1] = one;
            a[2] = one;
            a[4] = one;
            PureState::new(a).expect("nonzero")
        }
        ParadigmState::K000 => PureState::basis(0),
        ParadigmState::K001 => PureState::basis(1),
        ParadigmState::K011 => PureState::basis(3),
    }
}

/// Four fixed states whose coefficients are tabulated to four decimals.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum ExampleState {
    /// Generic state with all eight amplitudes.
    Ghz,
    /// Biseparable across the AB:C cut.
    BiseparableAbC,
    /// `a|001⟩ + b|010⟩ + c|100⟩ + d|000⟩`.
    W,
    /// Threefold product.
    Product,
}

impl ExampleState {
    pub const ALL: [ExampleState; 4] = [
        ExampleState::Ghz,
        ExampleState::BiseparableAbC,
        ExampleState::W,
        ExampleState::Product,
    ];

    pub fn name(self) -> &'static str {
        match self {
            ExampleState::Ghz => "ghz-prime",
            ExampleState::BiseparableAbC => "ab:c-prime",
            ExampleState::W => "w-prime",
            ExampleState::Product => "product-prime",
        }
    }
}

impl fmt::Display for ExampleState {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for ExampleState {
    type Err = StateError;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        let lower = s.to_ascii_lowercase();
        ExampleState::ALL
            .into_iter()
            .find(|e| e.name() == lower)
            .ok_or_else(|| StateError::UnknownExample(s.to_string()))
    }
}

const fn c(re: f64, im: f64) -> C64 {
    C64::new(re, im)
}

fn kron(a: &[C64], b: &[C64]) -> Vec<C64> {
    a.iter()
        .flat_map(|x| b.iter().map(move |y| x * y))
        .collect()
}

fn from_vec(v: Vec<C64>) -> PureState {
    let amplitudes: [C64; DIM] = v.try_into().expect("eight amplitudes");
    PureState::new(amplitudes).expect("nonzero")
}

pub fn example_state(which: ExampleState) -> PureState {
    match which {
        ExampleState::Ghz => {
            let (a, b, cc, d) = (
                c(-0.5446, -0.5546),
                c(-0.6614, -0.1799),
                c(0.4376, 0.4659),
                c(-2.2000, 0.3749),
            );
            let (a1, b1, c1, d1) = (
                c(-1.0505, 0.2633),
                c(-0.4266, -0.4274),
                c(-0.9067, 0.9039),
                c(0.1572, 2.3707),
            );
            // a|000⟩ + b|001⟩ + c|010⟩ + d|100⟩ + a1|011⟩ + b1|110⟩ + c1|101⟩ + d1|111⟩
            PureState::new([a, b, cc, a1, d, c1, b1, d1]).expect("nonzero")
        }
        ExampleState::BiseparableAbC => {
            let ab = [
                c(-0.2506, -1.2750),
                c(0.4573, 0.0094),
                c(1.1436, 0.5672),
                c(-0.9806, 1.2475),
            ];
            let cq = [c(-0.7718, 0.4604), c(0.2562, -0.3517)];
            from_vec(kron(&ab, &cq))
        }
        ExampleState::W => {
            let (a, b, cc, d) = (
                c(-0.6549, -1.5778),
                c(0.1125, -0.4555),
                c(0.8575, -0.4032),
                c(-0.5980, -1.0251),
            );
            let zero = c(0.0, 0.0);
            PureState::new([d, a, b, zero, cc, zero, zero, zero]).expect("nonzero")
        }
        ExampleState::Product => {
            let qa = [c(0.7938, -0.4108), c(1.6511, 0.8510)];
            let qb = [c(-0.5692, 1.3391), c(-0.5305, -0.3410)];
            let qc = [c(-2.4324, -1.0312), c(-1.1394, -0.7807)];
            from_vec(kron(&kron(&qa, &qb), &qc))
        }
    }
}

/// Families of random pure states.
///
/// The W variants put four complex Gaussian coefficients on the support
/// `{|000⟩, |001⟩, |010⟩, |100⟩}` written in the eigenbasis of `σz`, `σx` or
/// `σy` on every qubit. The biseparable variants take a Haar qubit and a Haar
/// two-qubit state across the named cut.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum StateClass {
    Ghz,
    WZ,
    WX,
    WY,
    /// A:BC
    BiseparableA,
    /// AB:C
    BiseparableC,
    Product,
    /// B:AC
    BiseparableB,
}

impl StateClass {
    pub const ALL: [StateClass; 8] = [
        StateClass::Ghz,
        StateClass::WZ,
        StateClass::WX,
        StateClass::WY,
        StateClass::BiseparableA,
        StateClass::BiseparableC,
        StateClass::Product,
        StateClass::BiseparableB,
    ];

    /// The seven classes of the standard 350-state scan (B:AC is not part
    /// of it).
    pub const SCANNED: [StateClass; 7] = [
        StateClass::Ghz,
        StateClass::WZ,
        StateClass::WX,
        StateClass::WY,
        StateClass::BiseparableA,
        StateClass::BiseparableC,
        StateClass::Product,
    ];

    pub fn name(self) -> &'static str {
        match self {
            StateClass::Ghz => "ghz",
            StateClass::WZ => "w-z",
            StateClass::WX => "w-x",
            StateClass::WY => "w-y",
            StateClass::BiseparableA => "a:bc",
            StateClass::BiseparableC => "ab:c",
            StateClass::Product => "product",
            StateClass::BiseparableB => "b:ac",
        }
    }

    /// ChaCha stream used for this class, so classes sharing a seed draw
    /// independent numbers.
    pub fn stream(self) -> u64 {
        StateClass::ALL
            .iter()
            .position(|c| *c == self)
            .expect("listed") as u64
    }
}

impl fmt::Display for StateClass {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for StateClass {
    type Err = StateError;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        let lower = s.to_ascii_lowercase();
        StateClass::ALL
            .into_iter()
            .find(|c| c.name() == lower)
            .ok_or_else(|| StateError::UnknownClass(s.to_string()))
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Default)]
pub struct Seed(pub u64);

impl From<u64> for Seed {
    fn from(value: u64) -> Self {
        Seed(value)
    }
}

impl fmt::Display for Seed {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}", self.0)
    }
}

fn gaussian_vector(rng: &mut ChaCha20Rng, len: usize) -> Vec<C64> {
    (0..len)
        .map(|_| {
            let re: f64 = rng.sample(StandardNormal);
            let im: f64 = rng.sample(StandardNormal);
            C64::new(re, im)
        })
        .collect()
}

/// Columns are the images of `|0⟩` and `|1⟩`.
fn local_basis(class: StateClass) -> [[C64; 2]; 2] {
    let s = std::f64::consts::FRAC_1_SQRT_2;
    match class {
        StateClass::WX => [[c(s, 0.0), c(s, 0.0)], [c(s, 0.0), c(-s, 0.0)]],
        StateClass::WY => [[c(s, 0.0), c(s, 0.0)], [c(0.0, s), c(0.0, -s)]],
        _ => [[c(1.0, 0.0), c(0.0, 0.0)], [c(0.0, 0.0), c(1.0, 0.0)]],
    }
}

fn w_class(rng: &mut ChaCha20Rng, class: StateClass) -> Vec<C64> {
    let g = gaussian_vector(rng, 4);
    let mut support = [C64::new(0.0, 0.0); DIM];
    // d|000⟩ + a|001⟩ + b|010⟩ + c|100⟩
    support[0] = g[3];
    support[1] = g[0];
    support[2] = g[1];
    support[4] = g[2];
    let u = local_basis(class);
    let mut out = vec![C64::new(0.0, 0.0); DIM];
    for (src, amp) in support.iter().enumerate() {
        if amp.norm_sqr() == 0.0 {
            continue;
        }
        let bits = [(src >> 2) & 1, (src >> 1) & 1, src & 1];
        for (dst, slot) in out.iter_mut().enumerate() {
            let dst_bits = [(dst >> 2) & 1, (dst >> 1) & 1, dst & 1];
            let mut w = *amp;
            for q in 0..3 {
                w *= u[dst_bits[q]][bits[q]];
            }
            *slot += w;
        }
    }
    out
}

pub fn sample_random(class: StateClass, seed: Seed) -> PureState {
    let mut rng = ChaCha20Rng::seed_from_u64(seed.0);
    rng.set_stream(class.stream());
    let amplitudes = match class {
        StateClass::Ghz => gaussian_vector(&mut rng, DIM),
        StateClass::WZ | StateClass::WX | StateClass::WY => w_class(&mut rng, class),
        StateClass::BiseparableA => {
            let a = gaussian_vector(&mut rng, 2);
            let bc = gaussian_vector(&mut rng, 4);
            kron(&a, &bc)
        }
        StateClass::BiseparableC => {
            let ab = gaussian_vector(&mut rng, 4);
            let cq = gaussian_vector(&mut rng, 2);
            kron(&ab, &cq)
        }
        StateClass::BiseparableB => {
            let b = gaussian_vector(&mut rng, 2);
            let ac = gaussian_vector(&mut rng, 4);
            let mut out = vec![C64::new(0.0, 0.0); DIM];
            for (index, slot) in out.iter_mut().enumerate() {
                let (ia, ib, ic) = ((index >> 2) & 1, (index >> 1) & 1, index & 1);
                *slot = b[ib] * ac[2 * ia + ic];
            }
            out
        }
        StateClass::Product => {
            let a = gaussian_vector(&mut rng, 2);
            let b = gaussian_vector(&mut rng, 2);
            let cq = gaussian_vector(&mut rng, 2);
            kron(&kron(&a, &b), &cq)
        }
    };
    from_vec(amplitudes)
}

/// Initial-state description used by sweeps.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum StateSpec {
    Paradigm(ParadigmState),
    Example(ExampleState),
    Random { class: StateClass, seed: Seed },
}

impl StateSpec {
    /// Stable identifier; [`StateSpec::from_str`] inverts it.
    pub fn id(&self) -> String {
        match self {
            StateSpec::Paradigm(p) => p.name().to_string(),
            StateSpec::Example(e) => e.name().to_string(),
            StateSpec::Random { class, seed } => format!("{}/{}", class.name(), seed.0),
        }
    }

    /// Value of the `class` column.
    pub fn class_name(&self) -> &'static str {
        match self {
            StateSpec::Paradigm(_) => "paradigm",
            StateSpec::Example(_) => "example",
            StateSpec::Random { class, .. } => class.name(),
        }
    }

    pub fn seed(&self) -> Option<Seed> {
        match self {
            StateSpec::Random { seed, .. } => Some(*seed),
            _ => None,
        }
    }

    pub fn state(&self) -> PureState {
        match self {
            StateSpec::Paradigm(p) => paradigm_state(*p),
            StateSpec::Example(e) => example_state(*e),
            StateSpec::Random { class, seed } => sample_random(*class, *seed),
        }
    }

    pub fn density(&self) -> DensityMatrix {
        density_of(&self.state())
    }
}

impl fmt::Display for StateSpec {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&self.id())
    }
}

impl FromStr for StateSpec {
    type Err = StateError;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        if let Some((class, seed)) = s.split_once('/') {
            let class = class.parse()?;
            let seed = seed
                .parse::<u64>()
                .map_err(|_| StateError::MalformedSpec(s.to_string()))?;
            return Ok(StateSpec::Random {
                class,
                seed: Seed(seed),
            });
        }
        if let Ok(p) = s.parse::<ParadigmState>() {
            return Ok(StateSpec::Paradigm(p));
        }
        if let Ok(e) = s.parse::<ExampleState>() {
            return Ok(StateSpec::Example(e));
        }
        Err(StateError::MalformedSpec(s.to_string()))
    }
}
