//! Simulation core for the three-qubit quantum thermal transistor.
//!
//! Three two-level systems `A`, `B`, `C` with zero bare splitting interact
//! through `σz⊗σz` couplings; each qubit is attached to its own Ohmic bosonic
//! bath. The crate builds the global (eigenoperator) Lindblad generator,
//! integrates it, finds steady states, and evaluates heat currents and the
//! dynamic amplification factors `α_A`, `α_C` with respect to the base
//! temperature `T_B`, both at steady state and at finite times.
//!
//! Module map:
//!
//! * [`model`]: Hamiltonian, Bohr spectrum, jump operators, master equation.
//! * [`dynamics`]: density matrices, Liouvillian, RK4 evolution, steady states.
//! * [`observables`]: heat currents, five-point derivatives, amplification.
//! * [`states`]: paradigm states, fixed example states, random classes.

pub mod dynamics;
pub mod linalg;
pub mod model;
pub mod observables;
pub mod states;

pub use dynamics::{
    evolve, evolve_with, steady_state, steady_state_from, DensityMatrix, DynamicsError, IntegratorConfig,
    Liouvillian, SampledPropagator, StationarySpace, Trajectory,
};
pub use model::{
    bohr_spectrum, bose_occupation, build_hamiltonian, dissipator, jump_operators, master_rhs,
    BathConfig, CouplingConfig, Hamiltonian, JumpOperator, ModelError, ModelTemplate, QubitLabel,
    TransistorModel, ZeroFrequencyChannel,
};
pub use observables::{
    alpha_gap, amplification, five_point_derivative, heat_current, heat_currents,
    locate_denominator_zeros, steady_djb, transient_identity_residual, AmplificationResult,
    HeatCurrents, IdentityResidual, ObservableError, PreparedStencil, Regime, StencilConfig,
    StencilModels,
};
pub use states::{
    density_of, example_state, paradigm_state, sample_random, ExampleState, ParadigmState,
    PureState, Seed, StateClass, StateError, StateSpec,
};
