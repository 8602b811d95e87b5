//! Driven qubit under repeated and diffusive weak measurement.
//!
//! - [`measurement`]: Kraus operators, post-selected no-click updates and the
//!   deterministic Bloch drift they converge to.
//! - [`phase`]: the reduced `(θ, p_θ)` Hamiltonian, its critical points and an
//!   energy-conserving path integrator.
//! - [`action`]: action integrals, transition times, Zeno frequencies and
//!   final-state densities.
//! - [`diffusive`]: stochastic trajectories with Wiener readout and the
//!   six-dimensional most-likely-path system.

pub mod action;
pub mod diffusive;
pub mod error;
pub mod linalg;
pub mod measurement;
pub mod phase;
pub mod quadrature;
pub mod rk4;

pub use action::{
    action_closed_form, action_discontinuity, action_quadrature, final_state_density,
    transition_time_sub_zeno, zeno_frequencies, ActionDiscontinuity, ActionValue, DensityPoint,
    ZenoFrequencies,
};
pub use diffusive::{
    ensemble_stats, integrate_mlp, mlp_rhs, sample_trajectory, sme_rhs, stochastic_hamiltonian,
    DiffusiveParams, EnsembleStats, ExtendedState, MlpPath, NoiseKind, TrajectoryPoint,
    WienerStream,
};
pub use error::{Result, ZenoError};
pub use measurement::{
    drift_rhs, kraus_pair, mc_zeno_trajectory, postselected_step, BlochState, DensityMatrix,
    KrausPair, MeasurementParams,
};
pub use phase::{
    cdj_hamiltonian, critical_points, hamilton_rhs, integrate_phase_path, jacobian, p_theta_curve,
    separatrix_energies, stability_exponents, CriticalPointSet, EnergyLevel, PathEnd, PhaseParams,
    PhasePath, PhasePoint, StabilityExponents,
};
