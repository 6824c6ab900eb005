//! Full quantum treatment on a truncated multi-mode Fock space: Liouvillian
//! construction, direct steady states, Monte-Carlo wavefunction trajectories,
//! current expectation values and entanglement negativity.

mod liouvillian;
mod mcwf;
mod meas;
mod ops;
mod space;
mod steady;

pub use liouvillian::{build_liouvillian, Liouvillian};
pub use mcwf::{mcwf_run, McwfConfig, McwfResult};
pub use mcwf::McwfInitial;
pub use meas::{
    current_operator, current_variance, expectation_current, negativity, negativity_lowest,
    partial_transpose, trace_distance, DensityMatrix, QuantumObservables,
};
pub use ops::FockOperator;
pub use space::FockSpace;
pub use steady::{
    steady_state_direct, steady_state_direct_with_cap, steady_state_residual, truncation_check,
    TruncationReport, DEFAULT_DIMENSION_CAP,
};

use thiserror::Error;

#[derive(Debug, Error)]
pub enum FockError {
    #[error("basis truncation must be at least 2, got {0}")]
    BasisTooSmall(usize),
    #[error("mode count must be at least 1, got {0}")]
    NoModes(usize),
    #[error("mode index {mode} out of range for {n_modes} modes")]
    ModeOutOfRange { mode: usize, n_modes: usize },
    #[error("operator dimensions {got} do not match space dimension {expected}")]
    DimensionMismatch { got: usize, expected: usize },
    #[error("spec has {sites} sites but space has {modes} modes")]
    SpecSpaceMismatch { sites: usize, modes: usize },
    #[error("space dimension {dim} exceeds the configured cap {cap}")]
    DimensionCap { dim: usize, cap: usize },
    #[error("operation requires a two-mode space, got {0} modes")]
    NotTwoModes(usize),
    #[error("Liouvillian couples excitation-difference sectors; the sector solver does not apply")]
    SectorStructureViolated,
    #[error("singular block encountered in the steady-state solve (degenerate null space?)")]
    SingularSolve,
    #[error("eigensolver failed: {0}")]
    Eigensolver(String),
    #[error("wavefunction norm underflow at step {step}")]
    NormUnderflow { step: u64 },
    #[error("{0} must be positive")]
    NonPositiveConfig(&'static str),
    #[error(transparent)]
    Model(#[from] crate::model::ModelError),
}
