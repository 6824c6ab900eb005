//! Simulation and analysis library for energy transport through networks of
//! coupled oscillators driven by saturable gain and loss terminals.
//!
//! The crate is organised around a few layers:
//!
//! * [`model`] — network description (graph, couplings, baths, terminals) and
//!   the linearised drift matrix.
//! * [`linear`] — spectral analysis of the linearised network and the
//!   stalled-transport criterion.
//! * [`sde`] — Euler–Maruyama integration of the semiclassical amplitude
//!   equations and ensemble transport statistics.
//! * [`analytic`] — closed-form steady-state amplitudes, currents and
//!   transition points for chains.
//! * [`probe`] — noise-free steady-state finding and the relaxation-time
//!   measurement protocol.
//! * [`fock`] — full quantum treatment on a truncated Fock space: Liouvillian
//!   construction, direct steady states, Monte-Carlo wavefunction trajectories
//!   and entanglement negativity.
//!
//! All rates are expressed in units of the nearest-neighbour coupling `g`
//! (stored per edge; `g = 1` by default), times in units of `1/g`, and site
//! indices are zero-based throughout.
//!
//! Trajectory ensembles and quantum trajectories run on a rayon worker pool
//! when the `parallel` feature (default) is enabled; disabling it leaves a
//! purely sequential build. Results are bitwise identical either way because
//! every reduction happens in a fixed trajectory order.

pub mod analytic;
pub mod exec;
pub mod fock;
pub mod linear;
pub mod model;
pub mod probe;
pub mod sde;

pub use exec::ExecMode;
pub use model::{ActiveTerminal, BathSpec, NetworkSpec, SaturationLaw, TerminalKind};
