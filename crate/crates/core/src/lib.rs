//! Exact simulation and estimation bounds for the axis-angle metrology
//! protocol: an n-qubit GHZ state evolves under a global drive, collective
//! dephasing (Markovian or Lorentzian), and independent dephasing, all along
//! a tilted axis; the tilt angle is estimated from the GHZ survival
//! probability or from the quantum Fisher information.
//!
//! The dynamics are solved exactly in the collective angular-momentum
//! (irrep) decomposition, so system sizes of hundreds of qubits are cheap.
//! A dense brute-force solver on the full 2^n space (n ≤ 5) backs every
//! closed form with an independent oracle.
//!
//! Modules, bottom-up:
//!
//! * [`algebra`] — degeneracies, tail sums, and operator matrix elements of
//!   the irrep decomposition.
//! * [`overlaps`] — overlap amplitudes of the GHZ state with the tilted
//!   Dicke basis, with analytic angle derivatives, in log-domain arithmetic.
//! * [`evolution`] — the exact propagator: collective phase/decay weights,
//!   the sector-mixing recurrence for independent dephasing, block states,
//!   and the survival probability with its short-time expansion.
//! * [`estimation`] — Fisher information, Cramér–Rao uncertainty bounds,
//!   evolution-time optimization, and scaling-law fits.
//! * [`oracle`] — dense 2^n reference solver.
//! * [`experiments`] — scaling-experiment grids shared by the CLI and the
//!   acceptance suite.

pub mod algebra;
pub mod error;
pub mod estimation;
pub mod evolution;
pub mod experiments;
pub mod logspace;
pub mod oracle;
pub mod overlaps;

pub use algebra::{Degeneracy, IrrepTable, MixingCoefficients, SpinJOperators};
pub use error::{Error, Result};
pub use estimation::{
    classical_fisher_ghz, fit_scaling, optimize_time, quantum_crb, quantum_fisher,
    survival_derivative, uncertainty_ghz, OptimizeOutcome, ProtocolBudget, ScalingFit, ScanPoint,
    Scheme, UncertaintyResult,
};
pub use evolution::{
    collective_weight, evolve, short_time_probability, survival_probability, AkStream, BlockState,
    CollectiveModel, NoiseParams, SurvivalSolver, TopSectorKernel,
};
pub use oracle::{dense_evolve, dense_evolve_rk, dense_observables, dense_qfi, dense_survival, DenseState};
pub use overlaps::{Angles, GhzOverlaps, Moments};
