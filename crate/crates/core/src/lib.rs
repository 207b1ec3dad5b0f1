//! Classical state-vector simulation of the variational quantum power method
//! (VQPM) for QUBO problems.
//!
//! The crate is organised bottom-up:
//!
//! - [`qubo`]: instances, energies, influence scores and a brute-force oracle.
//! - [`phase`]: phase encoding of energies, the normalized `(I + U)` power
//!   step over a dense state vector, marginals, collapse and product-state
//!   reconstruction, plus closed-form spectral analytics.
//! - [`lock`]: lock thresholds (fixed, decaying, Hoeffding, influence
//!   weighted, bit significance) and the lock decision itself.
//! - [`engine`]: the VQPM iteration loop with termination checks and traces.
//! - [`qaoa`]: a QAOA baseline on the same phase encoding.
//! - [`harness`]: seeded batch experiments, summaries and CSV output.
//!
//! Basis-state indices are little-endian: variable `i` is bit `i` of the
//! index. Textual bitstrings print variable 0 leftmost.

pub mod bitstring;
pub mod engine;
pub mod error;
pub mod harness;
pub mod lock;
pub mod phase;
pub mod qaoa;
pub mod qubo;
mod simplex;

pub use bitstring::Bitstring;
pub use engine::{
    check_termination, hamming_distance, run, IterationRecord, IterationTrace, Mode, RunResult,
    Termination, VqpmConfig,
};
pub use error::{Error, Result};
pub use lock::{
    decide_locks, delta_schedule, hoeffding_epsilon, threshold_for, DecayLaw, LockEvent,
    LockRegister, LockStatus, PolicySpec, ThresholdPolicy,
};
pub use phase::{PhaseTable, QubitMarginals, StateVector};
pub use qubo::{
    brute_force_solve, brute_force_solve_capped, EnergyBounds, InfluenceScores, OracleResult,
    QuboInstance,
};
