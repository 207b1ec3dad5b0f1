//! The VQPM iteration loop.
//!
//! Each iteration applies the normalized `(I + U)` step, reads rounded
//! per-qubit marginals, checks for termination, and (in variational mode)
//! locks qubits and rebuilds the next input as a product state. Exact mode
//! keeps the evolved vector and is plain quantum power iteration.

use std::fmt;
use std::io::Write;
use std::str::FromStr;

use serde::{Deserialize, Serialize};

use crate::bitstring::Bitstring;
use crate::error::{Error, Result};
use crate::lock::{decide_locks, LockEvent, LockRegister, ThresholdPolicy};
use crate::phase::{PhaseTable, QubitMarginals, StateVector};

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub enum Mode {
    Exact,
    Variational,
}

impl FromStr for Mode {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "exact" => Ok(Mode::Exact),
            "variational" => Ok(Mode::Variational),
            other => Err(Error::invalid(format!("unknown mode {other:?}"))),
        }
    }
}

impl fmt::Display for Mode {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Mode::Exact => "exact",
            Mode::Variational => "variational",
        })
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct VqpmConfig {
    pub n: usize,
    pub max_iter: usize,
    pub policy: ThresholdPolicy,
    /// Decimal places kept when reading marginals.
    pub precision: u32,
    pub mode: Mode,
    pub success_threshold: f64,
    /// Optimal bitstrings from an oracle; all of them when the minimum is
    /// degenerate.
    pub targets: Option<Vec<Bitstring>>,
    /// Stop as soon as every target has exactly zero probability.
    pub stop_on_elimination: bool,
}

impl VqpmConfig {
    pub fn new(n: usize, policy: ThresholdPolicy) -> Self {
        Self {
            n,
            max_iter: 30,
            policy,
            precision: 3,
            mode: Mode::Variational,
            success_threshold: 0.5,
            targets: None,
            stop_on_elimination: true,
        }
    }

    pub fn validate(&self) -> Result<()> {
        if self.max_iter == 0 {
            return Err(Error::invalid("max_iter must be at least 1"));
        }
        if self.precision == 0 {
            return Err(Error::invalid("precision must be at least 1"));
        }
        if !(self.success_threshold > 0.0 && self.success_threshold <= 1.0) {
            return Err(Error::invalid(format!(
                "success threshold {} outside (0, 1]",
                self.success_threshold
            )));
        }
        if let Some(targets) = &self.targets {
            if targets.is_empty() {
                return Err(Error::invalid("target set is empty"));
            }
            if targets.iter().any(|t| t.len() != self.n) {
                return Err(Error::invalid("target length differs from n"));
            }
        }
        self.policy.validate()
    }

    fn target_probability(&self, state: &StateVector) -> Option<f64> {
        self.targets
            .as_ref()
            .map(|ts| ts.iter().map(|t| state.probability(t.index())).sum())
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum Termination {
    SuccessByProbability,
    SuccessByTarget,
    TargetEliminated,
    MaxIterations,
}

impl fmt::Display for Termination {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Termination::SuccessByProbability => "SuccessByProbability",
            Termination::SuccessByTarget => "SuccessByTarget",
            Termination::TargetEliminated => "TargetEliminated",
            Termination::MaxIterations => "MaxIterations",
        })
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct IterationRecord {
    pub iteration: usize,
    /// Largest basis-state probability after the power step.
    pub p_min: f64,
    pub argmax: usize,
    pub target_probability: Option<f64>,
    pub ancilla_p0: f64,
    pub marginals: QubitMarginals,
    pub lock_events: Vec<LockEvent>,
    pub locks_so_far: usize,
}

#[derive(Clone, Debug, Default, PartialEq)]
pub struct IterationTrace {
    pub records: Vec<IterationRecord>,
}

impl IterationTrace {
    pub fn len(&self) -> usize {
        self.records.len()
    }

    pub fn is_empty(&self) -> bool {
        self.records.is_empty()
    }

    pub fn lock_events(&self) -> impl Iterator<Item = &LockEvent> {
        self.records.iter().flat_map(|r| r.lock_events.iter())
    }

    /// CSV with columns `iteration,p_min,target_prob,ancilla_p0,
    /// locks_so_far,lock_events`; lock events are `q:bit` joined by `;`.
    pub fn write_csv<W: Write>(&self, writer: W) -> Result<()> {
        let mut w = csv::Writer::from_writer(writer);
        w.write_record([
            "iteration",
            "p_min",
            "target_prob",
            "ancilla_p0",
            "locks_so_far",
            "lock_events",
        ])?;
        for r in &self.records {
            let events = r
                .lock_events
                .iter()
                .map(|e| format!("{}:{}", e.qubit, u8::from(e.bit)))
                .collect::<Vec<_>>()
                .join(";");
            w.write_record([
                r.iteration.to_string(),
                r.p_min.to_string(),
                r.target_probability
                    .map(|p| p.to_string())
                    .unwrap_or_default(),
                r.ancilla_p0.to_string(),
                r.locks_so_far.to_string(),
                events,
            ])?;
        }
        w.flush()?;
        Ok(())
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct RunResult {
    pub found: Bitstring,
    pub found_probability: f64,
    pub target_probability: Option<f64>,
    pub hamming_to_target: Option<usize>,
    pub iterations_used: usize,
    pub termination: Termination,
    pub locks: LockRegister,
    /// Locks disagreeing with the closest target.
    pub wrong_locks: Option<usize>,
    pub trace: IterationTrace,
}

/// Number of differing positions.
pub fn hamming_distance(a: &Bitstring, b: &Bitstring) -> Result<usize> {
    a.hamming(b)
}

/// Termination test on a normalized state.
///
/// With targets known: target mass at or above the success threshold is
/// `SuccessByTarget`; exactly zero target mass is `TargetEliminated` (when
/// `stop_on_elimination` is set). Otherwise a basis state at or above the
/// threshold is `SuccessByProbability`.
pub fn check_termination(state: &StateVector, config: &VqpmConfig) -> Option<Termination> {
    if let Some(tp) = config.target_probability(state) {
        if tp >= config.success_threshold {
            return Some(Termination::SuccessByTarget);
        }
        if config.stop_on_elimination && tp == 0.0 {
            return Some(Termination::TargetEliminated);
        }
    }
    let (_, p_max) = state.argmax();
    (p_max >= config.success_threshold).then_some(Termination::SuccessByProbability)
}

fn closest(targets: &[Bitstring], f: impl Fn(&Bitstring) -> usize) -> usize {
    targets.iter().map(f).min().unwrap_or(0)
}

/// Runs VQPM from the uniform state.
pub fn run(table: &PhaseTable, config: &VqpmConfig) -> Result<RunResult> {
    config.validate()?;
    let n = config.n;
    if table.n() != n {
        return Err(Error::invalid(format!(
            "phase table has {} qubits, config has {n}",
            table.n()
        )));
    }

    let mut state = StateVector::uniform(n);
    let mut locks = LockRegister::new(n);
    let mut trace = IterationTrace::default();
    let mut termination = Termination::MaxIterations;
    let mut iterations_used = 0;
    let mut found = (0, 0.0);
    let mut target_probability = None;

    for k in 1..=config.max_iter {
        iterations_used = k;
        let ancilla_p0 = state.apply_power_step(table)?;
        let marginals = state.qubit_marginals(config.precision)?;
        found = state.argmax();
        target_probability = config.target_probability(&state);
        let mut record = IterationRecord {
            iteration: k,
            p_min: found.1,
            argmax: found.0,
            target_probability,
            ancilla_p0,
            marginals,
            lock_events: Vec::new(),
            locks_so_far: locks.locked_count(),
        };

        if let Some(reason) = check_termination(&state, config) {
            trace.records.push(record);
            termination = reason;
            break;
        }
        if config.mode == Mode::Exact {
            trace.records.push(record);
            continue;
        }

        let (next_locks, events) = decide_locks(&record.marginals, &config.policy, &locks, k, n)?;
        locks = next_locks;
        record.lock_events = events;
        record.locks_so_far = locks.locked_count();
        state = StateVector::product_from_marginals(&record.marginals, &locks)?;
        trace.records.push(record);

        // A lock against every target removes it from the rebuilt state for good.
        if config.stop_on_elimination && config.target_probability(&state) == Some(0.0) {
            termination = Termination::TargetEliminated;
            found = state.argmax();
            target_probability = Some(0.0);
            break;
        }
    }

    let found_bits = Bitstring::from_index(found.0, n);
    let (hamming_to_target, wrong_locks) = match &config.targets {
        Some(ts) => (
            Some(closest(ts, |t| found_bits.hamming(t).unwrap_or(n))),
            Some(closest(ts, |t| locks.conflicts_with(t).len())),
        ),
        None => (None, None),
    };
    Ok(RunResult {
        found: found_bits,
        found_probability: found.1,
        target_probability,
        hamming_to_target,
        iterations_used,
        termination,
        locks,
        wrong_locks,
        trace,
    })
}
