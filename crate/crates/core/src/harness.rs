//! Seeded batch experiments over random QUBO ensembles.
//!
//! Every trial's instance seed is a fixed hash of `(base_seed, n, trial)`,
//! so records do not depend on which other trials run, in what order, or
//! on how many threads. Output is sorted by `(n, trial)`.

use std::collections::BTreeMap;
use std::io::{Read, Write};
use std::time::Instant;

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::bitstring::Bitstring;
use crate::engine::{run, Mode, RunResult, Termination, VqpmConfig};
use crate::error::{Error, Result};
use crate::lock::PolicySpec;
use crate::phase::PhaseTable;
use crate::qaoa::{self, OptimizerConfig};
use crate::qubo::{brute_force_solve, QuboInstance};

/// Environment variable capping worker threads.
pub const THREADS_ENV: &str = "VQPM_THREADS";

/// SplitMix64 finalizer.
pub fn splitmix64(mut z: u64) -> u64 {
    z = z.wrapping_add(0x9E37_79B9_7F4A_7C15);
    z = (z ^ (z >> 30)).wrapping_mul(0xBF58_476D_1CE4_E5B9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94D0_49BB_1331_11EB);
    z ^ (z >> 31)
}

/// `splitmix64(splitmix64(splitmix64(base) ^ n) ^ trial)`.
pub fn trial_seed(base_seed: u64, n: usize, trial: usize) -> u64 {
    splitmix64(splitmix64(splitmix64(base_seed) ^ n as u64) ^ trial as u64)
}

/// Seed for the QAOA optimizer of a trial, decorrelated from the instance seed.
pub fn qaoa_seed(trial_seed: u64) -> u64 {
    splitmix64(trial_seed ^ 0x5141_4F41)
}

#[derive(Clone, Debug, PartialEq)]
pub struct QaoaSettings {
    pub p: usize,
    /// `seed` is replaced per trial by [`qaoa_seed`].
    pub optimizer: OptimizerConfig,
    /// Fill the wall-time column. Off by default so reruns are byte-identical.
    pub record_wall_time: bool,
}

#[derive(Clone, Debug, PartialEq)]
pub struct ExperimentSpec {
    pub n_values: Vec<usize>,
    pub trials_per_n: usize,
    pub base_seed: u64,
    pub coeff_range: (f64, f64),
    pub policy: PolicySpec,
    pub max_iter: usize,
    pub precision: u32,
    pub mode: Mode,
    pub success_threshold: f64,
    pub stop_on_elimination: bool,
    /// Solve every instance exhaustively to supply targets.
    pub use_oracle: bool,
    pub qaoa: Option<QaoaSettings>,
    pub threads: Option<usize>,
}

impl Default for ExperimentSpec {
    fn default() -> Self {
        Self {
            n_values: vec![15],
            trials_per_n: 100,
            base_seed: 42,
            coeff_range: (-1.0, 1.0),
            policy: PolicySpec::Fixed(0.01),
            max_iter: 30,
            precision: 3,
            mode: Mode::Variational,
            success_threshold: 0.5,
            stop_on_elimination: true,
            use_oracle: true,
            qaoa: None,
            threads: None,
        }
    }
}

impl ExperimentSpec {
    pub fn validate(&self) -> Result<()> {
        if self.n_values.is_empty() {
            return Err(Error::invalid("no problem sizes given"));
        }
        if self.trials_per_n == 0 {
            return Err(Error::invalid("trials_per_n must be at least 1"));
        }
        if self.n_values.contains(&0) {
            return Err(Error::invalid("problem size 0"));
        }
        let cap = if self.use_oracle {
            crate::qubo::DEFAULT_ORACLE_CAP
        } else {
            crate::qubo::DEFAULT_DENSE_CAP
        };
        if let Some(n) = self.n_values.iter().find(|&&n| n > cap) {
            return Err(Error::ResourceLimit(format!(
                "n = {n} exceeds the cap of {cap}"
            )));
        }
        Ok(())
    }

    pub fn instance(&self, n: usize, trial: usize) -> Result<(u64, QuboInstance)> {
        let seed = trial_seed(self.base_seed, n, trial);
        Ok((seed, QuboInstance::random(n, seed, self.coeff_range)?))
    }

    pub fn engine_config(
        &self,
        instance: &QuboInstance,
        targets: Option<Vec<Bitstring>>,
    ) -> Result<VqpmConfig> {
        Ok(VqpmConfig {
            n: instance.n(),
            max_iter: self.max_iter,
            policy: self.policy.resolve(instance, self.max_iter)?,
            precision: self.precision,
            mode: self.mode,
            success_threshold: self.success_threshold,
            targets,
            stop_on_elimination: self.stop_on_elimination,
        })
    }

    fn trial_indices(&self) -> Vec<(usize, usize)> {
        let mut ns = self.n_values.clone();
        ns.sort_unstable();
        ns.dedup();
        ns.iter()
            .flat_map(|&n| (0..self.trials_per_n).map(move |t| (n, t)))
            .collect()
    }

    fn in_pool<T: Send>(&self, job: impl FnOnce() -> T + Send) -> Result<T> {
        let threads = self.threads.or_else(|| {
            std::env::var(THREADS_ENV)
                .ok()
                .and_then(|v| v.parse().ok())
                .filter(|&t: &usize| t > 0)
        });
        match threads {
            Some(t) => rayon::ThreadPoolBuilder::new()
                .num_threads(t)
                .build()
                .map(|pool| pool.install(job))
                .map_err(|e| Error::ResourceLimit(format!("thread pool: {e}"))),
            None => Ok(job()),
        }
    }
}

fn join_bits(bits: &[Bitstring]) -> String {
    bits.iter()
        .map(|b| b.to_string())
        .collect::<Vec<_>>()
        .join("|")
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct TrialRecord {
    pub n: usize,
    pub trial: usize,
    pub seed: u64,
    pub policy: String,
    pub precision: u32,
    /// Gap between the two lowest energies (energy units).
    pub eigengap: Option<f64>,
    pub termination: Termination,
    pub found: String,
    /// Optimal bitstrings joined by `|`.
    pub target: Option<String>,
    pub found_probability: f64,
    pub target_probability: Option<f64>,
    pub hamming_to_target: Option<usize>,
    pub iterations_used: usize,
    pub lock_events: usize,
    pub wrong_locks: Option<usize>,
}

/// A finished trial with its full engine output.
#[derive(Clone, Debug)]
pub struct TrialOutcome {
    pub record: TrialRecord,
    pub result: RunResult,
}

/// Generates, solves and runs one trial.
pub fn run_trial(spec: &ExperimentSpec, n: usize, trial: usize) -> Result<TrialOutcome> {
    let (seed, instance) = spec.instance(n, trial)?;
    let oracle = if spec.use_oracle {
        Some(brute_force_solve(&instance)?)
    } else {
        None
    };
    let table = PhaseTable::from_instance(&instance)?;
    let config = spec.engine_config(&instance, oracle.as_ref().map(|o| o.argmin.clone()))?;
    let result = run(&table, &config)?;
    let record = TrialRecord {
        n,
        trial,
        seed,
        policy: spec.policy.to_string(),
        precision: spec.precision,
        eigengap: oracle.as_ref().map(|o| o.eigengap),
        termination: result.termination,
        found: result.found.to_string(),
        target: oracle.as_ref().map(|o| join_bits(&o.argmin)),
        found_probability: result.found_probability,
        target_probability: result.target_probability,
        hamming_to_target: result.hamming_to_target,
        iterations_used: result.iterations_used,
        lock_events: result.trace.lock_events().count(),
        wrong_locks: result.wrong_locks,
    };
    Ok(TrialOutcome { record, result })
}

/// All trials with their engine results, sorted by `(n, trial)`.
pub fn run_trials(spec: &ExperimentSpec) -> Result<Vec<TrialOutcome>> {
    spec.validate()?;
    let indices = spec.trial_indices();
    spec.in_pool(|| {
        indices
            .par_iter()
            .map(|&(n, t)| run_trial(spec, n, t))
            .collect::<Result<Vec<_>>>()
    })?
}

pub fn run_batch(spec: &ExperimentSpec) -> Result<Vec<TrialRecord>> {
    Ok(run_trials(spec)?.into_iter().map(|o| o.record).collect())
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct SizeSummary {
    pub n: usize,
    pub trials: usize,
    pub mean_found_probability: f64,
    pub mean_target_probability: Option<f64>,
    pub mean_hamming: Option<f64>,
    /// Share of trials whose found bitstring is optimal (Hamming distance 0).
    pub fraction_optimal: Option<f64>,
    pub mean_iterations: f64,
    pub mean_lock_events: f64,
}

#[derive(Clone, Debug, PartialEq)]
pub struct SummaryStats {
    pub by_n: BTreeMap<usize, SizeSummary>,
}

fn mean(values: impl Iterator<Item = f64>) -> f64 {
    let (sum, count) = values.fold((0.0, 0usize), |(s, c), v| (s + v, c + 1));
    sum / count as f64
}

fn mean_opt(values: impl Iterator<Item = Option<f64>>) -> Option<f64> {
    values
        .collect::<Option<Vec<_>>>()
        .map(|v| mean(v.into_iter()))
}

/// Per-size arithmetic means, accumulated in record order.
pub fn summarize(records: &[TrialRecord]) -> Result<SummaryStats> {
    if records.is_empty() {
        return Err(Error::invalid("no records to summarize"));
    }
    let mut groups: BTreeMap<usize, Vec<&TrialRecord>> = BTreeMap::new();
    for r in records {
        groups.entry(r.n).or_default().push(r);
    }
    let by_n = groups
        .into_iter()
        .map(|(n, rs)| {
            let s = SizeSummary {
                n,
                trials: rs.len(),
                mean_found_probability: mean(rs.iter().map(|r| r.found_probability)),
                mean_target_probability: mean_opt(rs.iter().map(|r| r.target_probability)),
                mean_hamming: mean_opt(rs.iter().map(|r| r.hamming_to_target.map(|h| h as f64))),
                fraction_optimal: mean_opt(
                    rs.iter()
                        .map(|r| r.hamming_to_target.map(|h| if h == 0 { 1.0 } else { 0.0 })),
                ),
                mean_iterations: mean(rs.iter().map(|r| r.iterations_used as f64)),
                mean_lock_events: mean(rs.iter().map(|r| r.lock_events as f64)),
            };
            (n, s)
        })
        .collect();
    Ok(SummaryStats { by_n })
}

impl SummaryStats {
    /// Fixed-width text table.
    pub fn to_table(&self) -> String {
        let fmt_opt = |v: Option<f64>| v.map_or_else(|| "-".to_string(), |v| format!("{v:.4}"));
        let mut out = format!(
            "{:>4} {:>6} {:>10} {:>10} {:>9} {:>9} {:>8} {:>7}\n",
            "n", "trials", "p_found", "p_target", "hamming", "optimal", "iters", "locks"
        );
        for s in self.by_n.values() {
            out.push_str(&format!(
                "{:>4} {:>6} {:>10.4} {:>10} {:>9} {:>9} {:>8.2} {:>7.2}\n",
                s.n,
                s.trials,
                s.mean_found_probability,
                fmt_opt(s.mean_target_probability),
                fmt_opt(s.mean_hamming),
                fmt_opt(s.fraction_optimal),
                s.mean_iterations,
                s.mean_lock_events
            ));
        }
        out
    }
}

pub fn write_csv<T: Serialize, W: Write>(rows: &[T], writer: W) -> Result<()> {
    let mut w = csv::Writer::from_writer(writer);
    for r in rows {
        w.serialize(r)?;
    }
    w.flush()?;
    Ok(())
}

pub fn read_csv<T: for<'de> Deserialize<'de>, R: Read>(reader: R) -> Result<Vec<T>> {
    csv::Reader::from_reader(reader)
        .deserialize()
        .map(|r| r.map_err(Error::from))
        .collect()
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct PairedRecord {
    pub instance_id: String,
    pub n: usize,
    pub trial: usize,
    pub seed: u64,
    pub eigengap: f64,
    pub vqpm_termination: Termination,
    pub vqpm_iterations: usize,
    pub vqpm_target_probability: f64,
    pub qaoa_p: usize,
    pub qaoa_evals: usize,
    pub qaoa_best_expected_phase: f64,
    pub qaoa_target_probability: f64,
    pub qaoa_wall_time_s: Option<f64>,
}

#[derive(Clone, Debug, PartialEq)]
pub struct ComparisonSummary {
    pub n: usize,
    pub trials: usize,
    pub vqpm_mean_target_probability: f64,
    pub qaoa_mean_target_probability: f64,
    /// Trials where VQPM's target probability is at least QAOA's.
    pub vqpm_wins: usize,
}

/// Runs VQPM and QAOA on the same instances.
pub fn compare_vqpm_qaoa(spec: &ExperimentSpec) -> Result<Vec<PairedRecord>> {
    let settings = spec
        .qaoa
        .as_ref()
        .ok_or_else(|| Error::invalid("comparison needs QAOA settings"))?;
    if !spec.use_oracle {
        return Err(Error::invalid("comparison needs oracle targets"));
    }
    spec.validate()?;
    let indices = spec.trial_indices();
    spec.in_pool(|| {
        indices
            .par_iter()
            .map(|&(n, trial)| {
                let vqpm = run_trial(spec, n, trial)?;
                let (seed, instance) = spec.instance(n, trial)?;
                let oracle = brute_force_solve(&instance)?;
                let table = PhaseTable::from_instance(&instance)?;
                let opt = OptimizerConfig {
                    seed: qaoa_seed(seed),
                    ..settings.optimizer.clone()
                };
                let start = Instant::now();
                let out = qaoa::optimize(&table, settings.p, &opt, &oracle.argmin)?;
                let elapsed = start.elapsed().as_secs_f64();
                Ok(PairedRecord {
                    instance_id: format!("n{n}-t{trial}"),
                    n,
                    trial,
                    seed,
                    eigengap: oracle.eigengap,
                    vqpm_termination: vqpm.record.termination,
                    vqpm_iterations: vqpm.record.iterations_used,
                    vqpm_target_probability: vqpm.record.target_probability.unwrap_or(0.0),
                    qaoa_p: settings.p,
                    qaoa_evals: out.evals_used,
                    qaoa_best_expected_phase: out.best_expected_phase,
                    qaoa_target_probability: out.target_probability,
                    qaoa_wall_time_s: settings.record_wall_time.then_some(elapsed),
                })
            })
            .collect::<Result<Vec<_>>>()
    })?
}

pub fn summarize_comparison(records: &[PairedRecord]) -> Result<Vec<ComparisonSummary>> {
    if records.is_empty() {
        return Err(Error::invalid("no paired records"));
    }
    let mut groups: BTreeMap<usize, Vec<&PairedRecord>> = BTreeMap::new();
    for r in records {
        groups.entry(r.n).or_default().push(r);
    }
    Ok(groups
        .into_iter()
        .map(|(n, rs)| ComparisonSummary {
            n,
            trials: rs.len(),
            vqpm_mean_target_probability: mean(rs.iter().map(|r| r.vqpm_target_probability)),
            qaoa_mean_target_probability: mean(rs.iter().map(|r| r.qaoa_target_probability)),
            vqpm_wins: rs
                .iter()
                .filter(|r| r.vqpm_target_probability >= r.qaoa_target_probability)
                .count(),
        })
        .collect())
}
