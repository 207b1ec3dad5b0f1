//! QAOA baseline on the same phase encoding as VQPM.
//!
//! Each layer applies the cost phase `e^{-iγλ_x}` and then `R_x(2β)` on
//! every qubit. Angles are tuned by Nelder–Mead with random restarts to
//! minimize the expected phase.

use std::f64::consts::{FRAC_PI_2, PI};

use num_complex::Complex64;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::bitstring::Bitstring;
use crate::error::{Error, Result};
use crate::phase::{PhaseTable, StateVector};
use crate::simplex;

#[derive(Clone, Debug, PartialEq)]
pub struct QaoaParams {
    pub gammas: Vec<f64>,
    pub betas: Vec<f64>,
}

impl QaoaParams {
    pub fn new(gammas: Vec<f64>, betas: Vec<f64>) -> Result<Self> {
        if gammas.len() != betas.len() {
            return Err(Error::invalid(format!(
                "{} cost angles but {} mixer angles",
                gammas.len(),
                betas.len()
            )));
        }
        Ok(Self { gammas, betas })
    }

    pub fn zeros(p: usize) -> Self {
        Self {
            gammas: vec![0.0; p],
            betas: vec![0.0; p],
        }
    }

    pub fn p(&self) -> usize {
        self.gammas.len()
    }

    /// Flat `[γ_1, β_1, γ_2, β_2, ...]`.
    pub fn to_flat(&self) -> Vec<f64> {
        self.gammas
            .iter()
            .zip(&self.betas)
            .flat_map(|(g, b)| [*g, *b])
            .collect()
    }

    pub fn from_flat(x: &[f64]) -> Self {
        Self {
            gammas: x.iter().step_by(2).copied().collect(),
            betas: x.iter().skip(1).step_by(2).copied().collect(),
        }
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct OptimizerConfig {
    /// Evaluation budget per restart.
    pub max_evals: usize,
    pub restarts: usize,
    pub seed: u64,
    /// Edge length of the initial simplex, radians.
    pub initial_step: f64,
    pub tolerance: f64,
}

impl Default for OptimizerConfig {
    fn default() -> Self {
        Self {
            max_evals: 2000,
            restarts: 5,
            seed: 42,
            initial_step: 0.25,
            tolerance: 1e-10,
        }
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct QaoaOutcome {
    pub params: QaoaParams,
    pub best_expected_phase: f64,
    pub target_probability: f64,
    pub evals_used: usize,
    /// Best objective value after each evaluation, across restarts.
    pub history: Vec<f64>,
}

fn apply_mixer(amplitudes: &mut [Complex64], n: usize, beta: f64) {
    let (c, s) = (beta.cos(), beta.sin());
    let mis = Complex64::new(0.0, -s);
    for q in 0..n {
        let bit = 1usize << q;
        for i in 0..amplitudes.len() {
            if i & bit != 0 {
                continue;
            }
            let (a0, a1) = (amplitudes[i], amplitudes[i | bit]);
            amplitudes[i] = a0 * c + a1 * mis;
            amplitudes[i | bit] = a0 * mis + a1 * c;
        }
    }
}

/// Layered QAOA state from the uniform superposition.
pub fn qaoa_state(table: &PhaseTable, params: &QaoaParams) -> Result<StateVector> {
    if params.gammas.len() != params.betas.len() {
        return Err(Error::invalid("gamma and beta counts differ"));
    }
    let mut state = StateVector::uniform(table.n());
    let amps = state.amplitudes_mut();
    for (&gamma, &beta) in params.gammas.iter().zip(&params.betas) {
        for (a, &lambda) in amps.iter_mut().zip(table.phases()) {
            *a *= Complex64::from_polar(1.0, -gamma * lambda);
        }
        apply_mixer(amps, table.n(), beta);
    }
    Ok(state)
}

/// `Σ_x |a_x|² λ_x`.
pub fn expected_energy(state: &StateVector, table: &PhaseTable) -> Result<f64> {
    if state.n() != table.n() {
        return Err(Error::invalid("state and phase table sizes differ"));
    }
    Ok(state
        .amplitudes()
        .iter()
        .zip(table.phases())
        .map(|(a, l)| a.norm_sqr() * l)
        .sum())
}

/// Tunes `p` layers of angles and reports the probability of `targets`
/// (summed, for degenerate optima) under the best angles found.
pub fn optimize(
    table: &PhaseTable,
    p: usize,
    opt: &OptimizerConfig,
    targets: &[Bitstring],
) -> Result<QaoaOutcome> {
    if p == 0 {
        return Err(Error::invalid("QAOA needs at least one layer"));
    }
    if opt.max_evals == 0 || opt.restarts == 0 {
        return Err(Error::invalid(
            "optimizer needs a positive budget and restart count",
        ));
    }
    if targets.iter().any(|t| t.len() != table.n()) {
        return Err(Error::invalid("target length differs from n"));
    }
    let objective = |x: &[f64]| {
        qaoa_state(table, &QaoaParams::from_flat(x))
            .and_then(|s| expected_energy(&s, table))
            .unwrap_or(f64::INFINITY)
    };

    let mut rng = ChaCha8Rng::seed_from_u64(opt.seed);
    let mut best: Option<(Vec<f64>, f64)> = None;
    let mut evals_used = 0;
    let mut history = Vec::new();
    for _ in 0..opt.restarts {
        let x0: Vec<f64> = (0..p)
            .flat_map(|_| {
                [
                    rng.random_range(0.0..=PI),
                    rng.random_range(0.0..=FRAC_PI_2),
                ]
            })
            .collect();
        let out = simplex::minimize(
            objective,
            &x0,
            opt.initial_step,
            opt.max_evals,
            opt.tolerance,
        );
        evals_used += out.evals;
        let floor = best.as_ref().map_or(f64::INFINITY, |b| b.1);
        history.extend(out.history.iter().map(|v| v.min(floor)));
        if best.as_ref().is_none_or(|b| out.value < b.1) {
            best = Some((out.x, out.value));
        }
    }

    let (x, value) = best.expect("at least one restart");
    let params = QaoaParams::from_flat(&x);
    let state = qaoa_state(table, &params)?;
    let target_probability = targets.iter().map(|t| state.probability(t.index())).sum();
    Ok(QaoaOutcome {
        params,
        best_expected_phase: value,
        target_probability,
        evals_used,
        history,
    })
}
