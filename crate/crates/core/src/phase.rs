//! Phase encoding, the `(I + U)` power step and spectral analytics.
//!
//! `U` is diagonal with entries `e^{iλ_x}`; it is never materialized beyond
//! its phase table. Applying `I + U` multiplies amplitude `x` by
//! `1 + e^{iλ_x} = 2cos(λ_x/2) e^{iλ_x/2}`.

use std::f64::consts::FRAC_PI_2;
use std::fmt::Write as _;

use num_complex::Complex64;

use crate::bitstring::Bitstring;
use crate::error::{Error, Result};
use crate::lock::{LockRegister, LockStatus};
use crate::qubo::{QuboInstance, DEFAULT_DENSE_CAP};

/// Tolerance on `Σ|a|² = 1` accepted by [`StateVector::from_amplitudes`].
pub const NORM_TOLERANCE: f64 = 1e-9;

/// Eigenphases `λ_x ∈ [0, π/2]` for every basis state.
#[derive(Clone, Debug, PartialEq)]
pub struct PhaseTable {
    n: usize,
    phases: Vec<f64>,
}

impl PhaseTable {
    /// Maps energies linearly onto `[0, π/2]` using the coefficient sign-sum
    /// bounds. A flat landscape (`upper == lower`) maps to all-zero phases.
    pub fn from_instance(instance: &QuboInstance) -> Result<Self> {
        Self::from_instance_capped(instance, DEFAULT_DENSE_CAP)
    }

    pub fn from_instance_capped(instance: &QuboInstance, cap: usize) -> Result<Self> {
        let bounds = instance.energy_bounds();
        let mut phases = instance.energy_landscape_capped(cap)?;
        let span = bounds.upper - bounds.lower;
        if span > 0.0 {
            for p in phases.iter_mut() {
                *p = ((*p - bounds.lower) / span * FRAC_PI_2).clamp(0.0, FRAC_PI_2);
            }
        } else {
            phases.fill(0.0);
        }
        Ok(Self {
            n: instance.n(),
            phases,
        })
    }

    /// Wraps explicit phases; each must lie in `[0, π/2]`.
    pub fn from_phases(phases: Vec<f64>) -> Result<Self> {
        let n = dimension_to_qubits(phases.len())?;
        if let Some(p) = phases.iter().find(|p| !(0.0..=FRAC_PI_2).contains(*p)) {
            return Err(Error::invalid(format!("phase {p} outside [0, π/2]")));
        }
        Ok(Self { n, phases })
    }

    pub fn n(&self) -> usize {
        self.n
    }

    pub fn phases(&self) -> &[f64] {
        &self.phases
    }

    pub fn phase(&self, index: usize) -> f64 {
        self.phases[index]
    }

    pub fn dim(&self) -> usize {
        self.phases.len()
    }
}

fn dimension_to_qubits(dim: usize) -> Result<usize> {
    if dim < 2 || !dim.is_power_of_two() {
        return Err(Error::invalid(format!(
            "state dimension {dim} is not a power of two >= 2"
        )));
    }
    Ok(dim.trailing_zeros() as usize)
}

#[derive(Clone, Debug, PartialEq)]
pub struct StateVector {
    n: usize,
    amplitudes: Vec<Complex64>,
}

impl StateVector {
    /// Equal superposition over all `2^n` basis states.
    pub fn uniform(n: usize) -> Self {
        let dim = 1usize << n;
        let a = Complex64::new((dim as f64).sqrt().recip(), 0.0);
        Self {
            n,
            amplitudes: vec![a; dim],
        }
    }

    pub fn basis(n: usize, index: usize) -> Self {
        let mut amplitudes = vec![Complex64::new(0.0, 0.0); 1 << n];
        amplitudes[index] = Complex64::new(1.0, 0.0);
        Self { n, amplitudes }
    }

    /// Accepts amplitudes that are already normalized to within
    /// [`NORM_TOLERANCE`].
    pub fn from_amplitudes(amplitudes: Vec<Complex64>) -> Result<Self> {
        let n = dimension_to_qubits(amplitudes.len())?;
        let norm_sqr: f64 = amplitudes.iter().map(|a| a.norm_sqr()).sum();
        if (norm_sqr - 1.0).abs() > NORM_TOLERANCE {
            return Err(Error::invalid(format!(
                "amplitudes have squared norm {norm_sqr}"
            )));
        }
        Ok(Self { n, amplitudes })
    }

    /// Scales arbitrary nonzero amplitudes to unit norm.
    pub fn normalized(amplitudes: Vec<Complex64>) -> Result<Self> {
        let n = dimension_to_qubits(amplitudes.len())?;
        let mut s = Self { n, amplitudes };
        s.renormalize()?;
        Ok(s)
    }

    fn renormalize(&mut self) -> Result<f64> {
        let norm_sqr: f64 = self.amplitudes.iter().map(|a| a.norm_sqr()).sum();
        if norm_sqr.is_nan() || norm_sqr <= 0.0 || !norm_sqr.is_finite() {
            return Err(Error::NumericDegenerate(format!(
                "cannot normalize a state with squared norm {norm_sqr}"
            )));
        }
        let inv = norm_sqr.sqrt().recip();
        for a in self.amplitudes.iter_mut() {
            *a *= inv;
        }
        Ok(norm_sqr)
    }

    pub fn n(&self) -> usize {
        self.n
    }

    pub fn amplitudes(&self) -> &[Complex64] {
        &self.amplitudes
    }

    pub(crate) fn amplitudes_mut(&mut self) -> &mut [Complex64] {
        &mut self.amplitudes
    }

    pub fn probability(&self, index: usize) -> f64 {
        self.amplitudes[index].norm_sqr()
    }

    pub fn probabilities(&self) -> Vec<f64> {
        self.amplitudes.iter().map(|a| a.norm_sqr()).collect()
    }

    pub fn norm_sqr(&self) -> f64 {
        self.amplitudes.iter().map(|a| a.norm_sqr()).sum()
    }

    /// Most probable basis state; the lowest index wins ties.
    pub fn argmax(&self) -> (usize, f64) {
        self.amplitudes
            .iter()
            .map(|a| a.norm_sqr())
            .enumerate()
            .fold((0, f64::NEG_INFINITY), |best, (i, p)| {
                if p > best.1 {
                    (i, p)
                } else {
                    best
                }
            })
    }

    /// One `index real imag` line per amplitude.
    pub fn dump(&self) -> String {
        let mut out = String::new();
        for (i, a) in self.amplitudes.iter().enumerate() {
            let _ = writeln!(out, "{i} {} {}", a.re, a.im);
        }
        out
    }

    fn check_table(&self, table: &PhaseTable) -> Result<()> {
        if self.n != table.n {
            return Err(Error::invalid(format!(
                "state has {} qubits, phase table has {}",
                self.n, table.n
            )));
        }
        Ok(())
    }

    /// Applies `I + U` and renormalizes. Returns `‖(I+U)ψ‖² / 4`, the
    /// probability of the ancilla reading 0 on this step.
    pub fn apply_power_step(&mut self, table: &PhaseTable) -> Result<f64> {
        self.check_table(table)?;
        for (a, &lambda) in self.amplitudes.iter_mut().zip(&table.phases) {
            *a *= Complex64::new(1.0 + lambda.cos(), lambda.sin());
        }
        let norm_sqr = self.renormalize()?;
        Ok(norm_sqr / 4.0)
    }

    /// `‖(I+U)ψ‖² / 4 = Σ |a_x|² cos²(λ_x/2)`.
    pub fn ancilla_zero_probability(&self, table: &PhaseTable) -> Result<f64> {
        self.check_table(table)?;
        Ok(self
            .amplitudes
            .iter()
            .zip(&table.phases)
            .map(|(a, &l)| a.norm_sqr() * (l / 2.0).cos().powi(2))
            .sum())
    }

    pub fn success_probability(&self, target: &Bitstring) -> Result<f64> {
        if target.len() != self.n {
            return Err(Error::invalid(format!(
                "target has {} bits, state has {} qubits",
                target.len(),
                self.n
            )));
        }
        Ok(self.probability(target.index()))
    }

    /// Per-qubit `(P0, P1)` without rounding.
    pub fn exact_marginals(&self) -> QubitMarginals {
        let mut p0 = vec![0.0; self.n];
        let mut p1 = vec![0.0; self.n];
        for (x, a) in self.amplitudes.iter().enumerate() {
            let p = a.norm_sqr();
            for q in 0..self.n {
                if x >> q & 1 == 1 {
                    p1[q] += p;
                } else {
                    p0[q] += p;
                }
            }
        }
        QubitMarginals {
            p0,
            p1,
            precision: None,
        }
    }

    /// Marginals rounded half-to-even to `precision` decimal places.
    pub fn qubit_marginals(&self, precision: u32) -> Result<QubitMarginals> {
        if precision == 0 {
            return Err(Error::invalid(
                "precision must be at least one decimal place",
            ));
        }
        let exact = self.exact_marginals();
        Ok(QubitMarginals {
            p0: exact
                .p0
                .iter()
                .map(|&p| round_half_even(p, precision))
                .collect(),
            p1: exact
                .p1
                .iter()
                .map(|&p| round_half_even(p, precision))
                .collect(),
            precision: Some(precision),
        })
    }

    /// Projects qubit `q` onto `value` and renormalizes.
    pub fn collapse_qubit(&mut self, q: usize, value: bool) -> Result<()> {
        if q >= self.n {
            return Err(Error::invalid(format!("qubit {q} out of range")));
        }
        let keep = usize::from(value);
        let mass: f64 = self
            .amplitudes
            .iter()
            .enumerate()
            .filter(|(x, _)| x >> q & 1 == keep)
            .map(|(_, a)| a.norm_sqr())
            .sum();
        if mass.is_nan() || mass <= 0.0 {
            return Err(Error::InvalidCollapse { qubit: q, value });
        }
        for (x, a) in self.amplitudes.iter_mut().enumerate() {
            if x >> q & 1 != keep {
                *a = Complex64::new(0.0, 0.0);
            }
        }
        self.renormalize()?;
        Ok(())
    }

    /// Tensor product `⊗_q (√P0'|0⟩ + √P1'|1⟩)` from rounded marginals, with
    /// locked qubits pinned to their basis state. Free-qubit marginals are
    /// renormalized by `P0 + P1`. Amplitudes come out real and non-negative.
    pub fn product_from_marginals(
        marginals: &QubitMarginals,
        locks: &LockRegister,
    ) -> Result<Self> {
        let n = marginals.n();
        if locks.n() != n {
            return Err(Error::invalid(format!(
                "lock register has {} qubits, marginals have {n}",
                locks.n()
            )));
        }
        let mut amplitudes = Vec::with_capacity(1 << n);
        amplitudes.push(1.0f64);
        for q in 0..n {
            let (a0, a1) = match locks.status(q) {
                LockStatus::Locked(false) => (1.0, 0.0),
                LockStatus::Locked(true) => (0.0, 1.0),
                LockStatus::Free => {
                    let (p0, p1) = (marginals.p0[q].max(0.0), marginals.p1[q].max(0.0));
                    let total = p0 + p1;
                    if total.is_nan() || total <= 0.0 {
                        return Err(Error::DegenerateMarginal(q));
                    }
                    ((p0 / total).sqrt(), (p1 / total).sqrt())
                }
            };
            let half = amplitudes.len();
            amplitudes.extend_from_within(..);
            for (i, a) in amplitudes.iter_mut().enumerate() {
                *a *= if i < half { a0 } else { a1 };
            }
        }
        Ok(Self {
            n,
            amplitudes: amplitudes
                .into_iter()
                .map(|a| Complex64::new(a, 0.0))
                .collect(),
        })
    }
}

/// NumPy-style rounding: scale, round half to even, unscale.
pub fn round_half_even(value: f64, decimals: u32) -> f64 {
    let scale = 10f64.powi(decimals as i32);
    (value * scale).round_ties_even() / scale
}

#[derive(Clone, Debug, PartialEq)]
pub struct QubitMarginals {
    pub p0: Vec<f64>,
    pub p1: Vec<f64>,
    /// Decimal places used for rounding, `None` for exact values.
    pub precision: Option<u32>,
}

impl QubitMarginals {
    pub fn new(p0: Vec<f64>, p1: Vec<f64>, precision: Option<u32>) -> Result<Self> {
        if p0.len() != p1.len() {
            return Err(Error::invalid("marginal vectors differ in length"));
        }
        if p0.iter().chain(&p1).any(|p| !(0.0..=1.0).contains(p)) {
            return Err(Error::invalid("marginal probability outside [0, 1]"));
        }
        Ok(Self { p0, p1, precision })
    }

    pub fn n(&self) -> usize {
        self.p0.len()
    }

    pub fn get(&self, q: usize) -> (f64, f64) {
        (self.p0[q], self.p1[q])
    }
}

/// Normalized closed form `(I+U)^k |ψ₀⟩` from the uniform state.
///
/// Magnitudes are carried in log space so large `k` neither overflows nor
/// underflows the dominant entries.
pub fn exact_power_reference(table: &PhaseTable, k: u32) -> Result<StateVector> {
    let k = f64::from(k);
    let log_mags: Vec<f64> = table
        .phases
        .iter()
        .map(|&l| k * (2.0 * (l / 2.0).cos()).ln())
        .collect();
    let top = log_mags.iter().cloned().fold(f64::NEG_INFINITY, f64::max);
    let amplitudes = log_mags
        .iter()
        .zip(&table.phases)
        .map(|(&lm, &l)| Complex64::from_polar((lm - top).exp(), k * l / 2.0))
        .collect();
    StateVector::normalized(amplitudes)
}

/// `|1 + e^{iλ}| = 2cos(λ/2)` for `λ ∈ [0, π]`.
pub fn eigenvalue_magnitude(lambda: f64) -> Result<f64> {
    if !(0.0..=std::f64::consts::PI).contains(&lambda) {
        return Err(Error::invalid(format!("phase {lambda} outside [0, π]")));
    }
    Ok(2.0 * (lambda / 2.0).cos())
}

/// `R = cos(λ_s/2) / cos(λ_d/2)` for `0 <= λ_d <= λ_s <= π/2`.
pub fn convergence_ratio(lambda_d: f64, lambda_s: f64) -> Result<f64> {
    if !(0.0 <= lambda_d && lambda_d <= lambda_s && lambda_s <= FRAC_PI_2) {
        return Err(Error::invalid(format!(
            "expected 0 <= λ_d ({lambda_d}) <= λ_s ({lambda_s}) <= π/2"
        )));
    }
    Ok((lambda_s / 2.0).cos() / (lambda_d / 2.0).cos())
}

/// Smallest `k` with `k >= ln(1/ε) / ln(1/R²)`, i.e. `R^{2k} <= ε`.
pub fn iteration_bound(ratio: f64, eps: f64) -> Result<u64> {
    if !(0.0 < eps && eps < 1.0) {
        return Err(Error::invalid(format!("ε = {eps} outside (0, 1)")));
    }
    if ratio >= 1.0 {
        return Err(Error::Unbounded(format!(
            "convergence ratio {ratio} >= 1 never contracts"
        )));
    }
    if ratio.is_nan() || ratio <= 0.0 {
        return Err(Error::invalid(format!(
            "convergence ratio {ratio} must be positive"
        )));
    }
    let k = (1.0 / eps).ln() / (1.0 / (ratio * ratio)).ln();
    Ok(k.ceil() as u64)
}
