//! Lock thresholds and lock decisions.
//!
//! A free qubit is locked to `argmax(P0, P1)` once `|P0 - P1|` reaches the
//! threshold given by a [`ThresholdPolicy`] for that iteration and qubit.
//! Locks are permanent for the rest of a run.

use std::fmt;
use std::str::FromStr;

use crate::bitstring::Bitstring;
use crate::error::{Error, Result};
use crate::phase::{round_half_even, QubitMarginals};
use crate::qubo::{InfluenceScores, QuboInstance};

/// Lower limit for geometrically decaying thresholds.
pub const DEFAULT_DECAY_FLOOR: f64 = 0.01;
/// Operating range for Hoeffding-derived thresholds.
pub const DEFAULT_HOEFFDING_CLAMP: (f64, f64) = (0.005, 0.015);
/// Parameter-count multiplier inside the Hoeffding denominator (`10·n·M`).
pub const HOEFFDING_QUBIT_FACTOR: f64 = 10.0;

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum LockStatus {
    Free,
    Locked(bool),
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct LockRegister {
    status: Vec<LockStatus>,
    locked_at: Vec<Option<usize>>,
}

impl LockRegister {
    pub fn new(n: usize) -> Self {
        Self {
            status: vec![LockStatus::Free; n],
            locked_at: vec![None; n],
        }
    }

    pub fn n(&self) -> usize {
        self.status.len()
    }

    pub fn status(&self, q: usize) -> LockStatus {
        self.status[q]
    }

    pub fn locked_at(&self, q: usize) -> Option<usize> {
        self.locked_at[q]
    }

    pub fn is_free(&self, q: usize) -> bool {
        self.status[q] == LockStatus::Free
    }

    pub fn locked_count(&self) -> usize {
        self.status
            .iter()
            .filter(|s| **s != LockStatus::Free)
            .count()
    }

    pub fn all_locked(&self) -> bool {
        self.locked_count() == self.n()
    }

    /// Locks a free qubit. Locking an already-locked qubit is an error.
    pub fn lock(&mut self, q: usize, bit: bool, iteration: usize) -> Result<()> {
        if q >= self.n() {
            return Err(Error::invalid(format!("qubit {q} out of range")));
        }
        if !self.is_free(q) {
            return Err(Error::invalid(format!("qubit {q} is already locked")));
        }
        self.status[q] = LockStatus::Locked(bit);
        self.locked_at[q] = Some(iteration);
        Ok(())
    }

    /// Locked qubits whose value disagrees with `target`.
    pub fn conflicts_with(&self, target: &Bitstring) -> Vec<usize> {
        self.status
            .iter()
            .enumerate()
            .filter_map(|(q, s)| match s {
                LockStatus::Locked(b) if *b != target.get(q) => Some(q),
                _ => None,
            })
            .collect()
    }
}

/// Divisor law `f(k)` for geometric decay.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum DecayLaw {
    /// `f(k) = 2^k`, applied directly to `p0`.
    Pow2,
    /// `f(k) = k`.
    Linear,
    /// Recursive `p_k = p_{k-1} / 2^k`, i.e. `p0 / 2^{k(k+1)/2}`.
    CumulativePow2,
}

impl DecayLaw {
    fn divisor(self, k: usize) -> f64 {
        match self {
            DecayLaw::Pow2 => 2f64.powi(k as i32),
            DecayLaw::Linear => k as f64,
            DecayLaw::CumulativePow2 => 2f64.powf((k * (k + 1)) as f64 / 2.0),
        }
    }

    fn name(self) -> &'static str {
        match self {
            DecayLaw::Pow2 => "pow2",
            DecayLaw::Linear => "linear",
            DecayLaw::CumulativePow2 => "cumulative",
        }
    }
}

impl FromStr for DecayLaw {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "pow2" => Ok(DecayLaw::Pow2),
            "linear" => Ok(DecayLaw::Linear),
            "cumulative" => Ok(DecayLaw::CumulativePow2),
            other => Err(Error::invalid(format!("unknown decay law {other:?}"))),
        }
    }
}

#[derive(Clone, Debug, PartialEq)]
pub enum ThresholdPolicy {
    /// Constant threshold. Values above 1 disable locking.
    Fixed(f64),
    GeometricDecay {
        p0: f64,
        law: DecayLaw,
        floor: f64,
    },
    /// Hoeffding bound with the failure budget spread over the remaining
    /// iterations, clamped to `clamp`.
    Hoeffding {
        delta_total: f64,
        shots: u64,
        max_iter: usize,
        clamp: (f64, f64),
    },
    /// Base threshold divided by each qubit's influence score, then clamped
    /// to the base policy's clamp (if it has one).
    InfluenceWeighted {
        base: Box<ThresholdPolicy>,
        scores: InfluenceScores,
    },
    /// Base threshold times a per-position multiplier.
    BitSignificance {
        base: Box<ThresholdPolicy>,
        profile: Vec<f64>,
    },
}

impl ThresholdPolicy {
    /// Never locks.
    pub fn never() -> Self {
        ThresholdPolicy::Fixed(f64::INFINITY)
    }

    pub fn hoeffding(delta_total: f64, shots: u64, max_iter: usize) -> Result<Self> {
        let p = ThresholdPolicy::Hoeffding {
            delta_total,
            shots,
            max_iter,
            clamp: DEFAULT_HOEFFDING_CLAMP,
        };
        p.validate()?;
        Ok(p)
    }

    /// Default bit-significance profile: multiplier `scale^q` for qubit `q`.
    pub fn bit_significance(base: ThresholdPolicy, n: usize, scale: f64) -> Self {
        ThresholdPolicy::BitSignificance {
            base: Box::new(base),
            profile: (0..n).map(|q| scale.powi(q as i32)).collect(),
        }
    }

    pub fn validate(&self) -> Result<()> {
        let prob = |name: &str, v: f64| {
            if v > 0.0 && v < 1.0 {
                Ok(())
            } else {
                Err(Error::invalid(format!("{name} = {v} must lie in (0, 1)")))
            }
        };
        match self {
            ThresholdPolicy::Fixed(p) => {
                if p.is_nan() || *p <= 0.0 {
                    return Err(Error::invalid(format!(
                        "fixed threshold {p} must be positive"
                    )));
                }
            }
            ThresholdPolicy::GeometricDecay { p0, floor, .. } => {
                prob("p0", *p0)?;
                prob("floor", *floor)?;
            }
            ThresholdPolicy::Hoeffding {
                delta_total,
                shots,
                max_iter,
                clamp,
            } => {
                prob("delta_total", *delta_total)?;
                if *shots == 0 || *max_iter == 0 {
                    return Err(Error::invalid("shots and max_iter must be at least 1"));
                }
                if !(clamp.0 <= clamp.1 && clamp.0 >= 0.0) {
                    return Err(Error::invalid(format!(
                        "bad clamp [{}, {}]",
                        clamp.0, clamp.1
                    )));
                }
            }
            ThresholdPolicy::InfluenceWeighted { base, .. } => base.validate()?,
            ThresholdPolicy::BitSignificance { base, profile } => {
                if profile.iter().any(|m| m.is_nan() || *m <= 0.0) {
                    return Err(Error::invalid(
                        "bit-significance multipliers must be positive",
                    ));
                }
                base.validate()?
            }
        }
        Ok(())
    }

    fn clamp_range(&self) -> Option<(f64, f64)> {
        match self {
            ThresholdPolicy::Hoeffding { clamp, .. } => Some(*clamp),
            ThresholdPolicy::InfluenceWeighted { base, .. }
            | ThresholdPolicy::BitSignificance { base, .. } => base.clamp_range(),
            _ => None,
        }
    }
}

/// `ε = sqrt(ln(2/δ) / (2 · 10n · M))`.
pub fn hoeffding_epsilon(delta: f64, n: usize, shots: u64) -> Result<f64> {
    if !(delta > 0.0 && delta < 2.0) {
        return Err(Error::invalid(format!("δ = {delta} outside (0, 2)")));
    }
    if n == 0 || shots == 0 {
        return Err(Error::invalid("n and M must be at least 1"));
    }
    let denom = 2.0 * HOEFFDING_QUBIT_FACTOR * n as f64 * shots as f64;
    Ok(((2.0 / delta).ln() / denom).sqrt())
}

/// Union-bound share of the failure budget: `δ_total / remaining`.
pub fn delta_schedule(delta_total: f64, remaining: usize) -> Result<f64> {
    if remaining == 0 {
        return Err(Error::invalid("no iterations remaining"));
    }
    Ok(delta_total / remaining as f64)
}

/// Lock threshold for qubit `q` at iteration `k` (1-based).
pub fn threshold_for(policy: &ThresholdPolicy, k: usize, q: usize, n: usize) -> Result<f64> {
    if k == 0 {
        return Err(Error::invalid("iterations are numbered from 1"));
    }
    match policy {
        ThresholdPolicy::Fixed(p) => Ok(*p),
        ThresholdPolicy::GeometricDecay { p0, law, floor } => Ok((p0 / law.divisor(k)).max(*floor)),
        ThresholdPolicy::Hoeffding {
            delta_total,
            shots,
            max_iter,
            clamp,
        } => {
            if k > *max_iter {
                return Err(Error::invalid(format!(
                    "iteration {k} beyond the scheduled {max_iter}"
                )));
            }
            let delta = delta_schedule(*delta_total, max_iter - k + 1)?;
            Ok(hoeffding_epsilon(delta, n, *shots)?.clamp(clamp.0, clamp.1))
        }
        ThresholdPolicy::InfluenceWeighted { base, scores } => {
            if scores.len() != n {
                return Err(Error::invalid(format!(
                    "{} influence scores for {n} qubits",
                    scores.len()
                )));
            }
            let t = threshold_for(base, k, q, n)? / scores.get(q);
            Ok(match base.clamp_range() {
                Some((lo, hi)) => t.clamp(lo, hi),
                None => t,
            })
        }
        ThresholdPolicy::BitSignificance { base, profile } => {
            let m = profile.get(q).ok_or_else(|| {
                Error::invalid(format!("no bit-significance multiplier for qubit {q}"))
            })?;
            Ok(threshold_for(base, k, q, n)? * m)
        }
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct LockEvent {
    pub qubit: usize,
    pub bit: bool,
    pub iteration: usize,
    pub threshold: f64,
}

/// Locks every free qubit whose marginal gap reaches its threshold.
///
/// When the marginals carry a precision, the gap is rounded to the same
/// number of decimals so that `0.505 - 0.495` compares as exactly `0.01`.
/// Exact ties never lock.
pub fn decide_locks(
    marginals: &QubitMarginals,
    policy: &ThresholdPolicy,
    register: &LockRegister,
    k: usize,
    n: usize,
) -> Result<(LockRegister, Vec<LockEvent>)> {
    if marginals.n() != n || register.n() != n {
        return Err(Error::invalid("marginals, register and n disagree"));
    }
    let mut next = register.clone();
    let mut events = Vec::new();
    for q in 0..n {
        if !register.is_free(q) {
            continue;
        }
        let (p0, p1) = marginals.get(q);
        if p0 == p1 {
            continue;
        }
        let mut gap = (p0 - p1).abs();
        if let Some(precision) = marginals.precision {
            gap = round_half_even(gap, precision);
        }
        let threshold = threshold_for(policy, k, q, n)?;
        if gap >= threshold {
            let bit = p1 > p0;
            next.lock(q, bit, k)?;
            events.push(LockEvent {
                qubit: q,
                bit,
                iteration: k,
                threshold,
            });
        }
    }
    Ok((next, events))
}

/// Textual policy description, resolved against an instance and iteration
/// budget by [`PolicySpec::resolve`].
///
/// Grammar: a base followed by `+`-separated modifiers.
///
/// ```text
/// fixed:0.01
/// none
/// decay:p0=0.16,floor=0.01,law=pow2
/// hoeffding:delta=0.5,M=100,lo=0.005,hi=0.015
/// bitsig:p=0.01,scale=2
/// hoeffding+influence
/// fixed:0.01+bitsig:scale=2
/// ```
#[derive(Clone, Debug, PartialEq)]
pub enum PolicySpec {
    Fixed(f64),
    Never,
    Decay {
        p0: f64,
        floor: f64,
        law: DecayLaw,
    },
    Hoeffding {
        delta: f64,
        shots: u64,
        clamp: (f64, f64),
    },
    Influence(Box<PolicySpec>),
    BitSignificance {
        base: Box<PolicySpec>,
        scale: f64,
    },
}

impl PolicySpec {
    pub fn resolve(&self, instance: &QuboInstance, max_iter: usize) -> Result<ThresholdPolicy> {
        let n = instance.n();
        let policy = match self {
            PolicySpec::Fixed(p) => ThresholdPolicy::Fixed(*p),
            PolicySpec::Never => ThresholdPolicy::never(),
            PolicySpec::Decay { p0, floor, law } => ThresholdPolicy::GeometricDecay {
                p0: *p0,
                law: *law,
                floor: *floor,
            },
            PolicySpec::Hoeffding {
                delta,
                shots,
                clamp,
            } => ThresholdPolicy::Hoeffding {
                delta_total: *delta,
                shots: *shots,
                max_iter,
                clamp: *clamp,
            },
            PolicySpec::Influence(base) => ThresholdPolicy::InfluenceWeighted {
                base: Box::new(base.resolve(instance, max_iter)?),
                scores: instance.influence_scores(),
            },
            PolicySpec::BitSignificance { base, scale } => {
                ThresholdPolicy::bit_significance(base.resolve(instance, max_iter)?, n, *scale)
            }
        };
        policy.validate()?;
        Ok(policy)
    }
}

fn parse_kv(body: &str) -> Result<Vec<(&str, &str)>> {
    body.split(',')
        .filter(|s| !s.is_empty())
        .map(|kv| {
            kv.split_once('=')
                .map(|(k, v)| (k.trim(), v.trim()))
                .ok_or_else(|| Error::invalid(format!("expected key=value, got {kv:?}")))
        })
        .collect()
}

fn parse_num<T: FromStr>(key: &str, v: &str) -> Result<T> {
    v.parse()
        .map_err(|_| Error::invalid(format!("bad value {v:?} for {key}")))
}

fn parse_base(s: &str) -> Result<PolicySpec> {
    let (name, body) = s.split_once(':').unwrap_or((s, ""));
    match name {
        "none" => Ok(PolicySpec::Never),
        "fixed" => {
            let v = body.strip_prefix("p=").unwrap_or(body);
            Ok(PolicySpec::Fixed(parse_num("fixed", v)?))
        }
        "decay" => {
            let (mut p0, mut floor, mut law) = (0.16, DEFAULT_DECAY_FLOOR, DecayLaw::Pow2);
            for (k, v) in parse_kv(body)? {
                match k {
                    "p0" => p0 = parse_num(k, v)?,
                    "floor" => floor = parse_num(k, v)?,
                    "law" => law = v.parse()?,
                    _ => return Err(Error::invalid(format!("unknown decay key {k:?}"))),
                }
            }
            Ok(PolicySpec::Decay { p0, floor, law })
        }
        "hoeffding" => {
            let (mut delta, mut shots, mut clamp) = (0.5, 100, DEFAULT_HOEFFDING_CLAMP);
            for (k, v) in parse_kv(body)? {
                match k {
                    "delta" => delta = parse_num(k, v)?,
                    "M" | "shots" => shots = parse_num(k, v)?,
                    "lo" => clamp.0 = parse_num(k, v)?,
                    "hi" => clamp.1 = parse_num(k, v)?,
                    _ => return Err(Error::invalid(format!("unknown hoeffding key {k:?}"))),
                }
            }
            Ok(PolicySpec::Hoeffding {
                delta,
                shots,
                clamp,
            })
        }
        "bitsig" => {
            let (mut p, mut scale) = (0.01, 2.0);
            for (k, v) in parse_kv(body)? {
                match k {
                    "p" => p = parse_num(k, v)?,
                    "scale" => scale = parse_num(k, v)?,
                    _ => return Err(Error::invalid(format!("unknown bitsig key {k:?}"))),
                }
            }
            Ok(PolicySpec::BitSignificance {
                base: Box::new(PolicySpec::Fixed(p)),
                scale,
            })
        }
        other => Err(Error::invalid(format!("unknown policy {other:?}"))),
    }
}

impl FromStr for PolicySpec {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        let mut parts = s.trim().split('+');
        let mut spec = parse_base(parts.next().unwrap_or(""))?;
        for modifier in parts {
            let (name, body) = modifier.split_once(':').unwrap_or((modifier, ""));
            spec = match name {
                "influence" if body.is_empty() => PolicySpec::Influence(Box::new(spec)),
                "bitsig" => {
                    let mut scale = 2.0;
                    for (k, v) in parse_kv(body)? {
                        match k {
                            "scale" => scale = parse_num(k, v)?,
                            _ => return Err(Error::invalid(format!("unknown bitsig key {k:?}"))),
                        }
                    }
                    PolicySpec::BitSignificance {
                        base: Box::new(spec),
                        scale,
                    }
                }
                other => return Err(Error::invalid(format!("unknown policy modifier {other:?}"))),
            };
        }
        Ok(spec)
    }
}

impl fmt::Display for PolicySpec {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            PolicySpec::Fixed(p) => write!(f, "fixed:{p}"),
            PolicySpec::Never => f.write_str("none"),
            PolicySpec::Decay { p0, floor, law } => {
                write!(f, "decay:p0={p0},floor={floor},law={}", law.name())
            }
            PolicySpec::Hoeffding {
                delta,
                shots,
                clamp,
            } => write!(
                f,
                "hoeffding:delta={delta},M={shots},lo={},hi={}",
                clamp.0, clamp.1
            ),
            PolicySpec::Influence(base) => write!(f, "{base}+influence"),
            PolicySpec::BitSignificance { base, scale } => write!(f, "{base}+bitsig:scale={scale}"),
        }
    }
}
