//! QUBO instances, energy evaluation and the exhaustive oracle.
//!
//! Energies follow `E(x) = Σ_i q_ii x_i + Σ_{i<j} q_ij x_i x_j` for
//! `x ∈ {0,1}^n`. Only the upper triangle (`i <= j`) is stored.

use std::fmt::Write as _;
use std::io::{BufRead, BufReader, Read};
use std::path::Path;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;

use crate::bitstring::Bitstring;
use crate::error::{Error, Result};

/// Largest `n` accepted by [`brute_force_solve`].
pub const DEFAULT_ORACLE_CAP: usize = 20;

/// Largest `n` for which a dense `2^n` table is built.
pub const DEFAULT_DENSE_CAP: usize = 26;

#[derive(Clone, Debug, PartialEq)]
pub struct QuboInstance {
    n: usize,
    /// Packed upper triangle, row-major: row `i` holds `q_ii ..= q_i(n-1)`.
    coeffs: Vec<f64>,
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct EnergyBounds {
    pub lower: f64,
    pub upper: f64,
}

#[derive(Clone, Debug, PartialEq)]
pub struct InfluenceScores {
    scores: Vec<f64>,
}

impl InfluenceScores {
    pub fn new(scores: Vec<f64>) -> Result<Self> {
        if let Some(s) = scores.iter().find(|s| !(0.0..=1.0).contains(*s)) {
            return Err(Error::invalid(format!(
                "influence score {s} outside [0, 1]"
            )));
        }
        Ok(Self { scores })
    }

    pub fn uniform(n: usize) -> Self {
        Self {
            scores: vec![1.0; n],
        }
    }

    pub fn get(&self, q: usize) -> f64 {
        self.scores[q]
    }

    pub fn as_slice(&self) -> &[f64] {
        &self.scores
    }

    pub fn len(&self) -> usize {
        self.scores.len()
    }

    pub fn is_empty(&self) -> bool {
        self.scores.is_empty()
    }
}

/// Exhaustive solution of an instance.
#[derive(Clone, Debug, PartialEq)]
pub struct OracleResult {
    pub min_energy: f64,
    /// Every bitstring attaining `min_energy`, in ascending index order.
    pub argmin: Vec<Bitstring>,
    pub sorted_spectrum: Vec<f64>,
    /// `sorted_spectrum[1] - sorted_spectrum[0]`; zero iff the minimum is degenerate.
    pub eigengap: f64,
}

impl OracleResult {
    pub fn is_degenerate(&self) -> bool {
        self.argmin.len() > 1
    }
}

fn packed_len(n: usize) -> usize {
    n * (n + 1) / 2
}

impl QuboInstance {
    /// All-zero instance on `n` variables.
    pub fn zeros(n: usize) -> Result<Self> {
        if n == 0 {
            return Err(Error::invalid(
                "a QUBO instance needs at least one variable",
            ));
        }
        Ok(Self {
            n,
            coeffs: vec![0.0; packed_len(n)],
        })
    }

    /// Builds an instance from `(i, j, q_ij)` triples with `i <= j`.
    /// Repeated pairs are summed.
    pub fn from_terms(
        n: usize,
        terms: impl IntoIterator<Item = (usize, usize, f64)>,
    ) -> Result<Self> {
        let mut q = Self::zeros(n)?;
        for (i, j, v) in terms {
            let cur = q.get(i, j)?;
            q.set(i, j, cur + v)?;
        }
        Ok(q)
    }

    pub fn n(&self) -> usize {
        self.n
    }

    fn offset(&self, i: usize, j: usize) -> usize {
        // rows 0..i hold n + (n-1) + ... + (n-i+1) entries
        i * self.n - i * (i.saturating_sub(1)) / 2 + (j - i)
    }

    fn check_pair(&self, i: usize, j: usize) -> Result<()> {
        if i > j {
            return Err(Error::invalid(format!(
                "coefficient ({i}, {j}) is below the diagonal; store it as ({j}, {i})"
            )));
        }
        if j >= self.n {
            return Err(Error::invalid(format!(
                "coefficient ({i}, {j}) out of range for n = {}",
                self.n
            )));
        }
        Ok(())
    }

    /// Stored coefficient `q_ij`; requires `i <= j < n`.
    pub fn get(&self, i: usize, j: usize) -> Result<f64> {
        self.check_pair(i, j)?;
        Ok(self.coeffs[self.offset(i, j)])
    }

    pub fn set(&mut self, i: usize, j: usize, value: f64) -> Result<()> {
        self.check_pair(i, j)?;
        if !value.is_finite() {
            return Err(Error::invalid(format!(
                "coefficient ({i}, {j}) is not finite"
            )));
        }
        let k = self.offset(i, j);
        self.coeffs[k] = value;
        Ok(())
    }

    /// Coefficient of the symmetrized matrix (`Q_ji = Q_ij`).
    pub fn symmetric(&self, i: usize, j: usize) -> f64 {
        let (a, b) = if i <= j { (i, j) } else { (j, i) };
        self.coeffs[self.offset(a, b)]
    }

    /// Iterator over stored `(i, j, q_ij)` triples in row-major order.
    pub fn terms(&self) -> impl Iterator<Item = (usize, usize, f64)> + '_ {
        (0..self.n)
            .flat_map(move |i| (i..self.n).map(move |j| (i, j, self.coeffs[self.offset(i, j)])))
    }

    pub fn is_zero(&self) -> bool {
        self.coeffs.iter().all(|&c| c == 0.0)
    }

    /// Returns a copy with every coefficient multiplied by `factor`.
    pub fn scaled(&self, factor: f64) -> Self {
        Self {
            n: self.n,
            coeffs: self.coeffs.iter().map(|c| c * factor).collect(),
        }
    }

    pub fn energy(&self, x: &Bitstring) -> Result<f64> {
        if x.len() != self.n {
            return Err(Error::invalid(format!(
                "bitstring has {} bits, instance has {} variables",
                x.len(),
                self.n
            )));
        }
        Ok(self.energy_of_index(x.index()))
    }

    /// Direct evaluation for a little-endian basis index.
    pub fn energy_of_index(&self, index: usize) -> f64 {
        let mut e = 0.0;
        for i in 0..self.n {
            if index >> i & 1 == 0 {
                continue;
            }
            for j in i..self.n {
                if index >> j & 1 == 1 {
                    e += self.coeffs[self.offset(i, j)];
                }
            }
        }
        e
    }

    /// Energies of all `2^n` basis states, indexed little-endian.
    ///
    /// The block of indices with highest set bit `h` equals the lower block
    /// plus the local field `q_hh + Σ_{j<h} q_jh x_j`, and that field is
    /// itself built one bit at a time, so each entry costs O(1).
    pub fn energy_landscape(&self) -> Result<Vec<f64>> {
        self.energy_landscape_capped(DEFAULT_DENSE_CAP)
    }

    pub fn energy_landscape_capped(&self, cap: usize) -> Result<Vec<f64>> {
        let n = self.n;
        if n > cap || n >= usize::BITS as usize {
            return Err(Error::ResourceLimit(format!(
                "dense table for n = {n} exceeds the cap of {cap} variables"
            )));
        }
        let dim = 1usize << n;
        let mut energies = Vec::new();
        energies
            .try_reserve_exact(dim)
            .map_err(|e| Error::ResourceLimit(format!("cannot allocate 2^{n} energies: {e}")))?;
        energies.resize(dim, 0.0);
        for h in 0..n {
            let half = 1usize << h;
            let (lower, upper) = energies[..2 * half].split_at_mut(half);
            upper[0] = self.coeffs[self.offset(h, h)];
            for low in 1..half {
                let top = usize::BITS as usize - 1 - low.leading_zeros() as usize;
                upper[low] = upper[low & !(1 << top)] + self.coeffs[self.offset(top, h)];
            }
            for (u, l) in upper.iter_mut().zip(lower.iter()) {
                *u += *l;
            }
        }
        Ok(energies)
    }

    /// Sign-sum bounds: every coefficient either contributes or not.
    pub fn energy_bounds(&self) -> EnergyBounds {
        let (lower, upper) = self.coeffs.iter().fold((0.0, 0.0), |(lo, hi), &c| {
            (lo + c.min(0.0), hi + c.max(0.0))
        });
        EnergyBounds { lower, upper }
    }

    /// Absolute row sums of the symmetrized matrix over the largest row sum.
    /// All-zero instances score 1 everywhere.
    pub fn influence_scores(&self) -> InfluenceScores {
        let rows: Vec<f64> = (0..self.n)
            .map(|i| (0..self.n).map(|j| self.symmetric(i, j).abs()).sum())
            .collect();
        let norm = rows.iter().cloned().fold(0.0, f64::max);
        if norm == 0.0 {
            return InfluenceScores::uniform(self.n);
        }
        InfluenceScores {
            scores: rows.iter().map(|r| r / norm).collect(),
        }
    }

    /// Instance with every `q_ij` drawn uniformly from `[lo, hi]`,
    /// reproducible for a fixed seed.
    pub fn random(n: usize, seed: u64, range: (f64, f64)) -> Result<Self> {
        let (lo, hi) = range;
        if !(lo.is_finite() && hi.is_finite()) || lo > hi {
            return Err(Error::invalid(format!(
                "empty coefficient range [{lo}, {hi}]"
            )));
        }
        let mut q = Self::zeros(n)?;
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        for c in q.coeffs.iter_mut() {
            *c = if lo == hi {
                lo
            } else {
                rng.random_range(lo..=hi)
            };
        }
        Ok(q)
    }

    /// Parses the text format: first non-comment line `n`, then `i j q_ij`
    /// lines with `i <= j`. `#` starts a comment.
    pub fn parse(text: &str) -> Result<Self> {
        Self::read(text.as_bytes())
    }

    pub fn read<R: Read>(reader: R) -> Result<Self> {
        let mut instance: Option<QuboInstance> = None;
        for (lineno, line) in BufReader::new(reader).lines().enumerate() {
            let line = line?;
            let lineno = lineno + 1;
            let content = line.split('#').next().unwrap_or("").trim();
            if content.is_empty() {
                continue;
            }
            let fields: Vec<&str> = content.split_whitespace().collect();
            let parse_err = |message: String| Error::Parse {
                line: lineno,
                message,
            };
            match instance.as_mut() {
                None => {
                    if fields.len() != 1 {
                        return Err(parse_err("expected the variable count".into()));
                    }
                    let n: usize = fields[0]
                        .parse()
                        .map_err(|e| parse_err(format!("bad variable count: {e}")))?;
                    instance = Some(Self::zeros(n).map_err(|e| parse_err(e.to_string()))?);
                }
                Some(q) => {
                    if fields.len() != 3 {
                        return Err(parse_err(format!("expected `i j q_ij`, got {content:?}")));
                    }
                    let i: usize = fields[0]
                        .parse()
                        .map_err(|e| parse_err(format!("bad row index: {e}")))?;
                    let j: usize = fields[1]
                        .parse()
                        .map_err(|e| parse_err(format!("bad column index: {e}")))?;
                    let v: f64 = fields[2]
                        .parse()
                        .map_err(|e| parse_err(format!("bad coefficient: {e}")))?;
                    let cur = q.get(i, j).map_err(|e| parse_err(e.to_string()))?;
                    q.set(i, j, cur + v).map_err(|e| parse_err(e.to_string()))?;
                }
            }
        }
        instance.ok_or(Error::Parse {
            line: 0,
            message: "missing variable count".into(),
        })
    }

    pub fn load(path: impl AsRef<Path>) -> Result<Self> {
        Self::read(std::fs::File::open(path)?)
    }

    /// Text form; zero coefficients are omitted. Round-trips exactly.
    pub fn to_text(&self) -> String {
        let mut out = format!("{}\n", self.n);
        for (i, j, v) in self.terms().filter(|t| t.2 != 0.0) {
            let _ = writeln!(out, "{i} {j} {v}");
        }
        out
    }

    pub fn save(&self, path: impl AsRef<Path>) -> Result<()> {
        std::fs::write(path, self.to_text())?;
        Ok(())
    }
}

/// Exhaustive enumeration with the default cap of 20 variables.
pub fn brute_force_solve(instance: &QuboInstance) -> Result<OracleResult> {
    brute_force_solve_capped(instance, DEFAULT_ORACLE_CAP)
}

/// Evaluates every bitstring directly (not through the incremental
/// landscape), so it can serve as a check on it.
pub fn brute_force_solve_capped(instance: &QuboInstance, cap: usize) -> Result<OracleResult> {
    let n = instance.n();
    if n > cap {
        return Err(Error::ResourceLimit(format!(
            "brute force over n = {n} exceeds the oracle cap of {cap}"
        )));
    }
    let energies: Vec<f64> = (0..1usize << n)
        .into_par_iter()
        .map(|x| instance.energy_of_index(x))
        .collect();
    let min_energy = energies.iter().cloned().fold(f64::INFINITY, f64::min);
    let argmin = energies
        .iter()
        .enumerate()
        .filter(|(_, &e)| e == min_energy)
        .map(|(x, _)| Bitstring::from_index(x, n))
        .collect();
    let mut sorted_spectrum = energies;
    sorted_spectrum.par_sort_unstable_by(f64::total_cmp);
    let eigengap = sorted_spectrum[1] - sorted_spectrum[0];
    Ok(OracleResult {
        min_energy,
        argmin,
        sorted_spectrum,
        eigengap,
    })
}
