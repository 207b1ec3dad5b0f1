//! Reference implementations shared by the integration tests. Nothing here
//! calls into the library's numerics, so agreement is a real cross-check.
#![allow(dead_code)]

use num_complex::Complex64;

use vqpm::qaoa::QaoaParams;
use vqpm::PhaseTable;

/// Cosine by Taylor series after reduction to `[-π, π]`.
pub fn cos(x: f64) -> f64 {
    let two_pi = 2.0 * std::f64::consts::PI;
    let x = x - two_pi * (x / two_pi).round();
    let x2 = x * x;
    let (mut term, mut sum) = (1.0f64, 1.0f64);
    for m in 1..40 {
        term *= -x2 / ((2 * m - 1) * (2 * m)) as f64;
        sum += term;
        if term.abs() < 1e-18 {
            break;
        }
    }
    sum
}

fn atanh_series(z: f64) -> f64 {
    let z2 = z * z;
    let (mut power, mut sum) = (z, 0.0);
    let mut m = 1.0;
    while power.abs() > 1e-19 {
        sum += power / m;
        power *= z2;
        m += 2.0;
    }
    sum
}

/// Natural log: split off powers of two, then `2·atanh((m-1)/(m+1))`.
pub fn ln(x: f64) -> f64 {
    assert!(x > 0.0 && x.is_finite());
    let ln2 = 2.0 * atanh_series(1.0 / 3.0);
    let (mut m, mut e) = (x, 0i32);
    while m >= 2.0 {
        m /= 2.0;
        e += 1;
    }
    while m < 1.0 {
        m *= 2.0;
        e -= 1;
    }
    f64::from(e) * ln2 + 2.0 * atanh_series((m - 1.0) / (m + 1.0))
}

/// Relative weights `cos(λ_x/2)^{2k}` of the basis states after `k` power
/// steps from the uniform state, scaled so the largest is 1.
pub fn power_weights(phases: &[f64], k: u32) -> Vec<f64> {
    let logs: Vec<f64> = phases
        .iter()
        .map(|&l| 2.0 * f64::from(k) * ln(cos(l / 2.0)))
        .collect();
    let top = logs.iter().cloned().fold(f64::NEG_INFINITY, f64::max);
    logs.iter().map(|l| (l - top).exp()).collect()
}

pub type Matrix = Vec<Vec<Complex64>>;

fn matmul(a: &Matrix, b: &Matrix) -> Matrix {
    let d = a.len();
    let mut out = vec![vec![Complex64::new(0.0, 0.0); d]; d];
    for i in 0..d {
        for k in 0..d {
            for j in 0..d {
                out[i][j] += a[i][k] * b[k][j];
            }
        }
    }
    out
}

fn cost_matrix(table: &PhaseTable, gamma: f64) -> Matrix {
    let d = table.dim();
    let mut m = vec![vec![Complex64::new(0.0, 0.0); d]; d];
    for (i, row) in m.iter_mut().enumerate() {
        row[i] = Complex64::from_polar(1.0, -gamma * table.phase(i));
    }
    m
}

/// Tensor power of R_x(2β) built entry by entry from the qubit bits.
fn mixer_matrix(n: usize, beta: f64) -> Matrix {
    let r = [
        [
            Complex64::new(beta.cos(), 0.0),
            Complex64::new(0.0, -beta.sin()),
        ],
        [
            Complex64::new(0.0, -beta.sin()),
            Complex64::new(beta.cos(), 0.0),
        ],
    ];
    let d = 1 << n;
    (0..d)
        .map(|i| {
            (0..d)
                .map(|j| (0..n).map(|q| r[(i >> q) & 1][(j >> q) & 1]).product())
                .collect()
        })
        .collect()
}

/// QAOA state from explicitly composed 2^n × 2^n layer operators.
pub fn dense_qaoa_state(table: &PhaseTable, params: &QaoaParams) -> Vec<Complex64> {
    let d = table.dim();
    let mut op: Matrix = (0..d)
        .map(|i| {
            (0..d)
                .map(|j| Complex64::new(if i == j { 1.0 } else { 0.0 }, 0.0))
                .collect()
        })
        .collect();
    for (&g, &b) in params.gammas.iter().zip(&params.betas) {
        op = matmul(
            &mixer_matrix(table.n(), b),
            &matmul(&cost_matrix(table, g), &op),
        );
    }
    let amp = Complex64::new((d as f64).powf(-0.5), 0.0);
    op.iter()
        .map(|row| row.iter().map(|x| x * amp).sum())
        .collect()
}
