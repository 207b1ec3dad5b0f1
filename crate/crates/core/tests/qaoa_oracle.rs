mod common;

use vqpm::qaoa::{optimize, qaoa_state, OptimizerConfig, QaoaParams};
use vqpm::{brute_force_solve, PhaseTable, QuboInstance};

#[test]
fn layered_circuit_matches_dense_operators() {
    for n in 1..=4 {
        for seed in 0..5u64 {
            let q = QuboInstance::random(n, seed, (-1.0, 1.0)).unwrap();
            let t = PhaseTable::from_instance(&q).unwrap();
            for p in 1..=3 {
                let gammas: Vec<f64> = (0..p)
                    .map(|l| 0.3 + 0.7 * l as f64 + 0.1 * seed as f64)
                    .collect();
                let betas: Vec<f64> = (0..p)
                    .map(|l| 0.2 + 0.45 * l as f64 - 0.05 * seed as f64)
                    .collect();
                let params = QaoaParams::new(gammas, betas).unwrap();
                let fast = qaoa_state(&t, &params).unwrap();
                let dense = common::dense_qaoa_state(&t, &params);
                for (a, b) in fast.amplitudes().iter().zip(&dense) {
                    assert!((a - b).norm() < 1e-9, "n={n} seed={seed} p={p}");
                }
            }
        }
    }
}

#[test]
fn zero_angle_layers_are_identity() {
    let q = QuboInstance::random(4, 9, (-1.0, 1.0)).unwrap();
    let t = PhaseTable::from_instance(&q).unwrap();
    let short = QaoaParams::new(vec![0.8, 1.3], vec![0.4, 0.1]).unwrap();
    let padded = QaoaParams::new(vec![0.8, 1.3, 0.0, 0.0], vec![0.4, 0.1, 0.0, 0.0]).unwrap();
    assert_eq!(
        qaoa_state(&t, &short).unwrap().amplitudes(),
        qaoa_state(&t, &padded).unwrap().amplitudes()
    );
}

#[test]
fn no_layers_leave_uniform_state() {
    for n in 1..=6 {
        let q = QuboInstance::random(n, 1, (-1.0, 1.0)).unwrap();
        let t = PhaseTable::from_instance(&q).unwrap();
        let s = qaoa_state(&t, &QaoaParams::zeros(0)).unwrap();
        let target = &brute_force_solve(&q).unwrap().argmin[0];
        assert!((s.probability(target.index()) - 0.5f64.powi(n as i32)).abs() < 1e-15);
    }
}

#[test]
fn flat_instance_stays_uniform_under_optimization() {
    let q = QuboInstance::zeros(3).unwrap();
    let t = PhaseTable::from_instance(&q).unwrap();
    let targets = brute_force_solve(&q).unwrap().argmin;
    let out = optimize(&t, 2, &OptimizerConfig::default(), &targets[..1]).unwrap();
    assert!((out.target_probability - 0.125).abs() < 1e-12);
    assert_eq!(out.best_expected_phase, 0.0);
}

#[test]
fn single_qubit_grid_scan_reaches_target() {
    // phases {0, π/2}: the target is |0>
    let t = PhaseTable::from_phases(vec![0.0, std::f64::consts::FRAC_PI_2]).unwrap();
    let mut best = 0.0f64;
    let steps = 64;
    for i in 0..=steps {
        for j in 0..=steps {
            let g = std::f64::consts::PI * 2.0 * i as f64 / steps as f64;
            let b = std::f64::consts::PI * j as f64 / steps as f64;
            let s = qaoa_state(&t, &QaoaParams::new(vec![g], vec![b]).unwrap()).unwrap();
            best = best.max(s.probability(0));
        }
    }
    assert!(best >= 0.9, "best grid value {best}");

    let targets = vec![vqpm::Bitstring::from_index(0, 1)];
    let out = optimize(&t, 1, &OptimizerConfig::default(), &targets).unwrap();
    assert!(out.target_probability >= 0.9);
}

#[test]
fn optimizer_is_seeded_and_history_monotone() {
    let q = QuboInstance::random(4, 3, (-1.0, 1.0)).unwrap();
    let t = PhaseTable::from_instance(&q).unwrap();
    let targets = brute_force_solve(&q).unwrap().argmin;
    let cfg = OptimizerConfig {
        max_evals: 300,
        restarts: 2,
        ..OptimizerConfig::default()
    };
    let a = optimize(&t, 2, &cfg, &targets).unwrap();
    let b = optimize(&t, 2, &cfg, &targets).unwrap();
    assert_eq!(a, b);
    assert!(a.evals_used <= 600);
    assert_eq!(a.history.len(), a.evals_used);
    assert!(a.history.windows(2).all(|w| w[1] <= w[0]));
    assert_eq!(*a.history.last().unwrap(), a.best_expected_phase);
    assert!(optimize(&t, 0, &cfg, &targets).is_err());
}
