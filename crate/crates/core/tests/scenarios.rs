//! End-to-end checks on the generated test signals.

use edft::baselines::classical_dft;
use edft::engine::{run_edft, EngineOptions, StopCode};
use edft::inverse::{extrapolate_uniform, inedft};
use edft::signal::FrequencyGrid;
use edft::testgen::{gen_complex_test_signal, gen_marple_kay_surrogate, TestSignalSpec};
use num_complex::Complex64;

fn mean_power(v: &[Complex64]) -> f64 {
    v.iter().map(|z| z.norm_sqr()).sum::<f64>() / v.len() as f64
}

#[test]
fn weak_harmonic_is_ten_db_down() {
    let grid = FrequencyGrid::uniform(1000, 0.5).unwrap();
    for seed in 1..=5 {
        let x = gen_marple_kay_surrogate(seed).unwrap().sequence;
        let r = run_edft(&x, &grid, &EngineOptions::default()).unwrap();
        assert_ne!(r.stop_code, StopCode::BudgetDeviation);
        let level = |f: f64| 10.0 * r.s[grid.nearest_index(f)].norm_sqr().log10();
        let strong = level(0.2).max(level(0.21));
        let gap = strong - level(0.1);
        assert!((gap - 10.0).abs() <= 2.0, "seed {seed}: {gap:.2} dB");
    }
}

#[test]
fn extrapolation_decays_gradually() {
    let sig = gen_complex_test_signal(&TestSignalSpec { seed: 3, ..TestSignalSpec::default() }).unwrap();
    let x = sig.sequence;
    let grid = FrequencyGrid::uniform(1000, 0.5).unwrap();
    let r = run_edft(&x, &grid, &EngineOptions::default().with_max_iterations(10)).unwrap();
    let times: Vec<f64> = (64..1000).map(|t| t as f64).collect();
    let y = inedft(&r.f, &grid, &times).unwrap();
    let near = mean_power(&y[..64]);
    let far = mean_power(&y[436 - 64..436]);
    assert!(near > 0.1 * mean_power(x.values()), "near {near}");
    assert!(near > far, "near {near} far {far}");
}

#[test]
fn classical_dft_extrapolates_zeros_on_surrogate() {
    let x = gen_marple_kay_surrogate(1).unwrap().sequence;
    let grid = FrequencyGrid::uniform(1000, 0.5).unwrap();
    let (f, _) = classical_dft(&x, &grid).unwrap();
    let y = extrapolate_uniform(&f, &grid).unwrap();
    assert!(y[..64].iter().zip(x.values()).all(|(a, b)| (a - b).norm() < 1e-12));
    assert!(y[64..].iter().all(|z| z.norm() < 1e-13));
}

#[test]
fn edft_recovers_exponent_power() {
    let grid = FrequencyGrid::uniform(1000, 0.5).unwrap();
    let bin = grid.nearest_index(0.35);
    for seed in 0..3 {
        let x = gen_complex_test_signal(&TestSignalSpec { seed, ..TestSignalSpec::default() }).unwrap().sequence;
        let r = run_edft(&x, &grid, &EngineOptions::default().with_max_iterations(10)).unwrap();
        let db = 10.0 * r.s[bin].norm_sqr().log10();
        assert!(db.abs() < 1.0, "seed {seed}: {db:.2} dB");
    }
}

#[test]
fn truth_weights_need_no_iterations() {
    // Weights taken from the generating spectrum give, in one pass, an
    // estimate close to the tenth iteration started from ones.
    let sig = gen_complex_test_signal(&TestSignalSpec { seed: 4, ..TestSignalSpec::default() }).unwrap();
    let grid = FrequencyGrid::uniform(1000, 0.5).unwrap();
    let w = sig.truth.weights(&grid, 1.0 / 64.0);
    let one = run_edft(&sig.sequence, &grid, &EngineOptions::default().with_max_iterations(1).with_initial_weights(w)).unwrap();
    let ten = run_edft(&sig.sequence, &grid, &EngineOptions::default().with_max_iterations(10)).unwrap();
    let bin = grid.nearest_index(0.35);
    let a = 10.0 * one.s[bin].norm_sqr().log10();
    let b = 10.0 * ten.s[bin].norm_sqr().log10();
    assert!((a - b).abs() < 1.0, "{a:.2} vs {b:.2}");
}
