//! Acceptance criteria 1–10. Runs without the libtest harness so that every
//! run prints one PASS/FAIL line per criterion; exits nonzero on any FAIL.

use std::f64::consts::PI;
use std::time::{Duration, Instant};

use edft::baselines::{capon_iterative, classical_dft, gwls_spectrum, hrdft};
use edft::engine::{
    edft_iteration, resolution_curve, run_edft, run_edft_on_path, run_edft_with_hook, EngineOptions, ExecutionPath,
    SpectrumResult, StopCode,
};
use edft::inverse::{extrapolate_uniform, inedft};
use edft::kernel::{build_exponent_matrix, correlation_from_weights};
use edft::signal::{FrequencyGrid, SampledSequence};
use edft::testgen::{
    gen_complex_test_signal, gen_complex_test_signal_at, gen_jittered_times, gen_marple_kay_surrogate, random_skip,
    rng_from_seed, TestSignalSpec,
};
use num_complex::Complex64;
use rand::Rng;

type Outcome = Result<String, String>;

const SEEDS: [u64; 5] = [1, 2, 3, 4, 5];

fn main() {
    let criteria: [(&str, fn() -> Outcome); 10] = [
        ("DFT coincidence", c1_dft_coincidence),
        ("round-trip recovery", c2_round_trip),
        ("resolution budget", c3_budget),
        ("resolution gain at the exponent", c4_resolution_gain),
        ("sinusoid separation", c5_separation),
        ("oracle equivalences", c6_oracles),
        ("extrapolation contrast", c7_extrapolation),
        ("missing-sample robustness", c8_missing_samples),
        ("two-Nyquist-zone discrimination", c9_two_zones),
        ("stop-code machinery", c10_stop_codes),
    ];
    let mut failed = 0;
    for (i, (name, run)) in criteria.iter().enumerate() {
        let start = Instant::now();
        let outcome = std::panic::catch_unwind(run).unwrap_or_else(|_| Err("panicked".into()));
        let secs = start.elapsed().as_secs_f64();
        match outcome {
            Ok(detail) => println!("criterion {:>2} PASS  {name} ({secs:.2} s): {detail}", i + 1),
            Err(detail) => {
                failed += 1;
                println!("criterion {:>2} FAIL  {name} ({secs:.2} s): {detail}", i + 1);
            }
        }
    }
    println!("acceptance: {} passed, {failed} failed", criteria.len() - failed);
    if failed > 0 {
        std::process::exit(1);
    }
}

fn check(cond: bool, msg: impl FnOnce() -> String) -> Result<(), String> {
    if cond {
        Ok(())
    } else {
        Err(msg())
    }
}

fn max_rel_err(a: &[Complex64], b: &[Complex64]) -> f64 {
    let scale = b.iter().map(|z| z.norm()).fold(0.0, f64::max).max(f64::MIN_POSITIVE);
    a.iter().zip(b).map(|(x, y)| (x - y).norm()).fold(0.0, f64::max) / scale
}

fn db(p: f64) -> f64 {
    10.0 * p.log10()
}

fn opts(iterations: usize) -> EngineOptions {
    EngineOptions::default().with_max_iterations(iterations)
}

/// Fig. 1 setting: the default three-component signal, 64 uniform samples.
fn fig1_signal(seed: u64) -> SampledSequence {
    gen_complex_test_signal(&TestSignalSpec { seed, ..TestSignalSpec::default() }).unwrap().sequence
}

/// Fig. 2 setting: the same process sampled at jittered times.
fn fig2_signal(seed: u64) -> SampledSequence {
    let times = gen_jittered_times(64, 1.0, 0.8, seed + 1000).unwrap();
    gen_complex_test_signal_at(&TestSignalSpec { seed, ..TestSignalSpec::default() }, &times).unwrap().sequence
}

/// Runs 1..=max iterations separately and returns each accepted iteration's result.
fn per_iteration(x: &SampledSequence, grid: &FrequencyGrid, max: usize) -> Vec<SpectrumResult> {
    let mut out: Vec<SpectrumResult> = Vec::new();
    for it in 1..=max {
        let r = run_edft(x, grid, &opts(it)).unwrap();
        let done = r.stop_code != StopCode::MaxIterations;
        if r.iterations_done == it {
            out.push(r);
        }
        if done {
            break;
        }
    }
    out
}

fn c1_dft_coincidence() -> Outcome {
    let start = Instant::now();
    let mut rng = rng_from_seed(11);
    let mut worst: f64 = 0.0;
    for k in [4usize, 16, 64] {
        let grid = FrequencyGrid::uniform(k, 0.5).unwrap();
        for _ in 0..20 {
            let vals: Vec<Complex64> =
                (0..k).map(|_| Complex64::new(rng.random_range(-1.0..1.0), rng.random_range(-1.0..1.0))).collect();
            let x = SampledSequence::uniform(vals, 1.0).unwrap();
            let res = run_edft(&x, &grid, &EngineOptions::default()).unwrap();
            let (f, _) = classical_dft(&x, &grid).unwrap();
            let s_expect: Vec<Complex64> = f.iter().map(|v| v / k as f64).collect();
            let ef = max_rel_err(&res.f, &f);
            let es = max_rel_err(&res.s, &s_expect);
            worst = worst.max(ef).max(es);
            check(ef <= 1e-10 && es <= 1e-10, || format!("K={k}: F err {ef:.2e}, S err {es:.2e}"))?;
            check(res.iterations_done == 1, || format!("K={k}: {} iterations", res.iterations_done))?;
        }
    }
    let elapsed = start.elapsed();
    check(elapsed < Duration::from_secs(1), || format!("took {elapsed:?}"))?;
    Ok(format!("60 sequences, worst relative error {worst:.2e}, {elapsed:.2?}"))
}

fn c2_round_trip() -> Outcome {
    let start = Instant::now();
    let x = fig1_signal(1);
    let grid = FrequencyGrid::uniform(1000, 0.5).unwrap();
    let runs = per_iteration(&x, &grid, 10);
    let mut worst: f64 = 0.0;
    for r in &runs {
        let y = inedft(&r.f, &grid, x.times()).unwrap();
        let e = max_rel_err(&y, x.values());
        worst = worst.max(e);
        check(e <= 1e-8, || format!("iteration {}: error {e:.2e}", r.iterations_done))?;
    }
    let elapsed = start.elapsed();
    check(elapsed < Duration::from_secs(30), || format!("took {elapsed:?}"))?;
    Ok(format!("{} iterations, worst relative error {worst:.2e}, {elapsed:.2?}", runs.len()))
}

fn check_budget(label: &str, r: &SpectrumResult) -> Result<(f64, f64), String> {
    let n = r.n() as f64;
    let mut max_ratio: f64 = 0.0;
    for (i, (&fs, (f, s))) in r.fs_ratio.iter().zip(r.f.iter().zip(&r.s)).enumerate() {
        check(fs > 0.0 && fs <= n, || format!("{label} it {}: F/S[{i}] = {fs}", r.iterations_done))?;
        if s.norm() > 0.0 {
            let q = f / s;
            check((q.re - fs).abs() <= 1e-9 * n && q.im.abs() <= 1e-9 * n, || {
                format!("{label} it {}: F/S[{i}] = {q} vs {fs}", r.iterations_done)
            })?;
        }
        max_ratio = max_ratio.max(fs / n);
    }
    let dev = r.budget_deviation();
    check(dev <= 0.0005, || format!("{label} it {}: budget deviation {dev:.2e}", r.iterations_done))?;
    Ok((dev, max_ratio))
}

fn c3_budget() -> Outcome {
    let grid = FrequencyGrid::uniform(1000, 0.5).unwrap();
    let gapped = random_skip(&fig1_signal(2), 16, 2).unwrap().gapped;
    let scenarios = [
        ("uniform", fig1_signal(1)),
        ("jittered", fig2_signal(1)),
        ("gapped", gapped),
        ("surrogate", gen_marple_kay_surrogate(1).unwrap().sequence),
    ];
    let mut worst_dev: f64 = 0.0;
    let mut max_ratio: f64 = 0.0;
    let mut count = 0;
    for (label, x) in &scenarios {
        for r in per_iteration(x, &grid, 10) {
            let (d, m) = check_budget(label, &r)?;
            worst_dev = worst_dev.max(d);
            max_ratio = max_ratio.max(m);
            count += 1;
        }
    }
    Ok(format!("{count} accepted iterations, worst deviation {worst_dev:.2e}, max (F/S)/N {max_ratio:.6}"))
}

fn c4_resolution_gain() -> Outcome {
    let x = fig1_signal(1);
    let grid = FrequencyGrid::uniform(1000, 0.5).unwrap();
    let r = run_edft(&x, &grid, &opts(10)).unwrap();
    let curve = resolution_curve(&r, 0.5, x.mean_period(), x.known_count());
    let best = grid
        .freqs()
        .iter()
        .zip(&curve)
        .filter(|(f, _)| (**f - 0.35).abs() <= 0.005 + 1e-12)
        .map(|(_, v)| *v)
        .fold(0.0, f64::max);
    check(best >= 8.0, || format!("max resolution near 0.35 Hz is {best:.3}"))?;

    let (f, s) = classical_dft(&x, &grid).unwrap();
    let dft_curve: Vec<f64> = f.iter().zip(&s).map(|(a, b)| (a / b).re / (2.0 * 0.5 * 1.0 * 64.0)).collect();
    let dft_dev = dft_curve.iter().map(|v| (v - 1.0).abs()).fold(0.0, f64::max);
    check(dft_dev <= 1e-9, || format!("classical DFT curve deviates by {dft_dev:.2e}"))?;
    Ok(format!("EDFT max near 0.35 Hz = {best:.2} after {} iterations; DFT curve |dev| {dft_dev:.1e}", r.iterations_done))
}

/// Local maxima of `p` at bins with frequency in `(lo, hi)`.
fn local_maxima(grid: &FrequencyGrid, p: &[f64], lo: f64, hi: f64) -> Vec<usize> {
    let n = p.len();
    (0..n)
        .filter(|&i| {
            let f = grid.freqs()[i];
            f > lo && f < hi && p[i] > p[(i + n - 1) % n] && p[i] > p[(i + 1) % n]
        })
        .collect()
}

fn c5_separation() -> Outcome {
    let grid = FrequencyGrid::uniform(1000, 0.5).unwrap();
    let mut passes = 0;
    let mut notes = Vec::new();
    for seed in SEEDS {
        let x = gen_marple_kay_surrogate(seed).unwrap().sequence;
        let r = run_edft(&x, &grid, &opts(10)).unwrap();
        let p: Vec<f64> = r.s.iter().map(|z| z.norm_sqr()).collect();
        let mut peaks = local_maxima(&grid, &p, 0.19, 0.22);
        peaks.sort_by(|&a, &b| p[b].total_cmp(&p[a]));
        let dip_db = if peaks.len() >= 2 {
            let (a, b) = (peaks[0].min(peaks[1]), peaks[0].max(peaks[1]));
            let dip = p[a..=b].iter().cloned().fold(f64::INFINITY, f64::min);
            db(p[a].min(p[b]) / dip)
        } else {
            0.0
        };
        let (f, _) = classical_dft(&x, &grid).unwrap();
        let pd: Vec<f64> = f.iter().map(|z| z.norm_sqr()).collect();
        let dft_peaks = local_maxima(&grid, &pd, 0.19, 0.22).len();
        let ok = peaks.len() >= 2 && dip_db >= 3.0 && dft_peaks == 1;
        passes += ok as usize;
        notes.push(format!("seed {seed}: {} EDFT peaks, dip {dip_db:.1} dB, {dft_peaks} DFT peak(s)", peaks.len()));
    }
    let detail = format!("{passes}/5 seeds pass [{}]", notes.join("; "));
    check(passes >= 4, || detail.clone())?;
    Ok(detail)
}

fn c6_oracles() -> Outcome {
    let mut worst = [0.0f64; 4];
    let mut rng = rng_from_seed(66);
    let random_seq = |k: usize, rng: &mut rand_xoshiro::Xoshiro256PlusPlus| {
        let vals = (0..k).map(|_| Complex64::new(rng.random_range(-1.0..1.0), rng.random_range(-1.0..1.0))).collect();
        SampledSequence::uniform(vals, 1.0).unwrap()
    };

    // (a) fast Toeplitz path against the dense path.
    for k in [8usize, 15, 16, 64] {
        let n = if k == 64 { 1000 } else { 4 * k };
        let grid = FrequencyGrid::uniform(n, 0.5).unwrap();
        let inputs = if k == 64 { vec![fig1_signal(1), random_seq(k, &mut rng)] } else { vec![random_seq(k, &mut rng)] };
        for x in inputs {
            let fast = run_edft(&x, &grid, &EngineOptions::default()).unwrap();
            check(fast.path == ExecutionPath::UniformFast, || format!("K={k}: fast path not selected"))?;
            let dense = run_edft_on_path(&x, &grid, &EngineOptions::default(), ExecutionPath::Dense).unwrap();
            let e = max_rel_err(&fast.f, &dense.f).max(max_rel_err(&fast.s, &dense.s));
            worst[0] = worst[0].max(e);
            check(e <= 1e-8, || format!("(a) K={k}: error {e:.2e}"))?;
            check(fast.stop_code == dense.stop_code && fast.iterations_done == dense.iterations_done, || {
                format!("(a) K={k}: stops {:?}/{} vs {:?}/{}", fast.stop_code, fast.iterations_done, dense.stop_code, dense.iterations_done)
            })?;
        }
    }

    // (b) gapped Toeplitz path against the dense path on the known samples.
    let grid = FrequencyGrid::uniform(1000, 0.5).unwrap();
    let arbitrary = FrequencyGrid::arbitrary(grid.freqs().to_vec(), 0.5).unwrap();
    for removed in [4usize, 16, 24] {
        let gapped = random_skip(&fig1_signal(3), removed, 3).unwrap();
        let slow = run_edft(&gapped.gapped, &grid, &EngineOptions::default()).unwrap();
        check(slow.path == ExecutionPath::GappedToeplitz, || "gapped path not selected".into())?;
        let dense = run_edft(&gapped.nonuniform, &arbitrary, &EngineOptions::default()).unwrap();
        let e = max_rel_err(&slow.f, &dense.f).max(max_rel_err(&slow.s, &dense.s));
        worst[1] = worst[1].max(e);
        check(e <= 1e-8, || format!("(b) {removed} removed: error {e:.2e}"))?;
        check(slow.stop_code == dense.stop_code && slow.iterations_done == dense.iterations_done, || {
            format!("(b) {removed} removed: stop codes differ")
        })?;
    }

    // (c) GWLS with Q = Rᵀ reproduces the EDFT amplitude spectrum.
    for trial in 0..20 {
        let k = rng.random_range(2..=16usize);
        let n = rng.random_range(k..=64usize);
        let times: Vec<f64> = if trial % 2 == 0 {
            (0..k).map(|i| i as f64).collect()
        } else {
            (0..k).map(|i| i as f64 + rng.random_range(0.0..0.8)).collect()
        };
        let vals = (0..k).map(|_| Complex64::new(rng.random_range(-1.0..1.0), rng.random_range(-1.0..1.0))).collect();
        let x = SampledSequence::from_times(vals, times.clone()).unwrap();
        let grid = FrequencyGrid::uniform(n, 0.5).unwrap();
        // Weights of a genuine iteration: the output of a short run.
        let w = run_edft(&x, &grid, &opts(1 + trial % 4)).unwrap().final_weights;
        let e = build_exponent_matrix(&times, &grid).unwrap();
        let Ok((_, s, _)) = edft_iteration(&x, &e, &w) else { continue };
        let r = correlation_from_weights(&times, &grid, &e, &w).unwrap().to_dense();
        let s_gwls = gwls_spectrum(&x, &grid, &r.transpose()).map_err(|e| format!("(c) trial {trial}: {e}"))?;
        let err = max_rel_err(&s_gwls, &s);
        worst[2] = worst[2].max(err);
        check(err <= 1e-10, || format!("(c) trial {trial} K={k} N={n}: error {err:.2e}"))?;
    }

    // (d) iterative Capon magnitudes equal the EDFT magnitudes.
    let cases = [(fig1_signal(1), 1000usize), (random_seq(16, &mut rng), 64)];
    for (x, n) in &cases {
        let grid = FrequencyGrid::uniform(*n, 0.5).unwrap();
        for it in 1..=10 {
            let a = run_edft(x, &grid, &opts(it)).unwrap();
            let c = capon_iterative(x, &grid, &opts(it)).unwrap();
            let e = a.s.iter().zip(&c.s).map(|(p, q)| (p.norm() - q.norm()).abs()).fold(0.0, f64::max);
            worst[3] = worst[3].max(e);
            check(e <= 1e-6, || format!("(d) K={} iteration {it}: error {e:.2e}", x.len()))?;
        }
    }
    Ok(format!(
        "(a) {:.1e} (b) {:.1e} (c) {:.1e} (d) {:.1e}",
        worst[0], worst[1], worst[2], worst[3]
    ))
}

fn mean_power(v: &[Complex64]) -> f64 {
    v.iter().map(|z| z.norm_sqr()).sum::<f64>() / v.len() as f64
}

fn c7_extrapolation() -> Outcome {
    let grid = FrequencyGrid::uniform(1000, 0.5).unwrap();
    let mut notes = Vec::new();
    for seed in SEEDS {
        let x = gen_marple_kay_surrogate(seed).unwrap().sequence;
        let input_power = mean_power(x.values());
        let (f_dft, _) = classical_dft(&x, &grid).unwrap();
        let dft = mean_power(&extrapolate_uniform(&f_dft, &grid).unwrap()[64..128]);
        let r = run_edft(&x, &grid, &opts(10)).unwrap();
        let edft = mean_power(&extrapolate_uniform(&r.f, &grid).unwrap()[64..128]);
        let h = hrdft(&x, &grid, &opts(10)).unwrap();
        let hr = mean_power(&extrapolate_uniform(&h.f, &grid).unwrap()[64..128]);
        let line = format!(
            "seed {seed}: DFT {dft:.1e}, EDFT {:.2}, HRDFT {:.2} (x input power)",
            edft / input_power,
            hr / input_power
        );
        check(dft <= 1e-20 && edft >= 0.1 * input_power && hr >= edft, || line.clone())?;
        notes.push(line);
    }
    Ok(notes.join("; "))
}

fn c8_missing_samples() -> Outcome {
    let grid = FrequencyGrid::uniform(1000, 0.5).unwrap();
    let bin = grid.nearest_index(0.35);
    let mut notes = Vec::new();
    for removed in [16usize, 24, 32] {
        let mut levels = Vec::new();
        for seed in SEEDS {
            let x = random_skip(&fig1_signal(seed), removed, seed).unwrap().gapped;
            let r = run_edft(&x, &grid, &opts(10)).unwrap();
            check(r.iterations_done >= 1, || format!("{removed} removed, seed {seed}: no accepted iteration"))?;
            let level = db(r.s[bin].norm_sqr());
            if removed < 32 {
                check(level.abs() <= 3.0, || format!("{removed} removed, seed {seed}: {level:.2} dB at 0.35 Hz"))?;
            }
            levels.push(format!("{level:.1}"));
        }
        notes.push(format!("{removed} removed: [{}] dB", levels.join(", ")));
    }
    Ok(notes.join("; "))
}

fn c9_two_zones() -> Outcome {
    let grid = FrequencyGrid::uniform(2000, 1.0).unwrap();
    let band_mean = |p: &[f64], lo: f64, hi: f64| {
        let sel: Vec<f64> = grid.freqs().iter().zip(p).filter(|(f, _)| **f >= lo && **f < hi).map(|(_, v)| *v).collect();
        sel.iter().sum::<f64>() / sel.len() as f64
    };
    let mut notes = Vec::new();
    for seed in SEEDS {
        let uniform = fig1_signal(seed);
        let r = run_edft(&uniform, &grid, &opts(10)).unwrap();
        let p: Vec<f64> = r.s.iter().map(|z| z.norm_sqr()).collect();
        let mirror = db(band_mean(&p, 0.5, 0.75) / band_mean(&p, -0.5, -0.25));
        check(mirror.abs() <= 3.0, || format!("seed {seed}: mirrored band differs by {mirror:.2} dB"))?;

        let jittered = fig2_signal(seed);
        let r = run_edft(&jittered, &grid, &opts(10)).unwrap();
        let p: Vec<f64> = r.s.iter().map(|z| z.norm_sqr()).collect();
        let peak = p[grid.nearest_index(0.35)];
        let images = [0.35 - 2.0, 0.35 - 1.0, 0.35 + 1.0];
        let worst = grid
            .freqs()
            .iter()
            .zip(&p)
            .filter(|(f, _)| **f > 0.55 && images.iter().all(|i| (**f - i).abs() > 0.01))
            .map(|(_, v)| *v)
            .fold(0.0, f64::max);
        let margin = db(peak / worst);
        check(margin >= 20.0, || format!("seed {seed}: jittered spectrum above 0.55 Hz only {margin:.1} dB below peak"))?;
        notes.push(format!("seed {seed}: mirror {mirror:.2} dB, margin {margin:.1} dB"));
    }
    Ok(notes.join("; "))
}

fn c10_stop_codes() -> Outcome {
    let x = fig1_signal(1);
    let grid = FrequencyGrid::uniform(1000, 0.5).unwrap();

    let r = run_edft(&x, &grid, &opts(2)).unwrap();
    check(r.stop_code == StopCode::MaxIterations && r.iterations_done == 2, || {
        format!("max_iterations=2 gave {:?} after {}", r.stop_code, r.iterations_done)
    })?;

    let o = EngineOptions { rel_threshold: 1.0, ..EngineOptions::default() };
    let r = run_edft(&x, &grid, &o).unwrap();
    check(r.stop_code == StopCode::ThresholdReached && r.iterations_done == 2, || {
        format!("rel_threshold=1 gave {:?} after {}", r.stop_code, r.iterations_done)
    })?;

    let reference = run_edft(&x, &grid, &opts(2)).unwrap();
    let mut hook = |it: usize, w: &mut Vec<f64>| {
        if it == 3 {
            // Fewer positive weights than samples: R becomes singular.
            for (i, v) in w.iter_mut().enumerate() {
                if i >= 10 {
                    *v = 0.0;
                }
            }
        }
    };
    let r = run_edft_with_hook(&x, &grid, &opts(10), &mut hook).unwrap();
    check(r.stop_code == StopCode::BudgetDeviation && r.iterations_done == 2, || {
        format!("injected weights gave {:?} after {}", r.stop_code, r.iterations_done)
    })?;
    check(r.f == reference.f && r.s == reference.s, || "outputs differ from iteration 2".into())?;

    let zeros = run_edft_with_hook(&x, &grid, &opts(10), &mut |_, w: &mut Vec<f64>| w.fill(0.0)).unwrap();
    check(
        zeros.stop_code == StopCode::BudgetDeviation
            && zeros.iterations_done == 0
            && zeros.f.iter().chain(&zeros.s).all(|z| *z == Complex64::new(0.0, 0.0)),
        || "first-iteration failure did not return zeros".into(),
    )?;
    let _ = PI;
    Ok("code 0 at max_iterations, code 2 at iteration 2, code 1 keeps iteration-2 output, zeros on first-iteration failure".into())
}
