//! Reference scenarios: generate a signal, run the estimators, write CSVs.

use std::path::Path;

use clap::ValueEnum;
use edft::engine::{run_edft, EngineOptions};
use edft::inverse::extrapolate_uniform;
use edft::signal::csv_io::write_samples;
use edft::signal::{FrequencyGrid, SampledSequence};
use edft::testgen::{
    gen_complex_test_signal, gen_complex_test_signal_at, gen_jittered_times, gen_marple_kay_surrogate, random_skip,
    TestSignalSpec, TrueSpectrum,
};
use serde_json::{json, Value};

use crate::failure::Failure;
use crate::io;
use crate::methods::{run_method, Method, MethodOutput};
use crate::settings::{OverrideArgs, Settings};

#[derive(ValueEnum, Debug, Clone, Copy, PartialEq, Eq)]
pub enum Scenario {
    /// Test signal, uniform sampling, K=64, N=1000.
    Fig1,
    /// Same process at jittered times.
    Fig2,
    /// Uniform vs jittered over two Nyquist zones (N=2000, f_u=1).
    Fig3,
    /// 16 samples removed.
    Fig4a,
    /// 24 samples removed.
    Fig4b,
    /// 32 samples removed.
    Fig4c,
    /// Three sinusoids in coloured noise: dft, edft, hrdft.
    Fig5,
    /// Extrapolation beyond the record by dft, edft, hrdft.
    Fig6,
}

impl Scenario {
    fn name(self) -> &'static str {
        match self {
            Scenario::Fig1 => "fig1",
            Scenario::Fig2 => "fig2",
            Scenario::Fig3 => "fig3",
            Scenario::Fig4a => "fig4a",
            Scenario::Fig4b => "fig4b",
            Scenario::Fig4c => "fig4c",
            Scenario::Fig5 => "fig5",
            Scenario::Fig6 => "fig6",
        }
    }
}

const DEFAULT_ITERATIONS: usize = 10;
const DEFAULT_N: usize = 1000;
const JITTER: f64 = 0.8;
const EXPONENT_FREQ: f64 = 0.35;
/// Recovery tolerance for the exponent's power, dB.
const RECOVERY_DB: f64 = 3.0;

struct Ctx<'a> {
    dir: &'a Path,
    settings: Settings,
    summaries: Vec<Value>,
}

impl Ctx<'_> {
    fn path(&self, file: &str) -> std::path::PathBuf {
        self.dir.join(file)
    }

    fn samples(&self, file: &str, x: &SampledSequence) -> Result<(), Failure> {
        write_samples(io::create(&self.path(file))?, x)?;
        Ok(())
    }

    fn truth(&self, file: &str, truth: &TrueSpectrum, grid: &FrequencyGrid) -> Result<(), Failure> {
        truth.write_csv(grid, io::create(&self.path(file))?)?;
        Ok(())
    }

    /// Runs `method` and writes `<label>.csv`.
    fn spectrum(
        &mut self,
        label: &str,
        method: Method,
        x: &SampledSequence,
        grid: &FrequencyGrid,
    ) -> Result<MethodOutput, Failure> {
        let out = run_method(method, x, grid, grid.upper_freq(), &self.settings.engine)?;
        io::write_spectrum(&self.path(&format!("{label}.csv")), grid, &out.columns())?;
        self.summaries.push(json!({ "file": format!("{label}.csv"), "summary": out.summary }));
        Ok(out)
    }

    fn resolution(&self, file: &str, out: &MethodOutput, x: &SampledSequence, grid: &FrequencyGrid) -> Result<(), Failure> {
        let fres = out.fres.as_deref().unwrap_or_default();
        let dft = vec![1.0 / (2.0 * grid.upper_freq() * x.mean_period()); grid.len()];
        io::write_curves(&self.path(file), grid, &["f", "fres", "fres_dft"], &[fres, &dft])
    }
}

fn fig1_spec(seed: u64) -> TestSignalSpec {
    TestSignalSpec { seed, ..TestSignalSpec::default() }
}

fn power_db_at(out: &MethodOutput, grid: &FrequencyGrid, f: f64) -> f64 {
    let s = out.s.as_deref().expect("spectrum with S");
    10.0 * s[grid.nearest_index(f)].norm_sqr().log10()
}

pub fn cmd_simulate(scenario: Scenario, dir: &Path, data: Option<&Path>, overrides: &OverrideArgs) -> Result<(), Failure> {
    let defaults = EngineOptions::default().with_max_iterations(DEFAULT_ITERATIONS);
    let settings = Settings::resolve_with(overrides, None, defaults)?;
    if data.is_some() && !matches!(scenario, Scenario::Fig5 | Scenario::Fig6) {
        return Err(Failure::Usage("--data applies to fig5 and fig6 only".into()));
    }
    io::create_dir(dir)?;
    let seed = settings.seed;
    let n = settings.n.unwrap_or(DEFAULT_N);
    let mut ctx = Ctx { dir, settings, summaries: Vec::new() };
    let mut extra = serde_json::Map::new();

    match scenario {
        Scenario::Fig1 | Scenario::Fig2 => {
            let spec = fig1_spec(seed);
            let sig = if scenario == Scenario::Fig1 {
                gen_complex_test_signal(&spec)?
            } else {
                let times = gen_jittered_times(spec.k, spec.period, JITTER * spec.period, seed + 1000)?;
                gen_complex_test_signal_at(&spec, &times)?
            };
            let x = &sig.sequence;
            let grid = FrequencyGrid::uniform(n, ctx.settings.f_upper.unwrap_or(spec.upper_freq()))?;
            ctx.samples("samples.csv", x)?;
            ctx.truth("truth.csv", &sig.truth, &grid)?;
            ctx.spectrum("dft", Method::Dft, x, &grid)?;
            let edft = ctx.spectrum("edft", Method::Edft, x, &grid)?;
            ctx.resolution("resolution.csv", &edft, x, &grid)?;

            // One non-iterative step from the true spectrum as weights.
            let cell = 1.0 / (spec.k as f64 * x.mean_period());
            let opts = ctx.settings.engine.clone().with_max_iterations(1).with_initial_weights(sig.truth.weights(&grid, cell));
            let r = run_edft(x, &grid, &opts)?;
            let cols = io::SpectrumColumns { f: Some(&r.f), s: Some(&r.s), fres: None };
            io::write_spectrum(&ctx.path("edft_truth_weights.csv"), &grid, &cols)?;
            extra.insert("truth_weights_stop_code".into(), json!(r.stop_code.code()));
            extra.insert("exponent_power_db".into(), json!(power_db_at(&edft, &grid, EXPONENT_FREQ)));
        }
        Scenario::Fig3 => {
            let spec = fig1_spec(seed);
            let grid = FrequencyGrid::uniform(ctx.settings.n.unwrap_or(2000), ctx.settings.f_upper.unwrap_or(1.0))?;
            let uniform = gen_complex_test_signal(&spec)?;
            let times = gen_jittered_times(spec.k, spec.period, JITTER * spec.period, seed + 1000)?;
            let jittered = gen_complex_test_signal_at(&spec, &times)?;
            ctx.truth("truth.csv", &uniform.truth, &grid)?;
            for (label, sig) in [("uniform", &uniform), ("jittered", &jittered)] {
                ctx.samples(&format!("samples_{label}.csv"), &sig.sequence)?;
                ctx.spectrum(&format!("dft_{label}"), Method::Dft, &sig.sequence, &grid)?;
                ctx.spectrum(&format!("edft_{label}"), Method::Edft, &sig.sequence, &grid)?;
            }
        }
        Scenario::Fig4a | Scenario::Fig4b | Scenario::Fig4c => {
            let removed = match scenario {
                Scenario::Fig4a => 16,
                Scenario::Fig4b => 24,
                _ => 32,
            };
            let sig = gen_complex_test_signal(&fig1_spec(seed))?;
            let skip = random_skip(&sig.sequence, removed, seed)?;
            let x = &skip.gapped;
            let grid = FrequencyGrid::uniform(n, ctx.settings.f_upper.unwrap_or(0.5))?;
            ctx.samples("samples.csv", x)?;
            ctx.truth("truth.csv", &sig.truth, &grid)?;
            ctx.spectrum("dft", Method::Dft, x, &grid)?;
            let edft = ctx.spectrum("edft", Method::Edft, x, &grid)?;
            ctx.resolution("resolution.csv", &edft, x, &grid)?;
            let db = power_db_at(&edft, &grid, EXPONENT_FREQ);
            extra.insert("removed".into(), json!(skip.removed));
            extra.insert("mean_period".into(), json!(skip.mean_period));
            extra.insert("exponent_power_db".into(), json!(db));
            extra.insert("exponent_recovered".into(), json!(db.abs() <= RECOVERY_DB));
        }
        Scenario::Fig5 | Scenario::Fig6 => {
            let (x, truth) = match data {
                Some(p) => (io::load_samples(p)?, None),
                None => {
                    let sig = gen_marple_kay_surrogate(seed)?;
                    (sig.sequence, Some(sig.truth))
                }
            };
            let fu = ctx.settings.f_upper.unwrap_or(0.5 / x.mean_period());
            let grid = FrequencyGrid::uniform(n, fu)?;
            ctx.samples("samples.csv", &x)?;
            if let Some(t) = &truth {
                ctx.truth("truth.csv", t, &grid)?;
            }
            let t0 = x.times().first().copied().unwrap_or(0.0);
            let step = 1.0 / (2.0 * fu);
            for (label, method) in [("dft", Method::Dft), ("edft", Method::Edft), ("hrdft", Method::Hrdft)] {
                let out = ctx.spectrum(label, method, &x, &grid)?;
                if scenario == Scenario::Fig6 {
                    let f = out.f.as_deref().expect("spectrum with F");
                    let y = extrapolate_uniform(f, &grid)?;
                    let times: Vec<f64> = (0..y.len()).map(|k| t0 + k as f64 * step).collect();
                    io::write_series(&ctx.path(&format!("extrapolation_{label}.csv")), &times, &y)?;
                }
            }
        }
    }

    let mut summary = serde_json::Map::new();
    summary.insert("scenario".into(), json!(scenario.name()));
    summary.insert("seed".into(), json!(seed));
    summary.insert("runs".into(), Value::Array(std::mem::take(&mut ctx.summaries)));
    summary.extend(extra);
    io::write_json(&dir.join("summary.json"), &Value::Object(summary))
}
