//! Spectrum estimation commands: transform, compare, resolution.

use std::path::Path;

use clap::ValueEnum;
use edft::baselines::{capon_iterative, classical_dft, hrdft};
use edft::engine::{resolution_curve, run_edft, run_edft_on_path, EngineOptions, ExecutionPath, StopCode};
use edft::signal::{FrequencyGrid, SampledSequence};
use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::failure::Failure;
use crate::io;
use crate::settings::{OverrideArgs, Settings};

#[derive(ValueEnum, Serialize, Deserialize, Debug, Clone, Copy, PartialEq, Eq)]
#[serde(rename_all = "lowercase")]
pub enum Method {
    Dft,
    Edft,
    /// EDFT on the general (dense) route, for arbitrary times and frequencies.
    Nedft,
    Hrdft,
    Capon,
}

impl Method {
    pub fn name(self) -> &'static str {
        match self {
            Method::Dft => "dft",
            Method::Edft => "edft",
            Method::Nedft => "nedft",
            Method::Hrdft => "hrdft",
            Method::Capon => "capon",
        }
    }
}

/// Summary written next to every spectrum.
#[derive(Serialize, Debug, Clone, PartialEq)]
pub struct Summary {
    pub method: Method,
    pub iterations: usize,
    pub stop_code: u8,
    pub budget_deviation: Option<f64>,
    pub n: usize,
    pub k_known: usize,
}

pub struct MethodOutput {
    pub f: Option<Vec<Complex64>>,
    pub s: Option<Vec<Complex64>>,
    pub fres: Option<Vec<f64>>,
    pub summary: Summary,
}

impl MethodOutput {
    pub fn columns(&self) -> io::SpectrumColumns<'_> {
        io::SpectrumColumns { f: self.f.as_deref(), s: self.s.as_deref(), fres: self.fres.as_deref() }
    }
}

/// Analysis grid: `--freqs` if given, else `n` uniform points over
/// `[-f_u, f_u)`. Defaults: `n` = number of sample slots, `f_u = 1/(2·T)`
/// with `T` the (mean) sampling period.
pub fn analysis_grid(
    x: &SampledSequence,
    settings: &Settings,
    freqs: Option<&Path>,
) -> Result<(FrequencyGrid, f64), Failure> {
    let fu = settings.f_upper.unwrap_or_else(|| 0.5 / x.mean_period());
    let grid = match freqs {
        Some(p) => FrequencyGrid::arbitrary(io::load_column(p, "f")?, fu)?,
        None => FrequencyGrid::uniform(settings.n.unwrap_or(x.len()), fu)?,
    };
    Ok((grid, fu))
}

fn numerical_if_empty(iterations: usize, stop: StopCode, method: Method) -> Result<(), Failure> {
    if iterations == 0 {
        return Err(Failure::Numerical(format!(
            "{}: stop code {} on the first iteration",
            method.name(),
            stop.code()
        )));
    }
    Ok(())
}

pub fn run_method(
    method: Method,
    x: &SampledSequence,
    grid: &FrequencyGrid,
    fu: f64,
    opts: &EngineOptions,
) -> Result<MethodOutput, Failure> {
    let n = grid.len();
    let k_known = x.known_count().min(n);
    let period = x.mean_period();
    let summary = |iterations, stop: StopCode, dev| Summary {
        method,
        iterations,
        stop_code: stop.code(),
        budget_deviation: dev,
        n,
        k_known,
    };
    Ok(match method {
        Method::Dft => {
            let (f, s) = classical_dft(x, grid)?;
            let k = x.known_count();
            let fres = vec![1.0 / (2.0 * fu * period); n];
            MethodOutput { f: Some(f), s: Some(s), fres: Some(fres), summary: Summary { k_known: k, ..summary(1, StopCode::MaxIterations, Some(0.0)) } }
        }
        Method::Edft | Method::Nedft => {
            let r = if method == Method::Nedft {
                run_edft_on_path(x, grid, opts, ExecutionPath::Dense)?
            } else {
                run_edft(x, grid, opts)?
            };
            numerical_if_empty(r.iterations_done, r.stop_code, method)?;
            let fres = resolution_curve(&r, fu, period, r.k_known);
            let sm = summary(r.iterations_done, r.stop_code, Some(r.budget_deviation()));
            MethodOutput { f: Some(r.f), s: Some(r.s), fres: Some(fres), summary: sm }
        }
        Method::Hrdft => {
            let r = hrdft(x, grid, opts)?;
            numerical_if_empty(r.iterations_done, r.stop_code, method)?;
            MethodOutput { f: Some(r.f), s: None, fres: None, summary: summary(r.iterations_done, r.stop_code, None) }
        }
        Method::Capon => {
            let r = capon_iterative(x, grid, opts)?;
            numerical_if_empty(r.iterations_done, r.stop_code, method)?;
            let fres = resolution_curve(&r, fu, period, r.k_known);
            let sm = summary(r.iterations_done, r.stop_code, Some(r.budget_deviation()));
            MethodOutput { f: None, s: Some(r.s), fres: Some(fres), summary: sm }
        }
    })
}

struct Prepared {
    x: SampledSequence,
    grid: FrequencyGrid,
    fu: f64,
    settings: Settings,
}

fn prepare(input: &Path, method: Option<Method>, freqs: Option<&Path>, overrides: &OverrideArgs) -> Result<Prepared, Failure> {
    let mut settings = Settings::resolve(overrides, method)?;
    let x = io::load_samples(input)?;
    let (grid, fu) = analysis_grid(&x, &settings, freqs)?;
    if let Some(p) = &settings.weights {
        settings.engine.initial_weights = Some(io::load_weights(p, &grid)?);
    }
    Ok(Prepared { x, grid, fu, settings })
}

pub fn cmd_transform(
    input: &Path,
    output: &Path,
    method: Option<Method>,
    freqs: Option<&Path>,
    overrides: &OverrideArgs,
) -> Result<(), Failure> {
    let p = prepare(input, method, freqs, overrides)?;
    let out = run_method(p.settings.method, &p.x, &p.grid, p.fu, &p.settings.engine)?;
    io::write_spectrum(output, &p.grid, &out.columns())?;
    io::write_json(&io::sidecar_path(output), &out.summary)
}

pub const COMPARE_METHODS: [Method; 4] = [Method::Dft, Method::Edft, Method::Hrdft, Method::Capon];

pub fn cmd_compare(input: &Path, output: &Path, freqs: Option<&Path>, overrides: &OverrideArgs) -> Result<(), Failure> {
    let p = prepare(input, None, freqs, overrides)?;
    io::create_dir(output)?;
    // Methods are independent; results are collected in a fixed order.
    let results: Vec<Result<MethodOutput, Failure>> = std::thread::scope(|scope| {
        let handles: Vec<_> = COMPARE_METHODS
            .iter()
            .map(|&m| {
                let p = &p;
                scope.spawn(move || run_method(m, &p.x, &p.grid, p.fu, &p.settings.engine))
            })
            .collect();
        handles.into_iter().map(|h| h.join().expect("method thread panicked")).collect()
    });
    let mut summaries = Vec::new();
    for (m, r) in COMPARE_METHODS.iter().zip(results) {
        let out = r?;
        io::write_spectrum(&output.join(format!("{}.csv", m.name())), &p.grid, &out.columns())?;
        summaries.push(out.summary);
    }
    io::write_json(&output.join("summary.json"), &summaries)
}

pub fn cmd_resolution(
    input: &Path,
    output: &Path,
    method: Option<Method>,
    freqs: Option<&Path>,
    overrides: &OverrideArgs,
) -> Result<(), Failure> {
    let p = prepare(input, method, freqs, overrides)?;
    let out = run_method(p.settings.method, &p.x, &p.grid, p.fu, &p.settings.engine)?;
    let Some(fres) = &out.fres else {
        return Err(Failure::Usage(format!("{} has no resolution curve", p.settings.method.name())));
    };
    let dft = vec![1.0 / (2.0 * p.fu * p.x.mean_period()); p.grid.len()];
    io::write_curves(output, &p.grid, &["f", "fres", "fres_dft"], &[fres, &dft])?;
    io::write_json(&io::sidecar_path(output), &out.summary)
}
