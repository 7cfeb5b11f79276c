//! Option resolution: command-line flags override the JSON config file,
//! which overrides the built-in defaults.

use std::path::{Path, PathBuf};

use clap::Args;
use edft::engine::EngineOptions;
use serde::Deserialize;

use crate::failure::Failure;
use crate::methods::Method;

#[derive(Args, Debug, Clone, Default)]
pub struct OverrideArgs {
    /// JSON file with any of: method, n, f_upper, max_iters, rel_deviation,
    /// rel_threshold, weights, seed.
    #[arg(long)]
    pub config: Option<PathBuf>,
    /// Number of frequencies.
    #[arg(long)]
    pub n: Option<usize>,
    /// Upper frequency of the analysis band, Hz.
    #[arg(long = "f-upper")]
    pub f_upper: Option<f64>,
    #[arg(long = "max-iters")]
    pub max_iters: Option<usize>,
    #[arg(long = "rel-deviation")]
    pub rel_deviation: Option<f64>,
    #[arg(long = "rel-threshold")]
    pub rel_threshold: Option<f64>,
    /// Initial weights, CSV with header `w` (optionally `f,w`).
    #[arg(long)]
    pub weights: Option<PathBuf>,
    #[arg(long)]
    pub seed: Option<u64>,
}

#[derive(Deserialize, Debug, Default)]
#[serde(deny_unknown_fields)]
struct ConfigFile {
    method: Option<Method>,
    n: Option<usize>,
    f_upper: Option<f64>,
    max_iters: Option<usize>,
    rel_deviation: Option<f64>,
    rel_threshold: Option<f64>,
    weights: Option<PathBuf>,
    seed: Option<u64>,
}

/// Fully resolved settings; `None` fields fall back to input-dependent
/// defaults at the point of use.
#[derive(Debug, Clone)]
pub struct Settings {
    pub method: Method,
    pub n: Option<usize>,
    pub f_upper: Option<f64>,
    pub weights: Option<PathBuf>,
    pub seed: u64,
    pub engine: EngineOptions,
}

pub const DEFAULT_SEED: u64 = 1;

impl Settings {
    pub fn resolve(args: &OverrideArgs, method: Option<Method>) -> Result<Self, Failure> {
        Self::resolve_with(args, method, EngineOptions::default())
    }

    /// Like [`Settings::resolve`] with caller-supplied engine defaults.
    pub fn resolve_with(args: &OverrideArgs, method: Option<Method>, defaults: EngineOptions) -> Result<Self, Failure> {
        let file = match &args.config {
            Some(p) => load_config(p)?,
            None => ConfigFile::default(),
        };
        let engine = EngineOptions {
            max_iterations: args.max_iters.or(file.max_iters).unwrap_or(defaults.max_iterations),
            rel_deviation: args.rel_deviation.or(file.rel_deviation).unwrap_or(defaults.rel_deviation),
            rel_threshold: args.rel_threshold.or(file.rel_threshold).unwrap_or(defaults.rel_threshold),
            initial_weights: None,
        };
        engine.validate()?;
        let n = args.n.or(file.n);
        if n == Some(0) {
            return Err(Failure::Usage("--n must be positive".into()));
        }
        let f_upper = args.f_upper.or(file.f_upper);
        if let Some(f) = f_upper {
            if !(f > 0.0) || !f.is_finite() {
                return Err(Failure::Usage("--f-upper must be positive".into()));
            }
        }
        Ok(Self {
            method: method.or(file.method).unwrap_or(Method::Edft),
            n,
            f_upper,
            weights: args.weights.clone().or(file.weights),
            seed: args.seed.or(file.seed).unwrap_or(DEFAULT_SEED),
            engine,
        })
    }
}

fn load_config(path: &Path) -> Result<ConfigFile, Failure> {
    let text = std::fs::read_to_string(path).map_err(|e| Failure::io(path.display(), e))?;
    serde_json::from_str(&text).map_err(|e| Failure::Usage(format!("config {}: {e}", path.display())))
}
