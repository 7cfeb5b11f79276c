//! `edft` command-line tool: spectra, reconstruction, method comparison and
//! the reference simulation scenarios, all written as plot-ready CSV.

mod failure;
mod io;
mod methods;
mod settings;
mod simulate;

use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};

use crate::failure::Failure;
use crate::methods::Method;
use crate::settings::OverrideArgs;
use crate::simulate::Scenario;

#[derive(Parser, Debug)]
#[command(name = "edft", version, about = "Extended DFT spectral analysis")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand, Debug)]
enum Command {
    /// Compute a spectrum and write `f,F_re,F_im,S_re,S_im,psd_db,power_db,fres`.
    Transform(TransformArgs),
    /// Evaluate the inverse transform of a spectrum CSV at given times.
    Reconstruct(ReconstructArgs),
    /// Run dft, edft, hrdft and capon on one input; one CSV per method.
    Compare(TransformArgs),
    /// Regenerate a reference scenario into a directory.
    Simulate(SimulateArgs),
    /// Write the relative frequency resolution `f,fres,fres_dft`.
    Resolution(TransformArgs),
}

#[derive(Args, Debug)]
struct TransformArgs {
    /// Samples CSV with header `t,re,im`; empty `re,im` marks a missing sample.
    #[arg(short, long)]
    input: PathBuf,
    /// Output file (directory for `compare`).
    #[arg(short, long)]
    output: PathBuf,
    #[arg(long, value_enum)]
    method: Option<Method>,
    /// Arbitrary analysis frequencies, CSV with header `f`.
    #[arg(long)]
    freqs: Option<PathBuf>,
    #[command(flatten)]
    overrides: OverrideArgs,
}

#[derive(Args, Debug)]
struct ReconstructArgs {
    /// Spectrum CSV as written by `transform`.
    #[arg(short, long)]
    input: PathBuf,
    #[arg(short, long)]
    output: PathBuf,
    /// Output times, CSV with header `t`.
    #[arg(long, conflicts_with = "extrapolate", required_unless_present = "extrapolate")]
    times: Option<PathBuf>,
    /// Number of samples on the uniform grid implied by the spectrum.
    #[arg(long)]
    extrapolate: Option<usize>,
    /// First output time for `--extrapolate`.
    #[arg(long, default_value_t = 0.0)]
    t0: f64,
}

#[derive(Args, Debug)]
struct SimulateArgs {
    #[arg(value_enum)]
    scenario: Scenario,
    /// Output directory.
    #[arg(short, long)]
    output: PathBuf,
    /// External 64-sample data set (`t,re,im`) replacing the surrogate in fig5/fig6.
    #[arg(long)]
    data: Option<PathBuf>,
    #[command(flatten)]
    overrides: OverrideArgs,
}

fn run(cli: Cli) -> Result<(), Failure> {
    match cli.command {
        Command::Transform(a) => methods::cmd_transform(&a.input, &a.output, a.method, a.freqs.as_deref(), &a.overrides),
        Command::Compare(a) => methods::cmd_compare(&a.input, &a.output, a.freqs.as_deref(), &a.overrides),
        Command::Resolution(a) => {
            methods::cmd_resolution(&a.input, &a.output, a.method, a.freqs.as_deref(), &a.overrides)
        }
        Command::Reconstruct(a) => io::cmd_reconstruct(&a.input, &a.output, a.times.as_deref(), a.extrapolate, a.t0),
        Command::Simulate(a) => simulate::cmd_simulate(a.scenario, &a.output, a.data.as_deref(), &a.overrides),
    }
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(e) if !e.use_stderr() => {
            // --help / --version
            let _ = e.print();
            return ExitCode::SUCCESS;
        }
        Err(e) => {
            let msg = e.render().to_string();
            let first = msg.lines().next().unwrap_or_default().trim_start_matches("error: ");
            eprintln!("{}", Failure::Usage(first.to_string()).to_json());
            return ExitCode::from(2);
        }
    };
    match run(cli) {
        Ok(()) => ExitCode::SUCCESS,
        Err(f) => {
            eprintln!("{}", f.to_json());
            ExitCode::from(f.exit_code())
        }
    }
}
