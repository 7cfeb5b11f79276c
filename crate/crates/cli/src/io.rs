//! CSV and JSON file handling.

use std::fs::File;
use std::io::{BufReader, BufWriter, Write};
use std::path::{Path, PathBuf};

use edft::inverse::inedft;
use edft::signal::csv_io::{fmt_f64, read_samples};
use edft::signal::{FrequencyGrid, SampledSequence};
use num_complex::Complex64;
use serde::Serialize;

use crate::failure::Failure;

pub fn open(path: &Path) -> Result<BufReader<File>, Failure> {
    File::open(path).map(BufReader::new).map_err(|e| Failure::io(path.display(), e))
}

pub fn create(path: &Path) -> Result<BufWriter<File>, Failure> {
    File::create(path).map(BufWriter::new).map_err(|e| Failure::io(path.display(), e))
}

pub fn create_dir(path: &Path) -> Result<(), Failure> {
    std::fs::create_dir_all(path).map_err(|e| Failure::io(path.display(), e))
}

pub fn load_samples(path: &Path) -> Result<SampledSequence, Failure> {
    read_samples(open(path)?).map_err(|e| Failure::Io(format!("{}: {e}", path.display())))
}

fn csv_reader(path: &Path) -> Result<csv::Reader<BufReader<File>>, Failure> {
    Ok(csv::ReaderBuilder::new().trim(csv::Trim::All).from_reader(open(path)?))
}

fn csv_err(path: &Path, e: impl std::fmt::Display) -> Failure {
    Failure::Io(format!("{}: {e}", path.display()))
}

/// Reads the named columns; an empty cell becomes `None`.
fn read_columns(path: &Path, names: &[&str]) -> Result<Vec<Vec<Option<f64>>>, Failure> {
    let mut rdr = csv_reader(path)?;
    let headers = rdr.headers().map_err(|e| csv_err(path, e))?.clone();
    let idx: Vec<usize> = names
        .iter()
        .map(|n| headers.iter().position(|h| h == *n).ok_or_else(|| csv_err(path, format!("missing column {n}"))))
        .collect::<Result<_, _>>()?;
    let mut cols = vec![Vec::new(); names.len()];
    for (row, rec) in rdr.records().enumerate() {
        let rec = rec.map_err(|e| csv_err(path, e))?;
        for (c, &i) in idx.iter().enumerate() {
            let cell = rec.get(i).unwrap_or("");
            let v = if cell.is_empty() {
                None
            } else {
                Some(cell.parse::<f64>().map_err(|e| csv_err(path, format!("row {}: {e}: {cell:?}", row + 2)))?)
            };
            cols[c].push(v);
        }
    }
    Ok(cols)
}

fn required(path: &Path, name: &str, col: Vec<Option<f64>>) -> Result<Vec<f64>, Failure> {
    col.into_iter()
        .enumerate()
        .map(|(i, v)| v.ok_or_else(|| csv_err(path, format!("row {}: empty {name}", i + 2))))
        .collect()
}

pub fn load_column(path: &Path, name: &str) -> Result<Vec<f64>, Failure> {
    let col = read_columns(path, &[name])?.remove(0);
    required(path, name, col)
}

/// Initial weights in grid storage order. With an `f` column each weight is
/// placed at the nearest grid frequency; otherwise rows are taken in order.
pub fn load_weights(path: &Path, grid: &FrequencyGrid) -> Result<Vec<f64>, Failure> {
    let w = load_column(path, "w")?;
    let mut out = vec![0.0; grid.len()];
    match load_column(path, "f") {
        Ok(f) => {
            for (fi, wi) in f.iter().zip(&w) {
                out[grid.nearest_index(*fi)] = *wi;
            }
        }
        Err(_) if w.len() == grid.len() => out.copy_from_slice(&w),
        Err(_) => {
            return Err(Failure::Usage(format!("{} weights for {} frequencies", w.len(), grid.len())));
        }
    }
    Ok(out)
}

/// A spectrum as stored by [`write_spectrum`].
pub struct SpectrumFile {
    pub freqs: Vec<f64>,
    pub f: Vec<Complex64>,
}

pub fn load_spectrum(path: &Path) -> Result<SpectrumFile, Failure> {
    let mut cols = read_columns(path, &["f", "F_re", "F_im"])?;
    let im = cols.pop().unwrap();
    let re = cols.pop().unwrap();
    let freqs = required(path, "f", cols.pop().unwrap())?;
    let re = required(path, "F_re", re)?;
    let im = required(path, "F_im", im)?;
    Ok(SpectrumFile { freqs, f: re.into_iter().zip(im).map(|(a, b)| Complex64::new(a, b)).collect() })
}

fn opt_cell(v: Option<f64>) -> String {
    v.map(fmt_f64).unwrap_or_default()
}

/// One row set of a spectrum CSV; absent quantities are written as empty
/// cells.
pub struct SpectrumColumns<'a> {
    pub f: Option<&'a [Complex64]>,
    pub s: Option<&'a [Complex64]>,
    pub fres: Option<&'a [f64]>,
}

pub fn write_spectrum(path: &Path, grid: &FrequencyGrid, cols: &SpectrumColumns<'_>) -> Result<(), Failure> {
    let n = grid.len() as f64;
    let mut w = csv::Writer::from_writer(create(path)?);
    let io = |e: csv::Error| csv_err(path, e);
    w.write_record(["f", "F_re", "F_im", "S_re", "S_im", "psd_db", "power_db", "fres"]).map_err(io)?;
    for i in grid.ascending_order() {
        let f = cols.f.map(|v| v[i]);
        let s = cols.s.map(|v| v[i]);
        w.write_record([
            fmt_f64(grid.freqs()[i]),
            opt_cell(f.map(|z| z.re)),
            opt_cell(f.map(|z| z.im)),
            opt_cell(s.map(|z| z.re)),
            opt_cell(s.map(|z| z.im)),
            opt_cell(f.map(|z| 10.0 * (z.norm_sqr() / n).log10())),
            opt_cell(s.map(|z| 10.0 * z.norm_sqr().log10())),
            opt_cell(cols.fres.map(|v| v[i])),
        ])
        .map_err(io)?;
    }
    w.flush().map_err(|e| csv_err(path, e))
}

pub fn write_series(path: &Path, times: &[f64], values: &[Complex64]) -> Result<(), Failure> {
    let mut w = csv::Writer::from_writer(create(path)?);
    let io = |e: csv::Error| csv_err(path, e);
    w.write_record(["t", "re", "im"]).map_err(io)?;
    for (t, v) in times.iter().zip(values) {
        w.write_record([fmt_f64(*t), fmt_f64(v.re), fmt_f64(v.im)]).map_err(io)?;
    }
    w.flush().map_err(|e| csv_err(path, e))
}

/// Writes `header` columns in ascending frequency order.
pub fn write_curves(path: &Path, grid: &FrequencyGrid, header: &[&str], curves: &[&[f64]]) -> Result<(), Failure> {
    let mut w = csv::Writer::from_writer(create(path)?);
    let io = |e: csv::Error| csv_err(path, e);
    w.write_record(header).map_err(io)?;
    for i in grid.ascending_order() {
        let mut row = vec![fmt_f64(grid.freqs()[i])];
        row.extend(curves.iter().map(|c| fmt_f64(c[i])));
        w.write_record(row).map_err(io)?;
    }
    w.flush().map_err(|e| csv_err(path, e))
}

pub fn write_json<T: Serialize>(path: &Path, value: &T) -> Result<(), Failure> {
    let mut out = create(path)?;
    serde_json::to_writer_pretty(&mut out, value).map_err(|e| csv_err(path, e))?;
    writeln!(out).and_then(|_| out.flush()).map_err(|e| Failure::io(path.display(), e))
}

/// `spectrum.csv` → `spectrum.json`.
pub fn sidecar_path(output: &Path) -> PathBuf {
    let p = output.with_extension("json");
    if p == output {
        output.with_extension("summary.json")
    } else {
        p
    }
}

/// Grid rebuilt from stored frequencies: uniform storage order is not
/// needed by the inverse transform, only the frequency values.
fn grid_from_file(spec: &SpectrumFile) -> Result<FrequencyGrid, Failure> {
    let fu = spec.freqs.iter().fold(0.0f64, |m, f| m.max(f.abs()));
    Ok(FrequencyGrid::arbitrary(spec.freqs.clone(), fu.max(f64::MIN_POSITIVE))?)
}

pub fn cmd_reconstruct(
    input: &Path,
    output: &Path,
    times: Option<&Path>,
    extrapolate: Option<usize>,
    t0: f64,
) -> Result<(), Failure> {
    let spec = load_spectrum(input)?;
    if spec.freqs.is_empty() {
        return Err(Failure::Usage(format!("{}: empty spectrum", input.display())));
    }
    let grid = grid_from_file(&spec)?;
    let times = match (times, extrapolate) {
        (Some(p), _) => load_column(p, "t")?,
        (None, Some(m)) => {
            let n = spec.freqs.len();
            if n < 2 {
                return Err(Failure::Usage("extrapolation needs at least two frequencies".into()));
            }
            let (lo, hi) = spec.freqs.iter().fold((f64::INFINITY, f64::NEG_INFINITY), |(a, b), &f| (a.min(f), b.max(f)));
            let df = (hi - lo) / (n - 1) as f64;
            let period = 1.0 / (n as f64 * df);
            (0..m).map(|k| t0 + k as f64 * period).collect()
        }
        (None, None) => return Err(Failure::Usage("either --times or --extrapolate is required".into())),
    };
    let y = inedft(&spec.f, &grid, &times)?;
    write_series(output, &times, &y)
}
