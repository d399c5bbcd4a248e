//! Command-line surface for the stationary SPDE field library.
//!
//! Exit codes: `0` success, `2` validation or input failure, `3` for a
//! mathematical non-existence verdict (so scripts can assert the negative
//! results as first-class outcomes).

use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Parser, Subcommand, ValueEnum};
use serde::Serialize;

use sgrf::analysis::{check_existence, CheckConfig};
use sgrf::covariance::{covariance_grid, CovarianceGrid, GridSampling, Provenance};
use sgrf::error::Error;
use sgrf::model::{classify, model_from_doc, parse_model_doc, solution_spectral_density, ModelDoc};
use sgrf::simulate::{
    compare, covariance_from_spdg, covariance_to_spdg, empirical_covariance, simulate, GridAxis,
    GridSpec, Realization,
};
use sgrf::symbol::check_hermitian;

#[derive(Parser)]
#[command(
    name = "sgrf",
    about = "Stationary random fields from SPDE symbol functions",
    version
)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, ValueEnum)]
enum Format {
    Csv,
    Spdg,
    Json,
}

#[derive(Subcommand)]
enum Command {
    /// Report symbol metadata, invertibility and the space-time
    /// separability/symmetry classification of a model
    Describe {
        #[arg(long)]
        model: PathBuf,
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Existence/uniqueness verdict for the stationary solution
    Check {
        #[arg(long)]
        model: PathBuf,
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Covariance values on a centered lag grid
    Covariance {
        #[arg(long)]
        model: PathBuf,
        /// Lag axes as `n1,D1[,n2,D2,...]` (count and spacing per axis;
        /// time models take the temporal axis last)
        #[arg(long)]
        lags: String,
        #[arg(long)]
        out: Option<PathBuf>,
        #[arg(long, value_enum, default_value_t = Format::Csv)]
        format: Format,
        /// Store exact cell averages instead of point values
        #[arg(long)]
        cell_averages: bool,
    },
    /// Simulate Gaussian realizations and write them as SPDG grids
    Simulate {
        #[arg(long)]
        model: PathBuf,
        /// Grid axes as `n1,D1[,n2,D2,...]`; time models take the temporal
        /// axis last
        #[arg(long)]
        grid: String,
        #[arg(long, default_value_t = 0)]
        seed: u64,
        #[arg(long, default_value_t = 1)]
        realizations: usize,
        #[arg(long)]
        out: PathBuf,
    },
    /// Empirical covariance of realization files
    Empirical {
        /// SPDG realization files (all on the same grid)
        #[arg(long, num_args = 1..)]
        inputs: Vec<PathBuf>,
        /// Maximum lag in cells per axis, e.g. `8,8`
        #[arg(long)]
        max_lag: String,
        /// Allow a single realization (ergodic averaging over one large grid)
        #[arg(long)]
        ergodic: bool,
        #[arg(long)]
        out: Option<PathBuf>,
        #[arg(long, value_enum, default_value_t = Format::Csv)]
        format: Format,
    },
    /// Compare two SPDG covariance grids and print deterministic metrics
    Compare {
        a: PathBuf,
        b: PathBuf,
        #[arg(long)]
        out: Option<PathBuf>,
    },
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match run(cli.command) {
        Ok(code) => code,
        Err(e) => {
            eprintln!("error: {e}");
            match e {
                Error::NonExistent(_) => ExitCode::from(3),
                _ => ExitCode::from(2),
            }
        }
    }
}

fn load_model(path: &Path) -> Result<(ModelDoc, sgrf::model::ModelSpec), Error> {
    let text = std::fs::read_to_string(path)?;
    let doc = parse_model_doc(&text)?;
    let model = model_from_doc(&doc)?;
    Ok((doc, model))
}

#[derive(Serialize)]
struct SymbolReport {
    isotropic: bool,
    poly_bound_degree: i32,
    zero_set: String,
    inverse_poly_bound: &'static str,
    hermitian_max_violation: f64,
    hermitian_max_relative: f64,
    hermitian_pass: bool,
}

#[derive(Serialize)]
struct DescribeReport {
    name: String,
    d: usize,
    has_time: bool,
    symbol: SymbolReport,
    classification: sgrf::model::Classification,
    notes: Vec<String>,
}

fn run(command: Command) -> Result<ExitCode, Error> {
    match command {
        Command::Describe { model, out } => {
            let (_, spec) = load_model(&model)?;
            let herm = check_hermitian(&spec.symbol, 2048, 0)?;
            let report = DescribeReport {
                name: spec.name.clone(),
                d: spec.d,
                has_time: spec.has_time,
                symbol: SymbolReport {
                    isotropic: spec.symbol.isotropic(),
                    poly_bound_degree: spec.symbol.poly_bound_degree(),
                    zero_set: spec.symbol.zero_set().label(),
                    inverse_poly_bound: spec.symbol.inverse_bound().label(),
                    hermitian_max_violation: herm.max_violation,
                    hermitian_max_relative: herm.max_relative,
                    hermitian_pass: herm.pass,
                },
                classification: classify(&spec)?,
                notes: spec.notes.clone(),
            };
            emit_json(&report, out.as_deref())?;
            Ok(ExitCode::SUCCESS)
        }
        Command::Check { model, out } => {
            let (_, spec) = load_model(&model)?;
            let report = check_existence(&spec, &CheckConfig::default())?;
            let exists = report.exists();
            emit_json(&report, out.as_deref())?;
            if exists {
                Ok(ExitCode::SUCCESS)
            } else {
                eprintln!("error: no stationary solution: model '{}' (verdict {:?})", spec.name, report.verdict);
                Ok(ExitCode::from(3))
            }
        }
        Command::Covariance { model, lags, out, format, cell_averages } => {
            let (_, spec) = load_model(&model)?;
            let axes = parse_axis_pairs(&lags)?;
            let sampling = if cell_averages {
                GridSampling::CellAverages
            } else {
                GridSampling::PointValues
            };
            let grid = covariance_grid(&spec, &axes, sampling)?;
            match format {
                Format::Csv => emit_grid_csv(&grid, out.as_deref())?,
                Format::Spdg => {
                    let path = out.ok_or_else(|| {
                        Error::InvalidArgument("--out is required for the binary format".into())
                    })?;
                    sgrf::spdg::write_file(&covariance_to_spdg(&grid)?, &path)?;
                }
                Format::Json => {
                    return Err(Error::InvalidArgument(
                        "covariance grids are written as csv or spdg".into(),
                    ))
                }
            }
            Ok(ExitCode::SUCCESS)
        }
        Command::Simulate { model, grid, seed, realizations, out } => {
            let (doc, spec) = load_model(&model)?;
            let report = check_existence(&spec, &CheckConfig::default())?;
            if !report.exists() {
                return Err(Error::NonExistent(format!(
                    "model '{}' (verdict {:?}); refusing to simulate",
                    spec.name, report.verdict
                )));
            }
            let axes = parse_axis_pairs(&grid)?;
            let gspec = GridSpec::new(
                axes.iter().map(|&(n, delta)| GridAxis { n, delta }).collect(),
                spec.has_time,
            )?;
            let density = solution_spectral_density(&spec, true)?;
            let mut fields = simulate(&density, &gspec, seed, realizations)?;
            let label = serde_json::to_string(&doc)
                .map_err(|e| Error::InvalidArgument(e.to_string()))?;
            for f in fields.iter_mut() {
                f.label = label.clone();
            }
            write_realizations(&fields, &out)?;
            Ok(ExitCode::SUCCESS)
        }
        Command::Empirical { inputs, max_lag, ergodic, out, format } => {
            if inputs.is_empty() {
                return Err(Error::InvalidArgument("no input realizations given".into()));
            }
            let lags: Vec<usize> = max_lag
                .split(',')
                .map(|s| {
                    s.trim()
                        .parse::<usize>()
                        .map_err(|_| Error::InvalidArgument(format!("bad max lag '{s}'")))
                })
                .collect::<Result<_, _>>()?;
            let mut fields = Vec::with_capacity(inputs.len());
            for (i, path) in inputs.iter().enumerate() {
                let grid = sgrf::spdg::read_file(path)?;
                let axes: Vec<GridAxis> = grid
                    .sizes
                    .iter()
                    .zip(&grid.spacings)
                    .map(|(&n, &delta)| GridAxis { n: n as usize, delta })
                    .collect();
                fields.push(Realization {
                    grid: GridSpec::new(axes, false)?,
                    values: grid.values,
                    seed: 0,
                    index: i as u64,
                    label: String::new(),
                });
            }
            let est = empirical_covariance(&fields, &lags, ergodic)?;
            match format {
                Format::Csv => emit_grid_csv(&est, out.as_deref())?,
                Format::Spdg => {
                    let path = out.ok_or_else(|| {
                        Error::InvalidArgument("--out is required for the binary format".into())
                    })?;
                    sgrf::spdg::write_file(&covariance_to_spdg(&est)?, &path)?;
                }
                Format::Json => {
                    return Err(Error::InvalidArgument(
                        "empirical grids are written as csv or spdg".into(),
                    ))
                }
            }
            Ok(ExitCode::SUCCESS)
        }
        Command::Compare { a, b, out } => {
            let ga = covariance_from_spdg(&sgrf::spdg::read_file(&a)?);
            let gb = covariance_from_spdg(&sgrf::spdg::read_file(&b)?);
            let report = compare(&ga, &gb)?;
            emit_json(&report, out.as_deref())?;
            Ok(ExitCode::SUCCESS)
        }
    }
}

fn parse_axis_pairs(text: &str) -> Result<Vec<(usize, f64)>, Error> {
    let parts: Vec<&str> = text.split(',').map(|s| s.trim()).collect();
    if parts.is_empty() || parts.len() % 2 != 0 {
        return Err(Error::InvalidArgument(
            "axes must be given as pairs n1,D1[,n2,D2,...]".into(),
        ));
    }
    let mut out = Vec::with_capacity(parts.len() / 2);
    for pair in parts.chunks(2) {
        let n: usize = pair[0]
            .parse()
            .map_err(|_| Error::InvalidArgument(format!("bad axis size '{}'", pair[0])))?;
        let delta: f64 = pair[1]
            .parse()
            .map_err(|_| Error::InvalidArgument(format!("bad axis spacing '{}'", pair[1])))?;
        if n < 1 || !(delta > 0.0) {
            return Err(Error::InvalidArgument(
                "axis sizes must be >= 1 and spacings positive".into(),
            ));
        }
        out.push((n, delta));
    }
    Ok(out)
}

fn emit_json<T: Serialize>(value: &T, out: Option<&Path>) -> Result<(), Error> {
    let text = serde_json::to_string_pretty(value)
        .map_err(|e| Error::InvalidArgument(e.to_string()))?;
    match out {
        Some(path) => std::fs::write(path, text + "\n")?,
        None => println!("{text}"),
    }
    Ok(())
}

/// CSV with one row per cell: lag coordinates, value (shortest round-trip
/// decimal), validity flag.
fn emit_grid_csv(grid: &CovarianceGrid, out: Option<&Path>) -> Result<(), Error> {
    let mut text = String::new();
    let d = grid.axes.len();
    for i in 0..d {
        text.push_str(&format!("lag{}", i + 1));
        text.push(',');
    }
    text.push_str("value,valid\n");
    let shape = grid.shape();
    let mut idx = vec![0usize; d];
    for lin in 0..grid.values.len() {
        sgrf::fftutil::unravel(lin, &shape, &mut idx);
        for i in 0..d {
            text.push_str(&format!("{}", grid.axes[i][idx[i]]));
            text.push(',');
        }
        if grid.valid[lin] {
            text.push_str(&format!("{},1\n", grid.values[lin]));
        } else {
            text.push_str("NaN,0\n");
        }
    }
    match out {
        Some(path) => std::fs::write(path, text)?,
        None => print!("{text}"),
    }
    Ok(())
}

/// Read back a CSV grid written by [`emit_grid_csv`].
#[allow(dead_code)]
pub fn read_grid_csv(path: &Path) -> Result<CovarianceGrid, Error> {
    let text = std::fs::read_to_string(path)?;
    let mut lines = text.lines();
    let header = lines
        .next()
        .ok_or_else(|| Error::MalformedFile("empty csv".into()))?;
    let d = header.split(',').count() - 2;
    let mut rows: Vec<(Vec<f64>, f64, bool)> = Vec::new();
    for line in lines {
        if line.trim().is_empty() {
            continue;
        }
        let fields: Vec<&str> = line.split(',').collect();
        if fields.len() != d + 2 {
            return Err(Error::MalformedFile("ragged csv row".into()));
        }
        let lags: Vec<f64> = fields[..d]
            .iter()
            .map(|s| s.parse::<f64>())
            .collect::<Result<_, _>>()
            .map_err(|e| Error::MalformedFile(e.to_string()))?;
        let value: f64 = fields[d]
            .parse()
            .map_err(|e: std::num::ParseFloatError| Error::MalformedFile(e.to_string()))?;
        let valid = fields[d + 1].trim() == "1";
        rows.push((lags, value, valid));
    }
    // rows are emitted in row-major order; recover the axes
    let mut axes: Vec<Vec<f64>> = vec![Vec::new(); d];
    for (lags, _, _) in &rows {
        for i in 0..d {
            if !axes[i].iter().any(|&v| v == lags[i]) {
                axes[i].push(lags[i]);
            }
        }
    }
    for axis in axes.iter_mut() {
        axis.sort_by(|a, b| a.partial_cmp(b).unwrap());
    }
    let shape: Vec<usize> = axes.iter().map(|a| a.len()).collect();
    let total: usize = shape.iter().product();
    if total != rows.len() {
        return Err(Error::MalformedFile("csv rows do not form a full grid".into()));
    }
    let mut values = vec![f64::NAN; total];
    let mut valid = vec![false; total];
    for (lags, value, ok) in rows {
        let idx: Vec<usize> = lags
            .iter()
            .zip(&axes)
            .map(|(l, axis)| axis.iter().position(|v| v == l).unwrap())
            .collect();
        let lin = sgrf::fftutil::ravel(&idx, &shape);
        values[lin] = value;
        valid[lin] = ok;
    }
    Ok(CovarianceGrid { axes, values, valid, provenance: Provenance::Empirical })
}

fn write_realizations(fields: &[Realization], out: &Path) -> Result<(), Error> {
    if fields.len() == 1 {
        return sgrf::spdg::write_file(&fields[0].to_spdg(), out);
    }
    let stem = out
        .file_stem()
        .and_then(|s| s.to_str())
        .ok_or_else(|| Error::InvalidArgument("bad output path".into()))?;
    let ext = out.extension().and_then(|s| s.to_str()).unwrap_or("spdg");
    let dir = out.parent().unwrap_or_else(|| Path::new("."));
    for f in fields {
        let path = dir.join(format!("{stem}_r{:04}.{ext}", f.index));
        sgrf::spdg::write_file(&f.to_spdg(), &path)?;
    }
    Ok(())
}
