//! Command-line front end: ingest surveillance feeds, compute bound tables,
//! sweep assumption grids, run the simulation oracle, and render band
//! charts.
//!
//! Exit codes: 0 success, 1 usage/config error, 2 data-validation error,
//! 3 assumption inconsistency (crossed bounds), 4 oracle coverage failure.

use std::fs::File;
use std::io::{BufWriter, Read, Write};
use std::path::{Path, PathBuf};
use std::process::ExitCode;
use std::str::FromStr;

use clap::{Args, Parser, Subcommand, ValueEnum};
use rayon::prelude::*;

use epibounds::accuracy::MissRateInterval;
use epibounds::bounds::{
    compute_bound_series, compute_severe_bound_series, read_bound_rows, BoundMethod, ProbInterval,
};
use epibounds::config::RunConfig;
use epibounds::error::{ConfigError, Error};
use epibounds::ingest::{analysis_window, parse_region_series, RegionSeries, RepairMode};
use epibounds::plot::render_band_svg;
use epibounds::report::{
    write_bounds_report, write_coverage_report, write_rates_report, write_severe_report,
    write_sweep_report, OutputFormat,
};
use epibounds::sim::{
    check_coverage, coverage_failed_with_clean_audit, simulate, write_truth_and_surveillance,
};
use epibounds::sweep::run_sweep;

#[derive(Parser)]
#[command(
    name = "epibounds",
    version,
    about = "Interval bounds on epidemic infection rates from surveillance counts"
)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Args, Clone)]
struct IoArgs {
    /// Surveillance CSV to read.
    #[arg(long)]
    input: PathBuf,
    /// JSON run config.
    #[arg(long)]
    config: PathBuf,
    /// Output format.
    #[arg(long, default_value = "text")]
    format: String,
    /// Write to this file instead of stdout.
    #[arg(long)]
    output: Option<PathBuf>,
    /// Repair decreasing cumulative counts instead of rejecting the feed.
    #[arg(long, value_enum)]
    repair: Option<RepairArg>,
}

#[derive(Clone, Copy, ValueEnum)]
enum RepairArg {
    Clamp,
}

#[derive(Subcommand)]
enum Command {
    /// Per-date observable rates (testing, positivity, severe outcomes).
    Rates {
        #[command(flatten)]
        io: IoArgs,
    },
    /// Per-date bound intervals on the infection rate.
    Bounds {
        #[command(flatten)]
        io: IoArgs,
        /// worst-case | testing-monotone | envelope | asym-refined
        #[arg(long)]
        method: Option<String>,
        /// Override the miss-rate interval, e.g. 0.1:0.4.
        #[arg(long, value_name = "LO:HI")]
        miss_rate: Option<String>,
        /// Asymptomatic-share interval for the refined lower bound,
        /// e.g. 0.25:0.5. Implies the asym-refined method.
        #[arg(long, value_name = "LO:HI")]
        refine_asymptomatic: Option<String>,
    },
    /// Per-date severe-illness bounds conditional on infection.
    Severe {
        #[command(flatten)]
        io: IoArgs,
    },
    /// Evaluate the bound pipeline over an assumption grid.
    Sweep {
        /// JSON run config with a `sweep` section.
        #[arg(long)]
        config: PathBuf,
        /// Surveillance CSV; defaults to the config's `input` path.
        #[arg(long)]
        input: Option<PathBuf>,
        #[arg(long, default_value = "text")]
        format: String,
        #[arg(long)]
        output: Option<PathBuf>,
    },
    /// Run the synthetic-world oracle and report bound coverage.
    Simulate {
        /// JSON run config with a `simulate` section.
        #[arg(long)]
        config: PathBuf,
        #[arg(long, default_value = "text")]
        format: String,
        /// Directory for per-seed surveillance and ground-truth CSVs.
        #[arg(long)]
        output: Option<PathBuf>,
    },
    /// Render a bound-series CSV as an SVG band chart.
    Plot {
        /// Bound-series CSV (as written by `bounds --format csv`).
        #[arg(long)]
        input: PathBuf,
        /// Output SVG path.
        #[arg(long)]
        output: PathBuf,
    },
}

fn main() -> ExitCode {
    env_logger::Builder::from_env(env_logger::Env::default().default_filter_or("warn")).init();
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(e) => {
            // clap prints its own help/version output.
            let code = if e.exit_code() == 0 { 0 } else { 1 };
            let _ = e.print();
            return ExitCode::from(code as u8);
        }
    };
    match run(cli) {
        Ok(code) => code,
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(e.exit_code() as u8)
        }
    }
}

fn run(cli: Cli) -> Result<ExitCode, Error> {
    match cli.command {
        Command::Rates { io } => {
            let (series, format) = load_series(&io)?;
            with_output(io.output.as_deref(), |out| {
                write_rates_report(&series, format, out)
            })?;
            Ok(ExitCode::SUCCESS)
        }
        Command::Bounds {
            io,
            method,
            miss_rate,
            refine_asymptomatic,
        } => {
            let config = load_config(&io.config)?;
            let (series, format) = load_series_with(&io, &config)?;
            let miss = miss_rate
                .as_deref()
                .map(|s| {
                    let (lo, hi) = parse_pair(s)?;
                    MissRateInterval::new(lo, hi).map_err(Error::from)
                })
                .transpose()?;
            let alpha = refine_asymptomatic
                .as_deref()
                .map(|s| {
                    let (lo, hi) = parse_pair(s)?;
                    ProbInterval::new(lo, hi).map_err(Error::from)
                })
                .transpose()?;
            let method = match method {
                Some(name) => BoundMethod::from_str(&name)
                    .map_err(|e| Error::from(ConfigError::Invalid(e)))?,
                None if alpha.is_some() => BoundMethod::AsymRefined,
                None => BoundMethod::TemporalEnvelope,
            };
            let cfg = config.assumption_config(miss, alpha)?;
            let bounds = compute_bound_series(&series, &cfg, method)?;
            with_output(io.output.as_deref(), |out| {
                write_bounds_report(&bounds, format, out)
            })?;
            Ok(ExitCode::SUCCESS)
        }
        Command::Severe { io } => {
            let config = load_config(&io.config)?;
            let (series, format) = load_series_with(&io, &config)?;
            let cfg = config.assumption_config(None, None)?;
            let severe = compute_severe_bound_series(&series, &cfg)?;
            with_output(io.output.as_deref(), |out| {
                write_severe_report(&severe, format, out)
            })?;
            Ok(ExitCode::SUCCESS)
        }
        Command::Sweep {
            config,
            input,
            format,
            output,
        } => {
            let config_dir = config.parent().map(Path::to_path_buf);
            let config = load_config(&config)?;
            let format = parse_format(&format)?;
            let sweep = config.sweep_section()?.clone();
            let input = input
                .or_else(|| {
                    config.input.as_ref().map(|p| {
                        if p.is_relative() {
                            config_dir.as_deref().unwrap_or(Path::new(".")).join(p)
                        } else {
                            p.clone()
                        }
                    })
                })
                .ok_or(ConfigError::MissingSection("input"))?;
            let series = read_series(&input, &config, RepairMode::Reject)?;
            let report = run_sweep(&series, &sweep.grid, sweep.eval_date)?;
            with_output(output.as_deref(), |out| {
                write_sweep_report(&report, format, out)
            })?;
            Ok(ExitCode::SUCCESS)
        }
        Command::Simulate {
            config,
            format,
            output,
        } => {
            let config = load_config(&config)?;
            let format = parse_format(&format)?;
            let section = config.simulate_section()?.clone();
            let cfg = config.assumption_config(None, None)?;
            let methods = [BoundMethod::TestingMonotone, BoundMethod::TemporalEnvelope];
            let seeds: Vec<u64> = (0..section.runs as u64)
                .map(|i| section.params.seed.wrapping_add(i))
                .collect();
            let reports: Vec<(u64, epibounds::sim::CoverageReport)> = seeds
                .par_iter()
                .map(|&seed| {
                    let mut params = section.params.clone();
                    params.seed = seed;
                    let world = simulate(&params)?;
                    if let Some(dir) = &output {
                        write_truth_and_surveillance(&world, dir, seed)?;
                    }
                    let report = check_coverage(&world, &cfg, &methods)?;
                    Ok((seed, report))
                })
                .collect::<Result<_, Error>>()?;
            with_output(None, |out| write_coverage_report(&reports, format, out))?;
            // Nonzero only when coverage failed while the assumptions held.
            let only_reports: Vec<_> = reports.into_iter().map(|(_, r)| r).collect();
            Ok(if coverage_failed_with_clean_audit(&only_reports) {
                ExitCode::from(4)
            } else {
                ExitCode::SUCCESS
            })
        }
        Command::Plot { input, output } => {
            let file = File::open(&input).map_err(|e| in_file_err(&input, e))?;
            let rows = read_bound_rows(file)?;
            let mut out = BufWriter::new(File::create(&output)?);
            render_band_svg(&rows, &mut out)?;
            out.flush()?;
            Ok(ExitCode::SUCCESS)
        }
    }
}

fn load_config(path: &Path) -> Result<RunConfig, Error> {
    let mut text = String::new();
    File::open(path)
        .map_err(|e| in_file_err(path, e))?
        .read_to_string(&mut text)?;
    Ok(RunConfig::from_json(&text)?)
}

fn read_series(path: &Path, config: &RunConfig, repair: RepairMode) -> Result<RegionSeries, Error> {
    let spec = config.series_spec()?;
    let file = File::open(path).map_err(|e| in_file_err(path, e))?;
    let parsed = parse_region_series(file, &spec, repair)
        .map_err(|e| annotate(path, Error::from(e)))?;
    for repair in &parsed.repairs {
        eprintln!(
            "{}: repaired {} at {}: {} -> {}",
            path.display(),
            repair.column,
            repair.date,
            repair.original,
            repair.clamped_to
        );
    }
    analysis_window(&parsed.series, config.window_threshold())
        .map_err(|e| annotate(path, Error::from(e)))
}

fn load_series(io: &IoArgs) -> Result<(RegionSeries, OutputFormat), Error> {
    let config = load_config(&io.config)?;
    load_series_with(io, &config)
}

fn load_series_with(io: &IoArgs, config: &RunConfig) -> Result<(RegionSeries, OutputFormat), Error> {
    let repair = match io.repair {
        Some(RepairArg::Clamp) => RepairMode::Clamp,
        None => RepairMode::Reject,
    };
    let series = read_series(&io.input, config, repair)?;
    Ok((series, parse_format(&io.format)?))
}

fn parse_format(s: &str) -> Result<OutputFormat, Error> {
    OutputFormat::from_str(s).map_err(|e| ConfigError::Invalid(e).into())
}

fn parse_pair(s: &str) -> Result<(f64, f64), Error> {
    let invalid =
        || Error::from(ConfigError::Invalid(format!("expected LO:HI, got {s:?}")));
    let (lo, hi) = s.split_once(':').ok_or_else(invalid)?;
    Ok((
        lo.trim().parse().map_err(|_| invalid())?,
        hi.trim().parse().map_err(|_| invalid())?,
    ))
}

fn with_output<F>(path: Option<&Path>, write: F) -> Result<(), Error>
where
    F: FnOnce(&mut dyn Write) -> Result<(), Error>,
{
    match path {
        Some(path) => {
            let mut out = BufWriter::new(File::create(path)?);
            write(&mut out)?;
            out.flush()?;
            Ok(())
        }
        None => {
            let stdout = std::io::stdout();
            let mut lock = stdout.lock();
            write(&mut lock)?;
            lock.flush()?;
            Ok(())
        }
    }
}

fn in_file_err(path: &Path, e: std::io::Error) -> Error {
    Error::from(e).in_file(path.display().to_string())
}

/// Prefix data errors with the offending file so messages carry
/// file + date + invariant.
fn annotate(path: &Path, e: Error) -> Error {
    e.in_file(path.display().to_string())
}
