//! `tcdtw`: nearest-neighbor benchmark runner.
//!
//! Loads one or more datasets, z-normalizes them, splits queries from
//! candidates and reports skip rates and speedups for each method, window
//! and dimension count.
//!
//! Exit codes: 0 success, 1 configuration error, 2 data error.

use std::fs;
use std::io::Write;
use std::path::PathBuf;
use std::process::ExitCode;
use std::str::FromStr;

use clap::{ArgAction, Parser, ValueEnum};
use tcdtw::bench::{emit_report, render_table, run_benchmark, BenchConfig, DimsSel, ReportFormat, RunReport};
use tcdtw::ingest::{format_for, load, normalize, Format};
use tcdtw::verify::verify_soundness;
use tcdtw::{CostMetric, Dataset, Error, Method, Scalar};

const VERIFY_SERIES: usize = 20;

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
enum Precision {
    F64,
    F32,
}

#[derive(Debug, Parser)]
#[command(name = "tcdtw", version, about = "DTW nearest-neighbor benchmark with lower-bound filtering")]
struct Args {
    /// Dataset files.
    #[arg(long, required = true, num_args = 1..)]
    data: Vec<PathBuf>,

    /// Input format; guessed from the extension when omitted.
    #[arg(long, value_parser = parse::<Format>)]
    format: Option<Format>,

    /// Methods to run: none, lb_mv, lb_ti, lb_pc, tc_dtw, lb_ad. Default: all.
    #[arg(long, num_args = 1.., value_parser = parse::<Method>)]
    method: Vec<Method>,

    #[arg(long, num_args = 1.., default_values_t = [10usize, 20])]
    window: Vec<usize>,

    /// Number of leading dimensions to use, or `all`.
    #[arg(long, num_args = 1.., value_parser = parse::<DimsSel>)]
    dims: Vec<DimsSel>,

    #[arg(long, default_value_t = 42)]
    seed: u64,

    /// Timed repetitions per run.
    #[arg(long, default_value_t = 10)]
    reps: usize,

    /// Tune thresholds and quantization levels on a sample (default).
    #[arg(long, overrides_with = "no_tune")]
    tune: bool,

    #[arg(long = "no-tune", action = ArgAction::SetTrue, overrides_with = "tune")]
    no_tune: bool,

    /// How tuning trials are scored: work (deterministic) or wall.
    #[arg(long, default_value = "work", value_parser = parse::<CostMetric>)]
    tune_metric: CostMetric,

    /// Fraction of each dataset used as queries.
    #[arg(long, default_value_t = 0.3)]
    query_frac: f64,

    /// Write the report here instead of stdout.
    #[arg(long)]
    out: Option<PathBuf>,

    #[arg(long, default_value = "table", value_parser = parse::<ReportFormat>)]
    emit: ReportFormat,

    /// Show the ideal speedup (bound time removed) in the table.
    #[arg(long)]
    ideal: bool,

    /// Check every bound against exact DTW on the first series of each dataset.
    #[arg(long)]
    verify: bool,

    /// Worker threads (default: all cores).
    #[arg(long)]
    threads: Option<usize>,

    #[arg(long, value_enum, default_value_t = Precision::F64)]
    precision: Precision,
}

fn parse<T: FromStr<Err = Error>>(s: &str) -> Result<T, String> {
    s.parse().map_err(|e: Error| e.to_string())
}

fn exit_code(e: &Error) -> u8 {
    match e {
        Error::Config(_) => 1,
        _ => 2,
    }
}

impl Args {
    fn config(&self) -> BenchConfig {
        let mut cfg = BenchConfig {
            windows: self.window.clone(),
            seed: self.seed,
            reps: self.reps,
            tune: self.tune || !self.no_tune,
            metric: self.tune_metric,
            query_frac: self.query_frac,
            threads: self.threads,
            ..BenchConfig::default()
        };
        if !self.method.is_empty() {
            cfg.methods = self.method.clone();
        }
        if !self.dims.is_empty() {
            cfg.dims = self.dims.clone();
        }
        cfg
    }
}

fn load_all<T: Scalar>(args: &Args) -> Result<Vec<Dataset<T>>, Error> {
    args.data
        .iter()
        .map(|path| {
            let raw = load(path, args.format.unwrap_or_else(|| format_for(path)))?;
            normalize(&raw)
        })
        .collect()
}

fn verify<T: Scalar>(cfg: &BenchConfig, datasets: &[Dataset<T>]) -> bool {
    let mut sound = true;
    for ds in datasets {
        let report = verify_soundness(ds, &cfg.windows, &cfg.base, VERIFY_SERIES);
        eprintln!(
            "verify {}: {} pairs, {} bounds, {} violations",
            ds.name,
            report.pairs,
            report.bounds_checked,
            report.violations.len()
        );
        for v in report.violations.iter().take(10) {
            eprintln!(
                "  {} q={} c={} W={}: {} > {}",
                v.bound, v.query, v.candidate, v.window, v.value, v.dtw
            );
        }
        sound &= report.is_sound();
    }
    sound
}

fn run<T: Scalar>(args: &Args, cfg: &BenchConfig) -> Result<(Vec<RunReport>, bool), Error> {
    let datasets = load_all::<T>(args)?;
    let sound = !args.verify || verify(cfg, &datasets);
    Ok((run_benchmark(cfg, &datasets)?, sound))
}

fn main() -> ExitCode {
    let args = match Args::try_parse() {
        Ok(a) => a,
        Err(e) => {
            let _ = e.print();
            return ExitCode::from(if e.use_stderr() { 1 } else { 0 });
        }
    };
    let cfg = args.config();
    if let Err(e) = cfg.validate() {
        eprintln!("error: {e}");
        return ExitCode::from(exit_code(&e));
    }
    if let Some(missing) = args.data.iter().find(|p| !p.is_file()) {
        eprintln!("error: dataset not found: {}", missing.display());
        return ExitCode::from(1);
    }

    let result = match args.precision {
        Precision::F64 => run::<f64>(&args, &cfg),
        Precision::F32 => run::<f32>(&args, &cfg),
    };
    let (reports, sound) = match result {
        Ok(r) => r,
        Err(e) => {
            eprintln!("error: {e}");
            return ExitCode::from(exit_code(&e));
        }
    };

    let bytes = match args.emit {
        ReportFormat::Table => Ok(render_table(&reports, args.ideal).into_bytes()),
        f => emit_report(&reports, f),
    };
    let bytes = match bytes {
        Ok(b) => b,
        Err(e) => {
            eprintln!("error: {e}");
            return ExitCode::from(2);
        }
    };
    let written = match &args.out {
        Some(path) => fs::write(path, &bytes).map_err(|e| format!("{}: {e}", path.display())),
        None => std::io::stdout().write_all(&bytes).map_err(|e| e.to_string()),
    };
    if let Err(e) = written {
        eprintln!("error: {e}");
        return ExitCode::from(2);
    }
    if sound {
        ExitCode::SUCCESS
    } else {
        eprintln!("error: a lower bound exceeded the exact distance");
        ExitCode::from(2)
    }
}
