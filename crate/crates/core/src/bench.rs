//! Benchmark protocol and report output.
//!
//! Each dataset is split into queries and candidates, the tuned methods
//! get their thresholds from a small candidate sample, and every
//! `(method, window, dims)` combination searches the nearest neighbor of
//! every query. Counters come from the first repetition (they do not vary
//! between repetitions); times are averaged over all repetitions.

use std::fmt::Write as _;
use std::str::FromStr;
use std::time::Instant;

use serde::{Deserialize, Serialize};

use crate::cascade::{search_all, tune_params, tuning_sample, CandidatePool, CostMetric, Counters, TuneGrids};
use crate::error::{Error, Result};
use crate::ingest::split;
use crate::params::{Method, SearchParams};
use crate::scalar::Scalar;
use crate::series::Dataset;

/// Dimension selection: the first `n` dimensions or all of them.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum DimsSel {
    All,
    First(usize),
}

impl DimsSel {
    pub fn resolve(self, available: usize) -> Result<usize> {
        match self {
            DimsSel::All => Ok(available),
            DimsSel::First(n) if n >= 1 && n <= available => Ok(n),
            DimsSel::First(n) => Err(Error::Config(format!(
                "dims {n} outside 1..={available}"
            ))),
        }
    }
}

impl FromStr for DimsSel {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        if s.eq_ignore_ascii_case("all") {
            return Ok(DimsSel::All);
        }
        s.parse::<usize>()
            .ok()
            .filter(|&n| n > 0)
            .map(DimsSel::First)
            .ok_or_else(|| Error::Config(format!("invalid dims `{s}`")))
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct BenchConfig {
    pub methods: Vec<Method>,
    pub windows: Vec<usize>,
    pub dims: Vec<DimsSel>,
    pub seed: u64,
    pub reps: usize,
    pub tune: bool,
    pub metric: CostMetric,
    pub query_frac: f64,
    /// Worker threads; `None` uses every core.
    pub threads: Option<usize>,
    /// Non-tuned knobs (P, K, w, min cell length) and untuned thresholds.
    pub base: SearchParams,
    pub grids: TuneGrids,
}

impl Default for BenchConfig {
    fn default() -> Self {
        Self {
            methods: Method::ALL.to_vec(),
            windows: vec![10, 20],
            dims: vec![DimsSel::All],
            seed: 42,
            reps: 10,
            tune: true,
            metric: CostMetric::Work,
            query_frac: 0.3,
            threads: None,
            base: SearchParams::default(),
            grids: TuneGrids::default(),
        }
    }
}

impl BenchConfig {
    pub fn validate(&self) -> Result<()> {
        if self.methods.is_empty() || self.windows.is_empty() || self.dims.is_empty() {
            return Err(Error::Config("methods, windows and dims must be nonempty".into()));
        }
        if self.reps == 0 {
            return Err(Error::Config("reps must be at least 1".into()));
        }
        if self.threads == Some(0) {
            return Err(Error::Config("threads must be at least 1".into()));
        }
        if !(self.query_frac > 0.0 && self.query_frac < 1.0) {
            return Err(Error::Config("query fraction must lie in (0, 1)".into()));
        }
        self.base.validate()
    }
}

/// One `(dataset, method, window, dims)` result.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RunReport {
    pub dataset: String,
    pub method: Method,
    /// Requested window.
    pub window: usize,
    /// Window after capping at `n - 1`.
    pub effective_window: usize,
    pub dims: usize,
    pub skip_pct: f64,
    pub speedup: f64,
    pub ideal_speedup: f64,
    pub counters: Counters,
    pub lb_time_s: f64,
    pub dtw_time_s: f64,
    pub total_time_s: f64,
    pub seed: u64,
    pub threads: usize,
    pub queries: usize,
    pub candidates: usize,
    pub params: SearchParams,
    /// Nearest neighbor `(candidate index, distance)` per query.
    pub answers: Vec<(usize, f64)>,
}

struct Measured {
    counters: Counters,
    answers: Vec<(usize, f64)>,
    lb_s: f64,
    dtw_s: f64,
    wall_s: f64,
    /// Wall time with the bound share of per-query time removed.
    ideal_s: f64,
}

fn measure<T: Scalar>(
    queries: &[crate::series::MultivariateSeries<T>],
    pool: &CandidatePool<T>,
    params: &SearchParams,
    reps: usize,
) -> Result<Measured> {
    let mut m = Measured {
        counters: Counters::default(),
        answers: Vec::new(),
        lb_s: 0.0,
        dtw_s: 0.0,
        wall_s: 0.0,
        ideal_s: 0.0,
    };
    for rep in 0..reps {
        let start = Instant::now();
        let out = search_all(queries, pool, params)?;
        let wall = start.elapsed().as_secs_f64();
        let (mut lb, mut dtw, mut per_query) = (0.0, 0.0, 0.0);
        for o in &out {
            lb += o.timers.lb.as_secs_f64();
            dtw += o.timers.dtw.as_secs_f64();
            per_query += o.timers.total.as_secs_f64();
        }
        if rep == 0 {
            for o in &out {
                m.counters.merge(&o.counters);
            }
            m.answers = out.iter().map(|o| (o.best_index, o.best_distance.as_f64())).collect();
        }
        let lb_share = if per_query > 0.0 { (lb / per_query).min(1.0) } else { 0.0 };
        m.lb_s += lb;
        m.dtw_s += dtw;
        m.wall_s += wall;
        m.ideal_s += wall * (1.0 - lb_share);
    }
    let r = reps as f64;
    m.lb_s /= r;
    m.dtw_s /= r;
    m.wall_s /= r;
    m.ideal_s /= r;
    Ok(m)
}

fn needs_tuning(m: Method) -> bool {
    matches!(m, Method::LbTi | Method::LbPc | Method::TcDtw)
}

/// Runs the whole protocol on already-normalized datasets.
pub fn run_benchmark<T: Scalar>(cfg: &BenchConfig, datasets: &[Dataset<T>]) -> Result<Vec<RunReport>> {
    cfg.validate()?;
    if datasets.is_empty() {
        return Err(Error::Config("no datasets given".into()));
    }
    for ds in datasets {
        for d in &cfg.dims {
            d.resolve(ds.dims())?;
        }
    }
    let mut builder = rayon::ThreadPoolBuilder::new();
    if let Some(t) = cfg.threads {
        builder = builder.num_threads(t);
    }
    let workers = builder
        .build()
        .map_err(|e| Error::Config(format!("cannot build worker pool: {e}")))?;
    let threads = workers.current_num_threads();
    workers.install(|| run_inner(cfg, datasets, threads))
}

fn run_inner<T: Scalar>(cfg: &BenchConfig, datasets: &[Dataset<T>], threads: usize) -> Result<Vec<RunReport>> {
    let mut reports = Vec::new();
    for full in datasets {
        for &dsel in &cfg.dims {
            let dims = dsel.resolve(full.dims())?;
            let ds = if dims == full.dims() { full.clone() } else { full.truncate_dims(dims)? };
            let (queries, candidates) = split(&ds, cfg.query_frac, cfg.seed)?;
            let pool = CandidatePool::new(candidates, ds.value_range().to_vec())?;

            let sample_pool = pool.subset(&tuning_sample(pool.len(), cfg.seed))?;
            let sample_queries: Vec<_> = tuning_sample(queries.len(), cfg.seed.wrapping_add(1))
                .into_iter()
                .map(|i| queries[i].clone())
                .collect();

            for &window in &cfg.windows {
                let base = cfg.base.clone().with_window(window);
                let tuned = if cfg.tune && cfg.methods.iter().any(|&m| needs_tuning(m)) {
                    tune_params(&sample_queries, &sample_pool, &base, &cfg.grids, cfg.metric)?.params
                } else {
                    let mut p = base.clone();
                    if cfg.methods.contains(&Method::TcDtw) {
                        p.tc_choice = Some(crate::cascade::tc_dtw_select(
                            &sample_queries,
                            &sample_pool,
                            &p,
                            cfg.metric,
                        )?);
                    }
                    p
                };

                let none_params = base.clone().with_method(Method::None);
                let baseline = measure(&queries, &pool, &none_params, cfg.reps)?;

                for &method in &cfg.methods {
                    let (params, m) = if method == Method::None {
                        (none_params.clone(), None)
                    } else {
                        let p = tuned.clone().with_method(method);
                        let m = measure(&queries, &pool, &p, cfg.reps)?;
                        (p, Some(m))
                    };
                    let m = m.as_ref().unwrap_or(&baseline);
                    let ratio = |t: f64| if t > 0.0 { baseline.wall_s / t } else { f64::INFINITY };
                    reports.push(RunReport {
                        dataset: ds.name.clone(),
                        method,
                        window,
                        effective_window: params.effective_window(ds.series_len()),
                        dims,
                        skip_pct: m.counters.skip_pct(),
                        speedup: if method == Method::None { 1.0 } else { ratio(m.wall_s) },
                        ideal_speedup: if method == Method::None { 1.0 } else { ratio(m.ideal_s) },
                        counters: m.counters,
                        lb_time_s: m.lb_s,
                        dtw_time_s: m.dtw_s,
                        total_time_s: m.wall_s,
                        seed: cfg.seed,
                        threads,
                        queries: queries.len(),
                        candidates: pool.len(),
                        params,
                        answers: m.answers.clone(),
                    });
                }
            }
        }
    }
    Ok(reports)
}

/// Output encodings of a report set.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum ReportFormat {
    Csv,
    Table,
    Json,
}

impl FromStr for ReportFormat {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s.to_ascii_lowercase().as_str() {
            "csv" => Ok(ReportFormat::Csv),
            "table" => Ok(ReportFormat::Table),
            "json" => Ok(ReportFormat::Json),
            other => Err(Error::Config(format!("unknown report format `{other}`"))),
        }
    }
}

pub const CSV_COLUMNS: [&str; 13] = [
    "dataset",
    "method",
    "window",
    "dims",
    "skip_pct",
    "speedup",
    "ideal_speedup",
    "dtw_computed",
    "dtw_skipped",
    "lb_time_s",
    "dtw_time_s",
    "total_time_s",
    "seed",
];

/// Flat record shared by the CSV and JSON encodings.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ReportRow {
    pub dataset: String,
    pub method: Method,
    pub window: usize,
    pub dims: usize,
    pub skip_pct: f64,
    pub speedup: f64,
    pub ideal_speedup: f64,
    pub dtw_computed: u64,
    pub dtw_skipped: u64,
    pub lb_time_s: f64,
    pub dtw_time_s: f64,
    pub total_time_s: f64,
    pub seed: u64,
}

impl From<&RunReport> for ReportRow {
    fn from(r: &RunReport) -> Self {
        Self {
            dataset: r.dataset.clone(),
            method: r.method,
            window: r.window,
            dims: r.dims,
            skip_pct: r.skip_pct,
            speedup: r.speedup,
            ideal_speedup: r.ideal_speedup,
            dtw_computed: r.counters.dtw_computed,
            dtw_skipped: r.counters.dtw_skipped,
            lb_time_s: r.lb_time_s,
            dtw_time_s: r.dtw_time_s,
            total_time_s: r.total_time_s,
            seed: r.seed,
        }
    }
}

impl ReportRow {
    /// Values in [`CSV_COLUMNS`] order. Floats use the shortest
    /// representation that parses back to the same value.
    pub fn fields(&self) -> [String; 13] {
        [
            self.dataset.clone(),
            self.method.to_string(),
            self.window.to_string(),
            self.dims.to_string(),
            self.skip_pct.to_string(),
            self.speedup.to_string(),
            self.ideal_speedup.to_string(),
            self.dtw_computed.to_string(),
            self.dtw_skipped.to_string(),
            self.lb_time_s.to_string(),
            self.dtw_time_s.to_string(),
            self.total_time_s.to_string(),
            self.seed.to_string(),
        ]
    }
}

#[derive(Serialize)]
struct JsonRow<'a> {
    #[serde(flatten)]
    row: ReportRow,
    effective_window: usize,
    threads: usize,
    queries: usize,
    candidates: usize,
    counters: &'a Counters,
    params: &'a SearchParams,
}

/// Encodes reports. CSV has exactly [`CSV_COLUMNS`]; JSON is an array of
/// objects carrying the same fields plus run metadata.
pub fn emit_report(reports: &[RunReport], format: ReportFormat) -> Result<Vec<u8>> {
    match format {
        ReportFormat::Csv => {
            let mut w = csv::WriterBuilder::new().has_headers(false).from_writer(Vec::new());
            w.write_record(CSV_COLUMNS)?;
            for r in reports {
                w.write_record(ReportRow::from(r).fields())?;
            }
            w.into_inner().map_err(|e| Error::Csv(e.into_error().into()))
        }
        ReportFormat::Json => {
            let rows: Vec<_> = reports
                .iter()
                .map(|r| JsonRow {
                    row: r.into(),
                    effective_window: r.effective_window,
                    threads: r.threads,
                    queries: r.queries,
                    candidates: r.candidates,
                    counters: &r.counters,
                    params: &r.params,
                })
                .collect();
            let mut out = serde_json::to_vec_pretty(&rows)?;
            out.push(b'\n');
            Ok(out)
        }
        ReportFormat::Table => Ok(render_table(reports, true).into_bytes()),
    }
}

/// Human-readable table with a `#` comment line carrying thread count and
/// host. The ideal-speedup column is included only when `ideal` is set.
pub fn render_table(reports: &[RunReport], ideal: bool) -> String {
    let mut s = String::new();
    if let Some(r) = reports.first() {
        let _ = writeln!(
            s,
            "# threads={} host={} {} seed={}",
            r.threads,
            std::env::consts::ARCH,
            std::env::consts::OS,
            r.seed
        );
    }
    let _ = write!(
        s,
        "{:<20} {:<7} {:>6} {:>4} {:>8} {:>8}",
        "dataset", "method", "window", "dims", "skip%", "speedup"
    );
    if ideal {
        let _ = write!(s, " {:>8}", "ideal");
    }
    let _ = writeln!(s, " {:>10} {:>10} {:>10} {:>10}", "computed", "skipped", "lb_s", "total_s");
    for r in reports {
        let _ = write!(
            s,
            "{:<20} {:<7} {:>6} {:>4} {:>7.1}% {:>8.2}",
            r.dataset,
            r.method.as_str(),
            r.window,
            r.dims,
            r.skip_pct,
            r.speedup
        );
        if ideal {
            let _ = write!(s, " {:>8.2}", r.ideal_speedup);
        }
        let _ = writeln!(
            s,
            " {:>10} {:>10} {:>10.4} {:>10.4}",
            r.counters.dtw_computed, r.counters.dtw_skipped, r.lb_time_s, r.total_time_s
        );
    }
    s
}
