//! DTW nearest-neighbor search with cascaded lower bounds.
//!
//! For each candidate, in order: LB_MV first; if it does not prune and the
//! ratio `LB_MV / d_best` lies in `(e, 1)`, the selected advanced bound
//! (LB_TI or LB_PC); exact banded DTW with early abandoning otherwise.

use std::time::{Duration, Instant};

use rand::seq::index::sample;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::dtw::dtw_unchecked;
use crate::error::{Error, Result};
use crate::lb_mv::{build_envelope, lb_ad_unchecked, lb_mv_unchecked, Envelope};
use crate::lb_pc::{build_box_sets, lb_pc_unchecked, BoxSets, PcConfig};
use crate::lb_ti::{lb_ti_core, NeighborDistances};
use crate::params::{AdvancedBound, Method, SearchParams, TiVariant};
use crate::scalar::Scalar;
use crate::series::{check_pair, Dataset, MultivariateSeries};

/// Number of candidate series drawn for parameter tuning.
pub const TUNING_SAMPLE: usize = 23;

/// Candidate series plus the per-candidate data computed ahead of any query.
#[derive(Debug, Clone)]
pub struct CandidatePool<T> {
    series: Vec<MultivariateSeries<T>>,
    steps: Vec<NeighborDistances<T>>,
    value_range: Vec<T>,
}

impl<T: Scalar> CandidatePool<T> {
    /// `value_range` is the per-dimension range of the dataset the
    /// candidates came from; it scales LB_PC's minimum cell length.
    pub fn new(series: Vec<MultivariateSeries<T>>, value_range: Vec<T>) -> Result<Self> {
        let first = series
            .first()
            .ok_or_else(|| Error::invalid("candidate list is empty"))?;
        for s in &series[1..] {
            check_pair(first, s)?;
        }
        if value_range.len() != first.dims() {
            return Err(Error::invalid("value range does not match candidate dimension"));
        }
        let steps = series.iter().map(NeighborDistances::of).collect();
        Ok(Self {
            series,
            steps,
            value_range,
        })
    }

    pub fn from_dataset(ds: &Dataset<T>) -> Result<Self> {
        Self::new(ds.series().to_vec(), ds.value_range().to_vec())
    }

    pub fn series(&self) -> &[MultivariateSeries<T>] {
        &self.series
    }

    pub fn len(&self) -> usize {
        self.series.len()
    }

    pub fn is_empty(&self) -> bool {
        self.series.is_empty()
    }

    pub fn value_range(&self) -> &[T] {
        &self.value_range
    }

    /// Pool restricted to `indices`, kept in the given order.
    pub fn subset(&self, indices: &[usize]) -> Result<Self> {
        if indices.is_empty() {
            return Err(Error::invalid("candidate subset is empty"));
        }
        Ok(Self {
            series: indices.iter().map(|&i| self.series[i].clone()).collect(),
            steps: indices.iter().map(|&i| self.steps[i].clone()).collect(),
            value_range: self.value_range.clone(),
        })
    }
}

/// Event counts of one or more searches.
#[derive(Debug, Clone, Copy, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct Counters {
    pub dtw_computed: u64,
    pub dtw_skipped: u64,
    pub skipped_by_lb_mv: u64,
    pub skipped_by_advanced: u64,
    pub lb_mv_evals: u64,
    pub advanced_lb_evals: u64,
    /// DTW computations stopped early by the best-so-far.
    pub abandon_count: u64,
    pub dtw_cells: u64,
    /// Machine-independent cost estimate in scalar operations.
    pub work: u64,
}

impl Counters {
    pub fn merge(&mut self, o: &Counters) {
        self.dtw_computed += o.dtw_computed;
        self.dtw_skipped += o.dtw_skipped;
        self.skipped_by_lb_mv += o.skipped_by_lb_mv;
        self.skipped_by_advanced += o.skipped_by_advanced;
        self.lb_mv_evals += o.lb_mv_evals;
        self.advanced_lb_evals += o.advanced_lb_evals;
        self.abandon_count += o.abandon_count;
        self.dtw_cells += o.dtw_cells;
        self.work += o.work;
    }

    /// Percentage of candidate comparisons whose DTW was avoided.
    pub fn skip_pct(&self) -> f64 {
        let total = self.dtw_computed + self.dtw_skipped;
        if total == 0 {
            0.0
        } else {
            self.dtw_skipped as f64 / total as f64 * 100.0
        }
    }
}

#[derive(Debug, Clone, Copy, Default, PartialEq, Eq)]
pub struct Timers {
    /// Query preparation plus every bound evaluation.
    pub lb: Duration,
    pub dtw: Duration,
    pub total: Duration,
}

impl Timers {
    pub fn merge(&mut self, o: &Timers) {
        self.lb += o.lb;
        self.dtw += o.dtw;
        self.total += o.total;
    }
}

/// Result of one query.
#[derive(Debug, Clone, PartialEq)]
pub struct NnOutcome<T> {
    pub best_index: usize,
    pub best_distance: T,
    pub counters: Counters,
    pub timers: Timers,
}

/// Bound used after LB_MV, resolved from the method.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
enum Stage2 {
    None,
    Ti,
    Pc,
    Ad,
}

fn resolve(params: &SearchParams) -> Result<(bool, Stage2)> {
    Ok(match params.method {
        Method::None => (false, Stage2::None),
        Method::LbMv => (true, Stage2::None),
        Method::LbTi => (true, Stage2::Ti),
        Method::LbPc => (true, Stage2::Pc),
        Method::LbAd => (true, Stage2::Ad),
        Method::TcDtw => match params.tc_choice {
            Some(AdvancedBound::LbTi) => (true, Stage2::Ti),
            Some(AdvancedBound::LbPc) => (true, Stage2::Pc),
            None => {
                return Err(Error::Config(
                    "tc_dtw needs a selected bound; run tuning or set tc_choice".into(),
                ))
            }
        },
    })
}

/// Query-side structures, built when the query arrives.
struct PreparedQuery<T> {
    envelope: Option<Envelope<T>>,
    steps: Option<NeighborDistances<T>>,
    boxes: Option<BoxSets<T>>,
    ti_cost: u64,
    pc_cost: u64,
}

fn prepare<T: Scalar>(
    q: &MultivariateSeries<T>,
    params: &SearchParams,
    stage2: Stage2,
    use_mv: bool,
    value_range: &[T],
    work: &mut u64,
) -> Result<PreparedQuery<T>> {
    let (n, d) = (q.len() as u64, q.dims() as u64);
    let w = params.effective_window(q.len());
    let envelope = use_mv.then(|| {
        *work += 2 * n * d;
        build_envelope(q, w)
    });
    let steps = (stage2 == Stage2::Ti).then(|| {
        *work += n * d;
        NeighborDistances::of(q)
    });
    let boxes = if stage2 == Stage2::Pc {
        let cfg = PcConfig::new(
            params.quant_levels,
            params.max_clusters,
            params.expansion,
            params.min_cell_frac,
            value_range,
        );
        let b = build_box_sets(q, w, &cfg)?;
        *work += 2 * d * b.sets().iter().map(|s| (s.span.1 - s.span.0 + 1) as u64).sum::<u64>();
        Some(b)
    } else {
        None
    };
    let ti_cost = ti_eval_cost(q.len(), w, params.ti_variant, params.period, q.dims());
    let pc_cost = boxes
        .as_ref()
        .map(|b| d * (0..q.len()).map(|j| b.for_window(j).boxes.len() as u64).sum::<u64>())
        .unwrap_or(0);
    Ok(PreparedQuery {
        envelope,
        steps,
        boxes,
        ti_cost,
        pc_cost,
    })
}

/// Scalar-operation estimate of one LB_TI evaluation.
fn ti_eval_cost(n: usize, w: usize, variant: TiVariant, period: usize, dims: usize) -> u64 {
    let (n, w, d) = (n as u64, w.min(n - 1) as u64, dims as u64);
    let window = 2 * w + 1;
    let refresh_rows = if variant.periodic() {
        n.div_ceil(period as u64)
    } else {
        1
    };
    let other_rows = n - refresh_rows;
    let top = if variant.exact_top() { d } else { 1 };
    refresh_rows * window * d + other_rows * (2 * w + top) + n
}

/// Finds the DTW nearest neighbor of `query` among `pool`, scanning the
/// candidates in pool order. Ties keep the earliest candidate.
pub fn nn_search<T: Scalar>(
    query: &MultivariateSeries<T>,
    pool: &CandidatePool<T>,
    params: &SearchParams,
) -> Result<NnOutcome<T>> {
    let start = Instant::now();
    params.validate()?;
    let (use_mv, stage2) = resolve(params)?;
    let first = pool
        .series
        .first()
        .ok_or_else(|| Error::invalid("candidate list is empty"))?;
    check_pair(query, first)?;

    let n = query.len();
    let dims = query.dims() as u64;
    let w = params.effective_window(n);
    let mut counters = Counters::default();
    let mut timers = Timers::default();

    let t = Instant::now();
    let prep = prepare(query, params, stage2, use_mv, &pool.value_range, &mut counters.work)?;
    timers.lb += t.elapsed();

    let t = Instant::now();
    let r = dtw_unchecked(query, first, w, None);
    timers.dtw += t.elapsed();
    counters.dtw_computed += 1;
    counters.dtw_cells += r.cells_computed;
    counters.work += r.cells_computed * dims;
    let mut best = r.distance.expect("unbounded DTW never abandons");
    let mut best_index = 0;

    let e = match stage2 {
        Stage2::Ti => T::lit(params.e_ti),
        Stage2::Pc => T::lit(params.e_pc),
        _ => T::zero(),
    };

    for (k, c) in pool.series.iter().enumerate().skip(1) {
        if use_mv {
            let t = Instant::now();
            let env = prep.envelope.as_ref().expect("envelope built");
            let mv = lb_mv_unchecked(c, env, best);
            counters.lb_mv_evals += 1;
            counters.work += n as u64 * dims;
            if mv.value >= best {
                timers.lb += t.elapsed();
                counters.dtw_skipped += 1;
                counters.skipped_by_lb_mv += 1;
                continue;
            }
            let ratio = mv.value / best;
            let advanced = match stage2 {
                Stage2::None => None,
                Stage2::Ad => {
                    counters.work += n as u64 * (2 * w as u64 + 1) * dims;
                    Some(lb_ad_unchecked(query, c, w, best))
                }
                Stage2::Ti if ratio > e => {
                    counters.work += prep.ti_cost;
                    let qs = prep.steps.as_ref().expect("query steps built");
                    let cs = (!params.ti_variant.exact_top()).then(|| pool.steps[k].steps());
                    Some(lb_ti_core(
                        query,
                        c,
                        w,
                        params.ti_variant,
                        params.period,
                        qs.steps(),
                        cs,
                        best,
                        |_, _, _| {},
                    ))
                }
                Stage2::Pc if ratio > e => {
                    counters.work += prep.pc_cost;
                    let boxes = prep.boxes.as_ref().expect("box sets built");
                    Some(lb_pc_unchecked(c, boxes, best))
                }
                Stage2::Ti | Stage2::Pc => None,
            };
            timers.lb += t.elapsed();
            if let Some(b) = advanced {
                counters.advanced_lb_evals += 1;
                if b.value >= best {
                    counters.dtw_skipped += 1;
                    counters.skipped_by_advanced += 1;
                    continue;
                }
            }
        }

        let t = Instant::now();
        let limit = use_mv.then_some(best);
        let r = dtw_unchecked(query, c, w, limit);
        timers.dtw += t.elapsed();
        counters.dtw_computed += 1;
        counters.dtw_cells += r.cells_computed;
        counters.work += r.cells_computed * dims;
        match r.distance {
            Some(d) if d < best => {
                best = d;
                best_index = k;
            }
            Some(_) => {}
            None => counters.abandon_count += 1,
        }
    }

    timers.total = start.elapsed();
    Ok(NnOutcome {
        best_index,
        best_distance: best,
        counters,
        timers,
    })
}

/// Runs [`nn_search`] for every query on the current rayon pool. Results
/// come back in query order.
pub fn search_all<T: Scalar>(
    queries: &[MultivariateSeries<T>],
    pool: &CandidatePool<T>,
    params: &SearchParams,
) -> Result<Vec<NnOutcome<T>>> {
    queries
        .par_iter()
        .map(|q| nn_search(q, pool, params))
        .collect()
}

/// How tuning trials are scored.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum CostMetric {
    /// Deterministic scalar-operation count ([`Counters::work`]).
    #[default]
    Work,
    /// Measured search time.
    WallTime,
}

impl std::str::FromStr for CostMetric {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s.to_ascii_lowercase().as_str() {
            "work" => Ok(CostMetric::Work),
            "wall" | "wall_time" | "time" => Ok(CostMetric::WallTime),
            other => Err(Error::Config(format!("unknown cost metric `{other}`"))),
        }
    }
}

fn run_cost<T: Scalar>(
    queries: &[MultivariateSeries<T>],
    pool: &CandidatePool<T>,
    params: &SearchParams,
    metric: CostMetric,
) -> Result<f64> {
    let mut total = 0.0;
    for q in queries {
        let o = nn_search(q, pool, params)?;
        total += match metric {
            CostMetric::Work => o.counters.work as f64,
            CostMetric::WallTime => o.timers.total.as_secs_f64(),
        };
    }
    Ok(total)
}

/// Seeded uniform draw of up to [`TUNING_SAMPLE`] indices out of `len`,
/// returned in ascending order.
pub fn tuning_sample(len: usize, seed: u64) -> Vec<usize> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut idx = sample(&mut rng, len, TUNING_SAMPLE.min(len)).into_vec();
    idx.sort_unstable();
    idx
}

/// Picks the cheaper of two measured costs; ties go to LB_PC.
pub fn pick_cheaper(ti_cost: f64, pc_cost: f64) -> AdvancedBound {
    if ti_cost < pc_cost {
        AdvancedBound::LbTi
    } else {
        AdvancedBound::LbPc
    }
}

/// Runs the sample with LB_TI and LB_PC under `params` and returns the
/// cheaper one.
pub fn tc_dtw_select<T: Scalar>(
    sample_queries: &[MultivariateSeries<T>],
    sample_candidates: &CandidatePool<T>,
    params: &SearchParams,
    metric: CostMetric,
) -> Result<AdvancedBound> {
    if sample_queries.is_empty() {
        return Err(Error::invalid("tuning needs at least one query"));
    }
    let ti = run_cost(
        sample_queries,
        sample_candidates,
        &params.clone().with_method(Method::LbTi),
        metric,
    )?;
    let pc = run_cost(
        sample_queries,
        sample_candidates,
        &params.clone().with_method(Method::LbPc),
        metric,
    )?;
    Ok(pick_cheaper(ti, pc))
}

/// Candidate values for the tuned knobs.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TuneGrids {
    pub e_ti: Vec<f64>,
    pub e_pc: Vec<f64>,
    pub quant_levels: Vec<usize>,
}

impl Default for TuneGrids {
    fn default() -> Self {
        Self {
            e_ti: vec![0.05, 0.1, 0.2],
            e_pc: vec![0.1, 0.5],
            quant_levels: vec![2, 3],
        }
    }
}

/// One scored tuning trial.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Trial {
    pub method: Method,
    pub e: f64,
    pub quant_levels: usize,
    pub cost: f64,
}

#[derive(Debug, Clone, PartialEq)]
pub struct Tuned {
    /// Input params with `e_ti`, `e_pc`, `quant_levels` and `tc_choice` set.
    pub params: SearchParams,
    pub trials: Vec<Trial>,
}

/// Grid search over the triggering thresholds and quantization level on a
/// sample, then TC-DTW selection between the best LB_TI and best LB_PC
/// settings. The first grid point wins ties.
pub fn tune_params<T: Scalar>(
    sample_queries: &[MultivariateSeries<T>],
    sample_candidates: &CandidatePool<T>,
    base: &SearchParams,
    grids: &TuneGrids,
    metric: CostMetric,
) -> Result<Tuned> {
    if sample_queries.is_empty() {
        return Err(Error::invalid("tuning needs at least one query"));
    }
    if grids.e_ti.is_empty() || grids.e_pc.is_empty() || grids.quant_levels.is_empty() {
        return Err(Error::Config("tuning grids must be nonempty".into()));
    }
    let mut trials = Vec::new();
    let mut params = base.clone();

    let mut best_ti = f64::INFINITY;
    for &e in &grids.e_ti {
        let mut p = base.clone().with_method(Method::LbTi);
        p.e_ti = e;
        let cost = run_cost(sample_queries, sample_candidates, &p, metric)?;
        trials.push(Trial {
            method: Method::LbTi,
            e,
            quant_levels: base.quant_levels,
            cost,
        });
        if cost < best_ti {
            best_ti = cost;
            params.e_ti = e;
        }
    }

    let mut best_pc = f64::INFINITY;
    for &e in &grids.e_pc {
        for &levels in &grids.quant_levels {
            let mut p = base.clone().with_method(Method::LbPc);
            p.e_pc = e;
            p.quant_levels = levels;
            let cost = run_cost(sample_queries, sample_candidates, &p, metric)?;
            trials.push(Trial {
                method: Method::LbPc,
                e,
                quant_levels: levels,
                cost,
            });
            if cost < best_pc {
                best_pc = cost;
                params.e_pc = e;
                params.quant_levels = levels;
            }
        }
    }

    params.tc_choice = Some(pick_cheaper(best_ti, best_pc));
    Ok(Tuned { params, trials })
}
