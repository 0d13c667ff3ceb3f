//! Dependent multivariate dynamic time warping with lower-bound filtering.
//!
//! The crate provides banded DTW ([`dtw`]), the classic envelope bound
//! LB_MV and the point-minimum bound LB_AD ([`lb_mv`]), the
//! triangle-inequality bound LB_TI ([`lb_ti`]), the point-clustering bound
//! LB_PC ([`lb_pc`]), and a nearest-neighbor search that cascades them
//! with selective deployment and per-dataset method selection
//! ([`cascade`]). [`ingest`] and [`bench`] implement dataset handling and
//! the benchmark protocol used by the `tcdtw` binary.
//!
//! Everything is generic over [`Scalar`] (`f32` or `f64`); the aliases
//! below fix the common `f64` case.
//!
//! ```
//! use tcdtw::{dtw_banded, Series};
//!
//! let q = Series::univariate(&[0.0, 0.0]).unwrap();
//! let c = Series::univariate(&[1.0, 1.0]).unwrap();
//! assert_eq!(dtw_banded(&q, &c, 1, None).unwrap().distance, Some(2.0));
//! ```

pub mod bench;
pub mod cascade;
pub mod dtw;
mod error;
pub mod ingest;
pub mod lb_mv;
pub mod lb_pc;
pub mod lb_ti;
mod params;
mod scalar;
mod series;
pub mod synth;
pub mod verify;

pub use cascade::{nn_search, search_all, tc_dtw_select, tune_params, CandidatePool, CostMetric, Counters, NnOutcome, TuneGrids};
pub use dtw::{dtw_banded, DtwResult};
pub use error::{Error, Result};
pub use lb_mv::{build_envelope, lb_ad, lb_mv, Envelope};
pub use lb_pc::{build_box_sets, lb_pc, quantize_cluster, BoundingBox, BoxSet, BoxSets, PcConfig};
pub use lb_ti::{lb_ti, ti_advance, ti_extend_top, NeighborDistances, TiSlot};
pub use params::{AdvancedBound, BoundResult, Method, SearchParams, TiVariant};
pub use scalar::Scalar;
pub use series::{point_distance, Dataset, MultivariateSeries};

pub type Series = MultivariateSeries<f64>;
pub type Series32 = MultivariateSeries<f32>;
pub type Dataset64 = Dataset<f64>;
pub type Dataset32 = Dataset<f32>;
pub type Pool = CandidatePool<f64>;
pub type Pool32 = CandidatePool<f32>;
