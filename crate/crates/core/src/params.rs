//! Search tunables and the shared bound result record.

use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::scalar::Scalar;

/// Nearest-neighbor search strategy.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Method {
    /// Exact banded DTW against every candidate, no filtering.
    None,
    LbMv,
    LbTi,
    LbPc,
    /// Picks LB_TI or LB_PC per dataset from a tuning sample.
    TcDtw,
    LbAd,
}

impl Method {
    pub const ALL: [Method; 6] = [
        Method::None,
        Method::LbMv,
        Method::LbTi,
        Method::LbPc,
        Method::TcDtw,
        Method::LbAd,
    ];

    pub fn as_str(self) -> &'static str {
        match self {
            Method::None => "none",
            Method::LbMv => "lb_mv",
            Method::LbTi => "lb_ti",
            Method::LbPc => "lb_pc",
            Method::TcDtw => "tc_dtw",
            Method::LbAd => "lb_ad",
        }
    }
}

impl fmt::Display for Method {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

impl FromStr for Method {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        Method::ALL
            .into_iter()
            .find(|m| m.as_str().eq_ignore_ascii_case(s) || m.as_str().replace('_', "-") == s)
            .ok_or_else(|| Error::Config(format!("unknown method `{s}`")))
    }
}

/// The bound that TC-DTW settled on.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum AdvancedBound {
    LbTi,
    LbPc,
}

impl From<AdvancedBound> for Method {
    fn from(b: AdvancedBound) -> Self {
        match b {
            AdvancedBound::LbTi => Method::LbTi,
            AdvancedBound::LbPc => Method::LbPc,
        }
    }
}

/// Triangle-bound variants.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum TiVariant {
    /// Propagated bounds only, top slot estimated from candidate steps.
    Basic,
    /// Top slot distance computed exactly.
    Top,
    /// All window slots refreshed with exact distances every `P` rows.
    Tip,
    /// `Tip` and `Top` combined.
    TipTop,
}

impl TiVariant {
    pub const ALL: [TiVariant; 4] = [TiVariant::Basic, TiVariant::Top, TiVariant::Tip, TiVariant::TipTop];

    #[inline]
    pub fn exact_top(self) -> bool {
        matches!(self, TiVariant::Top | TiVariant::TipTop)
    }

    #[inline]
    pub fn periodic(self) -> bool {
        matches!(self, TiVariant::Tip | TiVariant::TipTop)
    }
}

/// Every knob of a nearest-neighbor run.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SearchParams {
    /// Sakoe-Chiba half-width. Capped at `n - 1` when used.
    pub window: usize,
    pub method: Method,
    /// Bound chosen for [`Method::TcDtw`]; filled in by tuning.
    pub tc_choice: Option<AdvancedBound>,
    pub ti_variant: TiVariant,
    /// Refresh period of the periodic triangle variants.
    pub period: usize,
    /// Triggering threshold for LB_TI.
    pub e_ti: f64,
    /// Triggering threshold for LB_PC.
    pub e_pc: f64,
    /// Quantization level per dimension.
    pub quant_levels: usize,
    /// Maximum boxes per expanded window.
    pub max_clusters: usize,
    /// Number of original windows merged into one expanded window.
    pub expansion: usize,
    /// Smallest splittable range, as a fraction of the dataset range.
    pub min_cell_frac: f64,
}

impl Default for SearchParams {
    fn default() -> Self {
        Self {
            window: 20,
            method: Method::TcDtw,
            tc_choice: None,
            ti_variant: TiVariant::TipTop,
            period: 5,
            e_ti: 0.1,
            e_pc: 0.1,
            quant_levels: 2,
            max_clusters: 6,
            expansion: 6,
            min_cell_frac: 0.00001,
        }
    }
}

impl SearchParams {
    pub fn with_method(mut self, method: Method) -> Self {
        self.method = method;
        self
    }

    pub fn with_window(mut self, window: usize) -> Self {
        self.window = window;
        self
    }

    /// Window actually used for series of length `n`.
    #[inline]
    pub fn effective_window(&self, n: usize) -> usize {
        self.window.min(n.saturating_sub(1))
    }

    pub fn validate(&self) -> Result<()> {
        let in_unit = |e: f64| e > 0.0 && e < 1.0;
        if self.period == 0 {
            return Err(Error::Config("period must be at least 1".into()));
        }
        if !in_unit(self.e_ti) || !in_unit(self.e_pc) {
            return Err(Error::Config("triggering thresholds must lie in (0, 1)".into()));
        }
        if self.quant_levels == 0 || self.max_clusters == 0 || self.expansion == 0 {
            return Err(Error::Config(
                "quantization level, cluster cap and expansion factor must be at least 1".into(),
            ));
        }
        if !(self.min_cell_frac > 0.0) {
            return Err(Error::Config("min_cell_frac must be positive".into()));
        }
        Ok(())
    }
}

/// Outcome of a lower-bound evaluation.
///
/// When `abandoned` is set, `value` is the partial sum at the point the
/// running total first exceeded the threshold; it is still a valid lower
/// bound and already exceeds that threshold.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct BoundResult<T> {
    pub value: T,
    pub abandoned: bool,
}

impl<T: Scalar> BoundResult<T> {
    pub(crate) fn complete(value: T) -> Self {
        Self { value, abandoned: false }
    }

    pub(crate) fn abandoned(value: T) -> Self {
        Self { value, abandoned: true }
    }
}

/// Threshold used when the caller passes no abandon bound.
#[inline]
pub(crate) fn threshold<T: Scalar>(abandon_above: Option<T>) -> T {
    abandon_above.unwrap_or_else(T::infinity)
}
