//! Soundness audit: every bound against exact DTW on real data.

use serde::Serialize;

use crate::dtw::dtw_unchecked;
use crate::lb_mv::{build_envelope, lb_ad_unchecked, lb_mv_unchecked};
use crate::lb_pc::{build_box_sets, lb_pc_unchecked, PcConfig};
use crate::lb_ti::{lb_ti_core, NeighborDistances};
use crate::params::{SearchParams, TiVariant};
use crate::scalar::Scalar;
use crate::series::Dataset;

/// One bound that exceeded the exact distance.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Violation {
    pub bound: String,
    pub query: usize,
    pub candidate: usize,
    pub window: usize,
    pub value: f64,
    pub dtw: f64,
}

#[derive(Debug, Clone, Default, PartialEq, Serialize)]
pub struct VerifyReport {
    pub pairs: usize,
    pub bounds_checked: usize,
    pub violations: Vec<Violation>,
}

impl VerifyReport {
    pub fn is_sound(&self) -> bool {
        self.violations.is_empty()
    }
}

/// Checks LB_MV, LB_AD, all LB_TI variants and LB_PC against exact DTW for
/// the first `max_series` series of `ds`, every ordered pair, every window.
pub fn verify_soundness<T: Scalar>(
    ds: &Dataset<T>,
    windows: &[usize],
    params: &SearchParams,
    max_series: usize,
) -> VerifyReport {
    let series = &ds.series()[..ds.count().min(max_series)];
    let steps: Vec<_> = series.iter().map(NeighborDistances::of).collect();
    let pc = PcConfig::new(
        params.quant_levels,
        params.max_clusters,
        params.expansion,
        params.min_cell_frac,
        ds.value_range(),
    );
    let mut report = VerifyReport::default();
    let inf = T::infinity();
    for &window in windows {
        for (qi, q) in series.iter().enumerate() {
            let env = build_envelope(q, window);
            let Ok(boxes) = build_box_sets(q, window, &pc) else {
                continue;
            };
            for (ci, c) in series.iter().enumerate() {
                if qi == ci {
                    continue;
                }
                let dtw = dtw_unchecked(q, c, window, None).distance.expect("not abandoned");
                let mut bounds = vec![
                    ("lb_mv".to_string(), lb_mv_unchecked(c, &env, inf).value),
                    ("lb_ad".to_string(), lb_ad_unchecked(q, c, window, inf).value),
                    ("lb_pc".to_string(), lb_pc_unchecked(c, &boxes, inf).value),
                ];
                for v in TiVariant::ALL {
                    let value = lb_ti_core(
                        q,
                        c,
                        window,
                        v,
                        params.period,
                        steps[qi].steps(),
                        Some(steps[ci].steps()),
                        inf,
                        |_, _, _| {},
                    )
                    .value;
                    bounds.push((format!("lb_ti_{v:?}").to_lowercase(), value));
                }
                report.pairs += 1;
                for (bound, value) in bounds {
                    report.bounds_checked += 1;
                    if value > dtw {
                        report.violations.push(Violation {
                            bound,
                            query: qi,
                            candidate: ci,
                            window,
                            value: value.as_f64(),
                            dtw: dtw.as_f64(),
                        });
                    }
                }
            }
        }
    }
    report
}
