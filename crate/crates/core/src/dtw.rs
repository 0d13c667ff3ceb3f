//! Sakoe-Chiba banded dependent DTW.

use crate::error::Result;
use crate::scalar::{euclidean, Scalar};
use crate::series::{check_pair, MultivariateSeries};

/// Result of a banded DTW computation.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct DtwResult<T> {
    /// `None` when the computation was abandoned.
    pub distance: Option<T>,
    /// Number of matrix cells evaluated.
    pub cells_computed: u64,
}

impl<T: Scalar> DtwResult<T> {
    pub fn is_abandoned(&self) -> bool {
        self.distance.is_none()
    }
}

/// Banded DTW between `q` and `c` with cell cost equal to the Euclidean
/// distance of the paired points.
///
/// The window is capped at `n - 1`. With `abandon_above` set, the
/// computation stops as soon as every cell of a row exceeds it, or when
/// the final distance does.
pub fn dtw_banded<T: Scalar>(
    q: &MultivariateSeries<T>,
    c: &MultivariateSeries<T>,
    window: usize,
    abandon_above: Option<T>,
) -> Result<DtwResult<T>> {
    check_pair(q, c)?;
    Ok(dtw_unchecked(q, c, window, abandon_above))
}

pub(crate) fn dtw_unchecked<T: Scalar>(
    q: &MultivariateSeries<T>,
    c: &MultivariateSeries<T>,
    window: usize,
    abandon_above: Option<T>,
) -> DtwResult<T> {
    let n = q.len();
    let w = window.min(n - 1);
    let limit = abandon_above.unwrap_or_else(T::infinity);
    let inf = T::infinity();

    // Row i holds columns j in [i - w, i + w]; slot k maps to j = i - w + k.
    // Slot 0 of each row is a sentinel for column i - w - 1.
    let width = 2 * w + 1;
    let mut prev = vec![inf; width + 2];
    let mut curr = vec![inf; width + 2];
    let mut cells = 0u64;

    for i in 0..n {
        curr.fill(inf);
        let lo = i.saturating_sub(w);
        let hi = (i + w).min(n - 1);
        let qi = q.point(i);
        let mut row_min = inf;
        for j in lo..=hi {
            // slot for column j in row i: j + w + 1 - i (sentinel at 0).
            let k = j + w + 1 - i;
            let cost = euclidean(qi, c.point(j));
            let best = if i == 0 && j == 0 {
                T::zero()
            } else {
                // left: (i, j-1) same row slot k-1
                // down: (i-1, j) previous row slot k+1
                // diag: (i-1, j-1) previous row slot k
                let left = curr[k - 1];
                let down = prev[k + 1];
                let diag = prev[k];
                left.min(down).min(diag)
            };
            let v = cost + best;
            curr[k] = v;
            row_min = row_min.min(v);
        }
        cells += (hi - lo + 1) as u64;
        if row_min > limit {
            return DtwResult {
                distance: None,
                cells_computed: cells,
            };
        }
        std::mem::swap(&mut prev, &mut curr);
    }

    let d = prev[w + 1];
    DtwResult {
        distance: if d > limit { None } else { Some(d) },
        cells_computed: cells,
    }
}
