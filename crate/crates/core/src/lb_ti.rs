//! Triangle-inequality lower bound (LB_TI) and its variants.
//!
//! The bound walks the query one point at a time and keeps a lower/upper
//! estimate of `d(q_i, c_j)` for every candidate point `c_j` in the window
//! of `q_i`. Moving from `q_{i-1}` to `q_i` only needs the scalar step
//! `d(q_{i-1}, q_i)`:
//!
//! ```text
//! L(q_i, c_j) = max(L(q_{i-1}, c_j) - step, step - U(q_{i-1}, c_j), 0)
//! U(q_i, c_j) = U(q_{i-1}, c_j) + step
//! ```
//!
//! The one candidate point that enters the window at `q_i`, `c_{i+W}`, is
//! either estimated from `c_{i+W-1}` with the candidate step
//! `d(c_{i+W-1}, c_{i+W})` or, in the `Top` variants, measured exactly.
//! The periodic variants re-measure the whole window every `P` rows.
//!
//! Each candidate point contributes the smallest lower estimate among the
//! query points of its window; the bound is the sum of those minima.

use crate::error::{Error, Result};
use crate::params::{threshold, BoundResult, TiVariant};
use crate::scalar::{euclidean, Scalar};
use crate::series::{check_pair, MultivariateSeries};

/// Distances between consecutive points of one series; entry `i - 1`
/// holds `d(s_{i-1}, s_i)`. Computed once per series and reused for
/// every pairing.
#[derive(Debug, Clone, PartialEq)]
pub struct NeighborDistances<T> {
    steps: Vec<T>,
}

impl<T: Scalar> NeighborDistances<T> {
    pub fn of(s: &MultivariateSeries<T>) -> Self {
        let steps = (1..s.len())
            .map(|i| euclidean(s.point(i - 1), s.point(i)))
            .collect();
        Self { steps }
    }

    pub fn steps(&self) -> &[T] {
        &self.steps
    }
}

/// Lower and upper estimate of one point distance.
#[derive(Debug, Clone, Copy, PartialEq, Default)]
pub struct TiSlot<T> {
    pub lower: T,
    pub upper: T,
}

impl<T: Scalar> TiSlot<T> {
    #[inline]
    pub fn exact(d: T) -> Self {
        Self { lower: d, upper: d }
    }
}

/// Moves a slot from `q_{i-1}` to `q_i` for the same candidate point,
/// given `step = d(q_{i-1}, q_i)`.
#[inline]
pub fn ti_advance<T: Scalar>(slot: TiSlot<T>, step: T) -> TiSlot<T> {
    TiSlot {
        lower: (slot.lower - step).max(step - slot.upper).max(T::zero()),
        upper: slot.upper + step,
    }
}

/// Derives the slot `(q_i, c_{j+1})` from `(q_i, c_j)` given
/// `step = d(c_j, c_{j+1})`.
#[inline]
pub fn ti_extend_top<T: Scalar>(slot: TiSlot<T>, step: T) -> TiSlot<T> {
    ti_advance(slot, step)
}

/// LB_TI between query `q` and candidate `c`.
///
/// `q_steps` must come from `q`. `c_steps` (from `c`) is required by the
/// `Basic` and `Tip` variants and ignored by the `Top` ones.
#[allow(clippy::too_many_arguments)]
pub fn lb_ti<T: Scalar>(
    q: &MultivariateSeries<T>,
    c: &MultivariateSeries<T>,
    window: usize,
    variant: TiVariant,
    period: usize,
    q_steps: &NeighborDistances<T>,
    c_steps: Option<&NeighborDistances<T>>,
    abandon_above: Option<T>,
) -> Result<BoundResult<T>> {
    check_pair(q, c)?;
    let n = q.len();
    if period == 0 {
        return Err(Error::invalid("period must be at least 1"));
    }
    if q_steps.steps.len() != n - 1 {
        return Err(Error::invalid("query neighbor distances do not match the query"));
    }
    let c_steps = match (variant.exact_top(), c_steps) {
        (true, _) => None,
        (false, Some(cs)) if cs.steps.len() == n - 1 => Some(cs.steps()),
        (false, Some(_)) => {
            return Err(Error::invalid(
                "candidate neighbor distances do not match the candidate",
            ))
        }
        (false, None) => {
            return Err(Error::invalid(format!(
                "{variant:?} needs candidate neighbor distances"
            )))
        }
    };
    Ok(lb_ti_core(
        q,
        c,
        window,
        variant,
        period,
        q_steps.steps(),
        c_steps,
        threshold(abandon_above),
        |_, _, _| {},
    ))
}

/// Shared implementation. `observe(i, j, slot)` sees every maintained slot
/// after row `i` has been updated.
#[allow(clippy::too_many_arguments)]
pub(crate) fn lb_ti_core<T: Scalar, F: FnMut(usize, usize, TiSlot<T>)>(
    q: &MultivariateSeries<T>,
    c: &MultivariateSeries<T>,
    window: usize,
    variant: TiVariant,
    period: usize,
    q_steps: &[T],
    c_steps: Option<&[T]>,
    limit: T,
    mut observe: F,
) -> BoundResult<T> {
    let n = q.len();
    let w = window.min(n - 1);
    let cap = 2 * w + 2;
    let mut slots = vec![TiSlot::<T>::default(); cap];
    let mut col_min = vec![T::infinity(); cap];
    let mut sum = T::zero();

    for i in 0..n {
        let lo = i.saturating_sub(w);
        let hi = (i + w).min(n - 1);
        let qi = q.point(i);
        let refresh = i == 0 || (variant.periodic() && i % period == 0);

        if refresh {
            for j in lo..=hi {
                slots[j % cap] = TiSlot::exact(euclidean(qi, c.point(j)));
            }
        } else {
            let step = q_steps[i - 1];
            let prev_hi = (i - 1 + w).min(n - 1);
            for j in lo..=prev_hi {
                slots[j % cap] = ti_advance(slots[j % cap], step);
            }
            if hi > prev_hi {
                // hi == i + w enters the window at this row.
                slots[hi % cap] = match c_steps {
                    Some(cs) => {
                        let below = hi - 1;
                        let base = if below >= lo {
                            slots[below % cap]
                        } else {
                            // w == 0: (q_i, c_{i-1}) is outside the window
                            // but still derivable from the previous row.
                            ti_advance(slots[below % cap], step)
                        };
                        ti_extend_top(base, cs[below])
                    }
                    None => TiSlot::exact(euclidean(qi, c.point(hi))),
                };
            }
        }

        for j in lo..=hi {
            let s = slots[j % cap];
            observe(i, j, s);
            let m = &mut col_min[j % cap];
            *m = m.min(s.lower);
        }

        // Column i - w has now seen every query point of its window.
        if i >= w {
            let k = (i - w) % cap;
            sum = sum + col_min[k];
            col_min[k] = T::infinity();
            if sum > limit {
                return BoundResult::abandoned(sum);
            }
        }
    }

    for j in (n - w)..n {
        sum = sum + col_min[j % cap];
        if sum > limit {
            return BoundResult::abandoned(sum);
        }
    }
    BoundResult::complete(sum)
}
