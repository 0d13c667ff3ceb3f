//! Envelope bound LB_MV and the point-minimum bound LB_AD.
//!
//! Both bounds are summed over candidate points: each candidate point
//! `c_j` is charged its distance to the query points that may be aligned
//! with it, i.e. `q_i` with `|i - j| <= W`.

use std::collections::VecDeque;

use crate::error::{Error, Result};
use crate::params::{threshold, BoundResult};
use crate::scalar::{euclidean, Scalar};
use crate::series::{check_pair, MultivariateSeries};

/// Per-dimension windowed max/min tube around a query series.
#[derive(Debug, Clone, PartialEq)]
pub struct Envelope<T> {
    upper: Vec<T>,
    lower: Vec<T>,
    len: usize,
    dims: usize,
    window: usize,
}

impl<T: Scalar> Envelope<T> {
    #[inline]
    pub fn upper(&self, i: usize) -> &[T] {
        &self.upper[i * self.dims..(i + 1) * self.dims]
    }

    #[inline]
    pub fn lower(&self, i: usize) -> &[T] {
        &self.lower[i * self.dims..(i + 1) * self.dims]
    }

    pub fn len(&self) -> usize {
        self.len
    }

    pub fn is_empty(&self) -> bool {
        self.len == 0
    }

    pub fn dims(&self) -> usize {
        self.dims
    }

    /// Window the envelope was built with, after capping.
    pub fn window(&self) -> usize {
        self.window
    }
}

/// Sliding-window max and min of `values` over `[i - w, i + w]`, clipped to
/// the slice, via monotone deques. O(n).
pub fn sliding_max_min<T: Scalar>(values: &[T], w: usize) -> (Vec<T>, Vec<T>) {
    let n = values.len();
    let mut maxs = Vec::with_capacity(n);
    let mut mins = Vec::with_capacity(n);
    // Indices with strictly decreasing (resp. increasing) values.
    let mut dmax: VecDeque<usize> = VecDeque::with_capacity(2 * w + 2);
    let mut dmin: VecDeque<usize> = VecDeque::with_capacity(2 * w + 2);
    let mut next = 0;
    for i in 0..n {
        let hi = (i + w).min(n - 1);
        while next <= hi {
            let v = values[next];
            while dmax.back().is_some_and(|&k| values[k] <= v) {
                dmax.pop_back();
            }
            dmax.push_back(next);
            while dmin.back().is_some_and(|&k| values[k] >= v) {
                dmin.pop_back();
            }
            dmin.push_back(next);
            next += 1;
        }
        let lo = i.saturating_sub(w);
        while dmax.front().is_some_and(|&k| k < lo) {
            dmax.pop_front();
        }
        while dmin.front().is_some_and(|&k| k < lo) {
            dmin.pop_front();
        }
        maxs.push(values[*dmax.front().expect("window is nonempty")]);
        mins.push(values[*dmin.front().expect("window is nonempty")]);
    }
    (maxs, mins)
}

/// Builds the envelope of `q` for window `window` (capped at `n - 1`).
pub fn build_envelope<T: Scalar>(q: &MultivariateSeries<T>, window: usize) -> Envelope<T> {
    let (n, dims) = (q.len(), q.dims());
    let w = window.min(n - 1);
    let mut upper = vec![T::zero(); n * dims];
    let mut lower = vec![T::zero(); n * dims];
    let mut column = Vec::with_capacity(n);
    for p in 0..dims {
        column.clear();
        column.extend(q.points().map(|pt| pt[p]));
        let (mx, mn) = sliding_max_min(&column, w);
        for i in 0..n {
            upper[i * dims + p] = mx[i];
            lower[i * dims + p] = mn[i];
        }
    }
    Envelope {
        upper,
        lower,
        len: n,
        dims,
        window: w,
    }
}

/// Squared distance from `x` to the axis-aligned box `[lo, hi]`.
#[inline]
pub(crate) fn sq_box_distance<T: Scalar>(x: &[T], lo: &[T], hi: &[T]) -> T {
    let mut acc = T::zero();
    for ((&v, &l), &h) in x.iter().zip(lo).zip(hi) {
        let dev = if v > h {
            v - h
        } else if v < l {
            l - v
        } else {
            continue;
        };
        acc = acc + dev * dev;
    }
    acc
}

/// LB_MV: sum over candidate points of the Euclidean distance from the
/// point to the query envelope box at the same index.
pub fn lb_mv<T: Scalar>(
    c: &MultivariateSeries<T>,
    env: &Envelope<T>,
    abandon_above: Option<T>,
) -> Result<BoundResult<T>> {
    if c.len() != env.len() || c.dims() != env.dims() {
        return Err(Error::invalid(format!(
            "candidate shape {}x{} does not match envelope {}x{}",
            c.len(),
            c.dims(),
            env.len(),
            env.dims()
        )));
    }
    Ok(lb_mv_unchecked(c, env, threshold(abandon_above)))
}

pub(crate) fn lb_mv_unchecked<T: Scalar>(
    c: &MultivariateSeries<T>,
    env: &Envelope<T>,
    limit: T,
) -> BoundResult<T> {
    let mut sum = T::zero();
    for (j, x) in c.points().enumerate() {
        sum = sum + sq_box_distance(x, env.lower(j), env.upper(j)).sqrt();
        if sum > limit {
            return BoundResult::abandoned(sum);
        }
    }
    BoundResult::complete(sum)
}

/// LB_AD: sum over candidate points of the smallest true distance to any
/// query point inside its window.
pub fn lb_ad<T: Scalar>(
    q: &MultivariateSeries<T>,
    c: &MultivariateSeries<T>,
    window: usize,
    abandon_above: Option<T>,
) -> Result<BoundResult<T>> {
    check_pair(q, c)?;
    Ok(lb_ad_unchecked(q, c, window, threshold(abandon_above)))
}

pub(crate) fn lb_ad_unchecked<T: Scalar>(
    q: &MultivariateSeries<T>,
    c: &MultivariateSeries<T>,
    window: usize,
    limit: T,
) -> BoundResult<T> {
    let n = q.len();
    let w = window.min(n - 1);
    let mut sum = T::zero();
    for j in 0..n {
        let cj = c.point(j);
        let lo = j.saturating_sub(w);
        let hi = (j + w).min(n - 1);
        let mut best = T::infinity();
        for i in lo..=hi {
            best = best.min(euclidean(q.point(i), cj));
        }
        sum = sum + best;
        if sum > limit {
            return BoundResult::abandoned(sum);
        }
    }
    BoundResult::complete(sum)
}
