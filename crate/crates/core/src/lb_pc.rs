//! Point-clustering lower bound (LB_PC).
//!
//! The query points of each window are bucketed on a regular grid of `L`
//! segments per dimension. Every nonempty cell becomes a tight bounding
//! box, and a candidate point is charged its distance to the nearest box
//! instead of to the single envelope box used by LB_MV. To amortize the
//! clustering, `w` consecutive windows share one box set built over their
//! union (the expanded window).

use crate::error::{Error, Result};
use crate::lb_mv::sq_box_distance;
use crate::params::{threshold, BoundResult};
use crate::scalar::Scalar;
use crate::series::MultivariateSeries;

/// Axis-aligned box `[lo, hi]`.
#[derive(Debug, Clone, PartialEq)]
pub struct BoundingBox<T> {
    pub lo: Vec<T>,
    pub hi: Vec<T>,
}

impl<T: Scalar> BoundingBox<T> {
    fn around(p: &[T]) -> Self {
        Self {
            lo: p.to_vec(),
            hi: p.to_vec(),
        }
    }

    fn include(&mut self, p: &[T]) {
        for ((l, h), &v) in self.lo.iter_mut().zip(self.hi.iter_mut()).zip(p) {
            *l = l.min(v);
            *h = h.max(v);
        }
    }

    pub fn contains(&self, p: &[T]) -> bool {
        p.iter()
            .zip(self.lo.iter().zip(&self.hi))
            .all(|(&v, (&l, &h))| l <= v && v <= h)
    }

    /// Euclidean distance from `p` to the box; zero inside.
    pub fn distance(&self, p: &[T]) -> T {
        sq_box_distance(p, &self.lo, &self.hi).sqrt()
    }
}

/// Boxes covering the query points of one expanded window.
#[derive(Debug, Clone, PartialEq)]
pub struct BoxSet<T> {
    pub boxes: Vec<BoundingBox<T>>,
    /// Inclusive query index range the boxes were built from.
    pub span: (usize, usize),
}

/// Clustering knobs with the per-dimension split threshold resolved.
#[derive(Debug, Clone, PartialEq)]
pub struct PcConfig<T> {
    pub levels: usize,
    pub max_clusters: usize,
    pub expansion: usize,
    /// A dimension whose value range within the clustered points is below
    /// this is not split.
    pub min_split: Vec<T>,
}

impl<T: Scalar> PcConfig<T> {
    /// `value_range` is the per-dimension `max - min` of the whole dataset.
    pub fn new(
        levels: usize,
        max_clusters: usize,
        expansion: usize,
        min_cell_frac: f64,
        value_range: &[T],
    ) -> Self {
        let frac = T::lit(min_cell_frac);
        Self {
            levels,
            max_clusters,
            expansion,
            min_split: value_range.iter().map(|&r| r * frac).collect(),
        }
    }
}

/// Groups `points` into at most `max_clusters` tight bounding boxes by grid
/// quantization with `levels` segments per splittable dimension.
///
/// Nonempty cells are taken in lexicographic order of their cell index;
/// cells beyond position `max_clusters - 1` are folded into the last box.
pub fn quantize_cluster<T: Scalar>(
    points: &[&[T]],
    levels: usize,
    max_clusters: usize,
    min_split: &[T],
) -> Result<Vec<BoundingBox<T>>> {
    let first = points
        .first()
        .ok_or_else(|| Error::invalid("cannot cluster an empty point set"))?;
    if levels == 0 || max_clusters == 0 {
        return Err(Error::invalid("levels and max_clusters must be at least 1"));
    }
    let dims = first.len();
    if min_split.len() != dims || points.iter().any(|p| p.len() != dims) {
        return Err(Error::invalid("point dimensions do not agree"));
    }

    let mut lo = first.to_vec();
    let mut hi = first.to_vec();
    for p in &points[1..] {
        for d in 0..dims {
            lo[d] = lo[d].min(p[d]);
            hi[d] = hi[d].max(p[d]);
        }
    }

    let top = levels - 1;
    let lv = T::lit(levels as f64);
    // Cell length per dimension, or None when the dimension stays whole.
    let cell: Vec<Option<T>> = (0..dims)
        .map(|d| {
            let range = hi[d] - lo[d];
            (levels > 1 && range > T::zero() && range >= min_split[d]).then(|| range / lv)
        })
        .collect();

    if cell.iter().all(Option::is_none) {
        return Ok(vec![BoundingBox { lo, hi }]);
    }

    let mut keys = vec![0u32; points.len() * dims];
    for (k, p) in points.iter().enumerate() {
        for d in 0..dims {
            if let Some(len) = cell[d] {
                let idx = ((p[d] - lo[d]) / len).floor().to_usize().unwrap_or(0).min(top);
                keys[k * dims + d] = idx as u32;
            }
        }
    }
    let key = |k: usize| &keys[k * dims..(k + 1) * dims];
    let mut order: Vec<usize> = (0..points.len()).collect();
    order.sort_by(|&a, &b| key(a).cmp(key(b)));

    let mut boxes: Vec<BoundingBox<T>> = Vec::new();
    let mut prev: Option<usize> = None;
    for &k in &order {
        let same_cell = prev.is_some_and(|p| key(p) == key(k));
        if same_cell || boxes.len() == max_clusters {
            boxes.last_mut().expect("nonempty").include(points[k]);
        } else {
            boxes.push(BoundingBox::around(points[k]));
        }
        prev = Some(k);
    }
    Ok(boxes)
}

/// Box sets for every expanded window of a query.
#[derive(Debug, Clone, PartialEq)]
pub struct BoxSets<T> {
    sets: Vec<BoxSet<T>>,
    expansion: usize,
    len: usize,
    dims: usize,
}

impl<T: Scalar> BoxSets<T> {
    pub fn sets(&self) -> &[BoxSet<T>] {
        &self.sets
    }

    /// Box set used for the original window centered at query index `i`.
    #[inline]
    pub fn for_window(&self, i: usize) -> &BoxSet<T> {
        &self.sets[i / self.expansion]
    }

    pub fn series_len(&self) -> usize {
        self.len
    }

    /// Total number of boxes across all expanded windows.
    pub fn box_count(&self) -> usize {
        self.sets.iter().map(|s| s.boxes.len()).sum()
    }
}

/// Clusters every expanded window of `q`. Expanded window `g` covers query
/// indices `[g*w - W, g*w + W + w - 1]` clipped to the series, and serves
/// the original windows `g*w .. g*w + w - 1`.
pub fn build_box_sets<T: Scalar>(
    q: &MultivariateSeries<T>,
    window: usize,
    config: &PcConfig<T>,
) -> Result<BoxSets<T>> {
    if config.expansion == 0 {
        return Err(Error::invalid("expansion factor must be at least 1"));
    }
    if config.min_split.len() != q.dims() {
        return Err(Error::invalid("split thresholds do not match the query dimension"));
    }
    let n = q.len();
    let big_w = window.min(n - 1);
    let w = config.expansion;
    let groups = n.div_ceil(w);
    let mut sets = Vec::with_capacity(groups);
    let mut pts: Vec<&[T]> = Vec::with_capacity(2 * big_w + w);
    for g in 0..groups {
        let start = (g * w).saturating_sub(big_w);
        let end = (g * w + big_w + w - 1).min(n - 1);
        pts.clear();
        pts.extend((start..=end).map(|i| q.point(i)));
        let boxes = quantize_cluster(&pts, config.levels, config.max_clusters, &config.min_split)?;
        sets.push(BoxSet {
            boxes,
            span: (start, end),
        });
    }
    Ok(BoxSets {
        sets,
        expansion: w,
        len: n,
        dims: q.dims(),
    })
}

/// LB_PC: sum over candidate points of the distance to the nearest box of
/// the box set serving that index.
pub fn lb_pc<T: Scalar>(
    c: &MultivariateSeries<T>,
    box_sets: &BoxSets<T>,
    abandon_above: Option<T>,
) -> Result<BoundResult<T>> {
    if c.len() != box_sets.len || c.dims() != box_sets.dims {
        return Err(Error::invalid(format!(
            "candidate shape {}x{} does not match box sets {}x{}",
            c.len(),
            c.dims(),
            box_sets.len,
            box_sets.dims
        )));
    }
    Ok(lb_pc_unchecked(c, box_sets, threshold(abandon_above)))
}

pub(crate) fn lb_pc_unchecked<T: Scalar>(
    c: &MultivariateSeries<T>,
    box_sets: &BoxSets<T>,
    limit: T,
) -> BoundResult<T> {
    let mut sum = T::zero();
    for (j, x) in c.points().enumerate() {
        let set = box_sets.for_window(j);
        let mut best = T::infinity();
        for b in &set.boxes {
            best = best.min(sq_box_distance(x, &b.lo, &b.hi));
            if best == T::zero() {
                break;
            }
        }
        sum = sum + best.sqrt();
        if sum > limit {
            return BoundResult::abandoned(sum);
        }
    }
    BoundResult::complete(sum)
}
