//! Multivariate series, datasets and the point metric.

use crate::error::{Error, Result};
use crate::scalar::{euclidean, Scalar};

/// One multivariate time series stored row-major: point `i` occupies
/// `values[i * dims..(i + 1) * dims]`.
#[derive(Debug, Clone, PartialEq)]
pub struct MultivariateSeries<T> {
    values: Vec<T>,
    len: usize,
    dims: usize,
}

impl<T: Scalar> MultivariateSeries<T> {
    /// Builds a series from row-major values. Rejects empty series,
    /// zero dimensions, a value count that is not `len * dims`, and
    /// non-finite entries.
    pub fn from_flat(values: Vec<T>, dims: usize) -> Result<Self> {
        if dims == 0 {
            return Err(Error::invalid("series dimension must be at least 1"));
        }
        if values.is_empty() {
            return Err(Error::invalid("series must contain at least one point"));
        }
        if values.len() % dims != 0 {
            return Err(Error::invalid(format!(
                "{} values do not split into points of dimension {dims}",
                values.len()
            )));
        }
        if let Some(pos) = values.iter().position(|v| !v.is_finite()) {
            return Err(Error::invalid(format!(
                "non-finite value at point {} dim {}",
                pos / dims,
                pos % dims
            )));
        }
        let len = values.len() / dims;
        Ok(Self { values, len, dims })
    }

    pub fn from_points<P: AsRef<[T]>>(points: &[P]) -> Result<Self> {
        let dims = points.first().map(|p| p.as_ref().len()).unwrap_or(0);
        let mut values = Vec::with_capacity(points.len() * dims);
        for (i, p) in points.iter().enumerate() {
            let p = p.as_ref();
            if p.len() != dims {
                return Err(Error::invalid(format!(
                    "point {i} has {} values, expected {dims}",
                    p.len()
                )));
            }
            values.extend_from_slice(p);
        }
        Self::from_flat(values, dims)
    }

    /// Univariate convenience constructor.
    pub fn univariate(values: &[T]) -> Result<Self> {
        Self::from_flat(values.to_vec(), 1)
    }
}

impl<T> MultivariateSeries<T> {
    #[inline]
    pub fn len(&self) -> usize {
        self.len
    }

    #[inline]
    pub fn is_empty(&self) -> bool {
        self.len == 0
    }

    #[inline]
    pub fn dims(&self) -> usize {
        self.dims
    }

    #[inline]
    pub fn point(&self, i: usize) -> &[T] {
        &self.values[i * self.dims..(i + 1) * self.dims]
    }

    pub fn points(&self) -> std::slice::ChunksExact<'_, T> {
        self.values.chunks_exact(self.dims)
    }

    pub fn as_flat(&self) -> &[T] {
        &self.values
    }

    pub(crate) fn from_flat_unchecked(values: Vec<T>, dims: usize) -> Self {
        let len = values.len() / dims;
        Self { values, len, dims }
    }
}

impl<T: Scalar> MultivariateSeries<T> {
    /// Keeps the first `dims` dimensions of every point.
    pub fn truncate_dims(&self, dims: usize) -> Result<Self> {
        if dims == 0 || dims > self.dims {
            return Err(Error::invalid(format!(
                "dims_used {dims} outside 1..={}",
                self.dims
            )));
        }
        let mut values = Vec::with_capacity(self.len * dims);
        for p in self.points() {
            values.extend_from_slice(&p[..dims]);
        }
        Ok(Self::from_flat_unchecked(values, dims))
    }

    /// Converts to another scalar type.
    pub fn cast<U: Scalar>(&self) -> MultivariateSeries<U> {
        MultivariateSeries {
            values: self.values.iter().map(|v| U::lit(v.as_f64())).collect(),
            len: self.len,
            dims: self.dims,
        }
    }
}

/// Checks that two series can be aligned.
pub(crate) fn check_pair<T>(q: &MultivariateSeries<T>, c: &MultivariateSeries<T>) -> Result<()> {
    if q.len() != c.len() {
        return Err(Error::invalid(format!(
            "length mismatch: {} vs {}",
            q.len(),
            c.len()
        )));
    }
    if q.dims() != c.dims() {
        return Err(Error::invalid(format!(
            "dimension mismatch: {} vs {}",
            q.dims(),
            c.dims()
        )));
    }
    Ok(())
}

/// Euclidean distance between two points of equal dimension.
pub fn point_distance<T: Scalar>(a: &[T], b: &[T]) -> Result<T> {
    if a.len() != b.len() {
        return Err(Error::invalid(format!(
            "point dimension mismatch: {} vs {}",
            a.len(),
            b.len()
        )));
    }
    Ok(euclidean(a, b))
}

/// A named collection of equal-length, equal-dimension series.
#[derive(Debug, Clone, PartialEq)]
pub struct Dataset<T> {
    pub name: String,
    series: Vec<MultivariateSeries<T>>,
    len: usize,
    dims: usize,
    /// Whether values were z-normalized.
    pub normalized: bool,
    /// Per-dimension `max - min` over every point of every series.
    value_range: Vec<T>,
}

impl<T: Scalar> Dataset<T> {
    pub fn new(name: impl Into<String>, series: Vec<MultivariateSeries<T>>) -> Result<Self> {
        let first = series
            .first()
            .ok_or_else(|| Error::invalid("dataset contains no series"))?;
        let (len, dims) = (first.len(), first.dims());
        for (k, s) in series.iter().enumerate() {
            if s.len() != len || s.dims() != dims {
                return Err(Error::invalid(format!(
                    "series {k} has shape {}x{}, expected {len}x{dims}",
                    s.len(),
                    s.dims()
                )));
            }
        }
        let value_range = value_range(&series, dims);
        Ok(Self {
            name: name.into(),
            series,
            len,
            dims,
            normalized: false,
            value_range,
        })
    }

    pub fn series(&self) -> &[MultivariateSeries<T>] {
        &self.series
    }

    pub fn into_series(self) -> Vec<MultivariateSeries<T>> {
        self.series
    }

    /// Length shared by every series.
    pub fn series_len(&self) -> usize {
        self.len
    }

    pub fn dims(&self) -> usize {
        self.dims
    }

    pub fn count(&self) -> usize {
        self.series.len()
    }

    pub fn value_range(&self) -> &[T] {
        &self.value_range
    }

    pub(crate) fn with_normalized(mut self, normalized: bool) -> Self {
        self.normalized = normalized;
        self
    }

    /// Keeps the first `dims_used` dimensions of every point.
    pub fn truncate_dims(&self, dims_used: usize) -> Result<Self> {
        if dims_used == 0 || dims_used > self.dims {
            return Err(Error::invalid(format!(
                "dims_used {dims_used} outside 1..={}",
                self.dims
            )));
        }
        let series = self
            .series
            .iter()
            .map(|s| s.truncate_dims(dims_used))
            .collect::<Result<Vec<_>>>()?;
        Ok(Self {
            name: self.name.clone(),
            series,
            len: self.len,
            dims: dims_used,
            normalized: self.normalized,
            value_range: self.value_range[..dims_used].to_vec(),
        })
    }

    pub fn cast<U: Scalar>(&self) -> Dataset<U> {
        Dataset {
            name: self.name.clone(),
            series: self.series.iter().map(|s| s.cast()).collect(),
            len: self.len,
            dims: self.dims,
            normalized: self.normalized,
            value_range: self.value_range.iter().map(|v| U::lit(v.as_f64())).collect(),
        }
    }
}

fn value_range<T: Scalar>(series: &[MultivariateSeries<T>], dims: usize) -> Vec<T> {
    let mut lo = vec![T::infinity(); dims];
    let mut hi = vec![T::neg_infinity(); dims];
    for s in series {
        for p in s.points() {
            for (d, &v) in p.iter().enumerate() {
                lo[d] = lo[d].min(v);
                hi[d] = hi[d].max(v);
            }
        }
    }
    lo.iter().zip(&hi).map(|(&l, &h)| h - l).collect()
}
