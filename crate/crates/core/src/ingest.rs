//! Dataset loading, normalization and query/candidate splitting.
//!
//! Two text formats are read:
//!
//! * native: first line `<num_series> <length> <dims>`, then `num_series`
//!   blocks of `length` lines with `dims` space-separated values each.
//!   Lines starting with `#` and blank lines are ignored.
//! * a subset of the sktime `.ts` format: `@` header lines, `@data`, then
//!   one series per line with dimensions separated by `:` and values by
//!   `,`. Only equal-length files without timestamps are accepted.
//!
//! Missing values (`NA`, `NaN`, `?`) become 0 before any statistics are
//! computed.

use std::fmt::Write as _;
use std::fs;
use std::io::Write;
use std::path::{Path, PathBuf};
use std::str::FromStr;

use rand::seq::SliceRandom;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::scalar::Scalar;
use crate::series::{Dataset, MultivariateSeries};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Format {
    Native,
    Ts,
}

impl FromStr for Format {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s.to_ascii_lowercase().as_str() {
            "native" | "mts" => Ok(Format::Native),
            "ts" => Ok(Format::Ts),
            other => Err(Error::Config(format!("unknown data format `{other}`"))),
        }
    }
}

/// Parsed values before missing-value replacement. Missing entries are NaN.
#[derive(Debug, Clone, PartialEq)]
pub struct RawDataset {
    pub name: String,
    /// One row-major value vector per series.
    pub series: Vec<Vec<f64>>,
    pub len: usize,
    pub dims: usize,
    pub format: Format,
}

impl RawDataset {
    pub fn missing_count(&self) -> usize {
        self.series.iter().flatten().filter(|v| v.is_nan()).count()
    }

    /// Replaces missing values with 0 and builds the dataset without
    /// normalizing.
    pub fn finalize<T: Scalar>(&self) -> Result<Dataset<T>> {
        let series = self
            .series
            .iter()
            .map(|v| {
                let vals = v
                    .iter()
                    .map(|&x| T::lit(if x.is_nan() { 0.0 } else { x }))
                    .collect();
                MultivariateSeries::from_flat(vals, self.dims)
            })
            .collect::<Result<Vec<_>>>()?;
        Dataset::new(self.name.clone(), series)
    }
}

fn is_missing(tok: &str) -> bool {
    tok == "?" || tok.eq_ignore_ascii_case("na") || tok.eq_ignore_ascii_case("nan")
}

fn parse_value(tok: &str, path: &Path, line: usize) -> Result<f64> {
    if is_missing(tok) {
        return Ok(f64::NAN);
    }
    let v: f64 = tok.parse().map_err(|_| Error::Parse {
        path: path.to_owned(),
        line,
        msg: format!("not a number: `{tok}`"),
    })?;
    if !v.is_finite() {
        return Err(Error::Parse {
            path: path.to_owned(),
            line,
            msg: format!("non-finite value `{tok}`"),
        });
    }
    Ok(v)
}

fn dataset_name(path: &Path) -> String {
    path.file_stem()
        .map(|s| s.to_string_lossy().into_owned())
        .unwrap_or_else(|| "dataset".into())
}

fn read(path: &Path) -> Result<String> {
    fs::read_to_string(path).map_err(|source| Error::Io {
        path: path.to_owned(),
        source,
    })
}

/// Reads a native-format file.
pub fn parse_native(path: &Path) -> Result<RawDataset> {
    parse_native_str(&read(path)?, path)
}

/// Parses native-format text; `path` is used for naming and error messages.
pub fn parse_native_str(text: &str, path: &Path) -> Result<RawDataset> {
    let err = |line: usize, msg: String| Error::Parse {
        path: path.to_owned(),
        line,
        msg,
    };
    let mut lines = text
        .lines()
        .enumerate()
        .map(|(i, l)| (i + 1, l.trim()))
        .filter(|(_, l)| !l.is_empty() && !l.starts_with('#'));

    let (hline, header) = lines.next().ok_or_else(|| err(1, "missing header".into()))?;
    let fields: Vec<usize> = header
        .split_whitespace()
        .map(|t| t.parse::<usize>())
        .collect::<std::result::Result<_, _>>()
        .map_err(|_| err(hline, format!("malformed header `{header}`")))?;
    let [count, len, dims] = fields[..] else {
        return Err(err(hline, format!("header needs 3 fields, got {}", fields.len())));
    };
    if count == 0 || len == 0 || dims == 0 {
        return Err(err(hline, "series count, length and dimension must be positive".into()));
    }

    let mut series = Vec::with_capacity(count);
    let mut last = hline;
    for _ in 0..count {
        let mut values = Vec::with_capacity(len * dims);
        for _ in 0..len {
            let (ln, row) = lines.next().ok_or_else(|| {
                err(last + 1, format!("unexpected end of file, expected {count} series of {len} rows"))
            })?;
            last = ln;
            let before = values.len();
            for tok in row.split_whitespace() {
                values.push(parse_value(tok, path, ln)?);
            }
            let got = values.len() - before;
            if got != dims {
                return Err(err(ln, format!("row has {got} values, expected {dims}")));
            }
        }
        series.push(values);
    }
    if let Some((ln, _)) = lines.next() {
        return Err(err(ln, "trailing data after the declared series".into()));
    }
    Ok(RawDataset {
        name: dataset_name(path),
        series,
        len,
        dims,
        format: Format::Native,
    })
}

/// Writes a dataset in the native format. Values use Rust's shortest
/// round-trip formatting.
pub fn write_native<T: Scalar, W: Write>(ds: &Dataset<T>, mut out: W) -> std::io::Result<()> {
    writeln!(out, "{} {} {}", ds.count(), ds.series_len(), ds.dims())?;
    let mut line = String::new();
    for s in ds.series() {
        for p in s.points() {
            line.clear();
            for (k, v) in p.iter().enumerate() {
                if k > 0 {
                    line.push(' ');
                }
                write!(line, "{v}").expect("writing to a String");
            }
            writeln!(out, "{line}")?;
        }
    }
    Ok(())
}

/// Reads a `.ts` file.
pub fn parse_ts_subset(path: &Path) -> Result<RawDataset> {
    parse_ts_str(&read(path)?, path)
}

/// Parses `.ts` text; `path` is used for naming and error messages.
pub fn parse_ts_str(text: &str, path: &Path) -> Result<RawDataset> {
    let err = |line: usize, msg: String| Error::Parse {
        path: path.to_owned(),
        line,
        msg,
    };
    let mut name = dataset_name(path);
    let mut declared_dims: Option<usize> = None;
    let mut declared_len: Option<usize> = None;
    let mut has_labels = false;
    let mut in_data = false;
    let mut series: Vec<Vec<f64>> = Vec::new();
    let mut shape: Option<(usize, usize)> = None;

    let flag = |v: &str, ln: usize| -> Result<bool> {
        match v.to_ascii_lowercase().as_str() {
            "true" => Ok(true),
            "false" => Ok(false),
            other => Err(err(ln, format!("expected true/false, got `{other}`"))),
        }
    };

    for (idx, raw) in text.lines().enumerate() {
        let ln = idx + 1;
        let line = raw.trim();
        if line.is_empty() || line.starts_with('#') {
            continue;
        }
        if !in_data {
            let Some(directive) = line.strip_prefix('@') else {
                return Err(err(ln, "data before @data".into()));
            };
            let (key, value) = directive
                .split_once(char::is_whitespace)
                .map(|(k, v)| (k, v.trim()))
                .unwrap_or((directive, ""));
            match key.to_ascii_lowercase().as_str() {
                "problemname" => name = value.to_owned(),
                "timestamps" => {
                    if flag(value, ln)? {
                        return Err(err(ln, "timestamped series are not supported".into()));
                    }
                }
                "missing" => {
                    flag(value, ln)?;
                }
                "univariate" => {
                    if flag(value, ln)? {
                        declared_dims.get_or_insert(1);
                    }
                }
                "dimension" | "dimensions" => {
                    declared_dims = Some(
                        value
                            .parse()
                            .map_err(|_| err(ln, format!("bad dimension count `{value}`")))?,
                    );
                }
                "equallength" => {
                    if !flag(value, ln)? {
                        return Err(err(ln, "unequal-length datasets are not supported".into()));
                    }
                }
                "serieslength" => {
                    declared_len = Some(
                        value
                            .parse()
                            .map_err(|_| err(ln, format!("bad series length `{value}`")))?,
                    );
                }
                "classlabel" => {
                    let first = value.split_whitespace().next().unwrap_or("");
                    has_labels = flag(first, ln)?;
                }
                "targetlabel" => {
                    has_labels = flag(value.split_whitespace().next().unwrap_or(""), ln)?;
                }
                "data" => in_data = true,
                other => return Err(err(ln, format!("unsupported directive `@{other}`"))),
            }
            continue;
        }

        let mut fields: Vec<&str> = line.split(':').collect();
        if has_labels {
            if fields.len() < 2 {
                return Err(err(ln, "missing class label".into()));
            }
            fields.pop();
        }
        if let Some(d) = declared_dims {
            if fields.len() != d {
                return Err(err(ln, format!("{} dimensions, expected {d}", fields.len())));
            }
        }
        let dims = fields.len();
        let per_dim: Vec<Vec<f64>> = fields
            .iter()
            .map(|f| {
                f.split(',')
                    .map(|t| parse_value(t.trim(), path, ln))
                    .collect::<Result<Vec<_>>>()
            })
            .collect::<Result<_>>()?;
        let len = per_dim[0].len();
        if per_dim.iter().any(|d| d.len() != len) {
            return Err(err(ln, "dimensions of one series differ in length".into()));
        }
        if let Some(l) = declared_len {
            if len != l {
                return Err(err(ln, format!("series length {len}, expected {l}")));
            }
        }
        match shape {
            None => shape = Some((len, dims)),
            Some(s) if s != (len, dims) => {
                return Err(err(
                    ln,
                    format!("series shape {len}x{dims} differs from {}x{}", s.0, s.1),
                ))
            }
            _ => {}
        }
        let mut values = Vec::with_capacity(len * dims);
        for t in 0..len {
            values.extend(per_dim.iter().map(|d| d[t]));
        }
        series.push(values);
    }

    let (len, dims) = shape.ok_or_else(|| err(text.lines().count().max(1), "no series found".into()))?;
    Ok(RawDataset {
        name,
        series,
        len,
        dims,
        format: Format::Ts,
    })
}

pub fn load(path: &Path, format: Format) -> Result<RawDataset> {
    match format {
        Format::Native => parse_native(path),
        Format::Ts => parse_ts_subset(path),
    }
}

/// Guesses the format from the file extension (`.ts` or anything else).
pub fn format_for(path: &Path) -> Format {
    match path.extension().and_then(|e| e.to_str()) {
        Some(e) if e.eq_ignore_ascii_case("ts") => Format::Ts,
        _ => Format::Native,
    }
}

/// Z-normalizes each dimension with the mean and population standard
/// deviation over every point of every series. Zero-variance dimensions
/// become all zeros.
pub fn normalize<T: Scalar>(raw: &RawDataset) -> Result<Dataset<T>> {
    let dims = raw.dims;
    let clean = |x: f64| if x.is_nan() { 0.0 } else { x };
    let mut mean = vec![0.0f64; dims];
    let mut count = 0usize;
    for s in &raw.series {
        for p in s.chunks_exact(dims) {
            for (m, &x) in mean.iter_mut().zip(p) {
                *m += clean(x);
            }
            count += 1;
        }
    }
    if count == 0 {
        return Err(Error::invalid("dataset contains no points"));
    }
    mean.iter_mut().for_each(|m| *m /= count as f64);
    let mut var = vec![0.0f64; dims];
    for s in &raw.series {
        for p in s.chunks_exact(dims) {
            for d in 0..dims {
                let dev = clean(p[d]) - mean[d];
                var[d] += dev * dev;
            }
        }
    }
    let std: Vec<f64> = var.iter().map(|v| (v / count as f64).sqrt()).collect();

    let series = raw
        .series
        .iter()
        .map(|s| {
            let vals = s
                .iter()
                .enumerate()
                .map(|(k, &x)| {
                    let d = k % dims;
                    T::lit(if std[d] > 0.0 {
                        (clean(x) - mean[d]) / std[d]
                    } else {
                        0.0
                    })
                })
                .collect();
            MultivariateSeries::from_flat(vals, dims)
        })
        .collect::<Result<Vec<_>>>()?;
    Ok(Dataset::new(raw.name.clone(), series)?.with_normalized(true))
}

/// Seeded split into `(queries, candidates)`. The query count is
/// `round(query_frac * count)`; both sides keep file order.
pub fn split<T: Scalar>(
    ds: &Dataset<T>,
    query_frac: f64,
    seed: u64,
) -> Result<(Vec<MultivariateSeries<T>>, Vec<MultivariateSeries<T>>)> {
    if !(query_frac > 0.0 && query_frac < 1.0) {
        return Err(Error::invalid(format!("query fraction {query_frac} outside (0, 1)")));
    }
    let total = ds.count();
    let nq = (query_frac * total as f64).round() as usize;
    if nq == 0 || nq >= total {
        return Err(Error::invalid(format!(
            "splitting {total} series at {query_frac} leaves one side empty"
        )));
    }
    let mut order: Vec<usize> = (0..total).collect();
    order.shuffle(&mut ChaCha8Rng::seed_from_u64(seed));
    let mut is_query = vec![false; total];
    for &i in &order[..nq] {
        is_query[i] = true;
    }
    let (mut queries, mut candidates) = (Vec::with_capacity(nq), Vec::with_capacity(total - nq));
    for (s, q) in ds.series().iter().zip(is_query) {
        if q {
            queries.push(s.clone());
        } else {
            candidates.push(s.clone());
        }
    }
    Ok((queries, candidates))
}

/// Convenience: path with `.ts` extension gets the `.ts` parser.
pub fn load_auto(path: impl Into<PathBuf>) -> Result<RawDataset> {
    let path = path.into();
    load(&path, format_for(&path))
}
