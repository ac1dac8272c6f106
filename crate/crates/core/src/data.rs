//! Dataset container, min-max normalization and the Euclidean metric.
//!
//! Points are stored row-major in a single buffer. A point's id is its row
//! index, so ids are always `0..n` and unique.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::scalar::Scalar;

/// `n` points of dimension `d`, with optional integer ground truth.
#[derive(Clone, Debug, PartialEq)]
pub struct Dataset<T = f64> {
    coords: Vec<T>,
    dim: usize,
    truth: Option<Vec<i64>>,
}

impl<T: Scalar> Dataset<T> {
    /// Builds a dataset from a flat row-major buffer.
    pub fn new(dim: usize, coords: Vec<T>) -> Result<Self> {
        if dim == 0 {
            return Err(Error::InvalidParameter("dimension must be at least 1".into()));
        }
        if coords.len() % dim != 0 {
            return Err(Error::DimensionMismatch {
                expected: dim,
                found: coords.len() % dim,
            });
        }
        if let Some(pos) = coords.iter().position(|c| !c.is_finite()) {
            return Err(Error::NonFinite {
                point: pos / dim,
                dim: pos % dim,
            });
        }
        Ok(Self {
            coords,
            dim,
            truth: None,
        })
    }

    pub fn from_rows<R: AsRef<[T]>>(rows: &[R]) -> Result<Self> {
        let first = rows.first().ok_or(Error::EmptyInput)?;
        let dim = first.as_ref().len();
        let mut coords = Vec::with_capacity(rows.len() * dim);
        for row in rows {
            let row = row.as_ref();
            if row.len() != dim {
                return Err(Error::DimensionMismatch {
                    expected: dim,
                    found: row.len(),
                });
            }
            coords.extend_from_slice(row);
        }
        Self::new(dim, coords)
    }

    pub fn with_truth(mut self, truth: Vec<i64>) -> Result<Self> {
        if truth.len() != self.len() {
            return Err(Error::LengthMismatch {
                left: self.len(),
                right: truth.len(),
            });
        }
        self.truth = Some(truth);
        Ok(self)
    }

    pub fn len(&self) -> usize {
        self.coords.len() / self.dim
    }

    pub fn is_empty(&self) -> bool {
        self.coords.is_empty()
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    #[inline]
    pub fn point(&self, id: usize) -> &[T] {
        &self.coords[id * self.dim..(id + 1) * self.dim]
    }

    pub fn points(&self) -> impl ExactSizeIterator<Item = &[T]> + '_ {
        self.coords.chunks_exact(self.dim)
    }

    pub fn coords(&self) -> &[T] {
        &self.coords
    }

    pub fn truth(&self) -> Option<&[i64]> {
        self.truth.as_deref()
    }

    pub fn into_coords(self) -> Vec<T> {
        self.coords
    }

    /// Subset of points, in the order given by `ids`. Truth is carried along.
    pub fn select(&self, ids: &[usize]) -> Self {
        let mut coords = Vec::with_capacity(ids.len() * self.dim);
        for &i in ids {
            coords.extend_from_slice(self.point(i));
        }
        Self {
            coords,
            dim: self.dim,
            truth: self
                .truth
                .as_ref()
                .map(|t| ids.iter().map(|&i| t[i]).collect()),
        }
    }

    /// Per-dimension bounding box `(min, max)`.
    pub fn bounds(&self) -> Result<(Vec<T>, Vec<T>)> {
        if self.is_empty() {
            return Err(Error::EmptyInput);
        }
        let mut lo = self.point(0).to_vec();
        let mut hi = lo.clone();
        for p in self.points() {
            for ((l, h), &c) in lo.iter_mut().zip(hi.iter_mut()).zip(p) {
                if c < *l {
                    *l = c;
                }
                if c > *h {
                    *h = c;
                }
            }
        }
        Ok((lo, hi))
    }

    pub fn cast<U: Scalar>(&self) -> Dataset<U> {
        Dataset {
            coords: self.coords.iter().map(|c| U::of(c.as_f64())).collect(),
            dim: self.dim,
            truth: self.truth.clone(),
        }
    }
}

/// Per-dimension extrema of the sample used for normalization.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct NormStats<T = f64> {
    pub min: Vec<T>,
    pub max: Vec<T>,
}

impl<T: Scalar> NormStats<T> {
    pub fn of(ds: &Dataset<T>) -> Result<Self> {
        let (min, max) = ds.bounds()?;
        Ok(Self { min, max })
    }

    /// Maps one coordinate vector into the unit box defined by these stats.
    /// Degenerate dimensions (max = min) map to zero.
    pub fn apply_point(&self, x: &[T], out: &mut [T]) {
        for (i, (o, &c)) in out.iter_mut().zip(x).enumerate() {
            let range = self.max[i] - self.min[i];
            *o = if range > T::zero() {
                (c - self.min[i]) / range
            } else {
                T::zero()
            };
        }
    }

    /// Normalizes another dataset (e.g. candidates) with the sample's stats.
    pub fn apply(&self, ds: &Dataset<T>) -> Result<Dataset<T>> {
        if ds.dim() != self.min.len() {
            return Err(Error::DimensionMismatch {
                expected: self.min.len(),
                found: ds.dim(),
            });
        }
        let mut coords = vec![T::zero(); ds.coords.len()];
        for (src, dst) in ds
            .coords
            .chunks_exact(ds.dim)
            .zip(coords.chunks_exact_mut(ds.dim))
        {
            self.apply_point(src, dst);
        }
        Ok(Dataset {
            coords,
            dim: ds.dim,
            truth: ds.truth.clone(),
        })
    }
}

/// Rescales every dimension to `[0, 1]` using the dataset's own extrema.
pub fn min_max_normalize<T: Scalar>(ds: &Dataset<T>) -> Result<(Dataset<T>, NormStats<T>)> {
    let stats = NormStats::of(ds)?;
    let out = stats.apply(ds)?;
    Ok((out, stats))
}

#[inline]
pub fn squared_distance<T: Scalar>(a: &[T], b: &[T]) -> T {
    debug_assert_eq!(a.len(), b.len());
    a.iter().zip(b).fold(T::zero(), |acc, (&x, &y)| {
        let d = x - y;
        acc + d * d
    })
}

pub fn euclidean_distance<T: Scalar>(a: &[T], b: &[T]) -> Result<T> {
    if a.len() != b.len() {
        return Err(Error::DimensionMismatch {
            expected: a.len(),
            found: b.len(),
        });
    }
    Ok(squared_distance(a, b).sqrt())
}
