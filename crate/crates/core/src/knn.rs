//! Brute-force exact k-nearest neighbours.
//!
//! A linear scan over the whole sample per query. This is the reference
//! the LSH search is checked against, so it stays deliberately naive.

use std::cmp::Ordering;

use crate::data::{squared_distance, Dataset};
use crate::error::{Error, Result};
use crate::scalar::Scalar;

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct Neighbor<T = f64> {
    pub id: usize,
    /// Squared Euclidean distance to the query.
    pub sq_dist: T,
}

impl<T: Scalar> Neighbor<T> {
    pub fn dist(&self) -> T {
        self.sq_dist.sqrt()
    }
}

/// Total order on candidates: distance first, then lower id.
#[inline]
pub(crate) fn by_distance_then_id<T: Scalar>(a: &Neighbor<T>, b: &Neighbor<T>) -> Ordering {
    a.sq_dist
        .partial_cmp(&b.sq_dist)
        .unwrap_or(Ordering::Equal)
        .then(a.id.cmp(&b.id))
}

/// Neighbours of a query ordered by non-decreasing distance.
#[derive(Clone, Debug, PartialEq)]
pub struct NeighborList<T = f64> {
    pub neighbors: Vec<Neighbor<T>>,
}

impl<T: Scalar> NeighborList<T> {
    pub fn ids(&self) -> Vec<usize> {
        self.neighbors.iter().map(|n| n.id).collect()
    }

    pub fn len(&self) -> usize {
        self.neighbors.len()
    }

    pub fn is_empty(&self) -> bool {
        self.neighbors.is_empty()
    }

    /// Distance to the farthest returned neighbour (the k-th NN distance).
    pub fn kth_distance(&self) -> Option<T> {
        self.neighbors.last().map(Neighbor::dist)
    }
}

pub fn exact_knn<T: Scalar>(ds: &Dataset<T>, x: &[T], k: usize) -> Result<NeighborList<T>> {
    let n = ds.len();
    if k > n {
        return Err(Error::KTooLarge { k, n });
    }
    if x.len() != ds.dim() {
        return Err(Error::DimensionMismatch {
            expected: ds.dim(),
            found: x.len(),
        });
    }
    let mut all: Vec<Neighbor<T>> = ds
        .points()
        .enumerate()
        .map(|(id, p)| Neighbor {
            id,
            sq_dist: squared_distance(x, p),
        })
        .collect();
    if k == 0 {
        return Ok(NeighborList { neighbors: vec![] });
    }
    if k < n {
        all.select_nth_unstable_by(k - 1, by_distance_then_id);
        all.truncate(k);
    }
    all.sort_unstable_by(by_distance_then_id);
    Ok(NeighborList { neighbors: all })
}

/// Fraction of `exact` ids also present in `approx`.
pub fn recall<T: Scalar>(approx: &NeighborList<T>, exact: &NeighborList<T>) -> f64 {
    if exact.is_empty() {
        return 1.0;
    }
    let mut a = approx.ids();
    a.sort_unstable();
    let hits = exact
        .neighbors
        .iter()
        .filter(|n| a.binary_search(&n.id).is_ok())
        .count();
    hits as f64 / exact.len() as f64
}
