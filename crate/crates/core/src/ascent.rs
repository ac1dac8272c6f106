//! Nearest-neighbour mean-shift gradient ascent.
//!
//! Each candidate is repeatedly moved to the mean of its `k1` nearest sample
//! points until a step is shorter than `eps1` or `j_max` steps were taken.
//! [`nnga_exact`] finds neighbours by brute force; [`nnga_plus`] searches only
//! an LSH reservoir around the bucket the prototype currently lives in and
//! lets the prototype migrate to the bucket holding the majority of its `k2`
//! nearest reservoir points after each step.
//!
//! Candidates are independent; both routines fan out over candidates and
//! write into per-candidate slots, so results do not depend on the number of
//! worker threads.

use std::collections::HashMap;

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::data::{squared_distance, Dataset};
use crate::error::{Error, Result};
use crate::knn::{exact_knn, NeighborList};
use crate::lsh::{BucketIndex, ProjectionHasher};
use crate::scalar::Scalar;

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct AscentParams {
    /// Neighbours averaged per step.
    pub k1: usize,
    /// Convergence tolerance on the step length.
    pub eps1: f64,
    pub j_max: usize,
    /// LSH bucket count.
    pub m1: usize,
    /// Neighbour bucket layers on each side.
    pub p: usize,
    /// Neighbours voting on bucket migration; `None` means `k1`.
    pub k2: Option<usize>,
    pub seed: u64,
    /// Record the buckets each prototype passes through.
    pub trace: bool,
}

impl Default for AscentParams {
    fn default() -> Self {
        Self {
            k1: 20,
            eps1: 1e-5,
            j_max: 15,
            m1: 1,
            p: 1,
            k2: None,
            seed: 0,
            trace: false,
        }
    }
}

impl AscentParams {
    pub fn k2(&self) -> usize {
        self.k2.unwrap_or(self.k1)
    }

    pub fn validate(&self) -> Result<()> {
        if self.k1 == 0 {
            return Err(Error::InvalidParameter("k1 must be at least 1".into()));
        }
        if !(self.eps1 > 0.0) {
            return Err(Error::InvalidParameter("eps1 must be positive".into()));
        }
        if self.j_max == 0 {
            return Err(Error::InvalidParameter("j_max must be at least 1".into()));
        }
        if self.m1 == 0 {
            return Err(Error::InvalidParameter("m1 must be at least 1".into()));
        }
        if self.k2() == 0 {
            return Err(Error::InvalidParameter("k2 must be at least 1".into()));
        }
        Ok(())
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct AscentResult<T = f64> {
    /// Final prototype of each candidate, in candidate order.
    pub prototypes: Dataset<T>,
    pub iterations: Vec<usize>,
    pub converged: Vec<bool>,
    /// Buckets visited by each prototype (starting bucket first). Only filled
    /// by [`nnga_plus`] when tracing is requested.
    pub bucket_trace: Option<Vec<Vec<usize>>>,
}

impl<T: Scalar> AscentResult<T> {
    pub fn len(&self) -> usize {
        self.iterations.len()
    }

    pub fn is_empty(&self) -> bool {
        self.iterations.is_empty()
    }
}

/// Coordinate-wise mean of a set of points.
pub fn mean_shift_step<T: Scalar, P: AsRef<[T]>>(neighbors: &[P]) -> Result<Vec<T>> {
    let first = neighbors.first().ok_or(Error::EmptyInput)?.as_ref();
    let dim = first.len();
    let mut acc = vec![T::zero(); dim];
    for p in neighbors {
        let p = p.as_ref();
        if p.len() != dim {
            return Err(Error::DimensionMismatch {
                expected: dim,
                found: p.len(),
            });
        }
        for (a, &c) in acc.iter_mut().zip(p) {
            *a = *a + c;
        }
    }
    let k = T::of(neighbors.len() as f64);
    acc.iter_mut().for_each(|a| *a = *a / k);
    Ok(acc)
}

/// Mean of the sample points named by `nn`, in neighbour order.
fn mean_of<T: Scalar>(ds: &Dataset<T>, nn: &NeighborList<T>, out: &mut [T]) {
    out.iter_mut().for_each(|o| *o = T::zero());
    for n in &nn.neighbors {
        for (o, &c) in out.iter_mut().zip(ds.point(n.id)) {
            *o = *o + c;
        }
    }
    let k = T::of(nn.len() as f64);
    out.iter_mut().for_each(|o| *o = *o / k);
}

fn check_inputs<T: Scalar>(ds: &Dataset<T>, candidates: &Dataset<T>, params: &AscentParams) -> Result<()> {
    params.validate()?;
    if ds.is_empty() {
        return Err(Error::EmptyInput);
    }
    if candidates.dim() != ds.dim() {
        return Err(Error::DimensionMismatch {
            expected: ds.dim(),
            found: candidates.dim(),
        });
    }
    let n = ds.len();
    if params.k1 > n {
        return Err(Error::KTooLarge { k: params.k1, n });
    }
    if params.k2() > n {
        return Err(Error::KTooLarge { k: params.k2(), n });
    }
    Ok(())
}

struct Track<T> {
    position: Vec<T>,
    iterations: usize,
    converged: bool,
    trace: Vec<usize>,
}

fn assemble<T: Scalar>(
    candidates: &Dataset<T>,
    tracks: Vec<Track<T>>,
    with_trace: bool,
) -> Result<AscentResult<T>> {
    let dim = candidates.dim();
    let mut coords = Vec::with_capacity(tracks.len() * dim);
    let mut iterations = Vec::with_capacity(tracks.len());
    let mut converged = Vec::with_capacity(tracks.len());
    let mut traces = Vec::new();
    for t in tracks {
        coords.extend_from_slice(&t.position);
        iterations.push(t.iterations);
        converged.push(t.converged);
        if with_trace {
            traces.push(t.trace);
        }
    }
    let mut prototypes = Dataset::new(dim, coords)?;
    if let Some(truth) = candidates.truth() {
        prototypes = prototypes.with_truth(truth.to_vec())?;
    }
    Ok(AscentResult {
        prototypes,
        iterations,
        converged,
        bucket_trace: with_trace.then_some(traces),
    })
}

/// Exact nearest-neighbour gradient ascent.
pub fn nnga_exact<T: Scalar>(
    ds: &Dataset<T>,
    candidates: &Dataset<T>,
    params: &AscentParams,
) -> Result<AscentResult<T>> {
    check_inputs(ds, candidates, params)?;
    let eps_sq = T::of(params.eps1) * T::of(params.eps1);
    let tracks: Vec<Track<T>> = (0..candidates.len())
        .into_par_iter()
        .map(|c| {
            let mut x = candidates.point(c).to_vec();
            let mut next = vec![T::zero(); x.len()];
            let mut j = 0;
            let converged = loop {
                let nn = exact_knn(ds, &x, params.k1).expect("k1 checked against n");
                mean_of(ds, &nn, &mut next);
                let step = squared_distance(&x, &next);
                std::mem::swap(&mut x, &mut next);
                j += 1;
                if step <= eps_sq {
                    break true;
                }
                if j >= params.j_max {
                    break false;
                }
            };
            Track {
                position: x,
                iterations: j,
                converged,
                trace: Vec::new(),
            }
        })
        .collect();
    assemble(candidates, tracks, false)
}

/// Bucket with the most votes; a tie keeps `current` if it is among the
/// winners, otherwise the lowest winning bucket id.
pub(crate) fn majority_bucket(votes: impl IntoIterator<Item = usize>, current: usize) -> usize {
    let mut counts: HashMap<usize, usize> = HashMap::new();
    for b in votes {
        *counts.entry(b).or_default() += 1;
    }
    let Some(&best) = counts.values().max() else {
        return current;
    };
    if counts.get(&current) == Some(&best) {
        return current;
    }
    counts
        .into_iter()
        .filter(|&(_, c)| c == best)
        .map(|(b, _)| b)
        .min()
        .unwrap_or(current)
}

/// LSH-approximated gradient ascent over an index built from `ds`.
pub fn nnga_plus<T: Scalar>(
    ds: &Dataset<T>,
    candidates: &Dataset<T>,
    params: &AscentParams,
) -> Result<AscentResult<T>> {
    check_inputs(ds, candidates, params)?;
    let hasher = ProjectionHasher::new(ds.dim(), params.seed)?;
    let index = BucketIndex::build(ds, hasher, params.m1)?;
    nnga_plus_with_index(&index, candidates, params)
}

/// As [`nnga_plus`], reusing an existing index. `params.m1` and `params.seed`
/// are ignored in favour of the index's own.
pub fn nnga_plus_with_index<T: Scalar>(
    index: &BucketIndex<'_, T>,
    candidates: &Dataset<T>,
    params: &AscentParams,
) -> Result<AscentResult<T>> {
    let ds = index.data();
    check_inputs(ds, candidates, params)?;
    let eps_sq = T::of(params.eps1) * T::of(params.eps1);
    let k2 = params.k2();
    let tracks: Vec<Track<T>> = (0..candidates.len())
        .into_par_iter()
        .map(|c| {
            let mut x = candidates.point(c).to_vec();
            let mut next = vec![T::zero(); x.len()];
            let mut bucket = index.bucket_for_projection(index.hasher().project_unchecked(&x));
            let mut trace = vec![bucket];
            let mut j = 0;
            let converged = loop {
                let reservoir = index.reservoir(bucket, params.p, params.k1);
                let nn = index.knn_in(&reservoir, &x, params.k1);
                mean_of(ds, &nn, &mut next);
                let step = squared_distance(&x, &next);
                j += 1;

                let voters = index.knn_in(&reservoir, &next, k2);
                let moved = majority_bucket(voters.neighbors.iter().map(|n| index.bucket_of(n.id)), bucket);
                if moved != bucket {
                    bucket = moved;
                    trace.push(bucket);
                }
                std::mem::swap(&mut x, &mut next);
                if step <= eps_sq {
                    break true;
                }
                if j >= params.j_max {
                    break false;
                }
            };
            Track {
                position: x,
                iterations: j,
                converged,
                trace,
            }
        })
        .collect();
    assemble(candidates, tracks, params.trace)
}
