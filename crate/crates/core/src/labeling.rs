//! ε-proximity cluster labeling.
//!
//! Two points belong to the same cluster when they are linked by a chain of
//! points whose consecutive distances are at most `eps2`, i.e. clusters are
//! the connected components of the ε-graph.
//!
//! The partitioned variant hashes the points into LSH buckets, labels each
//! bucket independently, then links a cluster of bucket `j` with a cluster of
//! bucket `j + 1` when they share at least `k3` point pairs within `eps2`.
//! Connected components of that cluster graph give the final labels.

use std::collections::HashMap;
use std::io::Write;

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::ascent::AscentResult;
use crate::clustering::Clustering;
use crate::data::{squared_distance, Dataset};
use crate::error::{Error, Result};
use crate::lsh::BucketIndex;
use crate::scalar::Scalar;
use crate::union_find::UnionFind;

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct EpsParams {
    /// Linkage radius. Estimated from `eps_knn` when absent.
    pub eps2: Option<f64>,
    /// Neighbour count used by the radius estimate.
    pub eps_knn: usize,
    /// Cross-bucket point pairs needed to join two clusters.
    pub k3: usize,
    pub m1: usize,
    pub seed: u64,
}

impl Default for EpsParams {
    fn default() -> Self {
        Self {
            eps2: None,
            eps_knn: 10,
            k3: 1,
            m1: 1,
            seed: 0,
        }
    }
}

impl EpsParams {
    pub fn validate(&self) -> Result<()> {
        if let Some(e) = self.eps2 {
            if !(e > 0.0) || !e.is_finite() {
                return Err(Error::InvalidParameter("eps2 must be positive".into()));
            }
        }
        if self.eps_knn == 0 {
            return Err(Error::InvalidParameter("eps_knn must be at least 1".into()));
        }
        if self.k3 == 0 {
            return Err(Error::InvalidParameter("k3 must be at least 1".into()));
        }
        if self.m1 == 0 {
            return Err(Error::InvalidParameter("m1 must be at least 1".into()));
        }
        Ok(())
    }
}

/// Mean, over all points, of the mean distance to their `eps_knn` nearest
/// other points, with neighbours found through an LSH index.
pub fn estimate_epsilon<T: Scalar>(
    ds: &Dataset<T>,
    eps_knn: usize,
    m1: usize,
    p: usize,
    seed: u64,
) -> Result<f64> {
    let index = BucketIndex::with_seed(ds, m1, seed)?;
    estimate_epsilon_with_index(&index, eps_knn, p)
}

pub fn estimate_epsilon_with_index<T: Scalar>(
    index: &BucketIndex<'_, T>,
    eps_knn: usize,
    p: usize,
) -> Result<f64> {
    let ds = index.data();
    let n = ds.len();
    if eps_knn == 0 {
        return Err(Error::InvalidParameter("eps_knn must be at least 1".into()));
    }
    if eps_knn >= n {
        return Err(Error::KTooLarge { k: eps_knn, n });
    }
    let per_point: Vec<f64> = (0..n)
        .into_par_iter()
        .map(|i| {
            let x = ds.point(i);
            let center = index.bucket_of(i);
            let r = index.reservoir(center, p, eps_knn + 1);
            let nn = index.knn_in(&r, x, eps_knn + 1);
            let mut others: Vec<f64> = nn
                .neighbors
                .iter()
                .filter(|nb| nb.id != i)
                .map(|nb| nb.dist().as_f64())
                .collect();
            others.truncate(eps_knn);
            others.iter().sum::<f64>() / others.len().max(1) as f64
        })
        .collect();
    Ok(per_point.iter().sum::<f64>() / n as f64)
}

/// Frontier expansion over the points `ids`; returns a local label per
/// position of `ids`, numbered by discovery order.
fn expand_components<T: Scalar>(ds: &Dataset<T>, ids: &[usize], eps2: T) -> Vec<usize> {
    let mut labels = vec![usize::MAX; ids.len()];
    let mut remaining: Vec<usize> = (0..ids.len()).collect();
    let mut frontier = Vec::new();
    let mut cluster = 0;
    while !remaining.is_empty() {
        let seed = remaining.remove(0);
        labels[seed] = cluster;
        frontier.push(seed);
        while let Some(pc) = frontier.pop() {
            let center = ds.point(ids[pc]);
            remaining.retain(|&q| {
                if squared_distance(center, ds.point(ids[q])).sqrt() <= eps2 {
                    labels[q] = cluster;
                    frontier.push(q);
                    false
                } else {
                    true
                }
            });
        }
        cluster += 1;
    }
    labels
}

pub fn local_eps_proximity<T: Scalar>(ds: &Dataset<T>, eps2: f64) -> Result<Clustering> {
    if !(eps2 >= 0.0) {
        return Err(Error::InvalidParameter("eps2 must be non-negative".into()));
    }
    let ids: Vec<usize> = (0..ds.len()).collect();
    Ok(Clustering::from_raw(&expand_components(ds, &ids, T::of(eps2))))
}

/// Bucket-local clusters (vertices) and the cross-bucket links between them.
#[derive(Clone, Debug, PartialEq)]
pub struct ClusterGraph {
    offsets: Vec<usize>,
    edges: Vec<(usize, usize)>,
}

impl ClusterGraph {
    fn new(clusters_per_bucket: &[usize]) -> Self {
        let mut offsets = Vec::with_capacity(clusters_per_bucket.len() + 1);
        offsets.push(0);
        for &c in clusters_per_bucket {
            offsets.push(offsets.last().copied().unwrap_or(0) + c);
        }
        Self {
            offsets,
            edges: Vec::new(),
        }
    }

    pub fn n_vertices(&self) -> usize {
        self.offsets.last().copied().unwrap_or(0)
    }

    pub fn vertex(&self, bucket: usize, local: usize) -> usize {
        self.offsets[bucket] + local
    }

    /// `(bucket, local_cluster)` of every vertex.
    pub fn vertices(&self) -> impl Iterator<Item = (usize, usize)> + '_ {
        self.offsets
            .windows(2)
            .enumerate()
            .flat_map(|(b, w)| (0..w[1] - w[0]).map(move |l| (b, l)))
    }

    pub fn edges(&self) -> &[(usize, usize)] {
        &self.edges
    }

    /// Component id per vertex.
    pub fn components(&self) -> Vec<usize> {
        let mut uf = UnionFind::new(self.n_vertices());
        for &(a, b) in &self.edges {
            uf.union(a, b);
        }
        uf.labels()
    }
}

/// Points of one bucket with their bucket-local labels.
#[derive(Clone, Debug)]
pub struct BucketClusters {
    pub ids: Vec<usize>,
    pub labels: Vec<usize>,
}

impl BucketClusters {
    fn n_clusters(&self) -> usize {
        self.labels.iter().map(|&l| l + 1).max().unwrap_or(0)
    }
}

/// Counts, for every cluster pair across two adjacent buckets, the point
/// pairs within `eps2`; returns the pairs reaching `k3`. With `prune`, both
/// buckets must be sorted by projection and the right one must lie entirely
/// at or above the left one.
fn linked_pairs<T: Scalar>(
    ds: &Dataset<T>,
    left: &BucketClusters,
    right: &BucketClusters,
    eps2: T,
    k3: usize,
    prune: Option<(&[T], T)>,
) -> Vec<(usize, usize)> {
    let mut counts: HashMap<(usize, usize), usize> = HashMap::new();
    let mut linked = Vec::new();
    let slack = T::epsilon() * T::of(1024.0);
    for (ai, &a) in left.ids.iter().enumerate() {
        let xa = ds.point(a);
        for (bi, &b) in right.ids.iter().enumerate() {
            if let Some((proj, znorm)) = prune {
                let gap = proj[b] - proj[a];
                let bound = znorm * eps2;
                if gap > bound + slack * (T::one() + proj[a].abs() + bound) {
                    break;
                }
            }
            if squared_distance(xa, ds.point(b)).sqrt() <= eps2 {
                let key = (left.labels[ai], right.labels[bi]);
                let c = counts.entry(key).or_default();
                *c += 1;
                if *c == k3 {
                    linked.push(key);
                }
            }
        }
    }
    linked.sort_unstable();
    linked
}

fn merge_impl<T: Scalar>(
    ds: &Dataset<T>,
    buckets: &[BucketClusters],
    eps2: T,
    k3: usize,
    prune: Option<(&[T], T)>,
) -> (Clustering, ClusterGraph) {
    let per_bucket: Vec<usize> = buckets.iter().map(BucketClusters::n_clusters).collect();
    let mut graph = ClusterGraph::new(&per_bucket);
    let links: Vec<Vec<(usize, usize)>> = (0..buckets.len().saturating_sub(1))
        .into_par_iter()
        .map(|j| linked_pairs(ds, &buckets[j], &buckets[j + 1], eps2, k3, prune))
        .collect();
    for (j, pairs) in links.into_iter().enumerate() {
        for (a, b) in pairs {
            let e = (graph.vertex(j, a), graph.vertex(j + 1, b));
            graph.edges.push(e);
        }
    }
    let component = graph.components();
    let mut raw = vec![usize::MAX; ds.len()];
    for (j, bucket) in buckets.iter().enumerate() {
        for (&id, &l) in bucket.ids.iter().zip(&bucket.labels) {
            raw[id] = component[graph.vertex(j, l)];
        }
    }
    (Clustering::from_raw(&raw), graph)
}

/// Joins bucket-local clusterings across adjacent buckets. `buckets` must be
/// in bucket order and cover every point of `ds` exactly once.
pub fn merge_bucket_clusters<T: Scalar>(
    ds: &Dataset<T>,
    buckets: &[BucketClusters],
    eps2: f64,
    k3: usize,
) -> Result<Clustering> {
    if k3 == 0 {
        return Err(Error::InvalidParameter("k3 must be at least 1".into()));
    }
    let mut seen = vec![false; ds.len()];
    for b in buckets {
        if b.ids.len() != b.labels.len() {
            return Err(Error::LengthMismatch {
                left: b.ids.len(),
                right: b.labels.len(),
            });
        }
        for &id in &b.ids {
            if id >= ds.len() || std::mem::replace(&mut seen[id], true) {
                return Err(Error::InvalidParameter(format!(
                    "point {id} is missing from the dataset or labeled twice"
                )));
            }
        }
    }
    if let Some(missing) = seen.iter().position(|s| !s) {
        return Err(Error::InvalidParameter(format!("point {missing} has no bucket label")));
    }
    Ok(merge_impl(ds, buckets, T::of(eps2), k3, None).0)
}

/// Everything the partitioned labeler computed, for reports and debugging.
#[derive(Clone, Debug)]
pub struct EpsOutcome {
    pub clustering: Clustering,
    pub eps2: f64,
    pub graph: ClusterGraph,
    pub buckets: Vec<BucketClusters>,
    pub bucket_sizes: Vec<usize>,
}

impl EpsOutcome {
    /// Writes `bucket,local_cluster,global_label` rows.
    pub fn write_graph<W: Write>(&self, mut w: W) -> Result<()> {
        writeln!(w, "bucket,local_cluster,global_label")?;
        let mut global: HashMap<(usize, usize), usize> = HashMap::new();
        for (j, b) in self.buckets.iter().enumerate() {
            for (&id, &l) in b.ids.iter().zip(&b.labels) {
                global
                    .entry((j, l))
                    .or_insert_with(|| self.clustering.labels()[id]);
            }
        }
        for (b, l) in self.graph.vertices() {
            writeln!(w, "{b},{l},{}", global[&(b, l)])?;
        }
        Ok(())
    }
}

pub fn eps_proximity_partitioned<T: Scalar>(
    ds: &Dataset<T>,
    params: &EpsParams,
    p: usize,
) -> Result<Clustering> {
    Ok(eps_proximity_partitioned_detailed(ds, params, p)?.clustering)
}

pub fn eps_proximity_partitioned_detailed<T: Scalar>(
    ds: &Dataset<T>,
    params: &EpsParams,
    p: usize,
) -> Result<EpsOutcome> {
    params.validate()?;
    let index = BucketIndex::with_seed(ds, params.m1, params.seed)?;
    let eps2 = match params.eps2 {
        Some(e) => e,
        None => estimate_epsilon_with_index(&index, params.eps_knn, p)?,
    };
    let eps_t = T::of(eps2);
    let buckets: Vec<BucketClusters> = (0..index.m1())
        .into_par_iter()
        .map(|j| {
            let ids = index.bucket(j).to_vec();
            let labels = expand_components(ds, &ids, eps_t);
            BucketClusters { ids, labels }
        })
        .collect();
    let znorm = squared_distance(index.hasher().z(), &vec![T::zero(); ds.dim()]).sqrt();
    let (clustering, graph) = merge_impl(
        ds,
        &buckets,
        eps_t,
        params.k3,
        Some((index.projections(), znorm)),
    );
    Ok(EpsOutcome {
        clustering,
        eps2,
        graph,
        bucket_sizes: index.bucket_sizes(),
        buckets,
    })
}

/// Candidates whose prototypes lie within `tol` of each other (transitively)
/// share a label.
pub fn prototype_labeling<T: Scalar>(result: &AscentResult<T>, tol: f64) -> Result<Clustering> {
    local_eps_proximity(&result.prototypes, tol)
}
