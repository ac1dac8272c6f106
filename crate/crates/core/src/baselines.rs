//! Reference labelers: Lloyd's k-means and brute-force DBSCAN.

use rand::seq::index::sample;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::clustering::{Clustering, NOISE};
use crate::data::{squared_distance, Dataset};
use crate::error::{Error, Result};
use crate::scalar::Scalar;

#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum KMeansInit {
    /// k distinct data points drawn uniformly.
    #[default]
    Uniform,
    PlusPlus,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct KMeansParams {
    pub k: usize,
    pub max_iters: usize,
    pub seed: u64,
    pub init: KMeansInit,
}

impl Default for KMeansParams {
    fn default() -> Self {
        Self {
            k: 2,
            max_iters: 100,
            seed: 0,
            init: KMeansInit::Uniform,
        }
    }
}

#[derive(Clone, Debug)]
pub struct KMeansModel<T = f64> {
    pub clustering: Clustering,
    /// Final centres, indexed by the raw assignment (before relabeling).
    pub centers: Vec<Vec<T>>,
    /// Within-cluster sum of squares after each assignment step.
    pub wcss: Vec<f64>,
    pub iterations: usize,
}

fn nearest_center<T: Scalar>(x: &[T], centers: &[Vec<T>]) -> (usize, T) {
    let mut best = (0, T::infinity());
    for (c, center) in centers.iter().enumerate() {
        let d = squared_distance(x, center);
        if d < best.1 {
            best = (c, d);
        }
    }
    best
}

fn init_centers<T: Scalar>(ds: &Dataset<T>, params: &KMeansParams, rng: &mut ChaCha8Rng) -> Vec<Vec<T>> {
    let n = ds.len();
    match params.init {
        KMeansInit::Uniform => sample(rng, n, params.k)
            .into_iter()
            .map(|i| ds.point(i).to_vec())
            .collect(),
        KMeansInit::PlusPlus => {
            let mut centers = vec![ds.point(rng.random_range(0..n)).to_vec()];
            let mut d2: Vec<f64> = ds
                .points()
                .map(|p| squared_distance(p, &centers[0]).as_f64())
                .collect();
            while centers.len() < params.k {
                let total: f64 = d2.iter().sum();
                let pick = if total > 0.0 {
                    let mut t = rng.random::<f64>() * total;
                    let mut chosen = n - 1;
                    for (i, &w) in d2.iter().enumerate() {
                        if t < w {
                            chosen = i;
                            break;
                        }
                        t -= w;
                    }
                    chosen
                } else {
                    rng.random_range(0..n)
                };
                let c = ds.point(pick).to_vec();
                for (w, p) in d2.iter_mut().zip(ds.points()) {
                    *w = w.min(squared_distance(p, &c).as_f64());
                }
                centers.push(c);
            }
            centers
        }
    }
}

pub fn kmeans<T: Scalar>(ds: &Dataset<T>, params: &KMeansParams) -> Result<Clustering> {
    Ok(kmeans_model(ds, params)?.clustering)
}

pub fn kmeans_model<T: Scalar>(ds: &Dataset<T>, params: &KMeansParams) -> Result<KMeansModel<T>> {
    let n = ds.len();
    if params.k == 0 || params.max_iters == 0 {
        return Err(Error::InvalidParameter("k and max_iters must be at least 1".into()));
    }
    if params.k > n {
        return Err(Error::KTooLarge { k: params.k, n });
    }
    let dim = ds.dim();
    let mut rng = ChaCha8Rng::seed_from_u64(params.seed);
    let mut centers = init_centers(ds, params, &mut rng);
    let mut assignment: Vec<usize> = vec![usize::MAX; n];
    let mut wcss = Vec::new();
    let mut iterations = 0;

    while iterations < params.max_iters {
        iterations += 1;
        let step: Vec<(usize, T)> = (0..n)
            .into_par_iter()
            .map(|i| nearest_center(ds.point(i), &centers))
            .collect();
        let changed = step.iter().zip(&assignment).any(|(s, &a)| s.0 != a);
        assignment = step.iter().map(|s| s.0).collect();
        wcss.push(step.iter().map(|s| s.1.as_f64()).sum());
        if !changed {
            break;
        }

        let mut sums = vec![vec![T::zero(); dim]; params.k];
        let mut counts = vec![0usize; params.k];
        for (i, &a) in assignment.iter().enumerate() {
            counts[a] += 1;
            for (s, &c) in sums[a].iter_mut().zip(ds.point(i)) {
                *s = *s + c;
            }
        }
        for c in 0..params.k {
            if counts[c] > 0 {
                let cnt = T::of(counts[c] as f64);
                centers[c] = sums[c].iter().map(|&s| s / cnt).collect();
            }
        }
        // Empty clusters take the point currently farthest from its centre.
        for c in 0..params.k {
            if counts[c] == 0 {
                let far = (0..n)
                    .max_by(|&a, &b| {
                        let da = squared_distance(ds.point(a), &centers[assignment[a]]);
                        let db = squared_distance(ds.point(b), &centers[assignment[b]]);
                        da.partial_cmp(&db)
                            .unwrap_or(std::cmp::Ordering::Equal)
                            .then(b.cmp(&a))
                    })
                    .unwrap_or(0);
                centers[c] = ds.point(far).to_vec();
                counts[c] = 1;
                if let Some(old) = counts.get_mut(assignment[far]) {
                    *old = old.saturating_sub(1);
                }
                assignment[far] = c;
            }
        }
    }
    Ok(KMeansModel {
        clustering: Clustering::from_raw(&assignment),
        centers,
        wcss,
        iterations,
    })
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct DbscanParams {
    pub eps: f64,
    /// Neighbourhood size (self included) that makes a point a core point.
    pub min_pts: usize,
}

impl Default for DbscanParams {
    fn default() -> Self {
        Self { eps: 0.05, min_pts: 8 }
    }
}

/// Density-based clustering by brute force, `O(n²)` distance evaluations.
/// Practical up to roughly 10⁵ points.
pub fn dbscan<T: Scalar>(ds: &Dataset<T>, params: &DbscanParams) -> Result<Clustering> {
    if !(params.eps > 0.0) || params.min_pts == 0 {
        return Err(Error::InvalidParameter(
            "dbscan needs eps > 0 and min_pts >= 1".into(),
        ));
    }
    let n = ds.len();
    let eps = T::of(params.eps);
    let neighbors = |i: usize| -> Vec<usize> {
        let x = ds.point(i);
        (0..n)
            .filter(|&j| squared_distance(x, ds.point(j)).sqrt() <= eps)
            .collect()
    };
    let core: Vec<bool> = (0..n)
        .into_par_iter()
        .map(|i| {
            let x = ds.point(i);
            let mut count = 0;
            for p in ds.points() {
                if squared_distance(x, p).sqrt() <= eps {
                    count += 1;
                    if count >= params.min_pts {
                        return true;
                    }
                }
            }
            false
        })
        .collect();

    let mut labels = vec![NOISE; n];
    let mut cluster = 0;
    let mut stack = Vec::new();
    for start in 0..n {
        if !core[start] || labels[start] != NOISE {
            continue;
        }
        labels[start] = cluster;
        stack.push(start);
        while let Some(i) = stack.pop() {
            for j in neighbors(i) {
                if labels[j] != NOISE {
                    continue;
                }
                labels[j] = cluster;
                if core[j] {
                    stack.push(j);
                }
            }
        }
        cluster += 1;
    }
    Ok(Clustering::from_raw(&labels))
}

#[cfg(test)]
mod tests {
    use super::*;

    fn pts(rows: &[[f64; 2]]) -> Dataset {
        Dataset::from_rows(rows).unwrap()
    }

    #[test]
    fn kmeans_two_pairs() {
        let ds = pts(&[[0.0, 0.0], [0.0, 1.0], [10.0, 0.0], [10.0, 1.0]]);
        // Every seeding that starts with one centre in each pair converges
        // to the pair means.
        let pair = |c: &[f64]| (c[0] > 5.0) as usize;
        let mut split = 0;
        for seed in 0..20 {
            let init = init_centers(&ds, &KMeansParams { k: 2, ..Default::default() }, &mut ChaCha8Rng::seed_from_u64(seed));
            if pair(&init[0]) == pair(&init[1]) {
                continue;
            }
            split += 1;
            let m = kmeans_model(
                &ds,
                &KMeansParams {
                    k: 2,
                    seed,
                    ..Default::default()
                },
            )
            .unwrap();
            assert_eq!(m.clustering.labels(), &[0, 0, 1, 1]);
            assert!((m.wcss.last().unwrap() - 1.0).abs() < 1e-12, "seed {seed}");
        }
        assert!(split > 0);
    }

    #[test]
    fn kmeans_k_equals_n_and_k_one() {
        let ds = pts(&[[0.0, 0.0], [3.0, 1.0], [5.0, 5.0]]);
        let m = kmeans_model(&ds, &KMeansParams { k: 3, ..Default::default() }).unwrap();
        assert_eq!(m.clustering.n_clusters(), 3);
        assert_eq!(*m.wcss.last().unwrap(), 0.0);

        let m = kmeans_model(&ds, &KMeansParams { k: 1, ..Default::default() }).unwrap();
        assert_eq!(m.clustering.n_clusters(), 1);
        let c = &m.centers[0];
        assert!((c[0] - 8.0 / 3.0).abs() < 1e-12 && (c[1] - 2.0).abs() < 1e-12);
        assert!(kmeans(&ds, &KMeansParams { k: 4, ..Default::default() }).is_err());
    }

    #[test]
    fn kmeans_plus_plus_runs() {
        let ds = pts(&[[0.0, 0.0], [0.0, 1.0], [10.0, 0.0], [10.0, 1.0]]);
        let c = kmeans(
            &ds,
            &KMeansParams {
                k: 2,
                init: KMeansInit::PlusPlus,
                ..Default::default()
            },
        )
        .unwrap();
        assert_eq!(c.labels(), &[0, 0, 1, 1]);
    }

    #[test]
    fn dbscan_all_noise() {
        let ds = pts(&[[0.0, 0.0], [1.0, 0.0], [2.0, 0.0]]);
        let c = dbscan(&ds, &DbscanParams { eps: 0.5, min_pts: 2 }).unwrap();
        assert_eq!(c.n_clusters(), 0);
        assert_eq!(c.n_noise(), 3);
    }

    #[test]
    fn dbscan_grid_is_one_cluster() {
        let rows: Vec<[f64; 1]> = (0..=10).map(|i| [i as f64 * 0.1]).collect();
        let ds = Dataset::from_rows(&rows).unwrap();
        let c = dbscan(&ds, &DbscanParams { eps: 0.15, min_pts: 2 }).unwrap();
        assert_eq!(c.n_clusters(), 1);
        assert_eq!(c.n_noise(), 0);
    }

    #[test]
    fn dbscan_two_blobs_and_an_outlier() {
        let mut rows = Vec::new();
        for i in 0..5 {
            rows.push([0.0 + 0.01 * i as f64, 0.0]);
            rows.push([5.0 + 0.01 * i as f64, 5.0]);
        }
        rows.push([2.5, 2.5]);
        let ds = pts(&rows);
        let c = dbscan(&ds, &DbscanParams { eps: 0.1, min_pts: 3 }).unwrap();
        assert_eq!(c.n_clusters(), 2);
        assert_eq!(c.n_noise(), 1);
        assert!(c.is_noise(10));
    }
}
