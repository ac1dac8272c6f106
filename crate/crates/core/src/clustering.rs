//! The labeling produced by every clustering routine.

use serde::{Deserialize, Serialize};

/// Marker stored in [`Clustering::labels`] for noise points.
pub const NOISE: usize = usize::MAX;

/// One label per point. Cluster ids are contiguous `0..n_clusters` and each
/// is used at least once; noise points (DBSCAN only) carry [`NOISE`].
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct Clustering {
    labels: Vec<usize>,
    n_clusters: usize,
}

impl Clustering {
    /// Relabels arbitrary ids to `0..C` in order of first appearance, which
    /// is the order of each cluster's smallest member id. `NOISE` is kept.
    pub fn from_raw(raw: &[usize]) -> Self {
        let mut map = std::collections::HashMap::new();
        let labels = raw
            .iter()
            .map(|&l| {
                if l == NOISE {
                    NOISE
                } else {
                    let next = map.len();
                    *map.entry(l).or_insert(next)
                }
            })
            .collect();
        Self {
            labels,
            n_clusters: map.len(),
        }
    }

    pub fn from_signed(raw: &[i64]) -> Self {
        let raw: Vec<usize> = raw
            .iter()
            .map(|&l| if l < 0 { NOISE } else { l as usize })
            .collect();
        Self::from_raw(&raw)
    }

    pub fn labels(&self) -> &[usize] {
        &self.labels
    }

    pub fn len(&self) -> usize {
        self.labels.len()
    }

    pub fn is_empty(&self) -> bool {
        self.labels.is_empty()
    }

    pub fn n_clusters(&self) -> usize {
        self.n_clusters
    }

    pub fn label(&self, i: usize) -> Option<usize> {
        let l = self.labels[i];
        (l != NOISE).then_some(l)
    }

    pub fn is_noise(&self, i: usize) -> bool {
        self.labels[i] == NOISE
    }

    pub fn n_noise(&self) -> usize {
        self.labels.iter().filter(|&&l| l == NOISE).count()
    }

    /// Label as written to files: noise is `-1`.
    pub fn signed_label(&self, i: usize) -> i64 {
        match self.labels[i] {
            NOISE => -1,
            l => l as i64,
        }
    }

    /// Labels with every noise point turned into its own singleton cluster,
    /// numbered after the real clusters.
    pub fn noise_as_singletons(&self) -> Vec<usize> {
        let mut next = self.n_clusters;
        self.labels
            .iter()
            .map(|&l| {
                if l == NOISE {
                    next += 1;
                    next - 1
                } else {
                    l
                }
            })
            .collect()
    }

    pub fn cluster_sizes(&self) -> Vec<usize> {
        let mut sizes = vec![0; self.n_clusters];
        for &l in &self.labels {
            if l != NOISE {
                sizes[l] += 1;
            }
        }
        sizes
    }

    /// Same partition of the points, ignoring label names.
    pub fn same_partition(&self, other: &Clustering) -> bool {
        self.len() == other.len() && Clustering::from_raw(&self.labels) == Clustering::from_raw(&other.labels)
    }
}
