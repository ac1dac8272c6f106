//! Randomized invariants checked against brute-force oracles.

use std::collections::HashMap;

use approx::assert_abs_diff_eq;
use proptest::prelude::*;

use lshms::baselines::{dbscan, kmeans_model, DbscanParams, KMeansParams};
use lshms::color::{luv_to_rgb, rgb_to_luv};
use lshms::data::squared_distance;
use lshms::knn::recall;
use lshms::labeling::{eps_proximity_partitioned, local_eps_proximity, BucketClusters};
use lshms::metrics::{nmi, rand_index};
use lshms::synth::{gaussian_mixture, Blob};
use lshms::*;

fn dataset(max_n: usize, max_d: usize) -> impl Strategy<Value = Dataset> {
    (1..=max_d, 1..=max_n).prop_flat_map(|(d, n)| {
        prop::collection::vec(-10.0f64..10.0, n * d).prop_map(move |c| Dataset::new(d, c).unwrap())
    })
}

fn brute_knn(ds: &Dataset, x: &[f64], k: usize) -> Vec<(f64, usize)> {
    let mut all: Vec<(f64, usize)> = ds
        .points()
        .enumerate()
        .map(|(i, p)| (squared_distance(x, p), i))
        .collect();
    all.sort_by(|a, b| a.0.total_cmp(&b.0).then(a.1.cmp(&b.1)));
    all.truncate(k);
    all
}

/// Connected components of the graph with an edge for every pair at
/// distance <= eps, found by depth-first search over all pairs.
fn brute_components(ds: &Dataset, eps: f64) -> Vec<usize> {
    let n = ds.len();
    let mut label = vec![usize::MAX; n];
    let mut next = 0;
    for s in 0..n {
        if label[s] != usize::MAX {
            continue;
        }
        label[s] = next;
        let mut stack = vec![s];
        while let Some(i) = stack.pop() {
            for j in 0..n {
                if label[j] == usize::MAX && squared_distance(ds.point(i), ds.point(j)).sqrt() <= eps {
                    label[j] = next;
                    stack.push(j);
                }
            }
        }
        next += 1;
    }
    label
}

fn same_partition(a: &[usize], b: &[usize]) -> bool {
    let mut ab = HashMap::new();
    let mut ba = HashMap::new();
    a.iter()
        .zip(b)
        .all(|(x, y)| *ab.entry(x).or_insert(y) == y && *ba.entry(y).or_insert(x) == x)
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]

    #[test]
    fn normalization_is_idempotent(ds in dataset(40, 4)) {
        let (once, _) = min_max_normalize(&ds).unwrap();
        let (twice, _) = min_max_normalize(&once).unwrap();
        for (a, b) in once.coords().iter().zip(twice.coords()) {
            prop_assert!((a - b).abs() <= 1e-12);
            prop_assert!((0.0..=1.0).contains(a));
        }
    }

    #[test]
    fn triangle_inequality(a in prop::collection::vec(-5.0f64..5.0, 3),
                           b in prop::collection::vec(-5.0f64..5.0, 3),
                           c in prop::collection::vec(-5.0f64..5.0, 3)) {
        let ab = euclidean_distance(&a, &b).unwrap();
        let bc = euclidean_distance(&b, &c).unwrap();
        let ac = euclidean_distance(&a, &c).unwrap();
        prop_assert!(ac <= ab + bc + 1e-12);
        prop_assert_eq!(ab, euclidean_distance(&b, &a).unwrap());
    }

    #[test]
    fn normalization_keeps_knn_under_equal_ranges(
        n in 5usize..40, k in 1usize..5, scale in 0.5f64..20.0, shift in -5.0f64..5.0, seed in any::<u64>()
    ) {
        // Every dimension spans exactly [0, 1] before the affine map, so all
        // ranges are equal and normalization is a uniform rescale.
        let raw = lshms::synth::uniform_cube(n, 3, seed).unwrap();
        let (unit, _) = min_max_normalize(&raw).unwrap();
        let moved = Dataset::new(3, unit.coords().iter().map(|v| v * scale + shift).collect()).unwrap();
        let (back, _) = min_max_normalize(&moved).unwrap();
        for q in 0..n {
            let a: Vec<usize> = brute_knn(&moved, moved.point(q), k).iter().map(|p| p.1).collect();
            let b: Vec<usize> = brute_knn(&back, back.point(q), k).iter().map(|p| p.1).collect();
            prop_assert_eq!(a, b);
        }
    }

    #[test]
    fn exact_knn_matches_sorting(ds in dataset(60, 3), k in 1usize..8, q in 0usize..60) {
        let k = k.min(ds.len());
        let x = ds.point(q % ds.len()).to_vec();
        let got = exact_knn(&ds, &x, k).unwrap();
        let want = brute_knn(&ds, &x, k);
        prop_assert_eq!(got.ids(), want.iter().map(|p| p.1).collect::<Vec<_>>());
        let dists: Vec<f64> = got.neighbors.iter().map(|n| n.sq_dist).collect();
        prop_assert!(dists.windows(2).all(|w| w[0] <= w[1]));
        if k > 1 {
            let shorter = exact_knn(&ds, &x, k - 1).unwrap();
            prop_assert!(shorter.kth_distance() <= got.kth_distance());
        }
    }

    #[test]
    fn buckets_partition_the_data(ds in dataset(200, 4), m1 in 1usize..12, seed in any::<u64>()) {
        let idx = BucketIndex::with_seed(&ds, m1, seed).unwrap();
        let mut seen = vec![0u32; ds.len()];
        for j in 0..idx.m1() {
            for &id in idx.bucket(j) {
                seen[id] += 1;
                prop_assert_eq!(idx.bucket_of(id), j);
            }
        }
        prop_assert!(seen.iter().all(|&c| c == 1));
    }

    #[test]
    fn approx_knn_is_contained_and_never_closer(
        ds in dataset(150, 3), m1 in 1usize..10, p in 0usize..3, k in 1usize..10, seed in any::<u64>(), q in prop::collection::vec(-12.0f64..12.0, 3)
    ) {
        let k = k.min(ds.len());
        let x = &q[..ds.dim()];
        let idx = BucketIndex::with_seed(&ds, m1, seed).unwrap();
        let approx = idx.approx_knn(x, k, p).unwrap();
        let res = idx.reservoir(idx.hash_point(x).unwrap(), p, k);
        let pool = idx.reservoir_ids(&res);
        prop_assert!(pool.len() >= k);
        for id in approx.ids() {
            prop_assert!(pool.contains(&id));
        }
        let exact = exact_knn(&ds, x, k).unwrap();
        for (a, e) in approx.neighbors.iter().zip(&exact.neighbors) {
            prop_assert!(a.sq_dist >= e.sq_dist);
        }
    }

    #[test]
    fn single_bucket_collapses_to_exact(ds in dataset(120, 4), k in 1usize..10, seed in any::<u64>(), q in 0usize..120) {
        let k = k.min(ds.len());
        let idx = BucketIndex::with_seed(&ds, 1, seed).unwrap();
        let x = ds.point(q % ds.len());
        let a = idx.approx_knn(x, k, 0).unwrap();
        let e = exact_knn(&ds, x, k).unwrap();
        prop_assert_eq!(a, e);
    }

    #[test]
    fn index_and_queries_are_deterministic(ds in dataset(100, 3), m1 in 1usize..8, seed in any::<u64>()) {
        let a = BucketIndex::with_seed(&ds, m1, seed).unwrap();
        let b = BucketIndex::with_seed(&ds, m1, seed).unwrap();
        prop_assert_eq!(a.projections(), b.projections());
        prop_assert_eq!(a.bucket_sizes(), b.bucket_sizes());
        let k = 3.min(ds.len());
        for q in ds.points() {
            prop_assert_eq!(a.approx_knn(q, k, 1).unwrap(), b.approx_knn(q, k, 1).unwrap());
        }
    }

    #[test]
    fn ascent_stays_in_bounding_box(ds in dataset(80, 3), k1 in 1usize..10, m1 in 1usize..5, p in 0usize..2, seed in any::<u64>()) {
        let params = AscentParams { k1: k1.min(ds.len()), m1, p, seed, j_max: 10, ..Default::default() };
        let (lo, hi) = ds.bounds().unwrap();
        let r = nnga_plus(&ds, &ds, &params).unwrap();
        for x in r.prototypes.points() {
            for d in 0..ds.dim() {
                prop_assert!(x[d] >= lo[d] - 1e-9 && x[d] <= hi[d] + 1e-9);
            }
        }
        prop_assert!(r.iterations.iter().all(|&j| j >= 1 && j <= 10));
    }

    #[test]
    fn infinite_tolerance_stops_after_one_shift(ds in dataset(50, 2)) {
        let params = AscentParams { k1: 3.min(ds.len()), eps1: f64::INFINITY, ..Default::default() };
        let r = nnga_exact(&ds, &ds, &params).unwrap();
        prop_assert!(r.iterations.iter().all(|&j| j == 1));
        prop_assert!(r.converged.iter().all(|&c| c));
    }

    #[test]
    fn local_eps_matches_graph_components(ds in dataset(150, 3), eps in 0.0f64..4.0) {
        let got = local_eps_proximity(&ds, eps).unwrap();
        prop_assert!(same_partition(got.labels(), &brute_components(&ds, eps)));
    }

    #[test]
    fn raising_eps_never_adds_clusters(ds in dataset(100, 2), a in 0.0f64..3.0, b in 0.0f64..3.0) {
        let (lo, hi) = if a < b { (a, b) } else { (b, a) };
        let c_lo = local_eps_proximity(&ds, lo).unwrap().n_clusters();
        let c_hi = local_eps_proximity(&ds, hi).unwrap().n_clusters();
        prop_assert!(c_hi <= c_lo);
    }

    #[test]
    fn partitioned_merge_is_sound(ds in dataset(150, 2), eps in 0.1f64..3.0, m1 in 1usize..8, k3 in 1usize..3, seed in any::<u64>()) {
        let params = EpsParams { eps2: Some(eps), m1, k3, seed, ..Default::default() };
        let merged = eps_proximity_partitioned(&ds, &params, 1).unwrap();
        // Refines the global ε-graph components.
        let global = brute_components(&ds, eps);
        let mut owner = HashMap::new();
        for (i, &l) in merged.labels().iter().enumerate() {
            prop_assert_eq!(*owner.entry(l).or_insert(global[i]), global[i]);
        }
        // Never splits a bucket-local cluster.
        let idx = BucketIndex::with_seed(&ds, m1, seed).unwrap();
        for j in 0..idx.m1() {
            let ids = idx.bucket(j);
            if ids.is_empty() {
                continue;
            }
            let local = local_eps_proximity(&ds.select(ids), eps).unwrap();
            let mut seen = HashMap::new();
            for (pos, &id) in ids.iter().enumerate() {
                let l = local.labels()[pos];
                prop_assert_eq!(*seen.entry(l).or_insert(merged.labels()[id]), merged.labels()[id]);
            }
        }
    }

    #[test]
    fn merge_of_one_bucket_is_identity(ds in dataset(80, 2), eps in 0.1f64..2.0) {
        let local = local_eps_proximity(&ds, eps).unwrap();
        let buckets = [BucketClusters { ids: (0..ds.len()).collect(), labels: local.labels().to_vec() }];
        let merged = merge_bucket_clusters(&ds, &buckets, eps, 1).unwrap();
        prop_assert!(merged.same_partition(&local));
    }

    #[test]
    fn kmeans_wcss_never_increases(ds in dataset(80, 3), k in 1usize..6, seed in any::<u64>()) {
        let k = k.min(ds.len());
        let m = kmeans_model(&ds, &KMeansParams { k, seed, ..Default::default() }).unwrap();
        for w in m.wcss.windows(2) {
            prop_assert!(w[1] <= w[0] + 1e-9 * w[0].abs().max(1.0));
        }
        let again = kmeans_model(&ds, &KMeansParams { k, seed, ..Default::default() }).unwrap();
        prop_assert_eq!(m.clustering, again.clustering);
    }

    #[test]
    fn dbscan_core_membership_ignores_order(ds in dataset(80, 2), eps in 0.5f64..3.0, min_pts in 1usize..6, seed in any::<u64>()) {
        use rand::seq::SliceRandom;
        use rand::SeedableRng;
        let params = DbscanParams { eps, min_pts };
        let a = dbscan(&ds, &params).unwrap();
        let mut perm: Vec<usize> = (0..ds.len()).collect();
        perm.shuffle(&mut rand_chacha::ChaCha8Rng::seed_from_u64(seed));
        let b = dbscan(&ds.select(&perm), &params).unwrap();
        let core: Vec<usize> = (0..ds.len())
            .filter(|&i| ds.points().filter(|q| squared_distance(ds.point(i), q).sqrt() <= eps).count() >= min_pts)
            .collect();
        let pos: HashMap<usize, usize> = perm.iter().enumerate().map(|(p, &i)| (i, p)).collect();
        let la: Vec<usize> = core.iter().map(|&i| a.labels()[i]).collect();
        let lb: Vec<usize> = core.iter().map(|&i| b.labels()[pos[&i]]).collect();
        prop_assert!(same_partition(&la, &lb));
    }

    #[test]
    fn metrics_are_symmetric_and_bounded(
        pair in (2usize..60).prop_flat_map(|n| (prop::collection::vec(0usize..5, n), prop::collection::vec(0usize..5, n)))
    ) {
        let (a, b) = (Clustering::from_raw(&pair.0), Clustering::from_raw(&pair.1));
        let (n1, n2) = (nmi(&a, &b).unwrap(), nmi(&b, &a).unwrap());
        let (r1, r2) = (rand_index(&a, &b).unwrap(), rand_index(&b, &a).unwrap());
        prop_assert!((n1 - n2).abs() < 1e-12 && (r1 - r2).abs() < 1e-12);
        prop_assert!((0.0..=1.0).contains(&n1) && (0.0..=1.0).contains(&r1));
    }
}

#[test]
fn color_round_trip_on_random_colors() {
    use rand::{Rng, SeedableRng};
    let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(11);
    for _ in 0..1000 {
        let c: [u8; 3] = [rng.random(), rng.random(), rng.random()];
        let back = luv_to_rgb(rgb_to_luv(c[0], c[1], c[2]));
        for ch in 0..3 {
            assert!((back[ch] as i32 - c[ch] as i32).abs() <= 1, "{c:?} -> {back:?}");
        }
    }
}

#[test]
fn shrinkage_on_gaussian_blobs() {
    let blobs = [
        Blob::round(vec![0.2, 0.2], 0.05, 150),
        Blob::round(vec![0.8, 0.3], 0.05, 150),
        Blob::round(vec![0.5, 0.8], 0.05, 150),
    ];
    for seed in 0..5 {
        let ds = gaussian_mixture(&blobs, seed).unwrap();
        let params = AscentParams { k1: 20, m1: 3, p: 1, seed, ..Default::default() };
        let r = nnga_plus(&ds, &ds, &params).unwrap();
        let truth = ds.truth().unwrap();
        for blob in 0..3 {
            let ids: Vec<usize> = (0..ds.len()).filter(|&i| truth[i] == blob as i64).collect();
            let spread = |d: &Dataset| {
                let mut s = 0.0;
                for &i in &ids {
                    for &j in &ids {
                        s += squared_distance(d.point(i), d.point(j)).sqrt();
                    }
                }
                s
            };
            assert!(spread(&r.prototypes) <= spread(&ds), "seed {seed} blob {blob}");
        }
    }
}

#[test]
fn ascent_result_is_independent_of_workers() {
    let blobs = [Blob::round(vec![0.0, 0.0], 0.3, 300), Blob::round(vec![2.0, 1.0], 0.3, 300)];
    let ds = gaussian_mixture(&blobs, 3).unwrap();
    let params = AscentParams { k1: 15, m1: 4, p: 1, seed: 5, trace: true, ..Default::default() };
    let run = |w: usize| {
        rayon::ThreadPoolBuilder::new()
            .num_threads(w)
            .build()
            .unwrap()
            .install(|| nnga_plus(&ds, &ds, &params).unwrap())
    };
    let one = run(1);
    for w in [2, 4] {
        let other = run(w);
        assert_eq!(one.prototypes, other.prototypes);
        assert_eq!(one.iterations, other.iterations);
        assert_eq!(one.bucket_trace, other.bucket_trace);
    }
}

#[test]
fn recall_reaches_one_with_enough_layers() {
    let blobs = [Blob::round(vec![0.0, 0.0], 1.0, 400)];
    let ds = gaussian_mixture(&blobs, 1).unwrap();
    let idx = BucketIndex::with_seed(&ds, 4, 9).unwrap();
    let mean = |p: usize| {
        ds.points()
            .map(|x| recall(&idx.approx_knn(x, 10, p).unwrap(), &exact_knn(&ds, x, 10).unwrap()))
            .sum::<f64>()
            / ds.len() as f64
    };
    assert_abs_diff_eq!(mean(3), 1.0);
    assert!(mean(0) <= mean(1) && mean(1) <= mean(2));
}

#[test]
fn f32_instantiation_runs() {
    let ds = lshms::synth::uniform_cube(200, 2, 4).unwrap().cast::<f32>();
    let params = AscentParams { k1: 10, m1: 2, ..Default::default() };
    let r = nnga_plus(&ds, &ds, &params).unwrap();
    assert_eq!(r.prototypes.len(), 200);
    let eps = lshms::labeling::estimate_epsilon(&r.prototypes, 5, 2, 1, 0).unwrap();
    assert!(eps >= 0.0);
}
