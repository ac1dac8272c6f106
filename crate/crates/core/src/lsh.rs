//! Scalar random-projection LSH.
//!
//! Every point is projected onto a single Gaussian direction, `L(x) = zᵀx + u`
//! (bucket width parameter fixed to 1), and the observed projection range
//! `[L(1), L(n)]` is cut into `m1` equal intervals. Buckets are therefore
//! slabs between parallel hyperplanes, and each bucket has at most two
//! neighbours: the slabs immediately left and right of it.
//!
//! Bucket ids are 0-based. Interval `j` is `[lo + j·w, lo + (j+1)·w)` with the
//! last interval closed on the right; queries that project outside the sample
//! range are clamped to the edge buckets.
//!
//! Internally the points are kept sorted by `(bucket, projection, id)`. A
//! reservoir is always a run of consecutive buckets and hence a contiguous
//! slice of that order, which lets k-NN queries walk outward from the query's
//! projection and stop as soon as the projection gap alone rules out every
//! remaining point (`|L(x) - L(y)| <= |z| |x - y|`). The pruning is exact:
//! results equal a full scan of the reservoir.

use std::cmp::Ordering;
use std::collections::BinaryHeap;
use std::io::Write;

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, StandardNormal, Uniform};
use rayon::prelude::*;

use crate::data::{squared_distance, Dataset};
use crate::error::{Error, Result};
use crate::knn::{by_distance_then_id, Neighbor, NeighborList};
use crate::scalar::Scalar;

/// The random projection `x ↦ zᵀx + u` with `z ~ N(0, I_d)`, `u ~ U[0, 1)`.
#[derive(Clone, Debug, PartialEq)]
pub struct ProjectionHasher<T = f64> {
    z: Vec<T>,
    u: T,
    seed: Option<u64>,
}

impl<T: Scalar> ProjectionHasher<T> {
    pub fn new(dim: usize, seed: u64) -> Result<Self> {
        if dim == 0 {
            return Err(Error::InvalidParameter(
                "hasher dimension must be at least 1".into(),
            ));
        }
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let z = (0..dim)
            .map(|_| {
                let v: f64 = StandardNormal.sample(&mut rng);
                T::of(v)
            })
            .collect();
        let unit = Uniform::new(0.0f64, 1.0).expect("valid range");
        let u = T::of(unit.sample(&mut rng));
        Ok(Self {
            z,
            u,
            seed: Some(seed),
        })
    }

    /// A hasher with a fixed direction and offset, mostly for tests.
    pub fn from_parts(z: Vec<T>, u: T) -> Result<Self> {
        if z.is_empty() {
            return Err(Error::InvalidParameter(
                "hasher dimension must be at least 1".into(),
            ));
        }
        Ok(Self { z, u, seed: None })
    }

    pub fn dim(&self) -> usize {
        self.z.len()
    }

    pub fn z(&self) -> &[T] {
        &self.z
    }

    pub fn u(&self) -> T {
        self.u
    }

    pub fn seed(&self) -> Option<u64> {
        self.seed
    }

    pub fn project(&self, x: &[T]) -> Result<T> {
        if x.len() != self.z.len() {
            return Err(Error::DimensionMismatch {
                expected: self.z.len(),
                found: x.len(),
            });
        }
        Ok(self.project_unchecked(x))
    }

    #[inline]
    pub(crate) fn project_unchecked(&self, x: &[T]) -> T {
        self.z
            .iter()
            .zip(x)
            .fold(T::zero(), |acc, (&a, &b)| acc + a * b)
            + self.u
    }

    fn norm(&self) -> T {
        squared_distance(&self.z, &vec![T::zero(); self.z.len()]).sqrt()
    }
}

/// Candidate neighbour pool: the buckets `first..=last`.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct Reservoir {
    pub center: usize,
    /// Neighbour layers requested on each side of the centre.
    pub layers: usize,
    pub first: usize,
    pub last: usize,
    len: usize,
}

impl Reservoir {
    pub fn len(&self) -> usize {
        self.len
    }

    pub fn is_empty(&self) -> bool {
        self.len == 0
    }

    pub fn buckets(&self) -> std::ops::RangeInclusive<usize> {
        self.first..=self.last
    }
}

/// Hash table over a fixed sample. Borrows the sample it indexes.
#[derive(Clone, Debug)]
pub struct BucketIndex<'a, T = f64> {
    data: &'a Dataset<T>,
    hasher: ProjectionHasher<T>,
    m1: usize,
    lo: T,
    hi: T,
    width: T,
    znorm: T,
    projections: Vec<T>,
    bucket_of: Vec<usize>,
    order: Vec<usize>,
    sorted_proj: Vec<T>,
    sorted_coords: Vec<T>,
    offsets: Vec<usize>,
}

impl<'a, T: Scalar> BucketIndex<'a, T> {
    pub fn build(data: &'a Dataset<T>, hasher: ProjectionHasher<T>, m1: usize) -> Result<Self> {
        if data.is_empty() {
            return Err(Error::EmptyInput);
        }
        if m1 == 0 {
            return Err(Error::InvalidParameter("m1 must be at least 1".into()));
        }
        if hasher.dim() != data.dim() {
            return Err(Error::DimensionMismatch {
                expected: data.dim(),
                found: hasher.dim(),
            });
        }
        let n = data.len();
        let projections: Vec<T> = (0..n)
            .into_par_iter()
            .map(|i| hasher.project_unchecked(data.point(i)))
            .collect();
        let (lo, hi) = projections
            .iter()
            .fold((projections[0], projections[0]), |(l, h), &v| {
                (l.min(v), h.max(v))
            });
        let width = (hi - lo) / T::of(m1 as f64);
        let znorm = hasher.norm();
        let mut index = Self {
            data,
            hasher,
            m1,
            lo,
            hi,
            width,
            znorm,
            projections,
            bucket_of: Vec::new(),
            order: Vec::new(),
            sorted_proj: Vec::new(),
            sorted_coords: Vec::new(),
            offsets: Vec::new(),
        };
        index.bucket_of = index
            .projections
            .par_iter()
            .map(|&l| index.bucket_for_projection(l))
            .collect();

        let mut order: Vec<usize> = (0..n).collect();
        {
            let b = &index.bucket_of;
            let pr = &index.projections;
            order.par_sort_unstable_by(|&i, &j| {
                b[i].cmp(&b[j])
                    .then(pr[i].partial_cmp(&pr[j]).unwrap_or(Ordering::Equal))
                    .then(i.cmp(&j))
            });
        }
        let mut offsets = vec![0usize; m1 + 1];
        for &i in &order {
            offsets[index.bucket_of[i] + 1] += 1;
        }
        for j in 0..m1 {
            offsets[j + 1] += offsets[j];
        }
        index.sorted_proj = order.iter().map(|&i| index.projections[i]).collect();
        let mut sorted_coords = Vec::with_capacity(data.coords().len());
        for &i in &order {
            sorted_coords.extend_from_slice(data.point(i));
        }
        index.sorted_coords = sorted_coords;
        index.order = order;
        index.offsets = offsets;
        Ok(index)
    }

    /// Builds the index with a freshly sampled hasher.
    pub fn with_seed(data: &'a Dataset<T>, m1: usize, seed: u64) -> Result<Self> {
        let hasher = ProjectionHasher::new(data.dim(), seed)?;
        Self::build(data, hasher, m1)
    }

    pub fn data(&self) -> &'a Dataset<T> {
        self.data
    }

    pub fn hasher(&self) -> &ProjectionHasher<T> {
        &self.hasher
    }

    pub fn m1(&self) -> usize {
        self.m1
    }

    pub fn lo(&self) -> T {
        self.lo
    }

    pub fn hi(&self) -> T {
        self.hi
    }

    pub fn width(&self) -> T {
        self.width
    }

    pub fn projection(&self, id: usize) -> T {
        self.projections[id]
    }

    pub fn projections(&self) -> &[T] {
        &self.projections
    }

    pub fn bucket_of(&self, id: usize) -> usize {
        self.bucket_of[id]
    }

    /// Ids of bucket `j`, ordered by projection.
    pub fn bucket(&self, j: usize) -> &[usize] {
        &self.order[self.offsets[j]..self.offsets[j + 1]]
    }

    pub fn bucket_sizes(&self) -> Vec<usize> {
        self.offsets.windows(2).map(|w| w[1] - w[0]).collect()
    }

    pub fn bucket_for_projection(&self, l: T) -> usize {
        if !(self.width > T::zero()) || l <= self.lo {
            return 0;
        }
        let j = ((l - self.lo) / self.width).floor();
        let j = j.to_usize().unwrap_or(usize::MAX);
        j.min(self.m1 - 1)
    }

    pub fn hash_point(&self, x: &[T]) -> Result<usize> {
        Ok(self.bucket_for_projection(self.hasher.project(x)?))
    }

    /// Buckets `center ± p`, then enlarged one bucket at a time (right first,
    /// then left, alternating) until it holds at least `min(k, n)` points.
    pub fn reservoir(&self, center: usize, p: usize, k: usize) -> Reservoir {
        let center = center.min(self.m1 - 1);
        let mut first = center.saturating_sub(p);
        let mut last = center.saturating_add(p).min(self.m1 - 1);
        let target = k.min(self.data.len());
        let mut len = self.offsets[last + 1] - self.offsets[first];
        let mut right_turn = true;
        while len < target {
            let can_right = last + 1 < self.m1;
            let can_left = first > 0;
            if can_right && (right_turn || !can_left) {
                last += 1;
            } else if can_left {
                first -= 1;
            } else {
                break;
            }
            right_turn = !right_turn;
            len = self.offsets[last + 1] - self.offsets[first];
        }
        Reservoir {
            center,
            layers: p,
            first,
            last,
            len,
        }
    }

    /// Point ids of a reservoir.
    pub fn reservoir_ids(&self, r: &Reservoir) -> &[usize] {
        &self.order[self.offsets[r.first]..self.offsets[r.last + 1]]
    }

    /// Exact k nearest neighbours of `x` among the points of `r`. Returns
    /// fewer than `k` only when the reservoir itself is smaller.
    pub fn knn_in(&self, r: &Reservoir, x: &[T], k: usize) -> NeighborList<T> {
        let start = self.offsets[r.first];
        let end = self.offsets[r.last + 1];
        let lx = self.hasher.project_unchecked(x);
        NeighborList {
            neighbors: self.search_slice(start, end, x, lx, k),
        }
    }

    /// Approximate k-NN: exact k-NN restricted to the reservoir around the
    /// query's own bucket with `p` neighbour layers.
    pub fn approx_knn(&self, x: &[T], k: usize, p: usize) -> Result<NeighborList<T>> {
        let n = self.data.len();
        if k > n {
            return Err(Error::KTooLarge { k, n });
        }
        let center = self.hash_point(x)?;
        let r = self.reservoir(center, p, k);
        Ok(self.knn_in(&r, x, k))
    }

    fn search_slice(&self, start: usize, end: usize, x: &[T], lx: T, k: usize) -> Vec<Neighbor<T>> {
        let k = k.min(end - start);
        if k == 0 {
            return Vec::new();
        }
        let dim = self.data.dim();
        let slack = T::epsilon() * T::of(1024.0);
        let q = start + self.sorted_proj[start..end].partition_point(|&v| v < lx);
        let (mut left, mut right) = (q, q);
        let mut heap: BinaryHeap<Ranked<T>> = BinaryHeap::with_capacity(k + 1);
        let inf = T::infinity();
        loop {
            let lgap = if left > start {
                lx - self.sorted_proj[left - 1]
            } else {
                inf
            };
            let rgap = if right < end {
                self.sorted_proj[right] - lx
            } else {
                inf
            };
            let go_left = lgap < rgap;
            let gap = if go_left { lgap } else { rgap };
            if gap == inf {
                break;
            }
            if heap.len() == k {
                let kth = heap.peek().map(|r| r.0.sq_dist.sqrt()).unwrap_or(inf);
                let bound = self.znorm * kth;
                if gap > bound + slack * (T::one() + lx.abs() + bound) {
                    break;
                }
            }
            let pos = if go_left {
                left -= 1;
                left
            } else {
                right += 1;
                right - 1
            };
            let cand = Neighbor {
                id: self.order[pos],
                sq_dist: squared_distance(x, &self.sorted_coords[pos * dim..(pos + 1) * dim]),
            };
            if heap.len() < k {
                heap.push(Ranked(cand));
            } else if let Some(top) = heap.peek() {
                if by_distance_then_id(&cand, &top.0) == Ordering::Less {
                    heap.pop();
                    heap.push(Ranked(cand));
                }
            }
        }
        let mut out: Vec<Neighbor<T>> = heap.into_iter().map(|r| r.0).collect();
        out.sort_unstable_by(by_distance_then_id);
        out
    }

    /// Writes `point_id,projection,bucket` rows.
    pub fn write_assignments<W: Write>(&self, mut w: W) -> Result<()> {
        writeln!(w, "point_id,projection,bucket")?;
        for (i, (&l, &b)) in self.projections.iter().zip(&self.bucket_of).enumerate() {
            writeln!(w, "{i},{l},{b}")?;
        }
        Ok(())
    }
}

struct Ranked<T>(Neighbor<T>);

impl<T: Scalar> PartialEq for Ranked<T> {
    fn eq(&self, other: &Self) -> bool {
        self.cmp(other) == Ordering::Equal
    }
}

impl<T: Scalar> Eq for Ranked<T> {}

impl<T: Scalar> PartialOrd for Ranked<T> {
    fn partial_cmp(&self, other: &Self) -> Option<Ordering> {
        Some(self.cmp(other))
    }
}

impl<T: Scalar> Ord for Ranked<T> {
    fn cmp(&self, other: &Self) -> Ordering {
        by_distance_then_id(&self.0, &other.0)
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::knn::exact_knn;

    fn line(xs: &[f64]) -> Dataset {
        Dataset::new(1, xs.to_vec()).unwrap()
    }

    fn identity_1d() -> ProjectionHasher {
        ProjectionHasher::from_parts(vec![1.0], 0.0).unwrap()
    }

    #[test]
    fn hasher_is_deterministic_per_seed() {
        let a = ProjectionHasher::<f64>::new(3, 42).unwrap();
        let b = ProjectionHasher::<f64>::new(3, 42).unwrap();
        assert_eq!(a, b);
        let c = ProjectionHasher::<f64>::new(2, 1).unwrap();
        let d = ProjectionHasher::<f64>::new(2, 2).unwrap();
        assert_ne!(c.z(), d.z());
        assert!(ProjectionHasher::<f64>::new(0, 1).is_err());
    }

    #[test]
    fn hasher_offset_in_unit_interval() {
        for seed in 0..200 {
            let u = ProjectionHasher::<f64>::new(2, seed).unwrap().u();
            assert!((0.0..1.0).contains(&u));
        }
    }

    #[test]
    fn projection_examples() {
        let h = ProjectionHasher::from_parts(vec![1.0, 0.0], 0.0).unwrap();
        assert_eq!(h.project(&[5.0, 7.0]).unwrap(), 5.0);
        let h = ProjectionHasher::from_parts(vec![0.0, 0.0], 0.3).unwrap();
        assert_eq!(h.project(&[9.0, -4.0]).unwrap(), 0.3);
        let h = ProjectionHasher::from_parts(vec![1.0, 2.0], 0.5).unwrap();
        assert_eq!(h.project(&[3.0, 4.0]).unwrap(), 11.5);
        assert!(h.project(&[1.0]).is_err());
    }

    #[test]
    fn interval_assignment() {
        let ds = line(&[0.0, 1.0, 2.0, 3.0]);
        let idx = BucketIndex::build(&ds, identity_1d(), 2).unwrap();
        assert_eq!(idx.width(), 1.5);
        let mut b0 = idx.bucket(0).to_vec();
        b0.sort();
        assert_eq!(b0, vec![0, 1]);
        assert_eq!(idx.bucket(1), &[2, 3]);
        assert_eq!(idx.hash_point(&[2.0]).unwrap(), 1);
        assert_eq!(idx.hash_point(&[0.0]).unwrap(), 0);
        assert_eq!(idx.hash_point(&[-10.5]).unwrap(), 0);
        assert_eq!(idx.hash_point(&[99.0]).unwrap(), 1);
    }

    #[test]
    fn single_bucket_and_degenerate_range() {
        let ds = line(&[3.0, 1.0, 2.0]);
        let idx = BucketIndex::build(&ds, identity_1d(), 1).unwrap();
        assert_eq!(idx.bucket_sizes(), vec![3]);

        let flat = line(&[5.0, 5.0, 5.0]);
        let idx = BucketIndex::build(&flat, identity_1d(), 3).unwrap();
        assert_eq!(idx.width(), 0.0);
        assert_eq!(idx.bucket_sizes(), vec![3, 0, 0]);
    }

    #[test]
    fn reservoir_enlarges_right_then_left() {
        // three buckets of two points each
        let ds = line(&[0.0, 0.1, 1.1, 1.2, 2.9, 3.0]);
        let idx = BucketIndex::build(&ds, identity_1d(), 3).unwrap();
        assert_eq!(idx.bucket_sizes(), vec![2, 2, 2]);
        let r = idx.reservoir(1, 0, 5);
        assert_eq!((r.first, r.last, r.len()), (0, 2, 6));
        let r = idx.reservoir(1, 0, 3);
        assert_eq!((r.first, r.last), (1, 2));
        let r = idx.reservoir(2, 0, 3);
        assert_eq!((r.first, r.last), (1, 2));
    }

    #[test]
    fn edge_bucket_has_one_neighbour() {
        let ds = line(&[0.0, 1.0, 2.0, 3.0, 4.0, 5.0, 6.0, 7.0, 8.0, 9.0]);
        let idx = BucketIndex::build(&ds, identity_1d(), 5).unwrap();
        let r = idx.reservoir(0, 1, 1);
        assert_eq!((r.first, r.last), (0, 1));
    }

    #[test]
    fn approx_knn_within_bucket() {
        let ds = line(&[0.0, 1.0, 2.0, 10.0, 11.0, 12.0]);
        let idx = BucketIndex::build(&ds, identity_1d(), 2).unwrap();
        assert_eq!(idx.bucket(0), &[0, 1, 2]);
        let nn = idx.approx_knn(&[2.0], 3, 0).unwrap();
        assert_eq!(nn.ids(), vec![2, 1, 0]);
        assert!(idx.approx_knn(&[2.0], 7, 0).is_err());
    }

    #[test]
    fn self_is_nearest() {
        let ds = line(&[0.0, 1.0, 2.0, 10.0, 11.0, 12.0]);
        let idx = BucketIndex::build(&ds, identity_1d(), 2).unwrap();
        for i in 0..6 {
            assert_eq!(idx.approx_knn(ds.point(i), 1, 0).unwrap().ids(), vec![i]);
        }
    }

    #[test]
    fn one_bucket_equals_exact() {
        let ds = Dataset::new(
            2,
            vec![0.0, 0.0, 1.0, 0.5, 0.2, 0.9, 0.7, 0.7, 0.3, 0.3, 0.3, 0.3],
        )
        .unwrap();
        let idx = BucketIndex::with_seed(&ds, 1, 9).unwrap();
        for k in 1..=ds.len() {
            let a = idx.approx_knn(&[0.25, 0.4], k, 0).unwrap();
            let e = exact_knn(&ds, &[0.25, 0.4], k).unwrap();
            assert_eq!(a, e);
        }
    }

    #[test]
    fn assignment_dump() {
        let ds = line(&[0.0, 3.0]);
        let idx = BucketIndex::build(&ds, identity_1d(), 2).unwrap();
        let mut buf = Vec::new();
        idx.write_assignments(&mut buf).unwrap();
        assert_eq!(
            String::from_utf8(buf).unwrap(),
            "point_id,projection,bucket\n0,0,0\n1,3,1\n"
        );
    }
}
