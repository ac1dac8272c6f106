//! Nearest-neighbour mean shift clustering.
//!
//! The toolkit has two stages. A density gradient ascent moves every point
//! to the mean of its `k1` nearest neighbours until it settles on a local
//! mode ([`ascent`]); the approximate variant restricts the neighbour search
//! to a scalar random-projection LSH bucket and its neighbours ([`lsh`]).
//! A labeling stage then groups the converged points, either by
//! ε-proximity ([`labeling`]) or with one of the classical [`baselines`].
//!
//! All geometric code is generic over [`Scalar`] (`f32` or `f64`); the
//! aliases at the crate root fix the usual `f64` instantiation.

pub mod ascent;
pub mod baselines;
pub mod bench;
pub mod clustering;
pub mod color;
pub mod data;
pub mod error;
pub mod fixtures;
pub mod image;
pub mod io;
pub mod knn;
pub mod labeling;
pub mod lsh;
pub mod metrics;
pub mod pipeline;
pub mod pnm;
pub mod scalar;
pub mod synth;
pub mod union_find;

pub use ascent::{mean_shift_step, nnga_exact, nnga_plus, AscentParams};
pub use clustering::{Clustering, NOISE};
pub use data::{euclidean_distance, min_max_normalize};
pub use error::{Error, ErrorKind, Result};
pub use knn::exact_knn;
pub use labeling::{
    eps_proximity_partitioned, estimate_epsilon, local_eps_proximity, merge_bucket_clusters,
    prototype_labeling, EpsParams,
};
pub use scalar::Scalar;

pub type Dataset = data::Dataset<f64>;
pub type DatasetF32 = data::Dataset<f32>;
pub type NormStats = data::NormStats<f64>;
pub type ProjectionHasher = lsh::ProjectionHasher<f64>;
pub type BucketIndex<'a> = lsh::BucketIndex<'a, f64>;
pub type AscentResult = ascent::AscentResult<f64>;
pub type NeighborList = knn::NeighborList<f64>;
