//! Seeded synthetic point clouds.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, StandardNormal};

use crate::data::Dataset;
use crate::error::{Error, Result};

/// One mixture component.
#[derive(Clone, Debug, PartialEq)]
pub struct Blob {
    pub center: Vec<f64>,
    /// Per-axis standard deviation (Gaussian) or semi-axis (uniform ellipsoid).
    pub spread: Vec<f64>,
    pub size: usize,
}

impl Blob {
    pub fn round(center: Vec<f64>, spread: f64, size: usize) -> Self {
        let dim = center.len();
        Self {
            center,
            spread: vec![spread; dim],
            size,
        }
    }
}

fn check(blobs: &[Blob]) -> Result<usize> {
    let dim = blobs.first().ok_or(Error::EmptyInput)?.center.len();
    for b in blobs {
        if b.center.len() != dim || b.spread.len() != dim {
            return Err(Error::DimensionMismatch {
                expected: dim,
                found: b.center.len().max(b.spread.len()),
            });
        }
    }
    Ok(dim)
}

/// Axis-aligned Gaussian mixture; truth is the blob index.
pub fn gaussian_mixture(blobs: &[Blob], seed: u64) -> Result<Dataset> {
    let dim = check(blobs)?;
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut coords = Vec::new();
    let mut truth = Vec::new();
    for (label, b) in blobs.iter().enumerate() {
        for _ in 0..b.size {
            for d in 0..dim {
                let z: f64 = StandardNormal.sample(&mut rng);
                coords.push(b.center[d] + b.spread[d] * z);
            }
            truth.push(label as i64);
        }
    }
    Dataset::new(dim, coords)?.with_truth(truth)
}

/// Points drawn uniformly inside axis-aligned ellipsoids (rejection sampling).
pub fn uniform_ellipsoids(blobs: &[Blob], seed: u64) -> Result<Dataset> {
    let dim = check(blobs)?;
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut coords = Vec::new();
    let mut truth = Vec::new();
    let mut u = vec![0.0; dim];
    for (label, b) in blobs.iter().enumerate() {
        for _ in 0..b.size {
            loop {
                for v in u.iter_mut() {
                    *v = rng.random_range(-1.0..1.0);
                }
                if u.iter().map(|v| v * v).sum::<f64>() <= 1.0 {
                    break;
                }
            }
            coords.extend((0..dim).map(|d| b.center[d] + b.spread[d] * u[d]));
            truth.push(label as i64);
        }
    }
    Dataset::new(dim, coords)?.with_truth(truth)
}

/// `n` points uniform in the unit cube `[0, 1)^dim`, no truth.
pub fn uniform_cube(n: usize, dim: usize, seed: u64) -> Result<Dataset> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let coords = (0..n * dim).map(|_| rng.random::<f64>()).collect();
    Dataset::new(dim, coords)
}

/// `components` isotropic Gaussians with centres uniform in the unit cube,
/// standard deviation `sigma`, and `n` points split as evenly as possible.
pub fn random_mixture(n: usize, dim: usize, components: usize, sigma: f64, seed: u64) -> Result<Dataset> {
    if components == 0 || dim == 0 {
        return Err(Error::InvalidParameter("need at least one component and dimension".into()));
    }
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let blobs: Vec<Blob> = (0..components)
        .map(|c| {
            let center = (0..dim).map(|_| rng.random::<f64>()).collect();
            Blob::round(center, sigma, n / components + usize::from(c < n % components))
        })
        .collect();
    gaussian_mixture(&blobs, rng.random())
}

/// Concatenates datasets, shifting each part's truth labels past the previous ones.
pub fn concat(parts: &[Dataset]) -> Result<Dataset> {
    let dim = parts.first().ok_or(Error::EmptyInput)?.dim();
    let mut coords = Vec::new();
    let mut truth = Vec::new();
    let mut offset = 0;
    let mut labeled = true;
    for p in parts {
        if p.dim() != dim {
            return Err(Error::DimensionMismatch {
                expected: dim,
                found: p.dim(),
            });
        }
        coords.extend_from_slice(p.coords());
        match p.truth() {
            Some(t) => {
                truth.extend(t.iter().map(|&l| l + offset));
                offset += t.iter().max().map_or(0, |&m| m + 1);
            }
            None => labeled = false,
        }
    }
    let ds = Dataset::new(dim, coords)?;
    if labeled {
        ds.with_truth(truth)
    } else {
        Ok(ds)
    }
}
