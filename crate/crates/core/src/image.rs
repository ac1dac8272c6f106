//! Mean-shift image segmentation in the joint spatial-range domain.
//!
//! Every pixel becomes a 5-D point `(x, y, L*, u*, v*)`, min-max normalized
//! jointly. The points are moved uphill with the LSH gradient ascent, the
//! converged prototypes are grouped with partitioned ε-proximity, and each
//! pixel is repainted with the mean colour of its cluster.

use rayon::prelude::*;

use crate::ascent::{nnga_plus_with_index, AscentParams};
use crate::clustering::Clustering;
use crate::color::rgb_to_luv;
use crate::data::{min_max_normalize, Dataset};
use crate::error::{Error, Result};
use crate::labeling::{eps_proximity_partitioned_detailed, estimate_epsilon, EpsParams};
use crate::lsh::BucketIndex;

/// Row-major 8-bit RGB raster.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Image {
    width: usize,
    height: usize,
    pixels: Vec<[u8; 3]>,
}

impl Image {
    pub fn new(width: usize, height: usize, pixels: Vec<[u8; 3]>) -> Result<Self> {
        if pixels.len() != width * height {
            return Err(Error::LengthMismatch {
                left: width * height,
                right: pixels.len(),
            });
        }
        Ok(Self {
            width,
            height,
            pixels,
        })
    }

    pub fn from_fn(width: usize, height: usize, f: impl Fn(usize, usize) -> [u8; 3]) -> Self {
        let pixels = (0..height)
            .flat_map(|y| (0..width).map(move |x| (x, y)))
            .map(|(x, y)| f(x, y))
            .collect();
        Self {
            width,
            height,
            pixels,
        }
    }

    pub fn width(&self) -> usize {
        self.width
    }

    pub fn height(&self) -> usize {
        self.height
    }

    pub fn pixels(&self) -> &[[u8; 3]] {
        &self.pixels
    }

    pub fn pixel(&self, x: usize, y: usize) -> [u8; 3] {
        self.pixels[y * self.width + x]
    }

    pub fn is_empty(&self) -> bool {
        self.pixels.is_empty()
    }

    pub fn distinct_colors(&self) -> usize {
        let mut c = self.pixels.clone();
        c.sort_unstable();
        c.dedup();
        c.len()
    }
}

/// Raw `(x, y, L*, u*, v*)` per pixel, row-major.
pub fn raw_features(img: &Image) -> Result<Dataset> {
    if img.is_empty() {
        return Err(Error::EmptyInput);
    }
    let w = img.width;
    let coords: Vec<f64> = img
        .pixels
        .par_iter()
        .enumerate()
        .flat_map_iter(|(i, &[r, g, b])| {
            let [l, u, v] = rgb_to_luv(r, g, b);
            [(i % w) as f64, (i / w) as f64, l, u, v]
        })
        .collect();
    Dataset::new(5, coords)
}

/// Normalized 5-D features; point id is the row-major pixel index.
pub fn image_to_features(img: &Image) -> Result<Dataset> {
    Ok(min_max_normalize(&raw_features(img)?)?.0)
}

/// Repaints each pixel with the (rounded) mean RGB of its cluster.
pub fn render_clusters(img: &Image, clustering: &Clustering) -> Result<Image> {
    if clustering.len() != img.pixels.len() {
        return Err(Error::LengthMismatch {
            left: img.pixels.len(),
            right: clustering.len(),
        });
    }
    let k = clustering.n_clusters();
    let mut sums = vec![[0u64; 3]; k];
    let mut counts = vec![0u64; k];
    for (px, &l) in img.pixels.iter().zip(clustering.labels()) {
        for c in 0..3 {
            sums[l][c] += px[c] as u64;
        }
        counts[l] += 1;
    }
    let palette: Vec<[u8; 3]> = sums
        .iter()
        .zip(&counts)
        .map(|(s, &n)| s.map(|v| ((v as f64) / (n as f64)).round() as u8))
        .collect();
    let pixels = clustering.labels().iter().map(|&l| palette[l]).collect();
    Image::new(img.width, img.height, pixels)
}

/// 255 where a 4-neighbour carries a different label, 0 elsewhere.
pub fn boundary_map(width: usize, height: usize, clustering: &Clustering) -> Vec<u8> {
    let l = clustering.labels();
    let mut out = vec![0u8; width * height];
    for y in 0..height {
        for x in 0..width {
            let i = y * width + x;
            let differs = (x > 0 && l[i - 1] != l[i])
                || (x + 1 < width && l[i + 1] != l[i])
                || (y > 0 && l[i - width] != l[i])
                || (y + 1 < height && l[i + width] != l[i]);
            if differs {
                out[i] = 255;
            }
        }
    }
    out
}

#[derive(Clone, Debug)]
pub struct Segmentation {
    pub clustering: Clustering,
    pub rendered: Image,
    pub eps2: f64,
    pub ascent_bucket_sizes: Vec<usize>,
    pub label_bucket_sizes: Vec<usize>,
}

/// Full segmentation. Without an explicit `eps2` the linkage radius is
/// estimated on the pixel features; `ascent.p` also sets the neighbour
/// layers of that estimate.
pub fn segment_image(img: &Image, ascent: &AscentParams, labeling: &EpsParams) -> Result<Segmentation> {
    let features = image_to_features(img)?;
    let n = features.len();
    let mut ascent = ascent.clone();
    ascent.k1 = ascent.k1.min(n);
    ascent.k2 = ascent.k2.map(|k| k.min(n));
    let index = BucketIndex::with_seed(&features, ascent.m1, ascent.seed)?;
    let result = nnga_plus_with_index(&index, &features, &ascent)?;
    let ascent_bucket_sizes = index.bucket_sizes();
    let mut labeling = labeling.clone();
    if labeling.eps2.is_none() && n > 1 {
        // Radius from the pixel features, not from the collapsed prototypes.
        let k = labeling.eps_knn.min(n - 1);
        labeling.eps2 = Some(estimate_epsilon(&features, k, labeling.m1, ascent.p, labeling.seed)?);
    }
    let outcome = if n == 1 {
        None
    } else {
        Some(eps_proximity_partitioned_detailed(&result.prototypes, &labeling, ascent.p)?)
    };
    let (clustering, eps2, label_bucket_sizes) = match outcome {
        Some(o) => (o.clustering, o.eps2, o.bucket_sizes),
        None => (Clustering::from_raw(&[0]), 0.0, vec![1]),
    };
    let rendered = render_clusters(img, &clustering)?;
    Ok(Segmentation {
        clustering,
        rendered,
        eps2,
        ascent_bucket_sizes,
        label_bucket_sizes,
    })
}
