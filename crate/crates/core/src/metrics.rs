//! External clustering indices: normalized mutual information and the
//! (unadjusted) Rand index. Noise points count as singleton clusters.

use std::collections::HashMap;

use serde::{Deserialize, Serialize};

use crate::clustering::Clustering;
use crate::error::{Error, Result};

/// Co-occurrence counts of two labelings.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct ContingencyTable {
    /// Row-major `rows × cols` counts.
    counts: Vec<usize>,
    rows: usize,
    cols: usize,
    row_sums: Vec<usize>,
    col_sums: Vec<usize>,
    n: usize,
}

fn compress(labels: &[usize]) -> (Vec<usize>, usize) {
    let mut map = HashMap::new();
    let out = labels
        .iter()
        .map(|&l| {
            let next = map.len();
            *map.entry(l).or_insert(next)
        })
        .collect();
    (out, map.len())
}

impl ContingencyTable {
    /// Builds the table from raw labels; label values are arbitrary and
    /// rows/columns follow order of first appearance.
    pub fn from_labels(a: &[usize], b: &[usize]) -> Result<Self> {
        if a.len() != b.len() {
            return Err(Error::LengthMismatch {
                left: a.len(),
                right: b.len(),
            });
        }
        let (a, rows) = compress(a);
        let (b, cols) = compress(b);
        let mut counts = vec![0; rows * cols];
        let mut row_sums = vec![0; rows];
        let mut col_sums = vec![0; cols];
        for (&i, &j) in a.iter().zip(&b) {
            counts[i * cols + j] += 1;
            row_sums[i] += 1;
            col_sums[j] += 1;
        }
        Ok(Self {
            counts,
            rows,
            cols,
            row_sums,
            col_sums,
            n: a.len(),
        })
    }

    pub fn rows(&self) -> usize {
        self.rows
    }

    pub fn cols(&self) -> usize {
        self.cols
    }

    pub fn get(&self, i: usize, j: usize) -> usize {
        self.counts[i * self.cols + j]
    }

    pub fn row_sums(&self) -> &[usize] {
        &self.row_sums
    }

    pub fn col_sums(&self) -> &[usize] {
        &self.col_sums
    }

    pub fn total(&self) -> usize {
        self.n
    }

    fn entropy(marginals: &[usize], n: f64) -> f64 {
        marginals
            .iter()
            .filter(|&&c| c > 0)
            .map(|&c| {
                let p = c as f64 / n;
                -p * p.ln()
            })
            .sum()
    }

    pub fn mutual_information(&self) -> f64 {
        let n = self.n as f64;
        let mut mi = 0.0;
        for i in 0..self.rows {
            for j in 0..self.cols {
                let c = self.get(i, j);
                if c > 0 {
                    let c = c as f64;
                    mi += c / n * (n * c / (self.row_sums[i] as f64 * self.col_sums[j] as f64)).ln();
                }
            }
        }
        mi.max(0.0)
    }

    pub fn nmi(&self) -> f64 {
        let n = self.n as f64;
        let ha = Self::entropy(&self.row_sums, n);
        let hb = Self::entropy(&self.col_sums, n);
        match (ha > 0.0, hb > 0.0) {
            (false, false) => 1.0,
            (true, true) => (self.mutual_information() / (ha * hb).sqrt()).clamp(0.0, 1.0),
            _ => 0.0,
        }
    }

    pub fn rand_index(&self) -> Result<f64> {
        if self.n < 2 {
            return Err(Error::TooFewPoints { need: 2, got: self.n });
        }
        let pairs = |c: usize| (c * c.saturating_sub(1) / 2) as f64;
        let together_both: f64 = self.counts.iter().map(|&c| pairs(c)).sum();
        let together_a: f64 = self.row_sums.iter().map(|&c| pairs(c)).sum();
        let together_b: f64 = self.col_sums.iter().map(|&c| pairs(c)).sum();
        let total = pairs(self.n);
        Ok((total + 2.0 * together_both - together_a - together_b) / total)
    }
}

pub fn contingency(a: &Clustering, b: &Clustering) -> Result<ContingencyTable> {
    ContingencyTable::from_labels(&a.noise_as_singletons(), &b.noise_as_singletons())
}

pub fn nmi(a: &Clustering, b: &Clustering) -> Result<f64> {
    if a.is_empty() {
        return Err(Error::EmptyInput);
    }
    Ok(contingency(a, b)?.nmi())
}

pub fn rand_index(a: &Clustering, b: &Clustering) -> Result<f64> {
    contingency(a, b)?.rand_index()
}

/// Both indices against a reference labeling.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct Scores {
    pub nmi: f64,
    pub rand: f64,
}

pub fn score(found: &Clustering, truth: &Clustering) -> Result<Scores> {
    let t = contingency(found, truth)?;
    Ok(Scores {
        nmi: t.nmi(),
        rand: t.rand_index()?,
    })
}
