//! Scaling sweeps over dataset size, bucket count, neighbour layers and
//! worker count on seeded Gaussian mixtures.

use std::io::Write;
use std::time::Instant;

use serde::{Deserialize, Serialize};

use crate::ascent::{nnga_plus_with_index, AscentParams};
use crate::data::min_max_normalize;
use crate::error::{Error, Result};
use crate::labeling::{eps_proximity_partitioned, EpsParams};
use crate::lsh::BucketIndex;
use crate::pipeline::with_workers;
use crate::synth::random_mixture;

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct BenchConfig {
    pub ns: Vec<usize>,
    /// Explicit bucket counts. When empty, `n / points_per_bucket` is used.
    pub m1s: Vec<usize>,
    pub points_per_bucket: usize,
    pub ps: Vec<usize>,
    /// Worker counts; empty means hardware parallelism only.
    pub workers: Vec<usize>,
    pub dim: usize,
    pub components: usize,
    pub sigma: f64,
    pub k1: usize,
    pub j_max: usize,
    pub eps1: f64,
    /// Also time ε-proximity labeling of the prototypes.
    pub label: bool,
    pub eps_knn: usize,
    pub repeats: usize,
    pub seed: u64,
}

impl Default for BenchConfig {
    fn default() -> Self {
        Self {
            ns: vec![10_000, 20_000, 40_000],
            m1s: Vec::new(),
            points_per_bucket: 1000,
            ps: vec![1],
            workers: Vec::new(),
            dim: 2,
            components: 15,
            sigma: 0.05,
            k1: 20,
            j_max: 15,
            eps1: 1e-5,
            label: false,
            eps_knn: 10,
            repeats: 3,
            seed: 0,
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct BenchRow {
    pub n: usize,
    pub m1: usize,
    pub p: usize,
    pub workers: usize,
    pub phase: String,
    /// Median over repeats.
    pub ms: f64,
}

fn median(mut xs: Vec<f64>) -> f64 {
    xs.sort_by(f64::total_cmp);
    let n = xs.len();
    if n % 2 == 1 {
        xs[n / 2]
    } else {
        (xs[n / 2 - 1] + xs[n / 2]) / 2.0
    }
}

fn ms_since(t: Instant) -> f64 {
    t.elapsed().as_secs_f64() * 1e3
}

/// Runs the sweep, calling `on_row` as each configuration finishes.
pub fn run_bench(cfg: &BenchConfig, mut on_row: impl FnMut(&BenchRow)) -> Result<Vec<BenchRow>> {
    if cfg.repeats == 0 || cfg.ns.is_empty() || cfg.ps.is_empty() {
        return Err(Error::InvalidParameter("need at least one n, one p and one repeat".into()));
    }
    if cfg.m1s.is_empty() && cfg.points_per_bucket == 0 {
        return Err(Error::InvalidParameter("points_per_bucket must be positive".into()));
    }
    let workers: Vec<Option<usize>> = if cfg.workers.is_empty() {
        vec![None]
    } else {
        cfg.workers.iter().map(|&w| Some(w)).collect()
    };
    let mut rows = Vec::new();
    for &n in &cfg.ns {
        let raw = random_mixture(n, cfg.dim, cfg.components, cfg.sigma, cfg.seed)?;
        let (data, _) = min_max_normalize(&raw)?;
        let m1s = if cfg.m1s.is_empty() {
            vec![(n / cfg.points_per_bucket).max(1)]
        } else {
            cfg.m1s.clone()
        };
        for &m1 in &m1s {
            for &p in &cfg.ps {
                for &w in &workers {
                    let params = AscentParams {
                        k1: cfg.k1.min(n),
                        j_max: cfg.j_max,
                        eps1: cfg.eps1,
                        m1,
                        p,
                        seed: cfg.seed,
                        ..Default::default()
                    };
                    let timings = with_workers(w, || -> Result<(usize, Vec<[f64; 3]>)> {
                        let mut t = Vec::new();
                        for _ in 0..cfg.repeats {
                            let start = Instant::now();
                            let index = BucketIndex::with_seed(&data, m1, cfg.seed)?;
                            let index_ms = ms_since(start);
                            let start = Instant::now();
                            let result = nnga_plus_with_index(&index, &data, &params)?;
                            let ascent_ms = ms_since(start);
                            let label_ms = if cfg.label {
                                let start = Instant::now();
                                let eps = EpsParams {
                                    eps_knn: cfg.eps_knn.min(n.saturating_sub(1)).max(1),
                                    m1,
                                    seed: cfg.seed,
                                    ..Default::default()
                                };
                                eps_proximity_partitioned(&result.prototypes, &eps, p)?;
                                ms_since(start)
                            } else {
                                f64::NAN
                            };
                            t.push([index_ms, ascent_ms, label_ms]);
                        }
                        Ok((rayon::current_num_threads(), t))
                    })??;
                    let (used, t) = timings;
                    let phases: &[(&str, usize)] = if cfg.label {
                        &[("index", 0), ("ascent", 1), ("label", 2)]
                    } else {
                        &[("index", 0), ("ascent", 1)]
                    };
                    for &(phase, col) in phases {
                        let row = BenchRow {
                            n,
                            m1,
                            p,
                            workers: used,
                            phase: phase.into(),
                            ms: median(t.iter().map(|r| r[col]).collect()),
                        };
                        on_row(&row);
                        rows.push(row);
                    }
                }
            }
        }
    }
    Ok(rows)
}

pub fn write_rows<W: Write>(w: W, rows: &[BenchRow]) -> Result<()> {
    let mut out = csv::Writer::from_writer(w);
    for r in rows {
        out.serialize(r)?;
    }
    out.flush()?;
    Ok(())
}
