//! End-to-end runs: load, normalize, optional gradient ascent, labeling,
//! scoring, and output files.

use std::fs::File;
use std::io::{BufWriter, Write};
use std::path::PathBuf;
use std::time::Instant;

use serde::{Deserialize, Serialize};

use crate::ascent::{nnga_exact, nnga_plus_with_index, AscentParams, AscentResult};
use crate::baselines::{dbscan, kmeans, DbscanParams, KMeansParams};
use crate::clustering::Clustering;
use crate::data::{Dataset, NormStats};
use crate::error::{Error, Result};
use crate::fixtures;
use crate::io::{load_csv, save_labels, write_prototypes, CsvOptions};
use crate::labeling::{
    eps_proximity_partitioned_detailed, estimate_epsilon, prototype_labeling, EpsOutcome, EpsParams,
};
use crate::lsh::BucketIndex;
use crate::metrics::{score, Scores};

/// Smallest and largest bucket population considered well balanced.
pub const BUCKET_RANGE: (usize, usize) = (500, 2000);

#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Algorithm {
    /// Exact ascent, then candidates grouped by coinciding prototypes.
    Nnga,
    /// LSH ascent, then candidates grouped by coinciding prototypes.
    NngaPlus,
    /// ε-proximity on the normalized data.
    Eps,
    Kmeans,
    Dbscan,
    /// LSH ascent followed by [`PipelineConfig::labeler`] on the prototypes.
    #[default]
    Pipeline,
}

#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Labeler {
    #[default]
    Eps,
    Kmeans,
    Dbscan,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct PipelineConfig {
    /// CSV input. Ignored when `dataset` names a built-in fixture.
    pub input: Option<PathBuf>,
    pub dataset: Option<String>,
    pub has_header: bool,
    pub label_column: Option<usize>,
    /// Points to move uphill; the input itself when absent.
    pub candidates: Option<PathBuf>,
    pub algorithm: Algorithm,
    pub labeler: Labeler,
    pub ascent: AscentParams,
    pub eps: EpsParams,
    pub kmeans: KMeansParams,
    pub dbscan: DbscanParams,
    /// Distance under which two prototypes count as the same mode.
    pub prototype_tol: f64,
    /// Overrides the seed of every randomized component.
    pub seed: u64,
    /// Worker threads; hardware parallelism when absent.
    pub workers: Option<usize>,
    pub labels_out: Option<PathBuf>,
    pub report_out: Option<PathBuf>,
    pub prototypes_out: Option<PathBuf>,
    pub buckets_out: Option<PathBuf>,
    pub graph_out: Option<PathBuf>,
}

impl Default for PipelineConfig {
    fn default() -> Self {
        Self {
            input: None,
            dataset: None,
            has_header: false,
            label_column: None,
            candidates: None,
            algorithm: Algorithm::default(),
            labeler: Labeler::default(),
            ascent: AscentParams::default(),
            eps: EpsParams::default(),
            kmeans: KMeansParams::default(),
            dbscan: DbscanParams::default(),
            prototype_tol: 1e-3,
            seed: 0,
            workers: None,
            labels_out: None,
            report_out: None,
            prototypes_out: None,
            buckets_out: None,
            graph_out: None,
        }
    }
}

impl PipelineConfig {
    /// Copies the global seed into every component.
    pub fn seeded(&self) -> Self {
        let mut c = self.clone();
        c.ascent.seed = self.seed;
        c.eps.seed = self.seed;
        c.kmeans.seed = self.seed;
        c
    }

    pub fn validate(&self) -> Result<()> {
        if self.input.is_none() && self.dataset.is_none() {
            return Err(Error::InvalidParameter("an input file or dataset name is required".into()));
        }
        if self.workers == Some(0) {
            return Err(Error::InvalidParameter("workers must be at least 1".into()));
        }
        if !(self.prototype_tol >= 0.0) {
            return Err(Error::InvalidParameter("prototype_tol must be non-negative".into()));
        }
        let ascends = matches!(self.algorithm, Algorithm::Nnga | Algorithm::NngaPlus | Algorithm::Pipeline);
        if ascends {
            self.ascent.validate()?;
        }
        let labeler = match self.algorithm {
            Algorithm::Eps => Some(Labeler::Eps),
            Algorithm::Kmeans => Some(Labeler::Kmeans),
            Algorithm::Dbscan => Some(Labeler::Dbscan),
            Algorithm::Pipeline => Some(self.labeler),
            _ => None,
        };
        match labeler {
            Some(Labeler::Eps) => self.eps.validate(),
            Some(Labeler::Kmeans) if self.kmeans.k == 0 || self.kmeans.max_iters == 0 => Err(
                Error::InvalidParameter("k and max_iters must be at least 1".into()),
            ),
            Some(Labeler::Dbscan) if !(self.dbscan.eps > 0.0) || self.dbscan.min_pts == 0 => Err(
                Error::InvalidParameter("dbscan needs eps > 0 and min_pts >= 1".into()),
            ),
            _ => Ok(()),
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct PhaseTime {
    pub phase: String,
    pub ms: f64,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct RunReport {
    pub phases: Vec<PhaseTime>,
    pub total_ms: f64,
    pub n: usize,
    pub d: usize,
    pub candidates: usize,
    /// Bucket count of the ascent index, or of the labeling partition.
    pub m1: usize,
    pub bucket_sizes: Vec<usize>,
    pub label_bucket_sizes: Option<Vec<usize>>,
    pub n_clusters: usize,
    pub n_noise: usize,
    pub eps2: Option<f64>,
    pub converged: Option<usize>,
    pub mean_iterations: Option<f64>,
    pub scores: Option<Scores>,
    pub seed: u64,
    pub workers: usize,
    pub warnings: Vec<String>,
    pub config: PipelineConfig,
}

/// Everything a run produces in memory.
#[derive(Clone, Debug)]
pub struct RunOutput {
    pub clustering: Clustering,
    pub report: RunReport,
    pub ascent: Option<AscentResult>,
}

/// Warning text when any bucket population lies outside [`BUCKET_RANGE`].
pub fn bucket_size_advisory(sizes: &[usize]) -> Option<String> {
    let (lo, hi) = BUCKET_RANGE;
    let outside = sizes.iter().filter(|&&s| s < lo || s > hi).count();
    (outside > 0).then(|| {
        let min = sizes.iter().min().copied().unwrap_or(0);
        let max = sizes.iter().max().copied().unwrap_or(0);
        format!(
            "{outside} of {} buckets hold fewer than {lo} or more than {hi} points \
             (sizes range {min}..{max}); consider adjusting m1",
            sizes.len()
        )
    })
}

/// Per-phase stopwatch.
#[derive(Default)]
struct Timer {
    phases: Vec<PhaseTime>,
}

impl Timer {
    fn run<R>(&mut self, phase: &'static str, f: impl FnOnce() -> Result<R>) -> Result<R> {
        let start = Instant::now();
        let out = f().map_err(|e| e.in_phase(phase))?;
        self.phases.push(PhaseTime {
            phase: phase.into(),
            ms: start.elapsed().as_secs_f64() * 1e3,
        });
        Ok(out)
    }
}

pub fn load_input(cfg: &PipelineConfig) -> Result<Dataset> {
    match (&cfg.dataset, &cfg.input) {
        (Some(name), _) => Ok(fixtures::load(name)?.data),
        (None, Some(path)) => load_csv(
            path,
            &CsvOptions {
                has_header: cfg.has_header,
                label_column: cfg.label_column,
            },
        ),
        (None, None) => Err(Error::InvalidParameter("no input given".into())),
    }
}

/// Runs `f` on a pool of `workers` threads (hardware parallelism if `None`).
pub fn with_workers<R: Send>(workers: Option<usize>, f: impl FnOnce() -> R + Send) -> Result<R> {
    let pool = rayon::ThreadPoolBuilder::new()
        .num_threads(workers.unwrap_or(0))
        .build()
        .map_err(|e| Error::Invariant(format!("thread pool: {e}")))?;
    Ok(pool.install(f))
}

pub fn run_pipeline(cfg: &PipelineConfig) -> Result<RunOutput> {
    cfg.validate()?;
    with_workers(cfg.workers, || run_in_pool(cfg))?
}

/// Runs on an already loaded dataset (its truth, if any, is used for scoring).
pub fn run_on(cfg: &PipelineConfig, data: &Dataset) -> Result<RunOutput> {
    with_workers(cfg.workers, || run_loaded(cfg, data.clone(), Timer::default(), Instant::now()))?
}

fn run_in_pool(cfg: &PipelineConfig) -> Result<RunOutput> {
    let start = Instant::now();
    let mut timer = Timer::default();
    let data = timer.run("load", || load_input(cfg))?;
    run_loaded(cfg, data, timer, start)
}

fn run_loaded(cfg: &PipelineConfig, data: Dataset, mut timer: Timer, start: Instant) -> Result<RunOutput> {
    let echo = cfg.clone();
    let cfg = cfg.seeded();
    let candidates_raw = match &cfg.candidates {
        Some(path) => Some(timer.run("load", || {
            load_csv(
                path,
                &CsvOptions {
                    has_header: cfg.has_header,
                    label_column: cfg.label_column,
                },
            )
        })?),
        None => None,
    };
    let (sample, candidates) = timer.run("normalize", || {
        let stats = NormStats::of(&data)?;
        let sample = stats.apply(&data)?;
        let candidates = candidates_raw.as_ref().map(|c| stats.apply(c)).transpose()?;
        Ok((sample, candidates))
    })?;
    let candidates = candidates.as_ref().unwrap_or(&sample);
    let truth = candidates.truth().map(Clustering::from_signed);

    let mut warnings = Vec::new();
    let mut bucket_sizes = Vec::new();
    let mut m1 = 1;
    let mut ascent_result = None;
    if matches!(cfg.algorithm, Algorithm::Nnga | Algorithm::NngaPlus | Algorithm::Pipeline) {
        let mut params = cfg.ascent.clone();
        if cfg.algorithm == Algorithm::Nnga {
            let r = timer.run("ascent", || nnga_exact(&sample, candidates, &params))?;
            ascent_result = Some(r);
        } else {
            let index = timer.run("index", || BucketIndex::with_seed(&sample, params.m1, params.seed))?;
            if let Some(path) = &cfg.buckets_out {
                timer.run("write", || {
                    let mut w = BufWriter::new(File::create(path)?);
                    index.write_assignments(&mut w)?;
                    Ok(w.flush()?)
                })?;
            }
            params.m1 = index.m1();
            m1 = index.m1();
            bucket_sizes = index.bucket_sizes();
            let r = timer.run("ascent", || nnga_plus_with_index(&index, candidates, &params))?;
            ascent_result = Some(r);
        }
    }

    let mut eps2 = None;
    let mut label_bucket_sizes = None;
    let mut outcome: Option<EpsOutcome> = None;
    let clustering = timer.run("label", || {
        let labeler = match cfg.algorithm {
            Algorithm::Nnga | Algorithm::NngaPlus => None,
            Algorithm::Eps => Some(Labeler::Eps),
            Algorithm::Kmeans => Some(Labeler::Kmeans),
            Algorithm::Dbscan => Some(Labeler::Dbscan),
            Algorithm::Pipeline => Some(cfg.labeler),
        };
        let target = ascent_result.as_ref().map_or(candidates, |r| &r.prototypes);
        match labeler {
            None => prototype_labeling(ascent_result.as_ref().expect("ascent ran"), cfg.prototype_tol),
            Some(Labeler::Eps) => {
                let mut eps = cfg.eps.clone();
                let p = cfg.ascent.p;
                if eps.eps2.is_none() && sample.len() > 1 {
                    // The radius comes from the sample even when labeling
                    // prototypes: converged points sit almost on top of each
                    // other and would give a near-zero estimate.
                    let k = eps.eps_knn.min(sample.len() - 1);
                    eps.eps2 = Some(estimate_epsilon(&sample, k, eps.m1, p, eps.seed)?);
                }
                let o = if target.len() == 1 {
                    None
                } else {
                    Some(eps_proximity_partitioned_detailed(target, &eps, p)?)
                };
                let c = o.as_ref().map_or_else(|| Clustering::from_raw(&[0]), |o| o.clustering.clone());
                outcome = o;
                Ok(c)
            }
            Some(Labeler::Kmeans) => kmeans(target, &cfg.kmeans),
            Some(Labeler::Dbscan) => dbscan(target, &cfg.dbscan),
        }
    })?;
    if let Some(o) = &outcome {
        eps2 = Some(o.eps2);
        label_bucket_sizes = Some(o.bucket_sizes.clone());
        if bucket_sizes.is_empty() {
            m1 = o.bucket_sizes.len();
            bucket_sizes = o.bucket_sizes.clone();
        }
    }
    if !bucket_sizes.is_empty() {
        warnings.extend(bucket_size_advisory(&bucket_sizes));
    }

    let scores = match &truth {
        Some(t) => Some(timer.run("metrics", || score(&clustering, t))?),
        None => None,
    };

    timer.run("write", || {
        if let Some(path) = &cfg.labels_out {
            save_labels(path, &clustering)?;
        }
        if let (Some(path), Some(r)) = (&cfg.prototypes_out, &ascent_result) {
            let mut w = BufWriter::new(File::create(path)?);
            write_prototypes(&mut w, r)?;
            w.flush()?;
        }
        if let (Some(path), Some(o)) = (&cfg.graph_out, &outcome) {
            let mut w = BufWriter::new(File::create(path)?);
            o.write_graph(&mut w)?;
            w.flush()?;
        }
        Ok(())
    })?;

    let mut report = RunReport {
        phases: timer.phases,
        total_ms: 0.0,
        n: sample.len(),
        d: sample.dim(),
        candidates: candidates.len(),
        m1,
        bucket_sizes,
        label_bucket_sizes,
        n_clusters: clustering.n_clusters(),
        n_noise: clustering.n_noise(),
        eps2,
        converged: ascent_result.as_ref().map(|r| r.converged.iter().filter(|&&c| c).count()),
        mean_iterations: ascent_result
            .as_ref()
            .map(|r| r.iterations.iter().sum::<usize>() as f64 / r.len().max(1) as f64),
        scores,
        seed: cfg.seed,
        workers: rayon::current_num_threads(),
        warnings,
        config: echo,
    };
    report.total_ms = start.elapsed().as_secs_f64() * 1e3;
    if let Some(path) = &cfg.report_out {
        let mut w = BufWriter::new(File::create(path)?);
        serde_json::to_writer_pretty(&mut w, &report)?;
        w.flush()?;
    }
    Ok(RunOutput {
        clustering,
        report,
        ascent: ascent_result,
    })
}
