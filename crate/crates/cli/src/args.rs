use std::path::PathBuf;

use clap::{Args, Parser, Subcommand, ValueEnum};
use lshms::baselines::KMeansInit;
use lshms::pipeline::{Algorithm, Labeler, PipelineConfig};

#[derive(Parser, Debug)]
#[command(name = "lshms", version, about = "Mean-shift clustering with LSH-partitioned nearest neighbours")]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Subcommand, Debug)]
pub enum Command {
    /// Min-max normalize a CSV dataset to the unit cube.
    Normalize(NormalizeArgs),
    /// Compare bucketed kNN against the exact search (recall per layer count).
    Knn(KnnArgs),
    /// Run gradient ascent and group candidates by their prototypes.
    Ascend(AscendArgs),
    /// Label the normalized data directly (ε-proximity, k-means or DBSCAN).
    Label(LabelArgs),
    /// Full pipeline: normalize, ascend, label, score.
    Cluster(ClusterArgs),
    /// NMI and RAND between two labels files.
    Eval(EvalArgs),
    /// Segment a binary PPM image in (x, y, L*, u*, v*) space.
    Segment(SegmentArgs),
    /// Timing sweep over n, m1, p and worker count on synthetic mixtures.
    Bench(BenchArgs),
}

#[derive(Args, Debug, Clone)]
pub struct InputArgs {
    /// Input CSV of real coordinates.
    #[arg(long, short)]
    pub input: Option<PathBuf>,
    /// Built-in dataset instead of a file: hepta, r15, aggregation, s3.
    #[arg(long, conflicts_with = "input")]
    pub dataset: Option<String>,
    /// The first CSV row is a header.
    #[arg(long)]
    pub header: bool,
    /// Zero-based column holding integer ground-truth labels.
    #[arg(long)]
    pub label_column: Option<usize>,
}

#[derive(Args, Debug, Clone)]
pub struct CommonArgs {
    /// JSON pipeline config; flags given on the command line override it.
    #[arg(long)]
    pub config: Option<PathBuf>,
    #[command(flatten)]
    pub input: InputArgs,
    #[arg(long)]
    pub seed: Option<u64>,
    /// Worker threads (default: available hardware parallelism).
    #[arg(long)]
    pub workers: Option<usize>,
    /// Write `point_id,label` here.
    #[arg(long)]
    pub labels: Option<PathBuf>,
    /// Write the run report JSON here instead of stdout.
    #[arg(long)]
    pub report: Option<PathBuf>,
}

#[derive(Args, Debug, Clone, Default)]
pub struct AscentArgs {
    /// Neighbours averaged per step.
    #[arg(long)]
    pub k1: Option<usize>,
    /// Bucket count (also used for labeling unless --label-m1 is given).
    #[arg(long)]
    pub m1: Option<usize>,
    /// Neighbour bucket layers on each side.
    #[arg(long)]
    pub p: Option<usize>,
    #[arg(long)]
    pub j_max: Option<usize>,
    /// Convergence tolerance on the step length.
    #[arg(long)]
    pub eps1: Option<f64>,
    /// Neighbours voting on bucket migration (default k1).
    #[arg(long)]
    pub k2: Option<usize>,
    /// Candidate points to move (default: the sample itself).
    #[arg(long)]
    pub candidates: Option<PathBuf>,
    /// Dump final prototypes as CSV.
    #[arg(long)]
    pub prototypes: Option<PathBuf>,
    /// Dump `point_id,projection,bucket` for the sample.
    #[arg(long)]
    pub buckets: Option<PathBuf>,
}

#[derive(Args, Debug, Clone, Default)]
pub struct LabelerArgs {
    /// ε-proximity radius (estimated from --eps-knn when absent).
    #[arg(long)]
    pub eps2: Option<f64>,
    /// Neighbours used to estimate the radius.
    #[arg(long)]
    pub eps_knn: Option<usize>,
    /// Cross-bucket pairs required to merge two clusters.
    #[arg(long)]
    pub k3: Option<usize>,
    /// Bucket count for labeling.
    #[arg(long)]
    pub label_m1: Option<usize>,
    /// Dump `bucket,local_cluster,global_label`.
    #[arg(long)]
    pub graph: Option<PathBuf>,
    /// k-means cluster count.
    #[arg(long)]
    pub k: Option<usize>,
    #[arg(long)]
    pub max_iters: Option<usize>,
    #[arg(long, value_enum)]
    pub kmeans_init: Option<InitArg>,
    /// DBSCAN neighbourhood radius.
    #[arg(long)]
    pub dbscan_eps: Option<f64>,
    /// DBSCAN core-point threshold.
    #[arg(long)]
    pub min_pts: Option<usize>,
}

#[derive(ValueEnum, Debug, Clone, Copy)]
pub enum InitArg {
    Uniform,
    PlusPlus,
}

#[derive(ValueEnum, Debug, Clone, Copy, PartialEq, Eq)]
pub enum AlgorithmArg {
    Nnga,
    NngaPlus,
    Eps,
    Kmeans,
    Dbscan,
    Pipeline,
}

#[derive(ValueEnum, Debug, Clone, Copy, PartialEq, Eq)]
pub enum LabelerArg {
    Eps,
    Kmeans,
    Dbscan,
}

impl From<AlgorithmArg> for Algorithm {
    fn from(a: AlgorithmArg) -> Self {
        match a {
            AlgorithmArg::Nnga => Algorithm::Nnga,
            AlgorithmArg::NngaPlus => Algorithm::NngaPlus,
            AlgorithmArg::Eps => Algorithm::Eps,
            AlgorithmArg::Kmeans => Algorithm::Kmeans,
            AlgorithmArg::Dbscan => Algorithm::Dbscan,
            AlgorithmArg::Pipeline => Algorithm::Pipeline,
        }
    }
}

impl From<LabelerArg> for Labeler {
    fn from(l: LabelerArg) -> Self {
        match l {
            LabelerArg::Eps => Labeler::Eps,
            LabelerArg::Kmeans => Labeler::Kmeans,
            LabelerArg::Dbscan => Labeler::Dbscan,
        }
    }
}

#[derive(Args, Debug)]
pub struct NormalizeArgs {
    #[command(flatten)]
    pub input: InputArgs,
    /// Output CSV (stdout when absent).
    #[arg(long, short)]
    pub output: Option<PathBuf>,
}

#[derive(Args, Debug)]
pub struct KnnArgs {
    #[command(flatten)]
    pub input: InputArgs,
    #[arg(long, default_value_t = 20)]
    pub k: usize,
    #[arg(long, default_value_t = 1)]
    pub m1: usize,
    /// Layer counts to evaluate.
    #[arg(long, value_delimiter = ',', default_values_t = [0usize, 1, 2])]
    pub p: Vec<usize>,
    /// Number of sample points used as queries (evenly spaced ids).
    #[arg(long, default_value_t = 200)]
    pub queries: usize,
    #[arg(long, default_value_t = 0)]
    pub seed: u64,
    #[arg(long)]
    pub workers: Option<usize>,
    /// Output CSV `p,mean_recall,min_recall` (stdout when absent).
    #[arg(long, short)]
    pub output: Option<PathBuf>,
}

#[derive(Args, Debug)]
pub struct AscendArgs {
    #[command(flatten)]
    pub common: CommonArgs,
    #[command(flatten)]
    pub ascent: AscentArgs,
    /// Use the exact kNN search instead of buckets.
    #[arg(long)]
    pub exact: bool,
    /// Distance under which prototypes count as the same mode.
    #[arg(long)]
    pub prototype_tol: Option<f64>,
}

#[derive(Args, Debug)]
pub struct LabelArgs {
    #[command(flatten)]
    pub common: CommonArgs,
    #[arg(long, value_enum, default_value = "eps")]
    pub labeler: LabelerArg,
    #[command(flatten)]
    pub labeling: LabelerArgs,
    /// Layers used by the radius estimate and cross-bucket merge.
    #[arg(long)]
    pub p: Option<usize>,
}

#[derive(Args, Debug)]
pub struct ClusterArgs {
    #[command(flatten)]
    pub common: CommonArgs,
    #[arg(long, value_enum)]
    pub algorithm: Option<AlgorithmArg>,
    /// Labeler applied to the prototypes by the `pipeline` algorithm.
    #[arg(long, value_enum)]
    pub labeler: Option<LabelerArg>,
    #[command(flatten)]
    pub ascent: AscentArgs,
    #[command(flatten)]
    pub labeling: LabelerArgs,
    #[arg(long)]
    pub prototype_tol: Option<f64>,
}

#[derive(Args, Debug)]
pub struct EvalArgs {
    /// Labels file under test.
    pub found: PathBuf,
    /// Reference labels file.
    pub truth: PathBuf,
}

#[derive(Args, Debug)]
pub struct SegmentArgs {
    /// Binary PPM (P6) image.
    #[arg(long, short)]
    pub input: PathBuf,
    /// Image painted with the mean colour of each segment.
    #[arg(long, short)]
    pub output: Option<PathBuf>,
    /// Per-pixel labels, row-major pixel ids.
    #[arg(long)]
    pub labels: Option<PathBuf>,
    /// Segment boundary map as binary PGM (P5).
    #[arg(long)]
    pub boundary: Option<PathBuf>,
    /// Write the report JSON here instead of stdout.
    #[arg(long)]
    pub report: Option<PathBuf>,
    #[arg(long, default_value_t = 60)]
    pub k1: usize,
    /// Bucket count (default: about 1000 pixels per bucket).
    #[arg(long)]
    pub m1: Option<usize>,
    #[arg(long, default_value_t = 1)]
    pub p: usize,
    #[arg(long, default_value_t = 15)]
    pub j_max: usize,
    #[arg(long, default_value_t = 1e-5)]
    pub eps1: f64,
    #[arg(long)]
    pub eps2: Option<f64>,
    #[arg(long, default_value_t = 10)]
    pub eps_knn: usize,
    #[arg(long, default_value_t = 1)]
    pub k3: usize,
    #[arg(long, default_value_t = 0)]
    pub seed: u64,
    #[arg(long)]
    pub workers: Option<usize>,
}

#[derive(Args, Debug)]
pub struct BenchArgs {
    /// JSON bench config; flags override it.
    #[arg(long)]
    pub config: Option<PathBuf>,
    #[arg(long, value_delimiter = ',')]
    pub ns: Option<Vec<usize>>,
    #[arg(long, value_delimiter = ',')]
    pub m1s: Option<Vec<usize>>,
    #[arg(long)]
    pub points_per_bucket: Option<usize>,
    #[arg(long, value_delimiter = ',')]
    pub ps: Option<Vec<usize>>,
    #[arg(long, value_delimiter = ',')]
    pub workers: Option<Vec<usize>>,
    #[arg(long)]
    pub dim: Option<usize>,
    #[arg(long)]
    pub components: Option<usize>,
    #[arg(long)]
    pub k1: Option<usize>,
    /// Also time ε-proximity labeling.
    #[arg(long)]
    pub label: bool,
    #[arg(long)]
    pub repeats: Option<usize>,
    #[arg(long)]
    pub seed: Option<u64>,
    /// Output CSV `n,m1,p,workers,phase,ms` (stdout when absent).
    #[arg(long, short)]
    pub output: Option<PathBuf>,
}

fn set<T>(slot: &mut T, value: Option<T>) {
    if let Some(v) = value {
        *slot = v;
    }
}

impl CommonArgs {
    pub fn apply(&self, cfg: &mut PipelineConfig) {
        let i = &self.input;
        if i.input.is_some() {
            cfg.input = i.input.clone();
            cfg.dataset = None;
        }
        if i.dataset.is_some() {
            cfg.dataset = i.dataset.clone();
            cfg.input = None;
        }
        cfg.has_header |= i.header;
        if i.label_column.is_some() {
            cfg.label_column = i.label_column;
        }
        set(&mut cfg.seed, self.seed);
        if self.workers.is_some() {
            cfg.workers = self.workers;
        }
        if self.labels.is_some() {
            cfg.labels_out = self.labels.clone();
        }
        if self.report.is_some() {
            cfg.report_out = self.report.clone();
        }
    }
}

impl AscentArgs {
    pub fn apply(&self, cfg: &mut PipelineConfig) {
        let a = &mut cfg.ascent;
        set(&mut a.k1, self.k1);
        set(&mut a.m1, self.m1);
        set(&mut a.p, self.p);
        set(&mut a.j_max, self.j_max);
        set(&mut a.eps1, self.eps1);
        if self.k2.is_some() {
            a.k2 = self.k2;
        }
        set(&mut cfg.eps.m1, self.m1);
        if self.candidates.is_some() {
            cfg.candidates = self.candidates.clone();
        }
        if self.prototypes.is_some() {
            cfg.prototypes_out = self.prototypes.clone();
        }
        if self.buckets.is_some() {
            cfg.buckets_out = self.buckets.clone();
        }
    }
}

impl LabelerArgs {
    pub fn apply(&self, cfg: &mut PipelineConfig) {
        let e = &mut cfg.eps;
        if self.eps2.is_some() {
            e.eps2 = self.eps2;
        }
        set(&mut e.eps_knn, self.eps_knn);
        set(&mut e.k3, self.k3);
        set(&mut e.m1, self.label_m1);
        if self.graph.is_some() {
            cfg.graph_out = self.graph.clone();
        }
        set(&mut cfg.kmeans.k, self.k);
        set(&mut cfg.kmeans.max_iters, self.max_iters);
        if let Some(init) = self.kmeans_init {
            cfg.kmeans.init = match init {
                InitArg::Uniform => KMeansInit::Uniform,
                InitArg::PlusPlus => KMeansInit::PlusPlus,
            };
        }
        set(&mut cfg.dbscan.eps, self.dbscan_eps);
        set(&mut cfg.dbscan.min_pts, self.min_pts);
    }
}

pub fn override_bench(cfg: &mut lshms::bench::BenchConfig, a: &BenchArgs) {
    set(&mut cfg.ns, a.ns.clone());
    set(&mut cfg.m1s, a.m1s.clone());
    set(&mut cfg.points_per_bucket, a.points_per_bucket);
    set(&mut cfg.ps, a.ps.clone());
    set(&mut cfg.workers, a.workers.clone());
    set(&mut cfg.dim, a.dim);
    set(&mut cfg.components, a.components);
    set(&mut cfg.k1, a.k1);
    cfg.label |= a.label;
    set(&mut cfg.repeats, a.repeats);
    set(&mut cfg.seed, a.seed);
}
