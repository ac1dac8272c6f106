mod args;

use std::fs::File;
use std::io::{self, BufReader, BufWriter, Write};
use std::path::{Path, PathBuf};
use std::process::ExitCode;
use std::time::Instant;

use clap::error::ErrorKind as ClapErrorKind;
use clap::Parser;
use serde_json::json;

use lshms::bench::{run_bench, write_rows, BenchConfig};
use lshms::image::{boundary_map, segment_image};
use lshms::io::{load_labels, save_labels, write_dataset};
use lshms::knn::recall;
use lshms::metrics::score;
use lshms::pipeline::{bucket_size_advisory, load_input, run_pipeline, with_workers, Algorithm, PipelineConfig};
use lshms::pnm::{read_ppm, write_pgm, write_ppm};
use lshms::{exact_knn, min_max_normalize, AscentParams, BucketIndex, EpsParams, Error, ErrorKind};

use args::*;

type Result<T> = std::result::Result<T, Error>;

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(c) => c,
        Err(e) => {
            let _ = e.print();
            return match e.kind() {
                ClapErrorKind::DisplayHelp | ClapErrorKind::DisplayVersion => ExitCode::SUCCESS,
                _ => ExitCode::from(1),
            };
        }
    };
    match std::panic::catch_unwind(|| run(cli)) {
        Ok(Ok(())) => ExitCode::SUCCESS,
        Ok(Err(e)) => {
            eprintln!("error: {e}");
            ExitCode::from(match e.kind() {
                ErrorKind::Usage => 1,
                ErrorKind::Data => 2,
                ErrorKind::Internal => 3,
            })
        }
        Err(_) => ExitCode::from(3),
    }
}

fn run(cli: Cli) -> Result<()> {
    match cli.command {
        Command::Normalize(a) => normalize(a),
        Command::Knn(a) => knn(a),
        Command::Ascend(a) => {
            let mut cfg = base_config(&a.common)?;
            a.ascent.apply(&mut cfg);
            cfg.algorithm = if a.exact { Algorithm::Nnga } else { Algorithm::NngaPlus };
            if let Some(t) = a.prototype_tol {
                cfg.prototype_tol = t;
            }
            pipeline(cfg)
        }
        Command::Label(a) => {
            let mut cfg = base_config(&a.common)?;
            a.labeling.apply(&mut cfg);
            if let Some(p) = a.p {
                cfg.ascent.p = p;
            }
            cfg.algorithm = match a.labeler {
                LabelerArg::Eps => Algorithm::Eps,
                LabelerArg::Kmeans => Algorithm::Kmeans,
                LabelerArg::Dbscan => Algorithm::Dbscan,
            };
            pipeline(cfg)
        }
        Command::Cluster(a) => {
            let mut cfg = base_config(&a.common)?;
            a.ascent.apply(&mut cfg);
            a.labeling.apply(&mut cfg);
            if let Some(alg) = a.algorithm {
                cfg.algorithm = alg.into();
            }
            if let Some(l) = a.labeler {
                cfg.labeler = l.into();
            }
            if let Some(t) = a.prototype_tol {
                cfg.prototype_tol = t;
            }
            pipeline(cfg)
        }
        Command::Eval(a) => eval(a),
        Command::Segment(a) => segment(a),
        Command::Bench(a) => bench(a),
    }
}

fn read_json<T: serde::de::DeserializeOwned>(path: &Path) -> Result<T> {
    let file = File::open(path)?;
    serde_json::from_reader(BufReader::new(file))
        .map_err(|e| Error::InvalidParameter(format!("config {}: {e}", path.display())))
}

fn base_config(common: &CommonArgs) -> Result<PipelineConfig> {
    let mut cfg = match &common.config {
        Some(path) => read_json(path)?,
        None => PipelineConfig::default(),
    };
    common.apply(&mut cfg);
    Ok(cfg)
}

/// Opens `path` for writing, or stdout.
fn output(path: Option<&PathBuf>) -> Result<Box<dyn Write>> {
    Ok(match path {
        Some(p) => Box::new(BufWriter::new(File::create(p)?)),
        None => Box::new(BufWriter::new(io::stdout().lock())),
    })
}

fn warn_all(warnings: &[String]) {
    for w in warnings {
        eprintln!("warning: {w}");
    }
}

fn pipeline(cfg: PipelineConfig) -> Result<()> {
    let out = run_pipeline(&cfg)?;
    warn_all(&out.report.warnings);
    if cfg.report_out.is_none() {
        let mut w = output(None)?;
        serde_json::to_writer_pretty(&mut w, &out.report)?;
        writeln!(w)?;
        w.flush()?;
    }
    Ok(())
}

fn input_config(i: &InputArgs) -> PipelineConfig {
    PipelineConfig {
        input: i.input.clone(),
        dataset: i.dataset.clone(),
        has_header: i.header,
        label_column: i.label_column,
        ..Default::default()
    }
}

fn normalize(a: NormalizeArgs) -> Result<()> {
    let data = load_input(&input_config(&a.input))?;
    let (normalized, _) = min_max_normalize(&data)?;
    let mut w = output(a.output.as_ref())?;
    write_dataset(&mut w, &normalized)?;
    w.flush()?;
    Ok(())
}

fn knn(a: KnnArgs) -> Result<()> {
    let data = load_input(&input_config(&a.input))?;
    let (data, _) = min_max_normalize(&data)?;
    let n = data.len();
    if a.k == 0 || a.k > n {
        return Err(Error::InvalidParameter(format!("k must be in 1..={n}")));
    }
    let q = a.queries.clamp(1, n);
    let ids: Vec<usize> = (0..q).map(|i| i * n / q).collect();
    let rows = with_workers(a.workers, || -> Result<Vec<(usize, f64, f64)>> {
        let index = BucketIndex::with_seed(&data, a.m1, a.seed)?;
        if let Some(msg) = bucket_size_advisory(&index.bucket_sizes()) {
            eprintln!("warning: {msg}");
        }
        let exact = ids
            .iter()
            .map(|&i| exact_knn(&data, data.point(i), a.k))
            .collect::<Result<Vec<_>>>()?;
        let mut rows = Vec::new();
        for &p in &a.p {
            let mut recalls = Vec::with_capacity(q);
            for (&i, e) in ids.iter().zip(&exact) {
                recalls.push(recall(&index.approx_knn(data.point(i), a.k, p)?, e));
            }
            let mean = recalls.iter().sum::<f64>() / q as f64;
            let min = recalls.iter().copied().fold(f64::INFINITY, f64::min);
            rows.push((p, mean, min));
        }
        Ok(rows)
    })??;
    let mut w = output(a.output.as_ref())?;
    writeln!(w, "p,mean_recall,min_recall")?;
    for (p, mean, min) in rows {
        writeln!(w, "{p},{mean},{min}")?;
    }
    w.flush()?;
    Ok(())
}

fn eval(a: EvalArgs) -> Result<()> {
    let found = load_labels(&a.found)?;
    let truth = load_labels(&a.truth)?;
    let s = score(&found, &truth)?;
    println!(
        "{}",
        json!({
            "nmi": s.nmi,
            "rand": s.rand,
            "found_clusters": found.n_clusters(),
            "truth_clusters": truth.n_clusters(),
        })
    );
    Ok(())
}

fn segment(a: SegmentArgs) -> Result<()> {
    let start = Instant::now();
    let img = read_ppm(BufReader::new(File::open(&a.input)?))?;
    let n = img.width() * img.height();
    let m1 = a.m1.unwrap_or((n / 1000).max(1));
    let ascent = AscentParams {
        k1: a.k1,
        m1,
        p: a.p,
        j_max: a.j_max,
        eps1: a.eps1,
        seed: a.seed,
        ..Default::default()
    };
    let labeling = EpsParams {
        eps2: a.eps2,
        eps_knn: a.eps_knn,
        k3: a.k3,
        m1,
        seed: a.seed,
    };
    let seg = with_workers(a.workers, || segment_image(&img, &ascent, &labeling))??;
    let warnings: Vec<String> = bucket_size_advisory(&seg.ascent_bucket_sizes).into_iter().collect();
    warn_all(&warnings);
    if let Some(path) = &a.output {
        let mut w = BufWriter::new(File::create(path)?);
        write_ppm(&mut w, &seg.rendered)?;
        w.flush()?;
    }
    if let Some(path) = &a.labels {
        save_labels(path, &seg.clustering)?;
    }
    if let Some(path) = &a.boundary {
        let mut w = BufWriter::new(File::create(path)?);
        write_pgm(&mut w, img.width(), img.height(), &boundary_map(img.width(), img.height(), &seg.clustering))?;
        w.flush()?;
    }
    let report = json!({
        "width": img.width(),
        "height": img.height(),
        "m1": m1,
        "n_clusters": seg.clustering.n_clusters(),
        "eps2": seg.eps2,
        "bucket_sizes": seg.ascent_bucket_sizes,
        "label_bucket_sizes": seg.label_bucket_sizes,
        "total_ms": start.elapsed().as_secs_f64() * 1e3,
        "warnings": warnings,
        "ascent": ascent,
        "labeling": labeling,
    });
    let mut w = output(a.report.as_ref())?;
    serde_json::to_writer_pretty(&mut w, &report)?;
    writeln!(w)?;
    w.flush()?;
    Ok(())
}

fn bench(a: BenchArgs) -> Result<()> {
    let mut cfg: BenchConfig = match &a.config {
        Some(path) => read_json(path)?,
        None => BenchConfig::default(),
    };
    override_bench(&mut cfg, &a);
    let rows = run_bench(&cfg, |r| {
        eprintln!("n={} m1={} p={} workers={} {}: {:.1} ms", r.n, r.m1, r.p, r.workers, r.phase, r.ms)
    })?;
    let w = output(a.output.as_ref())?;
    write_rows(w, &rows)
}
