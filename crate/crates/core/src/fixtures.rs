//! Benchmark datasets with ground truth.
//!
//! Hepta (212 points, 3-D, 7 clusters) is embedded. R15, Aggregation and S3
//! are not redistributable here, so seeded lookalikes with the same sizes,
//! cluster counts and layout are generated instead. When the environment
//! variable [`DATA_DIR_ENV`] points at a directory holding `<name>.csv` or
//! `<name>.txt` (comma or whitespace separated, last column the label,
//! optional header), that file is used in preference.

use std::f64::consts::TAU;
use std::path::{Path, PathBuf};

use crate::data::Dataset;
use crate::error::{Error, Result};
use crate::io::{read_csv, CsvOptions};
use crate::synth::{concat, gaussian_mixture, uniform_ellipsoids, Blob};

pub const DATA_DIR_ENV: &str = "LSHMS_DATA_DIR";

const HEPTA: &str = include_str!("../data/hepta.csv");

#[derive(Clone, Debug, PartialEq, Eq)]
pub enum Source {
    Embedded,
    Generated,
    File(PathBuf),
}

#[derive(Clone, Debug)]
pub struct Fixture {
    pub name: &'static str,
    pub data: Dataset,
    pub source: Source,
}

pub const NAMES: [&str; 4] = ["hepta", "r15", "aggregation", "s3"];

/// Loads a fixture by (case-insensitive) name.
pub fn load(name: &str) -> Result<Fixture> {
    let lower = name.to_ascii_lowercase();
    let name = NAMES
        .iter()
        .copied()
        .find(|n| *n == lower)
        .ok_or_else(|| Error::InvalidParameter(format!("unknown dataset '{name}'")))?;
    if let Some(dir) = std::env::var_os(DATA_DIR_ENV) {
        for ext in ["csv", "txt"] {
            let path = Path::new(&dir).join(format!("{name}.{ext}"));
            if path.is_file() {
                return Ok(Fixture {
                    name,
                    data: load_labeled_text(&std::fs::read_to_string(&path)?)?,
                    source: Source::File(path),
                });
            }
        }
    }
    let (data, source) = match name {
        "hepta" => (hepta(), Source::Embedded),
        "r15" => (r15_like(), Source::Generated),
        "aggregation" => (aggregation_like(), Source::Generated),
        _ => (s3_like(), Source::Generated),
    };
    Ok(Fixture {
        name,
        data,
        source,
    })
}

/// Parses "x y ... label" text with commas, tabs or spaces as separators.
pub fn load_labeled_text(text: &str) -> Result<Dataset> {
    let normalized: String = text
        .lines()
        .filter(|l| !l.trim().is_empty())
        .map(|l| {
            let fields: Vec<&str> = l
                .split(|c: char| c == ',' || c.is_whitespace())
                .filter(|f| !f.is_empty())
                .collect();
            fields.join(",") + "\n"
        })
        .collect();
    let first = normalized.lines().next().ok_or(Error::EmptyInput)?;
    let arity = first.split(',').count();
    let has_header = first.split(',').any(|f| f.parse::<f64>().is_err());
    read_csv(
        normalized.as_bytes(),
        &CsvOptions {
            has_header,
            label_column: Some(arity - 1),
        },
    )
}

pub fn hepta() -> Dataset {
    load_labeled_text(HEPTA).expect("embedded hepta fixture is well formed")
}

/// Fifteen Gaussians of 40 points: one at the centre, seven on an inner
/// ring whose neighbours nearly touch, seven on a well separated outer ring.
pub fn r15_like() -> Dataset {
    let c = 10.0;
    let mut blobs = vec![Blob::round(vec![c, c], 0.3, 40)];
    for (radius, phase) in [(1.55, 0.0), (5.5, TAU / 14.0)] {
        for i in 0..7 {
            let a = phase + TAU * i as f64 / 7.0;
            blobs.push(Blob::round(vec![c + radius * a.cos(), c + radius * a.sin()], 0.3, 40));
        }
    }
    gaussian_mixture(&blobs, 15).expect("valid blobs")
}

/// Seven uniform blobs with the Aggregation sizes (788 points). Two pairs of
/// groups are joined by thin bridges of points, labeled with the group they
/// leave from.
pub fn aggregation_like() -> Dataset {
    let groups = [
        Blob { center: vec![9.0, 22.5], spread: vec![3.2, 3.0], size: 45 },
        Blob { center: vec![8.5, 8.0], spread: vec![6.0, 5.5], size: 170 },
        Blob { center: vec![19.5, 22.5], spread: vec![4.2, 4.8], size: 102 },
        Blob { center: vec![32.5, 22.0], spread: vec![6.5, 6.0], size: 273 },
        Blob { center: vec![19.0, 6.5], spread: vec![2.3, 2.5], size: 34 },
        Blob { center: vec![32.0, 8.0], spread: vec![5.0, 4.5], size: 130 },
        Blob { center: vec![24.0, 6.5], spread: vec![2.3, 2.5], size: 34 },
    ];
    let blobs = uniform_ellipsoids(&groups, 7).expect("valid blobs");
    // Bridges replace a few points of the departing group so sizes stay put.
    let bridges = [(4usize, 6usize, 0.5), (2, 3, 0.8)];
    let mut coords = blobs.coords().to_vec();
    let truth = blobs.truth().expect("generated with truth").to_vec();
    let mut starts = vec![0];
    for g in &groups {
        starts.push(starts.last().unwrap() + g.size);
    }
    for (from, to, step) in bridges {
        let (a, b) = (&groups[from], &groups[to]);
        let dx = b.center[0] - a.center[0];
        let dy = b.center[1] - a.center[1];
        let len = (dx * dx + dy * dy).sqrt();
        let (ux, uy) = (dx / len, dy / len);
        let mut t = a.spread[0];
        let mut slot = starts[from];
        while t < len - b.spread[0] {
            coords[2 * slot] = a.center[0] + ux * t;
            coords[2 * slot + 1] = a.center[1] + uy * t;
            slot += 1;
            t += step;
        }
    }
    Dataset::new(2, coords)
        .and_then(|d| d.with_truth(truth))
        .expect("valid coordinates")
}

/// Fifteen strongly overlapping Gaussians, 5000 points in the unit square.
pub fn s3_like() -> Dataset {
    let centers = [
        (0.15, 0.20), (0.35, 0.12), (0.62, 0.15), (0.85, 0.22), (0.12, 0.45),
        (0.36, 0.38), (0.58, 0.40), (0.82, 0.48), (0.20, 0.70), (0.42, 0.62),
        (0.65, 0.66), (0.88, 0.75), (0.15, 0.90), (0.45, 0.86), (0.72, 0.90),
    ];
    let sizes = [333, 333, 333, 333, 333, 333, 333, 333, 333, 333, 334, 334, 334, 334, 334];
    let parts: Vec<Dataset> = centers
        .iter()
        .zip(sizes)
        .enumerate()
        .map(|(i, (&(x, y), size))| {
            gaussian_mixture(&[Blob::round(vec![x, y], 0.065, size)], 300 + i as u64)
                .expect("valid blob")
        })
        .collect();
    concat(&parts).expect("same dimension")
}

#[cfg(test)]
mod tests {
    use super::*;

    fn sizes(ds: &Dataset) -> Vec<usize> {
        let t = ds.truth().unwrap();
        let k = *t.iter().max().unwrap() as usize + 1;
        let mut s = vec![0; k];
        for &l in t {
            s[l as usize] += 1;
        }
        s
    }

    #[test]
    fn hepta_shape() {
        let h = hepta();
        assert_eq!((h.len(), h.dim()), (212, 3));
        let mut s = sizes(&h)[1..].to_vec();
        s.sort();
        assert_eq!(s, vec![30, 30, 30, 30, 30, 30, 32]);
    }

    #[test]
    fn surrogate_shapes() {
        let r = r15_like();
        assert_eq!((r.len(), r.dim()), (600, 2));
        assert_eq!(sizes(&r), vec![40; 15]);
        let a = aggregation_like();
        assert_eq!((a.len(), a.dim()), (788, 2));
        assert_eq!(sizes(&a), vec![45, 170, 102, 273, 34, 130, 34]);
        let s = s3_like();
        assert_eq!((s.len(), s.dim()), (5000, 2));
        assert_eq!(sizes(&s).len(), 15);
    }

    #[test]
    fn whitespace_text_with_header() {
        let ds = load_labeled_text("x y c\n1.0\t2.0  3\n4 5 6\n").unwrap();
        assert_eq!(ds.coords(), &[1.0, 2.0, 4.0, 5.0]);
        assert_eq!(ds.truth().unwrap(), &[3, 6]);
    }

    #[test]
    fn unknown_name() {
        assert!(load("iris").is_err());
        assert_eq!(load("Hepta").unwrap().name, "hepta");
    }
}
