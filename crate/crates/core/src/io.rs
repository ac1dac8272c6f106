//! CSV input and output.
//!
//! Input rows are comma-separated reals with an optional header and an
//! optional integer label column. Label files are `point_id,label` with
//! noise written as `-1`.

use std::fs::File;
use std::io::{BufWriter, Read, Write};
use std::path::Path;

use crate::ascent::AscentResult;
use crate::clustering::Clustering;
use crate::data::Dataset;
use crate::error::{Error, Result};
use crate::scalar::Scalar;

#[derive(Clone, Debug, Default)]
pub struct CsvOptions {
    pub has_header: bool,
    /// 0-based index of the ground-truth column, if any.
    pub label_column: Option<usize>,
}

pub fn load_csv(path: impl AsRef<Path>, opts: &CsvOptions) -> Result<Dataset> {
    read_csv(File::open(path)?, opts)
}

/// Parses a dataset. Errors name 1-based data rows and columns.
pub fn read_csv<R: Read>(reader: R, opts: &CsvOptions) -> Result<Dataset> {
    let mut rdr = csv::ReaderBuilder::new()
        .has_headers(opts.has_header)
        .flexible(true)
        .trim(csv::Trim::All)
        .from_reader(reader);
    let mut coords = Vec::new();
    let mut truth = Vec::new();
    let mut arity = None;
    for (r, rec) in rdr.records().enumerate() {
        let rec = rec?;
        let row = r + 1;
        if rec.iter().all(str::is_empty) {
            continue;
        }
        match arity {
            None => arity = Some(rec.len()),
            Some(a) if a != rec.len() => {
                return Err(Error::Parse {
                    row,
                    column: rec.len().min(a) + 1,
                    msg: format!("expected {a} fields, found {}", rec.len()),
                })
            }
            _ => {}
        }
        if let Some(lc) = opts.label_column {
            if lc >= rec.len() {
                return Err(Error::Parse {
                    row,
                    column: lc + 1,
                    msg: "label column out of range".into(),
                });
            }
        }
        for (c, field) in rec.iter().enumerate() {
            if Some(c) == opts.label_column {
                let label = field
                    .parse::<i64>()
                    .or_else(|_| {
                        field
                            .parse::<f64>()
                            .ok()
                            .filter(|v| v.fract() == 0.0 && v.is_finite())
                            .map(|v| v as i64)
                            .ok_or(())
                    })
                    .map_err(|_| Error::Parse {
                        row,
                        column: c + 1,
                        msg: "not an integer label".into(),
                    })?;
                truth.push(label);
            } else {
                let v: f64 = field.parse().map_err(|_| Error::Parse {
                    row,
                    column: c + 1,
                    msg: "not a number".into(),
                })?;
                if !v.is_finite() {
                    return Err(Error::Parse {
                        row,
                        column: c + 1,
                        msg: "not a finite number".into(),
                    });
                }
                coords.push(v);
            }
        }
    }
    let arity = arity.ok_or(Error::EmptyInput)?;
    let dim = arity - usize::from(opts.label_column.is_some());
    if dim == 0 {
        return Err(Error::InvalidParameter("no coordinate columns".into()));
    }
    let ds = Dataset::new(dim, coords)?;
    if opts.label_column.is_some() {
        ds.with_truth(truth)
    } else {
        Ok(ds)
    }
}

pub fn write_dataset<T: Scalar, W: Write>(mut w: W, ds: &Dataset<T>) -> Result<()> {
    let mut header: Vec<String> = (0..ds.dim()).map(|i| format!("x{i}")).collect();
    if ds.truth().is_some() {
        header.push("label".into());
    }
    writeln!(w, "{}", header.join(","))?;
    for (i, p) in ds.points().enumerate() {
        let mut row: Vec<String> = p.iter().map(|v| v.to_string()).collect();
        if let Some(t) = ds.truth() {
            row.push(t[i].to_string());
        }
        writeln!(w, "{}", row.join(","))?;
    }
    Ok(())
}

pub fn write_labels<W: Write>(mut w: W, clustering: &Clustering) -> Result<()> {
    writeln!(w, "point_id,label")?;
    for i in 0..clustering.len() {
        writeln!(w, "{i},{}", clustering.signed_label(i))?;
    }
    Ok(())
}

pub fn save_labels(path: impl AsRef<Path>, clustering: &Clustering) -> Result<()> {
    let mut w = BufWriter::new(File::create(path)?);
    write_labels(&mut w, clustering)?;
    w.flush()?;
    Ok(())
}

/// Reads a `point_id,label` file back into a clustering (noise = `-1`).
pub fn read_labels<R: Read>(reader: R) -> Result<Clustering> {
    let mut rdr = csv::ReaderBuilder::new()
        .has_headers(true)
        .trim(csv::Trim::All)
        .from_reader(reader);
    let mut pairs = Vec::new();
    for (r, rec) in rdr.records().enumerate() {
        let rec = rec?;
        let parse = |c: usize| -> Result<i64> {
            rec.get(c)
                .and_then(|f| f.parse().ok())
                .ok_or_else(|| Error::Parse {
                    row: r + 1,
                    column: c + 1,
                    msg: "not an integer".into(),
                })
        };
        pairs.push((parse(0)?, parse(1)?));
    }
    pairs.sort_unstable();
    for (i, &(id, _)) in pairs.iter().enumerate() {
        if id != i as i64 {
            return Err(Error::Format(format!("point ids must be 0..n, missing {i}")));
        }
    }
    let labels: Vec<i64> = pairs.into_iter().map(|(_, l)| l).collect();
    Ok(Clustering::from_signed(&labels))
}

pub fn load_labels(path: impl AsRef<Path>) -> Result<Clustering> {
    read_labels(File::open(path)?)
}

/// `candidate_id,x0..x{d-1},iterations,converged`.
pub fn write_prototypes<T: Scalar, W: Write>(mut w: W, result: &AscentResult<T>) -> Result<()> {
    let dim = result.prototypes.dim();
    let coords: Vec<String> = (0..dim).map(|i| format!("x{i}")).collect();
    writeln!(w, "candidate_id,{},iterations,converged", coords.join(","))?;
    for (i, p) in result.prototypes.points().enumerate() {
        let c: Vec<String> = p.iter().map(|v| v.to_string()).collect();
        writeln!(
            w,
            "{i},{},{},{}",
            c.join(","),
            result.iterations[i],
            result.converged[i]
        )?;
    }
    Ok(())
}
