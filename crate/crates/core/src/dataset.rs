//! CSV datasets: one point per row, columns `x_1..x_d[,y]`.
//!
//! A header row is optional and detected by a non-numeric first row. Files
//! written by [`save_dataset`] add a trailing `weight` column when the weights
//! are not uniform; [`load_dataset`] honours it when the header names it.

use std::fs;
use std::io::Write;
use std::path::Path;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::space::{EmpiricalDistribution, InstanceSpace, Point};

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Schema {
    Labeled,
    Unlabeled,
}

fn parse_row(line: &str) -> Option<Vec<f64>> {
    line.split(',')
        .map(|c| c.trim().parse::<f64>().ok())
        .collect()
}

pub fn load_dataset(
    path: impl AsRef<Path>,
    schema: Schema,
    space: &InstanceSpace,
) -> Result<EmpiricalDistribution> {
    let path = path.as_ref();
    let text = fs::read_to_string(path)?;
    let d = space.dimension();
    let base = d + usize::from(schema == Schema::Labeled);

    let mut lines = text
        .lines()
        .enumerate()
        .filter(|(_, l)| !l.trim().is_empty())
        .peekable();

    let mut weighted = false;
    if let Some((_, first)) = lines.peek() {
        if parse_row(first).is_none() {
            let cols: Vec<&str> = first.split(',').map(str::trim).collect();
            weighted = cols.len() == base + 1 && cols[base].eq_ignore_ascii_case("weight");
            lines.next();
        }
    }
    let width = base + usize::from(weighted);

    let mut points = Vec::new();
    let mut weights = Vec::new();
    for (idx, line) in lines {
        let row = idx + 1;
        let values = parse_row(line).ok_or_else(|| Error::Parse {
            path: path.to_path_buf(),
            row,
            message: format!("non-numeric field in {line:?}"),
        })?;
        if values.len() != width {
            return Err(Error::Parse {
                path: path.to_path_buf(),
                row,
                message: format!("expected {width} fields, found {}", values.len()),
            });
        }
        let label = (schema == Schema::Labeled).then(|| values[d]);
        let z = Point::new(values[..d].to_vec(), label);
        space.validate(&z).map_err(|e| Error::BoundViolation {
            row,
            message: e.to_string(),
        })?;
        points.push(z);
        if weighted {
            weights.push(values[base]);
        }
    }
    if points.is_empty() {
        return Err(Error::EmptyDataset);
    }
    if weighted {
        EmpiricalDistribution::new(points, weights)
    } else {
        EmpiricalDistribution::uniform(points)
    }
}

/// Writes `dist` as CSV with a header. Floats use the shortest decimal
/// representation that parses back to the same bits.
pub fn save_dataset(path: impl AsRef<Path>, dist: &EmpiricalDistribution) -> Result<()> {
    let mut out = String::new();
    let first = &dist.support()[0];
    let d = first.features.len();
    let labeled = first.label.is_some();
    let w0 = dist.weights()[0];
    let uniform = dist.weights().iter().all(|w| *w == w0) && w0 == 1.0 / dist.len() as f64;

    let mut header: Vec<String> = (1..=d).map(|i| format!("x{i}")).collect();
    if labeled {
        header.push("y".into());
    }
    if !uniform {
        header.push("weight".into());
    }
    out.push_str(&header.join(","));
    out.push('\n');
    for (z, w) in dist.iter() {
        let mut cols: Vec<String> = z.features.iter().map(|v| format!("{v:?}")).collect();
        if let Some(y) = z.label {
            cols.push(format!("{y:?}"));
        }
        if !uniform {
            cols.push(format!("{w:?}"));
        }
        out.push_str(&cols.join(","));
        out.push('\n');
    }
    write_atomic(path.as_ref(), out.as_bytes())
}

/// Write to a sibling temp file, then rename over the target.
pub fn write_atomic(path: &Path, bytes: &[u8]) -> Result<()> {
    let dir = path.parent().filter(|p| !p.as_os_str().is_empty());
    if let Some(dir) = dir {
        fs::create_dir_all(dir)?;
    }
    let name = path
        .file_name()
        .ok_or_else(|| Error::invalid(format!("not a file path: {}", path.display())))?;
    let tmp = path.with_file_name(format!(".{}.tmp", name.to_string_lossy()));
    {
        let mut f = fs::File::create(&tmp)?;
        f.write_all(bytes)?;
        f.sync_all()?;
    }
    fs::rename(&tmp, path)?;
    Ok(())
}
