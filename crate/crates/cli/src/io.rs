//! CSV input and output.

use anyhow::{bail, Context, Result};
use specweight::WeightProfile;
use std::fs::File;
use std::io::BufWriter;
use std::path::Path;

/// Writes `header` and numeric `rows`. Floats use the shortest round-trip
/// representation so repeated runs are byte-identical.
pub fn write_csv(path: &Path, header: &[&str], rows: impl IntoIterator<Item = Vec<f64>>) -> Result<()> {
    let file = File::create(path).with_context(|| format!("cannot create {}", path.display()))?;
    let mut w = csv::Writer::from_writer(BufWriter::new(file));
    w.write_record(header)?;
    for row in rows {
        w.write_record(row.iter().map(|v| v.to_string()))?;
    }
    w.flush()?;
    Ok(())
}

pub fn write_matrix(path: &Path, m: &nalgebra::DMatrix<f64>) -> Result<()> {
    let header: Vec<String> = (0..m.ncols()).map(|j| format!("c{j}")).collect();
    let header: Vec<&str> = header.iter().map(String::as_str).collect();
    write_csv(path, &header, (0..m.nrows()).map(|i| m.row(i).iter().copied().collect()))
}

/// `(r, w)` rows: `w` on `[r_k, r_{k+1})`, with a closing row at `r = a`
/// whose `w` repeats the last cell.
pub fn write_weight(path: &Path, grid: &[f64], w: &[f64], mass: Option<&[f64]>) -> Result<()> {
    let rows = grid.iter().enumerate().map(|(k, &r)| {
        let wk = w[k.min(w.len() - 1)];
        match mass {
            Some(m) => vec![r, m[k], wk],
            None => vec![r, wk],
        }
    });
    if mass.is_some() {
        write_csv(path, &["r", "mass", "w"], rows)
    } else {
        write_csv(path, &["r", "w"], rows)
    }
}

/// Reads a weight CSV with `r` and `w` columns (any order, extra columns
/// ignored). The last row only closes the grid.
pub fn read_weight(path: &Path) -> Result<WeightProfile> {
    let mut rdr = csv::Reader::from_path(path).with_context(|| format!("cannot read {}", path.display()))?;
    let headers = rdr.headers()?.clone();
    let col = |name: &str| headers.iter().position(|h| h.trim() == name);
    let (Some(ir), Some(iw)) = (col("r"), col("w")) else {
        bail!("{}: header must contain `r` and `w` columns", path.display());
    };
    let mut grid = Vec::new();
    let mut w = Vec::new();
    for (line, rec) in rdr.records().enumerate() {
        let rec = rec?;
        let num = |i: usize| -> Result<f64> {
            rec.get(i)
                .unwrap_or("")
                .trim()
                .parse()
                .with_context(|| format!("{}: bad number on data row {}", path.display(), line + 1))
        };
        grid.push(num(ir)?);
        w.push(num(iw)?);
    }
    if grid.len() < 2 {
        bail!("{}: need at least two rows", path.display());
    }
    w.pop();
    Ok(WeightProfile::new(grid, w)?)
}
