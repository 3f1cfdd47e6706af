//! CSV datasets: a header row, comma separators, decimal points.

use std::path::Path;

use rand::seq::SliceRandom;
use shapesr_core::{Dataset, Matrix};

use crate::error::{io_err, Error, Result};

/// Reads a CSV file whose header names the columns; `target` becomes `y`
/// and every other column becomes an input, in file order.
pub fn load_csv(path: &Path, target: &str) -> Result<Dataset> {
    let file = std::fs::File::open(path).map_err(io_err(path))?;
    read_csv(file, path, target)
}

pub fn read_csv<R: std::io::Read>(reader: R, path: &Path, target: &str) -> Result<Dataset> {
    let csv_err = |message: String| Error::Csv {
        path: path.to_path_buf(),
        message,
    };
    let mut rdr = csv::ReaderBuilder::new()
        .has_headers(true)
        .trim(csv::Trim::All)
        .from_reader(reader);
    let headers: Vec<String> = rdr
        .headers()
        .map_err(|e| csv_err(e.to_string()))?
        .iter()
        .map(str::to_string)
        .collect();
    if headers.is_empty() || headers.iter().all(String::is_empty) {
        return Err(csv_err("empty file".into()));
    }
    let t = headers.iter().position(|h| h == target).ok_or_else(|| {
        csv_err(format!(
            "target column '{target}' not found in header {headers:?}"
        ))
    })?;
    let columns: Vec<String> = headers
        .iter()
        .enumerate()
        .filter(|(i, _)| *i != t)
        .map(|(_, h)| h.clone())
        .collect();
    let mut rows = Vec::new();
    let mut y = Vec::new();
    for (i, rec) in rdr.records().enumerate() {
        // header is line 1, first data row is line 2
        let row_no = i + 2;
        let row_err = |message: String| Error::CsvRow {
            path: path.to_path_buf(),
            row: row_no,
            message,
        };
        let rec = rec.map_err(|e| row_err(e.to_string()))?;
        if rec.len() != headers.len() {
            return Err(row_err(format!(
                "expected {} cells, found {}",
                headers.len(),
                rec.len()
            )));
        }
        let mut row = Vec::with_capacity(columns.len());
        for (j, cell) in rec.iter().enumerate() {
            let v: f64 = cell
                .parse()
                .map_err(|_| row_err(format!("column '{}': cannot parse '{cell}'", headers[j])))?;
            if !v.is_finite() {
                return Err(row_err(format!(
                    "column '{}': non-finite value '{cell}'",
                    headers[j]
                )));
            }
            if j == t {
                y.push(v);
            } else {
                row.push(v);
            }
        }
        rows.push(row);
    }
    if rows.is_empty() {
        return Err(csv_err("no data rows".into()));
    }
    let x = Matrix::from_rows(&rows)?;
    Ok(Dataset::new(x, y, columns, target.to_string())?)
}

/// Writes a dataset with its column names and the target as the last column.
pub fn write_csv(path: &Path, data: &Dataset) -> Result<()> {
    let mut w = csv::Writer::from_path(path).map_err(|e| Error::Csv {
        path: path.to_path_buf(),
        message: e.to_string(),
    })?;
    let wrap = |e: csv::Error| Error::Csv {
        path: path.to_path_buf(),
        message: e.to_string(),
    };
    let mut header = data.columns.clone();
    header.push(data.target.clone());
    w.write_record(&header).map_err(wrap)?;
    for (row, y) in data.x.iter_rows().zip(&data.y) {
        let cells: Vec<String> = row
            .iter()
            .chain(std::iter::once(y))
            .map(|v| format!("{v:?}"))
            .collect();
        w.write_record(&cells).map_err(wrap)?;
    }
    w.flush().map_err(io_err(path))
}

/// Shuffles rows with `seed` and splits off the first `ratio` share as
/// training data.
pub fn shuffle_split(data: &Dataset, ratio: f64, seed: u64) -> Result<(Dataset, Dataset)> {
    if !(0.0..=1.0).contains(&ratio) {
        return Err(Error::Config(format!("split ratio {ratio} not in [0, 1]")));
    }
    let mut idx: Vec<usize> = (0..data.len()).collect();
    idx.shuffle(&mut shapesr_core::seeded_rng(seed));
    let rows: Vec<&[f64]> = idx.iter().map(|&i| data.x.row(i)).collect();
    let y: Vec<f64> = idx.iter().map(|&i| data.y[i]).collect();
    let shuffled = Dataset::new(
        Matrix::from_rows(&rows)?,
        y,
        data.columns.clone(),
        data.target.clone(),
    )?;
    let n_train = (ratio * data.len() as f64).round() as usize;
    Ok(shuffled.split_at(n_train))
}
