/*
Copyright 2026 The spikecs Authors

Licensed under the Apache License, Version 2.0 (the "License");
you may not use this file except in compliance with the License.
You may obtain a copy of the License at

    http://www.apache.org/licenses/LICENSE-2.0

Unless required by applicable law or agreed to in writing, software
distributed under the License is distributed on an "AS IS" BASIS,
WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
See the License for the specific language governing permissions and
limitations under the License.
*/

//! Plain-text matrix and measurement files.
//!
//! Matrix CSV: a first line `<rows>,<cols>`, then `rows` lines of `cols`
//! comma-separated values in row-major order. Measurement CSV: one row per
//! spike with its `m` measurement values.

use std::fmt::Write as _;
use std::fs;
use std::path::Path;

use nalgebra::{DMatrix, DVector};

use crate::error::{Error, Result};

fn parse_err(path: &Path, row: usize, msg: impl Into<String>) -> Error {
    Error::Parse {
        path: path.to_path_buf(),
        row,
        msg: msg.into(),
    }
}

fn parse_row(line: &str, path: &Path, row: usize) -> Result<Vec<f64>> {
    line.split(',')
        .map(|f| {
            let f = f.trim();
            f.parse::<f64>()
                .map_err(|_| parse_err(path, row, format!("non-numeric field `{f}`")))
        })
        .collect()
}

pub fn matrix_to_csv(matrix: &DMatrix<f64>) -> String {
    let mut out = format!("{},{}\n", matrix.nrows(), matrix.ncols());
    for row in matrix.row_iter() {
        let line: Vec<String> = row.iter().map(|v| format!("{v:?}")).collect();
        writeln!(out, "{}", line.join(",")).unwrap();
    }
    out
}

pub fn save_matrix(matrix: &DMatrix<f64>, path: &Path) -> Result<()> {
    fs::write(path, matrix_to_csv(matrix)).map_err(|e| Error::io(path, e))
}

pub fn load_matrix(path: &Path) -> Result<DMatrix<f64>> {
    let text = fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
    let mut lines = text.lines().filter(|l| !l.trim().is_empty());
    let header = lines.next().ok_or_else(|| parse_err(path, 1, "missing header"))?;
    let dims: Vec<usize> = header
        .split(',')
        .map(|f| f.trim().parse::<usize>())
        .collect::<std::result::Result<_, _>>()
        .map_err(|_| parse_err(path, 1, format!("bad header `{header}`")))?;
    let [rows, cols] = dims[..] else {
        return Err(parse_err(path, 1, "header must be `rows,cols`"));
    };
    let mut values = Vec::with_capacity(rows * cols);
    let mut seen = 0;
    for (k, line) in lines.enumerate() {
        let row = parse_row(line, path, k + 2)?;
        if row.len() != cols {
            return Err(parse_err(path, k + 2, format!("expected {cols} fields, found {}", row.len())));
        }
        values.extend(row);
        seen += 1;
    }
    if seen != rows {
        return Err(parse_err(path, seen + 1, format!("expected {rows} rows, found {seen}")));
    }
    Ok(DMatrix::from_row_slice(rows, cols, &values))
}

pub fn save_measurements(measurements: &[DVector<f64>], path: &Path) -> Result<()> {
    let mut out = String::new();
    for y in measurements {
        let line: Vec<String> = y.iter().map(|v| format!("{v:?}")).collect();
        writeln!(out, "{}", line.join(",")).unwrap();
    }
    fs::write(path, out).map_err(|e| Error::io(path, e))
}

pub fn load_measurements(path: &Path) -> Result<Vec<DVector<f64>>> {
    let text = fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
    let mut out: Vec<DVector<f64>> = Vec::new();
    for (k, line) in text.lines().enumerate().filter(|(_, l)| !l.trim().is_empty()) {
        let row = parse_row(line, path, k + 1)?;
        if let Some(first) = out.first() {
            if first.len() != row.len() {
                return Err(parse_err(path, k + 1, "ragged measurement row"));
            }
        }
        out.push(DVector::from_vec(row));
    }
    Ok(out)
}
