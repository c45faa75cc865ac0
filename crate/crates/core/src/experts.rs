//! Per-row class-score matrices and their on-disk text format.
//!
//! A `ProbMatrix` is the common currency between classifiers and the fusion
//! stage: one row per evaluated sample, one column per class. Externally
//! trained models (e.g. neural networks) join the pipeline by writing their
//! soft outputs in the format read by [`load_expert`]:
//!
//! ```text
//! expert,<name>,rows,<N>,stochastic,<0|1>
//! <v0>,<v1>,...,<v9>        (N lines, one per sample)
//! ```
//!
//! Values are written with 17 significant digits so a load/export cycle
//! reproduces every `f64` bit for bit. Rows of a stochastic matrix must sum
//! to 1 within 1e-3 in the file and are renormalized on load, so in memory
//! they sum to 1 within 1e-12.

use std::fs;
use std::path::Path;

use ndarray::{Array2, ArrayView1, Axis};

use crate::dataset::NUM_CLASSES;
use crate::error::{Error, Result};

/// Index of a score row's maximum; the lowest class index wins ties.
pub fn argmax_row(row: ArrayView1<f64>) -> u8 {
    let mut best = 0usize;
    for (j, &v) in row.iter().enumerate() {
        if v > row[best] {
            best = j;
        }
    }
    best as u8
}

/// Tolerance for row sums of stochastic matrices in files.
pub const ROW_SUM_TOLERANCE: f64 = 1e-3;

/// Class scores for a batch of samples, tagged with the producer's name.
#[derive(Debug, Clone, PartialEq)]
pub struct ProbMatrix {
    /// `N x NUM_CLASSES`, non-negative and finite.
    pub scores: Array2<f64>,
    /// Identifies the producing model in reports and weight files.
    pub name: String,
    /// Whether rows are normalized distributions (true for classifier
    /// outputs, false for weighted sums of them).
    pub row_stochastic: bool,
}

fn check_name(name: &str) -> Result<()> {
    if name.is_empty() {
        return Err(Error::Config("expert name is empty".into()));
    }
    if name.contains(',') || name.contains('\n') || name.contains('\r') {
        return Err(Error::Config(format!("expert name {name:?} holds a comma or newline")));
    }
    Ok(())
}

impl ProbMatrix {
    /// Wrap raw scores, enforcing the type's invariants. Stochastic rows are
    /// checked against [`ROW_SUM_TOLERANCE`] and renormalized.
    pub fn new(scores: Array2<f64>, name: impl Into<String>, row_stochastic: bool) -> Result<Self> {
        let name = name.into();
        check_name(&name)?;
        if scores.ncols() != NUM_CLASSES {
            return Err(Error::Shape(format!(
                "score matrix has {} columns, expected {NUM_CLASSES}",
                scores.ncols()
            )));
        }
        if scores.iter().any(|v| !v.is_finite()) {
            return Err(Error::Numeric(format!("scores of {name:?} hold non-finite values")));
        }
        if scores.iter().any(|&v| v < 0.0) {
            return Err(Error::Config(format!("scores of {name:?} hold negative values")));
        }
        let mut scores = scores;
        if row_stochastic {
            for (i, mut row) in scores.rows_mut().into_iter().enumerate() {
                let sum = row.sum();
                if (sum - 1.0).abs() > ROW_SUM_TOLERANCE {
                    return Err(Error::Config(format!(
                        "data row {i} of {name:?} sums to {sum}, expected 1"
                    )));
                }
                row /= sum;
            }
        }
        Ok(ProbMatrix { scores, name, row_stochastic })
    }

    pub fn len(&self) -> usize {
        self.scores.nrows()
    }

    pub fn is_empty(&self) -> bool {
        self.len() == 0
    }

    /// Copy the given rows (in the given order) into a new matrix.
    pub fn select(&self, indices: &[usize]) -> Result<ProbMatrix> {
        if let Some(&bad) = indices.iter().find(|&&i| i >= self.len()) {
            return Err(Error::Shape(format!(
                "row index {bad} out of range for {} rows",
                self.len()
            )));
        }
        Ok(ProbMatrix {
            scores: self.scores.select(Axis(0), indices),
            name: self.name.clone(),
            row_stochastic: self.row_stochastic,
        })
    }

    /// Rename in place, with the same restrictions as construction.
    pub fn with_name(mut self, name: impl Into<String>) -> Result<ProbMatrix> {
        let name = name.into();
        check_name(&name)?;
        self.name = name;
        Ok(self)
    }
}

/// Parse an expert file. When `expected_rows` is given, both the header
/// count and the actual line count must match it.
pub fn load_expert(path: impl AsRef<Path>, expected_rows: Option<usize>) -> Result<ProbMatrix> {
    let path = path.as_ref();
    let text = fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
    let mut lines = text.lines();
    let header = lines
        .next()
        .ok_or_else(|| Error::Format(format!("{}: empty expert file", path.display())))?;
    let fields: Vec<&str> = header.split(',').collect();
    if fields.len() != 6 || fields[0] != "expert" || fields[2] != "rows" || fields[4] != "stochastic"
    {
        return Err(Error::Format(format!("{}: bad header {header:?}", path.display())));
    }
    let name = fields[1].to_string();
    if name.is_empty() {
        return Err(Error::Format(format!("{}: empty expert name", path.display())));
    }
    let rows: usize = fields[3]
        .parse()
        .map_err(|_| Error::Format(format!("{}: bad row count {:?}", path.display(), fields[3])))?;
    let row_stochastic = match fields[5] {
        "0" => false,
        "1" => true,
        other => {
            return Err(Error::Format(format!(
                "{}: stochastic flag {other:?} is not 0 or 1",
                path.display()
            )))
        }
    };
    if let Some(expected) = expected_rows {
        if rows != expected {
            return Err(Error::Format(format!(
                "{}: header says {rows} rows, expected {expected}",
                path.display()
            )));
        }
    }
    let mut scores = Array2::<f64>::zeros((rows, NUM_CLASSES));
    let mut parsed = 0usize;
    for line in lines {
        if line.is_empty() {
            continue;
        }
        if parsed == rows {
            return Err(Error::Format(format!(
                "{}: more than {rows} data rows",
                path.display()
            )));
        }
        let i = parsed;
        let mut row = scores.row_mut(i);
        let mut count = 0;
        for (j, cell) in line.split(',').enumerate() {
            if j >= NUM_CLASSES {
                count = j + 1;
                break;
            }
            let v: f64 = cell.parse().map_err(|_| {
                Error::Format(format!("{}: bad value {cell:?} in data row {i}", path.display()))
            })?;
            if !v.is_finite() || v < 0.0 {
                return Err(Error::Format(format!(
                    "{}: value {v} in data row {i} is not a finite non-negative number",
                    path.display()
                )));
            }
            row[j] = v;
            count = j + 1;
        }
        if count != NUM_CLASSES {
            return Err(Error::Format(format!(
                "{}: data row {i} has {count} values, expected {NUM_CLASSES}",
                path.display()
            )));
        }
        if row_stochastic {
            let sum = row.sum();
            if (sum - 1.0).abs() > ROW_SUM_TOLERANCE {
                return Err(Error::Format(format!(
                    "{}: data row {i} sums to {sum}, expected 1 within {ROW_SUM_TOLERANCE}",
                    path.display()
                )));
            }
            row /= sum;
        }
        parsed += 1;
    }
    if parsed != rows {
        return Err(Error::Format(format!(
            "{}: header says {rows} rows but file has {parsed}",
            path.display()
        )));
    }
    // Invariants were enforced inline; bypass the renormalizing constructor
    // so loaded rows are exactly the normalized values computed above.
    Ok(ProbMatrix { scores, name, row_stochastic })
}

/// Write an expert file that [`load_expert`] reproduces bit for bit.
pub fn export_expert(pm: &ProbMatrix, path: impl AsRef<Path>) -> Result<()> {
    let path = path.as_ref();
    check_name(&pm.name)?;
    let mut text = format!(
        "expert,{},rows,{},stochastic,{}\n",
        pm.name,
        pm.len(),
        if pm.row_stochastic { 1 } else { 0 }
    );
    for row in pm.scores.rows() {
        let cells: Vec<String> = row.iter().map(|v| format!("{v:.16e}")).collect();
        text.push_str(&cells.join(","));
        text.push('\n');
    }
    fs::write(path, text).map_err(|e| Error::io(path, e))
}
