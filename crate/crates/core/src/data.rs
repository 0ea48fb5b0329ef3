//! In-memory regression datasets.

use nalgebra::DMatrix;

use crate::error::{Error, Result};

/// Categorical design strata, one label per row.
#[derive(Debug, Clone, PartialEq)]
pub struct Blocks {
    labels: Vec<usize>,
    levels: Vec<String>,
}

impl Blocks {
    /// Builds strata from raw string labels. Levels are numbered in order of
    /// first appearance.
    pub fn from_labels<S: AsRef<str>>(raw: &[S]) -> Self {
        let mut levels: Vec<String> = Vec::new();
        let labels = raw
            .iter()
            .map(|s| {
                let s = s.as_ref();
                match levels.iter().position(|l| l == s) {
                    Some(i) => i,
                    None => {
                        levels.push(s.to_string());
                        levels.len() - 1
                    }
                }
            })
            .collect();
        Blocks { labels, levels }
    }

    pub fn new(labels: Vec<usize>, levels: Vec<String>) -> Self {
        Blocks { labels, levels }
    }

    pub fn labels(&self) -> &[usize] {
        &self.labels
    }

    pub fn levels(&self) -> &[String] {
        &self.levels
    }

    pub fn len(&self) -> usize {
        self.labels.len()
    }

    pub fn is_empty(&self) -> bool {
        self.labels.is_empty()
    }

    /// Row indices belonging to each level, in level order.
    pub fn members(&self) -> Vec<Vec<usize>> {
        let mut out = vec![Vec::new(); self.levels.len()];
        for (row, &label) in self.labels.iter().enumerate() {
            if let Some(bucket) = out.get_mut(label) {
                bucket.push(row);
            }
        }
        out
    }

    fn subset(&self, rows: &[usize]) -> Blocks {
        Blocks {
            labels: rows.iter().map(|&r| self.labels[r]).collect(),
            levels: self.levels.clone(),
        }
    }
}

/// Response vector, named covariate matrix and optional design strata.
///
/// Construction goes through [`Dataset::new`], which enforces the invariants
/// (at least one row, finite cells, consistent lengths, nonempty strata).
#[derive(Debug, Clone, PartialEq)]
pub struct Dataset {
    y: Vec<f64>,
    x: DMatrix<f64>,
    names: Vec<String>,
    blocks: Option<Blocks>,
}

impl Dataset {
    pub fn new(
        y: Vec<f64>,
        x: DMatrix<f64>,
        names: Vec<String>,
        blocks: Option<Blocks>,
    ) -> Result<Self> {
        validate_dataset(Dataset {
            y,
            x,
            names,
            blocks,
        })
    }

    /// Builds a dataset from covariate columns.
    pub fn from_columns(
        y: Vec<f64>,
        columns: &[Vec<f64>],
        names: Vec<String>,
        blocks: Option<Blocks>,
    ) -> Result<Self> {
        let n = y.len();
        for col in columns {
            if col.len() != n {
                return Err(Error::LengthMismatch {
                    what: "covariate column",
                    expected: n,
                    got: col.len(),
                });
            }
        }
        let x = DMatrix::from_fn(n, columns.len(), |r, c| columns[c][r]);
        Dataset::new(y, x, names, blocks)
    }

    pub fn n(&self) -> usize {
        self.y.len()
    }

    pub fn n_cols(&self) -> usize {
        self.x.ncols()
    }

    pub fn y(&self) -> &[f64] {
        &self.y
    }

    pub fn x(&self) -> &DMatrix<f64> {
        &self.x
    }

    pub fn names(&self) -> &[String] {
        &self.names
    }

    pub fn blocks(&self) -> Option<&Blocks> {
        self.blocks.as_ref()
    }

    pub fn column(&self, j: usize) -> &[f64] {
        let n = self.n();
        &self.x.as_slice()[j * n..(j + 1) * n]
    }

    pub fn column_index(&self, name: &str) -> Result<usize> {
        self.names
            .iter()
            .position(|n| n == name)
            .ok_or_else(|| Error::MissingColumn(name.to_string()))
    }

    pub fn check_columns(&self, columns: &[usize]) -> Result<()> {
        match columns.iter().find(|&&c| c >= self.n_cols()) {
            Some(c) => Err(Error::MissingColumn(format!("#{c}"))),
            None => Ok(()),
        }
    }

    /// Rows `rows` (repeats allowed) as a new dataset.
    pub fn subset(&self, rows: &[usize]) -> Dataset {
        let x = DMatrix::from_fn(rows.len(), self.n_cols(), |r, c| self.x[(rows[r], c)]);
        Dataset {
            y: rows.iter().map(|&r| self.y[r]).collect(),
            x,
            names: self.names.clone(),
            blocks: self.blocks.as_ref().map(|b| b.subset(rows)),
        }
    }

    /// Same rows, with the covariates replaced. Used by transforms that keep
    /// the row structure.
    pub(crate) fn with_parts(&self, y: Vec<f64>, x: DMatrix<f64>) -> Dataset {
        Dataset {
            y,
            x,
            names: self.names.clone(),
            blocks: self.blocks.clone(),
        }
    }
}

/// Checks the dataset invariants and hands the dataset back unchanged.
pub fn validate_dataset(d: Dataset) -> Result<Dataset> {
    let n = d.y.len();
    if n == 0 {
        return Err(Error::InvalidConfig("dataset has no rows".into()));
    }
    if d.x.nrows() != n {
        return Err(Error::LengthMismatch {
            what: "covariate rows",
            expected: n,
            got: d.x.nrows(),
        });
    }
    if d.names.len() != d.x.ncols() {
        return Err(Error::LengthMismatch {
            what: "column names",
            expected: d.x.ncols(),
            got: d.names.len(),
        });
    }
    if let Some(row) = d.y.iter().position(|v| !v.is_finite()) {
        return Err(Error::NonFinite {
            row,
            column: "<response>".into(),
        });
    }
    for c in 0..d.x.ncols() {
        if let Some(row) = d.column(c).iter().position(|v| !v.is_finite()) {
            return Err(Error::NonFinite {
                row,
                column: d.names[c].clone(),
            });
        }
    }
    if let Some(blocks) = &d.blocks {
        if blocks.len() != n {
            return Err(Error::LengthMismatch {
                what: "block labels",
                expected: n,
                got: blocks.len(),
            });
        }
        if let Some(&bad) = blocks.labels.iter().find(|&&l| l >= blocks.levels.len()) {
            return Err(Error::InvalidConfig(format!("block label {bad} has no level")));
        }
        for (level, members) in blocks.members().iter().enumerate() {
            if members.is_empty() {
                return Err(Error::EmptyStratum(blocks.levels[level].clone()));
            }
        }
    }
    Ok(d)
}
