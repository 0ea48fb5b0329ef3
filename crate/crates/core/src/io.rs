//! CSV ingestion and export.

use std::fs::File;
use std::io::Write;
use std::path::Path;

use log::{info, warn};

use crate::data::{Blocks, Dataset};
use crate::error::{Error, Result};

/// Which columns of a CSV file to read.
#[derive(Debug, Clone, Default)]
pub struct CsvSpec {
    pub response: String,
    pub block: Option<String>,
    /// Covariates in the order wanted. `None` takes every other column in
    /// file order.
    pub covariates: Option<Vec<String>>,
}

impl CsvSpec {
    pub fn new(response: impl Into<String>) -> Self {
        CsvSpec {
            response: response.into(),
            ..CsvSpec::default()
        }
    }
}

fn parse_cell(cell: &str) -> Option<f64> {
    cell.trim().parse::<f64>().ok().filter(|v| v.is_finite())
}

/// Reads a headed CSV file. Rows with an empty or non-numeric cell in any
/// used column (or an empty block label) are dropped and counted.
pub fn load_csv(path: &Path, spec: &CsvSpec) -> Result<Dataset> {
    let mut reader = csv::ReaderBuilder::new()
        .has_headers(true)
        .flexible(false)
        .from_path(path)?;
    let header: Vec<String> = reader.headers()?.iter().map(|h| h.trim().to_string()).collect();
    let find = |name: &str| {
        header
            .iter()
            .position(|h| h == name)
            .ok_or_else(|| Error::MissingColumn(name.to_string()))
    };
    let y_idx = find(&spec.response)?;
    let block_idx = spec.block.as_deref().map(find).transpose()?;
    let cov_idx: Vec<usize> = match &spec.covariates {
        Some(names) => names.iter().map(|n| find(n)).collect::<Result<_>>()?,
        None => (0..header.len())
            .filter(|&i| i != y_idx && Some(i) != block_idx)
            .collect(),
    };
    if cov_idx.is_empty() {
        return Err(Error::InvalidConfig("no covariate columns".into()));
    }

    let mut y = Vec::new();
    let mut columns: Vec<Vec<f64>> = vec![Vec::new(); cov_idx.len()];
    let mut labels = Vec::new();
    let mut dropped = 0usize;
    for (row, record) in reader.records().enumerate() {
        let record = record.map_err(|e| Error::Parse {
            row: row + 1,
            column: e
                .position()
                .map_or_else(String::new, |p| format!("line {}", p.line())),
            message: e.to_string(),
        })?;
        let values: Option<Vec<f64>> = std::iter::once(y_idx)
            .chain(cov_idx.iter().copied())
            .map(|i| parse_cell(&record[i]))
            .collect();
        let label = block_idx.map(|i| record[i].trim().to_string());
        match values {
            Some(v) if label.as_ref().is_none_or(|l| !l.is_empty()) => {
                y.push(v[0]);
                for (col, value) in columns.iter_mut().zip(&v[1..]) {
                    col.push(*value);
                }
                if let Some(l) = label {
                    labels.push(l);
                }
            }
            _ => dropped += 1,
        }
    }
    if dropped > 0 {
        warn!("dropped {dropped} rows with missing or non-numeric values");
    }
    info!("read {} rows from {}", y.len(), path.display());
    let names = cov_idx.iter().map(|&i| header[i].clone()).collect();
    let blocks = block_idx.map(|_| Blocks::from_labels(&labels));
    Dataset::from_columns(y, &columns, names, blocks)
}

/// Writes the dataset with the response first (named `response_name`), then
/// the covariates, then the block label if present. Floats use the shortest
/// representation that parses back to the same value.
pub fn write_csv(d: &Dataset, response_name: &str, path: &Path) -> Result<()> {
    let mut w = csv::Writer::from_writer(File::create(path)?);
    let mut header = vec![response_name.to_string()];
    header.extend(d.names().iter().cloned());
    if d.blocks().is_some() {
        header.push("block".into());
    }
    w.write_record(&header)?;
    for r in 0..d.n() {
        let mut rec: Vec<String> = vec![d.y()[r].to_string()];
        rec.extend((0..d.n_cols()).map(|c| d.x()[(r, c)].to_string()));
        if let Some(b) = d.blocks() {
            rec.push(b.levels()[b.labels()[r]].clone());
        }
        w.write_record(&rec)?;
    }
    w.flush()?;
    Ok(())
}

/// Pretty JSON followed by a newline.
pub fn write_json<T: serde::Serialize>(value: &T, path: &Path) -> Result<()> {
    let mut f = File::create(path)?;
    serde_json::to_writer_pretty(&mut f, value)?;
    f.write_all(b"\n")?;
    Ok(())
}

pub fn read_json<T: serde::de::DeserializeOwned>(path: &Path) -> Result<T> {
    Ok(serde_json::from_reader(File::open(path)?)?)
}

#[cfg(test)]
mod tests {
    use super::*;
    use std::fs;

    fn write(dir: &tempfile::TempDir, body: &str) -> std::path::PathBuf {
        let p = dir.path().join("in.csv");
        fs::write(&p, body).unwrap();
        p
    }

    #[test]
    fn reads_well_formed_file() {
        let dir = tempfile::tempdir().unwrap();
        let p = write(&dir, "a,y,b\n1,2,3\n4,5,6\n7,8,9.5\n");
        let d = load_csv(&p, &CsvSpec::new("y")).unwrap();
        assert_eq!(d.n(), 3);
        assert_eq!(d.names(), &["a".to_string(), "b".to_string()]);
        assert_eq!(d.y(), &[2.0, 5.0, 8.0]);
        assert_eq!(d.column(1), &[3.0, 6.0, 9.5]);
    }

    #[test]
    fn drops_bad_rows() {
        let dir = tempfile::tempdir().unwrap();
        let p = write(&dir, "y,x,z\n1,2,3\n2,oops,4\n3,,5\n4,5,6\n");
        let d = load_csv(&p, &CsvSpec::new("y")).unwrap();
        assert_eq!(d.n(), 2);
        assert_eq!(d.y(), &[1.0, 4.0]);
    }

    #[test]
    fn unused_columns_do_not_drop_rows() {
        let dir = tempfile::tempdir().unwrap();
        let p = write(&dir, "y,x,junk\n1,2,no\n2,3,\n3,5,x\n");
        let spec = CsvSpec {
            covariates: Some(vec!["x".into()]),
            ..CsvSpec::new("y")
        };
        assert_eq!(load_csv(&p, &spec).unwrap().n(), 3);
    }

    #[test]
    fn missing_response() {
        let dir = tempfile::tempdir().unwrap();
        let p = write(&dir, "a,b\n1,2\n");
        assert!(matches!(load_csv(&p, &CsvSpec::new("y")), Err(Error::MissingColumn(c)) if c == "y"));
    }

    #[test]
    fn ragged_row_is_a_parse_error() {
        let dir = tempfile::tempdir().unwrap();
        let p = write(&dir, "y,x\n1,2\n3\n");
        assert!(matches!(load_csv(&p, &CsvSpec::new("y")), Err(Error::Parse { row: 2, .. })));
    }

    #[test]
    fn block_column() {
        let dir = tempfile::tempdir().unwrap();
        let p = write(&dir, "y,x,g\n1,2,a\n2,3,b\n3,4,a\n4,1,\n");
        let spec = CsvSpec {
            block: Some("g".into()),
            ..CsvSpec::new("y")
        };
        let d = load_csv(&p, &spec).unwrap();
        assert_eq!(d.n(), 3);
        assert_eq!(d.names(), &["x".to_string()]);
        assert_eq!(d.blocks().unwrap().levels().len(), 2);
    }

    #[test]
    fn round_trip_is_exact() {
        let dir = tempfile::tempdir().unwrap();
        let y = vec![0.1 + 0.2, -1.0 / 3.0, 1e-300, 12345.678901234567];
        let x = vec![std::f64::consts::PI, 2f64.sqrt(), -0.0, 7.0];
        let d = Dataset::from_columns(y, &[x], vec!["x".into()], None).unwrap();
        let p = dir.path().join("out.csv");
        write_csv(&d, "y", &p).unwrap();
        let back = load_csv(&p, &CsvSpec::new("y")).unwrap();
        assert_eq!(back.y(), d.y());
        assert_eq!(back.column(0), d.column(0));
    }
}
