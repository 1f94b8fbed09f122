use std::fs::File;
use std::io::{BufRead, BufReader, BufWriter, Write};
use std::path::Path;

use crate::error::{Error, Result};
use crate::matrix::DenseMatrix;

/// Shortest representation that parses back to the same `f64`. Very large
/// or very small magnitudes use exponent notation.
pub fn format_value(v: f64) -> String {
    let a = v.abs();
    if v == 0.0 || (1e-5..1e16).contains(&a) {
        format!("{v}")
    } else {
        format!("{v:e}")
    }
}

pub fn write_matrix_csv(a: &DenseMatrix, path: impl AsRef<Path>) -> Result<()> {
    let mut out = BufWriter::new(File::create(path.as_ref())?);
    let mut line = String::new();
    for i in 0..a.rows() {
        line.clear();
        for (j, &v) in a.row(i).iter().enumerate() {
            if j > 0 {
                line.push(',');
            }
            line.push_str(&format_value(v));
        }
        line.push('\n');
        out.write_all(line.as_bytes())?;
    }
    out.flush()?;
    Ok(())
}

pub fn read_matrix_csv(path: impl AsRef<Path>) -> Result<DenseMatrix> {
    let reader = BufReader::new(File::open(path.as_ref())?);
    let mut data = Vec::new();
    let mut cols = None;
    let mut rows = 0;
    for (idx, line) in reader.lines().enumerate() {
        let line = line?;
        let line = line.trim();
        if line.is_empty() {
            continue;
        }
        let before = data.len();
        for field in line.split(',') {
            let v: f64 = field.trim().parse().map_err(|_| Error::Parse {
                line: idx + 1,
                msg: format!("`{}` is not a number", field.trim()),
            })?;
            data.push(v);
        }
        let width = data.len() - before;
        match cols {
            None => cols = Some(width),
            Some(c) if c != width => {
                return Err(Error::Parse {
                    line: idx + 1,
                    msg: format!("expected {c} fields, found {width}"),
                })
            }
            _ => {}
        }
        rows += 1;
    }
    let cols = cols.ok_or(Error::Parse {
        line: 0,
        msg: "file holds no rows".into(),
    })?;
    DenseMatrix::new(rows, cols, data)
}
