//! Matrix and group-file formats.
//!
//! DSMX layout: `b"DSMX"`, `u32` version (1), `u64` rows, `u64` cols, then
//! `rows * cols` little-endian `f64` in row-major order. Header integers are
//! little-endian as well.

use std::fs;
use std::io::{BufRead, BufReader, Read, Write};
use std::path::Path;

use crate::dictionary::{Dictionary, GroupPartition, IndexSet};
use crate::error::{Error, Result};

pub const DSMX_MAGIC: &[u8; 4] = b"DSMX";
pub const DSMX_VERSION: u32 = 1;

/// Row-major dense matrix as read from disk.
#[derive(Clone, Debug, PartialEq)]
pub struct Matrix {
    pub rows: usize,
    pub cols: usize,
    pub data: Vec<f64>,
}

impl Matrix {
    pub fn from_dictionary(d: &Dictionary) -> Matrix {
        let (rows, cols) = (d.rows(), d.cols());
        let mut data = vec![0.0; rows * cols];
        for c in 0..cols {
            for (r, v) in d.column(c).iter().enumerate() {
                data[r * cols + c] = *v;
            }
        }
        Matrix { rows, cols, data }
    }

    pub fn column_vector(v: &[f64]) -> Matrix {
        Matrix {
            rows: v.len(),
            cols: 1,
            data: v.to_vec(),
        }
    }

    pub fn to_dictionary(&self, check_unit_norm: bool) -> Result<Dictionary> {
        Dictionary::from_row_major(self.rows, self.cols, &self.data, check_unit_norm)
    }

    /// Flattens an `N x 1` or `1 x N` matrix.
    pub fn into_vector(self) -> Result<Vec<f64>> {
        if self.rows != 1 && self.cols != 1 {
            return Err(Error::Format(format!(
                "expected a vector, got a {}x{} matrix",
                self.rows, self.cols
            )));
        }
        Ok(self.data)
    }
}

pub fn write_dsmx<W: Write>(mut w: W, m: &Matrix) -> Result<()> {
    w.write_all(DSMX_MAGIC)?;
    w.write_all(&DSMX_VERSION.to_le_bytes())?;
    w.write_all(&(m.rows as u64).to_le_bytes())?;
    w.write_all(&(m.cols as u64).to_le_bytes())?;
    let mut buf = Vec::with_capacity(m.data.len() * 8);
    for v in &m.data {
        buf.extend_from_slice(&v.to_le_bytes());
    }
    w.write_all(&buf)?;
    Ok(())
}

pub fn read_dsmx<R: Read>(mut r: R) -> Result<Matrix> {
    let mut head = [0u8; 24];
    r.read_exact(&mut head)
        .map_err(|e| Error::Format(format!("truncated DSMX header: {e}")))?;
    if &head[0..4] != DSMX_MAGIC {
        return Err(Error::Format("bad DSMX magic".into()));
    }
    let version = u32::from_le_bytes(head[4..8].try_into().unwrap());
    if version != DSMX_VERSION {
        return Err(Error::Format(format!("unsupported DSMX version {version}")));
    }
    let rows = u64::from_le_bytes(head[8..16].try_into().unwrap()) as usize;
    let cols = u64::from_le_bytes(head[16..24].try_into().unwrap()) as usize;
    let n = rows
        .checked_mul(cols)
        .ok_or_else(|| Error::Format("DSMX dimensions overflow".into()))?;
    let mut bytes = Vec::new();
    r.read_to_end(&mut bytes)?;
    if bytes.len() != n * 8 {
        return Err(Error::Format(format!(
            "DSMX payload has {} bytes, expected {}",
            bytes.len(),
            n * 8
        )));
    }
    let data = bytes
        .chunks_exact(8)
        .map(|c| f64::from_le_bytes(c.try_into().unwrap()))
        .collect();
    Ok(Matrix { rows, cols, data })
}

/// Comma-separated values, one matrix row per line.
pub fn read_csv_matrix<R: Read>(r: R) -> Result<Matrix> {
    let mut rdr = csv::ReaderBuilder::new()
        .has_headers(false)
        .comment(Some(b'#'))
        .trim(csv::Trim::All)
        .from_reader(r);
    let mut data = Vec::new();
    let mut cols = None;
    let mut rows = 0;
    for rec in rdr.records() {
        let rec = rec?;
        if cols.is_some_and(|c| c != rec.len()) {
            return Err(Error::Format(format!(
                "row {rows} has {} fields, expected {}",
                rec.len(),
                cols.unwrap()
            )));
        }
        cols = Some(rec.len());
        for f in rec.iter() {
            data.push(
                f.parse::<f64>()
                    .map_err(|e| Error::Format(format!("row {rows}: {e}")))?,
            );
        }
        rows += 1;
    }
    Ok(Matrix {
        rows,
        cols: cols.unwrap_or(0),
        data,
    })
}

/// Reads a matrix, picking the format from the extension (`.csv` or DSMX).
pub fn read_matrix(path: &Path) -> Result<Matrix> {
    let f = fs::File::open(path)?;
    if path.extension().is_some_and(|e| e.eq_ignore_ascii_case("csv")) {
        read_csv_matrix(BufReader::new(f))
    } else {
        read_dsmx(BufReader::new(f))
    }
}

pub fn write_matrix(path: &Path, m: &Matrix) -> Result<()> {
    let f = fs::File::create(path)?;
    let mut w = std::io::BufWriter::new(f);
    write_dsmx(&mut w, m)?;
    w.flush()?;
    Ok(())
}

/// One group per line, `weight;i1,i2,...`. The weight may be omitted
/// (`;i1,i2` or `i1,i2`), in which case it defaults to `sqrt(|g|)`.
pub fn parse_groups<R: BufRead>(r: R) -> Result<(Vec<IndexSet>, Vec<Option<f64>>)> {
    let mut groups = Vec::new();
    let mut weights = Vec::new();
    for (ln, line) in r.lines().enumerate() {
        let line = line?;
        let line = line.trim();
        if line.is_empty() || line.starts_with('#') {
            continue;
        }
        let (w, idx) = match line.split_once(';') {
            Some((w, idx)) => (w.trim(), idx),
            None => ("", line),
        };
        let weight = if w.is_empty() {
            None
        } else {
            Some(
                w.parse::<f64>()
                    .map_err(|e| Error::Format(format!("line {}: weight: {e}", ln + 1)))?,
            )
        };
        let mut members = Vec::new();
        for tok in idx.split(',').map(str::trim).filter(|t| !t.is_empty()) {
            members.push(
                tok.parse::<usize>()
                    .map_err(|e| Error::Format(format!("line {}: index: {e}", ln + 1)))?,
            );
        }
        groups.push(IndexSet::from_unsorted(members));
        weights.push(weight);
    }
    Ok((groups, weights))
}

pub fn read_partition(path: &Path, dict: &Dictionary) -> Result<GroupPartition> {
    let f = fs::File::open(path)?;
    let (groups, weights) = parse_groups(BufReader::new(f))?;
    let weights = groups
        .iter()
        .zip(weights)
        .map(|(g, w)| w.unwrap_or((g.len() as f64).sqrt()))
        .collect();
    GroupPartition::new(dict, groups, Some(weights))
}

pub fn write_groups<W: Write>(mut w: W, p: &GroupPartition) -> Result<()> {
    for (g, wt) in p.groups().iter().zip(p.weights()) {
        let idx: Vec<String> = g.iter().map(|i| i.to_string()).collect();
        writeln!(w, "{wt};{}", idx.join(","))?;
    }
    Ok(())
}
