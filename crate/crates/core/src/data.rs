//! Labeled samples on the input cube `[-1, 1]^d`.
//!
//! Points are stored row-major in one flat buffer. Coordinates are
//! canonicalized on entry (`-0.0` becomes `0.0`) so that bitwise equality,
//! which is what duplicate detection uses, agrees with numeric equality.

use std::io::{Read, Write};
use std::path::Path;

use crate::error::{Error, Result};

#[derive(Debug, Clone, PartialEq)]
pub struct Dataset {
    dim: usize,
    xs: Vec<f64>,
    ys: Vec<f64>,
}

/// True if `x` lies in the closed cube `[-1, 1]^d`.
pub fn in_unit_cube(x: &[f64]) -> bool {
    x.iter().all(|v| (-1.0..=1.0).contains(v))
}

#[inline]
pub(crate) fn canonical(v: f64) -> f64 {
    // -0.0 + 0.0 == +0.0
    v + 0.0
}

impl Dataset {
    /// Builds a dataset from a flat row-major coordinate buffer.
    pub fn new(dim: usize, xs: Vec<f64>, ys: Vec<f64>) -> Result<Self> {
        if dim == 0 {
            return Err(Error::input("dimension must be positive"));
        }
        if xs.len() != dim * ys.len() {
            return Err(Error::input(format!(
                "{} coordinates do not form {} points of dimension {dim}",
                xs.len(),
                ys.len()
            )));
        }
        let xs: Vec<f64> = xs.into_iter().map(canonical).collect();
        for (i, p) in xs.chunks_exact(dim).enumerate() {
            if p.iter().any(|v| !v.is_finite()) {
                return Err(Error::input(format!("sample {i} has a non-finite coordinate")));
            }
            if !in_unit_cube(p) {
                return Err(Error::input(format!("sample {i} ({p:?}) lies outside [-1,1]^{dim}")));
            }
        }
        if let Some(i) = ys.iter().position(|y| !y.is_finite()) {
            return Err(Error::input(format!("label {i} is not finite")));
        }
        Ok(Dataset { dim, xs, ys })
    }

    pub fn from_rows(rows: &[Vec<f64>], ys: Vec<f64>) -> Result<Self> {
        let dim = rows.first().map_or(0, Vec::len);
        if rows.iter().any(|r| r.len() != dim) {
            return Err(Error::input("rows have differing dimensions"));
        }
        Dataset::new(dim, rows.concat(), ys)
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn len(&self) -> usize {
        self.ys.len()
    }

    pub fn is_empty(&self) -> bool {
        self.ys.is_empty()
    }

    pub fn point(&self, i: usize) -> &[f64] {
        &self.xs[i * self.dim..(i + 1) * self.dim]
    }

    pub fn label(&self, i: usize) -> f64 {
        self.ys[i]
    }

    pub fn labels(&self) -> &[f64] {
        &self.ys
    }

    pub fn coords(&self) -> &[f64] {
        &self.xs
    }

    pub fn points(&self) -> impl Iterator<Item = &[f64]> + '_ {
        self.xs.chunks_exact(self.dim)
    }

    pub fn iter(&self) -> impl Iterator<Item = (&[f64], f64)> + '_ {
        self.points().zip(self.ys.iter().copied())
    }

    /// Reads a CSV table with header `x1,...,xd,y`.
    pub fn read_csv<R: Read>(reader: R) -> Result<Self> {
        let mut rdr = csv::ReaderBuilder::new().trim(csv::Trim::All).from_reader(reader);
        let headers = rdr.headers()?.clone();
        let dim = parse_header(&headers)?;
        let mut xs = Vec::new();
        let mut ys = Vec::new();
        for (line, record) in rdr.records().enumerate() {
            let record = record?;
            if record.len() != dim + 1 {
                return Err(Error::input(format!("row {} has {} fields, expected {}", line + 1, record.len(), dim + 1)));
            }
            for (j, field) in record.iter().enumerate() {
                let v: f64 = field
                    .parse()
                    .map_err(|_| Error::input(format!("row {}: cannot parse {field:?} as a number", line + 1)))?;
                if j < dim {
                    xs.push(v);
                } else {
                    ys.push(v);
                }
            }
        }
        Dataset::new(dim, xs, ys)
    }

    pub fn load_csv(path: impl AsRef<Path>) -> Result<Self> {
        Dataset::read_csv(std::fs::File::open(path)?)
    }

    pub fn write_csv<W: Write>(&self, writer: W) -> Result<()> {
        let mut wtr = csv::Writer::from_writer(writer);
        let mut header: Vec<String> = (1..=self.dim).map(|i| format!("x{i}")).collect();
        header.push("y".into());
        wtr.write_record(&header)?;
        for (x, y) in self.iter() {
            let row: Vec<String> = x.iter().chain(std::iter::once(&y)).map(|v| v.to_string()).collect();
            wtr.write_record(&row)?;
        }
        wtr.flush()?;
        Ok(())
    }
}

fn parse_header(headers: &csv::StringRecord) -> Result<usize> {
    let n = headers.len();
    if n < 2 {
        return Err(Error::input("header must be x1,...,xd,y with d >= 1"));
    }
    for (i, h) in headers.iter().take(n - 1).enumerate() {
        if h != format!("x{}", i + 1) {
            return Err(Error::input(format!("header column {} is {h:?}, expected \"x{}\"", i + 1, i + 1)));
        }
    }
    if &headers[n - 1] != "y" {
        return Err(Error::input("last header column must be \"y\""));
    }
    Ok(n - 1)
}

/// Reads a CSV of query points with header `x1,...,xd` (a trailing `y` column is ignored).
pub fn read_points_csv<R: Read>(reader: R) -> Result<(usize, Vec<f64>)> {
    let mut rdr = csv::ReaderBuilder::new().trim(csv::Trim::All).from_reader(reader);
    let headers = rdr.headers()?.clone();
    let dim = headers.iter().take_while(|h| h.starts_with('x')).count();
    if dim == 0 {
        return Err(Error::input("point table needs columns x1,...,xd"));
    }
    let mut xs = Vec::new();
    for (line, record) in rdr.records().enumerate() {
        let record = record?;
        for field in record.iter().take(dim) {
            let v: f64 = field
                .parse()
                .map_err(|_| Error::input(format!("row {}: cannot parse {field:?}", line + 1)))?;
            xs.push(canonical(v));
        }
    }
    Ok((dim, xs))
}
