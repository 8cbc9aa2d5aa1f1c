//! Field dump format.
//!
//! A dump is one text header line
//!
//! ```text
//! anisoflow-field v1 scalar|vector n=<n>
//! ```
//!
//! followed by little-endian 8-byte IEEE-754 nodal values with the x index
//! fastest, then y, then z; vector fields store the three components
//! consecutively.

use std::io::{BufRead, BufReader, Read, Write};
use std::path::Path;

use ndarray::Array3;

use crate::error::{Error, Result};
use crate::field::{ScalarField, VectorField};
use crate::grid::Grid;

const MAGIC: &str = "anisoflow-field v1";

fn write_header(w: &mut impl Write, kind: &str, n: usize) -> Result<()> {
    writeln!(w, "{MAGIC} {kind} n={n}")?;
    Ok(())
}

fn write_values(w: &mut impl Write, f: &ScalarField) -> Result<()> {
    let nodal = f.nodal();
    let n = f.grid().n();
    for i3 in 0..n {
        for i2 in 0..n {
            for i1 in 0..n {
                w.write_all(&nodal[(i1, i2, i3)].to_le_bytes())?;
            }
        }
    }
    Ok(())
}

fn read_values(r: &mut impl Read, grid: Grid) -> Result<ScalarField> {
    let n = grid.n();
    let mut data = Array3::zeros((n, n, n));
    let mut buf = [0u8; 8];
    for i3 in 0..n {
        for i2 in 0..n {
            for i1 in 0..n {
                r.read_exact(&mut buf)?;
                data[(i1, i2, i3)] = f64::from_le_bytes(buf);
            }
        }
    }
    Ok(ScalarField::from_nodal(grid, data))
}

pub fn write_scalar(path: &Path, f: &ScalarField) -> Result<()> {
    let mut w = std::io::BufWriter::new(std::fs::File::create(path)?);
    write_header(&mut w, "scalar", f.grid().n())?;
    write_values(&mut w, f)
}

pub fn write_vector(path: &Path, u: &VectorField) -> Result<()> {
    let mut w = std::io::BufWriter::new(std::fs::File::create(path)?);
    write_header(&mut w, "vector", u.grid().n())?;
    for i in 0..3 {
        write_values(&mut w, u.component(i))?;
    }
    Ok(())
}

fn parse_header(line: &str) -> Result<(String, usize)> {
    let rest = line
        .strip_prefix(MAGIC)
        .ok_or_else(|| Error::FieldFormat(format!("bad magic in header `{line}`")))?
        .trim();
    let mut parts = rest.split_whitespace();
    let kind = parts
        .next()
        .ok_or_else(|| Error::FieldFormat("missing field kind".into()))?;
    let nspec = parts
        .next()
        .and_then(|s| s.strip_prefix("n="))
        .ok_or_else(|| Error::FieldFormat("missing n= in header".into()))?;
    let n: usize = nspec
        .parse()
        .map_err(|_| Error::FieldFormat(format!("bad grid size `{nspec}`")))?;
    Ok((kind.to_string(), n))
}

pub fn read_scalar(path: &Path) -> Result<ScalarField> {
    let mut r = BufReader::new(std::fs::File::open(path)?);
    let mut line = String::new();
    r.read_line(&mut line)?;
    let (kind, n) = parse_header(line.trim_end())?;
    if kind != "scalar" {
        return Err(Error::FieldFormat(format!("expected scalar, got {kind}")));
    }
    read_values(&mut r, Grid::new(n)?)
}

pub fn read_vector(path: &Path) -> Result<VectorField> {
    let mut r = BufReader::new(std::fs::File::open(path)?);
    let mut line = String::new();
    r.read_line(&mut line)?;
    let (kind, n) = parse_header(line.trim_end())?;
    if kind != "vector" {
        return Err(Error::FieldFormat(format!("expected vector, got {kind}")));
    }
    let grid = Grid::new(n)?;
    let c1 = read_values(&mut r, grid)?;
    let c2 = read_values(&mut r, grid)?;
    let c3 = read_values(&mut r, grid)?;
    Ok(VectorField::new(c1, c2, c3))
}
