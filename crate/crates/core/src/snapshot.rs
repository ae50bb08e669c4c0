//! Field snapshots: CSV (coordinates then value, one row per node) and a
//! compact little-endian binary layout.
//!
//! Binary layout: `dim: u64`, `n: [u64; 2]`, `length: [f64; 2]`, then the
//! samples as `f64` with x running fastest. One-dimensional grids store
//! `n[1] = 1` and `length[1] = 0`.

use std::io::{Read, Write};

use crate::error::{Error, Result};
use crate::spectral::{Field, Grid};

const HEADER_BYTES: usize = 5 * 8;

fn csv_err(e: csv::Error) -> Error {
    Error::Io(e.to_string())
}

pub fn write_csv(f: &Field, w: impl Write) -> Result<()> {
    let g = f.grid();
    let mut out = csv::Writer::from_writer(w);
    if g.dim() == 1 {
        out.write_record(["x", "value"]).map_err(csv_err)?;
    } else {
        out.write_record(["x", "y", "value"]).map_err(csv_err)?;
    }
    for (node, v) in f.values().iter().enumerate() {
        let [x, y] = g.coords(node);
        let row: Vec<String> = if g.dim() == 1 {
            vec![x.to_string(), v.to_string()]
        } else {
            vec![x.to_string(), y.to_string(), v.to_string()]
        };
        out.write_record(&row).map_err(csv_err)?;
    }
    out.flush()?;
    Ok(())
}

/// Read a CSV snapshot onto `grid`; rows must follow the node order and
/// their coordinates must match the grid to `1e-9`.
pub fn read_csv(grid: Grid, r: impl Read) -> Result<Field> {
    let mut rdr = csv::Reader::from_reader(r);
    let cols = grid.dim() + 1;
    let mut data = Vec::with_capacity(grid.len());
    for (node, rec) in rdr.records().enumerate() {
        let rec = rec.map_err(csv_err)?;
        if rec.len() != cols {
            return Err(Error::Io(format!("row {}: expected {cols} columns, found {}", node + 1, rec.len())));
        }
        if node >= grid.len() {
            return Err(Error::Io(format!("more than {} rows", grid.len())));
        }
        let vals = rec
            .iter()
            .map(|s| s.trim().parse::<f64>())
            .collect::<std::result::Result<Vec<_>, _>>()
            .map_err(|e| Error::Io(format!("row {}: {e}", node + 1)))?;
        let want = grid.coords(node);
        for axis in 0..grid.dim() {
            if (vals[axis] - want[axis]).abs() > 1e-9 {
                return Err(Error::Io(format!(
                    "row {}: coordinate {} does not match grid node {}",
                    node + 1,
                    vals[axis],
                    want[axis]
                )));
            }
        }
        data.push(vals[grid.dim()]);
    }
    Field::new(grid, data)
}

pub fn to_bytes(f: &Field) -> Vec<u8> {
    let g = f.grid();
    let two = g.dim() == 2;
    let mut out = Vec::with_capacity(HEADER_BYTES + 8 * g.len());
    out.extend_from_slice(&(g.dim() as u64).to_le_bytes());
    out.extend_from_slice(&(g.n(0) as u64).to_le_bytes());
    out.extend_from_slice(&(if two { g.n(1) } else { 1 } as u64).to_le_bytes());
    out.extend_from_slice(&g.length(0).to_le_bytes());
    out.extend_from_slice(&(if two { g.length(1) } else { 0.0 }).to_le_bytes());
    for v in f.values() {
        out.extend_from_slice(&v.to_le_bytes());
    }
    out
}

pub fn from_bytes(bytes: &[u8]) -> Result<Field> {
    if bytes.len() < HEADER_BYTES {
        return Err(Error::Io("snapshot shorter than its header".into()));
    }
    let word = |i: usize| -> [u8; 8] { bytes[8 * i..8 * i + 8].try_into().expect("eight bytes") };
    let dim = u64::from_le_bytes(word(0));
    let nx = u64::from_le_bytes(word(1)) as usize;
    let ny = u64::from_le_bytes(word(2)) as usize;
    let lx = f64::from_le_bytes(word(3));
    let ly = f64::from_le_bytes(word(4));
    let grid = match dim {
        1 => Grid::new_1d(nx, lx)?,
        2 => Grid::new_2d(nx, ny, lx, ly)?,
        d => return Err(Error::Io(format!("unsupported dimension {d}"))),
    };
    let body = &bytes[HEADER_BYTES..];
    if body.len() != 8 * grid.len() {
        return Err(Error::Io(format!(
            "snapshot holds {} bytes of samples, expected {}",
            body.len(),
            8 * grid.len()
        )));
    }
    let data = body
        .chunks_exact(8)
        .map(|c| f64::from_le_bytes(c.try_into().expect("eight bytes")))
        .collect();
    Field::new(grid, data)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn binary_round_trip_1d_and_2d() {
        let g1 = Grid::periodic_1d(16).unwrap();
        let f = Field::from_fn(g1, |x, _| x.sin() + 0.25);
        assert_eq!(from_bytes(&to_bytes(&f)).unwrap(), f);
        let g2 = Grid::new_2d(8, 16, 3.0, 5.0).unwrap();
        let f = Field::from_fn(g2, |x, y| x * y - 1.0);
        let bytes = to_bytes(&f);
        assert_eq!(bytes.len(), 40 + 8 * 128);
        assert_eq!(from_bytes(&bytes).unwrap(), f);
    }

    #[test]
    fn truncated_binary_rejected() {
        let g = Grid::periodic_1d(8).unwrap();
        let bytes = to_bytes(&Field::zeros(g));
        assert!(from_bytes(&bytes[..bytes.len() - 1]).is_err());
        assert!(from_bytes(&bytes[..10]).is_err());
    }

    #[test]
    fn csv_round_trip() {
        let g = Grid::new_2d(8, 8, 2.0, 1.0).unwrap();
        let f = Field::from_fn(g, |x, y| (x - y).exp());
        let mut buf = Vec::new();
        write_csv(&f, &mut buf).unwrap();
        let text = String::from_utf8(buf.clone()).unwrap();
        assert!(text.starts_with("x,y,value\n"));
        assert_eq!(text.lines().count(), 65);
        assert_eq!(read_csv(g, buf.as_slice()).unwrap(), f);
    }

    #[test]
    fn csv_on_the_wrong_grid_rejected() {
        let f = Field::zeros(Grid::periodic_1d(8).unwrap());
        let mut buf = Vec::new();
        write_csv(&f, &mut buf).unwrap();
        assert!(read_csv(Grid::new_1d(8, 1.0).unwrap(), buf.as_slice()).is_err());
    }
}
