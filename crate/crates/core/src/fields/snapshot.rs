//! Raw little-endian snapshot files.
//!
//! Layout: `"VPF1"`, `u32` dim, `u32` nx ny nz, `f64` Lx Ly Lz, `u32` field
//! count, then per field a `u32` byte length and UTF-8 name, then the field
//! values as `f64`, x fastest, in name order.

use std::fs::File;
use std::io::{BufReader, BufWriter, Read, Write};
use std::path::Path;

use crate::error::{Error, Result};
use crate::fields::grid::{Boundary, Grid};

const MAGIC: &[u8; 4] = b"VPF1";

#[derive(Clone, Debug, PartialEq)]
pub struct Snapshot {
    pub dim: usize,
    pub n: [usize; 3],
    pub len: [f64; 3],
    pub fields: Vec<(String, Vec<f64>)>,
}

impl Snapshot {
    pub fn field(&self, name: &str) -> Option<&[f64]> {
        self.fields.iter().find(|(n, _)| n == name).map(|(_, v)| v.as_slice())
    }

    /// The snapshot geometry with a caller-supplied boundary condition.
    pub fn grid(&self, bc: Boundary) -> Result<Grid> {
        Grid::new(self.dim, &self.n, &self.len, bc)
    }
}

pub fn write_snapshot(path: &Path, grid: &Grid, fields: &[(&str, &[f64])]) -> Result<()> {
    for (name, data) in fields {
        if data.len() != grid.cells() {
            return Err(Error::GridMismatch(format!(
                "field {name} has {} values for {} cells",
                data.len(),
                grid.cells()
            )));
        }
    }
    let mut w = BufWriter::new(File::create(path)?);
    w.write_all(MAGIC)?;
    w.write_all(&(grid.dim() as u32).to_le_bytes())?;
    for n in grid.n() {
        w.write_all(&(n as u32).to_le_bytes())?;
    }
    for l in grid.len() {
        w.write_all(&l.to_le_bytes())?;
    }
    w.write_all(&(fields.len() as u32).to_le_bytes())?;
    for (name, _) in fields {
        w.write_all(&(name.len() as u32).to_le_bytes())?;
        w.write_all(name.as_bytes())?;
    }
    for (_, data) in fields {
        for v in *data {
            w.write_all(&v.to_le_bytes())?;
        }
    }
    w.flush()?;
    Ok(())
}

fn read_u32(r: &mut impl Read) -> Result<u32> {
    let mut b = [0u8; 4];
    r.read_exact(&mut b)?;
    Ok(u32::from_le_bytes(b))
}

fn read_f64(r: &mut impl Read) -> Result<f64> {
    let mut b = [0u8; 8];
    r.read_exact(&mut b)?;
    Ok(f64::from_le_bytes(b))
}

pub fn read_snapshot(path: &Path) -> Result<Snapshot> {
    let mut r = BufReader::new(File::open(path)?);
    let mut magic = [0u8; 4];
    r.read_exact(&mut magic)?;
    if &magic != MAGIC {
        return Err(Error::Snapshot(format!("{}: bad magic {:?}", path.display(), magic)));
    }
    let dim = read_u32(&mut r)? as usize;
    let mut n = [0usize; 3];
    for v in &mut n {
        *v = read_u32(&mut r)? as usize;
    }
    let mut len = [0.0; 3];
    for v in &mut len {
        *v = read_f64(&mut r)?;
    }
    if !(1..=3).contains(&dim) || n.contains(&0) {
        return Err(Error::Snapshot(format!("{}: bad header", path.display())));
    }
    let count = read_u32(&mut r)? as usize;
    let mut names = Vec::with_capacity(count);
    for _ in 0..count {
        let l = read_u32(&mut r)? as usize;
        let mut b = vec![0u8; l];
        r.read_exact(&mut b)?;
        names.push(String::from_utf8(b).map_err(|e| Error::Snapshot(e.to_string()))?);
    }
    let cells = n[0] * n[1] * n[2];
    let mut fields = Vec::with_capacity(count);
    for name in names {
        let mut bytes = vec![0u8; cells * 8];
        r.read_exact(&mut bytes)?;
        let data = bytes
            .chunks_exact(8)
            .map(|c| f64::from_le_bytes(c.try_into().unwrap()))
            .collect();
        fields.push((name, data));
    }
    let mut rest = Vec::new();
    r.read_to_end(&mut rest)?;
    if !rest.is_empty() {
        return Err(Error::Snapshot(format!(
            "{}: {} trailing bytes",
            path.display(),
            rest.len()
        )));
    }
    Ok(Snapshot { dim, n, len, fields })
}
