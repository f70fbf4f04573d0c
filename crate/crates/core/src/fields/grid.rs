use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub enum Boundary {
    Periodic,
    /// Homogeneous Neumann for scalars, no-slip for the velocity.
    Neumann,
}

impl Boundary {
    pub fn name(self) -> &'static str {
        match self {
            Boundary::Periodic => "periodic",
            Boundary::Neumann => "neumann",
        }
    }

    pub fn parse(s: &str) -> Option<Boundary> {
        match s {
            "periodic" => Some(Boundary::Periodic),
            "neumann" | "neumann-noslip" => Some(Boundary::Neumann),
            _ => None,
        }
    }
}

/// Uniform cell-centred grid. Inactive axes have one cell of unit length.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct Grid {
    dim: usize,
    n: [usize; 3],
    len: [f64; 3],
    bc: Boundary,
}

impl Grid {
    pub fn new(dim: usize, n: &[usize], len: &[f64], bc: Boundary) -> Result<Grid> {
        if !(1..=3).contains(&dim) {
            return Err(Error::InvalidGrid(format!("dimension {dim} not in 1..=3")));
        }
        if n.len() < dim || len.len() < dim {
            return Err(Error::InvalidGrid(format!(
                "need {dim} cell counts and lengths, got {} and {}",
                n.len(),
                len.len()
            )));
        }
        let mut cells = [1usize; 3];
        let mut lengths = [1.0f64; 3];
        for a in 0..dim {
            if n[a] < 4 {
                return Err(Error::InvalidGrid(format!(
                    "axis {a} has {} cells, need at least 4",
                    n[a]
                )));
            }
            if !(len[a] > 0.0 && len[a].is_finite()) {
                return Err(Error::InvalidGrid(format!("axis {a} has length {}", len[a])));
            }
            cells[a] = n[a];
            lengths[a] = len[a];
        }
        Ok(Grid {
            dim,
            n: cells,
            len: lengths,
            bc,
        })
    }

    /// `n^dim` cells on the unit box.
    pub fn unit(dim: usize, n: usize, bc: Boundary) -> Result<Grid> {
        Grid::new(dim, &[n; 3], &[1.0; 3], bc)
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn n(&self) -> [usize; 3] {
        self.n
    }

    pub fn len(&self) -> [f64; 3] {
        self.len
    }

    pub fn bc(&self) -> Boundary {
        self.bc
    }

    pub fn with_bc(&self, bc: Boundary) -> Grid {
        Grid { bc, ..*self }
    }

    pub fn h(&self, axis: usize) -> f64 {
        self.len[axis] / self.n[axis] as f64
    }

    pub fn h_min(&self) -> f64 {
        (0..self.dim).map(|a| self.h(a)).fold(f64::INFINITY, f64::min)
    }

    pub fn cells(&self) -> usize {
        self.n[0] * self.n[1] * self.n[2]
    }

    pub fn cell_volume(&self) -> f64 {
        (0..self.dim).map(|a| self.h(a)).product()
    }

    pub fn volume(&self) -> f64 {
        self.len[..self.dim].iter().product()
    }

    /// Flat-index stride of `axis`; x is fastest.
    pub fn stride(&self, axis: usize) -> usize {
        match axis {
            0 => 1,
            1 => self.n[0],
            _ => self.n[0] * self.n[1],
        }
    }

    pub fn index(&self, i: usize, j: usize, k: usize) -> usize {
        i + self.n[0] * (j + self.n[1] * k)
    }

    pub fn unindex(&self, idx: usize) -> [usize; 3] {
        let i = idx % self.n[0];
        let r = idx / self.n[0];
        [i, r % self.n[1], r / self.n[1]]
    }

    /// Cell centre of flat index `idx`; inactive coordinates are 0.
    pub fn center(&self, idx: usize) -> [f64; 3] {
        let ijk = self.unindex(idx);
        let mut x = [0.0; 3];
        for a in 0..self.dim {
            x[a] = (ijk[a] as f64 + 0.5) * self.h(a);
        }
        x
    }

    pub fn same_shape(&self, other: &Grid) -> bool {
        self.dim == other.dim && self.n == other.n && self.len == other.len && self.bc == other.bc
    }

    pub fn check_same(&self, other: &Grid) -> Result<()> {
        if self.same_shape(other) {
            Ok(())
        } else {
            Err(Error::GridMismatch(format!("{self:?} vs {other:?}")))
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn spacing_and_volume() {
        let g = Grid::new(2, &[32, 16], &[2.0, 1.0], Boundary::Periodic).unwrap();
        assert_eq!(g.h(0), 2.0 / 32.0);
        assert_eq!(g.h(1), 1.0 / 16.0);
        assert_eq!(g.cells(), 512);
        assert_eq!(g.volume(), 2.0);
        assert!((g.cell_volume() * 512.0 - 2.0).abs() < 1e-15);
    }

    #[test]
    fn rejects_small_axes() {
        assert!(Grid::new(2, &[3, 8], &[1.0, 1.0], Boundary::Periodic).is_err());
        assert!(Grid::new(4, &[8; 4], &[1.0; 4], Boundary::Periodic).is_err());
        assert!(Grid::new(1, &[8], &[0.0], Boundary::Periodic).is_err());
    }

    #[test]
    fn index_round_trip() {
        let g = Grid::new(3, &[5, 6, 7], &[1.0; 3], Boundary::Neumann).unwrap();
        for idx in 0..g.cells() {
            let [i, j, k] = g.unindex(idx);
            assert_eq!(g.index(i, j, k), idx);
        }
    }
}
