use std::ops::{Add, Mul, Sub};

use crate::error::{Error, Result};
use crate::fields::grid::Grid;

/// One value per cell centre.
#[derive(Clone, Debug, PartialEq)]
pub struct ScalarField {
    grid: Grid,
    data: Vec<f64>,
}

impl ScalarField {
    pub fn new(grid: Grid, data: Vec<f64>) -> Result<ScalarField> {
        if data.len() != grid.cells() {
            return Err(Error::GridMismatch(format!(
                "{} values for {} cells",
                data.len(),
                grid.cells()
            )));
        }
        Ok(ScalarField { grid, data })
    }

    pub(crate) fn from_vec(grid: Grid, data: Vec<f64>) -> ScalarField {
        debug_assert_eq!(data.len(), grid.cells());
        ScalarField { grid, data }
    }

    pub fn zeros(grid: Grid) -> ScalarField {
        ScalarField::constant(grid, 0.0)
    }

    pub fn constant(grid: Grid, value: f64) -> ScalarField {
        ScalarField {
            data: vec![value; grid.cells()],
            grid,
        }
    }

    /// Samples `f` at cell centres.
    pub fn from_fn(grid: Grid, f: impl Fn([f64; 3]) -> f64) -> ScalarField {
        let data = (0..grid.cells()).map(|i| f(grid.center(i))).collect();
        ScalarField { grid, data }
    }

    pub fn grid(&self) -> &Grid {
        &self.grid
    }

    pub fn data(&self) -> &[f64] {
        &self.data
    }

    pub fn data_mut(&mut self) -> &mut [f64] {
        &mut self.data
    }

    pub fn into_data(self) -> Vec<f64> {
        self.data
    }

    pub fn map(&self, f: impl Fn(f64) -> f64) -> ScalarField {
        ScalarField {
            grid: self.grid,
            data: self.data.iter().map(|&x| f(x)).collect(),
        }
    }

    pub fn try_map(&self, f: impl Fn(f64) -> Result<f64>) -> Result<ScalarField> {
        let data = self.data.iter().map(|&x| f(x)).collect::<Result<Vec<_>>>()?;
        Ok(ScalarField { grid: self.grid, data })
    }

    pub fn zip_map(&self, other: &ScalarField, f: impl Fn(f64, f64) -> f64) -> ScalarField {
        debug_assert!(self.grid.same_shape(&other.grid));
        ScalarField {
            grid: self.grid,
            data: self.data.iter().zip(&other.data).map(|(&a, &b)| f(a, b)).collect(),
        }
    }

    pub fn min(&self) -> f64 {
        self.data.iter().copied().fold(f64::INFINITY, f64::min)
    }

    pub fn max(&self) -> f64 {
        self.data.iter().copied().fold(f64::NEG_INFINITY, f64::max)
    }

    pub fn max_abs(&self) -> f64 {
        self.data.iter().fold(0.0, |m, x| m.max(x.abs()))
    }

    pub fn is_finite(&self) -> bool {
        self.data.iter().all(|x| x.is_finite())
    }

    /// Midpoint rule `sum f_i h^d`.
    pub fn integrate(&self) -> f64 {
        self.data.iter().sum::<f64>() * self.grid.cell_volume()
    }

    pub fn mean(&self) -> f64 {
        self.data.iter().sum::<f64>() / self.data.len() as f64
    }

    /// Discrete `L2` inner product.
    pub fn inner(&self, other: &ScalarField) -> f64 {
        dot(&self.data, &other.data) * self.grid.cell_volume()
    }

    pub fn norm_l2(&self) -> f64 {
        self.inner(self).sqrt()
    }

    pub fn scale(&self, s: f64) -> ScalarField {
        self.map(|x| s * x)
    }
}

impl Add for &ScalarField {
    type Output = ScalarField;
    fn add(self, rhs: &ScalarField) -> ScalarField {
        self.zip_map(rhs, |a, b| a + b)
    }
}

impl Sub for &ScalarField {
    type Output = ScalarField;
    fn sub(self, rhs: &ScalarField) -> ScalarField {
        self.zip_map(rhs, |a, b| a - b)
    }
}

impl Mul<f64> for &ScalarField {
    type Output = ScalarField;
    fn mul(self, rhs: f64) -> ScalarField {
        self.scale(rhs)
    }
}

/// Collocated vector field with `dim` components.
#[derive(Clone, Debug, PartialEq)]
pub struct VectorField {
    grid: Grid,
    comps: Vec<Vec<f64>>,
}

impl VectorField {
    pub fn new(grid: Grid, comps: Vec<Vec<f64>>) -> Result<VectorField> {
        if comps.len() != grid.dim() || comps.iter().any(|c| c.len() != grid.cells()) {
            return Err(Error::GridMismatch(format!(
                "vector field needs {} components of {} values",
                grid.dim(),
                grid.cells()
            )));
        }
        Ok(VectorField { grid, comps })
    }

    pub(crate) fn from_comps(grid: Grid, comps: Vec<Vec<f64>>) -> VectorField {
        debug_assert_eq!(comps.len(), grid.dim());
        VectorField { grid, comps }
    }

    pub fn zeros(grid: Grid) -> VectorField {
        VectorField {
            comps: vec![vec![0.0; grid.cells()]; grid.dim()],
            grid,
        }
    }

    /// Samples `f` at cell centres; components beyond `dim` are ignored.
    pub fn from_fn(grid: Grid, f: impl Fn([f64; 3]) -> [f64; 3]) -> VectorField {
        let mut comps = vec![Vec::with_capacity(grid.cells()); grid.dim()];
        for i in 0..grid.cells() {
            let v = f(grid.center(i));
            for (a, c) in comps.iter_mut().enumerate() {
                c.push(v[a]);
            }
        }
        VectorField { grid, comps }
    }

    pub fn grid(&self) -> &Grid {
        &self.grid
    }

    pub fn comp(&self, axis: usize) -> &[f64] {
        &self.comps[axis]
    }

    pub fn comp_mut(&mut self, axis: usize) -> &mut [f64] {
        &mut self.comps[axis]
    }

    pub fn comps(&self) -> &[Vec<f64>] {
        &self.comps
    }

    pub fn into_comps(self) -> Vec<Vec<f64>> {
        self.comps
    }

    pub fn component(&self, axis: usize) -> ScalarField {
        ScalarField::from_vec(self.grid, self.comps[axis].clone())
    }

    pub fn zip_map(&self, other: &VectorField, f: impl Fn(f64, f64) -> f64) -> VectorField {
        debug_assert!(self.grid.same_shape(&other.grid));
        let comps = self
            .comps
            .iter()
            .zip(&other.comps)
            .map(|(a, b)| a.iter().zip(b).map(|(&x, &y)| f(x, y)).collect())
            .collect();
        VectorField { grid: self.grid, comps }
    }

    pub fn scale(&self, s: f64) -> VectorField {
        let comps = self.comps.iter().map(|c| c.iter().map(|x| s * x).collect()).collect();
        VectorField { grid: self.grid, comps }
    }

    /// Each component multiplied pointwise by `f`.
    pub fn times(&self, f: &[f64]) -> VectorField {
        let comps = self
            .comps
            .iter()
            .map(|c| c.iter().zip(f).map(|(x, y)| x * y).collect())
            .collect();
        VectorField { grid: self.grid, comps }
    }

    pub fn inner(&self, other: &VectorField) -> f64 {
        let s: f64 = self.comps.iter().zip(&other.comps).map(|(a, b)| dot(a, b)).sum();
        s * self.grid.cell_volume()
    }

    pub fn norm_l2(&self) -> f64 {
        self.inner(self).sqrt()
    }

    pub fn max_abs(&self) -> f64 {
        self.comps
            .iter()
            .flat_map(|c| c.iter())
            .fold(0.0, |m, x| m.max(x.abs()))
    }

    /// Pointwise Euclidean norm.
    pub fn magnitude(&self) -> ScalarField {
        let data = (0..self.grid.cells())
            .map(|i| self.comps.iter().map(|c| c[i] * c[i]).sum::<f64>().sqrt())
            .collect();
        ScalarField::from_vec(self.grid, data)
    }

    pub fn is_finite(&self) -> bool {
        self.comps.iter().all(|c| c.iter().all(|x| x.is_finite()))
    }
}

impl Add for &VectorField {
    type Output = VectorField;
    fn add(self, rhs: &VectorField) -> VectorField {
        self.zip_map(rhs, |a, b| a + b)
    }
}

impl Sub for &VectorField {
    type Output = VectorField;
    fn sub(self, rhs: &VectorField) -> VectorField {
        self.zip_map(rhs, |a, b| a - b)
    }
}

pub(crate) fn dot(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| x * y).sum()
}
