use std::sync::Arc;

use crate::error::{Error, Result};
use crate::fields::field::{ScalarField, VectorField};
use crate::fields::ops::{div_with, grad_with, Parity};
use crate::fields::solver::{pcg, CgOptions};
use crate::fields::spectral::Spectral;

/// Pressure projection onto discretely divergence-free fields.
#[derive(Clone, Debug)]
pub struct Projector {
    spectral: Arc<Spectral>,
    max_iter: usize,
}

impl Projector {
    pub fn new(spectral: Arc<Spectral>) -> Projector {
        Projector {
            spectral,
            max_iter: 200,
        }
    }

    pub fn with_max_iter(mut self, max_iter: usize) -> Projector {
        self.max_iter = max_iter;
        self
    }

    /// Returns `(v - grad p, p)` with `|div(v - grad p)|_2 <= tol` and `p` mean-zero.
    pub fn project(&self, v: &VectorField, tol: f64) -> Result<(VectorField, ScalarField)> {
        if !(tol > 0.0) {
            return Err(Error::Precondition(format!(
                "projection tolerance {tol} must be positive"
            )));
        }
        let grid = *v.grid();
        grid.check_same(self.spectral.grid())?;
        let rhs = div_with(&grid, v.comps(), Parity::Odd);
        let scale = grid.cell_volume().sqrt();
        let op = |x: &[f64], y: &mut [f64]| {
            let g = grad_with(&grid, x, Parity::Even);
            let d = div_with(&grid, &g, Parity::Odd);
            // -laplacian, positive semidefinite
            for (yi, di) in y.iter_mut().zip(d) {
                *yi = -di;
            }
        };
        let pre = |r: &[f64], z: &mut [f64]| {
            let s = self.spectral.solve_poisson(r);
            for (zi, si) in z.iter_mut().zip(s) {
                *zi = -si;
            }
        };
        let neg: Vec<f64> = rhs.iter().map(|x| -x).collect();
        let opts = CgOptions {
            rel_tol: 1e-14,
            abs_tol: 0.25 * tol / scale,
            max_iter: self.max_iter,
        };
        let out = pcg("pressure poisson", op, pre, &neg, None, opts)?;
        let mut p = out.x;
        let mean = p.iter().sum::<f64>() / p.len() as f64;
        p.iter_mut().for_each(|x| *x -= mean);
        let gp = grad_with(&grid, &p, Parity::Even);
        let comps: Vec<Vec<f64>> = v
            .comps()
            .iter()
            .zip(&gp)
            .map(|(c, g)| c.iter().zip(g).map(|(a, b)| a - b).collect())
            .collect();
        let w = VectorField::from_comps(grid, comps);
        let residual = ScalarField::from_vec(grid, div_with(&grid, w.comps(), Parity::Odd)).norm_l2();
        if residual > tol {
            return Err(Error::SolverDiverged {
                what: "pressure poisson",
                iterations: out.iterations,
                residual,
            });
        }
        Ok((w, ScalarField::from_vec(grid, p)))
    }
}

/// One-shot projection; prefer a cached [`Projector`] inside time loops.
pub fn project_divergence_free(v: &VectorField, tol: f64) -> Result<(VectorField, ScalarField)> {
    Projector::new(Arc::new(Spectral::new(v.grid()))).project(v, tol)
}
