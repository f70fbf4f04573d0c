//! Central-difference operators on the collocated grid.
//!
//! Ghost cells on Neumann grids come from reflection. `Even` (f[-1] = f[0]) is
//! used for scalar gradients, `Odd` (f[-1] = -f[0]) for normal fluxes and for
//! no-slip velocities. The two are negative adjoints of each other, so every
//! gradient/divergence pair below satisfies summation by parts exactly.

use rayon::prelude::*;

use crate::fields::field::{ScalarField, VectorField};
use crate::fields::grid::{Boundary, Grid};

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Parity {
    Even,
    Odd,
}

impl Parity {
    pub fn adjoint(self) -> Parity {
        match self {
            Parity::Even => Parity::Odd,
            Parity::Odd => Parity::Even,
        }
    }
}

const PARALLEL_CELLS: usize = 1 << 14;

/// `out = (f[i+1] - f[i-1]) / 2h` along `axis`.
pub fn diff_into(grid: &Grid, src: &[f64], axis: usize, parity: Parity, out: &mut [f64]) {
    debug_assert_eq!(src.len(), grid.cells());
    debug_assert_eq!(out.len(), grid.cells());
    let n = grid.n()[axis];
    let s = grid.stride(axis);
    let block = s * n;
    let inv = 0.5 / grid.h(axis);
    let sign = match (grid.bc(), parity) {
        (Boundary::Periodic, _) => 0.0,
        (Boundary::Neumann, Parity::Even) => 1.0,
        (Boundary::Neumann, Parity::Odd) => -1.0,
    };
    let periodic = grid.bc() == Boundary::Periodic;
    let line = |src: &[f64], out: &mut [f64]| {
        for i in 0..n {
            let row = i * s;
            for off in 0..s {
                let c = row + off;
                let lo = if i > 0 {
                    src[c - s]
                } else if periodic {
                    src[(n - 1) * s + off]
                } else {
                    sign * src[c]
                };
                let hi = if i + 1 < n {
                    src[c + s]
                } else if periodic {
                    src[off]
                } else {
                    sign * src[c]
                };
                out[c] = (hi - lo) * inv;
            }
        }
    };
    if src.len() >= PARALLEL_CELLS && src.len() / block > 1 {
        out.par_chunks_mut(block)
            .zip(src.par_chunks(block))
            .for_each(|(o, f)| line(f, o));
    } else {
        for (o, f) in out.chunks_mut(block).zip(src.chunks(block)) {
            line(f, o);
        }
    }
}

pub fn diff(grid: &Grid, src: &[f64], axis: usize, parity: Parity) -> Vec<f64> {
    let mut out = vec![0.0; src.len()];
    diff_into(grid, src, axis, parity, &mut out);
    out
}

pub fn grad_with(grid: &Grid, src: &[f64], parity: Parity) -> Vec<Vec<f64>> {
    (0..grid.dim()).map(|a| diff(grid, src, a, parity)).collect()
}

pub fn div_with(grid: &Grid, comps: &[Vec<f64>], parity: Parity) -> Vec<f64> {
    let mut out = vec![0.0; grid.cells()];
    let mut tmp = vec![0.0; grid.cells()];
    for (a, c) in comps.iter().enumerate() {
        diff_into(grid, c, a, parity, &mut tmp);
        for (o, t) in out.iter_mut().zip(&tmp) {
            *o += t;
        }
    }
    out
}

pub fn gradient(f: &ScalarField) -> VectorField {
    VectorField::from_comps(*f.grid(), grad_with(f.grid(), f.data(), Parity::Even))
}

pub fn divergence(v: &VectorField) -> ScalarField {
    ScalarField::from_vec(*v.grid(), div_with(v.grid(), v.comps(), Parity::Odd))
}

/// `divergence(gradient(f))`.
pub fn laplacian(f: &ScalarField) -> ScalarField {
    divergence(&gradient(f))
}

pub fn integrate(f: &ScalarField) -> f64 {
    f.integrate()
}

/// `grad[i][j] = d_j u_i` with no-slip reflection.
pub fn velocity_gradient(u: &VectorField) -> Vec<Vec<Vec<f64>>> {
    u.comps().iter().map(|c| grad_with(u.grid(), c, Parity::Odd)).collect()
}

/// Symmetric gradient `Du = (grad u + grad u^T) / 2`.
pub fn strain_rate(u: &VectorField) -> Vec<Vec<Vec<f64>>> {
    let g = velocity_gradient(u);
    let d = u.grid().dim();
    let mut s = vec![vec![Vec::new(); d]; d];
    for i in 0..d {
        for j in 0..d {
            s[i][j] = g[i][j].iter().zip(&g[j][i]).map(|(a, b)| 0.5 * (a + b)).collect();
        }
    }
    s
}

/// `div(eta Du)`, the negative adjoint of `Du` weighted by `eta`.
pub fn viscous_divergence(eta: &[f64], u: &VectorField) -> VectorField {
    let grid = *u.grid();
    let s = strain_rate(u);
    let comps = s
        .into_iter()
        .map(|row| {
            let weighted: Vec<Vec<f64>> = row
                .into_iter()
                .map(|sij| sij.iter().zip(eta).map(|(x, e)| x * e).collect())
                .collect();
            div_with(&grid, &weighted, Parity::Even)
        })
        .collect();
    VectorField::from_comps(grid, comps)
}

/// `integral eta |Du|^2`.
pub fn viscous_dissipation(eta: &[f64], u: &VectorField) -> f64 {
    let s = strain_rate(u);
    let mut total = 0.0;
    for row in &s {
        for sij in row {
            total += sij.iter().zip(eta).map(|(x, e)| e * x * x).sum::<f64>();
        }
    }
    total * u.grid().cell_volume()
}

/// `div(u f)` with the scalar flux parity.
pub fn advect_conservative(u: &VectorField, f: &[f64]) -> Vec<f64> {
    let flux: Vec<Vec<f64>> = u
        .comps()
        .iter()
        .map(|c| c.iter().zip(f).map(|(a, b)| a * b).collect())
        .collect();
    div_with(u.grid(), &flux, Parity::Odd)
}

/// `(u . grad f + div(u f)) / 2`, orthogonal to `f` for any `u`.
pub fn advect_skew(u: &VectorField, f: &[f64], grad_parity: Parity) -> Vec<f64> {
    let grid = u.grid();
    let g = grad_with(grid, f, grad_parity);
    let flux: Vec<Vec<f64>> = u
        .comps()
        .iter()
        .map(|c| c.iter().zip(f).map(|(a, b)| a * b).collect())
        .collect();
    let d = div_with(grid, &flux, grad_parity.adjoint());
    (0..grid.cells())
        .map(|i| {
            let conv: f64 = u.comps().iter().zip(&g).map(|(c, gc)| c[i] * gc[i]).sum();
            0.5 * (conv + d[i])
        })
        .collect()
}

/// Skew-symmetric momentum advection of `w` by `u`.
pub fn advect_velocity(u: &VectorField, w: &VectorField) -> VectorField {
    let comps = w.comps().iter().map(|c| advect_skew(u, c, Parity::Odd)).collect();
    VectorField::from_comps(*w.grid(), comps)
}
