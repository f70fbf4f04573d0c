//! Exact diagonalization of the constant-coefficient grid operators.
//!
//! The wide-stencil Laplacian is diagonal in the discrete Fourier basis on
//! periodic grids and in the DCT-II basis on Neumann grids. Eigenvalues of
//! `-laplacian` are `sum_a sin^2(theta_a) / h_a^2` with `theta = 2 pi k / n`
//! (periodic) or `theta = pi k / n` (Neumann).

use std::f64::consts::PI;
use std::sync::Arc;

use rustdct::{DctPlanner, TransformType2And3};
use rustfft::num_complex::Complex64;
use rustfft::{Fft, FftPlanner};

use crate::fields::grid::{Boundary, Grid};

enum Plans {
    Fourier {
        fwd: Vec<Arc<dyn Fft<f64>>>,
        inv: Vec<Arc<dyn Fft<f64>>>,
    },
    Cosine(Vec<Arc<dyn TransformType2And3<f64>>>),
}

pub struct Spectral {
    grid: Grid,
    lambda: Vec<f64>,
    kappa2: Vec<f64>,
    lambda_max: f64,
    plans: Plans,
}

impl std::fmt::Debug for Spectral {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.debug_struct("Spectral").field("grid", &self.grid).finish()
    }
}

/// Coefficient vector in the eigenbasis; purely real on Neumann grids.
pub type Spectrum = Vec<Complex64>;

impl Spectral {
    pub fn new(grid: &Grid) -> Spectral {
        let dim = grid.dim();
        let n = grid.n();
        let plans = match grid.bc() {
            Boundary::Periodic => {
                let mut planner = FftPlanner::new();
                Plans::Fourier {
                    fwd: (0..dim).map(|a| planner.plan_fft_forward(n[a])).collect(),
                    inv: (0..dim).map(|a| planner.plan_fft_inverse(n[a])).collect(),
                }
            }
            Boundary::Neumann => {
                let mut planner = DctPlanner::new();
                Plans::Cosine((0..dim).map(|a| planner.plan_dct2(n[a])).collect())
            }
        };
        let mut lambda = vec![0.0; grid.cells()];
        let mut kappa2 = vec![0.0; grid.cells()];
        for (idx, (l, k2)) in lambda.iter_mut().zip(kappa2.iter_mut()).enumerate() {
            let ijk = grid.unindex(idx);
            for a in 0..dim {
                let (k, na, h, len) = (ijk[a] as f64, n[a] as f64, grid.h(a), grid.len()[a]);
                match grid.bc() {
                    Boundary::Periodic => {
                        let s = (2.0 * PI * k / na).sin();
                        *l += s * s / (h * h);
                        let signed = k.min(na - k);
                        *k2 += (2.0 * PI * signed / len).powi(2);
                    }
                    Boundary::Neumann => {
                        let s = (PI * k / na).sin();
                        *l += s * s / (h * h);
                        *k2 += (PI * k / len).powi(2);
                    }
                }
            }
        }
        let lambda_max = lambda.iter().copied().fold(0.0, f64::max);
        Spectral {
            grid: *grid,
            lambda,
            kappa2,
            lambda_max,
            plans,
        }
    }

    pub fn grid(&self) -> &Grid {
        &self.grid
    }

    /// Eigenvalues of `-laplacian`, indexed like the spectrum.
    pub fn lambda(&self) -> &[f64] {
        &self.lambda
    }

    /// Continuous `|k|^2` of each mode.
    pub fn kappa2(&self) -> &[f64] {
        &self.kappa2
    }

    /// True where `-laplacian` vanishes (constant and, on periodic grids, checkerboard modes).
    pub fn is_null(&self, idx: usize) -> bool {
        self.lambda[idx] <= 1e-12 * self.lambda_max
    }

    fn along_axes<T: Copy + Default>(&self, data: &mut [T], mut f: impl FnMut(usize, &mut [T])) {
        let n = self.grid.n();
        for a in 0..self.grid.dim() {
            let s = self.grid.stride(a);
            let block = s * n[a];
            let mut line = vec![T::default(); n[a]];
            for base in (0..data.len()).step_by(block) {
                for off in 0..s {
                    for (i, v) in line.iter_mut().enumerate() {
                        *v = data[base + off + i * s];
                    }
                    f(a, &mut line);
                    for (i, v) in line.iter().enumerate() {
                        data[base + off + i * s] = *v;
                    }
                }
            }
        }
    }

    pub fn forward(&self, data: &[f64]) -> Spectrum {
        match &self.plans {
            Plans::Fourier { fwd, .. } => {
                let mut c: Vec<Complex64> = data.iter().map(|&x| Complex64::new(x, 0.0)).collect();
                self.along_axes(&mut c, |a, line| fwd[a].process(line));
                c
            }
            Plans::Cosine(plans) => {
                let mut r = data.to_vec();
                self.along_axes(&mut r, |a, line| plans[a].process_dct2(line));
                r.into_iter().map(|x| Complex64::new(x, 0.0)).collect()
            }
        }
    }

    pub fn inverse(&self, mut spec: Spectrum) -> Vec<f64> {
        match &self.plans {
            Plans::Fourier { inv, .. } => {
                self.along_axes(&mut spec, |a, line| inv[a].process(line));
                let scale = 1.0 / self.grid.cells() as f64;
                spec.into_iter().map(|c| c.re * scale).collect()
            }
            Plans::Cosine(plans) => {
                let mut r: Vec<f64> = spec.into_iter().map(|c| c.re).collect();
                self.along_axes(&mut r, |a, line| plans[a].process_dct3(line));
                let n = self.grid.n();
                let scale: f64 = (0..self.grid.dim()).map(|a| 2.0 / n[a] as f64).product();
                r.iter_mut().for_each(|x| *x *= scale);
                r
            }
        }
    }

    /// Applies the operator with eigenvalue `symbol(lambda)` on each mode.
    pub fn apply(&self, data: &[f64], symbol: impl Fn(f64) -> f64) -> Vec<f64> {
        let mut s = self.forward(data);
        for (c, &l) in s.iter_mut().zip(&self.lambda) {
            *c *= symbol(l);
        }
        self.inverse(s)
    }

    /// Pseudo-inverse of the grid Laplacian: zero on null modes.
    pub fn solve_poisson(&self, rhs: &[f64]) -> Vec<f64> {
        let mut s = self.forward(rhs);
        for (idx, c) in s.iter_mut().enumerate() {
            *c = if self.is_null(idx) {
                Complex64::new(0.0, 0.0)
            } else {
                *c * (-1.0 / self.lambda[idx])
            };
        }
        self.inverse(s)
    }

    /// Laplacian with the continuous symbol `-|k|^2`.
    pub fn exact_laplacian(&self, data: &[f64]) -> Vec<f64> {
        let mut s = self.forward(data);
        for (c, &k2) in s.iter_mut().zip(&self.kappa2) {
            *c *= -k2;
        }
        self.inverse(s)
    }
}
