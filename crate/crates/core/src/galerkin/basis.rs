use std::f64::consts::PI;

use crate::error::{Error, Result};
use crate::fields::{Boundary, Grid, ScalarField};

/// Midpoint tensor rule on the box; exact for cosine products whose summed
/// index per axis stays below `2 * points`.
#[derive(Clone, Debug)]
pub struct Quadrature {
    pub points: [usize; 3],
    pub weight: f64,
    /// Per mode: values at the nodes, x fastest.
    pub(crate) values: Vec<Vec<f64>>,
    /// Per mode and axis: derivative values at the nodes.
    pub(crate) grads: Vec<Vec<Vec<f64>>>,
}

impl Quadrature {
    pub fn nodes(&self) -> usize {
        self.points.iter().product()
    }
}

/// The first `m` eigenfunctions of the Neumann Laplacian on a box, in order of
/// increasing eigenvalue: normalized cosine products.
#[derive(Clone, Debug)]
pub struct CosineBasis {
    dim: usize,
    len: [f64; 3],
    modes: Vec<[usize; 3]>,
    eigenvalues: Vec<f64>,
    /// Quadrature used for the dynamics and a twice finer one for resolution checks.
    coarse: Quadrature,
    fine: Quadrature,
}

fn axis_factor(k: usize, len: f64) -> f64 {
    if k == 0 {
        (1.0 / len).sqrt()
    } else {
        (2.0 / len).sqrt()
    }
}

impl CosineBasis {
    /// Nonlinear integrands up to fourth order in the fields are resolved
    /// exactly by the default rule, `2 (k_max + 1)` nodes per axis.
    pub fn new(dim: usize, len: &[f64], m: usize) -> Result<CosineBasis> {
        if !(1..=3).contains(&dim) || len.len() < dim {
            return Err(Error::InvalidGrid(format!(
                "dimension {dim} with {} lengths",
                len.len()
            )));
        }
        if m == 0 {
            return Err(Error::Precondition("mode count must be positive".into()));
        }
        let mut l = [1.0; 3];
        l[..dim].copy_from_slice(&len[..dim]);
        if l.iter().any(|&x| !(x > 0.0 && x.is_finite())) {
            return Err(Error::InvalidGrid(format!("box lengths {l:?} must be positive")));
        }
        // every axis index up to m is a candidate; the lowest m eigenvalues live there
        let mut cands = Vec::new();
        let kmax = |a: usize| if a < dim { m } else { 0 };
        for kz in 0..=kmax(2) {
            for ky in 0..=kmax(1) {
                for kx in 0..=kmax(0) {
                    let k = [kx, ky, kz];
                    let lam: f64 = (0..dim).map(|a| (k[a] as f64 * PI / l[a]).powi(2)).sum();
                    cands.push((lam, k));
                }
            }
        }
        cands.sort_by(|a, b| a.0.total_cmp(&b.0).then(a.1.cmp(&b.1)));
        cands.truncate(m);
        let modes: Vec<[usize; 3]> = cands.iter().map(|c| c.1).collect();
        let eigenvalues = cands.iter().map(|c| c.0).collect();
        let mut pts = [1; 3];
        for (a, p) in pts.iter_mut().enumerate().take(dim) {
            *p = 2 * (modes.iter().map(|k| k[a]).max().unwrap_or(0) + 1);
        }
        let fine_pts = pts.map(|p| if p > 1 { 2 * p } else { 1 });
        let coarse = build_quadrature(dim, &l, &modes, pts);
        let fine = build_quadrature(dim, &l, &modes, fine_pts);
        Ok(CosineBasis {
            dim,
            len: l,
            modes,
            eigenvalues,
            coarse,
            fine,
        })
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn len(&self) -> [f64; 3] {
        self.len
    }

    pub fn size(&self) -> usize {
        self.modes.len()
    }

    pub fn modes(&self) -> &[[usize; 3]] {
        &self.modes
    }

    /// Eigenvalues of `-laplacian`; the first is zero.
    pub fn eigenvalues(&self) -> &[f64] {
        &self.eigenvalues
    }

    pub fn volume(&self) -> f64 {
        self.len[..self.dim].iter().product()
    }

    pub fn quadrature(&self) -> &Quadrature {
        &self.coarse
    }

    pub(crate) fn fine_quadrature(&self) -> &Quadrature {
        &self.fine
    }

    /// Index of a mode, if the basis contains it.
    pub fn position(&self, mode: [usize; 3]) -> Option<usize> {
        self.modes.iter().position(|&k| k == mode)
    }

    /// `psi_j(x)`.
    pub fn eval_mode(&self, j: usize, x: &[f64]) -> f64 {
        let k = self.modes[j];
        (0..self.dim)
            .map(|a| axis_factor(k[a], self.len[a]) * (k[a] as f64 * PI * x[a] / self.len[a]).cos())
            .product()
    }

    /// `sum_j c_j psi_j(x)`.
    pub fn eval(&self, coeffs: &[f64], x: &[f64]) -> f64 {
        coeffs.iter().enumerate().map(|(j, c)| c * self.eval_mode(j, x)).sum()
    }

    /// `<f, psi_j>` by a midpoint rule with `points` nodes per axis.
    pub fn project_fn(&self, f: impl Fn(&[f64]) -> f64, points: usize) -> Vec<f64> {
        let mut pts = [1; 3];
        for p in pts.iter_mut().take(self.dim) {
            *p = points.max(1);
        }
        let q = build_quadrature(self.dim, &self.len, &self.modes, pts);
        let vals: Vec<f64> = node_coords(self.dim, &self.len, pts)
            .iter()
            .map(|x| f(&x[..]))
            .collect();
        project_values(&q, &vals)
    }

    /// `<f, psi_j>` for a field on a box-matching grid, by the cell-centre rule.
    pub fn project_field(&self, f: &ScalarField) -> Result<Vec<f64>> {
        let g = f.grid();
        if g.dim() != self.dim || (0..self.dim).any(|a| (g.len()[a] - self.len[a]).abs() > 1e-12 * self.len[a]) {
            return Err(Error::GridMismatch("field grid does not cover the basis box".into()));
        }
        let mut pts = [1; 3];
        pts[..self.dim].copy_from_slice(&g.n()[..self.dim]);
        let q = build_quadrature(self.dim, &self.len, &self.modes, pts);
        Ok(project_values(&q, f.data()))
    }

    /// `sum_j c_j psi_j` sampled at the cell centres of a Neumann grid on the box.
    pub fn reconstruct(&self, coeffs: &[f64], n: usize) -> Result<ScalarField> {
        let g = Grid::new(self.dim, &[n; 3][..self.dim], &self.len[..self.dim], Boundary::Neumann)?;
        let mut pts = [1; 3];
        pts[..self.dim].copy_from_slice(&g.n()[..self.dim]);
        let q = build_quadrature(self.dim, &self.len, &self.modes, pts);
        ScalarField::new(g, synthesize(&q, coeffs))
    }
}

fn node_coords(dim: usize, len: &[f64; 3], pts: [usize; 3]) -> Vec<[f64; 3]> {
    let mut out = Vec::with_capacity(pts.iter().product());
    for iz in 0..pts[2] {
        for iy in 0..pts[1] {
            for ix in 0..pts[0] {
                let idx = [ix, iy, iz];
                let mut x = [0.0; 3];
                for a in 0..dim {
                    x[a] = (idx[a] as f64 + 0.5) * len[a] / pts[a] as f64;
                }
                out.push(x);
            }
        }
    }
    out
}

fn build_quadrature(dim: usize, len: &[f64; 3], modes: &[[usize; 3]], pts: [usize; 3]) -> Quadrature {
    let nodes = node_coords(dim, len, pts);
    let weight: f64 = (0..dim).map(|a| len[a] / pts[a] as f64).product();
    let mut values = Vec::with_capacity(modes.len());
    let mut grads = Vec::with_capacity(modes.len());
    for k in modes {
        let mut v = Vec::with_capacity(nodes.len());
        let mut g = vec![Vec::with_capacity(nodes.len()); dim];
        for x in &nodes {
            let mut c = [1.0; 3];
            let mut s = [0.0; 3];
            for a in 0..dim {
                let w = k[a] as f64 * PI / len[a];
                let f = axis_factor(k[a], len[a]);
                c[a] = f * (w * x[a]).cos();
                s[a] = -f * w * (w * x[a]).sin();
            }
            v.push(c.iter().product());
            for (a, ga) in g.iter_mut().enumerate() {
                let mut p = s[a];
                for b in (0..dim).filter(|&b| b != a) {
                    p *= c[b];
                }
                ga.push(p);
            }
        }
        values.push(v);
        grads.push(g);
    }
    Quadrature {
        points: pts,
        weight,
        values,
        grads,
    }
}

pub(crate) fn project_values(q: &Quadrature, vals: &[f64]) -> Vec<f64> {
    q.values
        .iter()
        .map(|psi| psi.iter().zip(vals).map(|(p, v)| p * v).sum::<f64>() * q.weight)
        .collect()
}

/// Nodal values of `sum_j c_j psi_j`.
pub(crate) fn synthesize(q: &Quadrature, coeffs: &[f64]) -> Vec<f64> {
    let mut out = vec![0.0; q.nodes()];
    for (c, psi) in coeffs.iter().zip(&q.values) {
        if *c != 0.0 {
            out.iter_mut().zip(psi).for_each(|(o, p)| *o += c * p);
        }
    }
    out
}

/// Nodal values of `grad sum_j c_j psi_j`, one vector per axis.
pub(crate) fn synthesize_grad(q: &Quadrature, dim: usize, coeffs: &[f64]) -> Vec<Vec<f64>> {
    let mut out = vec![vec![0.0; q.nodes()]; dim];
    for (c, g) in coeffs.iter().zip(&q.grads) {
        if *c != 0.0 {
            for (o, ga) in out.iter_mut().zip(g) {
                o.iter_mut().zip(ga).for_each(|(o, p)| *o += c * p);
            }
        }
    }
    out
}

#[cfg(test)]
mod tests {
    use super::*;

    fn gram(b: &CosineBasis) -> (f64, f64) {
        let q = b.quadrature();
        let (mut e0, mut e1) = (0.0f64, 0.0f64);
        for i in 0..b.size() {
            for j in 0..b.size() {
                let m: f64 = q.values[i].iter().zip(&q.values[j]).map(|(a, c)| a * c).sum::<f64>() * q.weight;
                let s: f64 = (0..b.dim())
                    .map(|a| {
                        q.grads[i][a]
                            .iter()
                            .zip(&q.grads[j][a])
                            .map(|(x, y)| x * y)
                            .sum::<f64>()
                    })
                    .sum::<f64>()
                    * q.weight;
                let d = if i == j { 1.0 } else { 0.0 };
                e0 = e0.max((m - d).abs());
                e1 = e1.max((s - d * b.eigenvalues()[j]).abs() / (1.0 + b.eigenvalues()[j]));
            }
        }
        (e0, e1)
    }

    #[test]
    fn orthonormal_with_eigen_identity() {
        for (dim, len) in [(1, vec![1.0]), (2, vec![1.0, 2.0]), (3, vec![1.0, 1.0, 0.5])] {
            let b = CosineBasis::new(dim, &len, 12).unwrap();
            let (e0, e1) = gram(&b);
            assert!(e0 < 1e-12, "{dim}: {e0}");
            assert!(e1 < 1e-10, "{dim}: {e1}");
            assert_eq!(b.eigenvalues()[0], 0.0);
            assert!(b.eigenvalues().windows(2).all(|w| w[0] <= w[1]));
        }
    }

    #[test]
    fn projection_of_mode_and_constant() {
        let b = CosineBasis::new(2, &[1.0, 1.0], 10).unwrap();
        let c = b.project_fn(|x| b.eval_mode(3, x), 32);
        for (j, v) in c.iter().enumerate() {
            assert!((v - if j == 3 { 1.0 } else { 0.0 }).abs() < 1e-12);
        }
        let b2 = CosineBasis::new(2, &[2.0, 1.5], 10).unwrap();
        let c = b2.project_fn(|_| 0.7, 8);
        assert!((c[0] - 0.7 * 3.0f64.sqrt()).abs() < 1e-12);
        assert!(c[1..].iter().all(|v| v.abs() < 1e-12));
    }

    #[test]
    fn projection_of_linear_function() {
        let b = CosineBasis::new(1, &[1.0], 6).unwrap();
        let c = b.project_fn(|x| x[0], 4000);
        for k in 1..6usize {
            let j = b.position([k, 0, 0]).unwrap();
            let exact = 2f64.sqrt() * ((-1f64).powi(k as i32) - 1.0) / (k as f64 * PI).powi(2);
            assert!((c[j] - exact).abs() < 1e-7, "k={k}");
        }
        assert!((c[1] + 2.0 * 2f64.sqrt() / (PI * PI)).abs() < 1e-7);
        // the residual is orthogonal to the span
        let r = b.project_fn(|x| x[0] - b.eval(&c, x), 4000);
        assert!(r.iter().all(|v| v.abs() < 1e-7));
    }

    #[test]
    fn field_projection_matches_function_projection() {
        let b = CosineBasis::new(2, &[1.0, 1.0], 8).unwrap();
        let coeffs: Vec<f64> = (0..8).map(|j| 0.1 * j as f64 - 0.3).collect();
        let f = b.reconstruct(&coeffs, 24).unwrap();
        let back = b.project_field(&f).unwrap();
        for (a, c) in back.iter().zip(&coeffs) {
            assert!((a - c).abs() < 1e-12);
        }
    }
}
