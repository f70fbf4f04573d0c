//! Preconditioned conjugate gradients for matrix-free SPD operators.

use crate::error::{Error, Result};
use crate::fields::field::dot;

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct CgOptions {
    /// Stop when `|r| <= max(rel_tol |b|, abs_tol)`.
    pub rel_tol: f64,
    pub abs_tol: f64,
    pub max_iter: usize,
}

impl Default for CgOptions {
    fn default() -> Self {
        CgOptions {
            rel_tol: 1e-10,
            abs_tol: 1e-14,
            max_iter: 500,
        }
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct CgOutcome {
    pub x: Vec<f64>,
    pub iterations: usize,
    /// Final Euclidean residual norm.
    pub residual: f64,
}

/// Solves `A x = b` for symmetric positive (semi)definite `A`; on singular
/// systems `b` must lie in the range and `precond` should map into it.
pub fn pcg(
    what: &'static str,
    op: impl Fn(&[f64], &mut [f64]),
    precond: impl Fn(&[f64], &mut [f64]),
    b: &[f64],
    x0: Option<&[f64]>,
    opts: CgOptions,
) -> Result<CgOutcome> {
    let n = b.len();
    let mut x = x0.map(|v| v.to_vec()).unwrap_or_else(|| vec![0.0; n]);
    let mut r = vec![0.0; n];
    op(&x, &mut r);
    for (ri, bi) in r.iter_mut().zip(b) {
        *ri = bi - *ri;
    }
    let target = (opts.rel_tol * dot(b, b).sqrt()).max(opts.abs_tol);
    let mut rnorm = dot(&r, &r).sqrt();
    if rnorm <= target {
        return Ok(CgOutcome {
            x,
            iterations: 0,
            residual: rnorm,
        });
    }
    let mut z = vec![0.0; n];
    precond(&r, &mut z);
    let mut p = z.clone();
    let mut rz = dot(&r, &z);
    let mut ap = vec![0.0; n];
    for it in 1..=opts.max_iter {
        op(&p, &mut ap);
        let pap = dot(&p, &ap);
        if !(pap > 0.0) || !pap.is_finite() {
            return Err(Error::SolverDiverged {
                what,
                iterations: it,
                residual: rnorm,
            });
        }
        let alpha = rz / pap;
        for i in 0..n {
            x[i] += alpha * p[i];
            r[i] -= alpha * ap[i];
        }
        rnorm = dot(&r, &r).sqrt();
        if rnorm <= target {
            return Ok(CgOutcome {
                x,
                iterations: it,
                residual: rnorm,
            });
        }
        precond(&r, &mut z);
        let rz_new = dot(&r, &z);
        let beta = rz_new / rz;
        rz = rz_new;
        for i in 0..n {
            p[i] = z[i] + beta * p[i];
        }
    }
    Err(Error::SolverDiverged {
        what,
        iterations: opts.max_iter,
        residual: rnorm,
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    fn tridiag(x: &[f64], y: &mut [f64]) {
        let n = x.len();
        for i in 0..n {
            let l = if i > 0 { x[i - 1] } else { 0.0 };
            let r = if i + 1 < n { x[i + 1] } else { 0.0 };
            y[i] = 4.0 * x[i] - l - r;
        }
    }

    #[test]
    fn solves_spd_system() {
        let b: Vec<f64> = (0..50).map(|i| (i as f64).sin()).collect();
        let out = pcg(
            "test",
            tridiag,
            |r, z| z.copy_from_slice(r),
            &b,
            None,
            CgOptions::default(),
        )
        .unwrap();
        let mut ax = vec![0.0; 50];
        tridiag(&out.x, &mut ax);
        let err = ax.iter().zip(&b).map(|(a, c)| (a - c).abs()).fold(0.0, f64::max);
        assert!(err < 1e-9);
    }

    #[test]
    fn zero_rhs_returns_immediately() {
        let out = pcg(
            "test",
            tridiag,
            |r, z| z.copy_from_slice(r),
            &[0.0; 8],
            None,
            CgOptions::default(),
        )
        .unwrap();
        assert_eq!(out.iterations, 0);
        assert!(out.x.iter().all(|&v| v == 0.0));
    }

    #[test]
    fn reports_iteration_cap() {
        let b: Vec<f64> = (0..50).map(|i| (i as f64).cos()).collect();
        let opts = CgOptions {
            max_iter: 2,
            rel_tol: 1e-14,
            abs_tol: 0.0,
        };
        let err = pcg("cap", tridiag, |r, z| z.copy_from_slice(r), &b, None, opts).unwrap_err();
        assert!(matches!(
            err,
            Error::SolverDiverged {
                what: "cap",
                iterations: 2,
                ..
            }
        ));
    }

    #[test]
    fn indefinite_operator_is_detected() {
        let neg = |x: &[f64], y: &mut [f64]| {
            for (a, b) in y.iter_mut().zip(x) {
                *a = -b;
            }
        };
        assert!(pcg(
            "neg",
            neg,
            |r, z| z.copy_from_slice(r),
            &[1.0; 4],
            None,
            CgOptions::default()
        )
        .is_err());
    }
}
