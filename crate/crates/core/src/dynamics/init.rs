//! Initial-data library.

use std::f64::consts::PI;
use std::fmt;
use std::path::PathBuf;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::fields::{read_snapshot, Boundary, Grid, ScalarField, VectorField};
use crate::material::MaterialModel;

/// Highest wavenumber index (in box units) of spinodal noise.
pub const SPINODAL_BAND: usize = 8;

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub enum ScalarInit {
    Uniform(f64),
    /// `mean + amplitude * noise` with band-limited noise of unit max norm.
    Spinodal {
        mean: f64,
        amplitude: f64,
        seed: Option<u64>,
    },
    /// Centred disc/ball of radius `L/4` blending `low` outside to `high` inside.
    TanhInterface {
        width: f64,
        low: f64,
        high: f64,
    },
    /// Smooth single-mode perturbation `mean + amplitude * prod cos(pi x_a / L_a)`.
    Cosine {
        mean: f64,
        amplitude: f64,
    },
    FromSnapshot {
        path: PathBuf,
        field: String,
    },
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub enum VelocityInit {
    Zero,
    TaylorGreen { amplitude: f64 },
    FromSnapshot { path: PathBuf },
}

fn split_call(s: &str) -> Result<(&str, Vec<&str>)> {
    let s = s.trim();
    match s.find('(') {
        None => Ok((s, Vec::new())),
        Some(open) => {
            if !s.ends_with(')') {
                return Err(Error::Precondition(format!("unbalanced parentheses in '{s}'")));
            }
            let inner = s[open + 1..s.len() - 1].trim();
            let args = if inner.is_empty() {
                Vec::new()
            } else {
                inner.split(',').map(str::trim).collect()
            };
            Ok((s[..open].trim(), args))
        }
    }
}

fn num(args: &[&str], i: usize, default: Option<f64>, what: &str) -> Result<f64> {
    match args.get(i) {
        Some(a) => a
            .parse::<f64>()
            .map_err(|_| Error::Precondition(format!("{what}: argument '{a}' is not a number"))),
        None => default.ok_or_else(|| Error::Precondition(format!("{what}: missing argument {}", i + 1))),
    }
}

fn arity(args: &[&str], max: usize, what: &str) -> Result<()> {
    if args.len() > max {
        return Err(Error::Precondition(format!("{what} takes at most {max} arguments")));
    }
    Ok(())
}

impl ScalarInit {
    pub fn parse(s: &str, field: &str) -> Result<ScalarInit> {
        let (name, args) = split_call(s)?;
        let init = match name {
            "uniform" => {
                arity(&args, 1, name)?;
                ScalarInit::Uniform(num(&args, 0, Some(0.0), name)?)
            }
            "spinodal" => {
                arity(&args, 3, name)?;
                let seed = match args.get(2) {
                    Some(a) => Some(
                        a.parse::<u64>()
                            .map_err(|_| Error::Precondition(format!("spinodal: bad seed '{a}'")))?,
                    ),
                    None => None,
                };
                ScalarInit::Spinodal {
                    mean: num(&args, 0, Some(0.0), name)?,
                    amplitude: num(&args, 1, Some(0.05), name)?,
                    seed,
                }
            }
            "tanh-interface" => {
                arity(&args, 3, name)?;
                ScalarInit::TanhInterface {
                    width: num(&args, 0, Some(0.02), name)?,
                    low: num(&args, 1, Some(-1.0), name)?,
                    high: num(&args, 2, Some(1.0), name)?,
                }
            }
            "cosine" => {
                arity(&args, 2, name)?;
                ScalarInit::Cosine {
                    mean: num(&args, 0, Some(0.0), name)?,
                    amplitude: num(&args, 1, Some(0.1), name)?,
                }
            }
            "from-snapshot" => {
                arity(&args, 1, name)?;
                let path = args
                    .first()
                    .ok_or_else(|| Error::Precondition("from-snapshot needs a path".into()))?;
                ScalarInit::FromSnapshot {
                    path: PathBuf::from(path),
                    field: field.to_string(),
                }
            }
            other => return Err(Error::Precondition(format!("unknown initial data '{other}'"))),
        };
        if let ScalarInit::TanhInterface { width, .. } = init {
            if !(width > 0.0) {
                return Err(Error::Precondition(format!(
                    "tanh-interface width {width} must be positive"
                )));
            }
        }
        Ok(init)
    }

    pub fn build(&self, grid: &Grid, default_seed: u64) -> Result<ScalarField> {
        match self {
            ScalarInit::Uniform(v) => Ok(ScalarField::constant(*grid, *v)),
            ScalarInit::Spinodal { mean, amplitude, seed } => {
                let noise = band_limited_noise(grid, seed.unwrap_or(default_seed), SPINODAL_BAND);
                Ok(noise.map(|x| mean + amplitude * x))
            }
            ScalarInit::TanhInterface { width, low, high } => {
                let len = grid.len();
                let radius = 0.25 * len[..grid.dim()].iter().copied().fold(f64::INFINITY, f64::min);
                let dim = grid.dim();
                Ok(ScalarField::from_fn(*grid, |x| {
                    let r = (0..dim).map(|a| (x[a] - 0.5 * len[a]).powi(2)).sum::<f64>().sqrt();
                    let s = 0.5 * (1.0 - ((r - radius) / (2f64.sqrt() * width)).tanh());
                    low + (high - low) * s
                }))
            }
            ScalarInit::Cosine { mean, amplitude } => {
                let len = grid.len();
                let dim = grid.dim();
                let periodic = grid.bc() == Boundary::Periodic;
                Ok(ScalarField::from_fn(*grid, |x| {
                    let k = if periodic { 2.0 * PI } else { PI };
                    mean + amplitude * (0..dim).map(|a| (k * x[a] / len[a]).cos()).product::<f64>()
                }))
            }
            ScalarInit::FromSnapshot { path, field } => {
                let snap = read_snapshot(path)?;
                let g = snap.grid(grid.bc())?;
                g.check_same(grid)?;
                let data = snap
                    .field(field)
                    .ok_or_else(|| Error::Snapshot(format!("{} has no field '{field}'", path.display())))?;
                ScalarField::new(*grid, data.to_vec())
            }
        }
    }
}

impl fmt::Display for ScalarInit {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            ScalarInit::Uniform(v) => write!(f, "uniform({v:?})"),
            ScalarInit::Spinodal { mean, amplitude, seed } => match seed {
                Some(s) => write!(f, "spinodal({mean:?}, {amplitude:?}, {s})"),
                None => write!(f, "spinodal({mean:?}, {amplitude:?})"),
            },
            ScalarInit::TanhInterface { width, low, high } => {
                write!(f, "tanh-interface({width:?}, {low:?}, {high:?})")
            }
            ScalarInit::Cosine { mean, amplitude } => write!(f, "cosine({mean:?}, {amplitude:?})"),
            ScalarInit::FromSnapshot { path, .. } => write!(f, "from-snapshot({})", path.display()),
        }
    }
}

impl VelocityInit {
    pub fn parse(s: &str) -> Result<VelocityInit> {
        let (name, args) = split_call(s)?;
        match name {
            "zero" => {
                arity(&args, 0, name)?;
                Ok(VelocityInit::Zero)
            }
            "taylor-green" => {
                arity(&args, 1, name)?;
                Ok(VelocityInit::TaylorGreen {
                    amplitude: num(&args, 0, Some(1.0), name)?,
                })
            }
            "from-snapshot" => {
                arity(&args, 1, name)?;
                let path = args
                    .first()
                    .ok_or_else(|| Error::Precondition("from-snapshot needs a path".into()))?;
                Ok(VelocityInit::FromSnapshot {
                    path: PathBuf::from(path),
                })
            }
            other => Err(Error::Precondition(format!("unknown velocity data '{other}'"))),
        }
    }

    pub fn build(&self, grid: &Grid) -> Result<VectorField> {
        match self {
            VelocityInit::Zero => Ok(VectorField::zeros(*grid)),
            VelocityInit::TaylorGreen { amplitude } => taylor_green(grid, *amplitude),
            VelocityInit::FromSnapshot { path } => {
                let snap = read_snapshot(path)?;
                snap.grid(grid.bc())?.check_same(grid)?;
                let comps = ["u_x", "u_y", "u_z"][..grid.dim()]
                    .iter()
                    .map(|n| {
                        snap.field(n)
                            .map(<[f64]>::to_vec)
                            .ok_or_else(|| Error::Snapshot(format!("{} has no field '{n}'", path.display())))
                    })
                    .collect::<Result<Vec<_>>>()?;
                VectorField::new(*grid, comps)
            }
        }
    }
}

impl fmt::Display for VelocityInit {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            VelocityInit::Zero => write!(f, "zero"),
            VelocityInit::TaylorGreen { amplitude } => write!(f, "taylor-green({amplitude:?})"),
            VelocityInit::FromSnapshot { path } => write!(f, "from-snapshot({})", path.display()),
        }
    }
}

/// Discretely solenoidal vortex `(sin x cos y, -cos x sin y)` in the x-y plane
/// with period `L` (periodic) or `2L` (no-slip).
pub fn taylor_green(grid: &Grid, amplitude: f64) -> Result<VectorField> {
    if grid.dim() < 2 {
        return Err(Error::InvalidGrid("taylor-green needs at least two dimensions".into()));
    }
    let len = grid.len();
    let k = match grid.bc() {
        Boundary::Periodic => 2.0 * PI,
        Boundary::Neumann => PI,
    };
    let (kx, ky) = (k / len[0], k / len[1]);
    // scale so both components share the same discrete derivative factor
    let (hx, hy) = (grid.h(0), grid.h(1));
    let (fx, fy) = ((kx * hx).sin() / hx, (ky * hy).sin() / hy);
    let norm = fx.max(fy);
    Ok(VectorField::from_fn(*grid, |x| {
        let (sx, cx) = (kx * x[0]).sin_cos();
        let (sy, cy) = (ky * x[1]).sin_cos();
        [amplitude * fy / norm * sx * cy, -amplitude * fx / norm * cx * sy, 0.0]
    }))
}

/// Lowest mode with every axis active, `prod cos(k_a x_a)`, together with the
/// stress profile of the growing eigenvector of the phase-stress system
/// linearized about the constant state `mean`.
#[derive(Clone, Debug)]
pub struct ModePerturbation {
    pub phi: ScalarField,
    pub q: ScalarField,
    /// Linear growth rate of the mode; the relative energy grows like `exp(2 rate t)`.
    pub rate: f64,
}

pub fn unstable_mode_perturbation(grid: &Grid, material: &MaterialModel, mean: f64) -> Result<ModePerturbation> {
    let k = match grid.bc() {
        Boundary::Periodic => 2.0 * PI,
        Boundary::Neumann => PI,
    };
    let dim = grid.dim();
    let kv: Vec<f64> = (0..dim).map(|a| k / grid.len()[a]).collect();
    // eigenvalue of the discrete -laplacian on this mode
    let kappa: f64 = (0..dim).map(|a| ((kv[a] * grid.h(a)).sin() / grid.h(a)).powi(2)).sum();
    let shape = ScalarField::from_fn(*grid, |x| (0..dim).map(|a| (kv[a] * x[a]).cos()).product());
    let d = material.potential.eval(mean)?;
    let (n, (bulk, _)) = (material.n(mean), material.bulk(mean));
    let s = material.c0 * kappa + d.second;
    let j = [
        [-kappa * n * n * s, kappa * n * bulk],
        [
            kappa * n * bulk * s,
            -1.0 / material.tau(mean) - (bulk * bulk + material.eps1) * kappa,
        ],
    ];
    let tr = j[0][0] + j[1][1];
    let det = j[0][0] * j[1][1] - j[0][1] * j[1][0];
    let rate = 0.5 * (tr + (tr * tr - 4.0 * det).max(0.0).sqrt());
    let ratio = if j[0][1] != 0.0 {
        (rate - j[0][0]) / j[0][1]
    } else if j[0][0] != j[1][1] {
        j[1][0] / (j[0][0] - j[1][1])
    } else {
        0.0
    };
    Ok(ModePerturbation {
        q: &shape * ratio,
        phi: shape,
        rate,
    })
}

/// Random trigonometric polynomial with wavenumber indices up to `band` per
/// axis, scaled to unit max norm. Coefficients depend only on the seed and the
/// band, so the same seed gives the same function on every resolution.
pub fn band_limited_noise(grid: &Grid, seed: u64, band: usize) -> ScalarField {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let dim = grid.dim();
    let len = grid.len();
    let periodic = grid.bc() == Boundary::Periodic;
    // modes: per axis index range, sign pattern for periodic
    let range: Vec<i64> = if periodic {
        (-(band as i64)..=band as i64).collect()
    } else {
        (0..=(2 * band) as i64).collect()
    };
    let mut modes: Vec<([i64; 3], f64, f64)> = Vec::new();
    let mut visit = |k: [i64; 3], rng: &mut ChaCha8Rng| {
        let a = rng.gen_range(-1.0..1.0);
        let b = rng.gen_range(-1.0..1.0);
        if k.iter().all(|&c| c == 0) {
            return;
        }
        modes.push((k, a, b));
    };
    for &kx in &range {
        for &ky in if dim > 1 { &range[..] } else { &[0][..] } {
            for &kz in if dim > 2 { &range[..] } else { &[0][..] } {
                visit([kx, ky, kz], &mut rng);
            }
        }
    }
    // per-axis tables keep evaluation separable
    let n = grid.n();
    let table = |a: usize, k: i64| -> Vec<(f64, f64)> {
        (0..n[a])
            .map(|i| {
                let x = (i as f64 + 0.5) * grid.h(a);
                let w = if periodic { 2.0 * PI } else { PI };
                (w * k as f64 * x / len[a]).sin_cos()
            })
            .collect()
    };
    let mut data = vec![0.0; grid.cells()];
    for (k, a, b) in &modes {
        let tx = table(0, k[0]);
        let ty = if dim > 1 { table(1, k[1]) } else { vec![(0.0, 1.0)] };
        let tz = if dim > 2 { table(2, k[2]) } else { vec![(0.0, 1.0)] };
        for (idx, v) in data.iter_mut().enumerate() {
            let [i, j, l] = grid.unindex(idx);
            if periodic {
                // e^{i k.x} = product of (cos + i sin) per axis
                let (mut re, mut im) = (1.0, 0.0);
                for &(s, c) in [tx[i], ty[j], tz[l]].iter() {
                    let (r2, i2) = (re * c - im * s, re * s + im * c);
                    re = r2;
                    im = i2;
                }
                *v += a * re + b * im;
            } else {
                *v += a * tx[i].1 * ty[j].1 * tz[l].1;
            }
        }
    }
    let m = data.iter().fold(0.0f64, |m, x| m.max(x.abs()));
    if m > 0.0 {
        data.iter_mut().for_each(|x| *x /= m);
    }
    ScalarField::new(*grid, data).expect("grid-sized data")
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::fields::divergence;

    #[test]
    fn parse_round_trip() {
        for s in [
            "uniform(0.5)",
            "spinodal(0.0, 0.05, 7)",
            "spinodal(0.5, 0.2)",
            "tanh-interface(0.02, -1.0, 1.0)",
            "cosine(0.0, 0.1)",
        ] {
            let i = ScalarInit::parse(s, "phi").unwrap();
            assert_eq!(ScalarInit::parse(&i.to_string(), "phi").unwrap(), i);
        }
        assert!(ScalarInit::parse("bogus(1)", "phi").is_err());
        assert!(ScalarInit::parse("uniform(a)", "phi").is_err());
        assert!(ScalarInit::parse("tanh-interface(-1)", "phi").is_err());
        assert_eq!(VelocityInit::parse("zero").unwrap(), VelocityInit::Zero);
        assert_eq!(
            VelocityInit::parse("taylor-green(0.5)").unwrap(),
            VelocityInit::TaylorGreen { amplitude: 0.5 }
        );
    }

    #[test]
    fn spinodal_is_deterministic_and_bounded() {
        let g = Grid::unit(2, 32, Boundary::Periodic).unwrap();
        let a = band_limited_noise(&g, 3, 8);
        let b = band_limited_noise(&g, 3, 8);
        let c = band_limited_noise(&g, 4, 8);
        assert_eq!(a, b);
        assert_ne!(a, c);
        assert!((a.max_abs() - 1.0).abs() < 1e-15);
        assert!(a.mean().abs() < 1e-14);
        let gn = Grid::unit(2, 32, Boundary::Neumann).unwrap();
        let d = band_limited_noise(&gn, 3, 8);
        assert!(d.mean().abs() < 1e-14);
        let phi = ScalarInit::Spinodal {
            mean: 0.5,
            amplitude: 0.2,
            seed: Some(1),
        }
        .build(&gn, 0)
        .unwrap();
        assert!(phi.min() >= 0.3 - 1e-15 && phi.max() <= 0.7 + 1e-15);
    }

    #[test]
    fn spinodal_is_resolution_independent_up_to_scaling() {
        let g1 = Grid::unit(1, 64, Boundary::Periodic).unwrap();
        let g2 = Grid::unit(1, 128, Boundary::Periodic).unwrap();
        let a = band_limited_noise(&g1, 5, 4);
        let b = band_limited_noise(&g2, 5, 4);
        // cell i of the coarse grid sits between fine cells 2i and 2i+1
        let ratio = b.max_abs() / a.max_abs();
        assert!((ratio - 1.0).abs() < 0.05);
        for i in 0..64 {
            let fine = 0.5 * (b.data()[2 * i] + b.data()[2 * i + 1]);
            assert!((a.data()[i] - fine).abs() < 0.1);
        }
    }

    #[test]
    fn taylor_green_is_discretely_solenoidal() {
        for bc in [Boundary::Periodic, Boundary::Neumann] {
            let g = Grid::new(2, &[32, 24], &[1.0, 2.0], bc).unwrap();
            let u = taylor_green(&g, 1.0).unwrap();
            assert!(divergence(&u).max_abs() < 1e-12, "{bc:?}");
            assert!(u.max_abs() > 0.5);
        }
    }

    #[test]
    fn unstable_mode_rate_matches_continuum_linearization() {
        let m = MaterialModel::regular_default();
        let g = Grid::unit(2, 64, Boundary::Periodic).unwrap();
        let p = unstable_mode_perturbation(&g, &m, 0.0).unwrap();
        // continuum 2x2 system at kappa = 8 pi^2, F''(0) = -1
        let k = 8.0 * PI * PI;
        let s = m.c0 * k - 1.0;
        let (a, b, c, d) = (-k * s, k, k * s, -1.0 - k - m.eps1 * k);
        let tr = a + d;
        let rate = 0.5 * (tr + (tr * tr - 4.0 * (a * d - b * c)).sqrt());
        assert!((p.rate - rate).abs() < 0.02 * rate, "{} vs {rate}", p.rate);
        let ratio = p.q.inner(&p.phi) / p.phi.inner(&p.phi);
        assert!((ratio + (a - rate) / b).abs() < 0.02, "{ratio}");
    }
}
