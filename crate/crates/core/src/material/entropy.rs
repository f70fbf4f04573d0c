//! Entropy function `G` with `G'' = 1/m`, normalized by `G(1/2) = G'(1/2) = 0`.

use crate::error::{Error, Result};
use crate::material::mobility::{Mobility, ScalarLaw};

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct EntropyValue {
    pub value: f64,
    pub first: f64,
    pub second: f64,
}

#[derive(Clone, Debug, PartialEq)]
enum Interior {
    /// `m` constant: `G = (s - 1/2)^2 / (2m)` on the whole line.
    Constant { m: f64 },
    /// `m = s(1-s)`: `G = s ln s + (1-s) ln(1-s) + ln 2`.
    Logarithmic,
    /// `m = s^2(1-s)^2`: `G = -ln(s(1-s)) + 2 (s ln s + (1-s) ln(1-s))`.
    SquaredLogarithmic,
    /// Cumulative quadrature of `1/m` outward from `1/2`.
    Tabulated(Table),
}

#[derive(Clone, Debug, PartialEq)]
struct Table {
    nodes: Vec<f64>,
    g: Vec<f64>,
    dg: Vec<f64>,
}

#[derive(Clone, Debug, PartialEq)]
pub struct Entropy {
    mobility: Mobility,
    interior: Interior,
    /// Knots beyond which `G''` is frozen and `G` is quadratic.
    lower: f64,
    upper: f64,
    at_lower: EntropyValue,
    at_upper: EntropyValue,
}

fn logarithmic(s: f64) -> EntropyValue {
    let r = 1.0 - s;
    EntropyValue {
        value: s * s.ln() + r * r.ln() + std::f64::consts::LN_2,
        first: s.ln() - r.ln(),
        second: 1.0 / (s * r),
    }
}

fn squared_logarithmic(s: f64) -> EntropyValue {
    let r = 1.0 - s;
    EntropyValue {
        value: -(s * r).ln() + 2.0 * (s * s.ln() + r * r.ln()),
        first: -1.0 / s + 1.0 / r + 2.0 * (s.ln() - r.ln()),
        second: 1.0 / (s * s * r * r),
    }
}

impl Table {
    /// Nodes from `1/2` outward to `lo` and `hi` with spacing at most `step`.
    fn build(m: &Mobility, lo: f64, hi: f64, step: f64) -> Result<Table> {
        let inv = |s: f64| -> Result<f64> {
            let v = m.m(s);
            if v > 0.0 && v.is_finite() {
                Ok(1.0 / v)
            } else {
                Err(Error::DegenerateMobility { at: s })
            }
        };
        let march = |end: f64| -> Result<(Vec<f64>, Vec<f64>, Vec<f64>)> {
            let count = (((end - 0.5).abs() / step).ceil() as usize).max(1);
            let h = (end - 0.5) / count as f64;
            let mut nodes = vec![0.5];
            let mut g = vec![0.0];
            let mut dg = vec![0.0];
            for k in 0..count {
                let a = 0.5 + h * k as f64;
                let b = if k + 1 == count { end } else { a + h };
                let mid = 0.5 * (a + b);
                let (fa, fm, fb) = (inv(a)?, inv(mid)?, inv(b)?);
                let w = (b - a) / 6.0;
                // G'(b) = G'(a) + int_a^b 1/m ; G(b) = G(a) + (b-a) G'(a) + int_a^b (b-r)/m(r) dr
                let d_inc = w * (fa + 4.0 * fm + fb);
                let g_inc = (b - a) * dg[k] + w * ((b - a) * fa + 4.0 * (b - mid) * fm);
                nodes.push(b);
                dg.push(dg[k] + d_inc);
                g.push(g[k] + g_inc);
            }
            Ok((nodes, g, dg))
        };
        let (ln, lg, ldg) = march(lo)?;
        let (rn, rg, rdg) = march(hi)?;
        let mut nodes: Vec<f64> = ln.iter().rev().copied().collect();
        let mut g: Vec<f64> = lg.iter().rev().copied().collect();
        let mut dg: Vec<f64> = ldg.iter().rev().copied().collect();
        nodes.extend_from_slice(&rn[1..]);
        g.extend_from_slice(&rg[1..]);
        dg.extend_from_slice(&rdg[1..]);
        Ok(Table { nodes, g, dg })
    }

    /// Cubic Hermite interpolation of `G` from node values and slopes.
    fn eval(&self, s: f64, m: &Mobility) -> EntropyValue {
        let k = match self.nodes.partition_point(|&x| x <= s) {
            0 => 0,
            p if p >= self.nodes.len() => self.nodes.len() - 2,
            p => p - 1,
        };
        let (a, b) = (self.nodes[k], self.nodes[k + 1]);
        let h = b - a;
        let t = (s - a) / h;
        let (g0, g1, d0, d1) = (self.g[k], self.g[k + 1], self.dg[k] * h, self.dg[k + 1] * h);
        let t2 = t * t;
        let t3 = t2 * t;
        let value =
            (2.0 * t3 - 3.0 * t2 + 1.0) * g0 + (t3 - 2.0 * t2 + t) * d0 + (-2.0 * t3 + 3.0 * t2) * g1 + (t3 - t2) * d1;
        let first = ((6.0 * t2 - 6.0 * t) * g0
            + (3.0 * t2 - 4.0 * t + 1.0) * d0
            + (-6.0 * t2 + 6.0 * t) * g1
            + (3.0 * t2 - 2.0 * t) * d1)
            / h;
        EntropyValue {
            value,
            first,
            second: 1.0 / m.m(s),
        }
    }
}

impl Entropy {
    pub fn mobility(&self) -> &Mobility {
        &self.mobility
    }

    fn interior(&self, s: f64) -> EntropyValue {
        match &self.interior {
            Interior::Constant { m } => EntropyValue {
                value: (s - 0.5) * (s - 0.5) / (2.0 * m),
                first: (s - 0.5) / m,
                second: 1.0 / m,
            },
            Interior::Logarithmic => logarithmic(s),
            Interior::SquaredLogarithmic => squared_logarithmic(s),
            Interior::Tabulated(table) => table.eval(s, &self.mobility),
        }
    }

    pub fn eval(&self, s: f64) -> EntropyValue {
        let tail = |knot: f64, at: &EntropyValue| {
            let x = s - knot;
            EntropyValue {
                value: at.value + at.first * x + 0.5 * at.second * x * x,
                first: at.first + at.second * x,
                second: at.second,
            }
        };
        if s < self.lower {
            tail(self.lower, &self.at_lower)
        } else if s > self.upper {
            tail(self.upper, &self.at_upper)
        } else {
            self.interior(s)
        }
    }

    pub fn value(&self, s: f64) -> f64 {
        self.eval(s).value
    }
}

/// Builds `G` from a strictly positive mobility. Closed forms are used for
/// the built-in laws; anything else is tabulated with the given step.
pub fn entropy_from_mobility(mobility: &Mobility, quadrature_step: f64) -> Result<Entropy> {
    if mobility.is_degenerate() {
        return Err(Error::DegenerateMobility { at: 0.0 });
    }
    let (interior, lower, upper) = match mobility {
        Mobility::Root(ScalarLaw::Constant(n)) => {
            let m = n * n;
            if m <= 0.0 {
                return Err(Error::DegenerateMobility { at: 0.5 });
            }
            (Interior::Constant { m }, f64::NEG_INFINITY, f64::INFINITY)
        }
        Mobility::Regularized { base, delta } => {
            let interior = match base.as_ref() {
                Mobility::Degenerate => Interior::Logarithmic,
                Mobility::DegenerateSquared => Interior::SquaredLogarithmic,
                other => Interior::Tabulated(Table::build(other, *delta, 1.0 - *delta, quadrature_step)?),
            };
            (interior, *delta, 1.0 - *delta)
        }
        other => {
            // Non-constant positive root: tabulate on a window, quadratic beyond it.
            let (lo, hi) = (-1.0, 2.0);
            (
                Interior::Tabulated(Table::build(other, lo, hi, quadrature_step)?),
                lo,
                hi,
            )
        }
    };
    let mut entropy = Entropy {
        mobility: mobility.clone(),
        interior,
        lower,
        upper,
        at_lower: EntropyValue {
            value: 0.0,
            first: 0.0,
            second: 0.0,
        },
        at_upper: EntropyValue {
            value: 0.0,
            first: 0.0,
            second: 0.0,
        },
    };
    if lower.is_finite() {
        entropy.at_lower = entropy.interior(lower);
        entropy.at_upper = entropy.interior(upper);
        for (s, at) in [(lower, &entropy.at_lower), (upper, &entropy.at_upper)] {
            if !(at.second > 0.0 && at.second.is_finite()) {
                return Err(Error::DegenerateMobility { at: s });
            }
        }
    }
    Ok(entropy)
}

/// Entropy of the unregularized degenerate laws, `+inf` where it is singular.
pub fn limit_entropy(mobility: &Mobility, s: f64) -> f64 {
    match mobility.base() {
        Mobility::Degenerate => {
            if !(0.0..=1.0).contains(&s) {
                f64::INFINITY
            } else {
                let xlnx = |x: f64| if x == 0.0 { 0.0 } else { x * x.ln() };
                xlnx(s) + xlnx(1.0 - s) + std::f64::consts::LN_2
            }
        }
        Mobility::DegenerateSquared => {
            if s <= 0.0 || s >= 1.0 {
                f64::INFINITY
            } else {
                squared_logarithmic(s).value
            }
        }
        other => {
            let n = other.n(s);
            (s - 0.5) * (s - 0.5) / (2.0 * n * n)
        }
    }
}
