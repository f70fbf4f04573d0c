//! Mixing potentials and their derivative stacks.

use crate::error::{Error, Result};

/// Value and first three derivatives of a scalar function at one point.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct Derivatives {
    pub value: f64,
    pub first: f64,
    pub second: f64,
    pub third: f64,
}

impl Derivatives {
    pub const ZERO: Derivatives = Derivatives {
        value: 0.0,
        first: 0.0,
        second: 0.0,
        third: 0.0,
    };

    pub fn as_tuple(&self) -> (f64, f64, f64, f64) {
        (self.value, self.first, self.second, self.third)
    }
}

impl std::ops::Add for Derivatives {
    type Output = Derivatives;

    fn add(self, rhs: Derivatives) -> Derivatives {
        Derivatives {
            value: self.value + rhs.value,
            first: self.first + rhs.first,
            second: self.second + rhs.second,
            third: self.third + rhs.third,
        }
    }
}

/// A scalar function with a closed-form derivative stack.
pub trait Profile {
    fn derivatives(&self, s: f64) -> Result<Derivatives>;
}

/// Convex Flory–Huggins part `s ln s + (1-s) ln(1-s)`, defined on `(0, 1)`.
#[derive(Clone, Copy, Debug, Default, PartialEq)]
pub struct FloryHugginsConvex;

impl Profile for FloryHugginsConvex {
    fn derivatives(&self, s: f64) -> Result<Derivatives> {
        if !(s > 0.0 && s < 1.0) {
            return Err(Error::Domain {
                what: "logarithmic potential",
                value: s,
            });
        }
        let r = 1.0 - s;
        Ok(Derivatives {
            value: s * s.ln() + r * r.ln(),
            first: s.ln() - r.ln(),
            second: 1.0 / s + 1.0 / r,
            third: -1.0 / (s * s) + 1.0 / (r * r),
        })
    }
}

pub(crate) fn check_delta(delta: f64) -> Result<()> {
    if delta > 0.0 && delta < 0.5 {
        Ok(())
    } else {
        Err(Error::InvalidDelta(delta))
    }
}

/// Convex part continued outside `[delta, 1 - delta]` by its second-order
/// Taylor polynomial at the knot, so the second derivative is frozen there.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct Regularized<P> {
    inner: P,
    delta: f64,
    lower: Derivatives,
    upper: Derivatives,
}

impl<P: Profile> Regularized<P> {
    pub fn delta(&self) -> f64 {
        self.delta
    }

    pub fn inner(&self) -> &P {
        &self.inner
    }
}

fn quadratic_extension(knot: f64, at: &Derivatives, s: f64) -> Derivatives {
    let x = s - knot;
    Derivatives {
        value: at.value + at.first * x + 0.5 * at.second * x * x,
        first: at.first + at.second * x,
        second: at.second,
        third: 0.0,
    }
}

impl<P: Profile> Profile for Regularized<P> {
    fn derivatives(&self, s: f64) -> Result<Derivatives> {
        if !s.is_finite() {
            return Err(Error::Domain {
                what: "regularized potential",
                value: s,
            });
        }
        if s < self.delta {
            Ok(quadratic_extension(self.delta, &self.lower, s))
        } else if s > 1.0 - self.delta {
            Ok(quadratic_extension(1.0 - self.delta, &self.upper, s))
        } else {
            self.inner.derivatives(s)
        }
    }
}

/// Builds the C² regularization of a convex part with parameter `delta`.
pub fn regularize_potential<P: Profile>(inner: P, delta: f64) -> Result<Regularized<P>> {
    check_delta(delta)?;
    let lower = inner.derivatives(delta)?;
    let upper = inner.derivatives(1.0 - delta)?;
    Ok(Regularized {
        inner,
        delta,
        lower,
        upper,
    })
}

/// Interaction part `theta_c * s (1 - s)`; smooth on the whole line with
/// constant second derivative `-2 theta_c`.
fn interaction(theta_c: f64, s: f64) -> Derivatives {
    Derivatives {
        value: theta_c * s * (1.0 - s),
        first: theta_c * (1.0 - 2.0 * s),
        second: -2.0 * theta_c,
        third: 0.0,
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum PotentialKind {
    DoubleWell,
    FloryHuggins,
    RegularizedFloryHuggins,
    Zero,
}

impl PotentialKind {
    pub fn name(self) -> &'static str {
        match self {
            PotentialKind::DoubleWell => "double-well",
            PotentialKind::FloryHuggins => "flory-huggins",
            PotentialKind::RegularizedFloryHuggins => "regularized-flory-huggins",
            PotentialKind::Zero => "zero",
        }
    }

    pub fn parse(name: &str) -> Option<PotentialKind> {
        [
            PotentialKind::DoubleWell,
            PotentialKind::FloryHuggins,
            PotentialKind::RegularizedFloryHuggins,
            PotentialKind::Zero,
        ]
        .into_iter()
        .find(|k| k.name() == name)
    }
}

/// Homogeneous free energy density `F`.
#[derive(Clone, Copy, Debug, PartialEq)]
pub enum Potential {
    /// `(s^2 - 1)^2 / 4`.
    DoubleWell,
    /// Flory–Huggins split `F1 + F2` with the logarithmic convex part.
    FloryHuggins { theta_c: f64 },
    /// Same split with the convex part regularized at `delta`.
    RegularizedFloryHuggins {
        theta_c: f64,
        convex: Regularized<FloryHugginsConvex>,
    },
    /// `F = 0`; switches the potential off for linear experiments.
    Zero,
}

impl Potential {
    pub fn regularized_flory_huggins(theta_c: f64, delta: f64) -> Result<Potential> {
        Ok(Potential::RegularizedFloryHuggins {
            theta_c,
            convex: regularize_potential(FloryHugginsConvex, delta)?,
        })
    }

    pub fn kind(&self) -> PotentialKind {
        match self {
            Potential::DoubleWell => PotentialKind::DoubleWell,
            Potential::FloryHuggins { .. } => PotentialKind::FloryHuggins,
            Potential::RegularizedFloryHuggins { .. } => PotentialKind::RegularizedFloryHuggins,
            Potential::Zero => PotentialKind::Zero,
        }
    }

    pub fn theta_c(&self) -> Option<f64> {
        match *self {
            Potential::FloryHuggins { theta_c } | Potential::RegularizedFloryHuggins { theta_c, .. } => Some(theta_c),
            _ => None,
        }
    }

    pub fn delta(&self) -> Option<f64> {
        match self {
            Potential::RegularizedFloryHuggins { convex, .. } => Some(convex.delta()),
            _ => None,
        }
    }

    /// `(F, F', F'', F''')` at `s`.
    pub fn eval(&self, s: f64) -> Result<Derivatives> {
        match *self {
            Potential::DoubleWell => {
                if !s.is_finite() {
                    return Err(Error::Domain {
                        what: "double-well potential",
                        value: s,
                    });
                }
                let w = s * s - 1.0;
                Ok(Derivatives {
                    value: 0.25 * w * w,
                    first: s * w,
                    second: 3.0 * s * s - 1.0,
                    third: 6.0 * s,
                })
            }
            Potential::FloryHuggins { theta_c } => Ok(FloryHugginsConvex.derivatives(s)? + interaction(theta_c, s)),
            Potential::RegularizedFloryHuggins { theta_c, convex } => {
                Ok(convex.derivatives(s)? + interaction(theta_c, s))
            }
            Potential::Zero => Ok(Derivatives::ZERO),
        }
    }

    pub fn value(&self, s: f64) -> Result<f64> {
        Ok(self.eval(s)?.value)
    }

    pub fn first(&self, s: f64) -> Result<f64> {
        Ok(self.eval(s)?.first)
    }

    /// Convex part `F1` for the split kinds.
    pub fn convex_part(&self, s: f64) -> Option<Result<Derivatives>> {
        match self {
            Potential::FloryHuggins { .. } => Some(FloryHugginsConvex.derivatives(s)),
            Potential::RegularizedFloryHuggins { convex, .. } => Some(convex.derivatives(s)),
            _ => None,
        }
    }

    /// Concave part `F2` for the split kinds.
    pub fn concave_part(&self, s: f64) -> Option<Derivatives> {
        self.theta_c().map(|theta_c| interaction(theta_c, s))
    }

    /// Bound `F0` on `|F2''|` for the split kinds.
    pub fn concave_curvature_bound(&self) -> Option<f64> {
        self.theta_c().map(|t| 2.0 * t.abs())
    }

    /// `c4 >= 0` with `F'' >= -c4` on the whole admissible range.
    pub fn concavity_bound(&self) -> f64 {
        match *self {
            Potential::DoubleWell => 1.0,
            // min F1'' = 4 at s = 1/2 for both the plain and regularized convex part
            Potential::FloryHuggins { theta_c } | Potential::RegularizedFloryHuggins { theta_c, .. } => {
                (2.0 * theta_c - 4.0).max(0.0)
            }
            Potential::Zero => 0.0,
        }
    }

    /// Growth exponent `p` in `|F(x)| <= c |x|^p + c'`.
    pub fn growth_exponent(&self) -> f64 {
        match self {
            Potential::DoubleWell => 4.0,
            _ => 2.0,
        }
    }

    /// True if evaluation is confined to `(0, 1)`.
    pub fn is_singular(&self) -> bool {
        matches!(self, Potential::FloryHuggins { .. })
    }
}

/// `(F, F', F'', F''')` of `potential` at `s`.
pub fn eval_potential(potential: &Potential, s: f64) -> Result<(f64, f64, f64, f64)> {
    potential.eval(s).map(|d| d.as_tuple())
}
