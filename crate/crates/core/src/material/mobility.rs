use crate::error::Result;
use crate::material::potential::check_delta;

/// Scalar coefficient law used for `eta`, `tau` and non-degenerate mobility roots.
#[derive(Clone, Copy, Debug, PartialEq)]
pub enum ScalarLaw {
    Constant(f64),
    Affine { offset: f64, slope: f64 },
}

impl ScalarLaw {
    pub fn value(&self, s: f64) -> f64 {
        match *self {
            ScalarLaw::Constant(c) => c,
            ScalarLaw::Affine { offset, slope } => offset + slope * s,
        }
    }

    pub fn derivative(&self, _s: f64) -> f64 {
        match *self {
            ScalarLaw::Constant(_) => 0.0,
            ScalarLaw::Affine { slope, .. } => slope,
        }
    }

    pub fn as_constant(&self) -> Option<f64> {
        match *self {
            ScalarLaw::Constant(c) => Some(c),
            ScalarLaw::Affine { slope: 0.0, offset } => Some(offset),
            _ => None,
        }
    }
}

/// Mobility `m = n^2`.
#[derive(Clone, Debug, PartialEq)]
pub enum Mobility {
    /// `n(s)` prescribed directly.
    Root(ScalarLaw),
    /// `m(s) = s(1-s)` on `[0, 1]`, zero elsewhere.
    Degenerate,
    /// `m(s) = s^2 (1-s)^2` on `[0, 1]`, zero elsewhere; `m'` vanishes at both ends.
    DegenerateSquared,
    /// `m` evaluated at `s` clamped to `[delta, 1 - delta]`.
    Regularized { base: Box<Mobility>, delta: f64 },
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum MobilityKind {
    Constant,
    Degenerate,
    DegenerateSquared,
}

impl MobilityKind {
    pub fn name(self) -> &'static str {
        match self {
            MobilityKind::Constant => "constant",
            MobilityKind::Degenerate => "degenerate",
            MobilityKind::DegenerateSquared => "degenerate-squared",
        }
    }

    pub fn parse(name: &str) -> Option<MobilityKind> {
        [
            MobilityKind::Constant,
            MobilityKind::Degenerate,
            MobilityKind::DegenerateSquared,
        ]
        .into_iter()
        .find(|k| k.name() == name)
    }
}

impl Mobility {
    pub fn constant(n: f64) -> Mobility {
        Mobility::Root(ScalarLaw::Constant(n))
    }

    pub fn m(&self, s: f64) -> f64 {
        match self {
            Mobility::Root(law) => {
                let n = law.value(s);
                n * n
            }
            Mobility::Degenerate => {
                if (0.0..=1.0).contains(&s) {
                    s * (1.0 - s)
                } else {
                    0.0
                }
            }
            Mobility::DegenerateSquared => {
                if (0.0..=1.0).contains(&s) {
                    let w = s * (1.0 - s);
                    w * w
                } else {
                    0.0
                }
            }
            Mobility::Regularized { base, delta } => base.m(s.clamp(*delta, 1.0 - *delta)),
        }
    }

    pub fn dm(&self, s: f64) -> f64 {
        match self {
            Mobility::Root(law) => 2.0 * law.value(s) * law.derivative(s),
            Mobility::Degenerate => {
                if (0.0..=1.0).contains(&s) {
                    1.0 - 2.0 * s
                } else {
                    0.0
                }
            }
            Mobility::DegenerateSquared => {
                if (0.0..=1.0).contains(&s) {
                    2.0 * s * (1.0 - s) * (1.0 - 2.0 * s)
                } else {
                    0.0
                }
            }
            Mobility::Regularized { base, delta } => {
                if s < *delta || s > 1.0 - *delta {
                    0.0
                } else {
                    base.dm(s)
                }
            }
        }
    }

    /// Mobility root `n`.
    pub fn n(&self, s: f64) -> f64 {
        match self {
            Mobility::Root(law) => law.value(s),
            _ => self.m(s).sqrt(),
        }
    }

    /// `n'`; infinite where a degenerate root vanishes with nonzero `m'`.
    pub fn dn(&self, s: f64) -> f64 {
        match self {
            Mobility::Root(law) => law.derivative(s),
            _ => {
                let n = self.n(s);
                let dm = self.dm(s);
                if dm == 0.0 {
                    0.0
                } else {
                    dm / (2.0 * n)
                }
            }
        }
    }

    /// The unregularized law.
    pub fn base(&self) -> &Mobility {
        match self {
            Mobility::Regularized { base, .. } => base.base(),
            m => m,
        }
    }

    pub fn delta(&self) -> Option<f64> {
        match self {
            Mobility::Regularized { delta, .. } => Some(*delta),
            _ => None,
        }
    }

    pub fn kind(&self) -> MobilityKind {
        match self.base() {
            Mobility::Degenerate => MobilityKind::Degenerate,
            Mobility::DegenerateSquared => MobilityKind::DegenerateSquared,
            _ => MobilityKind::Constant,
        }
    }

    /// True if the law vanishes somewhere on `[0, 1]` without regularization.
    pub fn is_degenerate(&self) -> bool {
        matches!(self, Mobility::Degenerate | Mobility::DegenerateSquared)
    }
}

/// Clamped mobility `m_delta`, strictly positive for the degenerate laws.
pub fn regularize_mobility(m: &Mobility, delta: f64) -> Result<Mobility> {
    check_delta(delta)?;
    match m {
        Mobility::Regularized { delta: d, .. } if *d == delta => Ok(m.clone()),
        _ => Ok(Mobility::Regularized {
            base: Box::new(m.clone()),
            delta,
        }),
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::error::Error;
    use approx::assert_relative_eq;

    #[test]
    fn clamped_values() {
        let m = regularize_mobility(&Mobility::Degenerate, 0.1).unwrap();
        assert_relative_eq!(m.m(0.05), 0.09, epsilon = 1e-15);
        assert_relative_eq!(m.m(0.5), 0.25, epsilon = 1e-15);
        assert_relative_eq!(m.m(1.7), 0.09, epsilon = 1e-15);
        assert_relative_eq!(m.n(0.5), 0.5, epsilon = 1e-15);
    }

    #[test]
    fn rejects_bad_delta() {
        assert!(matches!(
            regularize_mobility(&Mobility::Degenerate, 0.7),
            Err(Error::InvalidDelta(_))
        ));
        assert!(regularize_mobility(&Mobility::Degenerate, 0.0).is_err());
    }

    #[test]
    fn degenerate_extended_by_zero() {
        for s in [-1.0, -1e-9, 0.0, 1.0, 1.0 + 1e-9, 3.0] {
            assert_eq!(Mobility::Degenerate.m(s), 0.0);
            assert_eq!(Mobility::DegenerateSquared.n(s), 0.0);
        }
    }

    #[test]
    fn idempotent_and_monotone_in_delta() {
        let base = Mobility::Degenerate;
        let m1 = regularize_mobility(&base, 0.05).unwrap();
        let m2 = regularize_mobility(&m1, 0.05).unwrap();
        let mut prev_err = f64::INFINITY;
        for k in 0..=200 {
            let s = -0.5 + 2.0 * k as f64 / 200.0;
            assert_eq!(m1.m(s), m2.m(s));
        }
        for delta in [0.2, 0.1, 0.05, 0.01, 0.001] {
            let md = regularize_mobility(&base, delta).unwrap();
            let err: f64 = (1..100)
                .map(|k| {
                    let s = k as f64 / 100.0;
                    (md.m(s) - base.m(s)).abs()
                })
                .fold(0.0, f64::max);
            assert!(err <= prev_err);
            prev_err = err;
        }
    }

    #[test]
    fn positive_lower_bound_after_regularization() {
        for base in [Mobility::Degenerate, Mobility::DegenerateSquared] {
            let delta = 0.01;
            let md = regularize_mobility(&base, delta).unwrap();
            let floor = base.m(delta).min(base.m(1.0 - delta));
            for k in 0..=400 {
                let s = -1.0 + 3.0 * k as f64 / 400.0;
                assert!(md.m(s) >= floor * (1.0 - 1e-12) && md.m(s) > 0.0);
            }
        }
    }
}
