//! Sampling checks of the structural assumptions on the parameter functions.

use std::fmt;

use crate::material::potential::{FloryHugginsConvex, Profile};
use crate::material::{bulk_with, MaterialModel, Potential, Regime};

#[derive(Clone, Debug, PartialEq)]
pub struct AssumptionCheck {
    pub name: String,
    pub passed: bool,
    /// Sample point attaining `worst_value`, when the check is pointwise.
    pub worst_point: Option<f64>,
    pub worst_value: f64,
    pub bound: f64,
}

#[derive(Clone, Debug, Default, PartialEq)]
pub struct AssumptionReport {
    pub regime: Option<Regime>,
    pub checks: Vec<AssumptionCheck>,
}

impl AssumptionReport {
    pub fn all_passed(&self) -> bool {
        self.checks.iter().all(|c| c.passed)
    }

    pub fn failures(&self) -> impl Iterator<Item = &AssumptionCheck> {
        self.checks.iter().filter(|c| !c.passed)
    }

    pub fn get(&self, name: &str) -> Option<&AssumptionCheck> {
        self.checks.iter().find(|c| c.name == name)
    }

    fn push(&mut self, name: &str, passed: bool, worst_point: Option<f64>, worst_value: f64, bound: f64) {
        self.checks.push(AssumptionCheck {
            name: name.to_string(),
            passed,
            worst_point,
            worst_value,
            bound,
        });
    }
}

impl fmt::Display for AssumptionReport {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        for c in &self.checks {
            let at = c.worst_point.map(|s| format!(" at s = {s:.6}")).unwrap_or_default();
            writeln!(
                f,
                "[{}] {}: worst {:.6e}{} (bound {:.6e})",
                if c.passed { "pass" } else { "FAIL" },
                c.name,
                c.worst_value,
                at,
                c.bound
            )?;
        }
        Ok(())
    }
}

fn uniform(lo: f64, hi: f64, count: usize) -> Vec<f64> {
    let count = count.max(2);
    (0..count)
        .map(|k| lo + (hi - lo) * k as f64 / (count - 1) as f64)
        .collect()
}

/// Points strictly inside `(0, 1)`.
fn open_unit(count: usize) -> Vec<f64> {
    (1..=count).map(|k| k as f64 / (count + 1) as f64).collect()
}

/// `(argmin, min)` of `f` over `points`; non-finite values count as `-inf`.
fn min_of(points: &[f64], f: impl Fn(f64) -> f64) -> (f64, f64) {
    points.iter().fold((f64::NAN, f64::INFINITY), |(ps, best), &s| {
        let v = f(s);
        let v = if v.is_finite() { v } else { f64::NEG_INFINITY };
        if v < best || ps.is_nan() {
            (s, v)
        } else {
            (ps, best)
        }
    })
}

fn max_of(points: &[f64], f: impl Fn(f64) -> f64) -> (f64, f64) {
    let (s, v) = min_of(points, |x| -f(x));
    (s, -v)
}

/// Boundedness on `(0, 1)` judged by refinement: the supremum over a 4x finer
/// grid (which reaches closer to the endpoints) may not exceed 1.5x the coarse one.
fn bounded_on_unit(samples: usize, f: impl Fn(f64) -> f64) -> (bool, f64, f64) {
    let (s, coarse) = max_of(&open_unit(samples), |x| f(x).abs());
    let (sf, fine) = max_of(&open_unit(4 * samples), |x| f(x).abs());
    let passed = coarse.is_finite() && fine.is_finite() && fine <= 1.5 * coarse + 1e-12;
    if passed {
        (true, s, coarse)
    } else {
        (false, sf, fine)
    }
}

/// Empirical growth exponent of `|g|` between `|x| = r` and `|x| = 4r`.
fn growth_exponent(g: impl Fn(f64) -> Option<f64>, r: f64) -> f64 {
    let mut worst = f64::NEG_INFINITY;
    for sign in [-1.0, 1.0] {
        match (g(sign * r), g(sign * 4.0 * r)) {
            (Some(a), Some(b)) => {
                let (a, b) = (a.abs().max(1.0), b.abs().max(1.0));
                worst = worst.max((b / a).ln() / 4f64.ln());
            }
            _ => return f64::INFINITY,
        }
    }
    worst
}

/// Mechanizes the structural assumptions for `regime`, reporting every bound
/// with its worst sample. Report-only: never errors.
pub fn check_assumptions(model: &MaterialModel, regime: Regime, samples: usize) -> AssumptionReport {
    let samples = samples.max(2);
    let mut report = AssumptionReport {
        regime: Some(regime),
        checks: Vec::new(),
    };
    let line = uniform(-2.0, 2.0, samples);

    let positive = |report: &mut AssumptionReport, name: &str, points: &[f64], f: &dyn Fn(f64) -> f64| {
        let (s, lo) = min_of(points, f);
        let (_, hi) = max_of(points, f);
        report.push(name, lo > 0.0 && hi.is_finite(), Some(s), lo, 0.0);
    };

    match regime {
        Regime::Regular => {
            positive(&mut report, "n bounded below by n1 > 0", &line, &|s| model.n(s));
        }
        Regime::Degenerate => {
            let base = model.mobility.base();
            let ends = base.n(0.0).abs().max(base.n(1.0).abs());
            report.push("n(0) = n(1) = 0", ends == 0.0, Some(0.0), ends, 0.0);
            let (s, lo) = min_of(&open_unit(samples), |s| base.n(s));
            report.push("n > 0 on (0,1)", lo > 0.0, Some(s), lo, 0.0);
            let outside: Vec<f64> = uniform(-1.0, -1e-9, samples)
                .into_iter()
                .chain(uniform(1.0 + 1e-9, 2.0, samples))
                .collect();
            let (s, hi) = max_of(&outside, |s| base.m(s).abs());
            report.push("n, m extended by zero outside [0,1]", hi == 0.0, Some(s), hi, 0.0);
        }
    }
    positive(&mut report, "eta bounded below by eta1 > 0", &line, &|s| model.eta(s));
    positive(&mut report, "tau bounded below by tau1 > 0", &line, &|s| model.tau(s));

    match regime {
        Regime::Regular => {
            let (s, lo) = min_of(&line, |s| model.bulk(s).0);
            let (_, hi) = max_of(&line, |s| model.bulk(s).0);
            report.push("0 <= A1 <= A <= A2", lo >= 0.0 && hi.is_finite(), Some(s), lo, 0.0);
            let (s, d) = max_of(&line, |s| model.bulk(s).1.abs());
            report.push("|A'| bounded", d.is_finite(), Some(s), d, f64::INFINITY);

            let p = &model.potential;
            let c4 = p.concavity_bound();
            let (s, fmin) = min_of(&line, |s| p.value(s).unwrap_or(f64::NEG_INFINITY));
            let (_, fmin_wide) = min_of(&uniform(-8.0, 8.0, 4 * samples), |s| {
                p.value(s).unwrap_or(f64::NEG_INFINITY)
            });
            report.push(
                "F >= -c3",
                fmin.is_finite() && fmin_wide >= fmin - 1e-9 * (1.0 + fmin.abs()),
                Some(s),
                fmin,
                -fmin.min(0.0),
            );
            let (s, d2) = min_of(&line, |s| p.eval(s).map(|d| d.second).unwrap_or(f64::NEG_INFINITY));
            report.push("F'' >= -c4", d2 >= -c4 - 1e-12, Some(s), d2, -c4);
            let pexp = p.growth_exponent();
            for (i, name) in [
                (0, "|F| growth <= p"),
                (1, "|F'| growth <= p-1"),
                (2, "|F''| growth <= p-2"),
            ] {
                let g = growth_exponent(
                    |x| {
                        p.eval(x).ok().map(|d| match i {
                            0 => d.value,
                            1 => d.first,
                            _ => d.second,
                        })
                    },
                    10.0,
                );
                let bound = pexp - i as f64;
                report.push(name, g <= bound + 0.25, None, g, bound);
            }
        }
        Regime::Degenerate => {
            if let Potential::FloryHuggins { theta_c } | Potential::RegularizedFloryHuggins { theta_c, .. } =
                model.potential
            {
                let pts = open_unit(samples);
                let (s, f1min) = min_of(&pts, |s| {
                    FloryHugginsConvex.derivatives(s).map_or(f64::NAN, |d| d.second)
                });
                report.push("F1'' > 0 on (0,1)", f1min > 0.0, Some(s), f1min, 0.0);
                let f0 = 2.0 * theta_c.abs();
                let (s, f2) = max_of(&pts, |s| {
                    model.potential.concave_part(s).map_or(f64::NAN, |d| d.second.abs())
                });
                report.push("|F2''| <= F0", f2 <= f0 + 1e-12, Some(s), f2, f0);
                let (s, split) = max_of(&pts, |s| {
                    let whole = model.potential.eval(s).map_or(f64::NAN, |d| d.value);
                    let parts = model
                        .potential
                        .convex_part(s)
                        .and_then(|r| r.ok())
                        .map_or(f64::NAN, |d| d.value)
                        + model.potential.concave_part(s).map_or(f64::NAN, |d| d.value);
                    (whole - parts).abs()
                });
                report.push("F = F1 + F2", split <= 1e-12, Some(s), split, 1e-12);
                // n^2 F1'' must have finite limits at both ends
                let base = model.mobility.base();
                let prod = |s: f64| base.m(s) * FloryHugginsConvex.derivatives(s).map_or(f64::NAN, |d| d.second);
                let e1 = 1.0 / samples as f64;
                let e2 = e1 / 4.0;
                let jump = (prod(e1) - prod(e2)).abs().max((prod(1.0 - e1) - prod(1.0 - e2)).abs());
                let scale = 1.0 + prod(e2).abs().max(prod(1.0 - e2).abs());
                report.push(
                    "n^2 F1'' continuous on [0,1]",
                    jump <= 0.1 * scale,
                    Some(e2),
                    jump,
                    0.1 * scale,
                );
            } else {
                report.push("F = F1 + F2 split available", false, None, f64::NAN, 0.0);
            }
            let base = model.mobility.base();
            let (ok, s, v) = bounded_on_unit(samples, |s| bulk_with(&model.bulk, base, s).0 / base.n(s));
            report.push("|A/n| bounded", ok, Some(s), v, f64::INFINITY);
            let (ok, s, v) = bounded_on_unit(samples, |s| bulk_with(&model.bulk, base, s).1 / base.n(s));
            report.push("|A'/n| bounded", ok, Some(s), v, f64::INFINITY);
        }
    }

    report.push("c0 > 0", model.c0 > 0.0, None, model.c0, 0.0);
    report.push("eps1 > 0", model.eps1 > 0.0, None, model.eps1, 0.0);
    let c4 = model.concavity_bound();
    report.push(
        "a > c4/2",
        model.stabilization > c4 / 2.0,
        None,
        model.stabilization,
        c4 / 2.0,
    );
    report
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::material::{BulkModulus, Mobility, ScalarLaw};

    #[test]
    fn regular_default_passes() {
        let r = check_assumptions(&MaterialModel::regular_default(), Regime::Regular, 200);
        assert!(r.all_passed(), "{r}");
    }

    #[test]
    fn degenerate_default_passes() {
        let r = check_assumptions(
            &MaterialModel::degenerate_default(1e-3).unwrap(),
            Regime::Degenerate,
            200,
        );
        assert!(r.all_passed(), "{r}");
        let r = check_assumptions(
            &MaterialModel::degenerate_default(1e-2).unwrap(),
            Regime::Degenerate,
            50,
        );
        assert!(r.all_passed(), "{r}");
    }

    #[test]
    fn tau_equal_to_s_fails_lower_bound() {
        let mut m = MaterialModel::regular_default();
        m.relaxation = ScalarLaw::Affine {
            offset: 0.0,
            slope: 1.0,
        };
        let r = check_assumptions(&m, Regime::Regular, 101);
        let c = r.get("tau bounded below by tau1 > 0").unwrap();
        assert!(!c.passed);
        assert!(c.worst_value <= 0.0);
        assert!(!r.all_passed());
    }

    #[test]
    fn a_over_n_bounded_for_sqrt_root() {
        // A = s(1-s) = n^2 with n = sqrt(s(1-s)): A/n = n is bounded by 1/2
        let mut m = MaterialModel::degenerate_default(1e-3).unwrap();
        m.bulk = BulkModulus::MobilityPower { alpha: 1.0, power: 2.0 };
        let r = check_assumptions(&m, Regime::Degenerate, 200);
        let c = r.get("|A/n| bounded").unwrap();
        assert!(c.passed);
        assert!(c.worst_value <= 0.5 + 1e-12);
    }

    #[test]
    fn a_equal_to_n_violates_derivative_bound() {
        let mut m = MaterialModel::degenerate_default(1e-3).unwrap();
        m.bulk = BulkModulus::MobilityPower { alpha: 1.0, power: 1.0 };
        let r = check_assumptions(&m, Regime::Degenerate, 200);
        assert!(r.get("|A/n| bounded").unwrap().passed);
        assert!(!r.get("|A'/n| bounded").unwrap().passed);
    }

    #[test]
    fn constant_mobility_is_not_degenerate() {
        let mut m = MaterialModel::degenerate_default(1e-3).unwrap();
        m.mobility = Mobility::constant(1.0);
        let r = check_assumptions(&m, Regime::Degenerate, 50);
        assert!(!r.get("n(0) = n(1) = 0").unwrap().passed);
    }

    #[test]
    fn singular_potential_fails_regular_checks() {
        let mut m = MaterialModel::regular_default();
        m.potential = Potential::FloryHuggins { theta_c: 2.5 };
        let r = check_assumptions(&m, Regime::Regular, 50);
        assert!(!r.get("F >= -c3").unwrap().passed);
    }
}
