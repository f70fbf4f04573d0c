//! Acceptance suite: one timed PASS/FAIL line per criterion. Runs without the
//! libtest harness so the lines are always printed.

use std::f64::consts::PI;
use std::time::{Duration, Instant};

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use viscophase::cli::{degenerate_sweep, weak_strong, weak_strong_run};
use viscophase::diagnostics::{check_energy_inequality, observed_orders, relative_energy, GronwallFit};
use viscophase::dynamics::{SimConfig, Simulation, State, Trajectory};
use viscophase::fields::{
    divergence, gradient, laplacian, project_divergence_free, Boundary, Grid, ScalarField, Spectral, VectorField,
};
use viscophase::galerkin::{convergence_study, integrate_galerkin, CosineBasis, GalerkinState};
use viscophase::material::{BulkModulus, MaterialModel, Potential, ScalarLaw};
use viscophase::Result;

type Criterion = fn() -> Result<Outcome>;

struct Outcome {
    pass: bool,
    detail: String,
}

fn outcome(pass: bool, detail: String) -> Result<Outcome> {
    Ok(Outcome { pass, detail })
}

fn mass_drift(traj: &Trajectory) -> f64 {
    let m0 = traj.records[0].mass;
    traj.records.iter().map(|r| (r.mass - m0).abs()).fold(0.0, f64::max)
}

fn regular(n: usize, dt: f64, steps: usize) -> SimConfig {
    let mut cfg = SimConfig::regular_default();
    cfg.grid = Grid::unit(2, n, Boundary::Periodic).unwrap();
    cfg.dt = Some(dt);
    cfg.t_end = dt * steps as f64;
    cfg
}

fn run(cfg: &SimConfig) -> Result<Trajectory> {
    Simulation::from_config(cfg)?.run()
}

fn mass_conservation() -> Result<Outcome> {
    let traj = run(&regular(64, 1e-4, 1000))?;
    let drift = mass_drift(&traj);
    outcome(
        drift <= 1e-10,
        format!(
            "{} steps, max |mass drift| = {drift:.2e} (tol 1e-10)",
            traj.records.len() - 1
        ),
    )
}

fn energy_inequality() -> Result<Outcome> {
    let mut residuals = Vec::new();
    let mut per_step = true;
    let mut worst = f64::NEG_INFINITY;
    for (dt, steps) in [(2.5e-5, 1000), (1.25e-5, 2000), (6.25e-6, 4000)] {
        let cfg = regular(64, dt, steps);
        let a = cfg.material.stabilization;
        assert_eq!(a, cfg.material.concavity_bound() / 2.0 + 1.0);
        let r = check_energy_inequality(&run(&cfg)?);
        per_step &= r.passed;
        worst = worst.max(r.worst_excess);
        residuals.push(r.balance_residual);
    }
    let orders = observed_orders(&residuals);
    let in_band = orders.iter().all(|p| (0.7..=1.3).contains(p));
    outcome(
        per_step && in_band,
        format!(
            "per-step worst excess {worst:.2e}; balance residuals {:.2e}, {:.2e}, {:.2e}; orders {:.3}, {:.3} (band 1.0 +- 0.3)",
            residuals[0], residuals[1], residuals[2], orders[0], orders[1]
        ),
    )
}

fn random_field(g: Grid, rng: &mut ChaCha8Rng, amp: f64) -> ScalarField {
    let data = (0..g.cells()).map(|_| rng.gen_range(-amp..amp)).collect();
    ScalarField::new(g, data).unwrap()
}

fn random_state(g: Grid, rng: &mut ChaCha8Rng, m: &MaterialModel) -> Result<State> {
    let phi = random_field(g, rng, 1.2);
    let q = random_field(g, rng, 1.0);
    let u = VectorField::new(g, (0..g.dim()).map(|_| random_field(g, rng, 1.0).into_data()).collect())?;
    State::new(0.0, phi, q, u, m)
}

fn relative_energy_identity() -> Result<Outcome> {
    let g = Grid::unit(2, 32, Boundary::Periodic)?;
    let m = MaterialModel::regular_default();
    let mut rng = ChaCha8Rng::seed_from_u64(20);
    let mut self_max = 0.0f64;
    for _ in 0..20 {
        let s = random_state(g, &mut rng, &m)?;
        let r = relative_energy(&s, &s, &m)?;
        self_max = self_max.max(r.e_total.abs()).max(r.dissipation.abs());
    }
    let margin = m.stabilization - m.concavity_bound() / 2.0;
    let mut worst = f64::INFINITY;
    for _ in 0..100 {
        let a = random_state(g, &mut rng, &m)?;
        let b = random_state(g, &mut rng, &m)?;
        let d = (&a.phi - &b.phi).norm_l2();
        let e = relative_energy(&a, &b, &m)?.e_mix;
        worst = worst.min(e - margin * d * d);
    }
    outcome(
        self_max <= 1e-12 && worst >= -1e-10,
        format!("max |E_rel(x|x)| = {self_max:.1e} over 20 states; min E_mix - (a - c4/2)|phi - psi|^2 = {worst:.3e} over 100 pairs"),
    )
}

fn weak_strong_behavior() -> Result<Outcome> {
    let twin = weak_strong_run(&regular(64, 1e-4, 1000), 0.0)?;
    let twin_max = twin.max_e_rel();
    let series = weak_strong(&regular(64, 1e-4, 200), &[1e-3, 5e-4])?;
    let ratio = series[0].final_e_rel() / series[1].final_e_rel();
    let (c, residual) = match series[0].fit {
        GronwallFit::Exponential { c, residual } => (c, residual),
        GronwallFit::Coinciding { .. } => (f64::NAN, f64::INFINITY),
    };
    outcome(
        twin_max <= 1e-10 && (3.0..=5.0).contains(&ratio) && residual <= 0.05,
        format!(
            "(a) twin max E_rel to t = {:.2} is {twin_max:.1e}; (b) E_rel ratio {ratio:.4} (band [3, 5]); (c) Gronwall C = {c:.3}, residual {residual:.2e} (tol 0.05)",
            twin.t.last().unwrap()
        ),
    )
}

fn degenerate_bounds() -> Result<Outcome> {
    let deltas = [1e-2, 1e-3, 1e-4];
    let mut cfg = SimConfig::degenerate_default(deltas[0])?;
    let dt = Simulation::from_config(&cfg)?.dt();
    cfg.dt = Some(dt);
    cfg.t_end = 500.0 * dt;
    let members = degenerate_sweep(&cfg, &deltas, 1e-2)?;
    let overshoots: Vec<f64> = members.iter().map(|m| m.bounds.overshoot).collect();
    let last = *overshoots.last().unwrap();
    let monotone = overshoots.windows(2).all(|w| w[1] <= w[0]);
    let entropy = members
        .iter()
        .all(|m| m.bounds.entropy_finite() && m.bounds.entropy.len() == m.records.len());
    let (lo, hi) = members.iter().fold((f64::INFINITY, f64::NEG_INFINITY), |(l, h), m| {
        (l.min(m.bounds.min_phi), h.max(m.bounds.max_phi))
    });
    outcome(
        last <= 1e-6 && monotone && entropy,
        format!(
            "500 steps at dt {dt:.2e}; overshoots {:.1e}, {:.1e}, {:.1e}; phi in [{lo:.4}, {hi:.4}]; entropy finite {entropy}",
            overshoots[0], overshoots[1], overshoots[2]
        ),
    )
}

fn galerkin_harness() -> Result<Outcome> {
    let mut m = MaterialModel::regular_default();
    m.relaxation = ScalarLaw::Constant(0.7);
    let b1 = CosineBasis::new(2, &[1.0, 1.0], 1)?;
    let zeta0 = 1.3;
    let decay = integrate_galerkin(
        &GalerkinState::new(&b1, &m, vec![0.1], vec![zeta0])?,
        &b1,
        &m,
        2.0,
        1e-11,
        50,
    )?;
    let decay_err = decay
        .states
        .iter()
        .map(|s| {
            let exact = zeta0 * (-s.t / 0.7).exp();
            (s.q[0] - exact).abs() / exact
        })
        .fold(0.0, f64::max);

    let m = MaterialModel::regular_default();
    let b16 = CosineBasis::new(2, &[1.0, 1.0], 16)?;
    let mut rng = ChaCha8Rng::seed_from_u64(3);
    let mut phi: Vec<f64> = (0..16).map(|_| rng.gen_range(-0.05..0.05)).collect();
    phi[0] = 0.0;
    let nonlinear = integrate_galerkin(
        &GalerkinState::new(&b16, &m, phi, vec![0.0; 16])?,
        &b16,
        &m,
        2.0,
        1e-9,
        200,
    )?;
    let excess = nonlinear.energy_excess();

    let mut lin = MaterialModel::regular_default();
    lin.potential = Potential::Zero;
    lin.bulk = BulkModulus::Constant(0.0);
    lin.c0 = 1e-2;
    // band limit: five modes
    let phi0 = |x: &[f64]| 0.3 + (PI * x[0]).cos() * (PI * x[1]).cos() + 0.5 * (2.0 * PI * x[0]).cos();
    let table = convergence_study(&[2, 6, 10, 14], 2, &[1.0, 1.0], phi0, |_| 0.0, &lin, 0.1, 1e-12)?;
    let past_band = table
        .rows
        .iter()
        .filter(|r| r.m_coarse >= 5)
        .map(|r| r.difference)
        .fold(0.0, f64::max);
    outcome(
        decay_err <= 1e-8 && excess <= 1e-6 && past_band < 1e-8,
        format!(
            "m=1 q-decay rel. error {decay_err:.1e} (tol 1e-8); m=16 energy excess {excess:.1e} (tol 1e-6); linear Cauchy past band {past_band:.1e} (tol 1e-8)"
        ),
    )
}

fn operator_oracles() -> Result<Outcome> {
    let f = |x: [f64; 3]| {
        (2.0 * PI * x[0]).sin() * (4.0 * PI * x[1]).cos() + 0.5 * (6.0 * PI * x[0] + 2.0 * PI * x[1]).cos()
    };
    let mut errs = Vec::new();
    for n in [32, 64, 128] {
        let g = Grid::unit(2, n, Boundary::Periodic)?;
        let field = ScalarField::from_fn(g, f);
        let exact = Spectral::new(&g).exact_laplacian(field.data());
        let fd = laplacian(&field);
        errs.push(
            fd.data()
                .iter()
                .zip(&exact)
                .map(|(a, b)| (a - b).abs())
                .fold(0.0, f64::max),
        );
    }
    let orders = observed_orders(&errs);
    let order_ok = orders.iter().all(|p| (1.9..=2.1).contains(p));

    let mut rng = ChaCha8Rng::seed_from_u64(7);
    let mut sbp = 0.0f64;
    for dim in [2, 3] {
        let g = Grid::unit(dim, if dim == 2 { 32 } else { 12 }, Boundary::Periodic)?;
        let s = random_field(g, &mut rng, 1.0);
        let v = VectorField::new(
            g,
            (0..dim).map(|_| random_field(g, &mut rng, 1.0).into_data()).collect(),
        )?;
        sbp = sbp.max((gradient(&s).inner(&v) + s.inner(&divergence(&v))).abs());
    }

    let g = Grid::unit(2, 32, Boundary::Periodic)?;
    let v = VectorField::new(g, (0..2).map(|_| random_field(g, &mut rng, 1.0).into_data()).collect())?;
    let tol = 1e-10;
    let (pv, _) = project_divergence_free(&v, tol)?;
    let (ppv, _) = project_divergence_free(&pv, tol)?;
    let idem = (&ppv - &pv).norm_l2() / pv.norm_l2();
    outcome(
        order_ok && sbp <= 1e-12 && idem <= tol,
        format!(
            "Laplacian orders {:.3}, {:.3} (band [1.9, 2.1]); summation by parts {sbp:.1e} (tol 1e-12); projection idempotence {idem:.1e} (tol {tol:e})",
            orders[0], orders[1]
        ),
    )
}

fn small_3d() -> Result<Outcome> {
    let mut cfg = SimConfig::regular_default();
    cfg.grid = Grid::unit(3, 24, Boundary::Periodic)?;
    cfg.dt = Some(1e-4);
    cfg.t_end = 100.0 * 1e-4;
    let traj = run(&cfg)?;
    let drift = mass_drift(&traj);
    let ie = check_energy_inequality(&traj);
    outcome(
        drift <= 1e-10 && ie.passed,
        format!(
            "24^3, {} steps: mass drift {drift:.1e}; per-step energy worst excess {:.2e}",
            traj.records.len() - 1,
            ie.worst_excess
        ),
    )
}

fn main() {
    let criteria: [(&str, Duration, Criterion); 8] = [
        ("1 mass conservation", Duration::from_secs(60), mass_conservation),
        ("2 energy inequality", Duration::from_secs(300), energy_inequality),
        (
            "3 relative energy identity and coercivity",
            Duration::from_secs(10),
            relative_energy_identity,
        ),
        ("4 weak-strong behavior", Duration::from_secs(300), weak_strong_behavior),
        ("5 degenerate bounds", Duration::from_secs(600), degenerate_bounds),
        ("6 Galerkin harness", Duration::from_secs(120), galerkin_harness),
        ("7 operator oracles", Duration::from_secs(30), operator_oracles),
        ("8 small 3D smoke", Duration::from_secs(600), small_3d),
    ];
    let filter: Vec<String> = std::env::args().skip(1).filter(|a| !a.starts_with('-')).collect();
    let mut failed = 0;
    for (name, budget, f) in criteria {
        if !filter.is_empty() && !filter.iter().any(|p| name.contains(p.as_str())) {
            continue;
        }
        let t0 = Instant::now();
        let result = f();
        let took = t0.elapsed();
        let (pass, detail) = match result {
            Ok(o) => (o.pass && took <= budget, o.detail),
            Err(e) => (false, format!("error: {e}")),
        };
        if !pass {
            failed += 1;
        }
        println!(
            "{}  {name}: {detail} [{:.1} s, budget {} s]",
            if pass { "PASS" } else { "FAIL" },
            took.as_secs_f64(),
            budget.as_secs()
        );
    }
    if failed > 0 {
        println!("{failed} criteria failed");
        std::process::exit(1);
    }
}
