//! Randomized structural invariants of the discrete model.

use proptest::prelude::*;

use viscophase::cli::{emit_config, parse_run_config, RunConfig};
use viscophase::diagnostics::{check_energy_inequality, relative_energy};
use viscophase::dynamics::{band_limited_noise, ScalarInit, SimConfig, Simulation, State};
use viscophase::fields::{Boundary, Grid, ScalarField, VectorField};
use viscophase::galerkin::{assemble_rhs, CosineBasis, GalerkinState};
use viscophase::material::MaterialModel;

fn state(g: Grid, seed: u64, amp: f64, m: &MaterialModel) -> State {
    let phi = &band_limited_noise(&g, seed, 4) * amp;
    let q = &band_limited_noise(&g, seed + 1, 3) * 0.3;
    let u = VectorField::new(
        g,
        (0..g.dim())
            .map(|a| band_limited_noise(&g, seed + 2 + a as u64, 2).into_data())
            .collect(),
    )
    .unwrap();
    State::new(0.0, phi, q, u, m).unwrap()
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(24))]

    #[test]
    fn relative_energy_vanishes_on_the_diagonal(seed in 0u64..10_000, amp in 0.05f64..1.5) {
        let g = Grid::unit(2, 16, Boundary::Periodic).unwrap();
        let m = MaterialModel::regular_default();
        let s = state(g, seed, amp, &m);
        let r = relative_energy(&s, &s, &m).unwrap();
        prop_assert!(r.e_total.abs() <= 1e-12 && r.dissipation.abs() <= 1e-12);
    }

    #[test]
    fn relative_mixing_energy_is_coercive(seed in 0u64..10_000, amp in 0.05f64..1.5, a_extra in 0.01f64..3.0) {
        let g = Grid::unit(2, 16, Boundary::Neumann).unwrap();
        let mut m = MaterialModel::regular_default();
        m.stabilization = m.concavity_bound() / 2.0 + a_extra;
        let x = state(g, seed, amp, &m);
        let y = state(g, seed + 100, amp, &m);
        let d = (&x.phi - &y.phi).norm_l2();
        let e = relative_energy(&x, &y, &m).unwrap();
        prop_assert!(e.e_mix >= a_extra * d * d - 1e-10);
        prop_assert!(e.e_bulk >= 0.0 && e.e_kin >= 0.0 && e.dissipation >= 0.0);
    }

    #[test]
    fn galerkin_energy_rate_is_minus_dissipation(
        phi in prop::collection::vec(-0.3f64..0.3, 10),
        q in prop::collection::vec(-0.3f64..0.3, 10),
    ) {
        let b = CosineBasis::new(2, &[1.0, 1.0], 10).unwrap();
        let m = MaterialModel::regular_default();
        let s = GalerkinState::new(&b, &m, phi, q.clone()).unwrap();
        let r = assemble_rhs(&s, &b, &m).unwrap();
        let rate: f64 = r.mu.iter().zip(&r.dphi).map(|(a, c)| a * c).sum::<f64>()
            + q.iter().zip(&r.dq).map(|(a, c)| a * c).sum::<f64>();
        prop_assert!((rate + r.dissipation).abs() <= 1e-11 * (1.0 + r.dissipation));
        // the constant mode is conserved
        prop_assert!(r.dphi[0].abs() <= 1e-13);
    }

    #[test]
    fn config_text_round_trips(n in 4usize..64, c0 in 1e-4f64..1e-1, tau in 0.1f64..10.0, seed in 0u64..1000, degenerate in any::<bool>()) {
        let mut rc = RunConfig::default();
        if degenerate {
            rc.sim = SimConfig::degenerate_default(1e-3).unwrap();
        }
        rc.sim.grid = Grid::unit(2, n, rc.sim.grid.bc()).unwrap();
        rc.sim.material.c0 = c0;
        rc.sim.material.relaxation = viscophase::material::ScalarLaw::Constant(tau);
        rc.sim.seed = seed;
        let back = parse_run_config(&emit_config(&rc)).unwrap();
        prop_assert_eq!(emit_config(&back), emit_config(&rc));
    }
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(6))]

    #[test]
    fn short_runs_conserve_mass_and_dissipate(seed in 0u64..1000, mean in -0.3f64..0.3, dt in 1e-4f64..2e-3) {
        let mut cfg = SimConfig::regular_default();
        cfg.grid = Grid::unit(2, 16, Boundary::Periodic).unwrap();
        cfg.seed = seed;
        cfg.init_phi = ScalarInit::Spinodal { mean, amplitude: 0.1, seed: None };
        cfg.dt = Some(dt);
        cfg.t_end = 10.0 * dt;
        let traj = Simulation::from_config(&cfg).unwrap().run().unwrap();
        let m0 = traj.records[0].mass;
        prop_assert!(traj.records.iter().all(|r| (r.mass - m0).abs() <= 1e-12));
        prop_assert!(check_energy_inequality(&traj).passed);
        let u0 = ScalarField::constant(cfg.grid, mean).integrate();
        prop_assert!((m0 - u0).abs() <= 1e-12);
    }
}
