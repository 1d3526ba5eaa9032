use farfield::diagnostics::{bd_identity_residual, energy_identity_residual};
use farfield::initdata::{
    build_initial_state, check_compatibility, InitFamilySpec, VelocityProfile,
};
use farfield::reformulate::{effective_velocity, effective_velocity_from_potential, psi_of_rho};
use farfield::solver::{run, step_primitive, SolverConfig};
use farfield::{Field, FluidState, Grid, ModelParams};
use proptest::prelude::*;

fn profile() -> impl Strategy<Value = VelocityProfile> {
    prop_oneof![
        Just(VelocityProfile::Zero),
        (-1.0f64..1.0, 0.5f64..3.0)
            .prop_map(|(amplitude, width)| VelocityProfile::Bump { amplitude, width }),
        (-1.0f64..1.0, 1.0f64..6.0)
            .prop_map(|(amplitude, width)| VelocityProfile::CompactBump { amplitude, width }),
        (-1.0f64..1.0, 0.5f64..3.0)
            .prop_map(|(amplitude, width)| VelocityProfile::Lorentzian { amplitude, width }),
    ]
}

fn short_run(
    sigma: f64,
    velocity: VelocityProfile,
    delta: f64,
) -> (ModelParams, FluidState, farfield::solver::TimeSeries) {
    let p = ModelParams::new(1.0, 2.0, delta, 1.0).unwrap();
    let spec = InitFamilySpec::new(sigma, velocity);
    let s0 = build_initial_state(&spec, &p, Grid::new(30.0, 601).unwrap())
        .unwrap()
        .state;
    let c = SolverConfig {
        t_end: 0.3,
        output_stride: 1,
        ..SolverConfig::default()
    };
    let series = run(&s0, &p, &c).unwrap();
    (p, s0, series)
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(24))]

    #[test]
    fn initial_density_is_strictly_positive(sigma in 0.3f64..3.0, v in profile(), n in 16usize..400) {
        let p = ModelParams::new(1.0, 2.0, 1.0, 1.0).unwrap();
        let s = build_initial_state(&InitFamilySpec::new(sigma, v), &p, Grid::new(1e3, n).unwrap()).unwrap().state;
        prop_assert!(s.rho.min() > 0.0);
    }

    #[test]
    fn linear_compatibility_ignores_density(sigma in 0.5f64..2.0, v in profile()) {
        let p = ModelParams::new(1.0, 2.0, 1.0, 1.0).unwrap();
        let s = build_initial_state(&InitFamilySpec::new(sigma, v), &p, Grid::new(20.0, 401).unwrap()).unwrap().state;
        let r = check_compatibility(&s, &p, sigma).unwrap();
        prop_assert_eq!(r.g1_norm, s.u.ddx().l2_norm());
        prop_assert_eq!(r.g2_norm, s.u.d2dx2().l2_norm());
    }

    #[test]
    fn constant_fields_have_zero_derivatives(c in -1e3f64..1e3, n in 16usize..300, l in 0.1f64..100.0) {
        let f = Field::constant(Grid::new(l, n).unwrap(), c);
        prop_assert!(f.ddx().values().iter().all(|&v| v == 0.0));
        prop_assert!(f.d2dx2().values().iter().all(|&v| v == 0.0));
    }

    #[test]
    fn linear_psi_is_log_derivative(sigma in 0.5f64..2.0) {
        let p = ModelParams::new(1.0, 2.0, 1.0, 1.0).unwrap();
        let g = Grid::new(10.0, 201).unwrap();
        let rho = Field::from_fn(g, |x| 1.0 / (1.0 + x.abs().powf(2.0 * sigma)) + 1e-3);
        let psi = psi_of_rho(&rho, &p);
        let direct = rho.map(f64::ln).ddx();
        for (a, b) in psi.values().iter().zip(direct.values()) {
            prop_assert!((a - b).abs() <= 1e-14 * (1.0 + b.abs()));
        }
    }

    #[test]
    fn solver_fields_satisfy_agmon(sigma in 0.8f64..1.5, v in profile(), delta in 0.75f64..1.0) {
        let (_, _, series) = short_run(sigma, v, delta);
        for snap in &series.snapshots {
            let s = &snap.state;
            let rho = s.rho.agmon_ratio();
            prop_assert!(rho <= 1.05, "rho ratio {rho}");
            if s.u.max_abs() > 0.0 {
                prop_assert!(s.u.agmon_ratio() <= 1.05);
            }
        }
    }

    #[test]
    fn runs_keep_positivity_and_cauchy_schwarz(sigma in 0.8f64..1.5, v in profile(), delta in 0.75f64..1.0) {
        let (_, _, series) = short_run(sigma, v, delta);
        prop_assert_eq!(series.clamp_events, 0);
        for s in &series.snapshots {
            prop_assert!(s.state.rho.min() >= SolverConfig::default().vacuum_floor);
        }
        for r in &series.records {
            prop_assert!(r.cauchy_schwarz_holds(1e-10));
        }
    }

    #[test]
    fn identities_hold_to_residual_tolerance(sigma in 0.8f64..1.5, v in profile(), delta in 0.75f64..1.0) {
        let (_, _, series) = short_run(sigma, v, delta);
        let bd0 = series.records[0].bd;
        for r in &series.records {
            prop_assert!(r.bd <= bd0 * (1.0 + 1e-3));
        }
        prop_assert!(energy_identity_residual(&series).max_cumulative < 1e-2);
        prop_assert!(bd_identity_residual(&series).max_cumulative < 1e-2);
    }

    #[test]
    fn mass_changes_only_through_the_boundary(sigma in 0.8f64..1.5, v in profile(), dt in 1e-3f64..2e-2) {
        let p = ModelParams::new(1.0, 2.0, 1.0, 1.0).unwrap();
        let s = build_initial_state(&InitFamilySpec::new(sigma, v), &p, Grid::new(20.0, 401).unwrap()).unwrap().state;
        let out = step_primitive(&s, &p, &SolverConfig::default(), dt, None, 1).unwrap();
        let m0 = s.rho.integrate();
        let dm = out.state.rho.integrate() - m0;
        prop_assert!((dm - out.inflow.mass).abs() <= 1e-13 * m0);
    }
}

#[test]
fn pressure_gradient_sets_rest_in_motion() {
    let p = ModelParams::new(1.0, 2.0, 1.0, 1.0).unwrap();
    let spec = InitFamilySpec::new(1.0, VelocityProfile::Zero);
    let s = build_initial_state(&spec, &p, Grid::new(50.0, 4001).unwrap())
        .unwrap()
        .state;
    let out = step_primitive(&s, &p, &SolverConfig::default(), 1e-3, None, 1).unwrap();
    assert!(out.state.u.max_abs() > 0.0);
    // every interior node moves, including those at the floor-level tails
    let u = out.state.u.values();
    let frozen = u[1..u.len() - 1]
        .iter()
        .zip(s.rho.ddx().values()[1..].iter())
        .filter(|(v, g)| **g != 0.0 && **v == 0.0)
        .count();
    assert_eq!(frozen, 0);
}

#[test]
fn effective_velocity_matches_viscous_potential() {
    // v - u from alpha rho^(delta-2) rho_x and from Phi(rho)_x agree to O(dx^2)
    let p = ModelParams::new(1.0, 2.0, 0.75, 1.0).unwrap();
    let mut gaps = Vec::new();
    for n in [201, 401, 801] {
        let g = Grid::new(5.0, n).unwrap();
        let s = FluidState {
            rho: Field::from_fn(g, |x| 1.0 / (1.0 + x * x)),
            u: Field::from_fn(g, |x| (-x * x).exp()),
            t: 0.0,
        };
        let a = effective_velocity(&s, &p).unwrap().v;
        let b = effective_velocity_from_potential(&s, &p).unwrap();
        gaps.push(a.zip_with(&b, |x, y| x - y).max_abs());
    }
    assert!(gaps[0] < 1e-2, "{gaps:?}");
    assert!(
        gaps[0] / gaps[1] > 3.5 && gaps[1] / gaps[2] > 3.5,
        "{gaps:?}"
    );
}
