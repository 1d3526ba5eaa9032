//! Transforms between `(rho, u)` and `(phi, u, psi)`, and the effective
//! velocity `v = u + alpha rho^(delta-2) rho_x`.
//!
//! `phi` is the pressure-like variable `A gamma/(gamma-1) rho^(gamma-1)`.
//! `psi` is `delta/(delta-1) (rho^(delta-1))_x` in the sub-linear regime and
//! `(ln rho)_x` when `delta = 1`; it is obtained by differentiating the
//! transformed density on the grid, not by the chain rule on `rho_x`.
//! The viscous potential `Phi` (with `Phi' = mu/rho^2`) is a different
//! object from `phi` and lives in [`ModelParams::viscous_potential`].

use crate::error::StateError;
use crate::grid::Field;
use crate::params::{ModelParams, Regime};
use crate::state::{require_positive, FluidState};

#[derive(Debug, Clone, PartialEq)]
pub struct ReformulatedState {
    pub phi: Field,
    pub u: Field,
    pub psi: Field,
    pub regime: Regime,
    pub t: f64,
}

#[derive(Debug, Clone, PartialEq)]
pub struct EffectiveVelocityField {
    pub v: Field,
}

/// `psi` from a positive density field.
pub fn psi_of_rho(rho: &Field, p: &ModelParams) -> Field {
    match p.regime() {
        Regime::Linear => rho.map(f64::ln).ddx(),
        Regime::SubLinear => {
            let d = p.delta();
            let k = d / (d - 1.0);
            rho.map(|r| r.powf(d - 1.0)).ddx().map(|g| k * g)
        }
    }
}

pub fn to_reformulated(s: &FluidState, p: &ModelParams) -> Result<ReformulatedState, StateError> {
    s.require_positive()?;
    Ok(ReformulatedState {
        phi: s.rho.map(|r| p.phi_of_rho(r)),
        u: s.u.clone(),
        psi: psi_of_rho(&s.rho, p),
        regime: p.regime(),
        t: s.t,
    })
}

pub fn from_reformulated(r: &ReformulatedState, p: &ModelParams) -> Result<FluidState, StateError> {
    if r.regime != p.regime() {
        return Err(StateError::RegimeMismatch);
    }
    if let Some(node) = r.phi.values().iter().position(|&v| !(v > 0.0)) {
        return Err(StateError::NonPositivePhi {
            node,
            value: r.phi.values()[node],
        });
    }
    Ok(FluidState {
        rho: r.phi.map(|f| p.rho_of_phi(f)),
        u: r.u.clone(),
        t: r.t,
    })
}

pub fn effective_velocity(
    s: &FluidState,
    p: &ModelParams,
) -> Result<EffectiveVelocityField, StateError> {
    s.require_positive()?;
    Ok(EffectiveVelocityField {
        v: effective_velocity_unchecked(&s.rho, &s.u, p),
    })
}

pub(crate) fn effective_velocity_unchecked(rho: &Field, u: &Field, p: &ModelParams) -> Field {
    let rho_x = rho.ddx();
    let e = p.delta() - 2.0;
    let alpha = p.alpha();
    let vals = rho
        .values()
        .iter()
        .zip(rho_x.values())
        .zip(u.values())
        .map(|((&r, &rx), &uu)| uu + alpha * r.powf(e) * rx)
        .collect();
    Field::from_vec(*rho.grid(), vals)
}

/// `u + (Phi(rho))_x`, the second route to the effective velocity.
pub fn effective_velocity_from_potential(
    s: &FluidState,
    p: &ModelParams,
) -> Result<Field, StateError> {
    require_positive(&s.rho)?;
    let phi_x = s.rho.map(|r| p.viscous_potential(r)).ddx();
    Ok(s.u.zip_with(&phi_x, |a, b| a + b))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::grid::Grid;
    use proptest::prelude::*;

    fn params(d: f64) -> ModelParams {
        ModelParams::new(1.0, 2.0, d, 1.0).unwrap()
    }

    fn state(g: Grid, rho: impl Fn(f64) -> f64, u: impl Fn(f64) -> f64) -> FluidState {
        FluidState {
            rho: Field::from_fn(g, rho),
            u: Field::from_fn(g, u),
            t: 0.0,
        }
    }

    #[test]
    fn constant_density() {
        let g = Grid::new(5.0, 51).unwrap();
        for d in [0.5, 1.0] {
            let r = to_reformulated(&state(g, |_| 0.5, |_| 0.0), &params(d)).unwrap();
            assert!(r.phi.values().iter().all(|&v| v == 1.0));
            assert!(r.psi.values().iter().all(|&v| v.abs() < 1e-12));
            let back = from_reformulated(&r, &params(d)).unwrap();
            assert!(back.rho.values().iter().all(|&v| v == 0.5));
        }
    }

    #[test]
    fn log_density_gradient() {
        // x = 1 is a node; psi(1) = -1 up to O(dx^2)
        let g = Grid::new(4.0, 8001).unwrap();
        let s = state(g, |x| 1.0 / (1.0 + x * x), |_| 0.0);
        let r = to_reformulated(&s, &params(1.0)).unwrap();
        let i = 5000;
        assert!((g.x(i) - 1.0).abs() < 1e-12);
        assert!((r.psi.values()[i] + 1.0).abs() < 1e-6);
        for (k, &v) in r.psi.values().iter().enumerate().skip(1).take(7998) {
            let x = g.x(k);
            assert!((v + 2.0 * x / (1.0 + x * x)).abs() < 1e-5);
        }
    }

    #[test]
    fn sublinear_psi_vanishes_at_critical_point() {
        let g = Grid::new(4.0, 401).unwrap();
        let s = state(g, |x| 1.0 / (1.0 + x * x), |_| 0.0);
        let r = to_reformulated(&s, &params(0.5)).unwrap();
        assert!(r.psi.values()[200].abs() < 1e-14);
    }

    #[test]
    fn round_trip_fractional_decay() {
        let g = Grid::new(50.0, 2001).unwrap();
        let p = ModelParams::new(1.0, 1.7, 0.75, 1.0).unwrap();
        let s = state(g, |x| 1.0 / (1.0 + x.abs().powf(1.8)), |x| x.sin());
        let back = from_reformulated(&to_reformulated(&s, &p).unwrap(), &p).unwrap();
        for (a, b) in back.rho.values().iter().zip(s.rho.values()) {
            assert!((a - b).abs() <= 1e-12);
        }
        assert_eq!(back.u, s.u);
    }

    #[test]
    fn rejects_non_positive() {
        let g = Grid::new(1.0, 16).unwrap();
        let mut s = state(g, |_| 1.0, |_| 0.0);
        s.rho.values_mut()[7] = 0.0;
        assert!(matches!(
            to_reformulated(&s, &params(1.0)),
            Err(StateError::NonPositiveDensity { node: 7, .. })
        ));
        assert!(effective_velocity(&s, &params(1.0)).is_err());
        let mut r = to_reformulated(&state(g, |_| 1.0, |_| 0.0), &params(1.0)).unwrap();
        r.phi.values_mut()[2] = -1.0;
        assert!(matches!(
            from_reformulated(&r, &params(1.0)),
            Err(StateError::NonPositivePhi { node: 2, .. })
        ));
    }

    #[test]
    fn effective_velocity_examples() {
        let g = Grid::new(4.0, 8001).unwrap();
        let s = state(g, |x| 1.0 / (1.0 + x * x), |_| 0.0);
        let v = effective_velocity(&s, &params(1.0)).unwrap().v;
        assert!((v.values()[5000] + 1.0).abs() < 1e-6);

        let s = state(g, |_| 0.3, |_| 0.0);
        assert!(effective_velocity(&s, &params(0.5)).unwrap().v.max_abs() < 1e-12);
    }

    #[test]
    fn effective_velocity_against_symbolic_derivative() {
        // delta = 1/2, rho = exp(-x^2): v = u - 2 alpha x rho^(-1/2)
        let g = Grid::new(3.0, 6001).unwrap();
        let s = state(g, |x| (-x * x).exp(), |x| 0.3 + x.cos());
        let v = effective_velocity(&s, &params(0.5)).unwrap().v;
        assert_eq!(v.values()[3000], s.u.values()[3000]);
        for i in (1..6000).step_by(97) {
            let x = g.x(i);
            let exact = 0.3 + x.cos() - 2.0 * x * (0.5 * x * x).exp();
            assert!(
                (v.values()[i] - exact).abs() < 1e-4 * (1.0 + exact.abs()),
                "x = {x}"
            );
        }
    }

    #[test]
    fn linear_psi_matches_effective_velocity_shift() {
        // for delta = 1 and alpha = 1, v - u is (ln rho)_x computed another way
        let g = Grid::new(10.0, 2001).unwrap();
        let s = state(g, |x| 1.0 / (1.0 + x * x), |x| (-x * x).exp());
        let p = params(1.0);
        let r = to_reformulated(&s, &p).unwrap();
        let v = effective_velocity(&s, &p).unwrap().v;
        for i in 1..2000 {
            let shift = v.values()[i] - s.u.values()[i];
            assert!((shift - r.psi.values()[i]).abs() < 1e-4);
        }
    }

    #[test]
    fn potential_route_agrees_at_second_order() {
        let err = |n| {
            let g = Grid::new(6.0, n).unwrap();
            let s = state(g, |x| 1.0 / (1.0 + x.abs().powf(3.0)), |x| x.sin());
            let p = params(0.75);
            let a = effective_velocity(&s, &p).unwrap().v;
            let b = effective_velocity_from_potential(&s, &p).unwrap();
            a.zip_with(&b, |x, y| x - y).max_abs()
        };
        let (e1, e2) = (err(601), err(1201));
        assert!(e1 < 1e-3);
        assert!(e1 / e2 > 3.5, "{e1} {e2}");
    }

    proptest! {
        #[test]
        fn round_trip_is_identity(a in 0.1f64..5.0, g in 1.1f64..3.0, d in 0.1f64..1.0, s in 0.5f64..2.0) {
            let p = ModelParams::new(a, g, if d > 0.95 { 1.0 } else { d }, 1.0).unwrap();
            let grid = Grid::new(20.0, 101).unwrap();
            let st = state(grid, |x| 1.0 / (1.0 + x.abs().powf(2.0 * s)), |x| x.cos());
            let back = from_reformulated(&to_reformulated(&st, &p).unwrap(), &p).unwrap();
            for (x, y) in back.rho.values().iter().zip(st.rho.values()) {
                prop_assert!((x / y - 1.0).abs() < 1e-12);
            }
        }
    }
}
