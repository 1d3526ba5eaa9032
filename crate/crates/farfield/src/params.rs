//! Model constants for the pressure law `P = A rho^gamma` and the
//! density-dependent viscosity `mu = alpha rho^delta`.

use serde::{Deserialize, Serialize};

use crate::error::ParamError;

/// Which reformulation applies: `0 < delta < 1` or `delta == 1`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Regime {
    SubLinear,
    Linear,
}

/// Physical constants of the isentropic degenerate system.
///
/// Construction validates `A > 0`, `alpha > 0`, `gamma > 1` and
/// `0 < delta <= 1`. Pairs `(gamma, delta)` outside the global
/// well-posedness window are still constructible; [`ModelParams::admissible`]
/// reports them so callers can warn.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ModelParams {
    a: f64,
    gamma: f64,
    delta: f64,
    alpha: f64,
}

/// Constants of the `(phi, u, psi)` system: `a = (A gamma/(gamma-1))^((1-delta)/(gamma-1))`
/// and `e = (delta-1)/(2(gamma-1))`, so that `a phi^(2e) = rho^(delta-1)`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct DerivedConstants {
    pub a: f64,
    pub e: f64,
}

impl ModelParams {
    pub fn new(a: f64, gamma: f64, delta: f64, alpha: f64) -> Result<Self, ParamError> {
        check(a.is_finite() && a > 0.0, "A", "A must be positive", a)?;
        check(
            gamma.is_finite() && gamma > 1.0,
            "gamma",
            "gamma must exceed 1",
            gamma,
        )?;
        check(
            delta.is_finite() && delta > 0.0 && delta <= 1.0,
            "delta",
            "delta must lie in (0, 1]",
            delta,
        )?;
        check(
            alpha.is_finite() && alpha > 0.0,
            "alpha",
            "alpha must be positive",
            alpha,
        )?;
        Ok(Self {
            a,
            gamma,
            delta,
            alpha,
        })
    }

    /// Entropy constant `A`.
    pub fn pressure_constant(&self) -> f64 {
        self.a
    }

    pub fn gamma(&self) -> f64 {
        self.gamma
    }

    pub fn delta(&self) -> f64 {
        self.delta
    }

    pub fn alpha(&self) -> f64 {
        self.alpha
    }

    pub fn regime(&self) -> Regime {
        if self.delta == 1.0 {
            Regime::Linear
        } else {
            Regime::SubLinear
        }
    }

    /// `gamma >= delta + 1/2` for `delta < 1`, `gamma > 3/2` for `delta = 1`.
    pub fn admissible(&self) -> bool {
        match self.regime() {
            Regime::SubLinear => self.gamma >= self.delta + 0.5,
            Regime::Linear => self.gamma > 1.5,
        }
    }

    pub fn derived(&self) -> DerivedConstants {
        let g1 = self.gamma - 1.0;
        DerivedConstants {
            a: (self.a * self.gamma / g1).powf((1.0 - self.delta) / g1),
            e: (self.delta - 1.0) / (2.0 * g1),
        }
    }

    pub fn pressure(&self, rho: f64) -> Result<f64, ParamError> {
        non_negative(rho)?;
        Ok(self.pressure_unchecked(rho))
    }

    pub fn viscosity(&self, rho: f64) -> Result<f64, ParamError> {
        non_negative(rho)?;
        Ok(self.viscosity_unchecked(rho))
    }

    #[inline]
    pub(crate) fn pressure_unchecked(&self, rho: f64) -> f64 {
        self.a * powr(rho, self.gamma)
    }

    #[inline]
    pub(crate) fn viscosity_unchecked(&self, rho: f64) -> f64 {
        self.alpha * powr(rho, self.delta)
    }

    /// `sqrt(A gamma rho^(gamma-1))`.
    #[inline]
    pub fn sound_speed(&self, rho: f64) -> f64 {
        (self.a * self.gamma * powr(rho, self.gamma - 1.0)).sqrt()
    }

    /// Pressure-like variable `phi = A gamma/(gamma-1) rho^(gamma-1)`.
    #[inline]
    pub fn phi_of_rho(&self, rho: f64) -> f64 {
        self.a * self.gamma / (self.gamma - 1.0) * powr(rho, self.gamma - 1.0)
    }

    #[inline]
    pub fn rho_of_phi(&self, phi: f64) -> f64 {
        ((self.gamma - 1.0) * phi / (self.a * self.gamma)).powf(1.0 / (self.gamma - 1.0))
    }

    /// Viscous potential `Phi(rho)` with `Phi'(rho) = mu(rho)/rho^2`.
    #[inline]
    pub fn viscous_potential(&self, rho: f64) -> f64 {
        match self.regime() {
            Regime::Linear => self.alpha * rho.ln(),
            Regime::SubLinear => self.alpha * rho.powf(self.delta - 1.0) / (self.delta - 1.0),
        }
    }
}

/// `x^p` with integer exponents routed through `powi`.
#[inline]
pub(crate) fn powr(x: f64, p: f64) -> f64 {
    if p == 1.0 {
        x
    } else if p == 2.0 {
        x * x
    } else if p.fract() == 0.0 && p.abs() < 16.0 {
        x.powi(p as i32)
    } else {
        x.powf(p)
    }
}

fn check(ok: bool, field: &'static str, bound: &'static str, value: f64) -> Result<(), ParamError> {
    if ok {
        Ok(())
    } else {
        Err(ParamError::OutOfRange {
            field,
            bound,
            value,
        })
    }
}

fn non_negative(rho: f64) -> Result<(), ParamError> {
    if rho >= 0.0 {
        Ok(())
    } else {
        Err(ParamError::NegativeDensity(rho))
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    fn p(a: f64, g: f64, d: f64, al: f64) -> ModelParams {
        ModelParams::new(a, g, d, al).unwrap()
    }

    #[test]
    fn admissibility_examples() {
        assert!(p(1.0, 2.0, 1.0, 1.0).admissible());
        assert!(p(1.0, 2.0, 0.75, 1.0).admissible());
        assert!(!p(1.0, 1.2, 0.75, 1.0).admissible());
        // boundary of the sub-linear window is included, the linear one is not
        assert!(p(1.0, 1.25, 0.75, 1.0).admissible());
        assert!(!p(1.0, 1.5, 1.0, 1.0).admissible());
    }

    #[test]
    fn rejects_out_of_range() {
        let err = ModelParams::new(1.0, 0.9, 1.0, 1.0).unwrap_err();
        assert!(err.to_string().contains("gamma must exceed 1"), "{err}");
        assert!(ModelParams::new(0.0, 2.0, 1.0, 1.0).is_err());
        assert!(ModelParams::new(1.0, 2.0, 0.0, 1.0).is_err());
        assert!(ModelParams::new(1.0, 2.0, 1.1, 1.0).is_err());
        assert!(ModelParams::new(1.0, 2.0, 1.0, -1.0).is_err());
        assert!(ModelParams::new(1.0, f64::NAN, 1.0, 1.0).is_err());
    }

    #[test]
    fn derived_constants_examples() {
        let d = p(1.0, 2.0, 0.5, 1.0).derived();
        assert!((d.a - 2f64.sqrt()).abs() < 1e-15);
        assert_eq!(d.e, -0.25);
        let d = p(1.0, 2.0, 1.0, 1.0).derived();
        assert_eq!(d.a, 1.0);
        assert_eq!(d.e, 0.0);
        let d = p(1.0, 2.0, 0.75, 1.0).derived();
        assert!((d.a - 2f64.powf(0.25)).abs() < 1e-15);
        assert!((d.a - 1.189207).abs() < 1e-6);
        assert_eq!(d.e, -0.125);
    }

    #[test]
    fn pressure_and_viscosity() {
        assert_eq!(p(1.0, 2.0, 1.0, 1.0).pressure(0.5).unwrap(), 0.25);
        assert_eq!(p(1.0, 2.0, 1.0, 1.0).viscosity(0.0).unwrap(), 0.0);
        assert_eq!(p(1.0, 2.0, 0.5, 2.0).viscosity(4.0).unwrap(), 4.0);
        assert!(p(1.0, 2.0, 1.0, 1.0).pressure(-1e-3).is_err());
        assert!(p(1.0, 2.0, 1.0, 1.0).viscosity(-1.0).is_err());
    }

    #[test]
    fn phi_inverse() {
        let m = p(1.0, 3.0, 1.0, 1.0);
        // phi = 1.5 rho^2 for A = 1, gamma = 3
        assert!((m.rho_of_phi(1.5 * 4.0) - 2.0).abs() < 1e-14);
        let m = p(1.0, 2.0, 1.0, 1.0);
        assert_eq!(m.phi_of_rho(0.5), 1.0);
        assert_eq!(m.rho_of_phi(1.0), 0.5);
    }

    proptest! {
        #[test]
        fn linear_regime_has_unit_coefficient(a in 0.01f64..10.0, g in 1.01f64..5.0) {
            let d = p(a, g, 1.0, 1.0).derived();
            prop_assert_eq!(d.a, 1.0);
            prop_assert_eq!(d.e, 0.0);
        }

        #[test]
        fn admissible_monotone_in_gamma(g in 1.01f64..4.0, dg in 0.0f64..3.0, d in 0.05f64..1.0) {
            let d = if d > 0.99 { 1.0 } else { d };
            if p(1.0, g, d, 1.0).admissible() {
                prop_assert!(p(1.0, g + dg, d, 1.0).admissible());
            }
        }

        #[test]
        fn reformulated_coefficient_is_rho_power(rho in 1e-6f64..10.0, g in 1.1f64..4.0, d in 0.05f64..0.99) {
            let m = p(1.3, g, d, 1.0);
            let c = m.derived();
            let lhs = c.a * m.phi_of_rho(rho).powf(2.0 * c.e);
            let rhs = rho.powf(d - 1.0);
            prop_assert!((lhs / rhs - 1.0).abs() < 1e-12);
        }
    }
}
