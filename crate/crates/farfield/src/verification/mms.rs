use serde::{Deserialize, Serialize};

use crate::grid::{Field, Grid};
use crate::params::ModelParams;
use crate::solver::SourceTerms;
use crate::state::FluidState;

/// Closed-form space-time fields with enough derivatives to build the
/// forcing of the primitive system.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum ManufacturedCase {
    /// `rho = 0.5 + 0.3 e^(-x^2) (1 + 0.1 sin t)`,
    /// `u = 0.2 sin(x) e^(-x^2/4) cos t`.
    GaussianPulse,
    /// `rho = rho0`, `u = 0`: zero forcing.
    Constant { rho: f64 },
}

/// Values and derivatives of `rho` and `u` at one point.
#[derive(Debug, Clone, Copy, PartialEq)]
pub(crate) struct Jet {
    pub rho: f64,
    pub rho_t: f64,
    pub rho_x: f64,
    pub rho_xx: f64,
    pub rho_xt: f64,
    pub u: f64,
    pub u_t: f64,
    pub u_x: f64,
    pub u_xx: f64,
}

impl ManufacturedCase {
    pub(crate) fn jet(&self, t: f64, x: f64) -> Jet {
        match *self {
            ManufacturedCase::GaussianPulse => {
                let g = (-x * x).exp();
                let tt = 1.0 + 0.1 * t.sin();
                let tt_t = 0.1 * t.cos();
                let h = (-0.25 * x * x).exp();
                let h1 = -0.5 * x * h;
                let h2 = (0.25 * x * x - 0.5) * h;
                let (s, c) = x.sin_cos();
                let (ct, st) = (t.cos(), t.sin());
                Jet {
                    rho: 0.5 + 0.3 * g * tt,
                    rho_t: 0.3 * g * tt_t,
                    rho_x: -0.6 * x * g * tt,
                    rho_xx: 0.3 * (4.0 * x * x - 2.0) * g * tt,
                    rho_xt: -0.6 * x * g * tt_t,
                    u: 0.2 * s * h * ct,
                    u_t: -0.2 * s * h * st,
                    u_x: 0.2 * ct * (c * h + s * h1),
                    u_xx: 0.2 * ct * (-s * h + 2.0 * c * h1 + s * h2),
                }
            }
            ManufacturedCase::Constant { rho } => Jet {
                rho,
                rho_t: 0.0,
                rho_x: 0.0,
                rho_xx: 0.0,
                rho_xt: 0.0,
                u: 0.0,
                u_t: 0.0,
                u_x: 0.0,
                u_xx: 0.0,
            },
        }
    }

    pub fn rho(&self, t: f64, x: f64) -> f64 {
        self.jet(t, x).rho
    }

    pub fn u(&self, t: f64, x: f64) -> f64 {
        self.jet(t, x).u
    }

    pub fn state(&self, grid: Grid, t: f64) -> FluidState {
        FluidState {
            rho: Field::from_fn(grid, |x| self.rho(t, x)),
            u: Field::from_fn(grid, |x| self.u(t, x)),
            t,
        }
    }

    /// Lower bound of `rho` over all space-time.
    pub fn min_density(&self) -> f64 {
        match *self {
            ManufacturedCase::GaussianPulse => 0.5,
            ManufacturedCase::Constant { rho } => rho,
        }
    }

    pub fn sources(&self, p: ModelParams) -> ManufacturedSources {
        ManufacturedSources {
            case: *self,
            params: p,
        }
    }

    /// `v_t + u v_x + (A gamma/alpha) rho^(gamma-delta) (v - u)` on the exact
    /// fields, with `v = u + alpha rho^(delta-2) rho_x`.
    pub fn effective_velocity_source(&self, p: &ModelParams, t: f64, x: f64) -> f64 {
        let j = self.jet(t, x);
        let (a, g, d, al) = (p.pressure_constant(), p.gamma(), p.delta(), p.alpha());
        let r2 = j.rho.powf(d - 2.0);
        let r3 = j.rho.powf(d - 3.0);
        let v = j.u + al * r2 * j.rho_x;
        let v_t = j.u_t + al * ((d - 2.0) * r3 * j.rho_t * j.rho_x + r2 * j.rho_xt);
        let v_x = j.u_x + al * ((d - 2.0) * r3 * j.rho_x * j.rho_x + r2 * j.rho_xx);
        v_t + j.u * v_x + a * g / al * j.rho.powf(g - d) * (v - j.u)
    }
}

/// Forcing that makes a [`ManufacturedCase`] an exact solution of the
/// primitive system.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ManufacturedSources {
    case: ManufacturedCase,
    params: ModelParams,
}

impl SourceTerms for ManufacturedSources {
    /// `rho_t + (rho u)_x`
    fn mass(&self, t: f64, x: f64) -> f64 {
        let j = self.case.jet(t, x);
        j.rho_t + j.rho_x * j.u + j.rho * j.u_x
    }

    /// `(rho u)_t + (rho u^2 + A rho^gamma)_x - (alpha rho^delta u_x)_x`
    fn momentum(&self, t: f64, x: f64) -> f64 {
        let j = self.case.jet(t, x);
        let p = &self.params;
        let (a, g, d, al) = (p.pressure_constant(), p.gamma(), p.delta(), p.alpha());
        j.rho_t * j.u
            + j.rho * j.u_t
            + j.rho_x * j.u * j.u
            + 2.0 * j.rho * j.u * j.u_x
            + a * g * j.rho.powf(g - 1.0) * j.rho_x
            - al * (d * j.rho.powf(d - 1.0) * j.rho_x * j.u_x + j.rho.powf(d) * j.u_xx)
    }
}
