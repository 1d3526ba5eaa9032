//! Far-field-vacuum initial data `rho0 = 1/(1+|x|^(2 sigma))` with a
//! choice of velocity profiles, the admissible sigma window and the
//! initial compatibility check.

use serde::{Deserialize, Serialize};

use crate::error::StateError;
use crate::grid::{Field, Grid};
use crate::params::{ModelParams, Regime};
use crate::state::FluidState;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case", deny_unknown_fields)]
pub enum VelocityProfile {
    Zero,
    /// `c exp(-(x/w)^2)`
    Bump {
        amplitude: f64,
        width: f64,
    },
    /// `c (1-(x/w)^2)^3` on `|x| < w`, zero outside
    CompactBump {
        amplitude: f64,
        width: f64,
    },
    /// `c / (1+(x/w)^2)`
    Lorentzian {
        amplitude: f64,
        width: f64,
    },
}

impl VelocityProfile {
    pub fn eval(&self, x: f64) -> f64 {
        match *self {
            VelocityProfile::Zero => 0.0,
            VelocityProfile::Bump { amplitude, width } => amplitude * (-(x / width).powi(2)).exp(),
            VelocityProfile::CompactBump { amplitude, width } => {
                let s = x / width;
                if s.abs() < 1.0 {
                    amplitude * (1.0 - s * s).powi(3)
                } else {
                    0.0
                }
            }
            VelocityProfile::Lorentzian { amplitude, width } => {
                amplitude / (1.0 + (x / width).powi(2))
            }
        }
    }

    fn width(&self) -> Option<f64> {
        match *self {
            VelocityProfile::Zero => None,
            VelocityProfile::Bump { width, .. }
            | VelocityProfile::CompactBump { width, .. }
            | VelocityProfile::Lorentzian { width, .. } => Some(width),
        }
    }

    pub fn compactly_supported(&self) -> bool {
        matches!(
            self,
            VelocityProfile::Zero | VelocityProfile::CompactBump { .. }
        )
    }
}

/// How the vacuum floor enters the initial density.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Regularization {
    /// `max(rho0, eps)`
    #[default]
    Clamp,
    /// `rho0 + eps`, the perturbed data of the non-vacuum approximation
    Shift,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct InitFamilySpec {
    pub sigma: f64,
    pub velocity: VelocityProfile,
    /// Floor relative to `max rho0 = 1`.
    pub vacuum_floor: f64,
    pub regularization: Regularization,
}

impl InitFamilySpec {
    pub fn new(sigma: f64, velocity: VelocityProfile) -> Self {
        Self {
            sigma,
            velocity,
            vacuum_floor: 1e-8,
            regularization: Regularization::Clamp,
        }
    }

    pub fn density(&self, x: f64) -> f64 {
        1.0 / (1.0 + x.abs().powf(2.0 * self.sigma))
    }
}

/// Open interval `(lower, upper)`; `upper` may be infinite.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SigmaWindow {
    pub lower: f64,
    pub upper: f64,
}

impl SigmaWindow {
    pub fn contains(&self, sigma: f64) -> bool {
        sigma > self.lower && sigma < self.upper
    }

    pub fn is_empty(&self) -> bool {
        self.lower >= self.upper
    }
}

pub fn sigma_window(p: &ModelParams) -> SigmaWindow {
    let lower = f64::max(0.75, 1.0 / (4.0 * (p.gamma() - 1.0)));
    let upper = match p.regime() {
        Regime::SubLinear => 1.0 / (4.0 * (1.0 - p.delta())),
        Regime::Linear => f64::INFINITY,
    };
    SigmaWindow { lower, upper }
}

#[derive(Debug, Clone, PartialEq)]
pub struct InitialData {
    pub state: FluidState,
    pub sigma_in_window: bool,
    pub window: SigmaWindow,
}

pub fn build_initial_state(
    spec: &InitFamilySpec,
    p: &ModelParams,
    grid: Grid,
) -> Result<InitialData, StateError> {
    if !(spec.sigma > 0.0 && spec.sigma.is_finite()) {
        return Err(StateError::BadSigma(spec.sigma));
    }
    if let Some(w) = spec.velocity.width() {
        if !(w > 0.0) {
            return Err(StateError::BadWidth(w));
        }
    }
    let eps = spec.vacuum_floor;
    let rho = Field::from_fn(grid, |x| {
        let r = spec.density(x);
        match spec.regularization {
            Regularization::Clamp => r.max(eps),
            Regularization::Shift => r + eps,
        }
    });
    let u = Field::from_fn(grid, |x| spec.velocity.eval(x));
    let window = sigma_window(p);
    Ok(InitialData {
        state: FluidState { rho, u, t: 0.0 },
        sigma_in_window: window.contains(spec.sigma),
        window,
    })
}

#[derive(Debug, Clone, PartialEq)]
pub struct CompatibilityReport {
    /// `|rho0^((delta-1)/2) u0_x|_2`
    pub g1_norm: f64,
    /// `|rho0^(delta-1) alpha u0_xx|_2`
    pub g2_norm: f64,
    pub sigma_window_ok: bool,
    pub norms_finite: bool,
    pub note: Option<String>,
}

/// Evaluates the two compatibility quantities on the grid. `sigma` is the
/// decay exponent the state was built from, used only for the window flag.
pub fn check_compatibility(
    state: &FluidState,
    p: &ModelParams,
    sigma: f64,
) -> Result<CompatibilityReport, StateError> {
    if let Some(i) = state.rho.values().iter().position(|&r| r == 0.0) {
        return Err(StateError::Vacuum(i));
    }
    state.require_positive()?;
    let d = p.delta();
    let ux = state.u.ddx();
    let uxx = state.u.d2dx2();
    let g1 = state.rho.zip_with(&ux, |r, v| r.powf(0.5 * (d - 1.0)) * v);
    let g2 = state
        .rho
        .zip_with(&uxx, |r, v| r.powf(d - 1.0) * p.alpha() * v);
    let g1_norm = g1.l2_norm();
    let g2_norm = g2.l2_norm();
    Ok(CompatibilityReport {
        g1_norm,
        g2_norm,
        sigma_window_ok: sigma_window(p).contains(sigma),
        norms_finite: g1_norm.is_finite() && g2_norm.is_finite(),
        note: None,
    })
}

/// [`check_compatibility`] for a state built from `spec`, annotating
/// velocity profiles whose derivative is not compactly supported.
pub fn check_family_compatibility(
    spec: &InitFamilySpec,
    p: &ModelParams,
    state: &FluidState,
) -> Result<CompatibilityReport, StateError> {
    let mut report = check_compatibility(state, p, spec.sigma)?;
    report.note = match spec.velocity {
        VelocityProfile::Bump { .. } => Some(
            "gaussian velocity is not compactly supported; its tail decays faster than any power of rho0, \
             so the truncated norms are representative"
                .to_string(),
        ),
        VelocityProfile::Lorentzian { .. } => Some(format!(
            "lorentzian velocity decays algebraically; g1 and g2 stay in L2 on the real line \
             only while 4 sigma (1-delta) < 7 (here {:.3})",
            4.0 * spec.sigma * (1.0 - p.delta())
        )),
        _ => None,
    };
    Ok(report)
}
