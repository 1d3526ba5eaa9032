use crate::error::StateError;
use crate::grid::{Field, Grid};

/// Density and velocity at one instant.
#[derive(Debug, Clone, PartialEq)]
pub struct FluidState {
    pub rho: Field,
    pub u: Field,
    pub t: f64,
}

impl FluidState {
    pub fn new(rho: Field, u: Field, t: f64) -> Result<Self, StateError> {
        if rho.len() != u.len() || rho.grid() != u.grid() {
            return Err(StateError::Grid(crate::error::GridError::LengthMismatch {
                expected: rho.len(),
                found: u.len(),
            }));
        }
        Ok(Self { rho, u, t })
    }

    pub fn grid(&self) -> &Grid {
        self.rho.grid()
    }

    /// Fails on the first node with `rho <= 0`.
    pub fn require_positive(&self) -> Result<(), StateError> {
        require_positive(&self.rho)
    }
}

pub(crate) fn require_positive(rho: &Field) -> Result<(), StateError> {
    match rho.values().iter().position(|&r| !(r > 0.0)) {
        None => Ok(()),
        Some(node) => Err(StateError::NonPositiveDensity {
            node,
            value: rho.values()[node],
        }),
    }
}
