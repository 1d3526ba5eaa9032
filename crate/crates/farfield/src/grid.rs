//! Uniform truncated grid on `[-L, L]` and node-sampled fields.
//!
//! Derivatives are second order everywhere: central in the interior and
//! one-sided three/four-point stencils at the two boundary nodes. All
//! integrals use the composite trapezoidal rule so that norms and
//! conservation sums agree with each other.

use serde::{Deserialize, Serialize};

use crate::error::GridError;

pub const MIN_NODES: usize = 16;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Grid {
    half_width: f64,
    n: usize,
    dx: f64,
}

impl Grid {
    pub fn new(half_width: f64, n: usize) -> Result<Self, GridError> {
        if !(half_width.is_finite() && half_width > 0.0) {
            return Err(GridError::BadHalfWidth(half_width));
        }
        if n < MIN_NODES {
            return Err(GridError::TooFewNodes(n));
        }
        Ok(Self {
            half_width,
            n,
            dx: 2.0 * half_width / (n - 1) as f64,
        })
    }

    pub fn half_width(&self) -> f64 {
        self.half_width
    }

    pub fn len(&self) -> usize {
        self.n
    }

    pub fn is_empty(&self) -> bool {
        false
    }

    pub fn dx(&self) -> f64 {
        self.dx
    }

    /// Node `i`, computed symmetrically so that `x(i) == -x(n-1-i)` exactly.
    #[inline]
    pub fn x(&self, i: usize) -> f64 {
        let j = self.n - 1 - i;
        if i <= j {
            -self.half_width + i as f64 * self.dx
        } else {
            self.half_width - j as f64 * self.dx
        }
    }

    pub fn nodes(&self) -> impl Iterator<Item = f64> + '_ {
        (0..self.n).map(|i| self.x(i))
    }

    /// Same domain, `2(n-1)+1` nodes.
    pub fn refined(&self) -> Self {
        Self::new(self.half_width, 2 * (self.n - 1) + 1).expect("refinement of a valid grid")
    }

    /// Trapezoid weight of node `i`.
    #[inline]
    pub fn weight(&self, i: usize) -> f64 {
        if i == 0 || i == self.n - 1 {
            0.5 * self.dx
        } else {
            self.dx
        }
    }

    /// Index `i` with `x(i) <= x < x(i+1)` and the local coordinate in `[0, 1]`,
    /// or `None` outside `[-L, L]`.
    pub fn locate(&self, x: f64) -> Option<(usize, f64)> {
        if !(x >= -self.half_width && x <= self.half_width) {
            return None;
        }
        let s = (x + self.half_width) / self.dx;
        let i = (s.floor() as usize).min(self.n - 2);
        Some((i, (s - i as f64).clamp(0.0, 1.0)))
    }
}

/// Samples of a real function on the nodes of a [`Grid`].
#[derive(Debug, Clone, PartialEq)]
pub struct Field {
    grid: Grid,
    values: Vec<f64>,
}

impl Field {
    pub fn new(grid: Grid, values: Vec<f64>) -> Result<Self, GridError> {
        if values.len() != grid.len() {
            return Err(GridError::LengthMismatch {
                expected: grid.len(),
                found: values.len(),
            });
        }
        if let Some(i) = values.iter().position(|v| !v.is_finite()) {
            return Err(GridError::NonFinite(i));
        }
        Ok(Self { grid, values })
    }

    /// Unchecked constructor for solver internals; callers guarantee length.
    pub(crate) fn from_vec(grid: Grid, values: Vec<f64>) -> Self {
        debug_assert_eq!(values.len(), grid.len());
        Self { grid, values }
    }

    pub fn from_fn(grid: Grid, f: impl Fn(f64) -> f64) -> Self {
        Self {
            grid,
            values: grid.nodes().map(f).collect(),
        }
    }

    pub fn constant(grid: Grid, c: f64) -> Self {
        Self {
            grid,
            values: vec![c; grid.len()],
        }
    }

    pub fn grid(&self) -> &Grid {
        &self.grid
    }

    pub fn values(&self) -> &[f64] {
        &self.values
    }

    pub fn values_mut(&mut self) -> &mut [f64] {
        &mut self.values
    }

    pub fn into_values(self) -> Vec<f64> {
        self.values
    }

    pub fn len(&self) -> usize {
        self.values.len()
    }

    pub fn is_empty(&self) -> bool {
        self.values.is_empty()
    }

    pub fn is_finite(&self) -> bool {
        self.values.iter().all(|v| v.is_finite())
    }

    pub fn map(&self, f: impl Fn(f64) -> f64) -> Field {
        Field::from_vec(self.grid, self.values.iter().map(|&v| f(v)).collect())
    }

    pub fn zip_with(&self, other: &Field, f: impl Fn(f64, f64) -> f64) -> Field {
        assert_eq!(self.len(), other.len(), "fields on different grids");
        Field::from_vec(
            self.grid,
            self.values
                .iter()
                .zip(&other.values)
                .map(|(&a, &b)| f(a, b))
                .collect(),
        )
    }

    /// First derivative.
    pub fn ddx(&self) -> Field {
        Field::from_vec(self.grid, ddx_slice(&self.values, self.grid.dx))
    }

    /// Second derivative.
    pub fn d2dx2(&self) -> Field {
        Field::from_vec(self.grid, d2dx2_slice(&self.values, self.grid.dx))
    }

    /// Composite trapezoid over `[-L, L]`.
    pub fn integrate(&self) -> f64 {
        trapezoid(&self.values, self.grid.dx)
    }

    /// Running trapezoid integral `int_{-L}^{x_i} f`.
    pub fn cumulative_integral(&self) -> Field {
        let dx = self.grid.dx;
        let mut out = Vec::with_capacity(self.len());
        let mut acc = 0.0;
        out.push(0.0);
        for w in self.values.windows(2) {
            acc += 0.5 * dx * (w[0] + w[1]);
            out.push(acc);
        }
        Field::from_vec(self.grid, out)
    }

    pub fn max_abs(&self) -> f64 {
        self.values.iter().fold(0.0, |m, v| m.max(v.abs()))
    }

    pub fn min(&self) -> f64 {
        self.values.iter().copied().fold(f64::INFINITY, f64::min)
    }

    pub fn max(&self) -> f64 {
        self.values
            .iter()
            .copied()
            .fold(f64::NEG_INFINITY, f64::max)
    }

    /// Discrete `L^p` norm; `p = f64::INFINITY` gives the max norm.
    pub fn lp_norm(&self, p: f64) -> Result<f64, GridError> {
        if p == f64::INFINITY {
            return Ok(self.max_abs());
        }
        if !(p >= 1.0) {
            return Err(GridError::BadExponent(p));
        }
        Ok(self.lp_norm_finite(p))
    }

    pub(crate) fn lp_norm_finite(&self, p: f64) -> f64 {
        let acc = if p == 2.0 {
            weighted_sum(&self.values, self.grid.dx, |v| v * v)
        } else {
            weighted_sum(&self.values, self.grid.dx, |v| v.abs().powf(p))
        };
        acc.powf(1.0 / p)
    }

    pub fn l2_norm(&self) -> f64 {
        self.lp_norm_finite(2.0)
    }

    /// Piecewise-linear interpolation; `None` outside the domain.
    pub fn interpolate(&self, x: f64) -> Option<f64> {
        let (i, s) = self.grid.locate(x)?;
        Some((1.0 - s) * self.values[i] + s * self.values[i + 1])
    }

    /// `|f|_inf^2 / (|f|_2 |f_x|_2)`; bounded by one for fields vanishing
    /// at infinity.
    pub fn agmon_ratio(&self) -> f64 {
        let num = self.max_abs().powi(2);
        let den = self.l2_norm() * self.ddx().l2_norm();
        if num == 0.0 {
            0.0
        } else {
            num / den
        }
    }
}

pub(crate) fn trapezoid(values: &[f64], dx: f64) -> f64 {
    weighted_sum(values, dx, |v| v)
}

#[inline]
pub(crate) fn weighted_sum(values: &[f64], dx: f64, f: impl Fn(f64) -> f64) -> f64 {
    let n = values.len();
    if n == 0 {
        return 0.0;
    }
    let inner: f64 = values[1..n - 1].iter().map(|&v| f(v)).sum();
    dx * (inner + 0.5 * (f(values[0]) + f(values[n - 1])))
}

pub(crate) fn ddx_slice(f: &[f64], dx: f64) -> Vec<f64> {
    let n = f.len();
    assert!(n >= 3, "ddx needs at least 3 nodes");
    // differences first, so constants differentiate to exactly zero
    let h2 = 0.5 / dx;
    let mut out = vec![0.0; n];
    out[0] = (3.0 * (f[1] - f[0]) - (f[2] - f[1])) * h2;
    for i in 1..n - 1 {
        out[i] = (f[i + 1] - f[i - 1]) * h2;
    }
    out[n - 1] = (3.0 * (f[n - 1] - f[n - 2]) - (f[n - 2] - f[n - 3])) * h2;
    out
}

pub(crate) fn d2dx2_slice(f: &[f64], dx: f64) -> Vec<f64> {
    let n = f.len();
    assert!(n >= 4, "d2dx2 needs at least 4 nodes");
    let inv = 1.0 / (dx * dx);
    let mut out = vec![0.0; n];
    out[0] = (2.0 * (f[0] - f[1]) - 3.0 * (f[1] - f[2]) + (f[2] - f[3])) * inv;
    for i in 1..n - 1 {
        out[i] = (f[i + 1] - 2.0 * f[i] + f[i - 1]) * inv;
    }
    out[n - 1] =
        (2.0 * (f[n - 1] - f[n - 2]) - 3.0 * (f[n - 2] - f[n - 3]) + (f[n - 3] - f[n - 4])) * inv;
    out
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;
    use std::f64::consts::PI;

    #[test]
    fn grid_is_symmetric() {
        let g = Grid::new(50.0, 4001).unwrap();
        assert_eq!(g.dx(), 0.025);
        assert_eq!(g.x(0), -50.0);
        assert_eq!(g.x(4000), 50.0);
        assert_eq!(g.x(2000), 0.0);
        for i in 0..g.len() {
            assert_eq!(g.x(i), -g.x(g.len() - 1 - i));
        }
        assert!(g
            .nodes()
            .collect::<Vec<_>>()
            .windows(2)
            .all(|w| w[0] < w[1]));
    }

    #[test]
    fn rejects_bad_grids() {
        assert_eq!(Grid::new(1.0, 15), Err(GridError::TooFewNodes(15)));
        assert!(Grid::new(0.0, 100).is_err());
        assert!(Grid::new(f64::INFINITY, 100).is_err());
        let g = Grid::new(1.0, 16).unwrap();
        assert!(Field::new(g, vec![0.0; 15]).is_err());
        let mut v = vec![0.0; 16];
        v[3] = f64::NAN;
        assert_eq!(Field::new(g, v), Err(GridError::NonFinite(3)));
    }

    #[test]
    fn linear_and_quadratic_are_exact() {
        let g = Grid::new(3.0, 61).unwrap();
        let f = Field::from_fn(g, |x| x);
        for d in f.ddx().values() {
            assert!((d - 1.0).abs() < 1e-12);
        }
        let q = Field::from_fn(g, |x| x * x);
        for d in q.d2dx2().values() {
            assert!((d - 2.0).abs() < 1e-9);
        }
        for (i, d) in q.ddx().values().iter().enumerate() {
            assert!((d - 2.0 * g.x(i)).abs() < 1e-12);
        }
    }

    #[test]
    fn ddx_converges_at_second_order() {
        let err = |n| {
            let g = Grid::new(PI, n).unwrap();
            let d = Field::from_fn(g, f64::sin).ddx();
            (1..n - 1)
                .map(|i| (d.values()[i] - g.x(i).cos()).abs())
                .fold(0.0, f64::max)
        };
        let ratio = err(201) / err(401);
        assert!((ratio - 4.0).abs() < 0.05, "ratio {ratio}");
    }

    #[test]
    fn constant_has_zero_derivative() {
        let g = Grid::new(2.0, 33).unwrap();
        let c = Field::constant(g, 0.7);
        assert!(c.ddx().values().iter().all(|&v| v.abs() < 1e-13));
        assert!(c.d2dx2().values().iter().all(|&v| v.abs() < 1e-10));
    }

    #[test]
    fn quadrature_examples() {
        let g = Grid::new(50.0, 8001).unwrap();
        let f = Field::from_fn(g, |x| 1.0 / (1.0 + x * x));
        let exact = 2.0 * 50f64.atan();
        assert!((f.integrate() - exact).abs() < 1e-6);
        assert!((f.integrate() - 3.101).abs() < 1e-3);
        assert_eq!(Field::constant(g, 0.0).integrate(), 0.0);
        let odd = Field::from_fn(g, |x| x * (-x * x).exp());
        assert!(odd.integrate().abs() < 1e-15);
    }

    #[test]
    fn norm_examples() {
        let g = Grid::new(50.0, 8001).unwrap();
        let f = Field::from_fn(g, |x| 1.0 / (1.0 + x * x));
        assert_eq!(f.lp_norm(f64::INFINITY).unwrap(), 1.0);
        // int (1+x^2)^-2 over R is pi/2; the tail beyond 50 is ~3e-6
        let l2 = f.lp_norm(2.0).unwrap();
        assert!((l2 - (PI / 2.0).sqrt()).abs() < 1e-3, "{l2}");
        assert!((f.lp_norm(1.0).unwrap() - f.integrate()).abs() < 1e-14);
        let z = Field::constant(g, 0.0);
        for p in [1.0, 2.0, 3.5, f64::INFINITY] {
            assert_eq!(z.lp_norm(p).unwrap(), 0.0);
        }
        assert_eq!(f.lp_norm(0.5), Err(GridError::BadExponent(0.5)));
    }

    #[test]
    fn cumulative_integral_ends_at_total() {
        let g = Grid::new(5.0, 101).unwrap();
        let f = Field::from_fn(g, |x| (-x * x).exp());
        let c = f.cumulative_integral();
        assert_eq!(c.values()[0], 0.0);
        assert!((c.values()[100] - f.integrate()).abs() < 1e-14);
    }

    #[test]
    fn interpolation() {
        let g = Grid::new(1.0, 21).unwrap();
        let f = Field::from_fn(g, |x| 3.0 * x - 1.0);
        assert!((f.interpolate(0.333).unwrap() - (3.0 * 0.333 - 1.0)).abs() < 1e-13);
        assert_eq!(f.interpolate(1.0), Some(2.0));
        assert_eq!(f.interpolate(1.0001), None);
    }

    #[test]
    fn agmon_inequality_for_decaying_profiles() {
        let g = Grid::new(50.0, 4001).unwrap();
        for f in [
            Field::from_fn(g, |x| 1.0 / (1.0 + x * x)),
            Field::from_fn(g, |x| (-x * x).exp()),
            Field::from_fn(g, |x| x / (1.0 + x.powi(4))),
        ] {
            assert!(f.agmon_ratio() <= 1.05, "{}", f.agmon_ratio());
        }
    }

    proptest! {
        #[test]
        fn integral_of_derivative_telescopes(a in -2.0f64..2.0, b in 0.1f64..2.0, c in -1.0f64..1.0) {
            let g = Grid::new(3.0, 601).unwrap();
            let f = Field::from_fn(g, |x| a * (b * x).sin() + c * x * x);
            let lhs = f.ddx().integrate();
            let rhs = f.values()[600] - f.values()[0];
            prop_assert!((lhs - rhs).abs() < 1e-3 * (1.0 + a.abs() + c.abs()));
        }
    }
}
