//! Time integration of the primitive system (flux form in `(rho, rho u)`)
//! and of the reformulated `(phi, u, psi)` systems.
//!
//! Both steppers share one two-stage additive Runge-Kutta scheme: the
//! transport part uses the explicit Heun tableau and the viscous part an
//! L-stable SDIRK tableau with `g = 1 - 1/sqrt(2)`. Each stage solves one
//! tridiagonal system for the velocity; the scheme is second order in time
//! for the coupled problem.
//!
//! Boundary nodes `x = -L` and `x = L` keep their initial values.

mod primitive;
mod reformulated;

use std::fmt;

use serde::{Deserialize, Serialize};

use crate::diagnostics::{DiagnosticsRecord, SeriesBuilder};
use crate::error::SolverError;
use crate::params::ModelParams;
use crate::reformulate::{from_reformulated, to_reformulated, ReformulatedState};
use crate::state::FluidState;

pub use primitive::step_primitive;
pub use reformulated::step_reformulated;

/// Diagonal coefficient of the implicit stages.
pub(crate) const SDIRK_GAMMA: f64 = 1.0 - std::f64::consts::FRAC_1_SQRT_2;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Formulation {
    #[default]
    Primitive,
    Reformulated,
}

/// Explicit interface flux: central average, optionally blended with local
/// Lax-Friedrichs dissipation of weight `lf_weight`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum FluxScheme {
    Blended { lf_weight: f64 },
    Central,
}

impl FluxScheme {
    pub(crate) fn lf_weight(&self) -> f64 {
        match *self {
            FluxScheme::Blended { lf_weight } => lf_weight,
            FluxScheme::Central => 0.0,
        }
    }
}

impl Default for FluxScheme {
    fn default() -> Self {
        FluxScheme::Blended { lf_weight: 0.1 }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct SolverConfig {
    pub formulation: Formulation,
    /// Advective safety factor in `(0, 1]`.
    pub cfl: f64,
    /// Absolute density floor.
    pub vacuum_floor: f64,
    pub t_end: f64,
    /// Record diagnostics every this many steps (and at the final step).
    pub output_stride: usize,
    pub flux: FluxScheme,
    /// Fixed step size; `t_end` must be an integer multiple of it.
    pub fixed_dt: Option<f64>,
    /// Keep a state snapshot every this many records.
    pub snapshot_every: Option<usize>,
}

impl Default for SolverConfig {
    fn default() -> Self {
        Self {
            formulation: Formulation::Primitive,
            cfl: 0.5,
            vacuum_floor: 1e-8,
            t_end: 1.0,
            output_stride: 10,
            flux: FluxScheme::default(),
            fixed_dt: None,
            snapshot_every: None,
        }
    }
}

impl SolverConfig {
    pub fn validate(&self) -> Result<(), SolverError> {
        let bad = |m: &str| Err(SolverError::Config(m.to_string()));
        if !(self.cfl > 0.0 && self.cfl <= 1.0) {
            return bad("cfl must lie in (0, 1]");
        }
        if !(self.vacuum_floor > 0.0 && self.vacuum_floor.is_finite()) {
            return bad("vacuum_floor must be positive");
        }
        if !(self.t_end >= 0.0 && self.t_end.is_finite()) {
            return bad("t_end must be non-negative");
        }
        if self.output_stride == 0 {
            return bad("output_stride must be positive");
        }
        if self.snapshot_every == Some(0) {
            return bad("snapshot_every must be positive");
        }
        if let FluxScheme::Blended { lf_weight } = self.flux {
            if !(0.0..=1.0).contains(&lf_weight) {
                return bad("lf_weight must lie in [0, 1]");
            }
        }
        if let Some(dt) = self.fixed_dt {
            if !(dt > 0.0 && dt.is_finite()) {
                return bad("fixed dt must be positive");
            }
            let k = self.t_end / dt;
            if (k - k.round()).abs() > 1e-9 * k.max(1.0) {
                return bad("t_end must be an integer multiple of the fixed dt");
            }
        }
        Ok(())
    }
}

/// Manufactured forcing added to the right-hand sides of the primitive system.
pub trait SourceTerms: Sync {
    fn mass(&self, t: f64, x: f64) -> f64;
    fn momentum(&self, t: f64, x: f64) -> f64;
}

/// Net amount of a conserved quantity that entered through `x = -L` and
/// `x = L` (positive = into the domain).
#[derive(Debug, Clone, Copy, PartialEq, Default, Serialize, Deserialize)]
pub struct BoundaryFlux {
    pub mass: f64,
    pub momentum: f64,
}

impl std::ops::AddAssign for BoundaryFlux {
    fn add_assign(&mut self, o: Self) {
        self.mass += o.mass;
        self.momentum += o.momentum;
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct StepOutcome<S> {
    pub state: S,
    pub inflow: BoundaryFlux,
    /// Nodes lifted to the vacuum floor in this step.
    pub clamped: usize,
}

/// `cfl dx / max(|u| + c)`; `cfl dx` when nothing moves.
pub fn cfl_dt(s: &FluidState, p: &ModelParams, c: &SolverConfig) -> f64 {
    let speed = s
        .rho
        .values()
        .iter()
        .zip(s.u.values())
        .map(|(&r, &u)| u.abs() + p.sound_speed(r))
        .fold(0.0, f64::max);
    let dx = s.grid().dx();
    if speed > 0.0 {
        c.cfl * dx / speed
    } else {
        c.cfl * dx
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct Snapshot {
    pub index: usize,
    pub step: usize,
    pub state: FluidState,
    pub reformulated: Option<ReformulatedState>,
    /// Cumulative boundary inflow up to this snapshot.
    pub inflow: BoundaryFlux,
}

#[derive(Debug, Clone, PartialEq, Default)]
pub struct TimeSeries {
    pub records: Vec<DiagnosticsRecord>,
    pub snapshots: Vec<Snapshot>,
    pub steps: usize,
    pub clamp_events: usize,
}

impl TimeSeries {
    pub fn times(&self) -> Vec<f64> {
        self.records.iter().map(|r| r.t).collect()
    }

    pub fn last(&self) -> Option<&DiagnosticsRecord> {
        self.records.last()
    }
}

/// A step failed; carries what was recorded before the failure.
#[derive(Debug, Clone)]
pub struct RunFailure {
    pub step: usize,
    pub error: SolverError,
    pub partial: Box<TimeSeries>,
}

impl fmt::Display for RunFailure {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(
            f,
            "step {} failed after {} records: {}",
            self.step,
            self.partial.records.len(),
            self.error
        )
    }
}

impl std::error::Error for RunFailure {
    fn source(&self) -> Option<&(dyn std::error::Error + 'static)> {
        Some(&self.error)
    }
}

pub fn run(
    initial: &FluidState,
    p: &ModelParams,
    c: &SolverConfig,
) -> Result<TimeSeries, RunFailure> {
    run_with_sources(initial, p, c, None)
}

enum Evolving {
    Primitive(FluidState),
    Reformulated(ReformulatedState),
}

/// Advances `initial` to `c.t_end`. Identical inputs give bit-identical output.
pub fn run_with_sources(
    initial: &FluidState,
    p: &ModelParams,
    c: &SolverConfig,
    sources: Option<&dyn SourceTerms>,
) -> Result<TimeSeries, RunFailure> {
    let fail = |step, error, partial: TimeSeries| RunFailure {
        step,
        error,
        partial: Box::new(partial),
    };
    if let Err(e) = c.validate() {
        return Err(fail(0, e, TimeSeries::default()));
    }
    if let Err(e) = initial.require_positive() {
        return Err(fail(0, e.into(), TimeSeries::default()));
    }
    if sources.is_some() && c.formulation == Formulation::Reformulated {
        return Err(fail(
            0,
            SolverError::Config(
                "manufactured sources are only supported for the primitive system".into(),
            ),
            TimeSeries::default(),
        ));
    }

    let mut series = TimeSeries::default();
    let mut builder = SeriesBuilder::new(*p, c.vacuum_floor);
    let mut inflow = BoundaryFlux::default();
    let mut current = match c.formulation {
        Formulation::Primitive => Evolving::Primitive(initial.clone()),
        Formulation::Reformulated => match to_reformulated(initial, p) {
            Ok(r) => Evolving::Reformulated(r),
            Err(e) => return Err(fail(0, e.into(), series)),
        },
    };

    let t0 = initial.t;
    let t_final = t0 + c.t_end;
    let fixed_steps = c.fixed_dt.map(|dt| (c.t_end / dt).round() as usize);
    let mut step = 0usize;

    let observe = |series: &mut TimeSeries,
                   builder: &mut SeriesBuilder,
                   current: &Evolving,
                   step: usize,
                   inflow: BoundaryFlux|
     -> Result<(), SolverError> {
        let (state, reformulated) = match current {
            Evolving::Primitive(s) => (s.clone(), None),
            Evolving::Reformulated(r) => (from_reformulated(r, p)?, Some(r.clone())),
        };
        let record = builder.push(&state, step, inflow);
        let index = series.records.len();
        series.records.push(record);
        if let Some(every) = c.snapshot_every {
            if index.is_multiple_of(every) {
                series.snapshots.push(Snapshot {
                    index,
                    step,
                    state,
                    reformulated,
                    inflow,
                });
            }
        }
        Ok(())
    };

    if let Err(e) = observe(&mut series, &mut builder, &current, 0, inflow) {
        return Err(fail(0, e, series));
    }

    loop {
        let t = match &current {
            Evolving::Primitive(s) => s.t,
            Evolving::Reformulated(r) => r.t,
        };
        let done = match fixed_steps {
            Some(k) => step >= k,
            None => t >= t_final,
        };
        if done {
            break;
        }
        let dt = match (c.fixed_dt, &current) {
            (Some(dt), _) => dt,
            (None, Evolving::Primitive(s)) => cfl_dt(s, p, c).min(t_final - t),
            (None, Evolving::Reformulated(r)) => {
                reformulated::cfl_dt_reformulated(r, p, c).min(t_final - t)
            }
        };
        step += 1;
        let next_t = match fixed_steps {
            Some(_) => t0 + step as f64 * c.fixed_dt.unwrap(),
            None if dt >= t_final - t => t_final,
            None => t + dt,
        };
        let result = match &current {
            Evolving::Primitive(s) => step_primitive(s, p, c, dt, sources, step).map(|o| {
                let mut st = o.state;
                st.t = next_t;
                (Evolving::Primitive(st), o.inflow, o.clamped)
            }),
            Evolving::Reformulated(r) => step_reformulated(r, p, c, dt, step).map(|o| {
                let mut st = o.state;
                st.t = next_t;
                (Evolving::Reformulated(st), o.inflow, o.clamped)
            }),
        };
        match result {
            Ok((next, step_inflow, clamped)) => {
                current = next;
                inflow += step_inflow;
                series.clamp_events += clamped;
            }
            Err(e) => {
                series.steps = step - 1;
                return Err(fail(step, e, series));
            }
        }
        let last = match fixed_steps {
            Some(k) => step >= k,
            None => next_t >= t_final,
        };
        if step.is_multiple_of(c.output_stride) || last {
            if let Err(e) = observe(&mut series, &mut builder, &current, step, inflow) {
                series.steps = step;
                return Err(fail(step, e, series));
            }
        }
    }
    series.steps = step;
    Ok(series)
}

pub(crate) fn check_finite(
    values: &[f64],
    field: &'static str,
    step: usize,
) -> Result<(), SolverError> {
    match values.iter().position(|v| !v.is_finite()) {
        None => Ok(()),
        Some(node) => Err(SolverError::NonFinite { step, field, node }),
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::grid::{Field, Grid};
    use crate::initdata::{build_initial_state, InitFamilySpec, VelocityProfile};

    fn reference() -> (ModelParams, FluidState) {
        let p = ModelParams::new(1.0, 2.0, 1.0, 1.0).unwrap();
        let spec = InitFamilySpec::new(
            1.0,
            VelocityProfile::Lorentzian {
                amplitude: 1.0,
                width: 1.0,
            },
        );
        let g = Grid::new(50.0, 401).unwrap();
        (p, build_initial_state(&spec, &p, g).unwrap().state)
    }

    #[test]
    fn cfl_examples() {
        let p = ModelParams::new(1.0, 2.0, 1.0, 1.0).unwrap();
        let g = Grid::new(50.0, 4001).unwrap();
        let s = FluidState {
            rho: Field::constant(g, 1.0),
            u: Field::constant(g, 0.0),
            t: 0.0,
        };
        let c = SolverConfig::default();
        let dt = cfl_dt(&s, &p, &c);
        assert!((dt - 0.5 * 0.025 / 2f64.sqrt()).abs() < 1e-15);
        assert!((dt - 8.839e-3).abs() < 1e-6);
        let c2 = SolverConfig {
            cfl: 1.0,
            ..c.clone()
        };
        assert_eq!(cfl_dt(&s, &p, &c2), 2.0 * dt);

        // velocity-dominated: sound speed of rho = 1e-8 is 1.4e-4
        let slow = FluidState {
            rho: Field::constant(g, 1e-8),
            u: Field::constant(g, 1.0),
            t: 0.0,
        };
        let fast = FluidState {
            u: Field::constant(g, 10.0),
            ..slow.clone()
        };
        let ratio = cfl_dt(&slow, &p, &c) / cfl_dt(&fast, &p, &c);
        assert!((ratio - 10.0).abs() < 0.01, "{ratio}");
    }

    #[test]
    fn zero_wave_speed_is_capped() {
        let p = ModelParams::new(1.0, 2.0, 1.0, 1.0).unwrap();
        let g = Grid::new(1.0, 21).unwrap();
        let s = FluidState {
            rho: Field::constant(g, 0.0),
            u: Field::constant(g, 0.0),
            t: 0.0,
        };
        let c = SolverConfig::default();
        assert_eq!(cfl_dt(&s, &p, &c), 0.5 * 0.1);
    }

    #[test]
    fn zero_end_time_gives_initial_record_only() {
        let (p, s) = reference();
        let c = SolverConfig {
            t_end: 0.0,
            ..SolverConfig::default()
        };
        let series = run(&s, &p, &c).unwrap();
        assert_eq!(series.records.len(), 1);
        assert_eq!(series.records[0].t, 0.0);
        assert_eq!(series.steps, 0);
    }

    #[test]
    fn runs_are_deterministic_and_times_increase() {
        let (p, s) = reference();
        let c = SolverConfig {
            t_end: 0.5,
            output_stride: 3,
            ..SolverConfig::default()
        };
        let a = run(&s, &p, &c).unwrap();
        let b = run(&s, &p, &c).unwrap();
        assert_eq!(a, b);
        assert!(a.times().windows(2).all(|w| w[0] < w[1]));
        assert_eq!(a.last().unwrap().t, 0.5);
        assert_eq!(a.clamp_events, 0);
    }

    #[test]
    fn fixed_step_count() {
        let (p, s) = reference();
        let c = SolverConfig {
            t_end: 0.2,
            fixed_dt: Some(0.01),
            output_stride: 5,
            ..SolverConfig::default()
        };
        let a = run(&s, &p, &c).unwrap();
        assert_eq!(a.steps, 20);
        assert_eq!(a.records.len(), 5);
        assert!((a.last().unwrap().t - 0.2).abs() < 1e-15);
    }

    #[test]
    fn invalid_config_is_rejected() {
        let (p, s) = reference();
        for c in [
            SolverConfig {
                cfl: 0.0,
                ..SolverConfig::default()
            },
            SolverConfig {
                cfl: 1.5,
                ..SolverConfig::default()
            },
            SolverConfig {
                output_stride: 0,
                ..SolverConfig::default()
            },
            SolverConfig {
                fixed_dt: Some(0.3),
                ..SolverConfig::default()
            },
        ] {
            assert!(matches!(run(&s, &p, &c), Err(RunFailure { step: 0, .. })));
        }
    }

    #[test]
    fn blow_up_reports_failing_step_and_partial_series() {
        let (p, s) = reference();
        // a step 400x beyond the explicit stability bound
        let c = SolverConfig {
            t_end: 100.0,
            fixed_dt: Some(2.0),
            output_stride: 1,
            flux: FluxScheme::Central,
            ..SolverConfig::default()
        };
        let err = run(&s, &p, &c).unwrap_err();
        assert!(err.step >= 1);
        assert!(!err.partial.records.is_empty());
        assert!(err.partial.records.len() <= err.step);
    }

    #[test]
    fn reformulated_run_completes() {
        let (p, s) = reference();
        let c = SolverConfig {
            t_end: 0.3,
            formulation: Formulation::Reformulated,
            snapshot_every: Some(1),
            ..SolverConfig::default()
        };
        let a = run(&s, &p, &c).unwrap();
        assert_eq!(a.snapshots.len(), a.records.len());
        assert!(a.snapshots[1].reformulated.is_some());
    }
}
