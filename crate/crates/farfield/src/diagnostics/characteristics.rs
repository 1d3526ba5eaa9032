use serde::Serialize;

use crate::diagnostics::xi_field;
use crate::params::ModelParams;
use crate::solver::Snapshot;

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct TraceSample {
    pub t: f64,
    pub y: f64,
    /// `xi(t, y) + (alpha/delta) rho^delta(t, y)`
    pub value: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct CharacteristicTrace {
    pub x0: f64,
    pub samples: Vec<TraceSample>,
    /// The path left `[-L, L]`; samples stop at the last interior point.
    pub exited: bool,
    /// Bound on the part of `int_{-inf}^{-L} rho u` missing from `xi`:
    /// `2 L rho(-L) max|u|`, valid for tails decaying at least like `|x|^(-3/2)`.
    pub tail_estimate: f64,
}

impl CharacteristicTrace {
    /// `max_t value(t) - value(0)`.
    pub fn max_increase(&self) -> f64 {
        let v0 = self.samples[0].value;
        self.samples
            .iter()
            .map(|s| s.value - v0)
            .fold(0.0, f64::max)
    }
}

struct Frame {
    t: f64,
    u: crate::grid::Field,
    rho_pow: crate::grid::Field,
    xi: crate::grid::Field,
}

/// Integrates `dy/dt = u(t, y)` through a snapshot sequence with the
/// explicit midpoint rule, interpolating `u` linearly in `x` and in time.
pub fn trace_characteristics(
    snapshots: &[Snapshot],
    p: &ModelParams,
    seeds: &[f64],
) -> Vec<CharacteristicTrace> {
    if snapshots.is_empty() {
        return Vec::new();
    }
    let k = p.alpha() / p.delta();
    let frames: Vec<Frame> = snapshots
        .iter()
        .map(|s| Frame {
            t: s.state.t,
            u: s.state.u.clone(),
            rho_pow: s.state.rho.map(|r| k * r.powf(p.delta())),
            xi: xi_field(&s.state),
        })
        .collect();
    let half_width = snapshots[0].state.grid().half_width();
    let tail_estimate = snapshots
        .iter()
        .map(|s| 2.0 * half_width * s.state.rho.values()[0] * s.state.u.max_abs())
        .fold(0.0, f64::max);

    let value = |f: &Frame, y: f64| -> Option<f64> {
        Some(f.xi.interpolate(y)? + f.rho_pow.interpolate(y)?)
    };

    seeds
        .iter()
        .map(|&x0| {
            let mut samples = Vec::with_capacity(frames.len());
            let mut exited = false;
            match value(&frames[0], x0) {
                Some(v) => samples.push(TraceSample {
                    t: frames[0].t,
                    y: x0,
                    value: v,
                }),
                None => exited = true,
            }
            let mut y = x0;
            for w in frames.windows(2) {
                if exited {
                    break;
                }
                let (a, b) = (&w[0], &w[1]);
                let dt = b.t - a.t;
                let step = (|| {
                    let k1 = a.u.interpolate(y)?;
                    let ym = y + 0.5 * dt * k1;
                    let um = 0.5 * (a.u.interpolate(ym)? + b.u.interpolate(ym)?);
                    let yn = y + dt * um;
                    Some((yn, value(b, yn)?))
                })();
                match step {
                    Some((yn, v)) => {
                        y = yn;
                        samples.push(TraceSample {
                            t: b.t,
                            y,
                            value: v,
                        });
                    }
                    None => exited = true,
                }
            }
            CharacteristicTrace {
                x0,
                samples,
                exited,
                tail_estimate,
            }
        })
        .collect()
}
