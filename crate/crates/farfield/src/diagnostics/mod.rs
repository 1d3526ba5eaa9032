//! Conserved quantities, energy and BD identities, effective-velocity
//! transport residual, characteristic traces, non-decay and boundedness.

mod characteristics;

use serde::{Deserialize, Serialize};

use crate::grid::{ddx_slice, weighted_sum, Field};
use crate::params::{powr, ModelParams, Regime};
use crate::reformulate::{effective_velocity_unchecked, psi_of_rho};
use crate::solver::{BoundaryFlux, TimeSeries};
use crate::state::FluidState;

pub use characteristics::{trace_characteristics, CharacteristicTrace, TraceSample};

/// Norms that must stay bounded along a regular solution.
#[derive(Debug, Clone, Copy, PartialEq, Default, Serialize, Deserialize)]
pub struct TrackedNorms {
    pub psi_l2: f64,
    pub psi_l4: f64,
    pub v_inf: f64,
    /// `|rho^((delta-1)/2) u_x|_2`
    pub weighted_ux_l2: f64,
    pub u_l2: f64,
    pub ux_l2: f64,
    pub uxx_l2: f64,
    /// `|rho^iota u|_inf` with `iota = 1/2` (`delta < 1`) or `3/4` (`delta = 1`).
    pub rho_iota_u_inf: f64,
    pub rho_inf: f64,
}

impl TrackedNorms {
    pub const NAMES: [&'static str; 9] = [
        "psi_l2",
        "psi_l4",
        "v_inf",
        "weighted_ux_l2",
        "u_l2",
        "ux_l2",
        "uxx_l2",
        "rho_iota_u_inf",
        "rho_inf",
    ];

    pub fn values(&self) -> [f64; 9] {
        [
            self.psi_l2,
            self.psi_l4,
            self.v_inf,
            self.weighted_ux_l2,
            self.u_l2,
            self.ux_l2,
            self.uxx_l2,
            self.rho_iota_u_inf,
            self.rho_inf,
        ]
    }

    pub fn from_values(v: [f64; 9]) -> Self {
        Self {
            psi_l2: v[0],
            psi_l4: v[1],
            v_inf: v[2],
            weighted_ux_l2: v[3],
            u_l2: v[4],
            ux_l2: v[5],
            uxx_l2: v[6],
            rho_iota_u_inf: v[7],
            rho_inf: v[8],
        }
    }

    pub fn iter(&self) -> impl Iterator<Item = (&'static str, f64)> {
        Self::NAMES.into_iter().zip(self.values())
    }
}

/// Identity residuals over the interval ending at this record (zero for the
/// first record).
#[derive(Debug, Clone, Copy, PartialEq, Default, Serialize, Deserialize)]
pub struct Residuals {
    pub energy: f64,
    pub bd: f64,
    pub effective_velocity: f64,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct DiagnosticsRecord {
    pub t: f64,
    pub step: usize,
    pub m: f64,
    pub p_mom: f64,
    pub e_kin: f64,
    pub e_tot: f64,
    pub bd: f64,
    pub diss_energy: f64,
    pub diss_bd: f64,
    pub u_inf: f64,
    pub nondecay_floor: f64,
    pub tracked: TrackedNorms,
    pub residuals: Residuals,
    /// Cumulative inflow through the two boundary faces.
    pub boundary_flux: BoundaryFlux,
}

impl DiagnosticsRecord {
    /// `|p| <= sqrt(2 m E_k) (1 + slack)`.
    pub fn cauchy_schwarz_holds(&self, slack: f64) -> bool {
        self.p_mom.abs() <= (2.0 * self.m * self.e_kin).sqrt() * (1.0 + slack)
    }
}

/// Functionals of one state. `C_u` is copied from `baseline` when given.
pub fn record(
    s: &FluidState,
    p: &ModelParams,
    baseline: Option<&DiagnosticsRecord>,
) -> DiagnosticsRecord {
    let rho = s.rho.values();
    let u = s.u.values();
    let n = rho.len();
    let dx = s.grid().dx();
    let (a, g, d, alpha) = (p.pressure_constant(), p.gamma(), p.delta(), p.alpha());
    let integ = |f: &dyn Fn(usize) -> f64| {
        let inner: f64 = (1..n - 1).map(f).sum();
        dx * (inner + 0.5 * (f(0) + f(n - 1)))
    };

    let m = integ(&|i| rho[i]);
    let p_mom = integ(&|i| rho[i] * u[i]);
    let e_kin = integ(&|i| 0.5 * rho[i] * u[i] * u[i]);
    let internal = integ(&|i| a * powr(rho[i], g) / (g - 1.0));
    let e_tot = e_kin + internal;

    let v = effective_velocity_unchecked(&s.rho, &s.u, p);
    let vv = v.values();
    let bd = integ(&|i| 0.5 * rho[i] * vv[i] * vv[i]) + internal;

    let ux = ddx_slice(u, dx);
    let rx = ddx_slice(rho, dx);
    let diss_energy = alpha * integ(&|i| powr(rho[i], d) * ux[i] * ux[i]);
    let diss_bd = alpha * a * g * integ(&|i| powr(rho[i], g + d - 3.0) * rx[i] * rx[i]);

    let psi = psi_of_rho(&s.rho, p);
    let uxx = s.u.d2dx2();
    let iota = match p.regime() {
        Regime::SubLinear => 0.5,
        Regime::Linear => 0.75,
    };
    let tracked = TrackedNorms {
        psi_l2: psi.l2_norm(),
        psi_l4: psi.lp_norm_finite(4.0),
        v_inf: v.max_abs(),
        weighted_ux_l2: integ(&|i| powr(rho[i], d - 1.0) * ux[i] * ux[i]).sqrt(),
        u_l2: s.u.l2_norm(),
        ux_l2: weighted_sum(&ux, dx, |x| x * x).sqrt(),
        uxx_l2: uxx.l2_norm(),
        rho_iota_u_inf: (0..n)
            .map(|i| (rho[i].powf(iota) * u[i]).abs())
            .fold(0.0, f64::max),
        rho_inf: s.rho.max_abs(),
    };

    let nondecay_floor = match baseline {
        Some(b) => b.nondecay_floor,
        None if m > 0.0 => p_mom.abs() / m,
        None => 0.0,
    };
    DiagnosticsRecord {
        t: s.t,
        step: 0,
        m,
        p_mom,
        e_kin,
        e_tot,
        bd,
        diss_energy,
        diss_bd,
        u_inf: s.u.max_abs(),
        nondecay_floor,
        tracked,
        residuals: Residuals::default(),
        boundary_flux: BoundaryFlux::default(),
    }
}

/// Residual of `v_t + u v_x + (A gamma/alpha) rho^(gamma-delta) (v - u) = 0`
/// between two consecutive states: forward difference in time, all other
/// terms averaged over the two time levels. Discrete `L^2` norm over the
/// interior nodes where `rho >= 100 floor` at both levels.
pub fn effective_velocity_residual(
    prev: &FluidState,
    next: &FluidState,
    p: &ModelParams,
    dt: f64,
    floor: f64,
) -> f64 {
    let pointwise = effective_velocity_pointwise(prev, next, p, dt);
    let (r0, r1) = (prev.rho.values(), next.rho.values());
    let dx = prev.grid().dx();
    let cut = 100.0 * floor;
    let n = r0.len();
    let sum: f64 = (1..n - 1)
        .filter(|&i| r0[i] >= cut && r1[i] >= cut)
        .map(|i| pointwise[i] * pointwise[i])
        .sum();
    (dx * sum).sqrt()
}

/// Node-wise residual behind [`effective_velocity_residual`]; boundary
/// entries are zero.
pub(crate) fn effective_velocity_pointwise(
    prev: &FluidState,
    next: &FluidState,
    p: &ModelParams,
    dt: f64,
) -> Vec<f64> {
    let k = p.pressure_constant() * p.gamma() / p.alpha();
    let e = p.gamma() - p.delta();
    let dx = prev.grid().dx();
    let rest = |s: &FluidState| -> (Vec<f64>, Vec<f64>) {
        let v = effective_velocity_unchecked(&s.rho, &s.u, p);
        let vx = ddx_slice(v.values(), dx);
        let (rho, u, vv) = (s.rho.values(), s.u.values(), v.values());
        let terms = (0..rho.len())
            .map(|i| u[i] * vx[i] + k * powr(rho[i], e) * (vv[i] - u[i]))
            .collect();
        (v.into_values(), terms)
    };
    let (v0, f0) = rest(prev);
    let (v1, f1) = rest(next);
    let n = v0.len();
    let mut out = vec![0.0; n];
    for i in 1..n - 1 {
        out[i] = (v1[i] - v0[i]) / dt + 0.5 * (f0[i] + f1[i]);
    }
    out
}

/// Builds the record sequence of a run incrementally, including the
/// interval residuals; `run` and `diagnose` both go through it.
#[derive(Debug, Clone)]
pub struct SeriesBuilder {
    params: ModelParams,
    floor: f64,
    baseline: Option<DiagnosticsRecord>,
    prev: Option<(FluidState, DiagnosticsRecord)>,
}

impl SeriesBuilder {
    pub fn new(params: ModelParams, floor: f64) -> Self {
        Self {
            params,
            floor,
            baseline: None,
            prev: None,
        }
    }

    pub fn push(&mut self, s: &FluidState, step: usize, inflow: BoundaryFlux) -> DiagnosticsRecord {
        let mut r = record(s, &self.params, self.baseline.as_ref());
        r.step = step;
        r.boundary_flux = inflow;
        if let Some((ps, pr)) = &self.prev {
            let dt = r.t - pr.t;
            r.residuals = Residuals {
                energy: (r.e_tot - pr.e_tot) + 0.5 * dt * (r.diss_energy + pr.diss_energy),
                bd: (r.bd - pr.bd) + 0.5 * dt * (r.diss_bd + pr.diss_bd),
                effective_velocity: if dt > 0.0 {
                    effective_velocity_residual(ps, s, &self.params, dt, self.floor)
                } else {
                    0.0
                },
            };
        }
        if self.baseline.is_none() {
            self.baseline = Some(r);
        }
        self.prev = Some((s.clone(), r));
        r
    }
}

/// Per-interval identity residuals normalized by the initial functional.
#[derive(Debug, Clone, PartialEq)]
pub struct ResidualSequence {
    pub per_interval: Vec<f64>,
    pub normalization: f64,
    /// `max_k |r_k| / F(0)`
    pub max_normalized: f64,
    /// `max_k |sum_{j<=k} r_j| / F(0)`: the drift of the integrated identity.
    pub max_cumulative: f64,
}

fn residual_sequence(
    series: &TimeSeries,
    f: impl Fn(&DiagnosticsRecord) -> f64,
    rate: impl Fn(&DiagnosticsRecord) -> f64,
) -> ResidualSequence {
    let recs = &series.records;
    let per_interval: Vec<f64> = recs
        .windows(2)
        .map(|w| (f(&w[1]) - f(&w[0])) + 0.5 * (w[1].t - w[0].t) * (rate(&w[0]) + rate(&w[1])))
        .collect();
    let norm = recs
        .first()
        .map(&f)
        .filter(|v| *v != 0.0)
        .unwrap_or(1.0)
        .abs();
    let max_normalized = per_interval.iter().fold(0.0, |m: f64, r| m.max(r.abs())) / norm;
    let mut acc = 0.0;
    let mut max_cumulative: f64 = 0.0;
    for r in &per_interval {
        acc += r;
        max_cumulative = max_cumulative.max(acc.abs());
    }
    ResidualSequence {
        per_interval,
        normalization: norm,
        max_normalized,
        max_cumulative: max_cumulative / norm,
    }
}

/// `[E]_k^{k+1} + int alpha rho^delta u_x^2` per record interval.
pub fn energy_identity_residual(series: &TimeSeries) -> ResidualSequence {
    residual_sequence(series, |r| r.e_tot, |r| r.diss_energy)
}

/// `[BD]_k^{k+1} + int alpha A gamma rho^(gamma+delta-3) rho_x^2` per interval.
pub fn bd_identity_residual(series: &TimeSeries) -> ResidualSequence {
    residual_sequence(series, |r| r.bd, |r| r.diss_bd)
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct NondecayReport {
    pub floor: f64,
    pub min_u_inf: f64,
    pub satisfied: bool,
    /// `p(0) = 0`: the bound is zero and says nothing.
    pub vacuous: bool,
}

pub fn nondecay_check(series: &TimeSeries) -> NondecayReport {
    let Some(first) = series.records.first() else {
        return NondecayReport {
            floor: 0.0,
            min_u_inf: 0.0,
            satisfied: true,
            vacuous: true,
        };
    };
    let floor = first.nondecay_floor;
    let min_u_inf = series
        .records
        .iter()
        .map(|r| r.u_inf)
        .fold(f64::INFINITY, f64::min);
    // an antisymmetric sum cancels only to rounding
    let vacuous = first.p_mom.abs() <= 1e-12 * first.m * first.u_inf;
    NondecayReport {
        floor,
        min_u_inf,
        satisfied: vacuous || min_u_inf >= 0.99 * floor,
        vacuous,
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct LedgerEntry {
    pub name: &'static str,
    pub initial: f64,
    pub max: f64,
    /// `max / initial`, or `max` when the initial value is zero.
    pub ratio: f64,
}

pub fn boundedness_ledger(series: &TimeSeries) -> Vec<LedgerEntry> {
    let Some(first) = series.records.first() else {
        return Vec::new();
    };
    TrackedNorms::NAMES
        .iter()
        .enumerate()
        .map(|(k, &name)| {
            let initial = first.tracked.values()[k];
            let max = series
                .records
                .iter()
                .map(|r| r.tracked.values()[k])
                .fold(f64::NEG_INFINITY, f64::max);
            let ratio = if initial == 0.0 { max } else { max / initial };
            LedgerEntry {
                name,
                initial,
                max,
                ratio,
            }
        })
        .collect()
}

/// Relative drift `max_t |m(t) - m(0) - B(t)|`-style accounting for mass or
/// momentum: how much of the discrepancy the boundary flux explains.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct ConservationReport {
    /// `max_t |q(t) - q(0)| / |q(0)|`
    pub max_relative_change: f64,
    /// `max_t |q(t) - q(0) - inflow(t)| / |q(0)|`
    pub max_unexplained: f64,
    /// Fraction of the final discrepancy accounted for by the reported inflow.
    pub explained_fraction: f64,
}

fn conservation(
    series: &TimeSeries,
    q: impl Fn(&DiagnosticsRecord) -> f64,
    b: impl Fn(&DiagnosticsRecord) -> f64,
) -> ConservationReport {
    let recs = &series.records;
    let q0 = recs.first().map(&q).unwrap_or(0.0);
    let scale = if q0 != 0.0 { q0.abs() } else { 1.0 };
    let mut max_change: f64 = 0.0;
    let mut max_unexplained: f64 = 0.0;
    for r in recs {
        let disc = q(r) - q0;
        max_change = max_change.max(disc.abs());
        max_unexplained = max_unexplained.max((disc - b(r)).abs());
    }
    let explained_fraction = match recs.last() {
        Some(r) if q(r) != q0 => 1.0 - ((q(r) - q0 - b(r)) / (q(r) - q0)).abs(),
        _ => 1.0,
    };
    ConservationReport {
        max_relative_change: max_change / scale,
        max_unexplained: max_unexplained / scale,
        explained_fraction,
    }
}

pub fn mass_conservation(series: &TimeSeries) -> ConservationReport {
    conservation(series, |r| r.m, |r| r.boundary_flux.mass)
}

pub fn momentum_conservation(series: &TimeSeries) -> ConservationReport {
    conservation(series, |r| r.p_mom, |r| r.boundary_flux.momentum)
}

/// `xi(x) = int_{-L}^x rho u`.
pub fn xi_field(s: &FluidState) -> Field {
    s.rho.zip_with(&s.u, |a, b| a * b).cumulative_integral()
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::grid::Grid;
    use crate::initdata::{build_initial_state, InitFamilySpec, VelocityProfile};
    use crate::solver::{run, SolverConfig};
    use std::f64::consts::PI;

    fn p_ref() -> ModelParams {
        ModelParams::new(1.0, 2.0, 1.0, 1.0).unwrap()
    }

    fn reference_state(n: usize) -> FluidState {
        let spec = InitFamilySpec::new(
            1.0,
            VelocityProfile::Lorentzian {
                amplitude: 1.0,
                width: 1.0,
            },
        );
        build_initial_state(&spec, &p_ref(), Grid::new(50.0, n).unwrap())
            .unwrap()
            .state
    }

    fn steady(n: usize) -> FluidState {
        let g = Grid::new(10.0, n).unwrap();
        FluidState {
            rho: Field::constant(g, 0.8),
            u: Field::constant(g, 0.0),
            t: 0.0,
        }
    }

    #[test]
    fn reference_functionals() {
        let r = record(&reference_state(4001), &p_ref(), None);
        assert!((r.m - 2.0 * 50f64.atan()).abs() < 1e-6);
        // tails beyond |x| = 50 carry about 2/(3 50^3) of the momentum
        assert!((r.p_mom - PI / 2.0).abs() < 1e-5);
        assert!((r.nondecay_floor - 0.5).abs() < 0.01);
        assert!((r.e_tot - 11.0 * PI / 16.0).abs() < 1e-5, "{}", r.e_tot);
        assert!((r.e_tot - 2.1598).abs() < 1e-4);
        assert!(r.cauchy_schwarz_holds(1e-10));
    }

    #[test]
    fn zero_velocity_record() {
        let mut s = reference_state(401);
        s.u = s.u.map(|_| 0.0);
        let r = record(&s, &p_ref(), None);
        assert_eq!((r.e_kin, r.p_mom, r.u_inf), (0.0, 0.0, 0.0));
        assert_eq!(r.diss_energy, 0.0);
        assert!(r.e_tot > 0.0 && r.bd > 0.0 && r.diss_bd > 0.0);
    }

    #[test]
    fn baseline_floor_is_copied() {
        let s = reference_state(401);
        let base = record(&s, &p_ref(), None);
        let mut later = s.clone();
        later.u = later.u.map(|v| 3.0 * v);
        assert_eq!(
            record(&later, &p_ref(), Some(&base)).nondecay_floor,
            base.nondecay_floor
        );
    }

    #[test]
    fn steady_run_has_zero_residuals_and_unit_ratios() {
        let c = SolverConfig {
            t_end: 0.5,
            output_stride: 1,
            ..SolverConfig::default()
        };
        let series = run(&steady(101), &p_ref(), &c).unwrap();
        assert!(energy_identity_residual(&series)
            .per_interval
            .iter()
            .all(|&r| r == 0.0));
        assert!(bd_identity_residual(&series)
            .per_interval
            .iter()
            .all(|&r| r == 0.0));
        assert!(series
            .records
            .iter()
            .all(|r| r.residuals.effective_velocity == 0.0));
        let ledger = boundedness_ledger(&series);
        assert_eq!(ledger.len(), 9);
        assert!(ledger
            .iter()
            .all(|e| e.ratio == 1.0 || (e.initial == 0.0 && e.max == 0.0)));
        let rho_inf = ledger.iter().find(|e| e.name == "rho_inf").unwrap();
        assert_eq!(rho_inf.ratio, 1.0);
        let nd = nondecay_check(&series);
        assert!(nd.vacuous && nd.satisfied);
    }

    #[test]
    fn odd_velocity_is_vacuous() {
        let g = Grid::new(20.0, 401).unwrap();
        let s = FluidState {
            rho: Field::from_fn(g, |x| 1.0 / (1.0 + x * x)),
            u: Field::from_fn(g, |x| x / (1.0 + x * x)),
            t: 0.0,
        };
        let mut b = SeriesBuilder::new(p_ref(), 1e-8);
        let series = TimeSeries {
            records: vec![b.push(&s, 0, BoundaryFlux::default())],
            ..TimeSeries::default()
        };
        assert!(nondecay_check(&series).vacuous);
    }

    #[test]
    fn damped_fixture_fails_nondecay() {
        let s = reference_state(801);
        let mut b = SeriesBuilder::new(p_ref(), 1e-8);
        let records = (0..=20)
            .map(|k| {
                let t = 0.5 * k as f64;
                let st = FluidState {
                    rho: s.rho.clone(),
                    u: s.u.map(|v| v * (-t).exp()),
                    t,
                };
                b.push(&st, k, BoundaryFlux::default())
            })
            .collect();
        let series = TimeSeries {
            records,
            ..TimeSeries::default()
        };
        let nd = nondecay_check(&series);
        assert!(!nd.vacuous);
        assert!(!nd.satisfied);
        assert!(nd.min_u_inf < 1e-4);
    }

    #[test]
    fn psi_ratio_matches_log_gradient() {
        let c = SolverConfig {
            t_end: 0.5,
            output_stride: 5,
            ..SolverConfig::default()
        };
        let s = reference_state(401);
        let p = p_ref();
        let series = run(&s, &p, &c).unwrap();
        let direct = |st: &FluidState| st.rho.map(f64::ln).ddx().l2_norm();
        let c2 = SolverConfig {
            snapshot_every: Some(1),
            ..c
        };
        let snaps = run(&s, &p, &c2).unwrap().snapshots;
        let max = snaps.iter().map(|sn| direct(&sn.state)).fold(0.0, f64::max);
        let entry = boundedness_ledger(&series)
            .into_iter()
            .find(|e| e.name == "psi_l2")
            .unwrap();
        assert!((entry.ratio - max / direct(&s)).abs() < 1e-14);
    }

    #[test]
    fn xi_at_right_end_is_momentum() {
        let s = reference_state(2001);
        let xi = xi_field(&s);
        let r = record(&s, &p_ref(), None);
        assert!((xi.values()[2000] - r.p_mom).abs() < 1e-12);
    }

    #[test]
    fn residual_normalization() {
        let mk = |t: f64, e: f64, d: f64| {
            let mut r = record(&steady(21), &p_ref(), None);
            r.t = t;
            r.e_tot = e;
            r.diss_energy = d;
            r
        };
        let series = TimeSeries {
            records: vec![mk(0.0, 2.0, 1.0), mk(1.0, 1.0, 1.0), mk(2.0, 0.5, 0.0)],
            ..TimeSeries::default()
        };
        let res = energy_identity_residual(&series);
        assert_eq!(res.per_interval, vec![0.0, 0.0]);
        assert_eq!(res.max_normalized, 0.0);
    }
}
