//! Manufactured solutions, refinement ladders, formulation equivalence and
//! floor sensitivity.

mod mms;
mod table;

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{StateError, VerificationError};
use crate::grid::{weighted_sum, Field, Grid};
use crate::initdata::{build_initial_state, InitFamilySpec};
use crate::params::ModelParams;
use crate::solver::{
    run, step_primitive, FluxScheme, Formulation, Snapshot, SolverConfig, TimeSeries,
};
use crate::state::FluidState;

pub use mms::{ManufacturedCase, ManufacturedSources};
pub use table::Table;

/// `levels` runs, each halving `dx` and `dt` of the previous one.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct RefinementLadder {
    pub base_n: usize,
    pub base_dt: f64,
    pub levels: usize,
}

impl RefinementLadder {
    pub fn new(base_n: usize, base_dt: f64, levels: usize) -> Result<Self, VerificationError> {
        if levels < 2 {
            return Err(VerificationError::Precondition(
                "a ladder needs at least two levels".into(),
            ));
        }
        if !(base_dt > 0.0) || base_n < crate::grid::MIN_NODES {
            return Err(VerificationError::Precondition(
                "invalid ladder base".into(),
            ));
        }
        Ok(Self {
            base_n,
            base_dt,
            levels,
        })
    }

    /// Node count and step size of level `k`.
    pub fn level(&self, k: usize) -> (usize, f64) {
        (
            (self.base_n - 1) * (1 << k) + 1,
            self.base_dt / (1 << k) as f64,
        )
    }
}

/// `log2(e_k / e_{k+1})` for consecutive levels; `None` where an error is zero.
pub fn observed_orders(errors: &[f64]) -> Vec<Option<f64>> {
    errors
        .windows(2)
        .map(|w| (w[0] > 0.0 && w[1] > 0.0).then(|| (w[0] / w[1]).log2()))
        .collect()
}

fn require_monotone(errors: &[f64], table: &Table) -> Result<(), VerificationError> {
    if errors.windows(2).all(|w| w[1] <= w[0]) {
        Ok(())
    } else {
        Err(VerificationError::NonMonotone {
            table: table.to_text(),
        })
    }
}

fn l2_distance(f: &Field, exact: impl Fn(f64) -> f64) -> f64 {
    let g = f.grid();
    let d: Vec<f64> = f
        .values()
        .iter()
        .enumerate()
        .map(|(i, v)| v - exact(g.x(i)))
        .collect();
    weighted_sum(&d, g.dx(), |x| x * x).sqrt()
}

fn l2_gap(a: &Field, b: &Field) -> f64 {
    a.zip_with(b, |x, y| x - y).l2_norm()
}

/// Extent and duration of a manufactured run.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct MmsSetup {
    pub half_width: f64,
    pub t_end: f64,
    pub vacuum_floor: f64,
}

impl Default for MmsSetup {
    fn default() -> Self {
        Self {
            half_width: 12.0,
            t_end: 1.0,
            vacuum_floor: 1e-8,
        }
    }
}

/// Forced primitive run with a fixed step and the central flux.
pub fn manufactured_run(
    case: &ManufacturedCase,
    p: &ModelParams,
    setup: &MmsSetup,
    n: usize,
    dt: f64,
) -> Result<FluidState, VerificationError> {
    let grid = Grid::new(setup.half_width, n).map_err(StateError::from)?;
    let c = SolverConfig {
        t_end: setup.t_end,
        fixed_dt: Some(dt),
        vacuum_floor: setup.vacuum_floor,
        flux: FluxScheme::Central,
        ..SolverConfig::default()
    };
    c.validate()?;
    let sources = case.sources(*p);
    let steps = (setup.t_end / dt).round() as usize;
    let mut s = case.state(grid, 0.0);
    for k in 1..=steps {
        let mut out = step_primitive(&s, p, &c, dt, Some(&sources), k)?;
        out.state.t = k as f64 * dt;
        s = out.state;
    }
    Ok(s)
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct MmsLevel {
    pub n: usize,
    pub dt: f64,
    pub err_rho: f64,
    pub err_u: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct MmsReport {
    pub levels: Vec<MmsLevel>,
    pub orders_rho: Vec<Option<f64>>,
    pub orders_u: Vec<Option<f64>>,
}

fn order_at(v: &[Option<f64>], k: usize) -> Option<f64> {
    k.checked_sub(1).and_then(|i| v[i])
}

impl MmsReport {
    fn from_levels(levels: Vec<MmsLevel>) -> Self {
        Self {
            orders_rho: observed_orders(&levels.iter().map(|l| l.err_rho).collect::<Vec<_>>()),
            orders_u: observed_orders(&levels.iter().map(|l| l.err_u).collect::<Vec<_>>()),
            levels,
        }
    }

    pub fn table(&self) -> Table {
        let mut t = Table::new(&["n", "dt", "err_rho", "order_rho", "err_u", "order_u"]);
        for (k, l) in self.levels.iter().enumerate() {
            t.push(vec![
                l.n.to_string(),
                format!("{:.6e}", l.dt),
                format!("{:.6e}", l.err_rho),
                Table::opt(order_at(&self.orders_rho, k)),
                format!("{:.6e}", l.err_u),
                Table::opt(order_at(&self.orders_u, k)),
            ]);
        }
        t
    }

    /// Smallest observed order over both unknowns and all pairs; `None` when
    /// every error vanishes.
    pub fn min_order(&self) -> Option<f64> {
        self.orders_rho
            .iter()
            .chain(&self.orders_u)
            .flatten()
            .copied()
            .reduce(f64::min)
    }

    pub fn max_order(&self) -> Option<f64> {
        self.orders_rho
            .iter()
            .chain(&self.orders_u)
            .flatten()
            .copied()
            .reduce(f64::max)
    }

    fn check(self) -> Result<Self, VerificationError> {
        let table = self.table();
        require_monotone(
            &self.levels.iter().map(|l| l.err_rho).collect::<Vec<_>>(),
            &table,
        )?;
        require_monotone(
            &self.levels.iter().map(|l| l.err_u).collect::<Vec<_>>(),
            &table,
        )?;
        Ok(self)
    }
}

fn mms_precondition(case: &ManufacturedCase, setup: &MmsSetup) -> Result<(), VerificationError> {
    if case.min_density() < 10.0 * setup.vacuum_floor {
        return Err(VerificationError::Precondition(
            "manufactured density must stay above ten times the floor".into(),
        ));
    }
    Ok(())
}

/// Spatial study: `L^2` error against the exact fields at `t_end` on every
/// ladder level.
pub fn mms_convergence(
    case: &ManufacturedCase,
    p: &ModelParams,
    setup: &MmsSetup,
    ladder: &RefinementLadder,
) -> Result<MmsReport, VerificationError> {
    mms_precondition(case, setup)?;
    let levels = (0..ladder.levels)
        .into_par_iter()
        .map(|k| {
            let (n, dt) = ladder.level(k);
            let s = manufactured_run(case, p, setup, n, dt)?;
            let t = s.t;
            Ok(MmsLevel {
                n,
                dt,
                err_rho: l2_distance(&s.rho, |x| case.rho(t, x)),
                err_u: l2_distance(&s.u, |x| case.u(t, x)),
            })
        })
        .collect::<Result<Vec<_>, VerificationError>>()?;
    MmsReport::from_levels(levels).check()
}

/// Temporal study on a fixed grid: `dt` halves per level and the error is
/// measured against a run with a quarter of the finest step, which removes
/// the spatial error common to all levels.
pub fn mms_temporal_convergence(
    case: &ManufacturedCase,
    p: &ModelParams,
    setup: &MmsSetup,
    n: usize,
    base_dt: f64,
    levels: usize,
) -> Result<MmsReport, VerificationError> {
    mms_precondition(case, setup)?;
    let ladder = RefinementLadder::new(n, base_dt, levels)?;
    let dt_ref = ladder.level(levels - 1).1 / 4.0;
    let mut jobs: Vec<f64> = (0..levels).map(|k| ladder.level(k).1).collect();
    jobs.push(dt_ref);
    let states = jobs
        .par_iter()
        .map(|&dt| manufactured_run(case, p, setup, n, dt))
        .collect::<Result<Vec<_>, VerificationError>>()?;
    let reference = &states[levels];
    let levels = states[..levels]
        .iter()
        .zip(&jobs)
        .map(|(s, &dt)| MmsLevel {
            n,
            dt,
            err_rho: l2_gap(&s.rho, &reference.rho),
            err_u: l2_gap(&s.u, &reference.u),
        })
        .collect();
    MmsReport::from_levels(levels).check()
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct CrossLevel {
    pub n: usize,
    pub dt: f64,
    /// `max_t |u_primitive - u_reformulated|_inf` over the shared samples.
    pub gap: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct CrossReport {
    pub levels: Vec<CrossLevel>,
    /// `gap_k / gap_{k+1}`.
    pub ratios: Vec<f64>,
}

impl CrossReport {
    pub fn table(&self) -> Table {
        let mut t = Table::new(&["n", "dt", "gap", "ratio"]);
        for (k, l) in self.levels.iter().enumerate() {
            t.push(vec![
                l.n.to_string(),
                format!("{:.6e}", l.dt),
                format!("{:.6e}", l.gap),
                k.checked_sub(1)
                    .map(|i| format!("{:.3}", self.ratios[i]))
                    .unwrap_or_else(|| "-".into()),
            ]);
        }
        t
    }

    pub fn min_ratio(&self) -> f64 {
        self.ratios.iter().copied().fold(f64::INFINITY, f64::min)
    }
}

/// A cross-formulation level whose gap grew, with both snapshot sets.
#[derive(Debug, Clone, PartialEq)]
pub struct Divergence {
    pub level: usize,
    pub table: String,
    pub primitive: Vec<Snapshot>,
    pub reformulated: Vec<Snapshot>,
}

/// Cross-formulation run setup.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct CrossSetup {
    pub half_width: f64,
    pub t_end: f64,
    /// Compare every this many steps of the coarsest level.
    pub base_stride: usize,
    pub flux: FluxScheme,
    pub vacuum_floor: f64,
}

/// Runs primitive and reformulated solvers side by side on each level,
/// starting both from `initial(grid)`.
pub fn cross_formulation_study(
    initial: &(dyn Fn(Grid) -> Result<FluidState, StateError> + Sync),
    setup: &CrossSetup,
    p: &ModelParams,
    ladder: &RefinementLadder,
) -> Result<CrossReport, VerificationError> {
    let runs = (0..ladder.levels)
        .into_par_iter()
        .map(|k| {
            let (n, dt) = ladder.level(k);
            let grid = Grid::new(setup.half_width, n).map_err(StateError::from)?;
            let initial = initial(grid)?;
            let c = SolverConfig {
                t_end: setup.t_end,
                fixed_dt: Some(dt),
                output_stride: setup.base_stride << k,
                snapshot_every: Some(1),
                flux: setup.flux,
                vacuum_floor: setup.vacuum_floor,
                ..SolverConfig::default()
            };
            let prim = run(&initial, p, &c)?;
            let refo = run(
                &initial,
                p,
                &SolverConfig {
                    formulation: Formulation::Reformulated,
                    ..c
                },
            )?;
            let level = CrossLevel {
                n,
                dt,
                gap: sup_gap(&prim, &refo),
            };
            Ok((level, prim.snapshots, refo.snapshots))
        })
        .collect::<Result<Vec<_>, VerificationError>>()?;
    let (levels, mut snapshots): (Vec<CrossLevel>, Vec<_>) =
        runs.into_iter().map(|(l, a, b)| (l, (a, b))).unzip();
    let ratios = levels.windows(2).map(|w| w[0].gap / w[1].gap).collect();
    let report = CrossReport { levels, ratios };
    if let Some(k) = report
        .levels
        .windows(2)
        .position(|w| !(w[1].gap <= w[0].gap))
    {
        let (primitive, reformulated) = snapshots.swap_remove(k + 1);
        return Err(VerificationError::Diverged(Box::new(Divergence {
            level: k + 1,
            table: report.table().to_text(),
            primitive,
            reformulated,
        })));
    }
    Ok(report)
}

fn sup_gap(a: &TimeSeries, b: &TimeSeries) -> f64 {
    a.snapshots
        .iter()
        .zip(&b.snapshots)
        .map(|(x, y)| x.state.u.zip_with(&y.state.u, |p, q| p - q).max_abs())
        .fold(0.0, f64::max)
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct FloorRow {
    pub floor: f64,
    pub m: f64,
    pub p_mom: f64,
    pub e_tot: f64,
    pub bd: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct FloorReport {
    pub rows: Vec<FloorRow>,
    /// Largest relative change of `(m, p, E, BD)` between consecutive floors.
    pub changes: Vec<f64>,
    pub monotone: bool,
    pub clamp_events: usize,
}

impl FloorReport {
    pub fn table(&self) -> Table {
        let mut t = Table::new(&["floor", "m", "p_mom", "e_tot", "bd", "change"]);
        for (k, r) in self.rows.iter().enumerate() {
            t.push(vec![
                format!("{:.1e}", r.floor),
                format!("{:.12e}", r.m),
                format!("{:.12e}", r.p_mom),
                format!("{:.12e}", r.e_tot),
                format!("{:.12e}", r.bd),
                k.checked_sub(1)
                    .map(|i| format!("{:.3e}", self.changes[i]))
                    .unwrap_or_else(|| "-".into()),
            ]);
        }
        t
    }
}

/// Reruns `spec` with each floor (relative to `max rho_0`) and compares the
/// final diagnostics. The floor enters both the initial regularization and
/// the solver.
pub fn floor_sensitivity(
    spec: &InitFamilySpec,
    grid: Grid,
    p: &ModelParams,
    c: &SolverConfig,
    floors: &[f64],
) -> Result<FloorReport, VerificationError> {
    if floors.len() < 2 || floors.windows(2).any(|w| !(w[1] < w[0])) {
        return Err(VerificationError::Precondition(
            "floors must be strictly decreasing".into(),
        ));
    }
    let base: Vec<f64> = grid.nodes().map(|x| spec.density(x)).collect();
    let max_rho = base.iter().copied().fold(0.0, f64::max);
    let min_rho = base.iter().copied().fold(f64::INFINITY, f64::min);
    if floors[0] * max_rho > min_rho {
        return Err(VerificationError::Precondition(format!(
            "floor {:e} exceeds the smallest initial density {:e} on the grid",
            floors[0] * max_rho,
            min_rho
        )));
    }
    let results = floors
        .par_iter()
        .map(|&f| {
            let s = InitFamilySpec {
                vacuum_floor: f,
                ..*spec
            };
            let initial = build_initial_state(&s, p, grid)?.state;
            let cf = SolverConfig {
                vacuum_floor: f * max_rho,
                ..c.clone()
            };
            let series = run(&initial, p, &cf)?;
            let r = *series.last().expect("a run has at least one record");
            Ok((
                FloorRow {
                    floor: f,
                    m: r.m,
                    p_mom: r.p_mom,
                    e_tot: r.e_tot,
                    bd: r.bd,
                },
                series.clamp_events,
            ))
        })
        .collect::<Result<Vec<_>, VerificationError>>()?;
    let clamp_events = results.iter().map(|r| r.1).sum();
    let rows: Vec<FloorRow> = results.into_iter().map(|r| r.0).collect();
    let rel = |a: f64, b: f64| {
        if b == 0.0 {
            (a - b).abs()
        } else {
            ((a - b) / b).abs()
        }
    };
    let changes: Vec<f64> = rows
        .windows(2)
        .map(|w| {
            [
                rel(w[1].m, w[0].m),
                rel(w[1].p_mom, w[0].p_mom),
                rel(w[1].e_tot, w[0].e_tot),
                rel(w[1].bd, w[0].bd),
            ]
            .into_iter()
            .fold(0.0, f64::max)
        })
        .collect();
    let monotone = changes.windows(2).all(|w| w[1] <= w[0]);
    Ok(FloorReport {
        rows,
        changes,
        monotone,
        clamp_events,
    })
}
