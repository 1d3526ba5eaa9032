//! CSV series and snapshots, summary text and the failure report.
//!
//! Every file starts with a `# config_hash=<hex>` comment line. Reals are
//! written with 17 significant digits so that they read back bit-exactly.
//!
//! `series.csv` columns, in order: `t, step, m, p_mom, e_kin, e_tot, bd,
//! diss_energy, diss_bd, u_inf, nondecay_floor`, the tracked norms
//! (`psi_l2, psi_l4, v_inf, weighted_ux_l2, u_l2, ux_l2, uxx_l2,
//! rho_iota_u_inf, rho_inf`), the interval residuals (`res_energy, res_bd,
//! res_effective_velocity`) and the cumulative boundary inflow
//! (`inflow_mass, inflow_momentum`).
//!
//! Snapshot columns: `x, rho, u, phi, psi, v`.

use std::fs;
use std::io::Write;
use std::path::Path;

use serde::Serialize;

use crate::diagnostics::{DiagnosticsRecord, Residuals, TrackedNorms};
use crate::error::IoError;
use crate::grid::{Field, Grid};
use crate::params::ModelParams;
use crate::reformulate::{effective_velocity_unchecked, psi_of_rho};
use crate::solver::{BoundaryFlux, Snapshot};
use crate::state::FluidState;

fn io_err(path: &Path) -> impl FnOnce(std::io::Error) -> IoError + '_ {
    move |source| IoError::Io {
        path: path.display().to_string(),
        source,
    }
}

fn csv_err(path: &Path) -> impl FnOnce(csv::Error) -> IoError + '_ {
    move |source| IoError::Csv {
        path: path.display().to_string(),
        source,
    }
}

fn format_err(path: &Path, message: impl Into<String>) -> IoError {
    IoError::Format {
        path: path.display().to_string(),
        message: message.into(),
    }
}

#[inline]
fn real(v: f64) -> String {
    format!("{v:.16e}")
}

pub fn series_header() -> Vec<&'static str> {
    let mut h = vec![
        "t",
        "step",
        "m",
        "p_mom",
        "e_kin",
        "e_tot",
        "bd",
        "diss_energy",
        "diss_bd",
        "u_inf",
        "nondecay_floor",
    ];
    h.extend(TrackedNorms::NAMES);
    h.extend([
        "res_energy",
        "res_bd",
        "res_effective_velocity",
        "inflow_mass",
        "inflow_momentum",
    ]);
    h
}

fn record_row(r: &DiagnosticsRecord) -> Vec<String> {
    let mut row = vec![real(r.t), r.step.to_string()];
    row.extend(
        [
            r.m,
            r.p_mom,
            r.e_kin,
            r.e_tot,
            r.bd,
            r.diss_energy,
            r.diss_bd,
            r.u_inf,
            r.nondecay_floor,
        ]
        .map(real),
    );
    row.extend(r.tracked.values().map(real));
    row.extend(
        [
            r.residuals.energy,
            r.residuals.bd,
            r.residuals.effective_velocity,
            r.boundary_flux.mass,
            r.boundary_flux.momentum,
        ]
        .map(real),
    );
    row
}

/// The exact bytes of `series.csv`.
pub fn series_csv(hash: &str, records: &[DiagnosticsRecord]) -> Vec<u8> {
    let mut w = csv::Writer::from_writer(format!("# config_hash={hash}\n").into_bytes());
    w.write_record(series_header()).expect("in-memory write");
    for r in records {
        w.write_record(record_row(r)).expect("in-memory write");
    }
    w.into_inner().expect("in-memory flush")
}

pub fn write_series(path: &Path, hash: &str, records: &[DiagnosticsRecord]) -> Result<(), IoError> {
    fs::write(path, series_csv(hash, records)).map_err(io_err(path))
}

fn parse_real(path: &Path, s: &str) -> Result<f64, IoError> {
    s.trim()
        .parse()
        .map_err(|_| format_err(path, format!("not a number: {s:?}")))
}

fn split_comment(path: &Path, text: &str) -> Result<(String, String), IoError> {
    let (first, rest) = text.split_once('\n').unwrap_or((text, ""));
    let Some(meta) = first.strip_prefix("# ") else {
        return Err(format_err(path, "missing header comment"));
    };
    Ok((meta.to_string(), rest.to_string()))
}

fn meta_value<'a>(path: &Path, meta: &'a str, key: &str) -> Result<&'a str, IoError> {
    meta.split_whitespace()
        .find_map(|kv| kv.strip_prefix(key).and_then(|v| v.strip_prefix('=')))
        .ok_or_else(|| format_err(path, format!("header comment lacks {key}")))
}

pub fn read_series(path: &Path) -> Result<(String, Vec<DiagnosticsRecord>), IoError> {
    let text = fs::read_to_string(path).map_err(io_err(path))?;
    let (meta, body) = split_comment(path, &text)?;
    let hash = meta_value(path, &meta, "config_hash")?.to_string();
    let mut rdr = csv::Reader::from_reader(body.as_bytes());
    let header = rdr.headers().map_err(csv_err(path))?.clone();
    if header.iter().ne(series_header()) {
        return Err(format_err(path, "unexpected series columns"));
    }
    let mut out = Vec::new();
    for row in rdr.records() {
        let row = row.map_err(csv_err(path))?;
        let v: Vec<f64> = row
            .iter()
            .enumerate()
            .filter(|(k, _)| *k != 1)
            .map(|(_, s)| parse_real(path, s))
            .collect::<Result<_, _>>()?;
        let step = row[1].parse().map_err(|_| format_err(path, "bad step"))?;
        let mut norms = [0.0; 9];
        norms.copy_from_slice(&v[10..19]);
        out.push(DiagnosticsRecord {
            t: v[0],
            step,
            m: v[1],
            p_mom: v[2],
            e_kin: v[3],
            e_tot: v[4],
            bd: v[5],
            diss_energy: v[6],
            diss_bd: v[7],
            u_inf: v[8],
            nondecay_floor: v[9],
            tracked: TrackedNorms::from_values(norms),
            residuals: Residuals {
                energy: v[19],
                bd: v[20],
                effective_velocity: v[21],
            },
            boundary_flux: BoundaryFlux {
                mass: v[22],
                momentum: v[23],
            },
        });
    }
    Ok((hash, out))
}

pub fn snapshot_file_name(index: usize) -> String {
    format!("t_{index:05}.csv")
}

/// Writes `x, rho, u, phi, psi, v`; `phi` and `psi` come from the
/// reformulated state when the run evolved it.
pub fn write_snapshot(
    path: &Path,
    hash: &str,
    snap: &Snapshot,
    p: &ModelParams,
) -> Result<(), IoError> {
    let s = &snap.state;
    let g = s.grid();
    let (phi, psi) = match &snap.reformulated {
        Some(r) => (r.phi.clone(), r.psi.clone()),
        None => (s.rho.map(|r| p.phi_of_rho(r)), psi_of_rho(&s.rho, p)),
    };
    let v = effective_velocity_unchecked(&s.rho, &s.u, p);
    let head = format!(
        "# config_hash={hash} t={} step={} index={} inflow_mass={} inflow_momentum={}\n",
        real(s.t),
        snap.step,
        snap.index,
        real(snap.inflow.mass),
        real(snap.inflow.momentum)
    );
    let mut w = csv::Writer::from_writer(head.into_bytes());
    w.write_record(["x", "rho", "u", "phi", "psi", "v"])
        .map_err(csv_err(path))?;
    for i in 0..g.len() {
        w.write_record(
            [
                g.x(i),
                s.rho.values()[i],
                s.u.values()[i],
                phi.values()[i],
                psi.values()[i],
                v.values()[i],
            ]
            .map(real),
        )
        .map_err(csv_err(path))?;
    }
    let bytes = w
        .into_inner()
        .map_err(|e| format_err(path, e.to_string()))?;
    let mut f = fs::File::create(path).map_err(io_err(path))?;
    f.write_all(&bytes).map_err(io_err(path))
}

#[derive(Debug, Clone, PartialEq)]
pub struct StoredSnapshot {
    pub config_hash: String,
    pub index: usize,
    pub step: usize,
    pub state: FluidState,
    pub inflow: BoundaryFlux,
}

/// Reads a snapshot back; the grid is rebuilt from the first node and the
/// node count.
pub fn read_snapshot(path: &Path) -> Result<StoredSnapshot, IoError> {
    let text = fs::read_to_string(path).map_err(io_err(path))?;
    let (meta, body) = split_comment(path, &text)?;
    let get = |k: &str| meta_value(path, &meta, k);
    let t = parse_real(path, get("t")?)?;
    let step = get("step")?
        .parse()
        .map_err(|_| format_err(path, "bad step"))?;
    let index = get("index")?
        .parse()
        .map_err(|_| format_err(path, "bad index"))?;
    let inflow = BoundaryFlux {
        mass: parse_real(path, get("inflow_mass")?)?,
        momentum: parse_real(path, get("inflow_momentum")?)?,
    };
    let mut rdr = csv::Reader::from_reader(body.as_bytes());
    let (mut x, mut rho, mut u) = (Vec::new(), Vec::new(), Vec::new());
    for row in rdr.records() {
        let row = row.map_err(csv_err(path))?;
        if row.len() < 3 {
            return Err(format_err(path, "short snapshot row"));
        }
        x.push(parse_real(path, &row[0])?);
        rho.push(parse_real(path, &row[1])?);
        u.push(parse_real(path, &row[2])?);
    }
    if x.is_empty() {
        return Err(format_err(path, "empty snapshot"));
    }
    let grid = Grid::new(-x[0], x.len()).map_err(|e| format_err(path, e.to_string()))?;
    if grid.nodes().zip(&x).any(|(a, b)| a != *b) {
        return Err(format_err(path, "nodes are not a uniform symmetric grid"));
    }
    let field = |v: Vec<f64>| Field::new(grid, v).map_err(|e| format_err(path, e.to_string()));
    Ok(StoredSnapshot {
        config_hash: get("config_hash")?.to_string(),
        index,
        step,
        state: FluidState {
            rho: field(rho)?,
            u: field(u)?,
            t,
        },
        inflow,
    })
}

/// Snapshot files of a directory in index order.
pub fn list_snapshots(dir: &Path) -> Result<Vec<std::path::PathBuf>, IoError> {
    let mut files: Vec<_> = fs::read_dir(dir)
        .map_err(io_err(dir))?
        .filter_map(|e| e.ok().map(|e| e.path()))
        .filter(|p| {
            p.file_name()
                .and_then(|n| n.to_str())
                .is_some_and(|n| n.starts_with("t_") && n.ends_with(".csv"))
        })
        .collect();
    files.sort();
    Ok(files)
}

/// One violated contract.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Failure {
    pub contract: String,
    pub detail: String,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct FailureReport {
    pub command: String,
    pub config_hash: Option<String>,
    pub failures: Vec<Failure>,
}

pub fn write_failures(path: &Path, report: &FailureReport) -> Result<(), IoError> {
    let text = serde_json::to_string_pretty(report).map_err(|e| format_err(path, e.to_string()))?;
    fs::write(path, text + "\n").map_err(io_err(path))
}

pub fn write_text(path: &Path, text: &str) -> Result<(), IoError> {
    fs::write(path, text).map_err(io_err(path))
}

pub fn create_dir(path: &Path) -> Result<(), IoError> {
    fs::create_dir_all(path).map_err(io_err(path))
}

pub fn read_text(path: &Path) -> Result<String, IoError> {
    fs::read_to_string(path).map_err(io_err(path))
}
