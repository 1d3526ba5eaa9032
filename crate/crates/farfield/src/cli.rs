//! Command-line surface: `simulate`, `verify`, `diagnose` and `sweep`.
//!
//! Each command exits 0 exactly when every contract it checks holds; on
//! failure it also writes `failures.json` into the output directory.

use std::fmt::Write as _;
use std::fs;
use std::path::{Path, PathBuf};

use clap::{Parser, Subcommand, ValueEnum};
use rayon::prelude::*;

use crate::config::{parse_config, text_hash, RunConfig};
use crate::diagnostics::{
    bd_identity_residual, boundedness_ledger, energy_identity_residual, mass_conservation,
    momentum_conservation, nondecay_check, SeriesBuilder,
};
use crate::error::VerificationError;
use crate::grid::Grid;
use crate::initdata::{
    build_initial_state, check_family_compatibility, InitFamilySpec, Regularization,
    VelocityProfile,
};
use crate::io::{self, Failure, FailureReport};
use crate::params::ModelParams;
use crate::solver::{run, FluxScheme, Formulation, Snapshot, SolverConfig, TimeSeries};
use crate::verification::{
    cross_formulation_study, floor_sensitivity, mms_convergence, mms_temporal_convergence,
    CrossSetup, ManufacturedCase, MmsSetup, RefinementLadder, Table,
};

#[derive(Debug, Parser)]
#[command(
    name = "farfield",
    version,
    about = "1-D compressible Navier-Stokes with far-field vacuum"
)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
enum Suite {
    Mms,
    Cross,
    Floor,
    All,
}

#[derive(Debug, Subcommand)]
enum Command {
    /// Run one configuration and write series, snapshots and a summary.
    Simulate {
        #[arg(long)]
        config: Option<PathBuf>,
        #[arg(long)]
        out: Option<PathBuf>,
        /// Start from a stored snapshot instead of the initial-data family.
        #[arg(long)]
        seed_snapshots: Option<PathBuf>,
    },
    /// Run the manufactured-solution, cross-formulation and floor studies.
    Verify {
        #[arg(long, value_enum, default_value = "all")]
        suite: Suite,
        #[arg(long, default_value = "verify")]
        out: PathBuf,
        #[arg(long)]
        workers: Option<usize>,
    },
    /// Recompute the diagnostics series from stored snapshots.
    Diagnose {
        /// Snapshot directory of a previous `simulate`.
        #[arg(long = "from", alias = "seed-snapshots")]
        from: PathBuf,
        /// Defaults to `config.toml` next to the snapshot directory.
        #[arg(long)]
        config: Option<PathBuf>,
        /// Defaults to `diagnose/` next to the snapshot directory.
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Run the cartesian parameter grid of the `[sweep]` section.
    Sweep {
        #[arg(long)]
        config: PathBuf,
        #[arg(long)]
        out: Option<PathBuf>,
        #[arg(long)]
        workers: Option<usize>,
    },
}

type AnyError = Box<dyn std::error::Error + Send + Sync>;

/// Parses `argv` (program name first) and runs the command.
pub fn run_command<I, T>(argv: I) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<std::ffi::OsString> + Clone,
{
    let cli = match Cli::try_parse_from(argv) {
        Ok(c) => c,
        Err(e) => {
            let _ = e.print();
            return if e.use_stderr() { 2 } else { 0 };
        }
    };
    let (name, out, result) = match cli.command {
        Command::Simulate {
            config,
            out,
            seed_snapshots,
        } => {
            let loaded = load_config(config.as_deref());
            let out = out
                .or_else(|| loaded.as_ref().ok().and_then(|c| c.output_dir.clone()))
                .unwrap_or_else(|| PathBuf::from("out"));
            let res = loaded.and_then(|c| simulate(&c, &out, seed_snapshots.as_deref()));
            ("simulate", out, res)
        }
        Command::Verify {
            suite,
            out,
            workers,
        } => {
            let res = with_workers(workers, || verify(suite, &out));
            ("verify", out, res)
        }
        Command::Diagnose { from, config, out } => {
            let parent = from.parent().map(Path::to_path_buf).unwrap_or_default();
            let out = out.unwrap_or_else(|| parent.join("diagnose"));
            let config = config.unwrap_or_else(|| parent.join("config.toml"));
            let res = diagnose(&from, &config, &out);
            ("diagnose", out, res)
        }
        Command::Sweep {
            config,
            out,
            workers,
        } => {
            let loaded = load_config(Some(&config));
            let out = out
                .or_else(|| loaded.as_ref().ok().and_then(|c| c.output_dir.clone()))
                .unwrap_or_else(|| PathBuf::from("sweep"));
            let res = loaded.and_then(|c| with_workers(workers, || sweep(&c, &out)));
            ("sweep", out, res)
        }
    };
    finish(name, &out, result)
}

/// Result of a command: the config hash (when one applies) and the
/// violated contracts.
struct Outcome {
    hash: Option<String>,
    failures: Vec<Failure>,
}

fn finish(command: &str, out: &Path, result: Result<Outcome, AnyError>) -> i32 {
    let (hash, failures) = match result {
        Ok(o) => (o.hash, o.failures),
        Err(e) => (
            None,
            vec![Failure {
                contract: "completed".into(),
                detail: e.to_string(),
            }],
        ),
    };
    let path = out.join("failures.json");
    if failures.is_empty() {
        let _ = fs::remove_file(&path);
        return 0;
    }
    for f in &failures {
        eprintln!("FAIL {}: {}", f.contract, f.detail);
    }
    let report = FailureReport {
        command: command.into(),
        config_hash: hash,
        failures,
    };
    if io::create_dir(out)
        .and_then(|_| io::write_failures(&path, &report))
        .is_err()
    {
        eprintln!("could not write {}", path.display());
    }
    1
}

fn with_workers<R: Send>(
    workers: Option<usize>,
    f: impl FnOnce() -> Result<R, AnyError> + Send,
) -> Result<R, AnyError> {
    let mut b = rayon::ThreadPoolBuilder::new();
    if let Some(w) = workers {
        if w == 0 {
            return Err("--workers must be positive".into());
        }
        b = b.num_threads(w);
    }
    b.build()?.install(f)
}

fn load_config(path: Option<&Path>) -> Result<RunConfig, AnyError> {
    let Some(path) = path else {
        return Ok(RunConfig::default());
    };
    let text = io::read_text(path)?;
    parse_config(&text).map_err(|e| format!("{}: {e}", path.display()).into())
}

/// One contract check.
#[derive(Debug, Clone, PartialEq)]
pub struct Contract {
    pub name: &'static str,
    pub passed: bool,
    pub detail: String,
}

fn contract(name: &'static str, passed: bool, detail: String) -> Contract {
    Contract {
        name,
        passed,
        detail,
    }
}

/// Contracts every run must satisfy: no floor clamps, the Cauchy-Schwarz
/// inequality, BD entropy not increasing, the non-decay floor, and for the
/// primitive formulation a boundary-flux account of mass and momentum
/// changes.
pub fn run_contracts(series: &TimeSeries, formulation: Formulation) -> Vec<Contract> {
    let mut out = vec![contract(
        "no_floor_clamps",
        series.clamp_events == 0,
        format!("{} clamp events", series.clamp_events),
    )];
    let bad_cs = series
        .records
        .iter()
        .filter(|r| !r.cauchy_schwarz_holds(1e-10))
        .count();
    out.push(contract(
        "cauchy_schwarz",
        bad_cs == 0,
        format!("{bad_cs} records with |p| > sqrt(2 m E_k)"),
    ));
    let bd0 = series.records.first().map(|r| r.bd).unwrap_or(0.0);
    let bd_max = series
        .records
        .iter()
        .map(|r| r.bd)
        .fold(f64::NEG_INFINITY, f64::max);
    out.push(contract(
        "bd_entropy_bounded",
        bd_max <= bd0 * (1.0 + 1e-3),
        format!("max bd / bd(0) = {:.9}", bd_max / bd0),
    ));
    let nd = nondecay_check(series);
    out.push(contract(
        "nondecay",
        nd.satisfied,
        format!(
            "min |u|_inf = {:.6e}, floor C_u = {:.6e}{}",
            nd.min_u_inf,
            nd.floor,
            if nd.vacuous { " (vacuous)" } else { "" }
        ),
    ));
    if formulation == Formulation::Primitive {
        let m0 = series.records.first().map(|r| r.m).unwrap_or(0.0);
        let p0 = series.records.first().map(|r| r.p_mom).unwrap_or(0.0);
        let accounted = |q: &dyn Fn(&crate::diagnostics::DiagnosticsRecord) -> (f64, f64),
                         scale: f64| {
            series.records.iter().all(|r| {
                let (disc, b) = q(r);
                (disc - b).abs() <= 0.1 * disc.abs() + 1e-13 * scale
            })
        };
        let mass = mass_conservation(series);
        out.push(contract(
            "mass_accounted",
            accounted(&|r| (r.m - m0, r.boundary_flux.mass), m0.abs()),
            format!(
                "max |m - m0|/m0 = {:.3e}, unexplained {:.3e}",
                mass.max_relative_change, mass.max_unexplained
            ),
        ));
        let mom = momentum_conservation(series);
        out.push(contract(
            "momentum_accounted",
            accounted(&|r| (r.p_mom - p0, r.boundary_flux.momentum), m0.abs()),
            format!(
                "max |p - p0|/|p0| = {:.3e}, unexplained {:.3e}",
                mom.max_relative_change, mom.max_unexplained
            ),
        ));
    }
    out
}

fn summarize(
    cfg: &RunConfig,
    hash: &str,
    series: &TimeSeries,
    contracts: &[Contract],
    extra: &str,
) -> String {
    let mut s = String::new();
    let _ = writeln!(s, "config_hash = {hash}");
    let p = &cfg.params;
    let _ = writeln!(
        s,
        "model: A = {}, gamma = {}, delta = {}, alpha = {} ({:?}, admissible: {})",
        p.pressure_constant(),
        p.gamma(),
        p.delta(),
        p.alpha(),
        p.regime(),
        p.admissible()
    );
    let _ = writeln!(
        s,
        "grid: L = {}, n = {}, dx = {:.6e}",
        cfg.grid.half_width(),
        cfg.grid.len(),
        cfg.grid.dx()
    );
    let _ = writeln!(
        s,
        "run: {} records, {} steps, {} clamp events, t_final = {}",
        series.records.len(),
        series.steps,
        series.clamp_events,
        series.last().map(|r| r.t).unwrap_or(0.0)
    );
    s.push_str(extra);
    if series.records.len() >= 2 {
        let e = energy_identity_residual(series);
        let b = bd_identity_residual(series);
        let _ = writeln!(
            s,
            "energy identity: max interval residual {:.6e}, max cumulative {:.6e} (relative to E(0))",
            e.max_normalized, e.max_cumulative
        );
        let _ = writeln!(
            s,
            "bd identity: max interval residual {:.6e}, max cumulative {:.6e} (relative to BD(0))",
            b.max_normalized, b.max_cumulative
        );
        let v = series
            .records
            .iter()
            .map(|r| r.residuals.effective_velocity)
            .fold(0.0, f64::max);
        let _ = writeln!(s, "effective velocity transport: max residual {v:.6e}");
    }
    let _ = writeln!(s, "boundedness (norm, initial, max, ratio):");
    for e in boundedness_ledger(series) {
        let _ = writeln!(
            s,
            "  {:<16} {:.6e} {:.6e} {:.4}",
            e.name, e.initial, e.max, e.ratio
        );
    }
    let _ = writeln!(s, "contracts:");
    for c in contracts {
        let _ = writeln!(
            s,
            "  {} {}: {}",
            if c.passed { "PASS" } else { "FAIL" },
            c.name,
            c.detail
        );
    }
    s
}

fn failures_of(contracts: &[Contract]) -> Vec<Failure> {
    contracts
        .iter()
        .filter(|c| !c.passed)
        .map(|c| Failure {
            contract: c.name.into(),
            detail: c.detail.clone(),
        })
        .collect()
}

fn write_config(out: &Path, cfg: &RunConfig, hash: &str) -> Result<(), AnyError> {
    io::write_text(
        &out.join("config.toml"),
        &format!("# config_hash={hash}\n{}", cfg.to_toml()),
    )?;
    Ok(())
}

fn write_snapshot_set(
    dir: &Path,
    hash: &str,
    snaps: &[Snapshot],
    p: &ModelParams,
) -> Result<(), AnyError> {
    io::create_dir(dir)?;
    snaps.par_iter().try_for_each(|sn| {
        io::write_snapshot(&dir.join(io::snapshot_file_name(sn.index)), hash, sn, p)
    })?;
    Ok(())
}

fn write_outputs(
    out: &Path,
    cfg: &RunConfig,
    hash: &str,
    series: &TimeSeries,
) -> Result<(), AnyError> {
    io::write_series(&out.join("series.csv"), hash, &series.records)?;
    let snaps = out.join("snapshots");
    if snaps.exists() {
        for old in io::list_snapshots(&snaps)? {
            fs::remove_file(&old).map_err(|e| format!("{}: {e}", old.display()))?;
        }
    }
    io::create_dir(&snaps)?;
    series.snapshots.par_iter().try_for_each(|sn| {
        io::write_snapshot(
            &snaps.join(io::snapshot_file_name(sn.index)),
            hash,
            sn,
            &cfg.params,
        )
    })?;
    Ok(())
}

/// Runs `cfg` and writes `config.toml`, `series.csv`, `snapshots/` and
/// `summary.txt` into `out`.
fn simulate(cfg: &RunConfig, out: &Path, seed: Option<&Path>) -> Result<Outcome, AnyError> {
    let hash = cfg.hash();
    io::create_dir(out)?;
    write_config(out, cfg, &hash)?;
    let mut extra = String::new();
    let initial = match seed {
        Some(path) => {
            let snap = io::read_snapshot(path)?;
            if *snap.state.grid() != cfg.grid {
                return Err(format!(
                    "{}: snapshot grid differs from the configured grid",
                    path.display()
                )
                .into());
            }
            let _ = writeln!(
                extra,
                "seeded from {} (t = {})",
                path.display(),
                snap.state.t
            );
            snap.state
        }
        None => {
            let data = build_initial_state(&cfg.initial, &cfg.params, cfg.grid)?;
            let w = data.window;
            let _ = writeln!(
                extra,
                "initial data: sigma = {} in window ({}, {}): {}",
                cfg.initial.sigma, w.lower, w.upper, data.sigma_in_window
            );
            let comp = check_family_compatibility(&cfg.initial, &cfg.params, &data.state)?;
            let _ = writeln!(
                extra,
                "compatibility: |g1|_2 = {:.6e}, |g2|_2 = {:.6e}",
                comp.g1_norm, comp.g2_norm
            );
            if let Some(n) = comp.note {
                let _ = writeln!(extra, "  note: {n}");
            }
            data.state
        }
    };
    let (series, mut contracts) = match run(&initial, &cfg.params, &cfg.solver) {
        Ok(s) => {
            let c = run_contracts(&s, cfg.solver.formulation);
            (s, c)
        }
        Err(f) => {
            let c = vec![contract("completed", false, f.to_string())];
            (*f.partial, c)
        }
    };
    if contracts.iter().all(|c| c.name != "completed") {
        contracts.insert(
            0,
            contract("completed", true, format!("{} steps", series.steps)),
        );
    }
    write_outputs(out, cfg, &hash, &series)?;
    io::write_text(
        &out.join("summary.txt"),
        &summarize(cfg, &hash, &series, &contracts, &extra),
    )?;
    Ok(Outcome {
        hash: Some(hash),
        failures: failures_of(&contracts),
    })
}

/// Rebuilds `series.csv` from the snapshots of a previous run.
fn diagnose(from: &Path, config: &Path, out: &Path) -> Result<Outcome, AnyError> {
    let cfg = load_config(Some(config))?;
    let hash = cfg.hash();
    let files = io::list_snapshots(from)?;
    if files.is_empty() {
        return Err(format!("{}: no snapshots", from.display()).into());
    }
    let snaps = files
        .par_iter()
        .map(|f| io::read_snapshot(f))
        .collect::<Result<Vec<_>, _>>()?;
    let mut failures = Vec::new();
    if let Some(s) = snaps.iter().find(|s| s.config_hash != hash) {
        failures.push(Failure {
            contract: "config_hash".into(),
            detail: format!(
                "snapshot {} has hash {} but the config has {hash}",
                s.index, s.config_hash
            ),
        });
    }
    let mut builder = SeriesBuilder::new(cfg.params, cfg.solver.vacuum_floor);
    let records = snaps
        .iter()
        .map(|s| builder.push(&s.state, s.step, s.inflow))
        .collect();
    let series = TimeSeries {
        records,
        snapshots: Vec::new(),
        steps: snaps.last().map(|s| s.step).unwrap_or(0),
        clamp_events: 0,
    };
    io::create_dir(out)?;
    io::write_series(&out.join("series.csv"), &hash, &series.records)?;
    let mut contracts = run_contracts(&series, cfg.solver.formulation);
    contracts.retain(|c| c.name != "no_floor_clamps");
    let extra = format!(
        "recomputed from {} snapshots in {}\n",
        snaps.len(),
        from.display()
    );
    io::write_text(
        &out.join("summary.txt"),
        &summarize(&cfg, &hash, &series, &contracts, &extra),
    )?;
    failures.extend(failures_of(&contracts));
    Ok(Outcome {
        hash: Some(hash),
        failures,
    })
}

fn sweep(cfg: &RunConfig, out: &Path) -> Result<Outcome, AnyError> {
    let runs = cfg.expand_sweep()?;
    io::create_dir(out)?;
    let results: Vec<(String, String, Result<Outcome, String>)> = runs
        .par_iter()
        .enumerate()
        .map(|(k, (label, c))| {
            let dir = out.join(format!("run_{k:03}"));
            let r = simulate(c, &dir, None).map_err(|e| e.to_string());
            (label.clone(), c.hash(), r)
        })
        .collect();
    let mut index = Table::new(&["run", "label", "config_hash", "passed"]);
    let mut failures = Vec::new();
    for (k, (label, hash, r)) in results.into_iter().enumerate() {
        let passed = matches!(&r, Ok(o) if o.failures.is_empty());
        index.push(vec![
            format!("run_{k:03}"),
            format!("\"{label}\""),
            hash,
            passed.to_string(),
        ]);
        match r {
            Ok(o) => failures.extend(o.failures.into_iter().map(|f| Failure {
                contract: format!("run_{k:03}/{}", f.contract),
                detail: f.detail,
            })),
            Err(e) => failures.push(Failure {
                contract: format!("run_{k:03}/completed"),
                detail: e,
            }),
        }
    }
    io::write_text(
        &out.join("sweep.csv"),
        &format!("# config_hash={}\n{}", cfg.hash(), index.to_csv()),
    )?;
    Ok(Outcome {
        hash: Some(cfg.hash()),
        failures,
    })
}

fn write_table(out: &Path, hash: &str, name: &str, t: &Table) -> Result<(), AnyError> {
    io::write_text(
        &out.join(format!("{name}.csv")),
        &format!("# config_hash={hash}\n{}", t.to_csv()),
    )?;
    io::write_text(
        &out.join(format!("{name}.txt")),
        &format!("# config_hash={hash}\n{}", t.to_text()),
    )?;
    Ok(())
}

/// The fixed study setups; its hash stands in for a config hash.
const STUDIES: &str = "\
mms: gaussian pulse, A=1 gamma=2 delta=1 alpha=1, L=12, t=1, central flux
mms space: n=241, dt=0.02, 3 levels
mms time: n=961, dt=0.008, 3 levels, reference at dt/4 of the finest
cross: L=50, t=1, central flux, n=1001, dt=0.02, 3 levels, record stride 5
cross cases: delta=1 sigma=1; delta=0.75 sigma=0.9; lorentzian u0, floor 1e-8
floor: reference config with shifted data, floors 1e-6 1e-7 1e-8
";

fn reference_params(delta: f64) -> ModelParams {
    ModelParams::new(1.0, 2.0, delta, 1.0).expect("fixed parameters are valid")
}

fn reference_spec(sigma: f64) -> InitFamilySpec {
    InitFamilySpec::new(
        sigma,
        VelocityProfile::Lorentzian {
            amplitude: 1.0,
            width: 1.0,
        },
    )
}

/// The fixed verification studies.
fn verify(suite: Suite, out: &Path) -> Result<Outcome, AnyError> {
    io::create_dir(out)?;
    let hash = text_hash(&format!("suite={suite:?}\n{STUDIES}"));
    let mut contracts: Vec<Contract> = Vec::new();
    let mut report = format!("config_hash = {hash}\n{STUDIES}\n");
    let all = suite == Suite::All;

    if all || suite == Suite::Mms {
        let p = reference_params(1.0);
        let setup = MmsSetup::default();
        let case = ManufacturedCase::GaussianPulse;
        match mms_convergence(&case, &p, &setup, &RefinementLadder::new(241, 0.02, 3)?) {
            Ok(r) => {
                let (lo, hi) = (
                    r.min_order().unwrap_or(f64::NAN),
                    r.max_order().unwrap_or(f64::NAN),
                );
                contracts.push(contract(
                    "mms_spatial_order",
                    lo >= 1.8 && hi <= 2.2,
                    format!("observed orders in [{lo:.3}, {hi:.3}]"),
                ));
                write_table(out, &hash, "mms_space", &r.table())?;
                let _ = writeln!(
                    report,
                    "manufactured solution, space and time refined together:\n{}",
                    r.table().to_text()
                );
            }
            Err(e) => contracts.push(contract("mms_spatial_order", false, e.to_string())),
        }
        match mms_temporal_convergence(&case, &p, &setup, 961, 0.008, 3) {
            Ok(r) => {
                let lo = r.min_order().unwrap_or(f64::NAN);
                contracts.push(contract(
                    "mms_temporal_order",
                    lo >= 0.9,
                    format!("min observed order {lo:.3}"),
                ));
                write_table(out, &hash, "mms_time", &r.table())?;
                let _ = writeln!(
                    report,
                    "manufactured solution, time refined on a fixed grid:\n{}",
                    r.table().to_text()
                );
            }
            Err(e) => contracts.push(contract("mms_temporal_order", false, e.to_string())),
        }
    }

    if all || suite == Suite::Cross {
        let cases = [
            ("cross_delta_1", "cross_formulation_delta_1", 1.0, 1.0),
            (
                "cross_delta_0.75",
                "cross_formulation_delta_0.75",
                0.75,
                0.9,
            ),
        ];
        for (name, contract_name, delta, sigma) in cases {
            let p = reference_params(delta);
            let spec = reference_spec(sigma);
            let setup = CrossSetup {
                half_width: 50.0,
                t_end: 1.0,
                base_stride: 5,
                flux: FluxScheme::Central,
                vacuum_floor: spec.vacuum_floor,
            };
            let init = |g: Grid| build_initial_state(&spec, &p, g).map(|d| d.state);
            match cross_formulation_study(&init, &setup, &p, &RefinementLadder::new(1001, 0.02, 3)?)
            {
                Ok(r) => {
                    let m = r.min_ratio();
                    contracts.push(contract(
                        contract_name,
                        m >= 3.0,
                        format!("min gap ratio {m:.3}"),
                    ));
                    write_table(out, &hash, name, &r.table())?;
                    let _ = writeln!(
                        report,
                        "primitive vs reformulated, delta = {delta}:\n{}",
                        r.table().to_text()
                    );
                }
                Err(VerificationError::Diverged(d)) => {
                    let dir = out.join(format!("{name}_level_{}", d.level));
                    write_snapshot_set(&dir.join("primitive"), &hash, &d.primitive, &p)?;
                    write_snapshot_set(&dir.join("reformulated"), &hash, &d.reformulated, &p)?;
                    contracts.push(contract(
                        contract_name,
                        false,
                        format!(
                            "gap grew at level {}, snapshots in {}:\n{}",
                            d.level,
                            dir.display(),
                            d.table
                        ),
                    ));
                }
                Err(e) => contracts.push(contract(contract_name, false, e.to_string())),
            }
        }
    }

    if all || suite == Suite::Floor {
        let p = reference_params(1.0);
        let spec = InitFamilySpec {
            regularization: Regularization::Shift,
            ..reference_spec(1.0)
        };
        let c = SolverConfig {
            t_end: 1.0,
            ..SolverConfig::default()
        };
        let r = floor_sensitivity(&spec, Grid::new(50.0, 4001)?, &p, &c, &[1e-6, 1e-7, 1e-8])?;
        let last = r.changes.last().copied().unwrap_or(f64::NAN);
        contracts.push(contract(
            "floor_insensitivity",
            r.monotone && last <= 1e-4 && r.clamp_events == 0,
            format!(
                "changes {:?}, monotone {}, clamps {}",
                r.changes, r.monotone, r.clamp_events
            ),
        ));
        write_table(out, &hash, "floor", &r.table())?;
        let _ = writeln!(
            report,
            "floor sensitivity at t = 1:\n{}",
            r.table().to_text()
        );
    }

    let _ = writeln!(report, "contracts:");
    for c in &contracts {
        let _ = writeln!(
            report,
            "  {} {}: {}",
            if c.passed { "PASS" } else { "FAIL" },
            c.name,
            c.detail
        );
    }
    io::write_text(&out.join("summary.txt"), &report)?;
    print!("{report}");
    Ok(Outcome {
        hash: Some(hash),
        failures: failures_of(&contracts),
    })
}
