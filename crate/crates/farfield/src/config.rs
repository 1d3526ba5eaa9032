//! Run configuration: a TOML file with one level of sections.
//!
//! ```toml
//! [model]
//! A = 1.0
//! gamma = 2.0
//! delta = 1.0
//! alpha = 1.0
//!
//! [initial]
//! sigma = 1.0
//! velocity = "lorentzian"   # zero | bump | compact_bump | lorentzian
//! amplitude = 1.0
//! width = 1.0
//! vacuum_floor = 1e-8       # relative to max rho0 = 1
//! regularization = "clamp"  # clamp | shift
//!
//! [grid]
//! half_width = 50.0
//! n = 4001
//!
//! [solver]
//! formulation = "primitive" # primitive | reformulated
//! cfl = 0.5
//! t_end = 1.0
//! output_stride = 10
//! flux = "blended"          # blended | central
//! lf_weight = 0.1
//! # dt = 0.005              # fixed step instead of the CFL step
//! snapshot_every = 1        # records per snapshot
//!
//! [output]
//! # directory = "out"
//!
//! [sweep]                   # optional; cartesian product of the lists
//! gamma = [1.8, 2.0]
//! n = [2001, 4001]
//! ```
//!
//! Every key has a default; the defaults form the reference run.

use std::path::PathBuf;

use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};

use crate::error::{ConfigError, StateError};
use crate::grid::Grid;
use crate::initdata::{InitFamilySpec, Regularization, VelocityProfile};
use crate::params::ModelParams;
use crate::solver::{FluxScheme, Formulation, SolverConfig};

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
struct ConfigFile {
    #[serde(default)]
    model: ModelSection,
    #[serde(default)]
    initial: InitialSection,
    #[serde(default)]
    grid: GridSection,
    #[serde(default)]
    solver: SolverSection,
    #[serde(default)]
    output: OutputSection,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    sweep: Option<SweepSection>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
struct ModelSection {
    #[serde(rename = "A")]
    a: f64,
    gamma: f64,
    delta: f64,
    alpha: f64,
}

impl Default for ModelSection {
    fn default() -> Self {
        Self {
            a: 1.0,
            gamma: 2.0,
            delta: 1.0,
            alpha: 1.0,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
enum VelocityKind {
    Zero,
    Bump,
    CompactBump,
    Lorentzian,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
struct InitialSection {
    sigma: f64,
    velocity: VelocityKind,
    amplitude: f64,
    width: f64,
    vacuum_floor: f64,
    regularization: Regularization,
}

impl Default for InitialSection {
    fn default() -> Self {
        Self {
            sigma: 1.0,
            velocity: VelocityKind::Lorentzian,
            amplitude: 1.0,
            width: 1.0,
            vacuum_floor: 1e-8,
            regularization: Regularization::Clamp,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
struct GridSection {
    half_width: f64,
    n: usize,
}

impl Default for GridSection {
    fn default() -> Self {
        Self {
            half_width: 50.0,
            n: 4001,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
enum FluxKind {
    Blended,
    Central,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
struct SolverSection {
    formulation: Formulation,
    cfl: f64,
    t_end: f64,
    output_stride: usize,
    flux: FluxKind,
    lf_weight: f64,
    #[serde(skip_serializing_if = "Option::is_none")]
    dt: Option<f64>,
    snapshot_every: usize,
}

impl Default for SolverSection {
    fn default() -> Self {
        Self {
            formulation: Formulation::Primitive,
            cfl: 0.5,
            t_end: 1.0,
            output_stride: 10,
            flux: FluxKind::Blended,
            lf_weight: 0.1,
            dt: None,
            snapshot_every: 1,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Default, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
struct OutputSection {
    #[serde(skip_serializing_if = "Option::is_none")]
    directory: Option<String>,
}

#[derive(Debug, Clone, PartialEq, Default, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
struct SweepSection {
    #[serde(skip_serializing_if = "Vec::is_empty")]
    gamma: Vec<f64>,
    #[serde(skip_serializing_if = "Vec::is_empty")]
    delta: Vec<f64>,
    #[serde(skip_serializing_if = "Vec::is_empty")]
    alpha: Vec<f64>,
    #[serde(skip_serializing_if = "Vec::is_empty")]
    sigma: Vec<f64>,
    #[serde(skip_serializing_if = "Vec::is_empty")]
    n: Vec<usize>,
}

/// Lists of values to combine; empty lists keep the base value.
#[derive(Debug, Clone, PartialEq, Default)]
pub struct SweepSpec {
    pub gamma: Vec<f64>,
    pub delta: Vec<f64>,
    pub alpha: Vec<f64>,
    pub sigma: Vec<f64>,
    pub n: Vec<usize>,
}

#[derive(Debug, Clone, PartialEq)]
pub struct RunConfig {
    pub params: ModelParams,
    pub initial: InitFamilySpec,
    pub grid: Grid,
    pub solver: SolverConfig,
    pub output_dir: Option<PathBuf>,
    pub sweep: Option<SweepSpec>,
}

impl Default for RunConfig {
    fn default() -> Self {
        parse_config("").expect("defaults are valid")
    }
}

fn invalid(field: &str, message: impl Into<String>) -> ConfigError {
    ConfigError::Invalid {
        field: field.to_string(),
        message: message.into(),
    }
}

fn state_error(field: &str, e: StateError) -> ConfigError {
    invalid(field, e.to_string())
}

/// First 16 hex digits of the SHA-256 of `text`.
pub fn text_hash(text: &str) -> String {
    let digest = Sha256::digest(text.as_bytes());
    digest.iter().take(8).map(|b| format!("{b:02x}")).collect()
}

/// Parses and validates a configuration. Unknown keys are errors.
pub fn parse_config(text: &str) -> Result<RunConfig, ConfigError> {
    let file: ConfigFile = toml::from_str(text).map_err(|e| ConfigError::Parse(e.to_string()))?;
    from_file(file)
}

fn from_file(f: ConfigFile) -> Result<RunConfig, ConfigError> {
    let m = &f.model;
    let params = ModelParams::new(m.a, m.gamma, m.delta, m.alpha)?;

    let i = &f.initial;
    if !(i.sigma > 0.0 && i.sigma.is_finite()) {
        return Err(state_error("initial.sigma", StateError::BadSigma(i.sigma)));
    }
    let shaped = !matches!(i.velocity, VelocityKind::Zero);
    if shaped && !(i.width > 0.0 && i.width.is_finite()) {
        return Err(state_error("initial.width", StateError::BadWidth(i.width)));
    }
    if !i.amplitude.is_finite() {
        return Err(invalid("initial.amplitude", "amplitude must be finite"));
    }
    if !(i.vacuum_floor > 0.0 && i.vacuum_floor < 1.0) {
        return Err(invalid(
            "initial.vacuum_floor",
            "vacuum_floor must lie in (0, 1)",
        ));
    }
    let (amplitude, width) = (i.amplitude, i.width);
    let velocity = match i.velocity {
        VelocityKind::Zero => VelocityProfile::Zero,
        VelocityKind::Bump => VelocityProfile::Bump { amplitude, width },
        VelocityKind::CompactBump => VelocityProfile::CompactBump { amplitude, width },
        VelocityKind::Lorentzian => VelocityProfile::Lorentzian { amplitude, width },
    };
    let initial = InitFamilySpec {
        sigma: i.sigma,
        velocity,
        vacuum_floor: i.vacuum_floor,
        regularization: i.regularization,
    };

    let grid = Grid::new(f.grid.half_width, f.grid.n)?;

    let s = &f.solver;
    let solver = SolverConfig {
        formulation: s.formulation,
        cfl: s.cfl,
        vacuum_floor: i.vacuum_floor,
        t_end: s.t_end,
        output_stride: s.output_stride,
        flux: match s.flux {
            FluxKind::Blended => FluxScheme::Blended {
                lf_weight: s.lf_weight,
            },
            FluxKind::Central => FluxScheme::Central,
        },
        fixed_dt: s.dt,
        snapshot_every: Some(s.snapshot_every),
    };
    solver
        .validate()
        .map_err(|e| invalid("solver", e.to_string()))?;

    let sweep = f.sweep.map(|w| SweepSpec {
        gamma: w.gamma,
        delta: w.delta,
        alpha: w.alpha,
        sigma: w.sigma,
        n: w.n,
    });
    if let Some(w) = &sweep {
        let count = [
            w.gamma.len(),
            w.delta.len(),
            w.alpha.len(),
            w.sigma.len(),
            w.n.len(),
        ]
        .iter()
        .map(|&k| k.max(1))
        .product::<usize>();
        if count > 10_000 {
            return Err(invalid(
                "sweep",
                format!("{count} runs exceed the limit of 10000"),
            ));
        }
    }

    Ok(RunConfig {
        params,
        initial,
        grid,
        solver,
        output_dir: f.output.directory.map(PathBuf::from),
        sweep,
    })
}

impl RunConfig {
    fn to_file(&self) -> ConfigFile {
        let p = &self.params;
        let (velocity, amplitude, width) = match self.initial.velocity {
            VelocityProfile::Zero => (VelocityKind::Zero, 1.0, 1.0),
            VelocityProfile::Bump { amplitude, width } => (VelocityKind::Bump, amplitude, width),
            VelocityProfile::CompactBump { amplitude, width } => {
                (VelocityKind::CompactBump, amplitude, width)
            }
            VelocityProfile::Lorentzian { amplitude, width } => {
                (VelocityKind::Lorentzian, amplitude, width)
            }
        };
        let s = &self.solver;
        let (flux, lf_weight) = match s.flux {
            FluxScheme::Blended { lf_weight } => (FluxKind::Blended, lf_weight),
            FluxScheme::Central => (FluxKind::Central, 0.1),
        };
        ConfigFile {
            model: ModelSection {
                a: p.pressure_constant(),
                gamma: p.gamma(),
                delta: p.delta(),
                alpha: p.alpha(),
            },
            initial: InitialSection {
                sigma: self.initial.sigma,
                velocity,
                amplitude,
                width,
                vacuum_floor: self.initial.vacuum_floor,
                regularization: self.initial.regularization,
            },
            grid: GridSection {
                half_width: self.grid.half_width(),
                n: self.grid.len(),
            },
            solver: SolverSection {
                formulation: s.formulation,
                cfl: s.cfl,
                t_end: s.t_end,
                output_stride: s.output_stride,
                flux,
                lf_weight,
                dt: s.fixed_dt,
                snapshot_every: s.snapshot_every.unwrap_or(1),
            },
            output: OutputSection {
                directory: self.output_dir.as_ref().map(|d| d.display().to_string()),
            },
            sweep: self.sweep.as_ref().map(|w| SweepSection {
                gamma: w.gamma.clone(),
                delta: w.delta.clone(),
                alpha: w.alpha.clone(),
                sigma: w.sigma.clone(),
                n: w.n.clone(),
            }),
        }
    }

    /// Canonical TOML with every default written out.
    pub fn to_toml(&self) -> String {
        toml::to_string(&self.to_file()).expect("config sections serialize")
    }

    /// [`text_hash`] of [`RunConfig::to_toml`].
    pub fn hash(&self) -> String {
        text_hash(&self.to_toml())
    }

    /// One configuration per point of the sweep grid, with labels like
    /// `gamma=2,n=4001`. A config without a sweep expands to itself.
    pub fn expand_sweep(&self) -> Result<Vec<(String, RunConfig)>, ConfigError> {
        let Some(w) = &self.sweep else {
            return Ok(vec![(String::new(), self.clone())]);
        };
        let mut points: Vec<(Vec<String>, ConfigFile)> = vec![(Vec::new(), self.to_file())];
        fn axis<T: Copy + std::fmt::Display>(
            points: Vec<(Vec<String>, ConfigFile)>,
            name: &str,
            values: &[T],
            set: fn(&mut ConfigFile, T),
        ) -> Vec<(Vec<String>, ConfigFile)> {
            if values.is_empty() {
                return points;
            }
            points
                .into_iter()
                .flat_map(|(label, f)| {
                    values.iter().map(move |&v| {
                        let mut g = f.clone();
                        set(&mut g, v);
                        let mut l = label.clone();
                        l.push(format!("{name}={v}"));
                        (l, g)
                    })
                })
                .collect()
        }
        points = axis(points, "gamma", &w.gamma, |f, v| f.model.gamma = v);
        points = axis(points, "delta", &w.delta, |f, v| f.model.delta = v);
        points = axis(points, "alpha", &w.alpha, |f, v| f.model.alpha = v);
        points = axis(points, "sigma", &w.sigma, |f, v| f.initial.sigma = v);
        points = axis(points, "n", &w.n, |f, v| f.grid.n = v);
        points
            .into_iter()
            .map(|(label, mut f)| {
                f.sweep = None;
                Ok((label.join(","), from_file(f)?))
            })
            .collect()
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn empty_config_is_the_reference_run() {
        let c = parse_config("").unwrap();
        assert_eq!(c.params, ModelParams::new(1.0, 2.0, 1.0, 1.0).unwrap());
        assert_eq!(c.grid, Grid::new(50.0, 4001).unwrap());
        assert_eq!(c.initial.sigma, 1.0);
        assert_eq!(c.solver.cfl, 0.5);
        assert_eq!(c.solver.vacuum_floor, 1e-8);
        let echoed = c.to_toml();
        for key in [
            "A = 1.0",
            "gamma = 2.0",
            "velocity = \"lorentzian\"",
            "n = 4001",
            "cfl = 0.5",
            "vacuum_floor = ",
            "snapshot_every = 1",
        ] {
            assert!(echoed.contains(key), "{key} missing from\n{echoed}");
        }
    }

    #[test]
    fn minimal_reference_config() {
        let text = "[model]\nA = 1\ngamma = 2\ndelta = 1\nalpha = 1\n\n[grid]\nn = 4001\n";
        assert_eq!(parse_config(text).unwrap(), RunConfig::default());
        let text = "[model]\nA = 1.0\ngamma = 2.0\ndelta = 1.0\nalpha = 1.0\n\n[grid]\nn = 4001\n";
        assert_eq!(parse_config(text).unwrap(), RunConfig::default());
    }

    #[test]
    fn rejects_small_gamma() {
        let e = parse_config("[model]\ngamma = 0.9\n").unwrap_err();
        assert!(e.to_string().contains("gamma must exceed 1"), "{e}");
    }

    #[test]
    fn rejects_misspelled_key_with_position() {
        let e = parse_config("[initial]\nsgima = 1.0\n")
            .unwrap_err()
            .to_string();
        assert!(e.contains("sgima"), "{e}");
        assert!(e.contains("line 2"), "{e}");
        let e = parse_config("[model]\ngamma = \n").unwrap_err().to_string();
        assert!(e.contains("line 2"), "{e}");
    }

    #[test]
    fn validation_names_field() {
        let e = parse_config("[solver]\ncfl = 2.0\n")
            .unwrap_err()
            .to_string();
        assert!(e.contains("solver") && e.contains("cfl"), "{e}");
        let e = parse_config("[grid]\nn = 8\n").unwrap_err().to_string();
        assert!(e.contains("16"), "{e}");
        let e = parse_config("[initial]\nvacuum_floor = 0.0\n")
            .unwrap_err()
            .to_string();
        assert!(e.contains("initial.vacuum_floor"), "{e}");
    }

    #[test]
    fn round_trip_is_lossless() {
        let text = "[model]\ngamma = 1.7\ndelta = 0.75\n[initial]\nsigma = 0.9\nvelocity = \"compact_bump\"\namplitude = -0.3\nwidth = 2.5\nregularization = \"shift\"\n[solver]\nformulation = \"reformulated\"\nflux = \"central\"\ndt = 0.01\nt_end = 0.5\n[output]\ndirectory = \"runs/a\"\n[sweep]\nn = [101, 201]\n";
        let c = parse_config(text).unwrap();
        let again = parse_config(&c.to_toml()).unwrap();
        assert_eq!(c, again);
        assert_eq!(c.hash(), again.hash());
        assert_eq!(c.hash().len(), 16);
        assert_ne!(c.hash(), RunConfig::default().hash());
    }

    #[test]
    fn sweep_expansion() {
        let c = parse_config("[sweep]\ngamma = [1.8, 2.0]\nn = [101, 201, 401]\n").unwrap();
        let runs = c.expand_sweep().unwrap();
        assert_eq!(runs.len(), 6);
        assert_eq!(runs[0].0, "gamma=1.8,n=101");
        assert_eq!(runs[5].1.grid.len(), 401);
        assert!(runs.iter().all(|(_, r)| r.sweep.is_none()));
        let bad = parse_config("[sweep]\ngamma = [0.5]\n").unwrap();
        assert!(bad.expand_sweep().is_err());
    }
}
