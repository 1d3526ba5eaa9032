use super::{check_finite, BoundaryFlux, SolverConfig, SourceTerms, StepOutcome, SDIRK_GAMMA};
use crate::error::SolverError;
use crate::grid::{Field, Grid};
use crate::params::ModelParams;
use crate::state::FluidState;
use crate::tridiag::solve_in_place;

/// Explicit tendencies of `(rho, m)` at interior nodes plus the two
/// boundary-face fluxes.
struct Transport {
    drho: Vec<f64>,
    dmom: Vec<f64>,
    mass_faces: [f64; 2],
    mom_faces: [f64; 2],
}

fn transport(
    rho: &[f64],
    u: &[f64],
    p: &ModelParams,
    grid: &Grid,
    lf_weight: f64,
    sources: Option<(&dyn SourceTerms, f64)>,
) -> Transport {
    let n = rho.len();
    let dx = grid.dx();
    let m: Vec<f64> = rho.iter().zip(u).map(|(r, v)| r * v).collect();
    let fm = &m;
    let fp: Vec<f64> = (0..n)
        .map(|i| m[i] * u[i] + p.pressure_unchecked(rho[i]))
        .collect();
    let speed: Vec<f64> = (0..n).map(|i| u[i].abs() + p.sound_speed(rho[i])).collect();

    let mut face_m = vec![0.0; n - 1];
    let mut face_p = vec![0.0; n - 1];
    for k in 0..n - 1 {
        let d = 0.5 * lf_weight * speed[k].max(speed[k + 1]);
        face_m[k] = 0.5 * (fm[k] + fm[k + 1]) - d * (rho[k + 1] - rho[k]);
        face_p[k] = 0.5 * (fp[k] + fp[k + 1]) - d * (m[k + 1] - m[k]);
    }

    let mut drho = vec![0.0; n];
    let mut dmom = vec![0.0; n];
    for i in 1..n - 1 {
        drho[i] = -(face_m[i] - face_m[i - 1]) / dx;
        dmom[i] = -(face_p[i] - face_p[i - 1]) / dx;
    }
    if let Some((s, t)) = sources {
        for i in 1..n - 1 {
            let x = grid.x(i);
            drho[i] += s.mass(t, x);
            dmom[i] += s.momentum(t, x);
        }
    }
    Transport {
        drho,
        dmom,
        mass_faces: [face_m[0], face_m[n - 2]],
        mom_faces: [face_p[0], face_p[n - 2]],
    }
}

fn face_viscosity(rho: &[f64], p: &ModelParams) -> Vec<f64> {
    let mu: Vec<f64> = rho.iter().map(|&r| p.viscosity_unchecked(r)).collect();
    mu.windows(2).map(|w| 0.5 * (w[0] + w[1])).collect()
}

/// Viscous face fluxes `mu (u_{k+1} - u_k)/dx` and their interior divergence.
fn viscous(u: &[f64], mu_face: &[f64], dx: f64) -> (Vec<f64>, Vec<f64>) {
    let n = u.len();
    let g: Vec<f64> = (0..n - 1)
        .map(|k| mu_face[k] * (u[k + 1] - u[k]) / dx)
        .collect();
    let mut div = vec![0.0; n];
    for i in 1..n - 1 {
        div[i] = (g[i] - g[i - 1]) / dx;
    }
    (g, div)
}

/// Solves `rho u - theta (mu u_x)_x = rhs` at interior nodes, with the
/// boundary values of `u` taken from `u_bc`.
fn implicit_velocity(
    rho: &[f64],
    rhs: &[f64],
    mu_face: &[f64],
    u_bc: [f64; 2],
    theta: f64,
    dx: f64,
    scratch: &mut Vec<f64>,
) -> Vec<f64> {
    let n = rho.len();
    let k = theta / (dx * dx);
    let m = n - 2;
    let mut lower = vec![0.0; m];
    let mut diag = vec![0.0; m];
    let mut upper = vec![0.0; m];
    let mut b = vec![0.0; m];
    for j in 0..m {
        let i = j + 1;
        let (wl, wr) = (k * mu_face[i - 1], k * mu_face[i]);
        lower[j] = -wl;
        upper[j] = -wr;
        diag[j] = rho[i] + wl + wr;
        b[j] = rhs[i];
    }
    b[0] += k * mu_face[0] * u_bc[0];
    b[m - 1] += k * mu_face[n - 2] * u_bc[1];
    solve_in_place(&lower, &diag, &upper, &mut b, scratch);
    let mut u = Vec::with_capacity(n);
    u.push(u_bc[0]);
    u.extend_from_slice(&b);
    u.push(u_bc[1]);
    u
}

fn clamp(rho: &mut [f64], floor: f64) -> usize {
    let mut count = 0;
    for r in rho.iter_mut() {
        if *r < floor {
            *r = floor;
            count += 1;
        }
    }
    count
}

/// One step of the primitive system. Boundary nodes keep their values.
///
/// `inflow` is exactly the change of the trapezoid mass and momentum that is
/// due to the discrete fluxes through the two boundary faces, so that
/// `m(t+dt) - m(t) = inflow.mass` up to rounding when no node is clamped and
/// no source is present.
pub fn step_primitive(
    s: &FluidState,
    p: &ModelParams,
    c: &SolverConfig,
    dt: f64,
    sources: Option<&dyn SourceTerms>,
    step: usize,
) -> Result<StepOutcome<FluidState>, SolverError> {
    let grid = *s.grid();
    let n = grid.len();
    let dx = grid.dx();
    let w = c.flux.lf_weight();
    let theta = SDIRK_GAMMA * dt;
    let rho0 = s.rho.values();
    let u0 = s.u.values();
    let m0: Vec<f64> = rho0.iter().zip(u0).map(|(r, v)| r * v).collect();
    let bc = [u0[0], u0[n - 1]];
    let mut scratch = Vec::with_capacity(n);
    let mut clamped = 0;

    // stage 1
    let mu1 = face_viscosity(rho0, p);
    let u1 = implicit_velocity(rho0, &m0, &mu1, bc, theta, dx, &mut scratch);
    check_finite(&u1, "u", step)?;
    let (g1, v1) = viscous(&u1, &mu1, dx);
    let t1 = transport(rho0, &u1, p, &grid, w, sources.map(|f| (f, s.t)));

    // stage 2
    let mut rho2: Vec<f64> = (0..n).map(|i| rho0[i] + dt * t1.drho[i]).collect();
    check_finite(&rho2, "rho", step)?;
    clamped += clamp(&mut rho2, c.vacuum_floor);
    let rhs2: Vec<f64> = (0..n)
        .map(|i| m0[i] + dt * t1.dmom[i] + dt * (1.0 - 2.0 * SDIRK_GAMMA) * v1[i])
        .collect();
    let mu2 = face_viscosity(&rho2, p);
    let u2 = implicit_velocity(&rho2, &rhs2, &mu2, bc, theta, dx, &mut scratch);
    check_finite(&u2, "u", step)?;
    let (g2, v2) = viscous(&u2, &mu2, dx);
    let t2 = transport(&rho2, &u2, p, &grid, w, sources.map(|f| (f, s.t + dt)));

    let h = 0.5 * dt;
    let mut rho = rho0.to_vec();
    let mut u = u0.to_vec();
    for i in 1..n - 1 {
        rho[i] = rho0[i] + h * (t1.drho[i] + t2.drho[i]);
    }
    check_finite(&rho, "rho", step)?;
    clamped += clamp(&mut rho, c.vacuum_floor);
    for i in 1..n - 1 {
        let m = m0[i] + h * (t1.dmom[i] + t2.dmom[i] + v1[i] + v2[i]);
        u[i] = m / rho[i];
    }
    check_finite(&u, "u", step)?;

    let inflow = BoundaryFlux {
        mass: h * (t1.mass_faces[0] - t1.mass_faces[1] + t2.mass_faces[0] - t2.mass_faces[1]),
        momentum: h
            * (t1.mom_faces[0] - t1.mom_faces[1] + t2.mom_faces[0] - t2.mom_faces[1]
                + (g1[n - 2] - g1[0])
                + (g2[n - 2] - g2[0])),
    };
    Ok(StepOutcome {
        state: FluidState {
            rho: Field::from_vec(grid, rho),
            u: Field::from_vec(grid, u),
            t: s.t + dt,
        },
        inflow,
        clamped,
    })
}
