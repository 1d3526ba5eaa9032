use super::{check_finite, BoundaryFlux, SolverConfig, StepOutcome, SDIRK_GAMMA};
use crate::error::SolverError;
use crate::grid::{ddx_slice, Field, Grid};
use crate::params::{powr, ModelParams, Regime};
use crate::reformulate::ReformulatedState;
use crate::tridiag::solve_in_place;

pub(crate) fn cfl_dt_reformulated(r: &ReformulatedState, p: &ModelParams, c: &SolverConfig) -> f64 {
    let g1 = p.gamma() - 1.0;
    let speed = r
        .phi
        .values()
        .iter()
        .zip(r.u.values())
        .map(|(&f, &u)| u.abs() + (g1 * f.max(0.0)).sqrt())
        .fold(0.0, f64::max);
    let dx = r.phi.grid().dx();
    if speed > 0.0 {
        c.cfl * dx / speed
    } else {
        c.cfl * dx
    }
}

/// `rho^(delta-1) alpha`, written through phi: `a alpha phi^(2e)`.
fn viscous_coefficient(phi: &[f64], p: &ModelParams) -> Vec<f64> {
    match p.regime() {
        Regime::Linear => vec![p.alpha(); phi.len()],
        Regime::SubLinear => {
            let d = p.derived();
            phi.iter()
                .map(|&f| d.a * p.alpha() * powr(f, 2.0 * d.e))
                .collect()
        }
    }
}

struct Tendencies {
    phi: Vec<f64>,
    u: Vec<f64>,
    psi: Vec<f64>,
}

/// Non-stiff right-hand sides at interior nodes, with optional Rusanov-type
/// dissipation `lf_weight/2 * (lambda q_x)_x dx` applied to every field.
fn transport(
    phi: &[f64],
    u: &[f64],
    psi: &[f64],
    p: &ModelParams,
    dx: f64,
    lf_weight: f64,
) -> Tendencies {
    let n = phi.len();
    let g1 = p.gamma() - 1.0;
    let d1 = p.delta() - 1.0;
    let alpha = p.alpha();
    let upsi: Vec<f64> = u.iter().zip(psi).map(|(a, b)| a * b).collect();
    let mut out = Tendencies {
        phi: vec![0.0; n],
        u: vec![0.0; n],
        psi: vec![0.0; n],
    };
    let h = 0.5 / dx;
    for i in 1..n - 1 {
        let phi_x = h * (phi[i + 1] - phi[i - 1]);
        let u_x = h * (u[i + 1] - u[i - 1]);
        let upsi_x = h * (upsi[i + 1] - upsi[i - 1]);
        out.phi[i] = -u[i] * phi_x - g1 * phi[i] * u_x;
        out.u[i] = -u[i] * u_x - phi_x + alpha * psi[i] * u_x;
        out.psi[i] = -upsi_x - d1 * psi[i] * u_x;
    }
    if lf_weight > 0.0 {
        let speed: Vec<f64> = (0..n)
            .map(|i| u[i].abs() + (g1 * phi[i].max(0.0)).sqrt())
            .collect();
        let lam: Vec<f64> = speed.windows(2).map(|w| w[0].max(w[1])).collect();
        let k = 0.5 * lf_weight / dx;
        for (q, dq) in [(phi, &mut out.phi), (u, &mut out.u), (psi, &mut out.psi)] {
            for i in 1..n - 1 {
                dq[i] += k * (lam[i] * (q[i + 1] - q[i]) - lam[i - 1] * (q[i] - q[i - 1]));
            }
        }
    }
    out
}

fn second_difference(u: &[f64], dx: f64) -> Vec<f64> {
    let n = u.len();
    let mut d = vec![0.0; n];
    let k = 1.0 / (dx * dx);
    for i in 1..n - 1 {
        d[i] = k * (u[i + 1] - 2.0 * u[i] + u[i - 1]);
    }
    d
}

/// Solves `u - theta coef u_xx = rhs` at interior nodes.
fn implicit_velocity(
    rhs: &[f64],
    coef: &[f64],
    u_bc: [f64; 2],
    theta: f64,
    dx: f64,
    scratch: &mut Vec<f64>,
) -> Vec<f64> {
    let n = rhs.len();
    let m = n - 2;
    let k = theta / (dx * dx);
    let mut lower = vec![0.0; m];
    let mut diag = vec![0.0; m];
    let mut upper = vec![0.0; m];
    let mut b = vec![0.0; m];
    for j in 0..m {
        let w = k * coef[j + 1];
        lower[j] = -w;
        upper[j] = -w;
        diag[j] = 1.0 + 2.0 * w;
        b[j] = rhs[j + 1];
    }
    b[0] += k * coef[1] * u_bc[0];
    b[m - 1] += k * coef[n - 2] * u_bc[1];
    solve_in_place(&lower, &diag, &upper, &mut b, scratch);
    let mut u = Vec::with_capacity(n);
    u.push(u_bc[0]);
    u.extend_from_slice(&b);
    u.push(u_bc[1]);
    u
}

/// Mass and momentum fluxes through the end nodes, from nodal values.
fn boundary_fluxes(phi: &[f64], u: &[f64], p: &ModelParams, dx: f64) -> [f64; 4] {
    let n = phi.len();
    let u_x = ddx_slice(u, dx);
    let f = |i: usize| {
        let rho = p.rho_of_phi(phi[i]);
        let m = rho * u[i];
        (
            m,
            m * u[i] + p.pressure_unchecked(rho) - p.viscosity_unchecked(rho) * u_x[i],
        )
    };
    let (ml, pl) = f(0);
    let (mr, pr) = f(n - 1);
    [ml, mr, pl, pr]
}

/// One step of the reformulated system.
///
/// Boundary inflow is estimated from nodal fluxes at the end nodes; unlike
/// the primitive stepper it is not an exact discrete balance.
pub fn step_reformulated(
    s: &ReformulatedState,
    p: &ModelParams,
    c: &SolverConfig,
    dt: f64,
    step: usize,
) -> Result<StepOutcome<ReformulatedState>, SolverError> {
    let grid: Grid = *s.phi.grid();
    let n = grid.len();
    let dx = grid.dx();
    let w = c.flux.lf_weight();
    let theta = SDIRK_GAMMA * dt;
    let (phi0, u0, psi0) = (s.phi.values(), s.u.values(), s.psi.values());
    let bc = [u0[0], u0[n - 1]];
    // psi receives -(delta/alpha) coef u_xx from the stiff part
    let psi_k = -p.delta() / p.alpha();
    let phi_floor = p.phi_of_rho(c.vacuum_floor);
    let mut scratch = Vec::with_capacity(n);
    let mut clamped = 0;

    let check_phi = |phi: &[f64]| -> Result<(), SolverError> {
        check_finite(phi, "phi", step)?;
        match phi.iter().position(|&f| !(f > 0.0)) {
            Some(node) => Err(SolverError::NonPositivePhi {
                step,
                node,
                value: phi[node],
            }),
            None => Ok(()),
        }
    };

    // stage 1
    let coef1 = viscous_coefficient(phi0, p);
    let u1 = implicit_velocity(u0, &coef1, bc, theta, dx, &mut scratch);
    check_finite(&u1, "u", step)?;
    let uxx1 = second_difference(&u1, dx);
    let vu1: Vec<f64> = (0..n).map(|i| coef1[i] * uxx1[i]).collect();
    let vpsi1: Vec<f64> = (0..n).map(|i| psi_k * vu1[i]).collect();
    let psi1: Vec<f64> = (0..n).map(|i| psi0[i] + theta * vpsi1[i]).collect();
    let t1 = transport(phi0, &u1, &psi1, p, dx, w);
    let b1 = boundary_fluxes(phi0, &u1, p, dx);

    // stage 2
    let fe = dt * (1.0 - 2.0 * SDIRK_GAMMA);
    let mut phi2: Vec<f64> = (0..n).map(|i| phi0[i] + dt * t1.phi[i]).collect();
    check_phi(&phi2)?;
    for f in phi2.iter_mut() {
        if *f < phi_floor {
            *f = phi_floor;
            clamped += 1;
        }
    }
    let coef2 = viscous_coefficient(&phi2, p);
    let ru: Vec<f64> = (0..n).map(|i| u0[i] + dt * t1.u[i] + fe * vu1[i]).collect();
    let u2 = implicit_velocity(&ru, &coef2, bc, theta, dx, &mut scratch);
    check_finite(&u2, "u", step)?;
    let uxx2 = second_difference(&u2, dx);
    let vu2: Vec<f64> = (0..n).map(|i| coef2[i] * uxx2[i]).collect();
    let vpsi2: Vec<f64> = (0..n).map(|i| psi_k * vu2[i]).collect();
    let psi2: Vec<f64> = (0..n)
        .map(|i| psi0[i] + dt * t1.psi[i] + fe * vpsi1[i] + theta * vpsi2[i])
        .collect();
    let t2 = transport(&phi2, &u2, &psi2, p, dx, w);
    let b2 = boundary_fluxes(&phi2, &u2, p, dx);

    let h = 0.5 * dt;
    let mut phi = phi0.to_vec();
    let mut u = u0.to_vec();
    let mut psi = psi0.to_vec();
    for i in 1..n - 1 {
        phi[i] = phi0[i] + h * (t1.phi[i] + t2.phi[i]);
        u[i] = u0[i] + h * (t1.u[i] + t2.u[i] + vu1[i] + vu2[i]);
        psi[i] = psi0[i] + h * (t1.psi[i] + t2.psi[i] + vpsi1[i] + vpsi2[i]);
    }
    check_phi(&phi)?;
    check_finite(&u, "u", step)?;
    check_finite(&psi, "psi", step)?;
    for f in phi.iter_mut() {
        if *f < phi_floor {
            *f = phi_floor;
            clamped += 1;
        }
    }

    let inflow = BoundaryFlux {
        mass: h * (b1[0] - b1[1] + b2[0] - b2[1]),
        momentum: h * (b1[2] - b1[3] + b2[2] - b2[3]),
    };
    Ok(StepOutcome {
        state: ReformulatedState {
            phi: Field::from_vec(grid, phi),
            u: Field::from_vec(grid, u),
            psi: Field::from_vec(grid, psi),
            regime: s.regime,
            t: s.t + dt,
        },
        inflow,
        clamped,
    })
}
