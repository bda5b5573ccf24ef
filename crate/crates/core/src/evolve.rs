//! Time integration of the coupled system in the variables (rho, zeta):
//!
//!   d_t rho + v . grad rho = kappa Delta rho
//!   d_t zeta + v . grad zeta = (Delta + (2/r) d_r) zeta - d_r rho / r
//!
//! with v recovered from zeta through the stream-function solve each step.
//! Advection is explicit (limited upwind or centered Heun), diffusion is
//! implicit through the direct elliptic solver, so the time-step restriction
//! comes from the CFL condition alone.

use crate::diffops::{biot_savart, d_r, d_z, dr_over_r};
use crate::error::{Error, Result};
use crate::grid::{check_same_grid, GridSpec, Parity, ScalarFieldRZ, VelocityRZ};
use crate::solver::{coef_laplacian, coef_modified, DirectSolver};

#[derive(Debug, Clone, Copy, PartialEq, Eq, serde::Serialize, serde::Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum AdvectionScheme {
    /// Heun in time with centered gradients; second order, not monotone.
    CenteredRk2,
    /// Minmod-limited second-order upwind; respects the maximum principle.
    Upwind2,
}

#[derive(Debug, Clone, Copy)]
pub struct StepConfig {
    pub dt: f64,
    pub cfl_max: f64,
    pub kappa: f64,
    pub scheme: AdvectionScheme,
    /// Abort threshold on any sup norm.
    pub guard: f64,
}

impl StepConfig {
    pub fn new(dt: f64, kappa: f64, scheme: AdvectionScheme) -> Self {
        Self {
            dt,
            cfl_max: 0.45,
            kappa,
            scheme,
            guard: 1e8,
        }
    }
}

#[derive(Debug, Clone)]
pub struct SimState {
    pub t: f64,
    pub rho: ScalarFieldRZ,
    pub zeta: ScalarFieldRZ,
}

impl SimState {
    pub fn new(rho: ScalarFieldRZ, zeta: ScalarFieldRZ) -> Result<Self> {
        check_same_grid(&rho, &zeta)?;
        if rho.parity != Parity::Even || zeta.parity != Parity::Even {
            return Err(Error::ParityMismatch {
                op: "sim state",
                expected: Parity::Even,
            });
        }
        Ok(Self { t: 0.0, rho, zeta })
    }

    pub fn grid(&self) -> GridSpec {
        self.rho.grid
    }
}

#[derive(Debug, Clone, Copy)]
pub struct StepInfo {
    pub dt_taken: f64,
    pub max_speed: f64,
}

pub struct Simulation {
    solver: DirectSolver,
    pub cfg: StepConfig,
}

fn minmod(a: f64, b: f64) -> f64 {
    if a * b <= 0.0 {
        0.0
    } else if a.abs() < b.abs() {
        a
    } else {
        b
    }
}

/// Sample with reflection (parity) across the axis and clamping at the
/// outer and axial ends, where the fields are assumed to have decayed.
fn sample_r(f: &ScalarFieldRZ, i: isize, j: usize) -> f64 {
    let nr = f.grid.nr as isize;
    if i < 0 {
        let sign = match f.parity {
            Parity::Even => 1.0,
            Parity::Odd => -1.0,
        };
        sign * f.at((-1 - i) as usize, j)
    } else if i >= nr {
        f.at(f.grid.nr - 1, j)
    } else {
        f.at(i as usize, j)
    }
}

fn sample_z(f: &ScalarFieldRZ, i: usize, j: isize) -> f64 {
    let nz = f.grid.nz as isize;
    let jc = j.clamp(0, nz - 1) as usize;
    f.at(i, jc)
}

/// v . grad f with minmod-limited second-order upwind gradients.
fn advect_upwind(f: &ScalarFieldRZ, vel: &VelocityRZ) -> ScalarFieldRZ {
    let g = f.grid;
    let (dr, dz) = (g.dr(), g.dz());
    let mut out = ScalarFieldRZ::zeros(g, f.parity);
    for i in 0..g.nr {
        let ii = i as isize;
        for j in 0..g.nz {
            let jj = j as isize;
            let vr = vel.vr.at(i, j);
            let vz = vel.vz.at(i, j);

            let gr = if vr >= 0.0 {
                let d0 = f.at(i, j) - sample_r(f, ii - 1, j);
                let dm = sample_r(f, ii - 1, j) - sample_r(f, ii - 2, j);
                let dp = sample_r(f, ii + 1, j) - f.at(i, j);
                (d0 + 0.5 * (minmod(dp, d0) - minmod(d0, dm))) / dr
            } else {
                let d0 = sample_r(f, ii + 1, j) - f.at(i, j);
                let dp = sample_r(f, ii + 2, j) - sample_r(f, ii + 1, j);
                let dm = f.at(i, j) - sample_r(f, ii - 1, j);
                (d0 - 0.5 * (minmod(dp, d0) - minmod(d0, dm))) / dr
            };
            let gz = if vz >= 0.0 {
                let d0 = f.at(i, j) - sample_z(f, i, jj - 1);
                let dm = sample_z(f, i, jj - 1) - sample_z(f, i, jj - 2);
                let dp = sample_z(f, i, jj + 1) - f.at(i, j);
                (d0 + 0.5 * (minmod(dp, d0) - minmod(d0, dm))) / dz
            } else {
                let d0 = sample_z(f, i, jj + 1) - f.at(i, j);
                let dp = sample_z(f, i, jj + 2) - sample_z(f, i, jj + 1);
                let dm = f.at(i, j) - sample_z(f, i, jj - 1);
                (d0 - 0.5 * (minmod(dp, d0) - minmod(d0, dm))) / dz
            };
            *out.at_mut(i, j) = vr * gr + vz * gz;
        }
    }
    out
}

fn advect_centered(f: &ScalarFieldRZ, vel: &VelocityRZ) -> ScalarFieldRZ {
    let fr = d_r(f);
    let fz = d_z(f);
    let mut out = ScalarFieldRZ::zeros(f.grid, f.parity);
    for idx in 0..f.values.len() {
        out.values[idx] = vel.vr.values[idx] * fr.values[idx] + vel.vz.values[idx] * fz.values[idx];
    }
    out
}

impl Simulation {
    pub fn new(grid: GridSpec, cfg: StepConfig) -> Result<Self> {
        if !(cfg.dt > 0.0) || !(cfg.cfl_max > 0.0) || !(cfg.kappa >= 0.0) {
            return Err(Error::Config(format!(
                "step config needs dt > 0, cfl_max > 0, kappa >= 0; got dt = {}, cfl_max = {}, kappa = {}",
                cfg.dt, cfg.cfl_max, cfg.kappa
            )));
        }
        Ok(Self {
            solver: DirectSolver::new(grid),
            cfg,
        })
    }

    pub fn solver(&self) -> &DirectSolver {
        &self.solver
    }

    /// Velocity induced by the current vorticity, omega_theta = r zeta.
    pub fn velocity(&self, state: &SimState) -> Result<VelocityRZ> {
        let g = state.grid();
        let mut omega = ScalarFieldRZ::zeros(g, Parity::Odd);
        for i in 0..g.nr {
            let r = g.r(i);
            for j in 0..g.nz {
                *omega.at_mut(i, j) = r * state.zeta.at(i, j);
            }
        }
        biot_savart(&self.solver, &omega)
    }

    fn implicit_diffusion(
        &self,
        f: &ScalarFieldRZ,
        coef: &[f64],
        nu_dt: f64,
    ) -> Result<ScalarFieldRZ> {
        // (I - nu dt Op) f_new = f  <=>  (Op - 1/(nu dt)) f_new = -f/(nu dt)
        let a = 1.0 / nu_dt;
        let rhs = f.scaled(-a);
        let (out, _) = self.solver.solve_checked(-a, coef, &rhs)?;
        Ok(out)
    }

    /// Advance by at most cfg.dt (CFL may shorten it); returns what was taken.
    pub fn step(&self, state: &mut SimState, dt_cap: f64) -> Result<StepInfo> {
        let g = state.grid();
        let vel = self.velocity(state)?;
        let max_speed = vel.max_speed();
        let h = g.dr().min(g.dz());
        let mut dt = self.cfg.dt.min(dt_cap);
        if max_speed > 0.0 {
            dt = dt.min(self.cfg.cfl_max * h / max_speed);
        }

        let (rho_star, zeta_star) = match self.cfg.scheme {
            AdvectionScheme::Upwind2 => {
                let ar = advect_upwind(&state.rho, &vel);
                let az = advect_upwind(&state.zeta, &vel);
                (
                    state.rho.axpy(1.0, -dt, &ar)?,
                    state.zeta.axpy(1.0, -dt, &az)?,
                )
            }
            AdvectionScheme::CenteredRk2 => {
                let ar1 = advect_centered(&state.rho, &vel);
                let az1 = advect_centered(&state.zeta, &vel);
                let rho_p = state.rho.axpy(1.0, -dt, &ar1)?;
                let zeta_p = state.zeta.axpy(1.0, -dt, &az1)?;
                let ar2 = advect_centered(&rho_p, &vel);
                let az2 = advect_centered(&zeta_p, &vel);
                (
                    state
                        .rho
                        .axpy(1.0, -0.5 * dt, &ar1)?
                        .axpy(1.0, -0.5 * dt, &ar2)?,
                    state
                        .zeta
                        .axpy(1.0, -0.5 * dt, &az1)?
                        .axpy(1.0, -0.5 * dt, &az2)?,
                )
            }
        };

        let rho_new = if self.cfg.kappa > 0.0 {
            self.implicit_diffusion(&rho_star, &coef_laplacian(&g), self.cfg.kappa * dt)?
        } else {
            rho_star
        };

        let buoy = dr_over_r(&rho_new)?;
        let zeta_rhs = zeta_star.axpy(1.0, -dt, &buoy)?;
        let zeta_new = self.implicit_diffusion(&zeta_rhs, &coef_modified(&g), dt)?;

        for (name, f) in [("rho", &rho_new), ("zeta", &zeta_new)] {
            let m = f.lp_norm(f64::INFINITY);
            if !m.is_finite() || m > self.cfg.guard {
                return Err(Error::BlowUp {
                    t: state.t,
                    name: name.to_string(),
                    value: m,
                    guard: self.cfg.guard,
                });
            }
        }

        state.rho = rho_new;
        state.zeta = zeta_new;
        state.t += dt;
        Ok(StepInfo {
            dt_taken: dt,
            max_speed,
        })
    }

    /// CFL-admissible step size from the current state.
    pub fn dt_bound(&self, state: &SimState) -> Result<f64> {
        let vel = self.velocity(state)?;
        let max_speed = vel.max_speed();
        let h = state.grid().dr().min(state.grid().dz());
        let mut dt = self.cfg.dt;
        if max_speed > 0.0 {
            dt = dt.min(self.cfg.cfl_max * h / max_speed);
        }
        Ok(dt)
    }

    /// Advance the density alone under a prescribed velocity (transport-
    /// diffusion mode; the vorticity is not evolved).
    pub fn step_transport(
        &self,
        rho: &mut ScalarFieldRZ,
        t: &mut f64,
        vel: &VelocityRZ,
        dt_cap: f64,
    ) -> Result<StepInfo> {
        let g = rho.grid;
        let max_speed = vel.max_speed();
        let h = g.dr().min(g.dz());
        let mut dt = self.cfg.dt.min(dt_cap);
        if max_speed > 0.0 {
            dt = dt.min(self.cfg.cfl_max * h / max_speed);
        }
        let rho_star = match self.cfg.scheme {
            AdvectionScheme::Upwind2 => rho.axpy(1.0, -dt, &advect_upwind(rho, vel))?,
            AdvectionScheme::CenteredRk2 => {
                let a1 = advect_centered(rho, vel);
                let pred = rho.axpy(1.0, -dt, &a1)?;
                let a2 = advect_centered(&pred, vel);
                rho.axpy(1.0, -0.5 * dt, &a1)?.axpy(1.0, -0.5 * dt, &a2)?
            }
        };
        let rho_new = if self.cfg.kappa > 0.0 {
            self.implicit_diffusion(&rho_star, &coef_laplacian(&g), self.cfg.kappa * dt)?
        } else {
            rho_star
        };
        let m = rho_new.lp_norm(f64::INFINITY);
        if !m.is_finite() || m > self.cfg.guard {
            return Err(Error::BlowUp {
                t: *t,
                name: "rho".to_string(),
                value: m,
                guard: self.cfg.guard,
            });
        }
        *rho = rho_new;
        *t += dt;
        Ok(StepInfo {
            dt_taken: dt,
            max_speed,
        })
    }

    /// Cross-check mode stepping omega_theta = r zeta directly:
    ///   d_t w + v . grad w - (Delta - 1/r^2) w = (v^r/r) w - d_r rho,
    /// with the implicit solve done on w/r so the singular zeroth-order
    /// term reduces to the modified Laplacian.
    pub fn step_omega_form(
        &self,
        rho: &mut ScalarFieldRZ,
        omega: &mut ScalarFieldRZ,
        t: &mut f64,
        dt_cap: f64,
    ) -> Result<StepInfo> {
        if omega.parity != Parity::Odd {
            return Err(Error::ParityMismatch {
                op: "step_omega_form",
                expected: Parity::Odd,
            });
        }
        let g = rho.grid;
        let vel = biot_savart(&self.solver, omega)?;
        let max_speed = vel.max_speed();
        let h = g.dr().min(g.dz());
        let mut dt = self.cfg.dt.min(dt_cap);
        if max_speed > 0.0 {
            dt = dt.min(self.cfg.cfl_max * h / max_speed);
        }
        let (rho_star, omega_star) = match self.cfg.scheme {
            AdvectionScheme::Upwind2 => (
                rho.axpy(1.0, -dt, &advect_upwind(rho, &vel))?,
                omega.axpy(1.0, -dt, &advect_upwind(omega, &vel))?,
            ),
            AdvectionScheme::CenteredRk2 => {
                let ar1 = advect_centered(rho, &vel);
                let aw1 = advect_centered(omega, &vel);
                let rp = rho.axpy(1.0, -dt, &ar1)?;
                let wp = omega.axpy(1.0, -dt, &aw1)?;
                let ar2 = advect_centered(&rp, &vel);
                let aw2 = advect_centered(&wp, &vel);
                (
                    rho.axpy(1.0, -0.5 * dt, &ar1)?.axpy(1.0, -0.5 * dt, &ar2)?,
                    omega
                        .axpy(1.0, -0.5 * dt, &aw1)?
                        .axpy(1.0, -0.5 * dt, &aw2)?,
                )
            }
        };
        let rho_new = if self.cfg.kappa > 0.0 {
            self.implicit_diffusion(&rho_star, &coef_laplacian(&g), self.cfg.kappa * dt)?
        } else {
            rho_star
        };
        // stretching + buoyancy, then the implicit solve in the zeta variable
        let vr_r = crate::diffops::vr_over_r(&vel);
        let drho = d_r(&rho_new);
        let mut rhs = ScalarFieldRZ::zeros(g, Parity::Even);
        for i in 0..g.nr {
            let r = g.r(i);
            for j in 0..g.nz {
                let w = omega_star.at(i, j) + dt * (vr_r.at(i, j) * omega_star.at(i, j)
                    - drho.at(i, j));
                *rhs.at_mut(i, j) = w / r;
            }
        }
        let phi = self.implicit_diffusion(&rhs, &coef_modified(&g), dt)?;
        let mut omega_new = ScalarFieldRZ::zeros(g, Parity::Odd);
        for i in 0..g.nr {
            let r = g.r(i);
            for j in 0..g.nz {
                *omega_new.at_mut(i, j) = r * phi.at(i, j);
            }
        }
        for (name, f) in [("rho", &rho_new), ("omega", &omega_new)] {
            let m = f.lp_norm(f64::INFINITY);
            if !m.is_finite() || m > self.cfg.guard {
                return Err(Error::BlowUp {
                    t: *t,
                    name: name.to_string(),
                    value: m,
                    guard: self.cfg.guard,
                });
            }
        }
        *rho = rho_new;
        *omega = omega_new;
        *t += dt;
        Ok(StepInfo {
            dt_taken: dt,
            max_speed,
        })
    }

    /// March to t_end, invoking the callback after every step.
    pub fn run(
        &self,
        state: &mut SimState,
        t_end: f64,
        mut on_step: impl FnMut(&Simulation, &SimState, &StepInfo) -> Result<()>,
    ) -> Result<()> {
        let eps = 1e-12 * t_end.abs().max(1.0);
        while state.t < t_end - eps {
            let info = self.step(state, t_end - state.t)?;
            if info.dt_taken <= 0.0 {
                return Err(Error::SolverNonConvergence {
                    residual: 0.0,
                    tol: 0.0,
                });
            }
            on_step(self, state, &info)?;
        }
        Ok(())
    }
}
