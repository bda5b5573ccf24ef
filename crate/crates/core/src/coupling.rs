//! Diagonalizing combinations of the vorticity and density unknowns, plus
//! discrete residual checks for the two operator identities that justify
//! them. Away from unit thermal diffusivity the working variable is
//! Gamma = (1 - kappa) zeta - L rho; near kappa = 1 it degenerates and the
//! substitute Gamma_1 = zeta - rho / 2 takes over.

use crate::diffops::{d_rr, d_z, laplacian_axisym, modified_laplacian, quotient_by_r};
use crate::error::{Error, Result};
use crate::grid::{Parity, ScalarFieldRZ};
use crate::singell::{op_l, solve_modified};
use crate::solver::DirectSolver;

/// Width of the kappa window around 1 handled by the Gamma_1 branch.
pub const KAPPA_SWITCH: f64 = 0.5;

pub fn near_one(kappa: f64) -> bool {
    (kappa - 1.0).abs() < KAPPA_SWITCH
}

/// Gamma = (1 - kappa) zeta - L rho. Rejects kappa in the near-one window.
pub fn gamma_general(
    solver: &DirectSolver,
    zeta: &ScalarFieldRZ,
    rho: &ScalarFieldRZ,
    kappa: f64,
) -> Result<ScalarFieldRZ> {
    if near_one(kappa) {
        return Err(Error::WrongBranch { kappa });
    }
    let lrho = op_l(solver, rho)?.f;
    zeta.axpy(1.0 - kappa, -1.0, &lrho)
}

/// Gamma_1 = zeta - rho / 2, the working variable when kappa is near 1.
pub fn gamma_near_one(zeta: &ScalarFieldRZ, rho: &ScalarFieldRZ) -> Result<ScalarFieldRZ> {
    zeta.axpy(1.0, -0.5, rho)
}

/// Invert the general-branch combination: zeta = (Gamma + L rho) / (1 - kappa).
pub fn recover_zeta(
    solver: &DirectSolver,
    gamma: &ScalarFieldRZ,
    rho: &ScalarFieldRZ,
    kappa: f64,
) -> Result<ScalarFieldRZ> {
    if near_one(kappa) {
        return Err(Error::NearOneBranch { kappa });
    }
    let lrho = op_l(solver, rho)?.f;
    gamma.axpy(1.0 / (1.0 - kappa), 1.0 / (1.0 - kappa), &lrho)
}

#[derive(Debug, Clone, Copy)]
pub struct IdentityResidual {
    pub residual_l2: f64,
    /// residual relative to the L^2 size of the left-hand side.
    pub relative: f64,
}

/// L^2 norm over the interior window, excluding a 20% margin next to the
/// outer and axial edges. The identities are interior statements: at the
/// artificial Dirichlet boundary the one-sided stencils and the domain
/// truncation dominate and would mask the stencil convergence order.
fn interior_l2(f: &ScalarFieldRZ) -> f64 {
    let g = f.grid;
    let zc = 0.5 * (g.zmin + g.zmax);
    let zh = 0.5 * (g.zmax - g.zmin);
    let mut windowed = f.clone();
    for i in 0..g.nr {
        for j in 0..g.nz {
            if g.r(i) > 0.8 * g.rmax || (g.z(j) - zc).abs() > 0.8 * zh {
                *windowed.at_mut(i, j) = 0.0;
            }
        }
    }
    windowed.lp_norm(2.0)
}

fn interior_residual(lhs: &ScalarFieldRZ, rhs: &ScalarFieldRZ) -> Result<IdentityResidual> {
    let diff = lhs.axpy(1.0, -1.0, rhs)?;
    let scale = interior_l2(lhs).max(interior_l2(rhs)).max(1e-300);
    let residual_l2 = interior_l2(&diff);
    Ok(IdentityResidual {
        residual_l2,
        relative: residual_l2 / scale,
    })
}

/// Discrete residual of L(Delta rho) = (Delta + (2/r) d_r)(L rho).
pub fn lemma_ld_residual(solver: &DirectSolver, rho: &ScalarFieldRZ) -> Result<IdentityResidual> {
    let lap = laplacian_axisym(rho)?;
    let lhs = solve_modified(solver, &quotient_by_r(&crate::diffops::d_r(&lap)))?.f;
    let rhs = modified_laplacian(&op_l(solver, rho)?.f)?;
    interior_residual(&lhs, &rhs)
}

/// Discrete residual of
/// L(d_r f) = f/r - L(f/r) - d_z (Delta + (2/r) d_r)^{-1} (d_z f / r),
/// for odd-parity f so that every quotient by r is regular.
pub fn lemma_e1_residual(solver: &DirectSolver, f: &ScalarFieldRZ) -> Result<IdentityResidual> {
    if f.parity != Parity::Odd {
        return Err(Error::ParityMismatch {
            op: "lemma_e1_residual",
            expected: Parity::Odd,
        });
    }
    let lhs = solve_modified(solver, &quotient_by_r(&d_rr(f)))?.f;
    let f_over_r = quotient_by_r(f);
    let term2 = solve_modified(solver, &quotient_by_r(&crate::diffops::d_r(&f_over_r)))?.f;
    let term3 = d_z(&solve_modified(solver, &quotient_by_r(&d_z(f)))?.f);
    let rhs = f_over_r.axpy(1.0, -1.0, &term2)?.axpy(1.0, -1.0, &term3)?;
    interior_residual(&lhs, &rhs)
}

/// Mesh-dependent acceptance threshold for the identity residuals.
pub fn lemma_tol(h: f64, rho_h2: f64) -> f64 {
    50.0 * h * h * rho_h2
}
