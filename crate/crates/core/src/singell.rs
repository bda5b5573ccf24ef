//! The singular elliptic problem: (Delta + (2/r) d_r) f = d_r(rho)/r, its
//! d_z variant, the epsilon-regularized construction, and the weighted
//! Caffarelli-Kohn-Nirenberg check that closes the L^p estimate.

use crate::diffops::{d_r, d_z, dr_over_r, quotient_by_r};
use crate::error::{Error, Result};
use crate::grid::{Parity, ScalarFieldRZ};
use crate::solver::{coef_modified, coef_regularized, DirectSolver};

/// Result of an elliptic solve together with its residual bookkeeping.
#[derive(Debug, Clone)]
pub struct EllipticSolution {
    pub f: ScalarFieldRZ,
    pub residual_l2: f64,
    /// 0 means the direct singular-form solve.
    pub epsilon: f64,
}

/// Generic solve of (Delta + (2/r) d_r) f = rhs (even parity, Dirichlet outer).
pub fn solve_modified(solver: &DirectSolver, rhs: &ScalarFieldRZ) -> Result<EllipticSolution> {
    let coef = coef_modified(&solver.grid());
    let (f, residual_l2) = solver.solve_checked(0.0, &coef, rhs)?;
    Ok(EllipticSolution {
        f,
        residual_l2,
        epsilon: 0.0,
    })
}

/// The operator L rho = (Delta + (2/r) d_r)^{-1} (d_r rho / r).
pub fn op_l(solver: &DirectSolver, rho: &ScalarFieldRZ) -> Result<EllipticSolution> {
    if rho.parity != Parity::Even {
        return Err(Error::ParityMismatch {
            op: "op_l",
            expected: Parity::Even,
        });
    }
    if !rho.is_finite() {
        return Err(Error::DegenerateInput("non-finite density".into()));
    }
    let rhs = dr_over_r(rho)?;
    solve_modified(solver, &rhs)
}

/// The epsilon-regularized construction:
/// (Delta + 2 x_h . grad / (r^2 + eps)) f = x_h . grad rho / (r^2 + eps),
/// with x_h . grad = r d_r on axisymmetric functions.
pub fn op_l_regularized(
    solver: &DirectSolver,
    rho: &ScalarFieldRZ,
    epsilon: f64,
) -> Result<EllipticSolution> {
    if !(epsilon > 0.0) {
        return Err(Error::DegenerateInput(format!(
            "epsilon must be > 0, got {epsilon}"
        )));
    }
    if rho.parity != Parity::Even {
        return Err(Error::ParityMismatch {
            op: "op_l_regularized",
            expected: Parity::Even,
        });
    }
    let g = solver.grid();
    let rho_r = d_r(rho);
    let mut rhs = ScalarFieldRZ::zeros(g, Parity::Even);
    for i in 0..g.nr {
        let r = g.r(i);
        let w = r / (r * r + epsilon);
        for j in 0..g.nz {
            *rhs.at_mut(i, j) = w * rho_r.at(i, j);
        }
    }
    let coef = coef_regularized(&g, epsilon);
    let (f, residual_l2) = solver.solve_checked(0.0, &coef, &rhs)?;
    Ok(EllipticSolution {
        f,
        residual_l2,
        epsilon,
    })
}

/// The d_z companion: (Delta + (2/r) d_r) f = d_z(sigma)/r.
///
/// sigma must be odd in r (so sigma/r is regular) or vanish near the axis.
pub fn op_lz(solver: &DirectSolver, sigma: &ScalarFieldRZ) -> Result<EllipticSolution> {
    if sigma.parity == Parity::Even {
        // Accept even inputs only when they carry no mass at the axis.
        let scale = sigma.lp_norm(f64::INFINITY).max(1e-300);
        let mut near_axis = 0.0_f64;
        for j in 0..sigma.grid.nz {
            near_axis = near_axis.max(sigma.at(0, j).abs());
        }
        if near_axis > 1e-8 * scale {
            return Err(Error::DegenerateInput(format!(
                "op_lz: even-parity input does not vanish at the axis (|sigma| = {near_axis:e} near r = 0)"
            )));
        }
    }
    let rhs = quotient_by_r(&d_z(sigma));
    let rhs = ScalarFieldRZ {
        parity: Parity::Even,
        ..rhs
    };
    solve_modified(solver, &rhs)
}

/// Both sides of the weighted inequality
/// ||f||_{L^p}^p <= (p^2/4) int |d_r f|^2 |f|^{p-2} r^2 dx.
#[derive(Debug, Clone, Copy)]
pub struct CknCheck {
    pub lhs: f64,
    pub rhs: f64,
    /// rhs / lhs; >= 1 is the inequality, up to discretization error.
    pub ratio: f64,
}

pub fn ckn_check(f: &ScalarFieldRZ, p: f64) -> Result<CknCheck> {
    if !(p >= 2.0) {
        return Err(Error::DegenerateInput(format!("ckn_check requires p >= 2, got {p}")));
    }
    let lhs = f.lp_norm(p).powf(p);
    if lhs < 1e-14 {
        return Err(Error::DegenerateInput("ckn_check: ||f||_p^p below 1e-14".into()));
    }
    let g = f.grid;
    let fr = d_r(f);
    let cell = 2.0 * std::f64::consts::PI * g.dr() * g.dz();
    let mut terms = Vec::with_capacity(g.len());
    for i in 0..g.nr {
        let r = g.r(i);
        let w = cell * r * r * r; // r^2 weight times the volume element r
        for j in 0..g.nz {
            let grad = fr.at(i, j);
            terms.push(w * grad * grad * f.at(i, j).abs().powf(p - 2.0));
        }
    }
    let rhs = (p * p / 4.0) * crate::grid::pairwise_sum(&terms);
    Ok(CknCheck {
        lhs,
        rhs,
        ratio: rhs / lhs,
    })
}

/// The manufactured pair for the singular solve: rho such that
/// L rho = e^{-r^2 - z^2} exactly in the continuum.
pub fn manufactured_rho(g: crate::grid::GridSpec) -> ScalarFieldRZ {
    ScalarFieldRZ::from_fn(g, Parity::Even, |r, z| {
        (3.0 - 2.0 * r * r - 2.0 * z * z) * (-r * r - z * z).exp()
    })
}

pub fn manufactured_f(g: crate::grid::GridSpec) -> ScalarFieldRZ {
    ScalarFieldRZ::from_fn(g, Parity::Even, |r, z| (-r * r - z * z).exp())
}
