//! Discrete differential operators in cylindrical axisymmetric form, the
//! azimuthal curl, and the Biot-Savart inversion via a stream function.
//!
//! Stencils are centered second order in the interior, use parity ghosts at
//! the axis, and fall back to stencils that are exact on quadratics at the
//! outer boundaries (derivative operators impose no boundary condition; the
//! elliptic solves in `solver` own the Dirichlet treatment).

use crate::error::{Error, Result};
use crate::grid::{Parity, ScalarFieldRZ, VelocityRZ};
use crate::solver::{coef_modified, DirectSolver};

/// Relative L^2 bound on the discrete divergence of a reconstructed velocity.
pub const DIVERGENCE_TOL: f64 = 1e-8;

/// Matrix-free linear operators over scalar fields.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum LinearOperatorRZ {
    Laplacian,
    ModifiedLaplacian,
    Dr,
    Dz,
    /// The operator whose inversion underlies Biot-Savart:
    /// phi -> (Delta + (2/r) d_r) phi acting on psi/r.
    StreamOperator,
}

impl LinearOperatorRZ {
    pub fn apply(&self, f: &ScalarFieldRZ) -> Result<ScalarFieldRZ> {
        match self {
            LinearOperatorRZ::Laplacian => laplacian_axisym(f),
            LinearOperatorRZ::ModifiedLaplacian => modified_laplacian(f),
            LinearOperatorRZ::Dr => Ok(d_r(f)),
            LinearOperatorRZ::Dz => Ok(d_z(f)),
            LinearOperatorRZ::StreamOperator => modified_laplacian(f),
        }
    }
}

fn flip(p: Parity) -> Parity {
    match p {
        Parity::Even => Parity::Odd,
        Parity::Odd => Parity::Even,
    }
}

/// First radial derivative.
pub fn d_r(f: &ScalarFieldRZ) -> ScalarFieldRZ {
    let g = f.grid;
    let (nr, nz) = (g.nr, g.nz);
    let dr = g.dr();
    let mut out = ScalarFieldRZ::zeros(g, flip(f.parity));
    for i in 0..nr {
        for j in 0..nz {
            let v = if i == nr - 1 {
                (3.0 * f.at(i, j) - 4.0 * f.at(i - 1, j) + f.at(i - 2, j)) / (2.0 * dr)
            } else {
                (f.at(i + 1, j) - f.at_ghost_r(i as isize - 1, j)) / (2.0 * dr)
            };
            *out.at_mut(i, j) = v;
        }
    }
    out
}

/// First axial derivative.
pub fn d_z(f: &ScalarFieldRZ) -> ScalarFieldRZ {
    let g = f.grid;
    let (nr, nz) = (g.nr, g.nz);
    let dz = g.dz();
    let mut out = ScalarFieldRZ::zeros(g, f.parity);
    for i in 0..nr {
        for j in 0..nz {
            let v = if j == 0 {
                (-3.0 * f.at(i, 0) + 4.0 * f.at(i, 1) - f.at(i, 2)) / (2.0 * dz)
            } else if j == nz - 1 {
                (3.0 * f.at(i, j) - 4.0 * f.at(i, j - 1) + f.at(i, j - 2)) / (2.0 * dz)
            } else {
                (f.at(i, j + 1) - f.at(i, j - 1)) / (2.0 * dz)
            };
            *out.at_mut(i, j) = v;
        }
    }
    out
}

/// Second radial derivative.
pub fn d_rr(f: &ScalarFieldRZ) -> ScalarFieldRZ {
    let g = f.grid;
    let (nr, nz) = (g.nr, g.nz);
    let inv = 1.0 / (g.dr() * g.dr());
    let mut out = ScalarFieldRZ::zeros(g, f.parity);
    for i in 0..nr {
        for j in 0..nz {
            let v = if i == nr - 1 {
                (f.at(i, j) - 2.0 * f.at(i - 1, j) + f.at(i - 2, j)) * inv
            } else {
                (f.at(i + 1, j) - 2.0 * f.at(i, j) + f.at_ghost_r(i as isize - 1, j)) * inv
            };
            *out.at_mut(i, j) = v;
        }
    }
    out
}

/// Second axial derivative.
pub fn d_zz(f: &ScalarFieldRZ) -> ScalarFieldRZ {
    let g = f.grid;
    let (nr, nz) = (g.nr, g.nz);
    let inv = 1.0 / (g.dz() * g.dz());
    let mut out = ScalarFieldRZ::zeros(g, f.parity);
    for i in 0..nr {
        for j in 0..nz {
            let v = if j == 0 {
                (f.at(i, 0) - 2.0 * f.at(i, 1) + f.at(i, 2)) * inv
            } else if j == nz - 1 {
                (f.at(i, j) - 2.0 * f.at(i, j - 1) + f.at(i, j - 2)) * inv
            } else {
                (f.at(i, j + 1) - 2.0 * f.at(i, j) + f.at(i, j - 1)) * inv
            };
            *out.at_mut(i, j) = v;
        }
    }
    out
}

/// Pointwise f / r; regular everywhere because r_i >= dr/2.
pub fn quotient_by_r(f: &ScalarFieldRZ) -> ScalarFieldRZ {
    let g = f.grid;
    let mut out = ScalarFieldRZ::zeros(g, flip(f.parity));
    for i in 0..g.nr {
        let inv_r = 1.0 / g.r(i);
        for j in 0..g.nz {
            *out.at_mut(i, j) = f.at(i, j) * inv_r;
        }
    }
    out
}

fn require_even(f: &ScalarFieldRZ, op: &'static str) -> Result<()> {
    if f.parity != Parity::Even {
        return Err(Error::ParityMismatch {
            op,
            expected: Parity::Even,
        });
    }
    Ok(())
}

/// (d_r f) / r, regular at the axis because d_r f is odd for even f.
pub fn dr_over_r(f: &ScalarFieldRZ) -> Result<ScalarFieldRZ> {
    require_even(f, "dr_over_r")?;
    Ok(quotient_by_r(&d_r(f)))
}

/// Axisymmetric Laplacian d_rr + (1/r) d_r + d_zz on even fields.
pub fn laplacian_axisym(f: &ScalarFieldRZ) -> Result<ScalarFieldRZ> {
    require_even(f, "laplacian_axisym")?;
    let mut out = d_rr(f);
    let r1 = quotient_by_r(&d_r(f));
    let zz = d_zz(f);
    for k in 0..out.values.len() {
        out.values[k] += r1.values[k] + zz.values[k];
    }
    Ok(out)
}

/// Modified Laplacian Delta + (2/r) d_r = d_rr + (3/r) d_r + d_zz.
pub fn modified_laplacian(f: &ScalarFieldRZ) -> Result<ScalarFieldRZ> {
    require_even(f, "modified_laplacian")?;
    let mut out = d_rr(f);
    let r1 = quotient_by_r(&d_r(f));
    let zz = d_zz(f);
    for k in 0..out.values.len() {
        out.values[k] += 3.0 * r1.values[k] + zz.values[k];
    }
    Ok(out)
}

/// Azimuthal vorticity omega_theta = d_z v^r - d_r v^z (odd parity).
pub fn curl_axisym(v: &VelocityRZ) -> ScalarFieldRZ {
    let a = d_z(&v.vr);
    let b = d_r(&v.vz);
    let mut out = ScalarFieldRZ::zeros(v.grid(), Parity::Odd);
    for k in 0..out.values.len() {
        out.values[k] = a.values[k] - b.values[k];
    }
    out
}

/// Stretching factor v^r / r (even parity).
pub fn vr_over_r(v: &VelocityRZ) -> ScalarFieldRZ {
    quotient_by_r(&v.vr)
}

/// Discrete cylindrical divergence (1/r) d_r(r v^r) + d_z v^z.
pub fn divergence_cyl(v: &VelocityRZ) -> ScalarFieldRZ {
    let g = v.grid();
    // r v^r is even across the axis (odd coordinate times odd field).
    let mut rvr = ScalarFieldRZ::zeros(g, Parity::Even);
    for i in 0..g.nr {
        let r = g.r(i);
        for j in 0..g.nz {
            *rvr.at_mut(i, j) = r * v.vr.at(i, j);
        }
    }
    let term_r = quotient_by_r(&d_r(&rvr));
    let term_z = d_z(&v.vz);
    let mut out = ScalarFieldRZ::zeros(g, Parity::Even);
    for k in 0..out.values.len() {
        out.values[k] = term_r.values[k] + term_z.values[k];
    }
    out
}

/// Recovers the swirl-free velocity with curl omega_theta and zero discrete
/// divergence, through the Stokes stream function.
///
/// Writing psi = r phi turns -(Delta - 1/r^2) psi = omega_theta into
/// (Delta + (2/r) d_r) phi = -omega_theta / r, an even-parity solve.
pub fn biot_savart(solver: &DirectSolver, omega_theta: &ScalarFieldRZ) -> Result<VelocityRZ> {
    if omega_theta.parity != Parity::Odd {
        return Err(Error::ParityMismatch {
            op: "biot_savart",
            expected: Parity::Odd,
        });
    }
    let g = omega_theta.grid;
    let zeta = quotient_by_r(omega_theta); // even
    let neg_zeta = zeta.scaled(-1.0);
    let (phi, _resid) = solver.solve_checked(0.0, &coef_modified(&g), &neg_zeta)?;

    // psi = r phi (odd), v^r = -d_z psi, v^z = (1/r) d_r (r psi).
    let mut psi = ScalarFieldRZ::zeros(g, Parity::Odd);
    for i in 0..g.nr {
        let r = g.r(i);
        for j in 0..g.nz {
            *psi.at_mut(i, j) = r * phi.at(i, j);
        }
    }
    let vr = d_z(&psi).scaled(-1.0);
    let mut rpsi = ScalarFieldRZ::zeros(g, Parity::Even);
    for i in 0..g.nr {
        let r = g.r(i);
        for j in 0..g.nz {
            *rpsi.at_mut(i, j) = r * psi.at(i, j);
        }
    }
    let vz = quotient_by_r(&d_r(&rpsi));
    let v = VelocityRZ { vr, vz };

    let div = divergence_cyl(&v).lp_norm(2.0);
    let scale = omega_theta.lp_norm(2.0).max(1e-300);
    if div > DIVERGENCE_TOL * scale {
        return Err(Error::SolverNonConvergence {
            residual: div / scale,
            tol: DIVERGENCE_TOL,
        });
    }
    Ok(v)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::grid::make_grid;

    fn gauss(g: crate::grid::GridSpec) -> ScalarFieldRZ {
        ScalarFieldRZ::from_fn(g, Parity::Even, |r, z| (-r * r - z * z).exp())
    }

    fn rel_l2(a: &ScalarFieldRZ, b: &ScalarFieldRZ) -> f64 {
        a.axpy(1.0, -1.0, b).unwrap().lp_norm(2.0) / b.lp_norm(2.0).max(1e-300)
    }

    #[test]
    fn constants_and_polynomials() {
        let g = make_grid(64, 64, 2.0, -2.0, 2.0).unwrap();
        let one = ScalarFieldRZ::from_fn(g, Parity::Even, |_, _| 1.0);
        assert!(laplacian_axisym(&one).unwrap().lp_norm(f64::INFINITY) < 1e-11);
        assert!(modified_laplacian(&one).unwrap().lp_norm(f64::INFINITY) < 1e-11);

        let r2 = ScalarFieldRZ::from_fn(g, Parity::Even, |r, _| r * r);
        let lap = laplacian_axisym(&r2).unwrap();
        let m = modified_laplacian(&r2).unwrap();
        let q = dr_over_r(&r2).unwrap();
        for k in 0..lap.values.len() {
            assert!((lap.values[k] - 4.0).abs() < 1e-9);
            assert!((m.values[k] - 8.0).abs() < 1e-9);
            assert!((q.values[k] - 2.0).abs() < 1e-9);
        }
    }

    #[test]
    fn rejects_odd_parity() {
        let g = make_grid(16, 16, 1.0, -1.0, 1.0).unwrap();
        let odd = ScalarFieldRZ::from_fn(g, Parity::Odd, |r, _| r);
        assert!(laplacian_axisym(&odd).is_err());
        assert!(modified_laplacian(&odd).is_err());
        assert!(dr_over_r(&odd).is_err());
    }

    #[test]
    fn gaussian_symbolic_oracle() {
        // Symbolic derivatives of e^{-r^2-z^2}:
        //   laplacian -> (4r^2+4z^2-6) f, modified -> (4r^2+4z^2-10) f,
        //   (d_r f)/r -> -2 f.
        let g = make_grid(128, 128, 4.0, -4.0, 4.0).unwrap();
        let f = gauss(g);
        let lap_exact = ScalarFieldRZ::from_fn(g, Parity::Even, |r, z| {
            (4.0 * r * r + 4.0 * z * z - 6.0) * (-r * r - z * z).exp()
        });
        let mod_exact = ScalarFieldRZ::from_fn(g, Parity::Even, |r, z| {
            (4.0 * r * r + 4.0 * z * z - 10.0) * (-r * r - z * z).exp()
        });
        assert!(rel_l2(&laplacian_axisym(&f).unwrap(), &lap_exact) < 2e-3);
        assert!(rel_l2(&modified_laplacian(&f).unwrap(), &mod_exact) < 2e-3);
        assert!(rel_l2(&dr_over_r(&f).unwrap(), &f.scaled(-2.0)) < 2e-3);
    }

    #[test]
    fn operator_decomposition_is_pointwise() {
        let g = make_grid(48, 48, 3.0, -3.0, 3.0).unwrap();
        let f = gauss(g);
        let m = modified_laplacian(&f).unwrap();
        let lap = laplacian_axisym(&f).unwrap();
        let q = dr_over_r(&f).unwrap();
        for k in 0..m.values.len() {
            let rhs = lap.values[k] + 2.0 * q.values[k];
            assert!((m.values[k] - rhs).abs() < 1e-10 * (1.0 + m.values[k].abs()));
        }
    }

    #[test]
    fn curl_of_polynomial() {
        let g = make_grid(32, 32, 2.0, -2.0, 2.0).unwrap();
        let v = VelocityRZ {
            vr: ScalarFieldRZ::zeros(g, Parity::Odd),
            vz: ScalarFieldRZ::from_fn(g, Parity::Even, |r, _| r * r),
        };
        let w = curl_axisym(&v);
        for i in 0..g.nr {
            for j in 0..g.nz {
                assert!((w.at(i, j) + 2.0 * g.r(i)).abs() < 1e-9);
            }
        }
    }

    #[test]
    fn vr_over_r_exact_quotient() {
        let g = make_grid(32, 32, 2.0, -2.0, 2.0).unwrap();
        let v = VelocityRZ {
            vr: ScalarFieldRZ::from_fn(g, Parity::Odd, |r, z| r * (-z * z).exp()),
            vz: ScalarFieldRZ::zeros(g, Parity::Even),
        };
        let q = vr_over_r(&v);
        for i in 0..g.nr {
            for j in 0..g.nz {
                assert!((q.at(i, j) - (-g.z(j) * g.z(j)).exp()).abs() < 1e-12);
            }
        }
    }

    #[test]
    fn biot_savart_zero_and_divergence() {
        let g = make_grid(64, 128, 4.0, -4.0, 4.0).unwrap();
        let s = DirectSolver::new(g);
        let zero = ScalarFieldRZ::zeros(g, Parity::Odd);
        let v = biot_savart(&s, &zero).unwrap();
        assert!(v.max_speed() < 1e-14);

        let omega = ScalarFieldRZ::from_fn(g, Parity::Odd, |r, z| {
            r * (-(r - 1.5) * (r - 1.5) - z * z).exp()
        });
        let v = biot_savart(&s, &omega).unwrap();
        let div = divergence_cyl(&v).lp_norm(2.0);
        assert!(div < 1e-9 * omega.lp_norm(2.0), "div {div}");
    }

    #[test]
    fn biot_savart_curl_roundtrip_refines() {
        // curl(biot_savart(omega)) -> omega at second order for smooth omega.
        let mut errs = Vec::new();
        for &n in &[32usize, 64] {
            let g = make_grid(n, 2 * n, 4.0, -4.0, 4.0).unwrap();
            let s = DirectSolver::new(g);
            let omega = ScalarFieldRZ::from_fn(g, Parity::Odd, |r, z| {
                r * (-(r * r + z * z)).exp()
            });
            let v = biot_savart(&s, &omega).unwrap();
            let back = curl_axisym(&v);
            errs.push(rel_l2(&back, &omega));
        }
        let order = (errs[0] / errs[1]).log2();
        assert!(order > 1.7, "roundtrip order {order}, errors {errs:?}");
    }

    #[test]
    fn stencil_linearity_random_fields() {
        use rand::{Rng, SeedableRng};
        let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(7);
        let g = make_grid(24, 24, 2.0, -2.0, 2.0).unwrap();
        let mut f1 = ScalarFieldRZ::zeros(g, Parity::Even);
        let mut f2 = ScalarFieldRZ::zeros(g, Parity::Even);
        for k in 0..g.len() {
            f1.values[k] = rng.gen_range(-1.0..1.0);
            f2.values[k] = rng.gen_range(-1.0..1.0);
        }
        let combo = f1.axpy(2.5, -1.25, &f2).unwrap();
        for op in [
            LinearOperatorRZ::Laplacian,
            LinearOperatorRZ::ModifiedLaplacian,
            LinearOperatorRZ::Dr,
            LinearOperatorRZ::Dz,
        ] {
            let a = op.apply(&combo).unwrap();
            let b = op
                .apply(&f1)
                .unwrap()
                .axpy(2.5, -1.25, &op.apply(&f2).unwrap())
                .unwrap();
            for k in 0..a.values.len() {
                assert!((a.values[k] - b.values[k]).abs() < 1e-9);
            }
        }
    }
}
