//! Cell-centered meridian-plane grid, scalar/vector fields, and weighted norms.
//!
//! The radial grid is cell-centered so no node sits on the symmetry axis:
//! every 1/r coefficient stays finite and axis regularity is encoded by
//! parity ghost cells instead of boundary data.

use crate::error::{Error, Result};

/// Mirror behaviour of a field across the axis r = 0.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Parity {
    /// f(-r, z) = f(r, z)
    Even,
    /// f(-r, z) = -f(r, z)
    Odd,
}

/// Uniform cell-centered grid on [0, rmax] x [zmin, zmax].
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct GridSpec {
    pub nr: usize,
    pub nz: usize,
    pub rmax: f64,
    pub zmin: f64,
    pub zmax: f64,
}

/// Builds a grid, validating dimensions.
pub fn make_grid(nr: usize, nz: usize, rmax: f64, zmin: f64, zmax: f64) -> Result<GridSpec> {
    if nr < 4 || nz < 4 {
        return Err(Error::InvalidDimension(format!(
            "nr and nz must be >= 4, got ({nr}, {nz})"
        )));
    }
    if !(rmax > 0.0) {
        return Err(Error::InvalidDimension(format!("rmax must be > 0, got {rmax}")));
    }
    if !(zmin < zmax) {
        return Err(Error::InvalidDimension(format!(
            "need zmin < zmax, got [{zmin}, {zmax}]"
        )));
    }
    Ok(GridSpec { nr, nz, rmax, zmin, zmax })
}

impl GridSpec {
    pub fn dr(&self) -> f64 {
        self.rmax / self.nr as f64
    }

    pub fn dz(&self) -> f64 {
        (self.zmax - self.zmin) / self.nz as f64
    }

    /// Radial node r_i = (i + 1/2) dr, strictly positive.
    pub fn r(&self, i: usize) -> f64 {
        (i as f64 + 0.5) * self.dr()
    }

    pub fn z(&self, j: usize) -> f64 {
        self.zmin + (j as f64 + 0.5) * self.dz()
    }

    pub fn len(&self) -> usize {
        self.nr * self.nz
    }

    pub fn idx(&self, i: usize, j: usize) -> usize {
        i * self.nz + j
    }
}

/// Axisymmetric scalar samples on a grid, with a declared axis parity.
#[derive(Debug, Clone, PartialEq)]
pub struct ScalarFieldRZ {
    pub grid: GridSpec,
    pub values: Vec<f64>,
    pub parity: Parity,
}

impl ScalarFieldRZ {
    pub fn zeros(grid: GridSpec, parity: Parity) -> Self {
        ScalarFieldRZ {
            grid,
            values: vec![0.0; grid.len()],
            parity,
        }
    }

    pub fn from_fn(grid: GridSpec, parity: Parity, f: impl Fn(f64, f64) -> f64) -> Self {
        let mut values = Vec::with_capacity(grid.len());
        for i in 0..grid.nr {
            for j in 0..grid.nz {
                values.push(f(grid.r(i), grid.z(j)));
            }
        }
        ScalarFieldRZ { grid, values, parity }
    }

    pub fn at(&self, i: usize, j: usize) -> f64 {
        self.values[self.grid.idx(i, j)]
    }

    pub fn at_mut(&mut self, i: usize, j: usize) -> &mut f64 {
        let k = self.grid.idx(i, j);
        &mut self.values[k]
    }

    /// Ghost-aware access in r: signed index, mirrored across the axis by parity.
    /// Only one ghost layer (ir = -1) is ever needed by the stencils.
    pub fn at_ghost_r(&self, ir: isize, j: usize) -> f64 {
        if ir >= 0 {
            self.at(ir as usize, j)
        } else {
            let mirrored = (-ir - 1) as usize;
            match self.parity {
                Parity::Even => self.at(mirrored, j),
                Parity::Odd => -self.at(mirrored, j),
            }
        }
    }

    pub fn is_finite(&self) -> bool {
        self.values.iter().all(|v| v.is_finite())
    }

    pub fn map(&self, f: impl Fn(f64) -> f64) -> Self {
        ScalarFieldRZ {
            grid: self.grid,
            values: self.values.iter().map(|&v| f(v)).collect(),
            parity: self.parity,
        }
    }

    pub fn scaled(&self, c: f64) -> Self {
        self.map(|v| c * v)
    }

    /// a*self + b*other; parities must agree.
    pub fn axpy(&self, a: f64, b: f64, other: &ScalarFieldRZ) -> Result<Self> {
        check_same_grid(self, other)?;
        if self.parity != other.parity {
            return Err(Error::GridMismatch("parity differs in linear combination".into()));
        }
        let values = self
            .values
            .iter()
            .zip(&other.values)
            .map(|(&x, &y)| a * x + b * y)
            .collect();
        Ok(ScalarFieldRZ {
            grid: self.grid,
            values,
            parity: self.parity,
        })
    }

    /// Midpoint-rule L^p norm with the cylindrical volume weight 2*pi*r.
    /// p = infinity returns the grid max of |f|.
    pub fn lp_norm(&self, p: f64) -> f64 {
        assert!(p >= 1.0, "lp_norm requires p >= 1");
        if p.is_infinite() {
            return self
                .values
                .iter()
                .fold(0.0_f64, |m, &v| m.max(v.abs()));
        }
        let g = &self.grid;
        let cell = 2.0 * std::f64::consts::PI * g.dr() * g.dz();
        let mut terms = Vec::with_capacity(g.len());
        for i in 0..g.nr {
            let w = cell * g.r(i);
            for j in 0..g.nz {
                terms.push(w * self.at(i, j).abs().powf(p));
            }
        }
        pairwise_sum(&terms).powf(1.0 / p)
    }

    /// Weighted L^2 inner product <f, g> with the 2*pi*r weight.
    pub fn inner(&self, other: &ScalarFieldRZ) -> f64 {
        let g = &self.grid;
        let cell = 2.0 * std::f64::consts::PI * g.dr() * g.dz();
        let mut terms = Vec::with_capacity(g.len());
        for i in 0..g.nr {
            let w = cell * g.r(i);
            for j in 0..g.nz {
                terms.push(w * self.at(i, j) * other.at(i, j));
            }
        }
        pairwise_sum(&terms)
    }
}

/// Swirl-free velocity components on the meridian grid.
#[derive(Debug, Clone, PartialEq)]
pub struct VelocityRZ {
    pub vr: ScalarFieldRZ,
    pub vz: ScalarFieldRZ,
}

impl VelocityRZ {
    pub fn zeros(grid: GridSpec) -> Self {
        VelocityRZ {
            vr: ScalarFieldRZ::zeros(grid, Parity::Odd),
            vz: ScalarFieldRZ::zeros(grid, Parity::Even),
        }
    }

    pub fn grid(&self) -> GridSpec {
        self.vr.grid
    }

    pub fn max_speed(&self) -> f64 {
        let mr = self.vr.lp_norm(f64::INFINITY);
        let mz = self.vz.lp_norm(f64::INFINITY);
        mr.max(mz)
    }

    pub fn l2(&self) -> f64 {
        let a = self.vr.lp_norm(2.0);
        let b = self.vz.lp_norm(2.0);
        (a * a + b * b).sqrt()
    }
}

pub fn check_same_grid(a: &ScalarFieldRZ, b: &ScalarFieldRZ) -> Result<()> {
    if a.grid != b.grid {
        return Err(Error::GridMismatch(format!(
            "({}, {}) vs ({}, {})",
            a.grid.nr, a.grid.nz, b.grid.nr, b.grid.nz
        )));
    }
    Ok(())
}

/// Deterministic pairwise tree summation; bit-reproducible for a fixed input order.
pub fn pairwise_sum(terms: &[f64]) -> f64 {
    if terms.len() <= 32 {
        return terms.iter().sum();
    }
    let mid = terms.len() / 2;
    pairwise_sum(&terms[..mid]) + pairwise_sum(&terms[mid..])
}

/// Discrete L^2 and Sobolev seminorms (cylindrical weight, centered differences).
pub fn h_norms(f: &ScalarFieldRZ) -> (f64, f64, f64) {
    let l2 = f.lp_norm(2.0);
    let fr = crate::diffops::d_r(f);
    let fz = crate::diffops::d_z(f);
    let h1 = norm_sq_sum(&[&fr, &fz]).sqrt();
    // |D^2 f|^2 for an axisymmetric function: f_rr^2 + 2 f_rz^2 + f_zz^2 + (f_r / r)^2.
    let frr = crate::diffops::d_r(&fr);
    let frz = crate::diffops::d_z(&fr);
    let fzz = crate::diffops::d_z(&fz);
    let fr_over_r = crate::diffops::quotient_by_r(&fr);
    let h2 = norm_sq_sum(&[&frr, &frz, &frz, &fzz, &fr_over_r]).sqrt();
    (l2, h1, h2)
}

/// Full discrete H^2 norm used by the elliptic estimates.
pub fn h2_norm(f: &ScalarFieldRZ) -> f64 {
    let (l2, h1, h2) = h_norms(f);
    (l2 * l2 + h1 * h1 + h2 * h2).sqrt()
}

fn norm_sq_sum(fields: &[&ScalarFieldRZ]) -> f64 {
    fields
        .iter()
        .map(|f| {
            let n = f.lp_norm(2.0);
            n * n
        })
        .sum()
}

#[cfg(test)]
mod tests {
    use super::*;
    use std::f64::consts::PI;

    fn unit_grid() -> GridSpec {
        make_grid(64, 64, 1.0, -1.0, 1.0).unwrap()
    }

    #[test]
    fn node_placement_matches_formula() {
        let g = make_grid(4, 4, 1.0, -1.0, 1.0).unwrap();
        let r: Vec<f64> = (0..4).map(|i| g.r(i)).collect();
        assert_eq!(r, vec![0.125, 0.375, 0.625, 0.875]);
        assert!((g.z(0) - (-0.75)).abs() < 1e-15);
    }

    #[test]
    fn rejects_degenerate_dimensions() {
        assert!(make_grid(1, 4, 1.0, -1.0, 1.0).is_err());
        assert!(make_grid(4, 4, -1.0, -1.0, 1.0).is_err());
        assert!(make_grid(4, 4, 1.0, 1.0, -1.0).is_err());
    }

    #[test]
    fn spacing_example() {
        let g = make_grid(64, 128, 4.0, -8.0, 8.0).unwrap();
        assert!((g.dr() - 1.0 / 16.0).abs() < 1e-15);
        assert!((g.dz() - 1.0 / 8.0).abs() < 1e-15);
    }

    #[test]
    fn lp_norm_zero_and_cylinder() {
        let g = unit_grid();
        let zero = ScalarFieldRZ::zeros(g, Parity::Even);
        assert_eq!(zero.lp_norm(2.0), 0.0);
        // f = 1 on the unit cylinder of height 2: volume 2*pi, L2 norm sqrt(2*pi).
        let one = ScalarFieldRZ::from_fn(g, Parity::Even, |_, _| 1.0);
        assert!((one.lp_norm(2.0) - (2.0 * PI).sqrt()).abs() < 1e-12);
        assert!((one.lp_norm(f64::INFINITY) - 1.0).abs() < 1e-15);
    }

    #[test]
    fn gaussian_l2_matches_closed_form() {
        // || e^{-r^2-z^2} ||_{L^2}^2 = 2 pi * (1/4) * sqrt(pi/2) on R^3.
        let g = make_grid(192, 384, 6.0, -6.0, 6.0).unwrap();
        let f = ScalarFieldRZ::from_fn(g, Parity::Even, |r, z| (-r * r - z * z).exp());
        let exact = ((PI / 2.0) * (PI / 2.0_f64).sqrt()).sqrt();
        assert!((f.lp_norm(2.0) - exact).abs() < 3e-4, "got {}", f.lp_norm(2.0));
        assert!((exact - 1.40310).abs() < 1e-5);
    }

    #[test]
    fn h_norms_constant_and_linear() {
        let g = unit_grid();
        let c = ScalarFieldRZ::from_fn(g, Parity::Even, |_, _| 3.0);
        let (_, h1, _) = h_norms(&c);
        assert!(h1 < 1e-12);
        let fz = ScalarFieldRZ::from_fn(g, Parity::Even, |_, z| z);
        let (_, h1, _) = h_norms(&fz);
        assert!((h1 - (2.0 * PI).sqrt()).abs() < 1e-10, "got {h1}");
    }

    #[test]
    fn quadrature_refines_at_second_order() {
        let coarse = make_grid(32, 32, 4.0, -4.0, 4.0).unwrap();
        let fine = make_grid(64, 64, 4.0, -4.0, 4.0).unwrap();
        let finer = make_grid(128, 128, 4.0, -4.0, 4.0).unwrap();
        let exact = ((PI / 2.0) * (PI / 2.0_f64).sqrt()).sqrt();
        let e: Vec<f64> = [coarse, fine, finer]
            .iter()
            .map(|&g| {
                let f = ScalarFieldRZ::from_fn(g, Parity::Even, |r, z| (-r * r - z * z).exp());
                (f.lp_norm(2.0) - exact).abs()
            })
            .collect();
        let order = (e[0] / e[1]).log2();
        assert!(order > 1.9, "quadrature order {order}, errors {e:?}");
    }
}
