//! Discrete spectral basis diagonalizing the cylindrical Laplacian on the
//! cell-centered grid: a weighted radial eigenbasis of (1/r) d_r (r d_r)
//! with zero flux at both radial faces, tensored with cosine modes in z.
//! Constants are exactly the zero mode, and every basis function carries a
//! nonnegative frequency sqrt(-eigenvalue) used for dyadic filtering.

use nalgebra::DMatrix;

use crate::error::{Error, Result};
use crate::grid::{GridSpec, Parity, ScalarFieldRZ};

pub struct SpectralBasis {
    grid: GridSpec,
    /// nr x nr, columns are orthonormal radial modes in the sqrt(r)-weighted variable.
    ur: DMatrix<f64>,
    /// Squared radial frequencies, ascending.
    xi_r2: Vec<f64>,
    /// nz x nz, columns are orthonormal cosine modes.
    uz: DMatrix<f64>,
    xi_z2: Vec<f64>,
    sqrt_r: Vec<f64>,
}

impl SpectralBasis {
    pub fn new(grid: GridSpec) -> Self {
        let (nr, nz) = (grid.nr, grid.nz);
        let dr = grid.dr();
        let dz = grid.dz();

        // Symmetrized flux form of (1/r) d_r (r d_r): conjugate by diag(sqrt r).
        let mut a = DMatrix::zeros(nr, nr);
        for i in 0..nr {
            let r = grid.r(i);
            let rw = if i == 0 { 0.0 } else { r - 0.5 * dr };
            let re = if i == nr - 1 { 0.0 } else { r + 0.5 * dr };
            a[(i, i)] = -(rw + re) / (r * dr * dr);
            if i + 1 < nr {
                let b = re / (dr * dr * (r * grid.r(i + 1)).sqrt());
                a[(i, i + 1)] = b;
                a[(i + 1, i)] = b;
            }
        }
        let eig = nalgebra::linalg::SymmetricEigen::new(a);
        let mut order: Vec<usize> = (0..nr).collect();
        order.sort_by(|&p, &q| {
            eig.eigenvalues[q]
                .partial_cmp(&eig.eigenvalues[p])
                .unwrap()
        });
        let mut ur = DMatrix::zeros(nr, nr);
        let mut xi_r2 = Vec::with_capacity(nr);
        for (m, &p) in order.iter().enumerate() {
            ur.set_column(m, &eig.eigenvectors.column(p));
            xi_r2.push((-eig.eigenvalues[p]).max(0.0));
        }

        let mut uz = DMatrix::zeros(nz, nz);
        let mut xi_z2 = Vec::with_capacity(nz);
        for k in 0..nz {
            let norm = if k == 0 {
                (1.0 / nz as f64).sqrt()
            } else {
                (2.0 / nz as f64).sqrt()
            };
            for j in 0..nz {
                uz[(j, k)] = norm * ((j as f64 + 0.5) * k as f64 * std::f64::consts::PI
                    / nz as f64)
                    .cos();
            }
            xi_z2.push((2.0 - 2.0 * (k as f64 * std::f64::consts::PI / nz as f64).cos())
                / (dz * dz));
        }

        let sqrt_r = (0..nr).map(|i| grid.r(i).sqrt()).collect();
        Self {
            grid,
            ur,
            xi_r2,
            uz,
            xi_z2,
            sqrt_r,
        }
    }

    pub fn grid(&self) -> GridSpec {
        self.grid
    }

    pub fn frequency(&self, m: usize, k: usize) -> f64 {
        (self.xi_r2[m] + self.xi_z2[k]).sqrt()
    }

    /// Largest resolved frequency.
    pub fn max_frequency(&self) -> f64 {
        self.frequency(self.grid.nr - 1, self.grid.nz - 1)
    }

    /// Forward transform; coefficients indexed c[m * nz + k].
    pub fn transform(&self, f: &ScalarFieldRZ) -> Result<Vec<f64>> {
        if f.parity != Parity::Even {
            return Err(Error::ParityMismatch {
                op: "spectral transform",
                expected: Parity::Even,
            });
        }
        let (nr, nz) = (self.grid.nr, self.grid.nz);
        let mut g = DMatrix::zeros(nr, nz);
        for i in 0..nr {
            for j in 0..nz {
                g[(i, j)] = self.sqrt_r[i] * f.at(i, j);
            }
        }
        let c = self.ur.transpose() * g * &self.uz;
        let mut out = vec![0.0; nr * nz];
        for m in 0..nr {
            for k in 0..nz {
                out[m * nz + k] = c[(m, k)];
            }
        }
        Ok(out)
    }

    pub fn inverse(&self, coeffs: &[f64]) -> Result<ScalarFieldRZ> {
        let (nr, nz) = (self.grid.nr, self.grid.nz);
        if coeffs.len() != nr * nz {
            return Err(Error::InvalidDimension(format!(
                "coefficient vector has {} entries, grid needs {}",
                coeffs.len(),
                nr * nz
            )));
        }
        let mut c = DMatrix::zeros(nr, nz);
        for m in 0..nr {
            for k in 0..nz {
                c[(m, k)] = coeffs[m * nz + k];
            }
        }
        let g = &self.ur * c * self.uz.transpose();
        let mut f = ScalarFieldRZ::zeros(self.grid, Parity::Even);
        for i in 0..nr {
            for j in 0..nz {
                *f.at_mut(i, j) = g[(i, j)] / self.sqrt_r[i];
            }
        }
        Ok(f)
    }

    /// Apply a frequency multiplier m(xi) diagonally in the eigenbasis.
    pub fn apply_multiplier(
        &self,
        f: &ScalarFieldRZ,
        mult: impl Fn(f64) -> f64,
    ) -> Result<ScalarFieldRZ> {
        let mut c = self.transform(f)?;
        let nz = self.grid.nz;
        for m in 0..self.grid.nr {
            for k in 0..nz {
                c[m * nz + k] *= mult(self.frequency(m, k));
            }
        }
        self.inverse(&c)
    }
}
