//! Dyadic frequency decomposition on the discrete eigenbasis: smooth
//! Littlewood-Paley blocks, Besov norms, a Bernstein-inequality check, and
//! the low-pass mollifier used by the stability runs.

use crate::diffops::{d_r, d_z};
use crate::error::{Error, Result};
use crate::grid::{GridSpec, ScalarFieldRZ};
use crate::spectral::SpectralBasis;

/// Smooth bump: 1 on [0,1], 0 on [2,inf), C^infinity in between.
pub fn chi(xi: f64) -> f64 {
    fn h(t: f64) -> f64 {
        if t > 0.0 {
            (-1.0 / t).exp()
        } else {
            0.0
        }
    }
    let up = h(2.0 - xi);
    let dn = h(xi - 1.0);
    if up + dn == 0.0 {
        if xi <= 1.0 {
            1.0
        } else {
            0.0
        }
    } else {
        up / (up + dn)
    }
}

/// Annulus bump phi(xi) = chi(xi/2) - chi(xi), supported in [1,4].
pub fn phi(xi: f64) -> f64 {
    chi(xi / 2.0) - chi(xi)
}

#[derive(Debug, Clone, Copy)]
pub struct DyadicPartition {
    /// Highest block index q such that the annulus around 2^q is resolved.
    pub qmax: i32,
}

impl DyadicPartition {
    pub fn for_grid(grid: &GridSpec) -> Result<Self> {
        let h = grid.dr().max(grid.dz());
        let qmax = (std::f64::consts::PI / h).log2().floor() as i32 - 1;
        if qmax < 1 {
            return Err(Error::GridTooCoarse { qmax });
        }
        Ok(Self { qmax })
    }

    /// Multiplier of block q; q = -1 is the low-frequency block chi.
    pub fn symbol(&self, q: i32, xi: f64) -> f64 {
        if q < 0 {
            chi(xi)
        } else {
            phi(xi / (1u64 << q) as f64)
        }
    }
}

/// Blocks indexed 0 -> q = -1, then q = 0..=qmax.
pub struct LpDecomposition {
    pub partition: DyadicPartition,
    pub blocks: Vec<ScalarFieldRZ>,
}

impl LpDecomposition {
    pub fn block(&self, q: i32) -> &ScalarFieldRZ {
        &self.blocks[(q + 1) as usize]
    }
}

pub fn decompose(basis: &SpectralBasis, f: &ScalarFieldRZ) -> Result<LpDecomposition> {
    let partition = DyadicPartition::for_grid(&basis.grid())?;
    let mut blocks = Vec::with_capacity((partition.qmax + 2) as usize);
    for q in -1..=partition.qmax {
        blocks.push(basis.apply_multiplier(f, |xi| partition.symbol(q, xi))?);
    }
    Ok(LpDecomposition { partition, blocks })
}

/// Besov norm B^s_{p,q} from the block decomposition. q = infinity takes a sup.
pub fn besov_norm(basis: &SpectralBasis, f: &ScalarFieldRZ, s: f64, p: f64, q: f64) -> Result<f64> {
    let dec = decompose(basis, f)?;
    let mut terms = Vec::new();
    for qi in -1..=dec.partition.qmax {
        let weight = 2f64.powf(s * qi.max(0) as f64);
        terms.push(weight * dec.block(qi).lp_norm(p));
    }
    if q.is_infinite() {
        Ok(terms.into_iter().fold(0.0, f64::max))
    } else {
        Ok(terms
            .into_iter()
            .map(|t| t.powf(q))
            .sum::<f64>()
            .powf(1.0 / q))
    }
}

#[derive(Debug, Clone, Copy)]
pub struct BernsteinCheck {
    pub q: i32,
    /// ||grad block||_2 / ||block||_2
    pub ratio: f64,
    pub lower: f64,
    pub upper: f64,
    pub pass: bool,
}

/// Verify the gradient of a dyadic block scales like its center frequency.
pub fn bernstein_check(basis: &SpectralBasis, f: &ScalarFieldRZ, q: i32) -> Result<BernsteinCheck> {
    let partition = DyadicPartition::for_grid(&basis.grid())?;
    if q < 0 || q > partition.qmax {
        return Err(Error::InvalidDimension(format!(
            "bernstein block q = {q} outside 0..={}",
            partition.qmax
        )));
    }
    let block = basis.apply_multiplier(f, |xi| partition.symbol(q, xi))?;
    let denom = block.lp_norm(2.0);
    if denom < 1e-14 {
        return Err(Error::DegenerateInput(format!(
            "bernstein_check: block {q} carries no energy"
        )));
    }
    let gr = d_r(&block).lp_norm(2.0);
    let gz = d_z(&block).lp_norm(2.0);
    let ratio = (gr * gr + gz * gz).sqrt() / denom;
    let center = (1u64 << q) as f64;
    let (lower, upper) = (center / 8.0, 8.0 * center);
    Ok(BernsteinCheck {
        q,
        ratio,
        lower,
        upper,
        pass: ratio >= lower && ratio <= upper,
    })
}

/// Low-pass mollifier S_n f: keep frequencies below roughly 2^n.
pub fn mollify(basis: &SpectralBasis, f: &ScalarFieldRZ, n: i32) -> Result<ScalarFieldRZ> {
    let cut = 2f64.powi(n);
    basis.apply_multiplier(f, |xi| chi(xi / cut))
}
