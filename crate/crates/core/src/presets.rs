//! Canonical initial states used by the test suites and the CLI.

use crate::error::Result;
use crate::evolve::SimState;
use crate::grid::{GridSpec, Parity, ScalarFieldRZ};

/// Quiescent fluid.
pub fn zero(g: GridSpec) -> Result<SimState> {
    SimState::new(
        ScalarFieldRZ::zeros(g, Parity::Even),
        ScalarFieldRZ::zeros(g, Parity::Even),
    )
}

/// A buoyant density blob at the origin, no initial swirl-plane vorticity.
pub fn gaussian_blob(g: GridSpec, amp: f64) -> Result<SimState> {
    let rho = ScalarFieldRZ::from_fn(g, Parity::Even, |r, z| amp * (-r * r - z * z).exp());
    SimState::new(rho, ScalarFieldRZ::zeros(g, Parity::Even))
}

/// A smooth cellular stirring velocity built from a stream function, so it
/// is discretely divergence-free by the same construction as the vorticity
/// inversion. `amp` sets the peak speed scale.
pub fn cellular_velocity(g: GridSpec, amp: f64) -> crate::grid::VelocityRZ {
    use crate::diffops::{d_r, d_z, quotient_by_r};
    let phi = ScalarFieldRZ::from_fn(g, Parity::Even, |r, z| {
        amp * (2.0 * z).cos() * (-r * r - 0.2 * z * z).exp()
    });
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
    crate::grid::VelocityRZ { vr, vz }
}

/// A vortex ring of strength `zeta_amp` centered at (r, z) = (1, 0) together
/// with a density blob of amplitude `rho_amp`. The ring profile is rad
/// radius w = 0.3, far enough from the axis that the even extension is
/// smooth to machine precision there.
pub fn vortex_ring(g: GridSpec, zeta_amp: f64, rho_amp: f64) -> Result<SimState> {
    let w2 = 0.3f64 * 0.3;
    let zeta = ScalarFieldRZ::from_fn(g, Parity::Even, |r, z| {
        zeta_amp * (-((r - 1.0) * (r - 1.0) + z * z) / w2).exp()
    });
    let rho = ScalarFieldRZ::from_fn(g, Parity::Even, |r, z| {
        rho_amp * (-(r * r + z * z) / 0.5).exp()
    });
    SimState::new(rho, zeta)
}
