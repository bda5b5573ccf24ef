//! Acceptance gate: one test per criterion, each printing a single
//! PASS/FAIL line with the measured quantity and its tolerance.

use axibouss::coupling::{lemma_e1_residual, lemma_ld_residual};
use axibouss::evolve::{AdvectionScheme, SimState, Simulation, StepConfig};
use axibouss::grid::{make_grid, GridSpec, Parity, ScalarFieldRZ};
use axibouss::lpbesov::{bernstein_check, decompose, mollify, DyadicPartition};
use axibouss::monitor::{
    check_energy, check_gamma_energy, check_log_estimate, check_max_principle, check_stability,
    check_zeta_envelope, splice_series, Recorder, Series,
};
use axibouss::presets;
use axibouss::singell::{ckn_check, op_l, op_l_regularized};
use axibouss::solver::DirectSolver;
use axibouss::spectral::SpectralBasis;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

const DT: f64 = 5e-3;

fn grid_std() -> GridSpec {
    make_grid(128, 256, 4.0, -4.0, 4.0).unwrap()
}

fn verdict(name: &str, pass: bool, detail: &str) {
    println!("{} {name}: {detail}", if pass { "PASS" } else { "FAIL" });
    assert!(pass, "{name}: {detail}");
}

fn run_series(mut state: SimState, kappa: f64, t_end: f64, besov: bool, cadence: usize) -> Series {
    let g = state.grid();
    let sim = Simulation::new(g, StepConfig::new(DT, kappa, AdvectionScheme::Upwind2)).unwrap();
    let mut rec = Recorder::new(g, kappa, besov);
    rec.record_state(&sim, &state).unwrap();
    let mut n = 0usize;
    sim.run(&mut state, t_end, |sim, st, _| {
        n += 1;
        if n % cadence == 0 {
            rec.record_state(sim, st)?;
        }
        Ok(())
    })
    .unwrap();
    rec.series
}

/// Grid-independent random smooth even field: a fixed set of Gaussian bumps
/// mirrored across the axis, so the same field can be sampled on any grid.
fn bump_params(rng: &mut ChaCha8Rng) -> Vec<[f64; 4]> {
    (0..6)
        .map(|_| {
            [
                rng.gen_range(-1.0..1.0),
                rng.gen_range(0.0..2.0),
                rng.gen_range(-2.0..2.0),
                rng.gen_range(0.4..1.0),
            ]
        })
        .collect()
}

fn bumps_on(g: GridSpec, params: &[[f64; 4]]) -> ScalarFieldRZ {
    ScalarFieldRZ::from_fn(g, Parity::Even, |r, z| {
        params
            .iter()
            .map(|&[a, r0, z0, w]| {
                let d1 = (r - r0).powi(2) + (z - z0).powi(2);
                let d2 = (r + r0).powi(2) + (z - z0).powi(2);
                a * ((-d1 / (w * w)).exp() + (-d2 / (w * w)).exp())
            })
            .sum()
    })
}

#[test]
fn criterion_01_density_max_principle() {
    let g = grid_std();
    let mut worst = f64::NEG_INFINITY;
    let mut pass = true;
    for kappa in [0.0, 0.5, 1.0] {
        let series = run_series(presets::gaussian_blob(g, 0.5).unwrap(), kappa, 1.0, false, 2);
        for p in [2.0, f64::INFINITY] {
            let rep = check_max_principle(&series, p, 0.01).unwrap();
            let excess = series
                .rows
                .iter()
                .map(|r| r.column(if p == 2.0 { "l2_rho" } else { "linf_rho" }).unwrap())
                .fold(0.0f64, f64::max)
                / series.rows[0]
                    .column(if p == 2.0 { "l2_rho" } else { "linf_rho" })
                    .unwrap()
                - 1.0;
            worst = worst.max(excess);
            pass &= rep.pass();
        }
    }
    verdict(
        "criterion 01 (density norms non-increasing)",
        pass,
        &format!("max relative excess {worst:.2e}, tolerance 1e-2"),
    );
}

#[test]
fn criterion_02_velocity_energy_envelope() {
    let g = grid_std();
    let mut pass = true;
    let mut detail = String::new();
    for (name, state) in [
        ("vortex_ring", presets::vortex_ring(g, 1.0, 0.5).unwrap()),
        ("gaussian", presets::gaussian_blob(g, 0.5).unwrap()),
    ] {
        let series = run_series(state, 0.0, 1.0, false, 2);
        let rep = check_energy(&series, 0.05).unwrap();
        pass &= rep.pass();
        detail.push_str(&format!(
            "{name} {}/{} rows; ",
            rep.pass_count(),
            rep.rows.len()
        ));
    }
    verdict(
        "criterion 02 (velocity energy envelope, +5%)",
        pass,
        &detail,
    );
}

#[test]
fn criterion_03_zeta_monotone_without_buoyancy() {
    let g = grid_std();
    let series = run_series(presets::vortex_ring(g, 1.0, 0.0).unwrap(), 0.0, 1.0, false, 1);
    let mut worst = 0.0f64;
    for w in series.rows.windows(2) {
        worst = worst.max(w[1].l2_zeta / w[0].l2_zeta - 1.0);
    }
    verdict(
        "criterion 03 (||zeta|| non-increasing with rho = 0)",
        worst <= 1e-3,
        &format!("max per-step growth {worst:.2e}, tolerance 1e-3"),
    );
}

fn identity_residuals(box_size: f64) -> (Vec<f64>, Vec<f64>) {
    let mut ld = Vec::new();
    let mut e1 = Vec::new();
    for inv_h in [16usize, 32, 64] {
        let nr = (box_size * inv_h as f64) as usize;
        let g = make_grid(nr, 2 * nr, box_size, -box_size, box_size).unwrap();
        let solver = DirectSolver::new(g);
        let rho = ScalarFieldRZ::from_fn(g, Parity::Even, |r, z| (-r * r - z * z).exp());
        let f = ScalarFieldRZ::from_fn(g, Parity::Odd, |r, z| r * (-r * r - z * z).exp());
        ld.push(lemma_ld_residual(&solver, &rho).unwrap().relative);
        e1.push(lemma_e1_residual(&solver, &f).unwrap().relative);
    }
    (ld, e1)
}

// least-squares slope over the h in {1/16, 1/32, 1/64} ladder
fn fitted_order(res: &[f64]) -> f64 {
    let x: Vec<f64> = (0..res.len()).map(|i| -((16u32 << i) as f64).ln()).collect();
    let y: Vec<f64> = res.iter().map(|r| r.ln()).collect();
    let n = x.len() as f64;
    let (sx, sy): (f64, f64) = (x.iter().sum(), y.iter().sum());
    let sxx: f64 = x.iter().map(|v| v * v).sum();
    let sxy: f64 = x.iter().zip(&y).map(|(a, b)| a * b).sum();
    (n * sxy - sx * sy) / (n * sxx - sx * sx)
}

fn order_verdict(name: &str, res: &[f64]) {
    // The discrete sides can agree to rounding (the stencils commute
    // exactly on the interior window); that is stronger than any power of
    // h, and a log-log fit to rounding noise would be meaningless.
    let worst = res.iter().cloned().fold(0.0f64, f64::max);
    if worst <= 1e-10 {
        verdict(
            name,
            true,
            &format!("residuals at rounding level (max {worst:.2e}), stronger than h^2"),
        );
        return;
    }
    let order = fitted_order(res);
    verdict(
        name,
        order >= 1.9,
        &format!(
            "fitted order {order:.3} (required >= 1.9); residuals {}",
            res.iter().map(|r| format!("{r:.3e}")).collect::<Vec<_>>().join(", ")
        ),
    );
}

// The box must be wide enough that the Dirichlet truncation floor of the
// inverse operator stays below the h = 1/64 stencil error.
const IDENTITY_BOX: f64 = 20.0;

fn cached_identity_residuals() -> &'static (Vec<f64>, Vec<f64>) {
    static CACHE: std::sync::OnceLock<(Vec<f64>, Vec<f64>)> = std::sync::OnceLock::new();
    CACHE.get_or_init(|| identity_residuals(IDENTITY_BOX))
}

#[test]
fn criterion_04_first_identity_second_order() {
    let (ld, _) = cached_identity_residuals();
    order_verdict("criterion 04 (commutation identity order)", ld);
}

#[test]
fn criterion_05_second_identity_second_order() {
    let (_, e1) = cached_identity_residuals();
    order_verdict("criterion 05 (derivative-exchange identity order)", e1);
}

#[test]
fn criterion_06_operator_lp_ratio_stability() {
    let grids = [
        make_grid(128, 256, 4.0, -4.0, 4.0).unwrap(),
        make_grid(256, 512, 4.0, -4.0, 4.0).unwrap(),
        make_grid(256, 512, 8.0, -8.0, 8.0).unwrap(),
    ];
    let solvers: Vec<DirectSolver> = grids.iter().map(|&g| DirectSolver::new(g)).collect();
    let mut rng = ChaCha8Rng::seed_from_u64(61);
    let all_params: Vec<_> = (0..20).map(|_| bump_params(&mut rng)).collect();
    let ps = [2.0, 4.0, 6.0];
    // max over the 20 fields of ||L rho||_p / ||rho||_p, per grid and p
    let mut max_ratio = [[0.0f64; 3]; 3];
    for params in &all_params {
        for (gi, (g, solver)) in grids.iter().zip(&solvers).enumerate() {
            let rho = bumps_on(*g, params);
            let lf = op_l(solver, &rho).unwrap().f;
            for (pi, &p) in ps.iter().enumerate() {
                max_ratio[gi][pi] = max_ratio[gi][pi].max(lf.lp_norm(p) / rho.lp_norm(p));
            }
        }
    }
    let mut worst = 0.0f64;
    for pi in 0..3 {
        let base = max_ratio[0][pi];
        worst = worst.max((max_ratio[1][pi] / base - 1.0).abs());
        worst = worst.max((max_ratio[2][pi] / base - 1.0).abs());
    }
    verdict(
        "criterion 06 (L^p boundedness of the inverse operator)",
        worst <= 0.20,
        &format!("max ratio drift {worst:.3} under refinement/domain doubling, tolerance 0.20"),
    );
}

#[test]
fn criterion_07_epsilon_uniformity() {
    let g = grid_std();
    let solver = DirectSolver::new(g);
    let mut rng = ChaCha8Rng::seed_from_u64(7);
    let rho = bumps_on(g, &bump_params(&mut rng));
    let base = op_l(&solver, &rho).unwrap().f;
    let ps = [2.0, 4.0, 6.0];
    let base_norms: Vec<f64> = ps.iter().map(|&p| base.lp_norm(p)).collect();
    let mut worst_drift = 0.0f64;
    let mut diffs = Vec::new();
    for eps in [1e-1, 1e-2, 1e-3, 1e-4] {
        let fe = op_l_regularized(&solver, &rho, eps).unwrap().f;
        for (pi, &p) in ps.iter().enumerate() {
            worst_drift = worst_drift.max((fe.lp_norm(p) / base_norms[pi] - 1.0).abs());
        }
        diffs.push(fe.axpy(1.0, -1.0, &base).unwrap().lp_norm(2.0));
    }
    let monotone = diffs.windows(2).all(|w| w[1] < w[0]);
    verdict(
        "criterion 07 (epsilon-regularized operator uniformity)",
        worst_drift <= 0.20 && monotone,
        &format!(
            "max norm drift {worst_drift:.3} (tol 0.20), ||f_eps - f_0|| = {} decreasing: {monotone}",
            diffs.iter().map(|d| format!("{d:.3e}")).collect::<Vec<_>>().join(", ")
        ),
    );
}

#[test]
fn criterion_08_weighted_interpolation_inequality() {
    let g = make_grid(128, 256, 5.0, -5.0, 5.0).unwrap();
    let h = g.dr().max(g.dz());
    let floor = 1.0 - 10.0 * h * h;
    let mut rng = ChaCha8Rng::seed_from_u64(8);
    let mut min_ratio = f64::INFINITY;
    for _ in 0..20 {
        let f = bumps_on(g, &bump_params(&mut rng));
        for p in [2.0, 3.0, 4.0] {
            min_ratio = min_ratio.min(ckn_check(&f, p).unwrap().ratio);
        }
    }
    let gauss = ScalarFieldRZ::from_fn(g, Parity::Even, |r, z| (-r * r - z * z).exp());
    let gauss_ratio = ckn_check(&gauss, 2.0).unwrap().ratio;
    let sharp = (gauss_ratio - 2.0).abs() <= 0.04;
    verdict(
        "criterion 08 (weighted interpolation inequality)",
        min_ratio >= floor && sharp,
        &format!(
            "min ratio {min_ratio:.4} (floor {floor:.4}); Gaussian p=2 ratio {gauss_ratio:.4} vs 2.0 +/- 2%"
        ),
    );
}

#[test]
fn criterion_09_partition_identities_and_reconstruction() {
    let g = grid_std();
    let partition = DyadicPartition::for_grid(&g).unwrap();
    let basis = SpectralBasis::new(g);
    let mut tel_err = 0.0f64;
    let top = 2f64.powi(partition.qmax);
    for k in 0..2000 {
        let xi = 1e-3 + (k as f64 / 2000.0) * top;
        let mut s = partition.symbol(-1, xi);
        for q in 0..=partition.qmax {
            s += partition.symbol(q, xi);
        }
        tel_err = tel_err.max((s - 1.0).abs());
    }
    let mut rng = ChaCha8Rng::seed_from_u64(9);
    let mut raw = ScalarFieldRZ::zeros(g, Parity::Even);
    for v in raw.values.iter_mut() {
        *v = rng.gen_range(-1.0..1.0);
    }
    let f = mollify(&basis, &raw, partition.qmax - 1).unwrap();
    let dec = decompose(&basis, &f).unwrap();
    let mut recon = ScalarFieldRZ::zeros(g, Parity::Even);
    for q in -1..=partition.qmax {
        recon = recon.axpy(1.0, 1.0, dec.block(q)).unwrap();
    }
    let rec_err = recon.axpy(1.0, -1.0, &f).unwrap().lp_norm(2.0) / f.lp_norm(2.0);
    verdict(
        "criterion 09 (dyadic partition identities)",
        tel_err <= 1e-12 && rec_err <= 1e-10,
        &format!("telescoping error {tel_err:.2e} (tol 1e-12), reconstruction {rec_err:.2e} (tol 1e-10)"),
    );
}

#[test]
fn criterion_10_block_derivative_brackets() {
    let g = grid_std();
    let partition = DyadicPartition::for_grid(&g).unwrap();
    let basis = SpectralBasis::new(g);
    let mut rng = ChaCha8Rng::seed_from_u64(10);
    let mut raw = ScalarFieldRZ::zeros(g, Parity::Even);
    for v in raw.values.iter_mut() {
        *v = rng.gen_range(-1.0..1.0);
    }
    let f = mollify(&basis, &raw, partition.qmax).unwrap();
    let mut pass = true;
    let mut detail = String::new();
    for q in 1..partition.qmax {
        let chk = bernstein_check(&basis, &f, q).unwrap();
        pass &= chk.pass;
        detail.push_str(&format!("q={q} ratio {:.2} in [{:.2}, {:.2}]; ", chk.ratio, chk.lower, chk.upper));
    }
    verdict("criterion 10 (block derivative brackets)", pass, &detail);
}

#[test]
fn criterion_11_besov_growth_constant() {
    let mut fits = Vec::new();
    let mut pass = true;
    for kappa in [0.0, 1.0] {
        let mut pair = Vec::new();
        for (nr, nz) in [(64usize, 128usize), (128, 256)] {
            let g = make_grid(nr, nz, 4.0, -4.0, 4.0).unwrap();
            let series = run_series(
                presets::vortex_ring(g, 1.0, 0.5).unwrap(),
                kappa,
                1.0,
                true,
                10,
            );
            let rep = check_log_estimate(&series, 1e8).unwrap();
            let c = rep.fitted_constants[0].1;
            pass &= c.is_finite() && rep.pass();
            pair.push(c);
        }
        let drift = (pair[1] / pair[0] - 1.0).abs();
        pass &= drift <= 0.20;
        fits.push((kappa, pair[0], pair[1], drift));
    }
    verdict(
        "criterion 11 (dyadic-norm growth constant)",
        pass,
        &format!("(kappa, C_coarse, C_fine, drift) = {fits:.3?}, drift tolerance 0.20"),
    );
}

#[test]
fn criterion_12_near_one_source_scaling() {
    let g = grid_std();
    let mut excesses = Vec::new();
    for kappa in [0.6, 0.8, 0.9, 0.99] {
        let rho = presets::gaussian_blob(g, 0.5).unwrap().rho;
        let zeta = rho.scaled(0.5); // Gamma_1(0) = 0: growth is purely source-driven
        let state = SimState::new(rho, zeta).unwrap();
        let series = run_series(state, kappa, 1.0, false, 2);
        let t: Vec<f64> = series.rows.iter().map(|r| r.t).collect();
        let gg: Vec<f64> = series
            .rows
            .iter()
            .map(|r| r.grad_gamma_l2 * r.grad_gamma_l2)
            .collect();
        let mut int_gg = 0.0;
        let mut lhs_max = 0.0f64;
        for i in 0..t.len() {
            if i > 0 {
                int_gg += 0.5 * (gg[i] + gg[i - 1]) * (t[i] - t[i - 1]);
            }
            let r = &series.rows[i];
            lhs_max = lhs_max.max(r.l2_gamma * r.l2_gamma + int_gg);
        }
        excesses.push(lhs_max);
    }
    let positive = excesses.iter().all(|&e| e > 0.0);
    let decreasing = excesses.windows(2).all(|w| w[1] < w[0]);
    verdict(
        "criterion 12 (near-one energy source shrinks toward kappa = 1)",
        positive && decreasing,
        &format!(
            "Gamma_1 energy excess along kappa in [0.6, 0.8, 0.9, 0.99]: {}",
            excesses.iter().map(|e| format!("{e:.3e}")).collect::<Vec<_>>().join(", ")
        ),
    );
}

#[test]
fn criterion_13_perturbation_linearity() {
    let g = grid_std();
    let sim = Simulation::new(g, StepConfig::new(DT, 0.5, AdvectionScheme::Upwind2)).unwrap();
    let a0 = presets::vortex_ring(g, 1.0, 0.5).unwrap();
    let mut sups = Vec::new();
    for delta0 in [1e-3, 1e-4] {
        let mut b0 = a0.clone();
        let bump = ScalarFieldRZ::from_fn(g, Parity::Even, |r, z| {
            delta0 * (-r * r - z * z).exp()
        });
        b0.rho = b0.rho.axpy(1.0, 1.0, &bump).unwrap();
        let res = check_stability(&sim, &a0, &b0, 1.0, 1e6).unwrap();
        sups.push((res.sup_dv_h1, res.sup_drho_hm1));
    }
    let rv = sups[0].0 / sups[1].0;
    let rr = sups[0].1 / sups[1].1;
    let pass = (5.0..=20.0).contains(&rv) && (5.0..=20.0).contains(&rr);
    verdict(
        "criterion 13 (perturbation growth is linear in the seed)",
        pass,
        &format!(
            "10x seed gave dv ratio {rv:.2}, drho ratio {rr:.2}; required within factor 2 of 10"
        ),
    );
}

#[test]
fn criterion_14_mutation_self_test() {
    let g = make_grid(64, 128, 4.0, -4.0, 4.0).unwrap();
    let clean = run_series(presets::vortex_ring(g, 1.0, 0.5).unwrap(), 0.0, 0.5, false, 1);
    let zeta_guard = 2.0 * check_zeta_envelope(&clean, 1e8).unwrap().fitted_constants[0].1;
    let gamma_guard = 2.0 * check_gamma_energy(&clean, 1e8).unwrap().fitted_constants[0].1;
    let checks: Vec<(&str, Box<dyn Fn(&Series) -> bool>)> = vec![
        ("max_principle_p2", Box::new(|s: &Series| check_max_principle(s, 2.0, 0.01).unwrap().pass())),
        ("max_principle_pinf", Box::new(|s: &Series| check_max_principle(s, f64::INFINITY, 0.01).unwrap().pass())),
        ("energy", Box::new(|s: &Series| check_energy(s, 0.05).unwrap().pass())),
        ("zeta_envelope", Box::new(move |s: &Series| check_zeta_envelope(s, zeta_guard).unwrap().pass())),
        ("gamma_energy", Box::new(move |s: &Series| check_gamma_energy(s, gamma_guard).unwrap().pass())),
    ];
    for (name, check) in &checks {
        assert!(check(&clean), "clean series fails {name}");
    }
    let splices = [
        ("l2_rho", 3.0, "max_principle_p2"),
        ("linf_rho", 3.0, "max_principle_pinf"),
        ("l2_v", 2.0, "energy"),
        ("l2_zeta", 50.0, "zeta_envelope"),
        ("l2_gamma", 50.0, "gamma_energy"),
    ];
    let mut pass = true;
    let mut detail = String::new();
    for (column, factor, target) in splices {
        let mut mutated = clean.clone();
        let mid = mutated.rows.len() / 2;
        splice_series(&mut mutated, column, factor, mid).unwrap();
        for (name, check) in &checks {
            let ok = check(&mutated);
            let expected = *name != target;
            if ok != expected {
                pass = false;
                detail.push_str(&format!("splice {column} x{factor}: {name} pass={ok}, expected {expected}; "));
            }
        }
    }
    if detail.is_empty() {
        detail = "every splice failed exactly its targeted check".to_string();
    }
    verdict("criterion 14 (mutation self-test)", pass, &detail);
}
