//! Command-line front end: `run` sweeps kappa and records series plus
//! checkpoints, `verify` runs the non-evolution property suite, `convergence`
//! emits refinement tables, `plotdata` reshapes recorded series for plotting.

use std::fmt::Write as _;
use std::fs;
use std::path::{Path, PathBuf};

use clap::{Args, Parser, Subcommand};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::checkpoint::{write_checkpoint, CheckpointData};
use crate::config::{parse_config, ExperimentConfig};
use crate::coupling::{lemma_e1_residual, lemma_ld_residual, near_one};
use crate::error::{Error, Result};
use crate::evolve::{SimState, Simulation, StepConfig};
use crate::grid::{make_grid, GridSpec, Parity, ScalarFieldRZ, VelocityRZ};
use crate::lpbesov::{bernstein_check, decompose, mollify, DyadicPartition};
use crate::monitor::{
    check_energy, check_gamma1_energy, check_gamma_energy, check_hls, check_log_estimate,
    check_max_principle, check_stability, check_zeta_envelope, EstimateReport, Recorder,
};
use crate::presets;
use crate::singell::{ckn_check, manufactured_f, manufactured_rho, op_l};
use crate::solver::DirectSolver;
use crate::spectral::SpectralBasis;

#[derive(Parser)]
#[command(name = "axibouss", about = "Axisymmetric Boussinesq vorticity laboratory")]
struct Cli {
    #[command(subcommand)]
    cmd: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Evolve the configured initial data over the kappa sweep.
    Run(CommonArgs),
    /// Run the operator and inequality property suite (no time stepping).
    Verify(CommonArgs),
    /// Write grid-refinement tables for the elliptic operator and identities.
    Convergence(CommonArgs),
    /// Reshape recorded series into per-column plot files.
    Plotdata(CommonArgs),
}

#[derive(Args)]
struct CommonArgs {
    /// TOML experiment configuration; defaults apply when omitted.
    #[arg(long)]
    config: Option<PathBuf>,
    /// Output directory, overriding the configured one.
    #[arg(long)]
    out: Option<PathBuf>,
    /// Single diffusivity, overriding the configured sweep.
    #[arg(long)]
    kappa: Option<f64>,
    /// Seed for randomized property checks.
    #[arg(long, default_value_t = 0)]
    seed: u64,
}

pub fn run_cli() -> i32 {
    let cli = Cli::parse();
    let (args, run): (&CommonArgs, fn(&ExperimentConfig, u64) -> Result<bool>) = match &cli.cmd {
        Command::Run(a) => (a, cmd_run),
        Command::Verify(a) => (a, cmd_verify),
        Command::Convergence(a) => (a, cmd_convergence),
        Command::Plotdata(a) => (a, cmd_plotdata),
    };
    match load_config(args).and_then(|cfg| run(&cfg, args.seed)) {
        Ok(true) => 0,
        Ok(false) => 1,
        Err(e) => {
            eprintln!("error: {e}");
            1
        }
    }
}

fn load_config(args: &CommonArgs) -> Result<ExperimentConfig> {
    let mut cfg = match &args.config {
        Some(path) => parse_config(&fs::read_to_string(path)?)?,
        None => ExperimentConfig::default(),
    };
    if let Some(out) = &args.out {
        cfg.output.directory = out.to_string_lossy().into_owned();
    }
    if let Some(k) = args.kappa {
        if k < 0.0 {
            return Err(Error::Config(format!("--kappa must be >= 0, got {k}")));
        }
        cfg.physics.kappa = k;
        cfg.physics.kappa_sweep = vec![k];
    }
    Ok(cfg)
}

fn build_state(cfg: &ExperimentConfig, g: GridSpec) -> Result<SimState> {
    match cfg.init.preset.as_str() {
        "zero" => presets::zero(g),
        "gaussian" => presets::gaussian_blob(g, cfg.init.rho_amp),
        "vortex_ring" => presets::vortex_ring(g, cfg.init.zeta_amp, cfg.init.rho_amp),
        other => Err(Error::Config(format!("unknown preset '{other}'"))),
    }
}

fn kappa_tag(kappa: f64) -> String {
    format!("{kappa}").replace('.', "p")
}

fn save_checkpoint(
    dir: &Path,
    name: &str,
    sim: &Simulation,
    state: &SimState,
) -> Result<()> {
    let vel = sim
        .velocity(state)
        .unwrap_or_else(|_| VelocityRZ::zeros(state.grid()));
    write_checkpoint(
        &dir.join(name),
        &CheckpointData {
            t: state.t,
            kappa: sim.cfg.kappa,
            rho: state.rho.clone(),
            zeta: state.zeta.clone(),
            vel,
        },
    )
}

struct VerdictRow {
    name: String,
    pass_count: usize,
    fail_count: usize,
    fitted_constant: f64,
    tolerance: f64,
}

impl VerdictRow {
    fn from_report(name: String, rep: &EstimateReport) -> Self {
        Self {
            name,
            pass_count: rep.pass_count(),
            fail_count: rep.fail_count(),
            fitted_constant: rep
                .fitted_constants
                .first()
                .map(|(_, c)| *c)
                .unwrap_or(f64::NAN),
            tolerance: rep.tolerance,
        }
    }
}

fn write_verdict(dir: &Path, rows: &[VerdictRow]) -> Result<()> {
    let mut out = String::from("name,pass_count,fail_count,fitted_constant,tolerance\n");
    for r in rows {
        writeln!(
            out,
            "{},{},{},{:.17e},{:.17e}",
            r.name, r.pass_count, r.fail_count, r.fitted_constant, r.tolerance
        )
        .unwrap();
    }
    fs::write(dir.join("verdict.csv"), out)?;
    Ok(())
}

/// Runs one check against a series, tolerating branch or degeneracy
/// mismatches that are expected across a kappa sweep (for example the
/// near-one energy bound at kappa far from one, or the swirl ratio on data
/// with no vorticity).
fn run_check(
    verdict: &mut Vec<VerdictRow>,
    name: String,
    res: Result<EstimateReport>,
) -> Result<bool> {
    match res {
        Ok(rep) => {
            let ok = rep.pass();
            println!(
                "{} {} ({}/{} rows)",
                if ok { "PASS" } else { "FAIL" },
                name,
                rep.pass_count(),
                rep.rows.len()
            );
            verdict.push(VerdictRow::from_report(name, &rep));
            Ok(ok)
        }
        Err(
            Error::NearOneBranch { .. } | Error::WrongBranch { .. } | Error::DegenerateInput(_),
        ) => {
            println!("SKIP {name}");
            Ok(true)
        }
        Err(e) => Err(e),
    }
}

fn cmd_run(cfg: &ExperimentConfig, _seed: u64) -> Result<bool> {
    cfg.validate()?;
    if cfg
        .monitors
        .enabled
        .iter()
        .any(|n| n == "log_estimate")
        && !cfg.monitors.besov
    {
        return Err(Error::Config(
            "the log_estimate check needs monitors.besov = true".into(),
        ));
    }
    let g = cfg.grid_spec()?;
    let dir = PathBuf::from(&cfg.output.directory);
    fs::create_dir_all(&dir)?;
    let mut all_ok = true;
    let mut verdict = Vec::new();

    for &kappa in &cfg.physics.kappa_sweep {
        let tag = kappa_tag(kappa);
        let mut step_cfg = StepConfig::new(cfg.time.dt, kappa, cfg.time.scheme);
        step_cfg.cfl_max = cfg.time.cfl_max;
        let sim = Simulation::new(g, step_cfg)?;
        let mut state = build_state(cfg, g)?;
        let mut recorder = Recorder::new(g, kappa, cfg.monitors.besov);
        recorder.record_state(&sim, &state)?;

        let mut step_no = 0usize;
        let cadence = cfg.time.cadence;
        let ckpt_cad = cfg.output.checkpoint_cadence;
        let run_res = {
            let recorder = &mut recorder;
            sim.run(&mut state, cfg.time.t_end, |sim, st, _info| {
                step_no += 1;
                if step_no % cadence == 0 {
                    recorder.record_state(sim, st)?;
                }
                if ckpt_cad > 0 && step_no % ckpt_cad == 0 {
                    save_checkpoint(
                        &dir,
                        &format!("checkpoint_kappa_{tag}_step{step_no}.bin"),
                        sim,
                        st,
                    )?;
                }
                Ok(())
            })
        };
        // The final checkpoint and the series recorded so far are written
        // even when the run aborted, so a blow-up leaves its last state.
        save_checkpoint(&dir, &format!("checkpoint_kappa_{tag}_final.bin"), &sim, &state)?;
        fs::write(
            dir.join(format!("series_kappa_{tag}.csv")),
            recorder.series.to_csv(),
        )?;
        if let Err(e) = run_res {
            eprintln!("run kappa = {kappa} aborted at t = {}: {e}", state.t);
            all_ok = false;
            continue;
        }
        println!(
            "run kappa = {kappa}: {} steps to t = {}",
            step_no, state.t
        );

        let series = &recorder.series;
        for check in &cfg.monitors.enabled {
            let ok = match check.as_str() {
                "max_principle" => {
                    let a = run_check(
                        &mut verdict,
                        format!("max_principle_p2_kappa_{tag}"),
                        check_max_principle(series, 2.0, 0.01),
                    )?;
                    let b = run_check(
                        &mut verdict,
                        format!("max_principle_pinf_kappa_{tag}"),
                        check_max_principle(series, f64::INFINITY, 0.01),
                    )?;
                    a && b
                }
                "energy" => run_check(
                    &mut verdict,
                    format!("energy_kappa_{tag}"),
                    check_energy(series, 0.05),
                )?,
                "zeta_envelope" => run_check(
                    &mut verdict,
                    format!("zeta_envelope_kappa_{tag}"),
                    check_zeta_envelope(series, 1e8),
                )?,
                "gamma_energy" => run_check(
                    &mut verdict,
                    format!("gamma_energy_kappa_{tag}"),
                    check_gamma_energy(series, 1e8),
                )?,
                "gamma1_energy" => {
                    if near_one(kappa) && kappa != 1.0 {
                        run_check(
                            &mut verdict,
                            format!("gamma1_energy_kappa_{tag}"),
                            check_gamma1_energy(series, kappa, 0.05),
                        )?
                    } else {
                        true
                    }
                }
                "hls" => run_check(
                    &mut verdict,
                    format!("hls_kappa_{tag}"),
                    check_hls(series),
                )?,
                "log_estimate" => run_check(
                    &mut verdict,
                    format!("log_estimate_kappa_{tag}"),
                    check_log_estimate(series, 1e8),
                )?,
                "stability" => {
                    let a0 = build_state(cfg, g)?;
                    let mut b0 = a0.clone();
                    let bump = ScalarFieldRZ::from_fn(g, Parity::Even, |r, z| {
                        1e-3 * (-r * r - z * z).exp()
                    });
                    b0.rho = b0.rho.axpy(1.0, 1.0, &bump)?;
                    let horizon = cfg.time.t_end.min(0.2);
                    let res = check_stability(&sim, &a0, &b0, horizon, 10.0)?;
                    run_check(
                        &mut verdict,
                        format!("stability_kappa_{tag}"),
                        Ok(res.report),
                    )?
                }
                other => {
                    return Err(Error::Config(format!("unknown check '{other}'")));
                }
            };
            all_ok &= ok;
        }
    }
    write_verdict(&dir, &verdict)?;
    Ok(all_ok)
}

fn rel_l2(a: &ScalarFieldRZ, b: &ScalarFieldRZ) -> Result<f64> {
    let diff = a.axpy(1.0, -1.0, b)?;
    Ok(diff.lp_norm(2.0) / b.lp_norm(2.0).max(1e-300))
}

/// Refinement table for the singular elliptic operator against the closed
/// form: the density (3 - 2r^2 - 2z^2) e^{-r^2 - z^2} maps exactly to
/// e^{-r^2 - z^2}.
fn op_l_table(dir: &Path) -> Result<(String, f64)> {
    let mut out = String::from("h,l2_error,order_estimate,ratio_lp\n");
    let mut prev: Option<(f64, f64)> = None;
    let mut last_order = 0.0;
    for nr in [32usize, 64, 128] {
        let g = make_grid(nr, 2 * nr, 4.0, -4.0, 4.0)?;
        let solver = DirectSolver::new(g);
        let rho = manufactured_rho(g);
        let sol = op_l(&solver, &rho)?;
        let err = rel_l2(&sol.f, &manufactured_f(g))?;
        let ratio = sol.f.lp_norm(2.0) / rho.lp_norm(2.0);
        let h = g.dr();
        let order = match prev {
            Some((hp, ep)) => (ep / err).log2() / (hp / h).log2(),
            None => f64::NAN,
        };
        if order.is_finite() {
            last_order = order;
        }
        writeln!(out, "{h:.17e},{err:.17e},{order:.6},{ratio:.17e}").unwrap();
        prev = Some((h, err));
    }
    fs::write(dir.join("op_l_convergence.csv"), &out)?;
    Ok((out, last_order))
}

/// Refinement table for the two discrete commutation identities. The box is
/// kept wide so the outer-boundary truncation floor of the inverse operator
/// stays below the stencil error on the whole ladder.
fn identity_table(dir: &Path) -> Result<(String, f64)> {
    let mut out = String::from("h,residual_lemld,residual_leme1,order_estimate\n");
    let mut prev: Option<(f64, f64)> = None;
    let mut last_order = 0.0;
    for nr in [24usize, 48, 96] {
        let g = make_grid(nr, 2 * nr, 12.0, -12.0, 12.0)?;
        let solver = DirectSolver::new(g);
        let rho = ScalarFieldRZ::from_fn(g, Parity::Even, |r, z| (-r * r - z * z).exp());
        let f = ScalarFieldRZ::from_fn(g, Parity::Odd, |r, z| r * (-r * r - z * z).exp());
        let ld = lemma_ld_residual(&solver, &rho)?.relative;
        let e1 = lemma_e1_residual(&solver, &f)?.relative;
        let worst = ld.max(e1);
        let h = g.dr();
        let order = match prev {
            Some((hp, ep)) => (ep / worst).log2() / (hp / h).log2(),
            None => f64::NAN,
        };
        if order.is_finite() {
            last_order = order;
        }
        writeln!(out, "{h:.17e},{ld:.17e},{e1:.17e},{order:.6}").unwrap();
        prev = Some((h, worst));
    }
    fs::write(dir.join("identity_convergence.csv"), &out)?;
    Ok((out, last_order))
}

fn random_band_limited(
    basis: &SpectralBasis,
    rng: &mut ChaCha8Rng,
    cut: i32,
) -> Result<ScalarFieldRZ> {
    let mut f = ScalarFieldRZ::zeros(basis.grid(), Parity::Even);
    for v in f.values.iter_mut() {
        *v = rng.gen_range(-1.0..1.0);
    }
    mollify(basis, &f, cut)
}

fn cmd_verify(cfg: &ExperimentConfig, seed: u64) -> Result<bool> {
    cfg.validate()?;
    let g = cfg.grid_spec()?;
    let partition = DyadicPartition::for_grid(&g)?;
    let dir = PathBuf::from(&cfg.output.directory);
    fs::create_dir_all(&dir)?;
    let mut results: Vec<(String, f64, bool)> = Vec::new();
    let mut record = |name: &str, value: f64, pass: bool| {
        println!("{} {} (value {:.4e})", if pass { "PASS" } else { "FAIL" }, name, value);
        results.push((name.to_string(), value, pass));
    };

    let (_, order) = op_l_table(&dir)?;
    record("op_l_convergence_order", order, order >= 1.9);
    let (_, id_order) = identity_table(&dir)?;
    record("identity_convergence_order", id_order, id_order >= 1.5);

    // Randomized weighted-interpolation checks on band-limited data.
    let basis = SpectralBasis::new(g);
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let h = g.dr().max(g.dz());
    let floor = 1.0 - 10.0 * h * h;
    let mut min_ratio = f64::INFINITY;
    for _ in 0..5 {
        let f = random_band_limited(&basis, &mut rng, partition.qmax - 1)?;
        for p in [2.0, 3.0, 4.0] {
            min_ratio = min_ratio.min(ckn_check(&f, p)?.ratio);
        }
    }
    record("ckn_min_ratio", min_ratio, min_ratio >= floor);

    // Partition of unity and block reconstruction.
    let mut tel_err = 0.0f64;
    for k in 0..400 {
        let xi = 1e-3 + k as f64 * 0.25;
        let mut s = partition.symbol(-1, xi);
        for q in 0..=partition.qmax {
            s += partition.symbol(q, xi);
        }
        if xi <= 2f64.powi(partition.qmax) {
            tel_err = tel_err.max((s - 1.0).abs());
        }
    }
    record("partition_telescoping", tel_err, tel_err <= 1e-12);

    let f = random_band_limited(&basis, &mut rng, partition.qmax - 1)?;
    let dec = decompose(&basis, &f)?;
    let mut recon = ScalarFieldRZ::zeros(g, Parity::Even);
    for q in -1..=partition.qmax {
        recon = recon.axpy(1.0, 1.0, dec.block(q))?;
    }
    let rec_err = rel_l2(&recon, &f)?;
    record("partition_reconstruction", rec_err, rec_err <= 1e-10);

    let mut bern_ok = true;
    let mut worst_margin = f64::INFINITY;
    for q in 1..partition.qmax {
        let chk = bernstein_check(&basis, &f, q)?;
        bern_ok &= chk.pass;
        worst_margin = worst_margin
            .min(chk.ratio / chk.lower)
            .min(chk.upper / chk.ratio);
    }
    record("bernstein_brackets", worst_margin, bern_ok);

    let mut out = String::from("name,value,pass\n");
    for (name, value, pass) in &results {
        writeln!(out, "{name},{value:.17e},{pass}").unwrap();
    }
    fs::write(dir.join("verify_results.csv"), out)?;
    Ok(results.iter().all(|(_, _, p)| *p))
}

fn cmd_convergence(cfg: &ExperimentConfig, _seed: u64) -> Result<bool> {
    let dir = PathBuf::from(&cfg.output.directory);
    fs::create_dir_all(&dir)?;
    let (table, order) = op_l_table(&dir)?;
    print!("{table}");
    let (table, id_order) = identity_table(&dir)?;
    print!("{table}");
    Ok(order >= 1.9 && id_order >= 1.5)
}

fn parse_series_csv(text: &str) -> Result<(Vec<String>, Vec<Vec<f64>>)> {
    let mut lines = text.lines();
    let header: Vec<String> = lines
        .next()
        .ok_or_else(|| Error::MissingSeries("empty series file".into()))?
        .split(',')
        .map(str::to_string)
        .collect();
    let mut rows = Vec::new();
    for line in lines {
        if line.trim().is_empty() {
            continue;
        }
        let row: std::result::Result<Vec<f64>, _> =
            line.split(',').map(str::parse::<f64>).collect();
        let row = row.map_err(|e| Error::MissingSeries(format!("bad series row: {e}")))?;
        if row.len() != header.len() {
            return Err(Error::MissingSeries("ragged series row".into()));
        }
        rows.push(row);
    }
    Ok((header, rows))
}

fn cmd_plotdata(cfg: &ExperimentConfig, _seed: u64) -> Result<bool> {
    let dir = PathBuf::from(&cfg.output.directory);
    if !dir.is_dir() {
        return Err(Error::MissingRun(format!(
            "no run directory at {}",
            dir.display()
        )));
    }
    let mut series_files: Vec<PathBuf> = fs::read_dir(&dir)?
        .filter_map(|e| e.ok().map(|e| e.path()))
        .filter(|p| {
            p.file_name()
                .and_then(|n| n.to_str())
                .map(|n| n.starts_with("series_kappa_") && n.ends_with(".csv"))
                .unwrap_or(false)
        })
        .collect();
    series_files.sort();
    if series_files.is_empty() {
        return Err(Error::MissingRun(format!(
            "no series files in {}",
            dir.display()
        )));
    }
    let mut overlay = String::from("kappa,t,l2_rho,l2_zeta\n");
    for path in &series_files {
        let stem = path.file_stem().unwrap().to_string_lossy().into_owned();
        let tag = stem.trim_start_matches("series_kappa_").to_string();
        let kappa: f64 = tag
            .replace('p', ".")
            .parse()
            .map_err(|_| Error::MissingRun(format!("unparseable kappa tag in {stem}")))?;
        let (header, rows) = parse_series_csv(&fs::read_to_string(path)?)?;
        let t_col = header
            .iter()
            .position(|c| c == "t")
            .ok_or_else(|| Error::MissingSeries("series lacks a t column".into()))?;
        for (c, name) in header.iter().enumerate() {
            if c == t_col {
                continue;
            }
            let mut out = format!("# t {name}\n");
            for row in &rows {
                writeln!(out, "{:.17e} {:.17e}", row[t_col], row[c]).unwrap();
            }
            fs::write(dir.join(format!("plot_{name}_kappa_{tag}.dat")), out)?;
        }
        let rho_col = header.iter().position(|c| c == "l2_rho");
        let zeta_col = header.iter().position(|c| c == "l2_zeta");
        if let (Some(rc), Some(zc)) = (rho_col, zeta_col) {
            for row in &rows {
                writeln!(
                    overlay,
                    "{kappa},{:.17e},{:.17e},{:.17e}",
                    row[t_col], row[rc], row[zc]
                )
                .unwrap();
            }
        }
    }
    fs::write(dir.join("overlay_kappa_sweep.csv"), overlay)?;
    println!("plot data written for {} series", series_files.len());
    Ok(true)
}
