use std::path::{Path, PathBuf};
use std::process::ExitCode;

use anyhow::{bail, Context};
use clap::{Parser, Subcommand};
use phasefield_core::energy::DiscreteEnergy;
use phasefield_core::inequalities::{
    check_boundary_identity, check_jensen, check_linear_interpolation, estimate_k0_field, gn_scan,
    k1_search, lower_bound_k1, minimize_quadratic_family, random_jensen_field, random_smooth_field,
    DEFAULT_L_GRID, GN_EMPIRICAL_CONSTANT,
};
use phasefield_core::optimizer::minimize_from_starts;
use phasefield_core::profile::optimal_profile;
use phasefield_core::{make_grid, EnergyParams, Execution, SolveOptions};
use phasefield_lab::sweep::{random_initial, tanh_initial};
use phasefield_lab::{
    blowup_probe, count_oscillations, count_transitions, emit_report, gamma_limit_table, run_sweep,
    ExperimentConfig, ReportFormat, TRANSITION_THRESHOLD,
};
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use serde::Serialize;

#[derive(Parser)]
#[command(
    name = "phasefield",
    version,
    about = "Second-order phase-transition energy experiments"
)]
struct Cli {
    /// Seed for every random choice.
    #[arg(long, global = true, default_value_t = 0)]
    seed: u64,
    /// Output file (output directory for `sweep`); stdout when omitted.
    #[arg(long, global = true)]
    out: Option<PathBuf>,
    /// Output format.
    #[arg(long, global = true, value_enum)]
    format: Option<ReportFormat>,
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Minimize F_ε^k for one (k, ε) of a configuration file and write the minimizer.
    Minimize {
        #[arg(long)]
        config: PathBuf,
        /// Defaults to the first entry of k_values.
        #[arg(long)]
        k: Option<f64>,
        /// Defaults to the first entry of epsilon_values.
        #[arg(long)]
        epsilon: Option<f64>,
    },
    /// Optimal transition profile and its energy m_k.
    Profile {
        #[arg(long, default_value_t = 0.0)]
        k: f64,
        /// Initial truncation half-length.
        #[arg(long, default_value_t = 8.0)]
        t: f64,
        #[arg(long, default_value_t = 801)]
        n: usize,
    },
    /// Upper estimate of the interpolation constant k₀.
    K0 {
        #[arg(long, default_value_t = 1001)]
        n: usize,
        #[arg(long, default_value_t = 8)]
        starts: usize,
    },
    /// Upper estimate of the interpolation constant k₁.
    K1 {
        #[arg(long, default_value_t = 2001)]
        n: usize,
        #[arg(long, default_value_t = 8)]
        starts: usize,
        /// Half-lengths to search, comma separated.
        #[arg(long, value_delimiter = ',')]
        l_values: Option<Vec<f64>>,
    },
    /// Closed-form lower and upper bounds on k₁.
    Bounds,
    /// Run a (k, ε) sweep from a configuration file and write reports.
    Sweep {
        #[arg(long)]
        config: PathBuf,
    },
    /// Minimum energies with forced transitions against jumps · m_k.
    Gamma {
        #[arg(long, default_value_t = 0.05)]
        k: f64,
        #[arg(long, value_delimiter = ',', default_value = "0.1,0.05,0.025")]
        epsilons: Vec<f64>,
        #[arg(long, default_value_t = 1)]
        jumps: usize,
    },
    /// Free-end minima in the oscillatory regime.
    Blowup {
        #[arg(long, default_value_t = 1.2)]
        k: f64,
        #[arg(long, value_delimiter = ',', default_value = "0.1,0.05,0.025")]
        epsilons: Vec<f64>,
        #[arg(long, default_value_t = 4)]
        starts: usize,
    },
    /// Randomized checks of the interpolation inequalities.
    Verify {
        #[arg(long, default_value_t = 100)]
        count: usize,
    },
}

fn write_output(out: Option<&Path>, body: &str) -> anyhow::Result<()> {
    match out {
        Some(path) => {
            std::fs::write(path, body).with_context(|| format!("writing {}", path.display()))
        }
        None => {
            print!("{body}");
            Ok(())
        }
    }
}

fn table<T: Serialize>(rows: &[T], format: ReportFormat) -> anyhow::Result<String> {
    match format {
        ReportFormat::Json => Ok(serde_json::to_string_pretty(rows)? + "\n"),
        ReportFormat::Csv => {
            let mut w = csv::Writer::from_writer(Vec::new());
            for r in rows {
                w.serialize(r)?;
            }
            Ok(String::from_utf8(w.into_inner()?)?)
        }
        ReportFormat::Svg => bail!("svg output is only available for sweep"),
    }
}

fn json<T: Serialize>(value: &T) -> anyhow::Result<String> {
    Ok(serde_json::to_string_pretty(value)? + "\n")
}

/// Exit status 2 marks a completed run whose checks failed.
enum Outcome {
    Ok,
    CheckFailed,
}

fn run(cli: Cli) -> anyhow::Result<Outcome> {
    let out = cli.out.as_deref();
    let opts = SolveOptions {
        seed: cli.seed,
        ..SolveOptions::default()
    };
    match cli.command {
        Command::Minimize { config, k, epsilon } => {
            let cfg = ExperimentConfig::load(&config)?;
            for w in cfg.warnings() {
                eprintln!("warning: {w}");
            }
            let k = k.unwrap_or(cfg.k_values[0]);
            let eps = epsilon.unwrap_or(cfg.epsilon_values[0]);
            let grid = cfg.grid()?;
            let bc = &cfg.boundary;
            let energy =
                DiscreteEnergy::scaled(grid, bc, &EnergyParams::new(eps, k, cfg.potential()?)?);
            let starts = [
                random_initial(grid, eps, bc, cli.seed),
                tanh_initial(grid, eps, bc),
            ];
            let rep = minimize_from_starts(&starts, &energy, bc, &cfg.solve_options(cli.seed))?;
            eprintln!(
                "energy {:.10} iterations {} {:?} transitions {} oscillations {}",
                rep.energy,
                rep.iterations,
                rep.termination,
                count_transitions(&rep.minimizer, TRANSITION_THRESHOLD),
                count_oscillations(&rep.minimizer)
            );
            let body = match cli.format.unwrap_or(ReportFormat::Csv) {
                ReportFormat::Csv => rep.minimizer.to_csv(),
                ReportFormat::Json => rep.minimizer.to_json()? + "\n",
                ReportFormat::Svg => bail!("svg output is only available for sweep"),
            };
            write_output(out, &body)?;
        }
        Command::Profile { k, t, n } => {
            let r = optimal_profile(k, t, n, &opts)?;
            let body = match cli.format.unwrap_or(ReportFormat::Json) {
                ReportFormat::Csv => r.profile.to_csv(),
                ReportFormat::Json => json(&serde_json::json!({
                    "k": r.k,
                    "m_k": r.m_k,
                    "T": r.truncation_t,
                    "n": r.n,
                    "tail_residual": r.tail_residual,
                    "truncation_delta": r.truncation_delta,
                    "resolution_delta": r.resolution_delta,
                    "converged": r.converged,
                }))?,
                ReportFormat::Svg => bail!("svg output is only available for sweep"),
            };
            write_output(out, &body)?;
            if !r.converged {
                return Ok(Outcome::CheckFailed);
            }
        }
        Command::K0 { n, starts } => {
            let r = estimate_k0_field(
                n,
                &SolveOptions {
                    multistart_count: starts,
                    ..opts
                },
            )?;
            write_output(
                out,
                &json(&serde_json::json!({"k0": r.quotient, "n": r.n, "converged": r.converged}))?,
            )?;
        }
        Command::K1 {
            n,
            starts,
            l_values,
        } => {
            let ls = l_values.unwrap_or_else(|| DEFAULT_L_GRID.to_vec());
            let r = k1_search(
                &ls,
                n,
                &SolveOptions {
                    multistart_count: starts,
                    ..opts
                },
            )?;
            write_output(
                out,
                &json(
                    &serde_json::json!({"L": r.l, "quotient": r.quotient, "converged": r.converged, "n": r.n}),
                )?,
            )?;
        }
        Command::Bounds => {
            let lower = lower_bound_k1();
            let upper = minimize_quadratic_family();
            let exact = 2.0 * (3.0 * (2.0 * (128.0f64 * 315.0).sqrt() - 336.0) / 1680.0).sqrt();
            let body = format!(
                "lower  inf_L max{{2/L^2, 1/max{{8, 2(1+12/L^2)^2}}}} = {:.9} (attained for L >= {:.4})\n\
                 upper  min_(h,L) (I1+I2)/I3, I1 = L(128h^8-336h^4+315)/1260, I2 = 4h^4/L^3, I3 = 4h^4/(3L)\n\
                 \x20      = {:.9} at h = {:.6}, L = {:.6}\n\
                 \x20      closed form 2 sqrt(3(2 sqrt(40320) - 336)/1680) = {:.9}\n",
                lower.value, lower.l, upper.value, upper.h, upper.l, exact
            );
            write_output(out, &body)?;
        }
        Command::Sweep { config } => {
            let mut cfg = ExperimentConfig::load(&config)?;
            cfg.seed = if cli.seed != 0 { cli.seed } else { cfg.seed };
            for w in cfg.warnings() {
                eprintln!("warning: {w}");
            }
            if let Some(dir) = out {
                cfg.output.dir = dir.to_owned();
            }
            let records = run_sweep(&cfg)?;
            let formats = match cli.format {
                Some(f) => vec![f],
                None => vec![ReportFormat::Csv, ReportFormat::Json, ReportFormat::Svg],
            };
            for f in formats {
                let path = emit_report(&records, f, &cfg.output.dir, &cfg.output.stem)?;
                eprintln!("wrote {}", path.display());
            }
        }
        Command::Gamma { k, epsilons, jumps } => {
            let t = gamma_limit_table(k, &epsilons, jumps, &opts)?;
            eprintln!("m_k = {:.8}, target = {:.8}", t.m_k, t.m_k * jumps as f64);
            write_output(
                out,
                &table(&t.rows, cli.format.unwrap_or(ReportFormat::Csv))?,
            )?;
            let last = t.rows.last().map_or(f64::INFINITY, |r| r.rel_error);
            if !(t.errors_decreasing() && last <= 0.05) {
                return Ok(Outcome::CheckFailed);
            }
        }
        Command::Blowup {
            k,
            epsilons,
            starts,
        } => {
            let t = blowup_probe(
                k,
                &epsilons,
                &SolveOptions {
                    multistart_count: starts,
                    ..opts
                },
            )?;
            write_output(
                out,
                &table(&t.rows, cli.format.unwrap_or(ReportFormat::Csv))?,
            )?;
            if !t.strictly_decreasing {
                eprintln!("minimum energies are not strictly decreasing");
                return Ok(Outcome::CheckFailed);
            }
        }
        Command::Verify { count } => {
            return Ok(if verify(count, cli.seed)? {
                Outcome::Ok
            } else {
                Outcome::CheckFailed
            });
        }
    }
    Ok(Outcome::Ok)
}

fn verify(count: usize, seed: u64) -> anyhow::Result<bool> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let unit = make_grid(0.0, 1.0, 1001)?;
    let mut worst = [f64::INFINITY; 3];
    for _ in 0..count {
        let l = 0.2 + 5.8 * rand::Rng::random::<f64>(&mut rng);
        worst[0] = worst[0].min(check_jensen(&random_jensen_field(
            make_grid(0.0, l, 801)?,
            &mut rng,
        )));
        let u = random_smooth_field(unit, &mut rng);
        for c in [0.1, 1.0, 10.0] {
            worst[1] = worst[1].min(check_linear_interpolation(&u, c));
        }
        for sign in [1.0, -1.0] {
            worst[2] = worst[2].min(check_boundary_identity(&u, 0.1, sign).integrated_slack);
        }
    }
    let gn = gn_scan(count.max(1), 1001, seed, Execution::default())?;
    let lower = lower_bound_k1().value;
    let upper = minimize_quadratic_family().value;
    let checks = [
        (
            "jensen",
            worst[0] >= -1e-6,
            format!("min slack {:.3e}", worst[0]),
        ),
        (
            "linear interpolation",
            worst[1] >= -1e-6,
            format!("min slack {:.3e}", worst[1]),
        ),
        (
            "boundary terms",
            worst[2] >= -1e-6,
            format!("min slack {:.3e}", worst[2]),
        ),
        (
            "gagliardo-nirenberg",
            gn <= GN_EMPIRICAL_CONSTANT,
            format!("max quotient {gn:.4} (bound {GN_EMPIRICAL_CONSTANT})"),
        ),
        (
            "k1 lower bound",
            (lower - 0.125).abs() <= 1e-6,
            format!("{lower:.9}"),
        ),
        (
            "k1 quadratic bound",
            (upper - 0.6846).abs() <= 5e-4,
            format!("{upper:.9}"),
        ),
    ];
    let mut ok = true;
    for (name, pass, detail) in &checks {
        println!("{} {name}: {detail}", if *pass { "PASS" } else { "FAIL" });
        ok &= pass;
    }
    Ok(ok)
}

fn main() -> ExitCode {
    match run(Cli::parse()) {
        Ok(Outcome::Ok) => ExitCode::SUCCESS,
        Ok(Outcome::CheckFailed) => ExitCode::from(2),
        Err(e) => {
            eprintln!("error: {e:#}");
            ExitCode::from(1)
        }
    }
}
