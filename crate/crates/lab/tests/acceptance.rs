//! End-to-end acceptance checks. Each check prints one PASS/FAIL line with
//! its measured value and runtime; the process fails if any check fails.

use std::process::{Command, ExitCode};
use std::time::{Duration, Instant};

use phasefield_core::energy::DiscreteEnergy;
use phasefield_core::inequalities::*;
use phasefield_core::profile::optimal_profile;
use phasefield_core::*;
use phasefield_lab::{blowup_probe, gamma_limit_table};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

struct Outcome {
    pass: bool,
    detail: String,
}

fn outcome(pass: bool, detail: String) -> Outcome {
    Outcome { pass, detail }
}

fn identity_residual_check() -> Outcome {
    let mut rng = ChaCha8Rng::seed_from_u64(1);
    let mut worst = 0.0f64;
    for _ in 0..10_000 {
        let u = rng.random_range(-2.0..2.0);
        let du = rng.random_range(-3.0..3.0);
        let d2u = rng.random_range(-3.0..3.0);
        let c = rng.random_range(0.05..2.0);
        let sign = if rng.random::<bool>() { 1.0 } else { -1.0 };
        worst = worst.max(identity_residual(u, du, d2u, c, sign).abs());
    }
    outcome(
        worst <= 1e-12,
        format!("max residual {worst:.3e} over 10^4 triples"),
    )
}

/// Central differences of `energy_second_order` at every free node.
fn fd_gradient(u: &Field, p: &EnergyParams, bc: &BoundarySpec, step: f64) -> Vec<f64> {
    let free = bc.free_mask(u.values().len());
    let mut x = u.values().to_vec();
    let grid = *u.grid();
    (0..x.len())
        .map(|i| {
            if !free[i] {
                return 0.0;
            }
            let orig = x[i];
            x[i] = orig + step;
            let plus = energy_second_order(&Field::new(grid, x.clone()).unwrap(), p, bc).total;
            x[i] = orig - step;
            let minus = energy_second_order(&Field::new(grid, x.clone()).unwrap(), p, bc).total;
            x[i] = orig;
            (plus - minus) / (2.0 * step)
        })
        .collect()
}

fn gradient_check() -> Outcome {
    let mut rng = ChaCha8Rng::seed_from_u64(2);
    let grid = make_grid(0.0, 1.0, 501).unwrap();
    let mut worst = 0.0f64;
    for case in 0..20 {
        let eps = rng.random_range(0.02..0.5);
        let k = rng.random_range(-0.5..2.0);
        let mut values = random_smooth_field(grid, &mut rng).into_values();
        let bc = match case % 3 {
            0 => BoundarySpec::free(),
            1 => BoundarySpec::dirichlet(values[0], values[500]),
            _ => BoundarySpec::clamped((-1.0, 0.0), (1.0, 0.5)),
        };
        bc.apply_constraints(&mut values);
        let u = Field::new(grid, values).unwrap();
        let p = EnergyParams::new(eps, k, Potential::standard_quartic()).unwrap();
        let g = energy_gradient(&u, &p, &bc);
        let fd = fd_gradient(&u, &p, &bc, 1e-5);
        let scale = fd.iter().fold(0.0f64, |m, v| m.max(v.abs()));
        for (a, b) in g.values().iter().zip(&fd) {
            let denom = a.abs().max(b.abs()).max(1e-3 * scale);
            if denom > 0.0 {
                worst = worst.max((a - b).abs() / denom);
            }
        }
    }
    outcome(
        worst <= 1e-5,
        format!("max relative error {worst:.3e} over 20 instances"),
    )
}

fn quadratic_family_check() -> Outcome {
    let m = minimize_quadratic_family();
    outcome(
        (m.value - 0.6846).abs() <= 5e-4,
        format!(
            "min (I1+I2)/I3 = {:.7} at h = {:.5}, L = {:.5}",
            m.value, m.h, m.l
        ),
    )
}

fn lower_bound_check() -> Outcome {
    let b = lower_bound_k1();
    outcome(
        (b.value - 0.125).abs() <= 1e-6,
        format!("lower bound {:.9}", b.value),
    )
}

fn k1_bracket_check() -> Outcome {
    let opts = SolveOptions {
        multistart_count: 8,
        ..SolveOptions::default()
    };
    match k1_search(&DEFAULT_L_GRID, 2001, &opts) {
        Ok(r) => outcome(
            (0.115..=0.695).contains(&r.quotient),
            format!(
                "k1 estimate {:.6} at L = {:.4} (converged {})",
                r.quotient, r.l, r.converged
            ),
        ),
        Err(e) => outcome(false, format!("error: {e}")),
    }
}

fn interpolation_suites_check() -> Outcome {
    let mut rng = ChaCha8Rng::seed_from_u64(6);
    let (mut jensen, mut linear, mut integrated) = (f64::INFINITY, f64::INFINITY, f64::INFINITY);
    for _ in 0..100 {
        let l = rng.random_range(0.2..6.0);
        jensen = jensen.min(check_jensen(&random_jensen_field(
            make_grid(0.0, l, 801).unwrap(),
            &mut rng,
        )));
        let a = rng.random_range(-2.0..2.0);
        let len = rng.random_range(0.5..4.0);
        let u = random_smooth_field(make_grid(a, a + len, 801).unwrap(), &mut rng);
        for c in [0.1, 1.0, 10.0] {
            linear = linear.min(check_linear_interpolation(&u, c));
        }
        let eps = rng.random_range(0.02..0.5);
        let v = random_smooth_field(make_grid(0.0, 1.0, 2001).unwrap(), &mut rng);
        for sign in [1.0, -1.0] {
            let c = std::f64::consts::SQRT_2 * eps;
            integrated = integrated.min(check_boundary_identity(&v, c, sign).integrated_slack);
        }
    }
    outcome(
        jensen >= -1e-6 && linear >= -1e-6 && integrated >= -1e-6,
        format!(
            "min slacks: jensen {jensen:.3e}, linear {linear:.3e}, integrated {integrated:.3e}"
        ),
    )
}

fn modica_mortola_check() -> Outcome {
    let eps = 0.02;
    let grid = make_grid(0.0, 1.0, 8001).unwrap();
    let bc = BoundarySpec::dirichlet(-1.0, 1.0);
    let energy = DiscreteEnergy::new(
        grid,
        &bc,
        Potential::standard_quartic(),
        TermScales::modica_mortola(eps),
    );
    let start = sample_function(grid, |x| 2.0 * x - 1.0).unwrap();
    match minimize_energy(&start, &energy, &bc, &SolveOptions::default()) {
        Ok(rep) => {
            let rel = (rep.energy - 4.0 / 3.0).abs() / (4.0 / 3.0);
            outcome(
                rel <= 0.02,
                format!(
                    "min energy {:.6} vs 4/3 (relative error {rel:.2e})",
                    rep.energy
                ),
            )
        }
        Err(e) => outcome(false, format!("error: {e}")),
    }
}

fn gamma_check() -> Outcome {
    let opts = SolveOptions::default();
    let eps = [0.1, 0.05, 0.025];
    let (one, two) = match (
        gamma_limit_table(0.05, &eps, 1, &opts),
        gamma_limit_table(0.05, &eps, 2, &opts),
    ) {
        (Ok(a), Ok(b)) => (a, b),
        (Err(e), _) | (_, Err(e)) => return outcome(false, format!("error: {e}")),
    };
    let final_one = one.rows.last().unwrap().rel_error;
    let final_two = two.rows.last().unwrap().rel_error;
    let errors: Vec<String> = one
        .rows
        .iter()
        .map(|r| format!("{:.2e}", r.abs_error))
        .collect();
    outcome(
        one.errors_decreasing() && final_one <= 0.05 && final_two <= 0.05,
        format!(
            "m_k = {:.6}; one-jump errors [{}], final {final_one:.2e}; two-jump final {final_two:.2e}",
            one.m_k,
            errors.join(", ")
        ),
    )
}

fn profile_structure_check() -> Outcome {
    let opts = SolveOptions::default();
    let k0 = match estimate_k0(
        1001,
        &SolveOptions {
            multistart_count: 4,
            ..opts.clone()
        },
    ) {
        Ok(v) => v,
        Err(e) => return outcome(false, format!("k0 error: {e}")),
    };
    let mut values = Vec::new();
    let mut trunc = 0.0f64;
    for k in [0.0, 0.025, 0.05, 0.1] {
        match optimal_profile(k, 8.0, 801, &opts) {
            Ok(r) => {
                trunc = trunc.max(r.truncation_delta);
                values.push((k, r.m_k));
            }
            Err(e) => return outcome(false, format!("profile k = {k}: {e}")),
        }
    }
    let m0 = values[0].1;
    let positive = values.iter().all(|&(_, m)| m > 0.0);
    let monotone = values.windows(2).all(|w| w[1].1 <= w[0].1);
    let lower = values.iter().all(|&(k, m)| m >= (1.0 - k / k0) * m0 - 1e-3);
    let listed: Vec<String> = values
        .iter()
        .map(|(k, m)| format!("m({k}) = {m:.6}"))
        .collect();
    outcome(
        positive && monotone && lower && trunc < 1e-4,
        format!(
            "{}; k0 = {k0:.5}; max truncation change {trunc:.2e}",
            listed.join(", ")
        ),
    )
}

fn blowup_check() -> Outcome {
    let opts = SolveOptions {
        multistart_count: 4,
        ..SolveOptions::default()
    };
    match blowup_probe(1.2, &[0.1, 0.05, 0.025], &opts) {
        Ok(t) => {
            let last = t.rows.last().unwrap();
            let energies: Vec<String> = t
                .rows
                .iter()
                .map(|r| format!("{:.3}", r.min_energy))
                .collect();
            let osc: Vec<String> = t.rows.iter().map(|r| r.oscillations.to_string()).collect();
            outcome(
                t.strictly_decreasing && last.min_energy < 0.0 && last.oscillations >= 5,
                format!(
                    "energies [{}], oscillations [{}]",
                    energies.join(", "),
                    osc.join(", ")
                ),
            )
        }
        Err(e) => outcome(false, format!("error: {e}")),
    }
}

fn counterexample_check() -> Outcome {
    let k0 = match estimate_k0(
        1001,
        &SolveOptions {
            multistart_count: 4,
            ..SolveOptions::default()
        },
    ) {
        Ok(v) => v,
        Err(e) => return outcome(false, format!("k0 error: {e}")),
    };
    let quartic = Potential::standard_quartic();
    let bounded = make_counterexample_potential(Counterexample::BoundedTail);
    let flat = make_counterexample_potential(Counterexample::FlatWells);
    let ratio = |alpha: f64, l: f64, center, pot: &Potential| {
        let eps = 1.0 / (6.0 * l);
        let u = build_oscillatory_family(alpha, l, eps, center, 4001)?;
        counterexample_ratio(&u, eps, pot)
    };
    let run = || -> phasefield_core::Result<Outcome> {
        let bt = ratio(20.0, 20.0, FamilyCenter::ZeroWell, &bounded)?;
        let fw = ratio(1e-5, 20.0, FamilyCenter::PlusWell, &flat)?;
        let bt_q = ratio(20.0, 20.0, FamilyCenter::ZeroWell, &quartic)?;
        let fw_q = ratio(1e-5, 20.0, FamilyCenter::PlusWell, &quartic)?;
        Ok(outcome(
            bt < 0.05 && fw < 0.05 && bt_q >= k0 - 1e-2 && fw_q >= k0 - 1e-2,
            format!(
                "bounded_tail {bt:.4}, flat_wells {fw:.4}; quartic {bt_q:.3e}, {fw_q:.3e} vs k0 {k0:.5}"
            ),
        ))
    };
    run().unwrap_or_else(|e| outcome(false, format!("error: {e}")))
}

const SWEEP_CONFIG: &str = r#"
seed = 11
k_values = [0.05, 1.2]
epsilon_values = [0.05, 0.02]
[domain]
a = 0.0
b = 1.0
n = 1001
[solver]
multistart_count = 2
execution = "parallel"
"#;

fn determinism_check() -> Outcome {
    let dir = tempfile::tempdir().expect("temporary directory");
    let config = dir.path().join("sweep.toml");
    std::fs::write(&config, SWEEP_CONFIG).unwrap();
    let run = |name: &str| -> std::result::Result<Vec<u8>, String> {
        let out = dir.path().join(name);
        let status = Command::new(env!("CARGO_BIN_EXE_phasefield"))
            .args(["sweep", "--format", "csv", "--config"])
            .arg(&config)
            .arg("--out")
            .arg(&out)
            .output()
            .map_err(|e| e.to_string())?;
        if !status.status.success() {
            return Err(String::from_utf8_lossy(&status.stderr).into_owned());
        }
        std::fs::read(out.join("sweep.csv")).map_err(|e| e.to_string())
    };
    match (run("first"), run("second")) {
        (Ok(a), Ok(b)) => outcome(
            a == b && !a.is_empty(),
            format!("{} bytes, identical: {}", a.len(), a == b),
        ),
        (Err(e), _) | (_, Err(e)) => outcome(false, format!("sweep failed: {e}")),
    }
}

type Check = fn() -> Outcome;

fn main() -> ExitCode {
    let checks: [(&str, Duration, Check); 12] = [
        (
            "boundary-identity residual",
            Duration::from_secs(1),
            identity_residual_check,
        ),
        (
            "gradient correctness",
            Duration::from_secs(10),
            gradient_check,
        ),
        (
            "quadratic-family upper bound",
            Duration::from_secs(1),
            quadratic_family_check,
        ),
        ("k1 lower bound", Duration::from_secs(1), lower_bound_check),
        ("k1 bracket", Duration::from_secs(300), k1_bracket_check),
        (
            "interpolation suites",
            Duration::from_secs(30),
            interpolation_suites_check,
        ),
        (
            "Modica-Mortola calibration",
            Duration::from_secs(60),
            modica_mortola_check,
        ),
        ("Gamma-limit scaling", Duration::from_secs(300), gamma_check),
        (
            "m_k structure",
            Duration::from_secs(300),
            profile_structure_check,
        ),
        ("oscillation regime", Duration::from_secs(300), blowup_check),
        (
            "counterexample necessity",
            Duration::from_secs(60),
            counterexample_check,
        ),
        ("determinism", Duration::from_secs(300), determinism_check),
    ];
    let mut failures = 0;
    for (i, (name, limit, check)) in checks.iter().enumerate() {
        let start = Instant::now();
        let o = check();
        let elapsed = start.elapsed();
        let pass = o.pass && elapsed <= *limit;
        failures += usize::from(!pass);
        println!(
            "{} criterion {:>2} {name}: {} [{:.2?} of {:?}]",
            if pass { "PASS" } else { "FAIL" },
            i + 1,
            o.detail,
            elapsed,
            limit
        );
    }
    println!(
        "{} of {} criteria passed",
        checks.len() - failures,
        checks.len()
    );
    if failures == 0 {
        ExitCode::SUCCESS
    } else {
        ExitCode::FAILURE
    }
}
