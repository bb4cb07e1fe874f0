use phasefield_core::{energy_e0, BoundarySpec, Field};
use phasefield_lab::{
    count_oscillations, count_transitions, run_sweep, ExperimentConfig, TRANSITION_THRESHOLD,
};

fn config(body: &str) -> ExperimentConfig {
    ExperimentConfig::from_toml(body).unwrap()
}

const TRANSITION: &str = r#"
seed = 4
k_values = [0.0, 0.05]
epsilon_values = [0.02]
[domain]
a = 0.0
b = 1.0
n = 2001
[boundary]
left = { kind = "value", value = -1.0 }
right = { kind = "value", value = 1.0 }
"#;

#[test]
fn stable_regime_has_one_transition() {
    let records = run_sweep(&config(TRANSITION)).unwrap();
    assert_eq!(records.len(), 2);
    for r in &records {
        assert!(r.converged);
        assert_eq!(r.transitions, 1);
        // two damped tail extrema around each well survive the noise floor
        assert!(r.oscillations <= 4, "{}", r.oscillations);
        assert!(r.total_energy > 0.0);
    }
    let zero = &records[0];
    let u = zero.minimizer.as_ref().unwrap();
    let bc = BoundarySpec::dirichlet(-1.0, 1.0);
    let e0 = energy_e0(
        u,
        0.02,
        &phasefield_core::Potential::standard_quartic(),
        &bc,
    );
    assert_eq!(e0.total, zero.total_energy);
}

#[test]
fn oscillatory_regime_goes_negative() {
    let cfg = config(
        r#"
seed = 9
k_values = [1.2]
epsilon_values = [0.02]
[domain]
a = 0.0
b = 1.0
n = 2001
[solver]
multistart_count = 2
"#,
    );
    let r = &run_sweep(&cfg).unwrap()[0];
    assert!(r.total_energy < 0.0);
    assert!(r.oscillations >= 5, "{}", r.oscillations);
}

#[test]
fn classification_survives_serialization() {
    let records = run_sweep(&config(TRANSITION)).unwrap();
    for r in records {
        let u = r.minimizer.unwrap();
        let back = Field::from_json(&u.to_json().unwrap()).unwrap();
        assert_eq!(
            count_transitions(&back, TRANSITION_THRESHOLD),
            r.transitions
        );
        assert_eq!(count_oscillations(&back), r.oscillations);
    }
}

#[test]
fn sequential_and_parallel_sweeps_agree() {
    let base = TRANSITION.replace("[0.0, 0.05]", "[0.05, 1.2]");
    let seq = run_sweep(&config(&format!(
        "{base}[solver]\nexecution = \"sequential\"\n"
    )))
    .unwrap();
    let par = run_sweep(&config(&format!(
        "{base}[solver]\nexecution = \"parallel\"\n"
    )))
    .unwrap();
    assert_eq!(seq, par);
}

#[test]
fn failed_cells_do_not_stop_the_sweep() {
    let cfg = config(&TRANSITION.replace("[0.02]", "[0.02]\n[solver]\nmax_iterations = 1"));
    let records = run_sweep(&cfg).unwrap();
    assert_eq!(records.len(), 2);
}
