//! Γ-limit scaling tables and blow-up probes.

use phasefield_core::energy::DiscreteEnergy;
use phasefield_core::inequalities::{build_oscillatory_family, lower_bound_k1, FamilyCenter};
use phasefield_core::optimizer::minimize_from_starts;
use phasefield_core::profile::optimal_profile;
use phasefield_core::{
    make_grid, sample_function, BoundarySpec, EnergyParams, Field, Potential, SolveOptions,
};
use serde::{Deserialize, Serialize};

use crate::classify::{count_oscillations, count_transitions, TRANSITION_THRESHOLD};
use crate::{LabError, Result};

/// Nodes on `(0, 1)` used by [`gamma_limit_table`].
pub const GAMMA_GRID_NODES: usize = 4001;

/// Truncation and nodes of the `m_k` reference profile; long enough that
/// its truncation error sits well below the Γ-limit errors being measured.
pub const PROFILE_T: f64 = 16.0;
pub const PROFILE_N: usize = 1601;

/// Smallest `k` for which minimizers are known to oscillate for small `ε`.
pub const BLOWUP_THRESHOLD: f64 = 0.9481;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct GammaRow {
    pub epsilon: f64,
    pub min_energy: f64,
    /// `jumps · m_k`.
    pub target: f64,
    pub abs_error: f64,
    pub rel_error: f64,
    pub transitions: usize,
    pub converged: bool,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct GammaTable {
    pub k: f64,
    pub jumps: usize,
    pub m_k: f64,
    pub n: usize,
    pub rows: Vec<GammaRow>,
}

impl GammaTable {
    /// `|min energy - jumps·m_k|` strictly decreases down the table.
    pub fn errors_decreasing(&self) -> bool {
        self.rows
            .windows(2)
            .all(|w| w[1].abs_error < w[0].abs_error)
    }
}

fn check_decreasing(eps: &[f64]) -> Result<()> {
    if eps.is_empty() {
        return Err(LabError::Config("empty epsilon list".into()));
    }
    if eps.iter().any(|e| !(*e > 0.0)) || eps.windows(2).any(|w| w[1] >= w[0]) {
        return Err(LabError::Config(
            "epsilon values must be positive and strictly decreasing".into(),
        ));
    }
    Ok(())
}

/// Minimizes `F_ε^k` on `(0, 1)` with Dirichlet data forcing `jumps`
/// transitions and tabulates the minima against `jumps · m_k`.
///
/// One jump uses `u(0) = -1`, `u(1) = 1`; two jumps use `u(0) = u(1) = -1`
/// with the midpoint node pinned to `+1`. Requires `0 <= k < 1/8`, where the
/// transitions are known to be stable.
pub fn gamma_limit_table(
    k: f64,
    epsilon_values: &[f64],
    jumps: usize,
    opts: &SolveOptions,
) -> Result<GammaTable> {
    gamma_limit_table_with(k, epsilon_values, jumps, GAMMA_GRID_NODES, opts)
}

pub fn gamma_limit_table_with(
    k: f64,
    epsilon_values: &[f64],
    jumps: usize,
    n: usize,
    opts: &SolveOptions,
) -> Result<GammaTable> {
    check_decreasing(epsilon_values)?;
    let stable = lower_bound_k1().value;
    if !(0.0..stable).contains(&k) {
        return Err(LabError::Config(format!(
            "k = {k} is outside the certified stable range [0, {stable})"
        )));
    }
    if n.is_multiple_of(2) {
        return Err(LabError::Config(
            "n must be odd so the midpoint is a node".into(),
        ));
    }
    let grid = make_grid(0.0, 1.0, n)?;
    let bc = match jumps {
        1 => BoundarySpec::dirichlet(-1.0, 1.0),
        2 => BoundarySpec::dirichlet(-1.0, -1.0).with_pinned((n - 1) / 2, 1.0),
        _ => {
            return Err(LabError::Config(format!(
                "jumps must be 1 or 2, got {jumps}"
            )))
        }
    };
    let m_k = optimal_profile(k, PROFILE_T, PROFILE_N, opts)?.m_k;
    let target = jumps as f64 * m_k;
    let pot = Potential::standard_quartic();
    let mut rows = Vec::with_capacity(epsilon_values.len());
    for &eps in epsilon_values {
        let w = std::f64::consts::SQRT_2 * eps;
        let init = if jumps == 1 {
            sample_function(grid, |x| ((x - 0.5) / w).tanh())?
        } else {
            sample_function(grid, |x| ((x - 0.25) / w).tanh() * ((0.75 - x) / w).tanh())?
        };
        let mut values = init.into_values();
        bc.apply_constraints(&mut values);
        let init = Field::new(grid, values)?;
        let energy = DiscreteEnergy::scaled(grid, &bc, &EnergyParams::new(eps, k, pot.clone())?);
        let rep = minimize_from_starts(std::slice::from_ref(&init), &energy, &bc, opts)?;
        let abs_error = (rep.energy - target).abs();
        rows.push(GammaRow {
            epsilon: eps,
            min_energy: rep.energy,
            target,
            abs_error,
            rel_error: abs_error / target,
            transitions: count_transitions(&rep.minimizer, TRANSITION_THRESHOLD),
            converged: rep.converged,
        });
    }
    Ok(GammaTable {
        k,
        jumps,
        m_k,
        n,
        rows,
    })
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct BlowupRow {
    pub epsilon: f64,
    pub n: usize,
    pub min_energy: f64,
    pub oscillations: usize,
    pub converged: bool,
    /// Lowest `F_ε^k` over a scan of explicit oscillatory fields.
    pub witness_energy: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct BlowupTable {
    pub k: f64,
    pub rows: Vec<BlowupRow>,
    pub strictly_decreasing: bool,
}

/// Lowest `F_ε^k` (free ends, `(0, 1)`) over the sawtooth family with
/// periods between `2ε` and `20ε` and slopes `α/ε`, `α ∈ {0.05, …, 2}`.
pub fn oscillatory_witness(k: f64, epsilon: f64) -> Result<f64> {
    let pot = Potential::standard_quartic();
    let bc = BoundarySpec::free();
    let params = EnergyParams::new(epsilon, k, pot)?;
    let lo = (1.0 / (20.0 * epsilon)).ceil().max(1.0) as usize;
    let hi = (1.0 / (2.0 * epsilon)).floor().max(lo as f64) as usize;
    let mut best = f64::INFINITY;
    for periods in lo..=hi {
        let l = 1.0 / (6.0 * periods as f64 * epsilon);
        let n = (160 * periods + 1).max(2001);
        let grid = make_grid(0.0, 1.0, n)?;
        let energy = DiscreteEnergy::scaled(grid, &bc, &params);
        for step in 1..=40 {
            let alpha = 0.05 * step as f64;
            let u = build_oscillatory_family(alpha, l, epsilon, FamilyCenter::ZeroWell, n)?;
            best = best.min(energy.breakdown(u.values()).total);
        }
    }
    Ok(best)
}

/// Minimizes `F_ε^k` with free ends on `(0, 1)` for each `ε`, from sine
/// waves of period `4ε … 10ε` plus `opts.multistart_count` perturbations.
pub fn blowup_probe(k: f64, epsilon_values: &[f64], opts: &SolveOptions) -> Result<BlowupTable> {
    if !(k > BLOWUP_THRESHOLD) {
        return Err(LabError::Config(format!(
            "k = {k} must exceed {BLOWUP_THRESHOLD}"
        )));
    }
    check_decreasing(epsilon_values)?;
    let bc = BoundarySpec::free();
    let pot = Potential::standard_quartic();
    let mut rows = Vec::with_capacity(epsilon_values.len());
    for &eps in epsilon_values {
        let n = ((25.0 / eps).ceil() as usize + 1).max(1001);
        let grid = make_grid(0.0, 1.0, n)?;
        let starts = [4.0, 6.0, 8.0, 10.0]
            .iter()
            .map(|p| {
                sample_function(grid, |x| {
                    1.2 * (std::f64::consts::TAU * x / (p * eps)).sin()
                })
            })
            .collect::<phasefield_core::Result<Vec<_>>>()?;
        let energy = DiscreteEnergy::scaled(grid, &bc, &EnergyParams::new(eps, k, pot.clone())?);
        let rep = minimize_from_starts(&starts, &energy, &bc, opts)?;
        rows.push(BlowupRow {
            epsilon: eps,
            n,
            min_energy: rep.energy,
            oscillations: count_oscillations(&rep.minimizer),
            converged: rep.converged,
            witness_energy: oscillatory_witness(k, eps)?,
        });
    }
    let strictly_decreasing = rows.windows(2).all(|w| w[1].min_energy < w[0].min_energy);
    Ok(BlowupTable {
        k,
        rows,
        strictly_decreasing,
    })
}
