//! Optimal transition profile and boundary-layer infima of the unscaled
//! energy `∫ W(f) - k (f')² + (f'')²`.
//!
//! The heteroclinic problem on the whole line is truncated to `(-T, T)` with
//! `f = ∓1`, `f' = 0` imposed at `∓T`. Truncation and resolution are then
//! refined independently until both change `m_k` by less than the requested
//! tolerance.

use serde::{Deserialize, Serialize};

use crate::energy::{DiscreteEnergy, TermScales};
use crate::error::{Error, Result};
use crate::field::{derivative1, make_grid, sample_function, BoundarySpec, Field, Grid};
use crate::optimizer::{minimize_energy, SolveOptions, SolveReport};
use crate::potential::Potential;

/// Relative change of `m_k` below which refinement stops.
pub const REFINEMENT_TOLERANCE: f64 = 1e-4;

/// Solves whose final relative gradient norm exceeds this are rejected.
pub const ACCEPTABLE_GRADIENT: f64 = 1e-5;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ProfileResult {
    pub k: f64,
    pub m_k: f64,
    pub profile: Field,
    pub truncation_t: f64,
    pub n: usize,
    /// `|f(-T) + 1| + |f(T) - 1| + |f'(-T)| + |f'(T)|`, slopes from one-sided
    /// differences.
    pub tail_residual: f64,
    /// Largest relative change of `m_k` in the last refinement round.
    pub refinement_delta: f64,
    /// Relative change from doubling `T` at fixed spacing.
    pub truncation_delta: f64,
    /// Relative change from halving the spacing at fixed `T`.
    pub resolution_delta: f64,
    pub converged: bool,
}

/// `(-T, T)` with `f(∓T) = ∓1`, `f'(∓T) = 0`.
pub fn profile_boundary() -> BoundarySpec {
    BoundarySpec::clamped((-1.0, 0.0), (1.0, 0.0))
}

fn check_solve(report: SolveReport) -> Result<SolveReport> {
    if report.final_gradient_norm > ACCEPTABLE_GRADIENT || !report.energy.is_finite() {
        return Err(Error::NotConverged {
            reason: format!(
                "{:?} with relative gradient {:.3e}",
                report.termination, report.final_gradient_norm
            ),
            report: Box::new(report),
        });
    }
    Ok(report)
}

/// Piecewise-linear transfer of `f` to `grid`, continued by the nearest end
/// value outside `f`'s interval.
pub fn resample(f: &Field, grid: Grid) -> Field {
    let src = f.grid();
    let vals = f.values();
    let h = src.h();
    let values = grid
        .nodes()
        .map(|x| {
            if x <= src.a() {
                vals[0]
            } else if x >= src.b() {
                vals[vals.len() - 1]
            } else {
                let t = (x - src.a()) / h;
                let i = (t.floor() as usize).min(vals.len() - 2);
                let s = t - i as f64;
                vals[i] * (1.0 - s) + vals[i + 1] * s
            }
        })
        .collect();
    Field::new(grid, values).expect("interpolated values are finite")
}

fn solve_truncated(
    k: f64,
    t: f64,
    n: usize,
    warm: Option<&Field>,
    opts: &SolveOptions,
) -> Result<SolveReport> {
    let grid = make_grid(-t, t, n)?;
    let bc = profile_boundary();
    let mut initial = match warm {
        Some(f) => resample(f, grid),
        None => sample_function(grid, |x| (x / std::f64::consts::SQRT_2).tanh())?,
    };
    let mut values = initial.values().to_vec();
    bc.apply_constraints(&mut values);
    initial = Field::new(grid, values)?;
    let energy = DiscreteEnergy::new(
        grid,
        &bc,
        Potential::standard_quartic(),
        TermScales::unscaled(k),
    );
    check_solve(minimize_energy(&initial, &energy, &bc, opts)?)
}

fn tail_residual(f: &Field) -> f64 {
    let v = f.values();
    let d = derivative1(f, &BoundarySpec::free());
    let dv = d.values();
    (v[0] + 1.0).abs() + (v[v.len() - 1] - 1.0).abs() + dv[0].abs() + dv[dv.len() - 1].abs()
}

fn relative_change(a: f64, b: f64) -> f64 {
    (a - b).abs() / a.abs().max(b.abs()).max(1e-300)
}

/// Minimal unscaled energy of a `-1 → +1` connection for the quartic well.
///
/// Starts from `(T, n)` and alternately doubles `T` (same spacing) and halves
/// the spacing until each changes `m_k` by less than
/// [`REFINEMENT_TOLERANCE`] relative, for at most `max_rounds` rounds.
pub fn optimal_profile_refined(
    k: f64,
    t: f64,
    n: usize,
    max_rounds: usize,
    opts: &SolveOptions,
) -> Result<ProfileResult> {
    if !(t > 0.0) || n < 3 {
        return Err(Error::InvalidArgument("need T > 0 and n >= 3".into()));
    }
    let mut t = t;
    let mut n = n;
    let mut base = solve_truncated(k, t, n, None, opts)?;
    let mut rounds = 0;
    loop {
        rounds += 1;
        let longer = solve_truncated(k, 2.0 * t, 2 * n - 1, Some(&base.minimizer), opts)?;
        let finer = solve_truncated(k, t, 2 * n - 1, Some(&base.minimizer), opts)?;
        let truncation_delta = relative_change(base.energy, longer.energy);
        let resolution_delta = relative_change(base.energy, finer.energy);
        let done =
            truncation_delta < REFINEMENT_TOLERANCE && resolution_delta < REFINEMENT_TOLERANCE;
        if done || rounds >= max_rounds {
            let (best, bt, bn) = (finer, t, 2 * n - 1);
            return Ok(ProfileResult {
                k,
                m_k: best.energy,
                tail_residual: tail_residual(&best.minimizer),
                profile: best.minimizer,
                truncation_t: bt,
                n: bn,
                refinement_delta: truncation_delta.max(resolution_delta),
                truncation_delta,
                resolution_delta,
                converged: done,
            });
        }
        if truncation_delta >= REFINEMENT_TOLERANCE {
            base = longer;
            t *= 2.0;
            n = 2 * n - 1;
        }
        if resolution_delta >= REFINEMENT_TOLERANCE {
            let grid = make_grid(-t, t, 2 * n - 1)?;
            base = solve_truncated(k, t, grid.n(), Some(&base.minimizer), opts)?;
            n = 2 * n - 1;
        }
    }
}

/// [`optimal_profile_refined`] with at most four refinement rounds.
pub fn optimal_profile(k: f64, t: f64, n: usize, opts: &SolveOptions) -> Result<ProfileResult> {
    optimal_profile_refined(k, t, n, 4, opts)
}

/// Single truncated solve without refinement; the building block of
/// [`optimal_profile`], exposed for convergence studies.
pub fn truncated_profile_energy(
    k: f64,
    t: f64,
    n: usize,
    opts: &SolveOptions,
) -> Result<SolveReport> {
    solve_truncated(k, t, n, None, opts)
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum BoundaryLayer {
    /// `g(0) = w`, `g'(0) = z`, `g(1) = 1`, `g'(1) = 0`.
    G,
    /// `h(0) = -1`, `h'(0) = 0`, `h(1) = w`, `h'(1) = z`.
    H,
}

/// Cubic Hermite interpolant on `(0, 1)`.
fn hermite(p0: f64, m0: f64, p1: f64, m1: f64) -> impl Fn(f64) -> f64 {
    move |x| {
        let x2 = x * x;
        let x3 = x2 * x;
        (2.0 * x3 - 3.0 * x2 + 1.0) * p0
            + (x3 - 2.0 * x2 + x) * m0
            + (-2.0 * x3 + 3.0 * x2) * p1
            + (x3 - x2) * m1
    }
}

/// Infimum of `∫_0^1 W(g) - k (g')² + (g'')²` under the clamped data of
/// `kind`.
pub fn boundary_layer_value(
    kind: BoundaryLayer,
    k: f64,
    w: f64,
    z: f64,
    n: usize,
    opts: &SolveOptions,
) -> Result<f64> {
    Ok(boundary_layer_solve(kind, k, w, z, n, opts)?.energy)
}

pub fn boundary_layer_solve(
    kind: BoundaryLayer,
    k: f64,
    w: f64,
    z: f64,
    n: usize,
    opts: &SolveOptions,
) -> Result<SolveReport> {
    let grid = make_grid(0.0, 1.0, n)?;
    let (bc, init) = match kind {
        BoundaryLayer::G => (
            BoundarySpec::clamped((w, z), (1.0, 0.0)),
            hermite(w, z, 1.0, 0.0),
        ),
        BoundaryLayer::H => (
            BoundarySpec::clamped((-1.0, 0.0), (w, z)),
            hermite(-1.0, 0.0, w, z),
        ),
    };
    let mut values: Vec<f64> = grid.nodes().map(init).collect();
    bc.apply_constraints(&mut values);
    let initial = Field::new(grid, values)?;
    let energy = DiscreteEnergy::new(
        grid,
        &bc,
        Potential::standard_quartic(),
        TermScales::unscaled(k),
    );
    check_solve(minimize_energy(&initial, &energy, &bc, opts)?)
}
