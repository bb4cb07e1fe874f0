//! Limited-memory quasi-Newton minimization over the free nodal values of a
//! [`Field`].
//!
//! Directions come from the L-BFGS two-loop recursion. When the objective
//! supplies a banded Hessian model it is used as the seed matrix of the
//! recursion (scaled by the usual `s·y / y·M⁻¹y` factor); the stiff
//! `(u'')²` terms make unpreconditioned runs crawl at fine resolution.
//! Steps are accepted by backtracking on the Armijo condition, so accepted
//! energies never increase.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::exec::{self, Execution};
use crate::field::{BandedSpd, BoundarySpec, Field, Grid};

/// A smooth objective over nodal values.
pub trait Objective: Sync {
    /// Returns the value and writes the gradient with respect to every node.
    fn evaluate(&self, u: &[f64], grad: &mut [f64]) -> f64;

    /// Optional SPD model of the Hessian restricted to the free nodes.
    fn preconditioner(&self, _free: &[bool]) -> Option<Preconditioner> {
        None
    }
}

impl<F> Objective for F
where
    F: Fn(&[f64], &mut [f64]) -> f64 + Sync,
{
    fn evaluate(&self, u: &[f64], grad: &mut [f64]) -> f64 {
        self(u, grad)
    }
}

/// Factored banded matrix `M` acting on free-node vectors as `M⁻¹`.
#[derive(Debug, Clone)]
pub struct Preconditioner {
    factor: BandedSpd,
}

impl Preconditioner {
    pub(crate) fn from_banded(full: BandedSpd, free: &[bool]) -> Option<Self> {
        let mut m = full.restrict(free);
        m.factor().then_some(Preconditioner { factor: m })
    }

    fn apply(&self, v: &mut [f64]) {
        self.factor.solve_in_place(v);
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SolveOptions {
    pub max_iterations: usize,
    /// Bound on the relative gradient norm, see [`SolveReport::final_gradient_norm`].
    pub gradient_tolerance: f64,
    pub memory: usize,
    pub multistart_count: usize,
    pub seed: u64,
    /// Amplitude of the smooth random perturbation used for restarts.
    pub perturbation: f64,
    /// Optional pointwise lower bound, enforced by projection.
    pub lower_bound: Option<f64>,
    pub record_trace: bool,
    pub execution: Execution,
}

impl Default for SolveOptions {
    fn default() -> Self {
        SolveOptions {
            max_iterations: 20_000,
            gradient_tolerance: 1e-8,
            memory: 10,
            multistart_count: 1,
            seed: 0,
            perturbation: 0.1,
            lower_bound: None,
            record_trace: false,
            execution: Execution::default(),
        }
    }
}

impl SolveOptions {
    pub fn validate(&self) -> Result<()> {
        if self.max_iterations < 1 || !(self.gradient_tolerance > 0.0) || self.memory < 1 {
            return Err(Error::InvalidArgument(
                "need max_iterations >= 1, gradient_tolerance > 0, memory >= 1".into(),
            ));
        }
        if self.multistart_count < 1 {
            return Err(Error::InvalidArgument(
                "multistart_count must be at least 1".into(),
            ));
        }
        Ok(())
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct TraceRow {
    pub iteration: usize,
    pub energy: f64,
    pub gradient_norm: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SolveReport {
    pub minimizer: Field,
    pub energy: f64,
    pub iterations: usize,
    /// Gradient norm over free nodes relative to `max(1, |energy|)`. With a
    /// Hessian model `M` this is `sqrt(gᵀ M⁻¹ g)`, otherwise
    /// `sqrt(Σ g_i² / w_i)` with `w` the trapezoid weights (the L² norm of
    /// the gradient's Riesz representer).
    pub final_gradient_norm: f64,
    pub converged: bool,
    pub restarts_used: usize,
    pub termination: Termination,
    #[serde(default, skip_serializing_if = "Vec::is_empty")]
    pub trace: Vec<TraceRow>,
}

impl SolveReport {
    pub fn trace_csv(&self) -> String {
        let mut out = String::from("iteration,energy,gradient_norm\n");
        for r in &self.trace {
            out.push_str(&format!(
                "{},{},{}\n",
                r.iteration, r.energy, r.gradient_norm
            ));
        }
        out
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Termination {
    GradientTolerance,
    /// No relative decrease above roundoff for many consecutive steps.
    Stalled,
    LineSearchFailure,
    MaxIterations,
}

fn relative_gradient_norm(grad: &[f64], free: &[bool], weights: &[f64], energy: f64) -> f64 {
    let s: f64 = grad
        .iter()
        .zip(free)
        .zip(weights)
        .filter(|((_, &f), _)| f)
        .map(|((g, _), w)| g * g / w)
        .sum();
    s.sqrt() / energy.abs().max(1.0)
}

fn dot(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| x * y).sum()
}

struct Problem<'a, O: Objective + ?Sized> {
    objective: &'a O,
    free_idx: Vec<usize>,
    free: Vec<bool>,
    weights: Vec<f64>,
    precond: Option<Preconditioner>,
    lower_bound: Option<f64>,
}

impl<O: Objective + ?Sized> Problem<'_, O> {
    fn eval(&self, full: &[f64], grad_full: &mut [f64], grad: &mut [f64]) -> f64 {
        let f = self.objective.evaluate(full, grad_full);
        for (g, &i) in grad.iter_mut().zip(&self.free_idx) {
            *g = grad_full[i];
        }
        f
    }

    fn precondition(&self, v: &mut [f64]) {
        if let Some(p) = &self.precond {
            p.apply(v);
        }
    }

    fn project(&self, full: &mut [f64]) -> bool {
        let Some(lb) = self.lower_bound else {
            return false;
        };
        let mut hit = false;
        for &i in &self.free_idx {
            if full[i] < lb {
                full[i] = lb;
                hit = true;
            }
        }
        hit
    }
}

/// Runs one L-BFGS descent from `start`.
fn descend<O: Objective + ?Sized>(
    problem: &Problem<'_, O>,
    grid: Grid,
    start: Vec<f64>,
    opts: &SolveOptions,
) -> Result<SolveReport> {
    let m = problem.free_idx.len();
    let mut x = start;
    problem.project(&mut x);
    let mut grad_full = vec![0.0; x.len()];
    let mut g = vec![0.0; m];
    let mut f = problem.eval(&x, &mut grad_full, &mut g);
    if !f.is_finite() || g.iter().any(|v| !v.is_finite()) {
        return Err(Error::NonFiniteInitial);
    }
    // components pushing into an active lower bound do not count
    let gnorm = |g: &[f64], x: &[f64], f: f64| {
        let mut v: Vec<f64> = g
            .iter()
            .zip(&problem.free_idx)
            .map(|(gi, &i)| {
                let blocked = problem
                    .lower_bound
                    .is_some_and(|lb| x[i] <= lb && *gi > 0.0);
                if blocked {
                    0.0
                } else {
                    *gi
                }
            })
            .collect();
        match &problem.precond {
            Some(p) => {
                let raw = v.clone();
                p.apply(&mut v);
                dot(&raw, &v).abs().sqrt() / f.abs().max(1.0)
            }
            None => {
                let mut full = vec![0.0; problem.free.len()];
                for (gi, &i) in v.iter().zip(&problem.free_idx) {
                    full[i] = *gi;
                }
                relative_gradient_norm(&full, &problem.free, &problem.weights, f)
            }
        }
    };

    let mut s_hist: Vec<Vec<f64>> = Vec::with_capacity(opts.memory);
    let mut y_hist: Vec<Vec<f64>> = Vec::with_capacity(opts.memory);
    let mut rho_hist: Vec<f64> = Vec::with_capacity(opts.memory);
    let mut gamma = 1.0;
    let mut trace = Vec::new();
    let mut norm = gnorm(&g, &x, f);
    let mut iterations = 0;
    let mut stall = 0;
    let mut first_step = true;
    let mut termination = Termination::MaxIterations;
    let mut x_trial = x.clone();
    let mut g_trial = vec![0.0; m];

    if opts.record_trace {
        trace.push(TraceRow {
            iteration: 0,
            energy: f,
            gradient_norm: norm,
        });
    }

    while iterations < opts.max_iterations {
        if norm <= opts.gradient_tolerance {
            termination = Termination::GradientTolerance;
            break;
        }
        if m == 0 {
            termination = Termination::GradientTolerance;
            break;
        }

        // two-loop recursion
        let mut d: Vec<f64> = g.iter().map(|v| -v).collect();
        let k = s_hist.len();
        let mut alpha = vec![0.0; k];
        for j in (0..k).rev() {
            alpha[j] = rho_hist[j] * dot(&s_hist[j], &d);
            for (di, yi) in d.iter_mut().zip(&y_hist[j]) {
                *di -= alpha[j] * yi;
            }
        }
        problem.precondition(&mut d);
        for di in d.iter_mut() {
            *di *= gamma;
        }
        for j in 0..k {
            let beta = rho_hist[j] * dot(&y_hist[j], &d);
            for (di, si) in d.iter_mut().zip(&s_hist[j]) {
                *di += (alpha[j] - beta) * si;
            }
        }

        let mut slope = dot(&g, &d);
        if !(slope < 0.0) {
            s_hist.clear();
            y_hist.clear();
            rho_hist.clear();
            d = g.iter().map(|v| -v).collect();
            problem.precondition(&mut d);
            slope = dot(&g, &d);
            if !(slope < 0.0) {
                termination = Termination::LineSearchFailure;
                break;
            }
        }

        let mut step = 1.0;
        if first_step && problem.precond.is_none() {
            let dmax = d.iter().fold(0.0f64, |a, v| a.max(v.abs()));
            step = (1.0 / dmax).min(1.0);
        }

        let mut accepted = None;
        for _ in 0..60 {
            x_trial.copy_from_slice(&x);
            for (di, &i) in d.iter().zip(&problem.free_idx) {
                x_trial[i] = x[i] + step * di;
            }
            let clipped = problem.project(&mut x_trial);
            let predicted = if clipped {
                problem
                    .free_idx
                    .iter()
                    .zip(&g)
                    .map(|(&i, gi)| gi * (x_trial[i] - x[i]))
                    .sum::<f64>()
            } else {
                step * slope
            };
            let f_trial = problem.eval(&x_trial, &mut grad_full, &mut g_trial);
            if f_trial.is_finite() && f_trial <= f + 1e-4 * predicted {
                accepted = Some((f_trial, clipped));
                break;
            }
            step *= 0.5;
        }

        let Some((f_new, clipped)) = accepted else {
            if !s_hist.is_empty() {
                // retry from a clean memory before giving up
                s_hist.clear();
                y_hist.clear();
                rho_hist.clear();
                gamma = 1.0;
                continue;
            }
            termination = Termination::LineSearchFailure;
            break;
        };

        let s: Vec<f64> = problem
            .free_idx
            .iter()
            .map(|&i| x_trial[i] - x[i])
            .collect();
        let y: Vec<f64> = g_trial.iter().zip(&g).map(|(a, b)| a - b).collect();
        let sy = dot(&s, &y);
        if clipped {
            s_hist.clear();
            y_hist.clear();
            rho_hist.clear();
        } else if sy > 1e-14 * dot(&s, &s).sqrt() * dot(&y, &y).sqrt() && sy > 0.0 {
            let mut my = y.clone();
            problem.precondition(&mut my);
            let ymy = dot(&y, &my);
            if ymy > 0.0 {
                gamma = sy / ymy;
            }
            if s_hist.len() == opts.memory {
                s_hist.remove(0);
                y_hist.remove(0);
                rho_hist.remove(0);
            }
            s_hist.push(s);
            y_hist.push(y);
            rho_hist.push(1.0 / sy);
        }

        let decrease = f - f_new;
        std::mem::swap(&mut x, &mut x_trial);
        std::mem::swap(&mut g, &mut g_trial);
        f = f_new;
        iterations += 1;
        first_step = false;
        norm = gnorm(&g, &x, f);
        if opts.record_trace {
            trace.push(TraceRow {
                iteration: iterations,
                energy: f,
                gradient_norm: norm,
            });
        }
        if decrease <= 1e-15 * f.abs().max(1.0) {
            stall += 1;
            if stall >= 25 {
                termination = Termination::Stalled;
                break;
            }
        } else {
            stall = 0;
        }
    }
    if norm <= opts.gradient_tolerance {
        termination = Termination::GradientTolerance;
    }

    Ok(SolveReport {
        minimizer: Field::new(grid, x).map_err(|_| Error::NonFiniteInitial)?,
        energy: f,
        iterations,
        final_gradient_norm: norm,
        converged: termination == Termination::GradientTolerance,
        restarts_used: 0,
        termination,
        trace,
    })
}

/// Smooth random perturbation: a few sine modes vanishing at both ends.
fn perturbation(grid: &Grid, amplitude: f64, rng: &mut ChaCha8Rng) -> Vec<f64> {
    let modes: Vec<f64> = (1..=6)
        .map(|m| rng.random_range(-1.0..1.0) / m as f64)
        .collect();
    let shift: f64 = rng.random_range(-1.0..1.0);
    let len = grid.len();
    grid.nodes()
        .map(|x| {
            let t = (x - grid.a()) / len;
            let wave: f64 = modes
                .iter()
                .enumerate()
                .map(|(m, a)| a * ((m + 1) as f64 * std::f64::consts::PI * t).sin())
                .sum();
            amplitude * (wave + 0.3 * shift)
        })
        .collect()
}

pub(crate) fn start_rng(seed: u64, index: usize) -> ChaCha8Rng {
    ChaCha8Rng::seed_from_u64(seed ^ (index as u64).wrapping_mul(0x9E37_79B9_7F4A_7C15))
}

/// Minimizes `objective` over the nodes left free by `bc`, starting from
/// `initial` and from `multistart_count - 1` seeded perturbations of it.
/// The lowest energy wins; ties go to the earliest start.
pub fn minimize_energy<O: Objective + ?Sized>(
    initial: &Field,
    objective: &O,
    bc: &BoundarySpec,
    opts: &SolveOptions,
) -> Result<SolveReport> {
    minimize_from_starts(std::slice::from_ref(initial), objective, bc, opts)
}

/// As [`minimize_energy`] with several explicit initial fields; the seeded
/// perturbations cycle through them.
pub fn minimize_from_starts<O: Objective + ?Sized>(
    initials: &[Field],
    objective: &O,
    bc: &BoundarySpec,
    opts: &SolveOptions,
) -> Result<SolveReport> {
    opts.validate()?;
    let Some(first) = initials.first() else {
        return Err(Error::InvalidArgument("no initial field".into()));
    };
    let grid = *first.grid();
    if initials.iter().any(|f| *f.grid() != grid) {
        return Err(Error::GridMismatch);
    }
    for f in initials {
        if !bc.is_satisfied_by(f.values()) {
            return Err(Error::InvalidArgument(
                "initial field violates the boundary constraints".into(),
            ));
        }
    }
    let free = bc.free_mask(grid.n());
    let problem = Problem {
        objective,
        free_idx: (0..grid.n()).filter(|&i| free[i]).collect(),
        precond: objective.preconditioner(&free),
        free,
        weights: grid.weights(),
        lower_bound: opts.lower_bound,
    };
    let starts = opts.multistart_count.max(initials.len());

    let runs = exec::map_indexed(starts, opts.execution, |j| {
        let base = &initials[j % initials.len()];
        let mut values = base.values().to_vec();
        if j >= initials.len() {
            let mut rng = start_rng(opts.seed, j);
            for (v, p) in values
                .iter_mut()
                .zip(perturbation(&grid, opts.perturbation, &mut rng))
            {
                *v += p;
            }
            bc.apply_constraints(&mut values);
        }
        descend(&problem, grid, values, opts)
    });

    let mut best: Option<SolveReport> = None;
    let mut first_err = None;
    for r in runs {
        match r {
            Ok(rep) => {
                if best.as_ref().is_none_or(|b| rep.energy < b.energy) {
                    best = Some(rep);
                }
            }
            Err(e) => {
                first_err.get_or_insert(e);
            }
        }
    }
    match best {
        Some(mut rep) => {
            rep.restarts_used = starts - 1;
            Ok(rep)
        }
        None => Err(first_err.unwrap_or(Error::NonFiniteInitial)),
    }
}

/// Largest componentwise relative discrepancy between the supplied gradient
/// and central differences over the free nodes. Components are compared
/// relative to `max(|g_i|, |fd_i|, 10⁻³ max_j |fd_j|)`.
pub fn gradient_fd_check<O: Objective + ?Sized>(
    objective: &O,
    u: &Field,
    bc: &BoundarySpec,
    step: f64,
) -> f64 {
    let x = u.values().to_vec();
    let mut grad = vec![0.0; x.len()];
    objective.evaluate(&x, &mut grad);
    let free = bc.free_mask(x.len());
    let mut scratch = vec![0.0; x.len()];
    let mut xp = x.clone();
    let mut fd = vec![0.0; x.len()];
    for i in (0..x.len()).filter(|&i| free[i]) {
        xp[i] = x[i] + step;
        let fp = objective.evaluate(&xp, &mut scratch);
        xp[i] = x[i] - step;
        let fm = objective.evaluate(&xp, &mut scratch);
        xp[i] = x[i];
        fd[i] = (fp - fm) / (2.0 * step);
    }
    let scale = fd.iter().fold(0.0f64, |a, v| a.max(v.abs()));
    (0..x.len())
        .filter(|&i| free[i])
        .map(|i| {
            let denom = grad[i].abs().max(fd[i].abs()).max(1e-3 * scale);
            if denom == 0.0 {
                0.0
            } else {
                (grad[i] - fd[i]).abs() / denom
            }
        })
        .fold(0.0, f64::max)
}
