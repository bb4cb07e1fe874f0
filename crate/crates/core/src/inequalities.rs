//! Rayleigh quotients, the interpolation constants `k₀` and `k₁`, their
//! closed-form bounds, and pointwise/integrated checks of the classical
//! interpolation inequalities used to derive them.
//!
//! The quotient
//!
//! ```text
//! R(u) = (∫ W(u) + ∫ (u'')²) / ∫ (u')²
//! ```
//!
//! is not scale invariant because `W` is nonlinear, so it is minimized
//! directly over unnormalized fields with gradient `(∇N - R ∇D) / D`.

use rand::Rng;
use serde::{Deserialize, Serialize};

use crate::energy::{DiscreteEnergy, TermScales};
use crate::error::{Error, Result};
use crate::exec::{self, Execution};
use crate::field::{
    derivative1, derivative2, integrate_values, make_grid, BoundarySpec, DiffOperator,
    EndCondition, Field, Grid,
};
use crate::optimizer::{
    minimize_from_starts, start_rng, Objective, Preconditioner, SolveOptions, Termination,
};
use crate::potential::Potential;

/// Half-lengths probed by [`k1_search`] by default.
pub const DEFAULT_L_GRID: [f64; 7] = [0.25, 0.5, 1.0, 2.0, 4.0, 8.0, 16.0];

/// Denominators at or below `DENOMINATOR_FLOOR * (1 + numerator)` make the
/// quotient `+∞`.
pub const DENOMINATOR_FLOOR: f64 = 1e-14;

/// Empirical bound on [`gn_quotient`] over the smooth random fields of
/// [`random_smooth_field`] on `(0, 1)`; frozen from a 20 000-field scan
/// (seed 2024, `n = 1001`) whose maximum was 1.0389.
pub const GN_EMPIRICAL_CONSTANT: f64 = 1.05;

/// A stalled quotient solve counts as converged when its relative gradient
/// norm is below this; the quotient's roundoff floor sits around `1e-7`.
pub const STALL_ACCEPTANCE: f64 = 1e-6;

/// `(∫ W + ∫ (u'')²) / ∫ (u')²` on a fixed grid and boundary specification,
/// as an objective for the quasi-Newton solver.
#[derive(Debug, Clone)]
pub struct RayleighObjective {
    numerator: DiscreteEnergy,
    denominator: DiscreteEnergy,
}

impl RayleighObjective {
    pub fn new(grid: Grid, bc: &BoundarySpec, pot: &Potential) -> Self {
        Self::with_scales(grid, bc, pot, 1.0, 1.0)
    }

    /// `(a ∫W + c ∫(u'')²) / ∫(u')²`.
    pub fn with_scales(
        grid: Grid,
        bc: &BoundarySpec,
        pot: &Potential,
        potential_scale: f64,
        curvature_scale: f64,
    ) -> Self {
        let numerator = DiscreteEnergy::new(
            grid,
            bc,
            pot.clone(),
            TermScales {
                potential: potential_scale,
                gradient: 0.0,
                curvature: curvature_scale,
                k: 0.0,
            },
        );
        let denominator = DiscreteEnergy::new(
            grid,
            bc,
            pot.clone(),
            TermScales {
                potential: 0.0,
                gradient: 1.0,
                curvature: 0.0,
                k: -1.0,
            },
        );
        RayleighObjective {
            numerator,
            denominator,
        }
    }

    /// `(numerator, denominator)`.
    pub fn parts(&self, u: &[f64]) -> (f64, f64) {
        (
            self.numerator.breakdown(u).total,
            self.denominator.breakdown(u).total,
        )
    }

    pub fn quotient(&self, u: &[f64]) -> f64 {
        let (num, den) = self.parts(u);
        if den <= DENOMINATOR_FLOOR * (1.0 + num.abs()) {
            f64::INFINITY
        } else {
            num / den
        }
    }
}

impl Objective for RayleighObjective {
    fn evaluate(&self, u: &[f64], grad: &mut [f64]) -> f64 {
        let mut gd = vec![0.0; u.len()];
        let num = self.numerator.value_and_gradient(u, grad);
        let den = self.denominator.value_and_gradient(u, &mut gd);
        if den <= DENOMINATOR_FLOOR * (1.0 + num.abs()) {
            grad.iter_mut().for_each(|g| *g = 0.0);
            return f64::INFINITY;
        }
        let r = num / den;
        for (g, d) in grad.iter_mut().zip(&gd) {
            *g = (*g - r * d) / den;
        }
        r
    }

    fn preconditioner(&self, free: &[bool]) -> Option<Preconditioner> {
        self.numerator.hessian_model(free)
    }
}

/// `R(u)`, or `+∞` when `∫(u')²` vanishes.
pub fn rayleigh_quotient(u: &Field, pot: &Potential, bc: &BoundarySpec) -> f64 {
    RayleighObjective::new(*u.grid(), bc, pot).quotient(u.values())
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RayleighEstimate {
    #[serde(rename = "L")]
    pub l: f64,
    pub quotient: f64,
    #[serde(skip_serializing_if = "Option::is_none", default)]
    pub minimizer: Option<Field>,
    pub denominator: f64,
    pub converged: bool,
    pub n: usize,
}

/// `(0, L)` with `u(0) = 0` and `u'(L) = 0`.
pub fn k1_boundary() -> BoundarySpec {
    BoundarySpec::new(
        EndCondition::Value { value: 0.0 },
        EndCondition::Slope { slope: 0.0 },
    )
}

fn collect_best(
    reports: Vec<(Result<crate::optimizer::SolveReport>, &RayleighObjective)>,
    l: f64,
    n: usize,
) -> Result<RayleighEstimate> {
    let mut best: Option<RayleighEstimate> = None;
    for (rep, obj) in reports {
        let Ok(rep) = rep else { continue };
        let (_, den) = obj.parts(rep.minimizer.values());
        let q = obj.quotient(rep.minimizer.values());
        if !q.is_finite() {
            continue;
        }
        if best.as_ref().is_none_or(|b| q < b.quotient) {
            best = Some(RayleighEstimate {
                l,
                quotient: q,
                minimizer: Some(rep.minimizer),
                denominator: den,
                converged: rep.converged
                    || (rep.termination == Termination::Stalled
                        && rep.final_gradient_norm <= STALL_ACCEPTANCE),
                n,
            });
        }
    }
    best.ok_or(Error::Degenerate)
}

/// Minimizes `R` over nonnegative fields on `(0, L)` with `u(0) = 0`,
/// `u'(L) = 0`. Starts from the best quadratic-family member (flattened
/// beyond its own length when `L` is larger), a unit-height parabola, and
/// `opts.multistart_count` seeded perturbations of these.
pub fn estimate_k1(l: f64, n: usize, opts: &SolveOptions) -> Result<RayleighEstimate> {
    if !(l > 0.0) || n < 51 {
        return Err(Error::InvalidArgument("need L > 0 and n >= 51".into()));
    }
    let grid = make_grid(0.0, l, n)?;
    let bc = k1_boundary();
    let pot = Potential::standard_quartic();
    let obj = RayleighObjective::new(grid, &bc, &pot);

    let fam = minimize_quadratic_family();
    let rise = |height: f64, len: f64| {
        let len = len.min(l);
        let values = grid
            .nodes()
            .map(|x| {
                let t = (x / len).min(1.0);
                height * (1.0 - (1.0 - t) * (1.0 - t))
            })
            .collect();
        Field::new(grid, values)
    };
    let starts = vec![
        rise(fam.h * fam.h, fam.l)?,
        rise(1.0, l)?,
        rise(1.2, 0.5 * fam.l)?,
    ];
    let opts = SolveOptions {
        lower_bound: Some(0.0),
        multistart_count: opts.multistart_count.max(starts.len()),
        ..opts.clone()
    };
    let rep = minimize_from_starts(&starts, &obj, &bc, &opts);
    collect_best(vec![(rep, &obj)], l, n)
}

/// [`estimate_k1`] for each `L`, followed by a golden-section refinement of
/// `log L` between the neighbours of the best grid value (when it has
/// neighbours on both sides). The smallest quotient wins, ties going to the
/// smaller `L`.
pub fn k1_search(l_values: &[f64], n: usize, opts: &SolveOptions) -> Result<RayleighEstimate> {
    if l_values.is_empty() {
        return Err(Error::InvalidArgument("empty L grid".into()));
    }
    let results = exec::map_slice(l_values, opts.execution, |&l| estimate_k1(l, n, opts));
    let mut evaluated = results.into_iter().collect::<Result<Vec<_>>>()?;
    let best_of = |list: &[RayleighEstimate]| {
        let mut best = 0;
        for (i, r) in list.iter().enumerate() {
            let b = &list[best];
            if r.quotient < b.quotient || (r.quotient == b.quotient && r.l < b.l) {
                best = i;
            }
        }
        best
    };
    let best = evaluated[best_of(&evaluated)].l;
    let below = l_values
        .iter()
        .copied()
        .filter(|&l| l < best)
        .fold(f64::NEG_INFINITY, f64::max);
    let above = l_values
        .iter()
        .copied()
        .filter(|&l| l > best)
        .fold(f64::INFINITY, f64::min);
    if below.is_finite() && above.is_finite() {
        let mut cache: Vec<RayleighEstimate> = Vec::new();
        let mut eval = |s: f64| {
            let r = estimate_k1(s.exp(), n, opts);
            let q = r.as_ref().map_or(f64::INFINITY, |r| r.quotient);
            if let Ok(r) = r {
                cache.push(r);
            }
            q
        };
        golden_section_mut(&mut eval, below.ln(), above.ln(), L_REFINEMENT_TOLERANCE);
        evaluated.extend(cache);
    }
    let i = best_of(&evaluated);
    Ok(evaluated.swap_remove(i))
}

/// Width in `log L` at which [`k1_search`] stops refining.
pub const L_REFINEMENT_TOLERANCE: f64 = 0.02;

/// Upper estimate of `k₀`: minimizes `R` over fields on `(0, 1)` with free
/// ends, from linear ramps of several slopes and seeded perturbations.
pub fn estimate_k0(n: usize, opts: &SolveOptions) -> Result<f64> {
    Ok(estimate_k0_field(n, opts)?.quotient)
}

pub fn estimate_k0_field(n: usize, opts: &SolveOptions) -> Result<RayleighEstimate> {
    if n < 101 {
        return Err(Error::InvalidArgument("need n >= 101".into()));
    }
    let grid = make_grid(0.0, 1.0, n)?;
    let bc = BoundarySpec::free();
    let obj = RayleighObjective::new(grid, &bc, &Potential::standard_quartic());
    let starts = [2.0, 3.0, 4.0]
        .iter()
        .map(|&m| Field::new(grid, grid.nodes().map(|x| m * (x - 0.5)).collect()))
        .collect::<Result<Vec<_>>>()?;
    let opts = SolveOptions {
        multistart_count: opts.multistart_count.max(starts.len()),
        ..opts.clone()
    };
    let rep = minimize_from_starts(&starts, &obj, &bc, &opts);
    collect_best(vec![(rep, &obj)], 1.0, n)
}

/// `R` of `u(x) = h² - h² (x - L)² / L²` on `(0, L)` from the closed forms
/// of its three integrals.
pub fn quadratic_family_quotient(h: f64, l: f64) -> f64 {
    let h4 = h.powi(4);
    let i1 = l * (128.0 * h4 * h4 - 336.0 * h4 + 315.0) / 1260.0;
    let i2 = 4.0 * h4 / l.powi(3);
    let i3 = 4.0 * h4 / (3.0 * l);
    (i1 + i2) / i3
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct QuadraticFamilyMinimum {
    pub h: f64,
    #[serde(rename = "L")]
    pub l: f64,
    pub value: f64,
}

fn golden_section(f: impl Fn(f64) -> f64, lo: f64, hi: f64, tol: f64) -> f64 {
    golden_section_mut(&mut { f }, lo, hi, tol)
}

fn golden_section_mut(f: &mut impl FnMut(f64) -> f64, mut lo: f64, mut hi: f64, tol: f64) -> f64 {
    let ratio = (5f64.sqrt() - 1.0) / 2.0;
    let mut c = hi - ratio * (hi - lo);
    let mut d = lo + ratio * (hi - lo);
    let (mut fc, mut fd) = (f(c), f(d));
    while hi - lo > tol {
        if fc < fd {
            hi = d;
            d = c;
            fd = fc;
            c = hi - ratio * (hi - lo);
            fc = f(c);
        } else {
            lo = c;
            c = d;
            fc = fd;
            d = lo + ratio * (hi - lo);
            fd = f(d);
        }
    }
    0.5 * (lo + hi)
}

/// Minimum of [`quadratic_family_quotient`] over `h, L > 0`: a log-spaced
/// grid scan followed by nested golden-section refinement in `(log h, log L)`.
pub fn minimize_quadratic_family() -> QuadraticFamilyMinimum {
    let q = |p: f64, s: f64| quadratic_family_quotient(p.exp(), s.exp());
    let (mut bp, mut bs, mut bv) = (0.0, 0.0, f64::INFINITY);
    for i in 0..=60 {
        let p = -2.0 + 4.0 * i as f64 / 60.0;
        for j in 0..=80 {
            let s = -3.0 + 7.0 * j as f64 / 80.0;
            let v = q(p, s);
            if v < bv {
                (bp, bs, bv) = (p, s, v);
            }
        }
    }
    let inner = |s: f64| golden_section(|p| q(p, s), bp - 0.1, bp + 0.1, 1e-12);
    let s = golden_section(|s| q(inner(s), s), bs - 0.1, bs + 0.1, 1e-12);
    let p = inner(s);
    QuadraticFamilyMinimum {
        h: p.exp(),
        l: s.exp(),
        value: q(p, s),
    }
}

/// `max{2/L², 1 / max{8c², 2(1/c + 12/L²)²}}`: the better of the Jensen and
/// linear-interpolation lower bounds on `inf R` over `(0, L)`.
pub fn k1_lower_bound_at(l: f64, c: f64) -> f64 {
    let jensen = 2.0 / (l * l);
    let kc = 1.0 / c + 12.0 / (l * l);
    let interp = 1.0 / (8.0 * c * c).max(2.0 * kc * kc);
    jensen.max(interp)
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct LowerBound {
    pub value: f64,
    /// A half-length attaining the infimum.
    #[serde(rename = "L")]
    pub l: f64,
}

/// `inf_L k1_lower_bound_at(L, 1)` by a log-spaced scan plus golden-section
/// polishing around the best sample.
pub fn lower_bound_k1() -> LowerBound {
    let f = |s: f64| k1_lower_bound_at(s.exp(), 1.0);
    let (mut bs, mut bv) = (0.0, f64::INFINITY);
    for i in 0..=4000 {
        let s = -4.0 + 10.0 * i as f64 / 4000.0;
        let v = f(s);
        if v < bv {
            (bs, bv) = (s, v);
        }
    }
    let s = golden_section(f, bs - 0.0025, bs + 0.0025, 1e-12);
    let (s, v) = if f(s) < bv { (s, f(s)) } else { (bs, bv) };
    LowerBound {
        value: v,
        l: s.exp(),
    }
}

/// `(L²/2) ∫(u'')² - ∫(u')²` on `(0, L)` with `u'(L) = 0` imposed in the
/// stencils.
pub fn check_jensen(u: &Field) -> f64 {
    let bc = BoundarySpec::new(EndCondition::Free, EndCondition::Slope { slope: 0.0 });
    let len = u.grid().len();
    let d1 = derivative1(u, &bc);
    let d2 = derivative2(u, &bc);
    let sq = |f: &Field| {
        integrate_values(
            f.grid(),
            &f.values().iter().map(|v| v * v).collect::<Vec<_>>(),
        )
    };
    0.5 * len * len * sq(&d2) - sq(&d1)
}

/// `k(c) = 1/c + 12/(b - a)²`.
pub fn linear_interpolation_constant(c: f64, len: f64) -> f64 {
    1.0 / c + 12.0 / (len * len)
}

fn l2_norm(grid: &Grid, v: &[f64]) -> f64 {
    integrate_values(grid, &v.iter().map(|x| x * x).collect::<Vec<_>>()).sqrt()
}

/// `c ‖u''‖ + k(c) ‖u‖ - ‖u'‖` in `L²(a, b)`.
pub fn check_linear_interpolation(u: &Field, c: f64) -> f64 {
    let bc = BoundarySpec::free();
    let g = u.grid();
    let d1 = derivative1(u, &bc);
    let d2 = derivative2(u, &bc);
    c * l2_norm(g, d2.values()) + linear_interpolation_constant(c, g.len()) * l2_norm(g, u.values())
        - l2_norm(g, d1.values())
}

/// `lhs - rhs` of
/// `c²(u')² + (c²u'' + cu' + u ± 1)² = c⁴(u'')² + (u ± 1)² + 2c(cu' + u ± 1)(cu'' + u')`.
pub fn identity_residual(u: f64, du: f64, d2u: f64, c: f64, sign: f64) -> f64 {
    let shift = u + sign;
    let lhs = c * c * du * du + (c * c * d2u + c * du + shift).powi(2);
    let rhs = c.powi(4) * d2u * d2u + shift * shift + 2.0 * c * (c * du + shift) * (c * d2u + du);
    lhs - rhs
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct BoundaryIdentityCheck {
    /// Largest `|lhs - rhs|` of the pointwise identity over the nodes.
    pub max_residual: f64,
    /// `c²∫(u'')² + ∫(u±1)²/c² + [(cu'+u±1)²]_a^b / c - ∫(u')²`.
    pub integrated_slack: f64,
}

/// Evaluates the boundary-term identity at every node (with the field's
/// stencil derivatives) and the integrated interpolation inequality it
/// yields. `sign` is `+1` or `-1`.
pub fn check_boundary_identity(u: &Field, c: f64, sign: f64) -> BoundaryIdentityCheck {
    let bc = BoundarySpec::free();
    let g = u.grid();
    let d1 = derivative1(u, &bc);
    let d2 = derivative2(u, &bc);
    let (v, dv, ddv) = (u.values(), d1.values(), d2.values());
    let max_residual = (0..v.len())
        .map(|i| identity_residual(v[i], dv[i], ddv[i], c, sign).abs())
        .fold(0.0, f64::max);
    let n = v.len();
    let sq = |f: &dyn Fn(usize) -> f64| {
        integrate_values(g, &(0..n).map(|i| f(i).powi(2)).collect::<Vec<_>>())
    };
    let boundary = |i: usize| (c * dv[i] + v[i] + sign).powi(2);
    let rhs =
        c.powi(3) * sq(&|i| ddv[i]) + sq(&|i| v[i] + sign) / c + boundary(n - 1) - boundary(0);
    BoundaryIdentityCheck {
        max_residual,
        integrated_slack: (rhs - c * sq(&|i| dv[i])) / c,
    }
}

/// `‖u'‖_{4/3} / (‖u‖₁^{1/2} ‖u''‖₂^{1/2} + ‖u‖₁)`.
pub fn gn_quotient(u: &Field) -> Result<f64> {
    let bc = BoundarySpec::free();
    let g = u.grid();
    let d1 = derivative1(u, &bc);
    let d2 = derivative2(u, &bc);
    let l1 = integrate_values(g, &u.values().iter().map(|v| v.abs()).collect::<Vec<_>>());
    let d1_43 = integrate_values(
        g,
        &d1.values()
            .iter()
            .map(|v| v.abs().powf(4.0 / 3.0))
            .collect::<Vec<_>>(),
    )
    .powf(0.75);
    let d2_2 = l2_norm(g, d2.values());
    let denom = (l1 * d2_2).sqrt() + l1;
    if !(denom > 0.0) {
        return Err(Error::ZeroDenominator("gn_quotient"));
    }
    Ok(d1_43 / denom)
}

/// `(ε³∫(u'')² + ∫W(u)/ε) / (ε∫(u')²)`.
pub fn counterexample_ratio(u: &Field, epsilon: f64, pot: &Potential) -> Result<f64> {
    let e = DiscreteEnergy::new(
        *u.grid(),
        &BoundarySpec::free(),
        pot.clone(),
        TermScales::scaled(epsilon, 0.0),
    );
    let b = e.breakdown(u.values());
    if !(b.gradient_term > 0.0) {
        return Err(Error::ZeroDenominator("counterexample_ratio"));
    }
    Ok((b.curvature_term + b.potential_term) / b.gradient_term)
}

/// `6/l² + (3/2) W(2lα)/α²`: the closed-form bound on
/// [`counterexample_ratio`] along the oscillatory families.
pub fn counterexample_bound(alpha: f64, l: f64, pot: &Potential) -> f64 {
    6.0 / (l * l) + 1.5 * pot.eval_w(2.0 * l * alpha) / (alpha * alpha)
}

/// `k₀`-type slack on `(a, b)`:
/// `(b-a)⁻² ∫W(u) + (b-a)² ∫(u'')² - k₀ ∫(u')²`.
pub fn nonlinear_interpolation_slack(u: &Field, pot: &Potential, k0: f64) -> f64 {
    let len = u.grid().len();
    let e = DiscreteEnergy::new(
        *u.grid(),
        &BoundarySpec::free(),
        pot.clone(),
        TermScales {
            potential: 1.0,
            gradient: 1.0,
            curvature: 1.0,
            k: 0.0,
        },
    );
    let q = e.integrals(u.values());
    q.potential / (len * len) + len * len * q.curvature - k0 * q.slope
}

/// Slack of `k₀∫(u')² ≤ ∫W(u) + ∫(u'')²` on each unit cell of `(a, a + m)`
/// and on the whole interval. Derivatives come from the whole-field
/// stencils, so the cell integrals add up to the whole one.
pub fn tiled_slack(u: &Field, pot: &Potential, k0: f64) -> Result<(Vec<f64>, f64)> {
    let g = u.grid();
    let cells = g.len().round();
    let per_cell = (g.n() - 1) as f64 / cells;
    if (g.len() - cells).abs() > 1e-9 || cells < 1.0 || (per_cell - per_cell.round()).abs() > 1e-9 {
        return Err(Error::InvalidArgument(
            "need an integer-length interval with whole cells of nodes".into(),
        ));
    }
    let bc = BoundarySpec::free();
    let d1 = DiffOperator::first(g, &bc).apply(u.values());
    let d2 = DiffOperator::second(g, &bc).apply(u.values());
    let integrand: Vec<f64> = (0..g.n())
        .map(|i| pot.eval_w(u.values()[i]) + d2[i] * d2[i] - k0 * d1[i] * d1[i])
        .collect();
    let step = per_cell.round() as usize;
    let h = g.h();
    let cell_slack = |lo: usize, hi: usize| {
        let inner: f64 = integrand[lo + 1..hi].iter().sum();
        h * (inner + 0.5 * (integrand[lo] + integrand[hi]))
    };
    let parts: Vec<f64> = (0..cells as usize)
        .map(|c| cell_slack(c * step, (c + 1) * step))
        .collect();
    Ok((parts, cell_slack(0, g.n() - 1)))
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum FamilyCenter {
    /// `u(0) = 0`, oscillating around the zero level.
    ZeroWell,
    /// `v(0) = 1`, oscillating around the `+1` well.
    PlusWell,
}

/// Value of the periodic sawtooth-with-parabolic-caps profile of period
/// `6 l ε` at `x`, shifted so that `u(0) = 0` on a rising line.
fn sawtooth_caps(x: f64, alpha: f64, l: f64, eps: f64) -> f64 {
    let seg = l * eps;
    let slope = alpha / eps;
    let period = 6.0 * seg;
    let curv = 2.0 * alpha / (l * eps * eps);
    let s = x.rem_euclid(period);
    let cap = |t: f64, sign: f64| sign * (alpha * l + slope * t - 0.5 * curv * t * t);
    if s < seg {
        slope * s
    } else if s < 2.0 * seg {
        cap(s - seg, 1.0)
    } else if s < 4.0 * seg {
        alpha * l - slope * (s - 2.0 * seg)
    } else if s < 5.0 * seg {
        cap(s - 4.0 * seg, -1.0)
    } else {
        -alpha * l + slope * (s - 5.0 * seg)
    }
}

/// Periodic test fields on `(0, 1)` with period `6 l ε`: on every half period
/// a line of slope `α/ε`, a parabolic cap of length `l ε`, and a line of slope
/// `-α/ε`. `1/(6 l ε)` must be a positive integer and the grid must put at
/// least 20 nodes on each cap.
pub fn build_oscillatory_family(
    alpha: f64,
    l: f64,
    epsilon: f64,
    center: FamilyCenter,
    n: usize,
) -> Result<Field> {
    if !(alpha > 0.0 && l > 0.0 && epsilon > 0.0) {
        return Err(Error::InvalidArgument(
            "alpha, l and epsilon must be positive".into(),
        ));
    }
    let periods = 1.0 / (6.0 * l * epsilon);
    if periods < 0.5 || (periods - periods.round()).abs() > 1e-9 * periods.max(1.0) {
        return Err(Error::InvalidArgument(format!(
            "1/(6 l ε) = {periods} is not a positive integer"
        )));
    }
    let grid = make_grid(0.0, 1.0, n)?;
    if l * epsilon / grid.h() < 20.0 {
        return Err(Error::InvalidArgument(format!(
            "caps of length {} need at least 20 nodes, spacing is {}",
            l * epsilon,
            grid.h()
        )));
    }
    let offset = match center {
        FamilyCenter::ZeroWell => 0.0,
        FamilyCenter::PlusWell => 1.0,
    };
    Field::new(
        grid,
        grid.nodes()
            .map(|x| offset + sawtooth_caps(x, alpha, l, epsilon))
            .collect(),
    )
}

/// Smooth random field: a random quadratic plus a few random Fourier modes.
pub fn random_smooth_field(grid: Grid, rng: &mut impl Rng) -> Field {
    let (a, len) = (grid.a(), grid.len());
    let c0: f64 = rng.random_range(-1.5..1.5);
    let c1: f64 = rng.random_range(-2.0..2.0);
    let c2: f64 = rng.random_range(-2.0..2.0);
    let modes: Vec<(f64, f64, f64)> = (1..=5)
        .map(|m| {
            (
                rng.random_range(-1.0..1.0) / m as f64,
                rng.random_range(0.0..std::f64::consts::TAU),
                m as f64,
            )
        })
        .collect();
    let values = grid
        .nodes()
        .map(|x| {
            let t = (x - a) / len;
            let wave: f64 = modes
                .iter()
                .map(|(amp, phase, m)| amp * (std::f64::consts::TAU * m * t + phase).sin())
                .sum();
            c0 + c1 * t + c2 * t * t + wave
        })
        .collect();
    Field::new(grid, values).expect("finite by construction")
}

/// Smooth random field on `(0, L)` with `u'(L) = 0`: cosine modes in
/// `x/L` plus a multiple of `(x - L)²`.
pub fn random_jensen_field(grid: Grid, rng: &mut impl Rng) -> Field {
    let (a, len) = (grid.a(), grid.len());
    let c0: f64 = rng.random_range(-1.0..1.0);
    let q: f64 = rng.random_range(-2.0..2.0);
    let modes: Vec<f64> = (1..=6)
        .map(|m| rng.random_range(-1.0..1.0) / m as f64)
        .collect();
    let values = grid
        .nodes()
        .map(|x| {
            let t = (x - a) / len;
            let wave: f64 = modes
                .iter()
                .enumerate()
                .map(|(m, c)| c * ((m + 1) as f64 * std::f64::consts::PI * t).cos())
                .sum();
            c0 + q * (t - 1.0) * (t - 1.0) + wave
        })
        .collect();
    Field::new(grid, values).expect("finite by construction")
}

/// Largest [`gn_quotient`] over `count` seeded random smooth fields on `(0, 1)`.
pub fn gn_scan(count: usize, n: usize, seed: u64, exec: Execution) -> Result<f64> {
    let grid = make_grid(0.0, 1.0, n)?;
    let values = exec::map_indexed(count, exec, |i| {
        let mut rng = start_rng(seed, i);
        gn_quotient(&random_smooth_field(grid, &mut rng))
    });
    values
        .into_iter()
        .try_fold(0.0f64, |acc, v| Ok(acc.max(v?)))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::field::sample_function;
    use crate::optimizer::gradient_fd_check;

    #[test]
    fn constant_has_infinite_quotient() {
        let g = make_grid(0.0, 1.0, 51).unwrap();
        let q = rayleigh_quotient(
            &Field::constant(g, 1.0),
            &Potential::standard_quartic(),
            &BoundarySpec::free(),
        );
        assert_eq!(q, f64::INFINITY);
    }

    #[test]
    fn quadratic_member_quotient() {
        let g = make_grid(0.0, 1.0, 4001).unwrap();
        let u = sample_function(g, |x| 1.0 - (x - 1.0) * (x - 1.0)).unwrap();
        let bc = BoundarySpec::new(
            EndCondition::Value { value: 0.0 },
            EndCondition::Slope { slope: 0.0 },
        );
        let pot = Potential::standard_quartic();
        let q = rayleigh_quotient(&u, &pot, &bc);
        let exact = (107.0 / 1260.0 + 4.0) * 0.75;
        assert!((q - exact).abs() < 1e-3, "{q}");
        // the unscaled energy changes sign exactly at k = R(u)
        let e = |k: f64| crate::energy::energy_unscaled(&u, k, &pot, &bc);
        assert!(e(q - 0.01) > 0.0);
        assert!(e(q + 0.01) < 0.0);
    }

    #[test]
    fn closed_form_member() {
        let exact = (107.0 / 1260.0 + 4.0) * 0.75;
        assert!((quadratic_family_quotient(1.0, 1.0) - exact).abs() < 1e-12);
        assert!((exact - 3.063690).abs() < 1e-6);
    }

    #[test]
    fn closed_form_matches_quadrature() {
        let pot = Potential::standard_quartic();
        for &(h, l) in &[(1.0, 1.0), (1.119, 2.96), (0.7, 5.0)] {
            let g = make_grid(0.0, l, 4001).unwrap();
            let u = sample_function(g, |x| h * h - h * h * (x - l) * (x - l) / (l * l)).unwrap();
            let q = rayleigh_quotient(&u, &pot, &k1_boundary());
            let exact = quadratic_family_quotient(h, l);
            assert!((q - exact).abs() <= 1e-4 * exact, "{h} {l}: {q} vs {exact}");
        }
    }

    #[test]
    fn quadratic_family_minimum() {
        let m = minimize_quadratic_family();
        // analytic minimum: h⁸ = 315/128, then 2·sqrt(3 (2√(128·315) − 336) / 1680)
        let oracle = 2.0 * (3.0 * (2.0 * (128.0f64 * 315.0).sqrt() - 336.0) / 1680.0).sqrt();
        assert!((m.value - oracle).abs() < 1e-12, "{} vs {oracle}", m.value);
        assert!((m.value - 0.6846).abs() <= 5e-4);
        assert!(m.value <= quadratic_family_quotient(1.0, 1.0));
        let d = 1e-6;
        let dh = (quadratic_family_quotient(m.h + d, m.l)
            - quadratic_family_quotient(m.h - d, m.l))
            / (2.0 * d);
        let dl = (quadratic_family_quotient(m.h, m.l + d)
            - quadratic_family_quotient(m.h, m.l - d))
            / (2.0 * d);
        assert!(dh.abs() <= 1e-6 && dl.abs() <= 1e-6, "{dh} {dl}");
    }

    #[test]
    fn lower_bound_value() {
        let b = lower_bound_k1();
        assert!((b.value - 0.125).abs() <= 1e-6);
        assert!((k1_lower_bound_at(10.0, 1.0) - 0.125).abs() < 1e-15);
        // second branch at L = 10: 2 (1 + 0.12)² = 2.5088 < 8
        assert!(2.0 * 1.12f64.powi(2) < 8.0);
        assert_eq!(k1_lower_bound_at(1.0, 1.0), 2.0);
    }

    #[test]
    fn jensen_examples() {
        let g = make_grid(0.0, 1.0, 2001).unwrap();
        let u = sample_function(g, |x| -(x - 1.0) * (x - 1.0) / 2.0).unwrap();
        assert!((check_jensen(&u) - 1.0 / 6.0).abs() < 1e-4);
        assert!(check_jensen(&Field::constant(g, 3.0)).abs() < 1e-12);
    }

    #[test]
    fn linear_interpolation_examples() {
        assert_eq!(linear_interpolation_constant(1.0, 1.0), 13.0);
        let g = make_grid(0.0, 1.0, 201).unwrap();
        let u = Field::constant(g, 0.5);
        let s = check_linear_interpolation(&u, 1.0);
        assert!((s - 13.0 * 0.5).abs() < 1e-9);
    }

    #[test]
    fn identity_is_algebraic() {
        for &(u, du, d2u, c) in &[
            (0.3, -1.2, 4.0, 0.7),
            (-2.0, 0.5, -0.1, 1.9),
            (1.0, 0.0, 0.0, 0.05),
        ] {
            for sign in [1.0, -1.0] {
                assert!(identity_residual(u, du, d2u, c, sign).abs() < 1e-12);
            }
            assert_eq!(
                identity_residual(u, du, d2u, c, 1.0).abs(),
                identity_residual(-u, -du, -d2u, c, -1.0).abs()
            );
        }
    }

    #[test]
    fn gn_examples() {
        let g = make_grid(0.0, 1.0, 101).unwrap();
        assert_eq!(gn_quotient(&Field::constant(g, 1.0)).unwrap(), 0.0);
        assert!(gn_quotient(&Field::constant(g, 0.0)).is_err());
    }

    #[test]
    fn quotient_gradient_matches_differences() {
        let g = make_grid(0.0, 2.0, 81).unwrap();
        let u = sample_function(g, |x| {
            1.1 * (1.0 - (1.0 - x / 2.0).powi(2)) + 0.05 * (5.0 * x).sin() * x
        })
        .unwrap();
        let obj = RayleighObjective::new(g, &k1_boundary(), &Potential::standard_quartic());
        let err = gradient_fd_check(&obj, &u, &k1_boundary(), 1e-6);
        assert!(err <= 1e-5, "{err}");
    }

    #[test]
    fn oscillatory_family_shape() {
        let (alpha, l, eps) = (1.0, 1.0, 1.0 / 60.0);
        let u = build_oscillatory_family(alpha, l, eps, FamilyCenter::ZeroWell, 6001).unwrap();
        assert_eq!(u.values()[0], 0.0);
        let max = u.values().iter().fold(0.0f64, |a, v| a.max(v.abs()));
        assert!(max <= 2.0 * l * alpha);
        assert!((max - 1.25 * l * alpha).abs() < 1e-3);
        let v = build_oscillatory_family(alpha, l, eps, FamilyCenter::PlusWell, 6001).unwrap();
        assert_eq!(v.values()[0], 1.0);
        assert!(build_oscillatory_family(alpha, 0.7, eps, FamilyCenter::ZeroWell, 6001).is_err());
        assert!(build_oscillatory_family(alpha, l, eps, FamilyCenter::ZeroWell, 101).is_err());
    }
}
