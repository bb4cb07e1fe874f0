//! Discrete second-order phase-transition energies and their exact gradients.
//!
//! Every energy here has the shape
//!
//! ```text
//! P - k G + C,   P = sp ∫ W(u),   G = sg ∫ (u')^2,   C = sc ∫ (u'')^2
//! ```
//!
//! with trapezoid quadrature and the stencils of [`DiffOperator`]. The
//! scaled functional uses `(sp, sg, sc) = (1/ε, ε, ε³)`, the unscaled
//! (blown-up) one `(1, 1, 1)`, and the first-order Modica–Mortola energy
//! `(1/ε, ε, 0)` with `k = -1`. The gradient is the derivative of exactly
//! this sum, not a discretized Euler–Lagrange operator.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::field::{BandedSpd, BoundarySpec, DiffOperator, Field, Grid};
use crate::optimizer::{Objective, Preconditioner};
use crate::potential::Potential;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct EnergyParams {
    pub epsilon: f64,
    pub k: f64,
    pub potential: Potential,
}

impl EnergyParams {
    pub fn new(epsilon: f64, k: f64, potential: Potential) -> Result<Self> {
        if !(epsilon > 0.0) || !epsilon.is_finite() {
            return Err(Error::InvalidArgument(format!(
                "epsilon must be positive, got {epsilon}"
            )));
        }
        if !k.is_finite() {
            return Err(Error::InvalidArgument("k must be finite".into()));
        }
        Ok(EnergyParams {
            epsilon,
            k,
            potential,
        })
    }
}

/// The three unsigned terms and the signed total.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct EnergyBreakdown {
    #[serde(rename = "potential")]
    pub potential_term: f64,
    #[serde(rename = "gradient")]
    pub gradient_term: f64,
    #[serde(rename = "curvature")]
    pub curvature_term: f64,
    pub total: f64,
}

/// Term scales `(sp, sg, sc)` and the gradient coefficient `k`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct TermScales {
    pub potential: f64,
    pub gradient: f64,
    pub curvature: f64,
    pub k: f64,
}

impl TermScales {
    pub fn scaled(epsilon: f64, k: f64) -> Self {
        TermScales {
            potential: 1.0 / epsilon,
            gradient: epsilon,
            curvature: epsilon.powi(3),
            k,
        }
    }

    pub fn unscaled(k: f64) -> Self {
        TermScales {
            potential: 1.0,
            gradient: 1.0,
            curvature: 1.0,
            k,
        }
    }

    pub fn modica_mortola(epsilon: f64) -> Self {
        TermScales {
            potential: 1.0 / epsilon,
            gradient: epsilon,
            curvature: 0.0,
            k: -1.0,
        }
    }
}

/// Raw quadratures of one field: `∫W(u)`, `∫(u')^2`, `∫(u'')^2`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Integrals {
    pub potential: f64,
    pub slope: f64,
    pub curvature: f64,
}

/// Discretized energy on a fixed grid and boundary specification.
#[derive(Debug, Clone)]
pub struct DiscreteEnergy {
    grid: Grid,
    bc: BoundarySpec,
    first: DiffOperator,
    second: DiffOperator,
    weights: Vec<f64>,
    potential: Potential,
    scales: TermScales,
}

impl DiscreteEnergy {
    pub fn new(grid: Grid, bc: &BoundarySpec, potential: Potential, scales: TermScales) -> Self {
        DiscreteEnergy {
            first: DiffOperator::first(&grid, bc),
            second: DiffOperator::second(&grid, bc),
            weights: grid.weights(),
            grid,
            bc: bc.clone(),
            potential,
            scales,
        }
    }

    pub fn scaled(grid: Grid, bc: &BoundarySpec, p: &EnergyParams) -> Self {
        Self::new(
            grid,
            bc,
            p.potential.clone(),
            TermScales::scaled(p.epsilon, p.k),
        )
    }

    pub fn grid(&self) -> &Grid {
        &self.grid
    }

    pub fn boundary(&self) -> &BoundarySpec {
        &self.bc
    }

    pub fn scales(&self) -> TermScales {
        self.scales
    }

    pub fn integrals(&self, u: &[f64]) -> Integrals {
        let d1 = self.first.apply(u);
        let d2 = self.second.apply(u);
        let mut out = Integrals {
            potential: 0.0,
            slope: 0.0,
            curvature: 0.0,
        };
        for i in 0..u.len() {
            let w = self.weights[i];
            out.potential += w * self.potential.eval_w(u[i]);
            out.slope += w * d1[i] * d1[i];
            out.curvature += w * d2[i] * d2[i];
        }
        out
    }

    pub fn breakdown(&self, u: &[f64]) -> EnergyBreakdown {
        let q = self.integrals(u);
        let s = self.scales;
        let potential_term = s.potential * q.potential;
        let gradient_term = s.gradient * q.slope;
        let curvature_term = s.curvature * q.curvature;
        EnergyBreakdown {
            potential_term,
            gradient_term,
            curvature_term,
            total: potential_term - s.k * gradient_term + curvature_term,
        }
    }

    /// Total energy and its gradient with respect to every nodal value
    /// (constrained nodes included).
    pub fn value_and_gradient(&self, u: &[f64], grad: &mut [f64]) -> f64 {
        let s = self.scales;
        let d1 = self.first.apply(u);
        let d2 = self.second.apply(u);
        let mut p = 0.0;
        let mut g = 0.0;
        let mut c = 0.0;
        let mut wd1 = vec![0.0; u.len()];
        let mut wd2 = vec![0.0; u.len()];
        for i in 0..u.len() {
            let w = self.weights[i];
            p += w * self.potential.eval_w(u[i]);
            g += w * d1[i] * d1[i];
            c += w * d2[i] * d2[i];
            grad[i] = s.potential * w * self.potential.eval_dw_lenient(u[i]);
            wd1[i] = w * d1[i];
            wd2[i] = w * d2[i];
        }
        if s.k != 0.0 && s.gradient != 0.0 {
            self.first
                .apply_transpose_add(&wd1, -2.0 * s.k * s.gradient, grad);
        }
        if s.curvature != 0.0 {
            self.second
                .apply_transpose_add(&wd2, 2.0 * s.curvature, grad);
        }
        s.potential * p - s.k * s.gradient * g + s.curvature * c
    }

    /// Banded SPD approximation of the Hessian on the free nodes: the
    /// well curvature on the diagonal plus the nonnegative quadratic parts.
    pub(crate) fn hessian_model(&self, free: &[bool]) -> Option<Preconditioner> {
        let s = self.scales;
        let n = self.grid.n();
        let mut m = BandedSpd::zeros(n, 3);
        let diag = 2.0 * s.potential.abs();
        for i in 0..n {
            m.add(i, i, diag * self.weights[i]);
        }
        if s.curvature > 0.0 {
            self.second
                .gram_add(&self.weights, 2.0 * s.curvature, &mut m);
        }
        if s.k < 0.0 && s.gradient > 0.0 {
            self.first
                .gram_add(&self.weights, -2.0 * s.k * s.gradient, &mut m);
        }
        Preconditioner::from_banded(m, free)
    }
}

impl Objective for DiscreteEnergy {
    fn evaluate(&self, u: &[f64], grad: &mut [f64]) -> f64 {
        self.value_and_gradient(u, grad)
    }

    fn preconditioner(&self, free: &[bool]) -> Option<Preconditioner> {
        self.hessian_model(free)
    }
}

/// `F_ε^k(u) = ∫ W(u)/ε - k ε (u')^2 + ε³ (u'')^2`.
pub fn energy_second_order(u: &Field, p: &EnergyParams, bc: &BoundarySpec) -> EnergyBreakdown {
    DiscreteEnergy::scaled(*u.grid(), bc, p).breakdown(u.values())
}

/// `E_ε = F_ε^0`.
pub fn energy_e0(u: &Field, epsilon: f64, pot: &Potential, bc: &BoundarySpec) -> EnergyBreakdown {
    DiscreteEnergy::new(*u.grid(), bc, pot.clone(), TermScales::scaled(epsilon, 0.0))
        .breakdown(u.values())
}

/// `∫ W(u)/ε + ε (u')^2`.
pub fn energy_modica_mortola(u: &Field, epsilon: f64, pot: &Potential, bc: &BoundarySpec) -> f64 {
    DiscreteEnergy::new(
        *u.grid(),
        bc,
        pot.clone(),
        TermScales::modica_mortola(epsilon),
    )
    .breakdown(u.values())
    .total
}

/// `∫ W(u) - k (u')^2 + (u'')^2` with no ε factors.
pub fn energy_unscaled(u: &Field, k: f64, pot: &Potential, bc: &BoundarySpec) -> f64 {
    DiscreteEnergy::new(*u.grid(), bc, pot.clone(), TermScales::unscaled(k))
        .breakdown(u.values())
        .total
}

/// Exact gradient of the discrete `F_ε^k`; constrained nodes get zero.
pub fn energy_gradient(u: &Field, p: &EnergyParams, bc: &BoundarySpec) -> Field {
    let e = DiscreteEnergy::scaled(*u.grid(), bc, p);
    let mut grad = vec![0.0; u.values().len()];
    e.value_and_gradient(u.values(), &mut grad);
    let free = bc.free_mask(grad.len());
    for (g, free) in grad.iter_mut().zip(free) {
        if !free {
            *g = 0.0;
        }
    }
    Field::new(*u.grid(), grad).expect("gradient of a finite field is finite")
}

/// `F_ε^k(u) - (1 - k/k0 - δ) E_ε(u)`; nonnegative values certify the lower
/// bound of `F_ε^k` by `E_ε` at this `u`.
pub fn stima_gap(
    u: &Field,
    p: &EnergyParams,
    bc: &BoundarySpec,
    k0_est: f64,
    delta: f64,
) -> Result<f64> {
    if !(k0_est > 0.0) {
        return Err(Error::InvalidArgument(
            "k0 estimate must be positive".into(),
        ));
    }
    let b = energy_second_order(u, p, bc);
    let e0 = b.potential_term + b.curvature_term;
    Ok(b.total - (1.0 - p.k / k0_est - delta) * e0)
}
