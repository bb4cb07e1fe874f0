//! Numerical toolkit for second-order phase-transition energies
//!
//! ```text
//! F_ε^k(u) = ∫ W(u)/ε - k ε (u')² + ε³ (u'')²
//! ```
//!
//! on bounded intervals: discretization, exact gradients, limited-memory
//! quasi-Newton minimization, the optimal transition profile constant
//! `m_k`, and Rayleigh-quotient estimates of the interpolation constants
//! `k₀` and `k₁` together with their closed-form bounds.

// `!(x > 0.0)` rejects NaN along with nonpositive values
#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod energy;
pub mod error;
pub mod exec;
pub mod field;
pub mod inequalities;
pub mod optimizer;
pub mod potential;
pub mod profile;

pub use energy::{
    energy_e0, energy_gradient, energy_modica_mortola, energy_second_order, energy_unscaled,
    stima_gap, DiscreteEnergy, EnergyBreakdown, EnergyParams, TermScales,
};
pub use error::{Error, Result};
pub use exec::Execution;
pub use field::{
    derivative1, derivative2, distance_l1, integrate, make_grid, sample_function, BoundarySpec,
    EndCondition, Field, Grid,
};
pub use optimizer::{
    gradient_fd_check, minimize_energy, Objective, SolveOptions, SolveReport, Termination,
};
pub use potential::{make_counterexample_potential, verify_growth, Counterexample, Potential};
