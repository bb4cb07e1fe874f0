//! Double-well potentials with wells at `-1` and `+1`.
//!
//! The wells are fixed. A potential with wells at `a < b` can be brought to
//! this form by the affine change `s -> (2s - a - b) / (b - a)`, which is left
//! to the caller.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Well locations shared by every potential in this crate.
pub const WELLS: (f64, f64) = (-1.0, 1.0);

/// Half-width of the region where [`PotentialKind::BoundedTail`] agrees with
/// the quartic.
pub const BOUNDED_TAIL_CUTOFF: f64 = 2.0;

/// Piecewise polynomial `W`, one coefficient row (ascending powers of `s`)
/// per interval between consecutive breakpoints. Outside the outer
/// breakpoints the edge pieces are extended.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PiecewisePolynomial {
    pub breakpoints: Vec<f64>,
    pub coefficients: Vec<Vec<f64>>,
}

impl PiecewisePolynomial {
    pub fn new(breakpoints: Vec<f64>, coefficients: Vec<Vec<f64>>) -> Result<Self> {
        if breakpoints.len() < 2 || coefficients.len() != breakpoints.len() - 1 {
            return Err(Error::InvalidPotential(
                "need k+1 breakpoints for k coefficient rows".into(),
            ));
        }
        if breakpoints.windows(2).any(|w| !(w[0] < w[1])) {
            return Err(Error::InvalidPotential(
                "breakpoints must be strictly increasing".into(),
            ));
        }
        if coefficients.iter().any(|c| c.is_empty()) {
            return Err(Error::InvalidPotential("empty coefficient row".into()));
        }
        if breakpoints
            .iter()
            .chain(coefficients.iter().flatten())
            .any(|v| !v.is_finite())
        {
            return Err(Error::InvalidPotential("non-finite table entry".into()));
        }
        let pp = PiecewisePolynomial {
            breakpoints,
            coefficients,
        };
        for (i, &x) in pp.breakpoints[1..pp.breakpoints.len() - 1]
            .iter()
            .enumerate()
        {
            let left = horner(&pp.coefficients[i], x);
            let right = horner(&pp.coefficients[i + 1], x);
            if (left - right).abs() > 1e-9 * (1.0 + left.abs()) {
                return Err(Error::InvalidPotential(format!(
                    "discontinuous at breakpoint {x}"
                )));
            }
        }
        Ok(pp)
    }

    fn piece(&self, s: f64) -> usize {
        let inner = &self.breakpoints[1..self.breakpoints.len() - 1];
        inner.partition_point(|&b| b <= s)
    }

    pub fn eval(&self, s: f64) -> f64 {
        horner(&self.coefficients[self.piece(s)], s)
    }

    pub fn derivative(&self, s: f64) -> Result<f64> {
        let i = self.piece(s);
        let d = horner_derivative(&self.coefficients[i], s);
        // at an interior breakpoint the left piece must agree
        if i > 0 && s == self.breakpoints[i] {
            let left = horner_derivative(&self.coefficients[i - 1], s);
            if (left - d).abs() > 1e-9 * (1.0 + d.abs()) {
                return Err(Error::NonDifferentiable(s));
            }
        }
        Ok(d)
    }
}

fn horner(c: &[f64], s: f64) -> f64 {
    c.iter().rev().fold(0.0, |acc, &a| acc * s + a)
}

fn horner_derivative(c: &[f64], s: f64) -> f64 {
    c.iter()
        .enumerate()
        .skip(1)
        .rev()
        .fold(0.0, |acc, (p, &a)| acc * s + p as f64 * a)
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum PotentialKind {
    /// `(s^2 - 1)^2 / 4`.
    StandardQuartic,
    /// The quartic on `[-2, 2]`, continued by the constant `W(2)` outside.
    /// Fails quadratic growth at infinity.
    BoundedTail,
    /// `(s^2 - 1)^4 / 4`: touches zero to fourth order at the wells.
    FlatWells,
    Custom(PiecewisePolynomial),
}

/// A nonnegative double-well potential.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Potential {
    pub kind: PotentialKind,
    /// The `c` of the quadratic growth hypothesis `W(s) >= c (s -/+ 1)^2`,
    /// when known.
    pub growth_constant: Option<f64>,
}

/// The two counterexamples to the growth hypothesis.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Counterexample {
    BoundedTail,
    FlatWells,
}

fn quartic(s: f64) -> f64 {
    let q = s * s - 1.0;
    q * q / 4.0
}

fn quartic_derivative(s: f64) -> f64 {
    s * (s * s - 1.0)
}

impl Potential {
    pub fn standard_quartic() -> Self {
        Potential {
            kind: PotentialKind::StandardQuartic,
            growth_constant: Some(0.25),
        }
    }

    /// Builds a custom potential and checks nonnegativity and the wells on a
    /// sample of `[-10, 10]`.
    pub fn custom(table: PiecewisePolynomial) -> Result<Self> {
        let p = Potential {
            kind: PotentialKind::Custom(table),
            growth_constant: None,
        };
        for &w in &[WELLS.0, WELLS.1] {
            if p.eval_w(w).abs() > 1e-12 {
                return Err(Error::InvalidPotential(format!("W({w}) != 0")));
            }
        }
        for i in 0..=4000 {
            let s = -10.0 + 20.0 * i as f64 / 4000.0;
            let w = p.eval_w(s);
            if !(w >= -1e-12) {
                return Err(Error::InvalidPotential(format!("W({s}) = {w} < 0")));
            }
        }
        Ok(p)
    }

    /// Looks a built-in potential up by its configuration name.
    pub fn by_name(name: &str) -> Result<Self> {
        match name {
            "standard_quartic" => Ok(Self::standard_quartic()),
            "bounded_tail" => Ok(make_counterexample_potential(Counterexample::BoundedTail)),
            "flat_wells" => Ok(make_counterexample_potential(Counterexample::FlatWells)),
            other => Err(Error::InvalidPotential(format!(
                "unknown potential {other:?}"
            ))),
        }
    }

    pub fn name(&self) -> &'static str {
        match self.kind {
            PotentialKind::StandardQuartic => "standard_quartic",
            PotentialKind::BoundedTail => "bounded_tail",
            PotentialKind::FlatWells => "flat_wells",
            PotentialKind::Custom(_) => "custom",
        }
    }

    pub fn eval_w(&self, s: f64) -> f64 {
        match &self.kind {
            PotentialKind::StandardQuartic => quartic(s),
            PotentialKind::BoundedTail => {
                quartic(s.clamp(-BOUNDED_TAIL_CUTOFF, BOUNDED_TAIL_CUTOFF))
            }
            PotentialKind::FlatWells => {
                let q = s * s - 1.0;
                let q2 = q * q;
                q2 * q2 / 4.0
            }
            PotentialKind::Custom(pp) => pp.eval(s),
        }
    }

    pub fn eval_dw(&self, s: f64) -> Result<f64> {
        match &self.kind {
            PotentialKind::StandardQuartic => Ok(quartic_derivative(s)),
            PotentialKind::BoundedTail => {
                if s.abs() < BOUNDED_TAIL_CUTOFF {
                    Ok(quartic_derivative(s))
                } else if s.abs() > BOUNDED_TAIL_CUTOFF {
                    Ok(0.0)
                } else {
                    Err(Error::NonDifferentiable(s))
                }
            }
            PotentialKind::FlatWells => {
                let q = s * s - 1.0;
                Ok(2.0 * s * q * q * q)
            }
            PotentialKind::Custom(pp) => pp.derivative(s),
        }
    }

    /// Derivative used inside energy gradients, where kinks are measure zero:
    /// at a non-differentiable point the average of the one-sided slopes.
    pub(crate) fn eval_dw_lenient(&self, s: f64) -> f64 {
        match self.eval_dw(s) {
            Ok(d) => d,
            Err(_) => {
                let h = 1e-7 * (1.0 + s.abs());
                (self.eval_w(s + h) - self.eval_w(s - h)) / (2.0 * h)
            }
        }
    }

    pub fn is_even(&self) -> bool {
        !matches!(self.kind, PotentialKind::Custom(_))
    }
}

pub fn make_counterexample_potential(which: Counterexample) -> Potential {
    match which {
        Counterexample::BoundedTail => Potential {
            kind: PotentialKind::BoundedTail,
            growth_constant: None,
        },
        Counterexample::FlatWells => Potential {
            kind: PotentialKind::FlatWells,
            growth_constant: None,
        },
    }
}

/// Outcome of a sampled growth check.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct GrowthCheck {
    pub holds: bool,
    /// Sample point with the smallest slack `W(s) - c (s -/+ 1)^2`.
    pub witness: f64,
    pub slack: f64,
}

/// Samples `W(s) >= c (s - 1)^2` for `s >= 0` and `W(s) >= c (s + 1)^2` for
/// `s <= 0` on a uniform grid of `[-s_max, s_max]`.
pub fn verify_growth(
    p: &Potential,
    c: f64,
    sample_count: usize,
    s_max: f64,
) -> Result<GrowthCheck> {
    if sample_count < 2 {
        return Err(Error::InvalidArgument(
            "sample_count must be at least 2".into(),
        ));
    }
    if !(c > 0.0) || !(s_max > 0.0) {
        return Err(Error::InvalidArgument(
            "c and s_max must be positive".into(),
        ));
    }
    let mut worst = GrowthCheck {
        holds: true,
        witness: 0.0,
        slack: f64::INFINITY,
    };
    let step = 2.0 * s_max / (sample_count - 1) as f64;
    for i in 0..sample_count {
        let s = -s_max + step * i as f64;
        let w = p.eval_w(s);
        let mut slack = f64::INFINITY;
        if s >= 0.0 {
            slack = slack.min(w - c * (s - 1.0) * (s - 1.0));
        }
        if s <= 0.0 {
            slack = slack.min(w - c * (s + 1.0) * (s + 1.0));
        }
        if slack < worst.slack {
            worst.slack = slack;
            worst.witness = s;
        }
    }
    worst.holds = worst.slack >= -1e-12;
    Ok(worst)
}
