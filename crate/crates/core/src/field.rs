//! Nodal fields on uniform grids, finite-difference derivatives and
//! trapezoidal quadrature.
//!
//! Derivatives are affine maps of the nodal values (a clamped slope enters as
//! a constant), so they are stored as sparse [`DiffOperator`]s that can be
//! applied and transposed. The energies and their exact gradients are built
//! on top of the same operators.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Grid {
    a: f64,
    b: f64,
    n: usize,
}

pub fn make_grid(a: f64, b: f64, n: usize) -> Result<Grid> {
    Grid::new(a, b, n)
}

impl Grid {
    pub fn new(a: f64, b: f64, n: usize) -> Result<Self> {
        if n < 3 {
            return Err(Error::InvalidGrid(format!(
                "need at least 3 nodes, got {n}"
            )));
        }
        if !(a.is_finite() && b.is_finite()) || !(a < b) {
            return Err(Error::InvalidGrid(format!("need a < b, got ({a}, {b})")));
        }
        Ok(Grid { a, b, n })
    }

    pub fn a(&self) -> f64 {
        self.a
    }

    pub fn b(&self) -> f64 {
        self.b
    }

    pub fn n(&self) -> usize {
        self.n
    }

    pub fn len(&self) -> f64 {
        self.b - self.a
    }

    pub fn h(&self) -> f64 {
        (self.b - self.a) / (self.n - 1) as f64
    }

    pub fn x(&self, i: usize) -> f64 {
        if i == self.n - 1 {
            self.b
        } else {
            self.a + i as f64 * self.h()
        }
    }

    pub fn nodes(&self) -> impl Iterator<Item = f64> + '_ {
        (0..self.n).map(move |i| self.x(i))
    }

    /// Composite trapezoid weights.
    pub fn weights(&self) -> Vec<f64> {
        let h = self.h();
        let mut w = vec![h; self.n];
        w[0] = h / 2.0;
        w[self.n - 1] = h / 2.0;
        w
    }

    /// Same node count on a different interval.
    pub fn with_interval(&self, a: f64, b: f64) -> Result<Grid> {
        Grid::new(a, b, self.n)
    }
}

/// Boundary behaviour at one endpoint.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum EndCondition {
    Free,
    /// Node pinned to `value`, slope free.
    Value {
        value: f64,
    },
    /// Node pinned to `value` and slope imposed.
    Clamped {
        value: f64,
        slope: f64,
    },
    /// Slope imposed, node value free.
    Slope {
        slope: f64,
    },
}

impl EndCondition {
    pub fn pinned_value(&self) -> Option<f64> {
        match *self {
            EndCondition::Value { value } | EndCondition::Clamped { value, .. } => Some(value),
            _ => None,
        }
    }

    pub fn slope(&self) -> Option<f64> {
        match *self {
            EndCondition::Clamped { slope, .. } | EndCondition::Slope { slope } => Some(slope),
            _ => None,
        }
    }

    fn mirrored(self) -> Self {
        match self {
            EndCondition::Clamped { value, slope } => EndCondition::Clamped {
                value,
                slope: -slope,
            },
            EndCondition::Slope { slope } => EndCondition::Slope { slope: -slope },
            other => other,
        }
    }

    fn negated(self) -> Self {
        match self {
            EndCondition::Free => EndCondition::Free,
            EndCondition::Value { value } => EndCondition::Value { value: -value },
            EndCondition::Clamped { value, slope } => EndCondition::Clamped {
                value: -value,
                slope: -slope,
            },
            EndCondition::Slope { slope } => EndCondition::Slope { slope: -slope },
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct BoundarySpec {
    pub left: EndCondition,
    pub right: EndCondition,
    /// Interior nodes pinned to a value, as `(index, value)`.
    #[serde(default, skip_serializing_if = "Vec::is_empty")]
    pub pinned: Vec<(usize, f64)>,
}

impl BoundarySpec {
    pub fn new(left: EndCondition, right: EndCondition) -> Self {
        BoundarySpec {
            left,
            right,
            pinned: Vec::new(),
        }
    }

    pub fn free() -> Self {
        Self::new(EndCondition::Free, EndCondition::Free)
    }

    pub fn dirichlet(left: f64, right: f64) -> Self {
        Self::new(
            EndCondition::Value { value: left },
            EndCondition::Value { value: right },
        )
    }

    pub fn clamped(left: (f64, f64), right: (f64, f64)) -> Self {
        Self::new(
            EndCondition::Clamped {
                value: left.0,
                slope: left.1,
            },
            EndCondition::Clamped {
                value: right.0,
                slope: right.1,
            },
        )
    }

    pub fn with_pinned(mut self, index: usize, value: f64) -> Self {
        self.pinned.push((index, value));
        self
    }

    /// Boundary data for the field read right to left.
    pub fn reflected(&self, n: usize) -> Self {
        BoundarySpec {
            left: self.right.mirrored(),
            right: self.left.mirrored(),
            pinned: self.pinned.iter().map(|&(i, v)| (n - 1 - i, v)).collect(),
        }
    }

    /// Boundary data for `-u`.
    pub fn negated(&self) -> Self {
        BoundarySpec {
            left: self.left.negated(),
            right: self.right.negated(),
            pinned: self.pinned.iter().map(|&(i, v)| (i, -v)).collect(),
        }
    }

    /// `true` for nodes the optimizer may move.
    pub fn free_mask(&self, n: usize) -> Vec<bool> {
        let mut mask = vec![true; n];
        if self.left.pinned_value().is_some() {
            mask[0] = false;
        }
        if self.right.pinned_value().is_some() {
            mask[n - 1] = false;
        }
        for &(i, _) in &self.pinned {
            if i < n {
                mask[i] = false;
            }
        }
        mask
    }

    /// Writes the pinned values into `values`.
    pub fn apply_constraints(&self, values: &mut [f64]) {
        let n = values.len();
        if let Some(v) = self.left.pinned_value() {
            values[0] = v;
        }
        if let Some(v) = self.right.pinned_value() {
            values[n - 1] = v;
        }
        for &(i, v) in &self.pinned {
            if i < n {
                values[i] = v;
            }
        }
    }

    pub fn is_satisfied_by(&self, values: &[f64]) -> bool {
        let mut copy = values.to_vec();
        self.apply_constraints(&mut copy);
        copy == values
    }
}

/// Nodal values of a function on a [`Grid`].
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(try_from = "FieldRecord", into = "FieldRecord")]
pub struct Field {
    grid: Grid,
    values: Vec<f64>,
}

#[derive(Serialize, Deserialize)]
struct FieldRecord {
    a: f64,
    b: f64,
    n: usize,
    values: Vec<f64>,
}

impl From<Field> for FieldRecord {
    fn from(f: Field) -> Self {
        FieldRecord {
            a: f.grid.a,
            b: f.grid.b,
            n: f.grid.n,
            values: f.values,
        }
    }
}

impl TryFrom<FieldRecord> for Field {
    type Error = Error;

    fn try_from(r: FieldRecord) -> Result<Self> {
        Field::new(Grid::new(r.a, r.b, r.n)?, r.values)
    }
}

impl Field {
    pub fn new(grid: Grid, values: Vec<f64>) -> Result<Self> {
        if values.len() != grid.n {
            return Err(Error::InvalidGrid(format!(
                "{} values for {} nodes",
                values.len(),
                grid.n
            )));
        }
        if let Some(i) = values.iter().position(|v| !v.is_finite()) {
            return Err(Error::NonFiniteSample { x: grid.x(i) });
        }
        Ok(Field { grid, values })
    }

    pub fn constant(grid: Grid, value: f64) -> Self {
        Field {
            grid,
            values: vec![value; grid.n],
        }
    }

    pub fn grid(&self) -> &Grid {
        &self.grid
    }

    pub fn values(&self) -> &[f64] {
        &self.values
    }

    pub fn into_values(self) -> Vec<f64> {
        self.values
    }

    pub fn map(&self, f: impl Fn(f64) -> f64) -> Result<Field> {
        Field::new(self.grid, self.values.iter().map(|&v| f(v)).collect())
    }

    /// Values read right to left.
    pub fn reversed(&self) -> Field {
        let mut values = self.values.clone();
        values.reverse();
        Field {
            grid: self.grid,
            values,
        }
    }

    pub fn to_json(&self) -> Result<String> {
        Ok(serde_json::to_string(self)?)
    }

    pub fn from_json(s: &str) -> Result<Field> {
        Ok(serde_json::from_str(s)?)
    }

    /// Two-column `x,u` CSV with a header line.
    pub fn to_csv(&self) -> String {
        let mut out = String::from("x,u\n");
        for (x, u) in self.grid.nodes().zip(&self.values) {
            out.push_str(&format!("{x},{u}\n"));
        }
        out
    }
}

pub fn sample_function(g: Grid, f: impl Fn(f64) -> f64) -> Result<Field> {
    let values = g.nodes().map(&f).collect();
    Field::new(g, values)
}

/// One row of a sparse affine operator: `sum coef * u[idx] + offset`.
#[derive(Debug, Clone, Default)]
struct Row {
    terms: [(usize, f64); 4],
    len: usize,
    offset: f64,
}

impl Row {
    fn new(terms: &[(usize, f64)], offset: f64) -> Self {
        let mut r = Row {
            offset,
            ..Row::default()
        };
        for &t in terms {
            r.terms[r.len] = t;
            r.len += 1;
        }
        r
    }

    fn terms(&self) -> &[(usize, f64)] {
        &self.terms[..self.len]
    }
}

/// A finite-difference operator `u -> D u + c` on a fixed grid.
#[derive(Debug, Clone)]
pub struct DiffOperator {
    rows: Vec<Row>,
}

impl DiffOperator {
    /// Central first differences; at an endpoint the imposed slope if any,
    /// otherwise the second-order one-sided formula.
    pub fn first(grid: &Grid, bc: &BoundarySpec) -> Self {
        let n = grid.n;
        let h = grid.h();
        let c = 1.0 / (2.0 * h);
        let mut rows = Vec::with_capacity(n);
        rows.push(match bc.left.slope() {
            Some(s) => Row::new(&[], s),
            None => Row::new(&[(0, -3.0 * c), (1, 4.0 * c), (2, -c)], 0.0),
        });
        for i in 1..n - 1 {
            rows.push(Row::new(&[(i - 1, -c), (i + 1, c)], 0.0));
        }
        rows.push(match bc.right.slope() {
            Some(s) => Row::new(&[], s),
            None => Row::new(&[(n - 3, c), (n - 2, -4.0 * c), (n - 1, 3.0 * c)], 0.0),
        });
        DiffOperator { rows }
    }

    /// Three-point second differences; at an endpoint with imposed slope a
    /// reflected ghost node `u[-1] = u[1] - 2 h slope`, otherwise the
    /// second-order one-sided formula (first order when `n == 3`).
    pub fn second(grid: &Grid, bc: &BoundarySpec) -> Self {
        let n = grid.n;
        let h = grid.h();
        let c = 1.0 / (h * h);
        let mut rows = Vec::with_capacity(n);
        rows.push(match bc.left.slope() {
            Some(s) => Row::new(&[(0, -2.0 * c), (1, 2.0 * c)], -2.0 * s / h),
            None if n >= 4 => Row::new(&[(0, 2.0 * c), (1, -5.0 * c), (2, 4.0 * c), (3, -c)], 0.0),
            None => Row::new(&[(0, c), (1, -2.0 * c), (2, c)], 0.0),
        });
        for i in 1..n - 1 {
            rows.push(Row::new(&[(i - 1, c), (i, -2.0 * c), (i + 1, c)], 0.0));
        }
        rows.push(match bc.right.slope() {
            Some(s) => Row::new(&[(n - 2, 2.0 * c), (n - 1, -2.0 * c)], 2.0 * s / h),
            None if n >= 4 => Row::new(
                &[
                    (n - 4, -c),
                    (n - 3, 4.0 * c),
                    (n - 2, -5.0 * c),
                    (n - 1, 2.0 * c),
                ],
                0.0,
            ),
            None => Row::new(&[(n - 3, c), (n - 2, -2.0 * c), (n - 1, c)], 0.0),
        });
        DiffOperator { rows }
    }

    pub fn len(&self) -> usize {
        self.rows.len()
    }

    pub fn is_empty(&self) -> bool {
        self.rows.is_empty()
    }

    pub fn apply(&self, u: &[f64]) -> Vec<f64> {
        self.rows
            .iter()
            .map(|r| {
                r.terms()
                    .iter()
                    .fold(r.offset, |acc, &(j, c)| acc + c * u[j])
            })
            .collect()
    }

    /// Accumulates `scale * D^T v` into `out`.
    pub fn apply_transpose_add(&self, v: &[f64], scale: f64, out: &mut [f64]) {
        for (r, &vi) in self.rows.iter().zip(v) {
            let s = scale * vi;
            for &(j, c) in r.terms() {
                out[j] += c * s;
            }
        }
    }

    /// Accumulates `scale * D^T diag(weights) D` into a banded matrix.
    pub(crate) fn gram_add(&self, weights: &[f64], scale: f64, m: &mut BandedSpd) {
        for (r, &w) in self.rows.iter().zip(weights) {
            let t = r.terms();
            for &(i, ci) in t {
                for &(j, cj) in t {
                    if j <= i {
                        m.add(i, j, scale * w * ci * cj);
                    }
                }
            }
        }
    }
}

pub fn derivative1(u: &Field, bc: &BoundarySpec) -> Field {
    let values = DiffOperator::first(&u.grid, bc).apply(&u.values);
    Field {
        grid: u.grid,
        values,
    }
}

pub fn derivative2(u: &Field, bc: &BoundarySpec) -> Field {
    let values = DiffOperator::second(&u.grid, bc).apply(&u.values);
    Field {
        grid: u.grid,
        values,
    }
}

/// Composite trapezoidal rule.
pub fn integrate(v: &Field) -> f64 {
    integrate_values(&v.grid, &v.values)
}

pub(crate) fn integrate_values(grid: &Grid, values: &[f64]) -> f64 {
    let h = grid.h();
    let n = values.len();
    let inner: f64 = values[1..n - 1].iter().sum();
    h * (inner + 0.5 * (values[0] + values[n - 1]))
}

pub fn distance_l1(u: &Field, v: &Field) -> Result<f64> {
    if u.grid != v.grid {
        return Err(Error::GridMismatch);
    }
    let diff: Vec<f64> = u
        .values
        .iter()
        .zip(&v.values)
        .map(|(a, b)| (a - b).abs())
        .collect();
    Ok(integrate_values(&u.grid, &diff))
}

/// Symmetric positive definite band matrix (lower band stored) with an
/// in-place Cholesky factorization.
#[derive(Debug, Clone)]
pub(crate) struct BandedSpd {
    n: usize,
    bw: usize,
    // data[i * (bw + 1) + (i - j)] holds entry (i, j) for i - bw <= j <= i
    data: Vec<f64>,
    factored: bool,
}

#[allow(clippy::needless_range_loop)]
impl BandedSpd {
    pub(crate) fn zeros(n: usize, bw: usize) -> Self {
        BandedSpd {
            n,
            bw,
            data: vec![0.0; n * (bw + 1)],
            factored: false,
        }
    }

    pub(crate) fn add(&mut self, i: usize, j: usize, v: f64) {
        debug_assert!(j <= i && i - j <= self.bw);
        self.data[i * (self.bw + 1) + (i - j)] += v;
    }

    fn at(&self, i: usize, j: usize) -> f64 {
        self.data[i * (self.bw + 1) + (i - j)]
    }

    fn set(&mut self, i: usize, j: usize, v: f64) {
        self.data[i * (self.bw + 1) + (i - j)] = v;
    }

    /// Removes the rows and columns where `keep` is false; the
    /// remaining entries keep their relative band positions.
    pub(crate) fn restrict(&self, keep: &[bool]) -> BandedSpd {
        let index: Vec<Option<usize>> = {
            let mut next = 0;
            keep.iter()
                .map(|&k| {
                    if k {
                        next += 1;
                        Some(next - 1)
                    } else {
                        None
                    }
                })
                .collect()
        };
        let m = keep.iter().filter(|&&k| k).count();
        let mut out = BandedSpd::zeros(m, self.bw);
        for i in 0..self.n {
            let Some(ni) = index[i] else { continue };
            for j in i.saturating_sub(self.bw)..=i {
                if let Some(nj) = index[j] {
                    out.add(ni, nj, self.at(i, j));
                }
            }
        }
        out
    }

    pub(crate) fn factor(&mut self) -> bool {
        let bw = self.bw;
        for i in 0..self.n {
            for j in i.saturating_sub(bw)..=i {
                let mut s = self.at(i, j);
                for k in i.saturating_sub(bw)..j {
                    if j - k <= bw {
                        s -= self.at(i, k) * self.at(j, k);
                    }
                }
                if i == j {
                    if !(s > 0.0) {
                        return false;
                    }
                    self.set(i, i, s.sqrt());
                } else {
                    let d = self.at(j, j);
                    self.set(i, j, s / d);
                }
            }
        }
        self.factored = true;
        true
    }

    pub(crate) fn solve_in_place(&self, x: &mut [f64]) {
        debug_assert!(self.factored);
        let bw = self.bw;
        for i in 0..self.n {
            let mut s = x[i];
            for k in i.saturating_sub(bw)..i {
                s -= self.at(i, k) * x[k];
            }
            x[i] = s / self.at(i, i);
        }
        for i in (0..self.n).rev() {
            let mut s = x[i];
            for k in i + 1..(i + bw + 1).min(self.n) {
                s -= self.at(k, i) * x[k];
            }
            x[i] = s / self.at(i, i);
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use std::f64::consts::PI;

    #[test]
    fn grid_spacing() {
        let g = make_grid(0.0, 1.0, 11).unwrap();
        assert!((g.h() - 0.1).abs() < 1e-15);
        let g = make_grid(-5.0, 5.0, 101).unwrap();
        assert!((g.h() - 0.1).abs() < 1e-15);
        assert!(g.x(50).abs() < 1e-14);
        assert!(make_grid(0.0, 1.0, 2).is_err());
        assert!(make_grid(1.0, 1.0, 5).is_err());
        assert!(make_grid(2.0, 1.0, 5).is_err());
    }

    #[test]
    fn sampling() {
        let g = make_grid(0.0, 1.0, 11).unwrap();
        let f = sample_function(g, |s| s).unwrap();
        for (i, v) in f.values().iter().enumerate() {
            assert!((v - i as f64 * 0.1).abs() < 1e-15);
        }
        let f = sample_function(make_grid(-1.0, 1.0, 3).unwrap(), |s| s * s).unwrap();
        assert_eq!(f.values(), &[1.0, 0.0, 1.0]);
        let g = make_grid(0.0, 1.0, 5).unwrap();
        let f = sample_function(g, f64::tanh).unwrap();
        for (x, v) in g.nodes().zip(f.values()) {
            assert!((v - x.tanh()).abs() <= 1e-15);
        }
        assert!(matches!(
            sample_function(g, |s| 1.0 / s),
            Err(Error::NonFiniteSample { .. })
        ));
    }

    #[test]
    fn first_derivative_exactness() {
        let g = make_grid(0.0, 1.0, 11).unwrap();
        let u = sample_function(g, |s| s).unwrap();
        for v in derivative1(&u, &BoundarySpec::free()).values() {
            assert!((v - 1.0).abs() < 1e-12);
        }
        let u = sample_function(g, |s| s * s).unwrap();
        let d = derivative1(&u, &BoundarySpec::free());
        assert!((d.values()[5] - 1.0).abs() < 1e-13);
        for (x, v) in g.nodes().zip(d.values()) {
            assert!((v - 2.0 * x).abs() < 1e-12);
        }
    }

    #[test]
    fn first_derivative_of_sine() {
        let g = make_grid(0.0, PI, 1001).unwrap();
        let u = sample_function(g, f64::sin).unwrap();
        let d = derivative1(&u, &BoundarySpec::free());
        let err = g
            .nodes()
            .zip(d.values())
            .map(|(x, v)| (v - x.cos()).abs())
            .fold(0.0, f64::max);
        assert!(err <= 1e-5, "{err}");
    }

    #[test]
    fn second_derivative_exactness() {
        let g = make_grid(-1.0, 2.0, 13).unwrap();
        let u = sample_function(g, |s| s * s).unwrap();
        for v in derivative2(&u, &BoundarySpec::free()).values() {
            assert!((v - 2.0).abs() < 1e-10);
        }
        let u = sample_function(g, |s| 3.0 * s + 1.0).unwrap();
        for v in derivative2(&u, &BoundarySpec::free()).values() {
            assert!(v.abs() < 1e-10);
        }
        // ghost reflection is exact for a parabola with its true slopes
        let bc = BoundarySpec::new(
            EndCondition::Slope { slope: -2.0 },
            EndCondition::Slope { slope: 4.0 },
        );
        for v in derivative2(&u.map(|_| 0.0).unwrap(), &BoundarySpec::free()).values() {
            assert_eq!(*v, 0.0);
        }
        let u = sample_function(g, |s| s * s).unwrap();
        for v in derivative2(&u, &bc).values() {
            assert!((v - 2.0).abs() < 1e-9, "{v}");
        }
    }

    #[test]
    fn second_derivative_of_cosine_clamped() {
        let g = make_grid(0.0, PI, 2001).unwrap();
        let u = sample_function(g, f64::cos).unwrap();
        let bc = BoundarySpec::clamped((1.0, 0.0), (-1.0, 0.0));
        let d = derivative2(&u, &bc);
        let err = (1..g.n() - 1)
            .map(|i| (d.values()[i] + g.x(i).cos()).abs())
            .fold(0.0, f64::max);
        assert!(err <= 1e-5, "{err}");
        // endpoints are also second order here
        assert!((d.values()[0] + 1.0).abs() < 1e-5);
    }

    #[test]
    fn trapezoid() {
        let g = make_grid(0.0, 1.0, 7).unwrap();
        assert!((integrate(&Field::constant(g, 1.0)) - 1.0).abs() < 1e-15);
        for n in [3, 4, 17, 100] {
            let g = make_grid(0.0, 1.0, n).unwrap();
            let u = sample_function(g, |s| s).unwrap();
            assert!((integrate(&u) - 0.5).abs() < 1e-15);
        }
        let g = make_grid(0.0, 1.0, 1001).unwrap();
        let u = sample_function(g, |s| s * s).unwrap();
        assert!((integrate(&u) - 1.0 / 3.0).abs() < 1e-6);
    }

    #[test]
    fn l1_distance() {
        let g = make_grid(0.0, 1.0, 101).unwrap();
        let u = sample_function(g, |s| s).unwrap();
        assert_eq!(distance_l1(&u, &u).unwrap(), 0.0);
        let one = Field::constant(g, 1.0);
        let minus = Field::constant(g, -1.0);
        assert!((distance_l1(&one, &minus).unwrap() - 2.0).abs() < 1e-14);
        assert!((distance_l1(&u, &Field::constant(g, 0.0)).unwrap() - 0.5).abs() < 1e-14);
        let other = Field::constant(make_grid(0.0, 2.0, 101).unwrap(), 0.0);
        assert!(matches!(distance_l1(&u, &other), Err(Error::GridMismatch)));
    }

    #[test]
    fn json_and_csv() {
        let g = make_grid(0.0, 1.0, 5).unwrap();
        let u = sample_function(g, |s| s * s - 0.3).unwrap();
        let back = Field::from_json(&u.to_json().unwrap()).unwrap();
        assert_eq!(back, u);
        let csv = u.to_csv();
        assert!(csv.starts_with("x,u\n0,-0.3\n"));
        assert_eq!(csv.lines().count(), 6);
        assert!(Field::from_json(r#"{"a":0,"b":1,"n":4,"values":[1,2]}"#).is_err());
    }

    #[test]
    fn constraint_mask() {
        let bc = BoundarySpec::new(
            EndCondition::Value { value: -1.0 },
            EndCondition::Slope { slope: 0.0 },
        )
        .with_pinned(3, 1.0);
        assert_eq!(bc.free_mask(5), vec![false, true, true, false, true]);
        let mut v = vec![0.0; 5];
        bc.apply_constraints(&mut v);
        assert_eq!(v, vec![-1.0, 0.0, 0.0, 1.0, 0.0]);
        assert!(bc.is_satisfied_by(&v));
    }

    #[test]
    fn banded_cholesky_solves_pentadiagonal() {
        let n = 9;
        let mut m = BandedSpd::zeros(n, 2);
        for i in 0..n {
            m.add(i, i, 6.0);
            if i >= 1 {
                m.add(i, i - 1, -4.0 + 0.5);
            }
            if i >= 2 {
                m.add(i, i - 2, 1.0);
            }
        }
        let dense = |i: usize, j: usize| -> f64 {
            let (i, j) = if i >= j { (i, j) } else { (j, i) };
            if i - j <= 2 {
                m.at(i, j)
            } else {
                0.0
            }
        };
        let x: Vec<f64> = (0..n).map(|i| (i as f64).sin() + 0.2).collect();
        let b: Vec<f64> = (0..n)
            .map(|i| (0..n).map(|j| dense(i, j) * x[j]).sum())
            .collect();
        let mut f = m.clone();
        assert!(f.factor());
        let mut y = b.clone();
        f.solve_in_place(&mut y);
        for (a, b) in x.iter().zip(&y) {
            assert!((a - b).abs() < 1e-12);
        }
    }
}
