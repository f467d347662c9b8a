//! Uniform 1-D grids and the fields sampled on them.
//!
//! Derivatives use second-order central stencils. On a Dirichlet grid the two
//! end points are the walls: fields are expected to vanish there, the
//! Laplacian is pinned to zero at the walls, and the gradient falls back to
//! second-order one-sided stencils so that quantities derived from it (currents)
//! are defined everywhere.

use std::io::Write;
use std::ops::{Add, Mul, Sub};

use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::quat::Quaternion;

pub const MIN_POINTS: usize = 8;

/// Below this many samples the pairwise reduction stops splitting.
const PAIRWISE_BLOCK: usize = 64;
/// Below this many samples the reduction does not fork onto the thread pool.
const PARALLEL_CUTOFF: usize = 1 << 14;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Boundary {
    Periodic,
    Dirichlet,
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct Grid1D {
    n: usize,
    dx: f64,
    origin: f64,
    boundary: Boundary,
}

impl Grid1D {
    pub fn new(n: usize, dx: f64, origin: f64, boundary: Boundary) -> Result<Self> {
        if n < MIN_POINTS {
            return Err(Error::Config(format!("grid needs at least {MIN_POINTS} points, got {n}")));
        }
        if !(dx > 0.0 && dx.is_finite()) {
            return Err(Error::Config(format!("grid spacing must be positive, got {dx}")));
        }
        if !origin.is_finite() {
            return Err(Error::Config("grid origin must be finite".into()));
        }
        Ok(Self { n, dx, origin, boundary })
    }

    /// Periodic grid of `n` points covering `[origin, origin + length)`.
    pub fn periodic(n: usize, length: f64) -> Result<Self> {
        Self::new(n, length / n as f64, 0.0, Boundary::Periodic)
    }

    /// Dirichlet grid of `n` points whose end points sit on the walls of `[0, length]`.
    pub fn dirichlet(n: usize, length: f64) -> Result<Self> {
        Self::new(n, length / (n - 1).max(1) as f64, 0.0, Boundary::Dirichlet)
    }

    pub fn n(&self) -> usize {
        self.n
    }

    pub fn dx(&self) -> f64 {
        self.dx
    }

    pub fn origin(&self) -> f64 {
        self.origin
    }

    pub fn boundary(&self) -> Boundary {
        self.boundary
    }

    pub fn x(&self, i: usize) -> f64 {
        self.origin + i as f64 * self.dx
    }

    pub fn coordinates(&self) -> Vec<f64> {
        (0..self.n).map(|i| self.x(i)).collect()
    }

    /// Domain length: `n·dx` when periodic, wall-to-wall distance otherwise.
    pub fn length(&self) -> f64 {
        match self.boundary {
            Boundary::Periodic => self.n as f64 * self.dx,
            Boundary::Dirichlet => (self.n - 1) as f64 * self.dx,
        }
    }

    /// Points where residuals are meaningful: all of them on a periodic grid,
    /// everything but the walls on a Dirichlet grid.
    pub fn interior(&self) -> std::ops::Range<usize> {
        match self.boundary {
            Boundary::Periodic => 0..self.n,
            Boundary::Dirichlet => 1..self.n - 1,
        }
    }

    pub fn same_as(&self, other: &Grid1D) -> bool {
        self == other
    }
}

/// Sample types that can live on a grid and be differentiated.
pub trait FieldValue: Copy + Send + Sync + Add<Output = Self> + Sub<Output = Self> + Mul<f64, Output = Self> {
    fn zero() -> Self;
    fn magnitude(self) -> f64;
}

impl FieldValue for f64 {
    fn zero() -> Self {
        0.0
    }
    fn magnitude(self) -> f64 {
        self.abs()
    }
}

impl FieldValue for Complex64 {
    fn zero() -> Self {
        Complex64::new(0.0, 0.0)
    }
    fn magnitude(self) -> f64 {
        self.norm()
    }
}

impl FieldValue for Quaternion {
    fn zero() -> Self {
        Quaternion::ZERO
    }
    fn magnitude(self) -> f64 {
        self.norm()
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct Field<T> {
    grid: Grid1D,
    values: Vec<T>,
}

pub type RealField = Field<f64>;
pub type ComplexField = Field<Complex64>;
pub type QuatField = Field<Quaternion>;

impl<T: FieldValue> Field<T> {
    pub fn new(grid: Grid1D, values: Vec<T>) -> Result<Self> {
        if values.len() != grid.n() {
            return Err(Error::Precondition(format!(
                "field has {} samples but the grid has {} points",
                values.len(),
                grid.n()
            )));
        }
        Ok(Self { grid, values })
    }

    pub fn zeros(grid: Grid1D) -> Self {
        Self { grid, values: vec![T::zero(); grid.n()] }
    }

    pub fn from_fn(grid: Grid1D, mut f: impl FnMut(f64) -> T) -> Self {
        let values = (0..grid.n()).map(|i| f(grid.x(i))).collect();
        Self { grid, values }
    }

    pub fn grid(&self) -> &Grid1D {
        &self.grid
    }

    pub fn values(&self) -> &[T] {
        &self.values
    }

    pub fn values_mut(&mut self) -> &mut [T] {
        &mut self.values
    }

    pub fn into_values(self) -> Vec<T> {
        self.values
    }

    pub fn len(&self) -> usize {
        self.values.len()
    }

    pub fn is_empty(&self) -> bool {
        self.values.is_empty()
    }

    pub fn map<U: FieldValue>(&self, f: impl Fn(T) -> U) -> Field<U> {
        Field { grid: self.grid, values: self.values.iter().map(|&v| f(v)).collect() }
    }

    pub fn map_indexed<U: FieldValue>(&self, f: impl Fn(usize, f64, T) -> U) -> Field<U> {
        let values = self.values.iter().enumerate().map(|(i, &v)| f(i, self.grid.x(i), v)).collect();
        Field { grid: self.grid, values }
    }

    /// Pointwise combination of two fields on the same grid.
    pub fn zip_with<U: FieldValue, R: FieldValue>(&self, other: &Field<U>, f: impl Fn(T, U) -> R) -> Result<Field<R>> {
        ensure_same_grid(&self.grid, &other.grid)?;
        let values = self.values.iter().zip(&other.values).map(|(&a, &b)| f(a, b)).collect();
        Ok(Field { grid: self.grid, values })
    }

    pub fn scaled(&self, s: f64) -> Self {
        self.map(|v| v * s)
    }

    /// `self + s·other`.
    pub fn axpy(&self, s: f64, other: &Self) -> Result<Self> {
        self.zip_with(other, |a, b| a + b * s)
    }

    /// Largest sample magnitude over the interior points.
    pub fn max_norm(&self) -> f64 {
        self.grid.interior().map(|i| self.values[i].magnitude()).fold(0.0, f64::max)
    }

    /// Largest sample magnitude including the walls.
    pub fn max_norm_all(&self) -> f64 {
        self.values.iter().map(|v| v.magnitude()).fold(0.0, f64::max)
    }

    /// Interior max-norm of `self − other`.
    pub fn max_diff(&self, other: &Self) -> Result<f64> {
        Ok(self.zip_with(other, |a, b| a - b)?.max_norm())
    }

    /// Sets the wall samples of a Dirichlet field to zero; no-op when periodic.
    pub fn enforce_boundary(&mut self) {
        if self.grid.boundary() == Boundary::Dirichlet {
            let n = self.values.len();
            self.values[0] = T::zero();
            self.values[n - 1] = T::zero();
        }
    }
}

impl RealField {
    pub fn sum_abs(&self) -> f64 {
        self.values.iter().map(|v| v.abs()).sum()
    }
}

impl ComplexField {
    pub fn density(&self) -> RealField {
        self.map(|c| c.norm_sqr())
    }

    pub fn conj(&self) -> Self {
        self.map(|c| c.conj())
    }

    pub fn re(&self) -> RealField {
        self.map(|c| c.re)
    }

    pub fn im(&self) -> RealField {
        self.map(|c| c.im)
    }

    pub fn to_quat(&self) -> QuatField {
        self.map(Quaternion::from_complex)
    }
}

impl QuatField {
    /// Symplectic view: `Ψ = Ψ₀ + Ψ₁·j` as two complex fields.
    pub fn to_symplectic(&self) -> (ComplexField, ComplexField) {
        (self.map(Quaternion::a), self.map(Quaternion::b))
    }

    pub fn from_symplectic(a: &ComplexField, b: &ComplexField) -> Result<Self> {
        a.zip_with(b, Quaternion::compose)
    }

    pub fn density(&self) -> RealField {
        self.map(Quaternion::norm_sqr)
    }

    pub fn real_part(&self) -> RealField {
        self.map(|q| q.w)
    }

    /// Pointwise `Φ·Λ`.
    pub fn mul_right(&self, right: &QuatField) -> Result<QuatField> {
        self.zip_with(right, |a, b| a * b)
    }
}

impl From<RealField> for ComplexField {
    fn from(f: RealField) -> Self {
        f.map(|v| Complex64::new(v, 0.0))
    }
}

pub(crate) fn ensure_same_grid(a: &Grid1D, b: &Grid1D) -> Result<()> {
    if a.same_as(b) {
        Ok(())
    } else {
        Err(Error::Precondition(format!("grid mismatch: {a:?} vs {b:?}")))
    }
}

/// Central-difference gradient.
pub fn grad<T: FieldValue>(f: &Field<T>) -> Field<T> {
    let g = f.grid;
    let v = &f.values;
    let n = v.len();
    let h2 = 1.0 / (2.0 * g.dx);
    let mut out = vec![T::zero(); n];
    for i in 1..n - 1 {
        out[i] = (v[i + 1] - v[i - 1]) * h2;
    }
    match g.boundary {
        Boundary::Periodic => {
            out[0] = (v[1] - v[n - 1]) * h2;
            out[n - 1] = (v[0] - v[n - 2]) * h2;
        }
        Boundary::Dirichlet => {
            out[0] = (v[1] * 4.0 - v[0] * 3.0 - v[2]) * h2;
            out[n - 1] = (v[n - 1] * 3.0 - v[n - 2] * 4.0 + v[n - 3]) * h2;
        }
    }
    Field { grid: g, values: out }
}

/// Three-point Laplacian. Pinned to zero at Dirichlet walls.
pub fn laplace<T: FieldValue>(f: &Field<T>) -> Field<T> {
    let g = f.grid;
    let v = &f.values;
    let n = v.len();
    let inv = 1.0 / (g.dx * g.dx);
    let mut out = vec![T::zero(); n];
    for i in 1..n - 1 {
        out[i] = (v[i + 1] + v[i - 1] - v[i] * 2.0) * inv;
    }
    if g.boundary == Boundary::Periodic {
        out[0] = (v[1] + v[n - 1] - v[0] * 2.0) * inv;
        out[n - 1] = (v[0] + v[n - 2] - v[n - 1] * 2.0) * inv;
    }
    Field { grid: g, values: out }
}

/// `∫ f dx`: a plain Riemann sum on periodic grids, the trapezoidal rule on
/// Dirichlet grids. The reduction tree is fixed, so the result does not depend
/// on how many threads the pool has.
pub fn integrate(f: &RealField) -> f64 {
    let g = f.grid;
    let s = pairwise_sum(&f.values);
    match g.boundary {
        Boundary::Periodic => s * g.dx,
        Boundary::Dirichlet => {
            let n = f.values.len();
            (s - 0.5 * (f.values[0] + f.values[n - 1])) * g.dx
        }
    }
}

/// Pairwise summation with a fixed split rule.
pub fn pairwise_sum(values: &[f64]) -> f64 {
    if values.len() <= PAIRWISE_BLOCK {
        return values.iter().sum();
    }
    let mid = values.len() / 2;
    let (l, r) = values.split_at(mid);
    if values.len() >= PARALLEL_CUTOFF {
        let (a, b) = rayon::join(|| pairwise_sum(l), || pairwise_sum(r));
        a + b
    } else {
        pairwise_sum(l) + pairwise_sum(r)
    }
}

/// `‖f‖ = (∫|f|² dx)^{1/2}`.
pub fn norm<T: FieldValue>(f: &Field<T>) -> f64 {
    integrate(&f.map(|v| v.magnitude().powi(2))).sqrt()
}

/// CSV serialization of field snapshots: `x` followed by the sample components.
pub trait CsvComponents: FieldValue {
    const COLUMNS: &'static [&'static str];
    fn components(self) -> Vec<f64>;
}

impl CsvComponents for f64 {
    const COLUMNS: &'static [&'static str] = &["value"];
    fn components(self) -> Vec<f64> {
        vec![self]
    }
}

impl CsvComponents for Complex64 {
    const COLUMNS: &'static [&'static str] = &["re", "im"];
    fn components(self) -> Vec<f64> {
        vec![self.re, self.im]
    }
}

impl CsvComponents for Quaternion {
    const COLUMNS: &'static [&'static str] = &["w", "x", "y", "z"];
    fn components(self) -> Vec<f64> {
        vec![self.w, self.x, self.y, self.z]
    }
}

/// Formats with 17 significant digits.
pub fn format_f64(v: f64) -> String {
    format!("{v:.16e}")
}

pub fn write_field_csv<T: CsvComponents, W: Write>(f: &Field<T>, out: W) -> Result<()> {
    let mut w = csv::Writer::from_writer(out);
    let mut header = vec!["x"];
    header.extend_from_slice(T::COLUMNS);
    w.write_record(&header)?;
    for (i, &v) in f.values.iter().enumerate() {
        let mut row = vec![format_f64(f.grid.x(i))];
        row.extend(v.components().into_iter().map(format_f64));
        w.write_record(&row)?;
    }
    w.flush()?;
    Ok(())
}
