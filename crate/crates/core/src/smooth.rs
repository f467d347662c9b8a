//! Random band-limited fields with exact derivatives.
//!
//! Periodic grids get a finite Fourier series, Dirichlet grids a sine series
//! that vanishes on both walls. Coefficients decay with the mode number so the
//! grid truncation error stays representative of smooth data.

use std::f64::consts::PI;

use num_complex::Complex64;
use rand::Rng;

use crate::grid::{Boundary, ComplexField, Grid1D, QuatField};
use crate::quat::Quaternion;

#[derive(Clone, Debug, PartialEq)]
pub struct SmoothField {
    origin: f64,
    boundary: Boundary,
    /// `(wavenumber, coefficient)` pairs.
    modes: Vec<(f64, Complex64)>,
}

impl SmoothField {
    pub fn from_modes(grid: &Grid1D, modes: Vec<(f64, Complex64)>) -> Self {
        Self { origin: grid.origin(), boundary: grid.boundary(), modes }
    }

    /// Modes `1..=max_mode` (and the negatives when periodic) with random
    /// coefficients of size `~1/m`.
    pub fn random<R: Rng + ?Sized>(grid: &Grid1D, max_mode: usize, rng: &mut R) -> Self {
        let length = grid.length();
        let mut modes = Vec::new();
        let coef = |rng: &mut R, m: usize| {
            let s = 1.0 / m as f64;
            Complex64::new(rng.gen_range(-s..s), rng.gen_range(-s..s))
        };
        match grid.boundary() {
            Boundary::Periodic => {
                modes.push((0.0, coef(rng, 1)));
                for m in 1..=max_mode {
                    let k = 2.0 * PI * m as f64 / length;
                    modes.push((k, coef(rng, m)));
                    modes.push((-k, coef(rng, m)));
                }
            }
            Boundary::Dirichlet => {
                for m in 1..=max_mode {
                    modes.push((PI * m as f64 / length, coef(rng, m)));
                }
            }
        }
        Self::from_modes(grid, modes)
    }

    fn eval(&self, x: f64, order: u32) -> Complex64 {
        let u = x - self.origin;
        let i = Complex64::i();
        self.modes
            .iter()
            .map(|&(k, c)| match self.boundary {
                Boundary::Periodic => c * (i * k).powu(order) * Complex64::from_polar(1.0, k * u),
                Boundary::Dirichlet => {
                    let (s, co) = (k * u).sin_cos();
                    let base = match order % 4 {
                        0 => s,
                        1 => co,
                        2 => -s,
                        _ => -co,
                    };
                    c * base * k.powi(order as i32)
                }
            })
            .sum()
    }

    pub fn value(&self, x: f64) -> Complex64 {
        self.eval(x, 0)
    }

    pub fn d1(&self, x: f64) -> Complex64 {
        self.eval(x, 1)
    }

    pub fn d2(&self, x: f64) -> Complex64 {
        self.eval(x, 2)
    }

    pub fn d4(&self, x: f64) -> Complex64 {
        self.eval(x, 4)
    }

    pub fn sample(&self, grid: &Grid1D) -> ComplexField {
        let mut f = ComplexField::from_fn(*grid, |x| self.value(x));
        f.enforce_boundary();
        f
    }

    pub fn sample_d1(&self, grid: &Grid1D) -> ComplexField {
        ComplexField::from_fn(*grid, |x| self.d1(x))
    }

    pub fn sample_d2(&self, grid: &Grid1D) -> ComplexField {
        ComplexField::from_fn(*grid, |x| self.d2(x))
    }
}

/// Quaternion-valued smooth field `Ψ₀ + Ψ₁·j`.
#[derive(Clone, Debug, PartialEq)]
pub struct SmoothQuat {
    pub a: SmoothField,
    pub b: SmoothField,
}

impl SmoothQuat {
    pub fn random<R: Rng + ?Sized>(grid: &Grid1D, max_mode: usize, rng: &mut R) -> Self {
        Self { a: SmoothField::random(grid, max_mode, rng), b: SmoothField::random(grid, max_mode, rng) }
    }

    pub fn value(&self, x: f64) -> Quaternion {
        Quaternion::compose(self.a.value(x), self.b.value(x))
    }

    pub fn d1(&self, x: f64) -> Quaternion {
        Quaternion::compose(self.a.d1(x), self.b.d1(x))
    }

    pub fn sample(&self, grid: &Grid1D) -> QuatField {
        QuatField::from_symplectic(&self.a.sample(grid), &self.b.sample(grid)).expect("same grid")
    }
}
