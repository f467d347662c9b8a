//! Fixtures shared by the benchmarks: smooth fields on rings and a box
//! eigenstate, built deterministically without a random number generator.

use std::f64::consts::PI;

use genunit_core::eigen::box_ground_state;
use genunit_core::{ComplexField, Grid1D, Physics, QuatField, Quaternion, RealField};
use num_complex::Complex64;

pub fn ring(n: usize) -> Grid1D {
    Grid1D::periodic(n, 2.0 * PI).expect("positive size")
}

/// `e^{ix} + ½e^{−2ix}` sampled on `grid`.
pub fn complex_wave(grid: Grid1D) -> ComplexField {
    ComplexField::from_fn(grid, |x| Complex64::from_polar(1.0, x) + Complex64::from_polar(0.5, -2.0 * x))
}

/// A quaternion field whose four components are distinct low modes.
pub fn quat_wave(grid: Grid1D) -> QuatField {
    QuatField::from_fn(grid, |x| Quaternion::new(x.cos(), (2.0 * x).sin(), 0.5 * (3.0 * x).cos(), 0.25 * x.sin()))
}

/// Ground state of the free box on `[0, 1]` and its energy.
pub fn box_state(n: usize) -> (ComplexField, f64) {
    let grid = Grid1D::dirichlet(n, 1.0).expect("positive size");
    let gs = box_ground_state(&RealField::zeros(grid), Physics::default()).expect("eigenstate");
    (gs.state.into(), gs.energy)
}
