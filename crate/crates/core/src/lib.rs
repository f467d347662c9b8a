//! Generalized imaginary units in Schrödinger dynamics.
//!
//! Two replacements for `i` are implemented side by side:
//!
//! * the complex deformation `i → e^{iθ}i`, which gives a decaying or growing
//!   (non-conservative) evolution and a continuity equation with extra sources
//!   ([`deformed`]);
//! * the quaternionic unit `η = e^{iΞ}j`, which squares to `−1`, multiplies
//!   time derivatives from the right, and leads to the unit-quaternion time
//!   factor `Λ` ([`quat`], [`schedule`], [`qdyn`]).
//!
//! Everything lives on a uniform 1-D grid ([`grid`]) with second-order
//! stencils. The [`audit`] module runs every identity against an independent
//! oracle and produces a deterministic report.
//!
//! Conventions: Hamilton product with `i·j = k`; potentials and Hamiltonians
//! act from the left, `η` and `Λ` multiply from the right.

// Range checks are written as `!(x > 0.0)` on purpose so that NaN fails them.
#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod audit;
pub mod deformed;
pub mod eigen;
pub mod error;
pub mod grid;
pub mod qdyn;
pub mod quat;
pub mod report;
pub mod schedule;
pub mod smooth;
pub mod tolerances;

use serde::{Deserialize, Serialize};

pub use error::{Error, Result};
pub use grid::{Boundary, ComplexField, Field, Grid1D, QuatField, RealField};
pub use quat::{complex_eta, make_eta, make_lambda, quat_conj, quat_mul, Quaternion};
pub use report::ContinuityReport;
pub use schedule::{AngleSchedule, Angles, ScheduleFamily};

/// Reduced Planck constant and particle mass.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct Physics {
    pub hbar: f64,
    pub mass: f64,
}

impl Physics {
    pub fn new(hbar: f64, mass: f64) -> Result<Self> {
        if !(hbar > 0.0 && hbar.is_finite()) || !(mass > 0.0 && mass.is_finite()) {
            return Err(Error::Config(format!("ħ and m must be positive, got ħ = {hbar}, m = {mass}")));
        }
        Ok(Self { hbar, mass })
    }

    /// `ħ²/2m`.
    pub fn kinetic(&self) -> f64 {
        self.hbar * self.hbar / (2.0 * self.mass)
    }

    /// Explicit-stepper bound `dt ≤ 0.5·(2m/ħ)·dx²/2`.
    pub fn max_stable_dt(&self, grid: &Grid1D) -> f64 {
        0.5 * (2.0 * self.mass / self.hbar) * grid.dx() * grid.dx() / 2.0
    }
}

impl Default for Physics {
    fn default() -> Self {
        Self { hbar: 1.0, mass: 1.0 }
    }
}

pub(crate) fn check_step(physics: &Physics, grid: &Grid1D, dt: f64) -> Result<()> {
    let bound = physics.max_stable_dt(grid);
    if !(dt.is_finite() && dt != 0.0) {
        return Err(Error::Config(format!("time step must be finite and non-zero, got {dt}")));
    }
    if dt.abs() > bound * (1.0 + 1e-12) {
        return Err(Error::Config(format!("time step {dt} exceeds the stability bound {bound}")));
    }
    Ok(())
}

/// Classical fourth-order Runge–Kutta step for a field ODE `y' = f(y, t)`.
pub fn rk4_step<T, F>(y: &Field<T>, t: f64, dt: f64, f: F) -> Result<Field<T>>
where
    T: grid::FieldValue,
    F: Fn(&Field<T>, f64) -> Result<Field<T>>,
{
    let k1 = f(y, t)?;
    let k2 = f(&y.axpy(0.5 * dt, &k1)?, t + 0.5 * dt)?;
    let k3 = f(&y.axpy(0.5 * dt, &k2)?, t + 0.5 * dt)?;
    let k4 = f(&y.axpy(dt, &k3)?, t + dt)?;
    let values = y
        .values()
        .iter()
        .zip(k1.values())
        .zip(k2.values())
        .zip(k3.values())
        .zip(k4.values())
        .map(|((((&y, &a), &b), &c), &d)| y + (a + b * 2.0 + c * 2.0 + d) * (dt / 6.0))
        .collect();
    Field::new(*y.grid(), values)
}
