//! Default tolerances and the truncation-aware bound for grid identities.
//!
//! Grid budgets are judged against `BUDGET_SAFETY · C · dx² · S`, where `C` is
//! the relative Laplacian truncation constant measured on a calibration field
//! that is representative of the data (`max|Δₕf − f''| / (dx² max|f''|)`), and
//! `S` is the size of the largest individual budget term.

use crate::grid::{laplace, Grid1D};
use crate::report::ContinuityReport;
use crate::smooth::SmoothField;

/// Pure algebra (quaternion products, closed-form rewrites).
pub const ALGEBRA: f64 = 1e-12;

/// Identities that compare analytic derivatives against finite differences.
pub const DERIVATIVE: f64 = 1e-8;

/// Grid budgets must close within this multiple of `C·dx²·S`.
pub const BUDGET_SAFETY: f64 = 10.0;

/// Measured relative truncation constant of the three-point Laplacian on `field`.
pub fn truncation_constant(field: &SmoothField, grid: &Grid1D) -> f64 {
    let sampled = field.sample(grid);
    let exact = field.sample_d2(grid);
    let lap = laplace(&sampled);
    let mut err: f64 = 0.0;
    let mut peak: f64 = 0.0;
    for i in grid.interior() {
        err = err.max((lap.values()[i] - exact.values()[i]).norm());
        peak = peak.max(exact.values()[i].norm());
    }
    if peak == 0.0 {
        return 0.0;
    }
    err / (grid.dx() * grid.dx() * peak)
}

/// The single-mode calibration field matching the lowest box or ring state.
pub fn calibration_field(grid: &Grid1D, mode: usize) -> SmoothField {
    use crate::grid::Boundary;
    use num_complex::Complex64;
    use std::f64::consts::PI;
    let k = match grid.boundary() {
        Boundary::Dirichlet => PI * mode as f64 / grid.length(),
        Boundary::Periodic => 2.0 * PI * mode as f64 / grid.length(),
    };
    SmoothField::from_modes(grid, vec![(k, Complex64::new(1.0, 0.0))])
}

/// `BUDGET_SAFETY · c · dx² · scale`.
pub fn grid_bound(c: f64, dx: f64, scale: f64) -> f64 {
    BUDGET_SAFETY * c * dx * dx * scale
}

/// Bound for a continuity report given a calibration constant.
pub fn budget_bound(report: &ContinuityReport, c: f64) -> f64 {
    grid_bound(c, report.density.grid().dx(), report.scale())
}
