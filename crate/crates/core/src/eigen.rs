//! Eigenstates of the discrete Hamiltonian `−(ħ²/2m)Δ + V` on a grid.
//!
//! The three-point Laplacian makes the matrix symmetric tridiagonal (plus two
//! corner entries when periodic). It is small enough for a dense symmetric
//! diagonalization, which also gives eigenvectors exact to rounding with
//! respect to the same discrete operator used by the steppers.

use nalgebra::{DMatrix, SymmetricEigen};

use crate::error::{Error, Result};
use crate::grid::{integrate, Boundary, Grid1D, RealField};
use crate::Physics;

#[derive(Clone, Debug)]
pub struct Eigenstate {
    pub energy: f64,
    /// Real, normalized to `∫φ² dx = 1`; zero on Dirichlet walls.
    pub state: RealField,
}

/// Lowest `count` eigenpairs for a real potential, ascending in energy.
pub fn grid_eigenstates(potential: &RealField, physics: Physics, count: usize) -> Result<Vec<Eigenstate>> {
    let grid = *potential.grid();
    let active: Vec<usize> = grid.interior().collect();
    let m = active.len();
    if count == 0 || count > m {
        return Err(Error::Precondition(format!("requested {count} eigenstates of {m}")));
    }
    let kin = physics.hbar * physics.hbar / (2.0 * physics.mass * grid.dx() * grid.dx());
    let v = potential.values();
    let mut h = DMatrix::<f64>::zeros(m, m);
    for (r, &i) in active.iter().enumerate() {
        h[(r, r)] = 2.0 * kin + v[i];
        if r + 1 < m {
            h[(r, r + 1)] = -kin;
            h[(r + 1, r)] = -kin;
        }
    }
    if grid.boundary() == Boundary::Periodic {
        h[(0, m - 1)] -= kin;
        h[(m - 1, 0)] -= kin;
    }
    let eig = SymmetricEigen::new(h);
    let mut order: Vec<usize> = (0..m).collect();
    order.sort_by(|&a, &b| eig.eigenvalues[a].total_cmp(&eig.eigenvalues[b]));

    let states = order
        .into_iter()
        .take(count)
        .map(|col| {
            let vec = eig.eigenvectors.column(col);
            let mut values = vec![0.0; grid.n()];
            for (r, &i) in active.iter().enumerate() {
                values[i] = vec[r];
            }
            let field = RealField::new(grid, values).expect("length matches grid");
            Eigenstate { energy: eig.eigenvalues[col], state: normalize(field) }
        })
        .collect();
    Ok(states)
}

/// Ground state and energy of a hard-wall box with potential `V`.
pub fn box_ground_state(potential: &RealField, physics: Physics) -> Result<Eigenstate> {
    Ok(grid_eigenstates(potential, physics, 1)?.remove(0))
}

/// Exact eigenvalues of the free discrete box: `(2ħ²/m dx²)·sin²(nπ/2(N−1))`.
pub fn free_box_energy(grid: &Grid1D, physics: Physics, level: usize) -> f64 {
    let n_int = grid.n() - 1;
    let s = ((level + 1) as f64 * std::f64::consts::PI / (2.0 * n_int as f64)).sin();
    2.0 * physics.hbar * physics.hbar / (physics.mass * grid.dx() * grid.dx()) * s * s
}

/// Scales to unit norm and fixes the sign so the largest sample is positive.
fn normalize(f: RealField) -> RealField {
    let nrm = integrate(&f.map(|v| v * v)).sqrt();
    let peak = f.values().iter().copied().fold(0.0f64, |acc, v| if v.abs() > acc.abs() { v } else { acc });
    let s = if peak < 0.0 { -1.0 / nrm } else { 1.0 / nrm };
    f.scaled(s)
}
