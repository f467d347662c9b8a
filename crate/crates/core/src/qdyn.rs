//! Quaternionic Schrödinger dynamics with the unit `η = e^{iΞ}j`.
//!
//! The equation is `ħ ∂Ψ/∂t · η = ĤΨ`, so `Ψ_t = −(1/ħ)(ĤΨ)η` because
//! `η⁻¹ = −η`. Hamiltonians and potentials act from the left; `η` and `Λ`
//! multiply from the right. For `Ψ = ΦΛ` with space-independent `Λ` and
//! `Λ̇ = Θ̇Λη`, the equation separates into `ĤΦ = −ħΘ̇Φ`: a schedule with
//! `Θ = Et/ħ` pairs with the Hamiltonian eigenvalue `−E`.

use num_complex::Complex64;

use crate::error::{Error, Result};
use crate::grid::{ensure_same_grid, grad, laplace, ComplexField, Grid1D, QuatField, RealField};
use crate::quat::Quaternion;
use crate::report::{BudgetTerm, ContinuityReport};
use crate::schedule::{lambda_gradient, lambda_laplacian, AngleSchedule, Vec3};
use crate::{check_step, rk4_step, Physics};

/// How far `η²` may sit from `−1` before a field is rejected.
const ETA_SQUARE_TOL: f64 = 1e-12;

/// Vector potential `𝒜 = α i + β j` and scalar potential `U = V + W j`.
#[derive(Clone, Debug)]
pub struct QuatPotential {
    pub alpha: RealField,
    pub beta: ComplexField,
    pub v: ComplexField,
    pub w: ComplexField,
}

impl QuatPotential {
    pub fn new(alpha: RealField, beta: ComplexField, v: ComplexField, w: ComplexField) -> Result<Self> {
        ensure_same_grid(alpha.grid(), beta.grid())?;
        ensure_same_grid(alpha.grid(), v.grid())?;
        ensure_same_grid(alpha.grid(), w.grid())?;
        Ok(Self { alpha, beta, v, w })
    }

    pub fn zero(grid: Grid1D) -> Self {
        Self {
            alpha: RealField::zeros(grid),
            beta: ComplexField::zeros(grid),
            v: ComplexField::zeros(grid),
            w: ComplexField::zeros(grid),
        }
    }

    /// Scalar potential only.
    pub fn scalar(v: ComplexField, w: ComplexField) -> Result<Self> {
        let grid = *v.grid();
        Self::new(RealField::zeros(grid), ComplexField::zeros(grid), v, w)
    }

    pub fn grid(&self) -> &Grid1D {
        self.v.grid()
    }

    pub fn vector(&self) -> QuatField {
        self.alpha
            .zip_with(&self.beta, |a, b| Quaternion::compose(Complex64::new(0.0, a), b))
            .expect("grids checked at construction")
    }

    pub fn scalar_field(&self) -> QuatField {
        QuatField::from_symplectic(&self.v, &self.w).expect("grids checked at construction")
    }

    pub fn has_vector(&self) -> bool {
        self.alpha.max_norm_all() > 0.0 || self.beta.max_norm_all() > 0.0
    }
}

fn left_mul(a: &QuatField, b: &QuatField) -> QuatField {
    a.zip_with(b, |x, y| x * y).expect("same grid")
}

/// `(∇ − 𝒜)Ψ`.
pub fn covariant_gradient(psi: &QuatField, a: &QuatField) -> Result<QuatField> {
    ensure_same_grid(psi.grid(), a.grid())?;
    grad(psi).zip_with(&left_mul(a, psi), |g, ap| g - ap)
}

/// `Ĥ Ψ = −(ħ²/2m)[∇²Ψ − ∇(𝒜Ψ) − 𝒜∇Ψ + 𝒜(𝒜Ψ)] + UΨ`.
pub fn apply_hamiltonian_q(psi: &QuatField, pot: &QuatPotential, physics: Physics) -> Result<QuatField> {
    ensure_same_grid(psi.grid(), pot.grid())?;
    let u = pot.scalar_field();
    let mut out = laplace(psi);
    if pot.has_vector() {
        let a = pot.vector();
        let a_psi = left_mul(&a, psi);
        let d_a_psi = grad(&a_psi);
        let a_d_psi = left_mul(&a, &grad(psi));
        let a_a_psi = left_mul(&a, &a_psi);
        for (k, o) in out.values_mut().iter_mut().enumerate() {
            *o = *o - d_a_psi.values()[k] - a_d_psi.values()[k] + a_a_psi.values()[k];
        }
    }
    let kin = physics.kinetic();
    out.zip_with(&left_mul(&u, psi), |l, up| up - l * kin)
}

/// `Π̂Ψ = −ħ[(∇ − 𝒜)Ψ]η` without validating `η`.
fn momentum_unchecked(psi: &QuatField, a: &QuatField, eta: &QuatField, hbar: f64) -> Result<QuatField> {
    ensure_same_grid(psi.grid(), eta.grid())?;
    covariant_gradient(psi, a)?.zip_with(eta, |d, e| (d * e).scale(-hbar))
}

pub fn check_eta(eta: &QuatField) -> Result<()> {
    for (k, e) in eta.values().iter().enumerate() {
        let sq = *e * *e + Quaternion::ONE;
        if !(sq.norm() <= ETA_SQUARE_TOL) {
            return Err(Error::Precondition(format!("η² ≠ −1 at grid point {k} (|η² + 1| = {:.3e})", sq.norm())));
        }
    }
    Ok(())
}

/// `Π̂Ψ = −ħ[(∇ − 𝒜)Ψ]η`, with `η` on the right.
pub fn generalized_momentum_q(psi: &QuatField, a: &QuatField, eta: &QuatField, hbar: f64) -> Result<QuatField> {
    check_eta(eta)?;
    momentum_unchecked(psi, a, eta, hbar)
}

/// `𝒫 = ΨΨ†`.
pub fn probability_density(psi: &QuatField) -> RealField {
    psi.density()
}

/// `(1/2m)[(Π̂Ψ)Ψ† + Ψ(Π̂Ψ)†]` as a full quaternion, so realness can be checked.
pub fn probability_current_raw(psi: &QuatField, a: &QuatField, eta: &QuatField, physics: Physics) -> Result<QuatField> {
    let pi = generalized_momentum_q(psi, a, eta, physics.hbar)?;
    let m2 = 2.0 * physics.mass;
    pi.zip_with(psi, |p, s| (p * s.conj() + s * p.conj()) / m2)
}

pub fn probability_current(psi: &QuatField, a: &QuatField, eta: &QuatField, physics: Physics) -> Result<RealField> {
    Ok(probability_current_raw(psi, a, eta, physics)?.real_part())
}

/// Sign convention for the scalar-potential source.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum SourceSign {
    /// `ℬ = −(1/ħ)(UΨηΨ† − ΨηΨ†U†)`, the sign that closes the budget for
    /// `Ψ_t = −(1/ħ)(ĤΨ)η`.
    Derived,
    /// `ℬ = (1/ħ)(UΨηΨ† − ΨηΨ†U†)` as printed in the source derivation.
    AsPrinted,
}

pub fn source_b_raw(psi: &QuatField, u: &QuatField, eta: &QuatField, hbar: f64, sign: SourceSign) -> Result<QuatField> {
    ensure_same_grid(psi.grid(), u.grid())?;
    ensure_same_grid(psi.grid(), eta.grid())?;
    let s = match sign {
        SourceSign::Derived => -1.0 / hbar,
        SourceSign::AsPrinted => 1.0 / hbar,
    };
    let values = psi
        .values()
        .iter()
        .zip(u.values())
        .zip(eta.values())
        .map(|((&p, &uu), &e)| {
            let core = p * e * p.conj();
            (uu * core - core * uu.conj()).scale(s)
        })
        .collect();
    QuatField::new(*psi.grid(), values)
}

/// Source from a non-real scalar potential; zero for real `U`.
pub fn source_b(psi: &QuatField, u: &QuatField, eta: &QuatField, hbar: f64) -> Result<RealField> {
    Ok(source_b_raw(psi, u, eta, hbar, SourceSign::Derived)?.real_part())
}

/// `𝒢 = (1/2mħ)[(Π̂Ψ · p̂Ξ)Ψ† + Ψ(p̂Ξ)†(Π̂Ψ)†]` with `p̂Ξ = −iħ∇Ξ`.
///
/// `η` is not required to square to `−1` here so that the same formula can be
/// evaluated with a complex unit for comparison.
pub fn source_g_raw(
    psi: &QuatField,
    a: &QuatField,
    eta: &QuatField,
    grad_xi: &RealField,
    physics: Physics,
) -> Result<QuatField> {
    ensure_same_grid(psi.grid(), grad_xi.grid())?;
    let Physics { hbar, mass } = physics;
    let pi = momentum_unchecked(psi, a, eta, hbar)?;
    let values = pi
        .values()
        .iter()
        .zip(psi.values())
        .zip(grad_xi.values())
        .map(|((&p, &s), &gx)| {
            let p_xi = Quaternion::I.scale(-hbar * gx);
            (p * p_xi * s.conj() + s * p_xi.conj() * p.conj()) / (2.0 * mass * hbar)
        })
        .collect();
    QuatField::new(*psi.grid(), values)
}

pub fn source_g(
    psi: &QuatField,
    a: &QuatField,
    eta: &QuatField,
    grad_xi: &RealField,
    physics: Physics,
) -> Result<RealField> {
    Ok(source_g_raw(psi, a, eta, grad_xi, physics)?.real_part())
}

/// `Ψ_t = −(1/ħ)(ĤΨ)η`.
pub fn quat_rhs(psi: &QuatField, pot: &QuatPotential, eta: &QuatField, physics: Physics) -> Result<QuatField> {
    let h = apply_hamiltonian_q(psi, pot, physics)?;
    h.zip_with(eta, |hp, e| (hp * e).scale(-1.0 / physics.hbar))
}

/// One fourth-order Runge–Kutta step of the quaternionic equation.
pub fn step_quaternionic(
    psi: &QuatField,
    pot: &QuatPotential,
    eta: &QuatField,
    physics: Physics,
    dt: f64,
) -> Result<QuatField> {
    ensure_same_grid(psi.grid(), pot.grid())?;
    check_step(&physics, psi.grid(), dt)?;
    check_eta(eta)?;
    rk4_step(psi, 0.0, dt, |y, _| quat_rhs(y, pot, eta, physics))
}

pub fn evolve_quaternionic(
    psi: &QuatField,
    pot: &QuatPotential,
    eta: &QuatField,
    physics: Physics,
    dt: f64,
    steps: usize,
) -> Result<QuatField> {
    let mut state = psi.clone();
    for _ in 0..steps {
        state = step_quaternionic(&state, pot, eta, physics, dt)?;
    }
    Ok(state)
}

/// Budget `𝒫_t + ∇·𝒥 = ℬ + 𝒢`. Realness of every term is recorded in the
/// `imag_*` extras (largest imaginary magnitude per point).
pub fn continuity_q(
    psi: &QuatField,
    psi_t: &QuatField,
    pot: &QuatPotential,
    eta: &QuatField,
    grad_xi: &RealField,
    physics: Physics,
) -> Result<ContinuityReport> {
    ensure_same_grid(psi.grid(), psi_t.grid())?;
    let a = pot.vector();
    let p_t_raw = psi_t.zip_with(psi, |pt, p| pt * p.conj() + p * pt.conj())?;
    let j_raw = probability_current_raw(psi, &a, eta, physics)?;
    let b_raw = source_b_raw(psi, &pot.scalar_field(), eta, physics.hbar, SourceSign::Derived)?;
    let g_raw = source_g_raw(psi, &a, eta, grad_xi, physics)?;
    let b_printed = source_b_raw(psi, &pot.scalar_field(), eta, physics.hbar, SourceSign::AsPrinted)?;
    let current = j_raw.real_part();
    let imag = |f: &QuatField| f.map(Quaternion::imag_norm);
    Ok(ContinuityReport::new(
        probability_density(psi),
        vec![BudgetTerm::new("P_t", p_t_raw.real_part()), BudgetTerm::new("div_J", grad(&current))],
        vec![BudgetTerm::new("B", b_raw.real_part()), BudgetTerm::new("G", g_raw.real_part())],
    )?
    .with_extra("J", current)
    .with_extra("B_as_printed", b_printed.real_part())
    .with_extra("imag_P_t", imag(&p_t_raw))
    .with_extra("imag_J", imag(&j_raw))
    .with_extra("imag_B", imag(&b_raw))
    .with_extra("imag_G", imag(&g_raw)))
}

/// `η(x) = e^{iΞ(x,t)}j` along the grid axis and `∂Ξ/∂x`.
pub fn eta_field(schedule: &dyn AngleSchedule, grid: &Grid1D, t: f64) -> (QuatField, RealField) {
    let eta = QuatField::from_fn(*grid, |x| schedule.eta(point(x), t));
    let gx = RealField::from_fn(*grid, |x| schedule.xi_gradient(point(x), t, 0));
    (eta, gx)
}

/// `Λ(x, t)` sampled on the grid.
pub fn lambda_field(schedule: &dyn AngleSchedule, grid: &Grid1D, t: f64) -> QuatField {
    QuatField::from_fn(*grid, |x| schedule.lambda(point(x), t))
}

fn point(x: f64) -> Vec3 {
    [x, 0.0, 0.0]
}

/// Max-norm of `ħΨ_tη − ĤΨ` for `Ψ = ΦΛ(t)` at `samples` times spread over
/// one period of Λ (or `[0, 1]` when Θ̇ = 0). Needs a space-independent
/// schedule; Λ̇ comes from the analytic angle rates.
pub fn separation_check(
    phi: &QuatField,
    schedule: &dyn AngleSchedule,
    pot: &QuatPotential,
    physics: Physics,
    samples: usize,
) -> Result<f64> {
    ensure_same_grid(phi.grid(), pot.grid())?;
    let origin = point(phi.grid().origin());
    let rate = schedule.rates(origin, 0.0).theta;
    let span = if rate == 0.0 { 1.0 } else { 2.0 * std::f64::consts::PI / rate.abs() };
    let h_phi = apply_hamiltonian_q(phi, pot, physics)?;
    let mut worst: f64 = 0.0;
    for s in 0..samples.max(1) {
        let t = span * s as f64 / samples.max(1) as f64;
        let lambda = schedule.lambda(origin, t);
        let lambda_dot = schedule.lambda_dot(origin, t);
        let eta = schedule.eta(origin, t);
        for (k, &p) in phi.values().iter().enumerate() {
            let lhs = p * lambda_dot * eta;
            let rhs = h_phi.values()[k] * lambda;
            worst = worst.max((lhs.scale(physics.hbar) - rhs).norm());
        }
    }
    Ok(worst)
}

/// Pointwise residual of
/// `ħΦΛ̇η + (ħ²/2m)(∇²Φ·Λ + 2∇Φ·∇Λ + Φ∇²Λ) − VΦΛ` with the grid along the
/// first axis. `∇Λ` and `∇²Λ` are analytic; the cross term is always kept.
pub fn full_pde_residual_field(
    phi: &QuatField,
    schedule: &dyn AngleSchedule,
    v: &ComplexField,
    physics: Physics,
    t: f64,
) -> Result<QuatField> {
    ensure_same_grid(phi.grid(), v.grid())?;
    let grid = *phi.grid();
    let d1 = grad(phi);
    let d2 = laplace(phi);
    let kin = physics.kinetic();
    let mut out = QuatField::zeros(grid);
    for (k, o) in out.values_mut().iter_mut().enumerate() {
        let x = point(grid.x(k));
        let a = schedule.angles(x, t);
        let lambda = a.lambda();
        let dl = lambda_gradient(schedule, x, t).assemble(a)[0];
        let ll = lambda_laplacian(schedule, x, t).assemble(a);
        let p = phi.values()[k];
        let time = (p * schedule.lambda_dot(x, t) * a.eta()).scale(physics.hbar);
        let space = (d2.values()[k] * lambda + (d1.values()[k] * dl).scale(2.0) + p * ll).scale(kin);
        *o = time + space - v.values()[k] * (p * lambda);
    }
    Ok(out)
}

/// Interior max-norm of [`full_pde_residual_field`].
pub fn full_pde_residual(
    phi: &QuatField,
    schedule: &dyn AngleSchedule,
    v: &ComplexField,
    physics: Physics,
    t: f64,
) -> Result<f64> {
    Ok(full_pde_residual_field(phi, schedule, v, physics, t)?.max_norm())
}

/// `(xΠ̂ₓ − Π̂ₓx)Ψ − ħΨη` with `𝒜 = 0`, over points whose stencil does not
/// wrap around the grid.
pub fn commutator_residual_q(psi: &QuatField, eta: &QuatField, hbar: f64) -> Result<f64> {
    let grid = *psi.grid();
    let zero = QuatField::zeros(grid);
    let x_psi = psi.map_indexed(|_, x, p| p.scale(x));
    let pi_psi = generalized_momentum_q(psi, &zero, eta, hbar)?;
    let pi_x_psi = generalized_momentum_q(&x_psi, &zero, eta, hbar)?;
    let n = grid.n();
    let mut worst: f64 = 0.0;
    for k in 1..n - 1 {
        let x = grid.x(k);
        let lhs = pi_psi.values()[k].scale(x) - pi_x_psi.values()[k];
        let rhs = (psi.values()[k] * eta.values()[k]).scale(hbar);
        worst = worst.max((lhs - rhs).norm());
    }
    Ok(worst)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::deformed::{apply_hamiltonian_c, continuity_ansatz, DeformAngle, DeformedSetup};
    use crate::eigen::box_ground_state;
    use crate::grid::norm;
    use crate::quat::make_eta;
    use crate::schedule::{stationary_lambda, stationary_period, ConstantPhases, SpaceLinear};
    use crate::smooth::{SmoothField, SmoothQuat};
    use crate::tolerances::{budget_bound, truncation_constant};
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;
    use std::f64::consts::PI;

    fn phys() -> Physics {
        Physics::default()
    }

    /// Hamilton product written out term by term.
    fn brute_mul(p: Quaternion, q: Quaternion) -> Quaternion {
        Quaternion::new(
            p.w * q.w - p.x * q.x - p.y * q.y - p.z * q.z,
            p.w * q.x + p.x * q.w + p.y * q.z - p.z * q.y,
            p.w * q.y - p.x * q.z + p.y * q.w + p.z * q.x,
            p.w * q.z + p.x * q.y - p.y * q.x + p.z * q.w,
        )
    }

    fn constant_eta(grid: Grid1D, xi: f64) -> QuatField {
        let e = make_eta(xi).unwrap();
        QuatField::from_fn(grid, |_| e)
    }

    fn random_periodic(seed: u64) -> (Grid1D, SmoothQuat, QuatField) {
        let g = Grid1D::periodic(128, 2.0 * PI).unwrap();
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let s = SmoothQuat::random(&g, 3, &mut rng);
        let psi = s.sample(&g);
        (g, s, psi)
    }

    #[test]
    fn hamiltonian_reduces_to_complex_case() {
        let (g, _, _) = random_periodic(1);
        let mut rng = ChaCha8Rng::seed_from_u64(2);
        let psi_c = SmoothField::random(&g, 3, &mut rng).sample(&g);
        let v = ComplexField::from_fn(g, |x| Complex64::new(x.sin(), 0.0));
        let pot = QuatPotential::scalar(v.clone(), ComplexField::zeros(g)).unwrap();
        let hq = apply_hamiltonian_q(&psi_c.to_quat(), &pot, phys()).unwrap();
        let hc = apply_hamiltonian_c(&psi_c, &v, phys()).unwrap();
        assert!(hq.max_diff(&hc.to_quat()).unwrap() < 1e-13);
    }

    #[test]
    fn constant_w_acts_from_the_left() {
        let g = Grid1D::periodic(16, 1.0).unwrap();
        let w0 = Complex64::new(0.7, 0.0);
        let pot = QuatPotential::scalar(ComplexField::zeros(g), ComplexField::from_fn(g, |_| w0)).unwrap();
        let one = QuatField::from_fn(g, |_| Quaternion::ONE);
        let h = apply_hamiltonian_q(&one, &pot, phys()).unwrap();
        assert!(h.values().iter().all(|q| q.max_abs_diff(Quaternion::J.scale(0.7)) < 1e-15));

        // for a non-real Ψ left and right products differ
        let i_field = QuatField::from_fn(g, |_| Quaternion::I);
        let h = apply_hamiltonian_q(&i_field, &pot, phys()).unwrap();
        assert!(h.values()[0].max_abs_diff((Quaternion::J * Quaternion::I).scale(0.7)) < 1e-15);
    }

    #[test]
    fn expanded_vector_potential_matches_composed_operator() {
        let err = |n: usize| {
            let g = Grid1D::periodic(n, 2.0 * PI).unwrap();
            let mut rng = ChaCha8Rng::seed_from_u64(4);
            let psi = SmoothQuat::random(&g, 2, &mut rng).sample(&g);
            let alpha = RealField::from_fn(g, |_| 0.6);
            let pot = QuatPotential::new(alpha, ComplexField::zeros(g), ComplexField::zeros(g), ComplexField::zeros(g))
                .unwrap();
            let h = apply_hamiltonian_q(&psi, &pot, phys()).unwrap();
            let a = pot.vector();
            let dd = covariant_gradient(&covariant_gradient(&psi, &a).unwrap(), &a).unwrap();
            h.max_diff(&dd.scaled(-phys().kinetic())).unwrap()
        };
        let (e1, e2) = (err(128), err(256));
        assert!((e1 / e2 - 4.0).abs() < 0.3, "{e1} {e2}");
    }

    #[test]
    fn momentum_examples() {
        let g = Grid1D::periodic(64, 2.0 * PI).unwrap();
        let zero = QuatField::zeros(g);
        let eta = constant_eta(g, 0.0);
        let wave = ComplexField::from_fn(g, |x| Complex64::from_polar(1.0, 2.0 * x)).to_quat();
        let m = generalized_momentum_q(&wave, &zero, &eta, 1.0).unwrap();
        let want = grad(&wave).map(|d| (d * Quaternion::J).scale(-1.0));
        assert!(m.max_diff(&want).unwrap() < 1e-15);

        let flat = QuatField::from_fn(g, |_| Quaternion::new(0.3, 0.1, -0.2, 0.5));
        assert!(generalized_momentum_q(&flat, &zero, &eta, 1.0).unwrap().max_norm_all() < 1e-14);

        let bad = QuatField::from_fn(g, |_| Quaternion::I.scale(1.1));
        assert!(matches!(generalized_momentum_q(&wave, &zero, &bad, 1.0), Err(Error::Precondition(_))));

        // a global shift of Γ₀ leaves |Π̂Ψ| unchanged
        let s1 = SpaceLinear::new(1.0, [0.0, 1.0, 0.0], [0.5, 0.0, 0.0], 0.0, 0.3, 1.0).unwrap();
        let s2 = SpaceLinear::new(1.0, [0.0, 1.0, 0.0], [0.5, 0.0, 0.0], 1.1, 0.3, 1.0).unwrap();
        let (e1, _) = eta_field(&s1, &g, 0.2);
        let (e2, _) = eta_field(&s2, &g, 0.2);
        let m1 = generalized_momentum_q(&wave, &zero, &e1, 1.0).unwrap().density();
        let m2 = generalized_momentum_q(&wave, &zero, &e2, 1.0).unwrap().density();
        assert!(m1.max_diff(&m2).unwrap() < 1e-13);
    }

    #[test]
    fn density_examples() {
        let g = Grid1D::periodic(32, 1.0).unwrap();
        let s = ConstantPhases::new(1.0, 0.4, -0.2, 1.0);
        let lam = lambda_field(&s, &g, 0.7);
        assert!(probability_density(&lam).values().iter().all(|p| (p - 1.0).abs() < 1e-15));
        let (_, _, phi) = random_periodic(8);
        let lam = QuatField::from_fn(*phi.grid(), make_lambda_at);
        let psi = phi.mul_right(&lam).unwrap();
        assert!(probability_density(&psi).max_diff(&phi.density()).unwrap() < 1e-14);
        assert_eq!(probability_density(&QuatField::zeros(g)).max_norm_all(), 0.0);
    }

    fn make_lambda_at(x: f64) -> Quaternion {
        crate::quat::make_lambda(x.sin(), 2.0 * x, -x).unwrap()
    }

    #[test]
    fn current_examples() {
        let g = Grid1D::periodic(64, 2.0 * PI).unwrap();
        let zero = QuatField::zeros(g);
        let eta = constant_eta(g, 0.0);
        let real = RealField::from_fn(g, |x| x.sin() + 0.3).map(Quaternion::real);
        assert!(probability_current(&real, &zero, &eta, phys()).unwrap().max_norm_all() < 1e-15);

        // plane wave, η = j: compare with a brute-force expansion
        let k = 2.0;
        let wave = ComplexField::from_fn(g, |x| Complex64::from_polar(1.0, k * x)).to_quat();
        let j = probability_current_raw(&wave, &zero, &eta, phys()).unwrap();
        let d = grad(&wave);
        for i in 0..g.n() {
            let pi = brute_mul(d.values()[i], Quaternion::J).scale(-1.0);
            let s = wave.values()[i];
            let want = (brute_mul(pi, s.conj()) + brute_mul(s, pi.conj())).scale(0.5);
            assert!(j.values()[i].max_abs_diff(want) < 1e-14);
            assert!(j.values()[i].imag_norm() < 1e-14);
        }
    }

    #[test]
    fn current_of_stationary_state_is_time_independent() {
        let g = Grid1D::periodic(64, 2.0 * PI).unwrap();
        let mut rng = ChaCha8Rng::seed_from_u64(12);
        let phi = SmoothQuat::random(&g, 2, &mut rng).sample(&g);
        let zero = QuatField::zeros(g);
        let eta = constant_eta(g, 0.9);
        let e = 1.3;
        let current = |t: f64| {
            let lam = stationary_lambda(e, 0.2, 1.1, t, 1.0);
            let psi = phi.map(|p| p * lam);
            probability_current(&psi, &zero, &eta, phys()).unwrap()
        };
        let j0 = current(0.0);
        assert!(j0.max_norm_all() > 1e-3);
        let period = stationary_period(e, 1.0);
        for t in [0.3, 1.7, period] {
            assert!(current(t).max_diff(&j0).unwrap() < 1e-10);
        }
    }

    #[test]
    fn source_b_examples() {
        let (g, _, psi) = random_periodic(5);
        let eta = constant_eta(g, 0.4);
        let real_u = ComplexField::from_fn(g, |x| Complex64::new(x.cos(), 0.0));
        let u = QuatField::from_symplectic(&real_u, &ComplexField::zeros(g)).unwrap();
        let b = source_b_raw(&psi, &u, &eta, 1.0, SourceSign::Derived).unwrap();
        assert!(b.max_norm_all() < 1e-14);

        let imag_u = ComplexField::from_fn(g, |x| Complex64::new(0.0, 0.5 + x.sin()));
        let u = QuatField::from_symplectic(&imag_u, &ComplexField::zeros(g)).unwrap();
        let b = source_b_raw(&psi, &u, &eta, 1.0, SourceSign::Derived).unwrap();
        assert!(b.real_part().max_norm_all() > 1e-3);
        for i in 0..g.n() {
            let (p, uu, e) = (psi.values()[i], u.values()[i], eta.values()[i]);
            let core = brute_mul(brute_mul(p, e), p.conj());
            let want = (brute_mul(uu, core) - brute_mul(core, uu.conj())).scale(-1.0);
            assert!(b.values()[i].max_abs_diff(want) < 1e-12);
        }
        let printed = source_b_raw(&psi, &u, &eta, 1.0, SourceSign::AsPrinted).unwrap();
        assert!(printed.max_diff(&b.scaled(-1.0)).unwrap() == 0.0);
        assert_eq!(source_b(&QuatField::zeros(g), &u, &eta, 1.0).unwrap().max_norm_all(), 0.0);
    }

    #[test]
    fn source_g_examples() {
        let (g, _, psi) = random_periodic(6);
        let zero = QuatField::zeros(g);
        let eta = constant_eta(g, 0.4);
        let no_grad = RealField::zeros(g);
        assert_eq!(source_g(&psi, &zero, &eta, &no_grad, phys()).unwrap().max_norm_all(), 0.0);
        let some_grad = RealField::from_fn(g, |x| 0.2 + 0.1 * x.cos());
        assert_eq!(source_g(&QuatField::zeros(g), &zero, &eta, &some_grad, phys()).unwrap().max_norm_all(), 0.0);

        // with a complex state and the complex unit i e^{−iθ}, 𝒢 is the J₀ term
        let mut rng = ChaCha8Rng::seed_from_u64(7);
        let psi_c = SmoothField::random(&g, 3, &mut rng).sample(&g);
        let theta = DeformAngle::Wave { offset: 0.3, t_rate: 0.0, amplitude: 0.4, wavenumber: 1.0, frequency: 0.0 };
        let unit = ComplexField::from_fn(g, |x| Complex64::i() * Complex64::from_polar(1.0, -theta.value(x, 0.0)));
        let setup = DeformedSetup::new(theta, ComplexField::zeros(g), phys());
        let rep = continuity_ansatz(&psi_c, &ComplexField::zeros(g), &setup, 0.0).unwrap();
        let j0 = rep.term("J0").unwrap();
        let g_q = source_g(&psi_c.to_quat(), &zero, &unit.to_quat(), &theta.sample_dx(&g, 0.0), phys()).unwrap();
        assert!(j0.max_norm_all() > 1e-3);
        assert!(g_q.max_diff(j0).unwrap() <= 1e-10);
    }

    #[test]
    fn budgets_close() {
        let (g, smooth, psi) = random_periodic(9);
        let c = truncation_constant(&smooth.a, &g).max(truncation_constant(&smooth.b, &g));
        let v = ComplexField::from_fn(g, |x| Complex64::new(0.5 * x.cos(), 0.0));
        let cases = [
            (QuatPotential::scalar(v.clone(), ComplexField::zeros(g)).unwrap(), false),
            (
                QuatPotential::scalar(v.clone(), ComplexField::from_fn(g, |x| Complex64::new(0.3, 0.2 * x.sin())))
                    .unwrap(),
                true,
            ),
            (
                QuatPotential::new(
                    RealField::from_fn(g, |x| 0.3 * x.sin()),
                    ComplexField::from_fn(g, |x| Complex64::new(0.1, 0.2 * x.cos())),
                    v.clone(),
                    ComplexField::from_fn(g, |_| Complex64::new(0.0, 0.4)),
                )
                .unwrap(),
                true,
            ),
        ];
        for (pot, expect_b) in cases {
            for s in [
                Box::new(ConstantPhases::new(1.0, 0.2, 0.9, 1.0)) as Box<dyn AngleSchedule>,
                Box::new(SpaceLinear::new(1.0, [0.0, 1.0, 0.0], [1.0, 0.0, 0.0], 0.2, 0.9, 1.0).unwrap()),
            ] {
                let (eta, gx) = eta_field(s.as_ref(), &g, 0.0);
                let psi_t = quat_rhs(&psi, &pot, &eta, phys()).unwrap();
                let rep = continuity_q(&psi, &psi_t, &pot, &eta, &gx, phys()).unwrap();
                assert!(
                    rep.max_residual() <= budget_bound(&rep, c),
                    "{} vs {}",
                    rep.max_residual(),
                    budget_bound(&rep, c)
                );
                assert_eq!(rep.term("B").unwrap().max_norm() > 1e-3, expect_b);
                for name in ["imag_P_t", "imag_J", "imag_B", "imag_G"] {
                    assert!(rep.term(name).unwrap().max_norm_all() <= 1e-12 * rep.scale(), "{name}");
                }
                // the printed sign does not close when ℬ ≠ 0
                if expect_b {
                    let printed = rep
                        .residual
                        .axpy(1.0, rep.term("B").unwrap())
                        .unwrap()
                        .axpy(-1.0, rep.term("B_as_printed").unwrap())
                        .unwrap();
                    assert!(printed.max_norm() > rep.term("B").unwrap().max_norm());
                    assert!(printed.max_norm() > budget_bound(&rep, c));
                }
            }
        }
        let zero_rep = continuity_q(
            &QuatField::zeros(g),
            &QuatField::zeros(g),
            &cases_zero(g),
            &constant_eta(g, 0.0),
            &RealField::zeros(g),
            phys(),
        )
        .unwrap();
        assert_eq!(zero_rep.scale(), 0.0);
        assert_eq!(zero_rep.max_residual(), 0.0);
    }

    fn cases_zero(g: Grid1D) -> QuatPotential {
        QuatPotential::zero(g)
    }

    #[test]
    fn budget_converges_at_second_order() {
        let res = |n: usize| {
            let g = Grid1D::periodic(n, 2.0 * PI).unwrap();
            let mut rng = ChaCha8Rng::seed_from_u64(10);
            let psi = SmoothQuat::random(&g, 2, &mut rng).sample(&g);
            let pot = QuatPotential::scalar(
                ComplexField::from_fn(g, |x| Complex64::new(x.cos(), 0.0)),
                ComplexField::from_fn(g, |_| Complex64::new(0.3, 0.1)),
            )
            .unwrap();
            let s = SpaceLinear::new(1.0, [0.0, 1.0, 0.0], [1.0, 0.0, 0.0], 0.0, 0.0, 1.0).unwrap();
            let (eta, gx) = eta_field(&s, &g, 0.0);
            let psi_t = quat_rhs(&psi, &pot, &eta, phys()).unwrap();
            continuity_q(&psi, &psi_t, &pot, &eta, &gx, phys()).unwrap().max_residual()
        };
        let ratio = res(128) / res(256);
        assert!((ratio - 4.0).abs() < 0.4, "{ratio}");
    }

    fn stationary_setup(n: usize) -> (QuatField, f64, QuatPotential, ConstantPhases) {
        let g = Grid1D::dirichlet(n, 1.0).unwrap();
        let gs = box_ground_state(&RealField::zeros(g), phys()).unwrap();
        let phi = gs.state.map(Quaternion::real);
        let pot = QuatPotential::zero(g);
        // ĤΦ = εΦ pairs with Θ̇ = −ε/ħ
        let sched = ConstantPhases::new(-gs.energy, 0.3, 1.2, 1.0);
        (phi, gs.energy, pot, sched)
    }

    #[test]
    fn stationary_evolution_follows_closed_form() {
        let (phi, e, pot, sched) = stationary_setup(48);
        let g = *phi.grid();
        let (eta, _) = eta_field(&sched, &g, 0.0);
        let period = stationary_period(e, 1.0);
        let steps = (period / phys().max_stable_dt(&g)).ceil() as usize;
        let dt = period / steps as f64;
        let psi0 = phi.mul_right(&lambda_field(&sched, &g, 0.0)).unwrap();
        let mut psi = psi0.clone();
        let mut worst: f64 = 0.0;
        for n in 0..steps {
            psi = step_quaternionic(&psi, &pot, &eta, phys(), dt).unwrap();
            if n % 97 == 0 || n + 1 == steps {
                let exact = phi.mul_right(&lambda_field(&sched, &g, (n + 1) as f64 * dt)).unwrap();
                worst = worst.max(psi.max_diff(&exact).unwrap());
            }
        }
        assert!(worst < 1e-6, "{worst}");
        assert!(psi.max_diff(&psi0).unwrap() < 1e-8);
    }

    #[test]
    fn complex_state_with_j_conserves_norm() {
        let g = Grid1D::periodic(64, 2.0 * PI).unwrap();
        let mut rng = ChaCha8Rng::seed_from_u64(13);
        let psi0 = SmoothField::random(&g, 2, &mut rng).sample(&g).to_quat();
        let pot =
            QuatPotential::scalar(ComplexField::from_fn(g, |x| Complex64::new(x.sin(), 0.0)), ComplexField::zeros(g))
                .unwrap();
        let eta = constant_eta(g, 0.0);
        let dt = 0.5 * phys().max_stable_dt(&g);
        let out = evolve_quaternionic(&psi0, &pot, &eta, phys(), dt, 400).unwrap();
        assert!((norm(&out) / norm(&psi0) - 1.0).abs() < 1e-6);
        assert!(matches!(step_quaternionic(&psi0, &pot, &eta, phys(), 2.0 * dt * 2.0), Err(Error::Config(_))));
    }

    #[test]
    fn step_halving_gives_fourth_order() {
        let (g, _, psi) = random_periodic(14);
        let pot = QuatPotential::scalar(
            ComplexField::from_fn(g, |x| Complex64::new(x.cos(), 0.0)),
            ComplexField::from_fn(g, |_| Complex64::new(0.2, 0.0)),
        )
        .unwrap();
        let eta = constant_eta(g, 0.3);
        let t_end = 40.0 * phys().max_stable_dt(&g);
        let run = |steps: usize| evolve_quaternionic(&psi, &pot, &eta, phys(), t_end / steps as f64, steps).unwrap();
        let reference = run(640);
        let e1 = run(80).max_diff(&reference).unwrap();
        let e2 = run(160).max_diff(&reference).unwrap();
        let ratio = e1 / e2;
        assert!((ratio - 16.0).abs() < 2.5, "{ratio}");
    }

    #[test]
    fn separation_examples() {
        let (phi, _, pot, sched) = stationary_setup(48);
        let r = separation_check(&phi, &sched, &pot, phys(), 16).unwrap();
        assert!(r < 1e-9, "{r}");

        // complex Φ gives the same residual
        let phase = Complex64::from_polar(1.0, 0.8);
        let phi_c = phi.map(|q| Quaternion::from_complex(phase * q.w));
        let rc = separation_check(&phi_c, &sched, &pot, phys(), 16).unwrap();
        assert!((rc - r).abs() < 1e-9);

        // zero mode with Θ̇ = 0
        let g = Grid1D::periodic(32, 1.0).unwrap();
        let flat = QuatField::from_fn(g, |_| Quaternion::ONE);
        let frozen = ConstantPhases::new(0.0, 0.1, 0.2, 1.0);
        assert_eq!(separation_check(&flat, &frozen, &QuatPotential::zero(g), phys(), 4).unwrap(), 0.0);
    }

    #[test]
    fn full_pde_examples() {
        // space-independent Λ agrees with the separation residual
        let (phi, _, pot, sched) = stationary_setup(48);
        let v = pot.v.clone();
        let r = full_pde_residual(&phi, &sched, &v, phys(), 0.37).unwrap();
        assert!(r < 1e-9);

        // space-linear Λ orthogonal to the grid: shifted eigenproblem
        let g = *phi.grid();
        let gs = box_ground_state(&RealField::zeros(g), phys()).unwrap();
        let kappa = 5.0;
        let energy = -(gs.energy + phys().kinetic() * kappa);
        let s = SpaceLinear::new(energy, [0.0, 1.0, 0.0], [0.0, 0.0, 2.0], 0.4, 0.1, 1.0).unwrap();
        let phi = gs.state.map(Quaternion::real);
        assert!(full_pde_residual(&phi, &s, &v, phys(), 0.2).unwrap() < 1e-9);

        // the unshifted eigenvalue does not close
        let wrong = SpaceLinear::new(-gs.energy, [0.0, 1.0, 0.0], [0.0, 0.0, 2.0], 0.4, 0.1, 1.0).unwrap();
        assert!(full_pde_residual(&phi, &wrong, &v, phys(), 0.2).unwrap() > 1.0);

        assert_eq!(full_pde_residual(&QuatField::zeros(g), &s, &v, phys(), 0.2).unwrap(), 0.0);
    }

    #[test]
    fn full_pde_with_cross_term() {
        // Λ varies along the grid: Θ = Et/ħ + kx, Γ = Ω = const; Φ a plane
        // wave. The cross term is required for the residual to converge.
        let err = |n: usize| {
            let g = Grid1D::periodic(n, 2.0 * PI).unwrap();
            let kx = 1.0;
            let q = 2.0;
            let phi = ComplexField::from_fn(g, |x| Complex64::from_polar(1.0, q * x)).to_quat();
            // choose E so that the continuum residual vanishes is not possible in
            // general; instead compare with the continuum residual evaluated
            // from analytic derivatives of Φ
            let s = SpaceLinear::new(0.7, [kx, 0.0, 0.0], [0.0, 0.0, 0.0], 0.0, 0.5, 1.0).unwrap();
            let v = ComplexField::zeros(g);
            let num = full_pde_residual_field(&phi, &s, &v, phys(), 0.1).unwrap();
            let exact = QuatField::from_fn(g, |x| {
                let p = Quaternion::from_complex(Complex64::from_polar(1.0, q * x));
                let dp = Quaternion::from_complex(Complex64::new(0.0, q) * Complex64::from_polar(1.0, q * x));
                let d2p = p.scale(-q * q);
                let pt = [x, 0.0, 0.0];
                let a = s.angles(pt, 0.1);
                let dl = lambda_gradient(&s, pt, 0.1).assemble(a)[0];
                let ll = lambda_laplacian(&s, pt, 0.1).assemble(a);
                (p * s.lambda_dot(pt, 0.1) * a.eta()) + (d2p * a.lambda() + (dp * dl).scale(2.0) + p * ll).scale(0.5)
            });
            num.max_diff(&exact).unwrap()
        };
        let ratio = err(64) / err(128);
        assert!((ratio - 4.0).abs() < 0.3, "{ratio}");
    }

    #[test]
    fn commutator_examples() {
        let g = Grid1D::periodic(256, 20.0).unwrap();
        let gauss = ComplexField::from_fn(g, |x| Complex64::new((-(x - 10.0).powi(2)).exp(), 0.0)).to_quat();
        assert_eq!(commutator_residual_q(&QuatField::zeros(g), &constant_eta(g, 0.0), 1.0).unwrap(), 0.0);
        let r0 = commutator_residual_q(&gauss, &constant_eta(g, 0.0), 1.0).unwrap();
        // the discrete commutator leaves ħ(dx²/2)Ψ''η, and max|Ψ''| = 2 here
        let bound = g.dx() * g.dx() * 1.01;
        assert!(r0 > 0.0 && r0 < bound, "{r0} {bound}");
        let mut rng = ChaCha8Rng::seed_from_u64(3);
        for _ in 0..5 {
            let xi = rng.gen_range(-PI..PI);
            let r = commutator_residual_q(&gauss, &constant_eta(g, xi), 1.0).unwrap();
            assert!((r - r0).abs() < 1e-12);
        }
    }
}
