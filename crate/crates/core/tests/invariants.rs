//! Property tests for the invariants each module promises, driven only
//! through the public API.

use std::f64::consts::PI;

use genunit_core::deformed::{
    apply_hamiltonian_c, beta_real_potential, continuity_ansatz, continuity_deformed, deformed_rhs, step_deformed,
    DeformAngle, DeformedSetup,
};
use genunit_core::eigen::box_ground_state;
use genunit_core::grid::{grad, integrate, laplace, norm};
use genunit_core::qdyn::{
    continuity_q, eta_field, full_pde_residual, lambda_field, probability_density, quat_rhs, step_quaternionic,
    QuatPotential,
};
use genunit_core::quat::lambda_angles;
use genunit_core::schedule::{
    eigen_reduction_check, integrate_fdriven, lambda_dot_identity, lambda_eta_conj_at, stationary_period, Angles,
    ConstantPhases, FDriven, Forcing, SpaceLinear,
};
use genunit_core::smooth::{SmoothField, SmoothQuat};
use genunit_core::tolerances::{budget_bound, calibration_field, truncation_constant};
use genunit_core::{
    complex_eta, make_eta, make_lambda, AngleSchedule, ComplexField, Grid1D, Physics, QuatField, Quaternion, RealField,
};
use num_complex::Complex64;
use proptest::prelude::*;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

fn ring(n: usize) -> Grid1D {
    Grid1D::periodic(n, 2.0 * PI).unwrap()
}

fn physics() -> Physics {
    Physics::default()
}

fn unit_quat() -> impl Strategy<Value = Quaternion> {
    (-1.0..1.0f64, -1.0..1.0f64, -1.0..1.0f64, -1.0..1.0f64)
        .prop_filter("away from zero", |(a, b, c, d)| a * a + b * b + c * c + d * d > 1e-2)
        .prop_map(|(a, b, c, d)| {
            let q = Quaternion::new(a, b, c, d);
            q.scale(1.0 / q.norm())
        })
}

/// Calibration constant for products whose wavenumbers reach `band`.
fn band_constant(grid: &Grid1D, band: usize) -> f64 {
    truncation_constant(&calibration_field(grid, band), grid)
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(256))]

    #[test]
    fn eta_is_a_unit_square_root_of_minus_one(xi in -50.0..50.0f64) {
        let eta = make_eta(xi).unwrap();
        prop_assert!((eta * eta + Quaternion::ONE).norm() <= 1e-15);
        prop_assert!((eta.norm() - 1.0).abs() <= 1e-15);
    }

    #[test]
    fn complex_unit_never_squares_to_minus_one(theta in -10.0..10.0f64) {
        prop_assume!(theta.sin().abs() > 1e-6);
        let c = complex_eta(theta);
        prop_assert!((c * c + 1.0).norm() > 1e-6);
    }

    #[test]
    fn j_conjugates_complex_numbers(re in -5.0..5.0f64, im in -5.0..5.0f64) {
        let a = Quaternion::from_complex(Complex64::new(re, im));
        let lhs = Quaternion::J * a;
        let rhs = a.conj() * Quaternion::J;
        prop_assert!(lhs.max_abs_diff(rhs) == 0.0);
    }

    #[test]
    fn every_unit_quaternion_has_angles(q in unit_quat()) {
        let (theta, gamma, omega) = lambda_angles(q).unwrap();
        prop_assert!(make_lambda(theta, gamma, omega).unwrap().max_abs_diff(q) <= 1e-12);
    }

    #[test]
    fn constant_phase_derivative_is_second_order(
        e in 0.5..3.0f64, g0 in -PI..PI, o0 in -PI..PI, t in -5.0..5.0f64,
    ) {
        let s = ConstantPhases::new(e, g0, o0, 1.0);
        let coarse = lambda_dot_identity(&s, [0.0; 3], t, 1e-2).unwrap();
        let fine = lambda_dot_identity(&s, [0.0; 3], t, 5e-3).unwrap();
        prop_assert!(((coarse / fine).log2() - 2.0).abs() < 0.1);
    }

    #[test]
    fn curvature_constant_ignores_position_and_phase(
        ky in -2.0..2.0f64, kz in -2.0..2.0f64, s in -1.0..1.0f64,
        x in -5.0..5.0f64, y in -5.0..5.0f64, g0 in -PI..PI, o0 in -PI..PI,
    ) {
        let (k, g) = ([0.0, ky, kz], [0.0, -s * kz, s * ky]);
        let base = SpaceLinear::new(1.0, k, g, 0.0, 0.0, 1.0).unwrap();
        let moved = SpaceLinear::new(1.0, k, g, g0, o0, 1.0).unwrap();
        let a = eigen_reduction_check(&base, [0.0; 3], 0.0).constant;
        let b = eigen_reduction_check(&moved, [x, y, 1.0], 0.3).constant;
        prop_assert!((a - b).abs() <= 1e-12 * a.max(1.0));
        prop_assert!((a - (ky * ky + kz * kz) * (1.0 + s * s)).abs() <= 1e-12 * a.max(1.0));
    }
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(24))]

    #[test]
    fn driven_phases_remove_the_j_part(
        e in 0.5..2.0f64, amp in -1.0..1.0f64, freq in 0.1..3.0f64, g0 in -PI..PI, o0 in -PI..PI,
    ) {
        let fam = FDriven::new(e, Forcing::Sine { amplitude: amp, frequency: freq }, 0.0, g0, o0, 1.0);
        let times: Vec<f64> = (0..20).map(|k| 0.15 * k as f64).collect();
        let phases = integrate_fdriven(&fam, &times).unwrap();
        for (&t, &(g, o)) in times.iter().zip(&phases) {
            let q = lambda_eta_conj_at(Angles::new(fam.theta_rate * t, g, o), fam.rates([0.0; 3], t));
            prop_assert!(q.b().norm() <= 1e-10);
        }
    }

    #[test]
    fn periodic_integration_by_parts(seed in 0u64..1_000) {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let grid = ring(128);
        let f = SmoothField::random(&grid, 3, &mut rng).sample(&grid).re();
        let g = SmoothField::random(&grid, 3, &mut rng).sample(&grid).re();
        let sum = grad(&f).zip_with(&g, |a, b| a * b).unwrap()
            .zip_with(&f.zip_with(&grad(&g), |a, b| a * b).unwrap(), |a, b| a + b).unwrap();
        let scale = integrate(&f.map(f64::abs)) * g.max_norm_all() * 3.0;
        prop_assert!(integrate(&sum).abs() <= scale * grid.dx() * grid.dx());
    }

    #[test]
    fn laplacian_error_quarters_when_dx_halves(k in 1usize..6) {
        let err = |n: usize| {
            let grid = ring(n);
            let kk = k as f64;
            let f = RealField::from_fn(grid, |x| (kk * x).sin());
            let exact = RealField::from_fn(grid, |x| -kk * kk * (kk * x).sin());
            laplace(&f).max_diff(&exact).unwrap()
        };
        let ratio = err(128) / err(256);
        prop_assert!((ratio - 4.0).abs() < 0.1, "ratio {}", ratio);
    }

    #[test]
    fn zero_angle_is_ordinary_schroedinger(seed in 0u64..1_000) {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let grid = ring(64);
        let psi = SmoothField::random(&grid, 3, &mut rng).sample(&grid);
        let v = RealField::from_fn(grid, |x| 0.5 * x.cos());
        let setup = DeformedSetup::new(DeformAngle::constant(0.0), v.clone().into(), physics());
        let h = apply_hamiltonian_c(&psi, &v.into(), physics()).unwrap();
        let expected = h.map(|z| -Complex64::i() * z);
        prop_assert!(deformed_rhs(&psi, &setup, 0.0).unwrap().max_diff(&expected).unwrap() == 0.0);
        let dt = 0.5 * physics().max_stable_dt(&grid);
        let next = step_deformed(&psi, &setup, 0.0, dt).unwrap();
        // RK4 is not exactly unitary; the drift is O(dt⁵) per step
        prop_assert!((norm(&next) / norm(&psi) - 1.0).abs() < 1e-9);
    }

    #[test]
    fn norm_is_monotone_with_the_sign_of_sin_theta(theta in 0.05..(PI - 0.05), grow in any::<bool>()) {
        let grid = Grid1D::dirichlet(48, 1.0).unwrap();
        let phi: ComplexField = box_ground_state(&RealField::zeros(grid), physics()).unwrap().state.into();
        let angle = if grow { theta + PI } else { theta };
        let setup = DeformedSetup::new(DeformAngle::constant(angle), ComplexField::zeros(grid), physics());
        let dt = 0.5 * physics().max_stable_dt(&grid);
        let mut psi = phi;
        let mut last = norm(&psi);
        for n in 0..15 {
            psi = step_deformed(&psi, &setup, n as f64 * dt, dt).unwrap();
            let now = norm(&psi);
            let monotone = if grow { now > last } else { now < last };
            prop_assert!(monotone, "step {} went from {} to {}", n, last, now);
            last = now;
        }
    }

    #[test]
    fn deformed_budgets_close_to_truncation(seed in 0u64..1_000, offset in -PI..PI, amp in 0.1..0.5f64) {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let grid = ring(128);
        let smooth = SmoothField::random(&grid, 3, &mut rng);
        let psi = smooth.sample(&grid);
        let angle = DeformAngle::Wave { offset, t_rate: 0.2, amplitude: amp, wavenumber: 1.0, frequency: 0.5 };
        let v = ComplexField::from_fn(grid, |x| Complex64::new(0.5 * x.cos(), 0.2 * x.sin()));
        let setup = DeformedSetup::new(angle, v, physics());
        let psi_t = deformed_rhs(&psi, &setup, 0.4).unwrap();
        let c = truncation_constant(&smooth, &grid).max(band_constant(&grid, 4));
        for rep in [
            continuity_deformed(&psi, &psi_t, &setup, 0.4).unwrap(),
            continuity_ansatz(&psi, &psi_t, &setup, 0.4).unwrap(),
        ] {
            prop_assert!(rep.max_residual() <= budget_bound(&rep, c));
        }
    }

    #[test]
    fn beta_has_the_real_potential_form(seed in 0u64..1_000, a in -2.0..2.0f64, theta0 in -PI..PI) {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let grid = ring(64);
        let psi = SmoothField::random(&grid, 3, &mut rng).sample(&grid);
        let v = RealField::from_fn(grid, |x| a * (2.0 * x).sin() + 0.3);
        let angle = DeformAngle::Wave { offset: theta0, t_rate: 0.0, amplitude: 0.4, wavenumber: 2.0, frequency: 0.0 };
        let setup = DeformedSetup::new(angle, v.clone().into(), physics());
        let rep = continuity_ansatz(&psi, &ComplexField::zeros(grid), &setup, 0.0).unwrap();
        let closed = beta_real_potential(&psi.density(), &v, &angle.sample(&grid, 0.0), 1.0).unwrap();
        let diff = rep.term("beta").unwrap().max_diff(&closed).unwrap();
        prop_assert!(diff <= 1e-13 * closed.max_norm_all().max(1.0));
    }

    #[test]
    fn complex_states_with_eta_j_conserve_probability(seed in 0u64..1_000) {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let grid = ring(128);
        let smooth = SmoothField::random(&grid, 3, &mut rng);
        let psi = smooth.sample(&grid).to_quat();
        let pot = QuatPotential::scalar(
            ComplexField::from_fn(grid, |x| Complex64::new(x.cos(), 0.0)),
            ComplexField::zeros(grid),
        ).unwrap();
        let eta = QuatField::from_fn(grid, |_| Quaternion::J);
        let gx = RealField::zeros(grid);
        let psi_t = quat_rhs(&psi, &pot, &eta, physics()).unwrap();
        let rep = continuity_q(&psi, &psi_t, &pot, &eta, &gx, physics()).unwrap();
        prop_assert!(rep.term("B").unwrap().max_norm_all() <= 1e-14);
        prop_assert!(rep.term("G").unwrap().max_norm_all() == 0.0);
        let c = truncation_constant(&smooth, &grid).max(band_constant(&grid, 3));
        prop_assert!(rep.max_residual() <= budget_bound(&rep, c));
        let dt = 0.5 * physics().max_stable_dt(&grid);
        let mut state = psi.clone();
        for _ in 0..20 {
            state = step_quaternionic(&state, &pot, &eta, physics(), dt).unwrap();
        }
        let drift = integrate(&probability_density(&state)) / integrate(&probability_density(&psi)) - 1.0;
        prop_assert!(drift.abs() < 1e-9, "drift {}", drift);
    }

    #[test]
    fn quaternionic_budget_terms_are_real(seed in 0u64..1_000, e in -2.0..2.0f64) {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let grid = ring(96);
        let psi = SmoothQuat::random(&grid, 3, &mut rng).sample(&grid);
        let pot = QuatPotential::new(
            RealField::from_fn(grid, |x| 0.3 * x.sin()),
            ComplexField::from_fn(grid, |x| Complex64::new(0.1, 0.2 * x.cos())),
            ComplexField::from_fn(grid, |x| Complex64::new(x.cos(), 0.1)),
            ComplexField::from_fn(grid, |_| Complex64::new(0.2, -0.3)),
        ).unwrap();
        let sched = SpaceLinear::new(e, [0.0, 1.0, 0.0], [0.0, 0.0, 1.0], 0.2, 0.9, 1.0).unwrap();
        let (eta, gx) = eta_field(&sched, &grid, 0.5);
        let psi_t = quat_rhs(&psi, &pot, &eta, physics()).unwrap();
        let rep = continuity_q(&psi, &psi_t, &pot, &eta, &gx, physics()).unwrap();
        for name in ["imag_P_t", "imag_J", "imag_B", "imag_G"] {
            prop_assert!(rep.term(name).unwrap().max_norm_all() <= 1e-12 * rep.scale());
        }
    }

    #[test]
    fn lambda_drops_out_of_the_density(seed in 0u64..1_000, t in -3.0..3.0f64) {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let grid = ring(64);
        let phi = SmoothQuat::random(&grid, 3, &mut rng).sample(&grid);
        let sched = SpaceLinear::new(1.3, [1.0, 0.0, 0.0], [0.0, 1.0, 0.0], 0.4, -0.2, 1.0).unwrap();
        let psi = phi.mul_right(&lambda_field(&sched, &grid, t)).unwrap();
        let diff = probability_density(&psi).max_diff(&probability_density(&phi)).unwrap();
        prop_assert!(diff <= 1e-13 * probability_density(&phi).max_norm_all());
    }

    #[test]
    fn curvature_shift_closes_the_full_equation(
        ky in -1.5..1.5f64, kz in -1.5..1.5f64, s in -1.0..1.0f64, t in 0.0..2.0f64,
    ) {
        let grid = Grid1D::dirichlet(64, 1.0).unwrap();
        let gs = box_ground_state(&RealField::zeros(grid), physics()).unwrap();
        let phi = gs.state.map(Quaternion::real);
        let (k, g) = ([0.0, ky, kz], [0.0, -s * kz, s * ky]);
        let kappa = eigen_reduction_check(&SpaceLinear::new(0.0, k, g, 0.0, 0.0, 1.0).unwrap(), [0.0; 3], 0.0).constant;
        let sched = SpaceLinear::new(-(gs.energy + physics().kinetic() * kappa), k, g, 0.1, 0.7, 1.0).unwrap();
        let r = full_pde_residual(&phi, &sched, &ComplexField::zeros(grid), physics(), t).unwrap();
        prop_assert!(r <= 1e-8 * (gs.energy + kappa));
    }
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(6))]

    #[test]
    fn stationary_states_recur_after_one_period(g0 in -PI..PI, o0 in -PI..PI) {
        let grid = Grid1D::dirichlet(32, 1.0).unwrap();
        let gs = box_ground_state(&RealField::zeros(grid), physics()).unwrap();
        let phi = gs.state.map(Quaternion::real);
        let sched = ConstantPhases::new(-gs.energy, g0, o0, 1.0);
        let (eta, _) = eta_field(&sched, &grid, 0.0);
        let period = stationary_period(gs.energy, 1.0);
        let steps = (period / physics().max_stable_dt(&grid)).ceil() as usize;
        let dt = period / steps as f64;
        let start = phi.mul_right(&lambda_field(&sched, &grid, 0.0)).unwrap();
        let pot = QuatPotential::zero(grid);
        let mut psi = start.clone();
        for _ in 0..steps {
            psi = step_quaternionic(&psi, &pot, &eta, physics(), dt).unwrap();
        }
        prop_assert!(psi.max_diff(&start).unwrap() <= 1e-8);
    }
}
