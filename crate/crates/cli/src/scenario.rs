//! The four run modes. Each returns the rows or report it produced plus a
//! one-line summary; writing files is left to the caller.

use anyhow::{Context, Result};
use genunit_core::audit::{audit_all, AuditReport};
use genunit_core::deformed::{continuity_ansatz, continuity_deformed, deformed_rhs, step_deformed, DeformedSetup};
use genunit_core::eigen::{box_ground_state, grid_eigenstates};
use genunit_core::grid::{integrate, norm};
use genunit_core::qdyn::{
    apply_hamiltonian_q, continuity_q, eta_field, full_pde_residual, lambda_field, quat_rhs, step_quaternionic,
    QuatPotential,
};
use genunit_core::schedule::{eigen_reduction_check, stationary_period, SpaceLinear};
use genunit_core::smooth::{SmoothField, SmoothQuat};
use genunit_core::{ComplexField, Grid1D, Physics, QuatField, Quaternion, RealField, ScheduleFamily};
use num_complex::Complex64;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

use crate::config::{EndTime, Initial, PotentialSpec, ScenarioConfig};

/// A time series or table: column names and rows of numbers.
pub struct Table {
    pub columns: &'static [&'static str],
    pub rows: Vec<Vec<f64>>,
    /// Derived quantities worth recording in the header (effective dt, energies).
    pub notes: Vec<String>,
}

pub const COMPLEX_COLUMNS: &[&str] = &[
    "t",
    "norm",
    "ln_norm_rate",
    "residual_cc16",
    "residual_cc04",
    "beta_integral",
    "gamma_integral",
    "kappa_integral",
    "lambda_integral",
];

pub const QUAT_COLUMNS: &[&str] =
    &["t", "norm", "residual_gi05", "residual_gi08", "B_integral", "G_integral", "lambda_period_error"];

pub const EIGEN_COLUMNS: &[&str] =
    &["level", "energy", "kappa", "shifted_energy", "reduction_residual", "full_pde_residual", "unshifted_residual"];

fn term(rep: &genunit_core::ContinuityReport, name: &str) -> Result<f64> {
    Ok(integrate(rep.term(name).with_context(|| format!("budget has no `{name}` term"))?))
}

/// Splits `[0, t_end]` into whole steps no longer than `dt`.
fn steps_for(t_end: f64, dt: f64) -> (usize, f64) {
    let steps = ((t_end / dt) * (1.0 - 1e-12)).ceil().max(1.0) as usize;
    (steps, t_end / steps as f64)
}

fn is_output(n: usize, stride: usize, steps: usize) -> bool {
    n.is_multiple_of(stride) || n == steps
}

fn real_v(cfg: &ScenarioConfig, grid: Grid1D) -> RealField {
    PotentialSpec::real(cfg.potential.v.as_ref(), grid)
}

fn initial_profile(cfg: &ScenarioConfig, initial: Initial, grid: Grid1D) -> Result<(ComplexField, Option<f64>)> {
    Ok(match initial {
        Initial::GroundState | Initial::Stationary => {
            let gs = box_ground_state(&real_v(cfg, grid), cfg.physics())?;
            (gs.state.into(), Some(gs.energy))
        }
        Initial::Gaussian { centre, width, wavenumber } => {
            let f = ComplexField::from_fn(grid, |x| {
                Complex64::from_polar((-((x - centre) / width).powi(2)).exp(), wavenumber * x)
            });
            let mut f = f.scaled(1.0 / norm(&f));
            f.enforce_boundary();
            (f, None)
        }
        Initial::Smooth { modes } => {
            let mut rng = ChaCha8Rng::seed_from_u64(cfg.seed);
            let f = SmoothField::random(&grid, modes.max(1), &mut rng).sample(&grid);
            (f.scaled(1.0 / norm(&f)), None)
        }
    })
}

pub fn evolve_complex(cfg: &ScenarioConfig) -> Result<(Table, String)> {
    let grid = cfg.grid()?;
    let spec = cfg.complex.context("complex table")?;
    let run = cfg.run.context("run table")?;
    let EndTime::At(t_end) = run.t_end else { anyhow::bail!("run.t_end must be a number for evolve-complex") };
    let physics = cfg.physics();
    let v = PotentialSpec::complex(cfg.potential.v.as_ref(), cfg.potential.v_imag.as_ref(), grid);
    let setup = DeformedSetup::new(spec.theta, v, physics);
    let (mut psi, energy) = initial_profile(cfg, spec.initial, grid)?;
    let (steps, dt) = steps_for(t_end, run.dt);

    let mut rows = Vec::new();
    for n in 0..=steps {
        let t = n as f64 * dt;
        if is_output(n, run.output_stride, steps) {
            let psi_t = deformed_rhs(&psi, &setup, t)?;
            let deformed = continuity_deformed(&psi, &psi_t, &setup, t)?;
            let ansatz = continuity_ansatz(&psi, &psi_t, &setup, t)?;
            let rho = integrate(&psi.density());
            rows.push(vec![
                t,
                rho.sqrt(),
                term(&deformed, "rho_t")? / (2.0 * rho),
                deformed.max_residual(),
                ansatz.max_residual(),
                term(&ansatz, "beta")?,
                term(&ansatz, "gamma")?,
                term(&deformed, "kappa")?,
                term(&deformed, "lambda")?,
            ]);
        }
        if n < steps {
            psi = step_deformed(&psi, &setup, t, dt)?;
        }
    }
    let last = rows.last().expect("at least the initial row");
    let summary = format!(
        "evolve-complex: {} steps of dt = {dt:e} to t = {t_end}, final norm {:.12}, {} rows",
        steps,
        last[1],
        rows.len()
    );
    let mut notes = vec![format!("effective dt = {dt:e}, steps = {steps}")];
    if let Some(e) = energy {
        notes.push(format!("initial state energy = {e:e}"));
    }
    Ok((Table { columns: COMPLEX_COLUMNS, rows, notes }, summary))
}

pub fn evolve_quat(cfg: &ScenarioConfig) -> Result<(Table, String)> {
    let grid = cfg.grid()?;
    let spec = cfg.quat.context("quat table")?;
    let run = cfg.run.context("run table")?;
    let physics = cfg.physics();
    let pot = QuatPotential::new(
        PotentialSpec::real(cfg.potential.alpha.as_ref(), grid),
        PotentialSpec::complex(cfg.potential.beta.as_ref(), cfg.potential.beta_imag.as_ref(), grid),
        PotentialSpec::complex(cfg.potential.v.as_ref(), cfg.potential.v_imag.as_ref(), grid),
        PotentialSpec::complex(cfg.potential.w.as_ref(), cfg.potential.w_imag.as_ref(), grid),
    )?;
    let (profile, energy) = match spec.initial {
        Initial::Smooth { modes } => {
            let mut rng = ChaCha8Rng::seed_from_u64(cfg.seed);
            let s = SmoothQuat::random(&grid, modes.max(1), &mut rng).sample(&grid);
            let nrm = norm(&s);
            (s.map(|q| q.scale(1.0 / nrm)), None)
        }
        other => {
            let (f, e) = initial_profile(cfg, other, grid)?;
            (f.to_quat(), e)
        }
    };
    let mut family = spec.schedule;
    let mut notes = Vec::new();
    if spec.initial == Initial::Stationary {
        let e = energy.context("stationary state energy")?;
        // ĤΦ = εΦ pairs with Θ̇ = −ε/ħ
        if let ScheduleFamily::ConstantPhases { energy, .. } = &mut family {
            *energy = -e;
        }
        notes.push(format!("stationary: ground energy = {e:e}, schedule energy set to {:e}", -e));
    }
    let schedule = family.build(physics.hbar)?;
    let t_end = match run.t_end {
        EndTime::At(t) => t,
        EndTime::Named(_) => stationary_period(energy.context("period needs a stationary state")?, physics.hbar),
    };
    let (steps, dt) = steps_for(t_end, run.dt);
    notes.insert(0, format!("effective t_end = {t_end:e}, dt = {dt:e}, steps = {steps}"));

    // the profile Φ with Ψ₀ = Φ·Λ(x, 0)
    let lambda0 = lambda_field(schedule.as_ref(), &grid, 0.0);
    let phi = profile.clone();
    let mut psi = phi.mul_right(&lambda0)?;

    let mut rows = Vec::new();
    for n in 0..=steps {
        let t = n as f64 * dt;
        if is_output(n, run.output_stride, steps) {
            let (eta, gx) = eta_field(schedule.as_ref(), &grid, t);
            let psi_t = quat_rhs(&psi, &pot, &eta, physics)?;
            let rep = continuity_q(&psi, &psi_t, &pot, &eta, &gx, physics)?;
            let fwd = step_quaternionic(&psi, &pot, &eta, physics, dt)?;
            let bwd = step_quaternionic(&psi, &pot, &eta, physics, -dt)?;
            let stepped_rate = fwd.axpy(-1.0, &bwd)?.scaled(0.5 / dt);
            let h_psi = apply_hamiltonian_q(&psi, &pot, physics)?;
            let evolution = stepped_rate.zip_with(&eta, |r, e| (r * e).scale(physics.hbar))?.max_diff(&h_psi)?;
            let closed = phi.mul_right(&lambda_field(schedule.as_ref(), &grid, t))?;
            rows.push(vec![
                t,
                integrate(&psi.density()).sqrt(),
                evolution,
                rep.max_residual(),
                term(&rep, "B")?,
                term(&rep, "G")?,
                psi.max_diff(&closed)?,
            ]);
        }
        if n < steps {
            // η is frozen at the step midpoint
            let (eta, _) = eta_field(schedule.as_ref(), &grid, t + 0.5 * dt);
            psi = step_quaternionic(&psi, &pot, &eta, physics, dt)?;
        }
    }
    let last = rows.last().expect("at least the initial row");
    let summary = format!(
        "evolve-quat: {steps} steps of dt = {dt:e} to t = {t_end:e}, final norm {:.12}, deviation from Φ·Λ(t) {:e}",
        last[1], last[6]
    );
    Ok((Table { columns: QUAT_COLUMNS, rows, notes }, summary))
}

pub fn eigen_reduce(cfg: &ScenarioConfig) -> Result<(Table, String)> {
    let grid = cfg.grid()?;
    let spec = cfg.eigen.clone().context("eigen table")?;
    let physics: Physics = cfg.physics();
    let v = real_v(cfg, grid);
    let vc: ComplexField = v.clone().into();
    let probe = SpaceLinear::new(0.0, spec.k, spec.g, spec.gamma0, spec.omega0, physics.hbar)?;
    let kappa = eigen_reduction_check(&probe, [0.0; 3], 0.0).constant;
    let mut rows = Vec::new();
    for (level, state) in grid_eigenstates(&v, physics, spec.levels)?.into_iter().enumerate() {
        let phi: QuatField = state.state.map(Quaternion::real);
        let shifted = state.energy + physics.kinetic() * kappa;
        let sched = SpaceLinear::new(-shifted, spec.k, spec.g, spec.gamma0, spec.omega0, physics.hbar)?;
        let plain = SpaceLinear::new(-state.energy, spec.k, spec.g, spec.gamma0, spec.omega0, physics.hbar)?;
        let (mut full, mut unshifted, mut reduction) = (0.0_f64, 0.0_f64, 0.0_f64);
        for &t in &spec.times {
            full = full.max(full_pde_residual(&phi, &sched, &vc, physics, t)?);
            unshifted = unshifted.max(full_pde_residual(&phi, &plain, &vc, physics, t)?);
            for k in 0..grid.n() {
                reduction = reduction.max(eigen_reduction_check(&sched, [grid.x(k), 0.0, 0.0], t).residual);
            }
        }
        rows.push(vec![level as f64, state.energy, kappa, shifted, reduction, full, unshifted]);
    }
    let summary = format!(
        "eigen-reduce: 𝒦 = {kappa}, {} level(s), worst shifted residual {:e}",
        rows.len(),
        rows.iter().map(|r| r[5]).fold(0.0, f64::max)
    );
    Ok((Table { columns: EIGEN_COLUMNS, rows, notes: Vec::new() }, summary))
}

pub fn audit(cfg: &ScenarioConfig) -> Result<(AuditReport, String)> {
    let config = cfg.audit.clone().unwrap_or_default();
    let report = audit_all(cfg.seed, &config)?;
    let s = &report.summary;
    let summary = format!(
        "audit: {} identities, {} passed, {} failed, {} documented discrepancies (seed {})",
        s.total, s.passed, s.failed, s.discrepancies, cfg.seed
    );
    Ok((report, summary))
}
