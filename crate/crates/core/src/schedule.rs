//! Angle schedules `(Θ, Γ, Ω)(x, t)` for the unit quaternion
//! `Λ = cosΘ·e^{iΓ} + sinΘ·e^{iΩ}·j`, with analytic derivatives.
//!
//! Finite differences appear here only in the `*_identity` checks, where they
//! are the independent side of the comparison.

use std::f64::consts::{FRAC_PI_2, PI};

use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::quat::{eta_unchecked, lambda_unchecked, Quaternion};

pub type Vec3 = [f64; 3];

/// Guard band around the poles of `secΘ·cscΘ`.
pub const SINGULAR_GUARD: f64 = 1e-9;
/// Fixed-step quadrature resolution: steps per period `2πħ/E`.
pub const STEPS_PER_PERIOD: usize = 2000;
/// Steps used when an F-driven schedule is evaluated at an arbitrary time.
pub const DEFAULT_QUADRATURE_STEPS: usize = 4096;

pub fn dot(a: Vec3, b: Vec3) -> f64 {
    a[0] * b[0] + a[1] * b[1] + a[2] * b[2]
}

fn norm_sqr(a: Vec3) -> f64 {
    dot(a, a)
}

#[derive(Clone, Copy, Debug, Default, PartialEq, Serialize, Deserialize)]
pub struct Angles {
    pub theta: f64,
    pub gamma: f64,
    pub omega: f64,
}

impl Angles {
    pub const ZERO: Self = Self { theta: 0.0, gamma: 0.0, omega: 0.0 };

    pub fn new(theta: f64, gamma: f64, omega: f64) -> Self {
        Self { theta, gamma, omega }
    }

    /// Phase of the quaternionic unit, `Ξ = Ω − Γ`.
    pub fn xi(&self) -> f64 {
        self.omega - self.gamma
    }

    pub fn lambda(&self) -> Quaternion {
        lambda_unchecked(self.theta, self.gamma, self.omega)
    }

    pub fn eta(&self) -> Quaternion {
        eta_unchecked(self.xi())
    }
}

#[derive(Clone, Copy, Debug, Default, PartialEq)]
pub struct AngleGradients {
    pub theta: Vec3,
    pub gamma: Vec3,
    pub omega: Vec3,
}

impl AngleGradients {
    /// Components along one axis as an `Angles` triple.
    pub fn along(&self, axis: usize) -> Angles {
        Angles::new(self.theta[axis], self.gamma[axis], self.omega[axis])
    }

    pub fn xi(&self) -> Vec3 {
        [0, 1, 2].map(|a| self.omega[a] - self.gamma[a])
    }
}

/// A differentiable angle triple over space and time.
pub trait AngleSchedule: Send + Sync {
    fn angles(&self, x: Vec3, t: f64) -> Angles;
    /// `∂/∂t` of each angle.
    fn rates(&self, x: Vec3, t: f64) -> Angles;
    fn gradients(&self, x: Vec3, t: f64) -> AngleGradients;
    fn laplacians(&self, x: Vec3, t: f64) -> Angles;

    fn lambda(&self, x: Vec3, t: f64) -> Quaternion {
        self.angles(x, t).lambda()
    }

    fn eta(&self, x: Vec3, t: f64) -> Quaternion {
        self.angles(x, t).eta()
    }

    /// `∂Ξ/∂x` along `axis`.
    fn xi_gradient(&self, x: Vec3, t: f64, axis: usize) -> f64 {
        self.gradients(x, t).xi()[axis]
    }

    /// `∂Λ/∂t` by the chain rule.
    fn lambda_dot(&self, x: Vec3, t: f64) -> Quaternion {
        lambda_chain_rule(self.angles(x, t), self.rates(x, t))
    }
}

/// Directional derivative of Λ for angle derivatives `d`, by the chain rule.
pub fn lambda_chain_rule(a: Angles, d: Angles) -> Quaternion {
    let (s, c) = a.theta.sin_cos();
    let eg = Complex64::from_polar(1.0, a.gamma);
    let eo = Complex64::from_polar(1.0, a.omega);
    let i = Complex64::i();
    let da = eg * (-s * d.theta) + i * eg * (c * d.gamma);
    let db = eo * (c * d.theta) + i * eo * (s * d.omega);
    Quaternion::compose(da, db)
}

/// Closed form `Θ'Λη + i(Ω' sinΘ e^{iΓ} − Γ' cosΘ e^{iΩ} j)η` for any single
/// derivative `'` of the angles.
pub fn lambda_derivative_closed_form(a: Angles, d: Angles) -> Quaternion {
    let lambda = a.lambda();
    let eta = a.eta();
    let (s, c) = a.theta.sin_cos();
    let inner =
        Quaternion::compose(Complex64::from_polar(d.omega * s, a.gamma), Complex64::from_polar(-d.gamma * c, a.omega));
    (lambda * eta).scale(d.theta) + Quaternion::I * inner * eta
}

/// `|central difference of Λ in t − closed form|`.
pub fn lambda_dot_identity(s: &dyn AngleSchedule, x: Vec3, t: f64, h: f64) -> Result<f64> {
    if !(h > 0.0) {
        return Err(Error::Domain(format!("finite-difference step must be positive, got {h}")));
    }
    let fd = (s.lambda(x, t + h) - s.lambda(x, t - h)).scale(0.5 / h);
    let closed = lambda_derivative_closed_form(s.angles(x, t), s.rates(x, t));
    Ok((fd - closed).norm())
}

/// Same identity with a spatial coordinate in place of time.
pub fn lambda_space_identity(s: &dyn AngleSchedule, x: Vec3, t: f64, axis: usize, h: f64) -> Result<f64> {
    if !(h > 0.0) {
        return Err(Error::Domain(format!("finite-difference step must be positive, got {h}")));
    }
    let mut xp = x;
    let mut xm = x;
    xp[axis] += h;
    xm[axis] -= h;
    let fd = (s.lambda(xp, t) - s.lambda(xm, t)).scale(0.5 / h);
    let closed = lambda_derivative_closed_form(s.angles(x, t), s.gradients(x, t).along(axis));
    Ok((fd - closed).norm())
}

/// `Λ̇·η·Λ̄` from quaternion products of the analytic derivatives.
pub fn lambda_eta_conj(s: &dyn AngleSchedule, x: Vec3, t: f64) -> Quaternion {
    let a = s.angles(x, t);
    lambda_eta_conj_at(a, s.rates(x, t))
}

pub fn lambda_eta_conj_at(a: Angles, rates: Angles) -> Quaternion {
    lambda_chain_rule(a, rates) * a.eta() * a.lambda().conj()
}

/// `−Θ̇ + i[(Γ̇−Ω̇) sinΘ cosΘ + (Γ̇ cos²Θ + Ω̇ sin²Θ) e^{i(Γ+Ω)} j]`.
pub fn lambda_eta_conj_closed_form(a: Angles, r: Angles) -> Quaternion {
    let (s, c) = a.theta.sin_cos();
    let i_part = (r.gamma - r.omega) * s * c;
    let j_amp = r.gamma * c * c + r.omega * s * s;
    let b = Complex64::i() * Complex64::from_polar(j_amp, a.gamma + a.omega);
    Quaternion::compose(Complex64::new(-r.theta, i_part), b)
}

/// `Λ(t) = cos(Et/ħ)e^{iΓ₀} + sin(Et/ħ)e^{iΩ₀}j`.
pub fn stationary_lambda(energy: f64, gamma0: f64, omega0: f64, t: f64, hbar: f64) -> Quaternion {
    lambda_unchecked(energy * t / hbar, gamma0, omega0)
}

/// Period `2πħ/|E|` of the stationary schedule.
pub fn stationary_period(energy: f64, hbar: f64) -> f64 {
    2.0 * PI * hbar / energy.abs()
}

/// `∇Λ = P e^{iΓ} + Q e^{iΩ} j`.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct LambdaGradient {
    pub p: [Complex64; 3],
    pub q: [Complex64; 3],
}

impl LambdaGradient {
    pub fn assemble(&self, a: Angles) -> [Quaternion; 3] {
        let eg = Complex64::from_polar(1.0, a.gamma);
        let eo = Complex64::from_polar(1.0, a.omega);
        [0, 1, 2].map(|k| Quaternion::compose(self.p[k] * eg, self.q[k] * eo))
    }
}

pub fn lambda_gradient(s: &dyn AngleSchedule, x: Vec3, t: f64) -> LambdaGradient {
    let a = s.angles(x, t);
    let g = s.gradients(x, t);
    let (sn, cs) = a.theta.sin_cos();
    let p = [0, 1, 2].map(|k| Complex64::new(-sn * g.theta[k], cs * g.gamma[k]));
    let q = [0, 1, 2].map(|k| Complex64::new(cs * g.theta[k], sn * g.omega[k]));
    LambdaGradient { p, q }
}

/// `∇²Λ = ℳ e^{iΓ} + 𝒩 e^{iΩ} j`.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct LambdaLaplacian {
    pub m: Complex64,
    pub n: Complex64,
}

impl LambdaLaplacian {
    pub fn assemble(&self, a: Angles) -> Quaternion {
        Quaternion::compose(self.m * Complex64::from_polar(1.0, a.gamma), self.n * Complex64::from_polar(1.0, a.omega))
    }
}

pub fn lambda_laplacian(s: &dyn AngleSchedule, x: Vec3, t: f64) -> LambdaLaplacian {
    let a = s.angles(x, t);
    let g = s.gradients(x, t);
    let l = s.laplacians(x, t);
    let (sn, cs) = a.theta.sin_cos();
    let tt = norm_sqr(g.theta);
    let m =
        Complex64::new(-(tt + norm_sqr(g.gamma)) * cs - sn * l.theta, cs * l.gamma - 2.0 * sn * dot(g.theta, g.gamma));
    let n =
        Complex64::new(-(tt + norm_sqr(g.omega)) * sn + cs * l.theta, sn * l.omega + 2.0 * cs * dot(g.theta, g.omega));
    LambdaLaplacian { m, n }
}

// ---------------------------------------------------------------------------
// Schedule families

/// `Θ = Et/ħ`, constant phases.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct ConstantPhases {
    pub theta_rate: f64,
    pub gamma0: f64,
    pub omega0: f64,
}

impl ConstantPhases {
    pub fn new(energy: f64, gamma0: f64, omega0: f64, hbar: f64) -> Self {
        Self { theta_rate: energy / hbar, gamma0, omega0 }
    }
}

impl AngleSchedule for ConstantPhases {
    fn angles(&self, _x: Vec3, t: f64) -> Angles {
        Angles::new(self.theta_rate * t, self.gamma0, self.omega0)
    }
    fn rates(&self, _x: Vec3, _t: f64) -> Angles {
        Angles::new(self.theta_rate, 0.0, 0.0)
    }
    fn gradients(&self, _x: Vec3, _t: f64) -> AngleGradients {
        AngleGradients::default()
    }
    fn laplacians(&self, _x: Vec3, _t: f64) -> Angles {
        Angles::ZERO
    }
}

/// `Θ = Et/ħ + k·x`, `Γ = Γ₀ + g·x`, `Ω = Ω₀ + g·x` with `k·g = 0`.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct SpaceLinear {
    pub theta_rate: f64,
    pub k: Vec3,
    pub g: Vec3,
    pub gamma0: f64,
    pub omega0: f64,
}

impl SpaceLinear {
    pub fn new(energy: f64, k: Vec3, g: Vec3, gamma0: f64, omega0: f64, hbar: f64) -> Result<Self> {
        let kg = dot(k, g);
        let scale = norm_sqr(k).sqrt() * norm_sqr(g).sqrt();
        if kg.abs() > 1e-12 * scale.max(1.0) {
            return Err(Error::Precondition(format!("space-linear schedule needs k·g = 0, got {kg}")));
        }
        Ok(Self { theta_rate: energy / hbar, k, g, gamma0, omega0 })
    }
}

impl AngleSchedule for SpaceLinear {
    fn angles(&self, x: Vec3, t: f64) -> Angles {
        let gx = dot(self.g, x);
        Angles::new(self.theta_rate * t + dot(self.k, x), self.gamma0 + gx, self.omega0 + gx)
    }
    fn rates(&self, _x: Vec3, _t: f64) -> Angles {
        Angles::new(self.theta_rate, 0.0, 0.0)
    }
    fn gradients(&self, _x: Vec3, _t: f64) -> AngleGradients {
        AngleGradients { theta: self.k, gamma: self.g, omega: self.g }
    }
    fn laplacians(&self, _x: Vec3, _t: f64) -> Angles {
        Angles::ZERO
    }
}

/// Phase forcing `F(t)` for the F-driven family.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
#[serde(tag = "form", rename_all = "kebab-case")]
pub enum Forcing {
    Constant {
        value: f64,
    },
    Linear {
        value: f64,
        slope: f64,
    },
    Sine {
        amplitude: f64,
        frequency: f64,
    },
    /// `c·secΘ·cscΘ`, singular wherever Θ is a multiple of π/2.
    SecCsc {
        c: f64,
    },
}

impl Forcing {
    pub fn value(&self, t: f64, theta: f64) -> f64 {
        match *self {
            Forcing::Constant { value } => value,
            Forcing::Linear { value, slope } => value + slope * t,
            Forcing::Sine { amplitude, frequency } => amplitude * (frequency * t).sin(),
            Forcing::SecCsc { c } => c / (theta.sin() * theta.cos()),
        }
    }

    pub fn is_singular(&self) -> bool {
        matches!(self, Forcing::SecCsc { .. })
    }
}

/// `Θ = Et/ħ`, `Γ̇ = F sin²Θ`, `Ω̇ = −F cos²Θ` from phases given at `t_init`.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct FDriven {
    pub theta_rate: f64,
    pub forcing: Forcing,
    pub t_init: f64,
    pub gamma_init: f64,
    pub omega_init: f64,
    pub steps: usize,
}

impl FDriven {
    pub fn new(energy: f64, forcing: Forcing, t_init: f64, gamma_init: f64, omega_init: f64, hbar: f64) -> Self {
        Self { theta_rate: energy / hbar, forcing, t_init, gamma_init, omega_init, steps: DEFAULT_QUADRATURE_STEPS }
    }

    fn phase_rates(&self, t: f64) -> (f64, f64) {
        let theta = self.theta_rate * t;
        let f = self.forcing.value(t, theta);
        let (s, c) = theta.sin_cos();
        (f * s * s, -f * c * c)
    }

    /// Fixed-step fourth-order integration of the phase rates over `[t0, t1]`.
    fn advance(&self, t0: f64, t1: f64, steps: usize, state: (f64, f64)) -> (f64, f64) {
        let h = (t1 - t0) / steps as f64;
        let (mut g, mut o) = state;
        for n in 0..steps {
            let t = t0 + n as f64 * h;
            let k1 = self.phase_rates(t);
            let k2 = self.phase_rates(t + 0.5 * h);
            let k4 = self.phase_rates(t + h);
            // the rates do not depend on the phases, so k3 = k2
            g += h / 6.0 * (k1.0 + 4.0 * k2.0 + k4.0);
            o += h / 6.0 * (k1.1 + 4.0 * k2.1 + k4.1);
        }
        (g, o)
    }

    fn theta_crossing(&self, t0: f64, t1: f64) -> Option<(f64, f64)> {
        if !self.forcing.is_singular() {
            return None;
        }
        let (a, b) = (self.theta_rate * t0, self.theta_rate * t1);
        let (lo, hi) = (a.min(b) - SINGULAR_GUARD, a.max(b) + SINGULAR_GUARD);
        let pole = (lo / FRAC_PI_2).ceil() * FRAC_PI_2;
        (pole <= hi).then(|| {
            let t = if self.theta_rate != 0.0 { pole / self.theta_rate } else { t0 };
            (pole, t)
        })
    }
}

impl AngleSchedule for FDriven {
    fn angles(&self, _x: Vec3, t: f64) -> Angles {
        let (g, o) = self.advance(self.t_init, t, self.steps, (self.gamma_init, self.omega_init));
        Angles::new(self.theta_rate * t, g, o)
    }
    fn rates(&self, _x: Vec3, t: f64) -> Angles {
        let (g, o) = self.phase_rates(t);
        Angles::new(self.theta_rate, g, o)
    }
    fn gradients(&self, _x: Vec3, _t: f64) -> AngleGradients {
        AngleGradients::default()
    }
    fn laplacians(&self, _x: Vec3, _t: f64) -> Angles {
        Angles::ZERO
    }
}

/// Integrates `(Γ, Ω)` of an F-driven schedule onto `t_grid`, starting from
/// the initial phases at `fam.t_init`.
pub fn integrate_fdriven(fam: &FDriven, t_grid: &[f64]) -> Result<Vec<(f64, f64)>> {
    if t_grid.is_empty() {
        return Ok(Vec::new());
    }
    if t_grid.windows(2).any(|w| !(w[1] > w[0])) {
        return Err(Error::Domain("time grid must be strictly increasing".into()));
    }
    let (first, last) = (t_grid[0].min(fam.t_init), t_grid[t_grid.len() - 1].max(fam.t_init));
    if let Some((theta, t)) = fam.theta_crossing(first, last) {
        return Err(Error::Singularity { theta, t });
    }
    let max_step = if fam.theta_rate != 0.0 {
        stationary_period(fam.theta_rate, 1.0) / STEPS_PER_PERIOD as f64
    } else {
        (last - first).max(1e-12) / STEPS_PER_PERIOD as f64
    };
    let substeps = |a: f64, b: f64| (((b - a).abs() / max_step).ceil() as usize).max(1);

    let mut state = (fam.gamma_init, fam.omega_init);
    let mut t = fam.t_init;
    let mut out = Vec::with_capacity(t_grid.len());
    for &next in t_grid {
        state = fam.advance(t, next, substeps(t, next), state);
        t = next;
        out.push(state);
    }
    Ok(out)
}

/// One angle as `c₀ + ċ·t + a·x + A·sin(ωt + q·x + φ)`. Omitted fields are zero.
#[derive(Clone, Copy, Debug, Default, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct AngleWave {
    pub offset: f64,
    pub rate: f64,
    pub slope: Vec3,
    pub amplitude: f64,
    pub frequency: f64,
    pub wavevector: Vec3,
    pub phase: f64,
}

impl AngleWave {
    pub fn constant(offset: f64) -> Self {
        Self { offset, ..Self::default() }
    }

    pub fn linear_in_time(offset: f64, rate: f64) -> Self {
        Self { offset, rate, ..Self::default() }
    }

    fn arg(&self, x: Vec3, t: f64) -> f64 {
        self.frequency * t + dot(self.wavevector, x) + self.phase
    }

    pub fn value(&self, x: Vec3, t: f64) -> f64 {
        self.offset + self.rate * t + dot(self.slope, x) + self.amplitude * self.arg(x, t).sin()
    }

    pub fn rate_at(&self, x: Vec3, t: f64) -> f64 {
        self.rate + self.amplitude * self.frequency * self.arg(x, t).cos()
    }

    pub fn gradient(&self, x: Vec3, t: f64) -> Vec3 {
        let c = self.amplitude * self.arg(x, t).cos();
        [0, 1, 2].map(|k| self.slope[k] + c * self.wavevector[k])
    }

    pub fn laplacian(&self, x: Vec3, t: f64) -> f64 {
        -self.amplitude * norm_sqr(self.wavevector) * self.arg(x, t).sin()
    }
}

/// General smooth schedule built from three [`AngleWave`]s.
#[derive(Clone, Copy, Debug, Default, PartialEq, Serialize, Deserialize)]
pub struct WaveSchedule {
    pub theta: AngleWave,
    pub gamma: AngleWave,
    pub omega: AngleWave,
}

impl AngleSchedule for WaveSchedule {
    fn angles(&self, x: Vec3, t: f64) -> Angles {
        Angles::new(self.theta.value(x, t), self.gamma.value(x, t), self.omega.value(x, t))
    }
    fn rates(&self, x: Vec3, t: f64) -> Angles {
        Angles::new(self.theta.rate_at(x, t), self.gamma.rate_at(x, t), self.omega.rate_at(x, t))
    }
    fn gradients(&self, x: Vec3, t: f64) -> AngleGradients {
        AngleGradients {
            theta: self.theta.gradient(x, t),
            gamma: self.gamma.gradient(x, t),
            omega: self.omega.gradient(x, t),
        }
    }
    fn laplacians(&self, x: Vec3, t: f64) -> Angles {
        Angles::new(self.theta.laplacian(x, t), self.gamma.laplacian(x, t), self.omega.laplacian(x, t))
    }
}

/// Configuration-level description of the built-in families.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
#[serde(tag = "family", rename_all = "kebab-case")]
pub enum ScheduleFamily {
    ConstantPhases {
        energy: f64,
        #[serde(default)]
        gamma0: f64,
        #[serde(default)]
        omega0: f64,
    },
    FDriven {
        energy: f64,
        forcing: Forcing,
        #[serde(default)]
        t_init: f64,
        #[serde(default)]
        gamma_init: f64,
        #[serde(default)]
        omega_init: f64,
    },
    SingularF {
        energy: f64,
        c: f64,
        t_init: f64,
        #[serde(default)]
        gamma_init: f64,
        #[serde(default)]
        omega_init: f64,
    },
    SpaceLinear {
        energy: f64,
        k: Vec3,
        g: Vec3,
        #[serde(default)]
        gamma0: f64,
        #[serde(default)]
        omega0: f64,
    },
    /// Free-form angles; the only family whose Ξ can vary in space.
    Wave {
        #[serde(default)]
        theta: AngleWave,
        #[serde(default)]
        gamma: AngleWave,
        #[serde(default)]
        omega: AngleWave,
    },
}

impl ScheduleFamily {
    /// The `E` in `Θ = Et/ħ`; the wave family has no single energy.
    pub fn energy(&self) -> Option<f64> {
        match *self {
            ScheduleFamily::ConstantPhases { energy, .. }
            | ScheduleFamily::FDriven { energy, .. }
            | ScheduleFamily::SingularF { energy, .. }
            | ScheduleFamily::SpaceLinear { energy, .. } => Some(energy),
            ScheduleFamily::Wave { .. } => None,
        }
    }

    pub fn build(&self, hbar: f64) -> Result<Box<dyn AngleSchedule>> {
        Ok(match *self {
            ScheduleFamily::ConstantPhases { energy, gamma0, omega0 } => {
                Box::new(ConstantPhases::new(energy, gamma0, omega0, hbar))
            }
            ScheduleFamily::FDriven { energy, forcing, t_init, gamma_init, omega_init } => {
                Box::new(FDriven::new(energy, forcing, t_init, gamma_init, omega_init, hbar))
            }
            ScheduleFamily::SingularF { energy, c, t_init, gamma_init, omega_init } => {
                Box::new(FDriven::new(energy, Forcing::SecCsc { c }, t_init, gamma_init, omega_init, hbar))
            }
            ScheduleFamily::SpaceLinear { energy, k, g, gamma0, omega0 } => {
                Box::new(SpaceLinear::new(energy, k, g, gamma0, omega0, hbar)?)
            }
            ScheduleFamily::Wave { theta, gamma, omega } => Box::new(WaveSchedule { theta, gamma, omega }),
        })
    }
}

/// Outcome of reducing `∇²Λ = −𝒦Λ`.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct EigenReduction {
    /// `𝒦 = |∇Θ|² + |∇Γ|²`.
    pub constant: f64,
    /// `|∇²Λ + 𝒦Λ|` with the analytic Laplacian.
    pub residual: f64,
}

pub fn eigen_reduction_check(fam: &SpaceLinear, x: Vec3, t: f64) -> EigenReduction {
    let constant = norm_sqr(fam.k) + norm_sqr(fam.g);
    let lap = lambda_laplacian(fam, x, t).assemble(fam.angles(x, t));
    let residual = (lap + fam.lambda(x, t).scale(constant)).norm();
    EigenReduction { constant, residual }
}
