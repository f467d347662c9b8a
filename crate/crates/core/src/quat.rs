//! Quaternion algebra in the Hamilton convention `i·j = k`.
//!
//! A quaternion is stored by its real components `(w, x, y, z)` and is also
//! available through the symplectic view `q = a + b·j` with complex
//! `a = w + x·i` and `b = y + z·i`. The product is evaluated in that view:
//!
//! ```text
//! (a + b j)(c + d j) = (a c − b d̄) + (a d + b c̄) j
//! ```
//!
//! which follows from `j·c = c̄·j` for every complex `c`.

use std::f64::consts::FRAC_PI_2;
use std::fmt;
use std::ops::{Add, AddAssign, Div, Mul, Neg, Sub, SubAssign};

use num_complex::Complex64;
use num_traits::Zero;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

#[derive(Clone, Copy, Debug, Default, PartialEq, Serialize, Deserialize)]
pub struct Quaternion {
    pub w: f64,
    pub x: f64,
    pub y: f64,
    pub z: f64,
}

impl Quaternion {
    pub const ZERO: Self = Self::new(0.0, 0.0, 0.0, 0.0);
    pub const ONE: Self = Self::new(1.0, 0.0, 0.0, 0.0);
    pub const I: Self = Self::new(0.0, 1.0, 0.0, 0.0);
    pub const J: Self = Self::new(0.0, 0.0, 1.0, 0.0);
    pub const K: Self = Self::new(0.0, 0.0, 0.0, 1.0);

    pub const fn new(w: f64, x: f64, y: f64, z: f64) -> Self {
        Self { w, x, y, z }
    }

    pub const fn real(w: f64) -> Self {
        Self::new(w, 0.0, 0.0, 0.0)
    }

    /// Embeds a complex number as `re + im·i`.
    pub fn from_complex(c: Complex64) -> Self {
        Self::new(c.re, c.im, 0.0, 0.0)
    }

    /// Builds `a + b·j` from its two complex parts.
    pub fn compose(a: Complex64, b: Complex64) -> Self {
        Self::new(a.re, a.im, b.re, b.im)
    }

    /// Returns `(a, b)` with `self = a + b·j`.
    pub fn decompose(self) -> (Complex64, Complex64) {
        (self.a(), self.b())
    }

    #[inline]
    pub fn a(self) -> Complex64 {
        Complex64::new(self.w, self.x)
    }

    #[inline]
    pub fn b(self) -> Complex64 {
        Complex64::new(self.y, self.z)
    }

    pub fn conj(self) -> Self {
        quat_conj(self)
    }

    pub fn norm_sqr(self) -> f64 {
        self.w * self.w + self.x * self.x + self.y * self.y + self.z * self.z
    }

    pub fn norm(self) -> f64 {
        self.norm_sqr().sqrt()
    }

    /// Imaginary (vector) part `x·i + y·j + z·k`.
    pub fn imag(self) -> Self {
        Self::new(0.0, self.x, self.y, self.z)
    }

    pub fn imag_norm(self) -> f64 {
        (self.x * self.x + self.y * self.y + self.z * self.z).sqrt()
    }

    pub fn scale(self, s: f64) -> Self {
        Self::new(self.w * s, self.x * s, self.y * s, self.z * s)
    }

    pub fn inverse(self) -> Option<Self> {
        let n2 = self.norm_sqr();
        (n2 > 0.0).then(|| self.conj().scale(1.0 / n2))
    }

    pub fn is_finite(self) -> bool {
        self.w.is_finite() && self.x.is_finite() && self.y.is_finite() && self.z.is_finite()
    }

    /// Largest absolute component difference.
    pub fn max_abs_diff(self, other: Self) -> f64 {
        let d = self - other;
        d.w.abs().max(d.x.abs()).max(d.y.abs()).max(d.z.abs())
    }
}

/// Hamilton product through the symplectic decomposition.
#[inline]
pub fn quat_mul(p: Quaternion, q: Quaternion) -> Quaternion {
    let (a, b) = p.decompose();
    let (c, d) = q.decompose();
    Quaternion::compose(a * c - b * d.conj(), a * d + b * c.conj())
}

#[inline]
pub fn quat_conj(q: Quaternion) -> Quaternion {
    Quaternion::new(q.w, -q.x, -q.y, -q.z)
}

fn check_finite(name: &'static str, value: f64) -> Result<()> {
    if value.is_finite() {
        Ok(())
    } else {
        Err(Error::Domain(format!("{name} must be finite, got {value}")))
    }
}

/// The quaternionic unit `η = e^{iΞ}·j = cosΞ·j + sinΞ·k`.
pub fn make_eta(xi: f64) -> Result<Quaternion> {
    check_finite("Ξ", xi)?;
    Ok(eta_unchecked(xi))
}

#[inline]
pub(crate) fn eta_unchecked(xi: f64) -> Quaternion {
    let (s, c) = xi.sin_cos();
    Quaternion::new(0.0, 0.0, c, s)
}

/// `Λ = cosΘ·e^{iΓ} + sinΘ·e^{iΩ}·j`, a unit quaternion for every angle triple.
pub fn make_lambda(theta: f64, gamma: f64, omega: f64) -> Result<Quaternion> {
    check_finite("Θ", theta)?;
    check_finite("Γ", gamma)?;
    check_finite("Ω", omega)?;
    Ok(lambda_unchecked(theta, gamma, omega))
}

#[inline]
pub(crate) fn lambda_unchecked(theta: f64, gamma: f64, omega: f64) -> Quaternion {
    let (s, c) = theta.sin_cos();
    Quaternion::compose(Complex64::from_polar(c, gamma), Complex64::from_polar(s, omega))
}

/// The rejected complex candidate `e^{iθ}·i`. Unit modulus, but its square is
/// `−e^{2iθ}`.
pub fn complex_eta(theta: f64) -> Complex64 {
    Complex64::from_polar(1.0, theta) * Complex64::i()
}

/// Angles `(Θ, Γ, Ω)` reproducing a unit quaternion through [`make_lambda`].
///
/// Θ is taken in `[0, π/2]`. At `Θ = 0` the phase Ω is undetermined and set to
/// zero; at `Θ = π/2` the same holds for Γ.
pub fn lambda_angles(q: Quaternion) -> Result<(f64, f64, f64)> {
    if !q.is_finite() {
        return Err(Error::Domain("quaternion has non-finite components".into()));
    }
    let n = q.norm();
    if (n - 1.0).abs() > 1e-9 {
        return Err(Error::Domain(format!("expected a unit quaternion, |q| = {n}")));
    }
    let (a, b) = q.decompose();
    let theta = b.norm().atan2(a.norm());
    let gamma = if theta == FRAC_PI_2 || a.norm() == 0.0 { 0.0 } else { a.arg() };
    let omega = if theta == 0.0 || b.norm() == 0.0 { 0.0 } else { b.arg() };
    Ok((theta, gamma, omega))
}

impl Zero for Quaternion {
    fn zero() -> Self {
        Self::ZERO
    }

    fn is_zero(&self) -> bool {
        *self == Self::ZERO
    }
}

impl From<f64> for Quaternion {
    fn from(w: f64) -> Self {
        Self::real(w)
    }
}

impl From<Complex64> for Quaternion {
    fn from(c: Complex64) -> Self {
        Self::from_complex(c)
    }
}

impl Add for Quaternion {
    type Output = Self;
    #[inline]
    fn add(self, o: Self) -> Self {
        Self::new(self.w + o.w, self.x + o.x, self.y + o.y, self.z + o.z)
    }
}

impl Sub for Quaternion {
    type Output = Self;
    #[inline]
    fn sub(self, o: Self) -> Self {
        Self::new(self.w - o.w, self.x - o.x, self.y - o.y, self.z - o.z)
    }
}

impl Neg for Quaternion {
    type Output = Self;
    #[inline]
    fn neg(self) -> Self {
        Self::new(-self.w, -self.x, -self.y, -self.z)
    }
}

impl Mul for Quaternion {
    type Output = Self;
    #[inline]
    fn mul(self, o: Self) -> Self {
        quat_mul(self, o)
    }
}

impl Mul<f64> for Quaternion {
    type Output = Self;
    #[inline]
    fn mul(self, s: f64) -> Self {
        self.scale(s)
    }
}

impl Mul<Quaternion> for f64 {
    type Output = Quaternion;
    #[inline]
    fn mul(self, q: Quaternion) -> Quaternion {
        q.scale(self)
    }
}

/// Complex numbers act from the left: `c·q` with `c = re + im·i`.
impl Mul<Quaternion> for Complex64 {
    type Output = Quaternion;
    #[inline]
    fn mul(self, q: Quaternion) -> Quaternion {
        quat_mul(Quaternion::from_complex(self), q)
    }
}

/// Right multiplication by a complex number.
impl Mul<Complex64> for Quaternion {
    type Output = Quaternion;
    #[inline]
    fn mul(self, c: Complex64) -> Quaternion {
        quat_mul(self, Quaternion::from_complex(c))
    }
}

impl Div<f64> for Quaternion {
    type Output = Self;
    #[inline]
    fn div(self, s: f64) -> Self {
        self.scale(1.0 / s)
    }
}

impl AddAssign for Quaternion {
    fn add_assign(&mut self, o: Self) {
        *self = *self + o;
    }
}

impl SubAssign for Quaternion {
    fn sub_assign(&mut self, o: Self) {
        *self = *self - o;
    }
}

impl std::iter::Sum for Quaternion {
    fn sum<I: Iterator<Item = Self>>(iter: I) -> Self {
        iter.fold(Self::ZERO, Add::add)
    }
}

impl fmt::Display for Quaternion {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{} {:+}i {:+}j {:+}k", self.w, self.x, self.y, self.z)
    }
}
