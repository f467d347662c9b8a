//! Scenario files: TOML with top-level `mode` and `seed` plus one table per
//! concern. Every table rejects unknown keys so typos surface as errors with
//! the offending line.

use std::path::Path;

use genunit_core::audit::AuditConfig;
use genunit_core::deformed::DeformAngle;
use genunit_core::{Boundary, ComplexField, Grid1D, Physics, RealField, ScheduleFamily};
use num_complex::Complex64;
use serde::{Deserialize, Serialize};

/// A problem with the scenario itself, as opposed to a failed run.
#[derive(Debug)]
pub struct ConfigError(pub String);

impl std::fmt::Display for ConfigError {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(&self.0)
    }
}

impl std::error::Error for ConfigError {}

fn bad(field: &str, msg: impl std::fmt::Display) -> ConfigError {
    ConfigError(format!("{field}: {msg}"))
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Mode {
    Audit,
    EvolveComplex,
    EvolveQuat,
    EigenReduce,
}

impl Mode {
    pub fn name(self) -> &'static str {
        match self {
            Mode::Audit => "audit",
            Mode::EvolveComplex => "evolve-complex",
            Mode::EvolveQuat => "evolve-quat",
            Mode::EigenReduce => "eigen-reduce",
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ScenarioConfig {
    pub mode: Mode,
    #[serde(default)]
    pub seed: u64,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub grid: Option<GridSpec>,
    #[serde(default)]
    pub physics: PhysicsSpec,
    #[serde(default)]
    pub potential: PotentialSpec,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub run: Option<RunSpec>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub complex: Option<ComplexSpec>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub quat: Option<QuatSpec>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub eigen: Option<EigenSpec>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub audit: Option<AuditConfig>,
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct GridSpec {
    pub n: usize,
    /// Either `dx` or `length`; the echo always carries `dx`.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub dx: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub length: Option<f64>,
    #[serde(default)]
    pub origin: f64,
    pub boundary: Boundary,
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct PhysicsSpec {
    pub hbar: f64,
    pub mass: f64,
}

impl Default for PhysicsSpec {
    fn default() -> Self {
        Self { hbar: 1.0, mass: 1.0 }
    }
}

/// Named analytic profiles for potential components.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
#[serde(tag = "form", rename_all = "kebab-case", deny_unknown_fields)]
pub enum Form {
    Constant {
        value: f64,
    },
    /// `intercept + slope·x`.
    Linear {
        slope: f64,
        #[serde(default)]
        intercept: f64,
    },
    /// `amplitude·sin(wavenumber·x + phase)`.
    Sine {
        amplitude: f64,
        wavenumber: f64,
        #[serde(default)]
        phase: f64,
    },
    /// `−depth·exp(−((x − centre)/width)²)`.
    GaussianWell {
        depth: f64,
        centre: f64,
        width: f64,
    },
    /// `inside` on `[left, right]`, `outside` elsewhere.
    Box {
        left: f64,
        right: f64,
        #[serde(default)]
        inside: f64,
        outside: f64,
    },
}

impl Form {
    pub fn value(&self, x: f64) -> f64 {
        match *self {
            Form::Constant { value } => value,
            Form::Linear { slope, intercept } => intercept + slope * x,
            Form::Sine { amplitude, wavenumber, phase } => amplitude * (wavenumber * x + phase).sin(),
            Form::GaussianWell { depth, centre, width } => -depth * (-((x - centre) / width).powi(2)).exp(),
            Form::Box { left, right, inside, outside } => {
                if (left..=right).contains(&x) {
                    inside
                } else {
                    outside
                }
            }
        }
    }

    fn check(&self, field: &str) -> Result<(), ConfigError> {
        let finite = |v: f64, name: &str| {
            if v.is_finite() {
                Ok(())
            } else {
                Err(bad(&format!("{field}.{name}"), "must be finite"))
            }
        };
        match *self {
            Form::Constant { value } => finite(value, "value"),
            Form::Linear { slope, intercept } => finite(slope, "slope").and(finite(intercept, "intercept")),
            Form::Sine { amplitude, wavenumber, phase } => {
                finite(amplitude, "amplitude").and(finite(wavenumber, "wavenumber")).and(finite(phase, "phase"))
            }
            Form::GaussianWell { depth, centre, width } => {
                finite(depth, "depth")?;
                finite(centre, "centre")?;
                if width > 0.0 && width.is_finite() {
                    Ok(())
                } else {
                    Err(bad(&format!("{field}.width"), format!("must be positive, got {width}")))
                }
            }
            Form::Box { left, right, inside, outside } => {
                finite(inside, "inside")?;
                finite(outside, "outside")?;
                if left < right {
                    Ok(())
                } else {
                    Err(bad(field, format!("box needs left < right, got [{left}, {right}]")))
                }
            }
        }
    }
}

/// `U = V + W·j` and `𝒜 = α·i + β·j`; complex parts are given as separate
/// real forms. Every component defaults to zero.
#[derive(Clone, Debug, Default, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct PotentialSpec {
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub v: Option<Form>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub v_imag: Option<Form>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub w: Option<Form>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub w_imag: Option<Form>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub alpha: Option<Form>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub beta: Option<Form>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub beta_imag: Option<Form>,
}

impl PotentialSpec {
    fn components(&self) -> [(&'static str, Option<&Form>); 7] {
        [
            ("potential.v", self.v.as_ref()),
            ("potential.v_imag", self.v_imag.as_ref()),
            ("potential.w", self.w.as_ref()),
            ("potential.w_imag", self.w_imag.as_ref()),
            ("potential.alpha", self.alpha.as_ref()),
            ("potential.beta", self.beta.as_ref()),
            ("potential.beta_imag", self.beta_imag.as_ref()),
        ]
    }

    pub fn real(form: Option<&Form>, grid: Grid1D) -> RealField {
        match form {
            Some(f) => RealField::from_fn(grid, |x| f.value(x)),
            None => RealField::zeros(grid),
        }
    }

    pub fn complex(re: Option<&Form>, im: Option<&Form>, grid: Grid1D) -> ComplexField {
        ComplexField::from_fn(grid, |x| Complex64::new(re.map_or(0.0, |f| f.value(x)), im.map_or(0.0, |f| f.value(x))))
    }

    pub fn has_vector(&self) -> bool {
        self.alpha.is_some() || self.beta.is_some() || self.beta_imag.is_some()
    }

    pub fn has_w(&self) -> bool {
        self.w.is_some() || self.w_imag.is_some()
    }
}

/// `t_end` as a number, or `"period"` for one period of the stationary Λ.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
#[serde(untagged)]
pub enum EndTime {
    At(f64),
    Named(NamedEnd),
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum NamedEnd {
    Period,
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct RunSpec {
    pub t_end: EndTime,
    pub dt: f64,
    #[serde(default = "one")]
    pub output_stride: usize,
}

fn one() -> usize {
    1
}

/// Initial state. `ground-state` is the lowest grid eigenstate of `Re V`.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "kebab-case", deny_unknown_fields)]
pub enum Initial {
    GroundState,
    /// Ground state times `Λ(x, 0)`, with the schedule energy replaced by
    /// `−ε` so that the product is an exact stationary solution.
    Stationary,
    Gaussian {
        centre: f64,
        width: f64,
        #[serde(default)]
        wavenumber: f64,
    },
    /// Random band-limited field drawn from the scenario seed.
    Smooth {
        #[serde(default = "three")]
        modes: usize,
    },
}

fn three() -> usize {
    3
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ComplexSpec {
    pub theta: DeformAngle,
    #[serde(default = "ground")]
    pub initial: Initial,
}

fn ground() -> Initial {
    Initial::GroundState
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct QuatSpec {
    pub schedule: ScheduleFamily,
    #[serde(default = "ground")]
    pub initial: Initial,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct EigenSpec {
    /// Wavevectors of Θ and Γ; must be orthogonal to each other and to the grid axis.
    pub k: [f64; 3],
    pub g: [f64; 3],
    #[serde(default)]
    pub gamma0: f64,
    #[serde(default)]
    pub omega0: f64,
    #[serde(default = "one")]
    pub levels: usize,
    /// Times at which the full equation is checked.
    #[serde(default = "default_times")]
    pub times: Vec<f64>,
}

fn default_times() -> Vec<f64> {
    vec![0.0, 0.5, 1.0]
}

impl ScenarioConfig {
    pub fn load(path: &Path) -> Result<Self, ConfigError> {
        let text =
            std::fs::read_to_string(path).map_err(|e| ConfigError(format!("cannot read {}: {e}", path.display())))?;
        Self::parse(&text).map_err(|e| ConfigError(format!("{}: {}", path.display(), e.0)))
    }

    pub fn parse(text: &str) -> Result<Self, ConfigError> {
        let cfg: ScenarioConfig =
            toml::from_str(text).map_err(|e| ConfigError(e.to_string().trim_end().to_string()))?;
        cfg.normalized()
    }

    /// Applies defaults, fills `dx` from `length`, and checks every block the
    /// mode needs.
    pub fn normalized(mut self) -> Result<Self, ConfigError> {
        Physics::new(self.physics.hbar, self.physics.mass).map_err(|e| bad("physics", e))?;
        for (name, form) in self.potential.components() {
            if let Some(f) = form {
                f.check(name)?;
            }
        }
        if let Some(g) = self.grid.as_mut() {
            let dx = match (g.dx, g.length) {
                (Some(_), Some(_)) => return Err(bad("grid", "give either dx or length, not both")),
                (None, None) => return Err(bad("grid", "missing dx (or length)")),
                (Some(dx), None) => dx,
                (None, Some(len)) => match g.boundary {
                    Boundary::Dirichlet if g.n > 1 => len / (g.n - 1) as f64,
                    Boundary::Periodic if g.n > 0 => len / g.n as f64,
                    _ => return Err(bad("grid.n", format!("too few points: {}", g.n))),
                },
            };
            g.dx = Some(dx);
            g.length = None;
            Grid1D::new(g.n, dx, g.origin, g.boundary).map_err(|e| bad("grid", e))?;
        }
        match self.mode {
            Mode::Audit => {
                let audit = self.audit.get_or_insert_with(AuditConfig::default);
                audit.validate().map_err(|e| bad("audit", e))?;
            }
            Mode::EvolveComplex | Mode::EvolveQuat => {
                let grid = self.grid()?;
                let run = self.run.ok_or_else(|| bad("run", "missing table"))?;
                self.check_run(&run, &grid)?;
                if self.mode == Mode::EvolveComplex {
                    let c = self.complex.ok_or_else(|| bad("complex", "missing table"))?;
                    if c.initial == Initial::Stationary {
                        return Err(bad("complex.initial", "stationary is only defined for evolve-quat"));
                    }
                    if matches!(run.t_end, EndTime::Named(_)) {
                        return Err(bad("run.t_end", "\"period\" is only defined for evolve-quat"));
                    }
                    if self.potential.has_w() || self.potential.has_vector() {
                        return Err(bad("potential", "evolve-complex uses only v and v_imag"));
                    }
                } else {
                    let q = self.quat.ok_or_else(|| bad("quat", "missing table"))?;
                    q.schedule.build(self.physics.hbar).map_err(|e| bad("quat.schedule", e))?;
                    let stationary = q.initial == Initial::Stationary;
                    if stationary && !matches!(q.schedule, ScheduleFamily::ConstantPhases { .. }) {
                        return Err(bad("quat.initial", "stationary needs the constant-phases family"));
                    }
                    if matches!(run.t_end, EndTime::Named(_)) && !stationary {
                        return Err(bad("run.t_end", "\"period\" needs quat.initial = { kind = \"stationary\" }"));
                    }
                }
            }
            Mode::EigenReduce => {
                let grid = self.grid()?;
                if grid.boundary() != Boundary::Dirichlet {
                    return Err(bad("grid.boundary", "eigen-reduce works on a dirichlet box"));
                }
                if self.potential.v_imag.is_some() || self.potential.has_w() || self.potential.has_vector() {
                    return Err(bad("potential", "eigen-reduce uses only a real v"));
                }
                let e = self.eigen.as_ref().ok_or_else(|| bad("eigen", "missing table"))?;
                let dot = |a: [f64; 3], b: [f64; 3]| a[0] * b[0] + a[1] * b[1] + a[2] * b[2];
                if e.k[0] != 0.0 || e.g[0] != 0.0 || dot(e.k, e.g).abs() > 1e-12 {
                    return Err(bad(
                        "eigen",
                        "k and g must be orthogonal to each other and to the grid axis (first component zero)",
                    ));
                }
                if e.levels == 0 || e.levels + 2 > grid.n() {
                    return Err(bad("eigen.levels", format!("must lie in 1..={}", grid.n().saturating_sub(2))));
                }
            }
        }
        Ok(self)
    }

    fn check_run(&self, run: &RunSpec, grid: &Grid1D) -> Result<(), ConfigError> {
        if let EndTime::At(t) = run.t_end {
            if !(t > 0.0 && t.is_finite()) {
                return Err(bad("run.t_end", format!("must be positive, got {t}")));
            }
        }
        if run.output_stride == 0 {
            return Err(bad("run.output_stride", "must be at least 1"));
        }
        let bound = self.physics().max_stable_dt(grid);
        if !(run.dt > 0.0 && run.dt <= bound) {
            return Err(bad("run.dt", format!("{} must lie in (0, {bound:e}], the explicit stability bound", run.dt)));
        }
        Ok(())
    }

    pub fn physics(&self) -> Physics {
        Physics { hbar: self.physics.hbar, mass: self.physics.mass }
    }

    pub fn grid(&self) -> Result<Grid1D, ConfigError> {
        let g = self.grid.ok_or_else(|| bad("grid", "missing table"))?;
        let dx = g.dx.ok_or_else(|| bad("grid.dx", "missing"))?;
        Grid1D::new(g.n, dx, g.origin, g.boundary).map_err(|e| bad("grid", e))
    }

    /// The effective configuration as TOML.
    pub fn echo(&self) -> String {
        toml::to_string(self).expect("scenario serializes")
    }
}
