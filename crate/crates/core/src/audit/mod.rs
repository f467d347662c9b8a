//! Identity audit: every relation the library relies on, checked against an
//! independent oracle on seeded random inputs.
//!
//! Each case is reproducible from its name and the run seed. Cases whose
//! printed form disagrees with the derivation carry both residuals; the
//! printed variant is reported with status `discrepancy` instead of failing
//! the run.

mod cases;

use std::fmt::Write as _;

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

pub use cases::{registry, CaseSpec, COVERED_OPERATIONS};

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct AuditConfig {
    /// Random draws per sampled identity.
    pub samples: usize,
    /// Points per grid for field identities.
    pub grid_points: usize,
    /// Replaces every case tolerance when set.
    pub tolerance: Option<f64>,
    /// Worker threads; `0` uses the global pool.
    pub threads: usize,
}

impl Default for AuditConfig {
    fn default() -> Self {
        Self { samples: 1000, grid_points: 128, tolerance: None, threads: 0 }
    }
}

impl AuditConfig {
    pub fn validate(&self) -> Result<()> {
        if self.samples == 0 {
            return Err(Error::Config("audit needs at least one sample".into()));
        }
        if self.grid_points < 32 {
            return Err(Error::Config(format!("audit grids need at least 32 points, got {}", self.grid_points)));
        }
        if let Some(t) = self.tolerance {
            if !(t >= 0.0) {
                return Err(Error::Config(format!("tolerance override must be non-negative, got {t}")));
            }
        }
        Ok(())
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Status {
    Pass,
    Fail,
    /// A printed formula that disagrees with the derivation, as expected.
    Discrepancy,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Variant {
    pub label: String,
    pub residual: f64,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct CaseResult {
    pub name: String,
    pub equation_ref: String,
    pub max_residual: f64,
    pub tolerance: f64,
    pub status: Status,
    pub note: String,
    #[serde(default, skip_serializing_if = "Vec::is_empty")]
    pub variants: Vec<Variant>,
}

#[derive(Clone, Debug, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct Summary {
    pub total: usize,
    pub passed: usize,
    pub failed: usize,
    pub discrepancies: usize,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct AuditReport {
    pub seed: u64,
    pub config: AuditConfig,
    pub summary: Summary,
    pub cases: Vec<CaseResult>,
}

impl AuditReport {
    pub fn all_passed(&self) -> bool {
        self.summary.failed == 0
    }

    pub fn case(&self, name: &str) -> Option<&CaseResult> {
        self.cases.iter().find(|c| c.name == name)
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(self).expect("report is plain data")
    }

    /// Fixed-width table, one line per case.
    pub fn render_table(&self) -> String {
        let width = self.cases.iter().map(|c| c.name.len()).max().unwrap_or(4).max(4);
        let mut out = String::new();
        let _ = writeln!(out, "{:<width$}  {:>11}  {:>11}  {:<11}  note", "case", "residual", "tolerance", "status");
        for c in &self.cases {
            let status = match c.status {
                Status::Pass => "pass",
                Status::Fail => "FAIL",
                Status::Discrepancy => "discrepancy",
            };
            let _ = writeln!(
                out,
                "{:<width$}  {:>11.3e}  {:>11.3e}  {:<11}  {}",
                c.name, c.max_residual, c.tolerance, status, c.note
            );
        }
        let s = &self.summary;
        let _ = writeln!(
            out,
            "{} cases: {} passed, {} failed, {} printed-form discrepancies",
            s.total, s.passed, s.failed, s.discrepancies
        );
        out
    }
}

/// What a case reports before the verdict is applied.
#[derive(Clone, Debug)]
pub(crate) struct Outcome {
    pub residual: f64,
    pub tolerance: f64,
    pub note: String,
    pub variants: Vec<Variant>,
    /// The residual measures a printed formula against the derivation.
    pub as_printed: bool,
}

impl Outcome {
    pub fn new(residual: f64, tolerance: f64, note: impl Into<String>) -> Self {
        Self { residual, tolerance, note: note.into(), variants: Vec::new(), as_printed: false }
    }

    pub fn printed(mut self) -> Self {
        self.as_printed = true;
        self
    }

    pub fn variant(mut self, label: &str, residual: f64) -> Self {
        self.variants.push(Variant { label: label.to_string(), residual });
        self
    }
}

/// Per-case state: a seeded generator and the sizes from the configuration.
pub(crate) struct Ctx {
    pub rng: ChaCha8Rng,
    pub samples: usize,
    pub n: usize,
}

/// 64-bit FNV-1a, used to give every case its own stream.
fn fnv1a(s: &str) -> u64 {
    let mut h: u64 = 0xcbf2_9ce4_8422_2325;
    for b in s.bytes() {
        h ^= u64::from(b);
        h = h.wrapping_mul(0x0000_0100_0000_01b3);
    }
    h
}

pub fn case_seed(seed: u64, name: &str) -> u64 {
    seed ^ fnv1a(name)
}

fn run_case(spec: &CaseSpec, seed: u64, config: &AuditConfig) -> CaseResult {
    let mut ctx = Ctx {
        rng: ChaCha8Rng::seed_from_u64(case_seed(seed, spec.name)),
        samples: config.samples,
        n: config.grid_points,
    };
    let (residual, tolerance, note, variants, as_printed) = match (spec.run)(&mut ctx) {
        Ok(o) => (o.residual, config.tolerance.unwrap_or(o.tolerance), o.note, o.variants, o.as_printed),
        Err(e) => (f64::INFINITY, config.tolerance.unwrap_or(0.0), format!("error: {e}"), Vec::new(), false),
    };
    let within = residual.is_finite() && residual < tolerance;
    let status = match (within, as_printed) {
        (true, _) => Status::Pass,
        (false, true) => Status::Discrepancy,
        (false, false) => Status::Fail,
    };
    CaseResult {
        name: spec.name.to_string(),
        equation_ref: spec.equation_ref.to_string(),
        max_residual: residual,
        tolerance,
        status,
        note,
        variants,
    }
}

fn assemble(seed: u64, config: &AuditConfig, mut cases: Vec<CaseResult>) -> AuditReport {
    cases.sort_by(|a, b| a.name.cmp(&b.name));
    let mut summary = Summary { total: cases.len(), ..Summary::default() };
    for c in &cases {
        match c.status {
            Status::Pass => summary.passed += 1,
            Status::Fail => summary.failed += 1,
            Status::Discrepancy => summary.discrepancies += 1,
        }
    }
    AuditReport { seed, config: config.clone(), summary, cases }
}

/// Runs the whole registry. Case failures are report entries, not errors;
/// only an invalid configuration or thread pool is an error.
pub fn audit_all(seed: u64, config: &AuditConfig) -> Result<AuditReport> {
    config.validate()?;
    let specs = registry();
    let run = || specs.par_iter().map(|s| run_case(s, seed, config)).collect::<Vec<_>>();
    let cases = if config.threads == 0 {
        run()
    } else {
        rayon::ThreadPoolBuilder::new()
            .num_threads(config.threads)
            .build()
            .map_err(|e| Error::Config(format!("cannot build thread pool: {e}")))?
            .install(run)
    };
    Ok(assemble(seed, config, cases))
}

/// Runs one case by name.
pub fn audit_one(name: &str, seed: u64, config: &AuditConfig) -> Result<CaseResult> {
    config.validate()?;
    let specs = registry();
    let spec = specs.iter().find(|s| s.name == name).ok_or_else(|| Error::UnknownIdentity {
        name: name.to_string(),
        valid: specs.iter().map(|s| s.name).collect::<Vec<_>>().join(", "),
    })?;
    Ok(run_case(spec, seed, config))
}

pub fn case_names() -> Vec<&'static str> {
    let mut names: Vec<_> = registry().iter().map(|s| s.name).collect();
    names.sort_unstable();
    names
}
