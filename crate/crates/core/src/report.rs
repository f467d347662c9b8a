//! Continuity budgets: every term kept as its own field.

use serde::Serialize;

use crate::error::Result;
use crate::grid::{integrate, RealField};

#[derive(Clone, Debug)]
pub struct BudgetTerm {
    pub name: &'static str,
    pub values: RealField,
}

impl BudgetTerm {
    pub fn new(name: &'static str, values: RealField) -> Self {
        Self { name, values }
    }

    pub fn integral(&self) -> f64 {
        integrate(&self.values)
    }
}

/// `Σ balance − Σ sources` pointwise, with each term inspectable.
#[derive(Clone, Debug)]
pub struct ContinuityReport {
    pub density: RealField,
    /// Left-hand side: rate of the density and divergence of the current.
    pub balance: Vec<BudgetTerm>,
    /// Right-hand side source terms.
    pub sources: Vec<BudgetTerm>,
    /// Auxiliary quantities that are not part of the sum.
    pub extras: Vec<BudgetTerm>,
    pub residual: RealField,
}

impl ContinuityReport {
    pub fn new(density: RealField, balance: Vec<BudgetTerm>, sources: Vec<BudgetTerm>) -> Result<Self> {
        let mut residual = RealField::zeros(*density.grid());
        for t in &balance {
            residual = residual.axpy(1.0, &t.values)?;
        }
        for t in &sources {
            residual = residual.axpy(-1.0, &t.values)?;
        }
        Ok(Self { density, balance, sources, extras: Vec::new(), residual })
    }

    pub fn with_extra(mut self, name: &'static str, values: RealField) -> Self {
        self.extras.push(BudgetTerm::new(name, values));
        self
    }

    pub fn term(&self, name: &str) -> Option<&RealField> {
        self.balance.iter().chain(&self.sources).chain(&self.extras).find(|t| t.name == name).map(|t| &t.values)
    }

    pub fn integral(&self, name: &str) -> Option<f64> {
        self.term(name).map(integrate)
    }

    /// Interior max-norm of the residual.
    pub fn max_residual(&self) -> f64 {
        self.residual.max_norm()
    }

    /// Largest interior magnitude among the individual terms; residuals are
    /// judged against this.
    pub fn scale(&self) -> f64 {
        self.balance.iter().chain(&self.sources).map(|t| t.values.max_norm()).fold(0.0, f64::max)
    }

    pub fn summary(&self) -> ReportSummary {
        ReportSummary {
            max_residual: self.max_residual(),
            scale: self.scale(),
            integrals: self.balance.iter().chain(&self.sources).map(|t| (t.name.to_string(), t.integral())).collect(),
        }
    }
}

#[derive(Clone, Debug, Serialize)]
pub struct ReportSummary {
    pub max_residual: f64,
    pub scale: f64,
    pub integrals: Vec<(String, f64)>,
}
