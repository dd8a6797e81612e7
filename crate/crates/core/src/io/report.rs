//! JSON reports of benchmark runs and convergence studies.

use std::collections::BTreeMap;
use std::path::Path;

use serde::{Deserialize, Serialize};

use crate::benchmarks::{ConvergenceReport, LevelMetrics, SlopeFit};
use crate::operator::{OperatorSpec, SpecEcho};
use crate::{Error, Result};

/// Worst operator diagnostics over all levels.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct DiagnosticsSummary {
    pub max_condition: f64,
    pub max_moment_residual: f64,
    pub max_support: usize,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ReportDocument {
    pub problem: String,
    pub grid: String,
    pub seed: u64,
    pub spec: SpecEcho,
    pub levels: Vec<LevelMetrics>,
    /// Empty for single-level runs.
    pub slopes: BTreeMap<String, SlopeFit>,
    pub exclude_coarsest: bool,
    pub diagnostics: DiagnosticsSummary,
}

impl ReportDocument {
    pub fn new(problem: &str, grid: &str, seed: u64, spec: &OperatorSpec, levels: Vec<LevelMetrics>) -> Self {
        let diagnostics = DiagnosticsSummary {
            max_condition: levels.iter().map(|l| l.max_condition).fold(0.0, f64::max),
            max_moment_residual: levels.iter().map(|l| l.max_moment_residual).fold(0.0, f64::max),
            max_support: levels.iter().map(|l| l.max_support).max().unwrap_or(0),
        };
        Self {
            problem: problem.to_string(),
            grid: grid.to_string(),
            seed,
            spec: spec.echo(),
            levels,
            slopes: BTreeMap::new(),
            exclude_coarsest: false,
            diagnostics,
        }
    }

    pub fn from_study(report: &ConvergenceReport, spec: &OperatorSpec) -> Self {
        let mut doc = Self::new(&report.problem, &report.grid, report.seed, spec, report.levels.clone());
        doc.slopes = report.slopes.clone();
        doc.exclude_coarsest = report.exclude_coarsest;
        doc
    }

    pub fn to_json(&self) -> Result<String> {
        Ok(serde_json::to_string_pretty(self)? + "\n")
    }
}

pub fn write_report(path: impl AsRef<Path>, doc: &ReportDocument) -> Result<()> {
    let path = path.as_ref();
    std::fs::write(path, doc.to_json()?).map_err(|source| Error::Io {
        path: path.to_path_buf(),
        source,
    })
}

pub fn read_report(path: impl AsRef<Path>) -> Result<ReportDocument> {
    let path = path.as_ref();
    let text = std::fs::read_to_string(path).map_err(|source| Error::Io {
        path: path.to_path_buf(),
        source,
    })?;
    serde_json::from_str(&text).map_err(|e| Error::Parse {
        path: path.to_path_buf(),
        line: e.line() as u64,
        message: e.to_string(),
    })
}
