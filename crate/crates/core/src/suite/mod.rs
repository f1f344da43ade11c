//! Seeded verification suites.
//!
//! A suite runs one family of checks from a seed and returns the reports
//! together with plot series. The CLI writes them to disk and the acceptance
//! tests assert on them, so both go through the same code. Nothing in a
//! [`SuiteOutput`] depends on timing or thread count.

mod estimates;
mod geometry;

pub use estimates::{abp_equality, abp_random, harnack, hfun, pucci, solver_instance, well};
pub use geometry::{barrier, constants, jacobi, measure};

use crate::error::{LabError, Result};
use crate::exec::Exec;
use crate::model::ModelSpace;
use crate::report::{all_pass, CheckReport};
use serde::Serialize;
use serde_json::Value;

pub const SUITES: [&str; 9] = ["constants", "abp_equality", "abp_random", "jacobi", "barrier", "hfun", "harnack", "pucci", "measure"];

#[derive(Debug, Clone, Copy)]
pub struct SuiteConfig {
    pub seed: u64,
    /// Seeded samples per model. Each suite has its own default.
    pub samples: Option<usize>,
    pub resolution: Option<usize>,
    /// Restricts model-indexed suites to one model.
    pub model: Option<ModelSpace>,
    pub exec: Exec,
}

impl SuiteConfig {
    pub fn new(seed: u64) -> Self {
        SuiteConfig { seed, samples: None, resolution: None, model: None, exec: Exec::default() }
    }

    pub fn with_samples(mut self, n: usize) -> Self {
        self.samples = Some(n);
        self
    }

    pub fn with_resolution(mut self, n: usize) -> Self {
        self.resolution = Some(n);
        self
    }

    pub fn with_model(mut self, m: ModelSpace) -> Self {
        self.model = Some(m);
        self
    }

    pub fn with_exec(mut self, exec: Exec) -> Self {
        self.exec = exec;
        self
    }

    fn samples_or(&self, default: usize) -> usize {
        self.samples.unwrap_or(default)
    }

    fn resolution_or(&self, default: usize) -> usize {
        self.resolution.unwrap_or(default)
    }

    /// Keeps the entries whose model has the same kind as the selected one.
    fn select<T>(&self, items: Vec<(ModelSpace, T)>) -> Vec<(ModelSpace, T)> {
        match self.model {
            None => items,
            Some(sel) => items.into_iter().filter(|(m, _)| m.name() == sel.name()).map(|(_, t)| (sel, t)).collect(),
        }
    }
}

/// Two-column plot data.
#[derive(Debug, Clone, Serialize)]
pub struct Series {
    pub name: String,
    pub x_label: String,
    pub y_label: String,
    pub points: Vec<[f64; 2]>,
}

impl Series {
    pub fn new(name: &str, x_label: &str, y_label: &str, points: Vec<[f64; 2]>) -> Self {
        Series { name: name.into(), x_label: x_label.into(), y_label: y_label.into(), points }
    }
}

#[derive(Debug, Clone, Serialize)]
pub struct SuiteOutput {
    pub suite: String,
    pub seed: u64,
    pub pass: bool,
    pub reports: Vec<CheckReport>,
    /// Suite-specific payload such as ledgers or fitted coefficients.
    #[serde(skip_serializing_if = "Value::is_null")]
    pub data: Value,
    #[serde(skip)]
    pub series: Vec<Series>,
}

impl SuiteOutput {
    pub fn new(suite: &str, cfg: &SuiteConfig, reports: Vec<CheckReport>) -> Self {
        SuiteOutput { suite: suite.into(), seed: cfg.seed, pass: all_pass(&reports), reports, data: Value::Null, series: Vec::new() }
    }

    pub fn with_data(mut self, data: Value) -> Self {
        self.data = data;
        self
    }

    pub fn with_series(mut self, s: Series) -> Self {
        self.series.push(s);
        self
    }

    pub fn failures(&self) -> impl Iterator<Item = &CheckReport> {
        self.reports.iter().filter(|r| !r.pass)
    }
}

/// Runs a suite by name.
pub fn run(name: &str, cfg: &SuiteConfig) -> Result<SuiteOutput> {
    match name {
        "constants" => constants(cfg),
        "abp_equality" => abp_equality(cfg),
        "abp_random" => abp_random(cfg),
        "jacobi" => jacobi(cfg),
        "barrier" => barrier(cfg),
        "hfun" => hfun(cfg),
        "harnack" => harnack(cfg),
        "pucci" => pucci(cfg),
        "measure" => measure(cfg),
        _ => Err(LabError::InvalidParam(format!("unknown suite {name}; expected one of {}", SUITES.join(", ")))),
    }
}

/// Folds many instance reports into one: `lhs` counts failures.
pub fn tally(name: &str, anchor: &str, reps: &[CheckReport]) -> CheckReport {
    let failed: Vec<&CheckReport> = reps.iter().filter(|r| !r.pass).collect();
    let min_slack = reps.iter().map(CheckReport::slack).fold(f64::INFINITY, f64::min);
    let mut out = CheckReport::inequality(name, anchor, failed.len() as f64, 0.0)
        .diag("instances", reps.len())
        .diag_f64("min_slack", min_slack);
    if let Some(first) = failed.first() {
        out = out.diag("first_failure", serde_json::to_value(first).unwrap_or(Value::Null));
    }
    if reps.iter().any(|r| r.diagnostics.get("sharpness").is_some_and(|s| s == "non-sharp")) {
        out = out.non_sharp();
    }
    out
}

/// Tags a report with the instance it came from.
fn tagged(rep: CheckReport, case: &str) -> CheckReport {
    rep.diag("case", case)
}

/// Reports that a rejected instance names the expected premise.
fn rejection(case: &str, expected: &str, rep: &CheckReport) -> CheckReport {
    let got = rep.premise_violated.clone().unwrap_or_default();
    let miss = if got == expected && !rep.pass { 0.0 } else { 1.0 };
    CheckReport::identity("premise.rejected", "named premise", miss, 0.0)
        .diag("case", case)
        .diag("expected", expected)
        .diag("got", got)
}

fn models() -> [ModelSpace; 4] {
    [
        ModelSpace::Euclidean,
        ModelSpace::Sphere { k: 1.0 },
        ModelSpace::Hyperbolic { k: 1.0 },
        ModelSpace::GaussianPlane { lambda: 1.0 },
    ]
}
