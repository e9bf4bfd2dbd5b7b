//! Repeated msb-vs-logitb runs with fresh cost profiles and splits.

use std::fmt;

use rayon::prelude::*;

use crate::cost::CostProfile;
use crate::data::{derive_seed, Dataset};
use crate::error::{Error, Result};
use crate::schedule::ModelSchedule;
use crate::sequences::{logitb_from_path, msb, MsbConfig, MsbResult};
use crate::synth::sample_cost_profile;

use super::smooth::{smooth_schedule, Lowess, DEFAULT_SPAN};
use super::split::split_dataset;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum Method {
    Msb,
    LogitB,
}

impl Method {
    pub fn name(self) -> &'static str {
        match self {
            Method::Msb => "msb",
            Method::LogitB => "logitb",
        }
    }
}

impl fmt::Display for Method {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct ExperimentConfig {
    pub runs: usize,
    pub cost_range: (f64, f64),
    /// Use this profile in every run instead of sampling one.
    pub fixed_costs: Option<CostProfile>,
    pub seed: u64,
    /// Tree count, gamma and path settings; its seed is replaced per run.
    pub msb: MsbConfig,
    pub span: f64,
}

impl Default for ExperimentConfig {
    fn default() -> Self {
        Self {
            runs: 100,
            cost_range: (1.0, 100.0),
            fixed_costs: None,
            seed: 0,
            msb: MsbConfig::default(),
            span: DEFAULT_SPAN,
        }
    }
}

#[derive(Debug, Clone)]
pub struct RunResult {
    /// 1-based.
    pub run: usize,
    pub profile: CostProfile,
    pub msb: MsbResult,
    pub logitb: ModelSchedule,
}

#[derive(Debug, Clone, PartialEq)]
pub struct ScatterPoint {
    pub normalized_cost: f64,
    pub accuracy: f64,
    pub method: Method,
    pub run: usize,
}

#[derive(Debug)]
pub struct ExperimentResult {
    pub runs: Vec<RunResult>,
    pub failures: Vec<(usize, Error)>,
    pub span: f64,
}

impl RunResult {
    /// Test-accuracy points of both schedules with cost divided by the full
    /// model's cost. The intercept-only logistic model (no variables, cost 0)
    /// is left out so every point lies in `(0, 1]`.
    pub fn points(&self) -> Vec<ScatterPoint> {
        let full = self.profile.full_cost().cents() as f64;
        let mut out = Vec::new();
        for (method, schedule) in [(Method::Msb, &self.msb.schedule), (Method::LogitB, &self.logitb)] {
            for r in schedule.records() {
                if r.variables.is_empty() {
                    continue;
                }
                out.push(ScatterPoint {
                    normalized_cost: r.cost.cents() as f64 / full,
                    accuracy: r.test_accuracy.unwrap_or(r.val_accuracy),
                    method,
                    run: self.run,
                });
            }
        }
        out
    }
}

impl ExperimentResult {
    pub fn points(&self) -> Vec<ScatterPoint> {
        self.runs.iter().flat_map(RunResult::points).collect()
    }

    fn method_points(&self, method: Method) -> Vec<(f64, f64)> {
        self.points()
            .into_iter()
            .filter(|p| p.method == method)
            .map(|p| (p.normalized_cost, p.accuracy))
            .collect()
    }

    /// Smoothed average schedule of one method on the standard grid.
    pub fn curve(&self, method: Method) -> Result<Vec<(f64, f64)>> {
        smooth_schedule(&self.method_points(method), self.span)
    }

    /// Smoothed average schedule of one method evaluated at `x`.
    pub fn smoothed_at(&self, method: Method, x: f64) -> Result<f64> {
        Ok(Lowess::new(&self.method_points(method), self.span)?.predict(x))
    }
}

fn run_once(dataset: &Dataset, config: &ExperimentConfig, run: usize) -> Result<RunResult> {
    let run_seed = derive_seed(config.seed, run as u64);
    let profile = match &config.fixed_costs {
        Some(p) => p.clone(),
        None => sample_cost_profile(
            dataset.p(),
            config.cost_range.0,
            config.cost_range.1,
            derive_seed(run_seed, 1),
        )?,
    };
    let split = split_dataset(dataset.n(), derive_seed(run_seed, 2))?.apply(dataset);
    let msb_config = MsbConfig {
        seed: derive_seed(run_seed, 3),
        ..config.msb.clone()
    };
    let ensemble = msb(&split, &profile, &msb_config)?;
    let logitb = logitb_from_path(&split, &profile, &ensemble.path)?;
    Ok(RunResult {
        run,
        profile,
        msb: ensemble,
        logitb,
    })
}

/// Runs `config.runs` independent repetitions. A failed run is recorded in
/// `failures` and the others are kept.
pub fn run_experiment(dataset: &Dataset, config: &ExperimentConfig) -> Result<ExperimentResult> {
    if config.runs == 0 {
        return Err(Error::InvalidConfig("runs must be at least 1".into()));
    }
    if let Some(p) = &config.fixed_costs {
        if p.len() != dataset.p() {
            return Err(Error::DimensionMismatch {
                expected: dataset.p(),
                got: p.len(),
            });
        }
    }
    let outcomes: Vec<Result<RunResult>> = (1..=config.runs)
        .into_par_iter()
        .map(|run| run_once(dataset, config, run))
        .collect();
    let mut runs = Vec::new();
    let mut failures = Vec::new();
    for (k, outcome) in outcomes.into_iter().enumerate() {
        match outcome {
            Ok(r) => runs.push(r),
            Err(e) => failures.push((k + 1, e)),
        }
    }
    Ok(ExperimentResult {
        runs,
        failures,
        span: config.span,
    })
}
