//! Model-sequence generators and the ensemble that merges them.
//!
//! Three generators start from the full model and drop one variable at a time
//! (least important, most expensive, or sampled by normalized importance)
//! until two remain. The fourth follows the L1 logistic regularization path
//! and trains the forest on each step's active variables. The ensemble
//! schedule is the compressed union of all four.

use std::collections::HashSet;
use std::io::Write;

use rand::distr::weighted::WeightedIndex;
use rand::distr::Distribution;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::cost::{Cost, CostProfile, VarSet};
use crate::data::{derive_seed, SplitData};
use crate::engine::SubsetEvaluator;
use crate::error::{Error, Result};
use crate::forest::{ForestParams, ImportanceProfile};
use crate::lasso::{fit_l1_logistic_path, make_lambda_grid, PathCoefficients, PathSettings};
use crate::schedule::{compress, merge, ModelRecord, ModelSchedule, Source};

pub const DEFAULT_GAMMA: f64 = 0.1;
pub const IMPORTANCE_FLOOR: f64 = 1e-6;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum SequenceKind {
    ByImportance,
    ByCost,
    BySampling,
    ByL1Path,
}

impl SequenceKind {
    pub fn source(self) -> Source {
        match self {
            SequenceKind::ByImportance => Source::ByImportance,
            SequenceKind::ByCost => Source::ByCost,
            SequenceKind::BySampling => Source::BySampling,
            SequenceKind::ByL1Path => Source::ByL1Path,
        }
    }

    pub fn name(self) -> &'static str {
        match self {
            SequenceKind::ByImportance => "importance",
            SequenceKind::ByCost => "cost",
            SequenceKind::BySampling => "sampling",
            SequenceKind::ByL1Path => "l1path",
        }
    }
}

/// Output of one generator.
#[derive(Debug, Clone, PartialEq)]
pub struct SequenceRun {
    pub kind: SequenceKind,
    /// Models kept, in generation order.
    pub records: Vec<ModelRecord>,
    /// Every model generated, including ones later discarded by a budget.
    pub trace: Vec<ModelRecord>,
    pub seed: u64,
}

impl SequenceRun {
    /// Distinct variable sets the engine was trained on, in visit order.
    pub fn visited_subsets(&self) -> Vec<VarSet> {
        let mut seen = HashSet::new();
        self.trace
            .iter()
            .filter(|r| seen.insert(r.variables.clone()))
            .map(|r| r.variables.clone())
            .collect()
    }

    pub fn schedule(&self) -> ModelSchedule {
        compress(&self.records)
    }

    /// One line per generated model: `size,cost,val_accuracy,variables`.
    pub fn write_trace<W: Write>(&self, mut out: W) -> std::io::Result<()> {
        writeln!(out, "size,cost,val_accuracy,variables")?;
        for r in &self.trace {
            writeln!(
                out,
                "{},{},{},{}",
                r.variables.len(),
                r.cost,
                r.val_accuracy,
                r.variables
            )?;
        }
        Ok(())
    }
}

/// `(I / b)^gamma`, with the importance clamped to [`IMPORTANCE_FLOOR`].
pub fn normalized_importance(cost: f64, importance: f64, gamma: f64) -> Result<f64> {
    if !(cost > 0.0) || !cost.is_finite() {
        return Err(Error::InvalidCost(cost));
    }
    Ok((importance.max(IMPORTANCE_FLOOR) / cost).powf(gamma))
}

/// Picks a position to remove with probability proportional to `1 / f`.
/// Falls back to uniform choice when those weights are unusable.
pub fn draw_removal<R: Rng>(normalized: &[f64], rng: &mut R) -> usize {
    let weights: Vec<f64> = normalized.iter().map(|f| 1.0 / f).collect();
    let usable = weights.iter().all(|w| w.is_finite() && *w >= 0.0);
    match usable.then(|| WeightedIndex::new(&weights).ok()).flatten() {
        Some(dist) => dist.sample(rng),
        None => rng.random_range(0..normalized.len()),
    }
}

/// Deterministic removal rule for [`model_seq`].
#[derive(Debug, Clone, Copy)]
pub enum RemovalRule<'a> {
    /// Drop the least important variable.
    Importance(&'a ImportanceProfile),
    /// Drop the most expensive variable (smallest `1/b`).
    Cost,
    /// Drop the variable with the smallest normalized importance.
    NormalizedImportance {
        importance: &'a ImportanceProfile,
        gamma: f64,
    },
}

impl RemovalRule<'_> {
    fn kind(&self) -> SequenceKind {
        match self {
            RemovalRule::Importance(_) => SequenceKind::ByImportance,
            RemovalRule::Cost => SequenceKind::ByCost,
            RemovalRule::NormalizedImportance { .. } => SequenceKind::BySampling,
        }
    }

    /// The variable to drop; ties go to the smallest index.
    fn pick(&self, vars: &VarSet, profile: &CostProfile) -> Result<usize> {
        let mut best: Option<(usize, f64)> = None;
        for v in vars.iter() {
            let w = match self {
                RemovalRule::Importance(imp) => imp.get(v),
                // argmin of 1/b is argmax of b; compare exact cents
                RemovalRule::Cost => -(profile.cost(v)?.cents() as f64),
                RemovalRule::NormalizedImportance { importance, gamma } => {
                    normalized_importance(profile.cost(v)?.as_f64(), importance.get(v), *gamma)?
                }
            };
            if best.is_none_or(|(_, bw)| w < bw) {
                best = Some((v, w));
            }
        }
        Ok(best.expect("non-empty variable set").0)
    }
}

fn evaluate(eval: &SubsetEvaluator<'_>, profile: &CostProfile, vars: VarSet, source: Source) -> Result<ModelRecord> {
    let acc = eval.val_accuracy(&vars)?;
    ModelRecord::priced(vars, profile, acc, source)
}

fn check_profile(eval: &SubsetEvaluator<'_>, profile: &CostProfile) -> Result<()> {
    if profile.len() != eval.p() {
        return Err(Error::DimensionMismatch {
            expected: eval.p(),
            got: profile.len(),
        });
    }
    Ok(())
}

fn full_model_or_short(eval: &SubsetEvaluator<'_>, profile: &CostProfile, source: Source) -> Result<ModelRecord> {
    check_profile(eval, profile)?;
    let full = evaluate(eval, profile, VarSet::full(eval.p()), source)?;
    if eval.p() < 3 {
        return Err(Error::SequenceTooShort {
            p: eval.p(),
            full_model: Box::new(full),
        });
    }
    Ok(full)
}

/// Greedy backward elimination from the full model down to two variables.
pub fn model_seq(eval: &SubsetEvaluator<'_>, profile: &CostProfile, rule: RemovalRule<'_>) -> Result<SequenceRun> {
    let kind = rule.kind();
    let source = kind.source();
    let full = full_model_or_short(eval, profile, source)?;
    let mut vars = full.variables.clone();
    let mut records = vec![full];
    while vars.len() > 2 {
        vars = vars.without(rule.pick(&vars, profile)?);
        records.push(evaluate(eval, profile, vars.clone(), source)?);
    }
    Ok(SequenceRun {
        kind,
        trace: records.clone(),
        records,
        seed: 0,
    })
}

/// Backward elimination that samples the variable to drop with probability
/// proportional to `1 / (I/b)^gamma`. Models over `budget` are discarded.
pub fn model_seq_sampled(
    eval: &SubsetEvaluator<'_>,
    profile: &CostProfile,
    importance: &ImportanceProfile,
    gamma: f64,
    budget: Option<Cost>,
    seed: u64,
) -> Result<SequenceRun> {
    let source = Source::BySampling;
    let full = full_model_or_short(eval, profile, source)?;
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut vars = full.variables.clone();
    let mut trace = vec![full];
    while vars.len() > 2 {
        let remaining: Vec<usize> = vars.iter().collect();
        let f = remaining
            .iter()
            .map(|&v| normalized_importance(profile.cost(v)?.as_f64(), importance.get(v), gamma))
            .collect::<Result<Vec<_>>>()?;
        vars = vars.without(remaining[draw_removal(&f, &mut rng)]);
        trace.push(evaluate(eval, profile, vars.clone(), source)?);
    }
    let records = trace
        .iter()
        .filter(|r| budget.is_none_or(|b| r.cost <= b))
        .cloned()
        .collect();
    Ok(SequenceRun {
        kind: SequenceKind::BySampling,
        records,
        trace,
        seed,
    })
}

/// Which model scores each step of the regularization path.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum PathEngine {
    /// Retrain the forest on the step's active variables.
    Forest,
    /// Use the penalized logistic model itself.
    LogisticPath,
}

/// Follows the regularization path, one model per lambda step.
///
/// The forest engine skips steps with fewer than two active variables and
/// trains each distinct active set once. The logistic engine records every
/// step, including the intercept-only one, with test accuracy filled in.
pub fn model_seq_l(
    eval: &SubsetEvaluator<'_>,
    profile: &CostProfile,
    path: &PathCoefficients,
    engine: PathEngine,
) -> Result<SequenceRun> {
    check_profile(eval, profile)?;
    let source = Source::ByL1Path;
    let mut records = Vec::new();
    let mut seen = HashSet::new();
    for step in 0..path.n_steps() {
        let vars = path.active_variables(step);
        match engine {
            PathEngine::Forest => {
                if vars.len() < 2 || !seen.insert(vars.clone()) {
                    continue;
                }
                records.push(evaluate(eval, profile, vars, source)?);
            }
            PathEngine::LogisticPath => {
                let data = eval.data();
                let acc = path.accuracy_on(step, &data.validation)?;
                let mut r = ModelRecord::priced(vars, profile, acc, source)?;
                r.test_accuracy = Some(path.accuracy_on(step, &data.test)?);
                records.push(r);
            }
        }
    }
    Ok(SequenceRun {
        kind: SequenceKind::ByL1Path,
        trace: records.clone(),
        records,
        seed: 0,
    })
}

/// How the third generator picks the variable to drop.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum SamplingMode {
    /// Sample with probability inversely proportional to normalized importance.
    #[default]
    Random,
    /// Always drop the smallest normalized importance.
    Argmin,
}

#[derive(Debug, Clone, PartialEq)]
pub struct MsbConfig {
    /// Tree count, mtry and node size; the seed is derived from `seed`.
    pub forest: ForestParams,
    pub gamma: f64,
    pub path: PathSettings,
    pub sampling: SamplingMode,
    pub seed: u64,
}

impl Default for MsbConfig {
    fn default() -> Self {
        Self {
            forest: ForestParams::default(),
            gamma: DEFAULT_GAMMA,
            path: PathSettings::default(),
            sampling: SamplingMode::Random,
            seed: 0,
        }
    }
}

impl MsbConfig {
    /// Forest parameters carrying the engine seed. Exhaustive search run with
    /// these trains bit-identical forests for every subset msb visits.
    pub fn engine_params(&self) -> ForestParams {
        self.forest.with_seed(derive_seed(self.seed, 1))
    }

    pub fn importance_seed(&self) -> u64 {
        derive_seed(self.seed, 2)
    }

    pub fn sampling_seed(&self) -> u64 {
        derive_seed(self.seed, 3)
    }
}

#[derive(Debug, Clone)]
pub struct MsbResult {
    pub schedule: ModelSchedule,
    /// Member runs in merge order: cost, importance, sampling, L1 path.
    pub members: Vec<SequenceRun>,
    pub importance: ImportanceProfile,
    pub path: PathCoefficients,
}

impl MsbResult {
    /// Distinct subsets the engine was trained on across all members.
    pub fn visited_subsets(&self) -> Vec<VarSet> {
        let mut seen = HashSet::new();
        self.members
            .iter()
            .flat_map(|m| m.visited_subsets())
            .filter(|v| seen.insert(v.clone()))
            .collect()
    }

    pub fn member(&self, kind: SequenceKind) -> Option<&SequenceRun> {
        self.members.iter().find(|m| m.kind == kind)
    }
}

fn member<T>(name: &'static str, r: Result<T>) -> Result<T> {
    r.map_err(|e| Error::MemberFailed {
        member: name,
        source: Box::new(e),
    })
}

/// A run holding only the full model, for problems too small to shrink.
fn short_run(kind: SequenceKind, r: Result<SequenceRun>) -> Result<SequenceRun> {
    match r {
        Err(Error::SequenceTooShort { full_model, .. }) => {
            let mut full = *full_model;
            full.source = kind.source();
            Ok(SequenceRun {
                kind,
                records: vec![full.clone()],
                trace: vec![full],
                seed: 0,
            })
        }
        other => other,
    }
}

/// Fits the L1 logistic path on the training split.
pub fn training_path(data: &SplitData, settings: &PathSettings) -> Result<PathCoefficients> {
    let grid = make_lambda_grid(&data.train, settings.n_lambda, settings.eps_ratio)?;
    fit_l1_logistic_path(&data.train, &grid, settings)
}

/// The ensemble schedule: four member sequences merged and compressed, with
/// test accuracy filled in for every surviving model.
pub fn msb(data: &SplitData, profile: &CostProfile, config: &MsbConfig) -> Result<MsbResult> {
    if data.p() < 2 {
        return Err(Error::EngineNeedsTwoVariables { p: data.p() });
    }
    let eval = SubsetEvaluator::new(data, config.engine_params());
    check_profile(&eval, profile)?;

    let by_cost = member(
        "cost",
        short_run(SequenceKind::ByCost, model_seq(&eval, profile, RemovalRule::Cost)),
    )?;
    let importance = member("importance", eval.full_model_importance(config.importance_seed()))?;
    let by_importance = member(
        "importance",
        short_run(
            SequenceKind::ByImportance,
            model_seq(&eval, profile, RemovalRule::Importance(&importance)),
        ),
    )?;
    let sampled = match config.sampling {
        SamplingMode::Random => model_seq_sampled(
            &eval,
            profile,
            &importance,
            config.gamma,
            None,
            config.sampling_seed(),
        ),
        SamplingMode::Argmin => model_seq(
            &eval,
            profile,
            RemovalRule::NormalizedImportance {
                importance: &importance,
                gamma: config.gamma,
            },
        ),
    };
    let by_sampling = member("sampling", short_run(SequenceKind::BySampling, sampled))?;
    let path = member("l1path", training_path(data, &config.path))?;
    let by_path = member("l1path", model_seq_l(&eval, profile, &path, PathEngine::Forest))?;

    let members = vec![by_cost, by_importance, by_sampling, by_path];
    let parts: Vec<&[ModelRecord]> = members.iter().map(|m| m.records.as_slice()).collect();
    let mut schedule = merge(&parts, profile)?;
    for r in schedule.records_mut() {
        r.test_accuracy = Some(eval.test_accuracy(&r.variables)?);
    }
    Ok(MsbResult {
        schedule,
        members,
        importance,
        path,
    })
}

/// Baseline schedule from the L1 logistic path alone.
pub fn logitb_schedule(data: &SplitData, profile: &CostProfile, config: &MsbConfig) -> Result<ModelSchedule> {
    let path = training_path(data, &config.path)?;
    logitb_from_path(data, profile, &path)
}

pub fn logitb_from_path(data: &SplitData, profile: &CostProfile, path: &PathCoefficients) -> Result<ModelSchedule> {
    let eval = SubsetEvaluator::new(data, ForestParams::default());
    let run = model_seq_l(&eval, profile, path, PathEngine::LogisticPath)?;
    Ok(run.schedule())
}
