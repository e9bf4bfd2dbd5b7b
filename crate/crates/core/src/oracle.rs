//! Exhaustive search over variable subsets: the empirical optimal schedule
//! and the solution space it is drawn from.

use std::collections::HashSet;
use std::io::Write;

use rayon::prelude::*;

use crate::cost::{total_cost, Cost, CostProfile, VarSet};
use crate::data::SplitData;
use crate::engine::SubsetEvaluator;
use crate::error::{Error, Result};
use crate::forest::ForestParams;
use crate::schedule::{compress, ModelRecord, ModelSchedule, Source};

pub const MAX_EXHAUSTIVE_P: usize = 20;

#[derive(Debug, Clone, PartialEq)]
pub struct SpacePoint {
    pub subset: VarSet,
    pub cost: Cost,
    pub val_accuracy: f64,
}

/// Every evaluated subset with its cost and validation accuracy.
#[derive(Debug, Clone, PartialEq, Default)]
pub struct SolutionSpace {
    pub points: Vec<SpacePoint>,
}

impl SolutionSpace {
    pub fn len(&self) -> usize {
        self.points.len()
    }

    pub fn is_empty(&self) -> bool {
        self.points.is_empty()
    }

    /// Delimited dump, one `subset;cost;val_accuracy` triple per line. The
    /// subset itself is space-separated so the line splits cleanly on `;`.
    pub fn write_csv<W: Write>(&self, mut out: W) -> std::io::Result<()> {
        writeln!(out, "subset;cost;val_accuracy")?;
        for pt in &self.points {
            let subset: Vec<String> = pt.subset.iter().map(|i| i.to_string()).collect();
            writeln!(out, "{};{};{}", subset.join(" "), pt.cost, pt.val_accuracy)?;
        }
        Ok(())
    }
}

/// All subsets of `{1..p}` with at least `min_size` members, ordered by
/// size and then lexicographically.
pub fn enumerate_subsets(p: usize, min_size: usize) -> Result<Vec<VarSet>> {
    if p > MAX_EXHAUSTIVE_P {
        return Err(Error::ProblemTooLarge {
            p,
            cap: MAX_EXHAUSTIVE_P,
        });
    }
    let mut out = Vec::new();
    for size in min_size.max(1)..=p {
        let mut combo: Vec<usize> = (1..=size).collect();
        loop {
            out.push(VarSet::new(combo.clone()));
            // advance to the next combination in lexicographic order
            let Some(k) = (0..size).rev().find(|&k| combo[k] < p - (size - 1 - k)) else {
                break;
            };
            combo[k] += 1;
            for j in k + 1..size {
                combo[j] = combo[j - 1] + 1;
            }
        }
    }
    Ok(out)
}

/// Trains the engine on every subset of two or more variables and returns
/// the compressed frontier together with the full solution space.
pub fn exhaustive_schedule(
    data: &SplitData,
    profile: &CostProfile,
    params: &ForestParams,
) -> Result<(ModelSchedule, SolutionSpace)> {
    let p = data.p();
    if profile.len() != p {
        return Err(Error::DimensionMismatch {
            expected: p,
            got: profile.len(),
        });
    }
    let subsets = enumerate_subsets(p, 2)?;
    let eval = SubsetEvaluator::new(data, params.clone());
    let points = subsets
        .into_par_iter()
        .map(|subset| {
            let val_accuracy = eval.val_accuracy(&subset)?;
            let cost = total_cost(&subset, profile)?;
            Ok(SpacePoint {
                subset,
                cost,
                val_accuracy,
            })
        })
        .collect::<Result<Vec<_>>>()?;
    let space = SolutionSpace { points };
    Ok((frontier(&space), space))
}

/// Compressed frontier of a solution space. Points are put in canonical
/// subset order first, so equal-cost, equal-accuracy ties resolve the same way
/// whatever order the space was built in.
pub fn frontier(space: &SolutionSpace) -> ModelSchedule {
    let mut points: Vec<&SpacePoint> = space.points.iter().collect();
    points.sort_by(|a, b| a.subset.len().cmp(&b.subset.len()).then(a.subset.cmp(&b.subset)));
    let records: Vec<ModelRecord> = points
        .into_iter()
        .map(|pt| ModelRecord::new(pt.subset.clone(), pt.cost, pt.val_accuracy, Source::Oracle))
        .collect();
    compress(&records)
}

/// Share of the solution space covered by `visited`.
pub fn coverage_fraction(space: &SolutionSpace, visited: &[VarSet]) -> f64 {
    if space.is_empty() {
        return 0.0;
    }
    let universe: HashSet<&VarSet> = space.points.iter().map(|pt| &pt.subset).collect();
    let hit: HashSet<&VarSet> = visited.iter().filter(|v| universe.contains(v)).collect();
    hit.len() as f64 / space.len() as f64
}
