//! Model records and model schedules.
//!
//! A schedule is the cost/accuracy Pareto frontier of a set of trained
//! models: sorted by cost, with validation accuracy strictly increasing.
//! Selection only ever looks at validation accuracy; test accuracy is carried
//! along for reporting.

use std::collections::HashMap;
use std::fmt;
use std::io::{BufRead, Write};
use std::str::FromStr;

use crate::cost::{total_cost, Cost, CostProfile, VarSet};
use crate::error::{Error, Result};

/// Which generator produced a record.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum Source {
    ByImportance,
    ByCost,
    BySampling,
    ByL1Path,
    Oracle,
}

impl Source {
    pub fn tag(self) -> &'static str {
        match self {
            Source::ByImportance => "by_importance",
            Source::ByCost => "by_cost",
            Source::BySampling => "by_sampling",
            Source::ByL1Path => "by_l1_path",
            Source::Oracle => "oracle",
        }
    }
}

impl fmt::Display for Source {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.tag())
    }
}

impl FromStr for Source {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        Ok(match s.trim() {
            "by_importance" => Source::ByImportance,
            "by_cost" => Source::ByCost,
            "by_sampling" => Source::BySampling,
            "by_l1_path" => Source::ByL1Path,
            "oracle" => Source::Oracle,
            other => return Err(Error::InvalidSchedule(format!("unknown source '{other}'"))),
        })
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct ModelRecord {
    pub variables: VarSet,
    pub cost: Cost,
    pub val_accuracy: f64,
    pub test_accuracy: Option<f64>,
    pub source: Source,
}

impl ModelRecord {
    pub fn new(variables: VarSet, cost: Cost, val_accuracy: f64, source: Source) -> Self {
        Self {
            variables,
            cost,
            val_accuracy,
            test_accuracy: None,
            source,
        }
    }

    /// Builds a record whose cost is computed from `profile`.
    pub fn priced(
        variables: VarSet,
        profile: &CostProfile,
        val_accuracy: f64,
        source: Source,
    ) -> Result<Self> {
        let cost = total_cost(&variables, profile)?;
        Ok(Self::new(variables, cost, val_accuracy, source))
    }
}

/// `a` dominates `b` when it costs no more, is at least as accurate, and is
/// strictly better on one of the two.
pub fn dominates(a: &ModelRecord, b: &ModelRecord) -> bool {
    a.cost <= b.cost
        && a.val_accuracy >= b.val_accuracy
        && (a.cost < b.cost || a.val_accuracy > b.val_accuracy)
}

#[derive(Debug, Clone, PartialEq, Default)]
pub struct ModelSchedule {
    records: Vec<ModelRecord>,
}

impl ModelSchedule {
    pub fn empty() -> Self {
        Self::default()
    }

    /// Wraps records that already form a schedule, checking every invariant.
    pub fn from_records(records: Vec<ModelRecord>) -> Result<Self> {
        let schedule = Self { records };
        schedule.validate()?;
        Ok(schedule)
    }

    pub fn records(&self) -> &[ModelRecord] {
        &self.records
    }

    pub fn records_mut(&mut self) -> &mut [ModelRecord] {
        &mut self.records
    }

    pub fn into_records(self) -> Vec<ModelRecord> {
        self.records
    }

    pub fn len(&self) -> usize {
        self.records.len()
    }

    pub fn is_empty(&self) -> bool {
        self.records.is_empty()
    }

    pub fn validate(&self) -> Result<()> {
        for r in &self.records {
            for acc in std::iter::once(r.val_accuracy).chain(r.test_accuracy) {
                if !(0.0..=1.0).contains(&acc) {
                    return Err(Error::InvalidSchedule(format!(
                        "accuracy {acc} outside [0, 1]"
                    )));
                }
            }
        }
        for w in self.records.windows(2) {
            if w[1].cost <= w[0].cost {
                return Err(Error::InvalidSchedule(format!(
                    "costs not strictly increasing ({} then {})",
                    w[0].cost, w[1].cost
                )));
            }
            if w[1].val_accuracy <= w[0].val_accuracy {
                return Err(Error::InvalidSchedule(format!(
                    "accuracy not strictly increasing ({} then {})",
                    w[0].val_accuracy, w[1].val_accuracy
                )));
            }
        }
        let mut seen = std::collections::HashSet::new();
        for r in &self.records {
            if !seen.insert(&r.variables) {
                return Err(Error::InvalidSchedule(format!(
                    "variable set {} appears twice",
                    r.variables
                )));
            }
        }
        Ok(())
    }

    /// Checks that every record's cost is the exact total of its variables.
    pub fn validate_costs(&self, profile: &CostProfile) -> Result<()> {
        for r in &self.records {
            if total_cost(&r.variables, profile)? != r.cost {
                return Err(Error::InconsistentProfile);
            }
        }
        Ok(())
    }

    /// The most expensive record whose cost fits within `budget`.
    pub fn best_under_budget(&self, budget: Cost) -> Result<&ModelRecord> {
        let fit = self.records.partition_point(|r| r.cost <= budget);
        if fit == 0 {
            return Err(Error::NoFeasibleModel {
                budget: budget.to_string(),
            });
        }
        Ok(&self.records[fit - 1])
    }

    pub fn write_csv<W: Write>(&self, mut out: W) -> std::io::Result<()> {
        writeln!(out, "cost,val_accuracy,test_accuracy,variables,source")?;
        for r in &self.records {
            let test = r.test_accuracy.map(|a| a.to_string()).unwrap_or_default();
            writeln!(
                out,
                "{},{},{},{},{}",
                r.cost, r.val_accuracy, test, r.variables, r.source
            )?;
        }
        Ok(())
    }

    /// Reads a schedule table and re-validates the schedule invariants.
    pub fn read_csv<R: BufRead>(input: R) -> Result<Self> {
        let mut lines = input.lines().enumerate();
        match lines.next() {
            Some((_, Ok(h))) if h.trim() == "cost,val_accuracy,test_accuracy,variables,source" => {}
            Some((_, Ok(h))) => {
                return Err(Error::InvalidSchedule(format!("unexpected header '{h}'")))
            }
            Some((_, Err(e))) => return Err(Error::InvalidSchedule(e.to_string())),
            None => return Err(Error::InvalidSchedule("missing header".into())),
        }
        let mut records = Vec::new();
        for (lineno, line) in lines {
            let line = line.map_err(|e| Error::InvalidSchedule(e.to_string()))?;
            if line.trim().is_empty() {
                continue;
            }
            let fields: Vec<&str> = line.split(',').collect();
            let bad = |col: usize, msg: &str| Error::ParseError {
                row: lineno,
                col,
                msg: msg.to_string(),
            };
            if fields.len() != 5 {
                return Err(bad(0, "expected 5 fields"));
            }
            let cost: Cost = fields[0].parse().map_err(|_| bad(1, "bad cost"))?;
            let val_accuracy: f64 = fields[1].trim().parse().map_err(|_| bad(2, "bad accuracy"))?;
            let test_accuracy = match fields[2].trim() {
                "" => None,
                t => Some(t.parse::<f64>().map_err(|_| bad(3, "bad accuracy"))?),
            };
            let variables: VarSet = fields[3].parse().map_err(|_| bad(4, "bad variables"))?;
            let source: Source = fields[4].parse().map_err(|_| bad(5, "bad source"))?;
            records.push(ModelRecord {
                variables,
                cost,
                val_accuracy,
                test_accuracy,
                source,
            });
        }
        Self::from_records(records)
    }
}

impl AsRef<[ModelRecord]> for ModelSchedule {
    fn as_ref(&self) -> &[ModelRecord] {
        &self.records
    }
}

/// Keeps, per distinct variable set, the first record with the highest
/// validation accuracy. Input order is otherwise preserved.
fn dedupe_by_variables<'a, I>(records: I) -> Vec<ModelRecord>
where
    I: IntoIterator<Item = &'a ModelRecord>,
{
    let mut out: Vec<ModelRecord> = Vec::new();
    let mut slot: HashMap<VarSet, usize> = HashMap::new();
    for r in records {
        match slot.get(&r.variables) {
            Some(&k) => {
                if r.val_accuracy > out[k].val_accuracy {
                    out[k] = r.clone();
                }
            }
            None => {
                slot.insert(r.variables.clone(), out.len());
                out.push(r.clone());
            }
        }
    }
    out
}

/// Reduces a record list to its Pareto frontier (minimize cost, maximize
/// validation accuracy), sorted by cost.
///
/// Records with identical cost and accuracy but different variable sets keep
/// the one that appears first in the input.
pub fn compress(records: &[ModelRecord]) -> ModelSchedule {
    let mut pool = dedupe_by_variables(records);
    // stable: equal (cost, accuracy) keep input order
    pool.sort_by(|a, b| {
        a.cost
            .cmp(&b.cost)
            .then(b.val_accuracy.total_cmp(&a.val_accuracy))
    });
    let mut frontier: Vec<ModelRecord> = Vec::new();
    for r in pool {
        match frontier.last() {
            Some(last) if r.val_accuracy <= last.val_accuracy => {}
            _ => frontier.push(r),
        }
    }
    ModelSchedule { records: frontier }
}

/// Union of several record lists followed by compression.
///
/// Every record must be priced under `profile`. Inputs are taken in the
/// order given, which decides ties between equal-cost, equal-accuracy records.
pub fn merge<S: AsRef<[ModelRecord]>>(parts: &[S], profile: &CostProfile) -> Result<ModelSchedule> {
    for part in parts {
        for r in part.as_ref() {
            if total_cost(&r.variables, profile).ok() != Some(r.cost) {
                return Err(Error::InconsistentProfile);
            }
        }
    }
    let all = dedupe_by_variables(parts.iter().flat_map(|p| p.as_ref().iter()));
    Ok(compress(&all))
}

#[cfg(test)]
mod tests {
    use super::*;

    fn rec(vars: &[usize], cost: f64, acc: f64) -> ModelRecord {
        ModelRecord::new(
            VarSet::new(vars.to_vec()),
            Cost::from_units(cost),
            acc,
            Source::ByCost,
        )
    }

    fn points(s: &ModelSchedule) -> Vec<(f64, f64)> {
        s.records()
            .iter()
            .map(|r| (r.cost.as_f64(), r.val_accuracy))
            .collect()
    }

    #[test]
    fn dominance_cases() {
        assert!(dominates(&rec(&[1], 10.0, 0.8), &rec(&[2], 20.0, 0.7)));
        assert!(!dominates(&rec(&[1], 10.0, 0.8), &rec(&[2], 10.0, 0.8)));
        assert!(!dominates(&rec(&[1], 30.0, 0.9), &rec(&[2], 10.0, 0.8)));
    }

    #[test]
    fn compress_drops_dominated_record() {
        let s = compress(&[
            rec(&[1], 10.0, 0.8),
            rec(&[2], 20.0, 0.7),
            rec(&[3], 30.0, 0.9),
        ]);
        assert_eq!(points(&s), vec![(10.0, 0.8), (30.0, 0.9)]);
        s.validate().unwrap();
    }

    #[test]
    fn compress_singleton_and_empty() {
        assert_eq!(points(&compress(&[rec(&[1], 10.0, 0.8)])), vec![(10.0, 0.8)]);
        assert!(compress(&[]).is_empty());
    }

    #[test]
    fn compress_tie_keeps_first() {
        let s = compress(&[rec(&[2], 10.0, 0.8), rec(&[1], 10.0, 0.8)]);
        assert_eq!(s.len(), 1);
        assert_eq!(s.records()[0].variables.as_slice(), &[2]);
    }

    #[test]
    fn compress_dedupes_keeping_best_accuracy() {
        let s = compress(&[rec(&[1, 2], 10.0, 0.6), rec(&[1, 2], 10.0, 0.7)]);
        assert_eq!(points(&s), vec![(10.0, 0.7)]);
    }

    #[test]
    fn merge_two_lists() {
        let profile = CostProfile::from_units(&[5.0, 5.0, 10.0, 10.0]).unwrap();
        let a = vec![rec(&[3], 10.0, 0.8)];
        let b = vec![rec(&[1], 5.0, 0.6), rec(&[4], 10.0, 0.7)];
        let m = merge(&[a.clone(), b], &profile).unwrap();
        assert_eq!(points(&m), vec![(5.0, 0.6), (10.0, 0.8)]);

        let empty: Vec<ModelRecord> = Vec::new();
        assert_eq!(merge(&[a.clone(), empty], &profile).unwrap(), compress(&a));
    }

    #[test]
    fn merge_rejects_mixed_profiles() {
        let profile = CostProfile::from_units(&[5.0, 5.0]).unwrap();
        let a = vec![rec(&[1], 7.0, 0.8)];
        assert!(matches!(
            merge(&[a], &profile),
            Err(Error::InconsistentProfile)
        ));
    }

    fn npp_listing() -> ModelSchedule {
        let rows: [(f64, f64, &[usize]); 6] = [
            (417.0, 0.9907834, &[4, 5, 8, 11, 13, 14, 15]),
            (385.0, 0.9874319, &[4, 5, 11, 13, 14, 15]),
            (340.0, 0.9773775, &[4, 11, 13, 14, 15]),
            (248.0, 0.9706745, &[11, 13, 14, 15]),
            (171.0, 0.9400922, &[11, 14, 15]),
            (119.0, 0.8504399, &[11, 14]),
        ];
        compress(
            &rows
                .iter()
                .map(|(c, a, v)| ModelRecord::new(VarSet::new(v.to_vec()), Cost::from_units(*c), *a, Source::ByImportance))
                .collect::<Vec<_>>(),
        )
    }

    #[test]
    fn budget_lookup_on_listing() {
        let s = npp_listing();
        assert_eq!(s.len(), 6);
        let r = s.best_under_budget(Cost::from_units(200.0)).unwrap();
        assert_eq!((r.cost, r.val_accuracy), (Cost::from_units(171.0), 0.9400922));
        let r = s.best_under_budget(Cost::from_units(417.0)).unwrap();
        assert_eq!((r.cost, r.val_accuracy), (Cost::from_units(417.0), 0.9907834));
        // anywhere in [171, 248)
        let r = s.best_under_budget(Cost::from_cents(24799)).unwrap();
        assert_eq!(r.val_accuracy, 0.9400922);
        assert!(matches!(
            s.best_under_budget(Cost::from_units(100.0)),
            Err(Error::NoFeasibleModel { .. })
        ));
    }

    #[test]
    fn csv_round_trip() {
        let mut s = npp_listing();
        s.records_mut()[2].test_accuracy = Some(0.75);
        let mut buf = Vec::new();
        s.write_csv(&mut buf).unwrap();
        let text = String::from_utf8(buf.clone()).unwrap();
        assert!(text.starts_with("cost,val_accuracy,test_accuracy,variables,source\n"));
        assert!(text.contains("119.00,0.8504399,,11;14,by_importance"));
        let back = ModelSchedule::read_csv(&buf[..]).unwrap();
        assert_eq!(back, s);
    }

    #[test]
    fn read_rejects_non_monotone_table() {
        let text = "cost,val_accuracy,test_accuracy,variables,source\n\
                    10.00,0.9,,1,by_cost\n20.00,0.8,,2,by_cost\n";
        assert!(ModelSchedule::read_csv(text.as_bytes()).is_err());
    }
}
