//! Variable costs, cost profiles and variable sets.
//!
//! Costs are held as integer hundredths of a currency unit so that sums,
//! comparisons and sorting are exact.

use std::fmt;
use std::iter::Sum;
use std::ops::{Add, Sub};
use std::str::FromStr;

use crate::error::{Error, Result};

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Default)]
pub struct Cost(i64);

impl Cost {
    pub const ZERO: Cost = Cost(0);

    pub fn from_cents(cents: i64) -> Self {
        Cost(cents)
    }

    /// Rounds to the nearest hundredth.
    pub fn from_units(value: f64) -> Self {
        Cost((value * 100.0).round() as i64)
    }

    pub fn cents(self) -> i64 {
        self.0
    }

    pub fn as_f64(self) -> f64 {
        self.0 as f64 / 100.0
    }
}

impl Add for Cost {
    type Output = Cost;
    fn add(self, rhs: Cost) -> Cost {
        Cost(self.0 + rhs.0)
    }
}

impl Sub for Cost {
    type Output = Cost;
    fn sub(self, rhs: Cost) -> Cost {
        Cost(self.0 - rhs.0)
    }
}

impl Sum for Cost {
    fn sum<I: Iterator<Item = Cost>>(iter: I) -> Cost {
        iter.fold(Cost::ZERO, Add::add)
    }
}

impl fmt::Display for Cost {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let sign = if self.0 < 0 { "-" } else { "" };
        let abs = self.0.unsigned_abs();
        write!(f, "{sign}{}.{:02}", abs / 100, abs % 100)
    }
}

impl FromStr for Cost {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        let s = s.trim();
        let value: f64 = s
            .parse()
            .map_err(|_| Error::InvalidConfig(format!("cannot parse cost '{s}'")))?;
        if !value.is_finite() {
            return Err(Error::InvalidCost(value));
        }
        Ok(Cost::from_units(value))
    }
}

/// Per-variable acquisition costs `b_1..b_p`, all strictly positive.
#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub struct CostProfile {
    costs: Vec<Cost>,
}

impl CostProfile {
    pub fn new(costs: Vec<Cost>) -> Result<Self> {
        if let Some(bad) = costs.iter().find(|c| c.cents() <= 0) {
            return Err(Error::InvalidCost(bad.as_f64()));
        }
        Ok(Self { costs })
    }

    pub fn from_units(values: &[f64]) -> Result<Self> {
        for &v in values {
            if !v.is_finite() || v <= 0.0 {
                return Err(Error::InvalidCost(v));
            }
        }
        Self::new(values.iter().map(|&v| Cost::from_units(v)).collect())
    }

    pub fn len(&self) -> usize {
        self.costs.len()
    }

    pub fn is_empty(&self) -> bool {
        self.costs.is_empty()
    }

    /// Cost of 1-based variable `index`.
    pub fn cost(&self, index: usize) -> Result<Cost> {
        if index == 0 || index > self.costs.len() {
            return Err(Error::InvalidVariableIndex {
                index,
                p: self.costs.len(),
            });
        }
        Ok(self.costs[index - 1])
    }

    pub fn costs(&self) -> &[Cost] {
        &self.costs
    }

    pub fn full_cost(&self) -> Cost {
        self.costs.iter().copied().sum()
    }
}

/// Sum of member costs. Exact and independent of order.
pub fn total_cost(variables: &VarSet, profile: &CostProfile) -> Result<Cost> {
    variables.iter().map(|i| profile.cost(i)).sum()
}

/// A set of 1-based variable indices, kept sorted and unique.
#[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord, Hash, Default)]
pub struct VarSet(Vec<usize>);

impl VarSet {
    pub fn new(mut indices: Vec<usize>) -> Self {
        indices.sort_unstable();
        indices.dedup();
        VarSet(indices)
    }

    pub fn empty() -> Self {
        VarSet(Vec::new())
    }

    /// `{1, ..., p}`
    pub fn full(p: usize) -> Self {
        VarSet((1..=p).collect())
    }

    pub fn len(&self) -> usize {
        self.0.len()
    }

    pub fn is_empty(&self) -> bool {
        self.0.is_empty()
    }

    pub fn contains(&self, index: usize) -> bool {
        self.0.binary_search(&index).is_ok()
    }

    pub fn iter(&self) -> impl Iterator<Item = usize> + '_ {
        self.0.iter().copied()
    }

    pub fn as_slice(&self) -> &[usize] {
        &self.0
    }

    /// 0-based column positions, for slicing a feature matrix.
    pub fn columns(&self) -> Vec<usize> {
        self.0.iter().map(|i| i - 1).collect()
    }

    pub fn without(&self, index: usize) -> VarSet {
        VarSet(self.0.iter().copied().filter(|&i| i != index).collect())
    }

    pub fn union(&self, other: &VarSet) -> VarSet {
        VarSet::new(self.0.iter().chain(other.0.iter()).copied().collect())
    }

    pub fn is_subset(&self, other: &VarSet) -> bool {
        self.0.iter().all(|&i| other.contains(i))
    }

    pub fn check_range(&self, p: usize) -> Result<()> {
        match self.0.iter().find(|&&i| i == 0 || i > p) {
            Some(&index) => Err(Error::InvalidVariableIndex { index, p }),
            None => Ok(()),
        }
    }
}

impl FromIterator<usize> for VarSet {
    fn from_iter<T: IntoIterator<Item = usize>>(iter: T) -> Self {
        VarSet::new(iter.into_iter().collect())
    }
}

impl fmt::Display for VarSet {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        for (k, i) in self.0.iter().enumerate() {
            if k > 0 {
                f.write_str(";")?;
            }
            write!(f, "{i}")?;
        }
        Ok(())
    }
}

impl FromStr for VarSet {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        let s = s.trim();
        if s.is_empty() {
            return Ok(VarSet::empty());
        }
        s.split(';')
            .map(|t| {
                t.trim()
                    .parse::<usize>()
                    .map_err(|_| Error::InvalidSchedule(format!("bad variable index '{t}'")))
            })
            .collect::<Result<Vec<_>>>()
            .map(VarSet::new)
    }
}
