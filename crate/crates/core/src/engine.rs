//! Trains and scores the forest engine on variable subsets of one split.

use std::collections::HashMap;
use std::sync::Mutex;

use crate::cost::VarSet;
use crate::data::{subset_seed, SplitData};
use crate::error::Result;
use crate::forest::{permutation_importance, Forest, ForestParams, ImportanceProfile};

/// Forest trainer bound to a data split. The forest for a subset is seeded
/// from `(params.seed, subset)` only, so every caller that trains on a given
/// subset gets the same model. Validation accuracies are memoized.
pub struct SubsetEvaluator<'a> {
    data: &'a SplitData,
    params: ForestParams,
    memo: Mutex<HashMap<VarSet, f64>>,
}

impl<'a> SubsetEvaluator<'a> {
    pub fn new(data: &'a SplitData, params: ForestParams) -> Self {
        Self {
            data,
            params,
            memo: Mutex::new(HashMap::new()),
        }
    }

    pub fn data(&self) -> &SplitData {
        self.data
    }

    pub fn params(&self) -> &ForestParams {
        &self.params
    }

    pub fn p(&self) -> usize {
        self.data.p()
    }

    pub fn fit(&self, vars: &VarSet) -> Result<Forest> {
        vars.check_range(self.p())?;
        let params = self.params.with_seed(subset_seed(self.params.seed, vars));
        Forest::fit(&self.data.train.subset_vars(vars), &params)
    }

    pub fn val_accuracy(&self, vars: &VarSet) -> Result<f64> {
        if let Some(&acc) = self.memo.lock().expect("memo lock").get(vars) {
            return Ok(acc);
        }
        let forest = self.fit(vars)?;
        let acc = forest.accuracy_on(&self.data.validation.subset_vars(vars))?;
        self.memo
            .lock()
            .expect("memo lock")
            .insert(vars.clone(), acc);
        Ok(acc)
    }

    /// Retrains on the training split and scores the test split.
    pub fn test_accuracy(&self, vars: &VarSet) -> Result<f64> {
        let forest = self.fit(vars)?;
        forest.accuracy_on(&self.data.test.subset_vars(vars))
    }

    /// Permutation importance of the full model on the validation split.
    pub fn full_model_importance(&self, seed: u64) -> Result<ImportanceProfile> {
        let full = VarSet::full(self.p());
        let forest = self.fit(&full)?;
        permutation_importance(&forest, &self.data.validation, seed)
    }

    /// Number of distinct subsets trained so far.
    pub fn evaluated(&self) -> usize {
        self.memo.lock().expect("memo lock").len()
    }
}
