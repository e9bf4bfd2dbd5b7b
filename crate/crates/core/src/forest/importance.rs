//! Permutation importance on a held-out set.

use rand::seq::SliceRandom;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

use super::Forest;
use crate::data::{derive_seed, Dataset};
use crate::error::{Error, Result};

/// Accuracy drop per feature when that feature's column is shuffled.
#[derive(Debug, Clone, PartialEq)]
pub struct ImportanceProfile {
    pub importances: Vec<f64>,
}

impl ImportanceProfile {
    pub fn len(&self) -> usize {
        self.importances.len()
    }

    pub fn is_empty(&self) -> bool {
        self.importances.is_empty()
    }

    /// Importance of 1-based variable `index`.
    pub fn get(&self, index: usize) -> f64 {
        self.importances[index - 1]
    }
}

/// One seeded shuffle per feature; the score is baseline accuracy minus
/// accuracy with that column permuted.
pub fn permutation_importance(forest: &Forest, validation: &Dataset, seed: u64) -> Result<ImportanceProfile> {
    if validation.n() == 0 {
        return Err(Error::EmptyEvaluationSet);
    }
    let baseline = forest.accuracy_on(validation)?;
    let mut importances = Vec::with_capacity(validation.p());
    for j in 0..validation.p() {
        let mut column = validation.x.column(j);
        let mut rng = ChaCha8Rng::seed_from_u64(derive_seed(seed, j as u64));
        column.shuffle(&mut rng);
        let mut permuted = validation.clone();
        for (i, v) in column.into_iter().enumerate() {
            permuted.x.set(i, j, v);
        }
        importances.push(baseline - forest.accuracy_on(&permuted)?);
    }
    Ok(ImportanceProfile { importances })
}
