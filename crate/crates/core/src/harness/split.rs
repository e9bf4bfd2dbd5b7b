use rand::seq::SliceRandom;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

use crate::data::{Dataset, SplitData};
use crate::error::{Error, Result};

/// Row indices of a 60/20/20 train/validation/test partition.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct DatasetSplit {
    pub train: Vec<usize>,
    pub validation: Vec<usize>,
    pub test: Vec<usize>,
    pub seed: u64,
}

impl DatasetSplit {
    pub fn apply(&self, data: &Dataset) -> SplitData {
        SplitData {
            train: data.subset_rows(&self.train),
            validation: data.subset_rows(&self.validation),
            test: data.subset_rows(&self.test),
        }
    }
}

/// Seeded shuffle, then contiguous cuts. Validation and test each get
/// `n/5` rows rounded to the nearest integer; training takes the rest.
pub fn split_dataset(n: usize, seed: u64) -> Result<DatasetSplit> {
    if n < 5 {
        return Err(Error::DatasetTooSmall { n });
    }
    let mut rows: Vec<usize> = (0..n).collect();
    rows.shuffle(&mut ChaCha8Rng::seed_from_u64(seed));
    let held = (n as f64 / 5.0).round() as usize;
    let test = rows.split_off(n - held);
    let validation = rows.split_off(n - 2 * held);
    Ok(DatasetSplit {
        train: rows,
        validation,
        test,
        seed,
    })
}
