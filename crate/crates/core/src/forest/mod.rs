//! Random forest classifier: fully grown Gini trees on bootstrap resamples,
//! `mtry` candidate features per node, plurality vote.
//!
//! Each tree draws from its own RNG stream derived from the master seed, so
//! trees can be grown in parallel and the result does not depend on thread
//! scheduling.

mod importance;
mod tree;

pub use importance::{permutation_importance, ImportanceProfile};
pub use tree::{DecisionTree, Node};

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;

use crate::data::{derive_seed, Dataset};
use crate::error::{Error, Result};
use tree::{grow_tree, TrainingView};

#[derive(Debug, Clone, PartialEq)]
pub struct ForestParams {
    pub n_trees: usize,
    /// Candidate features per node; `None` means `ceil(sqrt(p))`.
    pub mtry: Option<usize>,
    pub min_node_size: usize,
    pub seed: u64,
}

impl Default for ForestParams {
    fn default() -> Self {
        Self {
            n_trees: 100,
            mtry: None,
            min_node_size: 1,
            seed: 0,
        }
    }
}

impl ForestParams {
    pub fn with_seed(&self, seed: u64) -> Self {
        Self {
            seed,
            ..self.clone()
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct Forest {
    trees: Vec<DecisionTree>,
    n_features: usize,
    n_classes: usize,
    mtry: usize,
    seed: u64,
}

pub fn default_mtry(p: usize) -> usize {
    (p as f64).sqrt().ceil() as usize
}

impl Forest {
    pub fn fit(data: &Dataset, params: &ForestParams) -> Result<Forest> {
        let p = data.p();
        if p < 2 {
            return Err(Error::EngineNeedsTwoVariables { p });
        }
        if data.n() == 0 {
            return Err(Error::EmptyDataset);
        }
        if params.n_trees == 0 {
            return Err(Error::InvalidConfig("a forest needs at least one tree".into()));
        }
        let mtry = params.mtry.unwrap_or_else(|| default_mtry(p)).clamp(1, p);
        let n_classes = data.n_classes.max(1);

        let columns: Vec<Vec<f64>> = (0..p).map(|j| data.x.column(j)).collect();
        if let Some(bad) = columns.iter().flatten().find(|v| v.is_nan()) {
            return Err(Error::InvalidConfig(format!("feature value {bad} is not a number")));
        }
        let presorted: Vec<Vec<u32>> = columns
            .iter()
            .map(|col| {
                let mut idx: Vec<u32> = (0..col.len() as u32).collect();
                idx.sort_by(|&a, &b| col[a as usize].total_cmp(&col[b as usize]).then(a.cmp(&b)));
                idx
            })
            .collect();
        let labels: Vec<usize> = data.y.iter().map(|&c| c - 1).collect();
        let view = TrainingView {
            columns: &columns,
            presorted: &presorted,
            labels: &labels,
            n_classes,
            mtry,
            min_node_size: params.min_node_size.max(1),
        };

        let trees = (0..params.n_trees)
            .into_par_iter()
            .map(|t| {
                let mut rng = ChaCha8Rng::seed_from_u64(derive_seed(params.seed, t as u64));
                grow_tree(&view, &mut rng)
            })
            .collect();

        Ok(Forest {
            trees,
            n_features: p,
            n_classes,
            mtry,
            seed: params.seed,
        })
    }

    pub fn trees(&self) -> &[DecisionTree] {
        &self.trees
    }

    pub fn n_features(&self) -> usize {
        self.n_features
    }

    pub fn mtry(&self) -> usize {
        self.mtry
    }

    pub fn seed(&self) -> u64 {
        self.seed
    }

    /// Plurality vote over trees; ties go to the smaller label.
    pub fn predict_class(&self, x: &[f64]) -> Result<usize> {
        if x.len() != self.n_features {
            return Err(Error::DimensionMismatch {
                expected: self.n_features,
                got: x.len(),
            });
        }
        let mut votes = vec![0usize; self.n_classes];
        for tree in &self.trees {
            votes[tree.leaf_class(x)] += 1;
        }
        Ok(tree::majority(&votes) + 1)
    }

    /// Fraction of rows whose predicted class equals the label.
    pub fn accuracy_on(&self, data: &Dataset) -> Result<f64> {
        if data.n() == 0 {
            return Err(Error::EmptyEvaluationSet);
        }
        if data.p() != self.n_features {
            return Err(Error::DimensionMismatch {
                expected: self.n_features,
                got: data.p(),
            });
        }
        let mut correct = 0usize;
        for (i, &label) in data.y.iter().enumerate() {
            if self.predict_class(data.x.row(i))? == label {
                correct += 1;
            }
        }
        Ok(correct as f64 / data.n() as f64)
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::data::Matrix;

    fn dataset(rows: &[(f64, f64, usize)]) -> Dataset {
        let x = Matrix::from_rows(&rows.iter().map(|r| vec![r.0, r.1]).collect::<Vec<_>>()).unwrap();
        Dataset::new(x, rows.iter().map(|r| r.2).collect()).unwrap()
    }

    fn stump(feature: usize, threshold: f64, left: usize, right: usize) -> DecisionTree {
        DecisionTree {
            nodes: vec![
                Node::Split {
                    feature,
                    threshold,
                    left: 1,
                    right: 2,
                },
                Node::Leaf { class: left },
                Node::Leaf { class: right },
            ],
            bootstrap: vec![],
        }
    }

    fn forest_of(trees: Vec<DecisionTree>) -> Forest {
        Forest {
            trees,
            n_features: 2,
            n_classes: 3,
            mtry: 1,
            seed: 0,
        }
    }

    #[test]
    fn constant_labels_give_constant_forest() {
        let data = dataset(&[(0.0, 1.0, 2), (1.0, 0.0, 2), (2.0, 2.0, 2), (3.0, 1.0, 2)]);
        let f = Forest::fit(&data, &ForestParams { n_trees: 5, ..Default::default() }).unwrap();
        assert_eq!(f.predict_class(&[10.0, -4.0]).unwrap(), 2);
        assert_eq!(f.accuracy_on(&data).unwrap(), 1.0);
    }

    #[test]
    fn single_tree_forest_returns_its_leaf() {
        let f = forest_of(vec![stump(0, 0.5, 1, 0)]);
        assert_eq!(f.predict_class(&[1.0, 0.0]).unwrap(), 1);
        assert_eq!(f.predict_class(&[0.0, 0.0]).unwrap(), 2);
    }

    #[test]
    fn majority_and_tie_votes() {
        // leaf classes are 0-based: votes (1, 2, 1)
        let f = forest_of(vec![stump(0, 0.5, 0, 0), stump(0, 0.5, 1, 1), stump(0, 0.5, 0, 0)]);
        assert_eq!(f.predict_class(&[0.0, 0.0]).unwrap(), 1);
        // votes (2, 1): tie goes to 1
        let f = forest_of(vec![stump(0, 0.5, 1, 1), stump(0, 0.5, 0, 0)]);
        assert_eq!(f.predict_class(&[0.0, 0.0]).unwrap(), 1);
    }

    #[test]
    fn accuracy_counts() {
        let f = forest_of(vec![stump(0, 0.5, 0, 1)]);
        let all_right = dataset(&[(0.0, 0.0, 1), (1.0, 0.0, 2)]);
        assert_eq!(f.accuracy_on(&all_right).unwrap(), 1.0);
        let all_wrong = dataset(&[(0.0, 0.0, 2), (1.0, 0.0, 1)]);
        assert_eq!(f.accuracy_on(&all_wrong).unwrap(), 0.0);
        let three_of_four = dataset(&[(0.0, 0.0, 1), (1.0, 0.0, 2), (0.2, 0.0, 1), (0.9, 0.0, 1)]);
        assert_eq!(f.accuracy_on(&three_of_four).unwrap(), 0.75);
        let empty = Dataset::new(Matrix::new(0, 2, vec![]).unwrap(), vec![]).unwrap();
        assert!(matches!(f.accuracy_on(&empty), Err(Error::EmptyEvaluationSet)));
    }

    #[test]
    fn dimension_checks() {
        let f = forest_of(vec![stump(0, 0.5, 0, 1)]);
        assert!(matches!(
            f.predict_class(&[1.0]),
            Err(Error::DimensionMismatch { expected: 2, got: 1 })
        ));
    }

    #[test]
    fn needs_two_variables() {
        let x = Matrix::new(3, 1, vec![0.0, 1.0, 2.0]).unwrap();
        let data = Dataset::new(x, vec![1, 2, 1]).unwrap();
        assert!(matches!(
            Forest::fit(&data, &ForestParams::default()),
            Err(Error::EngineNeedsTwoVariables { p: 1 })
        ));
    }
}
