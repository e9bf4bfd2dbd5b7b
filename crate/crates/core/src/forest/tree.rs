//! Classification tree grown on a bootstrap resample with Gini splits.
//!
//! Every feature keeps the bootstrap slots sorted by value; a split stably
//! partitions each of these orders, so no node ever re-sorts.

use rand::seq::SliceRandom;
use rand::Rng;
use rand_chacha::ChaCha8Rng;

#[derive(Debug, Clone, PartialEq)]
pub enum Node {
    Split {
        feature: usize,
        threshold: f64,
        left: u32,
        right: u32,
    },
    /// 0-based class index.
    Leaf { class: usize },
}

#[derive(Debug, Clone, PartialEq)]
pub struct DecisionTree {
    pub(crate) nodes: Vec<Node>,
    /// Training rows, one entry per bootstrap draw.
    pub(crate) bootstrap: Vec<u32>,
}

impl DecisionTree {
    pub fn nodes(&self) -> &[Node] {
        &self.nodes
    }

    pub fn bootstrap_indices(&self) -> &[u32] {
        &self.bootstrap
    }

    /// 0-based class of the leaf reached by `x`.
    pub fn leaf_class(&self, x: &[f64]) -> usize {
        let mut at = 0usize;
        loop {
            match &self.nodes[at] {
                Node::Leaf { class } => return *class,
                Node::Split {
                    feature,
                    threshold,
                    left,
                    right,
                } => {
                    at = if x[*feature] <= *threshold {
                        *left as usize
                    } else {
                        *right as usize
                    };
                }
            }
        }
    }
}

/// Training data shared by all trees of one forest.
pub(crate) struct TrainingView<'a> {
    /// Column-major feature values.
    pub columns: &'a [Vec<f64>],
    /// Per feature, all row indices sorted by value (ties by row).
    pub presorted: &'a [Vec<u32>],
    /// 0-based class per row.
    pub labels: &'a [usize],
    pub n_classes: usize,
    pub mtry: usize,
    pub min_node_size: usize,
}

#[derive(Debug, Clone, Copy)]
pub(crate) struct SplitChoice {
    pub feature: usize,
    pub threshold: f64,
    /// Sum over children of `sum_k count_k^2 / child_size`; larger is purer.
    pub score: f64,
    /// Position (within the node range) of the last slot sent left.
    pub last_left: usize,
}

/// Weighted-Gini score of a two-way partition given class counts.
pub(crate) fn partition_score(left: &[usize], right: &[usize]) -> f64 {
    let side = |c: &[usize]| {
        let n: usize = c.iter().sum();
        if n == 0 {
            0.0
        } else {
            c.iter().map(|&k| (k * k) as f64).sum::<f64>() / n as f64
        }
    };
    side(left) + side(right)
}

/// Midpoint threshold that keeps `lo` on the left and `hi` on the right.
pub(crate) fn midpoint(lo: f64, hi: f64) -> f64 {
    let mid = lo + (hi - lo) / 2.0;
    if mid < hi {
        mid
    } else {
        lo
    }
}

pub(crate) fn majority(counts: &[usize]) -> usize {
    let mut best = 0;
    for (k, &c) in counts.iter().enumerate() {
        if c > counts[best] {
            best = k;
        }
    }
    best
}

struct Grower<'a> {
    view: &'a TrainingView<'a>,
    slot_row: Vec<u32>,
    slot_label: Vec<usize>,
    orders: Vec<Vec<u32>>,
    goes_left: Vec<bool>,
    scratch: Vec<u32>,
    nodes: Vec<Node>,
}

impl Grower<'_> {
    fn value(&self, feature: usize, slot: u32) -> f64 {
        self.view.columns[feature][self.slot_row[slot as usize] as usize]
    }

    fn best_split_on(&self, feature: usize, start: usize, end: usize, total: &[usize]) -> Option<SplitChoice> {
        let order = &self.orders[feature][start..end];
        let mut left = vec![0usize; total.len()];
        let mut right = total.to_vec();
        let mut best: Option<SplitChoice> = None;
        for k in 0..order.len() - 1 {
            let label = self.slot_label[order[k] as usize];
            left[label] += 1;
            right[label] -= 1;
            let lo = self.value(feature, order[k]);
            let hi = self.value(feature, order[k + 1]);
            if lo < hi {
                let score = partition_score(&left, &right);
                if best.is_none_or(|b| score > b.score) {
                    best = Some(SplitChoice {
                        feature,
                        threshold: midpoint(lo, hi),
                        score,
                        last_left: k,
                    });
                }
            }
        }
        best
    }

    fn grow(&mut self, rng: &mut ChaCha8Rng) {
        let n = self.slot_row.len();
        let p = self.view.columns.len();
        let mut features: Vec<usize> = (0..p).collect();
        self.nodes.push(Node::Leaf { class: 0 });
        let mut stack = vec![(0usize, 0usize, n)];
        while let Some((id, start, end)) = stack.pop() {
            let mut counts = vec![0usize; self.view.n_classes];
            for &s in &self.orders[0][start..end] {
                counts[self.slot_label[s as usize]] += 1;
            }
            let size = end - start;
            let pure = counts.iter().filter(|&&c| c > 0).count() <= 1;
            if pure || size <= self.view.min_node_size {
                self.nodes[id] = Node::Leaf {
                    class: majority(&counts),
                };
                continue;
            }

            // Draw candidates in random order; past the first mtry, keep
            // drawing only while no candidate has produced a valid split.
            features.shuffle(rng);
            let mut best: Option<SplitChoice> = None;
            for (drawn, &f) in features.iter().enumerate() {
                if drawn >= self.view.mtry && best.is_some() {
                    break;
                }
                if let Some(c) = self.best_split_on(f, start, end, &counts) {
                    if best.is_none_or(|b| c.score > b.score) {
                        best = Some(c);
                    }
                }
            }
            let Some(split) = best else {
                self.nodes[id] = Node::Leaf {
                    class: majority(&counts),
                };
                continue;
            };

            let mid = start + split.last_left + 1;
            for (k, &s) in self.orders[split.feature][start..end].iter().enumerate() {
                self.goes_left[s as usize] = k <= split.last_left;
            }
            for f in 0..p {
                if f == split.feature {
                    continue;
                }
                self.scratch.clear();
                let order = &mut self.orders[f][start..end];
                let mut w = 0;
                for k in 0..order.len() {
                    let s = order[k];
                    if self.goes_left[s as usize] {
                        order[w] = s;
                        w += 1;
                    } else {
                        self.scratch.push(s);
                    }
                }
                order[w..].copy_from_slice(&self.scratch);
            }

            let left = self.nodes.len();
            self.nodes.push(Node::Leaf { class: 0 });
            self.nodes.push(Node::Leaf { class: 0 });
            self.nodes[id] = Node::Split {
                feature: split.feature,
                threshold: split.threshold,
                left: left as u32,
                right: left as u32 + 1,
            };
            stack.push((left + 1, mid, end));
            stack.push((left, start, mid));
        }
    }
}

pub(crate) fn grow_tree(view: &TrainingView<'_>, rng: &mut ChaCha8Rng) -> DecisionTree {
    let n = view.labels.len();
    let mut draws = vec![0u32; n];
    for _ in 0..n {
        draws[rng.random_range(0..n)] += 1;
    }
    let mut first_slot = vec![0u32; n];
    let mut slot_row = Vec::with_capacity(n);
    for (row, &c) in draws.iter().enumerate() {
        first_slot[row] = slot_row.len() as u32;
        slot_row.extend(std::iter::repeat_n(row as u32, c as usize));
    }
    let slot_label = slot_row.iter().map(|&r| view.labels[r as usize]).collect();
    let orders = view
        .presorted
        .iter()
        .map(|sorted| {
            let mut order = Vec::with_capacity(n);
            for &row in sorted {
                let first = first_slot[row as usize];
                order.extend(first..first + draws[row as usize]);
            }
            order
        })
        .collect();

    let mut grower = Grower {
        view,
        slot_row,
        slot_label,
        orders,
        goes_left: vec![false; n],
        scratch: Vec::with_capacity(n),
        nodes: Vec::new(),
    };
    grower.grow(rng);
    DecisionTree {
        nodes: grower.nodes,
        bootstrap: grower.slot_row,
    }
}
