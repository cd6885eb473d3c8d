use rand::seq::index::sample;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use super::{Confusion, Objective, Samples};
use crate::error::{Error, Result};

pub const TREE_GRID: [usize; 3] = [10, 50, 100];
pub const MIN_LEAF: usize = 2;

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum TreeNode {
    Leaf {
        positive: bool,
    },
    /// Rows with `x[feature] <= threshold` go left.
    Split {
        feature: usize,
        threshold: f64,
        left: usize,
        right: usize,
    },
}

/// CART tree on Gini impurity; node 0 is the root.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Tree {
    pub nodes: Vec<TreeNode>,
}

impl Tree {
    pub fn predict(&self, x: &[f64]) -> bool {
        let mut at = 0;
        loop {
            match self.nodes[at] {
                TreeNode::Leaf { positive } => return positive,
                TreeNode::Split {
                    feature,
                    threshold,
                    left,
                    right,
                } => at = if x[feature] <= threshold { left } else { right },
            }
        }
    }
}

/// Score is the fraction of trees voting positive.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ForestModel {
    pub trees: Vec<Tree>,
}

impl ForestModel {
    pub fn score(&self, x: &[f64]) -> f64 {
        self.trees.iter().filter(|t| t.predict(x)).count() as f64 / self.trees.len() as f64
    }
}

struct Builder<'a> {
    data: &'a Samples,
    features_per_split: usize,
    nodes: Vec<TreeNode>,
}

impl Builder<'_> {
    fn leaf(&mut self, rows: &[usize]) -> usize {
        let pos = rows.iter().filter(|&&i| self.data.label(i)).count();
        self.nodes.push(TreeNode::Leaf {
            positive: 2 * pos >= rows.len(),
        });
        self.nodes.len() - 1
    }

    fn grow(&mut self, rows: &mut [usize], rng: &mut ChaCha8Rng) -> usize {
        let pos = rows.iter().filter(|&&i| self.data.label(i)).count();
        if pos == 0 || pos == rows.len() || rows.len() < 2 * MIN_LEAF {
            return self.leaf(rows);
        }
        let Some((feature, threshold)) = self.best_split(rows, rng) else {
            return self.leaf(rows);
        };
        let at = self.nodes.len();
        self.nodes.push(TreeNode::Leaf { positive: false });
        let mid = partition(rows, |&i| self.data.row(i)[feature] <= threshold);
        let (l, r) = rows.split_at_mut(mid);
        let left = self.grow(l, rng);
        let right = self.grow(r, rng);
        self.nodes[at] = TreeNode::Split {
            feature,
            threshold,
            left,
            right,
        };
        at
    }

    /// Lowest weighted Gini over a random feature subset; both sides keep at
    /// least `MIN_LEAF` rows.
    fn best_split(&self, rows: &[usize], rng: &mut ChaCha8Rng) -> Option<(usize, f64)> {
        let n = rows.len();
        let total_pos = rows.iter().filter(|&&i| self.data.label(i)).count();
        let mut best: Option<(f64, usize, f64)> = None;
        let mut sorted: Vec<(f64, bool)> = Vec::with_capacity(n);
        for feature in sample(rng, self.data.dim(), self.features_per_split).into_vec() {
            sorted.clear();
            sorted.extend(rows.iter().map(|&i| (self.data.row(i)[feature], self.data.label(i))));
            sorted.sort_by(|a, b| a.0.total_cmp(&b.0));
            let mut left_pos = 0;
            for k in 1..n {
                left_pos += usize::from(sorted[k - 1].1);
                if sorted[k - 1].0 == sorted[k].0 || k < MIN_LEAF || n - k < MIN_LEAF {
                    continue;
                }
                let impurity = gini(left_pos, k) * k as f64 + gini(total_pos - left_pos, n - k) * (n - k) as f64;
                if best.is_none_or(|(b, _, _)| impurity < b) {
                    best = Some((impurity, feature, (sorted[k - 1].0 + sorted[k].0) / 2.0));
                }
            }
        }
        best.map(|(_, f, t)| (f, t))
    }
}

fn gini(pos: usize, n: usize) -> f64 {
    let p = pos as f64 / n as f64;
    2.0 * p * (1.0 - p)
}

fn partition(rows: &mut [usize], left: impl Fn(&usize) -> bool) -> usize {
    let mut mid = 0;
    for i in 0..rows.len() {
        if left(&rows[i]) {
            rows.swap(mid, i);
            mid += 1;
        }
    }
    mid
}

/// Grows `trees` bootstrap trees with `sqrt(dim)` candidate features per split.
pub fn fit_forest(data: &Samples, trees: usize, seed: u64) -> Result<ForestModel> {
    if data.is_empty() || trees == 0 {
        return Err(Error::InvalidArgument("forest needs rows and at least one tree".into()));
    }
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let features_per_split = ((data.dim() as f64).sqrt().floor() as usize).clamp(1, data.dim());
    let n = data.len();
    let mut out = Vec::with_capacity(trees);
    for _ in 0..trees {
        let mut rows: Vec<usize> = (0..n).map(|_| rng.random_range(0..n)).collect();
        let mut b = Builder {
            data,
            features_per_split,
            nodes: Vec::new(),
        };
        b.grow(&mut rows, &mut rng);
        out.push(Tree { nodes: b.nodes });
    }
    Ok(ForestModel { trees: out })
}

/// Sweeps the tree count; smaller forests are prefixes of the largest.
pub fn train(train: &Samples, validation: &Samples, objective: Objective, seed: u64) -> Result<ForestModel> {
    let max = TREE_GRID[TREE_GRID.len() - 1];
    let full = fit_forest(train, max, seed)?;
    let votes: Vec<Vec<bool>> = validation
        .rows()
        .map(|r| full.trees.iter().map(|t| t.predict(r)).collect())
        .collect();
    let mut best: Option<(f64, usize)> = None;
    for &count in &TREE_GRID {
        let predicted: Vec<bool> = votes
            .iter()
            .map(|v| 2 * v[..count].iter().filter(|&&p| p).count() >= count)
            .collect();
        let c = Confusion::from_predictions(validation.labels(), &predicted);
        let score = objective.score(&c).unwrap_or(f64::NEG_INFINITY);
        if best.is_none_or(|(s, _)| score > s) {
            best = Some((score, count));
        }
    }
    let (_, count) = best.expect("grid is not empty");
    let mut model = full;
    model.trees.truncate(count);
    Ok(model)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn four_of_ten_votes() {
        let leaf = |positive| Tree {
            nodes: vec![TreeNode::Leaf { positive }],
        };
        let trees = (0..10).map(|i| leaf(i < 4)).collect();
        let m = ForestModel { trees };
        assert_eq!(m.score(&[0.0]), 0.4);
    }

    #[test]
    fn learns_an_axis_split() {
        let rows: Vec<Vec<f64>> = (0..60).map(|i| vec![i as f64 / 60.0, ((i * 7) % 11) as f64]).collect();
        let labels = (0..60).map(|i| i >= 30).collect();
        let data = Samples::from_rows(vec!["a".into(), "b".into()], &rows, labels).unwrap();
        let m = fit_forest(&data, 25, 9).unwrap();
        assert!(m.score(&[0.95, 3.0]) > 0.5);
        assert!(m.score(&[0.05, 3.0]) < 0.5);
    }
}
