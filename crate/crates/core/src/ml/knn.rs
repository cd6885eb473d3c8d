use serde::{Deserialize, Serialize};

use super::{Confusion, Objective, Samples};
use crate::error::{Error, Result};

pub const K_GRID: [usize; 13] = [1, 3, 5, 7, 9, 11, 13, 15, 17, 19, 21, 23, 25];

/// Majority vote among the `k` nearest training rows (Euclidean distance,
/// ties broken by training order).
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct KnnModel {
    pub k: usize,
    pub rows: Vec<Vec<f64>>,
    pub labels: Vec<bool>,
}

impl KnnModel {
    pub fn new(k: usize, data: &Samples) -> Result<Self> {
        if k == 0 || data.is_empty() {
            return Err(Error::InvalidArgument("knn needs k >= 1 and training rows".into()));
        }
        Ok(KnnModel {
            k,
            rows: data.rows().map(<[f64]>::to_vec).collect(),
            labels: data.labels().to_vec(),
        })
    }

    /// Fraction of positive labels among the nearest `k`.
    pub fn score(&self, x: &[f64]) -> f64 {
        let near = nearest(&self.rows, x, self.k);
        vote(&near, &self.labels, self.k)
    }
}

/// Indices of the `k` nearest rows, closest first.
fn nearest(rows: &[Vec<f64>], x: &[f64], k: usize) -> Vec<usize> {
    let mut d: Vec<(f64, usize)> = rows
        .iter()
        .enumerate()
        .map(|(i, r)| (r.iter().zip(x).map(|(a, b)| (a - b) * (a - b)).sum::<f64>(), i))
        .collect();
    let k = k.min(d.len());
    let by_distance = |a: &(f64, usize), b: &(f64, usize)| a.0.total_cmp(&b.0).then(a.1.cmp(&b.1));
    if k < d.len() {
        d.select_nth_unstable_by(k, by_distance);
        d.truncate(k);
    }
    d.sort_by(by_distance);
    d.into_iter().map(|(_, i)| i).collect()
}

fn vote(near: &[usize], labels: &[bool], k: usize) -> f64 {
    let used = &near[..k.min(near.len())];
    used.iter().filter(|&&i| labels[i]).count() as f64 / used.len() as f64
}

/// Sweeps `k` over the odd values 1..=25 on validation.
pub fn train(train: &Samples, validation: &Samples, objective: Objective) -> Result<KnnModel> {
    let base = KnnModel::new(1, train)?;
    let max_k = K_GRID[K_GRID.len() - 1];
    let neighbors: Vec<Vec<usize>> = validation.rows().map(|r| nearest(&base.rows, r, max_k)).collect();
    let mut best: Option<(f64, usize)> = None;
    for &k in &K_GRID {
        if k > train.len() {
            break;
        }
        let predicted: Vec<bool> = neighbors.iter().map(|n| vote(n, &base.labels, k) >= 0.5).collect();
        let c = Confusion::from_predictions(validation.labels(), &predicted);
        let score = objective.score(&c).unwrap_or(f64::NEG_INFINITY);
        if best.is_none_or(|(s, _)| score > s) {
            best = Some((score, k));
        }
    }
    let (_, k) = best.expect("k = 1 is always tried");
    Ok(KnnModel { k, ..base })
}

#[cfg(test)]
mod tests {
    use super::*;

    fn line(labels: &[bool]) -> Samples {
        let rows: Vec<Vec<f64>> = (0..labels.len()).map(|i| vec![i as f64]).collect();
        Samples::from_rows(vec!["x".into()], &rows, labels.to_vec()).unwrap()
    }

    #[test]
    fn three_neighbors_vote() {
        let m = KnnModel::new(3, &line(&[true, true, false, false, false])).unwrap();
        assert!((m.score(&[1.0]) - 2.0 / 3.0).abs() < 1e-12);
    }

    #[test]
    fn one_neighbor_recalls_training_set() {
        let labels = [true, false, true, true, false, false, true, false];
        let data = line(&labels);
        let m = KnnModel::new(1, &data).unwrap();
        let predicted: Vec<bool> = data.rows().map(|r| m.score(r) >= 0.5).collect();
        assert_eq!(predicted, labels);
    }
}
