use rand::seq::SliceRandom;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

pub const MIN_SPLIT_ROWS: usize = 10;

/// Row-major feature matrix with binary labels.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Samples {
    feature_names: Vec<String>,
    values: Vec<f64>,
    labels: Vec<bool>,
}

impl Samples {
    pub fn new(feature_names: Vec<String>, values: Vec<f64>, labels: Vec<bool>) -> Result<Self> {
        let dim = feature_names.len();
        if dim == 0 {
            return Err(Error::InvalidArgument("samples need at least one feature".into()));
        }
        if values.len() != dim * labels.len() {
            return Err(Error::InvalidArgument(format!(
                "{} values do not form {} rows of {dim} features",
                values.len(),
                labels.len()
            )));
        }
        if values.iter().any(|v| !v.is_finite()) {
            return Err(Error::InvalidArgument("feature values must be finite".into()));
        }
        Ok(Samples {
            feature_names,
            values,
            labels,
        })
    }

    pub fn from_rows(feature_names: Vec<String>, rows: &[Vec<f64>], labels: Vec<bool>) -> Result<Self> {
        if rows.iter().any(|r| r.len() != feature_names.len()) {
            return Err(Error::InvalidArgument("row width differs from feature count".into()));
        }
        Samples::new(feature_names, rows.concat(), labels)
    }

    pub fn feature_names(&self) -> &[String] {
        &self.feature_names
    }

    pub fn dim(&self) -> usize {
        self.feature_names.len()
    }

    pub fn len(&self) -> usize {
        self.labels.len()
    }

    pub fn is_empty(&self) -> bool {
        self.labels.is_empty()
    }

    pub fn row(&self, i: usize) -> &[f64] {
        let d = self.dim();
        &self.values[i * d..(i + 1) * d]
    }

    pub fn rows(&self) -> impl Iterator<Item = &[f64]> {
        self.values.chunks_exact(self.dim())
    }

    pub fn labels(&self) -> &[bool] {
        &self.labels
    }

    pub fn label(&self, i: usize) -> bool {
        self.labels[i]
    }

    pub fn positives(&self) -> usize {
        self.labels.iter().filter(|&&l| l).count()
    }

    pub fn negatives(&self) -> usize {
        self.len() - self.positives()
    }

    /// Rows at `indices`, in the given order.
    pub fn subset(&self, indices: &[usize]) -> Samples {
        let mut values = Vec::with_capacity(indices.len() * self.dim());
        for &i in indices {
            values.extend_from_slice(self.row(i));
        }
        Samples {
            feature_names: self.feature_names.clone(),
            values,
            labels: indices.iter().map(|&i| self.labels[i]).collect(),
        }
    }

    pub(crate) fn same_features(&self, other: &Samples) -> Result<()> {
        if self.feature_names != other.feature_names {
            return Err(Error::InvalidArgument(format!(
                "feature mismatch: {:?} vs {:?}",
                self.feature_names, other.feature_names
            )));
        }
        Ok(())
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct SplitSpec {
    pub validation_fraction: f64,
    pub seed: u64,
}

impl Default for SplitSpec {
    fn default() -> Self {
        SplitSpec {
            validation_fraction: 0.2,
            seed: 0,
        }
    }
}

/// Stratified train/validation split. Each class contributes
/// `round(fraction * class_size)` rows to validation, and at least one row
/// when the class has two or more.
pub fn split(data: &Samples, spec: SplitSpec) -> Result<(Samples, Samples)> {
    if !(spec.validation_fraction > 0.0 && spec.validation_fraction < 1.0) {
        return Err(Error::InvalidArgument(format!(
            "validation fraction {} is outside (0, 1)",
            spec.validation_fraction
        )));
    }
    if data.len() < MIN_SPLIT_ROWS {
        return Err(Error::InsufficientData(format!(
            "{} rows; a split needs at least {MIN_SPLIT_ROWS}",
            data.len()
        )));
    }
    if data.positives() == 0 || data.negatives() == 0 {
        return Err(Error::InsufficientData("dataset has a single class".into()));
    }
    let mut rng = ChaCha8Rng::seed_from_u64(spec.seed);
    let mut train = Vec::new();
    let mut validation = Vec::new();
    for class in [true, false] {
        let mut idx: Vec<usize> = (0..data.len()).filter(|&i| data.label(i) == class).collect();
        idx.shuffle(&mut rng);
        let mut take = (spec.validation_fraction * idx.len() as f64).round() as usize;
        if idx.len() >= 2 {
            take = take.clamp(1, idx.len() - 1);
        }
        validation.extend_from_slice(&idx[..take]);
        train.extend_from_slice(&idx[take..]);
    }
    train.sort_unstable();
    validation.sort_unstable();
    Ok((data.subset(&train), data.subset(&validation)))
}

/// Keeps every positive and at most `ratio` negatives per positive, chosen
/// uniformly at random. Row order is preserved.
pub fn downsample_negatives(data: &Samples, ratio: f64, seed: u64) -> Samples {
    let positives = data.positives();
    let cap = (ratio * positives as f64).floor() as usize;
    if positives == 0 || data.negatives() <= cap {
        return data.clone();
    }
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut negatives: Vec<usize> = (0..data.len()).filter(|&i| !data.label(i)).collect();
    negatives.shuffle(&mut rng);
    negatives.truncate(cap);
    let mut keep: Vec<usize> = (0..data.len()).filter(|&i| data.label(i)).chain(negatives).collect();
    keep.sort_unstable();
    data.subset(&keep)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn toy(pos: usize, neg: usize) -> Samples {
        let n = pos + neg;
        let values = (0..n).map(|i| i as f64).collect();
        let labels = (0..n).map(|i| i < pos).collect();
        Samples::new(vec!["x".into()], values, labels).unwrap()
    }

    #[test]
    fn eighty_twenty() {
        let (t, v) = split(
            &toy(50, 50),
            SplitSpec {
                validation_fraction: 0.2,
                seed: 3,
            },
        )
        .unwrap();
        assert_eq!((t.len(), v.len()), (80, 20));
    }

    #[test]
    fn same_seed_same_split() {
        let spec = SplitSpec {
            validation_fraction: 0.2,
            seed: 11,
        };
        assert_eq!(split(&toy(30, 70), spec).unwrap(), split(&toy(30, 70), spec).unwrap());
    }

    #[test]
    fn minority_reaches_validation() {
        for seed in 0..50 {
            let (_, v) = split(
                &toy(95, 5),
                SplitSpec {
                    validation_fraction: 0.2,
                    seed,
                },
            )
            .unwrap();
            assert!(v.negatives() >= 1);
        }
    }

    #[test]
    fn rejects_single_class_and_tiny_inputs() {
        assert!(split(&toy(20, 0), SplitSpec::default()).is_err());
        assert!(split(&toy(4, 4), SplitSpec::default()).is_err());
        let bad = SplitSpec {
            validation_fraction: 1.0,
            seed: 0,
        };
        assert!(split(&toy(20, 20), bad).is_err());
    }

    #[test]
    fn downsampling_caps_negatives() {
        let d = downsample_negatives(&toy(10, 500), 10.0, 1);
        assert_eq!(d.positives(), 10);
        assert_eq!(d.negatives(), 100);
        assert_eq!(downsample_negatives(&toy(10, 50), 10.0, 1).len(), 60);
    }
}
