use nalgebra::{DMatrix, DVector};
use serde::{Deserialize, Serialize};

use super::{expand, expanded_dim, sweep_threshold, Objective, Samples};
use crate::error::{Error, Result};

pub const RIDGE: f64 = 1e-8;

/// Least squares on 0/1 targets, used as a classifier through a threshold.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct RegressionModel {
    /// 1 for the raw features, 2 adds squares and pairwise products.
    pub degree: u8,
    pub intercept: f64,
    pub coefficients: Vec<f64>,
}

impl RegressionModel {
    pub fn score(&self, x: &[f64]) -> f64 {
        let phi = expand(x, self.degree);
        self.intercept + phi.iter().zip(&self.coefficients).map(|(a, b)| a * b).sum::<f64>()
    }
}

/// Ridge-stabilized least squares on centered features, 0/1 targets.
pub fn fit_least_squares(data: &Samples, degree: u8, ridge: f64) -> Result<RegressionModel> {
    let y: Vec<f64> = data.labels().iter().map(|&l| f64::from(u8::from(l))).collect();
    fit_targets(data, &y, degree, ridge)
}

/// Least squares against real-valued targets; labels of `data` are ignored.
pub fn fit_targets(data: &Samples, y: &[f64], degree: u8, ridge: f64) -> Result<RegressionModel> {
    if data.is_empty() || y.len() != data.len() {
        return Err(Error::InsufficientData("regression needs one target per row".into()));
    }
    let d = expanded_dim(data.dim(), degree);
    let n = data.len() as f64;
    let rows: Vec<Vec<f64>> = data.rows().map(|r| expand(r, degree)).collect();
    let mut mean = vec![0.0; d];
    for r in &rows {
        for (m, v) in mean.iter_mut().zip(r) {
            *m += v / n;
        }
    }
    let y_mean = y.iter().sum::<f64>() / n;
    let mut gram = DMatrix::<f64>::zeros(d, d);
    let mut rhs = DVector::<f64>::zeros(d);
    let mut centered = vec![0.0; d];
    for (r, &yi) in rows.iter().zip(y) {
        for j in 0..d {
            centered[j] = r[j] - mean[j];
        }
        for a in 0..d {
            rhs[a] += centered[a] * (yi - y_mean);
            for b in a..d {
                gram[(a, b)] += centered[a] * centered[b];
            }
        }
    }
    for a in 0..d {
        gram[(a, a)] += ridge;
        for b in 0..a {
            gram[(a, b)] = gram[(b, a)];
        }
    }
    let chol = gram
        .cholesky()
        .ok_or_else(|| Error::Model("normal equations are not positive definite".into()))?;
    let w = chol.solve(&rhs);
    if w.iter().any(|v| !v.is_finite()) {
        return Err(Error::Model("least-squares solution is not finite".into()));
    }
    let intercept = y_mean - w.iter().zip(&mean).map(|(a, b)| a * b).sum::<f64>();
    Ok(RegressionModel {
        degree,
        intercept,
        coefficients: w.iter().copied().collect(),
    })
}

/// Fits each allowed degree and keeps the one whose validated threshold
/// scores best. Returns the model and its threshold in `[0, 1]`.
pub fn train(
    train: &Samples,
    validation: &Samples,
    objective: Objective,
    degrees: &[u8],
) -> Result<(RegressionModel, f64)> {
    let mut best: Option<(f64, RegressionModel, f64)> = None;
    for &degree in degrees {
        let model = fit_least_squares(train, degree, RIDGE)?;
        let scores: Vec<f64> = validation.rows().map(|r| model.score(r)).collect();
        let (threshold, score) = sweep_threshold(&scores, validation.labels(), objective);
        let threshold = threshold.clamp(0.0, 1.0);
        if best.as_ref().is_none_or(|(s, _, _)| score > *s) {
            best = Some((score, model, threshold));
        }
    }
    let (_, model, threshold) = best.ok_or_else(|| Error::InvalidArgument("no regression degree to try".into()))?;
    Ok((model, threshold))
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn constant_column_gets_zero_weight() {
        let rows: Vec<Vec<f64>> = (0..20).map(|i| vec![0.7, i as f64 / 20.0]).collect();
        let labels = (0..20).map(|i| i >= 10).collect();
        let data = Samples::from_rows(vec!["c".into(), "x".into()], &rows, labels).unwrap();
        let m = fit_least_squares(&data, 1, RIDGE).unwrap();
        assert!(m.coefficients[0].abs() < 1e-6);
        assert!(m.coefficients[1] > 0.0);
    }

    #[test]
    fn zero_model_scores_its_intercept() {
        let m = RegressionModel {
            degree: 1,
            intercept: 0.7,
            coefficients: vec![0.0, 0.0],
        };
        assert_eq!(m.score(&[0.3, 0.9]), 0.7);
    }
}
