use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use super::{expand, expanded_dim, Confusion, Objective, Samples};
use crate::error::{Error, Result};

pub const LAMBDA_GRID: [f64; 4] = [1e-4, 1e-3, 1e-2, 1e-1];
pub const EPOCHS: usize = 30;

/// Linear hinge-loss classifier; positive when `w . phi(x) + b >= 0`.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct SvmModel {
    pub degree: u8,
    pub lambda: f64,
    pub weights: Vec<f64>,
    pub bias: f64,
}

impl SvmModel {
    pub fn score(&self, x: &[f64]) -> f64 {
        let phi = expand(x, self.degree);
        self.bias + phi.iter().zip(&self.weights).map(|(a, b)| a * b).sum::<f64>()
    }
}

/// Pegasos stochastic subgradient descent with class-balanced sample weights.
/// The bias is learned as the weight of a constant feature. The returned
/// weights average the iterates of the second half of training.
pub fn fit_pegasos(data: &Samples, degree: u8, lambda: f64, epochs: usize, seed: u64) -> Result<SvmModel> {
    let pos = data.positives();
    let neg = data.negatives();
    if pos == 0 || neg == 0 {
        return Err(Error::InsufficientData("svm needs both classes".into()));
    }
    let n = data.len();
    let class_weight = |label: bool| {
        if label {
            n as f64 / (2.0 * pos as f64)
        } else {
            n as f64 / (2.0 * neg as f64)
        }
    };
    let rows: Vec<Vec<f64>> = data
        .rows()
        .map(|r| {
            let mut phi = expand(r, degree);
            phi.push(1.0);
            phi
        })
        .collect();
    let d = expanded_dim(data.dim(), degree) + 1;
    let mut w = vec![0.0; d];
    let mut avg = vec![0.0; d];
    let steps = epochs * n;
    let burn_in = steps / 2;
    let radius = 1.0 / lambda.sqrt();
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    for t in 1..=steps {
        let i = rng.random_range(0..n);
        let y = if data.label(i) { 1.0 } else { -1.0 };
        let eta = 1.0 / (lambda * t as f64);
        let margin = y * dot(&w, &rows[i]);
        let shrink = 1.0 - eta * lambda;
        for wj in w.iter_mut() {
            *wj *= shrink;
        }
        if margin < 1.0 {
            let step = eta * class_weight(data.label(i)) * y;
            for (wj, xj) in w.iter_mut().zip(&rows[i]) {
                *wj += step * xj;
            }
        }
        let norm = dot(&w, &w).sqrt();
        if norm > radius {
            let s = radius / norm;
            for wj in w.iter_mut() {
                *wj *= s;
            }
        }
        if t > burn_in {
            for (a, wj) in avg.iter_mut().zip(&w) {
                *a += wj;
            }
        }
    }
    let kept = (steps - burn_in).max(1) as f64;
    let mut weights: Vec<f64> = avg.iter().map(|a| a / kept).collect();
    let bias = weights.pop().expect("constant feature weight");
    Ok(SvmModel {
        degree,
        lambda,
        weights,
        bias,
    })
}

fn dot(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| x * y).sum()
}

/// Sweeps the regularization constant and feature degree on validation.
pub fn train(
    train: &Samples,
    validation: &Samples,
    objective: Objective,
    degrees: &[u8],
    seed: u64,
) -> Result<SvmModel> {
    let mut best: Option<(f64, SvmModel)> = None;
    for &degree in degrees {
        for &lambda in &LAMBDA_GRID {
            let model = fit_pegasos(train, degree, lambda, EPOCHS, seed)?;
            let predicted: Vec<bool> = validation.rows().map(|r| model.score(r) >= 0.0).collect();
            let c = Confusion::from_predictions(validation.labels(), &predicted);
            let score = objective.score(&c).unwrap_or(f64::NEG_INFINITY);
            if best.as_ref().is_none_or(|(s, _)| score > *s) {
                best = Some((score, model));
            }
        }
    }
    best.map(|(_, m)| m)
        .ok_or_else(|| Error::InvalidArgument("no svm configuration to try".into()))
}
