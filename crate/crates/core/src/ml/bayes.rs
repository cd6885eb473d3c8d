use serde::{Deserialize, Serialize};

use super::Samples;
use crate::error::{Error, Result};

/// Relative variance floor, as a fraction of the largest feature variance.
pub const VAR_SMOOTHING: f64 = 1e-9;

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ClassStats {
    pub prior: f64,
    pub mean: Vec<f64>,
    pub var: Vec<f64>,
}

/// Gaussian naive Bayes; score is the posterior probability of the positive class.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct BayesModel {
    pub positive: ClassStats,
    pub negative: ClassStats,
}

impl BayesModel {
    pub fn score(&self, x: &[f64]) -> f64 {
        let lp = log_joint(&self.positive, x);
        let ln = log_joint(&self.negative, x);
        let m = lp.max(ln);
        let (ep, en) = ((lp - m).exp(), (ln - m).exp());
        ep / (ep + en)
    }
}

fn log_joint(c: &ClassStats, x: &[f64]) -> f64 {
    c.prior.ln()
        + x.iter()
            .zip(c.mean.iter().zip(&c.var))
            .map(|(&v, (&m, &s))| -0.5 * ((2.0 * std::f64::consts::PI * s).ln() + (v - m) * (v - m) / s))
            .sum::<f64>()
}

pub fn train(data: &Samples) -> Result<BayesModel> {
    let d = data.dim();
    let n = data.len() as f64;
    let mut overall = 0.0f64;
    for j in 0..d {
        let mean = data.rows().map(|r| r[j]).sum::<f64>() / n;
        overall = overall.max(data.rows().map(|r| (r[j] - mean).powi(2)).sum::<f64>() / n);
    }
    let floor = VAR_SMOOTHING * overall.max(1.0);
    let stats = |class: bool| -> Result<ClassStats> {
        let rows: Vec<&[f64]> = data
            .rows()
            .zip(data.labels())
            .filter(|(_, &l)| l == class)
            .map(|(r, _)| r)
            .collect();
        if rows.is_empty() {
            return Err(Error::InsufficientData("naive bayes needs both classes".into()));
        }
        let m = rows.len() as f64;
        let mean: Vec<f64> = (0..d).map(|j| rows.iter().map(|r| r[j]).sum::<f64>() / m).collect();
        let var = (0..d)
            .map(|j| rows.iter().map(|r| (r[j] - mean[j]).powi(2)).sum::<f64>() / m + floor)
            .collect();
        Ok(ClassStats {
            prior: m / n,
            mean,
            var,
        })
    };
    Ok(BayesModel {
        positive: stats(true)?,
        negative: stats(false)?,
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn separated_gaussians() {
        let rows: Vec<Vec<f64>> = (0..40)
            .map(|i| vec![if i < 20 { 0.1 } else { 0.9 } + (i % 5) as f64 * 0.01])
            .collect();
        let labels = (0..40).map(|i| i >= 20).collect();
        let m = train(&Samples::from_rows(vec!["x".into()], &rows, labels).unwrap()).unwrap();
        assert!(m.score(&[0.9]) > 0.99);
        assert!(m.score(&[0.1]) < 0.01);
        assert!((m.positive.prior - 0.5).abs() < 1e-12);
    }
}
