//! Attribute importance from linear regression coefficients.

use std::collections::BTreeMap;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::features::Task;
use crate::graph::NetworkKind;
use crate::ml::{Model, Params};

pub const DEFAULT_TOP_K: usize = 5;

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct FeatureImportance {
    pub feature: String,
    /// Signed regression coefficient.
    pub coefficient: f64,
    /// `|coefficient| / max |coefficient|`.
    pub weight: f64,
    /// 1 is the most important.
    pub rank: usize,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ImportanceReport {
    pub task: Task,
    pub network: NetworkKind,
    /// In model feature order.
    pub features: Vec<FeatureImportance>,
}

impl ImportanceReport {
    pub fn label(&self) -> String {
        format!("{}_{}", self.task, self.network)
    }

    pub fn feature_names(&self) -> Vec<&str> {
        self.features.iter().map(|f| f.feature.as_str()).collect()
    }

    pub fn rank_of(&self, feature: &str) -> Option<usize> {
        self.features.iter().find(|f| f.feature == feature).map(|f| f.rank)
    }

    /// Feature names with rank `1..=k`, most important first.
    pub fn top(&self, k: usize) -> Vec<String> {
        let mut by_rank: Vec<&FeatureImportance> = self.features.iter().collect();
        by_rank.sort_by_key(|f| f.rank);
        by_rank.into_iter().take(k).map(|f| f.feature.clone()).collect()
    }
}

/// Normalized coefficient magnitudes and ranks of a degree-1 regression model.
pub fn attribute_weights(model: &Model, task: Task, network: NetworkKind) -> Result<ImportanceReport> {
    let Params::Regression(reg) = &model.params else {
        return Err(Error::InvalidArgument(format!(
            "importance needs a regression model, got {}",
            model.kind()
        )));
    };
    if reg.degree != 1 {
        return Err(Error::InvalidArgument(
            "importance needs a regression model on raw features (degree 1)".into(),
        ));
    }
    importance_from_coefficients(&model.feature_names, &reg.coefficients, task, network)
}

pub fn importance_from_coefficients(
    names: &[String],
    coefficients: &[f64],
    task: Task,
    network: NetworkKind,
) -> Result<ImportanceReport> {
    if names.len() != coefficients.len() || names.is_empty() {
        return Err(Error::InvalidArgument("one coefficient per feature is required".into()));
    }
    let max = coefficients.iter().fold(0.0f64, |m, c| m.max(c.abs()));
    if max == 0.0 || !max.is_finite() {
        return Err(Error::Model(
            "coefficients carry no importance (all zero or not finite)".into(),
        ));
    }
    let mut order: Vec<usize> = (0..names.len()).collect();
    order.sort_by(|&a, &b| coefficients[b].abs().total_cmp(&coefficients[a].abs()).then(a.cmp(&b)));
    let mut rank = vec![0; names.len()];
    for (r, &i) in order.iter().enumerate() {
        rank[i] = r + 1;
    }
    Ok(ImportanceReport {
        task,
        network,
        features: names
            .iter()
            .zip(coefficients)
            .zip(rank)
            .map(|((n, &c), rank)| FeatureImportance {
                feature: n.clone(),
                coefficient: c,
                weight: c.abs() / max,
                rank,
            })
            .collect(),
    })
}

fn check_same_features(reports: &[ImportanceReport]) -> Result<()> {
    let first = reports
        .first()
        .ok_or_else(|| Error::InvalidArgument("no importance reports".into()))?;
    for r in &reports[1..] {
        if r.feature_names() != first.feature_names() {
            return Err(Error::InvalidArgument(format!(
                "{} and {} rank different features",
                first.label(),
                r.label()
            )));
        }
    }
    Ok(())
}

/// Weight table: one row per feature, one column per report.
pub fn weights_table(reports: &[ImportanceReport]) -> Result<String> {
    table(reports, |f| f.weight.to_string())
}

/// Rank table: one row per feature, one column per report.
pub fn ranks_table(reports: &[ImportanceReport]) -> Result<String> {
    table(reports, |f| f.rank.to_string())
}

fn table(reports: &[ImportanceReport], cell: impl Fn(&FeatureImportance) -> String) -> Result<String> {
    check_same_features(reports)?;
    let mut w = csv::Writer::from_writer(Vec::new());
    let mut header = vec!["feature".to_string()];
    header.extend(reports.iter().map(ImportanceReport::label));
    w.write_record(&header)?;
    for i in 0..reports[0].features.len() {
        let mut row = vec![reports[0].features[i].feature.clone()];
        row.extend(reports.iter().map(|r| cell(&r.features[i])));
        w.write_record(&row)?;
    }
    let bytes = w.into_inner().map_err(|e| Error::InvalidArgument(e.to_string()))?;
    Ok(String::from_utf8(bytes).expect("csv output is utf-8"))
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct RankingCell {
    pub label: String,
    pub top: Vec<String>,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct RankingComparison {
    pub k: usize,
    pub cells: Vec<RankingCell>,
    /// Features in the top `k` of every cell, in feature order.
    pub shared_by_all: Vec<String>,
    /// For each feature in any top `k`, the labels of the cells that rank it there.
    pub membership: BTreeMap<String, Vec<String>>,
}

/// Top-`k` features per report and how they overlap.
pub fn compare_rankings(reports: &[ImportanceReport], k: usize) -> Result<RankingComparison> {
    check_same_features(reports)?;
    if k == 0 {
        return Err(Error::InvalidArgument("k must be at least 1".into()));
    }
    let cells: Vec<RankingCell> = reports
        .iter()
        .map(|r| RankingCell {
            label: r.label(),
            top: r.top(k),
        })
        .collect();
    let mut membership: BTreeMap<String, Vec<String>> = BTreeMap::new();
    for c in &cells {
        for f in &c.top {
            membership.entry(f.clone()).or_default().push(c.label.clone());
        }
    }
    let shared_by_all = reports[0]
        .feature_names()
        .into_iter()
        .filter(|f| membership.get(*f).is_some_and(|m| m.len() == cells.len()))
        .map(String::from)
        .collect();
    Ok(RankingComparison {
        k,
        cells,
        shared_by_all,
        membership,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::ml::regression::RegressionModel;

    fn names(n: usize) -> Vec<String> {
        (0..n).map(|i| format!("f{i}")).collect()
    }

    fn report(coefs: &[f64], task: Task, network: NetworkKind) -> ImportanceReport {
        importance_from_coefficients(&names(coefs.len()), coefs, task, network).unwrap()
    }

    #[test]
    fn normalization_example() {
        let r = report(&[2.0, -1.9, 0.4], Task::Formation, NetworkKind::Behavioral);
        let w: Vec<f64> = r.features.iter().map(|f| f.weight).collect();
        assert_eq!(w[0], 1.0);
        assert!((w[1] - 0.95).abs() < 1e-12);
        assert!((w[2] - 0.2).abs() < 1e-12);
        assert_eq!(r.features.iter().map(|f| f.rank).collect::<Vec<_>>(), [1, 2, 3]);
        assert_eq!(r.features[1].coefficient, -1.9);
    }

    #[test]
    fn ties_follow_feature_order() {
        let r = report(&[0.3, -0.3, 0.3], Task::Formation, NetworkKind::Behavioral);
        assert!(r.features.iter().all(|f| f.weight == 1.0));
        assert_eq!(r.features.iter().map(|f| f.rank).collect::<Vec<_>>(), [1, 2, 3]);
    }

    #[test]
    fn rejects_non_linear_models() {
        let model = |degree| Model {
            feature_names: names(2),
            threshold: 0.5,
            params: Params::Regression(RegressionModel {
                degree,
                intercept: 0.0,
                coefficients: vec![1.0; if degree == 1 { 2 } else { 5 }],
            }),
        };
        assert!(attribute_weights(&model(1), Task::Formation, NetworkKind::Cognitive).is_ok());
        assert!(attribute_weights(&model(2), Task::Formation, NetworkKind::Cognitive).is_err());
        let bayes = Model {
            params: Params::Knn(crate::ml::knn::KnnModel {
                k: 1,
                rows: vec![vec![0.0, 0.0]],
                labels: vec![true],
            }),
            ..model(1)
        };
        assert!(attribute_weights(&bayes, Task::Formation, NetworkKind::Cognitive).is_err());
    }

    #[test]
    fn comparison_sets() {
        let coefs = [0.9, 0.8, 0.7, 0.6, 0.5, 0.1, 0.05];
        let same: Vec<ImportanceReport> = Task::ALL
            .iter()
            .flat_map(|&t| NetworkKind::ALL.map(|n| report(&coefs, t, n)))
            .collect();
        let c = compare_rankings(&same, 5).unwrap();
        assert_eq!(c.shared_by_all, ["f0", "f1", "f2", "f3", "f4"]);

        let a = report(
            &[1.0, 1.0, 1.0, 1.0, 1.0, 0.0, 0.0, 0.0, 0.0, 0.0],
            Task::Formation,
            NetworkKind::Behavioral,
        );
        let b = report(
            &[0.0, 0.0, 0.0, 0.0, 0.0, 1.0, 1.0, 1.0, 1.0, 1.0],
            Task::Dissolution,
            NetworkKind::Behavioral,
        );
        assert!(compare_rankings(&[a.clone(), b], 5).unwrap().shared_by_all.is_empty());

        let mixed = Task::ALL
            .iter()
            .flat_map(|&t| {
                NetworkKind::ALL.map(|n| {
                    let mut c = vec![0.1; 8];
                    c[3] = 2.0;
                    c[(t as usize * 2 + n as usize) % 3] = 1.0;
                    report(&c, t, n)
                })
            })
            .collect::<Vec<_>>();
        let c = compare_rankings(&mixed, 1).unwrap();
        assert_eq!(c.shared_by_all, ["f3"]);
        assert_eq!(c.membership["f3"].len(), 4);

        assert!(compare_rankings(&[a, report(&[1.0], Task::Formation, NetworkKind::Behavioral)], 5).is_err());
    }
}
