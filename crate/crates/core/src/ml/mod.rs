//! Classifier suite, validation protocol, metrics and model selection.
//!
//! Every classifier produces a real-valued score and labels a row positive
//! when the score reaches the model's threshold. Hyperparameters are chosen
//! on a held-out validation split by the configured [`Objective`].

pub mod bayes;
pub mod data;
pub mod forest;
pub mod knn;
pub mod metrics;
pub mod regression;
pub mod svm;

use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Serialize};

pub use data::{downsample_negatives, split, Samples, SplitSpec};
pub use metrics::{auc, roc_curve, Confusion, Objective, RocPoint};

use crate::error::{Error, Result};

/// Default cap on training negatives per positive.
pub const DEFAULT_NEGATIVE_RATIO: f64 = 10.0;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub enum ModelKind {
    #[serde(rename = "regression")]
    LinearRegression,
    #[serde(rename = "svm")]
    LinearSvm,
    #[serde(rename = "knn")]
    Knn,
    #[serde(rename = "forest")]
    RandomForest,
    #[serde(rename = "bayes")]
    NaiveBayes,
}

impl ModelKind {
    /// Also the tie-break order of model selection.
    pub const ALL: [ModelKind; 5] = [
        ModelKind::LinearRegression,
        ModelKind::LinearSvm,
        ModelKind::Knn,
        ModelKind::RandomForest,
        ModelKind::NaiveBayes,
    ];

    pub fn as_str(self) -> &'static str {
        match self {
            ModelKind::LinearRegression => "regression",
            ModelKind::LinearSvm => "svm",
            ModelKind::Knn => "knn",
            ModelKind::RandomForest => "forest",
            ModelKind::NaiveBayes => "bayes",
        }
    }

    fn position(self) -> usize {
        ModelKind::ALL.iter().position(|&k| k == self).expect("listed")
    }

    /// Per-kind seed so that training order does not matter.
    fn seed(self, base: u64) -> u64 {
        base ^ 0x9E37_79B9_7F4A_7C15u64.wrapping_mul(self.position() as u64 + 1)
    }
}

impl fmt::Display for ModelKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.pad(self.as_str())
    }
}

impl FromStr for ModelKind {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        ModelKind::ALL
            .into_iter()
            .find(|k| k.as_str() == s)
            .ok_or_else(|| Error::InvalidArgument(format!("unknown classifier `{s}`")))
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "lowercase")]
pub enum Params {
    Regression(regression::RegressionModel),
    Svm(svm::SvmModel),
    Knn(knn::KnnModel),
    Forest(forest::ForestModel),
    Bayes(bayes::BayesModel),
}

/// A trained classifier. Immutable after training.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Model {
    pub feature_names: Vec<String>,
    pub threshold: f64,
    pub params: Params,
}

impl Model {
    pub fn kind(&self) -> ModelKind {
        match self.params {
            Params::Regression(_) => ModelKind::LinearRegression,
            Params::Svm(_) => ModelKind::LinearSvm,
            Params::Knn(_) => ModelKind::Knn,
            Params::Forest(_) => ModelKind::RandomForest,
            Params::Bayes(_) => ModelKind::NaiveBayes,
        }
    }

    pub fn score(&self, x: &[f64]) -> Result<f64> {
        if x.len() != self.feature_names.len() {
            return Err(Error::InvalidArgument(format!(
                "expected {} features, got {}",
                self.feature_names.len(),
                x.len()
            )));
        }
        Ok(match &self.params {
            Params::Regression(m) => m.score(x),
            Params::Svm(m) => m.score(x),
            Params::Knn(m) => m.score(x),
            Params::Forest(m) => m.score(x),
            Params::Bayes(m) => m.score(x),
        })
    }

    pub fn predict(&self, x: &[f64]) -> Result<(bool, f64)> {
        let s = self.score(x)?;
        Ok((s >= self.threshold, s))
    }

    pub fn scores(&self, data: &Samples) -> Result<Vec<f64>> {
        if data.feature_names() != self.feature_names.as_slice() {
            return Err(Error::InvalidArgument(format!(
                "model features {:?} differ from data features {:?}",
                self.feature_names,
                data.feature_names()
            )));
        }
        data.rows().map(|r| self.score(r)).collect()
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct TrainOptions {
    pub objective: Objective,
    /// Lets regression and SVM try degree-2 features on validation.
    pub polynomial: bool,
    pub seed: u64,
}

impl Default for TrainOptions {
    fn default() -> Self {
        TrainOptions {
            objective: Objective::RecallWeighted,
            polynomial: true,
            seed: 0,
        }
    }
}

impl TrainOptions {
    fn degrees(&self) -> &'static [u8] {
        if self.polynomial {
            &[1, 2]
        } else {
            &[1]
        }
    }
}

pub fn train(kind: ModelKind, train: &Samples, validation: &Samples, options: &TrainOptions) -> Result<Model> {
    train.same_features(validation)?;
    if train.positives() == 0 || train.negatives() == 0 {
        return Err(Error::InsufficientData("training split has a single class".into()));
    }
    let seed = kind.seed(options.seed);
    let objective = options.objective;
    let (params, threshold) = match kind {
        ModelKind::LinearRegression => {
            let (m, t) = regression::train(train, validation, objective, options.degrees())?;
            (Params::Regression(m), t)
        }
        ModelKind::LinearSvm => (
            Params::Svm(svm::train(train, validation, objective, options.degrees(), seed)?),
            0.0,
        ),
        ModelKind::Knn => (Params::Knn(knn::train(train, validation, objective)?), 0.5),
        ModelKind::RandomForest => (Params::Forest(forest::train(train, validation, objective, seed)?), 0.5),
        ModelKind::NaiveBayes => (Params::Bayes(bayes::train(train)?), 0.5),
    };
    Ok(Model {
        feature_names: train.feature_names().to_vec(),
        threshold,
        params,
    })
}

/// Training and validation parts of a training dataset.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Prepared {
    pub train: Samples,
    pub validation: Samples,
}

/// Splits off validation rows, then downsamples negatives in the training
/// part only. Validation keeps the natural class ratio.
pub fn prepare(data: &Samples, spec: SplitSpec, negative_ratio: Option<f64>) -> Result<Prepared> {
    let (train, validation) = split(data, spec)?;
    let train = match negative_ratio {
        Some(r) if r > 0.0 => downsample_negatives(&train, r, spec.seed.wrapping_add(1)),
        Some(r) => return Err(Error::InvalidArgument(format!("negative ratio {r} must be positive"))),
        None => train,
    };
    Ok(Prepared { train, validation })
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Trained {
    pub model: Model,
    /// Report on the validation split, used for model selection.
    pub validation: EvaluationReport,
}

/// Trains each kind, optionally one thread per kind. Results are identical
/// either way and come back in the order of `kinds`.
pub fn train_all(
    prepared: &Prepared,
    kinds: &[ModelKind],
    options: &TrainOptions,
    threads: bool,
) -> Result<Vec<Trained>> {
    let one = |kind: ModelKind| -> Result<Trained> {
        let model = train(kind, &prepared.train, &prepared.validation, options)?;
        let validation = evaluate(&model, &prepared.validation)?;
        Ok(Trained { model, validation })
    };
    if !threads {
        return kinds.iter().map(|&k| one(k)).collect();
    }
    std::thread::scope(|s| {
        let handles: Vec<_> = kinds.iter().map(|&k| s.spawn(move || one(k))).collect();
        handles
            .into_iter()
            .map(|h| {
                h.join()
                    .unwrap_or_else(|_| Err(Error::Model("training thread panicked".into())))
            })
            .collect()
    })
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct EvaluationReport {
    pub model: ModelKind,
    pub rows: usize,
    pub confusion: Confusion,
    pub accuracy: f64,
    /// `None` when the data has no positives.
    pub recall: Option<f64>,
    /// `None` when nothing is predicted positive.
    pub precision: Option<f64>,
    /// `5 * recall + accuracy`.
    pub selection_score: Option<f64>,
    pub auc: Option<f64>,
    pub roc: Vec<RocPoint>,
}

impl EvaluationReport {
    pub fn objective_score(&self, objective: Objective) -> Option<f64> {
        objective.score(&self.confusion)
    }

    /// `fpr,tpr,threshold` rows; the origin has an empty threshold.
    pub fn roc_csv(&self) -> String {
        let mut out = String::from("fpr,tpr,threshold\n");
        for p in &self.roc {
            let t = p.threshold.map(|t| t.to_string()).unwrap_or_default();
            out.push_str(&format!("{},{},{}\n", p.fpr, p.tpr, t));
        }
        out
    }
}

pub fn evaluate(model: &Model, test: &Samples) -> Result<EvaluationReport> {
    if test.is_empty() {
        return Err(Error::InsufficientData("cannot evaluate on an empty set".into()));
    }
    let scores = model.scores(test)?;
    let predicted: Vec<bool> = scores.iter().map(|&s| s >= model.threshold).collect();
    let confusion = Confusion::from_predictions(test.labels(), &predicted);
    let roc = roc_curve(test.labels(), &scores);
    Ok(EvaluationReport {
        model: model.kind(),
        rows: test.len(),
        confusion,
        accuracy: confusion.accuracy().expect("non-empty"),
        recall: confusion.recall(),
        precision: confusion.precision(),
        selection_score: confusion.selection_score(),
        auc: auc(&roc),
        roc,
    })
}

/// Best report by `5 * recall + accuracy`.
pub fn select_model(reports: &[EvaluationReport]) -> Result<ModelKind> {
    select_model_by(reports, Objective::RecallWeighted)
}

/// Argmax of the objective; ties go to higher accuracy, then to the earlier
/// kind in [`ModelKind::ALL`]. Undefined scores rank last.
pub fn select_model_by(reports: &[EvaluationReport], objective: Objective) -> Result<ModelKind> {
    let key = |r: &EvaluationReport| (r.objective_score(objective).unwrap_or(f64::NEG_INFINITY), r.accuracy);
    reports
        .iter()
        .reduce(|best, r| {
            let (a, b) = (key(r), key(best));
            let better =
                a.0 > b.0 || (a.0 == b.0 && (a.1 > b.1 || (a.1 == b.1 && r.model.position() < best.model.position())));
            if better {
                r
            } else {
                best
            }
        })
        .map(|r| r.model)
        .ok_or_else(|| Error::InvalidArgument("no reports to select from".into()))
}

/// Degree-2 expansion appends squares and pairwise products after the raw
/// features.
pub(crate) fn expand(x: &[f64], degree: u8) -> Vec<f64> {
    let mut out = x.to_vec();
    if degree >= 2 {
        for i in 0..x.len() {
            for j in i..x.len() {
                out.push(x[i] * x[j]);
            }
        }
    }
    out
}

pub(crate) fn expanded_dim(dim: usize, degree: u8) -> usize {
    if degree >= 2 {
        dim + dim * (dim + 1) / 2
    } else {
        dim
    }
}

/// Best cut over the distinct scores. Each cut sits halfway between adjacent
/// distinct scores, so it separates validation rows the same way as the
/// score it was chosen at. Ties in the objective keep the higher threshold.
pub(crate) fn sweep_threshold(scores: &[f64], labels: &[bool], objective: Objective) -> (f64, f64) {
    let mut order: Vec<usize> = (0..scores.len()).collect();
    order.sort_by(|&a, &b| scores[b].total_cmp(&scores[a]));
    let pos = labels.iter().filter(|&&l| l).count();
    let neg = labels.len() - pos;
    let eval = |tp: usize, fp: usize| {
        let c = Confusion {
            tp,
            fp,
            tn: neg - fp,
            fn_: pos - tp,
        };
        objective.score(&c).unwrap_or(f64::NEG_INFINITY)
    };
    let top = order.first().map_or(0.0, |&i| scores[i]);
    let mut best = (top + 1.0, eval(0, 0));
    let (mut tp, mut fp) = (0, 0);
    let mut i = 0;
    while i < order.len() {
        let s = scores[order[i]];
        while i < order.len() && scores[order[i]] == s {
            if labels[order[i]] {
                tp += 1;
            } else {
                fp += 1;
            }
            i += 1;
        }
        let cut = if i < order.len() {
            (s + scores[order[i]]) / 2.0
        } else {
            s - 1.0
        };
        let score = eval(tp, fp);
        if score > best.1 {
            best = (cut, score);
        }
    }
    best
}
