use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Weight on recall in the default selection score.
pub const RECALL_WEIGHT: f64 = 5.0;

#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct Confusion {
    pub tp: usize,
    pub fp: usize,
    pub tn: usize,
    #[serde(rename = "fn")]
    pub fn_: usize,
}

impl Confusion {
    pub fn from_predictions(truth: &[bool], predicted: &[bool]) -> Self {
        let mut c = Confusion::default();
        for (&t, &p) in truth.iter().zip(predicted) {
            match (t, p) {
                (true, true) => c.tp += 1,
                (false, true) => c.fp += 1,
                (false, false) => c.tn += 1,
                (true, false) => c.fn_ += 1,
            }
        }
        c
    }

    pub fn total(&self) -> usize {
        self.tp + self.fp + self.tn + self.fn_
    }

    pub fn accuracy(&self) -> Option<f64> {
        ratio(self.tp + self.tn, self.total())
    }

    /// Undefined when the truth has no positives.
    pub fn recall(&self) -> Option<f64> {
        ratio(self.tp, self.tp + self.fn_)
    }

    /// Undefined when nothing is predicted positive.
    pub fn precision(&self) -> Option<f64> {
        ratio(self.tp, self.tp + self.fp)
    }

    pub fn false_positive_rate(&self) -> Option<f64> {
        ratio(self.fp, self.fp + self.tn)
    }

    /// `5 * recall + accuracy`.
    pub fn selection_score(&self) -> Option<f64> {
        Some(RECALL_WEIGHT * self.recall()? + self.accuracy()?)
    }
}

fn ratio(num: usize, den: usize) -> Option<f64> {
    (den > 0).then(|| num as f64 / den as f64)
}

/// Criterion maximized by validation sweeps and model selection.
#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Objective {
    /// `5 * recall + accuracy`.
    #[default]
    RecallWeighted,
    /// `accuracy + precision + recall`, with an undefined precision counted as 0.
    Balanced,
}

impl Objective {
    pub fn score(self, c: &Confusion) -> Option<f64> {
        match self {
            Objective::RecallWeighted => c.selection_score(),
            Objective::Balanced => Some(c.accuracy()? + c.recall()? + c.precision().unwrap_or(0.0)),
        }
    }

    pub fn as_str(self) -> &'static str {
        match self {
            Objective::RecallWeighted => "recall_weighted",
            Objective::Balanced => "balanced",
        }
    }
}

impl std::str::FromStr for Objective {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "recall_weighted" | "recall-weighted" => Ok(Objective::RecallWeighted),
            "balanced" => Ok(Objective::Balanced),
            other => Err(Error::InvalidArgument(format!(
                "unknown objective `{other}` (expected recall_weighted or balanced)"
            ))),
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct RocPoint {
    pub fpr: f64,
    pub tpr: f64,
    /// Score cut-off for this point; `None` for the origin, where nothing is
    /// predicted positive.
    pub threshold: Option<f64>,
}

/// ROC curve from sweeping the threshold over every distinct score, highest
/// first. Empty when either class is absent.
pub fn roc_curve(truth: &[bool], scores: &[f64]) -> Vec<RocPoint> {
    let pos = truth.iter().filter(|&&t| t).count();
    let neg = truth.len() - pos;
    if pos == 0 || neg == 0 {
        return Vec::new();
    }
    let mut order: Vec<usize> = (0..scores.len()).collect();
    order.sort_by(|&a, &b| scores[b].total_cmp(&scores[a]));
    let mut points = vec![RocPoint {
        fpr: 0.0,
        tpr: 0.0,
        threshold: None,
    }];
    let (mut tp, mut fp) = (0usize, 0usize);
    let mut i = 0;
    while i < order.len() {
        let s = scores[order[i]];
        while i < order.len() && scores[order[i]] == s {
            if truth[order[i]] {
                tp += 1;
            } else {
                fp += 1;
            }
            i += 1;
        }
        points.push(RocPoint {
            fpr: fp as f64 / neg as f64,
            tpr: tp as f64 / pos as f64,
            threshold: Some(s),
        });
    }
    points
}

/// Trapezoidal area under an ROC curve.
pub fn auc(roc: &[RocPoint]) -> Option<f64> {
    if roc.len() < 2 {
        return None;
    }
    Some(
        roc.windows(2)
            .map(|w| (w[1].fpr - w[0].fpr) * (w[1].tpr + w[0].tpr) / 2.0)
            .sum(),
    )
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn hand_built_confusion() {
        let truth = [true, true, true, true, false, false, false, false];
        let pred = [true, true, true, false, true, false, false, false];
        let c = Confusion::from_predictions(&truth, &pred);
        assert_eq!(
            c,
            Confusion {
                tp: 3,
                fp: 1,
                tn: 3,
                fn_: 1
            }
        );
        assert_eq!(c.accuracy(), Some(0.75));
        assert_eq!(c.recall(), Some(0.75));
        assert_eq!(c.precision(), Some(0.75));
    }

    #[test]
    fn perfect_and_all_negative() {
        let truth = [true, false, true, false];
        let perfect = Confusion::from_predictions(&truth, &truth);
        assert_eq!(perfect.selection_score(), Some(6.0));
        let none = Confusion::from_predictions(&truth, &[false; 4]);
        assert_eq!(none.accuracy(), Some(0.5));
        assert_eq!(none.recall(), Some(0.0));
        assert_eq!(none.precision(), None);
        assert_eq!(none.selection_score(), Some(0.5));
        assert_eq!(Objective::Balanced.score(&none), Some(0.5));
    }

    #[test]
    fn single_class_recall_is_undefined() {
        let c = Confusion::from_predictions(&[false, false], &[false, true]);
        assert_eq!(c.recall(), None);
        assert_eq!(c.selection_score(), None);
    }

    #[test]
    fn roc_endpoints_and_auc() {
        let truth = [true, false, true, false];
        let roc = roc_curve(&truth, &[0.9, 0.1, 0.8, 0.3]);
        assert_eq!((roc[0].fpr, roc[0].tpr), (0.0, 0.0));
        let last = roc.last().unwrap();
        assert_eq!((last.fpr, last.tpr), (1.0, 1.0));
        assert_eq!(auc(&roc), Some(1.0));
        let tied = roc_curve(&truth, &[0.5; 4]);
        assert_eq!(tied.len(), 2);
        assert_eq!(auc(&tied), Some(0.5));
        assert!(roc_curve(&[true, true], &[0.1, 0.2]).is_empty());
    }
}
