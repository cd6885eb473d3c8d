//! Dyad features and labeled datasets for the formation and dissolution tasks.
//!
//! Each dyad `(u, v)` is described by one agreement score per attribute,
//! combining `u`'s preference for `v`'s value with `v`'s preference for
//! `u`'s value, plus the number of neighbors the two share.
//!
//! Both tasks use three consecutive snapshots. The model is trained on
//! features of the first snapshot labeled by the second, and tested on
//! features of the second labeled by the third.

use std::fmt;
use std::fs;
use std::path::Path;
use std::str::FromStr;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::graph::{Dyad, NetworkKind, Snapshot};
use crate::ingest::AttributeSchema;
use crate::ml::Samples;
use crate::preference::{compute_preferences, PreferenceTable, ValueCodes};

/// Hop limit for formation candidates.
pub const DEFAULT_HOP_LIMIT: u32 = 3;
pub const COMMON_NEIGHBORS: &str = "common_neighbors";

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Task {
    Formation,
    Dissolution,
}

impl Task {
    pub const ALL: [Task; 2] = [Task::Formation, Task::Dissolution];

    pub fn as_str(self) -> &'static str {
        match self {
            Task::Formation => "formation",
            Task::Dissolution => "dissolution",
        }
    }
}

impl fmt::Display for Task {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.pad(self.as_str())
    }
}

impl FromStr for Task {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "formation" => Ok(Task::Formation),
            "dissolution" => Ok(Task::Dissolution),
            other => Err(Error::InvalidArgument(format!(
                "unknown task `{other}` (expected formation or dissolution)"
            ))),
        }
    }
}

/// How two directed preferences are merged into one agreement score.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum CombinationMethod {
    /// Product of the two preferences.
    #[serde(rename = "equal")]
    EqualPreference,
    /// The smaller of the two preferences.
    #[serde(rename = "min")]
    MinimumPreference,
}

impl CombinationMethod {
    pub fn combine(self, a: f64, b: f64) -> f64 {
        match self {
            CombinationMethod::EqualPreference => a * b,
            CombinationMethod::MinimumPreference => a.min(b),
        }
    }

    /// Agreement used when either endpoint has no value for the attribute.
    pub fn neutral(self) -> f64 {
        self.combine(0.5, 0.5)
    }

    pub fn as_str(self) -> &'static str {
        match self {
            CombinationMethod::EqualPreference => "equal",
            CombinationMethod::MinimumPreference => "min",
        }
    }
}

impl fmt::Display for CombinationMethod {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.pad(self.as_str())
    }
}

impl FromStr for CombinationMethod {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "equal" => Ok(CombinationMethod::EqualPreference),
            "min" | "minimum" => Ok(CombinationMethod::MinimumPreference),
            other => Err(Error::InvalidArgument(format!(
                "unknown combination method `{other}` (expected equal or min)"
            ))),
        }
    }
}

/// Pre-resolved lookups for scoring many dyads of one snapshot.
struct AgreementContext<'a> {
    snapshot: &'a Snapshot,
    prefs: &'a PreferenceTable,
    codes: ValueCodes,
    /// snapshot node index -> preference table row
    rows: Vec<Option<usize>>,
    attributes: usize,
}

impl<'a> AgreementContext<'a> {
    fn new(snapshot: &'a Snapshot, prefs: &'a PreferenceTable, schema: &AttributeSchema) -> Result<Self> {
        if prefs.attributes.iter().map(String::as_str).ne(schema.names()) {
            return Err(Error::InvalidArgument(
                "preference table was built for a different schema".into(),
            ));
        }
        Ok(AgreementContext {
            snapshot,
            prefs,
            codes: ValueCodes::new(snapshot, schema),
            rows: snapshot.nodes().iter().map(|n| prefs.node_position(&n.id)).collect(),
            attributes: schema.len(),
        })
    }

    fn agreement(&self, method: CombinationMethod, u: usize, v: usize, attribute: usize) -> f64 {
        let (Some(val_u), Some(val_v)) = (self.codes.get(u, attribute), self.codes.get(v, attribute)) else {
            return method.neutral();
        };
        let (Some(row_u), Some(row_v)) = (self.rows[u], self.rows[v]) else {
            return method.neutral();
        };
        let u_for_v = self.prefs.score(row_u, attribute, val_v);
        let v_for_u = self.prefs.score(row_v, attribute, val_u);
        method.combine(u_for_v, v_for_u)
    }

    fn dyad(&self, method: CombinationMethod, kind: NetworkKind, (u, v): Dyad) -> DyadFeatures {
        DyadFeatures {
            u: self.snapshot.id(u).to_string(),
            v: self.snapshot.id(v).to_string(),
            agreement: (0..self.attributes).map(|a| self.agreement(method, u, v, a)).collect(),
            common_neighbors: self.snapshot.common_neighbors_of(kind, u, v),
        }
    }
}

/// Agreement between `u` and `v` on one attribute: `u`'s preference for
/// `v`'s value combined with `v`'s preference for `u`'s value.
pub fn agreement(
    method: CombinationMethod,
    prefs: &PreferenceTable,
    snapshot: &Snapshot,
    schema: &AttributeSchema,
    u: &str,
    v: &str,
    attribute: &str,
) -> Result<f64> {
    let ctx = AgreementContext::new(snapshot, prefs, schema)?;
    let a = schema
        .attribute_index(attribute)
        .ok_or_else(|| Error::UnknownAttribute(attribute.to_string()))?;
    let ui = snapshot.index_of(u).ok_or_else(|| Error::UnknownNode(u.to_string()))?;
    let vi = snapshot.index_of(v).ok_or_else(|| Error::UnknownNode(v.to_string()))?;
    Ok(ctx.agreement(method, ui, vi, a))
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct DyadFeatures {
    pub u: String,
    pub v: String,
    /// One agreement score per schema attribute, in schema order.
    pub agreement: Vec<f64>,
    pub common_neighbors: usize,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct LabeledRow {
    pub features: DyadFeatures,
    pub label: bool,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct LabeledDataset {
    pub task: Task,
    pub network: NetworkKind,
    pub method: CombinationMethod,
    pub feature_semester: u32,
    pub label_semester: u32,
    pub attributes: Vec<String>,
    pub rows: Vec<LabeledRow>,
}

impl LabeledDataset {
    pub fn len(&self) -> usize {
        self.rows.len()
    }

    pub fn is_empty(&self) -> bool {
        self.rows.is_empty()
    }

    pub fn positives(&self) -> usize {
        self.rows.iter().filter(|r| r.label).count()
    }

    pub fn feature_names(&self) -> Vec<String> {
        self.attributes
            .iter()
            .cloned()
            .chain([COMMON_NEIGHBORS.to_string()])
            .collect()
    }

    /// CSV with one row per dyad: `u,v,<attributes...>,common_neighbors,label`.
    pub fn to_csv(&self) -> Result<String> {
        let mut w = csv::Writer::from_writer(Vec::new());
        let mut header = vec!["u".to_string(), "v".to_string()];
        header.extend(self.feature_names());
        header.push("label".into());
        w.write_record(&header)?;
        for row in &self.rows {
            let f = &row.features;
            let mut rec = vec![f.u.clone(), f.v.clone()];
            rec.extend(f.agreement.iter().map(|a| a.to_string()));
            rec.push(f.common_neighbors.to_string());
            rec.push(u8::from(row.label).to_string());
            w.write_record(&rec)?;
        }
        let bytes = w.into_inner().map_err(|e| Error::InvalidArgument(e.to_string()))?;
        Ok(String::from_utf8(bytes).expect("csv output is utf-8"))
    }

    pub fn write_csv(&self, path: impl AsRef<Path>) -> Result<()> {
        let path = path.as_ref();
        fs::write(path, self.to_csv()?).map_err(|e| Error::io(path, e))
    }
}

/// Min-max bounds for the common-neighbor count, fitted on a training split.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct NeighborScale {
    pub min: f64,
    pub max: f64,
}

impl NeighborScale {
    pub fn fit(train: &LabeledDataset) -> Self {
        let counts = train.rows.iter().map(|r| r.features.common_neighbors as f64);
        let (min, max) = counts.fold((f64::INFINITY, f64::NEG_INFINITY), |(lo, hi), c| (lo.min(c), hi.max(c)));
        if min.is_finite() {
            NeighborScale { min, max }
        } else {
            NeighborScale { min: 0.0, max: 0.0 }
        }
    }

    /// Scaled to `[0, 1]`; values outside the training range are clamped.
    pub fn apply(&self, count: usize) -> f64 {
        let span = self.max - self.min;
        if span <= 0.0 {
            return 0.0;
        }
        ((count as f64 - self.min) / span).clamp(0.0, 1.0)
    }

    /// Feature matrix for `data`: agreements followed by the scaled count.
    pub fn samples(&self, data: &LabeledDataset) -> Samples {
        let names = data.feature_names();
        let mut values = Vec::with_capacity(data.len() * names.len());
        let mut labels = Vec::with_capacity(data.len());
        for row in &data.rows {
            values.extend_from_slice(&row.features.agreement);
            values.push(self.apply(row.features.common_neighbors));
            labels.push(row.label);
        }
        Samples::new(names, values, labels).expect("rows have one value per feature")
    }
}

/// Absent dyads whose endpoints are within `hops` of each other.
pub fn formation_candidates(snapshot: &Snapshot, kind: NetworkKind, hops: u32) -> Vec<Dyad> {
    let mut out = Vec::new();
    for u in 0..snapshot.node_count() {
        let dist = snapshot.hop_distances(kind, u, hops);
        for (v, d) in dist.iter().enumerate().skip(u + 1) {
            if matches!(d, Some(d) if *d >= 2) {
                out.push((u, v));
            }
        }
    }
    out
}

/// Positive when the candidate dyad is joined in `next`.
pub fn label_formation(candidates: &[Dyad], snapshot: &Snapshot, next: &Snapshot, kind: NetworkKind) -> Vec<bool> {
    candidates
        .iter()
        .map(|&(u, v)| next.has_edge_between(kind, snapshot.id(u), snapshot.id(v)))
        .collect()
}

/// An edge is dissolving when it disappears or its volume drops to at most
/// a third of the current volume.
pub fn is_dissolving(weight_now: u64, weight_next: Option<u64>) -> bool {
    match weight_next {
        None => true,
        Some(next) => 3 * next <= weight_now,
    }
}

/// Dissolution labels for every edge of `snapshot` in the selected network.
///
/// A cognitive edge dissolves when it is gone next semester or when the
/// behavioral edge of the same dyad is dissolving.
pub fn label_dissolution(snapshot: &Snapshot, next: &Snapshot, kind: NetworkKind) -> Vec<(Dyad, bool)> {
    let behavioral_dissolving = |u: usize, v: usize| {
        snapshot
            .weight(u, v)
            .map(|w| is_dissolving(w, next.weight_between(snapshot.id(u), snapshot.id(v))))
    };
    snapshot
        .edges(kind)
        .into_iter()
        .map(|(u, v)| {
            let label = match kind {
                NetworkKind::Behavioral => behavioral_dissolving(u, v).unwrap_or(true),
                NetworkKind::Cognitive => {
                    !next.has_edge_between(kind, snapshot.id(u), snapshot.id(v))
                        || behavioral_dissolving(u, v).unwrap_or(false)
                }
            };
            ((u, v), label)
        })
        .collect()
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct DatasetOptions {
    pub hop_limit: u32,
}

impl Default for DatasetOptions {
    fn default() -> Self {
        DatasetOptions {
            hop_limit: DEFAULT_HOP_LIMIT,
        }
    }
}

/// Rows for one (feature snapshot, label snapshot) pair.
pub fn labeled_dataset(
    task: Task,
    method: CombinationMethod,
    features_from: &Snapshot,
    labels_from: &Snapshot,
    kind: NetworkKind,
    schema: &AttributeSchema,
    options: DatasetOptions,
) -> Result<LabeledDataset> {
    if features_from.semester() >= labels_from.semester() {
        return Err(Error::InvalidArgument(format!(
            "feature semester {} must precede label semester {}",
            features_from.semester(),
            labels_from.semester()
        )));
    }
    let prefs = compute_preferences(features_from, kind, schema)?;
    let ctx = AgreementContext::new(features_from, &prefs, schema)?;
    let labeled: Vec<(Dyad, bool)> = match task {
        Task::Formation => {
            let candidates = formation_candidates(features_from, kind, options.hop_limit);
            let labels = label_formation(&candidates, features_from, labels_from, kind);
            candidates.into_iter().zip(labels).collect()
        }
        Task::Dissolution => label_dissolution(features_from, labels_from, kind),
    };
    Ok(LabeledDataset {
        task,
        network: kind,
        method,
        feature_semester: features_from.semester(),
        label_semester: labels_from.semester(),
        attributes: schema.names().map(String::from).collect(),
        rows: labeled
            .into_iter()
            .map(|(dyad, label)| LabeledRow {
                features: ctx.dyad(method, kind, dyad),
                label,
            })
            .collect(),
    })
}

/// Training and test datasets for predicting semester `target`.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct TaskData {
    /// Features of `target - 2`, labels of `target - 1`.
    pub train: LabeledDataset,
    /// Features of `target - 1`, labels of `target`.
    pub test: LabeledDataset,
}

/// Builds the train/test datasets for predicting semester `target`, which
/// needs snapshots `target - 2`, `target - 1` and `target`.
pub fn build_dataset(
    task: Task,
    method: CombinationMethod,
    snapshots: &[Snapshot],
    target: u32,
    kind: NetworkKind,
    schema: &AttributeSchema,
    options: DatasetOptions,
) -> Result<TaskData> {
    let find = |k: u32| {
        snapshots.iter().find(|s| s.semester() == k).ok_or_else(|| {
            Error::InsufficientData(format!(
                "predicting semester {target} needs snapshots {}..={target}; semester {k} is missing",
                target.saturating_sub(2)
            ))
        })
    };
    if target < 3 {
        return Err(Error::InsufficientData(format!(
            "predicting semester {target} needs two earlier snapshots"
        )));
    }
    let (first, second, third) = (find(target - 2)?, find(target - 1)?, find(target)?);
    Ok(TaskData {
        train: labeled_dataset(task, method, first, second, kind, schema, options)?,
        test: labeled_dataset(task, method, second, third, kind, schema, options)?,
    })
}
