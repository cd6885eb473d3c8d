//! Personal preferences: how strongly each node's neighborhood over- or
//! under-represents every attribute value relative to the whole network.
//!
//! For node `n` with `N` neighbors, of which `x` hold value `v`, and a
//! network-wide share `p` of nodes holding `v`, the expected count is
//! `μ = N·p` with binomial spread `σ = sqrt(N·p·(1−p))`. The preference is
//! `Φ((x − μ) / σ)`, the standard normal CDF of the Z-score, so 0.5 means no
//! preference, values near 1 a strong positive preference and values near 0
//! a strong aversion.
//!
//! Nodes without a recorded value for an attribute are left out of that
//! attribute's population shares and are not counted as neighbors when
//! scoring it.

use std::collections::BTreeMap;

use serde::{Deserialize, Serialize};
use statrs::function::erf::erfc;

use crate::error::{Error, Result};
use crate::graph::{NetworkKind, Snapshot};
use crate::ingest::AttributeSchema;

/// Default change in mean preference counted as a trend.
pub const DEFAULT_TREND_EPSILON: f64 = 0.05;

/// Standard normal cumulative distribution function.
pub fn standard_normal_cdf(z: f64) -> f64 {
    0.5 * erfc(-z / std::f64::consts::SQRT_2)
}

/// Z-score of observing `holders` of a value among `neighbors` when the
/// population share is `share`. `None` when the spread is zero.
pub fn preference_z(neighbors: usize, share: f64, holders: usize) -> Option<f64> {
    let n = neighbors as f64;
    let sd = (n * share * (1.0 - share)).sqrt();
    if neighbors == 0 || share <= 0.0 || share >= 1.0 || sd == 0.0 {
        return None;
    }
    let diff = holders as f64 - n * share;
    // an integer count matching its expectation is exactly neutral
    if diff.abs() < 1e-9 {
        return Some(0.0);
    }
    Some(diff / sd)
}

/// Preference score in `[0, 1]`; 0.5 when there is no evidence either way
/// (no neighbors, or a value held by nobody or by everybody).
pub fn preference_score(neighbors: usize, share: f64, holders: usize) -> f64 {
    match preference_z(neighbors, share, holders) {
        Some(0.0) => 0.5,
        Some(z) => standard_normal_cdf(z),
        None => 0.5,
    }
}

/// Attribute value codes for every node of a snapshot, aligned with the schema.
#[derive(Clone, Debug)]
pub(crate) struct ValueCodes {
    codes: Vec<Vec<Option<usize>>>,
}

impl ValueCodes {
    pub(crate) fn new(snapshot: &Snapshot, schema: &AttributeSchema) -> Self {
        let codes = (0..snapshot.node_count())
            .map(|i| {
                schema
                    .attributes()
                    .iter()
                    .enumerate()
                    .map(|(a, attr)| snapshot.attribute(i, &attr.name).and_then(|v| schema.value_index(a, v)))
                    .collect()
            })
            .collect();
        ValueCodes { codes }
    }

    pub(crate) fn get(&self, node: usize, attribute: usize) -> Option<usize> {
        self.codes[node][attribute]
    }
}

/// Network-wide share of nodes holding each value, per attribute.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ValueDistribution {
    pub attributes: Vec<String>,
    /// `shares[a][v]`: fraction of nodes with a known value for `a` that hold `v`.
    pub shares: Vec<Vec<f64>>,
    /// Number of nodes with a known value, per attribute.
    pub holders: Vec<usize>,
}

impl ValueDistribution {
    pub fn share(&self, attribute: usize, value: usize) -> f64 {
        self.shares[attribute][value]
    }
}

fn distribution_from_codes(codes: &ValueCodes, n: usize, schema: &AttributeSchema) -> Result<ValueDistribution> {
    let mut shares = Vec::with_capacity(schema.len());
    let mut holders = Vec::with_capacity(schema.len());
    for (a, attr) in schema.attributes().iter().enumerate() {
        let mut counts = vec![0usize; attr.values.len()];
        for node in 0..n {
            if let Some(v) = codes.get(node, a) {
                counts[v] += 1;
            }
        }
        let total: usize = counts.iter().sum();
        if total == 0 {
            return Err(Error::InsufficientData(format!(
                "no node holds a value for attribute `{}`",
                attr.name
            )));
        }
        shares.push(counts.iter().map(|&c| c as f64 / total as f64).collect());
        holders.push(total);
    }
    Ok(ValueDistribution {
        attributes: schema.names().map(String::from).collect(),
        shares,
        holders,
    })
}

/// Share of nodes holding each attribute value in `snapshot`.
pub fn value_distribution(snapshot: &Snapshot, schema: &AttributeSchema) -> Result<ValueDistribution> {
    distribution_from_codes(&ValueCodes::new(snapshot, schema), snapshot.node_count(), schema)
}

/// Counts neighbors of `node` with a known value for `attribute`, per value.
fn neighbor_counts(
    snapshot: &Snapshot,
    kind: NetworkKind,
    codes: &ValueCodes,
    node: usize,
    attribute: usize,
    values: usize,
) -> (usize, Vec<usize>) {
    let mut counts = vec![0; values];
    let mut known = 0;
    for &nb in snapshot.neighbors(kind, node) {
        if let Some(v) = codes.get(nb, attribute) {
            counts[v] += 1;
            known += 1;
        }
    }
    (known, counts)
}

/// Preference of `node` for `value` of `attribute` in the selected network.
pub fn node_preference(
    node: &str,
    attribute: &str,
    value: &str,
    snapshot: &Snapshot,
    kind: NetworkKind,
    schema: &AttributeSchema,
    dist: &ValueDistribution,
) -> Result<f64> {
    let idx = snapshot
        .index_of(node)
        .ok_or_else(|| Error::UnknownNode(node.to_string()))?;
    let a = schema
        .attribute_index(attribute)
        .ok_or_else(|| Error::UnknownAttribute(attribute.to_string()))?;
    let v = schema
        .value_index(a, value)
        .ok_or_else(|| Error::InvalidArgument(format!("`{value}` is not a value of `{attribute}`")))?;
    let codes = ValueCodes::new(snapshot, schema);
    let (known, counts) = neighbor_counts(snapshot, kind, &codes, idx, a, schema.attributes()[a].values.len());
    Ok(preference_score(known, dist.share(a, v), counts[v]))
}

/// Every node's preference for every value of every attribute.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct PreferenceTable {
    pub semester: u32,
    pub network: NetworkKind,
    pub attributes: Vec<String>,
    pub values: Vec<Vec<String>>,
    pub nodes: Vec<String>,
    /// Neighbor count of each node in `network`.
    pub neighbors: Vec<usize>,
    /// `scores[node][attribute][value]`, node order as in `nodes`.
    pub scores: Vec<Vec<Vec<f64>>>,
}

impl PreferenceTable {
    pub fn node_position(&self, id: &str) -> Option<usize> {
        self.nodes.binary_search_by(|n| n.as_str().cmp(id)).ok()
    }

    /// Preference by node position, attribute and value indices.
    pub fn score(&self, node: usize, attribute: usize, value: usize) -> f64 {
        self.scores[node][attribute][value]
    }

    pub fn get(&self, node: &str, attribute: &str, value: &str) -> Option<f64> {
        let n = self.node_position(node)?;
        let a = self.attributes.iter().position(|x| x == attribute)?;
        let v = self.values[a].iter().position(|x| x == value)?;
        Some(self.scores[n][a][v])
    }

    pub fn len(&self) -> usize {
        self.nodes.len()
    }

    pub fn is_empty(&self) -> bool {
        self.nodes.is_empty()
    }

    /// Nested `node -> attribute -> value -> preference` form for export.
    pub fn to_nested(&self) -> BTreeMap<&str, BTreeMap<&str, BTreeMap<&str, f64>>> {
        self.nodes
            .iter()
            .enumerate()
            .map(|(n, id)| {
                let attrs = self
                    .attributes
                    .iter()
                    .enumerate()
                    .map(|(a, name)| {
                        let vals = self.values[a]
                            .iter()
                            .enumerate()
                            .map(|(v, value)| (value.as_str(), self.scores[n][a][v]))
                            .collect();
                        (name.as_str(), vals)
                    })
                    .collect();
                (id.as_str(), attrs)
            })
            .collect()
    }
}

/// Applies [`preference_score`] to every (node, attribute, value) triple.
pub fn compute_preferences(
    snapshot: &Snapshot,
    kind: NetworkKind,
    schema: &AttributeSchema,
) -> Result<PreferenceTable> {
    let codes = ValueCodes::new(snapshot, schema);
    let dist = distribution_from_codes(&codes, snapshot.node_count(), schema)?;
    let scores = (0..snapshot.node_count())
        .map(|node| {
            schema
                .attributes()
                .iter()
                .enumerate()
                .map(|(a, attr)| {
                    let (known, counts) = neighbor_counts(snapshot, kind, &codes, node, a, attr.values.len());
                    counts
                        .iter()
                        .enumerate()
                        .map(|(v, &x)| preference_score(known, dist.share(a, v), x))
                        .collect()
                })
                .collect()
        })
        .collect();
    Ok(PreferenceTable {
        semester: snapshot.semester(),
        network: kind,
        attributes: dist.attributes.clone(),
        values: schema.attributes().iter().map(|a| a.values.clone()).collect(),
        nodes: snapshot.nodes().iter().map(|n| n.id.clone()).collect(),
        neighbors: (0..snapshot.node_count()).map(|i| snapshot.degree(kind, i)).collect(),
        scores,
    })
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct MatrixRow {
    /// The value held by the nodes averaged in this row.
    pub value: String,
    pub holders: usize,
    /// Mean preference of the holders for each column value.
    pub preference: Vec<f64>,
    /// Mean observed/expected neighbor-count ratio `x / (N·p)` per column,
    /// over holders for which the expectation is positive. Reporting only.
    pub ratio: Vec<Option<f64>>,
}

/// Mean preference of nodes holding value `i` for value `j`, for one attribute.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct PreferenceMatrix {
    pub semester: u32,
    pub network: NetworkKind,
    pub attribute: String,
    /// Column order (schema value order).
    pub values: Vec<String>,
    /// Rows in schema order; values held by nobody have no row.
    pub rows: Vec<MatrixRow>,
}

impl PreferenceMatrix {
    pub fn row(&self, value: &str) -> Option<&MatrixRow> {
        self.rows.iter().find(|r| r.value == value)
    }

    pub fn cell(&self, own: &str, other: &str) -> Option<f64> {
        let j = self.values.iter().position(|v| v == other)?;
        self.row(own).map(|r| r.preference[j])
    }
}

pub fn average_preference_matrix(
    prefs: &PreferenceTable,
    snapshot: &Snapshot,
    schema: &AttributeSchema,
    attribute: &str,
) -> Result<PreferenceMatrix> {
    let a = schema
        .attribute_index(attribute)
        .ok_or_else(|| Error::UnknownAttribute(attribute.to_string()))?;
    let values = &schema.attributes()[a].values;
    let codes = ValueCodes::new(snapshot, schema);
    let dist = distribution_from_codes(&codes, snapshot.node_count(), schema)?;

    let k = values.len();
    let mut sums = vec![vec![0.0; k]; k];
    let mut ratio_sums = vec![vec![0.0; k]; k];
    let mut ratio_counts = vec![vec![0usize; k]; k];
    let mut holders = vec![0usize; k];
    for node in 0..snapshot.node_count() {
        let Some(own) = codes.get(node, a) else { continue };
        let pos = prefs
            .node_position(snapshot.id(node))
            .ok_or_else(|| Error::UnknownNode(snapshot.id(node).to_string()))?;
        holders[own] += 1;
        let (known, counts) = neighbor_counts(snapshot, prefs.network, &codes, node, a, k);
        for j in 0..k {
            sums[own][j] += prefs.score(pos, a, j);
            let expected = known as f64 * dist.share(a, j);
            if expected > 0.0 {
                ratio_sums[own][j] += counts[j] as f64 / expected;
                ratio_counts[own][j] += 1;
            }
        }
    }
    let rows = (0..k)
        .filter(|&i| holders[i] > 0)
        .map(|i| MatrixRow {
            value: values[i].clone(),
            holders: holders[i],
            preference: sums[i].iter().map(|s| s / holders[i] as f64).collect(),
            ratio: (0..k)
                .map(|j| (ratio_counts[i][j] > 0).then(|| ratio_sums[i][j] / ratio_counts[i][j] as f64))
                .collect(),
        })
        .collect();
    Ok(PreferenceMatrix {
        semester: snapshot.semester(),
        network: prefs.network,
        attribute: attribute.to_string(),
        values: values.clone(),
        rows,
    })
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Trend {
    Increase,
    Decrease,
    Unchanged,
}

impl Trend {
    pub fn classify(delta: f64, epsilon: f64) -> Trend {
        if delta > epsilon {
            Trend::Increase
        } else if delta < -epsilon {
            Trend::Decrease
        } else {
            Trend::Unchanged
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct TrendMark {
    pub attribute: String,
    pub from_semester: u32,
    pub to_semester: u32,
    pub own_value: String,
    pub other_value: String,
    pub delta: f64,
    pub trend: Trend,
}

/// Marks each matrix cell as increasing, decreasing or unchanged between
/// consecutive semesters. Cells whose row is missing in either semester are
/// skipped.
pub fn trend_marks(matrices: &[PreferenceMatrix], epsilon: f64) -> Result<Vec<TrendMark>> {
    if matrices.len() < 2 {
        return Err(Error::InsufficientData(
            "trend marks need at least two semesters".into(),
        ));
    }
    if epsilon.is_nan() || epsilon < 0.0 {
        return Err(Error::InvalidArgument(format!(
            "epsilon must be non-negative, got {epsilon}"
        )));
    }
    let mut marks = Vec::new();
    for pair in matrices.windows(2) {
        let (before, after) = (&pair[0], &pair[1]);
        if before.attribute != after.attribute || before.values != after.values {
            return Err(Error::InvalidArgument(format!(
                "cannot compare matrices for `{}` and `{}`",
                before.attribute, after.attribute
            )));
        }
        for row in &before.rows {
            let Some(next) = after.row(&row.value) else { continue };
            for (j, other) in before.values.iter().enumerate() {
                let delta = next.preference[j] - row.preference[j];
                marks.push(TrendMark {
                    attribute: before.attribute.clone(),
                    from_semester: before.semester,
                    to_semester: after.semester,
                    own_value: row.value.clone(),
                    other_value: other.clone(),
                    delta,
                    trend: Trend::classify(delta, epsilon),
                });
            }
        }
    }
    Ok(marks)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::graph::Node;
    use crate::ingest::Attribute;

    fn politics() -> AttributeSchema {
        AttributeSchema::new(vec![Attribute {
            name: "politics".into(),
            values: vec!["conservative".into(), "moderate".into(), "liberal".into()],
        }])
        .unwrap()
    }

    /// `hub` joined to every leaf; `others` are isolated.
    fn star(leaves: &[(&str, &str)], hub_value: &str, others: &[(&str, &str)]) -> Snapshot {
        let mut nodes = vec![Node::new("hub").with("politics", hub_value)];
        let mut edges = Vec::new();
        for (id, value) in leaves {
            nodes.push(Node::new(*id).with("politics", *value));
            edges.push(("hub".to_string(), id.to_string(), 1));
        }
        for (id, value) in others {
            nodes.push(Node::new(*id).with("politics", *value));
        }
        Snapshot::new(1, nodes, edges, Vec::<(String, String)>::new()).unwrap()
    }

    #[test]
    fn score_examples() {
        assert_eq!(preference_score(10, 0.5, 5), 0.5);
        assert_eq!(preference_score(0, 0.3, 0), 0.5);
        assert_eq!(preference_score(7, 0.0, 0), 0.5);
        assert_eq!(preference_score(7, 1.0, 7), 0.5);
        assert!((preference_z(10, 0.5, 8).unwrap() - 3.0 / 2.5f64.sqrt()).abs() < 1e-12);
        assert!((preference_z(12, 0.25, 0).unwrap() + 2.0).abs() < 1e-12);
    }

    #[test]
    fn distribution_counts() {
        let mut nodes = Vec::new();
        for i in 0..10 {
            let v = match i {
                0..=4 => "liberal",
                5..=7 => "moderate",
                _ => "conservative",
            };
            nodes.push(Node::new(format!("n{i}")).with("politics", v));
        }
        nodes.push(Node::new("unknown"));
        let s = Snapshot::new(1, nodes, Vec::new(), Vec::<(String, String)>::new()).unwrap();
        let d = value_distribution(&s, &politics()).unwrap();
        assert_eq!(d.holders, [10]);
        for (got, want) in d.shares[0].iter().zip([0.2, 0.3, 0.5]) {
            assert!((got - want).abs() < 1e-12);
        }

        let bare = Snapshot::new(1, vec![Node::new("x")], Vec::new(), Vec::<(String, String)>::new()).unwrap();
        assert!(value_distribution(&bare, &politics()).is_err());
    }

    #[test]
    fn isolated_nodes_are_neutral() {
        let s = Snapshot::new(
            1,
            vec![
                Node::new("a").with("politics", "liberal"),
                Node::new("b").with("politics", "moderate"),
            ],
            Vec::new(),
            Vec::<(String, String)>::new(),
        )
        .unwrap();
        let t = compute_preferences(&s, NetworkKind::Behavioral, &politics()).unwrap();
        assert!(t.scores.iter().flatten().flatten().all(|&p| p == 0.5));
        let m = average_preference_matrix(&t, &s, &politics(), "politics").unwrap();
        assert_eq!(m.rows.len(), 2);
        assert!(m.rows.iter().all(|r| r.preference.iter().all(|&p| p == 0.5)));
        assert!(m.row("conservative").is_none());
    }

    #[test]
    fn homophilous_hub_prefers_its_neighbors_value() {
        let s = star(
            &[
                ("a", "liberal"),
                ("b", "liberal"),
                ("c", "liberal"),
                ("d", "conservative"),
                ("e", "moderate"),
            ],
            "liberal",
            &[
                ("f", "conservative"),
                ("g", "conservative"),
                ("h", "moderate"),
                ("i", "moderate"),
                ("j", "moderate"),
            ],
        );
        let t = compute_preferences(&s, NetworkKind::Behavioral, &politics()).unwrap();
        let liberal = t.get("hub", "politics", "liberal").unwrap();
        assert!(liberal > t.get("hub", "politics", "moderate").unwrap());
        assert!(liberal > t.get("hub", "politics", "conservative").unwrap());

        let m = average_preference_matrix(&t, &s, &politics(), "politics").unwrap();
        let row = m.row("liberal").unwrap();
        let best = row.preference.iter().cloned().fold(f64::MIN, f64::max);
        assert_eq!(m.cell("liberal", "liberal").unwrap(), best);
        assert!(average_preference_matrix(&t, &s, &politics(), "religion").is_err());
    }

    #[test]
    fn table_cardinality() {
        let schema = AttributeSchema::new(vec![Attribute {
            name: "drinks".into(),
            values: vec!["no".into(), "yes".into()],
        }])
        .unwrap();
        let nodes = ["a", "b", "c"].map(|id| Node::new(id).with("drinks", if id == "a" { "yes" } else { "no" }));
        let s = Snapshot::new(
            1,
            nodes.to_vec(),
            vec![("a".into(), "b".into(), 1)],
            Vec::<(String, String)>::new(),
        )
        .unwrap();
        let t = compute_preferences(&s, NetworkKind::Behavioral, &schema).unwrap();
        assert_eq!(t.scores.iter().flatten().flatten().count(), 6);
        assert_eq!(t.neighbors, [1, 1, 0]);
    }

    #[test]
    fn trend_thresholds() {
        assert_eq!(Trend::classify(0.0, 0.05), Trend::Unchanged);
        assert_eq!(Trend::classify(0.2, 0.05), Trend::Increase);
        assert_eq!(Trend::classify(-0.04, 0.05), Trend::Unchanged);
        assert_eq!(Trend::classify(-0.2, 0.05), Trend::Decrease);

        let m = |semester, attribute: &str, p: f64| PreferenceMatrix {
            semester,
            network: NetworkKind::Behavioral,
            attribute: attribute.into(),
            values: vec!["x".into(), "y".into()],
            rows: vec![MatrixRow {
                value: "x".into(),
                holders: 1,
                preference: vec![p, 0.5],
                ratio: vec![None, None],
            }],
        };
        let marks = trend_marks(&[m(1, "a", 0.5), m(2, "a", 0.7)], DEFAULT_TREND_EPSILON).unwrap();
        assert_eq!(marks.len(), 2);
        assert_eq!(marks[0].trend, Trend::Increase);
        assert_eq!(marks[1].trend, Trend::Unchanged);
        assert!(trend_marks(&[m(1, "a", 0.5)], 0.05).is_err());
        assert!(trend_marks(&[m(1, "a", 0.5), m(2, "b", 0.5)], 0.05).is_err());
    }
}
