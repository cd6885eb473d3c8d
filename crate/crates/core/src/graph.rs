//! Per-semester network snapshots and the graph queries the prediction
//! pipeline needs: edge weights, neighborhoods, hop distances and common
//! neighbors.
//!
//! A [`Snapshot`] holds two undirected networks over the same node set:
//! the behavioral network (weighted by communication volume) and the
//! cognitive network (binary friendship nominations). Nodes are stored
//! sorted by id, so node indices and edge iteration order are deterministic.

use std::collections::{BTreeMap, BTreeSet, HashMap, VecDeque};
use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Weight contributed by a single phone call.
pub const CALL_WEIGHT: u64 = 10;
/// Weight contributed by a single text message.
pub const TEXT_WEIGHT: u64 = 1;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum NetworkKind {
    Behavioral,
    Cognitive,
}

impl NetworkKind {
    pub const ALL: [NetworkKind; 2] = [NetworkKind::Behavioral, NetworkKind::Cognitive];

    pub fn as_str(self) -> &'static str {
        match self {
            NetworkKind::Behavioral => "behavioral",
            NetworkKind::Cognitive => "cognitive",
        }
    }

    fn slot(self) -> usize {
        match self {
            NetworkKind::Behavioral => 0,
            NetworkKind::Cognitive => 1,
        }
    }
}

impl fmt::Display for NetworkKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.pad(self.as_str())
    }
}

impl FromStr for NetworkKind {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "behavioral" => Ok(NetworkKind::Behavioral),
            "cognitive" => Ok(NetworkKind::Cognitive),
            other => Err(Error::InvalidArgument(format!(
                "unknown network `{other}` (expected behavioral or cognitive)"
            ))),
        }
    }
}

/// Behavioral edge weight: 10 per call plus 1 per text.
///
/// A dyad with no communication has no edge, so `(0, 0)` is an error.
pub fn edge_weight(calls: u64, texts: u64) -> Result<u64> {
    if calls == 0 && texts == 0 {
        return Err(Error::InvalidArgument(
            "edge weight requested for a dyad with no calls or texts".into(),
        ));
    }
    Ok(CALL_WEIGHT * calls + TEXT_WEIGHT * texts)
}

/// A study participant and its attribute assignment for one semester.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct Node {
    pub id: String,
    pub attributes: BTreeMap<String, String>,
}

impl Node {
    pub fn new(id: impl Into<String>) -> Self {
        Node {
            id: id.into(),
            attributes: BTreeMap::new(),
        }
    }

    pub fn with(mut self, attribute: impl Into<String>, value: impl Into<String>) -> Self {
        self.attributes.insert(attribute.into(), value.into());
        self
    }
}

/// Unordered node pair, stored as `(low, high)` node indices.
pub type Dyad = (usize, usize);

fn ordered(a: usize, b: usize) -> Dyad {
    if a < b {
        (a, b)
    } else {
        (b, a)
    }
}

/// One semester's behavioral and cognitive networks plus node attributes.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(into = "SnapshotDoc", try_from = "SnapshotDoc")]
pub struct Snapshot {
    semester: u32,
    nodes: Vec<Node>,
    index: HashMap<String, usize>,
    behavioral: BTreeMap<Dyad, u64>,
    cognitive: BTreeSet<Dyad>,
    adjacency: [Vec<Vec<usize>>; 2],
}

impl Snapshot {
    /// Builds a snapshot from nodes and id-keyed edge lists.
    ///
    /// Edges are undirected; `(a, b)` and `(b, a)` name the same dyad and
    /// may not both appear. Self-loops, unknown endpoints, zero behavioral
    /// weights and duplicate node ids are rejected.
    pub fn new<B, C>(semester: u32, mut nodes: Vec<Node>, behavioral: B, cognitive: C) -> Result<Self>
    where
        B: IntoIterator<Item = (String, String, u64)>,
        C: IntoIterator<Item = (String, String)>,
    {
        nodes.sort_by(|a, b| a.id.cmp(&b.id));
        let mut index = HashMap::with_capacity(nodes.len());
        for (i, node) in nodes.iter().enumerate() {
            if index.insert(node.id.clone(), i).is_some() {
                return Err(Error::InvalidArgument(format!(
                    "duplicate node `{}` in semester {semester}",
                    node.id
                )));
            }
        }

        let lookup = |id: &str| index.get(id).copied().ok_or_else(|| Error::UnknownNode(id.to_string()));
        let dyad = |a: &str, b: &str| -> Result<Dyad> {
            if a == b {
                return Err(Error::InvalidArgument(format!("self-loop on `{a}`")));
            }
            Ok(ordered(lookup(a)?, lookup(b)?))
        };

        let mut behavioral_edges = BTreeMap::new();
        for (a, b, weight) in behavioral {
            if weight == 0 {
                return Err(Error::InvalidArgument(format!(
                    "behavioral edge {a}-{b} has zero weight"
                )));
            }
            if behavioral_edges.insert(dyad(&a, &b)?, weight).is_some() {
                return Err(Error::InvalidArgument(format!("duplicate behavioral edge {a}-{b}")));
            }
        }
        let mut cognitive_edges = BTreeSet::new();
        for (a, b) in cognitive {
            if !cognitive_edges.insert(dyad(&a, &b)?) {
                return Err(Error::InvalidArgument(format!("duplicate cognitive edge {a}-{b}")));
            }
        }

        Ok(Self::from_parts(
            semester,
            nodes,
            index,
            behavioral_edges,
            cognitive_edges,
        ))
    }

    fn from_parts(
        semester: u32,
        nodes: Vec<Node>,
        index: HashMap<String, usize>,
        behavioral: BTreeMap<Dyad, u64>,
        cognitive: BTreeSet<Dyad>,
    ) -> Self {
        let n = nodes.len();
        let mut adjacency = [vec![Vec::new(); n], vec![Vec::new(); n]];
        for &(a, b) in behavioral.keys() {
            adjacency[0][a].push(b);
            adjacency[0][b].push(a);
        }
        for &(a, b) in &cognitive {
            adjacency[1][a].push(b);
            adjacency[1][b].push(a);
        }
        for list in adjacency.iter_mut().flatten() {
            list.sort_unstable();
        }
        Snapshot {
            semester,
            nodes,
            index,
            behavioral,
            cognitive,
            adjacency,
        }
    }

    pub fn semester(&self) -> u32 {
        self.semester
    }

    pub fn node_count(&self) -> usize {
        self.nodes.len()
    }

    pub fn edge_count(&self, kind: NetworkKind) -> usize {
        match kind {
            NetworkKind::Behavioral => self.behavioral.len(),
            NetworkKind::Cognitive => self.cognitive.len(),
        }
    }

    pub fn nodes(&self) -> &[Node] {
        &self.nodes
    }

    pub fn node(&self, index: usize) -> &Node {
        &self.nodes[index]
    }

    pub fn id(&self, index: usize) -> &str {
        &self.nodes[index].id
    }

    pub fn index_of(&self, id: &str) -> Option<usize> {
        self.index.get(id).copied()
    }

    fn require(&self, id: &str) -> Result<usize> {
        self.index_of(id).ok_or_else(|| Error::UnknownNode(id.to_string()))
    }

    pub fn contains(&self, id: &str) -> bool {
        self.index.contains_key(id)
    }

    /// Value of `attribute` held by the node at `index`, if recorded.
    pub fn attribute(&self, index: usize, attribute: &str) -> Option<&str> {
        self.nodes[index].attributes.get(attribute).map(String::as_str)
    }

    /// Sorted neighbor indices of `index` in the selected network.
    pub fn neighbors(&self, kind: NetworkKind, index: usize) -> &[usize] {
        &self.adjacency[kind.slot()][index]
    }

    pub fn degree(&self, kind: NetworkKind, index: usize) -> usize {
        self.neighbors(kind, index).len()
    }

    pub fn has_edge(&self, kind: NetworkKind, a: usize, b: usize) -> bool {
        if a == b {
            return false;
        }
        match kind {
            NetworkKind::Behavioral => self.behavioral.contains_key(&ordered(a, b)),
            NetworkKind::Cognitive => self.cognitive.contains(&ordered(a, b)),
        }
    }

    /// Id-keyed edge test; unknown ids simply have no edges.
    pub fn has_edge_between(&self, kind: NetworkKind, a: &str, b: &str) -> bool {
        match (self.index_of(a), self.index_of(b)) {
            (Some(a), Some(b)) => self.has_edge(kind, a, b),
            _ => false,
        }
    }

    pub fn weight(&self, a: usize, b: usize) -> Option<u64> {
        self.behavioral.get(&ordered(a, b)).copied()
    }

    pub fn weight_between(&self, a: &str, b: &str) -> Option<u64> {
        self.weight(self.index_of(a)?, self.index_of(b)?)
    }

    /// Edges of the selected network as ordered index pairs, in ascending order.
    pub fn edges(&self, kind: NetworkKind) -> Vec<Dyad> {
        match kind {
            NetworkKind::Behavioral => self.behavioral.keys().copied().collect(),
            NetworkKind::Cognitive => self.cognitive.iter().copied().collect(),
        }
    }

    pub fn behavioral_edges(&self) -> impl Iterator<Item = (Dyad, u64)> + '_ {
        self.behavioral.iter().map(|(&d, &w)| (d, w))
    }

    pub fn common_neighbors_of(&self, kind: NetworkKind, a: usize, b: usize) -> usize {
        let (mut i, mut j) = (0, 0);
        let (na, nb) = (self.neighbors(kind, a), self.neighbors(kind, b));
        let mut shared = 0;
        while i < na.len() && j < nb.len() {
            match na[i].cmp(&nb[j]) {
                std::cmp::Ordering::Less => i += 1,
                std::cmp::Ordering::Greater => j += 1,
                std::cmp::Ordering::Equal => {
                    shared += 1;
                    i += 1;
                    j += 1;
                }
            }
        }
        shared
    }

    /// `|N(u) ∩ N(v)|` in the selected network.
    pub fn common_neighbors(&self, kind: NetworkKind, u: &str, v: &str) -> Result<usize> {
        let (a, b) = (self.require(u)?, self.require(v)?);
        if a == b {
            return Err(Error::InvalidArgument(format!("common neighbors of `{u}` with itself")));
        }
        Ok(self.common_neighbors_of(kind, a, b))
    }

    /// Breadth-first hop distances from `source`, truncated at `limit` hops.
    /// `None` marks nodes further than `limit` (or unreachable).
    pub fn hop_distances(&self, kind: NetworkKind, source: usize, limit: u32) -> Vec<Option<u32>> {
        let mut dist = vec![None; self.nodes.len()];
        dist[source] = Some(0);
        let mut queue = VecDeque::from([source]);
        while let Some(at) = queue.pop_front() {
            let d = dist[at].unwrap_or(0);
            if d == limit {
                continue;
            }
            for &next in self.neighbors(kind, at) {
                if dist[next].is_none() {
                    dist[next] = Some(d + 1);
                    queue.push_back(next);
                }
            }
        }
        dist
    }

    /// Nodes at shortest-path distance `1..=hops` from `u`.
    pub fn within_hops(&self, kind: NetworkKind, u: &str, hops: u32) -> Result<BTreeSet<String>> {
        if hops == 0 {
            return Err(Error::InvalidArgument("hop limit must be at least 1".into()));
        }
        let source = self.require(u)?;
        Ok(self
            .hop_distances(kind, source, hops)
            .into_iter()
            .enumerate()
            .filter(|&(i, d)| i != source && d.is_some())
            .map(|(i, _)| self.nodes[i].id.clone())
            .collect())
    }
}

/// Canonical JSON form of a [`Snapshot`].
#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct SnapshotDoc {
    pub semester: u32,
    pub nodes: Vec<Node>,
    pub behavioral_edges: Vec<WeightedEdge>,
    pub cognitive_edges: Vec<(String, String)>,
}

#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct WeightedEdge {
    pub source: String,
    pub target: String,
    pub weight: u64,
}

impl From<Snapshot> for SnapshotDoc {
    fn from(s: Snapshot) -> Self {
        let id = |i: usize| s.nodes[i].id.clone();
        SnapshotDoc {
            semester: s.semester,
            behavioral_edges: s
                .behavioral
                .iter()
                .map(|(&(a, b), &weight)| WeightedEdge {
                    source: id(a),
                    target: id(b),
                    weight,
                })
                .collect(),
            cognitive_edges: s.cognitive.iter().map(|&(a, b)| (id(a), id(b))).collect(),
            nodes: s.nodes,
        }
    }
}

impl TryFrom<SnapshotDoc> for Snapshot {
    type Error = Error;

    fn try_from(doc: SnapshotDoc) -> Result<Self> {
        Snapshot::new(
            doc.semester,
            doc.nodes,
            doc.behavioral_edges.into_iter().map(|e| (e.source, e.target, e.weight)),
            doc.cognitive_edges,
        )
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn graph(ids: &[&str], edges: &[(&str, &str)]) -> Snapshot {
        let nodes = ids.iter().map(|id| Node::new(*id)).collect();
        let e: Vec<_> = edges.iter().map(|(a, b)| (a.to_string(), b.to_string(), 1)).collect();
        let c: Vec<_> = edges.iter().map(|(a, b)| (a.to_string(), b.to_string())).collect();
        Snapshot::new(1, nodes, e, c).unwrap()
    }

    #[test]
    fn weight_rule() {
        assert_eq!(edge_weight(2, 3).unwrap(), 23);
        assert_eq!(edge_weight(0, 1).unwrap(), 1);
        assert_eq!(edge_weight(1, 0).unwrap(), 10);
        assert!(edge_weight(0, 0).is_err());
    }

    #[test]
    fn common_neighbor_examples() {
        let tri = graph(&["A", "B", "C"], &[("A", "B"), ("B", "C"), ("A", "C")]);
        assert_eq!(tri.common_neighbors(NetworkKind::Behavioral, "A", "B").unwrap(), 1);

        let split = graph(&["A", "B", "C", "D"], &[("A", "C"), ("B", "D")]);
        assert_eq!(split.common_neighbors(NetworkKind::Cognitive, "A", "B").unwrap(), 0);

        let five = graph(
            &["A", "B", "C", "D", "E"],
            &[("A", "C"), ("A", "D"), ("B", "C"), ("B", "D"), ("C", "D")],
        );
        assert_eq!(five.common_neighbors(NetworkKind::Behavioral, "A", "B").unwrap(), 2);
        assert!(matches!(
            five.common_neighbors(NetworkKind::Behavioral, "A", "Z"),
            Err(Error::UnknownNode(_))
        ));
    }

    #[test]
    fn hops_on_a_path() {
        let path = graph(
            &["A", "B", "C", "D", "E"],
            &[("A", "B"), ("B", "C"), ("C", "D"), ("D", "E")],
        );
        let got = path.within_hops(NetworkKind::Behavioral, "A", 3).unwrap();
        assert_eq!(got, ["B", "C", "D"].iter().map(|s| s.to_string()).collect());
        assert!(path.within_hops(NetworkKind::Behavioral, "A", 0).is_err());
        assert!(path.within_hops(NetworkKind::Behavioral, "Q", 2).is_err());

        let isolated = graph(&["A", "B", "C"], &[("B", "C")]);
        assert!(isolated
            .within_hops(NetworkKind::Behavioral, "A", 3)
            .unwrap()
            .is_empty());
    }

    #[test]
    fn rejects_bad_edges() {
        let nodes = || vec![Node::new("A"), Node::new("B")];
        let none = Vec::<(String, String)>::new();
        assert!(Snapshot::new(1, nodes(), vec![("A".into(), "A".into(), 1)], none.clone()).is_err());
        assert!(Snapshot::new(1, nodes(), vec![("A".into(), "B".into(), 0)], none.clone()).is_err());
        assert!(Snapshot::new(1, nodes(), vec![("A".into(), "X".into(), 3)], none.clone()).is_err());
        assert!(Snapshot::new(
            1,
            nodes(),
            vec![("A".into(), "B".into(), 3), ("B".into(), "A".into(), 1)],
            none
        )
        .is_err());
    }

    #[test]
    fn json_round_trip() {
        let nodes = vec![
            Node::new("B").with("politics", "liberal"),
            Node::new("A").with("politics", "moderate"),
            Node::new("C"),
        ];
        let s = Snapshot::new(
            2,
            nodes,
            vec![("B".into(), "A".into(), 23), ("C".into(), "B".into(), 1)],
            vec![("A".into(), "C".into())],
        )
        .unwrap();
        let json = serde_json::to_string(&s).unwrap();
        let back: Snapshot = serde_json::from_str(&json).unwrap();
        assert_eq!(back, s);
        assert_eq!(back.weight_between("A", "B"), Some(23));
        assert!(back.has_edge_between(NetworkKind::Cognitive, "C", "A"));
    }
}
