//! Strong and weak edges and how often each survives into the next semester.
//!
//! An edge is strong when its endpoints hold identical values on at least a
//! fraction `t_s` of the attributes both have answered.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::graph::{NetworkKind, Snapshot};
use crate::ingest::AttributeSchema;

pub const DEFAULT_STRONG_THRESHOLD: f64 = 0.75;

/// Share of comparable attributes on which `u` and `v` hold the same value.
/// Attributes missing for either node are left out entirely.
pub fn agreement_fraction(u: &str, v: &str, snapshot: &Snapshot, schema: &AttributeSchema) -> Result<f64> {
    let ui = snapshot.index_of(u).ok_or_else(|| Error::UnknownNode(u.to_string()))?;
    let vi = snapshot.index_of(v).ok_or_else(|| Error::UnknownNode(v.to_string()))?;
    fraction_of(snapshot, schema, ui, vi)
        .ok_or_else(|| Error::InsufficientData(format!("{u} and {v} share no answered attribute")))
}

fn fraction_of(snapshot: &Snapshot, schema: &AttributeSchema, u: usize, v: usize) -> Option<f64> {
    let (mut same, mut compared) = (0usize, 0usize);
    for name in schema.names() {
        if let (Some(a), Some(b)) = (snapshot.attribute(u, name), snapshot.attribute(v, name)) {
            compared += 1;
            same += usize::from(a == b);
        }
    }
    (compared > 0).then(|| same as f64 / compared as f64)
}

pub fn is_strong(fraction: f64, threshold: f64) -> bool {
    fraction >= threshold
}

/// Edge counts for one class of edges, and how many of them survived.
#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct Tally {
    pub edges: usize,
    pub survived: usize,
}

impl Tally {
    pub fn rate(&self) -> Option<f64> {
        (self.edges > 0).then(|| self.survived as f64 / self.edges as f64)
    }

    fn add(&mut self, other: Tally) {
        self.edges += other.edges;
        self.survived += other.survived;
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct SemesterSurvival {
    pub semester: u32,
    pub edges: usize,
    /// Edges whose endpoints share no answered attribute; neither strong nor weak.
    pub incomparable: usize,
    pub strong: usize,
    pub weak: usize,
    /// `strong / (strong + weak)`.
    pub strong_fraction: Option<f64>,
    /// Survival into the next semester; `None` for the last semester.
    pub strong_survival: Option<Tally>,
    pub weak_survival: Option<Tally>,
    pub strong_survival_rate: Option<f64>,
    pub weak_survival_rate: Option<f64>,
    /// Edges also present the semester before; `None` for the first semester.
    pub aged_edges: Option<usize>,
    pub aged_strong: Option<usize>,
    pub aged_strong_fraction: Option<f64>,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct SurvivalReport {
    pub network: NetworkKind,
    pub threshold: f64,
    pub semesters: Vec<SemesterSurvival>,
    /// Survival counts summed over every semester that has a successor.
    pub pooled_strong: Tally,
    pub pooled_weak: Tally,
    pub strong_survival_rate: Option<f64>,
    pub weak_survival_rate: Option<f64>,
    /// Pooled strong rate minus pooled weak rate.
    pub gap: Option<f64>,
}

/// Per-semester and pooled survival of strong and weak edges. Snapshots are
/// taken in semester order; an edge survives when the same dyad is joined in
/// the following snapshot.
pub fn survival_rates(
    snapshots: &[Snapshot],
    kind: NetworkKind,
    schema: &AttributeSchema,
    threshold: f64,
) -> Result<SurvivalReport> {
    if snapshots.len() < 2 {
        return Err(Error::InsufficientData("survival needs at least two snapshots".into()));
    }
    if !threshold.is_finite() {
        return Err(Error::InvalidArgument(format!("threshold {threshold} is not finite")));
    }
    let mut ordered: Vec<&Snapshot> = snapshots.iter().collect();
    ordered.sort_by_key(|s| s.semester());
    let mut semesters = Vec::with_capacity(ordered.len());
    let (mut pooled_strong, mut pooled_weak) = (Tally::default(), Tally::default());
    for (i, snap) in ordered.iter().enumerate() {
        let next = ordered.get(i + 1);
        let prev = i.checked_sub(1).map(|p| ordered[p]);
        let (mut strong, mut weak) = (Tally::default(), Tally::default());
        let mut incomparable = 0;
        let (mut aged, mut aged_strong) = (0usize, 0usize);
        for (u, v) in snap.edges(kind) {
            let Some(frac) = fraction_of(snap, schema, u, v) else {
                incomparable += 1;
                continue;
            };
            let (a, b) = (snap.id(u), snap.id(v));
            let survived = next.is_some_and(|n| n.has_edge_between(kind, a, b));
            let strong_edge = is_strong(frac, threshold);
            let tally = if strong_edge { &mut strong } else { &mut weak };
            tally.edges += 1;
            tally.survived += usize::from(survived);
            if prev.is_some_and(|p| p.has_edge_between(kind, a, b)) {
                aged += 1;
                aged_strong += usize::from(strong_edge);
            }
        }
        let has_next = next.is_some();
        if has_next {
            pooled_strong.add(strong);
            pooled_weak.add(weak);
        }
        let comparable = strong.edges + weak.edges;
        semesters.push(SemesterSurvival {
            semester: snap.semester(),
            edges: snap.edge_count(kind),
            incomparable,
            strong: strong.edges,
            weak: weak.edges,
            strong_fraction: (comparable > 0).then(|| strong.edges as f64 / comparable as f64),
            strong_survival: has_next.then_some(strong),
            weak_survival: has_next.then_some(weak),
            strong_survival_rate: if has_next { strong.rate() } else { None },
            weak_survival_rate: if has_next { weak.rate() } else { None },
            aged_edges: prev.map(|_| aged),
            aged_strong: prev.map(|_| aged_strong),
            aged_strong_fraction: prev.and_then(|_| (aged > 0).then(|| aged_strong as f64 / aged as f64)),
        });
    }
    let (s, w) = (pooled_strong.rate(), pooled_weak.rate());
    Ok(SurvivalReport {
        network: kind,
        threshold,
        semesters,
        pooled_strong,
        pooled_weak,
        strong_survival_rate: s,
        weak_survival_rate: w,
        gap: s.zip(w).map(|(s, w)| s - w),
    })
}

/// One report per grid threshold, in grid order.
pub fn sweep_threshold(
    snapshots: &[Snapshot],
    kind: NetworkKind,
    schema: &AttributeSchema,
    grid: &[f64],
) -> Result<Vec<SurvivalReport>> {
    if grid.is_empty() {
        return Err(Error::InvalidArgument("threshold grid is empty".into()));
    }
    grid.iter()
        .map(|&t| survival_rates(snapshots, kind, schema, t))
        .collect()
}

/// Grid point with the largest defined gap; earlier points win ties.
pub fn best_threshold(reports: &[SurvivalReport]) -> Option<f64> {
    reports
        .iter()
        .filter_map(|r| r.gap.map(|g| (g, r.threshold)))
        .fold(None, |best: Option<(f64, f64)>, (g, t)| match best {
            Some((bg, _)) if bg >= g => best,
            _ => Some((g, t)),
        })
        .map(|(_, t)| t)
}

/// Parses `start:end:step` into an inclusive grid. The end point is kept when
/// it lies within a millionth of a step of the last increment.
pub fn parse_grid(spec: &str) -> Result<Vec<f64>> {
    let bad = || Error::InvalidArgument(format!("grid `{spec}` is not start:end:step"));
    let parts: Vec<f64> = spec
        .split(':')
        .map(|p| p.trim().parse::<f64>().map_err(|_| bad()))
        .collect::<Result<_>>()?;
    let [start, end, step] = parts[..] else {
        return Err(bad());
    };
    if step.is_nan() || step <= 0.0 || end < start || !start.is_finite() || !end.is_finite() {
        return Err(bad());
    }
    let count = ((end - start) / step + 1e-6).floor() as usize;
    Ok((0..=count).map(|i| start + i as f64 * step).collect())
}

/// `semester,edges,incomparable,strong,weak,strong_fraction,...` rows of a report.
pub fn report_csv(reports: &[SurvivalReport]) -> Result<String> {
    let mut w = csv::Writer::from_writer(Vec::new());
    w.write_record([
        "threshold",
        "semester",
        "edges",
        "incomparable",
        "strong",
        "weak",
        "strong_fraction",
        "strong_survived",
        "weak_survived",
        "strong_survival_rate",
        "weak_survival_rate",
        "aged_edges",
        "aged_strong_fraction",
    ])?;
    let opt = |v: Option<f64>| v.map(|v| v.to_string()).unwrap_or_default();
    let opt_n = |v: Option<usize>| v.map(|v| v.to_string()).unwrap_or_default();
    for r in reports {
        for s in &r.semesters {
            w.write_record([
                r.threshold.to_string(),
                s.semester.to_string(),
                s.edges.to_string(),
                s.incomparable.to_string(),
                s.strong.to_string(),
                s.weak.to_string(),
                opt(s.strong_fraction),
                opt_n(s.strong_survival.map(|t| t.survived)),
                opt_n(s.weak_survival.map(|t| t.survived)),
                opt(s.strong_survival_rate),
                opt(s.weak_survival_rate),
                opt_n(s.aged_edges),
                opt(s.aged_strong_fraction),
            ])?;
        }
        w.write_record([
            r.threshold.to_string(),
            "pooled".into(),
            String::new(),
            String::new(),
            r.pooled_strong.edges.to_string(),
            r.pooled_weak.edges.to_string(),
            String::new(),
            r.pooled_strong.survived.to_string(),
            r.pooled_weak.survived.to_string(),
            opt(r.strong_survival_rate),
            opt(r.weak_survival_rate),
            String::new(),
            String::new(),
        ])?;
    }
    let bytes = w.into_inner().map_err(|e| Error::InvalidArgument(e.to_string()))?;
    Ok(String::from_utf8(bytes).expect("csv output is utf-8"))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::graph::Node;
    use crate::ingest::Attribute;

    fn schema(n: usize) -> AttributeSchema {
        AttributeSchema::new(
            (0..n)
                .map(|i| Attribute {
                    name: format!("a{i}"),
                    values: vec!["x".into(), "y".into()],
                })
                .collect(),
        )
        .unwrap()
    }

    fn profile(id: &str, values: &[&str]) -> Node {
        values
            .iter()
            .enumerate()
            .fold(Node::new(id), |n, (i, v)| n.with(format!("a{i}"), *v))
    }

    fn snap(k: u32, nodes: &[Node], edges: &[(&str, &str)]) -> Snapshot {
        Snapshot::new(
            k,
            nodes.to_vec(),
            edges.iter().map(|(a, b)| (a.to_string(), b.to_string(), 1)),
            edges.iter().map(|(a, b)| (a.to_string(), b.to_string())),
        )
        .unwrap()
    }

    #[test]
    fn fraction_examples() {
        let s18 = schema(18);
        let a = profile("a", &["x"; 18]);
        let mut bv = vec!["x"; 18];
        bv[..4].fill("y");
        let b = profile("b", &bv);
        let c = profile("c", &["y"; 18]);
        let d = profile("d", &["x"; 18]);
        let s = snap(1, &[a, b, c, d], &[]);
        let f = agreement_fraction("a", "b", &s, &s18).unwrap();
        assert!((f - 14.0 / 18.0).abs() < 1e-12);
        assert!(is_strong(f, 0.75));
        assert_eq!(agreement_fraction("a", "c", &s, &s18).unwrap(), 0.0);
        assert_eq!(agreement_fraction("a", "d", &s, &s18).unwrap(), 1.0);
    }

    #[test]
    fn missing_attributes_are_skipped() {
        let sc = schema(3);
        let a = Node::new("a").with("a0", "x").with("a1", "x");
        let b = Node::new("b").with("a0", "x").with("a2", "y");
        let c = Node::new("c");
        let s = snap(1, &[a, b, c], &[]);
        assert_eq!(agreement_fraction("a", "b", &s, &sc).unwrap(), 1.0);
        assert!(agreement_fraction("a", "c", &s, &sc).is_err());
    }

    #[test]
    fn persistent_edges_survive() {
        let sc = schema(2);
        let nodes = [
            profile("a", &["x", "x"]),
            profile("b", &["x", "y"]),
            profile("c", &["x", "x"]),
        ];
        let e = [("a", "b"), ("a", "c")];
        let r = survival_rates(
            &[snap(1, &nodes, &e), snap(2, &nodes, &e)],
            NetworkKind::Behavioral,
            &sc,
            0.75,
        )
        .unwrap();
        assert_eq!(r.strong_survival_rate, Some(1.0));
        assert_eq!(r.weak_survival_rate, Some(1.0));
        assert_eq!(r.semesters[1].aged_strong_fraction, Some(0.5));
        assert_eq!(r.semesters[0].aged_edges, None);
        assert!(survival_rates(&[snap(1, &nodes, &e)], NetworkKind::Behavioral, &sc, 0.75).is_err());
    }

    #[test]
    fn zero_threshold_has_no_weak_edges() {
        let sc = schema(2);
        let nodes = [profile("a", &["x", "x"]), profile("b", &["y", "y"])];
        let e = [("a", "b")];
        let snaps = [snap(1, &nodes, &e), snap(2, &nodes, &[])];
        let reports = sweep_threshold(&snaps, NetworkKind::Cognitive, &sc, &[0.0, 0.5, 0.75, 0.9]).unwrap();
        assert_eq!(reports.len(), 4);
        assert_eq!(reports[0].semesters[0].strong, 1);
        assert_eq!(reports[0].weak_survival_rate, None);
        assert_eq!(reports[0].strong_survival_rate, Some(0.0));
        assert!(sweep_threshold(&snaps, NetworkKind::Cognitive, &sc, &[]).is_err());
    }

    #[test]
    fn grid_parsing() {
        assert_eq!(parse_grid("0.5:0.9:0.2").unwrap().len(), 3);
        let g = parse_grid("0.5:1:0.125").unwrap();
        assert_eq!(g.len(), 5);
        assert_eq!(g[2], 0.75);
        assert!(parse_grid("1:0:0.1").is_err());
        assert!(parse_grid("0:1").is_err());
        assert!(parse_grid("0:1:0").is_err());
    }
}
