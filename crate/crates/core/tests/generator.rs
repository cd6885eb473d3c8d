//! Statistical checks of the synthetic generator against closed-form
//! expectations.

use prefnet::graph::{NetworkKind, Snapshot};
use prefnet::synthgen::{generate, AttributeSpec, GenConfig};

fn first_semester(config: &GenConfig) -> Snapshot {
    let generated = generate(config).unwrap();
    generated.snapshots().unwrap().snapshots.remove(0)
}

/// Same-value edges and the same-value probability of a uniformly random dyad.
fn same_value(s: &Snapshot, attribute: &str) -> (usize, usize, f64) {
    let edges = s.edges(NetworkKind::Behavioral);
    let same = edges
        .iter()
        .filter(|(a, b)| s.attribute(*a, attribute) == s.attribute(*b, attribute))
        .count();
    let n = s.node_count() as f64;
    let mut counts = std::collections::BTreeMap::new();
    for i in 0..s.node_count() {
        *counts.entry(s.attribute(i, attribute)).or_insert(0.0) += 1.0;
    }
    let p = counts.values().map(|c: &f64| c * (c - 1.0)).sum::<f64>() / (n * (n - 1.0));
    (same, edges.len(), p)
}

#[test]
fn neutral_attributes_leave_ties_independent() {
    let (mut observed, mut total, mut expected) = (0.0, 0.0, 0.0);
    for seed in 0..5 {
        let config = GenConfig {
            attributes: vec![
                AttributeSpec::neutral("colour", &["red", "green", "blue"]),
                AttributeSpec::neutral("flag", &["yes", "no"]),
            ],
            semesters: 1,
            seed,
            ..GenConfig::default()
        };
        let (same, edges, p) = same_value(&first_semester(&config), "colour");
        observed += same as f64;
        total += edges as f64;
        expected += p * edges as f64;
    }
    let chi2 = (observed - expected).powi(2) / expected + (observed - expected).powi(2) / (total - expected);
    // 1 degree of freedom, p = 0.001
    assert!(
        chi2 < 10.83,
        "chi-square {chi2:.2}: {observed} same-value of {total}, expected {expected:.1}"
    );
}

#[test]
fn value_frequencies_follow_the_distribution() {
    let shares = [0.6, 0.3, 0.1];
    let config = GenConfig {
        nodes: 1000,
        semesters: 1,
        attributes: vec![AttributeSpec {
            distribution: shares.to_vec(),
            ..AttributeSpec::neutral("tier", &["low", "mid", "high"])
        }],
        ..GenConfig::default()
    };
    let s = first_semester(&config);
    let l1: f64 = ["low", "mid", "high"]
        .iter()
        .zip(shares)
        .map(|(v, p)| {
            let freq = (0..s.node_count())
                .filter(|&i| s.attribute(i, "tier") == Some(v))
                .count() as f64
                / 1000.0;
            (freq - p).abs()
        })
        .sum();
    assert!(l1 < 0.1, "L1 distance {l1:.3}");
}

#[test]
fn planted_affinity_sets_same_value_share() {
    // Same-value dyads weigh 5 * 5 against 1 for the rest, and a third of
    // dyads share a value: the same-value edge share is 25 / 27.
    let (mut same, mut edges) = (0, 0);
    for seed in 0..3 {
        let config = GenConfig {
            attributes: vec![AttributeSpec::homophilous("colour", &["red", "green", "blue"], 5.0)],
            semesters: 1,
            seed,
            ..GenConfig::default()
        };
        let (s, e, _) = same_value(&first_semester(&config), "colour");
        same += s;
        edges += e;
    }
    let share = same as f64 / edges as f64;
    assert!(
        (share - 25.0 / 27.0).abs() < 0.05,
        "same-value share {share:.3} over {edges} edges"
    );
}
