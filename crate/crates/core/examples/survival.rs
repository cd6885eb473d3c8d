//! Survival of strong and weak ties across a threshold sweep.
//!
//! `cargo run --release --example survival`

use prefnet::graph::NetworkKind;
use prefnet::survival::{best_threshold, parse_grid, sweep_threshold};
use prefnet::synthgen::{generate, Preset};

fn main() -> prefnet::Result<()> {
    let generated = generate(&Preset::Survival.config(7))?;
    let snapshots = generated.snapshots()?.snapshots;
    let grid = parse_grid("0.5:1:0.125")?;
    let reports = sweep_threshold(&snapshots, NetworkKind::Behavioral, &generated.schema.schema, &grid)?;
    let opt = |v: Option<f64>| v.map_or("-".into(), |v| format!("{v:.3}"));
    println!(
        "{:>9} {:>7} {:>7} {:>8} {:>8} {:>7}",
        "threshold", "strong", "weak", "s. rate", "w. rate", "gap"
    );
    for r in &reports {
        println!(
            "{:>9.3} {:>7} {:>7} {:>8} {:>8} {:>7}",
            r.threshold,
            r.pooled_strong.edges,
            r.pooled_weak.edges,
            opt(r.strong_survival_rate),
            opt(r.weak_survival_rate),
            opt(r.gap)
        );
    }
    println!("widest gap at {:?}", best_threshold(&reports));
    Ok(())
}
