//! Trains the five classifiers on planted formation data and compares them
//! on validation and test splits.
//!
//! `cargo run --release --example classifiers [seed]`

use prefnet::features::Task;
use prefnet::graph::NetworkKind;
use prefnet::pipeline::{run_experiment, ExperimentConfig};
use prefnet::synthgen::{generate, Preset};

fn main() -> prefnet::Result<()> {
    let seed = std::env::args().nth(1).and_then(|s| s.parse().ok()).unwrap_or(7);
    let generated = generate(&Preset::Formation.config(seed))?;
    let snapshots = generated.snapshots()?.snapshots;
    let mut config = ExperimentConfig::new(Task::Formation, NetworkKind::Behavioral, 4);
    config.seed = seed;
    let report = run_experiment(&snapshots, &generated.schema.schema, &config)?.report;

    println!(
        "train {} rows ({} positive), fitted on {} after downsampling; test {} rows ({} positive)",
        report.train.rows, report.train.positives, report.fit_rows, report.test.rows, report.test.positives
    );
    println!(
        "{:<11} {:>9} {:>9} {:>9} {:>9} {:>7}",
        "model", "val score", "accuracy", "recall", "precision", "auc"
    );
    let opt = |v: Option<f64>| v.map_or("-".into(), |v| format!("{v:.3}"));
    for (val, test) in report.validation.iter().zip(&report.test_reports) {
        println!(
            "{:<11} {:>9} {:>9.3} {:>9} {:>9} {:>7}",
            test.model,
            opt(val.objective_score(report.objective)),
            test.accuracy,
            opt(test.recall),
            opt(test.precision),
            opt(test.auc)
        );
    }
    println!(
        "selected on validation ({}): {}",
        report.objective.as_str(),
        report.selected
    );
    Ok(())
}
