//! Attribute importance from degree-1 regression coefficients, for both
//! tasks on both networks, and the overlap of their top features.
//!
//! `cargo run --release --example importance`

use prefnet::features::Task;
use prefnet::graph::NetworkKind;
use prefnet::importance::{compare_rankings, ranks_table, weights_table};
use prefnet::ml::ModelKind;
use prefnet::pipeline::{run_experiment, ExperimentConfig};
use prefnet::synthgen::{generate, Preset};

fn main() -> prefnet::Result<()> {
    let generated = generate(&Preset::Importance.config(7))?;
    let snapshots = generated.snapshots()?.snapshots;
    let mut reports = Vec::new();
    for task in Task::ALL {
        for network in NetworkKind::ALL {
            let mut config = ExperimentConfig::new(task, network, 4);
            config.classifiers = vec![ModelKind::LinearRegression];
            let report = run_experiment(&snapshots, &generated.schema.schema, &config)?.report;
            if let Some(importance) = report.importance {
                reports.push(importance);
            }
        }
    }
    print!("weights\n{}", weights_table(&reports)?);
    print!("ranks\n{}", ranks_table(&reports)?);
    let comparison = compare_rankings(&reports, 3)?;
    for cell in &comparison.cells {
        println!("top 3 {:<22} {}", cell.label, cell.top.join(", "));
    }
    println!("in every top 3: {:?}", comparison.shared_by_all);
    Ok(())
}
