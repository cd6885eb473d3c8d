//! Labeled formation and dissolution datasets under both combination
//! methods, written as CSV.
//!
//! `cargo run --example datasets [out_dir]`

use std::path::PathBuf;

use prefnet::features::{build_dataset, CombinationMethod, DatasetOptions, Task};
use prefnet::graph::NetworkKind;
use prefnet::synthgen::{generate, Preset};

fn main() -> Result<(), Box<dyn std::error::Error>> {
    let dir = std::env::args()
        .nth(1)
        .map(PathBuf::from)
        .unwrap_or_else(|| std::env::temp_dir().join("prefnet-datasets"));
    std::fs::create_dir_all(&dir)?;
    let generated = generate(&Preset::Default.config(7))?;
    let snapshots = generated.snapshots()?.snapshots;

    for task in Task::ALL {
        for method in [CombinationMethod::EqualPreference, CombinationMethod::MinimumPreference] {
            let data = build_dataset(
                task,
                method,
                &snapshots,
                4,
                NetworkKind::Behavioral,
                &generated.schema.schema,
                DatasetOptions::default(),
            )?;
            for (split, d) in [("train", &data.train), ("test", &data.test)] {
                let path = dir.join(format!("{task}_{method}_{split}.csv"));
                d.write_csv(&path)?;
                println!(
                    "{task:<11} {method:<5} {split:<5} semesters {}->{}: {:>5} rows, {:>4} positive -> {}",
                    d.feature_semester,
                    d.label_semester,
                    d.len(),
                    d.positives(),
                    path.display()
                );
            }
        }
    }
    Ok(())
}
