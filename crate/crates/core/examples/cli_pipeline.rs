//! The command-line pipeline driven in-process: synth, ingest, train and
//! evaluate into one working directory, each step leaving a manifest.
//!
//! `cargo run --release --example cli_pipeline [work_dir]`

use std::path::PathBuf;

fn main() {
    let dir = std::env::args()
        .nth(1)
        .map(PathBuf::from)
        .unwrap_or_else(|| std::env::temp_dir().join("prefnet-pipeline"));
    let at = |p: &str| dir.join(p).display().to_string();
    let experiment = [
        "--snapshots",
        &at("snapshots"),
        "--schema",
        &at("data/schema.json"),
        "--task",
        "formation",
        "--network",
        "behavioral",
        "--semester",
        "4",
    ]
    .map(String::from);
    let steps: Vec<Vec<String>> = vec![
        ["synth", "--preset", "formation", "--seed", "7", "--out", &at("data")]
            .map(String::from)
            .to_vec(),
        ["ingest", "--data", &at("data"), "--out", &at("snapshots")]
            .map(String::from)
            .to_vec(),
        [
            &["train".to_string()][..],
            &experiment,
            &["--seed", "7", "--out", &at("train")].map(String::from),
        ]
        .concat(),
        [
            &["evaluate".to_string()][..],
            &experiment,
            &["--models", &at("train/model.json"), "--out", &at("evaluate")].map(String::from),
        ]
        .concat(),
    ];
    for step in steps {
        println!("$ prefnet {}", step.join(" "));
        let code = prefnet::cli::run(std::iter::once("prefnet".to_string()).chain(step));
        if code != 0 {
            std::process::exit(code);
        }
    }
}
