//! Generate a synthetic network, write it in the raw ingest formats, and
//! read it back into per-semester snapshots.
//!
//! `cargo run --example synth_and_ingest [out_dir]`

use std::path::PathBuf;

use prefnet::graph::NetworkKind;
use prefnet::ingest::{build_snapshots, parse_attributes, parse_events, parse_nominations, BuildOptions, SchemaFile};
use prefnet::synthgen::{generate, Outcome, Preset};

fn main() -> prefnet::Result<()> {
    let dir = std::env::args()
        .nth(1)
        .map(PathBuf::from)
        .unwrap_or_else(|| std::env::temp_dir().join("prefnet-synth"));
    let generated = generate(&Preset::Default.config(7))?;
    generated.write(&dir)?;
    println!("wrote {} events to {}", generated.events.len(), dir.display());

    let file = SchemaFile::read(dir.join("schema.json"))?;
    let events = parse_events(dir.join("events.csv"), &file.calendar)?;
    let nominations = parse_nominations(dir.join("nominations.csv"))?;
    let attributes = parse_attributes(dir.join("attributes.csv"), &file.schema)?;
    let set = build_snapshots(
        &events.events,
        &nominations.nominations,
        &attributes,
        &file.calendar,
        &file.schema,
        BuildOptions::default(),
    )?;

    for s in &set.snapshots {
        println!(
            "semester {}: {} nodes, {} behavioral edges, {} cognitive edges",
            s.semester(),
            s.node_count(),
            s.edge_count(NetworkKind::Behavioral),
            s.edge_count(NetworkKind::Cognitive)
        );
    }
    let removed = generated
        .ledger
        .entries
        .iter()
        .filter(|e| e.outcome == Outcome::Removed)
        .count();
    println!("ledger: {} entries, {removed} removals", generated.ledger.entries.len());
    println!("warnings clean: {}", set.warnings.is_empty());
    Ok(())
}
