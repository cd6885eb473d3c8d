//! Per-node preferences and the average preference matrix of one attribute,
//! with semester-to-semester trend marks.
//!
//! `cargo run --example preferences`

use prefnet::graph::NetworkKind;
use prefnet::preference::{average_preference_matrix, compute_preferences, trend_marks, Trend, DEFAULT_TREND_EPSILON};
use prefnet::synthgen::{generate, Preset};

fn main() -> prefnet::Result<()> {
    let generated = generate(&Preset::Default.config(7))?;
    let schema = &generated.schema.schema;
    let snapshots = generated.snapshots()?.snapshots;

    let first = &snapshots[0];
    let table = compute_preferences(first, NetworkKind::Behavioral, schema)?;
    let node = first.id(0);
    let own = first.attribute(0, "political_views").unwrap_or("?");
    println!("{node} holds {own}");
    for value in &schema.attribute("political_views")?.values {
        let p = table.get(node, "political_views", value).unwrap_or(f64::NAN);
        println!("  preference for {value}: {p:.3}");
    }

    let mut matrices = Vec::new();
    for s in &snapshots {
        let prefs = compute_preferences(s, NetworkKind::Behavioral, schema)?;
        matrices.push(average_preference_matrix(&prefs, s, schema, "political_views")?);
    }
    let last = matrices.last().expect("at least one semester");
    println!(
        "semester {} average preference (rows hold, columns preferred):",
        last.semester
    );
    for row in &last.rows {
        let cells: Vec<String> = row.preference.iter().map(|p| format!("{p:.2}")).collect();
        println!("  {:<13} {}", row.value, cells.join("  "));
    }

    let marks = trend_marks(&matrices, DEFAULT_TREND_EPSILON)?;
    let rising = marks.iter().filter(|m| m.trend == Trend::Increase).count();
    let falling = marks.iter().filter(|m| m.trend == Trend::Decrease).count();
    println!("{} cells compared: {rising} rising, {falling} falling", marks.len());
    Ok(())
}
