//! Enumerates the best decompositions of a small mission tree.
//!
//! ```text
//! cargo run --example decompose
//! ```

use mission_planner::decomposition::{
    generate_alternatives_with, AlternativeCounts, Criteria, DecompositionConfig, PruneParam,
};
use mission_planner::mission::Mission;

fn main() -> mission_planner::Result<()> {
    let mission = Mission::load(concat!(env!("CARGO_MANIFEST_DIR"), "/examples/data/inspection.toml"))?;
    let root = mission.tree.root();
    println!("{} decompositions in total", mission.tree.decomposition_count(root));

    for (name, criteria) in [
        ("quality first", Criteria::new(0.9, 0.05, 0.05)?),
        ("time first", Criteria::new(0.0, 1.0, 0.0)?),
        ("cost first", Criteria::new(0.0, 0.0, 1.0)?),
    ] {
        let mut counts = AlternativeCounts::default();
        let config = DecompositionConfig::new(criteria, PruneParam::new(4)?);
        let alts = generate_alternatives_with(&mission.tree, root, &mission.robots, &config, &mut counts)?;
        println!("\n{name}:");
        for a in &alts {
            let ids: Vec<&str> = a.actions.iter().map(|a| a.as_str()).collect();
            println!(
                "  score {:>9.3}  q={:.2} d={:>6.1} c={:.2}  {}",
                a.score,
                a.aggregate.quality,
                a.aggregate.duration,
                a.aggregate.cost,
                ids.join(", ")
            );
        }
        print!("  per task (generated, kept):\n{}", indent(&counts.to_lines()));
    }
    Ok(())
}

fn indent(s: &str) -> String {
    s.lines().map(|l| format!("    {l}\n")).collect()
}
