//! Plans a mission file end to end and writes the report files.
//!
//! ```text
//! cargo run --example plan_mission -- [mission.toml] [out_dir]
//! ```

use mission_planner::coalition::CoalitionConfig;
use mission_planner::evolution::EvolutionConfig;
use mission_planner::mission::Mission;
use mission_planner::planner::{plan, PlanConfig};
use mission_planner::report::{plan_summary_text, write_plan};

fn main() -> mission_planner::Result<()> {
    let mut args = std::env::args().skip(1);
    let path = args
        .next()
        .unwrap_or_else(|| concat!(env!("CARGO_MANIFEST_DIR"), "/examples/data/single_plant.toml").into());
    let out = args
        .next()
        .map(std::path::PathBuf::from)
        .unwrap_or_else(|| std::env::temp_dir().join("mission-planner-example"));

    let mission = Mission::load(&path)?;
    let config = PlanConfig {
        criteria: mission.criteria.unwrap_or_default(),
        coalition: CoalitionConfig {
            n_agents: 2,
            evolution: EvolutionConfig {
                population: 24,
                generations: 100,
                ..Default::default()
            },
            ..Default::default()
        },
        ..Default::default()
    };
    let p = plan(&mission, &config, 0)?;
    write_plan(&out, &p, 0)?;
    print!("{}", plan_summary_text(&p, 0));
    println!("reports in {}", out.display());
    Ok(())
}
