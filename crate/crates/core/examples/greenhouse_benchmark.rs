//! The five greenhouse setups on a reduced search budget.

use mission_planner::benchmark::run_benchmark;
use mission_planner::coalition::CoalitionConfig;
use mission_planner::evolution::EvolutionConfig;
use mission_planner::greenhouse::GreenhouseConfig;
use mission_planner::planner::PlanConfig;

fn main() -> mission_planner::Result<()> {
    let base = PlanConfig {
        top_k: 1,
        coalition: CoalitionConfig {
            n_agents: 2,
            evolution: EvolutionConfig {
                population: 32,
                generations: 150,
                ..Default::default()
            },
            ..Default::default()
        },
        ..Default::default()
    };
    let report = run_benchmark(&GreenhouseConfig::default(), &[1, 2, 3, 4, 5], &base, 1)?;
    print!("{}", report.to_text());
    Ok(())
}
