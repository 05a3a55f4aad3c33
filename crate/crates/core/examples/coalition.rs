//! Compares a sharing coalition with isolated agents on the same instance.

use mission_planner::coalition::{run_coalition, CoalitionConfig};
use mission_planner::decomposition::{generate_alternatives, select_top_k, PruneParam};
use mission_planner::evolution::{scalarized, EvolutionConfig};
use mission_planner::greenhouse::{build_mission, setup, GreenhouseConfig};

fn main() -> mission_planner::Result<()> {
    let full = GreenhouseConfig::default();
    let greenhouse = GreenhouseConfig {
        plants: full.plants[..8].to_vec(),
        ..full
    };
    let fleet = setup(4)?;
    let criteria = fleet.criteria()?;
    let mission = build_mission(&greenhouse, &fleet)?;
    let alts = generate_alternatives(
        &mission.tree,
        mission.tree.root(),
        &mission.robots,
        &criteria,
        PruneParam::new(5)?,
    )?;
    let problem = mission.scheduling_problem(&select_top_k(&alts, 1)[0])?;

    for share in [true, false] {
        let config = CoalitionConfig {
            n_agents: 4,
            share,
            evolution: EvolutionConfig {
                population: 24,
                generations: 120,
                criteria,
                ..Default::default()
            },
            ..Default::default()
        };
        let report = run_coalition(&problem, &config, 11)?;
        let accepted = report.events.iter().filter(|e| e.accepted).count();
        println!(
            "share={share:<5} best makespan {:>8.2} cost {:>8.3} weighted {:>8.3}  front {:>2}  messages {} ({} accepted)",
            report.best.phenotype.makespan,
            report.best.phenotype.total_cost,
            scalarized(report.best.objectives(), &criteria),
            report.front.len(),
            report.events.len(),
            accepted
        );
        for a in &report.agents {
            let last = a.history.last().unwrap();
            println!(
                "  agent {} seed {:>20}  best makespan {:>8.2}",
                a.id, a.seed, last.best_makespan
            );
        }
    }
    Ok(())
}
