//! Runs one evolutionary engine and prints its progress and final front.

use mission_planner::decomposition::{generate_alternatives, select_top_k, PruneParam};
use mission_planner::evolution::{Engine, EvolutionConfig, OperatorKind};
use mission_planner::greenhouse::{build_mission, setup, GreenhouseConfig};

fn main() -> mission_planner::Result<()> {
    let full = GreenhouseConfig::default();
    let greenhouse = GreenhouseConfig {
        plants: full.plants[..6].to_vec(),
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
    println!("{} actions, {} robots", problem.n_actions(), problem.n_robots());

    let config = EvolutionConfig {
        population: 32,
        generations: 200,
        criteria,
        ..Default::default()
    };
    let mut engine = Engine::new(&problem, config, 7)?;
    loop {
        let rec = engine.history().last().unwrap();
        if rec.generation % 40 == 0 {
            let p: Vec<String> = engine
                .stats()
                .probabilities()
                .iter()
                .map(|p| format!("{p:.2}"))
                .collect();
            println!(
                "gen {:>3}  best makespan {:>8.2}  best cost {:>8.3}  archive {:>2}  operator odds [{}]",
                rec.generation,
                rec.best_makespan,
                rec.best_cost,
                rec.archive_size,
                p.join(" ")
            );
        }
        if engine.is_done() {
            break;
        }
        engine.step();
    }
    println!("operators: {}", OperatorKind::ALL.map(|k| k.name()).join(", "));
    for r in &engine.stats().records {
        println!(
            "  {:<10} applied {:>5}  improved {:>4}",
            r.kind.name(),
            r.applications,
            r.successes
        );
    }
    println!("archive:");
    for m in engine.archive().members() {
        println!(
            "  makespan {:>8.2}  cost {:>8.3}",
            m.phenotype.makespan, m.phenotype.total_cost
        );
    }
    let best = engine.best();
    println!(
        "picked: makespan {:.2}, cost {:.3}",
        best.phenotype.makespan, best.phenotype.total_cost
    );
    Ok(())
}
