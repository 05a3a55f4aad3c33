//! Applies each variation operator to random parents and prints what changed.

use std::collections::{BTreeMap, BTreeSet};

use mission_planner::decomposition::Criteria;
use mission_planner::evolution::operators::{
    bcrc_crossover, greedy_genotype, inter_depot_swap, intra_depot_swap, random_genotype, single_action_reroute,
};
use mission_planner::evolution::Individual;
use mission_planner::geometry::Point;
use mission_planner::schedule::{Genotype, SchedulingProblem};
use mission_planner::task_model::{NodeId, Outcome, RobotProfile};
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

fn problem() -> mission_planner::Result<SchedulingProblem> {
    let ids: Vec<NodeId> = (0..8).map(|i| NodeId::new(format!("t{i}"))).collect();
    let robots = (0..3)
        .map(|r| {
            let mut p = RobotProfile::new(format!("r{r}"), Point::new(4.0 * r as f64, 0.0), 1.0, 100.0);
            for (i, id) in ids.iter().enumerate() {
                if (i + r) % 3 != 0 {
                    p = p.with_action(id.clone(), Outcome::new(1.0, 5.0 + i as f64, 0.5 + 0.2 * r as f64));
                }
            }
            p
        })
        .collect();
    let locations: BTreeMap<NodeId, Point> = ids
        .iter()
        .enumerate()
        .map(|(i, id)| (id.clone(), Point::new((i % 4) as f64 * 3.0, (i / 4) as f64 * 4.0)))
        .collect();
    let precedence: BTreeSet<(NodeId, NodeId)> = [(0, 4), (1, 5), (4, 7)]
        .into_iter()
        .map(|(a, b)| (ids[a].clone(), ids[b].clone()))
        .collect();
    SchedulingProblem::new(robots, ids, &precedence, &locations)
}

fn show(label: &str, g: &Genotype, ind: &Individual) {
    let routes: Vec<String> = g.routes.iter().map(|r| format!("{r:?}")).collect();
    println!(
        "{label:<12} {}  makespan {:>6.2}  cost {:.3}",
        routes.join(" "),
        ind.phenotype.makespan,
        ind.phenotype.total_cost
    );
}

fn main() -> mission_planner::Result<()> {
    let problem = problem()?;
    let criteria = Criteria::new(0.0, 0.5, 0.5)?;
    let mut rng = ChaCha8Rng::seed_from_u64(3);

    let greedy = Individual::new(&problem, greedy_genotype(&problem, &criteria).expect("acyclic"))?;
    let random = Individual::new(&problem, random_genotype(&problem, &mut rng))?;
    show("greedy", &greedy.genotype, &greedy);
    show("random", &random.genotype, &random);

    let (a, b) = bcrc_crossover(&greedy, &random, &problem, &criteria, &mut rng);
    for (label, child) in [
        ("bcrc #1", a),
        ("bcrc #2", b),
        ("intra swap", intra_depot_swap(&random, &problem, &mut rng, 20)),
        ("inter swap", inter_depot_swap(&random, &problem, &mut rng, 20)),
        ("reroute", single_action_reroute(&random, &problem, &criteria, &mut rng)),
    ] {
        let ind = Individual::new(&problem, child.genotype.clone())?;
        show(label, &child.genotype, &ind);
        if child.failed {
            println!("             (no feasible variation, parent returned)");
        }
    }
    Ok(())
}
