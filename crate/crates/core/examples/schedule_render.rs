//! Renders a hand-written route plan into a timed schedule and verifies it.

use std::collections::{BTreeMap, BTreeSet};

use mission_planner::geometry::Point;
use mission_planner::schedule::{check_feasible, render_phenotype, Genotype, SchedulingProblem};
use mission_planner::task_model::{NodeId, Outcome, RobotProfile};

fn main() -> mission_planner::Result<()> {
    let ids = ["pick", "carry", "place", "scan"].map(NodeId::new);
    let arm = RobotProfile::new("arm", Point::new(0.0, 0.0), 1.0, 0.0)
        .with_action("pick", Outcome::new(1.0, 8.0, 0.2))
        .with_action("place", Outcome::new(1.0, 6.0, 0.2));
    let cart = RobotProfile::new("cart", Point::new(5.0, 0.0), 0.5, 200.0)
        .with_action("carry", Outcome::new(1.0, 12.0, 0.5))
        .with_action("scan", Outcome::new(1.0, 4.0, 0.1));
    let locations: BTreeMap<NodeId, Point> = [
        ("pick", Point::new(1.0, 0.0)),
        ("carry", Point::new(3.0, 0.0)),
        ("place", Point::new(1.0, 2.0)),
        ("scan", Point::new(6.0, 0.0)),
    ]
    .into_iter()
    .map(|(k, p)| (NodeId::new(k), p))
    .collect();
    let precedence: BTreeSet<(NodeId, NodeId)> = [("pick", "carry"), ("carry", "place")]
        .into_iter()
        .map(|(a, b)| (NodeId::new(a), NodeId::new(b)))
        .collect();
    let problem = SchedulingProblem::new(vec![arm, cart], ids.clone(), &precedence, &locations)?;

    let routes = BTreeMap::from([
        ("arm".to_string(), vec![ids[0].clone(), ids[2].clone()]),
        ("cart".to_string(), vec![ids[3].clone(), ids[1].clone()]),
    ]);
    let genotype = Genotype::from_named(&problem, &routes)?;
    let schedule = render_phenotype(&problem, &genotype)?;

    for (r, entries) in schedule.schedules.iter().enumerate() {
        println!("{}:", problem.robot(r).id);
        for e in entries {
            println!(
                "  {:<6} {:>7.2} .. {:>7.2}",
                problem.action_id(e.action),
                e.start,
                e.finish
            );
        }
    }
    println!(
        "makespan {:.2} s, cost {:.4}, idle {:.2} s",
        schedule.makespan,
        schedule.total_cost,
        schedule.idle_time(&problem)
    );
    let report = check_feasible(&problem, &schedule);
    println!("violations: {}", report.len());

    // Placing before picking cannot be scheduled.
    let bad = BTreeMap::from([
        ("arm".to_string(), vec![ids[2].clone(), ids[0].clone()]),
        ("cart".to_string(), vec![ids[1].clone(), ids[3].clone()]),
    ]);
    match render_phenotype(&problem, &Genotype::from_named(&problem, &bad)?) {
        Ok(_) => println!("unexpectedly feasible"),
        Err(e) => println!("reversed arm route: {e}"),
    }
    Ok(())
}
