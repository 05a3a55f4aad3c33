//! Pareto rank, density and fitness of a handful of (makespan, cost) points.

use mission_planner::evolution::pareto::front_indices;
use mission_planner::evolution::score_population;

fn main() {
    let points = [
        (100.0, 9.0),
        (120.0, 5.0),
        (150.0, 2.0),
        (110.0, 9.5),
        (130.0, 6.0),
        (160.0, 4.0),
        (150.0, 2.0),
        (200.0, 10.0),
    ];
    println!(
        "{:>8} {:>6} {:>5} {:>9} {:>8}",
        "makespan", "cost", "rank", "density", "fitness"
    );
    for (p, s) in points.iter().zip(score_population(&points)) {
        println!(
            "{:>8.1} {:>6.1} {:>5} {:>9.3} {:>8.4}",
            p.0, p.1, s.rank, s.density, s.fitness
        );
    }
    let front: Vec<_> = front_indices(&points).into_iter().map(|i| points[i]).collect();
    println!("front: {front:?}");
}
