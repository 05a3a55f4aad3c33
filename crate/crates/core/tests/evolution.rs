mod common;

use common::*;
use mission_planner::decomposition::Criteria;
use mission_planner::evolution::operators::{
    bcrc_crossover, best_insertion, insertion_windows, inter_depot_swap, intra_depot_swap, single_action_reroute,
};
use mission_planner::evolution::pareto::densities;
use mission_planner::evolution::{pareto_rank, score_population, Individual};
use mission_planner::schedule::{check_feasible, render_partial, Genotype, SchedulingProblem};
use proptest::prelude::*;
use rand::Rng;

/// Neighbour-scan version of the within-rank isolation measure.
fn density_oracle(points: &[(f64, f64)], ranks: &[usize]) -> Vec<f64> {
    let n = points.len();
    let key = |i: usize, m: usize| if m == 0 { points[i].0 } else { points[i].1 };
    let before = |a: usize, b: usize, m: usize| key(a, m) < key(b, m) || (key(a, m) == key(b, m) && a < b);
    (0..n)
        .map(|i| {
            let group: Vec<usize> = (0..n).filter(|&j| ranks[j] == ranks[i]).collect();
            let mut total = 0.0;
            for m in 0..2 {
                let lo = group.iter().copied().filter(|&j| before(j, i, m)).max_by(|&a, &b| {
                    if before(a, b, m) {
                        std::cmp::Ordering::Less
                    } else {
                        std::cmp::Ordering::Greater
                    }
                });
                let hi = group.iter().copied().filter(|&j| before(i, j, m)).min_by(|&a, &b| {
                    if before(a, b, m) {
                        std::cmp::Ordering::Less
                    } else {
                        std::cmp::Ordering::Greater
                    }
                });
                match (lo, hi) {
                    (Some(l), Some(h)) => {
                        let vals: Vec<f64> = group.iter().map(|&j| key(j, m)).collect();
                        let range = vals.iter().copied().fold(f64::MIN, f64::max)
                            - vals.iter().copied().fold(f64::MAX, f64::min);
                        if range > 0.0 {
                            total += (key(i, m) - key(l, m)).min(key(h, m) - key(i, m)) / range;
                        }
                    }
                    _ => return f64::INFINITY,
                }
            }
            total
        })
        .collect()
}

fn individual(problem: &SchedulingProblem, g: Genotype) -> Individual {
    Individual::new(problem, g).unwrap()
}

/// Minimum over every position that renders, using a from-scratch cost.
fn exhaustive_best(problem: &SchedulingProblem, g: &Genotype, c: &Criteria, action: usize) -> Option<f64> {
    let ends: Vec<f64> = (0..problem.n_robots())
        .map(|r| plain_route_end(problem, r, &g.routes[r]))
        .collect();
    let makespan = ends.iter().copied().fold(0.0, f64::max);
    let mut best: Option<f64> = None;
    for r in 0..problem.n_robots() {
        if !problem.can_perform(r, action) {
            continue;
        }
        for i in 0..=g.routes[r].len() {
            let mut h = g.clone();
            h.routes[r].insert(i, action);
            if render_partial(problem, &h).is_err() {
                continue;
            }
            let end = plain_route_end(problem, r, &h.routes[r]);
            let travel = plain_travel(problem, r, &h.routes[r]) - plain_travel(problem, r, &g.routes[r]);
            let d_cost = problem.service(r, action).unwrap().cost + travel * problem.robot(r).drive_power / 1000.0;
            let s = c.beta * (end.max(makespan) - makespan) + c.gamma * d_cost;
            best = Some(best.map_or(s, |b: f64| b.min(s)));
        }
    }
    best
}

fn plain_travel(problem: &SchedulingProblem, r: usize, route: &[usize]) -> f64 {
    let mut prev = None;
    let mut t = 0.0;
    for &a in route {
        t += problem.leg_time(r, prev, a);
        prev = Some(a);
    }
    t
}

fn plain_route_end(problem: &SchedulingProblem, r: usize, route: &[usize]) -> f64 {
    plain_travel(problem, r, route)
        + route
            .iter()
            .map(|&a| problem.service(r, a).unwrap().duration)
            .sum::<f64>()
}

fn without(g: &Genotype, action: usize) -> Genotype {
    Genotype {
        routes: g
            .routes
            .iter()
            .map(|r| r.iter().copied().filter(|&a| a != action).collect())
            .collect(),
    }
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(300))]

    #[test]
    fn ranks_match_peeling(seed in any::<u64>(), n in 1usize..60, grid in any::<bool>()) {
        let pts = random_points(&mut rng(seed), n, grid);
        prop_assert_eq!(pareto_rank(&pts), rank_by_peeling(&pts));
    }

    #[test]
    fn densities_match_oracle(seed in any::<u64>(), n in 1usize..60, grid in any::<bool>()) {
        let pts = random_points(&mut rng(seed), n, grid);
        let ranks = pareto_rank(&pts);
        let got = densities(&pts, &ranks);
        let want = density_oracle(&pts, &ranks);
        for i in 0..n {
            prop_assert!(got[i] == want[i] || (got[i] - want[i]).abs() < 1e-12, "{}: {} vs {}", i, got[i], want[i]);
        }
    }

    #[test]
    fn better_rank_means_higher_fitness(seed in any::<u64>(), n in 2usize..80) {
        let pts = random_points(&mut rng(seed), n, true);
        let s = score_population(&pts);
        for a in &s {
            for b in &s {
                if a.rank < b.rank {
                    prop_assert!(a.fitness > b.fitness);
                }
                if a.rank == b.rank && a.density > b.density {
                    prop_assert!(a.fitness > b.fitness);
                }
            }
        }
    }

    #[test]
    fn insertion_window_is_exact(seed in any::<u64>(), actions in 2usize..10) {
        let mut r = rng(seed);
        let problem = random_problem(&mut r, 3, actions, 0.3);
        let full = random_feasible_genotype(&mut r, &problem);
        let a = r.random_range(0..actions);
        let g = without(&full, a);
        let windows = insertion_windows(&problem, &g, a);
        for robot in 0..problem.n_robots() {
            for i in 0..=g.routes[robot].len() {
                let mut h = g.clone();
                h.routes[robot].insert(i, a);
                let renders = problem.can_perform(robot, a) && render_partial(&problem, &h).is_ok();
                let inside = windows.iter().any(|&(wr, lo, hi)| wr == robot && lo <= i && i <= hi);
                prop_assert_eq!(renders, inside, "robot {} index {}", robot, i);
            }
        }
    }

    #[test]
    fn reroute_choice_is_the_exhaustive_minimum(seed in any::<u64>(), actions in 2usize..10) {
        let mut r = rng(seed);
        let problem = random_problem(&mut r, 3, actions, 0.3);
        let c = random_criteria(&mut r);
        let full = random_feasible_genotype(&mut r, &problem);
        let a = r.random_range(0..actions);
        let g = without(&full, a);
        let chosen = best_insertion(&problem, &g, &c, a).unwrap();
        let want = exhaustive_best(&problem, &g, &c, a).unwrap();
        prop_assert!((chosen.cost.scalar - want).abs() < 1e-9, "{} vs {}", chosen.cost.scalar, want);
        // The original slot is one of the candidates, so rerouting never
        // loses on the insertion measure.
        let (orig_r, orig_i) = full.positions(actions)[a].unwrap();
        let mut back = g.clone();
        back.routes[orig_r].insert(orig_i, a);
        prop_assert!(render_partial(&problem, &back).is_ok());
    }
}

#[test]
fn bcrc_preserves_actions_and_precedence() {
    let mut r = rng(5);
    let problem = random_problem(&mut r, 2, 4, 0.4);
    let c = Criteria::default();
    let all: Vec<usize> = (0..4).collect();
    for _ in 0..1000 {
        let p1 = individual(&problem, random_feasible_genotype(&mut r, &problem));
        let p2 = individual(&problem, random_feasible_genotype(&mut r, &problem));
        let (c1, c2) = bcrc_crossover(&p1, &p2, &problem, &c, &mut r);
        for child in [c1, c2] {
            assert_eq!(action_multiset(&child.genotype), all);
            assert!(check_feasible(&problem, &child.phenotype).is_empty());
            let t = child.phenotype.times(4);
            for &(a, b) in problem.precedence() {
                assert!(t[a].unwrap().1 <= t[b].unwrap().0 + 1e-9);
            }
        }
    }
}

#[test]
fn swaps_keep_schedules_valid() {
    let mut r = rng(9);
    for _ in 0..500 {
        let problem = random_problem(&mut r, 3, 8, 0.25);
        let parent = individual(&problem, random_feasible_genotype(&mut r, &problem));
        let intra = intra_depot_swap(&parent, &problem, &mut r, 20);
        let inter = inter_depot_swap(&parent, &problem, &mut r, 20);
        for child in [&intra, &inter] {
            assert_eq!(action_multiset(&child.genotype), (0..8).collect::<Vec<_>>());
            assert!(check_feasible(&problem, &child.phenotype).is_empty());
            for (robot, route) in child.genotype.routes.iter().enumerate() {
                assert!(route.iter().all(|&a| problem.can_perform(robot, a)));
            }
        }
        // Reordering within a route never changes who does what.
        for (a, b) in intra.genotype.routes.iter().zip(&parent.genotype.routes) {
            let (mut a, mut b) = (a.clone(), b.clone());
            a.sort_unstable();
            b.sort_unstable();
            assert_eq!(a, b);
        }
        if intra.failed {
            assert_eq!(intra.genotype, parent.genotype);
        }
        if inter.failed {
            assert_eq!(inter.genotype, parent.genotype);
        }
    }
}

#[test]
fn reroute_children_are_valid() {
    let mut r = rng(21);
    let c = Criteria::new(0.0, 0.7, 0.3).unwrap();
    for _ in 0..500 {
        let problem = random_problem(&mut r, 3, 7, 0.3);
        let parent = individual(&problem, random_feasible_genotype(&mut r, &problem));
        let child = single_action_reroute(&parent, &problem, &c, &mut r);
        assert_eq!(action_multiset(&child.genotype), (0..7).collect::<Vec<_>>());
        assert!(check_feasible(&problem, &child.phenotype).is_empty());
    }
}
