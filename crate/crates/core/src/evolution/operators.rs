//! Variation operators and the insertion heuristic they share.
//!
//! An action may be inserted into a route only between everything that must
//! happen before it and everything that must happen after it. Both sets are
//! closures over the current route edges plus the precedence edges among the
//! assigned actions, so any position inside the window keeps the schedule
//! free of deadlocks.
//!
//! Among feasible positions the cheapest is taken by
//! `beta * d_makespan + gamma * d_cost`. `d_makespan` is the growth of the
//! largest route completion time, where a route's completion time adds travel
//! and service durations and ignores waiting on other robots. `d_cost` is the
//! service cost plus the extra drive energy. Ties go to the smaller new route
//! end, then the lower robot index, then the lower position.

use std::cmp::Ordering;
use std::collections::VecDeque;

use rand::Rng;

use super::Individual;
use crate::decomposition::Criteria;
use crate::schedule::{render_phenotype, travel_cost, Genotype, Phenotype, SchedulingProblem};

/// Result of one operator application. A failed application hands back a
/// copy of the parent.
#[derive(Debug, Clone)]
pub struct Offspring {
    pub genotype: Genotype,
    pub phenotype: Phenotype,
    pub failed: bool,
}

impl Offspring {
    fn unchanged(parent: &Individual) -> Self {
        Self {
            genotype: parent.genotype.clone(),
            phenotype: parent.phenotype.clone(),
            failed: true,
        }
    }

    fn rendered(problem: &SchedulingProblem, genotype: Genotype, parent: &Individual) -> Self {
        match render_phenotype(problem, &genotype) {
            Ok(phenotype) => Self {
                genotype,
                phenotype,
                failed: false,
            },
            Err(_) => Self::unchanged(parent),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct InsertionCost {
    pub scalar: f64,
    pub new_route_end: f64,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Insertion {
    pub robot: usize,
    pub index: usize,
    pub cost: InsertionCost,
}

/// Completion time of a route from travel and service durations alone.
pub fn route_end(problem: &SchedulingProblem, robot: usize, route: &[usize]) -> f64 {
    let mut t = 0.0;
    let mut prev = None;
    for &a in route {
        t += problem.leg_time(robot, prev, a);
        t += problem.service(robot, a).map_or(0.0, |s| s.duration);
        prev = Some(a);
    }
    t
}

/// Insertion positions `lo..=hi` per capable robot for an action that is not
/// in `genotype`. Empty when no position avoids a deadlock.
pub fn insertion_windows(
    problem: &SchedulingProblem,
    genotype: &Genotype,
    action: usize,
) -> Vec<(usize, usize, usize)> {
    let n = problem.n_actions();
    let pos = genotype.positions(n);
    debug_assert!(pos[action].is_none());
    let before = closure(problem, genotype, &pos, action, Direction::Backward);
    let after = closure(problem, genotype, &pos, action, Direction::Forward);
    if before.iter().zip(&after).any(|(&b, &a)| b && a) {
        return Vec::new();
    }
    let mut out = Vec::new();
    for &r in problem.capable_robots(action) {
        let route = &genotype.routes[r];
        let lo = route.iter().rposition(|&a| before[a]).map_or(0, |i| i + 1);
        let hi = route.iter().position(|&a| after[a]).unwrap_or(route.len());
        if lo <= hi {
            out.push((r, lo, hi));
        }
    }
    out
}

#[derive(Clone, Copy)]
enum Direction {
    Backward,
    Forward,
}

/// Assigned actions that must precede (backward) or follow (forward) `action`.
fn closure(
    problem: &SchedulingProblem,
    genotype: &Genotype,
    pos: &[Option<(usize, usize)>],
    action: usize,
    dir: Direction,
) -> Vec<bool> {
    let mut seen = vec![false; problem.n_actions()];
    let mut queue = VecDeque::new();
    let seeds = match dir {
        Direction::Backward => problem.preds(action),
        Direction::Forward => problem.succs(action),
    };
    for &s in seeds {
        if pos[s].is_some() && !seen[s] {
            seen[s] = true;
            queue.push_back(s);
        }
    }
    while let Some(v) = queue.pop_front() {
        let (r, i) = pos[v].unwrap();
        let route_next = match dir {
            Direction::Backward => i.checked_sub(1).map(|j| genotype.routes[r][j]),
            Direction::Forward => genotype.routes[r].get(i + 1).copied(),
        };
        let linked = match dir {
            Direction::Backward => problem.preds(v),
            Direction::Forward => problem.succs(v),
        };
        for w in route_next.into_iter().chain(linked.iter().copied()) {
            if pos[w].is_some() && !seen[w] {
                seen[w] = true;
                queue.push_back(w);
            }
        }
    }
    seen
}

/// Cost of putting `action` at `index` of `robot`'s route.
pub fn insertion_cost(
    problem: &SchedulingProblem,
    genotype: &Genotype,
    criteria: &Criteria,
    action: usize,
    robot: usize,
    index: usize,
) -> InsertionCost {
    let ends: Vec<f64> = genotype
        .routes
        .iter()
        .enumerate()
        .map(|(r, route)| route_end(problem, r, route))
        .collect();
    let makespan = ends.iter().copied().fold(0.0, f64::max);
    cost_at(problem, genotype, criteria, action, robot, index, ends[robot], makespan)
}

#[allow(clippy::too_many_arguments)]
fn cost_at(
    problem: &SchedulingProblem,
    genotype: &Genotype,
    criteria: &Criteria,
    action: usize,
    robot: usize,
    index: usize,
    end: f64,
    makespan: f64,
) -> InsertionCost {
    let route = &genotype.routes[robot];
    let prev = index.checked_sub(1).map(|i| route[i]);
    let next = route.get(index).copied();
    let mut d_travel = problem.leg_time(robot, prev, action);
    if let Some(nx) = next {
        d_travel += problem.leg_time(robot, Some(action), nx) - problem.leg_time(robot, prev, nx);
    }
    let service = problem
        .service(robot, action)
        .expect("insertion restricted to capable robots");
    let new_end = end + d_travel + service.duration;
    let d_makespan = new_end.max(makespan) - makespan;
    let d_cost = service.cost + travel_cost(problem.robot(robot), d_travel);
    InsertionCost {
        scalar: criteria.beta * d_makespan + criteria.gamma * d_cost,
        new_route_end: new_end,
    }
}

fn insertion_order(a: &Insertion, b: &Insertion) -> Ordering {
    a.cost
        .scalar
        .total_cmp(&b.cost.scalar)
        .then(a.cost.new_route_end.total_cmp(&b.cost.new_route_end))
        .then(a.robot.cmp(&b.robot))
        .then(a.index.cmp(&b.index))
}

/// Cheapest feasible position for an unassigned `action`.
pub fn best_insertion(
    problem: &SchedulingProblem,
    genotype: &Genotype,
    criteria: &Criteria,
    action: usize,
) -> Option<Insertion> {
    let windows = insertion_windows(problem, genotype, action);
    if windows.is_empty() {
        return None;
    }
    let ends: Vec<f64> = genotype
        .routes
        .iter()
        .enumerate()
        .map(|(r, route)| route_end(problem, r, route))
        .collect();
    let makespan = ends.iter().copied().fold(0.0, f64::max);
    let mut best: Option<Insertion> = None;
    for (robot, lo, hi) in windows {
        for index in lo..=hi {
            let cost = cost_at(problem, genotype, criteria, action, robot, index, ends[robot], makespan);
            let cand = Insertion { robot, index, cost };
            if best.is_none_or(|b| insertion_order(&cand, &b) == Ordering::Less) {
                best = Some(cand);
            }
        }
    }
    best
}

/// Inserts `action` at its best position. `false` if there is none.
pub fn insert_best(problem: &SchedulingProblem, genotype: &mut Genotype, criteria: &Criteria, action: usize) -> bool {
    match best_insertion(problem, genotype, criteria, action) {
        Some(ins) => {
            genotype.routes[ins.robot].insert(ins.index, action);
            true
        }
        None => false,
    }
}

/// Builds a genotype by best insertion in precedence order.
pub fn greedy_genotype(problem: &SchedulingProblem, criteria: &Criteria) -> Option<Genotype> {
    let mut g = Genotype::empty(problem.n_robots());
    for a in problem.precedence_order()? {
        if !insert_best(problem, &mut g, criteria, a) {
            return None;
        }
    }
    Some(g)
}

/// Random topological order, each action appended to a random capable robot.
/// Every route is then a subsequence of one global order, so the result
/// never deadlocks.
pub fn random_genotype<R: Rng + ?Sized>(problem: &SchedulingProblem, rng: &mut R) -> Genotype {
    let n = problem.n_actions();
    let mut indeg: Vec<usize> = (0..n).map(|a| problem.preds(a).len()).collect();
    let mut ready: Vec<usize> = (0..n).filter(|&a| indeg[a] == 0).collect();
    let mut g = Genotype::empty(problem.n_robots());
    while !ready.is_empty() {
        let a = ready.swap_remove(rng.random_range(0..ready.len()));
        let capable = problem.capable_robots(a);
        let r = capable[rng.random_range(0..capable.len())];
        g.routes[r].push(a);
        for &s in problem.succs(a) {
            indeg[s] -= 1;
            if indeg[s] == 0 {
                ready.push(s);
            }
        }
    }
    g
}

fn remove_actions(genotype: &Genotype, drop: &[bool]) -> Genotype {
    Genotype {
        routes: genotype
            .routes
            .iter()
            .map(|route| route.iter().copied().filter(|&a| !drop[a]).collect())
            .collect(),
    }
}

/// `base` with the actions of `donor_route` removed and reinserted one by one.
fn reinsert_route(
    problem: &SchedulingProblem,
    criteria: &Criteria,
    base: &Individual,
    donor_route: &[usize],
) -> Offspring {
    let mut drop = vec![false; problem.n_actions()];
    for &a in donor_route {
        drop[a] = true;
    }
    let mut g = remove_actions(&base.genotype, &drop);
    let Some(order) = problem.precedence_order() else {
        return Offspring::unchanged(base);
    };
    for a in order.into_iter().filter(|&a| drop[a]) {
        if !insert_best(problem, &mut g, criteria, a) {
            return Offspring::unchanged(base);
        }
    }
    Offspring::rendered(problem, g, base)
}

fn random_nonempty_route<'a, R: Rng + ?Sized>(g: &'a Genotype, rng: &mut R) -> Option<&'a [usize]> {
    let nonempty: Vec<&Vec<usize>> = g.routes.iter().filter(|r| !r.is_empty()).collect();
    if nonempty.is_empty() {
        return None;
    }
    Some(nonempty[rng.random_range(0..nonempty.len())])
}

/// Best-cost route crossover. Each child is one parent with a random route
/// of the other parent removed and its actions reinserted at best cost.
pub fn bcrc_crossover<R: Rng + ?Sized>(
    p1: &Individual,
    p2: &Individual,
    problem: &SchedulingProblem,
    criteria: &Criteria,
    rng: &mut R,
) -> (Offspring, Offspring) {
    let from_p2 = random_nonempty_route(&p2.genotype, rng).map(<[usize]>::to_vec);
    let from_p1 = random_nonempty_route(&p1.genotype, rng).map(<[usize]>::to_vec);
    let c1 = match from_p2 {
        Some(route) => reinsert_route(problem, criteria, p1, &route),
        None => Offspring::unchanged(p1),
    };
    let c2 = match from_p1 {
        Some(route) => reinsert_route(problem, criteria, p2, &route),
        None => Offspring::unchanged(p2),
    };
    (c1, c2)
}

/// Exchanges two actions inside one robot's route.
pub fn intra_depot_swap<R: Rng + ?Sized>(
    parent: &Individual,
    problem: &SchedulingProblem,
    rng: &mut R,
    max_attempts: usize,
) -> Offspring {
    let robots: Vec<usize> = (0..problem.n_robots())
        .filter(|&r| parent.genotype.routes[r].len() >= 2)
        .collect();
    if robots.is_empty() {
        return Offspring::unchanged(parent);
    }
    for _ in 0..max_attempts {
        let r = robots[rng.random_range(0..robots.len())];
        let len = parent.genotype.routes[r].len();
        let i = rng.random_range(0..len);
        let mut j = rng.random_range(0..len - 1);
        if j >= i {
            j += 1;
        }
        let mut g = parent.genotype.clone();
        g.routes[r].swap(i, j);
        if let Ok(phenotype) = render_phenotype(problem, &g) {
            return Offspring {
                genotype: g,
                phenotype,
                failed: false,
            };
        }
    }
    Offspring::unchanged(parent)
}

/// Exchanges a random action of one robot with a random action of another,
/// or moves it there when the other route is empty.
pub fn inter_depot_swap<R: Rng + ?Sized>(
    parent: &Individual,
    problem: &SchedulingProblem,
    rng: &mut R,
    max_attempts: usize,
) -> Offspring {
    let m = problem.n_robots();
    let sources: Vec<usize> = (0..m).filter(|&r| !parent.genotype.routes[r].is_empty()).collect();
    if m < 2 || sources.is_empty() {
        return Offspring::unchanged(parent);
    }
    for _ in 0..max_attempts {
        let r1 = sources[rng.random_range(0..sources.len())];
        let mut r2 = rng.random_range(0..m - 1);
        if r2 >= r1 {
            r2 += 1;
        }
        let (route1, route2) = (&parent.genotype.routes[r1], &parent.genotype.routes[r2]);
        let i = rng.random_range(0..route1.len());
        let a = route1[i];
        let mut g = parent.genotype.clone();
        if route2.is_empty() {
            if !problem.can_perform(r2, a) {
                continue;
            }
            g.routes[r1].remove(i);
            g.routes[r2].push(a);
        } else {
            let j = rng.random_range(0..route2.len());
            let b = route2[j];
            if !problem.can_perform(r2, a) || !problem.can_perform(r1, b) {
                continue;
            }
            g.routes[r1][i] = b;
            g.routes[r2][j] = a;
        }
        if let Ok(phenotype) = render_phenotype(problem, &g) {
            return Offspring {
                genotype: g,
                phenotype,
                failed: false,
            };
        }
    }
    Offspring::unchanged(parent)
}

/// Removes one random action and reinserts it at the best position overall.
pub fn single_action_reroute<R: Rng + ?Sized>(
    parent: &Individual,
    problem: &SchedulingProblem,
    criteria: &Criteria,
    rng: &mut R,
) -> Offspring {
    let n = problem.n_actions();
    if n == 0 {
        return Offspring::unchanged(parent);
    }
    let a = rng.random_range(0..n);
    let mut drop = vec![false; n];
    drop[a] = true;
    let mut g = remove_actions(&parent.genotype, &drop);
    if !insert_best(problem, &mut g, criteria, a) {
        return Offspring::unchanged(parent);
    }
    Offspring::rendered(problem, g, parent)
}
