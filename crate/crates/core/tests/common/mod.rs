//! Random instance generators and brute-force reference implementations.
//!
//! Nothing here calls into the code under test except for constructors and
//! plain accessors.

#![allow(dead_code)]

use std::collections::{BTreeMap, BTreeSet};

use mission_planner::decomposition::Criteria;
use mission_planner::geometry::Point;
use mission_planner::schedule::{Genotype, Phenotype, SchedulingProblem};
use mission_planner::task_model::{MissionTree, Node, NodeId, Outcome, Qaf, RobotProfile};
use rand::Rng;

pub type Rng64 = rand_chacha::ChaCha8Rng;

pub fn rng(seed: u64) -> Rng64 {
    use rand::SeedableRng;
    Rng64::seed_from_u64(seed)
}

// ---- mission trees -------------------------------------------------------

pub struct RandomMission {
    pub tree: MissionTree,
    pub robots: Vec<RobotProfile>,
}

/// Tree with at most `max_leaves` actions. Roughly one action in ten has no
/// capable robot.
pub fn random_mission<R: Rng>(rng: &mut R, max_leaves: usize) -> RandomMission {
    let mut nodes = Vec::new();
    let mut leaves = 0;
    let mut next = 0;
    let root = grow(rng, &mut nodes, &mut leaves, &mut next, max_leaves, 0);
    let actions: Vec<NodeId> = nodes
        .iter()
        .filter(|n: &&Node| n.is_action())
        .map(|n| n.id.clone())
        .collect();
    let n_robots = rng.random_range(1..=3);
    let mut robots: Vec<RobotProfile> = (0..n_robots)
        .map(|i| RobotProfile::new(format!("r{i}"), Point::new(rng.random_range(0.0..5.0), 0.0), 1.0, 10.0))
        .collect();
    for a in &actions {
        if rng.random_bool(0.1) {
            continue;
        }
        let mut any = false;
        for r in robots.iter_mut() {
            if !any || rng.random_bool(0.5) {
                let o = Outcome::new(
                    rng.random_range(0.0..3.0),
                    rng.random_range(0.5..20.0),
                    rng.random_range(0.0..10.0),
                );
                *r = r.clone().with_action(a.clone(), o);
                any = true;
            }
        }
    }
    RandomMission {
        tree: MissionTree::new(root, nodes, vec![]),
        robots,
    }
}

fn grow<R: Rng>(
    rng: &mut R,
    nodes: &mut Vec<Node>,
    leaves: &mut usize,
    next: &mut usize,
    max_leaves: usize,
    depth: usize,
) -> NodeId {
    let id = NodeId::new(format!("n{next}"));
    *next += 1;
    let room = max_leaves - *leaves;
    let make_leaf = room < 2 || depth >= 4 || (depth > 0 && rng.random_bool(0.4));
    if make_leaf {
        *leaves += 1;
        nodes.push(Node::action(id.clone()));
        return id;
    }
    let at = nodes.len();
    nodes.push(Node::action("placeholder"));
    let qaf = if rng.random_bool(0.5) { Qaf::And } else { Qaf::Xor };
    let want = rng.random_range(2..=3);
    let mut children = Vec::new();
    for _ in 0..want {
        if max_leaves - *leaves == 0 {
            break;
        }
        children.push(grow(rng, nodes, leaves, next, max_leaves, depth + 1));
    }
    if children.is_empty() {
        nodes[at] = Node::action(id.clone());
        *leaves += 1;
        return id;
    }
    nodes[at] = Node::task(id.clone(), qaf, children);
    id
}

/// Every decomposition of `id` as a set of actions, no pruning.
pub fn enumerate_decompositions(tree: &MissionTree, id: &NodeId) -> Vec<BTreeSet<NodeId>> {
    let node = tree.node(id).unwrap();
    if node.is_action() {
        return vec![BTreeSet::from([id.clone()])];
    }
    let per_child: Vec<Vec<BTreeSet<NodeId>>> = node
        .children
        .iter()
        .map(|c| enumerate_decompositions(tree, c))
        .collect();
    match node.qaf.unwrap() {
        Qaf::Xor => per_child.into_iter().flatten().collect(),
        Qaf::And => {
            let mut acc = vec![BTreeSet::new()];
            for options in per_child {
                let mut next = Vec::new();
                for base in &acc {
                    for o in &options {
                        let mut s = base.clone();
                        s.extend(o.iter().cloned());
                        next.push(s);
                    }
                }
                acc = next;
            }
            acc
        }
    }
}

/// Mean outcome over capable robots, `None` if nobody can do it.
pub fn mean_outcome(action: &NodeId, robots: &[RobotProfile]) -> Option<Outcome> {
    let outs: Vec<&Outcome> = robots.iter().filter_map(|r| r.outcomes.get(action)).collect();
    if outs.is_empty() {
        return None;
    }
    let n = outs.len() as f64;
    Some(Outcome {
        quality: outs.iter().map(|o| o.quality).sum::<f64>() / n,
        duration: outs.iter().map(|o| o.duration).sum::<f64>() / n,
        cost: outs.iter().map(|o| o.cost).sum::<f64>() / n,
    })
}

pub fn reference_score(o: &Outcome, c: &Criteria) -> f64 {
    c.alpha * o.quality - c.beta * o.duration - c.gamma * o.cost
}

/// Servable decompositions of the root with their scores.
pub fn brute_force_alternatives(
    tree: &MissionTree,
    robots: &[RobotProfile],
    criteria: &Criteria,
) -> Vec<(BTreeSet<NodeId>, f64)> {
    enumerate_decompositions(tree, tree.root())
        .into_iter()
        .filter_map(|set| {
            let mut total = Outcome::new(0.0, 0.0, 0.0);
            for a in &set {
                let o = mean_outcome(a, robots)?;
                total.quality += o.quality;
                total.duration += o.duration;
                total.cost += o.cost;
            }
            let s = reference_score(&total, criteria);
            Some((set, s))
        })
        .collect()
}

pub fn random_criteria<R: Rng>(rng: &mut R) -> Criteria {
    let w: [f64; 3] = [rng.random(), rng.random(), rng.random()];
    let t: f64 = w.iter().sum();
    let (a, b) = (w[0] / t, w[1] / t);
    Criteria::new(a, b, 1.0 - a - b).unwrap()
}

// ---- scheduling problems -------------------------------------------------

/// `n_actions` actions, each doable by a random nonempty subset of robots,
/// with random acyclic precedence (only from lower to higher index).
pub fn random_problem<R: Rng>(rng: &mut R, n_robots: usize, n_actions: usize, p_edge: f64) -> SchedulingProblem {
    let ids: Vec<NodeId> = (0..n_actions).map(|i| NodeId::new(format!("a{i:02}"))).collect();
    let mut robots: Vec<RobotProfile> = (0..n_robots)
        .map(|r| {
            RobotProfile::new(
                format!("r{r}"),
                Point::new(rng.random_range(0.0..10.0), rng.random_range(0.0..10.0)),
                rng.random_range(0.3..2.0),
                rng.random_range(0.0..500.0),
            )
        })
        .collect();
    for id in &ids {
        let forced = rng.random_range(0..n_robots);
        for (r, robot) in robots.iter_mut().enumerate() {
            if r == forced || rng.random_bool(0.5) {
                let o = Outcome::new(1.0, rng.random_range(0.5..15.0), rng.random_range(0.0..5.0));
                *robot = robot.clone().with_action(id.clone(), o);
            }
        }
    }
    let locations: BTreeMap<NodeId, Point> = ids
        .iter()
        .map(|id| {
            (
                id.clone(),
                Point::new(rng.random_range(0.0..10.0), rng.random_range(0.0..10.0)),
            )
        })
        .collect();
    let mut precedence = BTreeSet::new();
    for i in 0..n_actions {
        for j in (i + 1)..n_actions {
            if rng.random_bool(p_edge) {
                precedence.insert((ids[i].clone(), ids[j].clone()));
            }
        }
    }
    SchedulingProblem::new(robots, ids, &precedence, &locations).unwrap()
}

/// Random deadlock-free genotype: walk a random linear extension of the
/// precedence order and append each action to a random capable robot.
pub fn random_feasible_genotype<R: Rng>(rng: &mut R, problem: &SchedulingProblem) -> Genotype {
    let n = problem.n_actions();
    let mut placed = vec![false; n];
    let mut routes = vec![Vec::new(); problem.n_robots()];
    for _ in 0..n {
        let ready: Vec<usize> = (0..n)
            .filter(|&a| !placed[a] && problem.preds(a).iter().all(|&p| placed[p]))
            .collect();
        let a = ready[rng.random_range(0..ready.len())];
        let capable: Vec<usize> = (0..problem.n_robots()).filter(|&r| problem.can_perform(r, a)).collect();
        routes[capable[rng.random_range(0..capable.len())]].push(a);
        placed[a] = true;
    }
    Genotype { routes }
}

/// Earliest start times by fixpoint iteration of
/// `start = max(arrival, latest predecessor finish)`.
/// `None` if it does not settle (deadlock).
pub fn earliest_start_fixpoint(problem: &SchedulingProblem, g: &Genotype) -> Option<Vec<(f64, f64)>> {
    let n = problem.n_actions();
    let mut start = vec![0.0f64; n];
    let mut finish = vec![0.0f64; n];
    let dur = |r: usize, a: usize| problem.service(r, a).unwrap().duration;
    for _ in 0..=(n + 1) {
        let mut changed = false;
        for (r, route) in g.routes.iter().enumerate() {
            for (i, &a) in route.iter().enumerate() {
                let arrival = if i == 0 {
                    problem.leg_time(r, None, a)
                } else {
                    finish[route[i - 1]] + problem.leg_time(r, Some(route[i - 1]), a)
                };
                let s = problem.preds(a).iter().map(|&p| finish[p]).fold(arrival, f64::max);
                let f = s + dur(r, a);
                if s != start[a] || f != finish[a] {
                    start[a] = s;
                    finish[a] = f;
                    changed = true;
                }
            }
        }
        if !changed {
            return Some(start.into_iter().zip(finish).collect());
        }
    }
    None
}

/// Whether some single action could start `delta` earlier while every
/// travel and precedence constraint still holds.
pub fn left_shift_possible(problem: &SchedulingProblem, p: &Phenotype, delta: f64) -> bool {
    let n = problem.n_actions();
    let mut finish = vec![0.0; n];
    for e in p.schedules.iter().flatten() {
        finish[e.action] = e.finish;
    }
    for (r, entries) in p.schedules.iter().enumerate() {
        for (i, e) in entries.iter().enumerate() {
            let shifted = e.start - delta;
            let arrival = if i == 0 {
                problem.leg_time(r, None, e.action)
            } else {
                entries[i - 1].finish + problem.leg_time(r, Some(entries[i - 1].action), e.action)
            };
            let preds_ok = problem.preds(e.action).iter().all(|&q| finish[q] <= shifted);
            if shifted >= arrival && preds_ok {
                return true;
            }
        }
    }
    false
}

// ---- Pareto ----------------------------------------------------------------

pub fn dominates_ref(a: (f64, f64), b: (f64, f64)) -> bool {
    a.0 <= b.0 && a.1 <= b.1 && (a.0 < b.0 || a.1 < b.1)
}

/// Peel off non-dominated layers one at a time.
pub fn rank_by_peeling(points: &[(f64, f64)]) -> Vec<usize> {
    let mut rank = vec![0; points.len()];
    let mut left: Vec<usize> = (0..points.len()).collect();
    let mut level = 0;
    while !left.is_empty() {
        level += 1;
        let layer: Vec<usize> = left
            .iter()
            .copied()
            .filter(|&i| !left.iter().any(|&j| dominates_ref(points[j], points[i])))
            .collect();
        for &i in &layer {
            rank[i] = level;
        }
        left.retain(|i| !layer.contains(i));
    }
    rank
}

pub fn random_points<R: Rng>(rng: &mut R, n: usize, grid: bool) -> Vec<(f64, f64)> {
    (0..n)
        .map(|_| {
            if grid {
                (rng.random_range(0..8) as f64, rng.random_range(0..8) as f64)
            } else {
                (rng.random_range(0.0..100.0), rng.random_range(0.0..100.0))
            }
        })
        .collect()
}

/// Every multiset of actions in `g`, sorted.
pub fn action_multiset(g: &Genotype) -> Vec<usize> {
    let mut v: Vec<usize> = g.routes.iter().flatten().copied().collect();
    v.sort_unstable();
    v
}
