//! Allocation and scheduling model.
//!
//! Robots are depots, actions are customers and a robot's ordered action
//! list is its route. A [`Genotype`] fixes who does what and in which
//! order; [`render_phenotype`] turns it into the semi-active timed schedule
//! in which every action starts as soon as its robot has arrived and all of
//! its precedence predecessors have finished.
//!
//! Actions are addressed by their index in [`SchedulingProblem::actions`]
//! and robots by their index in [`SchedulingProblem::robots`].

use std::collections::{BTreeMap, BTreeSet, HashMap};

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::geometry::Point;
use crate::task_model::{NodeId, RobotProfile};
use crate::validation::{ValidationReport, ViolationKind};

/// Drive energy is reported in kJ.
pub const JOULES_PER_COST_UNIT: f64 = 1000.0;

/// Absolute slack used when comparing times and costs.
pub const TOLERANCE: f64 = 1e-5;

pub fn travel_time(robot: &RobotProfile, from: Point, to: Point) -> f64 {
    from.distance(&to) / robot.speed
}

/// Energy drawn by `robot` while driving for `seconds`.
pub fn travel_cost(robot: &RobotProfile, seconds: f64) -> f64 {
    seconds * robot.drive_power / JOULES_PER_COST_UNIT
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Service {
    pub duration: f64,
    pub cost: f64,
}

#[derive(Debug, Clone)]
pub struct SchedulingProblem {
    robots: Vec<RobotProfile>,
    actions: Vec<NodeId>,
    action_index: HashMap<NodeId, usize>,
    robot_index: HashMap<String, usize>,
    locations: Vec<Point>,
    precedence: Vec<(usize, usize)>,
    preds: Vec<Vec<usize>>,
    succs: Vec<Vec<usize>>,
    /// `service[robot][action]`, `None` when the robot cannot do the action.
    service: Vec<Vec<Option<Service>>>,
    capable: Vec<Vec<usize>>,
}

impl SchedulingProblem {
    pub fn new(
        robots: Vec<RobotProfile>,
        actions: impl IntoIterator<Item = NodeId>,
        precedence: &BTreeSet<(NodeId, NodeId)>,
        locations: &BTreeMap<NodeId, Point>,
    ) -> Result<Self> {
        let actions: Vec<NodeId> = actions.into_iter().collect::<BTreeSet<_>>().into_iter().collect();
        let action_index: HashMap<NodeId, usize> = actions.iter().enumerate().map(|(i, a)| (a.clone(), i)).collect();

        let mut robot_index = HashMap::new();
        for (i, r) in robots.iter().enumerate() {
            if robot_index.insert(r.id.clone(), i).is_some() {
                return Err(Error::InvalidProblem(format!("duplicate robot id `{}`", r.id)));
            }
            if !(r.speed.is_finite() && r.speed > 0.0) {
                return Err(Error::InvalidProblem(format!(
                    "robot `{}` needs a positive speed",
                    r.id
                )));
            }
            if !(r.drive_power.is_finite() && r.drive_power >= 0.0) {
                return Err(Error::InvalidProblem(format!(
                    "robot `{}` has invalid drive power",
                    r.id
                )));
            }
            if let Some((a, _)) = r.outcomes.iter().find(|(_, o)| !o.is_valid()) {
                return Err(Error::InvalidProblem(format!(
                    "robot `{}` has an invalid outcome for `{a}`",
                    r.id
                )));
            }
        }

        let service: Vec<Vec<Option<Service>>> = robots
            .iter()
            .map(|r| {
                actions
                    .iter()
                    .map(|a| {
                        r.outcome(a).map(|o| Service {
                            duration: o.duration,
                            cost: o.cost,
                        })
                    })
                    .collect()
            })
            .collect();
        let capable: Vec<Vec<usize>> = (0..actions.len())
            .map(|a| (0..robots.len()).filter(|&r| service[r][a].is_some()).collect())
            .collect();
        if let Some(a) = capable.iter().position(Vec::is_empty) {
            return Err(Error::Unservable(actions[a].clone()));
        }

        let locations = actions
            .iter()
            .map(|a| {
                locations
                    .get(a)
                    .copied()
                    .ok_or_else(|| Error::InvalidProblem(format!("action `{a}` has no location")))
            })
            .collect::<Result<Vec<_>>>()?;

        let mut pairs = Vec::with_capacity(precedence.len());
        let mut preds = vec![Vec::new(); actions.len()];
        let mut succs = vec![Vec::new(); actions.len()];
        for (before, after) in precedence {
            let lookup = |id: &NodeId| {
                action_index
                    .get(id)
                    .copied()
                    .ok_or_else(|| Error::InvalidProblem(format!("precedence references unknown action `{id}`")))
            };
            let (b, a) = (lookup(before)?, lookup(after)?);
            if b == a {
                return Err(Error::InvalidProblem(format!("action `{before}` precedes itself")));
            }
            pairs.push((b, a));
            preds[a].push(b);
            succs[b].push(a);
        }

        let problem = Self {
            robots,
            actions,
            action_index,
            robot_index,
            locations,
            precedence: pairs,
            preds,
            succs,
            service,
            capable,
        };
        if problem.precedence_order().is_none() {
            return Err(Error::InvalidProblem("precedence constraints are cyclic".into()));
        }
        Ok(problem)
    }

    pub fn robots(&self) -> &[RobotProfile] {
        &self.robots
    }

    pub fn robot(&self, r: usize) -> &RobotProfile {
        &self.robots[r]
    }

    pub fn robot_index(&self, id: &str) -> Option<usize> {
        self.robot_index.get(id).copied()
    }

    pub fn actions(&self) -> &[NodeId] {
        &self.actions
    }

    pub fn n_actions(&self) -> usize {
        self.actions.len()
    }

    pub fn n_robots(&self) -> usize {
        self.robots.len()
    }

    pub fn action_id(&self, a: usize) -> &NodeId {
        &self.actions[a]
    }

    pub fn action_index(&self, id: &NodeId) -> Option<usize> {
        self.action_index.get(id).copied()
    }

    pub fn location(&self, a: usize) -> Point {
        self.locations[a]
    }

    pub fn precedence(&self) -> &[(usize, usize)] {
        &self.precedence
    }

    pub fn preds(&self, a: usize) -> &[usize] {
        &self.preds[a]
    }

    pub fn succs(&self, a: usize) -> &[usize] {
        &self.succs[a]
    }

    pub fn service(&self, robot: usize, action: usize) -> Option<Service> {
        self.service[robot][action]
    }

    pub fn can_perform(&self, robot: usize, action: usize) -> bool {
        self.service[robot][action].is_some()
    }

    pub fn capable_robots(&self, action: usize) -> &[usize] {
        &self.capable[action]
    }

    /// Travel time of `robot` from `from` (its depot when `None`) to action `to`.
    pub fn leg_time(&self, robot: usize, from: Option<usize>, to: usize) -> f64 {
        let r = &self.robots[robot];
        let origin = from.map_or(r.start, |a| self.locations[a]);
        travel_time(r, origin, self.locations[to])
    }

    /// Actions in a topological order of the precedence relation, smallest
    /// index first among ready ones. `None` if the relation is cyclic.
    pub fn precedence_order(&self) -> Option<Vec<usize>> {
        let n = self.n_actions();
        let mut indeg: Vec<usize> = (0..n).map(|a| self.preds[a].len()).collect();
        let mut ready: BTreeSet<usize> = (0..n).filter(|&a| indeg[a] == 0).collect();
        let mut order = Vec::with_capacity(n);
        while let Some(a) = ready.pop_first() {
            order.push(a);
            for &s in &self.succs[a] {
                indeg[s] -= 1;
                if indeg[s] == 0 {
                    ready.insert(s);
                }
            }
        }
        (order.len() == n).then_some(order)
    }
}

/// Per-robot ordered action lists, indexed like [`SchedulingProblem::robots`].
#[derive(Debug, Clone, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct Genotype {
    pub routes: Vec<Vec<usize>>,
}

impl Genotype {
    pub fn empty(n_robots: usize) -> Self {
        Self {
            routes: vec![Vec::new(); n_robots],
        }
    }

    pub fn from_named(problem: &SchedulingProblem, named: &BTreeMap<String, Vec<NodeId>>) -> Result<Self> {
        let mut g = Self::empty(problem.n_robots());
        for (robot, route) in named {
            let r = problem
                .robot_index(robot)
                .ok_or_else(|| Error::InvalidGenotype(format!("unknown robot `{robot}`")))?;
            g.routes[r] = route
                .iter()
                .map(|a| {
                    problem
                        .action_index(a)
                        .ok_or_else(|| Error::InvalidGenotype(format!("unknown action `{a}`")))
                })
                .collect::<Result<_>>()?;
        }
        Ok(g)
    }

    pub fn to_named(&self, problem: &SchedulingProblem) -> BTreeMap<String, Vec<NodeId>> {
        self.routes
            .iter()
            .enumerate()
            .map(|(r, route)| {
                (
                    problem.robot(r).id.clone(),
                    route.iter().map(|&a| problem.action_id(a).clone()).collect(),
                )
            })
            .collect()
    }

    pub fn n_assigned(&self) -> usize {
        self.routes.iter().map(Vec::len).sum()
    }

    /// `(robot, position)` of every assigned action.
    pub fn positions(&self, n_actions: usize) -> Vec<Option<(usize, usize)>> {
        let mut pos = vec![None; n_actions];
        for (r, route) in self.routes.iter().enumerate() {
            for (i, &a) in route.iter().enumerate() {
                if a < n_actions {
                    pos[a] = Some((r, i));
                }
            }
        }
        pos
    }
}

/// Checks assignment completeness, capability and intra-route precedence.
/// Cross-route deadlocks are only detected by rendering.
pub fn check_genotype(problem: &SchedulingProblem, genotype: &Genotype) -> Result<()> {
    let bad = |m: String| Err(Error::InvalidGenotype(m));
    if genotype.routes.len() != problem.n_robots() {
        return bad(format!(
            "{} routes for {} robots",
            genotype.routes.len(),
            problem.n_robots()
        ));
    }
    let mut pos = vec![None; problem.n_actions()];
    for (r, route) in genotype.routes.iter().enumerate() {
        for (i, &a) in route.iter().enumerate() {
            if a >= problem.n_actions() {
                return bad(format!("action index {a} out of range"));
            }
            if pos[a].replace((r, i)).is_some() {
                return bad(format!("action `{}` assigned twice", problem.action_id(a)));
            }
            if !problem.can_perform(r, a) {
                return bad(format!(
                    "robot `{}` cannot perform `{}`",
                    problem.robot(r).id,
                    problem.action_id(a)
                ));
            }
        }
    }
    if let Some(a) = pos.iter().position(Option::is_none) {
        return bad(format!("action `{}` is not assigned", problem.action_id(a)));
    }
    for &(b, a) in problem.precedence() {
        let ((rb, ib), (ra, ia)) = (pos[b].unwrap(), pos[a].unwrap());
        if rb == ra && ib > ia {
            return bad(format!(
                "`{}` is routed after its successor `{}`",
                problem.action_id(b),
                problem.action_id(a)
            ));
        }
    }
    Ok(())
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ScheduledAction {
    pub action: usize,
    pub start: f64,
    pub finish: f64,
}

/// Timed schedule, one entry list per robot in route order.
#[derive(Debug, Clone, PartialEq)]
pub struct Phenotype {
    pub schedules: Vec<Vec<ScheduledAction>>,
    pub makespan: f64,
    pub total_cost: f64,
}

impl Phenotype {
    /// Start and finish of every action, by action index.
    pub fn times(&self, n_actions: usize) -> Vec<Option<(f64, f64)>> {
        let mut t = vec![None; n_actions];
        for entry in self.schedules.iter().flatten() {
            if entry.action < n_actions {
                t[entry.action] = Some((entry.start, entry.finish));
            }
        }
        t
    }

    /// The route order this schedule realizes.
    pub fn genotype(&self) -> Genotype {
        Genotype {
            routes: self
                .schedules
                .iter()
                .map(|s| s.iter().map(|e| e.action).collect())
                .collect(),
        }
    }

    /// Idle seconds between arrival and start, summed over all robots.
    pub fn idle_time(&self, problem: &SchedulingProblem) -> f64 {
        let mut idle = 0.0;
        for (r, entries) in self.schedules.iter().enumerate() {
            let mut prev: Option<&ScheduledAction> = None;
            for e in entries {
                let ready = prev.map_or(0.0, |p| p.finish) + problem.leg_time(r, prev.map(|p| p.action), e.action);
                idle += (e.start - ready).max(0.0);
                prev = Some(e);
            }
        }
        idle
    }
}

pub fn objectives(phenotype: &Phenotype) -> (f64, f64) {
    (phenotype.makespan, phenotype.total_cost)
}

/// Semi-active schedule of `genotype`.
///
/// Each action starts at the later of its robot's arrival (previous finish
/// plus travel, or travel from the depot) and the latest finish among its
/// precedence predecessors. Fails with [`Error::Deadlock`] when route orders
/// and cross-route precedence wait on each other.
pub fn render_phenotype(problem: &SchedulingProblem, genotype: &Genotype) -> Result<Phenotype> {
    if genotype.routes.len() != problem.n_robots() || genotype.n_assigned() != problem.n_actions() {
        return Err(Error::InvalidGenotype("genotype does not cover the problem".into()));
    }
    render(problem, genotype)
}

/// Like [`render_phenotype`] for a genotype that leaves some actions out.
/// Precedence constraints touching unassigned actions are ignored.
pub fn render_partial(problem: &SchedulingProblem, genotype: &Genotype) -> Result<Phenotype> {
    if genotype.routes.len() != problem.n_robots() {
        return Err(Error::InvalidGenotype("route count does not match the robots".into()));
    }
    render(problem, genotype)
}

fn render(problem: &SchedulingProblem, genotype: &Genotype) -> Result<Phenotype> {
    let n = problem.n_actions();
    let mut pos = vec![None; n];
    for (r, route) in genotype.routes.iter().enumerate() {
        for (i, &a) in route.iter().enumerate() {
            if a >= n || pos[a].replace((r, i)).is_some() {
                return Err(Error::InvalidGenotype("an action is out of range or duplicated".into()));
            }
        }
    }
    let assigned = |a: usize| pos[a].is_some();

    // Kahn over route edges plus precedence edges.
    let mut indeg = vec![0usize; n];
    let mut stack = Vec::new();
    let mut expected = 0;
    for a in 0..n {
        if let Some((_, i)) = pos[a] {
            expected += 1;
            indeg[a] = problem.preds(a).iter().filter(|&&p| assigned(p)).count() + usize::from(i > 0);
            if indeg[a] == 0 {
                stack.push(a);
            }
        }
    }
    let mut start = vec![0.0; n];
    let mut finish = vec![0.0; n];
    let mut done = 0;
    let mut travel_seconds = vec![0.0; problem.n_robots()];
    let mut service_cost = 0.0;

    while let Some(a) = stack.pop() {
        let (r, i) = pos[a].unwrap();
        let route = &genotype.routes[r];
        let prev = (i > 0).then(|| route[i - 1]);
        let Some(service) = problem.service(r, a) else {
            return Err(Error::InvalidGenotype(format!(
                "robot `{}` cannot perform `{}`",
                problem.robot(r).id,
                problem.action_id(a)
            )));
        };
        let leg = problem.leg_time(r, prev, a);
        travel_seconds[r] += leg;
        service_cost += service.cost;
        let arrival = prev.map_or(0.0, |p| finish[p]) + leg;
        let released = problem
            .preds(a)
            .iter()
            .filter(|&&p| assigned(p))
            .map(|&p| finish[p])
            .fold(0.0, f64::max);
        start[a] = arrival.max(released);
        finish[a] = start[a] + service.duration;
        done += 1;

        let next = route.get(i + 1).copied();
        for s in next
            .into_iter()
            .chain(problem.succs(a).iter().copied().filter(|&s| assigned(s)))
        {
            indeg[s] -= 1;
            if indeg[s] == 0 {
                stack.push(s);
            }
        }
    }
    if done < expected {
        return Err(Error::Deadlock(expected - done));
    }

    let schedules: Vec<Vec<ScheduledAction>> = genotype
        .routes
        .iter()
        .map(|route| {
            route
                .iter()
                .map(|&a| ScheduledAction {
                    action: a,
                    start: start[a],
                    finish: finish[a],
                })
                .collect()
        })
        .collect();
    let makespan = schedules.iter().flatten().map(|e| e.finish).fold(0.0, f64::max);
    let travel_cost_total: f64 = travel_seconds
        .iter()
        .enumerate()
        .map(|(r, &s)| travel_cost(problem.robot(r), s))
        .sum();
    Ok(Phenotype {
        schedules,
        makespan,
        total_cost: service_cost + travel_cost_total,
    })
}

fn close(a: f64, b: f64) -> bool {
    (a - b).abs() <= TOLERANCE * a.abs().max(b.abs()).max(1.0)
}

fn at_least(value: f64, bound: f64) -> bool {
    value >= bound - TOLERANCE * bound.abs().max(1.0)
}

/// Re-verifies a timed schedule from scratch.
pub fn check_feasible(problem: &SchedulingProblem, phenotype: &Phenotype) -> ValidationReport {
    let mut report = ValidationReport::default();
    let n = problem.n_actions();
    if phenotype.schedules.len() != problem.n_robots() {
        report.push(
            ViolationKind::Assignment,
            Vec::<String>::new(),
            format!(
                "{} schedules for {} robots",
                phenotype.schedules.len(),
                problem.n_robots()
            ),
        );
        return report;
    }

    let mut seen = vec![0usize; n];
    for (r, entries) in phenotype.schedules.iter().enumerate() {
        let robot = problem.robot(r);
        for e in entries {
            if e.action >= n {
                report.push(
                    ViolationKind::Assignment,
                    [&robot.id],
                    format!("unknown action index {}", e.action),
                );
                continue;
            }
            seen[e.action] += 1;
            let id = problem.action_id(e.action);
            match problem.service(r, e.action) {
                None => report.push(ViolationKind::Capability, [robot.id.as_str(), id.as_str()], ""),
                Some(s) => {
                    if !close(e.finish - e.start, s.duration) {
                        report.push(
                            ViolationKind::Duration,
                            [id],
                            format!("lasts {} s, service takes {} s", e.finish - e.start, s.duration),
                        );
                    }
                }
            }
        }
    }
    for (a, &count) in seen.iter().enumerate() {
        if count != 1 {
            report.push(
                ViolationKind::Assignment,
                [problem.action_id(a)],
                format!("scheduled {count} times"),
            );
        }
    }
    if !report.is_empty() {
        return report;
    }

    let times = phenotype.times(n);
    let finish_of = |a: usize| times[a].unwrap().1;
    let mut service_cost = 0.0;
    let mut travel_total = 0.0;
    for (r, entries) in phenotype.schedules.iter().enumerate() {
        let robot = problem.robot(r);
        let mut prev: Option<&ScheduledAction> = None;
        for e in entries {
            let id = problem.action_id(e.action);
            let leg = problem.leg_time(r, prev.map(|p| p.action), e.action);
            travel_total += travel_cost(robot, leg);
            service_cost += problem.service(r, e.action).unwrap().cost;
            let arrival = prev.map_or(0.0, |p| p.finish) + leg;
            if !at_least(e.start, arrival) {
                report.push(
                    ViolationKind::Travel,
                    [robot.id.as_str(), id.as_str()],
                    format!("starts at {} before arriving at {}", e.start, arrival),
                );
            }
            let mut earliest = arrival;
            for &p in problem.preds(e.action) {
                let pf = finish_of(p);
                earliest = earliest.max(pf);
                if !at_least(e.start, pf) {
                    report.push(
                        ViolationKind::Precedence,
                        [problem.action_id(p), id],
                        format!("starts at {} before predecessor finishes at {}", e.start, pf),
                    );
                }
            }
            if e.start > earliest + TOLERANCE * earliest.abs().max(1.0) {
                report.push(
                    ViolationKind::NotSemiActive,
                    [id],
                    format!("starts at {} but could start at {}", e.start, earliest),
                );
            }
            prev = Some(e);
        }
    }

    let makespan = times.iter().map(|t| t.unwrap().1).fold(0.0, f64::max);
    if !close(makespan, phenotype.makespan) {
        report.push(
            ViolationKind::Objective,
            ["makespan"],
            format!("stored {}, recomputed {}", phenotype.makespan, makespan),
        );
    }
    let cost = service_cost + travel_total;
    if !close(cost, phenotype.total_cost) {
        report.push(
            ViolationKind::Objective,
            ["total_cost"],
            format!("stored {}, recomputed {}", phenotype.total_cost, cost),
        );
    }
    report
}
