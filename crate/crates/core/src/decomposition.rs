//! Task decomposition selection.
//!
//! Alternatives are built bottom-up. An action is its own alternative, an
//! `XOR` task collects the alternatives of each child, and an `AND` task
//! takes the cartesian product of its children's lists. Whenever a task ends
//! up with more than `mu` alternatives only the best `mu` by score are kept.
//!
//! Action outcomes are estimated as the mean over all robots able to perform
//! the action. Scores use quality, duration and cost in their raw units, so
//! criteria weights have to be chosen with those units in mind (a 1 kJ cost
//! weighs as much as a 1 s duration when `beta == gamma`).

use std::cmp::Ordering;
use std::collections::{BTreeSet, HashMap};
use std::fmt::Write as _;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::task_model::{MissionTree, NodeId, Outcome, Qaf, RobotProfile};

/// Default bound on the number of candidates a single combination step may
/// materialize before pruning.
pub const DEFAULT_HARD_CAP: usize = 1_000_000;

/// Weights of quality, duration and cost in the alternative score.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Criteria {
    pub alpha: f64,
    pub beta: f64,
    pub gamma: f64,
}

impl Criteria {
    /// Weights must be nonnegative and sum to one.
    pub fn new(alpha: f64, beta: f64, gamma: f64) -> Result<Self> {
        let c = Self { alpha, beta, gamma };
        c.check()?;
        Ok(c)
    }

    /// Criteria from a makespan/cost importance split given in percent,
    /// with quality ignored.
    pub fn from_importance(makespan: f64, cost: f64) -> Result<Self> {
        let total = makespan + cost;
        if total.is_nan() || total <= 0.0 {
            return Err(Error::InvalidCriteria(format!(
                "importance {makespan}-{cost} does not sum to a positive value"
            )));
        }
        Self::new(0.0, makespan / total, cost / total)
    }

    pub fn check(&self) -> Result<()> {
        let w = [self.alpha, self.beta, self.gamma];
        if w.iter().any(|v| !v.is_finite() || *v < 0.0) {
            return Err(Error::InvalidCriteria(format!(
                "weights must be finite and nonnegative, got {w:?}"
            )));
        }
        let sum: f64 = w.iter().sum();
        if (sum - 1.0).abs() > 1e-9 {
            return Err(Error::InvalidCriteria(format!("weights sum to {sum}, expected 1")));
        }
        Ok(())
    }
}

impl Default for Criteria {
    fn default() -> Self {
        Self {
            alpha: 0.0,
            beta: 0.5,
            gamma: 0.5,
        }
    }
}

/// Maximum number of alternatives kept for a single task.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Serialize, Deserialize)]
pub struct PruneParam(usize);

impl PruneParam {
    pub fn new(mu: usize) -> Result<Self> {
        if mu == 0 {
            return Err(Error::InvalidParameter("mu must be at least 1".into()));
        }
        Ok(Self(mu))
    }

    /// Never prunes.
    pub const UNBOUNDED: PruneParam = PruneParam(usize::MAX);

    pub fn get(&self) -> usize {
        self.0
    }
}

/// A set of actions completing a task, with its estimated outcome and score.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Alternative {
    pub actions: BTreeSet<NodeId>,
    /// Children picked under each `XOR` task on the way down.
    pub branches: BTreeSet<NodeId>,
    pub aggregate: Outcome,
    pub score: f64,
}

impl Alternative {
    /// Descending score, then the lexicographically smaller action set.
    pub fn rank_cmp(&self, other: &Self) -> Ordering {
        other
            .score
            .total_cmp(&self.score)
            .then_with(|| self.actions.cmp(&other.actions))
    }
}

/// Mean outcome over every robot able to perform `action`.
pub fn estimate_action(action: &NodeId, robots: &[RobotProfile]) -> Result<Outcome> {
    let outcomes: Vec<&Outcome> = robots.iter().filter_map(|r| r.outcome(action)).collect();
    if outcomes.is_empty() {
        return Err(Error::Unservable(action.clone()));
    }
    let n = outcomes.len() as f64;
    let sum: Outcome = outcomes.into_iter().copied().sum();
    Ok(Outcome::new(sum.quality / n, sum.duration / n, sum.cost / n))
}

pub fn score(aggregate: &Outcome, criteria: &Criteria) -> f64 {
    criteria.alpha * aggregate.quality - criteria.beta * aggregate.duration - criteria.gamma * aggregate.cost
}

/// Receives one record per task node once its alternatives are combined.
pub trait AlternativeObserver {
    /// `generated` is the number of combinations the task represents before
    /// pruning (saturating), `kept` the length of the returned list.
    fn task_combined(&mut self, task: &NodeId, generated: u128, kept: usize);
}

impl AlternativeObserver for () {
    fn task_combined(&mut self, _: &NodeId, _: u128, _: usize) {}
}

/// Collects per-task alternative counts for profiling.
#[derive(Debug, Clone, Default)]
pub struct AlternativeCounts {
    pub records: Vec<(NodeId, u128, usize)>,
}

impl AlternativeCounts {
    /// One `task<TAB>generated<TAB>kept` line per task, in completion order.
    pub fn to_lines(&self) -> String {
        let mut out = String::new();
        for (task, generated, kept) in &self.records {
            writeln!(out, "{task}\t{generated}\t{kept}").unwrap();
        }
        out
    }
}

impl AlternativeObserver for AlternativeCounts {
    fn task_combined(&mut self, task: &NodeId, generated: u128, kept: usize) {
        self.records.push((task.clone(), generated, kept));
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct DecompositionConfig {
    pub criteria: Criteria,
    pub mu: PruneParam,
    pub hard_cap: usize,
}

impl DecompositionConfig {
    pub fn new(criteria: Criteria, mu: PruneParam) -> Self {
        Self {
            criteria,
            mu,
            hard_cap: DEFAULT_HARD_CAP,
        }
    }
}

/// Alternatives for `task`, best first, at most `mu` of them.
pub fn generate_alternatives(
    tree: &MissionTree,
    task: &NodeId,
    robots: &[RobotProfile],
    criteria: &Criteria,
    mu: PruneParam,
) -> Result<Vec<Alternative>> {
    generate_alternatives_with(tree, task, robots, &DecompositionConfig::new(*criteria, mu), &mut ())
}

pub fn generate_alternatives_with(
    tree: &MissionTree,
    task: &NodeId,
    robots: &[RobotProfile],
    config: &DecompositionConfig,
    observer: &mut dyn AlternativeObserver,
) -> Result<Vec<Alternative>> {
    config.criteria.check()?;
    let mut search = Search {
        tree,
        robots,
        config,
        estimates: HashMap::new(),
        observer,
    };
    search.alternatives(task)
}

struct Search<'a> {
    tree: &'a MissionTree,
    robots: &'a [RobotProfile],
    config: &'a DecompositionConfig,
    estimates: HashMap<NodeId, Result<Outcome, NodeId>>,
    observer: &'a mut dyn AlternativeObserver,
}

impl Search<'_> {
    fn alternatives(&mut self, id: &NodeId) -> Result<Vec<Alternative>> {
        let node = self.tree.get(id)?;
        if node.is_action() {
            let estimate = self.estimate(id)?;
            return Ok(vec![Alternative {
                actions: BTreeSet::from([id.clone()]),
                branches: BTreeSet::new(),
                aggregate: estimate,
                score: score(&estimate, &self.config.criteria),
            }]);
        }
        let qaf = node.qaf.ok_or_else(|| Error::InvalidChoice {
            task: id.clone(),
            reason: "task has no accumulation function".into(),
        })?;
        let (alts, generated) = match qaf {
            Qaf::And => self.combine_and(id, &node.children)?,
            Qaf::Xor => self.combine_xor(id, &node.children)?,
        };
        self.observer.task_combined(id, generated, alts.len());
        Ok(alts)
    }

    fn estimate(&mut self, action: &NodeId) -> Result<Outcome> {
        let robots = self.robots;
        self.estimates
            .entry(action.clone())
            .or_insert_with(|| estimate_action(action, robots).map_err(|_| action.clone()))
            .clone()
            .map_err(Error::Unservable)
    }

    /// Cartesian product folded one child at a time. Scores are additive
    /// over disjoint action sets, so pruning each partial product to the
    /// best `mu` keeps the same survivors as pruning the full product.
    fn combine_and(&mut self, task: &NodeId, children: &[NodeId]) -> Result<(Vec<Alternative>, u128)> {
        let mut acc = vec![Alternative {
            actions: BTreeSet::new(),
            branches: BTreeSet::new(),
            aggregate: Outcome::ZERO,
            score: 0.0,
        }];
        let mut generated: u128 = 1;
        for child in children {
            let child_alts = self.alternatives(child)?;
            generated = generated.saturating_mul(child_alts.len() as u128);
            let size = (acc.len() as u128) * (child_alts.len() as u128);
            if size > self.config.hard_cap as u128 {
                return Err(Error::ResourceCap {
                    task: task.clone(),
                    candidates: size,
                    cap: self.config.hard_cap,
                });
            }
            let mut next = Vec::with_capacity(size as usize);
            for left in &acc {
                for right in &child_alts {
                    let aggregate = Qaf::And
                        .accumulate(&[left.aggregate, right.aggregate])
                        .expect("AND accepts any arity");
                    next.push(Alternative {
                        actions: left.actions.union(&right.actions).cloned().collect(),
                        branches: left.branches.union(&right.branches).cloned().collect(),
                        aggregate,
                        score: score(&aggregate, &self.config.criteria),
                    });
                }
            }
            acc = self.prune(next);
        }
        Ok((acc, generated))
    }

    fn combine_xor(&mut self, task: &NodeId, children: &[NodeId]) -> Result<(Vec<Alternative>, u128)> {
        let mut all = Vec::new();
        let mut first_unservable = None;
        for child in children {
            match self.alternatives(child) {
                Ok(alts) => {
                    for mut alt in alts {
                        alt.branches.insert(child.clone());
                        all.push(alt);
                    }
                }
                // A branch nobody can execute is simply not an option.
                Err(Error::Unservable(a)) => {
                    first_unservable.get_or_insert(a);
                }
                Err(e) => return Err(e),
            }
            if all.len() > self.config.hard_cap {
                return Err(Error::ResourceCap {
                    task: task.clone(),
                    candidates: all.len() as u128,
                    cap: self.config.hard_cap,
                });
            }
        }
        if all.is_empty() {
            return Err(Error::Unservable(first_unservable.unwrap_or_else(|| task.clone())));
        }
        let generated = all.len() as u128;
        Ok((self.prune(all), generated))
    }

    fn prune(&self, mut alts: Vec<Alternative>) -> Vec<Alternative> {
        alts.sort_by(Alternative::rank_cmp);
        alts.truncate(self.config.mu.get());
        alts
    }
}

/// The first `k` alternatives of a best-first list.
pub fn select_top_k(root_alternatives: &[Alternative], k: usize) -> Vec<Alternative> {
    let mut sorted = root_alternatives.to_vec();
    sorted.sort_by(Alternative::rank_cmp);
    sorted.truncate(k);
    sorted
}
