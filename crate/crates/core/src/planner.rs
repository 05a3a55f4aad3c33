//! The two-stage pipeline: decomposition selection, then allocation and
//! scheduling of the best few decompositions.

use serde::{Deserialize, Serialize};

use crate::coalition::{run_coalition, CoalitionConfig, CoalitionReport};
use crate::decomposition::{
    generate_alternatives_with, select_top_k, Alternative, AlternativeCounts, Criteria, DecompositionConfig,
    PruneParam, DEFAULT_HARD_CAP,
};
use crate::error::{Error, Result};
use crate::evolution::{scalarized, Individual};
use crate::mission::Mission;
use crate::schedule::SchedulingProblem;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PlanConfig {
    pub criteria: Criteria,
    pub mu: PruneParam,
    /// Number of root alternatives handed to the scheduler.
    pub top_k: usize,
    pub hard_cap: usize,
    /// `coalition.evolution.criteria` is overwritten by `criteria`.
    pub coalition: CoalitionConfig,
}

impl Default for PlanConfig {
    fn default() -> Self {
        Self {
            criteria: Criteria::default(),
            mu: PruneParam::new(10).expect("nonzero"),
            top_k: 3,
            hard_cap: DEFAULT_HARD_CAP,
            coalition: CoalitionConfig::default(),
        }
    }
}

#[derive(Debug, Clone)]
pub struct AlternativeRun {
    pub alternative: Alternative,
    pub problem: SchedulingProblem,
    pub report: CoalitionReport,
}

impl AlternativeRun {
    pub fn best(&self) -> &Individual {
        &self.report.best
    }
}

#[derive(Debug, Clone)]
pub struct Plan {
    pub criteria: Criteria,
    /// Root alternatives kept by the decomposition search, best first.
    pub alternatives: Vec<Alternative>,
    pub counts: AlternativeCounts,
    pub runs: Vec<AlternativeRun>,
    /// Index into `runs` of the selected schedule.
    pub chosen: usize,
}

impl Plan {
    pub fn chosen_run(&self) -> &AlternativeRun {
        &self.runs[self.chosen]
    }

    pub fn best(&self) -> &Individual {
        self.chosen_run().best()
    }

    pub fn problem(&self) -> &SchedulingProblem {
        &self.chosen_run().problem
    }
}

/// Plans `mission`. Each of the `top_k` best decompositions is scheduled by
/// a coalition run with the same seed; the run whose selected schedule has
/// the smallest `beta * makespan + gamma * cost` wins, earlier alternatives
/// winning ties.
pub fn plan(mission: &Mission, config: &PlanConfig, seed: u64) -> Result<Plan> {
    mission.validate()?;
    config.criteria.check()?;
    if config.top_k == 0 {
        return Err(Error::InvalidParameter("top-k must be at least 1".into()));
    }
    let mut counts = AlternativeCounts::default();
    let decomposition = DecompositionConfig {
        criteria: config.criteria,
        mu: config.mu,
        hard_cap: config.hard_cap,
    };
    let alternatives = generate_alternatives_with(
        &mission.tree,
        mission.tree.root(),
        &mission.robots,
        &decomposition,
        &mut counts,
    )?;
    let mut coalition = config.coalition.clone();
    coalition.evolution.criteria = config.criteria;
    let mut runs = Vec::new();
    for alternative in select_top_k(&alternatives, config.top_k) {
        let problem = mission.scheduling_problem(&alternative)?;
        let report = run_coalition(&problem, &coalition, seed)?;
        runs.push(AlternativeRun {
            alternative,
            problem,
            report,
        });
    }
    let chosen = (0..runs.len())
        .min_by(|&a, &b| {
            let (oa, ob) = (runs[a].best().objectives(), runs[b].best().objectives());
            scalarized(oa, &config.criteria)
                .total_cmp(&scalarized(ob, &config.criteria))
                .then(a.cmp(&b))
        })
        .ok_or_else(|| Error::InvalidProblem("the mission has no alternatives".into()))?;
    Ok(Plan {
        criteria: config.criteria,
        alternatives,
        counts,
        runs,
        chosen,
    })
}
