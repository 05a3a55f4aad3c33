//! Coalition of solver agents sharing best solutions and operator experience.
//!
//! Agents evolve independently between exchange barriers. At a barrier every
//! agent broadcasts its preferred archive member and a snapshot of its
//! operator statistics, and every other agent consumes those messages in
//! sender order. Because messages only move at barriers and are processed in
//! a fixed order, the parallel and the single-threaded round-robin modes
//! produce the same result.

use rand::{RngCore, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::evolution::pareto::score_population;
use crate::evolution::{
    merge_experience, scalarized, Engine, EvolutionConfig, GenerationRecord, Individual, Objectives, OperatorStats,
};
use crate::schedule::{check_feasible, render_phenotype, Genotype, SchedulingProblem};

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct CoalitionConfig {
    pub n_agents: usize,
    pub evolution: EvolutionConfig,
    pub share: bool,
    /// Generations between exchanges.
    pub share_period: usize,
    /// Weight given to received operator weights.
    pub blend: f64,
    /// Run agents round-robin on the calling thread.
    pub deterministic: bool,
}

impl Default for CoalitionConfig {
    fn default() -> Self {
        Self {
            n_agents: 4,
            evolution: EvolutionConfig::default(),
            share: true,
            share_period: 10,
            blend: 0.3,
            deterministic: false,
        }
    }
}

impl CoalitionConfig {
    pub fn check(&self) -> Result<()> {
        if self.n_agents == 0 {
            return Err(Error::InvalidParameter("at least one agent is required".into()));
        }
        if self.share_period == 0 {
            return Err(Error::InvalidParameter("share period must be positive".into()));
        }
        if !(0.0..=1.0).contains(&self.blend) {
            return Err(Error::InvalidParameter(format!("blend {} not in [0, 1]", self.blend)));
        }
        self.evolution.check()
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum SharePayload {
    BestSolution { genotype: Genotype, objectives: Objectives },
    Experience(OperatorStats),
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ShareMessage {
    pub sender: usize,
    pub generation: usize,
    pub payload: SharePayload,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ShareEvent {
    pub generation: usize,
    pub sender: usize,
    pub receiver: usize,
    pub kind: String,
    pub accepted: bool,
}

/// Seed of agent `agent`. Agent 0 uses `seed` itself.
pub fn agent_seed(seed: u64, agent: usize) -> u64 {
    if agent == 0 {
        return seed;
    }
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    rng.set_stream(agent as u64);
    rng.next_u64()
}

pub struct AgentNode<'a> {
    pub id: usize,
    pub seed: u64,
    pub engine: Engine<'a>,
    pub inbox: Vec<ShareMessage>,
}

impl<'a> AgentNode<'a> {
    pub fn new(problem: &'a SchedulingProblem, config: EvolutionConfig, id: usize, seed: u64) -> Result<Self> {
        Ok(Self {
            id,
            seed,
            engine: Engine::new(problem, config, seed)?,
            inbox: Vec::new(),
        })
    }

    fn run_for(&mut self, generations: usize) {
        for _ in 0..generations {
            if self.engine.is_done() {
                break;
            }
            self.engine.step();
        }
    }

    fn outgoing(&self) -> [ShareMessage; 2] {
        let best = self.engine.best();
        let generation = self.engine.generation();
        [
            ShareMessage {
                sender: self.id,
                generation,
                payload: SharePayload::BestSolution {
                    genotype: best.genotype.clone(),
                    objectives: best.objectives(),
                },
            },
            ShareMessage {
                sender: self.id,
                generation,
                payload: SharePayload::Experience(self.engine.stats().snapshot()),
            },
        ]
    }

    /// Consumes the inbox. Foreign genotypes are re-verified before they
    /// replace the least fit member.
    fn process_inbox(&mut self, blend: f64, events: &mut Vec<ShareEvent>) -> Result<()> {
        for msg in std::mem::take(&mut self.inbox) {
            let (kind, accepted) = match &msg.payload {
                SharePayload::BestSolution { genotype, .. } => {
                    let ok = render_phenotype(self.engine.problem(), genotype)
                        .is_ok_and(|ph| check_feasible(self.engine.problem(), &ph).is_empty());
                    if ok {
                        self.engine.inject(genotype)?;
                    }
                    ("best_solution", ok)
                }
                SharePayload::Experience(remote) => {
                    let merged = merge_experience(self.engine.stats(), remote, blend)?;
                    self.engine.set_stats(merged);
                    ("experience", true)
                }
            };
            events.push(ShareEvent {
                generation: msg.generation,
                sender: msg.sender,
                receiver: self.id,
                kind: kind.into(),
                accepted,
            });
        }
        Ok(())
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct AgentReport {
    pub id: usize,
    pub seed: u64,
    pub generations: usize,
    pub history: Vec<GenerationRecord>,
    pub stats: OperatorStats,
}

#[derive(Debug, Clone)]
pub struct CoalitionReport {
    pub agents: Vec<AgentReport>,
    pub events: Vec<ShareEvent>,
    /// Non-dominated union of all agent archives, sorted by makespan.
    pub front: Vec<Individual>,
    /// Union front members scored against each other; see [`run_coalition`].
    pub best: Individual,
}

/// Runs `config.n_agents` agents until each has used its generation budget
/// or stagnated.
///
/// The final pick is taken from the union of the agent archives: lowest
/// Pareto rank on that union, then highest fitness, then the smallest
/// `beta * makespan + gamma * cost`, then makespan, then cost.
pub fn run_coalition(problem: &SchedulingProblem, config: &CoalitionConfig, seed: u64) -> Result<CoalitionReport> {
    config.check()?;
    let mut agents = (0..config.n_agents)
        .map(|i| AgentNode::new(problem, config.evolution.clone(), i, agent_seed(seed, i)))
        .collect::<Result<Vec<_>>>()?;
    let sharing = config.share && config.n_agents > 1;
    let period = if sharing {
        config.share_period
    } else {
        config.evolution.generations.max(1)
    };
    let mut events = Vec::new();
    while !agents.iter().all(|a| a.engine.is_done()) {
        if config.deterministic {
            agents.iter_mut().for_each(|a| a.run_for(period));
        } else {
            agents.par_iter_mut().for_each(|a| a.run_for(period));
        }
        if sharing {
            let messages: Vec<ShareMessage> = agents.iter().flat_map(|a| a.outgoing()).collect();
            for a in &mut agents {
                a.inbox.extend(messages.iter().filter(|m| m.sender != a.id).cloned());
            }
            for a in &mut agents {
                a.process_inbox(config.blend, &mut events)?;
            }
        }
    }

    let mut pool: Vec<Individual> = Vec::new();
    for a in &agents {
        for m in a.engine.archive().members() {
            if !pool.iter().any(|p| p.objectives() == m.objectives()) {
                pool.push(m.clone());
            }
        }
    }
    let objs: Vec<Objectives> = pool.iter().map(Individual::objectives).collect();
    for (ind, s) in pool.iter_mut().zip(score_population(&objs)) {
        ind.score = s;
    }
    let criteria = &config.evolution.criteria;
    let best = pool
        .iter()
        .min_by(|a, b| {
            let (oa, ob) = (a.objectives(), b.objectives());
            a.score
                .rank
                .cmp(&b.score.rank)
                .then(b.score.fitness.total_cmp(&a.score.fitness))
                .then(scalarized(oa, criteria).total_cmp(&scalarized(ob, criteria)))
                .then(oa.0.total_cmp(&ob.0))
                .then(oa.1.total_cmp(&ob.1))
        })
        .cloned()
        .expect("every agent archive is nonempty");
    let mut front: Vec<Individual> = pool.into_iter().filter(|i| i.score.rank == 1).collect();
    front.sort_by(|a, b| {
        let (oa, ob) = (a.objectives(), b.objectives());
        oa.0.total_cmp(&ob.0).then(oa.1.total_cmp(&ob.1))
    });
    let agents = agents
        .into_iter()
        .map(|a| AgentReport {
            id: a.id,
            seed: a.seed,
            generations: a.engine.generation(),
            history: a.engine.history().to_vec(),
            stats: a.engine.stats().clone(),
        })
        .collect();
    Ok(CoalitionReport {
        agents,
        events,
        front,
        best,
    })
}
