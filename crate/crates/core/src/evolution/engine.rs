use std::collections::HashSet;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use super::adaptive::{OperatorKind, OperatorStats};
use super::operators::{
    bcrc_crossover, greedy_genotype, inter_depot_swap, intra_depot_swap, random_genotype, single_action_reroute,
    Offspring,
};
use super::pareto::{dominates, score_population, weakly_dominates, Objectives};
use super::Individual;
use crate::decomposition::Criteria;
use crate::error::{Error, Result};
use crate::schedule::{render_phenotype, Genotype, SchedulingProblem};

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct EvolutionConfig {
    pub population: usize,
    pub generations: usize,
    pub learning_rate: f64,
    pub floor: f64,
    /// Weights of the insertion heuristic and of the final pick.
    pub criteria: Criteria,
    /// Resamples a swap operator may take before giving up.
    pub max_attempts: usize,
    /// Stop after this many generations without an archive change.
    pub stagnation: Option<usize>,
}

impl Default for EvolutionConfig {
    fn default() -> Self {
        Self {
            population: 64,
            generations: 500,
            learning_rate: 0.2,
            floor: 0.05,
            criteria: Criteria::default(),
            max_attempts: 20,
            stagnation: None,
        }
    }
}

impl EvolutionConfig {
    pub fn check(&self) -> Result<()> {
        if self.population < 2 {
            return Err(Error::InvalidParameter(format!(
                "population must be at least 2, got {}",
                self.population
            )));
        }
        if self.max_attempts == 0 {
            return Err(Error::InvalidParameter("max_attempts must be positive".into()));
        }
        self.criteria.check()?;
        OperatorStats::standard(self.learning_rate, self.floor).map(|_| ())
    }
}

/// `beta * makespan + gamma * cost`.
pub fn scalarized(obj: Objectives, criteria: &Criteria) -> f64 {
    criteria.beta * obj.0 + criteria.gamma * obj.1
}

/// Non-dominated solutions seen so far, one per objective point.
#[derive(Debug, Clone, Default)]
pub struct Archive {
    members: Vec<Individual>,
}

impl Archive {
    /// Adds `ind` unless an existing member weakly dominates it. Returns
    /// whether the archive changed.
    pub fn insert(&mut self, ind: &Individual) -> bool {
        let obj = ind.objectives();
        if self.members.iter().any(|m| weakly_dominates(&m.objectives(), &obj)) {
            return false;
        }
        self.members.retain(|m| !dominates(&obj, &m.objectives()));
        let at = self
            .members
            .partition_point(|m| m.objectives().0 < obj.0 || (m.objectives().0 == obj.0 && m.objectives().1 < obj.1));
        self.members.insert(at, ind.clone());
        true
    }

    /// Members sorted by makespan.
    pub fn members(&self) -> &[Individual] {
        &self.members
    }

    pub fn front(&self) -> Vec<Objectives> {
        self.members.iter().map(Individual::objectives).collect()
    }

    pub fn len(&self) -> usize {
        self.members.len()
    }

    pub fn is_empty(&self) -> bool {
        self.members.is_empty()
    }

    /// Member minimizing the scalarized objective, then makespan, then cost.
    pub fn best(&self, criteria: &Criteria) -> Option<&Individual> {
        self.members.iter().min_by(|a, b| {
            let (oa, ob) = (a.objectives(), b.objectives());
            scalarized(oa, criteria)
                .total_cmp(&scalarized(ob, criteria))
                .then(oa.0.total_cmp(&ob.0))
                .then(oa.1.total_cmp(&ob.1))
        })
    }
}

/// Telemetry of one generation. Generation 0 is the initial population.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct GenerationRecord {
    pub generation: usize,
    pub best_makespan: f64,
    pub best_cost: f64,
    pub front_size: usize,
    pub archive_size: usize,
    pub max_fitness: f64,
    pub weights: Vec<f64>,
}

fn with_scores(mut pop: Vec<Individual>) -> Vec<Individual> {
    let objs: Vec<Objectives> = pop.iter().map(Individual::objectives).collect();
    for (ind, s) in pop.iter_mut().zip(score_population(&objs)) {
        ind.score = s;
    }
    pop
}

fn tournament<R: Rng + ?Sized>(pop: &[Individual], rng: &mut R) -> usize {
    let i = rng.random_range(0..pop.len());
    let j = rng.random_range(0..pop.len());
    if pop[j].score.fitness > pop[i].score.fitness {
        j
    } else {
        i
    }
}

/// One generation: tournament selection, variation by adaptively chosen
/// operators, scoring of parents and offspring together, reward updates and
/// truncation back to the population size by fitness. Distinct genotypes are
/// preferred over copies during truncation.
pub fn evolve_step<R: Rng + ?Sized>(
    population: &[Individual],
    problem: &SchedulingProblem,
    stats: &mut OperatorStats,
    rng: &mut R,
    config: &EvolutionConfig,
) -> Vec<Individual> {
    let n = population.len();
    let mut children: Vec<(OperatorKind, usize, Offspring)> = Vec::with_capacity(n + 1);
    while children.len() < n {
        let op = stats.select(rng);
        let i = tournament(population, rng);
        let parent = &population[i];
        match op {
            OperatorKind::Bcrc => {
                let j = tournament(population, rng);
                let (c1, c2) = bcrc_crossover(parent, &population[j], problem, &config.criteria, rng);
                children.push((op, i, c1));
                if children.len() < n {
                    children.push((op, j, c2));
                }
            }
            OperatorKind::IntraDepotSwap => {
                children.push((op, i, intra_depot_swap(parent, problem, rng, config.max_attempts)));
            }
            OperatorKind::InterDepotSwap => {
                children.push((op, i, inter_depot_swap(parent, problem, rng, config.max_attempts)));
            }
            OperatorKind::SingleActionReroute => {
                children.push((op, i, single_action_reroute(parent, problem, &config.criteria, rng)));
            }
        }
    }

    let mut pool: Vec<Individual> = population.to_vec();
    pool.extend(
        children
            .iter()
            .map(|(_, _, c)| Individual::unscored(c.genotype.clone(), c.phenotype.clone())),
    );
    let pool = with_scores(pool);
    for (k, (op, parent, _)) in children.iter().enumerate() {
        stats.update_reward(*op, pool[*parent].score.fitness, pool[n + k].score.fitness);
    }

    let mut order: Vec<usize> = (0..pool.len()).collect();
    order.sort_by(|&a, &b| pool[b].score.fitness.total_cmp(&pool[a].score.fitness).then(a.cmp(&b)));
    let mut seen: HashSet<&Genotype> = HashSet::new();
    let mut keep = Vec::with_capacity(n);
    let mut spare = Vec::new();
    for &i in &order {
        if seen.insert(&pool[i].genotype) {
            keep.push(i);
        } else {
            spare.push(i);
        }
    }
    keep.extend(spare);
    keep.truncate(n);
    with_scores(keep.into_iter().map(|i| pool[i].clone()).collect())
}

/// Single-agent evolutionary search.
#[derive(Debug, Clone)]
pub struct Engine<'a> {
    problem: &'a SchedulingProblem,
    config: EvolutionConfig,
    rng: ChaCha8Rng,
    population: Vec<Individual>,
    stats: OperatorStats,
    archive: Archive,
    generation: usize,
    idle_generations: usize,
    history: Vec<GenerationRecord>,
}

impl<'a> Engine<'a> {
    /// Seeds the population with one best-insertion construction and fills
    /// the rest with random precedence-respecting assignments.
    pub fn new(problem: &'a SchedulingProblem, config: EvolutionConfig, seed: u64) -> Result<Self> {
        config.check()?;
        if problem.n_actions() == 0 {
            return Err(Error::InvalidProblem("no actions to schedule".into()));
        }
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let stats = OperatorStats::standard(config.learning_rate, config.floor)?;
        let mut genotypes = Vec::with_capacity(config.population);
        if let Some(g) = greedy_genotype(problem, &config.criteria) {
            genotypes.push(g);
        }
        while genotypes.len() < config.population {
            genotypes.push(random_genotype(problem, &mut rng));
        }
        let population = genotypes
            .into_iter()
            .map(|g| {
                let ph = render_phenotype(problem, &g)?;
                Ok(Individual::unscored(g, ph))
            })
            .collect::<Result<Vec<_>>>()?;
        let mut engine = Self {
            problem,
            config,
            rng,
            population: with_scores(population),
            stats,
            archive: Archive::default(),
            generation: 0,
            idle_generations: 0,
            history: Vec::new(),
        };
        engine.absorb();
        engine.record();
        Ok(engine)
    }

    fn absorb(&mut self) -> bool {
        let mut changed = false;
        for ind in &self.population {
            changed |= self.archive.insert(ind);
        }
        changed
    }

    fn record(&mut self) {
        let objs: Vec<Objectives> = self.population.iter().map(Individual::objectives).collect();
        self.history.push(GenerationRecord {
            generation: self.generation,
            best_makespan: objs.iter().map(|o| o.0).fold(f64::INFINITY, f64::min),
            best_cost: objs.iter().map(|o| o.1).fold(f64::INFINITY, f64::min),
            front_size: self.population.iter().filter(|i| i.score.rank == 1).count(),
            archive_size: self.archive.len(),
            max_fitness: self.population.iter().map(|i| i.score.fitness).fold(0.0, f64::max),
            weights: self.stats.weights(),
        });
    }

    /// Whether the generation budget or the stagnation window is used up.
    pub fn is_done(&self) -> bool {
        self.generation >= self.config.generations || self.config.stagnation.is_some_and(|s| self.idle_generations >= s)
    }

    pub fn step(&mut self) -> &GenerationRecord {
        self.population = evolve_step(
            &self.population,
            self.problem,
            &mut self.stats,
            &mut self.rng,
            &self.config,
        );
        self.generation += 1;
        if self.absorb() {
            self.idle_generations = 0;
        } else {
            self.idle_generations += 1;
        }
        self.record();
        self.history.last().unwrap()
    }

    pub fn run(&mut self) -> &Individual {
        while !self.is_done() {
            self.step();
        }
        self.best()
    }

    /// Replaces the least fit member with `genotype`. Rejects genotypes that
    /// do not render on this problem.
    pub fn inject(&mut self, genotype: &Genotype) -> Result<()> {
        let phenotype = render_phenotype(self.problem, genotype)?;
        let worst = (0..self.population.len())
            .min_by(|&a, &b| {
                self.population[a]
                    .score
                    .fitness
                    .total_cmp(&self.population[b].score.fitness)
                    .then(b.cmp(&a))
            })
            .unwrap();
        self.population[worst] = Individual::unscored(genotype.clone(), phenotype);
        self.population = with_scores(std::mem::take(&mut self.population));
        if self.archive.insert(&self.population[worst]) {
            self.idle_generations = 0;
        }
        Ok(())
    }

    /// Archive member preferred by the configured criteria.
    pub fn best(&self) -> &Individual {
        self.archive
            .best(&self.config.criteria)
            .expect("archive is never empty")
    }

    pub fn problem(&self) -> &SchedulingProblem {
        self.problem
    }

    pub fn config(&self) -> &EvolutionConfig {
        &self.config
    }

    pub fn population(&self) -> &[Individual] {
        &self.population
    }

    pub fn stats(&self) -> &OperatorStats {
        &self.stats
    }

    pub fn set_stats(&mut self, stats: OperatorStats) {
        self.stats = stats;
    }

    pub fn archive(&self) -> &Archive {
        &self.archive
    }

    pub fn generation(&self) -> usize {
        self.generation
    }

    pub fn history(&self) -> &[GenerationRecord] {
        &self.history
    }
}
