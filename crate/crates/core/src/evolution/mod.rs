//! Multi-objective evolutionary search over schedules.

pub mod adaptive;
pub mod engine;
pub mod operators;
pub mod pareto;

pub use adaptive::{merge_experience, OperatorKind, OperatorRecord, OperatorStats};
pub use engine::{evolve_step, scalarized, Archive, Engine, EvolutionConfig, GenerationRecord};
pub use pareto::{fitness, pareto_rank, score_population, Objectives, ParetoScore};

use crate::error::Result;
use crate::schedule::{objectives, render_phenotype, Genotype, Phenotype, SchedulingProblem};

/// A genotype with its rendered schedule and its score in the current population.
#[derive(Debug, Clone, PartialEq)]
pub struct Individual {
    pub genotype: Genotype,
    pub phenotype: Phenotype,
    pub score: ParetoScore,
}

impl Individual {
    pub fn new(problem: &SchedulingProblem, genotype: Genotype) -> Result<Self> {
        let phenotype = render_phenotype(problem, &genotype)?;
        Ok(Self::unscored(genotype, phenotype))
    }

    pub(crate) fn unscored(genotype: Genotype, phenotype: Phenotype) -> Self {
        Self {
            genotype,
            phenotype,
            score: ParetoScore {
                rank: 1,
                density: 0.0,
                fitness: 0.0,
            },
        }
    }

    /// `(makespan, total_cost)`.
    pub fn objectives(&self) -> Objectives {
        objectives(&self.phenotype)
    }
}
