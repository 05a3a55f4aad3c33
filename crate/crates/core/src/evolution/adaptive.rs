//! Adaptive operator selection with reward memory.

use std::fmt;

use rand::Rng;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum OperatorKind {
    Bcrc,
    IntraDepotSwap,
    InterDepotSwap,
    SingleActionReroute,
}

impl OperatorKind {
    pub const ALL: [OperatorKind; 4] = [
        OperatorKind::Bcrc,
        OperatorKind::IntraDepotSwap,
        OperatorKind::InterDepotSwap,
        OperatorKind::SingleActionReroute,
    ];

    pub fn name(&self) -> &'static str {
        match self {
            OperatorKind::Bcrc => "bcrc",
            OperatorKind::IntraDepotSwap => "intra_swap",
            OperatorKind::InterDepotSwap => "inter_swap",
            OperatorKind::SingleActionReroute => "reroute",
        }
    }
}

impl fmt::Display for OperatorKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct OperatorRecord {
    pub kind: OperatorKind,
    pub applications: u64,
    /// Applications whose offspring beat the parent's fitness.
    pub successes: u64,
    pub mean_reward: f64,
    pub weight: f64,
}

/// Weights below this are clamped so every weight stays positive.
pub const MIN_WEIGHT: f64 = 1e-6;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct OperatorStats {
    pub records: Vec<OperatorRecord>,
    pub learning_rate: f64,
    /// Minimum selection probability of each operator.
    pub floor: f64,
}

impl OperatorStats {
    pub fn new(kinds: &[OperatorKind], learning_rate: f64, floor: f64) -> Result<Self> {
        if kinds.is_empty() {
            return Err(Error::InvalidParameter("no operators".into()));
        }
        if !(learning_rate > 0.0 && learning_rate <= 1.0) {
            return Err(Error::InvalidParameter(format!(
                "learning rate {learning_rate} not in (0, 1]"
            )));
        }
        if !(floor >= 0.0 && floor * kinds.len() as f64 <= 1.0) {
            return Err(Error::InvalidParameter(format!(
                "floor {floor} is infeasible for {} operators",
                kinds.len()
            )));
        }
        let records = kinds
            .iter()
            .map(|&kind| OperatorRecord {
                kind,
                applications: 0,
                successes: 0,
                mean_reward: 0.0,
                weight: 1.0,
            })
            .collect();
        Ok(Self {
            records,
            learning_rate,
            floor,
        })
    }

    pub fn standard(learning_rate: f64, floor: f64) -> Result<Self> {
        Self::new(&OperatorKind::ALL, learning_rate, floor)
    }

    pub fn kinds(&self) -> Vec<OperatorKind> {
        self.records.iter().map(|r| r.kind).collect()
    }

    pub fn weights(&self) -> Vec<f64> {
        self.records.iter().map(|r| r.weight).collect()
    }

    /// `floor + (1 - k * floor) * w / sum(w)` per operator.
    pub fn probabilities(&self) -> Vec<f64> {
        let k = self.records.len() as f64;
        let total: f64 = self.records.iter().map(|r| r.weight).sum();
        let spread = 1.0 - k * self.floor;
        self.records
            .iter()
            .map(|r| self.floor + spread * r.weight / total)
            .collect()
    }

    pub fn select<R: Rng + ?Sized>(&self, rng: &mut R) -> OperatorKind {
        let probs = self.probabilities();
        let u: f64 = rng.random();
        let mut acc = 0.0;
        for (r, p) in self.records.iter().zip(&probs) {
            acc += p;
            if u < acc {
                return r.kind;
            }
        }
        self.records.last().unwrap().kind
    }

    /// Records one application. Returns the reward, `max(0, child - parent)`.
    pub fn update_reward(&mut self, kind: OperatorKind, parent_fitness: f64, child_fitness: f64) -> f64 {
        let reward = (child_fitness - parent_fitness).max(0.0);
        let lr = self.learning_rate;
        if let Some(r) = self.records.iter_mut().find(|r| r.kind == kind) {
            r.applications += 1;
            if reward > 0.0 {
                r.successes += 1;
            }
            r.mean_reward += (reward - r.mean_reward) / r.applications as f64;
            r.weight = ((1.0 - lr) * r.weight + lr * reward).max(MIN_WEIGHT);
        }
        reward
    }

    /// Copy for sharing. Counts are zeroed so a receiver merging it does not
    /// count the sender's applications again on every exchange.
    pub fn snapshot(&self) -> Self {
        let mut s = self.clone();
        for r in &mut s.records {
            r.applications = 0;
            r.successes = 0;
        }
        s
    }
}

/// Blends `remote` into `local`: `w = (1 - blend) * local + blend * remote`.
/// Counts are summed.
pub fn merge_experience(local: &OperatorStats, remote: &OperatorStats, blend: f64) -> Result<OperatorStats> {
    if !(0.0..=1.0).contains(&blend) {
        return Err(Error::InvalidParameter(format!("blend {blend} not in [0, 1]")));
    }
    if local.kinds() != remote.kinds() {
        return Err(Error::MismatchedOperators);
    }
    let mut out = local.clone();
    for (l, r) in out.records.iter_mut().zip(&remote.records) {
        l.weight = ((1.0 - blend) * l.weight + blend * r.weight).max(MIN_WEIGHT);
        l.mean_reward = (1.0 - blend) * l.mean_reward + blend * r.mean_reward;
        l.applications += r.applications;
        l.successes += r.successes;
    }
    Ok(out)
}
