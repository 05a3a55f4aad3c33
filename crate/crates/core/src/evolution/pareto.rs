//! Double-rank scoring: Pareto layer first, isolation within the layer second.
//!
//! Both objectives (makespan, cost) are minimized.
//!
//! Density is a nearest-neighbour isolation measure computed inside each
//! rank. For every objective the members of the rank are sorted (ties by
//! index), and each interior member scores the gap to its closer neighbour
//! divided by the rank's range in that objective, or 0 when the range is 0.
//! Gaps are summed over objectives. The first and last member of each sorted
//! order get [`DENSITY_SENTINEL`], so a rank of one is maximally isolated and
//! an interior exact duplicate scores 0.
//!
//! Fitness maps `(rank, density)` to `1 / (rank + 0.5 / (1 + density))`,
//! which always lies in `(1 / (rank + 0.5), 1 / rank]`. Any rank therefore
//! beats every worse rank, and more isolation wins inside a rank.

use serde::{Deserialize, Serialize};

pub type Objectives = (f64, f64);

pub const DENSITY_SENTINEL: f64 = f64::INFINITY;

/// `a` is no worse in both objectives and strictly better in one.
pub fn dominates(a: &Objectives, b: &Objectives) -> bool {
    a.0 <= b.0 && a.1 <= b.1 && (a.0 < b.0 || a.1 < b.1)
}

/// `a` is no worse than `b` in both objectives.
pub fn weakly_dominates(a: &Objectives, b: &Objectives) -> bool {
    a.0 <= b.0 && a.1 <= b.1
}

/// Non-dominated sorting. Rank 1 is the non-dominated set.
pub fn pareto_rank(points: &[Objectives]) -> Vec<usize> {
    let n = points.len();
    let mut dominated_by = vec![0usize; n];
    let mut dominates_list: Vec<Vec<usize>> = vec![Vec::new(); n];
    for i in 0..n {
        for j in (i + 1)..n {
            if dominates(&points[i], &points[j]) {
                dominates_list[i].push(j);
                dominated_by[j] += 1;
            } else if dominates(&points[j], &points[i]) {
                dominates_list[j].push(i);
                dominated_by[i] += 1;
            }
        }
    }
    let mut rank = vec![0usize; n];
    let mut front: Vec<usize> = (0..n).filter(|&i| dominated_by[i] == 0).collect();
    let mut level = 1;
    while !front.is_empty() {
        let mut next = Vec::new();
        for &i in &front {
            rank[i] = level;
            for &j in &dominates_list[i] {
                dominated_by[j] -= 1;
                if dominated_by[j] == 0 {
                    next.push(j);
                }
            }
        }
        front = next;
        level += 1;
    }
    rank
}

/// Isolation of every point among the points sharing its rank.
pub fn densities(points: &[Objectives], ranks: &[usize]) -> Vec<f64> {
    let mut out = vec![0.0; points.len()];
    let max_rank = ranks.iter().copied().max().unwrap_or(0);
    let mut members: Vec<Vec<usize>> = vec![Vec::new(); max_rank + 1];
    for (i, &r) in ranks.iter().enumerate() {
        members[r].push(i);
    }
    for front in members.iter().filter(|f| !f.is_empty()) {
        let objective = |i: usize, m: usize| if m == 0 { points[i].0 } else { points[i].1 };
        for m in 0..2 {
            let mut sorted = front.clone();
            sorted.sort_by(|&a, &b| objective(a, m).total_cmp(&objective(b, m)).then(a.cmp(&b)));
            let last = sorted.len() - 1;
            let range = objective(sorted[last], m) - objective(sorted[0], m);
            if range > 0.0 {
                for k in 1..last {
                    let v = objective(sorted[k], m);
                    let gap = (v - objective(sorted[k - 1], m)).min(objective(sorted[k + 1], m) - v);
                    out[sorted[k]] += gap / range;
                }
            }
            out[sorted[0]] = DENSITY_SENTINEL;
            out[sorted[last]] = DENSITY_SENTINEL;
        }
    }
    out
}

/// Isolation of `points[index]` within its own rank.
pub fn density(points: &[Objectives], index: usize) -> f64 {
    densities(points, &pareto_rank(points))[index]
}

pub fn fitness(rank: usize, density: f64) -> f64 {
    debug_assert!(rank >= 1);
    1.0 / (rank as f64 + 0.5 / (1.0 + density))
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ParetoScore {
    pub rank: usize,
    pub density: f64,
    pub fitness: f64,
}

/// Scores every member relative to the whole set.
pub fn score_population(points: &[Objectives]) -> Vec<ParetoScore> {
    let ranks = pareto_rank(points);
    let dens = densities(points, &ranks);
    ranks
        .iter()
        .zip(&dens)
        .map(|(&rank, &density)| ParetoScore {
            rank,
            density,
            fitness: fitness(rank, density),
        })
        .collect()
}

/// Indices of the non-dominated points, duplicates collapsed to the first.
pub fn front_indices(points: &[Objectives]) -> Vec<usize> {
    let ranks = pareto_rank(points);
    let mut out: Vec<usize> = Vec::new();
    for (i, &r) in ranks.iter().enumerate() {
        if r == 1 && !out.iter().any(|&j| points[j] == points[i]) {
            out.push(i);
        }
    }
    out
}
