mod common;

use common::*;
use mission_planner::coalition::{agent_seed, run_coalition, CoalitionConfig};
use mission_planner::decomposition::Criteria;
use mission_planner::evolution::pareto::weakly_dominates;
use mission_planner::evolution::{scalarized, EvolutionConfig};
use mission_planner::schedule::check_feasible;

fn config(share: bool, criteria: Criteria) -> CoalitionConfig {
    CoalitionConfig {
        n_agents: 4,
        evolution: EvolutionConfig {
            population: 16,
            generations: 40,
            criteria,
            ..Default::default()
        },
        share,
        share_period: 5,
        blend: 0.3,
        deterministic: true,
    }
}

#[test]
fn sharing_does_not_hurt_on_average() {
    let criteria = Criteria::new(0.0, 0.5, 0.5).unwrap();
    let (mut with, mut without) = (0.0, 0.0);
    let mut wins = 0;
    for seed in 0..20 {
        let problem = random_problem(&mut rng(1000 + seed), 4, 16, 0.1);
        let a = run_coalition(&problem, &config(true, criteria), seed).unwrap();
        let b = run_coalition(&problem, &config(false, criteria), seed).unwrap();
        let (sa, sb) = (
            scalarized(a.best.objectives(), &criteria),
            scalarized(b.best.objectives(), &criteria),
        );
        with += sa;
        without += sb;
        if sa <= sb {
            wins += 1;
        }
        assert!(a.events.iter().any(|e| e.accepted));
        assert!(b.events.is_empty());
    }
    println!(
        "mean scalarized: shared {:.4}, isolated {:.4}, shared no worse in {wins}/20",
        with / 20.0,
        without / 20.0
    );
    assert!(with <= without * 1.05);
}

#[test]
fn union_front_is_nondominated_and_feasible() {
    let problem = random_problem(&mut rng(77), 3, 12, 0.2);
    let report = run_coalition(&problem, &config(true, Criteria::default()), 3).unwrap();
    for a in &report.front {
        assert!(check_feasible(&problem, &a.phenotype).is_empty());
        for b in &report.front {
            assert!(!(weakly_dominates(&a.objectives(), &b.objectives()) && a.objectives() != b.objectives()));
        }
    }
    assert!(report.front.iter().any(|m| m.objectives() == report.best.objectives()));
}

#[test]
fn runs_are_reproducible() {
    let problem = random_problem(&mut rng(4), 3, 10, 0.2);
    let mut cfg = config(true, Criteria::default());
    let a = run_coalition(&problem, &cfg, 8).unwrap();
    cfg.deterministic = false;
    let b = run_coalition(&problem, &cfg, 8).unwrap();
    assert_eq!(a.best, b.best);
    assert_eq!(a.events, b.events);
    assert_eq!(a.agents, b.agents);
}

#[test]
fn agent_seeds_are_distinct() {
    let seeds: std::collections::BTreeSet<u64> = (0..64).map(|i| agent_seed(42, i)).collect();
    assert_eq!(seeds.len(), 64);
    assert_eq!(agent_seed(42, 0), 42);
}
