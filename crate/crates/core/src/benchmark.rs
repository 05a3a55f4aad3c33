//! Runs the greenhouse setups and compares them.

use std::collections::BTreeMap;
use std::fmt::Write as _;
use std::fs;
use std::path::Path;

use crate::error::Result;
use crate::greenhouse::{branch_selection, build_mission, setup, Branch, FleetSpec, GreenhouseConfig};
use crate::planner::{plan, Plan, PlanConfig};
use crate::report::write_plan;

/// Reference ratios reported for the greenhouse study.
pub const PAPER_MAKESPAN_RATIO: f64 = 1.57;
pub const PAPER_COST_RATIO: f64 = 16.0;

#[derive(Debug, Clone)]
pub struct SetupResult {
    pub setup: usize,
    pub fleet: FleetSpec,
    pub makespan: f64,
    pub total_cost: f64,
    /// Branch of every plant in the scheduled decomposition.
    pub branches: BTreeMap<String, Branch>,
    pub plan: Plan,
}

impl SetupResult {
    pub fn count(&self, branch: Branch) -> usize {
        self.branches.values().filter(|&&b| b == branch).count()
    }
}

#[derive(Debug, Clone)]
pub struct BenchmarkReport {
    pub results: Vec<SetupResult>,
}

impl BenchmarkReport {
    pub fn get(&self, setup: usize) -> Option<&SetupResult> {
        self.results.iter().find(|r| r.setup == setup)
    }

    /// Setup 1 makespan over setup 2 makespan.
    pub fn makespan_ratio(&self) -> Option<f64> {
        Some(self.get(1)?.makespan / self.get(2)?.makespan)
    }

    /// Setup 2 cost over setup 1 cost.
    pub fn cost_ratio(&self) -> Option<f64> {
        Some(self.get(2)?.total_cost / self.get(1)?.total_cost)
    }

    pub fn to_csv(&self) -> Result<String> {
        let mut out = csv::Writer::from_writer(Vec::new());
        out.write_record([
            "setup",
            "mobile",
            "stationary",
            "ugv",
            "makespan_importance",
            "cost_importance",
            "makespan_s",
            "total_cost",
            "stationary_plants",
            "mobile_plants",
        ])?;
        for r in &self.results {
            out.write_record([
                r.setup.to_string(),
                r.fleet.mobile.to_string(),
                r.fleet.stationary.to_string(),
                r.fleet.ugv.to_string(),
                format!("{:.6}", r.fleet.importance.0),
                format!("{:.6}", r.fleet.importance.1),
                format!("{:.6}", r.makespan),
                format!("{:.6}", r.total_cost),
                r.count(Branch::Stationary).to_string(),
                r.count(Branch::Mobile).to_string(),
            ])?;
        }
        Ok(String::from_utf8(out.into_inner().map_err(|e| e.into_error())?).expect("csv output is utf-8"))
    }

    pub fn to_text(&self) -> String {
        let mut s = String::new();
        writeln!(
            s,
            "setup  fleet(m/s/u)  importance  makespan_s    total_cost   stationary/mobile"
        )
        .unwrap();
        for r in &self.results {
            writeln!(
                s,
                "{:>5}  {}/{}/{}          {:>3}-{:<3}     {:>12.6} {:>12.6} {:>2}/{:>2}",
                r.setup,
                r.fleet.mobile,
                r.fleet.stationary,
                r.fleet.ugv,
                r.fleet.importance.0,
                r.fleet.importance.1,
                r.makespan,
                r.total_cost,
                r.count(Branch::Stationary),
                r.count(Branch::Mobile),
            )
            .unwrap();
        }
        if let Some(m) = self.makespan_ratio() {
            writeln!(
                s,
                "makespan ratio setup1/setup2: {m:.6} (reference {PAPER_MAKESPAN_RATIO:.2})"
            )
            .unwrap();
        }
        if let Some(c) = self.cost_ratio() {
            writeln!(s, "cost ratio setup2/setup1: {c:.6} (reference {PAPER_COST_RATIO:.2})").unwrap();
        }
        if let Some(r) = self.get(4) {
            writeln!(
                s,
                "setup 4 balance: {} stationary, {} mobile",
                r.count(Branch::Stationary),
                r.count(Branch::Mobile)
            )
            .unwrap();
        }
        s
    }
}

/// Plans each requested setup with the setup's own criteria. `base.criteria`
/// is ignored.
pub fn run_benchmark(
    greenhouse: &GreenhouseConfig,
    setups: &[usize],
    base: &PlanConfig,
    seed: u64,
) -> Result<BenchmarkReport> {
    let mut results = Vec::new();
    for &n in setups {
        let fleet = setup(n)?;
        let mission = build_mission(greenhouse, &fleet)?;
        let config = PlanConfig {
            criteria: fleet.criteria()?,
            ..base.clone()
        };
        let plan = plan(&mission, &config, seed)?;
        let best = plan.best();
        results.push(SetupResult {
            setup: n,
            fleet,
            makespan: best.phenotype.makespan,
            total_cost: best.phenotype.total_cost,
            branches: branch_selection(greenhouse, &plan.chosen_run().alternative),
            plan,
        });
    }
    Ok(BenchmarkReport { results })
}

/// Writes `benchmark.csv`, `benchmark.txt` and one plan directory per setup.
pub fn write_benchmark(dir: impl AsRef<Path>, report: &BenchmarkReport, seed: u64) -> Result<()> {
    let dir = dir.as_ref();
    fs::create_dir_all(dir)?;
    fs::write(dir.join("benchmark.csv"), report.to_csv()?)?;
    fs::write(dir.join("benchmark.txt"), report.to_text())?;
    for r in &report.results {
        write_plan(dir.join(format!("setup_{}", r.setup)), &r.plan, seed)?;
    }
    Ok(())
}
