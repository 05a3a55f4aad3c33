//! CSV, text and JSON artifacts of a planning run.
//!
//! All floats are written with 6 decimals.

use std::fmt::Write as _;
use std::fs;
use std::io::{Read, Write};
use std::path::Path;

use serde::{Deserialize, Serialize};

use crate::coalition::CoalitionReport;
use crate::error::{Error, Result};
use crate::evolution::{scalarized, Individual, OperatorKind};
use crate::planner::Plan;
use crate::schedule::{Phenotype, ScheduledAction, SchedulingProblem};

pub const SCHEDULE_FILE: &str = "schedule.csv";
pub const SUMMARY_CSV_FILE: &str = "summary.csv";
pub const SUMMARY_TEXT_FILE: &str = "summary.txt";
pub const FRONT_FILE: &str = "front.csv";
pub const TELEMETRY_FILE: &str = "telemetry.csv";
pub const REPORT_FILE: &str = "report.json";

fn f6(v: f64) -> String {
    format!("{v:.6}")
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ScheduleRow {
    pub robot_id: String,
    pub action_id: String,
    pub start_s: f64,
    pub finish_s: f64,
}

/// One row per scheduled action, robots in problem order, route order within.
pub fn schedule_rows(problem: &SchedulingProblem, phenotype: &Phenotype) -> Vec<ScheduleRow> {
    let mut rows = Vec::new();
    for (r, entries) in phenotype.schedules.iter().enumerate() {
        for e in entries {
            rows.push(ScheduleRow {
                robot_id: problem.robot(r).id.clone(),
                action_id: problem.action_id(e.action).to_string(),
                start_s: e.start,
                finish_s: e.finish,
            });
        }
    }
    rows
}

pub fn write_schedule_csv<W: Write>(w: W, rows: &[ScheduleRow]) -> Result<()> {
    let mut out = csv::Writer::from_writer(w);
    out.write_record(["robot_id", "action_id", "start_s", "finish_s"])?;
    for r in rows {
        out.write_record([r.robot_id.clone(), r.action_id.clone(), f6(r.start_s), f6(r.finish_s)])?;
    }
    out.flush()?;
    Ok(())
}

pub fn read_schedule_csv<R: Read>(r: R) -> Result<Vec<ScheduleRow>> {
    csv::Reader::from_reader(r)
        .deserialize()
        .map(|row| row.map_err(Error::from))
        .collect()
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Summary {
    pub makespan_s: f64,
    pub total_cost: f64,
}

pub fn write_summary_csv<W: Write>(w: W, summary: &Summary) -> Result<()> {
    let mut out = csv::Writer::from_writer(w);
    out.write_record(["makespan_s", "total_cost"])?;
    out.write_record([f6(summary.makespan_s), f6(summary.total_cost)])?;
    out.flush()?;
    Ok(())
}

pub fn read_summary_csv<R: Read>(r: R) -> Result<Summary> {
    csv::Reader::from_reader(r)
        .deserialize()
        .next()
        .ok_or_else(|| Error::Parse("summary has no data row".into()))?
        .map_err(Error::from)
}

/// Rebuilds a phenotype from exported rows so it can be re-verified.
pub fn phenotype_from_rows(problem: &SchedulingProblem, rows: &[ScheduleRow], summary: &Summary) -> Result<Phenotype> {
    let mut schedules = vec![Vec::new(); problem.n_robots()];
    for row in rows {
        let r = problem
            .robot_index(&row.robot_id)
            .ok_or_else(|| Error::Parse(format!("unknown robot `{}`", row.robot_id)))?;
        let a = problem
            .action_index(&row.action_id.as_str().into())
            .ok_or_else(|| Error::Parse(format!("unknown action `{}`", row.action_id)))?;
        schedules[r].push(ScheduledAction {
            action: a,
            start: row.start_s,
            finish: row.finish_s,
        });
    }
    Ok(Phenotype {
        schedules,
        makespan: summary.makespan_s,
        total_cost: summary.total_cost,
    })
}

/// Loads `schedule.csv` and `summary.csv` from `dir`.
pub fn load_schedule(dir: impl AsRef<Path>, problem: &SchedulingProblem) -> Result<Phenotype> {
    let dir = dir.as_ref();
    let rows = read_schedule_csv(fs::File::open(dir.join(SCHEDULE_FILE))?)?;
    let summary = read_summary_csv(fs::File::open(dir.join(SUMMARY_CSV_FILE))?)?;
    phenotype_from_rows(problem, &rows, &summary)
}

pub fn write_front_csv<W: Write>(w: W, front: &[Individual]) -> Result<()> {
    let mut out = csv::Writer::from_writer(w);
    out.write_record(["makespan_s", "total_cost"])?;
    for ind in front {
        let (m, c) = ind.objectives();
        out.write_record([f6(m), f6(c)])?;
    }
    out.flush()?;
    Ok(())
}

/// Per-generation records of every agent, tagged with `alternative`.
pub fn write_telemetry_csv<W: Write>(w: W, runs: &[(usize, &CoalitionReport)]) -> Result<()> {
    let mut out = csv::Writer::from_writer(w);
    let mut header: Vec<String> = [
        "alternative",
        "agent",
        "generation",
        "best_makespan",
        "best_cost",
        "front_size",
        "archive_size",
        "max_fitness",
    ]
    .map(String::from)
    .to_vec();
    header.extend(OperatorKind::ALL.iter().map(|k| format!("w_{k}")));
    out.write_record(&header)?;
    for (alt, report) in runs {
        for agent in &report.agents {
            for g in &agent.history {
                let mut rec = vec![
                    alt.to_string(),
                    agent.id.to_string(),
                    g.generation.to_string(),
                    f6(g.best_makespan),
                    f6(g.best_cost),
                    g.front_size.to_string(),
                    g.archive_size.to_string(),
                    f6(g.max_fitness),
                ];
                rec.extend(g.weights.iter().map(|&w| f6(w)));
                out.write_record(&rec)?;
            }
        }
    }
    out.flush()?;
    Ok(())
}

pub fn plan_summary_text(plan: &Plan, seed: u64) -> String {
    let mut s = String::new();
    let c = plan.criteria;
    let best = plan.best();
    let (m, cost) = best.objectives();
    writeln!(s, "seed: {seed}").unwrap();
    writeln!(
        s,
        "criteria: alpha={} beta={} gamma={}",
        f6(c.alpha),
        f6(c.beta),
        f6(c.gamma)
    )
    .unwrap();
    writeln!(s, "alternatives kept at the root: {}", plan.alternatives.len()).unwrap();
    writeln!(s, "alternatives scheduled: {}", plan.runs.len()).unwrap();
    for (i, run) in plan.runs.iter().enumerate() {
        let (rm, rc) = run.best().objectives();
        writeln!(
            s,
            "  #{i}{} actions={} score={} makespan_s={} total_cost={} weighted={} front={}",
            if i == plan.chosen { " (chosen)" } else { "" },
            run.alternative.actions.len(),
            f6(run.alternative.score),
            f6(rm),
            f6(rc),
            f6(scalarized((rm, rc), &c)),
            run.report.front.len(),
        )
        .unwrap();
    }
    writeln!(s, "makespan_s: {}", f6(m)).unwrap();
    writeln!(s, "total_cost: {}", f6(cost)).unwrap();
    writeln!(s, "idle_s: {}", f6(best.phenotype.idle_time(plan.problem()))).unwrap();
    let problem = plan.problem();
    for (r, entries) in best.phenotype.schedules.iter().enumerate() {
        let names: Vec<&str> = entries.iter().map(|e| problem.action_id(e.action).as_str()).collect();
        let route = if names.is_empty() {
            "-".to_string()
        } else {
            names.join(" -> ")
        };
        writeln!(s, "{}: {route}", problem.robot(r).id).unwrap();
    }
    s
}

#[derive(Debug, Serialize)]
struct AlternativeDoc<'a> {
    index: usize,
    actions: Vec<&'a str>,
    branches: Vec<&'a str>,
    score: f64,
    makespan_s: f64,
    total_cost: f64,
    front: Vec<(f64, f64)>,
    share_events: usize,
    generations: Vec<usize>,
}

#[derive(Debug, Serialize)]
struct PlanDoc<'a> {
    seed: u64,
    criteria: crate::decomposition::Criteria,
    chosen: usize,
    alternatives: Vec<AlternativeDoc<'a>>,
    schedule: Vec<ScheduleRow>,
}

pub fn plan_report_json(plan: &Plan, seed: u64) -> Result<String> {
    let doc = PlanDoc {
        seed,
        criteria: plan.criteria,
        chosen: plan.chosen,
        alternatives: plan
            .runs
            .iter()
            .enumerate()
            .map(|(index, run)| {
                let (m, c) = run.best().objectives();
                AlternativeDoc {
                    index,
                    actions: run.alternative.actions.iter().map(|a| a.as_str()).collect(),
                    branches: run.alternative.branches.iter().map(|a| a.as_str()).collect(),
                    score: run.alternative.score,
                    makespan_s: m,
                    total_cost: c,
                    front: run.report.front.iter().map(Individual::objectives).collect(),
                    share_events: run.report.events.len(),
                    generations: run.report.agents.iter().map(|a| a.generations).collect(),
                }
            })
            .collect(),
        schedule: schedule_rows(plan.problem(), &plan.best().phenotype),
    };
    serde_json::to_string_pretty(&doc).map_err(|e| Error::Parse(e.to_string()))
}

/// Writes every artifact of `plan` into `dir`, creating it if needed.
pub fn write_plan(dir: impl AsRef<Path>, plan: &Plan, seed: u64) -> Result<()> {
    let dir = dir.as_ref();
    fs::create_dir_all(dir)?;
    let best = plan.best();
    write_schedule_csv(
        fs::File::create(dir.join(SCHEDULE_FILE))?,
        &schedule_rows(plan.problem(), &best.phenotype),
    )?;
    write_summary_csv(
        fs::File::create(dir.join(SUMMARY_CSV_FILE))?,
        &Summary {
            makespan_s: best.phenotype.makespan,
            total_cost: best.phenotype.total_cost,
        },
    )?;
    write_front_csv(fs::File::create(dir.join(FRONT_FILE))?, &plan.chosen_run().report.front)?;
    let runs: Vec<(usize, &CoalitionReport)> = plan.runs.iter().enumerate().map(|(i, r)| (i, &r.report)).collect();
    write_telemetry_csv(fs::File::create(dir.join(TELEMETRY_FILE))?, &runs)?;
    fs::write(dir.join(SUMMARY_TEXT_FILE), plan_summary_text(plan, seed))?;
    fs::write(dir.join(REPORT_FILE), plan_report_json(plan, seed)?)?;
    Ok(())
}
