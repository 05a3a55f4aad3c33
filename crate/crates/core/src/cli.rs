//! Command-line front end.
//!
//! Exit codes: 0 success, 1 I/O failure, 2 parse or validation error,
//! 3 infeasible mission (unservable action or deadlock), 4 resource cap.

use std::ffi::OsString;
use std::path::PathBuf;

use clap::{Args, Parser, Subcommand};

use crate::benchmark::{run_benchmark, write_benchmark};
use crate::coalition::CoalitionConfig;
use crate::decomposition::{Criteria, PruneParam, DEFAULT_HARD_CAP};
use crate::error::{Error, Result};
use crate::evolution::EvolutionConfig;
use crate::greenhouse::{build_mission, setup, GreenhouseConfig};
use crate::mission::Mission;
use crate::planner::{plan, PlanConfig};
use crate::report::{plan_summary_text, write_plan};

#[derive(Debug, Parser)]
#[command(
    name = "mission-planner",
    version,
    about = "Two-stage mission planner for heterogeneous robot teams"
)]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Plan a mission file and write the schedule and reports.
    Plan(PlanArgs),
    /// Write the greenhouse mission of one setup.
    Scenario(ScenarioArgs),
    /// Plan greenhouse setups and compare them.
    Benchmark(BenchmarkArgs),
}

#[derive(Debug, Clone, Args)]
pub struct SearchArgs {
    /// Alternatives kept per task during decomposition.
    #[arg(long, default_value_t = 10)]
    pub mu: usize,
    #[arg(long, default_value_t = 64)]
    pub pop: usize,
    #[arg(long, default_value_t = 500)]
    pub gens: usize,
    #[arg(long, default_value_t = 4)]
    pub agents: usize,
    #[arg(long, default_value_t = 10)]
    pub share_period: usize,
    #[arg(long, default_value_t = 0.3)]
    pub blend: f64,
    /// Disable solution and experience sharing between agents.
    #[arg(long)]
    pub no_share: bool,
    /// Stop an agent after this many generations without progress.
    #[arg(long)]
    pub stagnation: Option<usize>,
    #[arg(long, default_value_t = 0)]
    pub seed: u64,
    /// Run agents one after another on a single thread.
    #[arg(long)]
    pub deterministic: bool,
}

impl SearchArgs {
    fn plan_config(&self, criteria: Criteria, top_k: usize) -> Result<PlanConfig> {
        Ok(PlanConfig {
            criteria,
            mu: PruneParam::new(self.mu)?,
            top_k,
            hard_cap: DEFAULT_HARD_CAP,
            coalition: CoalitionConfig {
                n_agents: self.agents,
                evolution: EvolutionConfig {
                    population: self.pop,
                    generations: self.gens,
                    criteria,
                    stagnation: self.stagnation,
                    ..Default::default()
                },
                share: !self.no_share,
                share_period: self.share_period,
                blend: self.blend,
                deterministic: self.deterministic,
            },
        })
    }
}

#[derive(Debug, Args)]
pub struct PlanArgs {
    #[arg(long)]
    pub mission: PathBuf,
    /// Quality weight. Weights not given count as 0 once any is given.
    #[arg(long)]
    pub alpha: Option<f64>,
    #[arg(long)]
    pub beta: Option<f64>,
    #[arg(long)]
    pub gamma: Option<f64>,
    /// Root alternatives forwarded to scheduling.
    #[arg(long, default_value_t = 3)]
    pub top_k: usize,
    #[arg(long)]
    pub out: PathBuf,
    #[command(flatten)]
    pub search: SearchArgs,
}

#[derive(Debug, Args)]
pub struct ScenarioArgs {
    #[arg(long)]
    pub setup: usize,
    #[arg(long)]
    pub out: PathBuf,
    /// Greenhouse configuration overriding the built-in layout.
    #[arg(long)]
    pub config: Option<PathBuf>,
}

#[derive(Debug, Args)]
pub struct BenchmarkArgs {
    #[arg(long, value_delimiter = ',', default_value = "1,2,3,4,5")]
    pub setups: Vec<usize>,
    #[arg(long)]
    pub out: PathBuf,
    #[arg(long, default_value_t = 1)]
    pub top_k: usize,
    #[arg(long)]
    pub config: Option<PathBuf>,
    #[command(flatten)]
    pub search: SearchArgs,
}

pub fn exit_code(e: &Error) -> i32 {
    match e {
        Error::Unservable(_) | Error::Deadlock(_) => 3,
        Error::ResourceCap { .. } => 4,
        Error::Io(_) => 1,
        _ => 2,
    }
}

fn criteria(args: &PlanArgs, mission: &Mission) -> Result<Criteria> {
    match (args.alpha, args.beta, args.gamma) {
        (None, None, None) => Ok(mission.criteria.unwrap_or_default()),
        (a, b, g) => Criteria::new(a.unwrap_or(0.0), b.unwrap_or(0.0), g.unwrap_or(0.0)),
    }
}

fn load_greenhouse(path: &Option<PathBuf>) -> Result<GreenhouseConfig> {
    match path {
        Some(p) => Ok(toml::from_str(&std::fs::read_to_string(p)?)?),
        None => Ok(GreenhouseConfig::default()),
    }
}

pub fn execute(cli: Cli) -> Result<String> {
    match cli.command {
        Command::Plan(args) => {
            let mission = Mission::load(&args.mission).map_err(|e| match e {
                Error::Io(io) => Error::Parse(format!("{}: {io}", args.mission.display())),
                other => other,
            })?;
            let config = args.search.plan_config(criteria(&args, &mission)?, args.top_k)?;
            let p = plan(&mission, &config, args.search.seed)?;
            write_plan(&args.out, &p, args.search.seed)?;
            Ok(plan_summary_text(&p, args.search.seed))
        }
        Command::Scenario(args) => {
            let config = load_greenhouse(&args.config)?;
            let mission = build_mission(&config, &setup(args.setup)?)?;
            mission.save(&args.out)?;
            Ok(format!("wrote setup {} to {}\n", args.setup, args.out.display()))
        }
        Command::Benchmark(args) => {
            let config = load_greenhouse(&args.config)?;
            let base = args.search.plan_config(Criteria::default(), args.top_k)?;
            let report = run_benchmark(&config, &args.setups, &base, args.search.seed)?;
            write_benchmark(&args.out, &report, args.search.seed)?;
            Ok(report.to_text())
        }
    }
}

/// Parses `args`, runs the command and returns the process exit code.
pub fn run<I, T>(args: I) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    let cli = match Cli::try_parse_from(args) {
        Ok(cli) => cli,
        Err(e) => {
            let _ = e.print();
            return if e.use_stderr() { 2 } else { 0 };
        }
    };
    match execute(cli) {
        Ok(text) => {
            print!("{text}");
            0
        }
        Err(e) => {
            eprintln!("error: {e}");
            exit_code(&e)
        }
    }
}
