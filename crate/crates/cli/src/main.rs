use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Parser, Subcommand};
use mops::bbo::Method;
use mops::nlp::Domain;
use mops::orchestrator::{
    render_run, run_suite, self_check, summary_table, OrchestratorError, RunConfig, SuiteConfig, SuiteSummary,
};
use mops::task::TaskId;

/// Plan-template search with black-box parameter tuning and trajectory optimization.
#[derive(Parser)]
#[command(name = "mops", version)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Run one task over several seeds.
    Run(RunArgs),
    /// Run every configuration listed in a TOML suite file.
    Suite {
        #[arg(long)]
        config: PathBuf,
        #[arg(long)]
        out: PathBuf,
    },
    /// Re-emit the SVG figures of a persisted run directory.
    Render {
        #[arg(long)]
        run: PathBuf,
    },
    /// Gradient, projection, metric and solver self-tests.
    Check,
}

#[derive(clap::Args)]
struct RunArgs {
    #[arg(long, value_parser = parse_domain)]
    domain: Option<Domain>,
    #[arg(long)]
    task: TaskId,
    #[arg(long, default_value = "cmaes")]
    optimizer: Method,
    #[arg(long)]
    budget: Option<usize>,
    /// Comma-separated seeds.
    #[arg(long, value_delimiter = ',', default_value = "0,1,2,3,4")]
    seeds: Vec<u64>,
    /// `scripted:<good|adversarial|perfect|DIR>` or `llm`.
    #[arg(long, default_value = "scripted:good")]
    proposer: String,
    #[arg(long)]
    out: PathBuf,
    #[arg(long)]
    max_feedback: Option<usize>,
    #[arg(long)]
    sigma0: Option<f64>,
    #[arg(long)]
    target_cost: Option<f64>,
    /// Parallel seeds; defaults to the number of cores.
    #[arg(long)]
    workers: Option<usize>,
}

fn parse_domain(s: &str) -> Result<Domain, String> {
    match s {
        "draw" => Ok(Domain::Draw),
        "push" => Ok(Domain::Push),
        _ => Err(format!("unknown domain `{s}` (expected draw or push)")),
    }
}

impl RunArgs {
    fn config(&self) -> RunConfig {
        let mut c = RunConfig::new(self.task);
        if let Some(d) = self.domain {
            c.domain = d;
        }
        c.optimizer = self.optimizer;
        c.seeds = self.seeds.clone();
        c.proposer = self.proposer.clone();
        c.budget = self.budget.unwrap_or(c.budget);
        c.max_feedback = self.max_feedback.unwrap_or(c.max_feedback);
        c.sigma0 = self.sigma0.unwrap_or(c.sigma0);
        c.target_cost = self.target_cost.or(c.target_cost);
        c
    }
}

fn config_error(e: impl std::fmt::Display) -> ExitCode {
    eprintln!("error: {e}");
    ExitCode::from(2)
}

fn report(summary: &SuiteSummary) -> ExitCode {
    print!("{}", summary_table(summary));
    let all = summary.rows.iter().all(|r| r.successes == r.seeds.len());
    if all {
        ExitCode::SUCCESS
    } else {
        ExitCode::from(1)
    }
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let outcome: Result<ExitCode, OrchestratorError> = match cli.command {
        Command::Run(args) => {
            let cfg = args.config();
            run_suite(std::slice::from_ref(&cfg), args.workers, Some(&args.out)).map(|(s, _)| report(&s))
        }
        Command::Suite { config, out } => {
            let text = match std::fs::read_to_string(&config) {
                Ok(t) => t,
                Err(e) => return config_error(format!("{}: {e}", config.display())),
            };
            SuiteConfig::from_toml(&text)
                .and_then(|s| run_suite(&s.runs, s.workers, Some(&out)))
                .map(|(s, _)| report(&s))
        }
        Command::Render { run } => render_run(&run).map(|paths| {
            for p in paths {
                println!("{}", p.display());
            }
            ExitCode::SUCCESS
        }),
        Command::Check => {
            let results = self_check();
            for r in &results {
                println!("{} {}: {}", if r.passed { "PASS" } else { "FAIL" }, r.name, r.detail);
            }
            Ok(if results.iter().all(|r| r.passed) {
                ExitCode::SUCCESS
            } else {
                ExitCode::from(1)
            })
        }
    };
    outcome.unwrap_or_else(config_error)
}
