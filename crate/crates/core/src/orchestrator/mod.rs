//! The three-level loop: propose a template, tune its parameters with a
//! black-box optimizer, score each candidate by solving and rolling out its
//! trajectory program, and feed the outcome back to the proposer.

mod check;
mod eval;
mod record;
mod svg;

use std::path::{Path, PathBuf};
use std::time::Instant;

use rayon::prelude::*;
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::bbo::{optimizer, BboError, BboOptions, BboProblem, Method};
use crate::nlp::Domain;
use crate::proposer::{build_feedback, build_prompt, LlmSettings, Proposer, ProposerBackend, ProposerError};
use crate::task::TaskId;
use crate::trajopt::SolverOptions;

pub use check::{self_check, CheckResult};
pub use eval::{
    draw_cost, null_plan_cost, pipeline_solver_options, push_cost, Evaluation, Evaluator, Rollout,
    RolloutRecord, FAILURE_COST, VIOLATION_PENALTY,
};
pub use record::{EndReason, EvaluationEntry, IterationRecord, RunRecord, Timings};
pub use svg::{render_run, write_run_svgs};

#[derive(Debug, Clone, PartialEq, Error)]
pub enum OrchestratorError {
    #[error("configuration error: {0}")]
    Config(String),
    #[error(transparent)]
    Proposer(#[from] ProposerError),
    #[error("optimizer error: {0}")]
    Bbo(#[from] BboError),
    #[error("{0}")]
    Io(String),
    #[error("metric normalizer must be positive, got {0}")]
    NonPositiveNormalizer(f64),
}

impl OrchestratorError {
    pub(crate) fn io(path: &Path, e: impl std::fmt::Display) -> Self {
        OrchestratorError::Io(format!("{}: {e}", path.display()))
    }
}

/// One experiment: a task, an optimizer, a proposer and a set of seeds.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(try_from = "RawRunConfig")]
pub struct RunConfig {
    pub domain: Domain,
    pub task: TaskId,
    pub optimizer: Method,
    pub budget: usize,
    pub max_feedback: usize,
    pub sigma0: f64,
    pub seeds: Vec<u64>,
    /// `scripted:<flavor>`, `scripted:<directory>` or `llm`.
    pub proposer: String,
    pub llm: LlmSettings,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub max_error: Option<f64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub target_cost: Option<f64>,
    pub solver: SolverOptions,
    pub bbo: BboOptions,
}

#[derive(Deserialize)]
#[serde(deny_unknown_fields)]
struct RawRunConfig {
    domain: Option<Domain>,
    task: TaskId,
    optimizer: Option<Method>,
    budget: Option<usize>,
    max_feedback: Option<usize>,
    sigma0: Option<f64>,
    seeds: Option<Vec<u64>>,
    proposer: Option<String>,
    llm: Option<LlmSettings>,
    max_error: Option<f64>,
    target_cost: Option<f64>,
    solver: Option<SolverOptions>,
    bbo: Option<BboOptions>,
}

impl TryFrom<RawRunConfig> for RunConfig {
    type Error = OrchestratorError;

    fn try_from(r: RawRunConfig) -> Result<Self, Self::Error> {
        let d = RunConfig::new(r.task);
        let cfg = RunConfig {
            domain: r.domain.unwrap_or(d.domain),
            task: r.task,
            optimizer: r.optimizer.unwrap_or(d.optimizer),
            budget: r.budget.unwrap_or(d.budget),
            max_feedback: r.max_feedback.unwrap_or(d.max_feedback),
            sigma0: r.sigma0.unwrap_or(d.sigma0),
            seeds: r.seeds.unwrap_or(d.seeds),
            proposer: r.proposer.unwrap_or(d.proposer),
            llm: r.llm.unwrap_or(d.llm),
            max_error: r.max_error,
            target_cost: r.target_cost,
            solver: r.solver.unwrap_or(d.solver),
            bbo: r.bbo.unwrap_or(d.bbo),
        };
        cfg.validate()?;
        Ok(cfg)
    }
}

impl RunConfig {
    /// Protocol defaults for `task`.
    pub fn new(task: TaskId) -> Self {
        Self {
            domain: task.domain(),
            task,
            optimizer: Method::Cmaes,
            budget: task.default_budget(),
            max_feedback: 2,
            sigma0: task.default_sigma0(),
            seeds: vec![0, 1, 2, 3, 4],
            proposer: "scripted:good".to_string(),
            llm: LlmSettings::default(),
            max_error: None,
            target_cost: None,
            solver: pipeline_solver_options(),
            bbo: BboOptions::default(),
        }
    }

    pub fn validate(&self) -> Result<(), OrchestratorError> {
        let bad = |m: String| Err(OrchestratorError::Config(m));
        if self.domain != self.task.domain() {
            return bad(format!("task {} belongs to the {} domain", self.task, self.task.domain().name()));
        }
        if self.budget == 0 {
            return bad("budget must be at least 1".into());
        }
        if !(self.sigma0 > 0.0 && self.sigma0.is_finite()) {
            return bad("sigma0 must be positive".into());
        }
        if self.seeds.is_empty() {
            return bad("at least one seed is required".into());
        }
        if let Some(m) = self.max_error {
            if !(m > 0.0) {
                return Err(OrchestratorError::NonPositiveNormalizer(m));
            }
        }
        if self.target_cost.is_some_and(|t| !(t.is_finite() && t >= 0.0)) {
            return bad("target_cost must be finite and non-negative".into());
        }
        self.solver
            .validate()
            .map_err(|e| OrchestratorError::Config(e.to_string()))
    }

    pub fn target(&self) -> f64 {
        self.target_cost.unwrap_or_else(|| self.task.default_target_cost())
    }

    pub fn from_toml(text: &str) -> Result<Self, OrchestratorError> {
        toml::from_str(text).map_err(|e| OrchestratorError::Config(e.to_string()))
    }

    pub fn to_toml(&self) -> String {
        toml::to_string(self).expect("config serializes")
    }

    pub fn for_seed(&self, seed: u64) -> Self {
        Self {
            seeds: vec![seed],
            ..self.clone()
        }
    }

    pub fn backend(&self) -> Result<ProposerBackend, OrchestratorError> {
        Ok(ProposerBackend::from_spec(&self.proposer, self.task, &self.llm)?)
    }
}

/// `1 - ln(1 + cost) / ln(1 + max_error)`, clamped to `[0, 1]`. Negative
/// costs are treated as zero.
pub fn normalized_performance(cost: f64, max_error: f64) -> Result<f64, OrchestratorError> {
    if !(max_error > 0.0) {
        return Err(OrchestratorError::NonPositiveNormalizer(max_error));
    }
    let v = 1.0 - cost.max(0.0).ln_1p() / max_error.ln_1p();
    Ok(if v.is_nan() { 0.0 } else { v.clamp(0.0, 1.0) })
}

fn iteration_seed(seed: u64, iteration: usize) -> u64 {
    seed.wrapping_mul(0x9E37_79B9_7F4A_7C15).wrapping_add(iteration as u64)
}

/// Runs the full loop for one seed with the configured proposer.
pub fn run_task(cfg: &RunConfig, seed: u64) -> Result<RunRecord, OrchestratorError> {
    cfg.validate()?;
    let proposer = Proposer::new(cfg.backend()?)?;
    run_task_with(cfg, seed, proposer)
}

pub fn run_task_with(cfg: &RunConfig, seed: u64, mut proposer: Proposer) -> Result<RunRecord, OrchestratorError> {
    cfg.validate()?;
    let start = Instant::now();
    let task = cfg.task;
    let scene = task.scene();
    let target = cfg.target();
    let offset = task.min_cost_offset();
    let null_cost = null_plan_cost(task, &scene);
    let max_error = cfg.max_error.unwrap_or(null_cost + offset);
    if !(max_error > 0.0) {
        return Err(OrchestratorError::NonPositiveNormalizer(max_error));
    }

    let mut history: Vec<(String, crate::proposer::FeedbackReport)> = Vec::new();
    let mut iterations: Vec<IterationRecord> = Vec::new();
    let mut timings = Timings::default();
    let mut ended_by = EndReason::FeedbackExhausted;
    for it in 0..=cfg.max_feedback {
        let t0 = Instant::now();
        let prompt = build_prompt(task, &scene, &history);
        let proposal = match proposer.propose(&prompt) {
            Ok(p) => p,
            Err(ProposerError::FixturesExhausted(_)) if it > 0 => {
                ended_by = EndReason::FixturesExhausted;
                break;
            }
            Err(e) => return Err(e.into()),
        };
        let mut record = search(cfg, seed, it, &scene, &proposal.template)?;
        record.prompt = prompt;
        record.response = proposal.raw;
        record.retries = proposal.retries;
        record.template = proposal.template.source_text.clone();
        timings.iteration_seconds.push(t0.elapsed().as_secs_f64());

        if record.reached_target {
            iterations.push(record);
            ended_by = EndReason::TargetReached;
            break;
        }
        if it < cfg.max_feedback {
            let report = build_feedback(&record, target)?;
            history.push((record.template.clone(), report.clone()));
            record.feedback = Some(report);
        }
        iterations.push(record);
    }

    let best_iteration = iterations
        .iter()
        .enumerate()
        .min_by(|a, b| a.1.best_cost.total_cmp(&b.1.best_cost))
        .map(|(i, _)| i)
        .expect("at least one iteration runs");
    let final_cost = iterations[best_iteration].best_cost;
    timings.total_seconds = start.elapsed().as_secs_f64();
    Ok(RunRecord {
        config: cfg.for_seed(seed),
        seed,
        task,
        optimizer: cfg.optimizer,
        proposer: proposer.backend().label(),
        null_cost,
        min_cost_offset: offset,
        max_error,
        target_cost: target,
        total_evaluations: iterations.iter().map(|i| i.evaluations.len()).sum(),
        iterations,
        best_iteration,
        final_cost,
        final_metric: normalized_performance(final_cost + offset, max_error)?,
        success: final_cost <= target,
        ended_by,
        timings,
    })
}

/// Black-box search over one template's parameters.
fn search(
    cfg: &RunConfig,
    seed: u64,
    index: usize,
    scene: &crate::scene::SceneState,
    template: &crate::dsl::PlanTemplate,
) -> Result<IterationRecord, OrchestratorError> {
    let evaluator = Evaluator::new(cfg.task, template, scene, cfg.solver);
    let target = cfg.target();
    let x0 = template.initial_guess();
    let mut evaluations = Vec::new();
    let mut best_so_far = Vec::new();
    let mut best = (x0.clone(), f64::INFINITY);
    let mut record_batch = |batch: &[Vec<f64>], evals: Vec<Evaluation>| {
        for (alpha, e) in batch.iter().zip(evals) {
            if e.cost < best.1 {
                best = (alpha.clone(), e.cost);
            }
            best_so_far.push(best.1);
            evaluations.push(EvaluationEntry {
                alpha: alpha.clone(),
                cost: e.cost,
                converged: e.converged,
                failure: e.failure,
            });
        }
        best.1 <= target
    };

    if x0.is_empty() {
        // nothing to tune: the template is scored once
        let e = evaluator.evaluate(&x0);
        record_batch(&[x0.clone()], vec![e]);
    } else {
        let problem = BboProblem::new(x0, cfg.sigma0, cfg.budget, iteration_seed(seed, index));
        let mut opt = optimizer(cfg.optimizer, &problem, &cfg.bbo)?;
        while opt.remaining() > 0 {
            let batch = opt.ask()?;
            let evals: Vec<Evaluation> = batch.par_iter().map(|a| evaluator.evaluate(a)).collect();
            let costs: Vec<f64> = evals.iter().map(|e| e.cost).collect();
            opt.tell(&costs)?;
            if record_batch(&batch, evals) {
                break;
            }
        }
    }

    let (best_alpha, best_cost) = best;
    let rollout = evaluator.rollout(&best_alpha).ok();
    Ok(IterationRecord {
        index,
        prompt: Vec::new(),
        response: String::new(),
        retries: Vec::new(),
        template: String::new(),
        evaluations,
        best_so_far,
        best_converged: rollout.as_ref().is_some_and(|r| r.solution.converged),
        best_trajectory: rollout.as_ref().map(|r| r.solution.x.clone()),
        best_rollout: rollout.map(|r| r.record),
        best_alpha,
        best_cost,
        reached_target: best_cost <= target,
        feedback: None,
    })
}

/// A suite file: shared worker count and a list of runs.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SuiteConfig {
    #[serde(default)]
    pub workers: Option<usize>,
    pub runs: Vec<RunConfig>,
}

impl SuiteConfig {
    pub fn from_toml(text: &str) -> Result<Self, OrchestratorError> {
        let s: SuiteConfig = toml::from_str(text).map_err(|e| OrchestratorError::Config(e.to_string()))?;
        if s.runs.is_empty() {
            return Err(OrchestratorError::Config("a suite needs at least one [[runs]] entry".into()));
        }
        Ok(s)
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SuiteRow {
    pub task: TaskId,
    pub optimizer: Method,
    pub proposer: String,
    pub seeds: Vec<u64>,
    pub metrics: Vec<f64>,
    pub final_costs: Vec<f64>,
    pub mean: f64,
    /// `1.96` times the sample standard deviation across seeds.
    pub half_width: f64,
    pub successes: usize,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub run_dir: Option<PathBuf>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SuiteSummary {
    pub rows: Vec<SuiteRow>,
    pub metric_note: String,
}

/// Mean and `1.96 * sample stdev`; the interval is zero for one value.
pub fn mean_interval(values: &[f64]) -> (f64, f64) {
    let n = values.len() as f64;
    let mean = values.iter().sum::<f64>() / n;
    if values.len() < 2 {
        return (mean, 0.0);
    }
    let var = values.iter().map(|v| (v - mean).powi(2)).sum::<f64>() / (n - 1.0);
    (mean, 1.96 * var.sqrt())
}

fn run_dir_name(cfg: &RunConfig) -> String {
    let proposer: String = cfg
        .proposer
        .chars()
        .map(|c| if c.is_ascii_alphanumeric() { c } else { '-' })
        .collect();
    format!("{}_{}_{}", cfg.task, cfg.optimizer.name(), proposer.trim_matches('-'))
}

/// Runs every (config, seed) pair on `workers` threads and aggregates
/// normalized performance per config. With `out`, each run is persisted
/// under `out/<task>_<optimizer>_<proposer>/seed-<n>`.
pub fn run_suite(
    configs: &[RunConfig],
    workers: Option<usize>,
    out: Option<&Path>,
) -> Result<(SuiteSummary, Vec<Vec<RunRecord>>), OrchestratorError> {
    for c in configs {
        c.validate()?;
    }
    let mut builder = rayon::ThreadPoolBuilder::new();
    if let Some(w) = workers {
        builder = builder.num_threads(w.max(1));
    }
    let pool = builder.build().map_err(|e| OrchestratorError::Config(e.to_string()))?;
    let jobs: Vec<(usize, u64)> = configs
        .iter()
        .enumerate()
        .flat_map(|(i, c)| c.seeds.iter().map(move |&s| (i, s)))
        .collect();
    let results: Vec<Result<RunRecord, OrchestratorError>> =
        pool.install(|| jobs.par_iter().map(|&(i, s)| run_task(&configs[i], s)).collect());

    let mut grouped: Vec<Vec<RunRecord>> = vec![Vec::new(); configs.len()];
    for ((i, _), r) in jobs.iter().zip(results) {
        grouped[*i].push(r?);
    }
    let mut rows = Vec::new();
    for (cfg, records) in configs.iter().zip(&grouped) {
        let run_dir = out.map(|o| o.join(run_dir_name(cfg)));
        if let Some(dir) = &run_dir {
            for r in records {
                r.persist(&dir.join(format!("seed-{}", r.seed)))?;
            }
            svg::write_group_svgs(records, dir)?;
        }
        let metrics: Vec<f64> = records.iter().map(|r| r.final_metric).collect();
        let (mean, half_width) = mean_interval(&metrics);
        rows.push(SuiteRow {
            task: cfg.task,
            optimizer: cfg.optimizer,
            proposer: cfg.proposer.clone(),
            seeds: cfg.seeds.clone(),
            final_costs: records.iter().map(|r| r.final_cost).collect(),
            successes: records.iter().filter(|r| r.success).count(),
            metrics,
            mean,
            half_width,
            run_dir,
        });
    }
    let summary = SuiteSummary {
        rows,
        metric_note: "normalized performance 1 - ln(1 + cost) / ln(1 + max_error); max_error defaults \
                      to the null-plan cost (no actions executed) plus the task's cost offset"
            .to_string(),
    };
    if let Some(out) = out {
        std::fs::create_dir_all(out).map_err(|e| OrchestratorError::io(out, e))?;
        let path = out.join("summary.json");
        std::fs::write(&path, record::to_json(&summary)).map_err(|e| OrchestratorError::io(&path, e))?;
        let path = out.join("summary.md");
        std::fs::write(&path, summary_table(&summary)).map_err(|e| OrchestratorError::io(&path, e))?;
    }
    Ok((summary, grouped))
}

pub fn summary_table(s: &SuiteSummary) -> String {
    let mut t = String::from("| task | optimizer | proposer | seeds | normalized performance | successes |\n");
    t.push_str("|---|---|---|---|---|---|\n");
    for r in &s.rows {
        t.push_str(&format!(
            "| {} | {} | {} | {} | {:.3} ± {:.3} | {}/{} |\n",
            r.task,
            r.optimizer.name(),
            r.proposer,
            r.seeds.len(),
            r.mean,
            r.half_width,
            r.successes,
            r.seeds.len()
        ));
    }
    t.push_str(&format!("\n{}\n", s.metric_note));
    t
}
