use std::io::Write as _;
use std::path::Path;

use serde::{Deserialize, Serialize};

use super::{OrchestratorError, RolloutRecord, RunConfig};
use crate::bbo::Method;
use crate::nlp::Trajectory;
use crate::proposer::{FeedbackReport, Message};
use crate::task::TaskId;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct EvaluationEntry {
    pub alpha: Vec<f64>,
    pub cost: f64,
    pub converged: bool,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub failure: Option<String>,
}

/// One proposal and the parameter search run on it.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct IterationRecord {
    pub index: usize,
    pub prompt: Vec<Message>,
    pub response: String,
    pub retries: Vec<Message>,
    pub template: String,
    pub evaluations: Vec<EvaluationEntry>,
    /// Best cost after each evaluation; non-increasing.
    pub best_so_far: Vec<f64>,
    pub best_alpha: Vec<f64>,
    pub best_cost: f64,
    pub best_converged: bool,
    pub best_trajectory: Option<Trajectory>,
    pub best_rollout: Option<RolloutRecord>,
    pub reached_target: bool,
    /// Report sent back to the proposer after this iteration, if any.
    pub feedback: Option<FeedbackReport>,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum EndReason {
    TargetReached,
    FeedbackExhausted,
    FixturesExhausted,
}

#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
pub struct Timings {
    pub iteration_seconds: Vec<f64>,
    pub total_seconds: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RunRecord {
    pub config: RunConfig,
    pub seed: u64,
    pub task: TaskId,
    pub optimizer: Method,
    pub proposer: String,
    pub null_cost: f64,
    pub min_cost_offset: f64,
    /// Normalizer of the metric; the null-plan cost plus offset unless configured.
    pub max_error: f64,
    pub target_cost: f64,
    pub iterations: Vec<IterationRecord>,
    pub best_iteration: usize,
    pub final_cost: f64,
    pub final_metric: f64,
    pub success: bool,
    pub total_evaluations: usize,
    pub ended_by: EndReason,
    pub timings: Timings,
}

impl RunRecord {
    /// Best cost of iteration `k`, or of the last iteration if the run
    /// stopped earlier.
    pub fn cost_after_iteration(&self, k: usize) -> f64 {
        let i = k.min(self.iterations.len() - 1);
        self.iterations[i].best_cost
    }

    pub fn best(&self) -> &IterationRecord {
        &self.iterations[self.best_iteration]
    }

    /// The record with wall-clock timings cleared, for reproducibility checks.
    pub fn without_timings(&self) -> Self {
        Self {
            timings: Timings::default(),
            ..self.clone()
        }
    }

    pub fn load(dir: &Path) -> Result<Self, OrchestratorError> {
        let path = dir.join("record.json");
        let text = std::fs::read_to_string(&path).map_err(|e| OrchestratorError::io(&path, e))?;
        serde_json::from_str(&text).map_err(|e| OrchestratorError::Config(format!("{}: {e}", path.display())))
    }

    /// Writes the run directory: config snapshot, transcript, evaluation log,
    /// full record, curves, SVGs and a short summary.
    pub fn persist(&self, dir: &Path) -> Result<(), OrchestratorError> {
        std::fs::create_dir_all(dir).map_err(|e| OrchestratorError::io(dir, e))?;
        let write = |name: &str, text: &str| {
            let path = dir.join(name);
            std::fs::write(&path, text).map_err(|e| OrchestratorError::io(&path, e))
        };
        let config = toml::to_string(&self.config.for_seed(self.seed))
            .map_err(|e| OrchestratorError::Config(e.to_string()))?;
        write("config.toml", &config)?;
        write("record.json", &to_json(self))?;
        write("transcript.json", &to_json(&self.transcript()))?;
        write("summary.json", &to_json(&self.summary()))?;
        write("curves.csv", &self.curves_csv())?;

        let path = dir.join("evaluations.jsonl");
        let file = std::fs::File::create(&path).map_err(|e| OrchestratorError::io(&path, e))?;
        let mut out = std::io::BufWriter::new(file);
        let mut count = 0;
        for it in &self.iterations {
            for (k, e) in it.evaluations.iter().enumerate() {
                count += 1;
                let line = serde_json::json!({
                    "evaluation": count,
                    "iteration": it.index,
                    "index": k,
                    "cost": e.cost,
                    "best_so_far": it.best_so_far[k],
                    "converged": e.converged,
                    "failure": e.failure,
                    "alpha": e.alpha,
                });
                writeln!(out, "{line}").map_err(|e| OrchestratorError::io(&path, e))?;
            }
        }
        out.flush().map_err(|e| OrchestratorError::io(&path, e))?;
        super::svg::write_run_svgs(self, dir).map(|_| ())
    }

    pub fn transcript(&self) -> Vec<Message> {
        let mut out = Vec::new();
        for it in &self.iterations {
            if it.index == 0 {
                out.extend(it.prompt.iter().cloned());
            } else if let Some(last) = it.prompt.last() {
                out.push(last.clone());
            }
            out.extend(it.retries.iter().cloned());
            out.push(Message::assistant(it.response.clone()));
        }
        out
    }

    pub fn summary(&self) -> serde_json::Value {
        serde_json::json!({
            "task": self.task,
            "optimizer": self.optimizer,
            "proposer": self.proposer,
            "seed": self.seed,
            "final_cost": self.final_cost,
            "final_metric": self.final_metric,
            "metric_normalizer": self.max_error,
            "metric_normalizer_source": if self.config.max_error.is_some() { "config" } else { "null plan cost plus offset" },
            "min_cost_offset": self.min_cost_offset,
            "target_cost": self.target_cost,
            "success": self.success,
            "ended_by": self.ended_by,
            "iterations": self.iterations.len(),
            "iteration_costs": self.iterations.iter().map(|i| i.best_cost).collect::<Vec<_>>(),
            "total_evaluations": self.total_evaluations,
            "total_seconds": self.timings.total_seconds,
        })
    }

    /// `evaluation,iteration,cost,best_so_far` over the whole run.
    pub fn curves_csv(&self) -> String {
        let mut s = String::from("evaluation,iteration,cost,best_so_far\n");
        let mut n = 0;
        for it in &self.iterations {
            for (e, best) in it.evaluations.iter().zip(&it.best_so_far) {
                n += 1;
                s.push_str(&format!("{n},{},{},{}\n", it.index, e.cost, best));
            }
        }
        s
    }
}

pub(crate) fn to_json<T: Serialize>(v: &T) -> String {
    serde_json::to_string_pretty(v).expect("records serialize")
}
