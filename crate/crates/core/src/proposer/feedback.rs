use serde::{Deserialize, Serialize};

use super::ProposerError;
use crate::orchestrator::IterationRecord;

/// What the proposer is told after a parameter search.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct FeedbackReport {
    pub best_cost: f64,
    pub final_state_summary: String,
    pub target_cost: f64,
}

impl FeedbackReport {
    pub fn render(&self) -> String {
        format!(
            "After optimizing the parameters of your plan, the best cost reached was {:.4}; \
             the goal is a cost of at most {:.4}.\nFinal state of the best rollout:\n{}\n\
             Revise the plan program so that it can reach the goal. Reply with the complete \
             program in a single fenced block.",
            self.best_cost, self.target_cost, self.final_state_summary
        )
    }
}

pub fn build_feedback(record: &IterationRecord, target_cost: f64) -> Result<FeedbackReport, ProposerError> {
    let best_cost = record
        .evaluations
        .iter()
        .map(|e| e.cost)
        .min_by(f64::total_cmp)
        .ok_or(ProposerError::EmptyRecord)?;
    let final_state_summary = record
        .best_rollout
        .as_ref()
        .map_or_else(|| "the best candidate could not be rolled out".to_string(), |r| r.summary());
    Ok(FeedbackReport { best_cost, final_state_summary, target_cost })
}
