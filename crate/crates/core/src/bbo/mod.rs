//! Black-box minimization over continuous plan parameters.
//!
//! Every method is driven through the same ask/tell protocol: `ask` returns
//! a batch of candidates, `tell` takes their costs in order. The first batch
//! is always the initial guess alone. Non-finite costs count as `+inf`.

mod cmaes;
mod hillclimb;
mod random;

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};
use thiserror::Error;

pub use cmaes::{default_population, CmaEs};
pub use hillclimb::HillClimb;
pub use random::{RandomMode, RandomSearch, RANDOM_BATCH};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Method {
    Cmaes,
    Hillclimb,
    Random,
}

impl Method {
    pub const ALL: [Method; 3] = [Method::Cmaes, Method::Hillclimb, Method::Random];

    pub fn name(self) -> &'static str {
        match self {
            Method::Cmaes => "cmaes",
            Method::Hillclimb => "hillclimb",
            Method::Random => "random",
        }
    }
}

impl std::str::FromStr for Method {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        Method::ALL
            .into_iter()
            .find(|m| m.name() == s)
            .ok_or_else(|| format!("unknown optimizer `{s}` (expected cmaes, hillclimb or random)"))
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct BboProblem {
    pub dim: usize,
    pub x0: Vec<f64>,
    pub sigma0: f64,
    pub budget: usize,
    pub seed: u64,
}

impl BboProblem {
    pub fn new(x0: Vec<f64>, sigma0: f64, budget: usize, seed: u64) -> Self {
        Self {
            dim: x0.len(),
            x0,
            sigma0,
            budget,
            seed,
        }
    }

    pub fn validate(&self) -> Result<(), BboError> {
        if self.dim == 0 || self.x0.len() != self.dim {
            return Err(BboError::InvalidProblem(format!(
                "dim {} with initial guess of length {}",
                self.dim,
                self.x0.len()
            )));
        }
        if self.budget == 0 {
            return Err(BboError::InvalidProblem("budget must be at least 1".into()));
        }
        if !(self.sigma0 > 0.0 && self.sigma0.is_finite()) {
            return Err(BboError::InvalidProblem("sigma0 must be positive".into()));
        }
        if self.x0.iter().any(|v| !v.is_finite()) {
            return Err(BboError::InvalidProblem("initial guess must be finite".into()));
        }
        Ok(())
    }
}

/// Method-specific knobs.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct BboOptions {
    /// Hill climbing: probability of accepting a non-improving step.
    pub p_accept: f64,
    pub random_mode: RandomMode,
}

impl Default for BboOptions {
    fn default() -> Self {
        Self {
            p_accept: 0.05,
            random_mode: RandomMode::Gaussian,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct BboResult {
    pub best_x: Vec<f64>,
    pub best_cost: f64,
    /// `(evaluation count, best cost so far)` after every evaluation.
    pub history: Vec<(usize, f64)>,
    pub evaluations_used: usize,
}

#[derive(Debug, Clone, PartialEq, Error)]
pub enum BboError {
    #[error("evaluation budget exhausted")]
    BudgetExhausted,
    #[error("invalid problem: {0}")]
    InvalidProblem(String),
    #[error("told {got} costs for a batch of {expected}")]
    TellMismatch { expected: usize, got: usize },
    #[error("tell called without an outstanding ask")]
    NothingAsked,
    #[error("ask called while a batch is still outstanding")]
    Outstanding,
}

pub trait AskTell {
    fn ask(&mut self) -> Result<Vec<Vec<f64>>, BboError>;
    fn tell(&mut self, costs: &[f64]) -> Result<(), BboError>;
    fn result(&self) -> BboResult;
    fn remaining(&self) -> usize;
}

/// Budget accounting and best-so-far bookkeeping shared by all methods.
#[derive(Debug, Clone)]
pub(crate) struct Tracker {
    budget: usize,
    used: usize,
    best_x: Vec<f64>,
    best_cost: f64,
    history: Vec<(usize, f64)>,
    pending: Option<Vec<Vec<f64>>>,
}

impl Tracker {
    fn new(prob: &BboProblem) -> Self {
        Self {
            budget: prob.budget,
            used: 0,
            best_x: prob.x0.clone(),
            best_cost: f64::INFINITY,
            history: Vec::new(),
            pending: None,
        }
    }

    fn remaining(&self) -> usize {
        self.budget - self.used
    }

    /// Registers a batch, truncated to the remaining budget.
    fn issue(&mut self, mut batch: Vec<Vec<f64>>) -> Result<Vec<Vec<f64>>, BboError> {
        if self.pending.is_some() {
            return Err(BboError::Outstanding);
        }
        if self.remaining() == 0 {
            return Err(BboError::BudgetExhausted);
        }
        batch.truncate(self.remaining());
        self.pending = Some(batch.clone());
        Ok(batch)
    }

    /// Records told costs; returns the batch with sanitized costs.
    fn receive(&mut self, costs: &[f64]) -> Result<(Vec<Vec<f64>>, Vec<f64>), BboError> {
        let batch = self.pending.as_ref().ok_or(BboError::NothingAsked)?;
        if batch.len() != costs.len() {
            return Err(BboError::TellMismatch {
                expected: batch.len(),
                got: costs.len(),
            });
        }
        let batch = self.pending.take().unwrap();
        let costs: Vec<f64> = costs
            .iter()
            .map(|&c| if c.is_finite() { c } else { f64::INFINITY })
            .collect();
        for (x, &c) in batch.iter().zip(&costs) {
            self.used += 1;
            if c < self.best_cost {
                self.best_cost = c;
                self.best_x = x.clone();
            }
            self.history.push((self.used, self.best_cost));
        }
        Ok((batch, costs))
    }

    fn result(&self) -> BboResult {
        BboResult {
            best_x: self.best_x.clone(),
            best_cost: self.best_cost,
            history: self.history.clone(),
            evaluations_used: self.used,
        }
    }
}

pub(crate) fn rng(seed: u64) -> ChaCha8Rng {
    ChaCha8Rng::seed_from_u64(seed)
}

/// Builds the ask/tell state for `method`.
pub fn optimizer(
    method: Method,
    prob: &BboProblem,
    opts: &BboOptions,
) -> Result<Box<dyn AskTell + Send>, BboError> {
    prob.validate()?;
    Ok(match method {
        Method::Cmaes => Box::new(CmaEs::new(prob)),
        Method::Hillclimb => Box::new(HillClimb::new(prob, opts.p_accept)?),
        Method::Random => Box::new(RandomSearch::new(prob, opts.random_mode.clone())?),
    })
}

/// Runs `method` on `f` until the budget is spent.
pub fn minimize(
    method: Method,
    f: impl FnMut(&[f64]) -> f64,
    prob: &BboProblem,
) -> Result<BboResult, BboError> {
    minimize_with(method, f, prob, &BboOptions::default())
}

pub fn minimize_with(
    method: Method,
    mut f: impl FnMut(&[f64]) -> f64,
    prob: &BboProblem,
    opts: &BboOptions,
) -> Result<BboResult, BboError> {
    let mut opt = optimizer(method, prob, opts)?;
    while opt.remaining() > 0 {
        let batch = opt.ask()?;
        let costs: Vec<f64> = batch.iter().map(|x| f(x)).collect();
        opt.tell(&costs)?;
    }
    Ok(opt.result())
}
