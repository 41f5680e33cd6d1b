use rand::Rng;
use rand_chacha::ChaCha8Rng;
use rand_distr::StandardNormal;

use super::{rng, AskTell, BboError, BboProblem, BboResult, Tracker};

/// Probabilistic hill climbing: Gaussian perturbations of the current point,
/// improvements always accepted, anything else accepted with `p_accept`.
pub struct HillClimb {
    tracker: Tracker,
    rng: ChaCha8Rng,
    sigma: f64,
    p_accept: f64,
    current: Vec<f64>,
    current_cost: f64,
    started: bool,
    /// Non-improving proposals seen, and how many of them were taken.
    pub worse_proposals: usize,
    pub worse_accepted: usize,
}

impl HillClimb {
    pub fn new(prob: &BboProblem, p_accept: f64) -> Result<Self, BboError> {
        if !(0.0..=1.0).contains(&p_accept) {
            return Err(BboError::InvalidProblem("p_accept must lie in [0, 1]".into()));
        }
        Ok(Self {
            tracker: Tracker::new(prob),
            rng: rng(prob.seed),
            sigma: prob.sigma0,
            p_accept,
            current: prob.x0.clone(),
            current_cost: f64::INFINITY,
            started: false,
            worse_proposals: 0,
            worse_accepted: 0,
        })
    }

    pub fn current(&self) -> (&[f64], f64) {
        (&self.current, self.current_cost)
    }
}

impl AskTell for HillClimb {
    fn ask(&mut self) -> Result<Vec<Vec<f64>>, BboError> {
        if !self.started {
            return self.tracker.issue(vec![self.current.clone()]);
        }
        if self.tracker.remaining() == 0 {
            return Err(BboError::BudgetExhausted);
        }
        let sigma = self.sigma;
        let x = self
            .current
            .iter()
            .map(|c| c + sigma * self.rng.sample::<f64, _>(StandardNormal))
            .collect();
        self.tracker.issue(vec![x])
    }

    fn tell(&mut self, costs: &[f64]) -> Result<(), BboError> {
        let (mut batch, costs) = self.tracker.receive(costs)?;
        let (x, c) = (batch.remove(0), costs[0]);
        if !self.started {
            self.started = true;
            self.current_cost = c;
            return Ok(());
        }
        if c < self.current_cost {
            self.current = x;
            self.current_cost = c;
        } else {
            self.worse_proposals += 1;
            if self.rng.random::<f64>() < self.p_accept {
                self.worse_accepted += 1;
                self.current = x;
                self.current_cost = c;
            }
        }
        Ok(())
    }

    fn result(&self) -> BboResult {
        self.tracker.result()
    }

    fn remaining(&self) -> usize {
        self.tracker.remaining()
    }
}
