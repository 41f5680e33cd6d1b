use rand::Rng;
use rand_chacha::ChaCha8Rng;
use rand_distr::StandardNormal;
use serde::{Deserialize, Serialize};

use super::{rng, AskTell, BboError, BboProblem, BboResult, Tracker};

/// Candidates per ask for random sampling.
pub const RANDOM_BATCH: usize = 16;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum RandomMode {
    /// `x0 + sigma0 * N(0, I)`.
    Gaussian,
    /// Uniform over an axis-aligned box.
    UniformBox { lo: Vec<f64>, hi: Vec<f64> },
}

pub struct RandomSearch {
    tracker: Tracker,
    rng: ChaCha8Rng,
    x0: Vec<f64>,
    sigma: f64,
    mode: RandomMode,
    started: bool,
}

impl RandomSearch {
    pub fn new(prob: &BboProblem, mode: RandomMode) -> Result<Self, BboError> {
        if let RandomMode::UniformBox { lo, hi } = &mode {
            let ok = lo.len() == prob.dim
                && hi.len() == prob.dim
                && lo.iter().zip(hi).all(|(a, b)| a.is_finite() && b.is_finite() && a <= b);
            if !ok {
                return Err(BboError::InvalidProblem("box bounds must match dim with lo <= hi".into()));
            }
        }
        Ok(Self {
            tracker: Tracker::new(prob),
            rng: rng(prob.seed),
            x0: prob.x0.clone(),
            sigma: prob.sigma0,
            mode,
            started: false,
        })
    }

    fn draw(&mut self) -> Vec<f64> {
        match &self.mode {
            RandomMode::Gaussian => self
                .x0
                .iter()
                .map(|c| c + self.sigma * self.rng.sample::<f64, _>(StandardNormal))
                .collect(),
            RandomMode::UniformBox { lo, hi } => lo
                .iter()
                .zip(hi)
                .map(|(a, b)| a + (b - a) * self.rng.random::<f64>())
                .collect(),
        }
    }
}

impl AskTell for RandomSearch {
    fn ask(&mut self) -> Result<Vec<Vec<f64>>, BboError> {
        if !self.started {
            return self.tracker.issue(vec![self.x0.clone()]);
        }
        if self.tracker.remaining() == 0 {
            return Err(BboError::BudgetExhausted);
        }
        let n = RANDOM_BATCH.min(self.tracker.remaining());
        let batch = (0..n).map(|_| self.draw()).collect();
        self.tracker.issue(batch)
    }

    fn tell(&mut self, costs: &[f64]) -> Result<(), BboError> {
        self.tracker.receive(costs)?;
        self.started = true;
        Ok(())
    }

    fn result(&self) -> BboResult {
        self.tracker.result()
    }

    fn remaining(&self) -> usize {
        self.tracker.remaining()
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn gaussian_mean_is_centered() {
        let x0 = vec![0.3, -1.2];
        let prob = BboProblem::new(x0.clone(), 0.5, 10_001, 5);
        let mut rs = RandomSearch::new(&prob, RandomMode::Gaussian).unwrap();
        rs.ask().unwrap();
        rs.tell(&[0.0]).unwrap();
        let mut sums = [0.0; 2];
        let mut count = 0;
        while rs.remaining() > 0 {
            let b = rs.ask().unwrap();
            for x in &b {
                sums[0] += x[0];
                sums[1] += x[1];
            }
            count += b.len();
            rs.tell(&vec![1.0; b.len()]).unwrap();
        }
        assert_eq!(count, 10_000);
        let se = 0.5 / (count as f64).sqrt();
        for d in 0..2 {
            assert!((sums[d] / count as f64 - x0[d]).abs() < 3.0 * se);
        }
    }

    #[test]
    fn uniform_box_stays_inside() {
        let prob = BboProblem::new(vec![0.0, 0.0], 0.1, 200, 2);
        let mode = RandomMode::UniformBox {
            lo: vec![-1.0, 2.0],
            hi: vec![1.0, 3.0],
        };
        let mut rs = RandomSearch::new(&prob, mode).unwrap();
        rs.ask().unwrap();
        rs.tell(&[0.0]).unwrap();
        let b = rs.ask().unwrap();
        assert!(b.iter().all(|x| (-1.0..=1.0).contains(&x[0]) && (2.0..=3.0).contains(&x[1])));
    }
}
