use nalgebra::{DMatrix, DVector, SymmetricEigen};
use rand::Rng;
use rand_chacha::ChaCha8Rng;
use rand_distr::StandardNormal;

use super::{rng, AskTell, BboError, BboProblem, BboResult, Tracker};

/// Default population size `4 + floor(3 ln n)`.
pub fn default_population(dim: usize) -> usize {
    4 + (3.0 * (dim as f64).ln()).floor() as usize
}

/// (mu/mu_w, lambda) CMA-ES with cumulative step-size adaptation and
/// rank-one plus rank-mu covariance updates.
pub struct CmaEs {
    tracker: Tracker,
    rng: ChaCha8Rng,
    n: usize,
    lambda: usize,
    weights: Vec<f64>,
    mu_eff: f64,
    c_sigma: f64,
    d_sigma: f64,
    c_c: f64,
    c1: f64,
    c_mu: f64,
    chi_n: f64,
    mean: DVector<f64>,
    sigma: f64,
    cov: DMatrix<f64>,
    basis: DMatrix<f64>,
    scales: DVector<f64>,
    p_sigma: DVector<f64>,
    p_c: DVector<f64>,
    generation: usize,
    started: bool,
}

impl CmaEs {
    pub fn new(prob: &BboProblem) -> Self {
        let n = prob.dim;
        let nf = n as f64;
        let lambda = default_population(n);
        let mu = lambda / 2;
        let raw: Vec<f64> = (1..=mu)
            .map(|i| (mu as f64 + 0.5).ln() - (i as f64).ln())
            .collect();
        let total: f64 = raw.iter().sum();
        let weights: Vec<f64> = raw.iter().map(|w| w / total).collect();
        let mu_eff = 1.0 / weights.iter().map(|w| w * w).sum::<f64>();
        let c_sigma = (mu_eff + 2.0) / (nf + mu_eff + 5.0);
        let d_sigma = 1.0 + 2.0 * (((mu_eff - 1.0) / (nf + 1.0)).sqrt() - 1.0).max(0.0) + c_sigma;
        let c_c = (4.0 + mu_eff / nf) / (nf + 4.0 + 2.0 * mu_eff / nf);
        let c1 = 2.0 / ((nf + 1.3).powi(2) + mu_eff);
        let c_mu = (1.0 - c1).min(2.0 * (mu_eff - 2.0 + 1.0 / mu_eff) / ((nf + 2.0).powi(2) + mu_eff));
        Self {
            tracker: Tracker::new(prob),
            rng: rng(prob.seed),
            n,
            lambda,
            weights,
            mu_eff,
            c_sigma,
            d_sigma,
            c_c,
            c1,
            c_mu,
            chi_n: nf.sqrt() * (1.0 - 1.0 / (4.0 * nf) + 1.0 / (21.0 * nf * nf)),
            mean: DVector::from_column_slice(&prob.x0),
            sigma: prob.sigma0,
            cov: DMatrix::identity(n, n),
            basis: DMatrix::identity(n, n),
            scales: DVector::from_element(n, 1.0),
            p_sigma: DVector::zeros(n),
            p_c: DVector::zeros(n),
            generation: 0,
            started: false,
        }
    }

    pub fn population(&self) -> usize {
        self.lambda
    }

    pub fn sigma(&self) -> f64 {
        self.sigma
    }

    pub fn mean(&self) -> &[f64] {
        self.mean.as_slice()
    }

    fn sample(&mut self) -> Vec<f64> {
        let z = DVector::from_fn(self.n, |_, _| self.rng.sample::<f64, _>(StandardNormal));
        let y = &self.basis * z.component_mul(&self.scales);
        (&self.mean + self.sigma * y).as_slice().to_vec()
    }

    fn update(&mut self, batch: &[Vec<f64>], costs: &[f64]) {
        let mut order: Vec<usize> = (0..batch.len()).collect();
        order.sort_by(|&a, &b| costs[a].total_cmp(&costs[b]).then(a.cmp(&b)));
        let old = self.mean.clone();
        let ys: Vec<DVector<f64>> = order
            .iter()
            .take(self.weights.len())
            .map(|&i| (DVector::from_column_slice(&batch[i]) - &old) / self.sigma)
            .collect();
        let y_w = ys
            .iter()
            .zip(&self.weights)
            .fold(DVector::zeros(self.n), |acc, (y, w)| acc + y * *w);
        self.mean = &old + self.sigma * &y_w;

        // C^{-1/2} y_w through the cached eigenbasis
        let inv_sqrt = self.scales.map(|d| 1.0 / d);
        let c_inv_half_y = &self.basis * (self.basis.transpose() * &y_w).component_mul(&inv_sqrt);
        let cs = self.c_sigma;
        self.p_sigma = (1.0 - cs) * &self.p_sigma + (cs * (2.0 - cs) * self.mu_eff).sqrt() * c_inv_half_y;
        self.generation += 1;
        let ps_norm = self.p_sigma.norm();
        let decay = 1.0 - (1.0 - cs).powi(2 * self.generation as i32);
        let h_sigma = if ps_norm / decay.sqrt() < (1.4 + 2.0 / (self.n as f64 + 1.0)) * self.chi_n {
            1.0
        } else {
            0.0
        };
        let cc = self.c_c;
        self.p_c = (1.0 - cc) * &self.p_c + h_sigma * (cc * (2.0 - cc) * self.mu_eff).sqrt() * &y_w;

        let rank_one = &self.p_c * self.p_c.transpose();
        let rank_mu = ys
            .iter()
            .zip(&self.weights)
            .fold(DMatrix::zeros(self.n, self.n), |acc, (y, w)| acc + *w * y * y.transpose());
        let correction = (1.0 - h_sigma) * cc * (2.0 - cc);
        self.cov = (1.0 - self.c1 - self.c_mu) * &self.cov
            + self.c1 * (rank_one + correction * &self.cov)
            + self.c_mu * rank_mu;
        self.sigma *= ((cs / self.d_sigma) * (ps_norm / self.chi_n - 1.0)).exp();
        self.refresh_eigen();
    }

    fn refresh_eigen(&mut self) {
        let sym = (&self.cov + self.cov.transpose()) * 0.5;
        let eig = SymmetricEigen::new(sym.clone());
        if eig.eigenvalues.iter().all(|v| v.is_finite()) {
            self.cov = sym;
            self.basis = eig.eigenvectors;
            self.scales = eig.eigenvalues.map(|v| v.max(1e-20).sqrt());
        }
    }
}

impl AskTell for CmaEs {
    fn ask(&mut self) -> Result<Vec<Vec<f64>>, BboError> {
        if !self.started {
            return self.tracker.issue(vec![self.mean.as_slice().to_vec()]);
        }
        if self.tracker.remaining() == 0 {
            return Err(BboError::BudgetExhausted);
        }
        let batch: Vec<Vec<f64>> = (0..self.lambda).map(|_| self.sample()).collect();
        self.tracker.issue(batch)
    }

    fn tell(&mut self, costs: &[f64]) -> Result<(), BboError> {
        let (batch, costs) = self.tracker.receive(costs)?;
        if !self.started {
            self.started = true;
        } else if batch.len() == self.lambda {
            self.update(&batch, &costs);
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

#[cfg(test)]
mod tests {
    use super::*;
    use crate::bbo::{minimize, Method};

    #[test]
    fn population_formula() {
        assert_eq!(default_population(8), 10);
        assert_eq!(default_population(1), 4);
        assert_eq!(default_population(10), 10);
        let prob = BboProblem::new(vec![0.0; 8], 0.1, 100, 0);
        let mut es = CmaEs::new(&prob);
        es.ask().unwrap();
        es.tell(&[1.0]).unwrap();
        assert_eq!(es.ask().unwrap().len(), 10);
    }

    #[test]
    fn sphere_converges() {
        let mut x0 = vec![0.0; 10];
        x0[0] = 1.0;
        let r = minimize(
            Method::Cmaes,
            |x| x.iter().map(|v| v * v).sum(),
            &BboProblem::new(x0, 0.3, 5000, 7),
        )
        .unwrap();
        assert!(r.best_cost < 1e-8, "{}", r.best_cost);
    }

    #[test]
    fn rosenbrock_progresses() {
        let f = |x: &[f64]| (1.0 - x[0]).powi(2) + 100.0 * (x[1] - x[0] * x[0]).powi(2);
        let r = minimize(Method::Cmaes, f, &BboProblem::new(vec![-1.0, 1.0], 0.5, 3000, 3)).unwrap();
        assert!(r.best_cost < 1e-6, "{}", r.best_cost);
    }
}
