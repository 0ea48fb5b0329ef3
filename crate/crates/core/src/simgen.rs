//! Gaussian linear-model data with optional zero-coefficient decoy columns.

use rand_distr::{Distribution, Normal};
use serde::{Deserialize, Serialize};

use crate::data::Dataset;
use crate::error::{Error, Result};
use crate::linmod::{standardize, Standardizer};
use crate::rng::{self, Domain};

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SimulationConfig {
    /// Number of covariates with nonzero coefficients.
    pub p: usize,
    pub n: usize,
    #[serde(default = "defaults::sigma_eps")]
    pub sigma_eps: f64,
    #[serde(default = "defaults::mu_beta")]
    pub mu_beta: f64,
    #[serde(default = "defaults::sigma_beta")]
    pub sigma_beta: f64,
    #[serde(default = "defaults::mu_x")]
    pub mu_x: f64,
    #[serde(default = "defaults::sigma_x")]
    pub sigma_x: f64,
    #[serde(default)]
    pub decoys: usize,
    #[serde(default)]
    pub seed: u64,
}

mod defaults {
    pub fn sigma_eps() -> f64 {
        0.4
    }
    pub fn mu_beta() -> f64 {
        5.0
    }
    pub fn sigma_beta() -> f64 {
        3.0
    }
    pub fn mu_x() -> f64 {
        5.0
    }
    pub fn sigma_x() -> f64 {
        2.0
    }
}

impl SimulationConfig {
    pub fn new(p: usize, n: usize) -> Self {
        SimulationConfig {
            p,
            n,
            sigma_eps: defaults::sigma_eps(),
            mu_beta: defaults::mu_beta(),
            sigma_beta: defaults::sigma_beta(),
            mu_x: defaults::mu_x(),
            sigma_x: defaults::sigma_x(),
            decoys: 0,
            seed: 0,
        }
    }

    pub fn validate(&self) -> Result<()> {
        if self.p == 0 || self.n == 0 {
            return Err(Error::InvalidConfig("simulation needs p >= 1 and n >= 1".into()));
        }
        let sigmas = [self.sigma_eps, self.sigma_beta, self.sigma_x];
        if sigmas.iter().any(|s| !(*s > 0.0 && s.is_finite())) {
            return Err(Error::InvalidConfig("simulation sigmas must be positive".into()));
        }
        if !(self.mu_beta.is_finite() && self.mu_x.is_finite()) {
            return Err(Error::InvalidConfig("simulation means must be finite".into()));
        }
        Ok(())
    }
}

/// A generated sample. `raw` is on the generating scale; `data` is the
/// standardized version handed to the analysis.
#[derive(Debug, Clone)]
pub struct Simulated {
    pub data: Dataset,
    pub raw: Dataset,
    /// Intercept first, then p slopes (decoys carry zero and are omitted).
    pub beta: Vec<f64>,
    pub standardizer: Standardizer,
}

impl Simulated {
    /// True slopes on the standardized scale, decoys included as zeros.
    pub fn standardized_slopes(&self) -> Vec<f64> {
        let s = &self.standardizer;
        (0..s.x_sd.len())
            .map(|j| self.beta.get(j + 1).map_or(0.0, |b| b * s.x_sd[j] / s.y_sd))
            .collect()
    }
}

/// Draws y = b0 + sum_j b_j x_j + eps. Coefficients come from one stream,
/// each covariate column from its own, and the noise from another, so the
/// first columns stay the same when `p` or `decoys` grow.
pub fn simulate(cfg: &SimulationConfig) -> Result<Simulated> {
    cfg.validate()?;
    let normal = |mu: f64, sd: f64| Normal::new(mu, sd).expect("validated sigma");
    let total = cfg.p + cfg.decoys;

    let mut beta_rng = rng::stream(cfg.seed, Domain::Simulation, 0, 0, 0);
    let beta_dist = normal(cfg.mu_beta, cfg.sigma_beta);
    let beta: Vec<f64> = (0..=cfg.p).map(|_| beta_dist.sample(&mut beta_rng)).collect();

    let x_dist = normal(cfg.mu_x, cfg.sigma_x);
    let columns: Vec<Vec<f64>> = (0..total)
        .map(|j| {
            let mut r = rng::stream(cfg.seed, Domain::Simulation, 1, j, 0);
            (0..cfg.n).map(|_| x_dist.sample(&mut r)).collect()
        })
        .collect();

    let mut eps_rng = rng::stream(cfg.seed, Domain::Simulation, 2, 0, 0);
    let eps_dist = normal(0.0, cfg.sigma_eps);
    let y: Vec<f64> = (0..cfg.n)
        .map(|i| {
            let signal: f64 = (0..cfg.p).map(|j| beta[j + 1] * columns[j][i]).sum();
            beta[0] + signal + eps_dist.sample(&mut eps_rng)
        })
        .collect();

    let names = (1..=cfg.p)
        .map(|j| format!("x{j}"))
        .chain((1..=cfg.decoys).map(|j| format!("decoy{j}")))
        .collect();
    let raw = Dataset::from_columns(y, &columns, names, None)?;
    let (data, standardizer) = standardize(&raw)?;
    Ok(Simulated {
        data,
        raw,
        beta,
        standardizer,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::linmod::ols_fit;
    use crate::modelselect::corr_order;

    #[test]
    fn shape_and_names() {
        let s = simulate(&SimulationConfig {
            decoys: 3,
            ..SimulationConfig::new(4, 25)
        })
        .unwrap();
        assert_eq!((s.data.n(), s.data.n_cols()), (25, 7));
        assert_eq!(s.data.names()[3], "x4");
        assert_eq!(s.data.names()[4], "decoy1");
        assert_eq!(s.beta.len(), 5);
    }

    #[test]
    fn invalid_config() {
        assert!(simulate(&SimulationConfig::new(0, 10)).is_err());
        assert!(simulate(&SimulationConfig {
            sigma_eps: 0.0,
            ..SimulationConfig::new(2, 10)
        })
        .is_err());
    }

    #[test]
    fn deterministic() {
        let cfg = SimulationConfig {
            seed: 41,
            decoys: 2,
            ..SimulationConfig::new(5, 60)
        };
        let (a, b) = (simulate(&cfg).unwrap(), simulate(&cfg).unwrap());
        assert_eq!(a.data, b.data);
        assert_eq!(a.beta, b.beta);
        let other = simulate(&SimulationConfig { seed: 42, ..cfg }).unwrap();
        assert_ne!(a.data, other.data);
    }

    #[test]
    fn tiny_noise_recovers_standardized_beta() {
        let cfg = SimulationConfig {
            sigma_eps: 1e-9,
            seed: 5,
            ..SimulationConfig::new(6, 200)
        };
        let s = simulate(&cfg).unwrap();
        let fit = ols_fit(&s.data, &[0, 1, 2, 3, 4, 5]).unwrap();
        for (got, want) in fit.slopes().iter().zip(s.standardized_slopes()) {
            assert!((got - want).abs() < 1e-6, "{got} vs {want}");
        }
        assert!(fit.intercept().abs() < 1e-6);
    }

    #[test]
    fn raw_columns_have_requested_moments() {
        let n = 10_000;
        let cfg = SimulationConfig {
            seed: 9,
            ..SimulationConfig::new(3, n)
        };
        let s = simulate(&cfg).unwrap();
        let se_mean = 3.0 * 2.0 / (n as f64).sqrt();
        // sd of the sample sd is about sigma / sqrt(2n).
        let se_sd = 3.0 * 2.0 / (2.0 * n as f64).sqrt();
        for j in 0..3 {
            let col = s.raw.column(j);
            let mean = col.iter().sum::<f64>() / n as f64;
            let sd = (col.iter().map(|v| (v - mean).powi(2)).sum::<f64>() / (n as f64 - 1.0)).sqrt();
            assert!((mean - 5.0).abs() < se_mean, "mean {mean}");
            assert!((sd - 2.0).abs() < se_sd, "sd {sd}");
            assert!((s.standardizer.x_mean[j] - mean).abs() < 1e-12);
        }
    }

    #[test]
    fn decoys_rank_after_true_columns() {
        let seeds = 30;
        let mut clean = 0;
        for seed in 0..seeds {
            let cfg = SimulationConfig {
                seed,
                decoys: 5,
                ..SimulationConfig::new(5, 400)
            };
            let s = simulate(&cfg).unwrap();
            let order = corr_order(&s.data).unwrap();
            if order.order()[..5].iter().all(|&j| j < 5) {
                clean += 1;
            }
        }
        assert!(clean * 2 > seeds, "only {clean} of {seeds} orderings were clean");
    }
}
