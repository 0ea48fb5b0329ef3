//! Model scores: Chernoff-penalized risks ERM1 and ERM2, AIC, BIC and k-fold
//! cross-validation.

use std::f64::consts::E;

use rand::seq::SliceRandom;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::data::Dataset;
use crate::error::{Error, Result};
use crate::linmod::fit_rows;
use crate::rng::{self, Domain};

/// Inputs shared by ERM1 and ERM2. `d` is the VC dimension plugged into the
/// penalty, usually the model's d_hat.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ErmInputs {
    pub r_emp: f64,
    pub n: usize,
    pub m: usize,
    pub eta: f64,
    pub d: f64,
}

impl ErmInputs {
    fn validate(&self) -> Result<()> {
        let n = self.n as f64;
        if !(self.r_emp >= 0.0 && self.r_emp.is_finite()) {
            return Err(Error::Domain(format!("r_emp = {} must be >= 0", self.r_emp)));
        }
        if self.n == 0 || self.m == 0 {
            return Err(Error::Domain("n and m must be positive".into()));
        }
        if !(self.eta > 0.0 && self.eta < 1.0) {
            return Err(Error::Domain(format!("eta = {} must lie in (0, 1)", self.eta)));
        }
        if !(self.d >= 1.0 && self.d <= 2.0 * n * E) {
            return Err(Error::Domain(format!(
                "d = {} must lie in [1, 2ne = {}]",
                self.d,
                2.0 * n * E
            )));
        }
        Ok(())
    }

    /// A = ln((2m/eta)·(2ne/d)^d), evaluated as a sum of logs.
    pub fn log_term(&self) -> f64 {
        let n = self.n as f64;
        (2.0 * self.m as f64 / self.eta).ln() + self.d * (2.0 * n * E / self.d).ln()
    }
}

/// R_emp + m·sqrt(A/n).
pub fn erm1(i: &ErmInputs) -> Result<f64> {
    i.validate()?;
    let a = i.log_term();
    if !(a > 0.0) {
        return Err(Error::Domain(format!("log term {a} must be positive")));
    }
    Ok(i.r_emp + i.m as f64 * (a / i.n as f64).sqrt())
}

/// R_emp + (m^2/2n)·A·(1 + sqrt(1 + 4n·R_emp/(m^2·A))).
pub fn erm2(i: &ErmInputs) -> Result<f64> {
    i.validate()?;
    let a = i.log_term();
    if !(a > 0.0) {
        return Err(Error::Domain(format!("log term {a} must be positive")));
    }
    let (n, m2) = (i.n as f64, (i.m * i.m) as f64);
    let radical = (1.0 + 4.0 * n * i.r_emp / (m2 * a)).sqrt();
    Ok(i.r_emp + m2 / (2.0 * n) * a * (1.0 + radical))
}

/// n·ln(RSS/n) + 2k.
pub fn aic(rss: f64, n: usize, k: usize) -> f64 {
    let n = n as f64;
    n * (rss / n).ln() + 2.0 * k as f64
}

/// n·ln(RSS/n) + k·ln(n).
pub fn bic(rss: f64, n: usize, k: usize) -> f64 {
    let n = n as f64;
    n * (rss / n).ln() + k as f64 * n.ln()
}

/// Fold label of every row: a seeded permutation of the row indices cut into
/// `folds` contiguous parts whose sizes differ by at most one.
pub fn fold_assignment(n: usize, folds: usize, seed: u64) -> Result<Vec<usize>> {
    if folds < 2 {
        return Err(Error::InvalidConfig("cross-validation needs at least 2 folds".into()));
    }
    if n < folds {
        return Err(Error::TooFewRows { n, folds });
    }
    let mut order: Vec<usize> = (0..n).collect();
    order.shuffle(&mut rng::stream(seed, Domain::Folds, 0, 0, 0));
    let (base, extra) = (n / folds, n % folds);
    let mut labels = vec![0; n];
    let mut pos = 0;
    for f in 0..folds {
        let size = base + usize::from(f < extra);
        for &row in &order[pos..pos + size] {
            labels[row] = f;
        }
        pos += size;
    }
    Ok(labels)
}

/// Mean over folds of the held-out mean squared prediction error.
pub fn kfold_cv(d: &Dataset, columns: &[usize], folds: usize, seed: u64) -> Result<f64> {
    d.check_columns(columns)?;
    let labels = fold_assignment(d.n(), folds, seed)?;
    let errors: Vec<f64> = (0..folds)
        .into_par_iter()
        .map(|f| {
            let (test, train): (Vec<usize>, Vec<usize>) =
                (0..d.n()).partition(|&r| labels[r] == f);
            let fit = fit_rows(d, &train, columns);
            let se = fit.squared_errors_rows(d, &test);
            se.iter().sum::<f64>() / se.len() as f64
        })
        .collect();
    Ok(errors.iter().sum::<f64>() / folds as f64)
}
