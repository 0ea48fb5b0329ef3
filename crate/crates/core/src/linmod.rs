//! Ordinary least squares with an intercept, plus the centring, scaling and
//! sphering transforms applied before estimation.

use nalgebra::{DMatrix, DVector};
use serde::{Deserialize, Serialize};

use crate::data::Dataset;
use crate::error::{Error, Result};

/// Relative singular-value cutoff for the minimum-norm solve.
pub const RANK_TOL: f64 = 1e-10;

/// Least-squares fit of `y ~ 1 + x[column_ids]`, intercept first.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct LinearFit {
    pub coefficients: Vec<f64>,
    pub column_ids: Vec<usize>,
    pub rank: usize,
}

impl LinearFit {
    pub fn intercept(&self) -> f64 {
        self.coefficients[0]
    }

    pub fn slopes(&self) -> &[f64] {
        &self.coefficients[1..]
    }

    fn predict_row(&self, d: &Dataset, row: usize) -> f64 {
        let x = d.x();
        self.column_ids
            .iter()
            .zip(self.slopes())
            .fold(self.intercept(), |acc, (&c, &b)| acc + b * x[(row, c)])
    }

    pub(crate) fn predict_rows(&self, d: &Dataset, rows: &[usize]) -> Vec<f64> {
        rows.iter().map(|&r| self.predict_row(d, r)).collect()
    }

    pub(crate) fn squared_errors_rows(&self, d: &Dataset, rows: &[usize]) -> Vec<f64> {
        let y = d.y();
        rows.iter()
            .map(|&r| {
                let e = self.predict_row(d, r) - y[r];
                e * e
            })
            .collect()
    }
}

/// Minimum-norm least-squares fit on all rows of `d`.
pub fn ols_fit(d: &Dataset, columns: &[usize]) -> Result<LinearFit> {
    d.check_columns(columns)?;
    let rows: Vec<usize> = (0..d.n()).collect();
    Ok(fit_rows(d, &rows, columns))
}

/// Fit on the (possibly repeated) rows `rows`. Columns must already be
/// checked.
pub(crate) fn fit_rows(d: &Dataset, rows: &[usize], columns: &[usize]) -> LinearFit {
    let x = d.x();
    let y = d.y();
    let design = DMatrix::from_fn(rows.len(), columns.len() + 1, |r, c| {
        if c == 0 {
            1.0
        } else {
            x[(rows[r], columns[c - 1])]
        }
    });
    let rhs = DVector::from_iterator(rows.len(), rows.iter().map(|&r| y[r]));
    let (coef, rank) = lstsq_min_norm(design, rhs);
    LinearFit {
        coefficients: coef.iter().copied().collect(),
        column_ids: columns.to_vec(),
        rank,
    }
}

/// Minimum-norm solution of `min ||a x - b||` and the numerical rank of `a`,
/// with singular values below `RANK_TOL * sigma_max` treated as zero.
///
/// Tall systems go through a Householder QR. When the Frobenius-norm bound
/// `1 / ||R^-1|| > RANK_TOL * ||R||` certifies full rank the triangular
/// solve is used directly; otherwise the SVD of R decides.
pub fn lstsq_min_norm(a: DMatrix<f64>, b: DVector<f64>) -> (DVector<f64>, usize) {
    let (n, p) = a.shape();
    if n < p {
        return svd_solve(a, &b);
    }
    let qr = a.qr();
    let mut qtb = b;
    qr.q_tr_mul(&mut qtb);
    let qtb = qtb.rows(0, p).into_owned();
    let r = qr.r();
    if r.diagonal().iter().all(|v| *v != 0.0) {
        if let Some(inv) = r.solve_upper_triangular(&DMatrix::identity(p, p)) {
            let inv_norm = inv.norm();
            if inv_norm.is_finite() && 1.0 / inv_norm > RANK_TOL * r.norm() {
                let coef = r
                    .solve_upper_triangular(&qtb)
                    .expect("nonzero diagonal");
                return (coef, p);
            }
        }
    }
    svd_solve(r, &qtb)
}

fn svd_solve(a: DMatrix<f64>, b: &DVector<f64>) -> (DVector<f64>, usize) {
    let p = a.ncols();
    let svd = a.svd(true, true);
    let smax = svd.singular_values.max();
    if !(smax > 0.0) {
        return (DVector::zeros(p), 0);
    }
    let tol = RANK_TOL * smax;
    let rank = svd.singular_values.iter().filter(|s| **s > tol).count();
    let coef = svd.solve(b, tol).expect("u and v were computed");
    (coef, rank)
}

/// `intercept + sum coef_j * x_ij` for every row of `x_new`.
pub fn ols_predict(fit: &LinearFit, x_new: &Dataset) -> Result<Vec<f64>> {
    x_new.check_columns(&fit.column_ids)?;
    let rows: Vec<usize> = (0..x_new.n()).collect();
    Ok(fit.predict_rows(x_new, &rows))
}

/// Elementwise `(y_hat_i - y_i)^2` over the rows of `d`.
pub fn squared_errors(fit: &LinearFit, d: &Dataset) -> Result<Vec<f64>> {
    d.check_columns(&fit.column_ids)?;
    let rows: Vec<usize> = (0..d.n()).collect();
    Ok(fit.squared_errors_rows(d, &rows))
}

/// Per-column sample mean and standard deviation (n - 1 denominator).
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Standardizer {
    pub y_mean: f64,
    pub y_sd: f64,
    pub x_mean: Vec<f64>,
    pub x_sd: Vec<f64>,
}

fn mean_sd(v: &[f64]) -> (f64, f64) {
    let n = v.len() as f64;
    let mean = v.iter().sum::<f64>() / n;
    let ss = v.iter().map(|x| (x - mean) * (x - mean)).sum::<f64>();
    (mean, (ss / (n - 1.0)).sqrt())
}

fn usable_sd(sd: f64, mean: f64) -> bool {
    sd.is_finite() && sd > 1e-12 * mean.abs().max(f64::MIN_POSITIVE)
}

impl Standardizer {
    pub fn fit(d: &Dataset) -> Result<Self> {
        let (y_mean, y_sd) = mean_sd(d.y());
        if !usable_sd(y_sd, y_mean) {
            return Err(Error::ZeroVariance("<response>".into()));
        }
        let mut x_mean = Vec::with_capacity(d.n_cols());
        let mut x_sd = Vec::with_capacity(d.n_cols());
        for j in 0..d.n_cols() {
            let (m, s) = mean_sd(d.column(j));
            if !usable_sd(s, m) {
                return Err(Error::ZeroVariance(d.names()[j].clone()));
            }
            x_mean.push(m);
            x_sd.push(s);
        }
        Ok(Standardizer {
            y_mean,
            y_sd,
            x_mean,
            x_sd,
        })
    }

    pub fn apply(&self, d: &Dataset) -> Dataset {
        let y = d.y().iter().map(|v| (v - self.y_mean) / self.y_sd).collect();
        let x = DMatrix::from_fn(d.n(), d.n_cols(), |r, c| {
            (d.x()[(r, c)] - self.x_mean[c]) / self.x_sd[c]
        });
        d.with_parts(y, x)
    }

    pub fn invert(&self, d: &Dataset) -> Dataset {
        let y = d.y().iter().map(|v| v * self.y_sd + self.y_mean).collect();
        let x = DMatrix::from_fn(d.n(), d.n_cols(), |r, c| {
            d.x()[(r, c)] * self.x_sd[c] + self.x_mean[c]
        });
        d.with_parts(y, x)
    }
}

/// Centres and scales the response and every covariate to mean 0, sd 1.
pub fn standardize(d: &Dataset) -> Result<(Dataset, Standardizer)> {
    let s = Standardizer::fit(d)?;
    Ok((s.apply(d), s))
}

/// Whitens the covariates with the symmetric inverse square root of their
/// sample covariance, so the output covariance is the identity. The output
/// covariates are centred; the response is left alone.
pub fn sphere(d: &Dataset) -> Result<Dataset> {
    let (n, p) = (d.n(), d.n_cols());
    if n < 2 || p == 0 {
        return Err(Error::SingularCovariance);
    }
    let mut centred = d.x().clone();
    for mut col in centred.column_iter_mut() {
        let mean = col.mean();
        col.add_scalar_mut(-mean);
    }
    let cov = centred.transpose() * &centred / (n as f64 - 1.0);
    let eig = cov.symmetric_eigen();
    let lmax = eig.eigenvalues.max();
    let lmin = eig.eigenvalues.min();
    if !(lmax > 0.0) || lmin <= 1e-12 * lmax {
        return Err(Error::SingularCovariance);
    }
    let inv_sqrt = DMatrix::from_diagonal(&eig.eigenvalues.map(|l| 1.0 / l.sqrt()));
    let w = &eig.eigenvectors * inv_sqrt * eig.eigenvectors.transpose();
    Ok(d.with_parts(d.y().to_vec(), centred * w))
}

/// Sample covariance of the covariates (n - 1 denominator).
pub fn covariance(d: &Dataset) -> DMatrix<f64> {
    let mut centred = d.x().clone();
    for mut col in centred.column_iter_mut() {
        let mean = col.mean();
        col.add_scalar_mut(-mean);
    }
    centred.transpose() * &centred / (d.n() as f64 - 1.0)
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_abs_diff_eq;
    use proptest::prelude::*;
    use rand::SeedableRng;
    use rand_chacha::ChaCha8Rng;
    use rand_distr::{Distribution, StandardNormal};

    fn ds(y: Vec<f64>, cols: &[Vec<f64>]) -> Dataset {
        let names = (1..=cols.len()).map(|i| format!("x{i}")).collect();
        Dataset::from_columns(y, cols, names, None).unwrap()
    }

    fn gaussian(n: usize, p: usize, seed: u64) -> Vec<Vec<f64>> {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        (0..p)
            .map(|_| (0..n).map(|_| StandardNormal.sample(&mut rng)).collect())
            .collect()
    }

    #[test]
    fn standardize_three_points() {
        let d = ds(vec![1.0, 2.0, 3.0], &[vec![1.0, 2.0, 3.0]]);
        let (s, _) = standardize(&d).unwrap();
        assert_eq!(s.column(0), &[-1.0, 0.0, 1.0]);
        assert_eq!(s.y(), &[-1.0, 0.0, 1.0]);
    }

    #[test]
    fn standardize_rejects_constant() {
        let d = ds(vec![1.0, 2.0, 3.0], &[vec![4.0, 4.0, 4.0]]);
        assert!(matches!(standardize(&d), Err(Error::ZeroVariance(c)) if c == "x1"));
    }

    #[test]
    fn standardize_is_idempotent_and_invertible() {
        let cols = gaussian(50, 3, 1);
        let y: Vec<f64> = cols[0].iter().map(|v| 3.0 * v + 7.0).collect();
        let d = ds(y, &cols);
        let (s1, st) = standardize(&d).unwrap();
        let (s2, _) = standardize(&s1).unwrap();
        for (a, b) in s1.x().iter().zip(s2.x().iter()) {
            assert_abs_diff_eq!(a, b, epsilon = 1e-12);
        }
        let back = st.invert(&s1);
        for (a, b) in back.x().iter().zip(d.x().iter()) {
            assert_abs_diff_eq!(a, b, epsilon = 1e-10);
        }
        for (a, b) in back.y().iter().zip(d.y()) {
            assert_abs_diff_eq!(a, b, epsilon = 1e-10);
        }
    }

    #[test]
    fn sphere_rejects_collinear() {
        let a = vec![1.0, 2.0, 3.0, 5.0];
        let b: Vec<f64> = a.iter().map(|v| 2.0 * v).collect();
        let d = ds(vec![0.0, 1.0, 0.0, 1.0], &[a, b]);
        assert!(matches!(sphere(&d), Err(Error::SingularCovariance)));
    }

    #[test]
    fn sphere_whitens_correlated_sample() {
        let z = gaussian(200, 2, 2);
        let a = z[0].clone();
        let b: Vec<f64> = z[0].iter().zip(&z[1]).map(|(u, v)| 0.8 * u + 0.6 * v + 3.0).collect();
        let d = ds(z[1].clone(), &[a, b]);
        let cov = covariance(&sphere(&d).unwrap());
        assert!((cov - DMatrix::identity(2, 2)).abs().max() < 1e-8);
    }

    #[test]
    fn sphere_of_white_data_stays_white() {
        let d = ds(vec![0.0; 300], &gaussian(300, 3, 3));
        let whitened = sphere(&sphere(&d).unwrap()).unwrap();
        assert!((covariance(&whitened) - DMatrix::identity(3, 3)).abs().max() < 1e-8);
    }

    #[test]
    fn exact_line() {
        let d = ds(vec![2.0, 4.0, 6.0], &[vec![1.0, 2.0, 3.0]]);
        let f = ols_fit(&d, &[0]).unwrap();
        assert_abs_diff_eq!(f.coefficients[0], 0.0, epsilon = 1e-10);
        assert_abs_diff_eq!(f.coefficients[1], 2.0, epsilon = 1e-10);
        assert_eq!(f.rank, 2);
        let yhat = ols_predict(&f, &d).unwrap();
        for (a, b) in yhat.iter().zip(d.y()) {
            assert_abs_diff_eq!(a, b, epsilon = 1e-10);
        }
        assert!(squared_errors(&f, &d).unwrap().iter().all(|e| *e < 1e-20));
    }

    #[test]
    fn flat_response() {
        let d = ds(vec![3.5; 4], &[vec![1.0, -2.0, 3.0, 0.5]]);
        let f = ols_fit(&d, &[0]).unwrap();
        assert_abs_diff_eq!(f.coefficients[0], 3.5, epsilon = 1e-12);
        assert_abs_diff_eq!(f.coefficients[1], 0.0, epsilon = 1e-12);
    }

    #[test]
    fn duplicated_column_gets_minimum_norm_split() {
        // With x duplicated the design [1, x, x] has rank 2; the
        // pseudoinverse of the 3x3 system gives (0, 1, 1).
        let x = vec![1.0, 2.0, 3.0];
        let d = ds(vec![2.0, 4.0, 6.0], &[x.clone(), x]);
        let f = ols_fit(&d, &[0, 1]).unwrap();
        assert_eq!(f.rank, 2);
        let expected = [0.0, 1.0, 1.0];
        for (a, b) in f.coefficients.iter().zip(expected) {
            assert_abs_diff_eq!(*a, b, epsilon = 1e-10);
        }
    }

    #[test]
    fn wide_system_is_minimum_norm() {
        // One row: min ||b|| subject to b0 + 2 b1 = 5 is (1, 2).
        let d = ds(vec![5.0], &[vec![2.0]]);
        let f = ols_fit(&d, &[0]).unwrap();
        assert_eq!(f.rank, 1);
        assert_abs_diff_eq!(f.coefficients[0], 1.0, epsilon = 1e-12);
        assert_abs_diff_eq!(f.coefficients[1], 2.0, epsilon = 1e-12);
    }

    #[test]
    fn predict_examples() {
        let line = LinearFit {
            coefficients: vec![0.0, 2.0],
            column_ids: vec![0],
            rank: 2,
        };
        let d = ds(vec![0.0], &[vec![5.0]]);
        assert_eq!(ols_predict(&line, &d).unwrap(), vec![10.0]);
        let flat = LinearFit {
            coefficients: vec![1.0, 0.0],
            column_ids: vec![0],
            rank: 2,
        };
        assert_eq!(ols_predict(&flat, &d).unwrap(), vec![1.0]);
        let missing = LinearFit {
            coefficients: vec![1.0, 0.0],
            column_ids: vec![3],
            rank: 2,
        };
        assert!(matches!(ols_predict(&missing, &d), Err(Error::MissingColumn(_))));
        assert!(matches!(squared_errors(&missing, &d), Err(Error::MissingColumn(_))));
    }

    #[test]
    fn squared_errors_are_sign_invariant() {
        let fit = LinearFit {
            coefficients: vec![0.0, 1.0],
            column_ids: vec![0],
            rank: 2,
        };
        let d = ds(vec![0.0, 2.0], &[vec![1.0, 1.0]]);
        assert_eq!(squared_errors(&fit, &d).unwrap(), vec![1.0, 1.0]);
    }

    #[test]
    fn squared_errors_match_per_row_recomputation() {
        let cols = gaussian(40, 3, 4);
        let y = gaussian(40, 1, 5).pop().unwrap();
        let d = ds(y, &cols);
        let fit = LinearFit {
            coefficients: vec![0.3, -1.2, 0.7, 2.1],
            column_ids: vec![2, 0, 1],
            rank: 4,
        };
        let se = squared_errors(&fit, &d).unwrap();
        for i in 0..40 {
            let yhat = 0.3 - 1.2 * cols[2][i] + 0.7 * cols[0][i] + 2.1 * cols[1][i];
            assert_abs_diff_eq!(se[i], (yhat - d.y()[i]).powi(2), epsilon = 1e-12);
        }
    }

    proptest! {
        #[test]
        fn residuals_orthogonal_to_design(seed in any::<u64>(), n in 8usize..60, p in 1usize..5) {
            let cols = gaussian(n, p, seed);
            let y = gaussian(n, 1, seed ^ 0xabc).pop().unwrap();
            let d = ds(y.clone(), &cols);
            let ids: Vec<usize> = (0..p).collect();
            let f = ols_fit(&d, &ids).unwrap();
            prop_assume!(f.rank == p + 1);
            let yhat = ols_predict(&f, &d).unwrap();
            let resid: Vec<f64> = y.iter().zip(&yhat).map(|(a, b)| a - b).collect();
            let tol = 1e-8 * n as f64;
            prop_assert!(resid.iter().sum::<f64>().abs() <= tol);
            for c in &cols {
                let dot: f64 = resid.iter().zip(c).map(|(r, x)| r * x).sum();
                prop_assert!(dot.abs() <= tol);
            }
        }

        #[test]
        fn squared_errors_permute_with_rows(seed in any::<u64>(), n in 3usize..30) {
            let cols = gaussian(n, 2, seed);
            let y = gaussian(n, 1, seed.wrapping_add(1)).pop().unwrap();
            let d = ds(y, &cols);
            let fit = ols_fit(&d, &[0, 1]).unwrap();
            let mut order: Vec<usize> = (0..n).collect();
            order.reverse();
            order.rotate_left(seed as usize % n);
            let mut a = squared_errors(&fit, &d).unwrap();
            let mut b = squared_errors(&fit, &d.subset(&order)).unwrap();
            a.sort_by(f64::total_cmp);
            b.sort_by(f64::total_cmp);
            prop_assert_eq!(a, b);
        }
    }
}
