//! Double-bootstrap estimate of the xi curve.
//!
//! For every design point n_l and each of b2 outer replicates, b1 inner
//! replicates are drawn. An inner replicate resamples 2·n_l rows, splits them
//! into halves G1 and G2, fits the same column set on each half and scores
//! each fit on the *other* half. The two vectors of squared errors are
//! binned into m uniform intervals of [0, B), turned into interval-wise
//! empirical risks nu_1, nu_2 and compared componentwise. The inner
//! replicates are averaged per interval and summed over intervals to give
//! r_{b1,i}(n_l); xi_hat(n_l) is the mean of r over the outer replicates.
//!
//! Determinism: the inner replicate `(l, i, b)` draws only from
//! [`rng::bootstrap_stream`]`(seed, l, i, b)`, tasks are `(l, i)` pairs, and
//! all reductions run in index order. The result does not depend on the
//! number of worker threads.

use std::fmt::Write as _;

use rand::seq::SliceRandom;
use rand::Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::config::{BootstrapConfig, BoundPolicy, DesignPoints, DiscretizationConfig};
use crate::data::Dataset;
use crate::error::{Error, Result};
use crate::linmod::fit_rows;
use crate::rng;

/// Interval counts of the two cross-evaluated loss vectors of one inner
/// replicate.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct LossProfile {
    counts_1: Vec<u64>,
    counts_2: Vec<u64>,
    bound: f64,
    n_l: usize,
}

impl LossProfile {
    /// A bound of zero is allowed only for the degenerate replicate in which
    /// every loss is exactly zero; all nu values are then zero.
    pub fn new(counts_1: Vec<u64>, counts_2: Vec<u64>, bound: f64, n_l: usize) -> Result<Self> {
        if counts_1.is_empty() || counts_1.len() != counts_2.len() {
            return Err(Error::LengthMismatch {
                what: "interval counts",
                expected: counts_1.len(),
                got: counts_2.len(),
            });
        }
        if !(bound >= 0.0 && bound.is_finite()) {
            return Err(Error::Domain(format!("loss bound {bound} must be finite and >= 0")));
        }
        for counts in [&counts_1, &counts_2] {
            let total: u64 = counts.iter().sum();
            if total != n_l as u64 {
                return Err(Error::LengthMismatch {
                    what: "interval count total",
                    expected: n_l,
                    got: total as usize,
                });
            }
        }
        Ok(LossProfile {
            counts_1,
            counts_2,
            bound,
            n_l,
        })
    }

    pub fn m(&self) -> usize {
        self.counts_1.len()
    }

    pub fn bound(&self) -> f64 {
        self.bound
    }

    pub fn n_l(&self) -> usize {
        self.n_l
    }

    pub fn counts_1(&self) -> &[u64] {
        &self.counts_1
    }

    pub fn counts_2(&self) -> &[u64] {
        &self.counts_2
    }
}

/// Counts of `se` in the intervals [jB/m, (j+1)B/m), j = 0..m. A loss equal
/// to B goes to the last interval.
pub fn discretize_losses(se: &[f64], m: usize, bound: f64) -> Result<Vec<u64>> {
    if m == 0 {
        return Err(Error::InvalidConfig("m must be at least 1".into()));
    }
    if !(bound > 0.0 && bound.is_finite()) {
        return Err(Error::Domain(format!("loss bound {bound} must be positive")));
    }
    let edge = |j: usize| j as f64 * bound / m as f64;
    let mut counts = vec![0u64; m];
    for &e in se {
        if !(e >= 0.0) {
            return Err(Error::Domain(format!("squared error {e} is negative or NaN")));
        }
        if e > bound {
            return Err(Error::LossExceedsBound { loss: e, bound });
        }
        // The scaled guess can land one interval off at an edge; settle it
        // against the edges themselves.
        let mut j = ((e / bound * m as f64) as usize).min(m - 1);
        if j > 0 && e < edge(j) {
            j -= 1;
        } else if j + 1 < m && e >= edge(j + 1) {
            j += 1;
        }
        counts[j] += 1;
    }
    Ok(counts)
}

/// Interval-wise empirical risks: counts_l[j] · (2j+1)B/(2m) / n_l.
pub fn nu_values(p: &LossProfile) -> (Vec<f64>, Vec<f64>) {
    let m = p.m() as f64;
    let n = p.n_l as f64;
    let nu = |counts: &[u64]| -> Vec<f64> {
        counts
            .iter()
            .enumerate()
            .map(|(j, &c)| c as f64 * ((2 * j + 1) as f64 * p.bound / (2.0 * m)) / n)
            .collect()
    };
    (nu(&p.counts_1), nu(&p.counts_2))
}

/// `|nu_1j - nu_2j|` for every interval.
pub fn replicate_gap(p: &LossProfile) -> Vec<f64> {
    let (nu1, nu2) = nu_values(p);
    nu1.iter().zip(&nu2).map(|(a, b)| (a - b).abs()).collect()
}

/// Row indices of the two halves of one bootstrap sample.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct HalfSamples {
    pub g1: Vec<usize>,
    pub g2: Vec<usize>,
}

/// Per-level half sizes for stratified resampling: one row per level, the
/// rest shared in proportion to level size by largest remainder (ties to
/// the lower level).
pub fn stratum_sizes(n_l: usize, level_sizes: &[usize]) -> Result<Vec<usize>> {
    let k = level_sizes.len();
    if n_l < k {
        return Err(Error::DesignPointTooSmall { n_l, levels: k });
    }
    let spare = (n_l - k) as u128;
    let total: u128 = level_sizes.iter().map(|&s| s as u128).sum();
    let mut sizes: Vec<usize> = Vec::with_capacity(k);
    let mut remainders: Vec<(u128, usize)> = Vec::with_capacity(k);
    for (j, &s) in level_sizes.iter().enumerate() {
        let share = spare * s as u128;
        sizes.push(1 + (share / total) as usize);
        remainders.push((share % total, j));
    }
    let mut left = n_l - sizes.iter().sum::<usize>();
    remainders.sort_by(|a, b| b.0.cmp(&a.0).then(a.1.cmp(&b.1)));
    for &(_, j) in &remainders {
        if left == 0 {
            break;
        }
        sizes[j] += 1;
        left -= 1;
    }
    Ok(sizes)
}

/// Draws 2·n_l rows with replacement and splits them at random into two
/// halves of n_l rows.
///
/// Unstratified: 2·n_l uniform row draws, a Fisher-Yates shuffle, then the
/// first n_l rows form G1. Stratified: the same procedure runs inside each
/// block level with half size from [`stratum_sizes`], so every level is
/// present in both halves; halves are concatenated in level order.
pub fn bootstrap_indices<R: Rng + ?Sized>(
    d: &Dataset,
    n_l: usize,
    stratified: bool,
    rng: &mut R,
) -> Result<HalfSamples> {
    if n_l == 0 {
        return Err(Error::InvalidConfig("design points must be positive".into()));
    }
    if !stratified {
        let n = d.n();
        let mut draws: Vec<usize> = (0..2 * n_l).map(|_| rng.random_range(0..n)).collect();
        draws.shuffle(rng);
        let g2 = draws.split_off(n_l);
        return Ok(HalfSamples { g1: draws, g2 });
    }
    let blocks = d
        .blocks()
        .ok_or_else(|| Error::InvalidConfig("stratified bootstrap needs block labels".into()))?;
    let members = blocks.members();
    for (level, rows) in members.iter().enumerate() {
        if rows.len() < 2 {
            return Err(Error::StratumTooSmall {
                level: blocks.levels()[level].clone(),
                size: rows.len(),
            });
        }
    }
    let sizes = stratum_sizes(n_l, &members.iter().map(Vec::len).collect::<Vec<_>>())?;
    let mut g1 = Vec::with_capacity(n_l);
    let mut g2 = Vec::with_capacity(n_l);
    for (rows, &s) in members.iter().zip(&sizes) {
        let mut draws: Vec<usize> = (0..2 * s)
            .map(|_| rows[rng.random_range(0..rows.len())])
            .collect();
        draws.shuffle(rng);
        g1.extend_from_slice(&draws[..s]);
        g2.extend_from_slice(&draws[s..]);
    }
    Ok(HalfSamples { g1, g2 })
}

/// [`bootstrap_indices`] materialized as two datasets.
pub fn bootstrap_pair<R: Rng + ?Sized>(
    d: &Dataset,
    n_l: usize,
    stratified: bool,
    rng: &mut R,
) -> Result<(Dataset, Dataset)> {
    let h = bootstrap_indices(d, n_l, stratified, rng)?;
    Ok((d.subset(&h.g1), d.subset(&h.g2)))
}

/// One inner replicate: resample, fit both halves, cross-evaluate, bin.
pub fn inner_replicate<R: Rng + ?Sized>(
    d: &Dataset,
    n_l: usize,
    model: &[usize],
    cfg: &DiscretizationConfig,
    stratified: bool,
    rng: &mut R,
) -> Result<LossProfile> {
    let halves = bootstrap_indices(d, n_l, stratified, rng)?;
    let fit_1 = fit_rows(d, &halves.g1, model);
    let fit_2 = fit_rows(d, &halves.g2, model);
    // Model 1 is scored on G2, model 2 on G1.
    let se_1 = fit_1.squared_errors_rows(d, &halves.g2);
    let se_2 = fit_2.squared_errors_rows(d, &halves.g1);
    let bound = match cfg.bound_policy {
        BoundPolicy::FixedB(b) => b,
        BoundPolicy::PooledMax => se_1.iter().chain(&se_2).copied().fold(0.0, f64::max),
    };
    if bound == 0.0 {
        let mut zeros = vec![0u64; cfg.m];
        zeros[0] = n_l as u64;
        return LossProfile::new(zeros.clone(), zeros, 0.0, n_l);
    }
    let counts_1 = discretize_losses(&se_1, cfg.m, bound)?;
    let counts_2 = discretize_losses(&se_2, cfg.m, bound)?;
    LossProfile::new(counts_1, counts_2, bound, n_l)
}

/// Identifies outer replicate `outer` at design point index `point`.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct ReplicateKey {
    pub seed: u64,
    pub point: usize,
    pub outer: usize,
}

/// r_{b1}(n_l): for each interval the mean of |nu_1j - nu_2j| over b1 inner
/// replicates, summed over intervals. Inner replicate b uses the stream
/// `(seed, point, outer, b)`.
///
/// Reduction order: per interval the gaps are summed over b = 0..b1 and
/// divided by b1; those means are then summed over j = 0..m.
#[allow(clippy::too_many_arguments)]
pub fn r_b1(
    d: &Dataset,
    n_l: usize,
    model: &[usize],
    cfg: &DiscretizationConfig,
    b1: usize,
    stratified: bool,
    key: ReplicateKey,
) -> Result<f64> {
    if b1 == 0 {
        return Err(Error::InvalidConfig("b1 must be at least 1".into()));
    }
    let mut acc = vec![0.0; cfg.m];
    for b in 0..b1 {
        let mut rng = rng::bootstrap_stream(key.seed, key.point, key.outer, b);
        let profile = inner_replicate(d, n_l, model, cfg, stratified, &mut rng)?;
        for (a, g) in acc.iter_mut().zip(replicate_gap(&profile)) {
            *a += g;
        }
    }
    Ok(acc.iter().map(|a| a / b1 as f64).sum())
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct XiPoint {
    pub n_l: usize,
    pub xi_hat: f64,
    /// r_{b1,i}(n_l) for i = 1..b2; may be empty for curves read from files
    /// that carry only xi_hat.
    #[serde(default)]
    pub replicates: Vec<f64>,
}

/// One xi_hat per design point, in increasing n_l.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct XiCurve {
    pub points: Vec<XiPoint>,
}

impl XiCurve {
    /// Curve without replicate detail, e.g. for synthetic fitting problems.
    pub fn from_values(design: &[usize], xi: &[f64]) -> Result<Self> {
        if design.len() != xi.len() {
            return Err(Error::LengthMismatch {
                what: "xi values",
                expected: design.len(),
                got: xi.len(),
            });
        }
        Ok(XiCurve {
            points: design
                .iter()
                .zip(xi)
                .map(|(&n_l, &xi_hat)| XiPoint {
                    n_l,
                    xi_hat,
                    replicates: Vec::new(),
                })
                .collect(),
        })
    }

    pub fn len(&self) -> usize {
        self.points.len()
    }

    pub fn is_empty(&self) -> bool {
        self.points.is_empty()
    }

    pub fn design(&self) -> Vec<usize> {
        self.points.iter().map(|p| p.n_l).collect()
    }

    pub fn values(&self) -> Vec<f64> {
        self.points.iter().map(|p| p.xi_hat).collect()
    }

    /// Tab-separated `n_l, xi_hat, r_1..r_b2` with a header row.
    pub fn to_tsv(&self) -> String {
        let b2 = self.points.iter().map(|p| p.replicates.len()).max().unwrap_or(0);
        let mut out = String::from("n_l\txi_hat");
        for i in 1..=b2 {
            write!(out, "\tr_{i}").unwrap();
        }
        out.push('\n');
        for p in &self.points {
            write!(out, "{}\t{}", p.n_l, p.xi_hat).unwrap();
            for r in &p.replicates {
                write!(out, "\t{r}").unwrap();
            }
            out.push('\n');
        }
        out
    }

    pub fn from_tsv(text: &str) -> Result<Self> {
        let mut lines = text.lines().enumerate().filter(|(_, l)| !l.trim().is_empty());
        match lines.next() {
            Some((_, h)) if h.starts_with("n_l") => {}
            _ => {
                return Err(Error::Parse {
                    row: 0,
                    column: "n_l".into(),
                    message: "missing header".into(),
                })
            }
        }
        let parse_err = |row: usize, column: &str, message: String| Error::Parse {
            row,
            column: column.into(),
            message,
        };
        let points = lines
            .map(|(row, line)| {
                let mut fields = line.split('\t');
                let n_l = fields
                    .next()
                    .unwrap_or("")
                    .trim()
                    .parse::<usize>()
                    .map_err(|e| parse_err(row, "n_l", e.to_string()))?;
                let xi_hat = fields
                    .next()
                    .unwrap_or("")
                    .trim()
                    .parse::<f64>()
                    .map_err(|e| parse_err(row, "xi_hat", e.to_string()))?;
                let replicates = fields
                    .map(|f| f.trim().parse::<f64>())
                    .collect::<std::result::Result<Vec<_>, _>>()
                    .map_err(|e| parse_err(row, "r", e.to_string()))?;
                Ok(XiPoint {
                    n_l,
                    xi_hat,
                    replicates,
                })
            })
            .collect::<Result<Vec<_>>>()?;
        Ok(XiCurve { points })
    }
}

/// Runs the double bootstrap for `model` at every design point.
pub fn xi_curve(
    d: &Dataset,
    model: &[usize],
    dp: &DesignPoints,
    cfg: &DiscretizationConfig,
    bcfg: &BootstrapConfig,
) -> Result<XiCurve> {
    cfg.validate()?;
    bcfg.validate()?;
    d.check_columns(model)?;
    if bcfg.stratified && d.blocks().is_none() {
        return Err(Error::InvalidConfig("stratified bootstrap needs block labels".into()));
    }
    let points = dp.points();
    let b2 = bcfg.b2;
    let replicates: Vec<f64> = (0..points.len() * b2)
        .into_par_iter()
        .map(|task| {
            let (point, outer) = (task / b2, task % b2);
            let key = ReplicateKey {
                seed: bcfg.seed,
                point,
                outer,
            };
            r_b1(d, points[point], model, cfg, bcfg.b1, bcfg.stratified, key)
        })
        .collect::<Result<_>>()?;
    let points = points
        .iter()
        .zip(replicates.chunks(b2))
        .map(|(&n_l, rs)| XiPoint {
            n_l,
            xi_hat: rs.iter().sum::<f64>() / b2 as f64,
            replicates: rs.to_vec(),
        })
        .collect();
    Ok(XiCurve { points })
}
