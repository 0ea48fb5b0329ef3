//! Estimation and selection settings, plus the JSON configuration file that
//! mirrors them. Every field of the file is optional.

use std::path::Path;

use log::warn;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Strictly increasing subsample sizes n_1 < ... < n_L, L >= 2.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(try_from = "Vec<usize>", into = "Vec<usize>")]
pub struct DesignPoints(Vec<usize>);

impl DesignPoints {
    /// Sorts and deduplicates `points`, warning if the input needed either.
    pub fn new(points: Vec<usize>) -> Result<Self> {
        let mut sorted = points.clone();
        sorted.sort_unstable();
        sorted.dedup();
        if sorted != points {
            warn!("design points {points:?} were not strictly increasing; using {sorted:?}");
        }
        if sorted.first() == Some(&0) {
            return Err(Error::InvalidConfig("design points must be positive".into()));
        }
        if sorted.len() < 2 {
            return Err(Error::InvalidConfig(
                "at least two distinct design points are required".into(),
            ));
        }
        Ok(DesignPoints(sorted))
    }

    pub fn points(&self) -> &[usize] {
        &self.0
    }

    pub fn len(&self) -> usize {
        self.0.len()
    }

    pub fn is_empty(&self) -> bool {
        self.0.is_empty()
    }

    pub fn max(&self) -> usize {
        *self.0.last().expect("non-empty")
    }

    pub fn min(&self) -> usize {
        self.0[0]
    }

    /// Flags (without rejecting) a largest bootstrap sample 2·n_L above
    /// `multiple`·n. Returns whether the points are within the limit.
    pub fn check_against(&self, n: usize, multiple: f64) -> bool {
        let ok = (2 * self.max()) as f64 <= multiple * n as f64;
        if !ok {
            warn!(
                "largest bootstrap sample 2*{} exceeds {multiple}*n = {}",
                self.max(),
                multiple * n as f64
            );
        }
        ok
    }
}

impl TryFrom<Vec<usize>> for DesignPoints {
    type Error = Error;

    fn try_from(v: Vec<usize>) -> Result<Self> {
        DesignPoints::new(v)
    }
}

impl From<DesignPoints> for Vec<usize> {
    fn from(d: DesignPoints) -> Self {
        d.0
    }
}

/// How the loss upper bound B is chosen for each discretization.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize, Default)]
#[serde(rename_all = "snake_case")]
pub enum BoundPolicy {
    /// B = largest of the 2·n_l pooled squared errors of an inner replicate.
    #[default]
    PooledMax,
    FixedB(f64),
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct DiscretizationConfig {
    pub m: usize,
    pub bound_policy: BoundPolicy,
}

impl Default for DiscretizationConfig {
    fn default() -> Self {
        DiscretizationConfig {
            m: 10,
            bound_policy: BoundPolicy::PooledMax,
        }
    }
}

impl DiscretizationConfig {
    pub fn validate(&self) -> Result<()> {
        if self.m == 0 {
            return Err(Error::InvalidConfig("m must be at least 1".into()));
        }
        if let BoundPolicy::FixedB(b) = self.bound_policy {
            if !(b > 0.0 && b.is_finite()) {
                return Err(Error::InvalidConfig(format!("fixed bound {b} must be positive")));
            }
        }
        Ok(())
    }
}

/// Replicate counts of the two bootstrap layers; b1 inner, b2 outer.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct BootstrapConfig {
    pub b1: usize,
    pub b2: usize,
    pub seed: u64,
    pub stratified: bool,
}

impl Default for BootstrapConfig {
    fn default() -> Self {
        BootstrapConfig {
            b1: 50,
            b2: 50,
            seed: 0,
            stratified: false,
        }
    }
}

impl BootstrapConfig {
    pub fn validate(&self) -> Result<()> {
        if self.b1 == 0 || self.b2 == 0 {
            return Err(Error::InvalidConfig("b1 and b2 must be at least 1".into()));
        }
        if self.b1 > crate::rng::MAX_REPLICATES || self.b2 > crate::rng::MAX_REPLICATES {
            return Err(Error::InvalidConfig(format!(
                "b1 and b2 are limited to {}",
                crate::rng::MAX_REPLICATES
            )));
        }
        Ok(())
    }
}

/// Grid of scale constants c_min, c_min + step, ..., <= c_max.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct CGrid {
    pub c_min: f64,
    pub c_max: f64,
    pub c_step: f64,
}

impl Default for CGrid {
    fn default() -> Self {
        CGrid {
            c_min: 0.01,
            c_max: 100.0,
            c_step: 0.01,
        }
    }
}

impl CGrid {
    pub fn validate(&self) -> Result<()> {
        let ok = self.c_min > 0.0
            && self.c_min <= self.c_max
            && self.c_step > 0.0
            && self.c_max.is_finite();
        if ok {
            Ok(())
        } else {
            Err(Error::InvalidConfig(format!("invalid c grid {self:?}")))
        }
    }

    /// Grid values. Each is computed as c_min + k·step, so no error
    /// accumulates along the grid.
    pub fn values(&self) -> Vec<f64> {
        let count = ((self.c_max - self.c_min) / self.c_step + 1e-9).floor() as usize + 1;
        (0..count)
            .map(|k| self.c_min + k as f64 * self.c_step)
            .collect()
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize, Default)]
#[serde(rename_all = "snake_case")]
pub enum SelectionRule {
    #[default]
    SmallestLocalMin,
    GlobalMin,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize, Default)]
#[serde(default, deny_unknown_fields)]
pub struct SelectionConfig {
    /// Closeness threshold on |q - round(d_hat)|; 0 selects by `rule`.
    pub t: f64,
    pub rule: SelectionRule,
}

impl SelectionConfig {
    pub fn validate(&self) -> Result<()> {
        if self.t >= 0.0 && self.t.is_finite() {
            Ok(())
        } else {
            Err(Error::InvalidConfig(format!("threshold t = {} must be >= 0", self.t)))
        }
    }
}

/// Root of the JSON configuration file.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct Config {
    pub design_points: Option<DesignPoints>,
    pub discretization: DiscretizationConfig,
    pub bootstrap: BootstrapConfig,
    pub c_grid: CGrid,
    pub selection: SelectionConfig,
    /// Upper end of the d search; defaults to the largest design point.
    pub d_max: Option<f64>,
    pub eta: f64,
    pub folds: usize,
    /// Allowed ratio 2·n_L / n before a warning is logged.
    pub design_multiple: f64,
}

impl Default for Config {
    fn default() -> Self {
        Config {
            design_points: None,
            discretization: DiscretizationConfig::default(),
            bootstrap: BootstrapConfig::default(),
            c_grid: CGrid::default(),
            selection: SelectionConfig::default(),
            d_max: None,
            eta: 0.05,
            folds: 10,
            design_multiple: 2.0,
        }
    }
}

impl Config {
    pub fn from_json(text: &str) -> Result<Self> {
        let cfg: Config = serde_json::from_str(text)?;
        cfg.validate()?;
        Ok(cfg)
    }

    pub fn load(path: &Path) -> Result<Self> {
        Config::from_json(&std::fs::read_to_string(path)?)
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(self).expect("config serializes")
    }

    pub fn validate(&self) -> Result<()> {
        self.discretization.validate()?;
        self.bootstrap.validate()?;
        self.c_grid.validate()?;
        self.selection.validate()?;
        if !(self.eta > 0.0 && self.eta < 1.0) {
            return Err(Error::InvalidConfig(format!("eta = {} must lie in (0, 1)", self.eta)));
        }
        if self.folds < 2 {
            return Err(Error::InvalidConfig("folds must be at least 2".into()));
        }
        if let Some(d) = self.d_max {
            if !(d >= 1.0) {
                return Err(Error::InvalidConfig(format!("d_max = {d} must be >= 1")));
            }
        }
        Ok(())
    }
}
