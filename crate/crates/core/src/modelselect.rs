//! Nested model lists, criterion sweeps and the VC selection rule.

use std::fmt::Write as _;

use log::{debug, warn};
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::config::{
    BootstrapConfig, CGrid, Config, DesignPoints, DiscretizationConfig, SelectionConfig, SelectionRule,
};
use crate::criteria::{aic, bic, erm1, erm2, kfold_cv, ErmInputs};
use crate::data::Dataset;
use crate::error::{Error, Result};
use crate::linmod::{ols_fit, squared_errors};
use crate::vcfit::fit_vc;
use crate::xi::xi_curve;

/// Column inclusion order; model q uses the first q columns plus the
/// intercept.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct NestedModelList {
    order: Vec<usize>,
}

impl NestedModelList {
    pub fn new(order: Vec<usize>) -> Result<Self> {
        if order.is_empty() {
            return Err(Error::InvalidConfig("model list is empty".into()));
        }
        let mut seen = order.clone();
        seen.sort_unstable();
        if seen.windows(2).any(|w| w[0] == w[1]) {
            return Err(Error::InvalidConfig("model list repeats a column".into()));
        }
        Ok(NestedModelList { order })
    }

    /// Orders the named columns verbatim.
    pub fn from_names<S: AsRef<str>>(d: &Dataset, names: &[S]) -> Result<Self> {
        let order = names
            .iter()
            .map(|n| d.column_index(n.as_ref()))
            .collect::<Result<Vec<_>>>()?;
        NestedModelList::new(order)
    }

    /// Columns in dataset order.
    pub fn identity(d: &Dataset) -> Result<Self> {
        NestedModelList::new((0..d.n_cols()).collect())
    }

    pub fn order(&self) -> &[usize] {
        &self.order
    }

    /// Largest model size Q.
    pub fn len(&self) -> usize {
        self.order.len()
    }

    pub fn is_empty(&self) -> bool {
        self.order.is_empty()
    }

    /// Columns of model `q` (1-based).
    pub fn model(&self, q: usize) -> &[usize] {
        &self.order[..q]
    }
}

fn pearson(a: &[f64], b: &[f64]) -> f64 {
    let n = a.len() as f64;
    let ma = a.iter().sum::<f64>() / n;
    let mb = b.iter().sum::<f64>() / n;
    let (mut sab, mut saa, mut sbb) = (0.0, 0.0, 0.0);
    for (x, y) in a.iter().zip(b) {
        let (dx, dy) = (x - ma, y - mb);
        sab += dx * dy;
        saa += dx * dx;
        sbb += dy * dy;
    }
    sab / (saa.sqrt() * sbb.sqrt())
}

/// |Pearson correlation| of every covariate with the response.
pub fn abs_correlations(d: &Dataset) -> Result<Vec<f64>> {
    let y = d.y();
    let flat = |v: &[f64]| v.iter().all(|x| *x == v[0]);
    if flat(y) {
        return Err(Error::ZeroVariance("<response>".into()));
    }
    (0..d.n_cols())
        .map(|j| {
            let col = d.column(j);
            if flat(col) {
                Err(Error::ZeroVariance(d.names()[j].clone()))
            } else {
                Ok(pearson(col, y).abs())
            }
        })
        .collect()
}

/// Columns by decreasing |corr(x_j, y)|; ties keep the lower column index.
pub fn corr_order(d: &Dataset) -> Result<NestedModelList> {
    let r = abs_correlations(d)?;
    let mut order: Vec<usize> = (0..d.n_cols()).collect();
    order.sort_by(|&a, &b| r[b].total_cmp(&r[a]));
    NestedModelList::new(order)
}

/// Everything a sweep needs besides the data and the model list.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SweepParams {
    pub design_points: DesignPoints,
    pub discretization: DiscretizationConfig,
    pub bootstrap: BootstrapConfig,
    pub c_grid: CGrid,
    pub d_max: Option<f64>,
    pub eta: f64,
    pub folds: usize,
    pub selection: SelectionConfig,
    /// Allowed ratio 2·n_L / n before a warning is logged.
    pub design_multiple: f64,
}

impl SweepParams {
    pub fn new(design_points: DesignPoints) -> Self {
        SweepParams {
            design_points,
            discretization: DiscretizationConfig::default(),
            bootstrap: BootstrapConfig::default(),
            c_grid: CGrid::default(),
            d_max: None,
            eta: 0.05,
            folds: 10,
            selection: SelectionConfig::default(),
            design_multiple: 2.0,
        }
    }

    /// Fails when the configuration has no design points.
    pub fn from_config(cfg: &Config) -> Result<Self> {
        cfg.validate()?;
        let design_points = cfg
            .design_points
            .clone()
            .ok_or_else(|| Error::InvalidConfig("design points are required".into()))?;
        Ok(SweepParams {
            design_points,
            discretization: cfg.discretization,
            bootstrap: cfg.bootstrap,
            c_grid: cfg.c_grid,
            d_max: cfg.d_max,
            eta: cfg.eta,
            folds: cfg.folds,
            selection: cfg.selection,
            design_multiple: cfg.design_multiple,
        })
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ReportRow {
    pub q: usize,
    /// Column added at this size.
    pub added: String,
    pub d_hat: f64,
    pub c_hat: f64,
    pub objective: f64,
    /// |q - round_half_even(d_hat)|.
    pub gap: u64,
    pub rss: f64,
    pub erm1: f64,
    pub erm2: f64,
    pub aic: f64,
    pub bic: f64,
    pub cv: f64,
}

/// Model size chosen by each criterion.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct Selected {
    /// `None` when a positive threshold t admits no model.
    pub vcd: Option<usize>,
    pub erm1: usize,
    pub erm2: usize,
    pub aic: usize,
    pub bic: usize,
    pub cv: usize,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SelectionReport {
    pub rows: Vec<ReportRow>,
    pub selected: Selected,
    pub params: SweepParams,
}

impl SelectionReport {
    pub fn gaps(&self) -> Vec<u64> {
        self.rows.iter().map(|r| r.gap).collect()
    }

    /// One row per model size, with a column naming the criteria that pick
    /// that size.
    pub fn to_tsv(&self) -> String {
        let mut out = String::from(
            "size\tadded\td_hat\tc_hat\tgap\term1\term2\taic\tbic\tcv\tselected_by\n",
        );
        let s = &self.selected;
        for r in &self.rows {
            let picks: Vec<&str> = [
                (s.vcd == Some(r.q), "vcd"),
                (s.erm1 == r.q, "erm1"),
                (s.erm2 == r.q, "erm2"),
                (s.aic == r.q, "aic"),
                (s.bic == r.q, "bic"),
                (s.cv == r.q, "cv"),
            ]
            .iter()
            .filter(|(hit, _)| *hit)
            .map(|(_, name)| *name)
            .collect();
            writeln!(
                out,
                "{}\t{}\t{}\t{}\t{}\t{}\t{}\t{}\t{}\t{}\t{}",
                r.q,
                r.added,
                r.d_hat,
                r.c_hat,
                r.gap,
                r.erm1,
                r.erm2,
                r.aic,
                r.bic,
                r.cv,
                picks.join(",")
            )
            .unwrap();
        }
        out
    }
}

/// |q - d_hat| with d_hat rounded half to even.
pub fn size_gap(q: usize, d_hat: f64) -> u64 {
    (q as f64 - d_hat.round_ties_even()).abs() as u64
}

/// Applies the VC selection rule to g(q), q = 1..Q. Returns the chosen q.
///
/// With t > 0 the smallest q with g(q) <= t wins. With t = 0,
/// `SmallestLocalMin` returns the first q whose g is no larger than its
/// neighbours (only existing neighbours count) and `GlobalMin` the first
/// argmin.
pub fn select_from_gaps(g: &[u64], cfg: &SelectionConfig) -> Result<usize> {
    if g.is_empty() {
        return Err(Error::InvalidConfig("empty report".into()));
    }
    if cfg.t > 0.0 {
        return g
            .iter()
            .position(|&v| v as f64 <= cfg.t)
            .map(|i| i + 1)
            .ok_or(Error::NoModelWithinT(cfg.t));
    }
    let idx = match cfg.rule {
        SelectionRule::SmallestLocalMin => (0..g.len())
            .find(|&i| {
                let left = i == 0 || g[i] <= g[i - 1];
                let right = i + 1 == g.len() || g[i] <= g[i + 1];
                left && right
            })
            .expect("a finite sequence has a local minimum"),
        SelectionRule::GlobalMin => argmin(g.iter().map(|&v| v as f64)),
    };
    Ok(idx + 1)
}

pub fn select_vc(report: &SelectionReport, cfg: &SelectionConfig) -> Result<usize> {
    select_from_gaps(&report.gaps(), cfg)
}

/// First index of the smallest value.
fn argmin(values: impl Iterator<Item = f64>) -> usize {
    values
        .enumerate()
        .fold((0, f64::INFINITY), |best, (i, v)| if v < best.1 { (i, v) } else { best })
        .0
}

/// Scores every model of the nested list: d_hat from the xi curve and bound
/// fit, ERM1/ERM2 with d = d_hat, AIC/BIC with k = q + 1, and k-fold CV.
/// Every model shares the bootstrap seed, so the models see the same
/// resamples.
pub fn sweep(d: &Dataset, list: &NestedModelList, params: &SweepParams) -> Result<SelectionReport> {
    d.check_columns(list.order())?;
    params.selection.validate()?;
    params
        .design_points
        .check_against(d.n(), params.design_multiple);
    let n = d.n();
    let rows: Vec<ReportRow> = (1..=list.len())
        .into_par_iter()
        .map(|q| {
            let model = list.model(q);
            let curve = xi_curve(
                d,
                model,
                &params.design_points,
                &params.discretization,
                &params.bootstrap,
            )?;
            let est = fit_vc(&curve, &params.c_grid, params.d_max)?;
            let fit = ols_fit(d, model)?;
            let rss: f64 = squared_errors(&fit, d)?.iter().sum();
            let inputs = ErmInputs {
                r_emp: rss / n as f64,
                n,
                m: params.discretization.m,
                eta: params.eta,
                d: est.d_hat,
            };
            let row = ReportRow {
                q,
                added: d.names()[model[q - 1]].clone(),
                d_hat: est.d_hat,
                c_hat: est.c_hat,
                objective: est.objective,
                gap: size_gap(q, est.d_hat),
                rss,
                erm1: erm1(&inputs)?,
                erm2: erm2(&inputs)?,
                aic: aic(rss, n, q + 1),
                bic: bic(rss, n, q + 1),
                cv: kfold_cv(d, model, params.folds, params.bootstrap.seed)?,
            };
            debug!("q = {q}: d_hat = {:.3}, c_hat = {:.2}", row.d_hat, row.c_hat);
            Ok(row)
        })
        .collect::<Result<_>>()?;

    let gaps: Vec<u64> = rows.iter().map(|r| r.gap).collect();
    let vcd = match select_from_gaps(&gaps, &params.selection) {
        Ok(q) => Some(q),
        Err(Error::NoModelWithinT(t)) => {
            warn!("no model has |q - d_hat| <= {t}");
            None
        }
        Err(e) => return Err(e),
    };
    let pick = |f: fn(&ReportRow) -> f64| argmin(rows.iter().map(f)) + 1;
    let selected = Selected {
        vcd,
        erm1: pick(|r| r.erm1),
        erm2: pick(|r| r.erm2),
        aic: pick(|r| r.aic),
        bic: pick(|r| r.bic),
        cv: pick(|r| r.cv),
    };
    Ok(SelectionReport {
        rows,
        selected,
        params: params.clone(),
    })
}
