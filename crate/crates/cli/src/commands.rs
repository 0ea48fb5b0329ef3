use std::fmt::Write as _;

use anyhow::{bail, Context, Result};
use log::info;
use serde::Serialize;

use vcdim::config::{BoundPolicy, Config, DesignPoints, SelectionRule};
use vcdim::io::{load_csv, write_csv, CsvSpec};
use vcdim::linmod::{sphere, standardize, Standardizer};
use vcdim::modelselect::{corr_order, sweep, NestedModelList, SelectionReport, SweepParams};
use vcdim::simgen::{simulate, SimulationConfig};
use vcdim::vcfit::fit_vc;
use vcdim::xi::{xi_curve, XiCurve};
use vcdim::Dataset;

use crate::cli::{
    AnalysisArgs, CompareArgs, DataArgs, FitArgs, GeneratorArgs, Order, Rule, SelectArgs,
    SimulateArgs, XiArgs,
};
use crate::manifest::Recorder;

/// Config file (or defaults) with every flag given on the command line
/// applied on top.
pub fn resolve_config(a: &AnalysisArgs) -> Result<Config> {
    let mut cfg = match &a.config {
        Some(path) => Config::load(path).with_context(|| format!("loading {}", path.display()))?,
        None => Config::default(),
    };
    if let Some(points) = &a.design_points {
        cfg.design_points = Some(DesignPoints::new(points.clone())?);
    }
    if let Some(m) = a.m {
        cfg.discretization.m = m;
    }
    if let Some(b) = a.fixed_bound {
        cfg.discretization.bound_policy = BoundPolicy::FixedB(b);
    }
    if let Some(b1) = a.b1 {
        cfg.bootstrap.b1 = b1;
    }
    if let Some(b2) = a.b2 {
        cfg.bootstrap.b2 = b2;
    }
    if let Some(seed) = a.seed {
        cfg.bootstrap.seed = seed;
    }
    if let Some(v) = a.c_min {
        cfg.c_grid.c_min = v;
    }
    if let Some(v) = a.c_max {
        cfg.c_grid.c_max = v;
    }
    if let Some(v) = a.c_step {
        cfg.c_grid.c_step = v;
    }
    if a.d_max.is_some() {
        cfg.d_max = a.d_max;
    }
    if let Some(eta) = a.eta {
        cfg.eta = eta;
    }
    if let Some(folds) = a.folds {
        cfg.folds = folds;
    }
    if let Some(rule) = a.rule {
        cfg.selection.rule = match rule {
            Rule::Local => SelectionRule::SmallestLocalMin,
            Rule::Global => SelectionRule::GlobalMin,
        };
    }
    if let Some(t) = a.t {
        cfg.selection.t = t;
    }
    cfg.validate()?;
    Ok(cfg)
}

fn load_data(args: &DataArgs, rec: &mut Recorder) -> Result<Dataset> {
    let spec = CsvSpec {
        response: args.response.clone(),
        block: args.block_column.clone(),
        covariates: args.columns.clone(),
    };
    let mut d = load_csv(&args.data, &spec)?;
    rec.input(&args.data)?;
    if args.standardize {
        d = standardize(&d)?.0;
    }
    if args.sphere {
        d = sphere(&d)?;
    }
    info!("{} rows, {} covariates", d.n(), d.n_cols());
    Ok(d)
}

fn generator(g: &GeneratorArgs, seed: u64) -> SimulationConfig {
    SimulationConfig {
        p: g.p,
        n: g.n,
        sigma_eps: g.sigma_eps,
        mu_beta: g.mu_beta,
        sigma_beta: g.sigma_beta,
        mu_x: g.mu_x,
        sigma_x: g.sigma_x,
        decoys: g.decoys,
        seed,
    }
}

#[derive(Serialize)]
struct Truth<'a> {
    beta: &'a [f64],
    standardized_slopes: Vec<f64>,
    standardizer: &'a Standardizer,
}

pub fn simulate_cmd(args: &SimulateArgs) -> Result<()> {
    let mut rec = Recorder::new(&args.out)?;
    let cfg = generator(&args.gen, args.seed);
    rec.config(&cfg, args.seed)?;
    let sim = simulate(&cfg)?;
    write_csv(&sim.data, "y", &rec.path("data.csv"))?;
    rec.record_output("data.csv");
    rec.write_json(
        "truth.json",
        &Truth {
            beta: &sim.beta,
            standardized_slopes: sim.standardized_slopes(),
            standardizer: &sim.standardizer,
        },
    )?;
    rec.finish()
}

pub fn xi_cmd(args: &XiArgs) -> Result<()> {
    let mut rec = Recorder::new(&args.out)?;
    let mut cfg = resolve_config(&args.analysis)?;
    cfg.bootstrap.stratified = args.data.block_column.is_some();
    rec.config(&cfg, cfg.bootstrap.seed)?;
    let d = load_data(&args.data, &mut rec)?;
    let Some(dp) = &cfg.design_points else {
        bail!(vcdim::Error::InvalidConfig("design points are required".into()));
    };
    dp.check_against(d.n(), cfg.design_multiple);
    let model: Vec<usize> = (0..d.n_cols()).collect();
    let curve = xi_curve(&d, &model, dp, &cfg.discretization, &cfg.bootstrap)?;
    rec.write("xi.tsv", &curve.to_tsv())?;
    rec.finish()
}

pub fn fit_cmd(args: &FitArgs) -> Result<()> {
    let mut rec = Recorder::new(&args.out)?;
    let cfg = resolve_config(&args.analysis)?;
    rec.config(&cfg, cfg.bootstrap.seed)?;
    let text = std::fs::read_to_string(&args.curve).map_err(vcdim::Error::from)?;
    let curve = XiCurve::from_tsv(&text)?;
    rec.input(&args.curve)?;
    let est = fit_vc(&curve, &cfg.c_grid, cfg.d_max)?;
    if args.trace {
        rec.write("trace.tsv", &est.trace_tsv())?;
    }
    rec.write_json("estimate.json", &est.without_trace())?;
    rec.finish()
}

fn model_list(d: &Dataset, order: Order) -> Result<NestedModelList> {
    Ok(match order {
        Order::Correlation => corr_order(d)?,
        Order::File => NestedModelList::identity(d)?,
    })
}

fn write_report(rec: &mut Recorder, stem: &str, report: &SelectionReport) -> Result<()> {
    rec.write(&format!("{stem}.tsv"), &report.to_tsv())?;
    rec.write_json(&format!("{stem}.json"), report)
}

pub fn select_cmd(args: &SelectArgs) -> Result<()> {
    let mut rec = Recorder::new(&args.out)?;
    let mut cfg = resolve_config(&args.analysis)?;
    cfg.bootstrap.stratified = args.data.block_column.is_some();
    rec.config(&cfg, cfg.bootstrap.seed)?;
    let d = load_data(&args.data, &mut rec)?;
    let params = SweepParams::from_config(&cfg)?;
    let list = model_list(&d, args.order)?;
    let report = sweep(&d, &list, &params)?;
    write_report(&mut rec, "report", &report)?;
    rec.finish()
}

#[derive(Serialize)]
struct CompareConfig<'a> {
    simulation: SimulationConfig,
    seeds: u64,
    first_seed: u64,
    analysis: &'a Config,
}

pub fn compare_cmd(args: &CompareArgs) -> Result<()> {
    if args.analysis.seed.is_some() {
        bail!(vcdim::Error::InvalidConfig(
            "compare resamples each dataset with its own seed; use --first-seed".into()
        ));
    }
    let mut rec = Recorder::new(&args.out)?;
    let cfg = resolve_config(&args.analysis)?;
    let base = generator(&args.gen, args.first_seed);
    rec.config(
        &CompareConfig {
            simulation: base.clone(),
            seeds: args.seeds,
            first_seed: args.first_seed,
            analysis: &cfg,
        },
        args.first_seed,
    )?;
    let p = args.gen.p;
    let names = ["vcd", "erm1", "erm2", "aic", "bic", "cv"];
    let mut hits = [0u64; 6];
    let mut picks = String::from("seed\tvcd\term1\term2\taic\tbic\tcv\td_hat_at_p\n");
    for seed in args.first_seed..args.first_seed + args.seeds {
        let sim = simulate(&SimulationConfig { seed, ..base.clone() })?;
        let mut params = SweepParams::from_config(&cfg)?;
        params.bootstrap.seed = seed;
        let list = model_list(&sim.data, args.order)?;
        let report = sweep(&sim.data, &list, &params)?;
        let s = &report.selected;
        let chosen = [s.vcd, Some(s.erm1), Some(s.erm2), Some(s.aic), Some(s.bic), Some(s.cv)];
        for (h, q) in hits.iter_mut().zip(chosen) {
            *h += u64::from(q == Some(p));
        }
        let cells: Vec<String> = chosen
            .iter()
            .map(|q| q.map_or_else(|| "NA".to_string(), |q| q.to_string()))
            .collect();
        let d_at_p = report.rows.get(p - 1).map_or(f64::NAN, |r| r.d_hat);
        writeln!(picks, "{seed}\t{}\t{d_at_p}", cells.join("\t")).unwrap();
        rec.write(&format!("report_seed{seed}.tsv"), &report.to_tsv())?;
        info!("seed {seed}: {s:?}");
    }
    let mut tally = String::from("criterion\ttrue_model_picked\tdatasets\n");
    for (name, h) in names.iter().zip(hits) {
        writeln!(tally, "{name}\t{h}\t{}", args.seeds).unwrap();
    }
    rec.write("picks.tsv", &picks)?;
    rec.write("tally.tsv", &tally)?;
    rec.finish()
}
