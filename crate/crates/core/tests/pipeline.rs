use vcdim::config::{BootstrapConfig, DesignPoints, DiscretizationConfig};
use vcdim::data::Blocks;
use vcdim::modelselect::{corr_order, sweep, SweepParams};
use vcdim::simgen::{simulate, SimulationConfig};
use vcdim::xi::xi_curve;
use vcdim::{CGrid, Dataset};

fn slope(x: &[f64], y: &[f64]) -> f64 {
    let n = x.len() as f64;
    let (mx, my) = (x.iter().sum::<f64>() / n, y.iter().sum::<f64>() / n);
    let sxy: f64 = x.iter().zip(y).map(|(a, b)| (a - mx) * (b - my)).sum();
    let sxx: f64 = x.iter().map(|a| (a - mx).powi(2)).sum();
    sxy / sxx
}

#[test]
fn xi_shrinks_with_subsample_size() {
    let design = vec![20, 40, 80, 120, 200];
    let dp = DesignPoints::new(design.clone()).unwrap();
    let x: Vec<f64> = design.iter().map(|&v| v as f64).collect();
    let seeds = 30;
    let mut falling = 0;
    for seed in 0..seeds {
        let sim = simulate(&SimulationConfig {
            seed,
            ..SimulationConfig::new(3, 200)
        })
        .unwrap();
        let boot = BootstrapConfig {
            b1: 5,
            b2: 5,
            seed,
            stratified: false,
        };
        let curve = xi_curve(&sim.data, &[0, 1, 2], &dp, &DiscretizationConfig::default(), &boot).unwrap();
        if slope(&x, &curve.values()) < 0.0 {
            falling += 1;
        }
    }
    assert!(falling * 10 >= seeds * 9, "xi fell with n_l in only {falling} of {seeds} seeds");
}

fn blocked() -> Dataset {
    let sim = simulate(&SimulationConfig {
        seed: 8,
        decoys: 1,
        ..SimulationConfig::new(2, 90)
    })
    .unwrap();
    let labels: Vec<String> = (0..90).map(|i| ["a", "b", "c"][i % 3].to_string()).collect();
    let cols: Vec<Vec<f64>> = (0..3).map(|j| sim.data.column(j).to_vec()).collect();
    Dataset::from_columns(
        sim.data.y().to_vec(),
        &cols,
        sim.data.names().to_vec(),
        Some(Blocks::from_labels(&labels)),
    )
    .unwrap()
}

#[test]
fn stratified_sweep_runs_and_repeats() {
    let d = blocked();
    let mut params = SweepParams::new(DesignPoints::new(vec![15, 30, 60, 90]).unwrap());
    params.bootstrap = BootstrapConfig {
        b1: 3,
        b2: 3,
        seed: 1,
        stratified: true,
    };
    params.c_grid = CGrid {
        c_min: 0.01,
        c_max: 10.0,
        c_step: 0.01,
    };
    let list = corr_order(&d).unwrap();
    let a = sweep(&d, &list, &params).unwrap();
    assert_eq!(a.rows.len(), 3);
    assert_eq!(a, sweep(&d, &list, &params).unwrap());
    params.bootstrap.stratified = false;
    assert_ne!(a.rows, sweep(&d, &list, &params).unwrap().rows);
}

#[test]
fn design_point_below_level_count_is_rejected() {
    let d = blocked();
    let boot = BootstrapConfig {
        b1: 1,
        b2: 1,
        seed: 0,
        stratified: true,
    };
    let dp = DesignPoints::new(vec![2, 30]).unwrap();
    let err = xi_curve(&d, &[0], &dp, &DiscretizationConfig::default(), &boot).unwrap_err();
    assert!(matches!(err, vcdim::Error::DesignPointTooSmall { n_l: 2, levels: 3 }));
}
