//! One simulated sweep: p = 15 true covariates, 12 decoys, n = 400.
//!
//! cargo run --release -p vcdim --example simulation_sweep -- [seed] [b]

use std::time::Instant;

use vcdim::modelselect::{sweep, NestedModelList, SweepParams};
use vcdim::simgen::{simulate, SimulationConfig};
use vcdim::{BootstrapConfig, DesignPoints};

fn main() -> vcdim::Result<()> {
    let mut args = std::env::args().skip(1);
    let seed: u64 = args.next().map_or(0, |s| s.parse().expect("seed"));
    let b: usize = args.next().map_or(50, |s| s.parse().expect("replicates"));
    let sim = simulate(&SimulationConfig {
        decoys: 12,
        seed,
        ..SimulationConfig::new(15, 400)
    })?;
    let mut params = SweepParams::new(DesignPoints::new(vec![50, 100, 150, 200, 250, 300, 400])?);
    params.bootstrap = BootstrapConfig {
        b1: b,
        b2: b,
        seed,
        stratified: false,
    };
    let start = Instant::now();
    let report = sweep(&sim.data, &NestedModelList::identity(&sim.data)?, &params)?;
    print!("{}", report.to_tsv());
    eprintln!("{:?} in {:.1?}", report.selected, start.elapsed());
    Ok(())
}
