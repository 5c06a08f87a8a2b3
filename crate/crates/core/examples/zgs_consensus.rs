//! Zero-gradient-sum flows reach the minimizer of a sum of quadratics.

use pfc_sync::netsim::{simulate, zgs_invariant, zgs_optimum};
use pfc_sync::scenarios::{zgs_config, zgs_objectives, ScenarioOptions};

fn main() -> pfc_sync::error::Result<()> {
    let fns = zgs_objectives();
    println!("optimum {:.10}", zgs_optimum(&fns));
    for sigma in [0.1, 1.0, 10.0] {
        let (log, m) = simulate(&zgs_config(sigma, &ScenarioOptions::default())?)?;
        println!(
            "sigma {sigma:>4}: consensus {:?}, gradient-sum drift {:.2e}, settled at {:?}",
            m.consensus_value,
            zgs_invariant(&log, &fns)?,
            m.settled_time
        );
    }
    Ok(())
}
