//! A lossless feedback loop that oscillates forever until a first-order
//! compensator is placed in parallel with the forward path.

use pfc_sync::netsim::{assemble_feedback, energy_audit, run, SimSettings};
use pfc_sync::scenarios::{example1_config, example1_storage};

fn main() -> pfc_sync::error::Result<()> {
    let settings = SimSettings::default();
    for with_pfc in [false, true] {
        let sys = assemble_feedback(&example1_config(with_pfc, settings)?)?;
        let log = run(&sys, &settings)?;
        let audit = energy_audit(&log, Some(&example1_storage(&sys)));
        let x = log.final_state().unwrap();
        let norm = x.iter().map(|v| v * v).sum::<f64>().sqrt();
        println!(
            "with compensator {with_pfc:>5}: storage {:.6} -> {:.6}, nonincreasing {}, final state norm {norm:.4e}",
            audit.values[0],
            audit.values.last().unwrap(),
            audit.nonincreasing
        );
    }
    Ok(())
}
