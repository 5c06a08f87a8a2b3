//! Design a parallel feedforward compensator that makes a plant passive.

use num_complex::Complex64;
use pfc_sync::lti::PoleResidueSystem;
use pfc_sync::passivity::{check_positive_real, FrequencyGrid, GridSpec};
use pfc_sync::pfc_design::design_pfc;

fn main() -> pfc_sync::error::Result<()> {
    let c = |re: f64, im: f64| Complex64::new(re, im);
    let plant = PoleResidueSystem::siso(
        &[
            (c(0.5, 0.0), vec![c(-1.0, 0.0), c(2.0, 0.0)]),
            (c(1.0, 2.0), vec![c(0.3, -0.7)]),
            (c(1.0, -2.0), vec![c(0.3, 0.7)]),
        ],
        0.0,
    )?;
    let spec = GridSpec::default();
    let before = check_positive_real(&plant, &FrequencyGrid::for_system(&plant, &spec)?)?;
    println!("plant margin {:.4e}", before.margin);

    let report = design_pfc(&plant, 1e-6)?;
    for g in &report.gains {
        println!("pole {:.3}: gain {:.6} (bound {:.6})", g.pole, g.gain, g.bound);
    }
    let sum = plant.parallel(&report.total_compensator()?)?;
    let after = check_positive_real(&sum, &FrequencyGrid::for_system(&sum, &spec)?)?;
    println!("compensated: positive real {} margin {:.4e}", after.is_positive_real, after.margin);
    Ok(())
}
