//! Grid check of the positive-real property and the IFP index estimate.

use pfc_sync::lti::{partial_fraction_decompose, DecomposeOptions, RationalSiso};
use pfc_sync::passivity::{check_positive_real, sweep, FrequencyGrid, GridSpec};

fn main() -> pfc_sync::error::Result<()> {
    let plant = RationalSiso::new(vec![1.0], vec![1.0, 1.0, 0.25])?;
    let sys = partial_fraction_decompose(&plant, &DecomposeOptions::default())?.system;
    let grid = FrequencyGrid::for_system(&sys, &GridSpec::default())?;
    let verdict = check_positive_real(&sys, &grid)?;
    println!("positive real: {}", verdict.is_positive_real);
    println!("margin {:.6} at omega {:.4}", verdict.margin, verdict.worst_frequency);
    println!("IFP index estimate {:.6}", verdict.ifp_index);

    let coarse = FrequencyGrid::logarithmic(1e-2, 1e2, 9)?;
    let (points, _) = sweep(&sys, &coarse)?;
    for p in points {
        println!("{:>10.4} {:>12.6}", p.omega, p.min_eigenvalue);
    }
    Ok(())
}
