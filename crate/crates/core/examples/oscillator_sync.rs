//! Output synchronization of oscillators over a signed graph, with and
//! without a static compensator sized from the OFP radius.

use nalgebra::DMatrix;
use pfc_sync::netsim::{simulate, Compensator, SimSettings};
use pfc_sync::scenarios::{example4_config, example4_laplacian};
use pfc_sync::signed_graph::compute_ofp_radius;

fn main() -> pfc_sync::error::Result<()> {
    let r = compute_ofp_radius(&example4_laplacian())?;
    println!("OFP radius {r:.6}");
    let settings = SimSettings::default();
    for nu in [None, Some(r + 0.5)] {
        let pfc = nu.map_or(Vec::new(), |v| vec![Compensator::Static(DMatrix::from_element(1, 1, v)); 4]);
        let (log, m) = simulate(&example4_config(pfc, settings)?)?;
        println!(
            "nu {nu:?}: diverged {} at t = {:.2}, sync error {:.3e} -> {:.3e}",
            log.diverged,
            log.times.last().unwrap(),
            m.sync_error[0],
            m.final_sync_error
        );
    }
    Ok(())
}
