//! Integrator agents with a proportional-derivative compensator on a signed
//! graph: the static form synchronizes, the low-pass form does not.

use pfc_sync::netsim::{assemble, simulate, SimSettings};
use pfc_sync::scenarios::pd_config;

fn main() -> pfc_sync::error::Result<()> {
    let settings = SimSettings::default();
    let cfg = pd_config(1.0, None, settings)?;
    println!("algebraic loop condition number {:.3}", assemble(&cfg)?.loop_condition());
    let (_, m) = simulate(&cfg)?;
    println!("static: final sync error {:.3e}, consensus {:?}", m.final_sync_error, m.consensus_value);

    let (log, m) = simulate(&pd_config(1.0, Some(0.05), settings)?)?;
    println!(
        "low-pass tau 0.05: diverged {} at t = {:.2}, last sync error {:.3e}",
        log.diverged,
        log.times.last().unwrap(),
        m.final_sync_error
    );
    Ok(())
}
