//! Run every built-in scenario and print the JSON report of each.

use pfc_sync::io::to_json_string;
use pfc_sync::scenarios::{run_scenario, ScenarioOptions, NAMES};

fn main() -> pfc_sync::error::Result<()> {
    let opts = ScenarioOptions::default();
    for name in NAMES {
        let outcome = run_scenario(name, &opts)?;
        println!("== {name} (diverged: {})", outcome.diverged());
        println!("{}", to_json_string(&outcome.report)?);
    }
    Ok(())
}
