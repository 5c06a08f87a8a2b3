//! Expand a rational transfer function into pole-residue chains and realize it.

use pfc_sync::lti::{partial_fraction_decompose, DecomposeOptions, RationalSiso};

fn main() -> pfc_sync::error::Result<()> {
    // (s + 3) / ((s + 1)^2 (s + 2)), ascending coefficients
    let plant = RationalSiso::new(vec![3.0, 1.0], vec![2.0, 5.0, 4.0, 1.0])?;
    let dec = partial_fraction_decompose(&plant, &DecomposeOptions::default())?;
    println!("ill-conditioned: {}", dec.ill_conditioned);
    for chain in dec.system.chains() {
        let residues: Vec<String> = chain.residues().iter().map(|r| format!("{:.6}", r[(0, 0)])).collect();
        println!("pole at s = {:.6}: residues [{}]", -chain.pole().re, residues.join(", "));
    }

    let ss = dec.system.realize()?;
    println!("realization order {}, spectral abscissa {:.6}", ss.states(), ss.spectral_abscissa());
    for w in [0.1, 1.0, 10.0] {
        let h = ss.frequency_response(w)?[(0, 0)];
        println!("omega {w:>5}: H = {h:.6} (rational {:.6})", plant.evaluate(w));
    }
    Ok(())
}
