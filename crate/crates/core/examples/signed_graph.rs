//! Laplacian analysis and OFP radius of a signed, weight-balanced digraph.

use pfc_sync::signed_graph::{analyze, ofp_certificate, Edge, SignedDigraph};

fn main() -> pfc_sync::error::Result<()> {
    let e = |from, to, weight| Edge { from, to, weight };
    let g = SignedDigraph::from_edges(
        4,
        &[e(2, 0, 1.0), e(3, 0, -2.0), e(0, 1, 1.0), e(0, 2, -2.0), e(1, 2, 1.0), e(2, 3, -2.0)],
    )?;
    let a = analyze(&g);
    println!("Laplacian:{}", a.laplacian);
    println!("balanced {} / strongly connected {} / simple zero {}", a.weight_balanced, a.strongly_connected, a.zero_is_simple);
    println!("inertia of symmetric part: {:?}", a.inertia);
    if let Some(r) = a.ofp_radius {
        println!("OFP radius r = {r:.12}");
        println!("certificate at r: {:.3e}", ofp_certificate(&a.laplacian, r));
        println!("certificate at r/2: {:.3e}", ofp_certificate(&a.laplacian, r / 2.0));
    }
    Ok(())
}
