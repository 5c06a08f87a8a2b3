//! Seeded random generators for plants and graphs used by the property
//! tests and the randomized sweeps.
//!
//! Every generator draws from a [`ChaCha8Rng`]; [`seeded_rng`] honors the
//! `PFC_SYNC_SEED` environment variable so failing draws can be replayed.

use nalgebra::DMatrix;
use num_complex::Complex64;
use rand::seq::SliceRandom;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::lti::{CMatrix, PoleChain, PoleResidueSystem};
use crate::signed_graph::{analyze, Edge, SignedDigraph};

pub const SEED_ENV: &str = "PFC_SYNC_SEED";
pub const DEFAULT_SEED: u64 = 0x5eed_2024;

/// Seed from `PFC_SYNC_SEED`, falling back to [`DEFAULT_SEED`].
pub fn seed_from_env() -> u64 {
    std::env::var(SEED_ENV)
        .ok()
        .and_then(|s| s.trim().parse().ok())
        .unwrap_or(DEFAULT_SEED)
}

pub fn seeded_rng() -> ChaCha8Rng {
    ChaCha8Rng::seed_from_u64(seed_from_env())
}

fn random_pole(rng: &mut impl Rng, allow_complex: bool) -> Complex64 {
    let re = rng.random_range(0.1..=5.0);
    let im = if allow_complex && rng.random_bool(0.5) {
        rng.random_range(0.2..=5.0)
    } else {
        0.0
    };
    Complex64::new(re, im)
}

fn random_entry(rng: &mut impl Rng, complex: bool) -> Complex64 {
    let re = rng.random_range(-2.0..=2.0);
    let im = if complex { rng.random_range(-2.0..=2.0) } else { 0.0 };
    Complex64::new(re, im)
}

fn random_residue(rng: &mut impl Rng, m: usize, complex: bool, symmetric: bool) -> CMatrix {
    let mut r = CMatrix::zeros(m, m);
    for i in 0..m {
        for j in 0..m {
            if symmetric && j < i {
                r[(i, j)] = r[(j, i)];
            } else {
                r[(i, j)] = random_entry(rng, complex);
            }
        }
    }
    r
}

/// Pushes the chain at `d` and, for complex `d`, its conjugate partner.
fn push_chain(chains: &mut Vec<PoleChain>, d: Complex64, residues: Vec<CMatrix>) {
    if d.im != 0.0 {
        let conj = residues.iter().map(|r| r.map(|z| z.conj())).collect();
        chains.push(PoleChain::new(d.conj(), conj).expect("nonempty chain"));
    }
    chains.push(PoleChain::new(d, residues).expect("nonempty chain"));
}

fn random_plant(rng: &mut impl Rng, m: usize, symmetric_first: bool) -> PoleResidueSystem {
    let groups = rng.random_range(1..=3);
    let mut chains = Vec::new();
    for _ in 0..groups {
        let d = random_pole(rng, true);
        let k = rng.random_range(1..=3);
        let complex = d.im != 0.0;
        let residues = (0..k)
            .map(|i| random_residue(rng, m, complex, symmetric_first && i == 0))
            .collect();
        push_chain(&mut chains, d, residues);
    }
    PoleResidueSystem::new((m, m), chains, DMatrix::zeros(m, m)).expect("generated plant is consistent")
}

/// Strictly proper stable SISO plant: 1 to 3 pole groups with `Re d ∈ [0.1, 5]`,
/// `|Im d| ≤ 5`, chain lengths up to 3 and residues in `[−2, 2]`.
pub fn random_stable_siso(rng: &mut impl Rng) -> PoleResidueSystem {
    random_plant(rng, 1, false)
}

/// Stable square MIMO plant (size 2 or 3) whose first residue at every pole
/// is symmetric.
pub fn random_symmetric_mimo(rng: &mut impl Rng) -> PoleResidueSystem {
    let m = rng.random_range(2..=3);
    random_plant(rng, m, true)
}

/// Weight-balanced, strongly connected signed digraph with a simple zero
/// Laplacian eigenvalue.
///
/// Built as a sum of directed cycles: a positive Hamiltonian cycle for
/// connectivity plus a few random cycles whose weights may be negative.
/// Every cycle adds equal in- and out-weight at each node it visits, so the
/// sum stays balanced.
pub fn random_balanced_signed_digraph(rng: &mut impl Rng, n: usize) -> SignedDigraph {
    assert!(n >= 2, "need at least two nodes");
    loop {
        let mut a = DMatrix::<f64>::zeros(n, n);
        let mut add_cycle = |nodes: &[usize], w: f64| {
            for (i, &from) in nodes.iter().enumerate() {
                let to = nodes[(i + 1) % nodes.len()];
                a[(to, from)] += w;
            }
        };
        let mut order: Vec<usize> = (0..n).collect();
        order.shuffle(rng);
        add_cycle(&order, rng.random_range(0.5..=2.0));
        for _ in 0..rng.random_range(1..=n) {
            let len = rng.random_range(2..=n);
            let mut nodes: Vec<usize> = (0..n).collect();
            nodes.shuffle(rng);
            nodes.truncate(len);
            add_cycle(&nodes, rng.random_range(-1.0..=1.5));
        }
        let edges: Vec<Edge> = (0..n)
            .flat_map(|to| (0..n).map(move |from| (to, from)))
            .filter(|&(to, from)| to != from && a[(to, from)].abs() > 1e-12)
            .map(|(to, from)| Edge { from, to, weight: a[(to, from)] })
            .collect();
        let Ok(g) = SignedDigraph::from_edges(n, &edges) else {
            continue;
        };
        let report = analyze(&g);
        if report.weight_balanced && report.strongly_connected && report.zero_is_simple {
            return g;
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn generated_plants_are_stable() {
        let mut rng = ChaCha8Rng::seed_from_u64(1);
        for _ in 0..20 {
            let p = random_stable_siso(&mut rng);
            assert!(p.check_ifp_form().is_ok());
            assert!(p.chains().iter().all(|c| c.pole().re >= 0.1));
        }
    }

    #[test]
    fn generated_graphs_are_balanced() {
        let mut rng = ChaCha8Rng::seed_from_u64(2);
        for n in 2..7 {
            let g = random_balanced_signed_digraph(&mut rng, n);
            let l = g.laplacian();
            let col_sums = l.row_sum();
            assert!(col_sums.iter().all(|s| s.abs() < 1e-10));
        }
    }
}
