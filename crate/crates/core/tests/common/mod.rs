#![allow(dead_code)]

use nalgebra::DMatrix;
use num_complex::Complex64;
use pfc_sync::lti::PoleResidueSystem;

/// Smallest eigenvalue of the symmetric part of `m`.
pub fn sym_min_eig(m: &DMatrix<f64>) -> f64 {
    ((m + m.transpose()) * 0.5).symmetric_eigenvalues().min()
}

/// Feasibility of `r LᵀL + (L + Lᵀ)/2 ⪰ 0` over the full space.
pub fn radius_feasible(l: &DMatrix<f64>, r: f64) -> bool {
    let q = l.transpose() * l * r + (l + l.transpose()) * 0.5;
    sym_min_eig(&q) >= -1e-10 * q.amax().max(1.0)
}

/// Bisection for the smallest feasible `r`, independent of the
/// generalized-eigenvalue route.
pub fn bisect_radius(l: &DMatrix<f64>) -> f64 {
    let (mut lo, mut hi) = (-1.0, 1.0);
    while radius_feasible(l, lo) {
        lo *= 2.0;
    }
    while !radius_feasible(l, hi) {
        hi *= 2.0;
    }
    for _ in 0..80 {
        let mid = 0.5 * (lo + hi);
        if radius_feasible(l, mid) {
            hi = mid;
        } else {
            lo = mid;
        }
    }
    hi
}

/// Dense scan of `min_ω Re H(jω)` for a SISO system, evaluated term by term
/// from the residues (no grid refinement, no shared evaluation code).
pub fn siso_real_part_min(sys: &PoleResidueSystem, omega_max: f64, n: usize) -> (f64, f64) {
    let d = sys.feedthrough()[(0, 0)];
    let mut best = (f64::INFINITY, 0.0);
    for i in 0..n {
        let w = omega_max * i as f64 / (n - 1) as f64;
        let s = Complex64::new(0.0, w);
        let mut h = Complex64::new(d, 0.0);
        for c in sys.chains() {
            let base = s + c.pole();
            let mut pow = base;
            for r in c.residues() {
                h += r[(0, 0)] / pow;
                pow *= base;
            }
        }
        if h.re < best.0 {
            best = (h.re, w);
        }
    }
    best
}
