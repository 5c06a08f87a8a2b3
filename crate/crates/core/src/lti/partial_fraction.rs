use std::f64::consts::PI;

use nalgebra::{DMatrix, DVector};
use num_complex::Complex64;

use super::{PoleChain, PoleResidueSystem};
use crate::error::{Error, Result};

/// SISO rational transfer function, coefficients in ascending powers of `s`.
#[derive(Debug, Clone, PartialEq)]
pub struct RationalSiso {
    num: Vec<f64>,
    den: Vec<f64>,
}

impl RationalSiso {
    pub fn new(num: Vec<f64>, mut den: Vec<f64>) -> Result<Self> {
        let mut num = num;
        while num.len() > 1 && num.last() == Some(&0.0) {
            num.pop();
        }
        if num.is_empty() {
            num.push(0.0);
        }
        if den.is_empty() || den.iter().all(|&x| x == 0.0) {
            return Err(Error::InvalidPolynomial("denominator is zero".into()));
        }
        if num.iter().chain(&den).any(|x| !x.is_finite()) {
            return Err(Error::InvalidPolynomial("non-finite coefficient".into()));
        }
        if den.last() == Some(&0.0) {
            // A zero leading coefficient means the declared degree is wrong.
            return Err(Error::InvalidPolynomial(
                "denominator leading coefficient is zero".into(),
            ));
        }
        den.shrink_to_fit();
        let (num_deg, den_deg) = (num.len() - 1, den.len() - 1);
        if num_deg > den_deg && num.iter().any(|&x| x != 0.0) {
            return Err(Error::NotProper {
                num: num_deg,
                den: den_deg,
            });
        }
        Ok(Self { num, den })
    }

    pub fn numerator(&self) -> &[f64] {
        &self.num
    }

    pub fn denominator(&self) -> &[f64] {
        &self.den
    }

    pub fn denominator_degree(&self) -> usize {
        self.den.len() - 1
    }

    pub fn evaluate_at(&self, s: Complex64) -> Complex64 {
        horner(&self.num, s) / horner(&self.den, s)
    }

    pub fn evaluate(&self, omega: f64) -> Complex64 {
        self.evaluate_at(Complex64::new(0.0, omega))
    }

    /// Constant term of the expansion at `s → ∞`.
    pub fn feedthrough(&self) -> f64 {
        let n = self.denominator_degree();
        if self.num.len() == n + 1 {
            self.num[n] / self.den[n]
        } else {
            0.0
        }
    }
}

fn horner(coeffs: &[f64], s: Complex64) -> Complex64 {
    coeffs
        .iter()
        .rev()
        .fold(Complex64::new(0.0, 0.0), |acc, &c| acc * s + c)
}

fn horner_with_derivative(monic: &[f64], s: Complex64) -> (Complex64, Complex64) {
    let mut p = Complex64::new(0.0, 0.0);
    let mut dp = Complex64::new(0.0, 0.0);
    for &c in monic.iter().rev() {
        dp = dp * s + p;
        p = p * s + c;
    }
    (p, dp)
}

/// Tuning knobs for [`partial_fraction_decompose`].
#[derive(Debug, Clone, Copy)]
pub struct DecomposeOptions {
    /// Roots closer than this (absolute) are merged into one repeated pole.
    pub cluster_tol: f64,
    /// Distinct poles closer than this (relative to `max(1, |p|)`) raise the
    /// ill-conditioning flag.
    pub separation_warning: f64,
}

impl Default for DecomposeOptions {
    fn default() -> Self {
        Self {
            cluster_tol: 1e-7,
            separation_warning: 1e-4,
        }
    }
}

/// Result of a partial-fraction expansion.
#[derive(Debug, Clone)]
pub struct Decomposition {
    pub system: PoleResidueSystem,
    /// Set when roots were nearly coincident or the residue fit was poor.
    pub ill_conditioned: bool,
}

struct Cluster {
    root: Complex64,
    multiplicity: usize,
}

/// Expands a proper SISO rational function into residue chains.
///
/// Roots come from companion-matrix eigenvalues, are polished by Newton's
/// method, and merged when closer than `cluster_tol`. Residues are fitted by
/// least squares on a circle of probe points enclosing every root.
pub fn partial_fraction_decompose(plant: &RationalSiso, opts: &DecomposeOptions) -> Result<Decomposition> {
    let n = plant.denominator_degree();
    if n == 0 {
        return Err(Error::InvalidPolynomial(
            "denominator degree must be at least 1".into(),
        ));
    }
    let lead = plant.den[n];
    let monic: Vec<f64> = plant.den.iter().map(|c| c / lead).collect();
    let mut ill_conditioned = false;

    let clusters = cluster_roots(&polynomial_roots(&monic), opts.cluster_tol);
    if clusters.iter().map(|c| c.multiplicity).sum::<usize>() != n {
        ill_conditioned = true;
    }
    for (i, a) in clusters.iter().enumerate() {
        for b in &clusters[i + 1..] {
            let sep = (a.root - b.root).norm();
            if sep < opts.separation_warning * a.root.norm().max(b.root.norm()).max(1.0) {
                ill_conditioned = true;
            }
        }
    }

    let feedthrough = plant.feedthrough();
    let (coeffs, fit_error) = fit_residues(plant, feedthrough, &clusters);
    if fit_error > 1e-8 {
        ill_conditioned = true;
    }

    // snap residues so the realization is real
    let mut chains = Vec::with_capacity(clusters.len());
    let mut offset = 0;
    let mut per_cluster = Vec::with_capacity(clusters.len());
    for cl in &clusters {
        per_cluster.push(coeffs[offset..offset + cl.multiplicity].to_vec());
        offset += cl.multiplicity;
    }
    for (i, cl) in clusters.iter().enumerate() {
        let mut cs = per_cluster[i].clone();
        if cl.root.im == 0.0 {
            cs.iter_mut().for_each(|c| c.im = 0.0);
        } else {
            let partner = clusters
                .iter()
                .position(|o| o.root == cl.root.conj() && o.multiplicity == cl.multiplicity)
                .ok_or_else(|| {
                    Error::Invariant(format!("root {} has no conjugate partner", cl.root))
                })?;
            // average with the mirrored partner; both sides then agree exactly
            for (k, c) in cs.iter_mut().enumerate() {
                let upper = if cl.root.im > 0.0 {
                    (*c + per_cluster[partner][k].conj()) * 0.5
                } else {
                    (per_cluster[partner][k] + c.conj()) * 0.5
                };
                *c = if cl.root.im > 0.0 { upper } else { upper.conj() };
            }
        }
        chains.push(PoleChain::new(
            -cl.root,
            cs.into_iter()
                .map(|c| DMatrix::from_element(1, 1, c))
                .collect(),
        )?);
    }

    let system = PoleResidueSystem::new((1, 1), chains, DMatrix::from_element(1, 1, feedthrough))?;
    Ok(Decomposition {
        system,
        ill_conditioned,
    })
}

fn polynomial_roots(monic: &[f64]) -> Vec<Complex64> {
    let n = monic.len() - 1;
    if n == 1 {
        return vec![Complex64::new(-monic[0], 0.0)];
    }
    let mut companion = DMatrix::<f64>::zeros(n, n);
    for i in 1..n {
        companion[(i, i - 1)] = 1.0;
    }
    for i in 0..n {
        companion[(i, n - 1)] = -monic[i];
    }
    let eig = companion.complex_eigenvalues();

    // Real Schur returns exact conjugate pairs; keep the upper half and
    // regenerate the lower half after polishing.
    let mut roots = Vec::with_capacity(n);
    for z in eig.iter().filter(|z| z.im >= 0.0) {
        let polished = newton_polish(monic, *z);
        if z.im == 0.0 {
            roots.push(Complex64::new(polished.re, 0.0));
        } else {
            roots.push(polished);
            roots.push(polished.conj());
        }
    }
    roots
}

fn newton_polish(monic: &[f64], mut z: Complex64) -> Complex64 {
    let real = z.im == 0.0;
    let (mut p, mut dp) = horner_with_derivative(monic, z);
    for _ in 0..4 {
        if dp.norm() == 0.0 || p.norm() == 0.0 {
            break;
        }
        let mut next = z - p / dp;
        if real {
            next.im = 0.0;
        }
        let (np, ndp) = horner_with_derivative(monic, next);
        if np.norm() < p.norm() {
            z = next;
            p = np;
            dp = ndp;
        } else {
            break;
        }
    }
    z
}

fn cluster_roots(roots: &[Complex64], tol: f64) -> Vec<Cluster> {
    let n = roots.len();
    let mut parent: Vec<usize> = (0..n).collect();
    fn find(parent: &mut [usize], i: usize) -> usize {
        let mut r = i;
        while parent[r] != r {
            r = parent[r];
        }
        parent[i] = r;
        r
    }
    for i in 0..n {
        for j in i + 1..n {
            if (roots[i] - roots[j]).norm() <= tol {
                let (a, b) = (find(&mut parent, i), find(&mut parent, j));
                if a != b {
                    parent[b.max(a)] = a.min(b);
                }
            }
        }
    }
    let mut groups: Vec<(usize, Vec<Complex64>)> = Vec::new();
    for i in 0..n {
        let r = find(&mut parent, i);
        match groups.iter_mut().find(|(id, _)| *id == r) {
            Some((_, members)) => members.push(roots[i]),
            None => groups.push((r, vec![roots[i]])),
        }
    }

    let mut clusters: Vec<Cluster> = groups
        .into_iter()
        .map(|(_, members)| {
            let k = members.len();
            let mean = members.iter().sum::<Complex64>() / k as f64;
            Cluster {
                root: mean,
                multiplicity: k,
            }
        })
        .collect();

    for c in &mut clusters {
        if c.root.im.abs() <= tol {
            c.root.im = 0.0;
        }
    }
    // lower-half clusters take the exact conjugate of their upper partner
    let uppers: Vec<(Complex64, usize)> = clusters
        .iter()
        .filter(|c| c.root.im > 0.0)
        .map(|c| (c.root, c.multiplicity))
        .collect();
    for c in clusters.iter_mut().filter(|c| c.root.im < 0.0) {
        if let Some((u, _)) = uppers
            .iter()
            .filter(|(_, m)| *m == c.multiplicity)
            .min_by(|a, b| {
                (a.0.conj() - c.root)
                    .norm()
                    .total_cmp(&(b.0.conj() - c.root).norm())
            })
        {
            c.root = u.conj();
        }
    }
    clusters.sort_by(|a, b| a.root.re.total_cmp(&b.root.re).then(a.root.im.total_cmp(&b.root.im)));
    clusters
}

/// Least-squares fit of `Σ c_lk / (s − p_l)^k` to `H(s) − D` on a probe circle.
/// Returns the coefficients (cluster-major, ascending `k`) and the relative
/// fit residual.
fn fit_residues(plant: &RationalSiso, feedthrough: f64, clusters: &[Cluster]) -> (Vec<Complex64>, f64) {
    let unknowns: usize = clusters.iter().map(|c| c.multiplicity).sum();
    let count = clusters.len().max(1) as f64;
    let center = clusters.iter().map(|c| c.root).sum::<Complex64>() / count;
    let spread = clusters
        .iter()
        .map(|c| (c.root - center).norm())
        .fold(0.0, f64::max);
    let radius = 1.0 + 2.0 * spread;
    let probes = (4 * unknowns).max(16);

    let mut basis = DMatrix::<Complex64>::zeros(probes, unknowns);
    let mut target = DVector::<Complex64>::zeros(probes);
    for j in 0..probes {
        let theta = 2.0 * PI * (j as f64 + 0.5) / probes as f64;
        let s = center + Complex64::from_polar(radius, theta);
        target[j] = plant.evaluate_at(s) - feedthrough;
        let mut col = 0;
        for cl in clusters {
            let inv = (s - cl.root).inv();
            let mut f = inv;
            for _ in 0..cl.multiplicity {
                basis[(j, col)] = f;
                f *= inv;
                col += 1;
            }
        }
    }

    let norms: Vec<f64> = (0..unknowns).map(|c| basis.column(c).norm().max(1e-300)).collect();
    let mut scaled = basis.clone();
    for (c, &nrm) in norms.iter().enumerate() {
        scaled.column_mut(c).scale_mut(1.0 / nrm);
    }
    let svd = scaled.svd(true, true);
    let solution = svd
        .solve(&target, 1e-14)
        .unwrap_or_else(|_| DVector::zeros(unknowns));
    let coeffs: Vec<Complex64> = solution
        .iter()
        .zip(&norms)
        .map(|(x, nrm)| x / *nrm)
        .collect();

    let fitted = &basis * DVector::from_vec(coeffs.clone());
    let residual = (&fitted - &target).norm() / target.norm().max(1e-300);
    (coeffs, residual)
}
