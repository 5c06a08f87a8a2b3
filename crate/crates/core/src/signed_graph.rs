//! Signed weighted digraphs and their (possibly indefinite) Laplacians.
//!
//! `a_ik ≠ 0` means node `i` receives from node `k` (edge `(k, i)`); weights
//! may be negative. The Laplacian is `L = diag(row sums of A) − A` with no
//! absolute values, so `L 1 = 0` always and `1ᵀ L = 0` exactly when the
//! graph is weight-balanced.

use std::collections::VecDeque;

use nalgebra::{DMatrix, SymmetricEigen};

use crate::error::{Error, Result};

/// Row/column sums within this count as balanced.
pub const BALANCE_TOL: f64 = 1e-10;

/// Eigenvalues with `|λ|` below this count as zero.
pub const ZERO_EIGEN_TOL: f64 = 1e-8;

#[derive(Debug, Clone, PartialEq)]
pub struct SignedDigraph {
    adjacency: DMatrix<f64>,
}

/// Directed edge `from → to` carrying `weight = a_{to,from}`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Edge {
    pub from: usize,
    pub to: usize,
    pub weight: f64,
}

impl SignedDigraph {
    pub fn new(adjacency: DMatrix<f64>) -> Result<Self> {
        let n = adjacency.nrows();
        if n == 0 || adjacency.ncols() != n {
            return Err(Error::DimensionMismatch(format!(
                "adjacency must be square and nonempty, got {:?}",
                adjacency.shape()
            )));
        }
        if adjacency.iter().any(|w| !w.is_finite()) {
            return Err(Error::InvalidParameter("non-finite edge weight".into()));
        }
        if let Some(i) = (0..n).find(|&i| adjacency[(i, i)] != 0.0) {
            return Err(Error::Invariant(format!("self-loop at node {i}")));
        }
        Ok(Self { adjacency })
    }

    pub fn from_edges(n: usize, edges: &[Edge]) -> Result<Self> {
        let mut a = DMatrix::zeros(n, n);
        for e in edges {
            if e.from >= n || e.to >= n {
                return Err(Error::InvalidParameter(format!(
                    "edge {} -> {} references a node outside 0..{n}",
                    e.from, e.to
                )));
            }
            if e.from == e.to {
                return Err(Error::Invariant(format!("self-loop at node {}", e.from)));
            }
            a[(e.to, e.from)] += e.weight;
        }
        Self::new(a)
    }

    /// Recovers the graph whose Laplacian is `l` (`a_ik = −l_ik`, `i ≠ k`).
    /// Fails unless every row of `l` sums to zero.
    pub fn from_laplacian(l: &DMatrix<f64>) -> Result<Self> {
        let n = l.nrows();
        if n == 0 || l.ncols() != n {
            return Err(Error::DimensionMismatch(format!(
                "Laplacian must be square, got {:?}",
                l.shape()
            )));
        }
        let scale = l.amax().max(1.0);
        for i in 0..n {
            let s: f64 = l.row(i).sum();
            if s.abs() > BALANCE_TOL * scale {
                return Err(Error::Invariant(format!("row {i} of the Laplacian sums to {s}")));
            }
        }
        let mut a = -l.clone();
        a.fill_diagonal(0.0);
        Self::new(a)
    }

    pub fn node_count(&self) -> usize {
        self.adjacency.nrows()
    }

    pub fn adjacency(&self) -> &DMatrix<f64> {
        &self.adjacency
    }

    pub fn edges(&self) -> Vec<Edge> {
        let n = self.node_count();
        let mut out = Vec::new();
        for to in 0..n {
            for from in 0..n {
                let w = self.adjacency[(to, from)];
                if w != 0.0 {
                    out.push(Edge { from, to, weight: w });
                }
            }
        }
        out
    }

    pub fn has_negative_edges(&self) -> bool {
        self.adjacency.iter().any(|&w| w < 0.0)
    }

    pub fn laplacian(&self) -> DMatrix<f64> {
        build_laplacian(self)
    }

    /// Every node reaches every other along nonzero-weight edges.
    pub fn is_strongly_connected(&self) -> bool {
        let n = self.node_count();
        let reach = |forward: bool| {
            let mut seen = vec![false; n];
            let mut queue = VecDeque::from([0usize]);
            seen[0] = true;
            while let Some(v) = queue.pop_front() {
                for w in 0..n {
                    let weight = if forward {
                        self.adjacency[(w, v)]
                    } else {
                        self.adjacency[(v, w)]
                    };
                    if weight != 0.0 && !seen[w] {
                        seen[w] = true;
                        queue.push_back(w);
                    }
                }
            }
            seen.into_iter().all(|s| s)
        };
        reach(true) && reach(false)
    }
}

/// `L = diag(Σ_k a_ik) − A`.
pub fn build_laplacian(g: &SignedDigraph) -> DMatrix<f64> {
    let a = g.adjacency();
    let mut l = -a.clone();
    for i in 0..g.node_count() {
        // excluding the diagonal keeps L·1 = 0 exact in floating point
        l[(i, i)] = a.row(i).sum();
    }
    l
}

/// Counts of positive, negative, and zero eigenvalues.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct Inertia {
    pub positive: usize,
    pub negative: usize,
    pub zero: usize,
}

#[derive(Debug, Clone, PartialEq)]
pub struct LaplacianAnalysis {
    pub laplacian: DMatrix<f64>,
    pub weight_balanced: bool,
    pub strongly_connected: bool,
    pub zero_is_simple: bool,
    /// Inertia of `(L + Lᵀ)/2`.
    pub inertia: Inertia,
    /// Minimal `r` with `r LᵀL + (L + Lᵀ)/2 ⪰ 0`; `None` when the graph is
    /// unbalanced, zero is not simple, or there is a single node.
    pub ofp_radius: Option<f64>,
}

fn balance_defect(l: &DMatrix<f64>) -> f64 {
    let n = l.nrows();
    (0..n)
        .map(|j| l.column(j).sum().abs().max(l.row(j).sum().abs()))
        .fold(0.0, f64::max)
}

fn zero_eigen_count(l: &DMatrix<f64>) -> usize {
    let algebraic = l
        .complex_eigenvalues()
        .iter()
        .filter(|z| z.norm() < ZERO_EIGEN_TOL)
        .count();
    let geometric = l
        .clone()
        .svd(false, false)
        .singular_values
        .iter()
        .filter(|s| **s < ZERO_EIGEN_TOL)
        .count();
    algebraic.max(geometric)
}

fn inertia(sym: DMatrix<f64>) -> Inertia {
    let eig = sym.symmetric_eigenvalues();
    Inertia {
        positive: eig.iter().filter(|&&x| x > ZERO_EIGEN_TOL).count(),
        negative: eig.iter().filter(|&&x| x < -ZERO_EIGEN_TOL).count(),
        zero: eig.iter().filter(|&&x| x.abs() <= ZERO_EIGEN_TOL).count(),
    }
}

pub fn analyze(g: &SignedDigraph) -> LaplacianAnalysis {
    let l = build_laplacian(g);
    let weight_balanced = balance_defect(&l) <= BALANCE_TOL * l.amax().max(1.0);
    let zero_is_simple = zero_eigen_count(&l) == 1;
    let ofp_radius = if weight_balanced && zero_is_simple {
        compute_ofp_radius(&l).ok().filter(|r| r.is_finite())
    } else {
        None
    };
    LaplacianAnalysis {
        inertia: inertia((&l + l.transpose()) * 0.5),
        weight_balanced,
        strongly_connected: g.is_strongly_connected(),
        zero_is_simple,
        ofp_radius,
        laplacian: l,
    }
}

/// Orthonormal basis of the complement of `1` (Helmert contrasts), n×(n−1).
pub fn consensus_complement_basis(n: usize) -> DMatrix<f64> {
    let mut u = DMatrix::zeros(n, n.saturating_sub(1));
    for j in 1..n {
        let norm = ((j * (j + 1)) as f64).sqrt();
        for i in 0..j {
            u[(i, j - 1)] = 1.0 / norm;
        }
        u[(j, j - 1)] = -(j as f64) / norm;
    }
    u
}

/// Minimal `r` such that `r LᵀL + (L + Lᵀ)/2 ⪰ 0`.
///
/// Both matrices vanish on `1`, so the inequality is restricted to `1^⊥`,
/// where `M = LᵀL` is positive definite when zero is a simple eigenvalue.
/// The answer is `λ_max(−M^{−1/2} S M^{−1/2})`. Negative values mean the
/// coupling is output strictly passive. Any larger `r` is also feasible.
/// A single node has no constraint and yields `−∞`.
pub fn compute_ofp_radius(l: &DMatrix<f64>) -> Result<f64> {
    let n = l.nrows();
    if l.ncols() != n || n == 0 {
        return Err(Error::DimensionMismatch(format!(
            "Laplacian must be square, got {:?}",
            l.shape()
        )));
    }
    let defect = balance_defect(l);
    if defect > BALANCE_TOL * l.amax().max(1.0) {
        return Err(Error::Unbalanced(defect));
    }
    let zeros = zero_eigen_count(l);
    if zeros != 1 {
        return Err(Error::ZeroNotSimple(zeros));
    }
    if n == 1 {
        return Ok(f64::NEG_INFINITY);
    }
    let u = consensus_complement_basis(n);
    let lu = l * &u;
    let m = lu.transpose() * &lu;
    let s = u.transpose() * ((l + l.transpose()) * 0.5) * &u;

    let eig = SymmetricEigen::new(m);
    let inv_sqrt = DMatrix::from_diagonal(&eig.eigenvalues.map(|x| 1.0 / x.sqrt()));
    let m_inv_sqrt = &eig.eigenvectors * inv_sqrt * eig.eigenvectors.transpose();
    let pencil = -(&m_inv_sqrt * s * &m_inv_sqrt);
    let pencil = (&pencil + pencil.transpose()) * 0.5;
    Ok(pencil.symmetric_eigenvalues().max())
}

/// Smallest eigenvalue of `r LᵀL + (L + Lᵀ)/2` over the full space.
pub fn ofp_certificate(l: &DMatrix<f64>, r: f64) -> f64 {
    let q = l.transpose() * l * r + (l + l.transpose()) * 0.5;
    ((&q + q.transpose()) * 0.5).symmetric_eigenvalues().min()
}

#[cfg(test)]
mod tests {
    use super::*;

    fn example_four_laplacian() -> DMatrix<f64> {
        DMatrix::from_row_slice(
            4,
            4,
            &[
                -1.0, 0.0, -1.0, 2.0, //
                -1.0, 1.0, 0.0, 0.0, //
                2.0, -1.0, -1.0, 0.0, //
                0.0, 0.0, 2.0, -2.0,
            ],
        )
    }

    #[test]
    fn reproduces_example_four_laplacian() {
        let l = example_four_laplacian();
        let g = SignedDigraph::from_laplacian(&l).unwrap();
        assert_eq!(build_laplacian(&g), l);
        assert!(g.has_negative_edges());
    }

    #[test]
    fn directed_cycle_laplacian() {
        let edges = [
            Edge { from: 0, to: 1, weight: 1.0 },
            Edge { from: 1, to: 2, weight: 1.0 },
            Edge { from: 2, to: 0, weight: 1.0 },
        ];
        let g = SignedDigraph::from_edges(3, &edges).unwrap();
        let l = build_laplacian(&g);
        let expected = DMatrix::from_row_slice(3, 3, &[1.0, 0.0, -1.0, -1.0, 1.0, 0.0, 0.0, -1.0, 1.0]);
        assert_eq!(l, expected);
    }

    #[test]
    fn single_node() {
        let g = SignedDigraph::new(DMatrix::zeros(1, 1)).unwrap();
        assert_eq!(build_laplacian(&g), DMatrix::zeros(1, 1));
        let a = analyze(&g);
        assert!(a.zero_is_simple && a.weight_balanced && a.ofp_radius.is_none());
    }

    #[test]
    fn rejects_self_loops() {
        assert!(SignedDigraph::new(DMatrix::identity(2, 2)).is_err());
        assert!(SignedDigraph::from_edges(2, &[Edge { from: 1, to: 1, weight: 1.0 }]).is_err());
    }

    #[test]
    fn analyzes_example_four() {
        let g = SignedDigraph::from_laplacian(&example_four_laplacian()).unwrap();
        let a = analyze(&g);
        assert!(a.weight_balanced && a.strongly_connected && a.zero_is_simple);
        assert!(a.inertia.negative >= 1 && a.inertia.positive >= 1);
        assert!((a.ofp_radius.unwrap() - 0.5).abs() < 1e-9);
    }

    #[test]
    fn undirected_path_is_psd() {
        let edges = [
            Edge { from: 0, to: 1, weight: 1.0 },
            Edge { from: 1, to: 0, weight: 1.0 },
            Edge { from: 1, to: 2, weight: 2.0 },
            Edge { from: 2, to: 1, weight: 2.0 },
        ];
        let a = analyze(&SignedDigraph::from_edges(3, &edges).unwrap());
        assert!(a.weight_balanced && a.strongly_connected);
        assert_eq!(a.inertia.negative, 0);
        assert!(a.ofp_radius.unwrap() <= 0.0);
    }

    #[test]
    fn disconnected_pair() {
        let a = analyze(&SignedDigraph::new(DMatrix::zeros(2, 2)).unwrap());
        assert!(!a.zero_is_simple && !a.strongly_connected);
        assert!(a.ofp_radius.is_none());
    }

    #[test]
    fn two_node_path_radius() {
        let l = DMatrix::from_row_slice(2, 2, &[1.0, -1.0, -1.0, 1.0]);
        assert!((compute_ofp_radius(&l).unwrap() + 0.5).abs() < 1e-14);
    }

    #[test]
    fn radius_rejects_unbalanced_and_repeated_zero() {
        let unbalanced = DMatrix::from_row_slice(2, 2, &[1.0, -1.0, 0.0, 0.0]);
        assert!(matches!(compute_ofp_radius(&unbalanced), Err(Error::Unbalanced(_))));
        assert!(matches!(
            compute_ofp_radius(&DMatrix::zeros(3, 3)),
            Err(Error::ZeroNotSimple(3))
        ));
    }

    #[test]
    fn helmert_basis_is_orthonormal() {
        let u = consensus_complement_basis(5);
        let gram = u.transpose() * &u;
        assert!((gram - DMatrix::identity(4, 4)).amax() < 1e-14);
        assert!((u.transpose() * DMatrix::from_element(5, 1, 1.0)).amax() < 1e-14);
    }
}
