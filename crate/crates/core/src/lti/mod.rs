//! Linear time-invariant systems in pole–residue and state-space form.
//!
//! A [`PoleResidueSystem`] stores a transfer matrix as
//!
//! ```text
//! H(s) = D + sum_l sum_{k=1..k_l} R_{lk} / (s + d_l)^k
//! ```
//!
//! so the pole of chain `l` sits at `s = -d_l`. Conjugate chains are stored
//! explicitly, which keeps the time-domain system real.

mod partial_fraction;
mod realize;
mod state_space;

pub use partial_fraction::{partial_fraction_decompose, DecomposeOptions, Decomposition, RationalSiso};
pub use state_space::StateSpaceSystem;

use nalgebra::DMatrix;
use num_complex::Complex64;

use crate::error::{Error, Result};

/// Complex dense matrix used for residues and frequency responses.
pub type CMatrix = DMatrix<Complex64>;

/// Minimum distance in the s-plane between a probe point and a pole.
pub const POLE_PROXIMITY_TOL: f64 = 1e-9;

/// Poles closer than this are treated as the same pole when merging chains.
pub const POLE_MERGE_TOL: f64 = 1e-9;

/// `|Re d|` below this places a pole on the imaginary axis.
pub const AXIS_TOL: f64 = 1e-10;

const CONJ_TOL: f64 = 1e-8;

/// Residue chain `R_1/(s+d) + ... + R_k/(s+d)^k` attached to a single pole.
#[derive(Debug, Clone, PartialEq)]
pub struct PoleChain {
    pole: Complex64,
    residues: Vec<CMatrix>,
}

impl PoleChain {
    pub fn new(pole: Complex64, residues: Vec<CMatrix>) -> Result<Self> {
        let first = residues
            .first()
            .ok_or_else(|| Error::Invariant(format!("chain at d = {pole} has no residues")))?;
        let shape = first.shape();
        if residues.iter().any(|r| r.shape() != shape) {
            return Err(Error::DimensionMismatch(format!(
                "residues of the chain at d = {pole} differ in shape"
            )));
        }
        if !pole.re.is_finite() || !pole.im.is_finite() {
            return Err(Error::Invariant(format!("non-finite pole {pole}")));
        }
        Ok(Self { pole, residues })
    }

    /// Chain of length one.
    pub fn simple(pole: Complex64, residue: CMatrix) -> Self {
        Self {
            pole,
            residues: vec![residue],
        }
    }

    /// Chain of length one with a real residue matrix.
    pub fn simple_real(pole: Complex64, residue: &DMatrix<f64>) -> Self {
        Self::simple(pole, residue.map(|x| Complex64::new(x, 0.0)))
    }

    /// `d` such that the pole sits at `s = -d`.
    pub fn pole(&self) -> Complex64 {
        self.pole
    }

    pub fn chain_length(&self) -> usize {
        self.residues.len()
    }

    /// Residues `R_1 .. R_k`, index 0 holding the first-order term.
    pub fn residues(&self) -> &[CMatrix] {
        &self.residues
    }

    pub fn is_real(&self) -> bool {
        self.pole.im == 0.0
    }

    pub fn on_imaginary_axis(&self) -> bool {
        self.pole.re.abs() <= AXIS_TOL
    }

    fn shape(&self) -> (usize, usize) {
        self.residues[0].shape()
    }

    fn conjugate(&self) -> Self {
        Self {
            pole: self.pole.conj(),
            residues: self.residues.iter().map(|r| r.map(|z| z.conj())).collect(),
        }
    }

    fn eval_at(&self, s: Complex64) -> Result<CMatrix> {
        let z = s + self.pole;
        if z.norm() < POLE_PROXIMITY_TOL {
            return Err(Error::NearPole {
                omega: s.im,
                pole: -self.pole,
                distance: z.norm(),
            });
        }
        let inv = z.inv();
        let mut factor = inv;
        let (rows, cols) = self.shape();
        let mut acc = CMatrix::zeros(rows, cols);
        for r in &self.residues {
            acc += r * factor;
            factor *= inv;
        }
        Ok(acc)
    }
}

/// Transfer matrix in pole–residue form plus constant feedthrough.
#[derive(Debug, Clone, PartialEq)]
pub struct PoleResidueSystem {
    outputs: usize,
    inputs: usize,
    chains: Vec<PoleChain>,
    feedthrough: DMatrix<f64>,
}

impl PoleResidueSystem {
    /// Builds a system, merging chains that share a pole and checking that
    /// complex chains come in conjugate pairs.
    ///
    /// Stability and imaginary-axis conditions are checked separately by
    /// [`PoleResidueSystem::check_ifp_form`] so that analysis routines can
    /// still report on systems that violate them.
    pub fn new(
        dims: (usize, usize),
        chains: Vec<PoleChain>,
        feedthrough: DMatrix<f64>,
    ) -> Result<Self> {
        let (outputs, inputs) = dims;
        if outputs == 0 || inputs == 0 {
            return Err(Error::DimensionMismatch(format!(
                "dimensions must be positive, got {outputs}x{inputs}"
            )));
        }
        if feedthrough.shape() != dims {
            return Err(Error::DimensionMismatch(format!(
                "feedthrough is {:?}, expected {:?}",
                feedthrough.shape(),
                dims
            )));
        }
        for c in &chains {
            if c.shape() != dims {
                return Err(Error::DimensionMismatch(format!(
                    "residues at d = {} are {:?}, expected {:?}",
                    c.pole,
                    c.shape(),
                    dims
                )));
            }
        }

        let mut merged: Vec<PoleChain> = Vec::with_capacity(chains.len());
        for chain in chains {
            match merged
                .iter_mut()
                .find(|m| (m.pole - chain.pole).norm() <= POLE_MERGE_TOL)
            {
                Some(existing) => {
                    for (k, r) in chain.residues.into_iter().enumerate() {
                        if k < existing.residues.len() {
                            existing.residues[k] += r;
                        } else {
                            existing.residues.push(r);
                        }
                    }
                }
                None => merged.push(chain),
            }
        }

        for chain in &mut merged {
            if chain.pole.im.abs() <= POLE_MERGE_TOL * chain.pole.norm().max(1.0) {
                chain.pole.im = 0.0;
                for r in &chain.residues {
                    let scale = r.iter().map(|z| z.norm()).fold(1.0, f64::max);
                    if r.iter().any(|z| z.im.abs() > CONJ_TOL * scale) {
                        return Err(Error::Invariant(format!(
                            "chain at real d = {} has complex residues",
                            chain.pole.re
                        )));
                    }
                }
                for r in &mut chain.residues {
                    r.iter_mut().for_each(|z| z.im = 0.0);
                }
            }
        }

        for chain in merged.iter().filter(|c| !c.is_real()) {
            let partner = merged
                .iter()
                .find(|m| (m.pole - chain.pole.conj()).norm() <= POLE_MERGE_TOL)
                .ok_or_else(|| {
                    Error::Invariant(format!(
                        "complex chain at d = {} has no conjugate partner",
                        chain.pole
                    ))
                })?;
            let expected = chain.conjugate();
            let matches = partner.residues.len() == expected.residues.len()
                && partner
                    .residues
                    .iter()
                    .zip(&expected.residues)
                    .all(|(a, b)| {
                        let scale = b.iter().map(|z| z.norm()).fold(1.0, f64::max);
                        (a - b).iter().all(|z| z.norm() <= CONJ_TOL * scale)
                    });
            if !matches {
                return Err(Error::Invariant(format!(
                    "chain at d = {} is not the conjugate of the chain at d = {}",
                    partner.pole, chain.pole
                )));
            }
        }

        merged.sort_by(|a, b| {
            a.pole
                .re
                .total_cmp(&b.pole.re)
                .then(a.pole.im.total_cmp(&b.pole.im))
        });
        Ok(Self {
            outputs,
            inputs,
            chains: merged,
            feedthrough,
        })
    }

    /// System with no dynamics and zero feedthrough.
    pub fn zero(outputs: usize, inputs: usize) -> Self {
        Self {
            outputs,
            inputs,
            chains: Vec::new(),
            feedthrough: DMatrix::zeros(outputs, inputs),
        }
    }

    /// Memoryless system `y = D u`.
    pub fn static_gain(feedthrough: DMatrix<f64>) -> Result<Self> {
        let dims = feedthrough.shape();
        Self::new(dims, Vec::new(), feedthrough)
    }

    /// Single-input single-output system built from `(d, [c_1..c_k])` chains.
    pub fn siso(chains: &[(Complex64, Vec<Complex64>)], feedthrough: f64) -> Result<Self> {
        let chains = chains
            .iter()
            .map(|(d, cs)| {
                PoleChain::new(
                    *d,
                    cs.iter().map(|c| CMatrix::from_element(1, 1, *c)).collect(),
                )
            })
            .collect::<Result<Vec<_>>>()?;
        Self::new((1, 1), chains, DMatrix::from_element(1, 1, feedthrough))
    }

    pub fn dims(&self) -> (usize, usize) {
        (self.outputs, self.inputs)
    }

    pub fn outputs(&self) -> usize {
        self.outputs
    }

    pub fn inputs(&self) -> usize {
        self.inputs
    }

    pub fn chains(&self) -> &[PoleChain] {
        &self.chains
    }

    pub fn feedthrough(&self) -> &DMatrix<f64> {
        &self.feedthrough
    }

    pub fn is_static(&self) -> bool {
        self.chains.is_empty()
    }

    /// Total number of states in a minimal-per-chain realization.
    pub fn order(&self) -> usize {
        self.chains.iter().map(|c| c.chain_length()).sum::<usize>() * self.inputs
    }

    /// Verifies the stability requirements placed on IFP plants: every pole
    /// in the closed left half-plane, and imaginary-axis poles simple with a
    /// real, symmetric, positive semidefinite residue.
    pub fn check_ifp_form(&self) -> Result<()> {
        for chain in &self.chains {
            if chain.pole.re < -AXIS_TOL {
                return Err(Error::NotIfp(format!(
                    "unstable pole at s = {}",
                    -chain.pole
                )));
            }
            if chain.on_imaginary_axis() {
                if chain.chain_length() > 1 {
                    return Err(Error::NotIfp(format!(
                        "imaginary-axis pole at s = {} has multiplicity {}",
                        -chain.pole,
                        chain.chain_length()
                    )));
                }
                if !residue_is_real_psd(&chain.residues[0]) {
                    return Err(Error::NotIfp(format!(
                        "residue at imaginary-axis pole s = {} is not real symmetric PSD",
                        -chain.pole
                    )));
                }
            }
        }
        Ok(())
    }

    /// `H(s)` at an arbitrary complex point.
    pub fn evaluate_at(&self, s: Complex64) -> Result<CMatrix> {
        let mut acc = self.feedthrough.map(|x| Complex64::new(x, 0.0));
        for chain in &self.chains {
            acc += chain.eval_at(s)?;
        }
        Ok(acc)
    }

    /// Frequency response `H(jω)`.
    pub fn evaluate(&self, omega: f64) -> Result<CMatrix> {
        self.evaluate_at(Complex64::new(0.0, omega))
    }

    /// Parallel connection: same input, outputs summed.
    pub fn parallel(&self, other: &Self) -> Result<Self> {
        if self.dims() != other.dims() {
            return Err(Error::DimensionMismatch(format!(
                "cannot connect {:?} in parallel with {:?}",
                self.dims(),
                other.dims()
            )));
        }
        let chains = self.chains.iter().chain(&other.chains).cloned().collect();
        Self::new(self.dims(), chains, &self.feedthrough + &other.feedthrough)
    }

    /// Realizes the system as real state-space matrices.
    pub fn realize(&self) -> Result<StateSpaceSystem> {
        self.check_ifp_form()?;
        realize::realize(self)
    }
}

/// `H(jω)` of a pole–residue system.
pub fn evaluate(sys: &PoleResidueSystem, omega: f64) -> Result<CMatrix> {
    sys.evaluate(omega)
}

/// Parallel interconnection `sys1 + sys2`.
pub fn parallel(sys1: &PoleResidueSystem, sys2: &PoleResidueSystem) -> Result<PoleResidueSystem> {
    sys1.parallel(sys2)
}

/// Real state-space realization of a pole–residue system.
pub fn realize(sys: &PoleResidueSystem) -> Result<StateSpaceSystem> {
    sys.realize()
}

pub(crate) fn residue_is_real_psd(r: &CMatrix) -> bool {
    let scale = r.iter().map(|z| z.norm()).fold(1.0, f64::max);
    if r.iter().any(|z| z.im.abs() > CONJ_TOL * scale) || r.nrows() != r.ncols() {
        return false;
    }
    let re = r.map(|z| z.re);
    if (&re - re.transpose()).amax() > CONJ_TOL * scale {
        return false;
    }
    let sym = (&re + re.transpose()) * 0.5;
    sym.symmetric_eigenvalues().min() >= -1e-9 * scale
}
