//! Frequency-domain positive-realness checks and passivity-index estimates.
//!
//! The sweep evaluates the smallest eigenvalue of the Hermitian part
//! `(H(jω) + H(jω)^H) / 2` on a [`FrequencyGrid`]. Only `ω ≥ 0` is needed:
//! for real systems `H(−jω)` is the conjugate of `H(jω)` and has the same
//! Hermitian-part spectrum.
//!
//! The IFP index returned here is a grid estimate. The true index is the
//! infimum over all frequencies, so the estimate is an upper bound that only
//! decreases as the grid is refined.

use num_complex::Complex64;

use crate::error::{Error, Result};
use crate::lti::{residue_is_real_psd, CMatrix, PoleResidueSystem, AXIS_TOL};

/// Smallest Hermitian-part eigenvalue counted as nonnegative.
pub const VERDICT_TOL: f64 = 1e-9;

/// How a default grid is laid out.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct GridSpec {
    pub omega_min: f64,
    pub omega_max: f64,
    pub log_points: usize,
    /// Linear points added around each `|Im d|`.
    pub refine_points: usize,
}

impl Default for GridSpec {
    fn default() -> Self {
        Self {
            omega_min: 1e-3,
            omega_max: 1e3,
            log_points: 2000,
            refine_points: 50,
        }
    }
}

/// Sorted, strictly increasing set of nonnegative probe frequencies (rad/s).
#[derive(Debug, Clone, PartialEq)]
pub struct FrequencyGrid {
    points: Vec<f64>,
}

impl FrequencyGrid {
    pub fn from_points(mut points: Vec<f64>) -> Result<Self> {
        if points.iter().any(|w| !w.is_finite() || *w < 0.0) {
            return Err(Error::InvalidParameter(
                "grid frequencies must be finite and nonnegative".into(),
            ));
        }
        points.sort_by(f64::total_cmp);
        points.dedup();
        if points.is_empty() {
            return Err(Error::InvalidParameter("frequency grid is empty".into()));
        }
        Ok(Self { points })
    }

    /// `n` logarithmically spaced points spanning `[omega_min, omega_max]`.
    pub fn logarithmic(omega_min: f64, omega_max: f64, n: usize) -> Result<Self> {
        if !(omega_min > 0.0 && omega_max > omega_min) || n < 2 {
            return Err(Error::InvalidParameter(format!(
                "need 0 < omega_min < omega_max and n >= 2 (got {omega_min}, {omega_max}, {n})"
            )));
        }
        let (lo, hi) = (omega_min.log10(), omega_max.log10());
        let step = (hi - lo) / (n - 1) as f64;
        Self::from_points((0..n).map(|i| 10f64.powf(lo + step * i as f64)).collect())
    }

    /// Logarithmic span plus linear refinement around every pole's imaginary
    /// part, with imaginary-axis pole frequencies removed.
    pub fn for_system(sys: &PoleResidueSystem, spec: &GridSpec) -> Result<Self> {
        let mut points = Self::logarithmic(spec.omega_min, spec.omega_max, spec.log_points)?.points;
        if spec.refine_points >= 2 {
            for chain in sys.chains() {
                let d = chain.pole();
                let center = d.im.abs();
                let half = (2.0 * d.re.abs()).max(0.05 * center).max(1e-3);
                let lo = (center - half).max(0.0);
                let hi = center + half;
                let step = (hi - lo) / (spec.refine_points - 1) as f64;
                points.extend((0..spec.refine_points).map(|i| lo + step * i as f64));
            }
        }
        let axis: Vec<f64> = sys
            .chains()
            .iter()
            .filter(|c| c.on_imaginary_axis())
            .map(|c| c.pole().im.abs())
            .collect();
        points.retain(|w| axis.iter().all(|p| (w - p).abs() > crate::lti::POLE_PROXIMITY_TOL));
        Self::from_points(points)
    }

    pub fn points(&self) -> &[f64] {
        &self.points
    }

    pub fn len(&self) -> usize {
        self.points.len()
    }

    pub fn is_empty(&self) -> bool {
        self.points.is_empty()
    }
}

/// Residue test at one imaginary-axis pole: the chain must be simple and its
/// residue positive semidefinite.
#[derive(Debug, Clone, PartialEq)]
pub struct ResidueCheck {
    /// Pole location `s = −d`.
    pub pole: Complex64,
    pub passed: bool,
}

#[derive(Debug, Clone, PartialEq)]
pub struct PassivityVerdict {
    pub is_positive_real: bool,
    /// Minimum over the grid of λ_min of the Hermitian part of `H(jω)`.
    pub margin: f64,
    pub worst_frequency: f64,
    /// Grid estimate of the IFP index ν.
    pub ifp_index: f64,
    /// All poles in the closed left half-plane.
    pub stable: bool,
    pub residue_checks: Vec<ResidueCheck>,
    /// Grid points skipped because they sat on an imaginary-axis pole.
    pub excluded_points: usize,
    pub notes: Vec<String>,
}

/// One sample of the Hermitian-part sweep.
#[derive(Debug, Clone)]
pub struct SweepPoint {
    pub omega: f64,
    pub min_eigenvalue: f64,
    pub response: CMatrix,
}

/// Smallest eigenvalue of `(H + H^H)/2`.
pub fn hermitian_min_eigenvalue(h: &CMatrix) -> f64 {
    if h.nrows() == 1 {
        return h[(0, 0)].re;
    }
    let herm = (h + h.adjoint()) * Complex64::new(0.5, 0.0);
    herm.symmetric_eigenvalues().min()
}

/// Evaluates the Hermitian-part margin at every grid point, skipping points
/// that coincide with a pole. Returns the samples and the skip count.
pub fn sweep(sys: &PoleResidueSystem, grid: &FrequencyGrid) -> Result<(Vec<SweepPoint>, usize)> {
    if sys.outputs() != sys.inputs() {
        return Err(Error::DimensionMismatch(format!(
            "passivity needs a square system, got {:?}",
            sys.dims()
        )));
    }
    let mut samples = Vec::with_capacity(grid.len());
    let mut excluded = 0;
    for &omega in grid.points() {
        match sys.evaluate(omega) {
            Ok(response) => samples.push(SweepPoint {
                omega,
                min_eigenvalue: hermitian_min_eigenvalue(&response),
                response,
            }),
            Err(Error::NearPole { .. }) => excluded += 1,
            Err(e) => return Err(e),
        }
    }
    Ok((samples, excluded))
}

fn worst(samples: &[SweepPoint]) -> (f64, f64) {
    samples
        .iter()
        .map(|p| (p.min_eigenvalue, p.omega))
        .fold((f64::INFINITY, f64::NAN), |acc, x| if x.0 < acc.0 { x } else { acc })
}

/// Checks the three positive-real conditions: poles in the closed left
/// half-plane, nonnegative Hermitian part on the grid, and simple
/// imaginary-axis poles with PSD Hermitian residues.
pub fn check_positive_real(sys: &PoleResidueSystem, grid: &FrequencyGrid) -> Result<PassivityVerdict> {
    let mut notes = Vec::new();
    let stable = sys.chains().iter().all(|c| c.pole().re >= -AXIS_TOL);
    if !stable {
        notes.push("pole in the open right half-plane".to_string());
    }
    let residue_checks: Vec<ResidueCheck> = sys
        .chains()
        .iter()
        .filter(|c| c.on_imaginary_axis())
        .map(|c| ResidueCheck {
            pole: -c.pole(),
            passed: c.chain_length() == 1 && residue_is_real_psd(&c.residues()[0]),
        })
        .collect();

    let (samples, excluded) = sweep(sys, grid)?;
    if excluded > 0 {
        notes.push(format!("{excluded} grid point(s) on imaginary-axis poles skipped"));
    }
    let (margin, worst_frequency) = worst(&samples);
    if samples.is_empty() {
        notes.push("no grid point could be evaluated".to_string());
    }
    notes.push("ifp_index is a grid estimate (an upper bound on the true index)".to_string());

    let is_positive_real = stable
        && residue_checks.iter().all(|r| r.passed)
        && !samples.is_empty()
        && margin >= -VERDICT_TOL;
    Ok(PassivityVerdict {
        is_positive_real,
        margin,
        worst_frequency,
        ifp_index: margin,
        stable,
        residue_checks,
        excluded_points: excluded,
        notes,
    })
}

/// Grid estimate of ν in `H(jω) + H(jω)^H ≥ 2νI`.
///
/// Fails when the system has an unstable pole or an imaginary-axis pole that
/// is repeated or carries a non-PSD residue; such systems have no finite
/// index.
pub fn estimate_ifp_index(sys: &PoleResidueSystem, grid: &FrequencyGrid) -> Result<f64> {
    sys.check_ifp_form()?;
    let (samples, _) = sweep(sys, grid)?;
    if samples.is_empty() {
        return Err(Error::InvalidParameter(
            "no grid point could be evaluated".into(),
        ));
    }
    Ok(worst(&samples).0)
}

/// OFP index of the loop formed by an OFP(ρ) forward path and an IFP(ν)
/// feedback path (with no external input on the feedback path).
pub fn ofp_compose(rho: f64, nu: f64) -> f64 {
    rho + nu
}
