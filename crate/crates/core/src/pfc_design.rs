//! Parallel feedforward compensator (PFC) synthesis.
//!
//! Dynamic compensators reuse the plant's poles with first-order terms
//! `A_l / (s + d_l)`, where `A_l = a_l I` is the smallest multiple of the
//! identity meeting the per-pole passivation bound. Poles on the imaginary
//! axis get no compensation.

use nalgebra::DMatrix;
use num_complex::Complex64;

use crate::error::{Error, Result};
use crate::lti::{CMatrix, PoleChain, PoleResidueSystem};

const SYMMETRY_TOL: f64 = 1e-10;

/// Gain chosen for one plant pole.
#[derive(Debug, Clone, PartialEq)]
pub struct PoleGain {
    /// `d_l`, the pole sitting at `s = −d_l`.
    pub pole: Complex64,
    /// Scalar `a_l`; the compensator residue is `a_l I`.
    pub gain: f64,
    /// Right-hand side of the passivation bound (before slack).
    pub bound: f64,
    /// True for imaginary-axis poles, whose gain is forced to zero.
    pub skipped: bool,
}

#[derive(Debug, Clone, PartialEq)]
pub struct PfcDesignReport {
    /// Compensator with one first-order term per compensated pole.
    pub compensator: PoleResidueSystem,
    pub gains: Vec<PoleGain>,
    pub skipped_poles: Vec<Complex64>,
    /// Transposed-residue terms added beforehand to symmetrize the plant,
    /// when [`design_pfc`] had to do so.
    pub pre_compensator: Option<PoleResidueSystem>,
}

impl PfcDesignReport {
    /// Everything placed in parallel with the original plant.
    pub fn total_compensator(&self) -> Result<PoleResidueSystem> {
        match &self.pre_compensator {
            Some(pre) => pre.parallel(&self.compensator),
            None => Ok(self.compensator.clone()),
        }
    }
}

fn spectral_norm(m: &CMatrix) -> f64 {
    if m.nrows() == 1 && m.ncols() == 1 {
        return m[(0, 0)].norm();
    }
    m.clone()
        .svd(false, false)
        .singular_values
        .iter()
        .copied()
        .fold(0.0, f64::max)
}

fn check_slack(slack: f64) -> Result<()> {
    if !(slack >= 0.0 && slack.is_finite()) {
        return Err(Error::InvalidParameter(format!("slack must be >= 0, got {slack}")));
    }
    Ok(())
}

fn check_axis_chains(plant: &PoleResidueSystem) -> Result<()> {
    for chain in plant.chains() {
        if chain.on_imaginary_axis() && chain.chain_length() > 1 {
            return Err(Error::Invariant(format!(
                "imaginary-axis pole at s = {} has chain length {}",
                -chain.pole(),
                chain.chain_length()
            )));
        }
    }
    plant.check_ifp_form()
}

fn is_symmetric(r: &CMatrix) -> bool {
    let scale = r.iter().map(|z| z.norm()).fold(1.0, f64::max);
    (r - r.transpose()).iter().all(|z| z.norm() <= SYMMETRY_TOL * scale)
}

fn assemble(
    plant: &PoleResidueSystem,
    slack: f64,
    bound_for: impl Fn(&PoleChain) -> f64,
) -> Result<PfcDesignReport> {
    let m = plant.inputs();
    let mut gains = Vec::with_capacity(plant.chains().len());
    let mut skipped_poles = Vec::new();
    let mut chains = Vec::new();
    for chain in plant.chains() {
        if chain.on_imaginary_axis() {
            skipped_poles.push(chain.pole());
            gains.push(PoleGain {
                pole: chain.pole(),
                gain: 0.0,
                bound: 0.0,
                skipped: true,
            });
            continue;
        }
        let bound = bound_for(chain);
        let gain = bound + slack;
        gains.push(PoleGain {
            pole: chain.pole(),
            gain,
            bound,
            skipped: false,
        });
        if gain > 0.0 {
            chains.push(PoleChain::simple_real(chain.pole(), &(DMatrix::identity(m, m) * gain)));
        }
    }
    let compensator = PoleResidueSystem::new(plant.dims(), chains, DMatrix::zeros(m, m))?;
    Ok(PfcDesignReport {
        compensator,
        gains,
        skipped_poles,
        pre_compensator: None,
    })
}

/// Per-pole MIMO bound
/// `‖Im[d] Im[R_1]‖/Re[d] + Σ_k (‖R_k + R_k^H‖ + ‖R_k^H − R_k‖) / (2 Re[d]^{k−1})`.
///
/// Conjugate pairs share the value computed from the member with `Im[d] ≥ 0`.
pub fn mimo_bound(chain: &PoleChain) -> f64 {
    let (d, residues): (Complex64, Vec<CMatrix>) = if chain.pole().im < 0.0 {
        (
            chain.pole().conj(),
            chain.residues().iter().map(|r| r.map(|z| z.conj())).collect(),
        )
    } else {
        (chain.pole(), chain.residues().to_vec())
    };
    let first_im = residues[0].map(|z| Complex64::new(d.im * z.im, 0.0));
    let mut bound = spectral_norm(&first_im) / d.re;
    let mut scale = 1.0;
    for r in &residues {
        let herm = r.adjoint();
        bound += (spectral_norm(&(r + &herm)) + spectral_norm(&(&herm - r))) / (2.0 * scale);
        scale *= d.re;
    }
    bound
}

/// Per-pole SISO bound `|Im[c_1] Im[d]|/Re[d] + Σ_k |c_k| / Re[d]^{k−1}`.
pub fn siso_bound(chain: &PoleChain) -> f64 {
    let d = chain.pole();
    let c1 = chain.residues()[0][(0, 0)];
    let mut bound = (c1.im * d.im).abs() / d.re;
    let mut scale = 1.0;
    for r in chain.residues() {
        bound += r[(0, 0)].norm() / scale;
        scale *= d.re;
    }
    bound
}

/// MIMO passivating compensator `Σ A_l/(s + d_l)` with `A_l = (bound_l + slack) I`.
///
/// Every first residue must be symmetric (`R = R^T`); run
/// [`symmetrize_residue`] first otherwise.
pub fn design_mimo_pfc(plant: &PoleResidueSystem, slack: f64) -> Result<PfcDesignReport> {
    check_slack(slack)?;
    if plant.outputs() != plant.inputs() {
        return Err(Error::DimensionMismatch(format!(
            "PFC design needs a square plant, got {:?}",
            plant.dims()
        )));
    }
    check_axis_chains(plant)?;
    if let Some(chain) = plant.chains().iter().find(|c| !is_symmetric(&c.residues()[0])) {
        return Err(Error::AsymmetricResidue(chain.pole()));
    }
    assemble(plant, slack, mimo_bound)
}

/// SISO passivating compensator `Σ a_l/(s + d_l)`, one gain per pole
/// (including each member of a conjugate pair).
pub fn design_siso_pfc(plant: &PoleResidueSystem, slack: f64) -> Result<PfcDesignReport> {
    check_slack(slack)?;
    if plant.dims() != (1, 1) {
        return Err(Error::DimensionMismatch(format!(
            "SISO design needs a 1x1 plant, got {:?}",
            plant.dims()
        )));
    }
    check_axis_chains(plant)?;
    assemble(plant, slack, siso_bound)
}

/// Adds `R_{l1}^T/(s + d_l)` for every pole whose first residue is not
/// symmetric. Returns the added terms and the symmetrized plant.
pub fn symmetrize_residue(plant: &PoleResidueSystem) -> Result<(PoleResidueSystem, PoleResidueSystem)> {
    if plant.outputs() != plant.inputs() {
        return Err(Error::DimensionMismatch(format!(
            "symmetrization needs a square plant, got {:?}",
            plant.dims()
        )));
    }
    let chains: Vec<PoleChain> = plant
        .chains()
        .iter()
        .filter(|c| !is_symmetric(&c.residues()[0]))
        .map(|c| PoleChain::simple(c.pole(), c.residues()[0].transpose()))
        .collect();
    let m = plant.inputs();
    let pre = PoleResidueSystem::new(plant.dims(), chains, DMatrix::zeros(m, m))?;
    let symmetric = plant.parallel(&pre)?;
    Ok((pre, symmetric))
}

/// Chooses the SISO or MIMO design and symmetrizes MIMO plants as needed.
pub fn design_pfc(plant: &PoleResidueSystem, slack: f64) -> Result<PfcDesignReport> {
    if plant.dims() == (1, 1) {
        return design_siso_pfc(plant, slack);
    }
    let (pre, symmetric) = symmetrize_residue(plant)?;
    let mut report = design_mimo_pfc(&symmetric, slack)?;
    if !pre.is_static() {
        report.pre_compensator = Some(pre);
    }
    Ok(report)
}

/// Memoryless compensator `D_c = ν I_m`.
///
/// A static gain `ν I` satisfies `uᵀy = ν uᵀu`, so it is IFP(+ν) and
/// passivates an IFP(−ν) plant by index addition.
pub fn design_static_pfc(nu: f64, m: usize) -> Result<PoleResidueSystem> {
    if !(nu > 0.0 && nu.is_finite()) {
        return Err(Error::InvalidParameter(format!("nu must be > 0, got {nu}")));
    }
    if m == 0 {
        return Err(Error::InvalidParameter("dimension must be positive".into()));
    }
    PoleResidueSystem::static_gain(DMatrix::identity(m, m) * nu)
}

/// Low-pass approximation `d_c I / (τ s + 1)` of derivative feedback, written
/// as `(d_c/τ) I / (s + 1/τ)`.
///
/// Its DC gain is `d_c`; as `τ → 0` it approaches the static gain `d_c I`,
/// which is IFP(+d_c) (not IFP(−d_c)).
pub fn design_derivative_pfc(d_c: f64, tau: f64, m: usize) -> Result<PoleResidueSystem> {
    if !(d_c > 0.0 && d_c.is_finite()) || !(tau > 0.0 && tau.is_finite()) {
        return Err(Error::InvalidParameter(format!(
            "d_c and tau must be positive, got {d_c} and {tau}"
        )));
    }
    if m == 0 {
        return Err(Error::InvalidParameter("dimension must be positive".into()));
    }
    let chain = PoleChain::simple_real(
        Complex64::new(1.0 / tau, 0.0),
        &(DMatrix::identity(m, m) * (d_c / tau)),
    );
    PoleResidueSystem::new((m, m), vec![chain], DMatrix::zeros(m, m))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::passivity::{check_positive_real, estimate_ifp_index, FrequencyGrid, GridSpec};

    fn c(re: f64, im: f64) -> Complex64 {
        Complex64::new(re, im)
    }

    fn margin(sys: &PoleResidueSystem) -> f64 {
        let grid = FrequencyGrid::for_system(sys, &GridSpec::default()).unwrap();
        check_positive_real(sys, &grid).unwrap().margin
    }

    fn example_two_plant() -> PoleResidueSystem {
        PoleResidueSystem::siso(&[(c(0.5, 0.0), vec![c(0.0, 0.0), c(1.0, 0.0)])], 0.0).unwrap()
    }

    #[test]
    fn siso_gain_for_double_pole() {
        let report = design_siso_pfc(&example_two_plant(), 0.0).unwrap();
        assert_eq!(report.gains.len(), 1);
        assert!((report.gains[0].gain - 2.0).abs() < 1e-12);
    }

    #[test]
    fn mimo_bound_matches_siso_for_double_pole() {
        let report = design_mimo_pfc(&example_two_plant(), 0.0).unwrap();
        assert!((report.gains[0].gain - 2.0).abs() < 1e-12);
    }

    #[test]
    fn passive_plant_still_passive_after_design() {
        let p = PoleResidueSystem::siso(&[(c(1.0, 0.0), vec![c(1.0, 0.0)])], 0.0).unwrap();
        let report = design_mimo_pfc(&p, 0.0).unwrap();
        assert!((report.gains[0].gain - 1.0).abs() < 1e-12);
        let g = p.parallel(&report.compensator).unwrap();
        assert!(margin(&g) >= 0.0);
    }

    #[test]
    fn complex_pair_siso_gain() {
        let p = PoleResidueSystem::siso(
            &[(c(1.0, -1.0), vec![c(0.0, -0.5)]), (c(1.0, 1.0), vec![c(0.0, 0.5)])],
            0.0,
        )
        .unwrap();
        let report = design_siso_pfc(&p, 0.0).unwrap();
        for g in &report.gains {
            assert!((g.gain - 1.0).abs() < 1e-12);
        }
        assert!(margin(&p.parallel(&report.compensator).unwrap()) >= -1e-12);
    }

    #[test]
    fn mimo_complex_pair_bound() {
        let r = CMatrix::from_row_slice(2, 2, &[c(0.0, 0.0), c(0.0, -0.5), c(0.0, -0.5), c(0.0, 0.0)]);
        let upper = PoleChain::simple(c(1.0, -1.0), r.clone());
        let lower = PoleChain::simple(c(1.0, 1.0), r.map(|z| z.conj()));
        let p = PoleResidueSystem::new((2, 2), vec![upper, lower], DMatrix::zeros(2, 2)).unwrap();
        let report = design_mimo_pfc(&p, 0.0).unwrap();
        for g in &report.gains {
            assert!((g.bound - 1.0).abs() < 1e-12, "bound {}", g.bound);
        }
        assert!(margin(&p.parallel(&report.compensator).unwrap()) >= -1e-9);
    }

    #[test]
    fn modified_pi_skips_integrator_pole() {
        let q: f64 = 0.5;
        let p = PoleResidueSystem::siso(
            &[(c(0.0, 0.0), vec![c(1.0 / q, 0.0)]), (c(q, 0.0), vec![c(1.0 - 1.0 / q, 0.0)])],
            0.0,
        )
        .unwrap();
        let report = design_siso_pfc(&p, 0.0).unwrap();
        assert_eq!(report.skipped_poles, vec![c(0.0, 0.0)]);
        let lag = report.gains.iter().find(|g| !g.skipped).unwrap();
        assert!((lag.gain - 1.0).abs() < 1e-12);
        assert!(report.gains.iter().find(|g| g.skipped).unwrap().gain == 0.0);
    }

    #[test]
    fn rejects_asymmetric_first_residue() {
        let r = CMatrix::from_row_slice(2, 2, &[c(0.0, 0.0), c(1.0, 0.0), c(0.0, 0.0), c(0.0, 0.0)]);
        let p = PoleResidueSystem::new((2, 2), vec![PoleChain::simple(c(1.0, 0.0), r)], DMatrix::zeros(2, 2))
            .unwrap();
        assert!(matches!(design_mimo_pfc(&p, 0.0), Err(Error::AsymmetricResidue(_))));
    }

    #[test]
    fn rejects_repeated_axis_pole() {
        let p = PoleResidueSystem::siso(&[(c(0.0, 0.0), vec![c(1.0, 0.0), c(1.0, 0.0)])], 0.0)
            .unwrap();
        assert!(matches!(design_siso_pfc(&p, 0.0), Err(Error::Invariant(_))));
    }

    #[test]
    fn symmetrize_adds_transpose() {
        let r = CMatrix::from_row_slice(2, 2, &[c(0.0, 0.0), c(1.0, 0.0), c(0.0, 0.0), c(0.0, 0.0)]);
        let p = PoleResidueSystem::new((2, 2), vec![PoleChain::simple(c(1.0, 0.0), r)], DMatrix::zeros(2, 2))
            .unwrap();
        let (pre, sym) = symmetrize_residue(&p).unwrap();
        let pre_r = &pre.chains()[0].residues()[0];
        assert_eq!(pre_r[(1, 0)], c(1.0, 0.0));
        assert_eq!(pre_r[(0, 1)], c(0.0, 0.0));
        let sym_r = &sym.chains()[0].residues()[0];
        assert_eq!(sym_r[(0, 1)], c(1.0, 0.0));
        assert_eq!(sym_r[(1, 0)], c(1.0, 0.0));
    }

    #[test]
    fn symmetrize_leaves_symmetric_plant() {
        let p = example_two_plant();
        let (pre, sym) = symmetrize_residue(&p).unwrap();
        assert!(pre.is_static());
        assert_eq!(sym, p);
    }

    #[test]
    fn static_pfc() {
        let d = design_static_pfc(0.5, 1).unwrap();
        assert_eq!(d.feedthrough()[(0, 0)], 0.5);
        assert_eq!(design_static_pfc(1.0, 2).unwrap().feedthrough(), &DMatrix::identity(2, 2));
        assert!(design_static_pfc(0.0, 1).is_err());
        let g = example_two_plant().parallel(&d).unwrap();
        assert!(margin(&g) >= -1e-12);
    }

    #[test]
    fn derivative_pfc() {
        let comp = design_derivative_pfc(1.0, 0.01, 1).unwrap();
        let chain = &comp.chains()[0];
        assert!((chain.pole().re - 100.0).abs() < 1e-12);
        assert!((chain.residues()[0][(0, 0)].re - 100.0).abs() < 1e-12);
        assert!((comp.evaluate(0.0).unwrap()[(0, 0)].re - 1.0).abs() < 1e-12);
        assert!(design_derivative_pfc(1.0, 0.0, 1).is_err());
        assert!(design_derivative_pfc(-1.0, 0.1, 1).is_err());
    }

    #[test]
    fn derivative_pfc_index_grows_as_tau_shrinks() {
        let mut last = 0.0;
        for tau in [0.1, 0.03, 0.01, 0.003] {
            let comp = design_derivative_pfc(1.0, tau, 1).unwrap();
            let grid = FrequencyGrid::for_system(&comp, &GridSpec::default()).unwrap();
            let nu = estimate_ifp_index(&comp, &grid).unwrap();
            assert!(nu > 0.0 && nu <= 1.0);
            assert!(nu >= last);
            last = nu;
        }
    }
}
