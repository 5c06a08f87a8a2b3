use nalgebra::DMatrix;

use crate::error::{Error, Result};
use crate::lti::StateSpaceSystem;

/// Scalar polynomial, coefficients in ascending powers.
#[derive(Debug, Clone, PartialEq)]
pub struct Polynomial(Vec<f64>);

impl Polynomial {
    pub fn new(mut coeffs: Vec<f64>) -> Self {
        while coeffs.len() > 1 && coeffs.last() == Some(&0.0) {
            coeffs.pop();
        }
        Self(coeffs)
    }

    /// `x^k`.
    pub fn monomial(k: usize) -> Self {
        let mut c = vec![0.0; k + 1];
        c[k] = 1.0;
        Self(c)
    }

    pub fn coefficients(&self) -> &[f64] {
        &self.0
    }

    pub fn degree(&self) -> usize {
        self.0.len().saturating_sub(1)
    }

    pub fn eval(&self, x: f64) -> f64 {
        self.0.iter().rev().fold(0.0, |acc, c| acc * x + c)
    }

    /// `∫_0^x p(σ) dσ`.
    pub fn integral(&self, x: f64) -> f64 {
        self.0
            .iter()
            .enumerate()
            .rev()
            .fold(0.0, |acc, (k, c)| acc * x + c / (k + 1) as f64)
            * x
    }
}

/// Agent dynamics supported by the simulator.
#[derive(Debug, Clone, PartialEq)]
pub enum AgentDynamics {
    /// `ẋ = A x + B u`, `y = C x + D u`.
    Lti(StateSpaceSystem),
    /// Scalar `ẋ = u`, `y = h(x)`.
    IntegratorStaticOutput { h: Polynomial },
    /// Scalar zero-gradient-sum flow for `f(x) = ½ q (x − b)²`:
    /// `ẋ = u / q`, `y = x`.
    GradientFlow { curvature: f64, offset: f64 },
}

/// Discriminant of [`AgentDynamics`].
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum AgentKind {
    Lti,
    IntegratorStaticOutput,
    GradientFlow,
}

#[derive(Debug, Clone, PartialEq)]
pub struct AgentModel {
    dynamics: AgentDynamics,
    initial_state: Vec<f64>,
}

impl AgentModel {
    pub fn lti(system: StateSpaceSystem, initial_state: Vec<f64>) -> Result<Self> {
        if system.inputs() != system.outputs() {
            return Err(Error::DimensionMismatch(format!(
                "agent must have as many inputs as outputs, got {} and {}",
                system.inputs(),
                system.outputs()
            )));
        }
        if initial_state.len() != system.states() {
            return Err(Error::DimensionMismatch(format!(
                "initial state has {} entries, agent has {} states",
                initial_state.len(),
                system.states()
            )));
        }
        Ok(Self {
            dynamics: AgentDynamics::Lti(system),
            initial_state,
        })
    }

    /// `ẋ = u`, `y = h(x)` with `h(0) = 0` and an odd-degree, positive
    /// leading term (so `h` is passive and radially unbounded).
    pub fn integrator_static_output(h: Polynomial, x0: f64) -> Result<Self> {
        let c = h.coefficients();
        if c.first().copied().unwrap_or(0.0) != 0.0 {
            return Err(Error::InvalidParameter("output map must satisfy h(0) = 0".into()));
        }
        if h.degree() % 2 == 0 || c[h.degree()] <= 0.0 {
            return Err(Error::InvalidParameter(
                "output map needs an odd-degree leading term with positive coefficient".into(),
            ));
        }
        Ok(Self {
            dynamics: AgentDynamics::IntegratorStaticOutput { h },
            initial_state: vec![x0],
        })
    }

    pub fn gradient_flow(curvature: f64, offset: f64, x0: f64) -> Result<Self> {
        if !(curvature > 0.0 && curvature.is_finite()) {
            return Err(Error::InvalidParameter(format!(
                "curvature must be positive, got {curvature}"
            )));
        }
        Ok(Self {
            dynamics: AgentDynamics::GradientFlow { curvature, offset },
            initial_state: vec![x0],
        })
    }

    pub fn dynamics(&self) -> &AgentDynamics {
        &self.dynamics
    }

    pub fn kind(&self) -> AgentKind {
        match self.dynamics {
            AgentDynamics::Lti(_) => AgentKind::Lti,
            AgentDynamics::IntegratorStaticOutput { .. } => AgentKind::IntegratorStaticOutput,
            AgentDynamics::GradientFlow { .. } => AgentKind::GradientFlow,
        }
    }

    pub fn initial_state(&self) -> &[f64] {
        &self.initial_state
    }

    pub fn with_initial_state(mut self, x0: Vec<f64>) -> Result<Self> {
        if x0.len() != self.states() {
            return Err(Error::DimensionMismatch(format!(
                "initial state has {} entries, agent has {} states",
                x0.len(),
                self.states()
            )));
        }
        self.initial_state = x0;
        Ok(self)
    }

    pub fn states(&self) -> usize {
        match &self.dynamics {
            AgentDynamics::Lti(ss) => ss.states(),
            _ => 1,
        }
    }

    /// Output (= input) dimension.
    pub fn dim(&self) -> usize {
        match &self.dynamics {
            AgentDynamics::Lti(ss) => ss.outputs(),
            _ => 1,
        }
    }

    pub fn feedthrough(&self) -> DMatrix<f64> {
        match &self.dynamics {
            AgentDynamics::Lti(ss) => ss.d().clone(),
            _ => DMatrix::zeros(1, 1),
        }
    }

    /// Output with the feedthrough contribution removed.
    pub(crate) fn free_output(&self, x: &[f64], out: &mut [f64]) {
        match &self.dynamics {
            AgentDynamics::Lti(ss) => {
                let c = ss.c();
                for (r, o) in out.iter_mut().enumerate() {
                    *o = (0..x.len()).map(|j| c[(r, j)] * x[j]).sum();
                }
            }
            AgentDynamics::IntegratorStaticOutput { h } => out[0] = h.eval(x[0]),
            AgentDynamics::GradientFlow { .. } => out[0] = x[0],
        }
    }

    pub(crate) fn derivative(&self, x: &[f64], u: &[f64], dx: &mut [f64]) {
        match &self.dynamics {
            AgentDynamics::Lti(ss) => affine_derivative(ss, x, u, dx),
            AgentDynamics::IntegratorStaticOutput { .. } => dx[0] = u[0],
            AgentDynamics::GradientFlow { curvature, .. } => dx[0] = u[0] / curvature,
        }
    }
}

pub(crate) fn affine_derivative(ss: &StateSpaceSystem, x: &[f64], u: &[f64], dx: &mut [f64]) {
    let (a, b) = (ss.a(), ss.b());
    for (i, d) in dx.iter_mut().enumerate() {
        let ax: f64 = (0..x.len()).map(|j| a[(i, j)] * x[j]).sum();
        let bu: f64 = (0..u.len()).map(|j| b[(i, j)] * u[j]).sum();
        *d = ax + bu;
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn polynomial_integral_of_cube() {
        let h = Polynomial::monomial(3);
        assert_eq!(h.eval(2.0), 8.0);
        assert!((h.integral(2.0) - 4.0).abs() < 1e-15);
    }

    #[test]
    fn validates_output_map() {
        assert!(AgentModel::integrator_static_output(Polynomial::new(vec![1.0, 1.0]), 0.0).is_err());
        assert!(AgentModel::integrator_static_output(Polynomial::new(vec![0.0, 0.0, 1.0]), 0.0).is_err());
        assert!(AgentModel::integrator_static_output(Polynomial::new(vec![0.0, 0.0, 0.0, -1.0]), 0.0).is_err());
        assert!(AgentModel::integrator_static_output(Polynomial::monomial(3), 1.0).is_ok());
    }

    #[test]
    fn gradient_flow_needs_positive_curvature() {
        assert!(AgentModel::gradient_flow(0.0, 0.0, 0.0).is_err());
        assert!(AgentModel::gradient_flow(2.0, 1.0, 1.0).is_ok());
    }
}
