use nalgebra::DMatrix;
use num_complex::Complex64;

use super::CMatrix;
use crate::error::{Error, Result};

/// Real state-space model `ẋ = A x + B u`, `y = C x + D u`.
#[derive(Debug, Clone, PartialEq)]
pub struct StateSpaceSystem {
    a: DMatrix<f64>,
    b: DMatrix<f64>,
    c: DMatrix<f64>,
    d: DMatrix<f64>,
}

impl StateSpaceSystem {
    pub fn new(a: DMatrix<f64>, b: DMatrix<f64>, c: DMatrix<f64>, d: DMatrix<f64>) -> Result<Self> {
        let n = a.nrows();
        if a.ncols() != n {
            return Err(Error::DimensionMismatch(format!("A is {:?}, not square", a.shape())));
        }
        if b.nrows() != n {
            return Err(Error::DimensionMismatch(format!(
                "B has {} rows, expected {n}",
                b.nrows()
            )));
        }
        if c.ncols() != n {
            return Err(Error::DimensionMismatch(format!(
                "C has {} columns, expected {n}",
                c.ncols()
            )));
        }
        if d.shape() != (c.nrows(), b.ncols()) {
            return Err(Error::DimensionMismatch(format!(
                "D is {:?}, expected {:?}",
                d.shape(),
                (c.nrows(), b.ncols())
            )));
        }
        Ok(Self { a, b, c, d })
    }

    /// `m` parallel integrators, `1/s · I_m`.
    pub fn integrator(m: usize) -> Self {
        Self {
            a: DMatrix::zeros(m, m),
            b: DMatrix::identity(m, m),
            c: DMatrix::identity(m, m),
            d: DMatrix::zeros(m, m),
        }
    }

    /// Memoryless gain with no states.
    pub fn static_gain(d: DMatrix<f64>) -> Self {
        let (p, m) = d.shape();
        Self {
            a: DMatrix::zeros(0, 0),
            b: DMatrix::zeros(0, m),
            c: DMatrix::zeros(p, 0),
            d,
        }
    }

    pub fn a(&self) -> &DMatrix<f64> {
        &self.a
    }

    pub fn b(&self) -> &DMatrix<f64> {
        &self.b
    }

    pub fn c(&self) -> &DMatrix<f64> {
        &self.c
    }

    pub fn d(&self) -> &DMatrix<f64> {
        &self.d
    }

    pub fn states(&self) -> usize {
        self.a.nrows()
    }

    pub fn inputs(&self) -> usize {
        self.b.ncols()
    }

    pub fn outputs(&self) -> usize {
        self.c.nrows()
    }

    /// `C (jωI − A)⁻¹ B + D`.
    pub fn frequency_response(&self, omega: f64) -> Result<CMatrix> {
        let n = self.states();
        let to_c = |m: &DMatrix<f64>| m.map(|x| Complex64::new(x, 0.0));
        let d = to_c(&self.d);
        if n == 0 {
            return Ok(d);
        }
        let shifted = CMatrix::identity(n, n) * Complex64::new(0.0, omega) - to_c(&self.a);
        let x = shifted.lu().solve(&to_c(&self.b)).ok_or_else(|| {
            Error::Invariant(format!("jω = {omega}j is an eigenvalue of A"))
        })?;
        Ok(to_c(&self.c) * x + d)
    }

    pub fn eigenvalues(&self) -> Vec<Complex64> {
        if self.states() == 0 {
            return Vec::new();
        }
        self.a.complex_eigenvalues().iter().copied().collect()
    }

    /// Largest real part among the eigenvalues of `A` (−∞ for static systems).
    pub fn spectral_abscissa(&self) -> f64 {
        self.eigenvalues()
            .iter()
            .map(|z| z.re)
            .fold(f64::NEG_INFINITY, f64::max)
    }
}
