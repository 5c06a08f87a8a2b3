use std::ops::Range;

use nalgebra::DMatrix;

use super::{AgentKind, Polynomial, TrajectoryLog};
use crate::error::{Error, Result};

/// Output-synchronization summary of a run.
#[derive(Debug, Clone, PartialEq)]
pub struct SyncMetrics {
    /// `max_{i,k} ‖y_i − y_k‖_∞` at every logged sample.
    pub sync_error: Vec<f64>,
    pub final_sync_error: f64,
    /// First sample time after which the error stays below the threshold.
    pub settled_time: Option<f64>,
    /// Mean of the final agent outputs, when settled.
    pub consensus_value: Option<Vec<f64>>,
    pub threshold: f64,
}

fn spread(y: &[f64], agents: usize, m: usize) -> f64 {
    (0..m)
        .map(|c| {
            let vals = (0..agents).map(|i| y[i * m + c]);
            let (lo, hi) = vals.fold((f64::INFINITY, f64::NEG_INFINITY), |(lo, hi), v| (lo.min(v), hi.max(v)));
            hi - lo
        })
        .fold(0.0, f64::max)
}

pub fn sync_metrics(log: &TrajectoryLog, threshold: f64) -> SyncMetrics {
    let (n, m) = (log.agent_count, log.output_dim);
    let sync_error: Vec<f64> = log.y1.iter().map(|y| spread(y, n, m)).collect();
    let final_sync_error = sync_error.last().copied().unwrap_or(f64::NAN);

    let settled_time = if log.diverged || !(final_sync_error < threshold) {
        None
    } else {
        let first_after = sync_error
            .iter()
            .rposition(|e| !(*e < threshold))
            .map_or(0, |i| i + 1);
        Some(log.times[first_after])
    };
    let consensus_value = settled_time.map(|_| {
        let y = log.y1.last().expect("settled implies samples");
        (0..m)
            .map(|c| (0..n).map(|i| y[i * m + c]).sum::<f64>() / n as f64)
            .collect()
    });
    SyncMetrics {
        sync_error,
        final_sync_error,
        settled_time,
        consensus_value,
        threshold,
    }
}

/// One additive piece of a storage function over the full loop state.
#[derive(Debug, Clone, PartialEq)]
pub enum StorageTerm {
    /// `½ xᵀ P x` over a slice of the state.
    Quadratic { range: Range<usize>, weight: DMatrix<f64> },
    /// `∫_0^{x_i} h(σ) dσ`.
    PolynomialIntegral { index: usize, h: Polynomial },
}

#[derive(Debug, Clone, PartialEq, Default)]
pub struct StorageSpec {
    pub terms: Vec<StorageTerm>,
}

impl StorageSpec {
    pub fn new(terms: Vec<StorageTerm>) -> Self {
        Self { terms }
    }

    /// `½ ‖x‖²` over a slice of the state.
    pub fn half_norm_squared(range: Range<usize>) -> StorageTerm {
        let n = range.len();
        StorageTerm::Quadratic {
            range,
            weight: DMatrix::identity(n, n),
        }
    }

    pub fn evaluate(&self, x: &[f64]) -> f64 {
        self.terms
            .iter()
            .map(|t| match t {
                StorageTerm::Quadratic { range, weight } => {
                    let v = &x[range.clone()];
                    let mut acc = 0.0;
                    for i in 0..v.len() {
                        for j in 0..v.len() {
                            acc += v[i] * weight[(i, j)] * v[j];
                        }
                    }
                    0.5 * acc
                }
                StorageTerm::PolynomialIntegral { index, h } => h.integral(x[*index]),
            })
            .sum()
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct AuditReport {
    /// Why the audit did not run, if it did not.
    pub skipped: Option<String>,
    pub values: Vec<f64>,
    /// Largest one-sample increase `V(t_{k+1}) − V(t_k)` (≤ 0 when nonincreasing).
    pub max_increase: f64,
    /// `V(T) − V(0)`.
    pub drift: f64,
    /// Allowed increase per sample, proportional to `h⁴`.
    pub slack: f64,
    pub nonincreasing: bool,
}

/// Discrete check that the storage function never increases beyond the
/// integrator's error level along the logged trajectory.
pub fn energy_audit(log: &TrajectoryLog, storage: Option<&StorageSpec>) -> AuditReport {
    let Some(spec) = storage else {
        return AuditReport {
            skipped: Some("no storage function available for this run; audit skipped".into()),
            values: Vec::new(),
            max_increase: f64::NAN,
            drift: f64::NAN,
            slack: f64::NAN,
            nonincreasing: false,
        };
    };
    let values: Vec<f64> = log.states.iter().map(|x| spec.evaluate(x)).collect();
    let max_increase = values
        .windows(2)
        .map(|w| w[1] - w[0])
        .fold(f64::NEG_INFINITY, f64::max);
    let v0 = values.first().copied().unwrap_or(0.0);
    let drift = values.last().copied().unwrap_or(v0) - v0;
    let slack = 1e3 * log.step.powi(4) * v0.abs().max(1.0);
    AuditReport {
        skipped: None,
        nonincreasing: !(max_increase > slack),
        values,
        max_increase,
        drift,
        slack,
    }
}

/// `f(x) = ½ q (x − b)²`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct QuadraticObjective {
    pub curvature: f64,
    pub offset: f64,
}

impl QuadraticObjective {
    pub fn gradient(&self, x: f64) -> f64 {
        self.curvature * (x - self.offset)
    }
}

/// Minimizer of `Σ f_i`: the curvature-weighted mean of the offsets.
pub fn zgs_optimum(fns: &[QuadraticObjective]) -> f64 {
    let q: f64 = fns.iter().map(|f| f.curvature).sum();
    fns.iter().map(|f| f.curvature * f.offset).sum::<f64>() / q
}

/// `max_t |Σ_i ∇f_i(x_i(t)) − Σ_i ∇f_i(x_i(0))|`.
pub fn zgs_invariant(log: &TrajectoryLog, fns: &[QuadraticObjective]) -> Result<f64> {
    if log.agent_kinds.iter().any(|k| *k != AgentKind::GradientFlow) {
        return Err(Error::InvalidParameter(
            "gradient-sum invariant needs gradient-flow agents".into(),
        ));
    }
    if fns.len() != log.agent_count {
        return Err(Error::DimensionMismatch(format!(
            "{} objectives for {} agents",
            fns.len(),
            log.agent_count
        )));
    }
    let gradient_sum = |x: &[f64]| -> f64 {
        fns.iter()
            .zip(&log.agent_state_ranges)
            .map(|(f, r)| f.gradient(x[r.start]))
            .sum()
    };
    let Some(first) = log.states.first() else {
        return Ok(0.0);
    };
    let g0 = gradient_sum(first);
    Ok(log
        .states
        .iter()
        .map(|x| (gradient_sum(x) - g0).abs())
        .fold(0.0, f64::max))
}
