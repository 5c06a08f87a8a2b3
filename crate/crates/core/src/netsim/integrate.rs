use std::ops::Range;

use super::{AgentKind, ClosedLoopSystem};
use crate::error::{Error, Result};

/// Integration and logging parameters.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SimSettings {
    /// RK4 step (s).
    pub step: f64,
    /// Simulated time (s); rounded up to a whole number of logged samples.
    pub horizon: f64,
    /// Log every `output_stride` steps.
    pub output_stride: usize,
    /// Abort once the state norm exceeds this.
    pub divergence_guard: f64,
    /// Threshold used for `settled_time`.
    pub sync_threshold: f64,
}

impl Default for SimSettings {
    fn default() -> Self {
        Self {
            step: 1e-3,
            horizon: 50.0,
            output_stride: 10,
            divergence_guard: 1e9,
            sync_threshold: 1e-2,
        }
    }
}

/// Uniformly sampled trajectory of a closed loop.
#[derive(Debug, Clone, PartialEq)]
pub struct TrajectoryLog {
    pub times: Vec<f64>,
    /// Full state vector at each sample.
    pub states: Vec<Vec<f64>>,
    /// Agent outputs `y_1`, stacked over agents.
    pub y1: Vec<Vec<f64>>,
    /// Compensator outputs `y_c` (zero for agents without one).
    pub yc: Vec<Vec<f64>>,
    /// Coupling outputs `y_2`.
    pub y2: Vec<Vec<f64>>,
    pub diverged: bool,
    pub step: f64,
    pub agent_count: usize,
    pub output_dim: usize,
    pub agent_kinds: Vec<AgentKind>,
    pub agent_state_ranges: Vec<Range<usize>>,
    pub pfc_state_ranges: Vec<Range<usize>>,
}

impl TrajectoryLog {
    pub fn len(&self) -> usize {
        self.times.len()
    }

    pub fn is_empty(&self) -> bool {
        self.times.is_empty()
    }

    pub fn final_state(&self) -> Option<&[f64]> {
        self.states.last().map(|s| s.as_slice())
    }
}

fn rk4_step(sys: &ClosedLoopSystem, x: &mut [f64], h: f64, k: &mut [Vec<f64>; 4], tmp: &mut [f64]) {
    let n = x.len();
    sys.derivative(x, &mut k[0]);
    for i in 0..n {
        tmp[i] = x[i] + 0.5 * h * k[0][i];
    }
    sys.derivative(tmp, &mut k[1]);
    for i in 0..n {
        tmp[i] = x[i] + 0.5 * h * k[1][i];
    }
    sys.derivative(tmp, &mut k[2]);
    for i in 0..n {
        tmp[i] = x[i] + h * k[2][i];
    }
    sys.derivative(tmp, &mut k[3]);
    for i in 0..n {
        x[i] += h / 6.0 * (k[0][i] + 2.0 * k[1][i] + 2.0 * k[2][i] + k[3][i]);
    }
}

/// Classical fixed-step RK4 from the system's initial state.
pub fn run(sys: &ClosedLoopSystem, settings: &SimSettings) -> Result<TrajectoryLog> {
    run_from(sys, sys.initial_state(), settings)
}

/// RK4 from an explicit initial state.
pub fn run_from(sys: &ClosedLoopSystem, x0: &[f64], settings: &SimSettings) -> Result<TrajectoryLog> {
    if !(settings.step > 0.0 && settings.step.is_finite()) {
        return Err(Error::InvalidParameter(format!("step must be > 0, got {}", settings.step)));
    }
    if !(settings.horizon > 0.0 && settings.horizon.is_finite()) {
        return Err(Error::InvalidParameter(format!(
            "horizon must be > 0, got {}",
            settings.horizon
        )));
    }
    if settings.output_stride == 0 {
        return Err(Error::InvalidParameter("output stride must be positive".into()));
    }
    if x0.len() != sys.state_dim() {
        return Err(Error::DimensionMismatch(format!(
            "initial state has {} entries, loop has {} states",
            x0.len(),
            sys.state_dim()
        )));
    }
    let h = settings.step;
    let stride = settings.output_stride;
    let samples = ((settings.horizon / h).round() as usize).div_ceil(stride).max(1);

    let mut log = TrajectoryLog {
        times: Vec::with_capacity(samples + 1),
        states: Vec::with_capacity(samples + 1),
        y1: Vec::with_capacity(samples + 1),
        yc: Vec::with_capacity(samples + 1),
        y2: Vec::with_capacity(samples + 1),
        diverged: false,
        step: h,
        agent_count: sys.agent_count(),
        output_dim: sys.output_dim(),
        agent_kinds: sys.agents().iter().map(|a| a.kind()).collect(),
        agent_state_ranges: sys.agent_state_ranges().to_vec(),
        pfc_state_ranges: sys.pfc_state_ranges().to_vec(),
    };
    let record = |log: &mut TrajectoryLog, t: f64, x: &[f64]| {
        let s = sys.signals(x);
        log.times.push(t);
        log.states.push(x.to_vec());
        log.y1.push(s.y1.as_slice().to_vec());
        log.yc.push(s.yc.as_slice().to_vec());
        log.y2.push(s.y2.as_slice().to_vec());
    };

    let n = x0.len();
    let mut x = x0.to_vec();
    let mut k = [vec![0.0; n], vec![0.0; n], vec![0.0; n], vec![0.0; n]];
    let mut tmp = vec![0.0; n];
    record(&mut log, 0.0, &x);
    'outer: for sample in 1..=samples {
        for _ in 0..stride {
            rk4_step(sys, &mut x, h, &mut k, &mut tmp);
            let norm = x.iter().map(|v| v * v).sum::<f64>().sqrt();
            if !(norm <= settings.divergence_guard) {
                log.diverged = true;
                break 'outer;
            }
        }
        record(&mut log, (sample * stride) as f64 * h, &x);
    }
    Ok(log)
}
