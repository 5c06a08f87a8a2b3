//! Built-in scenarios with fixed parameters and initial conditions.
//!
//! Each scenario returns a JSON report plus the simulation runs it made, so
//! the command-line front end, the runnable examples, and the tests all
//! share one source of truth for the setups.

use nalgebra::DMatrix;
use num_complex::Complex64;
use serde_json::{json, Value};

use crate::error::{Error, Result};
use crate::io::{sweep_csv, PfcJson, VerdictJson};
use crate::lti::{PoleChain, PoleResidueSystem, StateSpaceSystem};
use crate::netsim::{
    assemble, assemble_feedback, energy_audit, run, sync_metrics, zgs_invariant, zgs_optimum, AgentModel,
    AuditReport, ClosedLoopSystem, Compensator, FeedbackLoopConfig, NetworkConfig, Polynomial, QuadraticObjective,
    SimSettings, StorageSpec, StorageTerm, SyncMetrics, TrajectoryLog,
};
use crate::passivity::{check_positive_real, estimate_ifp_index, sweep, FrequencyGrid, GridSpec, PassivityVerdict};
use crate::pfc_design::{design_derivative_pfc, design_siso_pfc};
use crate::signed_graph::{compute_ofp_radius, Edge, SignedDigraph};

pub const NAMES: [&str; 5] = ["example1", "example2", "example3", "example4", "pd-consensus"];

/// Overrides shared by all scenarios; `None` keeps the scenario default.
#[derive(Debug, Clone, Default)]
pub struct ScenarioOptions {
    pub step: Option<f64>,
    pub horizon: Option<f64>,
    pub sigma: Option<f64>,
    pub slack: Option<f64>,
    pub dc: Option<f64>,
    pub tau: Option<f64>,
    pub pfc: Option<PfcJson>,
    pub grid: GridSpec,
}

impl ScenarioOptions {
    fn settings(&self, default_horizon: f64) -> SimSettings {
        let mut s = SimSettings::default();
        s.horizon = default_horizon;
        if let Some(h) = self.step {
            s.step = h;
        }
        if let Some(t) = self.horizon {
            s.horizon = t;
        }
        s
    }
}

/// One simulation made by a scenario.
#[derive(Debug, Clone)]
pub struct ScenarioRun {
    pub label: String,
    pub log: TrajectoryLog,
    pub metrics: SyncMetrics,
    pub audit: Option<AuditReport>,
    pub gradient_sum_drift: Option<f64>,
}

#[derive(Debug, Clone)]
pub struct ScenarioOutcome {
    pub name: String,
    pub report: Value,
    pub runs: Vec<ScenarioRun>,
    /// Extra CSV artifacts as `(file name, contents)`.
    pub tables: Vec<(String, String)>,
}

impl ScenarioOutcome {
    pub fn diverged(&self) -> bool {
        self.runs.iter().any(|r| r.log.diverged)
    }

    pub fn run(&self, label: &str) -> Option<&ScenarioRun> {
        self.runs.iter().find(|r| r.label == label)
    }
}

pub fn run_scenario(name: &str, opts: &ScenarioOptions) -> Result<ScenarioOutcome> {
    match name {
        "example1" => example1(opts),
        "example2" => example2(opts),
        "example3" => example3(opts),
        "example4" => example4(opts),
        "pd-consensus" => pd_consensus(opts),
        other => Err(Error::InvalidParameter(format!(
            "unknown scenario `{other}` (expected one of {})",
            NAMES.join(", ")
        ))),
    }
}

fn run_loop(label: &str, sys: &ClosedLoopSystem, settings: &SimSettings) -> Result<ScenarioRun> {
    let log = run(sys, settings)?;
    let metrics = sync_metrics(&log, settings.sync_threshold);
    Ok(ScenarioRun { label: label.into(), log, metrics, audit: None, gradient_sum_drift: None })
}

fn finite(v: f64) -> Value {
    if v.is_finite() {
        json!(v)
    } else {
        Value::Null
    }
}

fn run_summary(r: &ScenarioRun) -> Value {
    let final_state = r.log.final_state().unwrap_or(&[]);
    json!({
        "label": r.label,
        "diverged": r.log.diverged,
        "final_time": r.log.times.last().copied().unwrap_or(0.0),
        "final_state_norm": finite(final_state.iter().map(|v| v * v).sum::<f64>().sqrt()),
        "final_sync_error": finite(r.metrics.final_sync_error),
        "settled_time": r.metrics.settled_time,
        "consensus_value": r.metrics.consensus_value,
    })
}

// ---------------------------------------------------------------- example1

/// `h(x) = x³`.
pub fn cubic() -> Polynomial {
    Polynomial::monomial(3)
}

/// Two lossless blocks `ẋ_i = u_i`, `y_i = x_i³` in negative feedback, with
/// or without the first-order compensator `1/(s + 1)` on the forward block.
///
/// The loop convention `u_1 = −y_2`, `u_2 = ỹ_1` mirrors the forward state
/// and the compensator state relative to writing the loop as
/// `ẋ_1 = h(x_2)`, `ẋ_2 = −h(x_1) − x_c`; the start `(−1, 1, 0)` here is
/// `(1, 1, 0)` in that form.
pub fn example1_config(with_pfc: bool, settings: SimSettings) -> Result<FeedbackLoopConfig> {
    let pfc = if with_pfc {
        Compensator::Dynamic(PoleResidueSystem::siso(&[(Complex64::new(1.0, 0.0), vec![Complex64::new(1.0, 0.0)])], 0.0)?)
    } else {
        Compensator::None
    };
    Ok(FeedbackLoopConfig {
        forward: AgentModel::integrator_static_output(cubic(), -1.0)?,
        feedback: AgentModel::integrator_static_output(cubic(), 1.0)?,
        pfc,
        settings,
    })
}

/// `Σ ∫h(x_i) + ½ x_c²` over the assembled loop.
pub fn example1_storage(sys: &ClosedLoopSystem) -> StorageSpec {
    let mut terms = vec![
        StorageTerm::PolynomialIntegral { index: sys.agent_state_ranges()[0].start, h: cubic() },
        StorageTerm::PolynomialIntegral { index: sys.feedback_state_ranges()[0].start, h: cubic() },
    ];
    let pfc = sys.pfc_state_ranges()[0].clone();
    if !pfc.is_empty() {
        terms.push(StorageSpec::half_norm_squared(pfc));
    }
    StorageSpec::new(terms)
}

pub fn example1(opts: &ScenarioOptions) -> Result<ScenarioOutcome> {
    let settings = opts.settings(50.0);
    let mut runs = Vec::new();
    for (label, with_pfc) in [("without_pfc", false), ("with_pfc", true)] {
        let sys = assemble_feedback(&example1_config(with_pfc, settings)?)?;
        let mut r = run_loop(label, &sys, &settings)?;
        r.audit = Some(energy_audit(&r.log, Some(&example1_storage(&sys))));
        runs.push(r);
    }
    let summaries: Vec<Value> = runs
        .iter()
        .map(|r| {
            let audit = r.audit.as_ref().expect("audited above");
            let mut s = run_summary(r);
            s["storage_initial"] = finite(audit.values[0]);
            s["storage_drift"] = finite(audit.drift);
            s["storage_max_increase"] = finite(audit.max_increase);
            s["storage_nonincreasing"] = json!(audit.nonincreasing);
            s
        })
        .collect();
    Ok(ScenarioOutcome {
        name: "example1".into(),
        report: json!({ "scenario": "example1", "output_map": "x^3", "runs": summaries }),
        runs,
        tables: Vec::new(),
    })
}

// ---------------------------------------------------------------- example2

/// `1/(s + 0.5)²`.
pub fn example2_plant() -> PoleResidueSystem {
    PoleResidueSystem::siso(&[(Complex64::new(0.5, 0.0), vec![Complex64::new(0.0, 0.0), Complex64::new(1.0, 0.0)])], 0.0)
        .expect("valid plant")
}

/// `a/(s + 0.5)`.
pub fn example2_compensator(a: f64) -> PoleResidueSystem {
    PoleResidueSystem::new((1, 1), vec![PoleChain::simple_real(Complex64::new(0.5, 0.0), &DMatrix::from_element(1, 1, a))], DMatrix::zeros(1, 1))
        .expect("valid compensator")
}

/// Verdict for `P + a/(s + 0.5)` on the default grid layout.
pub fn example2_verdict(a: f64, spec: &GridSpec) -> Result<PassivityVerdict> {
    let g = example2_plant().parallel(&example2_compensator(a))?;
    check_positive_real(&g, &FrequencyGrid::for_system(&g, spec)?)
}

pub fn example2(opts: &ScenarioOptions) -> Result<ScenarioOutcome> {
    let slack = opts.slack.unwrap_or(1e-6);
    let plant = example2_plant();
    let report = design_siso_pfc(&plant, 0.0)?;
    let a_min = report.gains[0].bound;
    let below = 1.999;
    let above = a_min + slack;

    let grid = FrequencyGrid::for_system(&plant, &opts.grid)?;
    let plant_nu = estimate_ifp_index(&plant, &grid)?;
    let plant_verdict = check_positive_real(&plant, &grid)?;
    let v_below = example2_verdict(below, &opts.grid)?;
    let v_above = example2_verdict(above, &opts.grid)?;

    let mut tables = vec![("plant_sweep.csv".to_string(), sweep_csv(&sweep(&plant, &grid)?.0, (1, 1)))];
    for (name, a) in [("compensated_below_sweep.csv", below), ("compensated_at_bound_sweep.csv", above)] {
        let g = plant.parallel(&example2_compensator(a))?;
        let grid = FrequencyGrid::for_system(&g, &opts.grid)?;
        tables.push((name.into(), sweep_csv(&sweep(&g, &grid)?.0, (1, 1))));
    }

    Ok(ScenarioOutcome {
        name: "example2".into(),
        report: json!({
            "scenario": "example2",
            "a_min": a_min,
            "slack": slack,
            "plant": {
                "ifp_index": plant_nu,
                "worst_omega": plant_verdict.worst_frequency,
                "verdict": VerdictJson::from_verdict(&plant_verdict),
            },
            "below_bound": { "a": below, "verdict": VerdictJson::from_verdict(&v_below) },
            "above_bound": { "a": above, "verdict": VerdictJson::from_verdict(&v_above) },
        }),
        runs: Vec::new(),
        tables,
    })
}

// ---------------------------------------------------------------- example3

pub const ZGS_CURVATURES: [f64; 3] = [1.0, 2.0, 4.0];
pub const ZGS_OFFSETS: [f64; 3] = [0.0, 1.0, 2.0];

/// Unit-weight directed cycle `0 → 1 → 2 → 0`.
pub fn directed_cycle(n: usize) -> SignedDigraph {
    let edges: Vec<Edge> = (0..n).map(|i| Edge { from: i, to: (i + 1) % n, weight: 1.0 }).collect();
    SignedDigraph::from_edges(n, &edges).expect("valid cycle")
}

pub fn zgs_objectives() -> Vec<QuadraticObjective> {
    ZGS_CURVATURES
        .iter()
        .zip(ZGS_OFFSETS)
        .map(|(&q, b)| QuadraticObjective { curvature: q, offset: b })
        .collect()
}

/// Gradient-flow agents started at their local minimizers.
///
/// The slowest mode decays like `σ t`, so the default horizon is `50/σ`.
pub fn zgs_config(sigma: f64, opts: &ScenarioOptions) -> Result<NetworkConfig> {
    let agents = zgs_objectives()
        .iter()
        .map(|f| AgentModel::gradient_flow(f.curvature, f.offset, f.offset))
        .collect::<Result<Vec<_>>>()?;
    let mut settings = opts.settings(50.0 / sigma.min(1.0));
    settings.sync_threshold = 1e-6;
    Ok(NetworkConfig { agents, graph: directed_cycle(3), sigma, pfc: Vec::new(), settings })
}

/// `(s + 1)/(s (s + q))` as `q⁻¹/s + (1 − q⁻¹)/(s + q)`.
pub fn modified_pi_plant(q: f64) -> Result<PoleResidueSystem> {
    PoleResidueSystem::siso(
        &[
            (Complex64::new(0.0, 0.0), vec![Complex64::new(1.0 / q, 0.0)]),
            (Complex64::new(q, 0.0), vec![Complex64::new(1.0 - 1.0 / q, 0.0)]),
        ],
        0.0,
    )
}

/// `(q⁻¹ − 1)/(s + q)`, which cancels the second term of the plant.
pub fn modified_pi_compensator(q: f64) -> Result<PoleResidueSystem> {
    PoleResidueSystem::siso(&[(Complex64::new(q, 0.0), vec![Complex64::new(1.0 / q - 1.0, 0.0)])], 0.0)
}

pub fn example3(opts: &ScenarioOptions) -> Result<ScenarioOutcome> {
    let sigmas = match opts.sigma {
        Some(s) => vec![s],
        None => vec![0.1, 1.0, 10.0],
    };
    let fns = zgs_objectives();
    let optimum = zgs_optimum(&fns);
    let mut runs = Vec::new();
    for sigma in sigmas {
        let cfg = zgs_config(sigma, opts)?;
        let sys = assemble(&cfg)?;
        let mut r = run_loop(&format!("sigma_{sigma}"), &sys, &cfg.settings)?;
        r.gradient_sum_drift = Some(zgs_invariant(&r.log, &fns)?);
        runs.push(r);
    }

    let mut comparison = Vec::new();
    for q in [0.5, 1.0, 2.0, 4.0] {
        let plant = modified_pi_plant(q)?;
        let grid = FrequencyGrid::for_system(&plant, &opts.grid)?;
        let alone = check_positive_real(&plant, &grid)?;
        let sum = plant.parallel(&modified_pi_compensator(q)?)?;
        let with_pfc = check_positive_real(&sum, &FrequencyGrid::for_system(&sum, &opts.grid)?)?;
        comparison.push(json!({
            "curvature": q,
            "plant_positive_real": alone.is_positive_real,
            "plant_ifp_index": alone.ifp_index,
            "compensated_positive_real": with_pfc.is_positive_real,
            "compensated_margin": with_pfc.margin,
        }));
    }

    let summaries: Vec<Value> = runs
        .iter()
        .map(|r| {
            let mut s = run_summary(r);
            s["gradient_sum_drift"] = json!(r.gradient_sum_drift);
            s
        })
        .collect();
    Ok(ScenarioOutcome {
        name: "example3".into(),
        report: json!({
            "scenario": "example3",
            "curvatures": ZGS_CURVATURES,
            "offsets": ZGS_OFFSETS,
            "optimum": optimum,
            "runs": summaries,
            "modified_pi": comparison,
        }),
        runs,
        tables: Vec::new(),
    })
}

// ---------------------------------------------------------------- example4

/// Signed, weight-balanced Laplacian with an indefinite symmetric part.
pub fn example4_laplacian() -> DMatrix<f64> {
    DMatrix::from_row_slice(
        4,
        4,
        &[-1.0, 0.0, -1.0, 2.0, -1.0, 1.0, 0.0, 0.0, 2.0, -1.0, -1.0, 0.0, 0.0, 0.0, 2.0, -2.0],
    )
}

pub fn example4_graph() -> SignedDigraph {
    SignedDigraph::from_laplacian(&example4_laplacian()).expect("valid Laplacian")
}

/// `s/(s² + 1)`.
pub fn oscillator() -> StateSpaceSystem {
    StateSpaceSystem::new(
        DMatrix::from_row_slice(2, 2, &[0.0, -1.0, 1.0, 0.0]),
        DMatrix::from_row_slice(2, 1, &[1.0, 0.0]),
        DMatrix::from_row_slice(1, 2, &[1.0, 0.0]),
        DMatrix::zeros(1, 1),
    )
    .expect("valid oscillator")
}

pub const EXAMPLE4_INITIAL: [[f64; 2]; 4] = [[1.0, 0.0], [-0.5, 0.5], [0.3, -1.0], [0.8, 0.2]];

pub fn example4_config(pfc: Vec<Compensator>, settings: SimSettings) -> Result<NetworkConfig> {
    let agents = EXAMPLE4_INITIAL
        .iter()
        .map(|x0| AgentModel::lti(oscillator(), x0.to_vec()))
        .collect::<Result<Vec<_>>>()?;
    Ok(NetworkConfig { agents, graph: example4_graph(), sigma: 1.0, pfc, settings })
}

fn uniform(pfc: &PfcJson, n: usize, m: usize) -> Result<Vec<Compensator>> {
    match pfc {
        PfcJson::None => Ok(Vec::new()),
        p => (0..n).map(|_| p.to_compensator("pfc", m, None)).collect(),
    }
}

pub fn example4(opts: &ScenarioOptions) -> Result<ScenarioOutcome> {
    let settings = opts.settings(50.0);
    let pfc = opts.pfc.clone().unwrap_or(PfcJson::Static { nu: 1.0 });
    let mut cfg = example4_config(uniform(&pfc, 4, 1)?, settings)?;
    if let Some(s) = opts.sigma {
        cfg.sigma = s;
    }
    let sys = assemble(&cfg)?;
    let r = run_loop("example4", &sys, &settings)?;
    let radius = compute_ofp_radius(&(example4_laplacian() * cfg.sigma))?;
    Ok(ScenarioOutcome {
        name: "example4".into(),
        report: json!({
            "scenario": "example4",
            "ofp_radius": radius,
            "pfc": pfc,
            "loop_condition": finite(sys.loop_condition()),
            "initial_sync_error": r.metrics.sync_error[0],
            "run": run_summary(&r),
        }),
        runs: vec![r],
        tables: Vec::new(),
    })
}

// ---------------------------------------------------------------- pd-consensus

pub const PD_INITIAL: [f64; 4] = [1.0, -0.5, 0.3, 0.8];

/// Integrators on the signed graph with a static (PD) or low-pass
/// (practical derivative) compensator of DC gain `d_c`.
pub fn pd_config(dc: f64, tau: Option<f64>, settings: SimSettings) -> Result<NetworkConfig> {
    let agents = PD_INITIAL
        .iter()
        .map(|&x0| AgentModel::lti(StateSpaceSystem::integrator(1), vec![x0]))
        .collect::<Result<Vec<_>>>()?;
    let pfc = match tau {
        None => Compensator::Static(DMatrix::from_element(1, 1, dc)),
        Some(tau) => Compensator::Dynamic(design_derivative_pfc(dc, tau, 1)?),
    };
    Ok(NetworkConfig { agents, graph: example4_graph(), sigma: 1.0, pfc: vec![pfc; 4], settings })
}

pub fn pd_consensus(opts: &ScenarioOptions) -> Result<ScenarioOutcome> {
    let settings = opts.settings(50.0);
    let (dc, tau) = match &opts.pfc {
        Some(PfcJson::Static { nu }) => (*nu, None),
        Some(PfcJson::Derivative { dc, tau }) => (*dc, Some(*tau)),
        Some(_) => {
            return Err(Error::InvalidParameter(
                "pd-consensus accepts only static:ν or derivative:d_c,τ compensators".into(),
            ))
        }
        None => (opts.dc.unwrap_or(1.0), opts.tau),
    };
    let mut cfg = pd_config(dc, tau, settings)?;
    if let Some(s) = opts.sigma {
        cfg.sigma = s;
    }
    let sys = assemble(&cfg)?;
    let r = run_loop("pd_consensus", &sys, &settings)?;
    let radius = compute_ofp_radius(&(example4_laplacian() * cfg.sigma))?;
    Ok(ScenarioOutcome {
        name: "pd-consensus".into(),
        report: json!({
            "scenario": "pd-consensus",
            "dc": dc,
            "tau": tau,
            "ofp_radius": radius,
            "dc_exceeds_radius": dc > radius,
            "loop_condition": finite(sys.loop_condition()),
            "initial_mean": PD_INITIAL.iter().sum::<f64>() / 4.0,
            "run": run_summary(&r),
        }),
        runs: vec![r],
        tables: Vec::new(),
    })
}
