//! Closed-loop assembly and simulation of agents, compensators, and couplings.
//!
//! The forward path holds the agents `P_i`, each optionally with a parallel
//! compensator `C_i` (`u_c = u_1`, `ỹ_1 = y_1 + y_c`). The feedback path is
//! either the diffusive coupling `y_2 = σ (L ⊗ I_m) u_2` or a second set of
//! dynamic systems. With `e_1 = e_2 = 0` the interconnection is
//! `u_1 = −y_2`, `u_2 = ỹ_1`. Writing each side as a free response plus
//! feedthrough, `ỹ_1 = ȳ_1 + D_1 u_1` and `y_2 = ȳ_2 + D_2 u_2`, the
//! algebraic loop is
//!
//! ```text
//! (I + D_2 D_1) u_1 = −(ȳ_2 + D_2 ȳ_1)
//! ```
//!
//! which must be nonsingular for the loop to be well-posed.

mod agent;
mod integrate;
mod metrics;

pub use agent::{AgentDynamics, AgentKind, AgentModel, Polynomial};
pub use integrate::{run, run_from, SimSettings, TrajectoryLog};
pub use metrics::{
    energy_audit, sync_metrics, zgs_invariant, zgs_optimum, AuditReport, QuadraticObjective,
    StorageSpec, StorageTerm, SyncMetrics,
};

use std::ops::Range;

use nalgebra::{DMatrix, DVector, Dyn, LU};

use crate::error::{Error, Result};
use crate::lti::{PoleResidueSystem, StateSpaceSystem};
use crate::signed_graph::{build_laplacian, SignedDigraph};

/// Compensator placed in parallel with one agent.
#[derive(Debug, Clone, PartialEq, Default)]
pub enum Compensator {
    #[default]
    None,
    /// Memoryless `y_c = D_c u_c`.
    Static(DMatrix<f64>),
    /// Stable dynamic compensator, realized for simulation.
    Dynamic(PoleResidueSystem),
}

impl Compensator {
    fn realize(&self, m: usize) -> Result<Option<StateSpaceSystem>> {
        let ss = match self {
            Compensator::None => return Ok(None),
            Compensator::Static(d) => StateSpaceSystem::static_gain(d.clone()),
            Compensator::Dynamic(sys) => {
                if sys.chains().iter().any(|c| c.pole().re <= 0.0) {
                    return Err(Error::InvalidParameter(
                        "compensator poles must lie strictly in the left half-plane".into(),
                    ));
                }
                sys.realize()?
            }
        };
        if ss.inputs() != m || ss.outputs() != m {
            return Err(Error::DimensionMismatch(format!(
                "compensator is {}x{}, agents have dimension {m}",
                ss.outputs(),
                ss.inputs()
            )));
        }
        Ok(Some(ss))
    }
}

/// Agents coupled through a signed digraph, each with an optional PFC.
#[derive(Debug, Clone)]
pub struct NetworkConfig {
    pub agents: Vec<AgentModel>,
    pub graph: SignedDigraph,
    /// Coupling gain σ > 0.
    pub sigma: f64,
    /// One entry per agent; an empty list means no compensators.
    pub pfc: Vec<Compensator>,
    pub settings: SimSettings,
}

/// Two-block feedback loop `u_1 = −y_2`, `u_2 = ỹ_1` with dynamic systems on
/// both sides and an optional PFC on the forward block.
#[derive(Debug, Clone)]
pub struct FeedbackLoopConfig {
    pub forward: AgentModel,
    pub feedback: AgentModel,
    pub pfc: Compensator,
    pub settings: SimSettings,
}

#[derive(Debug, Clone)]
enum FeedbackPath {
    /// `σ (L ⊗ I_m)`.
    Coupling(DMatrix<f64>),
    Agents(Vec<AgentModel>),
}

/// Signals of the loop at one instant (stacked over agents).
#[derive(Debug, Clone, PartialEq)]
pub struct Signals {
    pub u1: DVector<f64>,
    pub y1: DVector<f64>,
    pub yc: DVector<f64>,
    pub y2: DVector<f64>,
}

/// Assembled, well-posed interconnection ready for integration.
#[derive(Debug, Clone)]
pub struct ClosedLoopSystem {
    agents: Vec<AgentModel>,
    pfcs: Vec<Option<StateSpaceSystem>>,
    feedback: FeedbackPath,
    dim: usize,
    agent_ranges: Vec<Range<usize>>,
    pfc_ranges: Vec<Range<usize>>,
    feedback_ranges: Vec<Range<usize>>,
    d1: DMatrix<f64>,
    d2: DMatrix<f64>,
    loop_lu: LU<f64, Dyn, Dyn>,
    condition: f64,
    initial: Vec<f64>,
}

fn block_diag(blocks: &[DMatrix<f64>]) -> DMatrix<f64> {
    let rows: usize = blocks.iter().map(|b| b.nrows()).sum();
    let cols: usize = blocks.iter().map(|b| b.ncols()).sum();
    let mut out = DMatrix::zeros(rows, cols);
    let (mut r, mut c) = (0, 0);
    for b in blocks {
        out.view_mut((r, c), b.shape()).copy_from(b);
        r += b.nrows();
        c += b.ncols();
    }
    out
}

fn common_dim(agents: &[AgentModel]) -> Result<usize> {
    let first = agents
        .first()
        .ok_or_else(|| Error::InvalidParameter("at least one agent is required".into()))?
        .dim();
    if let Some((i, a)) = agents.iter().enumerate().find(|(_, a)| a.dim() != first) {
        return Err(Error::DimensionMismatch(format!(
            "agent {i} has output dimension {}, expected {first}",
            a.dim()
        )));
    }
    Ok(first)
}

impl ClosedLoopSystem {
    fn build(
        agents: Vec<AgentModel>,
        compensators: &[Compensator],
        feedback: FeedbackPath,
    ) -> Result<Self> {
        let dim = common_dim(&agents)?;
        let pfcs = if compensators.is_empty() {
            vec![None; agents.len()]
        } else if compensators.len() == agents.len() {
            compensators
                .iter()
                .map(|c| c.realize(dim))
                .collect::<Result<Vec<_>>>()?
        } else {
            return Err(Error::DimensionMismatch(format!(
                "{} compensators for {} agents",
                compensators.len(),
                agents.len()
            )));
        };

        let mut offset = 0;
        let mut take = |n: usize| {
            let r = offset..offset + n;
            offset += n;
            r
        };
        let agent_ranges: Vec<_> = agents.iter().map(|a| take(a.states())).collect();
        let pfc_ranges: Vec<_> = pfcs
            .iter()
            .map(|p| take(p.as_ref().map_or(0, |s| s.states())))
            .collect();
        let feedback_ranges: Vec<_> = match &feedback {
            FeedbackPath::Agents(list) => list.iter().map(|a| take(a.states())).collect(),
            FeedbackPath::Coupling(_) => Vec::new(),
        };

        let mut initial: Vec<f64> = agents.iter().flat_map(|a| a.initial_state().to_vec()).collect();
        initial.extend(pfcs.iter().flat_map(|p| vec![0.0; p.as_ref().map_or(0, |s| s.states())]));
        if let FeedbackPath::Agents(list) = &feedback {
            initial.extend(list.iter().flat_map(|a| a.initial_state().to_vec()));
        }

        let d1 = block_diag(
            &agents
                .iter()
                .zip(&pfcs)
                .map(|(a, p)| match p {
                    Some(p) => a.feedthrough() + p.d(),
                    None => a.feedthrough(),
                })
                .collect::<Vec<_>>(),
        );
        let d2 = match &feedback {
            FeedbackPath::Coupling(k) => k.clone(),
            FeedbackPath::Agents(list) => {
                if list.iter().map(|a| a.dim()).sum::<usize>() != d1.nrows() {
                    return Err(Error::DimensionMismatch(
                        "feedback path dimension differs from forward path".into(),
                    ));
                }
                block_diag(&list.iter().map(|a| a.feedthrough()).collect::<Vec<_>>())
            }
        };

        let n = d1.nrows();
        let k = DMatrix::identity(n, n) + &d2 * &d1;
        let sv = k.clone().svd(false, false).singular_values;
        let (smax, smin) = (sv.max(), sv.min());
        let condition = if smin > 0.0 { smax / smin } else { f64::INFINITY };
        if smin <= 1e-12 * smax.max(1.0) {
            return Err(Error::NotWellPosed { cond: condition });
        }

        Ok(Self {
            agents,
            pfcs,
            feedback,
            dim,
            agent_ranges,
            pfc_ranges,
            feedback_ranges,
            d1,
            d2,
            loop_lu: k.lu(),
            condition,
            initial,
        })
    }

    pub fn state_dim(&self) -> usize {
        self.initial.len()
    }

    pub fn initial_state(&self) -> &[f64] {
        &self.initial
    }

    pub fn agent_count(&self) -> usize {
        self.agents.len()
    }

    pub fn agents(&self) -> &[AgentModel] {
        &self.agents
    }

    /// Output dimension `m` of each agent.
    pub fn output_dim(&self) -> usize {
        self.dim
    }

    pub fn agent_state_ranges(&self) -> &[Range<usize>] {
        &self.agent_ranges
    }

    pub fn pfc_state_ranges(&self) -> &[Range<usize>] {
        &self.pfc_ranges
    }

    pub fn feedback_state_ranges(&self) -> &[Range<usize>] {
        &self.feedback_ranges
    }

    /// Condition number of the algebraic-loop matrix `I + D_2 D_1`.
    pub fn loop_condition(&self) -> f64 {
        self.condition
    }

    /// Total forward-path feedthrough (agents plus compensators).
    pub fn forward_feedthrough(&self) -> &DMatrix<f64> {
        &self.d1
    }

    pub fn signals(&self, x: &[f64]) -> Signals {
        let n = self.d1.nrows();
        let m = self.dim;
        let mut agent_free = DVector::zeros(n);
        let mut pfc_free = DVector::zeros(n);
        for (i, a) in self.agents.iter().enumerate() {
            a.free_output(&x[self.agent_ranges[i].clone()], &mut agent_free.as_mut_slice()[i * m..(i + 1) * m]);
            if let Some(p) = &self.pfcs[i] {
                let xc = &x[self.pfc_ranges[i].clone()];
                for r in 0..m {
                    pfc_free[i * m + r] = (0..xc.len()).map(|j| p.c()[(r, j)] * xc[j]).sum();
                }
            }
        }
        let free1 = &agent_free + &pfc_free;
        let mut free2 = DVector::zeros(n);
        if let FeedbackPath::Agents(list) = &self.feedback {
            let mut row = 0;
            for (j, a) in list.iter().enumerate() {
                let d = a.dim();
                a.free_output(&x[self.feedback_ranges[j].clone()], &mut free2.as_mut_slice()[row..row + d]);
                row += d;
            }
        }
        let rhs = -(&free2 + &self.d2 * &free1);
        let u1 = self.loop_lu.solve(&rhs).expect("loop matrix checked nonsingular");

        let mut y1 = agent_free;
        let mut yc = pfc_free;
        for (i, a) in self.agents.iter().enumerate() {
            let ui = u1.rows(i * m, m);
            let da = a.feedthrough();
            let mut yi = y1.rows_mut(i * m, m);
            yi += &da * ui;
            if let Some(p) = &self.pfcs[i] {
                let mut yci = yc.rows_mut(i * m, m);
                yci += p.d() * ui;
            }
        }
        let y2 = -&u1;
        Signals { u1, y1, yc, y2 }
    }

    pub fn derivative(&self, x: &[f64], dx: &mut [f64]) {
        let s = self.signals(x);
        let m = self.dim;
        for (i, a) in self.agents.iter().enumerate() {
            let r = self.agent_ranges[i].clone();
            a.derivative(&x[r.clone()], &s.u1.as_slice()[i * m..(i + 1) * m], &mut dx[r]);
            if let Some(p) = &self.pfcs[i] {
                let r = self.pfc_ranges[i].clone();
                agent::affine_derivative(p, &x[r.clone()], &s.u1.as_slice()[i * m..(i + 1) * m], &mut dx[r]);
            }
        }
        if let FeedbackPath::Agents(list) = &self.feedback {
            // u_2 = ỹ_1 = y_1 + y_c
            let u2 = &s.y1 + &s.yc;
            let mut row = 0;
            for (j, a) in list.iter().enumerate() {
                let r = self.feedback_ranges[j].clone();
                let d = a.dim();
                a.derivative(&x[r.clone()], &u2.as_slice()[row..row + d], &mut dx[r]);
                row += d;
            }
        }
    }
}

/// Builds the networked closed loop `u_1 = −σ (L ⊗ I_m) ỹ_1`.
pub fn assemble(cfg: &NetworkConfig) -> Result<ClosedLoopSystem> {
    if cfg.agents.len() != cfg.graph.node_count() {
        return Err(Error::DimensionMismatch(format!(
            "{} agents on a graph with {} nodes",
            cfg.agents.len(),
            cfg.graph.node_count()
        )));
    }
    if !(cfg.sigma > 0.0 && cfg.sigma.is_finite()) {
        return Err(Error::InvalidParameter(format!("sigma must be > 0, got {}", cfg.sigma)));
    }
    let m = common_dim(&cfg.agents)?;
    let coupling = build_laplacian(&cfg.graph).kronecker(&DMatrix::identity(m, m)) * cfg.sigma;
    ClosedLoopSystem::build(cfg.agents.clone(), &cfg.pfc, FeedbackPath::Coupling(coupling))
}

/// Builds the two-block loop of [`FeedbackLoopConfig`].
pub fn assemble_feedback(cfg: &FeedbackLoopConfig) -> Result<ClosedLoopSystem> {
    ClosedLoopSystem::build(
        vec![cfg.forward.clone()],
        std::slice::from_ref(&cfg.pfc),
        FeedbackPath::Agents(vec![cfg.feedback.clone()]),
    )
}

/// Assembles, integrates, and scores a networked configuration.
pub fn simulate(cfg: &NetworkConfig) -> Result<(TrajectoryLog, SyncMetrics)> {
    let sys = assemble(cfg)?;
    let log = integrate::run(&sys, &cfg.settings)?;
    let metrics = sync_metrics(&log, cfg.settings.sync_threshold);
    Ok((log, metrics))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::signed_graph::Edge;

    fn oscillator(x0: [f64; 2]) -> AgentModel {
        let ss = StateSpaceSystem::new(
            DMatrix::from_row_slice(2, 2, &[0.0, -1.0, 1.0, 0.0]),
            DMatrix::from_row_slice(2, 1, &[1.0, 0.0]),
            DMatrix::from_row_slice(1, 2, &[1.0, 0.0]),
            DMatrix::zeros(1, 1),
        )
        .unwrap();
        AgentModel::lti(ss, x0.to_vec()).unwrap()
    }

    fn example_four_graph() -> SignedDigraph {
        SignedDigraph::from_laplacian(&DMatrix::from_row_slice(
            4,
            4,
            &[-1.0, 0.0, -1.0, 2.0, -1.0, 1.0, 0.0, 0.0, 2.0, -1.0, -1.0, 0.0, 0.0, 0.0, 2.0, -2.0],
        ))
        .unwrap()
    }

    fn config(pfc: Vec<Compensator>) -> NetworkConfig {
        NetworkConfig {
            agents: vec![
                oscillator([1.0, 0.0]),
                oscillator([-0.5, 0.5]),
                oscillator([0.3, -1.0]),
                oscillator([0.8, 0.2]),
            ],
            graph: example_four_graph(),
            sigma: 1.0,
            pfc,
            settings: SimSettings::default(),
        }
    }

    #[test]
    fn static_pfc_coupling_matches_closed_form() {
        let sys = assemble(&config(vec![Compensator::Static(DMatrix::identity(1, 1)); 4])).unwrap();
        let x = sys.initial_state().to_vec();
        let s = sys.signals(&x);
        let l = build_laplacian(&example_four_graph());
        let y = DVector::from_vec(vec![1.0, -0.5, 0.3, 0.8]);
        let expected = -(DMatrix::identity(4, 4) + &l).lu().solve(&(&l * &y)).unwrap();
        assert!((&s.u1 - expected).amax() < 1e-12);
    }

    #[test]
    fn no_pfc_is_plain_diffusive_coupling() {
        let sys = assemble(&config(Vec::new())).unwrap();
        let s = sys.signals(sys.initial_state());
        let l = build_laplacian(&example_four_graph());
        let y = DVector::from_vec(vec![1.0, -0.5, 0.3, 0.8]);
        assert!((&s.u1 + &l * &y).amax() < 1e-14);
        assert_eq!(s.yc.amax(), 0.0);
    }

    #[test]
    fn singular_loop_is_rejected() {
        // I + L D singular for D = −I when L has eigenvalue 1: 2-node path with weight ½
        let g = SignedDigraph::from_edges(
            2,
            &[Edge { from: 0, to: 1, weight: 0.5 }, Edge { from: 1, to: 0, weight: 0.5 }],
        )
        .unwrap();
        let cfg = NetworkConfig {
            agents: vec![oscillator([0.0, 0.0]), oscillator([1.0, 0.0])],
            graph: g,
            sigma: 1.0,
            pfc: vec![Compensator::Static(DMatrix::from_element(1, 1, -1.0)); 2],
            settings: SimSettings::default(),
        };
        assert!(matches!(assemble(&cfg), Err(Error::NotWellPosed { .. })));
    }

    #[test]
    fn rejects_agent_count_mismatch() {
        let mut cfg = config(Vec::new());
        cfg.agents.pop();
        assert!(matches!(assemble(&cfg), Err(Error::DimensionMismatch(_))));
    }
}
