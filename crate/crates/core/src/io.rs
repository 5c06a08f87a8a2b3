//! JSON schemas, fixed-precision serialization, and CSV writers.
//!
//! Every float written by this module uses 17 significant digits in
//! scientific notation so identical runs produce byte-identical files.

use std::fmt::Write as _;
use std::io::{self, Write};
use std::path::Path;

use nalgebra::DMatrix;
use num_complex::Complex64;
use serde::{Deserialize, Serialize};
use serde_json::ser::{Formatter, PrettyFormatter};

use crate::error::{Error, Result};
use crate::lti::{CMatrix, PoleChain, PoleResidueSystem, RationalSiso, StateSpaceSystem};
use crate::netsim::{AgentModel, Compensator, Polynomial, SimSettings, SyncMetrics, TrajectoryLog};
use crate::passivity::{PassivityVerdict, SweepPoint};
use crate::pfc_design::{design_derivative_pfc, design_pfc, PfcDesignReport};
use crate::signed_graph::{Edge, LaplacianAnalysis, SignedDigraph};

/// `{:.16e}`: 17 significant digits.
pub fn format_float(v: f64) -> String {
    format!("{v:.16e}")
}

/// Pretty JSON formatter that writes every float via [`format_float`].
struct FixedFloatFormatter<'a>(PrettyFormatter<'a>);

impl Formatter for FixedFloatFormatter<'_> {
    fn write_f64<W: ?Sized + Write>(&mut self, writer: &mut W, value: f64) -> io::Result<()> {
        writer.write_all(format_float(value).as_bytes())
    }

    fn write_f32<W: ?Sized + Write>(&mut self, writer: &mut W, value: f32) -> io::Result<()> {
        self.write_f64(writer, value as f64)
    }

    fn begin_array<W: ?Sized + Write>(&mut self, writer: &mut W) -> io::Result<()> {
        self.0.begin_array(writer)
    }

    fn end_array<W: ?Sized + Write>(&mut self, writer: &mut W) -> io::Result<()> {
        self.0.end_array(writer)
    }

    fn begin_array_value<W: ?Sized + Write>(&mut self, writer: &mut W, first: bool) -> io::Result<()> {
        self.0.begin_array_value(writer, first)
    }

    fn end_array_value<W: ?Sized + Write>(&mut self, writer: &mut W) -> io::Result<()> {
        self.0.end_array_value(writer)
    }

    fn begin_object<W: ?Sized + Write>(&mut self, writer: &mut W) -> io::Result<()> {
        self.0.begin_object(writer)
    }

    fn end_object<W: ?Sized + Write>(&mut self, writer: &mut W) -> io::Result<()> {
        self.0.end_object(writer)
    }

    fn begin_object_key<W: ?Sized + Write>(&mut self, writer: &mut W, first: bool) -> io::Result<()> {
        self.0.begin_object_key(writer, first)
    }

    fn begin_object_value<W: ?Sized + Write>(&mut self, writer: &mut W) -> io::Result<()> {
        self.0.begin_object_value(writer)
    }

    fn end_object_value<W: ?Sized + Write>(&mut self, writer: &mut W) -> io::Result<()> {
        self.0.end_object_value(writer)
    }
}

/// Pretty-printed JSON with fixed float formatting and a trailing newline.
pub fn to_json_string<T: Serialize + ?Sized>(value: &T) -> Result<String> {
    let mut buf = Vec::new();
    let mut ser = serde_json::Serializer::with_formatter(&mut buf, FixedFloatFormatter(PrettyFormatter::new()));
    value.serialize(&mut ser)?;
    buf.push(b'\n');
    Ok(String::from_utf8(buf).expect("serde_json emits UTF-8"))
}

pub fn write_json<T: Serialize + ?Sized>(path: &Path, value: &T) -> Result<()> {
    std::fs::write(path, to_json_string(value)?)?;
    Ok(())
}

pub fn read_json<T: for<'de> Deserialize<'de>>(path: &Path) -> Result<T> {
    let text = std::fs::read_to_string(path)?;
    parse_json(&text)
}

/// Parses `text`, turning serde failures into schema errors.
pub fn parse_json<T: for<'de> Deserialize<'de>>(text: &str) -> Result<T> {
    serde_json::from_str(text).map_err(|e| {
        let msg = e.to_string();
        let field = msg
            .split('`')
            .nth(1)
            .filter(|_| msg.contains("field"))
            .unwrap_or("<document>")
            .to_string();
        Error::Schema { field, message: msg }
    })
}

// ---------------------------------------------------------------- systems

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ChainJson {
    pub pole_re: f64,
    pub pole_im: f64,
    /// One entry per power `k`; each is the residue matrix flattened
    /// row-major as `[re, im]` pairs.
    pub residues: Vec<Vec<[f64; 2]>>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SystemJson {
    pub dims: [usize; 2],
    pub feedthrough: Vec<Vec<f64>>,
    #[serde(default)]
    pub chains: Vec<ChainJson>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RationalJson {
    pub num: Vec<f64>,
    pub den: Vec<f64>,
}

/// A plant given either in pole–residue form or as a SISO rational function.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(untagged)]
pub enum PlantJson {
    Rational(RationalJson),
    System(SystemJson),
}

fn real_matrix(field: &str, rows: &[Vec<f64>], shape: (usize, usize)) -> Result<DMatrix<f64>> {
    if rows.len() != shape.0 || rows.iter().any(|r| r.len() != shape.1) {
        return Err(Error::schema(field, format!("expected a {}x{} matrix", shape.0, shape.1)));
    }
    Ok(DMatrix::from_fn(shape.0, shape.1, |i, j| rows[i][j]))
}

fn matrix_rows(m: &DMatrix<f64>) -> Vec<Vec<f64>> {
    (0..m.nrows()).map(|i| m.row(i).iter().copied().collect()).collect()
}

fn loose_matrix(field: &str, rows: &[Vec<f64>]) -> Result<DMatrix<f64>> {
    let cols = rows.first().map_or(0, |r| r.len());
    real_matrix(field, rows, (rows.len(), cols))
}

impl SystemJson {
    pub fn from_system(sys: &PoleResidueSystem) -> Self {
        let (p, m) = sys.dims();
        let chains = sys
            .chains()
            .iter()
            .map(|c| ChainJson {
                pole_re: c.pole().re,
                pole_im: c.pole().im,
                residues: c
                    .residues()
                    .iter()
                    .map(|r| {
                        (0..p)
                            .flat_map(|i| (0..m).map(move |j| (i, j)))
                            .map(|(i, j)| [r[(i, j)].re, r[(i, j)].im])
                            .collect()
                    })
                    .collect(),
            })
            .collect();
        Self {
            dims: [p, m],
            feedthrough: matrix_rows(sys.feedthrough()),
            chains,
        }
    }

    pub fn to_system(&self) -> Result<PoleResidueSystem> {
        let [p, m] = self.dims;
        if p == 0 || m == 0 {
            return Err(Error::schema("dims", "dimensions must be positive"));
        }
        let d = real_matrix("feedthrough", &self.feedthrough, (p, m))?;
        let mut chains = Vec::with_capacity(self.chains.len());
        for (ci, c) in self.chains.iter().enumerate() {
            if c.residues.is_empty() {
                return Err(Error::schema(format!("chains[{ci}].residues"), "chain needs at least one residue"));
            }
            let mut residues = Vec::with_capacity(c.residues.len());
            for (k, flat) in c.residues.iter().enumerate() {
                if flat.len() != p * m {
                    return Err(Error::schema(
                        format!("chains[{ci}].residues[{k}]"),
                        format!("expected {} [re, im] entries, got {}", p * m, flat.len()),
                    ));
                }
                residues.push(CMatrix::from_fn(p, m, |i, j| {
                    let [re, im] = flat[i * m + j];
                    Complex64::new(re, im)
                }));
            }
            let chain = PoleChain::new(Complex64::new(c.pole_re, c.pole_im), residues)
                .map_err(|e| Error::schema(format!("chains[{ci}]"), e.to_string()))?;
            chains.push(chain);
        }
        PoleResidueSystem::new((p, m), chains, d).map_err(|e| Error::schema("chains", e.to_string()))
    }
}

impl RationalJson {
    pub fn to_rational(&self) -> Result<RationalSiso> {
        RationalSiso::new(self.num.clone(), self.den.clone()).map_err(|e| Error::schema("den", e.to_string()))
    }
}

// ---------------------------------------------------------------- graphs

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct EdgeJson {
    pub from: usize,
    pub to: usize,
    pub weight: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct GraphJson {
    pub n: usize,
    pub edges: Vec<EdgeJson>,
}

impl GraphJson {
    pub fn from_graph(g: &SignedDigraph) -> Self {
        Self {
            n: g.node_count(),
            edges: g
                .edges()
                .into_iter()
                .map(|e| EdgeJson { from: e.from, to: e.to, weight: e.weight })
                .collect(),
        }
    }

    pub fn to_graph(&self) -> Result<SignedDigraph> {
        if self.n == 0 {
            return Err(Error::schema("n", "graph needs at least one node"));
        }
        for (i, e) in self.edges.iter().enumerate() {
            if e.from >= self.n || e.to >= self.n {
                return Err(Error::schema(format!("edges[{i}]"), format!("node index outside 0..{}", self.n)));
            }
            if e.from == e.to {
                return Err(Error::schema(format!("edges[{i}]"), "self-loops are not allowed"));
            }
            if !e.weight.is_finite() {
                return Err(Error::schema(format!("edges[{i}].weight"), "weight must be finite"));
            }
        }
        let edges: Vec<Edge> = self
            .edges
            .iter()
            .map(|e| Edge { from: e.from, to: e.to, weight: e.weight })
            .collect();
        SignedDigraph::from_edges(self.n, &edges).map_err(|e| Error::schema("edges", e.to_string()))
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct InertiaJson {
    pub positive: usize,
    pub negative: usize,
    pub zero: usize,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct AnalysisJson {
    pub n: usize,
    pub laplacian: Vec<Vec<f64>>,
    pub weight_balanced: bool,
    pub strongly_connected: bool,
    pub zero_is_simple: bool,
    pub inertia: InertiaJson,
    /// `null` when the radius is undefined for this graph.
    pub ofp_radius: Option<f64>,
}

impl AnalysisJson {
    pub fn from_analysis(a: &LaplacianAnalysis) -> Self {
        Self {
            n: a.laplacian.nrows(),
            laplacian: matrix_rows(&a.laplacian),
            weight_balanced: a.weight_balanced,
            strongly_connected: a.strongly_connected,
            zero_is_simple: a.zero_is_simple,
            inertia: InertiaJson {
                positive: a.inertia.positive,
                negative: a.inertia.negative,
                zero: a.inertia.zero,
            },
            ofp_radius: a.ofp_radius.filter(|r| r.is_finite()),
        }
    }
}

// ---------------------------------------------------------------- verdicts and reports

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ResidueCheckJson {
    pub pole_re: f64,
    pub pole_im: f64,
    pub passed: bool,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct VerdictJson {
    pub positive_real: bool,
    pub margin: f64,
    pub worst_omega: f64,
    pub ifp_index: f64,
    pub stable: bool,
    pub residue_checks: Vec<ResidueCheckJson>,
    pub excluded_points: usize,
    pub notes: Vec<String>,
}

impl VerdictJson {
    pub fn from_verdict(v: &PassivityVerdict) -> Self {
        Self {
            positive_real: v.is_positive_real,
            margin: v.margin,
            worst_omega: v.worst_frequency,
            ifp_index: v.ifp_index,
            stable: v.stable,
            residue_checks: v
                .residue_checks
                .iter()
                .map(|r| ResidueCheckJson { pole_re: r.pole.re, pole_im: r.pole.im, passed: r.passed })
                .collect(),
            excluded_points: v.excluded_points,
            notes: v.notes.clone(),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct PoleGainJson {
    pub pole_re: f64,
    pub pole_im: f64,
    pub gain: f64,
    pub bound: f64,
    pub skipped: bool,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct PfcReportJson {
    pub slack: f64,
    pub gains: Vec<PoleGainJson>,
    pub skipped_poles: Vec<[f64; 2]>,
    pub pre_compensator: Option<SystemJson>,
    pub compensator: SystemJson,
}

impl PfcReportJson {
    pub fn from_report(r: &PfcDesignReport, slack: f64) -> Self {
        Self {
            slack,
            gains: r
                .gains
                .iter()
                .map(|g| PoleGainJson {
                    pole_re: g.pole.re,
                    pole_im: g.pole.im,
                    gain: g.gain,
                    bound: g.bound,
                    skipped: g.skipped,
                })
                .collect(),
            skipped_poles: r.skipped_poles.iter().map(|p| [p.re, p.im]).collect(),
            pre_compensator: r.pre_compensator.as_ref().map(SystemJson::from_system),
            compensator: SystemJson::from_system(&r.compensator),
        }
    }
}

// ---------------------------------------------------------------- scenarios

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum AgentJson {
    /// LTI agent in pole–residue form, realized for simulation.
    Lti {
        system: SystemJson,
        #[serde(default)]
        x0: Option<Vec<f64>>,
    },
    StateSpace {
        a: Vec<Vec<f64>>,
        b: Vec<Vec<f64>>,
        c: Vec<Vec<f64>>,
        d: Vec<Vec<f64>>,
        #[serde(default)]
        x0: Option<Vec<f64>>,
    },
    /// `ẋ = u`, `y = h(x)`; `h` in ascending powers.
    IntegratorStaticOutput { h: Vec<f64>, x0: f64 },
    GradientFlow { curvature: f64, offset: f64, x0: f64 },
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum PfcJson {
    None,
    /// `ν I`.
    Static { nu: f64 },
    /// `(d_c/τ) I / (s + 1/τ)`.
    Derivative { dc: f64, tau: f64 },
    System { system: SystemJson },
    /// Passivating compensator designed from the agent's own pole–residue model.
    Design {
        #[serde(default = "default_slack")]
        slack: f64,
    },
}

fn default_slack() -> f64 {
    1e-6
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(untagged)]
pub enum PfcAssignment {
    Uniform(PfcJson),
    PerAgent(Vec<PfcJson>),
}

impl Default for PfcAssignment {
    fn default() -> Self {
        PfcAssignment::Uniform(PfcJson::None)
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ScenarioJson {
    pub agents: Vec<AgentJson>,
    pub graph: GraphJson,
    #[serde(default = "default_sigma")]
    pub sigma: f64,
    #[serde(default)]
    pub step: Option<f64>,
    #[serde(default)]
    pub horizon: Option<f64>,
    #[serde(default)]
    pub output_stride: Option<usize>,
    #[serde(default)]
    pub pfc: PfcAssignment,
}

fn default_sigma() -> f64 {
    1.0
}

impl AgentJson {
    fn to_agent(&self, field: &str) -> Result<(AgentModel, Option<PoleResidueSystem>)> {
        let wrap = |e: Error| Error::schema(field, e.to_string());
        match self {
            AgentJson::Lti { system, x0 } => {
                let sys = system.to_system().map_err(|e| match e {
                    Error::Schema { field: f, message } => Error::schema(format!("{field}.system.{f}"), message),
                    other => other,
                })?;
                let ss = sys.realize().map_err(wrap)?;
                let x0 = x0.clone().unwrap_or_else(|| vec![0.0; ss.states()]);
                Ok((AgentModel::lti(ss, x0).map_err(wrap)?, Some(sys)))
            }
            AgentJson::StateSpace { a, b, c, d, x0 } => {
                let a = loose_matrix(&format!("{field}.a"), a)?;
                let b = loose_matrix(&format!("{field}.b"), b)?;
                let c = loose_matrix(&format!("{field}.c"), c)?;
                let d = loose_matrix(&format!("{field}.d"), d)?;
                let ss = StateSpaceSystem::new(a, b, c, d).map_err(wrap)?;
                let x0 = x0.clone().unwrap_or_else(|| vec![0.0; ss.states()]);
                Ok((AgentModel::lti(ss, x0).map_err(wrap)?, None))
            }
            AgentJson::IntegratorStaticOutput { h, x0 } => Ok((
                AgentModel::integrator_static_output(Polynomial::new(h.clone()), *x0).map_err(wrap)?,
                None,
            )),
            AgentJson::GradientFlow { curvature, offset, x0 } => {
                Ok((AgentModel::gradient_flow(*curvature, *offset, *x0).map_err(wrap)?, None))
            }
        }
    }
}

impl PfcJson {
    /// Compensator for one agent of output dimension `m`.
    pub fn to_compensator(&self, field: &str, m: usize, plant: Option<&PoleResidueSystem>) -> Result<Compensator> {
        let wrap = |e: Error| Error::schema(field, e.to_string());
        Ok(match self {
            PfcJson::None => Compensator::None,
            PfcJson::Static { nu } => {
                if !nu.is_finite() {
                    return Err(Error::schema(format!("{field}.nu"), "must be finite"));
                }
                Compensator::Static(DMatrix::identity(m, m) * *nu)
            }
            PfcJson::Derivative { dc, tau } => Compensator::Dynamic(design_derivative_pfc(*dc, *tau, m).map_err(wrap)?),
            PfcJson::System { system } => Compensator::Dynamic(system.to_system().map_err(wrap)?),
            PfcJson::Design { slack } => {
                let plant = plant.ok_or_else(|| {
                    Error::schema(field, "designed compensators need an agent given in pole-residue form")
                })?;
                let report = design_pfc(plant, *slack).map_err(wrap)?;
                Compensator::Dynamic(report.total_compensator().map_err(wrap)?)
            }
        })
    }
}

/// Parses `none`, `static:ν`, `derivative:d_c,τ`, or a path to a PFC JSON
/// (either a tagged compensator or a bare pole–residue system).
pub fn parse_pfc_spec(spec: &str) -> Result<PfcJson> {
    let bad = |msg: &str| Error::schema("--pfc", format!("{msg} in `{spec}`"));
    if spec == "none" {
        return Ok(PfcJson::None);
    }
    if let Some(rest) = spec.strip_prefix("static:") {
        let nu = rest.trim().parse().map_err(|_| bad("expected a number after `static:`"))?;
        return Ok(PfcJson::Static { nu });
    }
    if let Some(rest) = spec.strip_prefix("derivative:") {
        let (dc, tau) = rest.split_once(',').ok_or_else(|| bad("expected `derivative:d_c,tau`"))?;
        let dc = dc.trim().parse().map_err(|_| bad("invalid d_c"))?;
        let tau = tau.trim().parse().map_err(|_| bad("invalid tau"))?;
        return Ok(PfcJson::Derivative { dc, tau });
    }
    let text = std::fs::read_to_string(spec)?;
    let value: serde_json::Value = parse_json(&text)?;
    if value.get("kind").is_some() {
        parse_json(&text)
    } else {
        Ok(PfcJson::System { system: parse_json(&text)? })
    }
}

/// Network described by a scenario file.
pub fn scenario_to_network(s: &ScenarioJson) -> Result<crate::netsim::NetworkConfig> {
    let graph = s.graph.to_graph().map_err(|e| match e {
        Error::Schema { field, message } => Error::schema(format!("graph.{field}"), message),
        other => other,
    })?;
    if s.agents.len() != graph.node_count() {
        return Err(Error::schema(
            "agents",
            format!("{} agents for a graph with {} nodes", s.agents.len(), graph.node_count()),
        ));
    }
    if !(s.sigma > 0.0 && s.sigma.is_finite()) {
        return Err(Error::schema("sigma", "coupling gain must be positive"));
    }
    let mut agents = Vec::with_capacity(s.agents.len());
    let mut plants = Vec::with_capacity(s.agents.len());
    for (i, a) in s.agents.iter().enumerate() {
        let (agent, plant) = a.to_agent(&format!("agents[{i}]"))?;
        agents.push(agent);
        plants.push(plant);
    }
    let pfc = match &s.pfc {
        PfcAssignment::Uniform(PfcJson::None) => Vec::new(),
        PfcAssignment::Uniform(p) => agents
            .iter()
            .zip(&plants)
            .map(|(a, plant)| p.to_compensator("pfc", a.dim(), plant.as_ref()))
            .collect::<Result<_>>()?,
        PfcAssignment::PerAgent(list) => {
            if list.len() != agents.len() {
                return Err(Error::schema("pfc", format!("{} entries for {} agents", list.len(), agents.len())));
            }
            list.iter()
                .zip(agents.iter().zip(&plants))
                .enumerate()
                .map(|(i, (p, (a, plant)))| p.to_compensator(&format!("pfc[{i}]"), a.dim(), plant.as_ref()))
                .collect::<Result<_>>()?
        }
    };
    let mut settings = SimSettings::default();
    if let Some(h) = s.step {
        settings.step = h;
    }
    if let Some(t) = s.horizon {
        settings.horizon = t;
    }
    if let Some(k) = s.output_stride {
        settings.output_stride = k;
    }
    Ok(crate::netsim::NetworkConfig { agents, graph, sigma: s.sigma, pfc, settings })
}

// ---------------------------------------------------------------- metrics and CSV

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct AuditJson {
    pub skipped: Option<String>,
    pub max_increase: Option<f64>,
    pub drift: Option<f64>,
    pub slack: Option<f64>,
    pub nonincreasing: bool,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct MetricsJson {
    pub samples: usize,
    pub final_time: f64,
    pub diverged: bool,
    pub final_sync_error: f64,
    pub sync_threshold: f64,
    pub settled_time: Option<f64>,
    pub consensus_value: Option<Vec<f64>>,
    pub max_final_pfc_output: f64,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub energy_audit: Option<AuditJson>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub gradient_sum_drift: Option<f64>,
}

impl MetricsJson {
    pub fn new(log: &TrajectoryLog, metrics: &SyncMetrics) -> Self {
        Self {
            samples: log.len(),
            final_time: log.times.last().copied().unwrap_or(0.0),
            diverged: log.diverged,
            final_sync_error: metrics.final_sync_error,
            sync_threshold: metrics.threshold,
            settled_time: metrics.settled_time,
            consensus_value: metrics.consensus_value.clone(),
            max_final_pfc_output: log
                .yc
                .last()
                .map_or(0.0, |y| y.iter().fold(0.0, |acc: f64, v| acc.max(v.abs()))),
            energy_audit: None,
            gradient_sum_drift: None,
        }
    }

    pub fn with_audit(mut self, audit: &crate::netsim::AuditReport) -> Self {
        let finite = |v: f64| v.is_finite().then_some(v);
        self.energy_audit = Some(AuditJson {
            skipped: audit.skipped.clone(),
            max_increase: finite(audit.max_increase),
            drift: finite(audit.drift),
            slack: finite(audit.slack),
            nonincreasing: audit.nonincreasing,
        });
        self
    }
}

fn signal_columns(prefix: &str, n: usize, m: usize) -> Vec<String> {
    (0..n)
        .flat_map(|i| {
            (0..m).map(move |j| {
                if m == 1 {
                    format!("{prefix}_{}", i + 1)
                } else {
                    format!("{prefix}_{}_{}", i + 1, j + 1)
                }
            })
        })
        .collect()
}

/// `t, y1_1..y1_N, yc_1..yc_N, sync_error` (`y1_i_j` when outputs are vectors).
pub fn trajectory_csv(log: &TrajectoryLog, metrics: &SyncMetrics) -> String {
    let (n, m) = (log.agent_count, log.output_dim);
    let mut header = vec!["t".to_string()];
    header.extend(signal_columns("y1", n, m));
    header.extend(signal_columns("yc", n, m));
    header.push("sync_error".into());
    let mut out = header.join(",");
    out.push('\n');
    for k in 0..log.len() {
        let mut row = vec![format_float(log.times[k])];
        row.extend(log.y1[k].iter().map(|v| format_float(*v)));
        row.extend(log.yc[k].iter().map(|v| format_float(*v)));
        row.push(format_float(metrics.sync_error[k]));
        out.push_str(&row.join(","));
        out.push('\n');
    }
    out
}

/// `omega, margin, re_h.., im_h..` with one column pair per matrix entry.
pub fn sweep_csv(points: &[SweepPoint], dims: (usize, usize)) -> String {
    let (p, m) = dims;
    let entries: Vec<(usize, usize)> = (0..p).flat_map(|i| (0..m).map(move |j| (i, j))).collect();
    let name = |part: &str, (i, j): (usize, usize)| {
        if p == 1 && m == 1 {
            format!("{part}_h")
        } else {
            format!("{part}_h_{}_{}", i + 1, j + 1)
        }
    };
    let mut out = String::from("omega,margin");
    for &e in &entries {
        write!(out, ",{}", name("re", e)).unwrap();
    }
    for &e in &entries {
        write!(out, ",{}", name("im", e)).unwrap();
    }
    out.push('\n');
    for pt in points {
        out.push_str(&format_float(pt.omega));
        out.push(',');
        out.push_str(&format_float(pt.min_eigenvalue));
        for &(i, j) in &entries {
            write!(out, ",{}", format_float(pt.response[(i, j)].re)).unwrap();
        }
        for &(i, j) in &entries {
            write!(out, ",{}", format_float(pt.response[(i, j)].im)).unwrap();
        }
        out.push('\n');
    }
    out
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn floats_have_seventeen_digits() {
        assert_eq!(format_float(0.5), "5.0000000000000000e-1");
        let s = to_json_string(&serde_json::json!({"r": 0.1, "k": 3})).unwrap();
        assert!(s.contains("1.0000000000000001e-1"));
        assert!(s.contains("\"k\": 3"));
    }

    #[test]
    fn system_round_trip() {
        let sys = PoleResidueSystem::siso(
            &[
                (Complex64::new(1.0, 2.0), vec![Complex64::new(0.5, -1.0)]),
                (Complex64::new(1.0, -2.0), vec![Complex64::new(0.5, 1.0)]),
                (Complex64::new(0.5, 0.0), vec![Complex64::new(0.0, 0.0), Complex64::new(1.0, 0.0)]),
            ],
            0.25,
        )
        .unwrap();
        let json = SystemJson::from_system(&sys);
        let text = to_json_string(&json).unwrap();
        let back: SystemJson = parse_json(&text).unwrap();
        assert_eq!(back.to_system().unwrap(), sys);
    }

    #[test]
    fn schema_errors_name_the_field() {
        let err = parse_json::<GraphJson>(r#"{"n": 2}"#).unwrap_err();
        assert!(err.to_string().contains("edges"), "{err}");
        let bad = SystemJson {
            dims: [1, 1],
            feedthrough: vec![vec![0.0]],
            chains: vec![ChainJson { pole_re: 1.0, pole_im: 0.0, residues: vec![vec![[1.0, 0.0], [2.0, 0.0]]] }],
        };
        let err = bad.to_system().unwrap_err();
        assert!(err.to_string().contains("chains[0].residues[0]"), "{err}");
    }

    #[test]
    fn pfc_spec_forms() {
        assert_eq!(parse_pfc_spec("none").unwrap(), PfcJson::None);
        assert_eq!(parse_pfc_spec("static:0.6").unwrap(), PfcJson::Static { nu: 0.6 });
        assert_eq!(parse_pfc_spec("derivative:1,0.01").unwrap(), PfcJson::Derivative { dc: 1.0, tau: 0.01 });
        assert!(parse_pfc_spec("static:x").is_err());
    }

    #[test]
    fn scenario_file_parses() {
        let text = r#"{
            "agents": [
                {"kind": "integrator_static_output", "h": [0, 1], "x0": 1.0},
                {"kind": "integrator_static_output", "h": [0, 1], "x0": -1.0}
            ],
            "graph": {"n": 2, "edges": [{"from": 0, "to": 1, "weight": 1}, {"from": 1, "to": 0, "weight": 1}]},
            "pfc": {"kind": "static", "nu": 1.0}
        }"#;
        let s: ScenarioJson = parse_json(text).unwrap();
        let cfg = scenario_to_network(&s).unwrap();
        assert_eq!(cfg.pfc.len(), 2);
        assert_eq!(cfg.sigma, 1.0);
    }
}
