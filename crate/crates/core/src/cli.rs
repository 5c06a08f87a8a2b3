//! Command-line front end: file in, JSON/CSV artifacts out.

use std::path::{Path, PathBuf};

use clap::{Args, Parser, Subcommand};

use crate::error::{Error, Result};
use crate::io::{
    parse_json, parse_pfc_spec, read_json, scenario_to_network, sweep_csv, to_json_string, trajectory_csv, write_json,
    AnalysisJson, GraphJson, MetricsJson, PfcAssignment, PfcReportJson, PlantJson, ScenarioJson, SystemJson,
    VerdictJson,
};
use crate::lti::{partial_fraction_decompose, DecomposeOptions, PoleResidueSystem};
use crate::netsim::{assemble, energy_audit, run, sync_metrics, zgs_invariant, AgentKind, QuadraticObjective};
use crate::passivity::{check_positive_real, sweep, FrequencyGrid, GridSpec};
use crate::pfc_design::design_pfc;
use crate::scenarios::{run_scenario, ScenarioOptions};
use crate::signed_graph::analyze;

pub const EXIT_OK: i32 = 0;
pub const EXIT_VALIDATION: i32 = 2;
pub const EXIT_NOT_WELL_POSED: i32 = 3;
pub const EXIT_DIVERGED: i32 = 4;

#[derive(Debug, Parser)]
#[command(name = "pfc-sync", version, about = "Passivity analysis, PFC design, and output-synchronization simulation")]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,

    /// Output directory for artifacts.
    #[arg(long, global = true, default_value = "out")]
    pub out: PathBuf,

    /// Log-spaced points in the frequency grid.
    #[arg(long, global = true)]
    pub grid_points: Option<usize>,
    #[arg(long, global = true)]
    pub omega_min: Option<f64>,
    #[arg(long, global = true)]
    pub omega_max: Option<f64>,

    /// RK4 step (s).
    #[arg(long, global = true)]
    pub step: Option<f64>,
    /// Simulated time (s).
    #[arg(long, global = true)]
    pub horizon: Option<f64>,
    /// Coupling gain.
    #[arg(long, global = true)]
    pub sigma: Option<f64>,
    /// Margin added above each passivation bound.
    #[arg(long, global = true)]
    pub slack: Option<f64>,
    /// DC gain of the derivative compensator.
    #[arg(long, global = true)]
    pub dc: Option<f64>,
    /// Time constant of the derivative compensator.
    #[arg(long, global = true)]
    pub tau: Option<f64>,
    /// Compensator override: a JSON path, `none`, `static:ν`, or `derivative:d_c,τ`.
    #[arg(long, global = true)]
    pub pfc: Option<String>,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Compensator design.
    #[command(subcommand)]
    Pfc(PfcCommand),
    /// Frequency-domain passivity checks.
    #[command(subcommand)]
    Passivity(PassivityCommand),
    /// Signed-graph Laplacian analysis.
    #[command(subcommand)]
    Graph(GraphCommand),
    /// Network simulation from a scenario file.
    #[command(subcommand)]
    Sim(SimCommand),
    /// Built-in scenario: example1, example2, example3, example4, pd-consensus.
    Scenario { name: String },
}

#[derive(Debug, Subcommand)]
pub enum PfcCommand {
    Design(InputArgs),
}

#[derive(Debug, Subcommand)]
pub enum PassivityCommand {
    Check(InputArgs),
}

#[derive(Debug, Subcommand)]
pub enum GraphCommand {
    Analyze(InputArgs),
}

#[derive(Debug, Subcommand)]
pub enum SimCommand {
    Run(InputArgs),
}

#[derive(Debug, Clone, Args)]
pub struct InputArgs {
    /// Input JSON file.
    #[arg(value_name = "FILE")]
    pub path: Option<PathBuf>,
    /// Input JSON file (alternative to the positional form).
    #[arg(long = "input", value_name = "FILE")]
    pub input: Option<PathBuf>,
}

impl InputArgs {
    fn resolve(&self) -> Result<&Path> {
        match (&self.path, &self.input) {
            (Some(p), None) | (None, Some(p)) => Ok(p),
            (Some(_), Some(_)) => Err(Error::schema("--input", "give the input either positionally or with --input")),
            (None, None) => Err(Error::schema("--input", "an input file is required")),
        }
    }
}

impl Cli {
    fn grid(&self) -> Result<GridSpec> {
        let mut g = GridSpec::default();
        if let Some(n) = self.grid_points {
            g.log_points = n;
        }
        if let Some(w) = self.omega_min {
            g.omega_min = w;
        }
        if let Some(w) = self.omega_max {
            g.omega_max = w;
        }
        if g.log_points < 2 || !(g.omega_min > 0.0) || !(g.omega_max > g.omega_min) {
            return Err(Error::schema("--grid-points", "grid needs ≥ 2 points and 0 < omega-min < omega-max"));
        }
        Ok(g)
    }
}

/// What a command produced: files written and a short summary for stdout.
#[derive(Debug, Default)]
pub struct Outcome {
    pub files: Vec<PathBuf>,
    pub summary: Vec<String>,
    pub diverged: bool,
}

struct Writer<'a> {
    dir: &'a Path,
    outcome: Outcome,
}

impl<'a> Writer<'a> {
    fn new(dir: &'a Path) -> Result<Self> {
        std::fs::create_dir_all(dir)?;
        Ok(Self { dir, outcome: Outcome::default() })
    }

    fn json<T: serde::Serialize + ?Sized>(&mut self, name: &str, value: &T) -> Result<()> {
        let path = self.dir.join(name);
        write_json(&path, value)?;
        self.outcome.files.push(path);
        Ok(())
    }

    fn text(&mut self, name: &str, contents: &str) -> Result<()> {
        let path = self.dir.join(name);
        std::fs::write(&path, contents)?;
        self.outcome.files.push(path);
        Ok(())
    }

    fn say(&mut self, line: String) {
        self.outcome.summary.push(line);
    }
}

fn load_plant(path: &Path) -> Result<PoleResidueSystem> {
    let text = std::fs::read_to_string(path)?;
    match parse_json::<PlantJson>(&text) {
        Ok(PlantJson::Rational(r)) => {
            let plant = r.to_rational()?;
            Ok(partial_fraction_decompose(&plant, &DecomposeOptions::default())?.system)
        }
        Ok(PlantJson::System(s)) => s.to_system(),
        // Re-parse as the system schema for a diagnostic that names a field.
        Err(_) => parse_json::<SystemJson>(&text)?.to_system(),
    }
}

fn pfc_design(cli: &Cli, input: &Path) -> Result<Outcome> {
    let plant = load_plant(input)?;
    let slack = cli.slack.unwrap_or(1e-6);
    let report = design_pfc(&plant, slack)?;
    let total = report.total_compensator()?;
    let compensated = plant.parallel(&total)?;
    let grid = FrequencyGrid::for_system(&compensated, &cli.grid()?)?;
    let verdict = check_positive_real(&compensated, &grid)?;

    let mut w = Writer::new(&cli.out)?;
    let mut json = serde_json::to_value(PfcReportJson::from_report(&report, slack))?;
    json["compensated_verdict"] = serde_json::to_value(VerdictJson::from_verdict(&verdict))?;
    w.json("pfc_report.json", &json)?;
    w.json("compensator.json", &SystemJson::from_system(&total))?;
    for g in &report.gains {
        w.say(format!("pole d = {}: bound {:.6}, gain {:.6}", g.pole, g.bound, g.gain));
    }
    w.say(format!("compensated margin {:.3e} (positive real: {})", verdict.margin, verdict.is_positive_real));
    Ok(w.outcome)
}

fn passivity_check(cli: &Cli, input: &Path) -> Result<Outcome> {
    let sys = load_plant(input)?;
    let grid = FrequencyGrid::for_system(&sys, &cli.grid()?)?;
    let verdict = check_positive_real(&sys, &grid)?;
    let (points, _) = sweep(&sys, &grid)?;
    let mut w = Writer::new(&cli.out)?;
    w.json("verdict.json", &VerdictJson::from_verdict(&verdict))?;
    w.text("sweep.csv", &sweep_csv(&points, sys.dims()))?;
    w.say(format!(
        "positive real: {}; margin {:.6e} at omega {:.6}; IFP index {:.6}",
        verdict.is_positive_real, verdict.margin, verdict.worst_frequency, verdict.ifp_index
    ));
    Ok(w.outcome)
}

fn graph_analyze(cli: &Cli, input: &Path) -> Result<Outcome> {
    let graph = read_json::<GraphJson>(input)?.to_graph()?;
    let analysis = analyze(&graph);
    let mut w = Writer::new(&cli.out)?;
    w.json("analysis.json", &AnalysisJson::from_analysis(&analysis))?;
    w.say(format!(
        "balanced: {}; strongly connected: {}; zero simple: {}; r = {}",
        analysis.weight_balanced,
        analysis.strongly_connected,
        analysis.zero_is_simple,
        analysis.ofp_radius.map_or("undefined".into(), |r| format!("{r:.12}"))
    ));
    Ok(w.outcome)
}

fn sim_run(cli: &Cli, input: &Path) -> Result<Outcome> {
    let mut scenario: ScenarioJson = read_json(input)?;
    if let Some(s) = cli.sigma {
        scenario.sigma = s;
    }
    if let Some(h) = cli.step {
        scenario.step = Some(h);
    }
    if let Some(t) = cli.horizon {
        scenario.horizon = Some(t);
    }
    if let Some(spec) = &cli.pfc {
        scenario.pfc = PfcAssignment::Uniform(parse_pfc_spec(spec)?);
    }
    let cfg = scenario_to_network(&scenario)?;
    let sys = assemble(&cfg)?;
    let log = run(&sys, &cfg.settings)?;
    let metrics = sync_metrics(&log, cfg.settings.sync_threshold);

    let mut json = MetricsJson::new(&log, &metrics).with_audit(&energy_audit(&log, None));
    if cfg.agents.iter().all(|a| a.kind() == AgentKind::GradientFlow) {
        let fns: Vec<QuadraticObjective> = cfg
            .agents
            .iter()
            .map(|a| match a.dynamics() {
                crate::netsim::AgentDynamics::GradientFlow { curvature, offset } => {
                    QuadraticObjective { curvature: *curvature, offset: *offset }
                }
                _ => unreachable!("filtered to gradient-flow agents"),
            })
            .collect();
        json.gradient_sum_drift = Some(zgs_invariant(&log, &fns)?);
    }

    let mut w = Writer::new(&cli.out)?;
    w.text("trajectory.csv", &trajectory_csv(&log, &metrics))?;
    w.json("metrics.json", &json)?;
    w.say(format!(
        "final sync error {:.6e}; settled at {}; diverged: {}",
        metrics.final_sync_error,
        metrics.settled_time.map_or("never".into(), |t| format!("{t}")),
        log.diverged
    ));
    w.outcome.diverged = log.diverged;
    Ok(w.outcome)
}

fn scenario(cli: &Cli, name: &str) -> Result<Outcome> {
    let opts = ScenarioOptions {
        step: cli.step,
        horizon: cli.horizon,
        sigma: cli.sigma,
        slack: cli.slack,
        dc: cli.dc,
        tau: cli.tau,
        pfc: cli.pfc.as_deref().map(parse_pfc_spec).transpose()?,
        grid: cli.grid()?,
    };
    let outcome = run_scenario(name, &opts)?;
    let mut w = Writer::new(&cli.out)?;
    w.json("report.json", &outcome.report)?;
    let single = outcome.runs.len() == 1;
    for r in &outcome.runs {
        let prefix = if single { String::new() } else { format!("{}_", r.label) };
        let mut metrics = MetricsJson::new(&r.log, &r.metrics);
        if let Some(a) = &r.audit {
            metrics = metrics.with_audit(a);
        }
        metrics.gradient_sum_drift = r.gradient_sum_drift;
        w.text(&format!("{prefix}trajectory.csv"), &trajectory_csv(&r.log, &r.metrics))?;
        w.json(&format!("{prefix}metrics.json"), &metrics)?;
        w.say(format!(
            "{}: final sync error {:.6e}; diverged: {}",
            r.label, r.metrics.final_sync_error, r.log.diverged
        ));
    }
    for (file, csv) in &outcome.tables {
        w.text(file, csv)?;
    }
    if outcome.runs.is_empty() {
        w.say(to_json_string(&outcome.report)?.trim_end().to_string());
    }
    w.outcome.diverged = outcome.diverged();
    Ok(w.outcome)
}

/// Runs a parsed command.
pub fn execute(cli: &Cli) -> Result<Outcome> {
    match &cli.command {
        Command::Pfc(PfcCommand::Design(a)) => pfc_design(cli, a.resolve()?),
        Command::Passivity(PassivityCommand::Check(a)) => passivity_check(cli, a.resolve()?),
        Command::Graph(GraphCommand::Analyze(a)) => graph_analyze(cli, a.resolve()?),
        Command::Sim(SimCommand::Run(a)) => sim_run(cli, a.resolve()?),
        Command::Scenario { name } => scenario(cli, name),
    }
}

pub fn exit_code(err: &Error) -> i32 {
    match err {
        Error::NotWellPosed { .. } => EXIT_NOT_WELL_POSED,
        _ => EXIT_VALIDATION,
    }
}

/// Parses `std::env::args`, runs, prints, and returns the exit status.
pub fn main() -> i32 {
    let cli = Cli::parse();
    match execute(&cli) {
        Ok(outcome) => {
            for line in &outcome.summary {
                println!("{line}");
            }
            if outcome.diverged {
                eprintln!("warning: divergence guard tripped; logs were written");
                EXIT_DIVERGED
            } else {
                EXIT_OK
            }
        }
        Err(e) => {
            eprintln!("error: {e}");
            exit_code(&e)
        }
    }
}
