//! Staged end-to-end runs with file artifacts.
//!
//! Stages run in order and each writes human-readable output into the run
//! directory: `report.json` (estimate, audit and summaries), `bdd.json`,
//! `formula.cnf` / `formula.json`, `graph.json`, `probabilities.json`,
//! `events.csv` and `histogram.csv` / `histogram.svg`. A run is fully
//! determined by its configuration, including the sampling seed.

use std::f64::consts::TAU;
use std::fs;
use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::bdd::{build_bdd, prune, Bdd, BddError};
use crate::cnf::{
    cnf_failed_paths_with, encode_generic, export_dimacs, is_satisfiable, to_three_sat, CnfError, CnfFormula,
    FailedPathOptions,
};
use crate::decode::{events_csv, histogram_csv, histogram_svg, process_events, Bucket, Histogram};
use crate::estimate::{audit_against_build, estimate, AuditReport, ResourceEstimate};
use crate::mis::builtin::builtin;
use crate::mis::{expand_wires, graph_from_cnf, solve_mis_exact, GraphOptions, MisGraph};
use crate::problem::{create_instance, ProblemInstance};
use crate::sim::{evolve, sweep_schedule, sample, HamiltonianSpec, MeasurementEvent, SimMode, StateVector};

#[derive(Debug, Error)]
#[error("{stage} stage: {source}")]
pub struct PipelineError {
    pub stage: Stage,
    #[source]
    pub source: StageCause,
}

pub type StageCause = Box<dyn std::error::Error + Send + Sync + 'static>;

fn fail<E: Into<StageCause>>(stage: Stage) -> impl FnOnce(E) -> PipelineError {
    move |e| PipelineError { stage, source: e.into() }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Stage {
    Estimate,
    Compile,
    Simulate,
    Decode,
}

impl std::fmt::Display for Stage {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        let name = match self {
            Stage::Estimate => "estimate",
            Stage::Compile => "compile",
            Stage::Simulate => "simulate",
            Stage::Decode => "decode",
        };
        f.write_str(name)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Encoder {
    FailedPath,
    Generic,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct WirePlanEntry {
    pub from: String,
    pub to: String,
    /// Even number of interior atoms.
    pub interior: usize,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct PipelineConfig {
    pub n: u64,
    #[serde(default)]
    pub widths: Option<(usize, usize)>,
    pub encoder: Encoder,
    /// Entry-node cap of the failed-path encoder before falling back to the
    /// generic one.
    #[serde(default = "default_entry_cap")]
    pub max_entry_nodes: usize,
    /// Use a reference graph instead of compiling one.
    #[serde(default)]
    pub builtin_graph: Option<String>,
    /// Give propagated units their own one-atom gadgets.
    #[serde(default)]
    pub materialize_units: bool,
    #[serde(default)]
    pub wires: Vec<WirePlanEntry>,
    #[serde(default)]
    pub deferred_edges: Vec<(String, String)>,
    /// Final detuning in MHz (multiplied by 2π internally).
    pub delta_f_mhz: f64,
    /// Integration step in µs.
    pub dt: f64,
    pub stretch: f64,
    pub mode: SimMode,
    /// Edge interaction in rad/µs for full-space runs; defaults to 50 times
    /// the largest detuning magnitude.
    #[serde(default)]
    pub interaction: Option<f64>,
    pub shots: usize,
    pub seed: u64,
    /// Last stage to run.
    pub until: Stage,
    pub output_dir: PathBuf,
}

fn default_entry_cap() -> usize {
    FailedPathOptions::default().max_entry_nodes
}

impl PipelineConfig {
    pub fn new(n: u64, output_dir: impl Into<PathBuf>) -> Self {
        Self {
            n,
            widths: None,
            encoder: Encoder::FailedPath,
            max_entry_nodes: default_entry_cap(),
            builtin_graph: None,
            materialize_units: false,
            wires: Vec::new(),
            deferred_edges: Vec::new(),
            delta_f_mhz: 3.5,
            dt: 1e-3,
            stretch: 1.0,
            mode: SimMode::Blockade,
            interaction: None,
            shots: 10_000,
            seed: 0,
            until: Stage::Decode,
            output_dir: output_dir.into(),
        }
    }

    pub fn final_detuning(&self) -> f64 {
        TAU * self.delta_f_mhz
    }

    pub fn hamiltonian(&self, graph: MisGraph) -> HamiltonianSpec {
        match self.mode {
            SimMode::Blockade => HamiltonianSpec::blockade(graph),
            SimMode::Full => {
                let sched = sweep_schedule(self.final_detuning());
                let peak = sched
                    .segments
                    .iter()
                    .flat_map(|s| [s.detuning.0.abs(), s.detuning.1.abs()])
                    .fold(0.0, f64::max);
                HamiltonianSpec::full(graph, self.interaction.unwrap_or(50.0 * peak))
            }
        }
    }
}

pub const PRESET_NAMES: [&str; 5] = ["paper-6", "paper-15", "paper-15-exp", "paper-35", "paper-35-exp"];

pub fn preset(name: &str, output_dir: impl Into<PathBuf>) -> Option<PipelineConfig> {
    let mut cfg = PipelineConfig::new(0, output_dir);
    match name {
        "paper-6" => {
            cfg.n = 6;
            cfg.widths = Some((2, 2));
            cfg.materialize_units = true;
        }
        "paper-15" | "paper-15-exp" => {
            cfg.n = 15;
            cfg.widths = Some((3, 3));
            cfg.shots = 12_575;
            if name.ends_with("-exp") {
                cfg.builtin_graph = Some("G15Exp".to_string());
            }
        }
        "paper-35" | "paper-35-exp" => {
            cfg.n = 35;
            cfg.widths = Some((3, 3));
            cfg.delta_f_mhz = 3.9;
            cfg.shots = 9_383;
            if name.ends_with("-exp") {
                cfg.builtin_graph = Some("G35Exp".to_string());
            }
        }
        _ => return None,
    }
    Some(cfg)
}

pub fn presets(output_dir: &Path) -> Vec<(String, PipelineConfig)> {
    PRESET_NAMES
        .iter()
        .map(|name| (name.to_string(), preset(name, output_dir.join(name)).expect("listed preset")))
        .collect()
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Compiled {
    pub instance: ProblemInstance,
    pub encoder_used: Encoder,
    /// Why the requested encoder was not used, if it was not.
    pub fallback: Option<String>,
    pub formula: CnfFormula,
    pub satisfiable: bool,
    pub graph: Option<MisGraph>,
}

/// Diagram, CNF and graph for the configured instance. Unsatisfiable
/// instances come back without a graph.
pub fn compile(cfg: &PipelineConfig) -> Result<(Compiled, Option<Bdd>), PipelineError> {
    let err = fail(Stage::Compile);
    let instance = create_instance(cfg.n, cfg.widths).map_err(err)?;
    let bdd = match prune(build_bdd(&instance)) {
        Ok(b) => Some(b),
        Err(BddError::FullyDeadDiagram { .. }) => None,
        Err(e) => return Err(fail(Stage::Compile)(e)),
    };
    let Some(bdd) = bdd else {
        let compiled = Compiled {
            instance,
            encoder_used: cfg.encoder,
            fallback: None,
            formula: CnfFormula::from_clauses(crate::cnf::Clause::new([])),
            satisfiable: false,
            graph: None,
        };
        return Ok((compiled, None));
    };
    let (formula, encoder_used, fallback) = match cfg.encoder {
        Encoder::Generic => (encode_generic(&bdd), Encoder::Generic, None),
        Encoder::FailedPath => {
            match cnf_failed_paths_with(&bdd, FailedPathOptions { max_entry_nodes: cfg.max_entry_nodes }) {
                Ok(f) => (f, Encoder::FailedPath, None),
                Err(e @ CnfError::TooManyEntryNodes { .. }) => (encode_generic(&bdd), Encoder::Generic, Some(e.to_string())),
                Err(e) => return Err(fail(Stage::Compile)(e)),
            }
        }
    };
    let formula = to_three_sat(&formula);
    let satisfiable = is_satisfiable(&formula, &[]);
    let graph = if !satisfiable {
        None
    } else if let Some(name) = &cfg.builtin_graph {
        let b = builtin(name).ok_or_else(|| fail(Stage::Compile)(format!("unknown builtin graph {name:?}")))?;
        if b.n != cfg.n {
            return Err(fail(Stage::Compile)(format!("builtin graph {name} is for n = {}", b.n)));
        }
        Some(b.graph)
    } else {
        let err = fail(Stage::Compile);
        let mut g = graph_from_cnf(&formula, GraphOptions { materialize_units: cfg.materialize_units }).map_err(err)?;
        if !cfg.wires.is_empty() {
            let edges = cfg
                .wires
                .iter()
                .map(|w| g.edge_by_labels(&w.from, &w.to))
                .collect::<Result<Vec<_>, _>>()
                .map_err(fail(Stage::Compile))?;
            let lengths: Vec<usize> = cfg.wires.iter().map(|w| w.interior).collect();
            g = expand_wires(&g, &edges, &lengths).map_err(fail(Stage::Compile))?;
        }
        if !cfg.deferred_edges.is_empty() {
            let edges = cfg
                .deferred_edges
                .iter()
                .map(|(a, b)| g.edge_by_labels(a, b))
                .collect::<Result<Vec<_>, _>>()
                .map_err(fail(Stage::Compile))?;
            g.defer_edges(&edges).map_err(fail(Stage::Compile))?;
        }
        Some(g)
    };
    let compiled = Compiled { instance, encoder_used, fallback, formula, satisfiable, graph };
    Ok((compiled, Some(bdd)))
}

/// Evolves the configured schedule on `graph` and samples it.
pub fn simulate(cfg: &PipelineConfig, graph: &MisGraph) -> Result<(StateVector, Vec<MeasurementEvent>), PipelineError> {
    let err = fail(Stage::Simulate);
    let sched = sweep_schedule(cfg.final_detuning()).stretch(cfg.stretch);
    let state = evolve(&cfg.hamiltonian(graph.clone()), &sched, cfg.dt).map_err(err)?;
    let events = sample(&state, cfg.shots, cfg.seed);
    Ok((state, events))
}

pub fn decode(compiled: &Compiled, graph: &MisGraph, events: &[MeasurementEvent]) -> Result<Histogram, PipelineError> {
    process_events(graph, &compiled.formula, &compiled.instance, events).map_err(fail(Stage::Decode))
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum RunStatus {
    Completed,
    Unsatisfiable,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct GraphSummary {
    pub atoms: usize,
    pub wire_atoms: usize,
    pub wires: usize,
    pub deferred_edges: usize,
    pub clause_count: usize,
    pub mis_size: Option<usize>,
    pub mis_count: Option<usize>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SimulationSummary {
    pub dimension: usize,
    pub norm: f64,
    /// Total probability of maximum independent sets.
    pub mis_probability: Option<f64>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct DecodeSummary {
    pub total_events: usize,
    pub usable_events: usize,
    pub usable_fraction: f64,
    pub solution_mass: f64,
    pub unsat_mass: f64,
    pub undecidable_mass: f64,
    pub top: Vec<(String, String, usize)>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RunReport {
    pub config: PipelineConfig,
    pub status: RunStatus,
    pub message: String,
    pub estimate: Option<ResourceEstimate>,
    pub audit: Option<AuditReport>,
    pub encoder_used: Option<Encoder>,
    pub fallback: Option<String>,
    pub clauses: Option<usize>,
    pub ledger: Option<Vec<String>>,
    pub graph: Option<GraphSummary>,
    pub simulation: Option<SimulationSummary>,
    pub decode: Option<DecodeSummary>,
}

pub fn summarize_graph(g: &MisGraph) -> GraphSummary {
    let mis = solve_mis_exact(g).ok();
    GraphSummary {
        atoms: g.len(),
        wire_atoms: g.wire_count(),
        wires: g.wires.len(),
        deferred_edges: g.deferred_edges.len(),
        clause_count: g.clause_count,
        mis_size: mis.as_ref().map(|m| m.size),
        mis_count: mis.as_ref().map(|m| m.sets.len()),
    }
}

pub fn summarize_histogram(h: &Histogram) -> DecodeSummary {
    DecodeSummary {
        total_events: h.total_events,
        usable_events: h.usable_events,
        usable_fraction: h.usable_fraction(),
        solution_mass: h.class_mass("solution"),
        unsat_mass: h.class_mass("unsat"),
        undecidable_mass: h.class_mass("undecidable"),
        top: h.ranked().into_iter().take(5).map(|(b, c): (Bucket, usize)| (b.label(), b.class().to_string(), c)).collect(),
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct RunOutcome {
    pub report: RunReport,
    pub histogram: Option<Histogram>,
}

fn write(stage: Stage, dir: &Path, name: &str, contents: &str) -> Result<(), PipelineError> {
    let path = dir.join(name);
    fs::write(&path, contents).map_err(|e| fail(stage)(format!("writing {}: {e}", path.display())))
}

fn json<T: Serialize>(value: &T) -> String {
    serde_json::to_string_pretty(value).expect("artifact types serialize") + "\n"
}

pub fn run_pipeline(cfg: &PipelineConfig) -> Result<RunOutcome, PipelineError> {
    let dir = &cfg.output_dir;
    fs::create_dir_all(dir).map_err(fail(Stage::Estimate))?;
    let mut report = RunReport {
        config: cfg.clone(),
        status: RunStatus::Completed,
        message: String::new(),
        estimate: None,
        audit: None,
        encoder_used: None,
        fallback: None,
        clauses: None,
        ledger: None,
        graph: None,
        simulation: None,
        decode: None,
    };
    let finish = |report: &RunReport| write(report_stage(report), dir, "report.json", &json(report));

    let instance = create_instance(cfg.n, cfg.widths).map_err(fail(Stage::Estimate))?;
    report.estimate = Some(estimate(instance.bit_len() as u64).map_err(fail(Stage::Estimate))?);
    if cfg.until == Stage::Estimate {
        report.message = "estimate only".to_string();
        finish(&report)?;
        return Ok(RunOutcome { report, histogram: None });
    }

    let (compiled, bdd) = compile(cfg)?;
    if let Some(bdd) = &bdd {
        write(Stage::Compile, dir, "bdd.json", &json(&bdd.dump()))?;
        report.audit = audit_against_build(&instance, bdd, &encode_generic(bdd)).ok();
    }
    write(Stage::Compile, dir, "formula.cnf", &export_dimacs(&compiled.formula))?;
    write(Stage::Compile, dir, "formula.json", &json(&compiled.formula))?;
    report.encoder_used = Some(compiled.encoder_used);
    report.fallback = compiled.fallback.clone();
    report.clauses = Some(compiled.formula.clauses.len() + compiled.formula.ledger.len());
    report.ledger = Some(compiled.formula.ledger.iter().map(|l| l.to_string()).collect());
    let Some(graph) = compiled.graph.clone() else {
        report.status = RunStatus::Unsatisfiable;
        report.message = format!("{} has no factor pair within widths ({}, {})", cfg.n, instance.np, instance.nq);
        finish(&report)?;
        return Ok(RunOutcome { report, histogram: None });
    };
    write(Stage::Compile, dir, "graph.json", &json(&graph))?;
    report.graph = Some(summarize_graph(&graph));
    if cfg.until == Stage::Compile {
        report.message = "compiled".to_string();
        finish(&report)?;
        return Ok(RunOutcome { report, histogram: None });
    }

    let (state, events) = simulate(cfg, &graph)?;
    let mis_probability = report.graph.as_ref().and_then(|s| s.mis_size).map(|size| {
        state
            .basis
            .states
            .iter()
            .zip(state.probabilities())
            .filter(|(m, _)| m.count_ones() as usize == size && graph.is_independent(&bits_of(**m, graph.len())))
            .map(|(_, p)| p)
            .sum()
    });
    report.simulation = Some(SimulationSummary { dimension: state.basis.len(), norm: state.norm(), mis_probability });
    write(Stage::Simulate, dir, "probabilities.json", &json(&state.probability_map()))?;
    write(Stage::Simulate, dir, "events.csv", &events_csv(&events).map_err(fail(Stage::Simulate))?)?;
    if cfg.until == Stage::Simulate {
        report.message = "simulated".to_string();
        finish(&report)?;
        return Ok(RunOutcome { report, histogram: None });
    }

    let histogram = decode(&compiled, &graph, &events)?;
    write(Stage::Decode, dir, "histogram.csv", &histogram_csv(&histogram).map_err(fail(Stage::Decode))?)?;
    write(Stage::Decode, dir, "histogram.svg", &histogram_svg(&histogram))?;
    report.decode = Some(summarize_histogram(&histogram));
    report.message = "completed".to_string();
    finish(&report)?;
    Ok(RunOutcome { report, histogram: Some(histogram) })
}

fn report_stage(report: &RunReport) -> Stage {
    if report.decode.is_some() {
        Stage::Decode
    } else if report.simulation.is_some() {
        Stage::Simulate
    } else if report.encoder_used.is_some() {
        Stage::Compile
    } else {
        Stage::Estimate
    }
}

fn bits_of(mask: u64, len: usize) -> Vec<bool> {
    (0..len).map(|u| mask >> u & 1 == 1).collect()
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn presets_pin_the_instances() {
        let dir = Path::new("/tmp/unused");
        let all = presets(dir);
        assert_eq!(all.len(), 5);
        let p6 = preset("paper-6", dir).unwrap();
        assert_eq!((p6.n, p6.widths, p6.encoder), (6, Some((2, 2)), Encoder::FailedPath));
        assert!(p6.wires.is_empty() && p6.builtin_graph.is_none());
        let p35 = preset("paper-35", dir).unwrap();
        assert_eq!(p35.delta_f_mhz, 3.9);
        assert!(preset("paper-7", dir).is_none());
    }

    #[test]
    fn config_round_trips_through_json() {
        let cfg = preset("paper-15-exp", "/tmp/x").unwrap();
        let text = serde_json::to_string(&cfg).unwrap();
        assert_eq!(serde_json::from_str::<PipelineConfig>(&text).unwrap(), cfg);
        assert!(serde_json::from_str::<PipelineConfig>(&text.replace("\"seed\"", "\"sed\"")).is_err());
    }

    #[test]
    fn compiled_graphs_for_presets() {
        let dir = Path::new("/tmp/unused");
        let (c, _) = compile(&preset("paper-6", dir).unwrap()).unwrap();
        let g = c.graph.unwrap();
        assert_eq!((g.len(), g.wire_count()), (6, 0));
        let (c, _) = compile(&preset("paper-15-exp", dir).unwrap()).unwrap();
        assert_eq!(c.graph.unwrap().len(), 24);
        let (c, _) = compile(&preset("paper-35-exp", dir).unwrap()).unwrap();
        assert_eq!(c.graph.unwrap().deferred_edges.len(), 4);
    }

    #[test]
    fn primes_stop_before_simulation() {
        let tmp = tempfile::tempdir().unwrap();
        let out = run_pipeline(&PipelineConfig::new(13, tmp.path())).unwrap();
        assert_eq!(out.report.status, RunStatus::Unsatisfiable);
        assert!(out.report.simulation.is_none());
        assert!(!tmp.path().join("events.csv").exists());
        assert!(tmp.path().join("report.json").exists());
    }

    #[test]
    fn fallback_to_generic_is_reported() {
        let mut cfg = PipelineConfig::new(143, "/tmp/unused");
        cfg.max_entry_nodes = 1;
        let (c, _) = compile(&cfg).unwrap();
        assert_eq!(c.encoder_used, Encoder::Generic);
        assert!(c.fallback.is_some());
    }
}
