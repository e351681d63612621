//! Command-line driver: `estimate`, `compile`, `simulate`, `decode`, `run`
//! and `config`.

use std::fs;
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use anyhow::{bail, Context, Result};
use clap::{Args, Parser, Subcommand, ValueEnum};
use rydfactor::cnf::CnfFormula;
use rydfactor::decode::{histogram_csv, histogram_svg, process_events, read_events_csv};
use rydfactor::estimate::{audit_against_build, estimate};
use rydfactor::mis::MisGraph;
use rydfactor::pipeline::{
    compile, preset, run_pipeline, simulate, summarize_histogram, Encoder, PipelineConfig, RunStatus, Stage,
    PRESET_NAMES,
};
use rydfactor::problem::create_instance;
use rydfactor::sim::SimMode;

/// Exit status for instances without a factor pair.
const EXIT_UNSAT: u8 = 2;

#[derive(Parser)]
#[command(name = "rydfactor", version, about = "Factor integers through BDD, 3-SAT and Rydberg-atom MIS graphs")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Print closed-form resource estimates as JSON.
    Estimate(EstimateArgs),
    /// Build diagram, formula and graph artifacts.
    Compile(RunArgs),
    /// Evolve a graph and sample measurement events.
    Simulate(SimulateArgs),
    /// Turn an event table into a factor histogram.
    Decode(DecodeArgs),
    /// Run every stage.
    Run(RunArgs),
    /// Print a configuration file for a preset or instance.
    Config(RunArgs),
}

#[derive(Args)]
struct EstimateArgs {
    /// Bit length to estimate for.
    #[arg(long, conflicts_with = "n")]
    bits: Option<u64>,
    /// Target integer; adds an audit of the built diagram.
    #[arg(long)]
    n: Option<u64>,
    /// Factor widths as `np,nq`.
    #[arg(long, value_parser = parse_widths)]
    widths: Option<(usize, usize)>,
}

#[derive(Clone, Copy, ValueEnum)]
enum EncoderArg {
    FailedPath,
    Generic,
}

#[derive(Clone, Copy, ValueEnum)]
enum ModeArg {
    Blockade,
    Full,
}

#[derive(Args, Clone)]
struct ScheduleArgs {
    /// Integration step in µs.
    #[arg(long)]
    dt: Option<f64>,
    #[arg(long)]
    shots: Option<usize>,
    #[arg(long)]
    seed: Option<u64>,
    /// Final detuning in MHz.
    #[arg(long = "delta-f")]
    delta_f: Option<f64>,
    #[arg(long, value_enum)]
    mode: Option<ModeArg>,
    /// Slow the schedule down by this factor.
    #[arg(long)]
    stretch: Option<f64>,
    /// Edge interaction for full-space runs, rad/µs.
    #[arg(long)]
    interaction: Option<f64>,
}

#[derive(Args)]
struct RunArgs {
    /// Named preset.
    #[arg(long, value_parser = clap::builder::PossibleValuesParser::new(PRESET_NAMES))]
    preset: Option<String>,
    /// JSON configuration file.
    #[arg(long, conflicts_with = "preset")]
    config: Option<PathBuf>,
    #[arg(long)]
    n: Option<u64>,
    #[arg(long, value_parser = parse_widths)]
    widths: Option<(usize, usize)>,
    #[arg(long, value_enum)]
    encoder: Option<EncoderArg>,
    /// Output directory.
    #[arg(long, env = "RYDFACTOR_OUT")]
    out: Option<PathBuf>,
    #[command(flatten)]
    schedule: ScheduleArgs,
}

#[derive(Args)]
struct SimulateArgs {
    /// Graph JSON written by `compile`.
    #[arg(long)]
    graph: PathBuf,
    #[arg(long, env = "RYDFACTOR_OUT", default_value = "rydfactor-out")]
    out: PathBuf,
    #[command(flatten)]
    schedule: ScheduleArgs,
}

#[derive(Args)]
struct DecodeArgs {
    #[arg(long)]
    graph: PathBuf,
    /// Formula JSON written by `compile`.
    #[arg(long)]
    formula: PathBuf,
    /// Event table with a `bitstring,count` header.
    #[arg(long)]
    events: PathBuf,
    #[arg(long)]
    n: u64,
    #[arg(long, value_parser = parse_widths)]
    widths: Option<(usize, usize)>,
    #[arg(long, env = "RYDFACTOR_OUT", default_value = "rydfactor-out")]
    out: PathBuf,
}

fn parse_widths(s: &str) -> Result<(usize, usize), String> {
    let (a, b) = s.split_once(',').ok_or("expected np,nq")?;
    Ok((a.trim().parse().map_err(|e| format!("{e}"))?, b.trim().parse().map_err(|e| format!("{e}"))?))
}

fn apply_schedule(cfg: &mut PipelineConfig, s: &ScheduleArgs) {
    if let Some(v) = s.dt {
        cfg.dt = v;
    }
    if let Some(v) = s.shots {
        cfg.shots = v;
    }
    if let Some(v) = s.seed {
        cfg.seed = v;
    }
    if let Some(v) = s.delta_f {
        cfg.delta_f_mhz = v;
    }
    if let Some(v) = s.stretch {
        cfg.stretch = v;
    }
    if let Some(m) = s.mode {
        cfg.mode = match m {
            ModeArg::Blockade => SimMode::Blockade,
            ModeArg::Full => SimMode::Full,
        };
    }
    if s.interaction.is_some() {
        cfg.interaction = s.interaction;
    }
}

fn build_config(args: &RunArgs, until: Stage) -> Result<PipelineConfig> {
    let default_out = PathBuf::from("rydfactor-out");
    let mut cfg = if let Some(name) = &args.preset {
        preset(name, args.out.clone().unwrap_or_else(|| default_out.join(name))).context("unknown preset")?
    } else if let Some(path) = &args.config {
        let text = fs::read_to_string(path).with_context(|| format!("reading {}", path.display()))?;
        serde_json::from_str(&text).with_context(|| format!("parsing {}", path.display()))?
    } else if let Some(n) = args.n {
        PipelineConfig::new(n, default_out.join(format!("n{n}")))
    } else {
        bail!("give --preset, --config or --n");
    };
    if let Some(n) = args.n {
        cfg.n = n;
    }
    if args.widths.is_some() {
        cfg.widths = args.widths;
    }
    if let Some(e) = args.encoder {
        cfg.encoder = match e {
            EncoderArg::FailedPath => Encoder::FailedPath,
            EncoderArg::Generic => Encoder::Generic,
        };
    }
    if let Some(out) = &args.out {
        cfg.output_dir = out.clone();
    }
    apply_schedule(&mut cfg, &args.schedule);
    cfg.until = until;
    Ok(cfg)
}

fn read_json<T: serde::de::DeserializeOwned>(path: &Path) -> Result<T> {
    let text = fs::read_to_string(path).with_context(|| format!("reading {}", path.display()))?;
    serde_json::from_str(&text).with_context(|| format!("parsing {}", path.display()))
}

fn write_file(dir: &Path, name: &str, contents: &str) -> Result<()> {
    fs::create_dir_all(dir).with_context(|| format!("creating {}", dir.display()))?;
    let path = dir.join(name);
    fs::write(&path, contents).with_context(|| format!("writing {}", path.display()))
}

fn run(args: &RunArgs, until: Stage) -> Result<ExitCode> {
    let cfg = build_config(args, until)?;
    let outcome = run_pipeline(&cfg)?;
    println!("{}", serde_json::to_string_pretty(&outcome.report)?);
    if outcome.report.status == RunStatus::Unsatisfiable {
        eprintln!("unsatisfiable: {}", outcome.report.message);
        return Ok(ExitCode::from(EXIT_UNSAT));
    }
    Ok(ExitCode::SUCCESS)
}

fn main() -> Result<ExitCode> {
    let cli = Cli::parse();
    match cli.command {
        Command::Estimate(a) => {
            let (est, audit) = match (a.bits, a.n) {
                (Some(bits), _) => (estimate(bits)?, None),
                (None, Some(n)) => {
                    let inst = create_instance(n, a.widths)?;
                    let cfg = PipelineConfig { widths: a.widths, ..PipelineConfig::new(n, ".") };
                    let (_, bdd) = compile(&cfg)?;
                    let audit = match bdd {
                        Some(bdd) => Some(audit_against_build(&inst, &bdd, &rydfactor::cnf::encode_generic(&bdd))?),
                        None => None,
                    };
                    (estimate(inst.bit_len() as u64)?, audit)
                }
                (None, None) => bail!("give --bits or --n"),
            };
            let report = serde_json::json!({ "estimate": est, "audit": audit });
            println!("{}", serde_json::to_string_pretty(&report)?);
            Ok(ExitCode::SUCCESS)
        }
        Command::Compile(a) => run(&a, Stage::Compile),
        Command::Run(a) => run(&a, Stage::Decode),
        Command::Config(a) => {
            let cfg = build_config(&a, Stage::Decode)?;
            println!("{}", serde_json::to_string_pretty(&cfg)?);
            Ok(ExitCode::SUCCESS)
        }
        Command::Simulate(a) => {
            let graph: MisGraph = read_json(&a.graph)?;
            let mut cfg = PipelineConfig::new(0, a.out.clone());
            apply_schedule(&mut cfg, &a.schedule);
            let (state, events) = simulate(&cfg, &graph)?;
            write_file(&a.out, "probabilities.json", &(serde_json::to_string_pretty(&state.probability_map())? + "\n"))?;
            write_file(&a.out, "events.csv", &rydfactor::decode::events_csv(&events)?)?;
            println!("{} events over {} configurations, norm {:.12}", cfg.shots, state.basis.len(), state.norm());
            Ok(ExitCode::SUCCESS)
        }
        Command::Decode(a) => {
            let graph: MisGraph = read_json(&a.graph)?;
            let formula: CnfFormula = read_json(&a.formula)?;
            let inst = create_instance(a.n, a.widths)?;
            let text = fs::read_to_string(&a.events).with_context(|| format!("reading {}", a.events.display()))?;
            let events = read_events_csv(&text)?;
            let h = process_events(&graph, &formula, &inst, &events)?;
            write_file(&a.out, "histogram.csv", &histogram_csv(&h)?)?;
            write_file(&a.out, "histogram.svg", &histogram_svg(&h))?;
            println!("{}", serde_json::to_string_pretty(&summarize_histogram(&h))?);
            Ok(ExitCode::SUCCESS)
        }
    }
}
