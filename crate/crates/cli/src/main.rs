//! `rdaf`: run, decide, construct and search delayed-flooding instances.
//!
//! Exit codes: 0 terminated / valid / nothing found, 2 input error,
//! 10 simulation hit the round cap, 11 non-terminating (or a search found
//! a witness), 12 adversary fails the finite delay check.

use std::fs;
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use anyhow::{bail, Context, Result};
use clap::{Parser, Subcommand, ValueEnum};
use serde_json::json;

use rdaf_core::adversary::{make_b_bounded_random, make_basic_triangle_for, CyclicAdversary, SlotRecord};
use rdaf_core::decider::{decide_with, DecideOptions, VerdictFile};
use rdaf_core::graph::families;
use rdaf_core::oracle::{epis_search, SearchReport, SearchSpec, DEFAULT_BUDGET};
use rdaf_core::protocol::TraceFile;
use rdaf_core::{run, AdversarySpec, Graph, GraphSpec, TraceVerdict, Verdict};

const EXIT_OK: u8 = 0;
const EXIT_INPUT: u8 = 2;
const EXIT_CAP: u8 = 10;
const EXIT_NON_TERMINATING: u8 = 11;
const EXIT_INVALID: u8 = 12;

#[derive(Parser, Debug)]
#[command(name = "rdaf", version, about = "Round-delayed amnesiac flooding toolkit")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand, Debug)]
enum Command {
    /// Run the protocol and write the trace.
    Simulate {
        #[arg(long)]
        graph: PathBuf,
        #[arg(long)]
        adversary: PathBuf,
        #[arg(long, default_value_t = 100, value_parser = clap::value_parser!(u64).range(1..))]
        max_rounds: u64,
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Decide termination under an eventually periodic adversary.
    Decide {
        #[arg(long)]
        graph: PathBuf,
        #[arg(long)]
        adversary: PathBuf,
        /// Embed the witness trace in the verdict.
        #[arg(long)]
        witness: bool,
        #[arg(long, default_value_t = DecideOptions::default().max_explored)]
        max_explored: u64,
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Generate an adversary file.
    Construct {
        #[arg(value_enum)]
        kind: ConstructKind,
        #[arg(long)]
        graph: Option<PathBuf>,
        #[arg(long, default_value_t = 0)]
        seed: u64,
        /// Longest blocked run for b_bounded.
        #[arg(long, default_value_t = 1)]
        bound: usize,
        /// Rounds of random delays for b_bounded.
        #[arg(long, default_value_t = 32)]
        horizon: usize,
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Look for a non-terminating periodic schedule by enumeration.
    Search {
        #[arg(long)]
        graph: PathBuf,
        #[arg(long, value_parser = clap::value_parser!(u64).range(1..))]
        cycle_length: u64,
        #[arg(long, default_value_t = DEFAULT_BUDGET)]
        budget: u64,
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Check the finite delay property.
    Validate {
        #[arg(long)]
        graph: PathBuf,
        #[arg(long)]
        adversary: PathBuf,
        #[arg(long)]
        out: Option<PathBuf>,
    },
}

#[derive(Copy, Clone, Debug, PartialEq, Eq, ValueEnum)]
#[value(rename_all = "snake_case")]
enum ConstructKind {
    BasicTriangle,
    Cyclic,
    BBounded,
}

fn read_graph(path: &Path) -> Result<Graph> {
    let text = fs::read_to_string(path).with_context(|| format!("reading {}", path.display()))?;
    let spec: GraphSpec = serde_json::from_str(&text).with_context(|| format!("parsing graph {}", path.display()))?;
    if let Some(names) = &spec.names {
        if names.len() != spec.nodes {
            bail!(
                "graph {} has {} names for {} nodes",
                path.display(),
                names.len(),
                spec.nodes
            );
        }
    }
    spec.build()
        .with_context(|| format!("invalid graph {}", path.display()))
}

fn read_adversary(path: &Path) -> Result<AdversarySpec> {
    let text = fs::read_to_string(path).with_context(|| format!("reading {}", path.display()))?;
    serde_json::from_str(&text).with_context(|| format!("parsing adversary {}", path.display()))
}

fn emit<T: serde::Serialize>(value: &T, out: Option<&Path>) -> Result<()> {
    let mut text = serde_json::to_string(value)?;
    text.push('\n');
    write_text(text, out)
}

/// Explicit tables get one map per line.
fn emit_adversary(spec: &AdversarySpec, out: Option<&Path>) -> Result<()> {
    let AdversarySpec::Epa { c, l, prefix, cycle } = spec else {
        return emit(spec, out);
    };
    let block = |maps: &[Vec<SlotRecord>]| -> Result<String> {
        if maps.is_empty() {
            return Ok("[]".into());
        }
        let lines = maps
            .iter()
            .map(|m| serde_json::to_string(m).map(|s| format!("  {s}")))
            .collect::<Result<Vec<_>, _>>()?;
        Ok(format!("[\n{}\n]", lines.join(",\n")))
    };
    let text = format!(
        "{{\"type\": \"epa\", \"c\": {c}, \"l\": {l},\n\"prefix\": {},\n\"cycle\": {}}}\n",
        block(prefix)?,
        block(cycle)?
    );
    write_text(text, out)
}

/// Traces get one round per line.
fn emit_trace(file: &TraceFile, out: Option<&Path>) -> Result<()> {
    let rounds = file
        .rounds
        .iter()
        .map(|r| serde_json::to_string(r).map(|s| format!("  {s}")))
        .collect::<Result<Vec<_>, _>>()?;
    let text = format!(
        "{{\"rounds\": [\n{}\n], \"verdict\": {}}}\n",
        rounds.join(",\n"),
        serde_json::to_string(&file.verdict)?
    );
    write_text(text, out)
}

fn write_text(text: String, out: Option<&Path>) -> Result<()> {
    match out {
        Some(path) => fs::write(path, text).with_context(|| format!("writing {}", path.display())),
        None => {
            print!("{text}");
            Ok(())
        }
    }
}

fn execute(command: Command) -> Result<u8> {
    match command {
        Command::Simulate {
            graph,
            adversary,
            max_rounds,
            out,
        } => {
            let g = read_graph(&graph)?;
            let model = read_adversary(&adversary)?.to_model(&g)?;
            let trace = run(&g, &model, max_rounds as usize)?;
            emit_trace(&TraceFile::from_trace(&trace), out.as_deref())?;
            Ok(match trace.verdict {
                TraceVerdict::Terminated(_) => EXIT_OK,
                _ => EXIT_CAP,
            })
        }
        Command::Decide {
            graph,
            adversary,
            witness,
            max_explored,
            out,
        } => {
            let g = read_graph(&graph)?;
            let schedule = read_adversary(&adversary)?.to_epa(&g)?;
            let options = DecideOptions { max_explored };
            match decide_with(&g, &schedule, options) {
                Ok(decision) => {
                    emit(&VerdictFile::from_decision(&decision, witness), out.as_deref())?;
                    Ok(match decision.verdict {
                        Verdict::Terminates { .. } => EXIT_OK,
                        Verdict::NonTerminating { .. } => EXIT_NON_TERMINATING,
                    })
                }
                Err(e) => {
                    eprintln!("error: {e}");
                    emit(&VerdictFile::from_error(&e), out.as_deref())?;
                    Ok(EXIT_INPUT)
                }
            }
        }
        Command::Construct {
            kind,
            graph,
            seed,
            bound,
            horizon,
            out,
        } => {
            let g = match &graph {
                Some(path) => Some(read_graph(path)?),
                None => None,
            };
            let spec = match kind {
                ConstructKind::BasicTriangle => {
                    let triangle = families::triangle();
                    let schedule = make_basic_triangle_for(g.as_ref().unwrap_or(&triangle))?;
                    AdversarySpec::from_epa(&triangle, &schedule)
                }
                ConstructKind::Cyclic => {
                    let g = g.context("cyclic construction needs --graph")?;
                    let adv = CyclicAdversary::for_graph(&g)?;
                    AdversarySpec::Cyclic {
                        cycle: adv.cycle().iter().map(|v| v.index()).collect(),
                    }
                }
                ConstructKind::BBounded => {
                    let g = g.context("b_bounded construction needs --graph")?;
                    AdversarySpec::from_epa(&g, &make_b_bounded_random(&g, bound, seed, horizon))
                }
            };
            emit_adversary(&spec, out.as_deref())?;
            Ok(EXIT_OK)
        }
        Command::Search {
            graph,
            cycle_length,
            budget,
            out,
        } => {
            let g = read_graph(&graph)?;
            let mut spec = SearchSpec::new(g.clone(), cycle_length as usize);
            spec.budget = budget;
            let outcome = epis_search(&spec)?;
            emit(&SearchReport::from_outcome(&g, &outcome), out.as_deref())?;
            Ok(if outcome.found.is_some() {
                EXIT_NON_TERMINATING
            } else {
                EXIT_OK
            })
        }
        Command::Validate { graph, adversary, out } => {
            let g = read_graph(&graph)?;
            let schedule = read_adversary(&adversary)?.to_epa(&g)?;
            let report = schedule.validate_finite_delay(&g);
            let violating: Vec<_> = report
                .violating
                .iter()
                .map(|s| {
                    let (a, b) = s.edge.endpoints();
                    json!([s.sender.index(), [a.index(), b.index()]])
                })
                .collect();
            emit(
                &json!({"valid": report.is_valid(), "violating": violating}),
                out.as_deref(),
            )?;
            Ok(if report.is_valid() { EXIT_OK } else { EXIT_INVALID })
        }
    }
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match execute(cli.command) {
        Ok(code) => ExitCode::from(code),
        Err(e) => {
            eprintln!("error: {e:#}");
            ExitCode::from(EXIT_INPUT)
        }
    }
}
