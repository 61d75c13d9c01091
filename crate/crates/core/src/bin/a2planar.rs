use std::fs;
use std::io::Write;
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};
use serde_json::{json, Value};

use a2planar::algebra::{gram, normalized_trace, WebSum};
use a2planar::graph::{frame_residuals, pf_eigen, solve_cells, CellSystem, FusionGraph};
use a2planar::hecke::{decompose, Space};
use a2planar::pathalg::{dims, dims_enumerated, flatness_check, present_z, PathModel, PathOp, StripWord};
use a2planar::pathchecks::{self, flat_bounds};
use a2planar::report::Report;
use a2planar::rewrite::{enumerate_basis, Normalizer};
use a2planar::{suites, Error, Result, SignString};

#[derive(Parser)]
#[command(name = "a2planar", version, about = "A2 webs, SU(3) fusion graphs and their path algebras")]
struct Cli {
    #[command(subcommand)]
    cmd: Cmd,
}

#[derive(Args, Clone)]
struct Output {
    /// Write the JSON result here instead of stdout.
    #[arg(long)]
    out: Option<PathBuf>,
}

#[derive(Args, Clone)]
struct Random {
    #[arg(long, default_value_t = 0)]
    seed: u64,
    #[arg(long, default_value_t = 1000)]
    trials: usize,
}

/// Where the path model comes from: `A^(n)` or a graph file, with optional cells.
#[derive(Args, Clone)]
struct ModelSource {
    #[arg(long, conflicts_with = "graph")]
    n: Option<u32>,
    #[arg(long)]
    graph: Option<PathBuf>,
    /// Cells as written by `cells solve`; solved on the fly when absent.
    #[arg(long)]
    cells: Option<PathBuf>,
    #[arg(long, default_value_t = 0)]
    seed: u64,
}

#[derive(Subcommand)]
enum Cmd {
    /// Reduce a web or a sum of webs to the non-elliptic basis.
    Normalize {
        #[arg(long = "in")]
        input: PathBuf,
        #[command(flatten)]
        out: Output,
    },
    /// Normalized Markov trace of an element of `V_m`.
    Trace {
        #[arg(long = "in")]
        input: PathBuf,
        /// Also evaluate at `q = exp(iπ/n)`.
        #[arg(long)]
        n: Option<u32>,
        #[command(flatten)]
        out: Output,
    },
    /// Gram matrix of the non-elliptic basis at a root of unity.
    Gram {
        #[arg(long, allow_hyphen_values = true)]
        sigma: String,
        #[arg(long)]
        n: u32,
        /// Print only the rank.
        #[arg(long)]
        rank: bool,
        #[command(flatten)]
        out: Output,
    },
    /// Number of non-elliptic webs with the given boundary.
    Dims {
        #[arg(long, allow_hyphen_values = true)]
        sigma: String,
    },
    /// Run a web relation suite.
    Relcheck {
        #[arg(long)]
        suite: String,
        #[arg(long, default_value_t = 4)]
        m: usize,
        #[command(flatten)]
        random: Random,
        #[command(flatten)]
        out: Output,
    },
    /// Write an element as a combination of generator words.
    Decompose {
        #[arg(long = "in")]
        input: PathBuf,
        /// `V4` for `V_4`, `P2,1` for the rectangle space `P_{2,1}`.
        #[arg(long)]
        space: String,
        #[command(flatten)]
        out: Output,
    },
    Graph {
        #[command(subcommand)]
        cmd: GraphCmd,
    },
    Cells {
        #[command(subcommand)]
        cmd: CellsCmd,
    },
    Connection {
        #[command(subcommand)]
        cmd: ConnectionCmd,
    },
    Flat {
        #[command(subcommand)]
        cmd: FlatCmd,
    },
    /// Evaluate a strip word as a matrix over path spaces.
    Zmap {
        #[arg(long)]
        strips: PathBuf,
        /// List of `{"signs": "-+", "terms": [...]}` elements used by `RECT` strips.
        #[arg(long)]
        labels: Option<PathBuf>,
        #[command(flatten)]
        model: ModelSource,
        #[command(flatten)]
        out: Output,
    },
    Pathalg {
        #[command(subcommand)]
        cmd: PathalgCmd,
    },
}

#[derive(Subcommand)]
enum GraphCmd {
    /// Write the graph `A^(n)`.
    BuildA {
        #[arg(long)]
        n: u32,
        #[command(flatten)]
        out: Output,
    },
}

#[derive(Subcommand)]
enum CellsCmd {
    /// Solve the frame equations for a graph.
    Solve {
        #[arg(long)]
        graph: PathBuf,
        #[arg(long, default_value_t = 1e-10)]
        tol: f64,
        #[arg(long, default_value_t = 0)]
        seed: u64,
        #[command(flatten)]
        out: Output,
    },
}

#[derive(Subcommand)]
enum ConnectionCmd {
    /// Unitarity and commuting-square residuals.
    Check {
        #[command(flatten)]
        model: ModelSource,
        #[command(flatten)]
        out: Output,
    },
}

#[derive(Subcommand)]
enum FlatCmd {
    /// Flatness of the connection up to the given rectangle sizes.
    Check {
        #[arg(long)]
        vmax: Option<usize>,
        #[arg(long)]
        hmax: Option<usize>,
        #[command(flatten)]
        model: ModelSource,
        #[command(flatten)]
        out: Output,
    },
}

#[derive(Subcommand)]
enum PathalgCmd {
    /// `dim B_{i,j}`.
    Dims {
        #[arg(long)]
        i: usize,
        #[arg(long)]
        j: usize,
        #[command(flatten)]
        model: ModelSource,
    },
    /// Run a path-side suite.
    Relcheck {
        #[arg(long)]
        suite: String,
        #[arg(long, default_value_t = 4)]
        m: usize,
        #[arg(long, default_value_t = 1000)]
        trials: usize,
        #[command(flatten)]
        model: ModelSource,
        #[command(flatten)]
        out: Output,
    },
}

/// Result of a command: data to print, and whether its checks passed.
enum Outcome {
    Data(Value, Option<PathBuf>),
    Text(String),
    Report(Report, Option<PathBuf>),
}

fn precision() -> Result<u32> {
    match std::env::var("A2P_PRECISION") {
        Err(_) => Ok(64),
        Ok(s) => {
            let bits: u32 = s.trim().parse().map_err(|_| Error::Input(format!("A2P_PRECISION must be a number of bits, got `{s}`")))?;
            if bits > 64 {
                Err(Error::Input(format!("A2P_PRECISION={bits}: only 64-bit floating point is available")))
            } else {
                Ok(64)
            }
        }
    }
}

fn read_json(path: &Path) -> Result<Value> {
    Ok(serde_json::from_str(&fs::read_to_string(path)?)?)
}

fn parse_space(s: &str) -> Result<Space> {
    let bad = || Error::Input(format!("bad space `{s}`; expected e.g. V4 or P2,1"));
    if let Some(m) = s.strip_prefix('V') {
        return Ok(Space::V(m.parse().map_err(|_| bad())?));
    }
    let rest = s.strip_prefix('P').ok_or_else(bad)?;
    let (i, j) = rest.split_once(',').ok_or_else(bad)?;
    Ok(Space::Ptl(i.trim().parse().map_err(|_| bad())?, j.trim().parse().map_err(|_| bad())?))
}

fn load_model(src: &ModelSource) -> Result<(PathModel, bool)> {
    match (&src.n, &src.graph) {
        (Some(n), _) => {
            let model = match &src.cells {
                Some(path) => {
                    let g = FusionGraph::build_a(*n)?;
                    let pf = pf_eigen(&g)?;
                    let cells = CellSystem::from_json(&g, &read_json(path)?)?;
                    PathModel::new(g, pf, cells)
                }
                None => PathModel::build_a(*n, src.seed)?,
            };
            Ok((model, false))
        }
        (None, Some(path)) => {
            let g = FusionGraph::from_json(&fs::read_to_string(path)?)?;
            let pf = pf_eigen(&g)?;
            let cells = match &src.cells {
                Some(c) => CellSystem::from_json(&g, &read_json(c)?)?,
                None => solve_cells(&g, &pf, 1e-10, src.seed)?.0,
            };
            Ok((PathModel::new(g, pf, cells), true))
        }
        (None, None) => Err(Error::Input("give --n or --graph".into())),
    }
}

fn model_config(model: &PathModel, bits: u32) -> Value {
    json!({ "n": model.n(), "graph": model.graph.name, "precision": bits })
}

fn run(cli: Cli) -> Result<Outcome> {
    let bits = precision()?;
    Ok(match cli.cmd {
        Cmd::Normalize { input, out } => {
            let x = WebSum::from_json(&read_json(&input)?)?;
            Outcome::Data(Normalizer::new().normalize(&x)?.to_json(), out.out)
        }
        Cmd::Trace { input, n, out } => {
            let x = WebSum::from_json(&read_json(&input)?)?;
            let tr = normalized_trace(&x)?;
            let mut v = json!({ "trace": tr.to_string() });
            if let Some(n) = n {
                let z = tr.eval_complex(n);
                v["n"] = json!(n);
                v["value"] = json!({ "re": z.re, "im": z.im });
            }
            Outcome::Data(v, out.out)
        }
        Cmd::Gram { sigma, n, rank, out } => {
            let sigma: SignString = sigma.parse()?;
            let g = gram(&sigma, n)?;
            if rank {
                Outcome::Text(g.rank().to_string())
            } else {
                let entries: Vec<Vec<String>> = g.entries.iter().map(|r| r.iter().map(|x| x.to_string()).collect()).collect();
                Outcome::Data(json!({ "n": n, "size": g.basis.len(), "rank": g.rank(), "entries": entries }), out.out)
            }
        }
        Cmd::Dims { sigma } => {
            let sigma: SignString = sigma.parse()?;
            Outcome::Text(enumerate_basis(&sigma)?.len().to_string())
        }
        Cmd::Relcheck { suite, m, random, out } => {
            let mut report = Report::new(&suite, json!({ "m": m, "trials": random.trials, "seed": random.seed }));
            report.extend(suites::by_name(&suite, m, random.trials, random.seed)?);
            Outcome::Report(report, out.out)
        }
        Cmd::Decompose { input, space, out } => {
            let x = WebSum::from_json(&read_json(&input)?)?;
            Outcome::Data(decompose(&x, parse_space(&space)?)?.to_json(), out.out)
        }
        Cmd::Graph { cmd: GraphCmd::BuildA { n, out } } => Outcome::Data(FusionGraph::build_a(n)?.to_json(), out.out),
        Cmd::Cells { cmd: CellsCmd::Solve { graph, tol, seed, out } } => {
            let g = FusionGraph::from_json(&fs::read_to_string(graph)?)?;
            let pf = pf_eigen(&g)?;
            let (cells, report) = solve_cells(&g, &pf, tol, seed)?;
            let r = frame_residuals(&g, &pf.phi, &cells);
            Outcome::Data(
                json!({
                    "graph": g.name,
                    "eigenvalue": pf.eigenvalue,
                    "phi": g.vertices.iter().zip(&pf.phi).map(|(v, p)| json!({"id": v.id, "phi": p})).collect::<Vec<_>>(),
                    "restarts": report.restarts,
                    "iterations": report.iterations,
                    "residual_type_one": r.max_type_one(),
                    "residual_type_two": r.max_type_two(),
                    "cells": cells.to_json(&g),
                }),
                out.out,
            )
        }
        Cmd::Connection { cmd: ConnectionCmd::Check { model, out } } => {
            let (m, _) = load_model(&model)?;
            let mut report = Report::new("connection", model_config(&m, bits));
            report.extend(pathchecks::connection_suite(&m));
            Outcome::Report(report, out.out)
        }
        Cmd::Flat { cmd: FlatCmd::Check { vmax, hmax, model, out } } => {
            let (m, user_graph) = load_model(&model)?;
            let (dv, dh) = flat_bounds(&m);
            let (vmax, hmax) = (vmax.unwrap_or(dv), hmax.unwrap_or(dh));
            let mut config = model_config(&m, bits);
            config["vmax"] = json!(vmax);
            config["hmax"] = json!(hmax);
            if user_graph {
                // flatness of an arbitrary graph is reported, not asserted
                let flat = flatness_check(&m, vmax, hmax);
                Outcome::Data(json!({ "config": config, "flatness": flat }), out.out)
            } else {
                let mut report = Report::new("flat", config);
                let (checks, _, _) = pathchecks::flatness_suite_with(&m, vmax, hmax);
                report.extend(checks);
                Outcome::Report(report, out.out)
            }
        }
        Cmd::Zmap { strips, labels, model, out } => {
            let (m, _) = load_model(&model)?;
            let word = StripWord::from_json(&read_json(&strips)?)?;
            let labels = match labels {
                Some(p) => read_labels(&m, &read_json(&p)?)?,
                None => Vec::new(),
            };
            let z = present_z(&m, &word, &labels)?;
            Outcome::Data(json!({ "config": model_config(&m, bits), "word": word.to_json(), "matrix": z.to_json(&m) }), out.out)
        }
        Cmd::Pathalg { cmd: PathalgCmd::Dims { i, j, model } } => {
            let g = match (&model.n, &model.graph) {
                (Some(n), _) => FusionGraph::build_a(*n)?,
                (None, Some(p)) => FusionGraph::from_json(&fs::read_to_string(p)?)?,
                (None, None) => return Err(Error::Input("give --n or --graph".into())),
            };
            let d = if g.is_three_coloured() { dims(&g, i, j)? } else { dims_enumerated(&g, i, j) };
            Outcome::Text(d.to_string())
        }
        Cmd::Pathalg { cmd: PathalgCmd::Relcheck { suite, m, trials, model, out } } => {
            let (pm, _) = load_model(&model)?;
            let mut config = model_config(&pm, bits);
            config["m"] = json!(m);
            config["trials"] = json!(trials);
            config["seed"] = json!(model.seed);
            let mut report = Report::new(&suite, config);
            report.extend(pathchecks::by_name(&pm, &suite, m, trials, model.seed)?);
            Outcome::Report(report, out.out)
        }
    })
}

fn read_labels(model: &PathModel, v: &Value) -> Result<Vec<PathOp>> {
    let items = v.as_array().ok_or_else(|| Error::Input("labels must be a list".into()))?;
    items
        .iter()
        .map(|item| {
            let signs: SignString = item["signs"]
                .as_str()
                .ok_or_else(|| Error::Input("label needs `signs`".into()))?
                .parse()?;
            PathOp::from_json(model, &signs.0, &item["terms"])
        })
        .collect()
}

fn emit(v: &Value, out: Option<PathBuf>) -> Result<()> {
    let text = serde_json::to_string_pretty(v)?;
    match out {
        Some(p) => fs::write(p, text + "\n")?,
        None => print_stdout(&text)?,
    }
    Ok(())
}

/// A closed pipe (`| head`) is not an error.
fn print_stdout(text: &str) -> Result<()> {
    match writeln!(std::io::stdout().lock(), "{text}") {
        Err(e) if e.kind() == std::io::ErrorKind::BrokenPipe => Ok(()),
        other => Ok(other?),
    }
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(c) => c,
        Err(e) => {
            let code = if e.use_stderr() { 2 } else { 0 };
            let _ = e.print();
            return ExitCode::from(code);
        }
    };
    let outcome = match run(cli) {
        Ok(o) => o,
        Err(e) => {
            eprintln!("error: {e}");
            return ExitCode::from(match e {
                Error::Solver(_) => 1,
                _ => 2,
            });
        }
    };
    let result = match outcome {
        Outcome::Text(s) => {
            print_stdout(&s).map(|_| true)
        }
        Outcome::Data(v, out) => emit(&v, out).map(|_| true),
        Outcome::Report(r, out) => {
            for c in r.failures() {
                eprintln!("FAIL {}: {}", c.id, c.detail);
            }
            emit(&serde_json::to_value(&r).expect("report serializes"), out).map(|_| r.passed())
        }
    };
    match result {
        Ok(true) => ExitCode::SUCCESS,
        Ok(false) => ExitCode::from(1),
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(2)
        }
    }
}
