//! `dcx`: build, check and analyse molecules and directed complexes.
//!
//! Exit codes: 0 when the command succeeds or the property holds, 1 when the
//! property fails (a JSON counterexample goes to stdout), 2 on invalid input
//! or when an input exceeds `DCX_ELEMENT_LIMIT`.

use std::collections::BTreeSet;
use std::fs;
use std::io::{self, Read, Write};
use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Parser, Subcommand, ValueEnum};
use dcx_core::complex::{DirectedComplex, PastingDiagram, Verdict};
use dcx_core::flow::{self, FlowError, FlowGraph, OrderedPartition};
use dcx_core::homology::poset_report;
use dcx_core::io::{self as dio, IoError};
use dcx_core::subdivision::{self, SdReport};
use dcx_core::{Molecule, MoleculeContext, OgPoset, PlanarTree};
use serde_json::{json, Value};

const DEFAULT_ELEMENT_LIMIT: usize = 2000;

#[derive(Parser)]
#[command(name = "dcx", version, about = "Molecules, flow graphs and subdivisions of directed complexes")]
struct Cli {
    /// How to print the result.
    #[arg(long, value_enum, default_value_t = Output::Json, global = true)]
    output: Output,
    #[command(subcommand)]
    command: Command,
}

#[derive(Clone, Copy, PartialEq, Eq, ValueEnum)]
enum Output {
    Json,
    Dot,
    Text,
}

#[derive(Subcommand)]
enum Command {
    /// Build a molecule and print it as ogposet/1.
    Make {
        #[command(subcommand)]
        what: Make,
    },
    /// Check a property of an ogposet/1 input.
    Check {
        #[arg(value_enum)]
        property: Property,
        input: Option<PathBuf>,
    },
    /// Maximal flow graphs, layerings and orderings.
    Flow {
        #[arg(long)]
        k: isize,
        #[arg(value_enum)]
        view: FlowView,
        input: Option<PathBuf>,
    },
    /// The subdivision poset of a molecule.
    Sd {
        /// Comma-separated pasting levels; all levels below the dimension by default.
        #[arg(long, value_delimiter = ',')]
        levels: Option<Vec<usize>>,
        /// Print connectivity and homology instead of the poset.
        #[arg(long)]
        report: bool,
        input: Option<PathBuf>,
    },
    /// Directed complexes and semi-simplicial sets.
    Cx {
        #[command(subcommand)]
        action: Cx,
    },
    /// Graphviz export.
    Export {
        #[arg(long, value_enum)]
        dot: DotKind,
        #[arg(long, default_value_t = 0)]
        k: isize,
        #[arg(long, value_delimiter = ',')]
        levels: Option<Vec<usize>>,
        input: Option<PathBuf>,
    },
}

#[derive(Subcommand)]
enum Make {
    Globe { n: usize },
    Path { k: usize },
    Oriental { n: usize },
    /// A theta from a planar tree such as "((),())".
    Theta { tree: String },
    Paste { a: PathBuf, b: PathBuf, k: usize },
    Atom { a: PathBuf, b: PathBuf },
    Suspend { a: PathBuf },
    Join { a: PathBuf, b: PathBuf },
}

#[derive(Clone, Copy, ValueEnum)]
enum Property {
    Molecule,
    Round,
    Atom,
    HasseAcyclic,
    FrameAcyclic,
}

#[derive(Clone, Copy, ValueEnum)]
enum FlowView {
    Graph,
    Layerings,
    Orderings,
    Theory,
}

#[derive(Clone, Copy, ValueEnum)]
enum DotKind {
    Hasse,
    Flow,
    Sd,
}

#[derive(Subcommand)]
enum Cx {
    /// Convert ssset/1 to dcomplex/1.
    ImportSsset { input: Option<PathBuf> },
    /// Validate a dcomplex/1 file.
    Verify { input: Option<PathBuf> },
    /// Enumerate pasting diagrams.
    Molecules {
        #[arg(long)]
        max_cells: usize,
        input: Option<PathBuf>,
    },
    /// Decide or bound frame-acyclicity of all molecules over the complex.
    FrameAcyclic {
        #[arg(long)]
        budget: usize,
        input: Option<PathBuf>,
    },
}

enum Failure {
    Invalid(String),
    Budget { size: usize, limit: usize },
}

impl From<IoError> for Failure {
    fn from(e: IoError) -> Self {
        Failure::Invalid(e.to_string())
    }
}

/// A result in every output format it supports.
struct Report {
    json: Value,
    text: Option<String>,
    dot: Option<String>,
    holds: bool,
}

impl Report {
    fn json(json: Value) -> Self {
        Report { json, text: None, dot: None, holds: true }
    }

    fn verdict(json: Value, holds: bool) -> Self {
        Report { json, text: None, dot: None, holds }
    }

    fn dot(json: Value, dot: String) -> Self {
        Report { json, text: None, dot: Some(dot), holds: true }
    }
}

fn read_text(path: Option<&PathBuf>) -> Result<String, Failure> {
    match path {
        Some(p) if p.as_os_str() != "-" => {
            fs::read_to_string(p).map_err(|e| Failure::Invalid(format!("{}: {e}", p.display())))
        }
        _ => {
            let mut s = String::new();
            io::stdin()
                .read_to_string(&mut s)
                .map_err(|e| Failure::Invalid(format!("stdin: {e}")))?;
            Ok(s)
        }
    }
}

fn read_json(path: Option<&PathBuf>) -> Result<Value, Failure> {
    serde_json::from_str(&read_text(path)?).map_err(|e| Failure::Invalid(format!("invalid JSON: {e}")))
}

struct Limits {
    elements: usize,
}

impl Limits {
    fn from_env() -> Result<Self, Failure> {
        let elements = match std::env::var("DCX_ELEMENT_LIMIT") {
            Ok(v) => v
                .trim()
                .parse()
                .map_err(|_| Failure::Invalid(format!("DCX_ELEMENT_LIMIT must be a natural number, got {v:?}")))?,
            Err(_) => DEFAULT_ELEMENT_LIMIT,
        };
        Ok(Limits { elements })
    }

    fn guard(&self, size: usize) -> Result<(), Failure> {
        if size > self.elements {
            Err(Failure::Budget { size, limit: self.elements })
        } else {
            Ok(())
        }
    }
}

fn read_poset(path: Option<&PathBuf>) -> Result<OgPoset, Failure> {
    Ok(dio::ogposet_from_json(&read_json(path)?)?)
}

fn read_molecule(path: Option<&PathBuf>, limits: &Limits) -> Result<Molecule, Failure> {
    let p = read_poset(path)?;
    limits.guard(p.len())?;
    Molecule::recognize(p).map_err(|e| Failure::Invalid(format!("input is not a molecule: {e}")))
}

fn ids(p: &OgPoset, xs: &[usize]) -> Vec<String> {
    xs.iter().map(|&x| p.id(x).to_string()).collect()
}

fn molecule_report(m: &Molecule) -> Report {
    let p = m.poset();
    Report {
        json: dio::ogposet_to_json(p),
        text: Some(format!("counts {:?}\ncertificate {}\n", p.counts(), m.certificate())),
        dot: Some(dio::hasse_dot(p)),
        holds: true,
    }
}

fn make(what: &Make, limits: &Limits) -> Result<Report, Failure> {
    let load = |p: &PathBuf| read_molecule(Some(p), limits);
    let m = match what {
        Make::Globe { n } => Molecule::globe(*n),
        Make::Path { k } => Molecule::path(*k),
        Make::Oriental { n } => Molecule::oriental(*n),
        Make::Theta { tree } => Molecule::theta(&PlanarTree::parse(tree).map_err(Failure::Invalid)?),
        Make::Paste { a, b, k } => {
            Molecule::paste(&load(a)?, &load(b)?, *k).map_err(|e| Failure::Invalid(e.to_string()))?
        }
        Make::Atom { a, b } => Molecule::atom(&load(a)?, &load(b)?).map_err(|e| Failure::Invalid(e.to_string()))?,
        Make::Suspend { a } => load(a)?.suspension(),
        Make::Join { a, b } => Molecule::join(&load(a)?, &load(b)?),
    };
    limits.guard(m.len())?;
    Ok(molecule_report(&m))
}

fn check(property: Property, input: Option<&PathBuf>, limits: &Limits) -> Result<Report, Failure> {
    let p = read_poset(input)?;
    limits.guard(p.len())?;
    let name = property.to_possible_value().unwrap().get_name().to_string();
    let fail = |reason: String| Ok(Report::verdict(json!({"property": name, "holds": false, "reason": reason}), false));
    if let Property::HasseAcyclic = property {
        return match p.hasse_cycle() {
            None => Ok(Report::json(json!({"property": name, "holds": true}))),
            Some(c) => Ok(Report::verdict(
                json!({"property": name, "holds": false, "cycle": ids(&p, &c)}),
                false,
            )),
        };
    }
    let m = match Molecule::recognize(p) {
        Ok(m) => m,
        Err(e) => return fail(e.to_string()),
    };
    let p = m.poset();
    let ok = || {
        Ok(Report::json(json!({
            "property": name,
            "holds": true,
            "certificate": dio::certificate_to_json(m.certificate()),
        })))
    };
    match property {
        Property::Molecule => ok(),
        Property::Round if m.is_round() => ok(),
        Property::Round => fail("some boundary ∂_j U is not ∂_j⁻ U ∩ ∂_j⁺ U".into()),
        Property::Atom if m.is_atom() => ok(),
        Property::Atom => fail(format!("{} maximal elements", p.maximal(&m.full()).len())),
        Property::FrameAcyclic => match flow::frame_acyclicity(&mut MoleculeContext::new(p), &m.full()) {
            Ok(()) => ok(),
            Err(c) => Ok(Report::verdict(
                json!({
                    "property": name,
                    "holds": false,
                    "submolecule": p.format_set(&c.submolecule),
                    "r": c.r,
                    "cycle": ids(p, &c.cycle),
                }),
                false,
            )),
        },
        Property::HasseAcyclic => unreachable!(),
    }
}

fn partition_json(p: &OgPoset, o: &OrderedPartition) -> Value {
    json!(o.blocks.iter().map(|b| ids(p, b)).collect::<Vec<_>>())
}

fn flow_graph_json(p: &OgPoset, g: &FlowGraph) -> Value {
    json!({
        "k": g.k,
        "vertices": ids(p, &g.vertices),
        "edges": g.edges.iter().map(|&(a, b)| [p.id(a).to_string(), p.id(b).to_string()]).collect::<Vec<_>>(),
    })
}

fn flow_cmd(k: isize, view: FlowView, input: Option<&PathBuf>, limits: &Limits) -> Result<Report, Failure> {
    let m = read_molecule(input, limits)?;
    let p = m.poset();
    let full = m.full();
    let mut ctx = MoleculeContext::new(p);
    match view {
        FlowView::Graph => {
            let g = FlowGraph::new(p, &full, k);
            Ok(Report::dot(flow_graph_json(p, &g), dio::flow_dot(p, &g)))
        }
        FlowView::Layerings => {
            let ls = flow::layerings(&mut ctx, &full, k);
            let text: String = ls.iter().map(|l| flow::describe(p, l) + "\n").collect();
            let layers: Vec<Vec<String>> =
                ls.iter().map(|l| l.layers.iter().map(|s| p.format_set(s)).collect()).collect();
            Ok(Report { text: Some(text), ..Report::json(json!({"k": k, "layerings": layers})) })
        }
        FlowView::Orderings => {
            let os = FlowGraph::new(p, &full, k).orderings();
            let list: Vec<Value> = os.iter().map(|o| partition_json(p, o)).collect();
            Ok(Report::json(json!({"k": k, "orderings": list})))
        }
        FlowView::Theory => {
            if k < 0 {
                return Err(Failure::Invalid("k must be a natural number".into()));
            }
            match flow::check_layering_theory(&mut ctx, &full, k as usize) {
                Ok(r) => {
                    let holds = r.iso;
                    Ok(Report::verdict(serde_json::to_value(r).unwrap(), holds))
                }
                Err(FlowError::PreconditionViolated(why)) => Err(Failure::Invalid(why)),
            }
        }
    }
}

fn level_set(m: &Molecule, levels: &Option<Vec<usize>>) -> BTreeSet<usize> {
    match levels {
        Some(v) => v.iter().copied().collect(),
        None => subdivision::all_levels(m),
    }
}

fn sd_cmd(levels: &Option<Vec<usize>>, report: bool, input: Option<&PathBuf>, limits: &Limits) -> Result<Report, Failure> {
    let m = read_molecule(input, limits)?;
    let p = m.poset();
    let sd = subdivision::enumerate_sd(&m, &level_set(&m, levels));
    let dot = dio::sd_dot(p, &sd);
    if report {
        let poset = sd.without_bottom();
        let r = SdReport {
            molecule: m.canonical_key().to_string(),
            sd_size: poset.len(),
            homology: poset_report(&poset),
        };
        return Ok(Report::dot(serde_json::to_value(r).unwrap(), dot));
    }
    let elements: Vec<String> = sd.elements.iter().map(|r| r.tree.display(p).to_string()).collect();
    let text: String = elements.iter().map(|e| format!("{e}\n")).collect();
    let json = json!({
        "molecule": m.canonical_key().to_string(),
        "big_cell": sd.bottom,
        "elements": elements,
        "covers": sd.order.covers(),
    });
    Ok(Report { text: Some(text), ..Report::dot(json, dot) })
}

fn diagram_json(x: &DirectedComplex, d: &PastingDiagram) -> Value {
    let p = d.shape.poset();
    let labels: serde_json::Map<String, Value> =
        (0..p.len()).map(|e| (p.id(e).to_string(), json!(d.labels[e].to_string()))).collect();
    json!({
        "key": x.diagram_key(d).to_string(),
        "shape": dio::ogposet_to_json(p),
        "labels": labels,
    })
}

fn read_complex(input: Option<&PathBuf>, limits: &Limits) -> Result<Result<DirectedComplex, String>, Failure> {
    let v = read_json(input)?;
    let result = match dio::format_of(&v) {
        Some("ssset/1") => dio::ssset_from_json(&v).and_then(|s| Ok(s.to_complex()?)),
        _ => dio::complex_from_json(&v),
    };
    match result {
        Ok(x) => {
            limits.guard(x.len())?;
            Ok(Ok(x))
        }
        Err(IoError::Complex(e)) => Ok(Err(e.to_string())),
        Err(e) => Err(e.into()),
    }
}

fn cx(action: &Cx, limits: &Limits) -> Result<Report, Failure> {
    let invalid = |e: String| Failure::Invalid(e);
    match action {
        Cx::ImportSsset { input } => {
            let s = dio::ssset_from_json(&read_json(input.as_ref())?)?;
            let x = s.to_complex().map_err(|e| invalid(e.to_string()))?;
            Ok(Report::json(dio::complex_to_json(&x)))
        }
        Cx::Verify { input } => match read_complex(input.as_ref(), limits)? {
            Ok(x) => Ok(Report::json(json!({
                "valid": true,
                "dim": x.dim(),
                "cells": x.cells().iter().map(Vec::len).collect::<Vec<_>>(),
                "regular": x.is_regular(),
                "atoms_acyclic": x.atoms_acyclic(),
            }))),
            Err(reason) => Ok(Report::verdict(json!({"valid": false, "reason": reason}), false)),
        },
        Cx::Molecules { max_cells, input } => {
            let x = read_complex(input.as_ref(), limits)?.map_err(invalid)?;
            let ds = x.enumerate_molecules(*max_cells);
            let list: Vec<Value> = ds.iter().map(|d| diagram_json(&x, d)).collect();
            Ok(Report::json(json!({"max_cells": max_cells, "count": ds.len(), "diagrams": list})))
        }
        Cx::FrameAcyclic { budget, input } => {
            let x = read_complex(input.as_ref(), limits)?.map_err(invalid)?;
            let v = x.has_frame_acyclic_molecules(*budget);
            let mut json = json!({"verdict": v.name()});
            match &v {
                Verdict::CheckedUpToBudget(n) => json["budget"] = json!(n),
                Verdict::Counterexample(d) => json["counterexample"] = diagram_json(&x, d),
                _ => {}
            }
            Ok(Report::verdict(json, v.holds()))
        }
    }
}

fn export(dot: DotKind, k: isize, levels: &Option<Vec<usize>>, input: Option<&PathBuf>, limits: &Limits) -> Result<Report, Failure> {
    match dot {
        DotKind::Hasse => {
            let p = read_poset(input)?;
            limits.guard(p.len())?;
            let d = dio::hasse_dot(&p);
            Ok(Report::dot(json!({"dot": d}), d))
        }
        DotKind::Flow => {
            let m = read_molecule(input, limits)?;
            let d = dio::flow_dot(m.poset(), &FlowGraph::new(m.poset(), &m.full(), k));
            Ok(Report::dot(json!({"dot": d}), d))
        }
        DotKind::Sd => {
            let m = read_molecule(input, limits)?;
            let sd = subdivision::enumerate_sd(&m, &level_set(&m, levels));
            let d = dio::sd_dot(m.poset(), &sd);
            Ok(Report::dot(json!({"dot": d}), d))
        }
    }
}

fn run(cli: &Cli) -> Result<Report, Failure> {
    let limits = Limits::from_env()?;
    match &cli.command {
        Command::Make { what } => make(what, &limits),
        Command::Check { property, input } => check(*property, input.as_ref(), &limits),
        Command::Flow { k, view, input } => flow_cmd(*k, *view, input.as_ref(), &limits),
        Command::Sd { levels, report, input } => sd_cmd(levels, *report, input.as_ref(), &limits),
        Command::Cx { action } => cx(action, &limits),
        Command::Export { dot, k, levels, input } => export(*dot, *k, levels, input.as_ref(), &limits),
    }
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    // Export always prints DOT.
    let output = if matches!(cli.command, Command::Export { .. }) { Output::Dot } else { cli.output };
    match run(&cli) {
        Ok(report) => {
            let out = match output {
                Output::Json => {
                    let mut s = serde_json::to_string(&report.json).unwrap();
                    s.push('\n');
                    s
                }
                Output::Text => report.text.unwrap_or_else(|| serde_json::to_string_pretty(&report.json).unwrap() + "\n"),
                Output::Dot => match report.dot {
                    Some(d) => d,
                    None => {
                        eprintln!("error: this command has no DOT output");
                        return ExitCode::from(2);
                    }
                },
            };
            // A closed pipe is not an error worth reporting.
            let _ = io::stdout().write_all(out.as_bytes());
            ExitCode::from(if report.holds { 0 } else { 1 })
        }
        Err(Failure::Invalid(msg)) => {
            eprintln!("error: {msg}");
            ExitCode::from(2)
        }
        Err(Failure::Budget { size, limit }) => {
            eprintln!("error: input has {size} elements, above DCX_ELEMENT_LIMIT = {limit}");
            ExitCode::from(2)
        }
    }
}
