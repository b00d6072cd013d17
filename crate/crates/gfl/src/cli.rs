//! The `gfl` command line: classify graphs with automata or formula systems,
//! translate between the two, normalize systems, lint files, and export
//! evaluation graphs as DOT.
//!
//! Exit codes: verdicts map to 0 (accepted), 1 (rejected), 2 (indeterminate);
//! 64 flags a usage error, 65 a parse or typing error in an input file, and
//! 70 an internal error such as an unreadable file.

use std::fs;
use std::path::{Path, PathBuf};

use clap::error::ErrorKind;
use clap::{Args, Parser, Subcommand};

use crate::automaton::Automaton;
use crate::dot;
use crate::eval::{EvaluationGraph, Verdict};
use crate::format::SpecFile;
use crate::formula::{FormulaSystem, VarId};
use crate::graph::Graph;
use crate::translate;

pub const EXIT_ACCEPTED: i32 = 0;
pub const EXIT_REJECTED: i32 = 1;
pub const EXIT_INDETERMINATE: i32 = 2;
pub const EXIT_USAGE: i32 = 64;
pub const EXIT_DATA: i32 = 65;
pub const EXIT_INTERNAL: i32 = 70;

#[derive(Parser)]
#[command(
    name = "gfl",
    about = "Graph languages via alternating automata and recursive formula systems",
    version
)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Classify a graph with a formula system at a variable
    Check {
        #[command(flatten)]
        system: SystemArgs,
        #[command(flatten)]
        graph: GraphArgs,
    },
    /// Classify a graph with an automaton
    Run {
        #[command(flatten)]
        automaton: AutomatonArgs,
        #[command(flatten)]
        graph: GraphArgs,
    },
    /// Translate between automata and formula systems
    #[command(subcommand)]
    Translate(TranslateCommand),
    /// Rewrite a formula system into shallow normal form
    Normalize {
        #[command(flatten)]
        system: SystemFileArg,
        #[command(flatten)]
        output: OutputArg,
    },
    /// Export an evaluation graph as DOT, colored by the least fixed point
    #[command(subcommand)]
    Dot(DotCommand),
    /// Parse and typecheck a file
    Validate { file: PathBuf },
}

#[derive(Subcommand)]
enum TranslateCommand {
    /// Automaton to formula system
    A2f {
        #[command(flatten)]
        automaton: AutomatonArgs,
        #[command(flatten)]
        output: OutputArg,
    },
    /// Formula system (after shallow normalization) to automaton
    F2a {
        #[command(flatten)]
        system: SystemArgs,
        #[command(flatten)]
        output: OutputArg,
    },
}

#[derive(Subcommand)]
enum DotCommand {
    /// Formula configuration graph of a system at a variable on a graph
    Fcg {
        #[command(flatten)]
        system: SystemArgs,
        #[command(flatten)]
        graph: GraphArgs,
        #[command(flatten)]
        output: OutputArg,
    },
    /// Configuration graph of an automaton on a graph
    Cg {
        #[command(flatten)]
        automaton: AutomatonArgs,
        #[command(flatten)]
        graph: GraphArgs,
        #[command(flatten)]
        output: OutputArg,
    },
}

#[derive(Args)]
struct SystemArgs {
    /// File containing a system block
    #[arg(long)]
    system: PathBuf,
    /// Variable of the system to start from
    #[arg(long)]
    var: String,
}

#[derive(Args)]
struct SystemFileArg {
    /// File containing a system block
    #[arg(long)]
    system: PathBuf,
}

#[derive(Args)]
struct AutomatonArgs {
    /// File containing an automaton block
    #[arg(long)]
    automaton: PathBuf,
}

#[derive(Args)]
struct GraphArgs {
    /// File containing the input graph
    #[arg(long)]
    graph: PathBuf,
    /// Name of the graph, when the file declares several
    #[arg(long)]
    name: Option<String>,
}

#[derive(Args)]
struct OutputArg {
    /// Write here instead of stdout
    #[arg(short, long)]
    output: Option<PathBuf>,
}

struct CliError {
    code: i32,
    message: String,
}

impl CliError {
    fn data(message: impl Into<String>) -> Self {
        CliError { code: EXIT_DATA, message: message.into() }
    }

    fn internal(message: impl Into<String>) -> Self {
        CliError { code: EXIT_INTERNAL, message: message.into() }
    }
}

/// Run the command line; returns the process exit code.
pub fn run<I, T>(args: I) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<std::ffi::OsString> + Clone,
{
    let cli = match Cli::try_parse_from(args) {
        Ok(cli) => cli,
        Err(err) => {
            let code = match err.kind() {
                ErrorKind::DisplayHelp | ErrorKind::DisplayVersion => 0,
                _ => EXIT_USAGE,
            };
            let _ = err.print();
            return code;
        }
    };
    match execute(cli) {
        Ok(code) => code,
        Err(err) => {
            eprintln!("error: {}", err.message);
            err.code
        }
    }
}

fn execute(cli: Cli) -> Result<i32, CliError> {
    match cli.command {
        Command::Check { system, graph } => {
            let (sys, var) = load_system(&system)?;
            let input = load_graph_for(&graph, sys.alphabet())?;
            let verdict = sys
                .classify_at(var, &input)
                .map_err(|e| CliError::data(e.to_string()))?;
            println!("{verdict}");
            Ok(verdict_code(verdict))
        }
        Command::Run { automaton, graph } => {
            let auto = load_automaton(&automaton)?;
            let input = load_graph_for(&graph, auto.alphabet())?;
            let verdict = auto
                .classify(&input)
                .map_err(|e| CliError::data(e.to_string()))?;
            println!("{verdict}");
            Ok(verdict_code(verdict))
        }
        Command::Translate(TranslateCommand::A2f { automaton, output }) => {
            let auto = load_automaton(&automaton)?;
            let (sys, _) = translate::automaton_to_system(&auto);
            let spec = SpecFile {
                alphabet: sys.alphabet().clone(),
                system: Some(sys),
                ..SpecFile::default()
            };
            write_output(&output, &spec.serialize())?;
            Ok(0)
        }
        Command::Translate(TranslateCommand::F2a { system, output }) => {
            let (sys, var) = load_system(&system)?;
            let normal = sys
                .shallow_normal_form()
                .map_err(|e| CliError::data(e.to_string()))?;
            let initial = normal
                .var_named(&sys.variable(var).name)
                .expect("original variables survive normalization");
            let auto = translate::system_to_automaton(&normal, initial)
                .map_err(|e| CliError::data(e.to_string()))?;
            let spec = SpecFile {
                alphabet: auto.alphabet().clone(),
                automaton: Some(auto),
                ..SpecFile::default()
            };
            write_output(&output, &spec.serialize())?;
            Ok(0)
        }
        Command::Normalize { system, output } => {
            let spec = load_spec(&system.system)?;
            let sys = spec
                .system
                .as_ref()
                .ok_or_else(|| no_item(&system.system, "system"))?;
            let normal = sys
                .shallow_normal_form()
                .map_err(|e| CliError::data(e.to_string()))?;
            let out_spec = SpecFile {
                alphabet: normal.alphabet().clone(),
                system: Some(normal),
                ..SpecFile::default()
            };
            write_output(&output, &out_spec.serialize())?;
            Ok(0)
        }
        Command::Dot(DotCommand::Fcg { system, graph, output }) => {
            let (sys, var) = load_system(&system)?;
            let input = load_graph_for(&graph, sys.alphabet())?;
            let fcg = sys
                .fcg(var, &input)
                .map_err(|e| CliError::data(e.to_string()))?;
            let labeled = label_fcg(&sys, fcg);
            let fixed_point = labeled.least_fixed_point();
            write_output(&output, &dot::to_dot(&labeled, &fixed_point))?;
            Ok(0)
        }
        Command::Dot(DotCommand::Cg { automaton, graph, output }) => {
            let auto = load_automaton(&automaton)?;
            let input = load_graph_for(&graph, auto.alphabet())?;
            let cg = auto
                .configuration_graph(&input)
                .map_err(|e| CliError::data(e.to_string()))?;
            let labeled = label_cg(&auto, cg);
            let fixed_point = labeled.least_fixed_point();
            write_output(&output, &dot::to_dot(&labeled, &fixed_point))?;
            Ok(0)
        }
        Command::Validate { file } => {
            load_spec(&file)?;
            println!("ok");
            Ok(0)
        }
    }
}

fn verdict_code(verdict: Verdict) -> i32 {
    match verdict {
        Verdict::Accepted => EXIT_ACCEPTED,
        Verdict::Rejected => EXIT_REJECTED,
        Verdict::Indeterminate => EXIT_INDETERMINATE,
    }
}

fn write_output(output: &OutputArg, text: &str) -> Result<(), CliError> {
    match &output.output {
        Some(path) => fs::write(path, text)
            .map_err(|e| CliError::internal(format!("cannot write {}: {e}", path.display()))),
        None => {
            print!("{text}");
            Ok(())
        }
    }
}

fn load_spec(path: &Path) -> Result<SpecFile, CliError> {
    let text = fs::read_to_string(path)
        .map_err(|e| CliError::internal(format!("cannot read {}: {e}", path.display())))?;
    SpecFile::parse(&text)
        .map_err(|e| CliError::data(format!("{}:{e}", path.display())))
}

fn no_item(path: &Path, what: &str) -> CliError {
    CliError::data(format!("{} does not declare a {what}", path.display()))
}

fn load_system(args: &SystemArgs) -> Result<(FormulaSystem, VarId), CliError> {
    let spec = load_spec(&args.system)?;
    let sys = spec.system.ok_or_else(|| no_item(&args.system, "system"))?;
    let var = sys.var_named(&args.var).ok_or_else(|| {
        CliError::data(format!(
            "{} declares no variable `{}`",
            args.system.display(),
            args.var
        ))
    })?;
    Ok((sys, var))
}

fn load_automaton(args: &AutomatonArgs) -> Result<Automaton, CliError> {
    let spec = load_spec(&args.automaton)?;
    spec.automaton
        .ok_or_else(|| no_item(&args.automaton, "automaton"))
}

fn load_graph_for(args: &GraphArgs, target: &crate::alphabet::Alphabet) -> Result<Graph, CliError> {
    let spec = load_spec(&args.graph)?;
    let named = match &args.name {
        Some(name) => spec
            .graphs
            .iter()
            .find(|g| &g.name == name)
            .ok_or_else(|| {
                CliError::data(format!(
                    "{} declares no graph `{name}`",
                    args.graph.display()
                ))
            })?,
        None => match spec.graphs.as_slice() {
            [single] => single,
            [] => return Err(no_item(&args.graph, "graph")),
            many => {
                return Err(CliError::data(format!(
                    "{} declares {} graphs; pick one with --name",
                    args.graph.display(),
                    many.len()
                )))
            }
        },
    };
    named
        .graph
        .relabeled(&spec.alphabet, target)
        .map_err(|e| CliError::data(format!("graph `{}`: {e}", named.name)))
}

fn label_cg(
    auto: &Automaton,
    cg: EvaluationGraph<crate::automaton::Configuration>,
) -> EvaluationGraph<String> {
    cg.map_payload(|c| {
        format!(
            "{} | {}",
            auto.states()[c.state.index()].name,
            c.remainder.display_with(auto.alphabet())
        )
    })
}

fn label_fcg(
    sys: &FormulaSystem,
    fcg: EvaluationGraph<crate::formula::FormulaConfiguration>,
) -> EvaluationGraph<String> {
    let table = sys.occurrences();
    fcg.map_payload(|c| {
        let formula = match table.formula(c.occurrence) {
            Some(fo) => sys.render_formula(fo),
            None => match table.entry_variable(c.occurrence) {
                Some(x) => sys.variable(x).name.clone(),
                None => "?".into(),
            },
        };
        let sign = match c.sign {
            crate::formula::Sign::Pos => "+",
            crate::formula::Sign::Neg => "-",
        };
        format!("{sign} {formula} | {}", c.remainder.display_with(sys.alphabet()))
    })
}
