use std::fs;
use std::io::Write as _;
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand, ValueEnum};
use rcgp::lexicon::{self, Lexicon};
use rcgp::pipeline::{self, ParseOptions, Resources, Run, Status};
use rcgp::polarity::build_automaton;
use rcgp::semantics::ClassTable;
use rcgp::tree::{validate, Grammar};

/// TAG parser working through simple range concatenation grammars.
#[derive(Parser)]
#[command(name = "rcgp", version)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Parse a sentence.
    Parse(ParseArgs),
    /// Convert a morph/lemma lexicon pair into the normalized JSON lexicon.
    Convert {
        #[arg(short, long)]
        morph: PathBuf,
        #[arg(short, long)]
        lemma: PathBuf,
        /// Output file; stdout if omitted.
        #[arg(short, long)]
        out: Option<PathBuf>,
    },
    /// Print an intermediate artifact of the pipeline.
    Dump {
        what: Artifact,
        #[command(flatten)]
        req: ParseArgs,
    },
}

#[derive(Clone, Copy, ValueEnum)]
enum Artifact {
    /// The converted grammar(s) in textual RCG format.
    Rcg,
    /// The polarity automaton in DOT.
    Automaton,
    /// The parse forest(s) in JSON.
    Forest,
}

#[derive(Clone, Copy, Default, ValueEnum)]
enum Format {
    #[default]
    Text,
    Json,
    Dot,
}

#[derive(Args)]
struct ParseArgs {
    #[arg(short, long)]
    grammar: PathBuf,
    /// Morphological lexicon (word lemma [features] per line).
    #[arg(short, long, requires = "lemma", conflicts_with = "lexicon")]
    morph: Option<PathBuf>,
    /// Lemma lexicon (*ENTRY blocks).
    #[arg(short, long, requires = "morph")]
    lemma: Option<PathBuf>,
    /// Normalized JSON lexicon, as written by `rcgp convert`.
    #[arg(short = 'x', long)]
    lexicon: Option<PathBuf>,
    /// Parse as this category instead of the grammar's axiom.
    #[arg(short, long)]
    axiom: Option<String>,
    /// Keep derivations with unification failures and report the failures.
    #[arg(long)]
    robust: bool,
    /// Log pipeline stages to stderr.
    #[arg(short, long)]
    verbose: bool,
    /// Skip the polarity filter.
    #[arg(long)]
    no_filter: bool,
    #[arg(long, default_value_t = 64, value_parser = clap::value_parser!(u64).range(1..))]
    max_derivations: u64,
    #[arg(short, long, value_enum, default_value_t)]
    format: Format,
    /// Compute flat semantics.
    #[arg(short, long)]
    semantics: bool,
    /// Include per-stage timings in the report.
    #[arg(long)]
    timings: bool,
    sentence: String,
}

/// Exit 2: unreadable or invalid input.
struct InputError(String);

impl<E: std::fmt::Display> From<E> for InputError {
    fn from(e: E) -> Self {
        InputError(e.to_string())
    }
}

fn read(path: &Path) -> Result<String, InputError> {
    fs::read_to_string(path).map_err(|e| InputError(format!("{}: {e}", path.display())))
}

fn load(req: &ParseArgs) -> Result<Resources, InputError> {
    let grammar = Grammar::from_json(&read(&req.grammar)?).map_err(|e| InputError(format!("{}: {e}", req.grammar.display())))?;
    let problems = validate(&grammar);
    if !problems.is_empty() {
        let lines: Vec<String> = problems.iter().map(|d| d.to_string()).collect();
        return Err(InputError(format!("{}: invalid grammar\n{}", req.grammar.display(), lines.join("\n"))));
    }
    let lexicon = match (&req.morph, &req.lemma, &req.lexicon) {
        (_, _, Some(j)) => Lexicon::from_json(&read(j)?).map_err(|e| InputError(format!("{}: {e}", j.display())))?,
        (Some(m), Some(l), None) => Lexicon::from_text(&read(m)?, &read(l)?)?,
        _ => return Err(InputError("a lexicon is required: --morph and --lemma, or --lexicon".into())),
    };
    Ok(Resources { grammar, lexicon, classes: ClassTable::builtin() })
}

fn options(req: &ParseArgs) -> ParseOptions {
    ParseOptions {
        axiom: req.axiom.clone(),
        robust: req.robust,
        no_filter: req.no_filter,
        max_derivations: req.max_derivations as usize,
        semantics: req.semantics,
        timings: req.timings,
    }
}

fn execute(req: &ParseArgs) -> Result<(Resources, Run), InputError> {
    let res = load(req)?;
    let run = pipeline::run(&res, &req.sentence, &options(req))?;
    Ok((res, run))
}

fn cmd_parse(req: &ParseArgs) -> Result<u8, InputError> {
    let (_, run) = execute(req)?;
    let out = match req.format {
        Format::Text => run.to_text(req.timings),
        Format::Json => format!("{}\n", serde_json::to_string_pretty(&run.to_json(req.timings)).expect("report serializes")),
        Format::Dot => run.to_dot(),
    };
    emit(&out);
    Ok(run.status.exit_code() as u8)
}

fn cmd_dump(what: Artifact, req: &ParseArgs) -> Result<u8, InputError> {
    let (res, run) = execute(req)?;
    let unreached = |stage: &str| {
        eprintln!("rcgp: stage '{stage}' not reached ({})", status_name(run.status));
        Ok(1)
    };
    match what {
        Artifact::Automaton => {
            if run.status == Status::LexicalGap {
                return unreached("automaton");
            }
            let a = match &run.automaton {
                Some(a) => a.clone(),
                None => build_automaton(&run.anchoring, req.axiom.as_deref().unwrap_or(&res.grammar.axiom))?,
            };
            emit(&a.to_dot());
        }
        Artifact::Rcg => {
            if run.sets.is_empty() {
                return unreached("rcg");
            }
            emit(&run.rcg_dump());
        }
        Artifact::Forest => match run.forest_json() {
            Some(j) => emit(&format!("{}\n", serde_json::to_string_pretty(&j).expect("forest serializes"))),
            None => return unreached("forest"),
        },
    }
    Ok(0)
}

fn status_name(s: Status) -> &'static str {
    match s {
        Status::Ok => "ok",
        Status::NoParse => "no-parse",
        Status::LexicalGap => "lexical-gap",
    }
}

fn cmd_convert(morph: &Path, lemma: &Path, out: Option<&Path>) -> Result<u8, InputError> {
    let json = lexicon::convert(&read(morph)?, &read(lemma)?)?;
    match out {
        Some(p) => fs::write(p, json).map_err(|e| InputError(format!("{}: {e}", p.display())))?,
        None => emit(&json),
    }
    Ok(0)
}

fn emit(s: &str) {
    let mut out = std::io::stdout().lock();
    let _ = out.write_all(s.as_bytes());
    let _ = out.flush();
}

fn init_logging(verbose: bool) {
    let floor = std::env::var("RCGP_LOG").ok().and_then(|v| v.parse::<log::LevelFilter>().ok()).unwrap_or(log::LevelFilter::Warn);
    let level = if verbose { floor.max(log::LevelFilter::Debug) } else { floor };
    env_logger::Builder::new().filter_level(level).format_timestamp(None).target(env_logger::Target::Stderr).init();
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let verbose = match &cli.command {
        Command::Parse(r) | Command::Dump { req: r, .. } => r.verbose,
        Command::Convert { .. } => false,
    };
    init_logging(verbose);
    let result = match &cli.command {
        Command::Parse(req) => cmd_parse(req),
        Command::Dump { what, req } => cmd_dump(*what, req),
        Command::Convert { morph, lemma, out } => cmd_convert(morph, lemma, out.as_deref()),
    };
    match result {
        Ok(code) => ExitCode::from(code),
        Err(InputError(msg)) => {
            eprintln!("rcgp: {msg}");
            ExitCode::from(2)
        }
    }
}
