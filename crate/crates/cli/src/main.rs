//! `umr`: evaluate, convert, split, repair and inspect UMR graphs.
//!
//! Exit codes: 0 success, 1 usage error, 2 data error.

mod convert;
mod eval;
mod input;
mod inspect;
mod repair;
mod split;

use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand, ValueEnum};

/// Raised for option combinations clap cannot check; exits with 1.
#[derive(Debug, thiserror::Error)]
#[error("{0}")]
pub struct UsageError(pub String);

#[derive(Parser)]
#[command(name = "umr", version, about = "Tools for sentence-level UMR graphs")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Score predicted graphs against gold graphs.
    Eval(EvalArgs),
    /// Turn CoNLL-U trees into partial UMR graphs.
    ConvertUd(ConvertUdArgs),
    /// Rewrite AMR role labels as UMR roles.
    ConvertRoles(ConvertRolesArgs),
    /// Filter a corpus and write train/dev/test partitions.
    Split(SplitArgs),
    /// Fix parenthesis mismatches in generated graphs.
    Repair(RepairArgs),
    /// Print counts and validation issues per graph.
    Inspect(InspectArgs),
}

#[derive(Clone, Copy, ValueEnum, PartialEq, Eq)]
pub enum Format {
    Table,
    Json,
}

#[derive(Clone, Copy, ValueEnum, PartialEq, Eq)]
pub enum OnUnparseable {
    /// Stop with a data error.
    Fail,
    /// Score the pair as zero matched triples.
    Zero,
}

#[derive(Clone, Copy, ValueEnum, PartialEq, Eq)]
pub enum Align {
    /// By id when every graph on both sides has one, else by position.
    Auto,
    Id,
    Order,
}

#[derive(Args)]
pub struct EvalArgs {
    /// Predicted graphs (PENMAN blocks or corpus block file).
    #[arg(long)]
    pub pred: PathBuf,
    /// Gold graphs.
    #[arg(long)]
    pub gold: PathBuf,
    /// Metrics to report: smatch, smatchpp, ancast. Repeatable or
    /// comma-separated.
    #[arg(long, value_delimiter = ',', default_values_t = ["smatch".to_string(), "smatchpp".to_string(), "ancast".to_string()])]
    pub metric: Vec<String>,
    /// Hill-climbing restarts.
    #[arg(long, default_value_t = 4)]
    pub restarts: usize,
    #[arg(long, default_value_t = 0)]
    pub seed: u64,
    /// Use exact search when both graphs have at most this many variables.
    #[arg(long, default_value_t = 8)]
    pub exact_threshold: usize,
    /// TAG=SUBSTRING: tag pairs whose gold sentence contains SUBSTRING.
    /// Repeatable. Defaults to minecraft=Builder and minecraft=Architect.
    #[arg(long)]
    pub category_pattern: Vec<String>,
    /// Also report a non-TAG category for every tag.
    #[arg(long)]
    pub complement: bool,
    #[arg(long, value_enum, default_value_t = Format::Table)]
    pub format: Format,
    /// Worker threads; 1 scores sequentially.
    #[arg(long)]
    pub jobs: Option<usize>,
    #[arg(long, value_enum, default_value_t = OnUnparseable::Fail)]
    pub on_unparseable: OnUnparseable,
    #[arg(long, value_enum, default_value_t = Align::Auto)]
    pub align: Align,
    /// Write the report here instead of standard output.
    #[arg(short, long)]
    pub output: Option<PathBuf>,
}

#[derive(Args)]
pub struct ConvertUdArgs {
    /// CoNLL-U file, or - for standard input.
    pub input: PathBuf,
    /// Rule table (TSV); defaults to the bundled English table.
    #[arg(long)]
    pub rules: Option<PathBuf>,
    /// Keep bracketed dialogue tags split as the tokenizer left them.
    #[arg(long)]
    pub no_merge_tags: bool,
    /// Also write completion records (JSON lines) here.
    #[arg(long)]
    pub records: Option<PathBuf>,
    /// Gold graphs, in sentence order, to include in the records.
    #[arg(long, requires = "records")]
    pub gold: Option<PathBuf>,
    #[arg(short, long)]
    pub output: Option<PathBuf>,
}

#[derive(Args)]
pub struct ConvertRolesArgs {
    /// PENMAN blocks with optional `# ::id` lines.
    pub input: PathBuf,
    /// Role mapping table (TSV); defaults to the bundled seed table.
    #[arg(long)]
    pub mappings: Option<PathBuf>,
    /// Animacy lexicon (TSV); defaults to the bundled lexicon.
    #[arg(long)]
    pub lexicon: Option<PathBuf>,
    /// Per-edge overrides: sent_id, head, role, dependent, chosen role.
    #[arg(long)]
    pub decisions: Option<PathBuf>,
    /// Write the decision log (JSON lines) here.
    #[arg(long)]
    pub log: Option<PathBuf>,
    #[arg(short, long)]
    pub output: Option<PathBuf>,
}

#[derive(Args)]
pub struct SplitArgs {
    /// Corpus block files.
    #[arg(required = true)]
    pub corpus: Vec<PathBuf>,
    /// Split spec (TOML).
    #[arg(long, required_unless_present = "replay", conflicts_with = "replay")]
    pub spec: Option<PathBuf>,
    /// Rebuild the partitions listed in a manifest.
    #[arg(long)]
    pub replay: Option<PathBuf>,
    /// Directory for train.umr, dev.umr, test.umr and manifest.json.
    #[arg(long)]
    pub out_dir: PathBuf,
}

#[derive(Args)]
pub struct RepairArgs {
    /// Graph file, or - for standard input.
    pub input: PathBuf,
    /// One graph per line instead of blank-line separated blocks.
    #[arg(long)]
    pub per_line: bool,
    /// Write per-graph status (JSON lines) here.
    #[arg(long)]
    pub status: Option<PathBuf>,
    #[arg(short, long)]
    pub output: Option<PathBuf>,
}

#[derive(Args)]
pub struct InspectArgs {
    /// PENMAN blocks or corpus block file.
    pub input: PathBuf,
    #[arg(long, value_enum, default_value_t = Format::Table)]
    pub format: Format,
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(c) => c,
        Err(e) => {
            let _ = e.print();
            return if e.use_stderr() {
                ExitCode::from(1)
            } else {
                ExitCode::SUCCESS
            };
        }
    };
    let result = match cli.command {
        Command::Eval(a) => eval::run(&a),
        Command::ConvertUd(a) => convert::run_ud(&a),
        Command::ConvertRoles(a) => convert::run_roles(&a),
        Command::Split(a) => split::run(&a),
        Command::Repair(a) => repair::run(&a),
        Command::Inspect(a) => inspect::run(&a),
    };
    match result {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e:#}");
            if e.downcast_ref::<UsageError>().is_some() {
                ExitCode::from(1)
            } else {
                ExitCode::from(2)
            }
        }
    }
}
