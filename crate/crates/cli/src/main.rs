//! `rrehc`: validate, derive, diff, export and size renewable energy hubs.
//!
//! Exit codes: 0 success, 1 validation errors (or a failed `--strict` /
//! `--expect-same` check), 2 usage, parse, annex or profile errors,
//! 3 infeasible, unbounded or unreachable demand, 4 numerical failure.

mod commands;
mod design;

use std::io::{IsTerminal, Write};
use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand, ValueEnum};

#[derive(Debug, Parser)]
#[command(name = "rrehc", version, about = "Remote renewable energy hub toolkit")]
struct Cli {
    /// Never emit ANSI colour codes.
    #[arg(long, global = true)]
    no_color: bool,
    /// Print only errors and requested artifacts.
    #[arg(long, short, global = true)]
    quiet: bool,
    /// Treat warnings and set mismatches as failures.
    #[arg(long, global = true)]
    strict: bool,
    #[command(subcommand)]
    command: Command,
}

#[derive(Debug, Subcommand)]
enum Command {
    /// Check hub files against the structural rules.
    Validate {
        #[arg(required = true)]
        files: Vec<PathBuf>,
        #[arg(long, value_enum, default_value_t = TextJson::Text)]
        format: TextJson,
    },
    /// Print derived commodity sets.
    Derive {
        file: PathBuf,
        /// One of C, E, I, B, O or `all`.
        #[arg(long, default_value = "all")]
        set: String,
        #[arg(long, value_enum, default_value_t = TextJson::Text)]
        format: TextJson,
    },
    /// Compare two hubs set by set.
    Diff {
        left: PathBuf,
        right: PathBuf,
        #[arg(long, value_enum, default_value_t = DiffFmt::Table)]
        format: DiffFmt,
        /// Exit 1 when any set differs.
        #[arg(long)]
        expect_same: bool,
    },
    /// Render a hub as Graphviz DOT or as a model skeleton.
    Export(ExportArgs),
    /// Size and dispatch a hub with a techno-economic annex.
    Optimize {
        file: PathBuf,
        annex: PathBuf,
        /// Directory holding `<profile_ref>.csv` files.
        profiles_dir: Option<PathBuf>,
        /// Override the annex horizon length.
        #[arg(long)]
        horizon: Option<usize>,
        /// `COMMODITY:QUANTITY[:per_step|:total]`; replaces annex demands
        /// for that commodity. Repeatable.
        #[arg(long)]
        demand: Vec<String>,
        #[arg(long, value_enum, default_value_t = ReportFmt::Text)]
        format: ReportFmt,
        /// Synthesize missing profiles deterministically from this seed.
        #[arg(long)]
        seed: Option<u64>,
    },
    /// Emit a commented design checklist scaffold.
    Design {
        /// Annotate the checklist against an existing hub.
        #[arg(long)]
        from: Option<PathBuf>,
    },
}

#[derive(Debug, Args)]
#[group(required = true, multiple = false, id = "target")]
struct ExportTarget {
    #[arg(long)]
    dot: bool,
    #[arg(long)]
    skeleton: bool,
}

#[derive(Debug, Args)]
struct ExportArgs {
    file: PathBuf,
    #[command(flatten)]
    target: ExportTarget,
    /// Draw every simple edge instead of hyperedge junctions.
    #[arg(long, requires = "dot")]
    expand: bool,
    /// Write the artifact here instead of stdout.
    #[arg(short, long)]
    output: Option<PathBuf>,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
enum TextJson {
    Text,
    Json,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
enum DiffFmt {
    Table,
    Json,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
enum ReportFmt {
    Text,
    Json,
    Csv,
}

/// Shared output settings.
#[derive(Debug, Clone, Copy)]
pub struct Style {
    pub color: bool,
    pub quiet: bool,
    pub strict: bool,
}

impl Style {
    pub fn paint(&self, text: &str, code: &str) -> String {
        if self.color {
            format!("\x1b[{code}m{text}\x1b[0m")
        } else {
            text.to_string()
        }
    }
}

/// Buffered result of a command.
#[derive(Debug, Default)]
pub struct Outcome {
    pub stdout: String,
    pub stderr: String,
    pub code: u8,
}

impl Outcome {
    pub fn fail(code: u8, message: impl Into<String>) -> Self {
        let mut stderr = message.into();
        if !stderr.ends_with('\n') {
            stderr.push('\n');
        }
        Outcome {
            stdout: String::new(),
            stderr,
            code,
        }
    }
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let style = Style {
        color: !cli.no_color && std::io::stdout().is_terminal(),
        quiet: cli.quiet,
        strict: cli.strict,
    };
    let outcome = match cli.command {
        Command::Validate { files, format } => commands::validate(&files, format == TextJson::Json, style),
        Command::Derive { file, set, format } => commands::derive(&file, &set, format == TextJson::Json, style),
        Command::Diff {
            left,
            right,
            format,
            expect_same,
        } => commands::diff(&left, &right, format == DiffFmt::Json, expect_same, style),
        Command::Export(a) => commands::export(&a.file, a.target.dot, a.expand, a.output.as_deref(), style),
        Command::Optimize {
            file,
            annex,
            profiles_dir,
            horizon,
            demand,
            format,
            seed,
        } => commands::optimize(
            &commands::OptimizeArgs {
                file,
                annex,
                profiles_dir,
                horizon,
                demands: demand,
                format: match format {
                    ReportFmt::Text => rreh_core::optimize::ReportFormat::Text,
                    ReportFmt::Json => rreh_core::optimize::ReportFormat::Json,
                    ReportFmt::Csv => rreh_core::optimize::ReportFormat::Csv,
                },
                seed,
            },
            style,
        ),
        Command::Design { from } => design::design(from.as_deref(), style),
    };
    let _ = std::io::stdout().write_all(outcome.stdout.as_bytes());
    let _ = std::io::stderr().write_all(outcome.stderr.as_bytes());
    ExitCode::from(outcome.code)
}
