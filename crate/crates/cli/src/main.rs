mod commands;
mod config;
mod io;

use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Parser, Subcommand};

use crate::commands::*;

/// Build, convert, canonicalize, split and summarize data-to-text corpora.
///
/// Every stage reads files and writes files. Stochastic stages require a
/// seed and are pure functions of their inputs and that seed.
#[derive(Parser)]
#[command(name = "triplekit", version)]
struct Cli {
    /// TOML file whose values override command-line flags. Top-level keys
    /// apply to every subcommand that has a flag of that name; a
    /// `[subcommand-name]` table applies to that subcommand only.
    #[arg(long, global = true)]
    config: Option<PathBuf>,

    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Read a directory of CSV/TSV tables into a tables JSONL file.
    IngestTables(IngestTablesArgs),
    /// Build every ontology tree and report broken annotations.
    ValidateOntology(ValidateOntologyArgs),
    /// Sample connected components from every table row.
    Sample(SampleArgs),
    /// Turn highlighted cells into triplesets and corpus entries.
    Extract(ExtractArgs),
    /// Convert an E2E `mr,ref` CSV into corpus entries.
    ConvertE2e(ConvertE2eArgs),
    /// Read a WebNLG XML document into corpus entries.
    IngestWebnlg(IngestWebnlgArgs),
    /// Filter WikiSQL records, align them to rows and extract entries.
    AlignWikisql(AlignWikisqlArgs),
    /// Canonicalize predicates with a mapping table.
    Unify(UnifyArgs),
    /// Assign tables to train/dev/test without similarity leakage.
    Split(SplitArgs),
    /// Print corpus statistics.
    Stats(StatsArgs),
    /// Write corpus entries as an XML document.
    ExportXml(ExportXmlArgs),
    /// Write one linearized tripleset per line.
    Linearize(LinearizeArgs),
}

impl Command {
    fn name(&self) -> &'static str {
        match self {
            Command::IngestTables(_) => "ingest-tables",
            Command::ValidateOntology(_) => "validate-ontology",
            Command::Sample(_) => "sample",
            Command::Extract(_) => "extract",
            Command::ConvertE2e(_) => "convert-e2e",
            Command::IngestWebnlg(_) => "ingest-webnlg",
            Command::AlignWikisql(_) => "align-wikisql",
            Command::Unify(_) => "unify",
            Command::Split(_) => "split",
            Command::Stats(_) => "stats",
            Command::ExportXml(_) => "export-xml",
            Command::Linearize(_) => "linearize",
        }
    }
}

fn run(cli: Cli) -> anyhow::Result<()> {
    let overrides = cli
        .config
        .as_deref()
        .map(config::Overrides::load)
        .transpose()?;
    let name = cli.command.name();
    let o = overrides.as_ref();
    match cli.command {
        Command::IngestTables(a) => ingest_tables(config::apply(o, name, a)?),
        Command::ValidateOntology(a) => validate_ontology(config::apply(o, name, a)?),
        Command::Sample(a) => sample(config::apply(o, name, a)?),
        Command::Extract(a) => extract(config::apply(o, name, a)?),
        Command::ConvertE2e(a) => convert_e2e(config::apply(o, name, a)?),
        Command::IngestWebnlg(a) => ingest_webnlg(config::apply(o, name, a)?),
        Command::AlignWikisql(a) => align_wikisql(config::apply(o, name, a)?),
        Command::Unify(a) => unify(config::apply(o, name, a)?),
        Command::Split(a) => split(config::apply(o, name, a)?),
        Command::Stats(a) => stats(config::apply(o, name, a)?),
        Command::ExportXml(a) => export_xml(config::apply(o, name, a)?),
        Command::Linearize(a) => linearize(config::apply(o, name, a)?),
    }
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let command = cli.command.name();
    match run(cli) {
        Ok(()) => ExitCode::SUCCESS,
        Err(err) => {
            eprintln!("{}", io::error_report(command, &err));
            ExitCode::FAILURE
        }
    }
}
