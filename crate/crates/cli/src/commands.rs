//! One function per subcommand.

use std::collections::{BTreeMap, HashMap};
use std::fs;
use std::path::{Path, PathBuf};

use anyhow::{anyhow, bail, Context};
use clap::Args;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};
use serde_json::json;
use triplekit::adapters::e2e::convert_e2e_csv;
use triplekit::adapters::webnlg_ingest;
use triplekit::adapters::wikisql::{convert_wikisql, WikiSqlRecord};
use triplekit::corpus_ops::{compute_stats, render_table, stats_by_partition};
use triplekit::formats::{
    linearize as linearize_tripleset, write_corpus_jsonl, write_jsonl, write_xml,
};
use triplekit::sampler::{sample_table, ComponentRecord, SamplerConfig};
use triplekit::splitkit::{
    leaking_pairs, split as split_tables, Split, SplitConfig, TableSignature,
};
use triplekit::table::TableMeta;
use triplekit::tripler::{highlight_to_tripleset, TriplerError};
use triplekit::unify::{unify_corpus, PredicateMap};
use triplekit::{
    assemble_entry, build_tree, ontology_stats, validate_tree, Annotator, Highlight, NodeRef,
    OntologyAnnotation, OntologyTree, Realization, Table, TableSource, TripleSet,
};

use crate::io::{
    read_corpora, read_corpus, read_records, read_text, summary, write_atomic, Reported,
};

type Catalog = BTreeMap<String, (Table, OntologyTree)>;

fn require_seed(seed: Option<u64>) -> anyhow::Result<u64> {
    seed.ok_or_else(|| anyhow!("a seed is required: pass --seed or set seed in the config file"))
}

/// Tables by id, each paired with its annotation (if any).
fn load_annotated(
    tables: &Path,
    annotations: &Path,
) -> anyhow::Result<BTreeMap<String, (Table, Option<OntologyAnnotation>)>> {
    let mut out = BTreeMap::new();
    for table in read_records::<Table>(tables)? {
        let id = table.id().to_owned();
        if out.insert(id.clone(), (table, None)).is_some() {
            bail!("{}: table id {id:?} appears twice", tables.display());
        }
    }
    for annotation in read_records::<OntologyAnnotation>(annotations)? {
        let id = annotation.table_id().to_owned();
        let slot = out.get_mut(&id).ok_or_else(|| {
            anyhow!(
                "{}: annotation for unknown table {id:?}",
                annotations.display()
            )
        })?;
        if slot.1.replace(annotation).is_some() {
            bail!("{}: table {id:?} is annotated twice", annotations.display());
        }
    }
    Ok(out)
}

fn load_catalog(tables: &Path, annotations: &Path) -> anyhow::Result<Catalog> {
    load_annotated(tables, annotations)?
        .into_iter()
        .map(|(id, (table, annotation))| {
            let annotation = annotation.ok_or_else(|| anyhow!("table {id:?} has no annotation"))?;
            let tree = build_tree(&table, &annotation).with_context(|| format!("table {id:?}"))?;
            Ok((id, (table, tree)))
        })
        .collect()
}

#[derive(Args, Serialize, Deserialize)]
pub struct IngestTablesArgs {
    /// Directory of `.csv` and `.tsv` files. An optional `<name>.meta.json`
    /// sidecar holds `{"id", "title", "source"}`.
    #[arg(long)]
    pub input: PathBuf,
    /// Tables JSONL file to write.
    #[arg(long)]
    pub output: PathBuf,
    /// Source tag for tables without a sidecar.
    #[arg(long, default_value = "other")]
    pub source: String,
}

pub fn ingest_tables(args: IngestTablesArgs) -> anyhow::Result<()> {
    let default_source: TableSource = serde_json::from_value(json!(args.source))
        .with_context(|| format!("unknown table source {:?}", args.source))?;
    let mut files: Vec<PathBuf> = fs::read_dir(&args.input)
        .with_context(|| format!("listing {}", args.input.display()))?
        .map(|e| e.map(|e| e.path()))
        .collect::<Result<_, _>>()?;
    files.retain(|p| matches!(p.extension().and_then(|e| e.to_str()), Some("csv" | "tsv")));
    files.sort();
    let mut tables = Vec::with_capacity(files.len());
    for path in &files {
        let stem = path
            .file_stem()
            .and_then(|s| s.to_str())
            .unwrap_or_default();
        let sidecar = path.with_file_name(format!("{stem}.meta.json"));
        let meta = if sidecar.exists() {
            serde_json::from_str(&read_text(&sidecar)?)
                .with_context(|| format!("parsing {}", sidecar.display()))?
        } else {
            TableMeta {
                id: stem.to_owned(),
                title: String::new(),
                source: default_source,
            }
        };
        let delimiter = if path.extension().is_some_and(|e| e == "tsv") {
            b'\t'
        } else {
            b','
        };
        let file = fs::File::open(path).with_context(|| format!("opening {}", path.display()))?;
        let table = Table::from_delimited(file, delimiter, meta)
            .with_context(|| format!("reading {}", path.display()))?;
        tables.push(table);
    }
    write_atomic(&args.output, write_jsonl(&tables).as_bytes())?;
    summary(json!({"tables": tables.len()}));
    Ok(())
}

#[derive(Args, Serialize, Deserialize)]
pub struct ValidateOntologyArgs {
    /// Tables JSONL written by `ingest-tables`.
    #[arg(long)]
    pub tables: PathBuf,
    /// Annotations JSONL: `{"table_id", "parents", "title_shape"}` per line.
    #[arg(long)]
    pub annotations: PathBuf,
    /// Where to write the JSON report; printed to stdout when absent.
    #[arg(long)]
    pub report: Option<PathBuf>,
}

pub fn validate_ontology(args: ValidateOntologyArgs) -> anyhow::Result<()> {
    let annotated = load_annotated(&args.tables, &args.annotations)?;
    let mut rows = Vec::with_capacity(annotated.len());
    let mut invalid = Vec::new();
    for (id, (table, annotation)) in &annotated {
        let outcome = match annotation {
            None => Err("no annotation".to_owned()),
            Some(a) => build_tree(table, a)
                .map_err(|e| e.to_string())
                .and_then(|tree| {
                    let report = validate_tree(&tree, table);
                    if report.is_valid() {
                        Ok(ontology_stats(&tree))
                    } else {
                        Err(serde_json::to_string(&report.findings).unwrap_or_default())
                    }
                }),
        };
        rows.push(match outcome {
            Ok(stats) => json!({"table_id": id, "status": "ok", "stats": stats}),
            Err(error) => {
                invalid.push(id.clone());
                json!({"table_id": id, "status": "invalid", "error": error})
            }
        });
    }
    let report = json!({"tables": rows, "invalid": invalid});
    let text = serde_json::to_string_pretty(&report)? + "\n";
    match &args.report {
        Some(path) => write_atomic(path, text.as_bytes())?,
        None => print!("{text}"),
    }
    if !invalid.is_empty() {
        return Err(Reported {
            message: format!(
                "{} of {} tables failed validation: {}",
                invalid.len(),
                annotated.len(),
                invalid.join(", ")
            ),
            details: json!({"invalid": invalid}),
        }
        .into());
    }
    Ok(())
}

#[derive(Args, Serialize, Deserialize, Clone)]
pub struct SamplerFlags {
    /// Smallest component size drawn.
    #[arg(long, default_value_t = 2)]
    pub size_min: usize,
    /// Largest component size drawn.
    #[arg(long, default_value_t = 5)]
    pub size_max: usize,
    /// Lower bound of the per-component expansion probability.
    #[arg(long, default_value_t = 0.5)]
    pub p_min: f64,
    /// Upper bound of the per-component expansion probability.
    #[arg(long, default_value_t = 0.7)]
    pub p_max: f64,
    /// Components per table row.
    #[arg(long, default_value_t = 1)]
    pub per_row: usize,
}

fn sample_all(
    catalog: &Catalog,
    flags: &SamplerFlags,
    seed: u64,
) -> anyhow::Result<Vec<ComponentRecord>> {
    let config = SamplerConfig {
        size_min: flags.size_min,
        size_max: flags.size_max,
        p_min: flags.p_min,
        p_max: flags.p_max,
        seed,
    };
    config.validate()?;
    let per_table: Vec<Vec<ComponentRecord>> = catalog
        .par_iter()
        .map(|(id, (table, tree))| {
            sample_table(tree, id, table.row_count(), flags.per_row, &config)
                .with_context(|| format!("sampling table {id:?}"))
        })
        .collect::<anyhow::Result<_>>()?;
    Ok(per_table.into_iter().flatten().collect())
}

#[derive(Args, Serialize, Deserialize)]
pub struct SampleArgs {
    /// Tables JSONL written by `ingest-tables`.
    #[arg(long)]
    pub tables: PathBuf,
    /// Annotations JSONL: `{"table_id", "parents", "title_shape"}` per line.
    #[arg(long)]
    pub annotations: PathBuf,
    /// Components JSONL file to write.
    #[arg(long)]
    pub output: PathBuf,
    /// Required. Per-table streams are derived from it and the table id.
    #[arg(long)]
    pub seed: Option<u64>,
    #[command(flatten)]
    #[serde(flatten)]
    pub sampler: SamplerFlags,
}

pub fn sample(args: SampleArgs) -> anyhow::Result<()> {
    let seed = require_seed(args.seed)?;
    let catalog = load_catalog(&args.tables, &args.annotations)?;
    let records = sample_all(&catalog, &args.sampler, seed)?;
    write_atomic(&args.output, write_jsonl(&records).as_bytes())?;
    summary(json!({"tables": catalog.len(), "components": records.len()}));
    Ok(())
}

/// A highlighted cell set, optionally with the sentences describing it.
/// Component records written by `sample` are accepted as-is.
#[derive(Deserialize)]
struct HighlightRecord {
    table_id: String,
    row_index: usize,
    #[serde(alias = "node_ids")]
    nodes: Vec<NodeRef>,
    #[serde(default)]
    sentences: Vec<String>,
    #[serde(default)]
    annotator: Option<Annotator>,
    #[serde(default)]
    category: Option<String>,
}

/// A tripleset still waiting for its sentences.
#[derive(Serialize)]
struct PendingRecord<'a> {
    table_id: &'a str,
    row_index: usize,
    nodes: Vec<NodeRef>,
    tripleset: TripleSet,
    #[serde(skip_serializing_if = "std::ops::Not::not")]
    has_empty_value: bool,
}

#[derive(Args, Serialize, Deserialize)]
pub struct ExtractArgs {
    /// Tables JSONL written by `ingest-tables`.
    #[arg(long)]
    pub tables: PathBuf,
    /// Annotations JSONL: `{"table_id", "parents", "title_shape"}` per line.
    #[arg(long)]
    pub annotations: PathBuf,
    /// Highlights JSONL: `{"table_id", "row_index", "nodes", "sentences"}`.
    /// Without it, components are sampled with --seed.
    #[arg(long)]
    pub highlights: Option<PathBuf>,
    /// Corpus JSONL to write; with sampling, pending triplesets instead.
    #[arg(long)]
    pub output: PathBuf,
    /// Where highlights without sentences go as pending triplesets.
    #[arg(long)]
    pub pending: Option<PathBuf>,
    /// Seed for sampling when no highlights are given.
    #[arg(long)]
    pub seed: Option<u64>,
    #[command(flatten)]
    #[serde(flatten)]
    pub sampler: SamplerFlags,
}

pub fn extract(args: ExtractArgs) -> anyhow::Result<()> {
    let catalog = load_catalog(&args.tables, &args.annotations)?;
    let records: Vec<HighlightRecord> = match &args.highlights {
        Some(path) => read_records(path)?,
        None => {
            let seed = require_seed(args.seed)?;
            sample_all(&catalog, &args.sampler, seed)?
                .into_iter()
                .map(|c| HighlightRecord {
                    table_id: c.table_id,
                    row_index: c.row_index,
                    nodes: c.node_ids,
                    sentences: Vec::new(),
                    annotator: None,
                    category: None,
                })
                .collect()
        }
    };
    let mut entries = Vec::new();
    let mut pending = Vec::new();
    let mut oversize = 0usize;
    for (i, record) in records.iter().enumerate() {
        let (table, tree) = catalog
            .get(&record.table_id)
            .ok_or_else(|| anyhow!("highlight {}: unknown table {:?}", i + 1, record.table_id))?;
        let highlight = Highlight {
            table_id: record.table_id.clone(),
            row_index: record.row_index,
            nodes: record.nodes.iter().copied().collect(),
        };
        let (tripleset, has_empty_value) = match highlight_to_tripleset(tree, table, &highlight) {
            Ok(v) => v,
            Err(TriplerError::Oversize { .. }) => {
                oversize += 1;
                continue;
            }
            Err(e) => return Err(anyhow!(e).context(format!("highlight {}", i + 1))),
        };
        if record.sentences.is_empty() {
            pending.push(PendingRecord {
                table_id: &record.table_id,
                row_index: record.row_index,
                nodes: tree_order(tree, &highlight),
                tripleset,
                has_empty_value,
            });
            continue;
        }
        let annotator = record.annotator.unwrap_or(Annotator::Internal);
        let comment = tripleset.provenance.as_str();
        let realizations = record
            .sentences
            .iter()
            .map(|s| Realization::new(s.as_str(), annotator, comment))
            .collect();
        let category = record.category.clone().unwrap_or_else(|| "MISC".to_owned());
        let mut entry = assemble_entry(
            tripleset,
            realizations,
            category,
            format!("Id{}", entries.len() + 1),
        )
        .with_context(|| format!("highlight {}", i + 1))?;
        entry.table_id = Some(record.table_id.clone());
        entry.has_empty_value = has_empty_value;
        entries.push(entry);
    }
    let pending_text = write_jsonl(&pending);
    if args.highlights.is_none() {
        write_atomic(&args.output, pending_text.as_bytes())?;
    } else {
        write_atomic(&args.output, write_corpus_jsonl(&entries).as_bytes())?;
        match &args.pending {
            Some(path) => write_atomic(path, pending_text.as_bytes())?,
            None if !pending.is_empty() => {
                bail!(
                    "{} highlights have no sentences; pass --pending to keep them",
                    pending.len()
                )
            }
            None => {}
        }
    }
    summary(
        json!({"entries": entries.len(), "pending": pending.len(), "oversize_discarded": oversize}),
    );
    Ok(())
}

fn tree_order(tree: &OntologyTree, highlight: &Highlight) -> Vec<NodeRef> {
    tree.preorder()
        .into_iter()
        .filter(|n| highlight.nodes.contains(n))
        .collect()
}

#[derive(Args, Serialize, Deserialize)]
pub struct ConvertE2eArgs {
    /// CSV with `mr` and `ref` columns.
    #[arg(long)]
    pub input: PathBuf,
    /// Corpus JSONL to write.
    #[arg(long)]
    pub output: PathBuf,
}

pub fn convert_e2e(args: ConvertE2eArgs) -> anyhow::Result<()> {
    let file =
        fs::File::open(&args.input).with_context(|| format!("opening {}", args.input.display()))?;
    let out =
        convert_e2e_csv(file).with_context(|| format!("converting {}", args.input.display()))?;
    write_atomic(&args.output, write_corpus_jsonl(&out.entries).as_bytes())?;
    summary(json!({
        "entries": out.entries.len(),
        "dropped": out.dropped,
        "skipped_empty_refs": out.skipped_empty_refs,
    }));
    Ok(())
}

#[derive(Args, Serialize, Deserialize)]
pub struct IngestWebnlgArgs {
    /// WebNLG-style XML document.
    #[arg(long)]
    pub input: PathBuf,
    /// Corpus JSONL to write.
    #[arg(long)]
    pub output: PathBuf,
}

pub fn ingest_webnlg(args: IngestWebnlgArgs) -> anyhow::Result<()> {
    let entries = webnlg_ingest(&read_text(&args.input)?)
        .with_context(|| format!("parsing {}", args.input.display()))?;
    write_atomic(&args.output, write_corpus_jsonl(&entries).as_bytes())?;
    summary(json!({"entries": entries.len()}));
    Ok(())
}

#[derive(Deserialize)]
struct SentenceRecord {
    id: String,
    sentence: String,
}

#[derive(Args, Serialize, Deserialize)]
pub struct AlignWikisqlArgs {
    /// JSONL of `{"id", "question", "sql", "table_id", "answer",
    /// "declarative_sentence"}`; `sql` is a query string or a
    /// `{"sel", "agg", "conds"}` object.
    #[arg(long)]
    pub records: PathBuf,
    /// Tables JSONL written by `ingest-tables`.
    #[arg(long)]
    pub tables: PathBuf,
    /// Annotations JSONL: `{"table_id", "parents", "title_shape"}` per line.
    #[arg(long)]
    pub annotations: PathBuf,
    /// JSONL of `{"id", "sentence"}` used when a record has no sentence.
    #[arg(long)]
    pub sentences: Option<PathBuf>,
    /// Corpus JSONL to write.
    #[arg(long)]
    pub output: PathBuf,
}

pub fn align_wikisql(args: AlignWikisqlArgs) -> anyhow::Result<()> {
    let catalog = load_catalog(&args.tables, &args.annotations)?;
    let records: Vec<WikiSqlRecord> = read_records(&args.records)?;
    let sentences: HashMap<String, String> = match &args.sentences {
        Some(path) => read_records::<SentenceRecord>(path)?
            .into_iter()
            .map(|r| (r.id, r.sentence))
            .collect(),
        None => HashMap::new(),
    };
    let out = convert_wikisql(&records, &catalog, &sentences);
    write_atomic(&args.output, write_corpus_jsonl(&out.entries).as_bytes())?;
    summary(json!({
        "entries": out.entries.len(),
        "aggregate_rejected": out.aggregate,
        "unparsable": out.unparsable,
        "unaligned": out.unaligned,
        "missing_table": out.missing_table,
        "missing_sentence": out.missing_sentence,
        "oversize_discarded": out.oversize,
    }));
    Ok(())
}

#[derive(Args, Serialize, Deserialize)]
pub struct UnifyArgs {
    /// Corpus files (`.jsonl`, `.xml` or `.json`), concatenated in order.
    #[arg(long, required = true, num_args = 1..)]
    pub input: Vec<PathBuf>,
    /// Two-column TSV: raw predicate, canonical predicate.
    #[arg(long)]
    pub map: PathBuf,
    /// Unified corpus JSONL to write.
    #[arg(long)]
    pub output: PathBuf,
    /// Writes the distinct predicates that had no mapping, one per line.
    #[arg(long)]
    pub report_unmapped: Option<PathBuf>,
}

pub fn unify(args: UnifyArgs) -> anyhow::Result<()> {
    let map_file =
        fs::File::open(&args.map).with_context(|| format!("opening {}", args.map.display()))?;
    let map = PredicateMap::from_tsv(std::io::BufReader::new(map_file))
        .with_context(|| format!("loading {}", args.map.display()))?;
    let mut entries = read_corpora(&args.input)?;
    let unmapped = unify_corpus(&mut entries, &map);
    write_atomic(&args.output, write_corpus_jsonl(&entries).as_bytes())?;
    if let Some(path) = &args.report_unmapped {
        let text: String = unmapped.iter().map(|p| format!("{p}\n")).collect();
        write_atomic(path, text.as_bytes())?;
    }
    summary(json!({"entries": entries.len(), "unmapped_predicates": unmapped.len()}));
    Ok(())
}

#[derive(Args, Serialize, Deserialize)]
pub struct SplitArgs {
    /// Tables JSONL written by `ingest-tables`.
    #[arg(long)]
    pub tables: PathBuf,
    /// Tables more similar than this end up on the same side.
    #[arg(long, default_value_t = 0.5)]
    pub threshold: f64,
    /// Fraction of tables seeded into test before propagation.
    #[arg(long = "test-seed-frac")]
    pub test_seed_frac: Option<f64>,
    /// Fraction of tables seeded into dev before propagation.
    #[arg(long = "dev-seed-frac")]
    pub dev_seed_frac: Option<f64>,
    /// Required. Drives the seed-table sample.
    #[arg(long)]
    pub seed: Option<u64>,
    /// TSV of `table_id<TAB>split`.
    #[arg(long)]
    pub output: PathBuf,
}

pub fn split(args: SplitArgs) -> anyhow::Result<()> {
    let config = SplitConfig {
        threshold: args.threshold,
        test_seed_fraction: args
            .test_seed_frac
            .ok_or_else(|| anyhow!("--test-seed-frac is required"))?,
        dev_seed_fraction: args
            .dev_seed_frac
            .ok_or_else(|| anyhow!("--dev-seed-frac is required"))?,
        seed: require_seed(args.seed)?,
    };
    let signatures: Vec<TableSignature> = read_records::<Table>(&args.tables)?
        .iter()
        .map(TableSignature::from_table)
        .collect();
    let assignment = split_tables(&signatures, &config)?;
    let leaks = leaking_pairs(&signatures, &assignment, config.threshold);
    if !leaks.is_empty() {
        bail!("internal error: {} similar pairs cross splits", leaks.len());
    }
    write_atomic(&args.output, assignment.to_tsv().as_bytes())?;
    summary(json!({
        "train": assignment.count(Split::Train),
        "dev": assignment.count(Split::Dev),
        "test": assignment.count(Split::Test),
        "test_seeds": assignment.test_seeds.len(),
        "dev_seeds": assignment.dev_seeds.len(),
    }));
    Ok(())
}

#[derive(Args, Serialize, Deserialize)]
pub struct StatsArgs {
    /// Corpus files (`.jsonl`, `.xml` or `.json`), concatenated in order.
    #[arg(long, required = true, num_args = 1..)]
    pub input: Vec<PathBuf>,
    /// Add one row per provenance tag.
    #[arg(long)]
    pub by_partition: bool,
    /// Also write the statistics as JSON.
    #[arg(long)]
    pub json: Option<PathBuf>,
}

pub fn stats(args: StatsArgs) -> anyhow::Result<()> {
    let entries = read_corpora(&args.input)?;
    let rows: Vec<(String, _)> = if args.by_partition {
        stats_by_partition(&entries).into_iter().collect()
    } else {
        vec![("all".to_owned(), compute_stats(&entries))]
    };
    print!("{}", render_table(&rows));
    if let Some(path) = &args.json {
        let map: BTreeMap<_, _> = rows.into_iter().collect();
        let text = serde_json::to_string_pretty(&map)? + "\n";
        write_atomic(path, text.as_bytes())?;
    }
    Ok(())
}

#[derive(Args, Serialize, Deserialize)]
pub struct ExportXmlArgs {
    /// Corpus files (`.jsonl`, `.xml` or `.json`), concatenated in order.
    #[arg(long, required = true, num_args = 1..)]
    pub input: Vec<PathBuf>,
    /// XML document to write.
    #[arg(long)]
    pub output: PathBuf,
}

pub fn export_xml(args: ExportXmlArgs) -> anyhow::Result<()> {
    let entries = read_corpora(&args.input)?;
    write_atomic(&args.output, write_xml(&entries).as_bytes())?;
    summary(json!({"entries": entries.len()}));
    Ok(())
}

#[derive(Args, Serialize, Deserialize)]
pub struct LinearizeArgs {
    /// A corpus file, or a pending-triplesets JSONL written by `extract`.
    #[arg(long)]
    pub input: PathBuf,
    /// Text file to write, one line per tripleset.
    #[arg(long)]
    pub output: PathBuf,
}

#[derive(Deserialize)]
struct TriplesetOnly {
    tripleset: TripleSet,
}

pub fn linearize(args: LinearizeArgs) -> anyhow::Result<()> {
    let triplesets: Vec<TripleSet> = match read_corpus(&args.input) {
        Ok(entries) => entries.into_iter().map(|e| e.tripleset).collect(),
        Err(corpus_err) => read_records::<TriplesetOnly>(&args.input)
            .map_err(|_| corpus_err)?
            .into_iter()
            .map(|r| r.tripleset)
            .collect(),
    };
    let text: String = triplesets
        .iter()
        .map(|ts| linearize_tripleset(ts) + "\n")
        .collect();
    write_atomic(&args.output, text.as_bytes())?;
    summary(json!({"lines": triplesets.len()}));
    Ok(())
}
