use std::collections::BTreeMap;
use std::fs;
use std::path::{Path, PathBuf};

use anyhow::{anyhow, bail, Context, Result};
use clap::{Args, Parser, Subcommand};

use nckg::config::AppConfig;
use nckg::construct::{self, Status};
use nckg::ioutil::atomic_write;
use nckg::report;
use nckg::review::{self, ClauseCatalog, ReviewContext, ReviewMode};
use nckg_core::lexical::{DocKind, LexicalIndex};
use nckg_core::ontology::OntologyModel;
use nckg_core::query;
use nckg_core::store::GraphStore;
use nckg_core::term::Term;
use nckg_core::turtle::{self, Document};
use nckg_core::vocab;

#[derive(Parser)]
#[command(name = "nckg", version, about = "Contract clause knowledge graphs and risk review")]
struct Cli {
    #[command(flatten)]
    globals: Globals,
    #[command(subcommand)]
    command: Command,
}

#[derive(Args)]
struct Globals {
    /// JSON config file; command-line flags override its values
    #[arg(long, global = true)]
    config: Option<PathBuf>,
    /// Store file (Turtle-star)
    #[arg(long, global = true)]
    store: Option<PathBuf>,
    /// Ontology file (Turtle-star)
    #[arg(long, global = true)]
    ontology: Option<PathBuf>,
    /// Gateway backend: "http" or "mock:<script.json>"
    #[arg(long, global = true)]
    backend: Option<String>,
    /// Catalog matches kept per extracted term
    #[arg(long, global = true)]
    top_k: Option<usize>,
    /// Output format for tabular results
    #[arg(long, global = true, value_parser = ["tsv", "json"])]
    format: Option<String>,
    /// Directory for verdicts, bundles and reports
    #[arg(long, global = true)]
    output_dir: Option<PathBuf>,
}

#[derive(Subcommand)]
enum Command {
    /// Parse Turtle-star files and merge them into the store
    Import { files: Vec<PathBuf> },
    /// Print store composition counts
    Stats,
    /// Run a SELECT query against the store
    Query {
        /// Query file
        #[arg(long, conflicts_with = "inline")]
        file: Option<PathBuf>,
        /// Query text given directly
        #[arg(long)]
        inline: Option<String>,
    },
    /// Look a term up in the lexical catalog
    Map {
        term: String,
        /// "entity" or "event"
        #[arg(long, default_value = "entity")]
        kind: String,
    },
    /// Extract one clause into a staging file for review
    Extract {
        #[arg(long)]
        clauses: PathBuf,
        #[arg(long)]
        id: String,
        #[arg(long)]
        staging_dir: PathBuf,
    },
    /// Merge approved staging files into the store
    Commit { files: Vec<PathBuf> },
    /// Extract a whole corpus into staging files
    Ingest {
        #[arg(long)]
        clauses: PathBuf,
        #[arg(long)]
        staging_dir: PathBuf,
        /// Approve and commit every successful extraction
        #[arg(long)]
        approve: bool,
    },
    /// Risk-review clauses and write verdicts.jsonl
    Review {
        #[arg(long)]
        clauses: PathBuf,
        /// "nckg", "vector" or "llm-only"
        #[arg(long)]
        mode: String,
        /// Standard provisions for the vector baseline; defaults to the clauses file
        #[arg(long)]
        catalog: Option<PathBuf>,
    },
    /// Score verdicts against gold annotations
    Eval {
        #[arg(long)]
        gold: PathBuf,
        #[arg(long)]
        verdicts: PathBuf,
        /// Human summary scores
        #[arg(long)]
        rs: Option<PathBuf>,
    },
}

fn resolve_config(globals: &Globals) -> Result<AppConfig> {
    let mut config = match &globals.config {
        Some(path) => AppConfig::load(path)?,
        None => AppConfig::default(),
    };
    if let Some(store) = &globals.store {
        config.store_path = store.clone();
    }
    if let Some(ontology) = &globals.ontology {
        config.ontology_path = ontology.clone();
    }
    if let Some(backend) = &globals.backend {
        config.gateway.backend = backend.clone();
    }
    if let Some(top_k) = globals.top_k {
        config.top_k = top_k;
    }
    if let Some(output_dir) = &globals.output_dir {
        config.output_dir = output_dir.clone();
    }
    config.validate()?;
    Ok(config)
}

fn merge_file(store: &mut GraphStore, path: &Path) -> Result<usize> {
    let text = fs::read_to_string(path)
        .with_context(|| format!("cannot read {}", path.display()))?;
    let doc = turtle::parse(&text).map_err(|e| anyhow!("{}: {e}", path.display()))?;
    for (prefix, ns) in &doc.prefixes {
        store.declare_prefix(prefix.clone(), ns.clone());
    }
    let mut added = 0;
    for triple in doc.triples {
        if store.insert(triple).map_err(|e| anyhow!("{}: {e}", path.display()))? {
            added += 1;
        }
    }
    Ok(added)
}

fn load_store(config: &AppConfig, must_exist: bool) -> Result<GraphStore> {
    let mut store = GraphStore::with_max_depth(config.max_depth);
    store.declare_prefix(vocab::CKG_PREFIX, vocab::CKG_NS);
    store.declare_prefix(vocab::RDF_PREFIX, vocab::RDF_NS);
    if config.store_path.exists() {
        merge_file(&mut store, &config.store_path)?;
    } else if must_exist {
        bail!("store file {} does not exist; run import first", config.store_path.display());
    }
    Ok(store)
}

fn save_store(store: &GraphStore, path: &Path) -> Result<()> {
    let doc = Document {
        prefixes: store.prefixes().clone(),
        triples: store.iter().cloned().collect(),
    };
    atomic_write(path, &turtle::serialize(&doc))
        .with_context(|| format!("cannot write {}", path.display()))
}

fn load_ontology(config: &AppConfig) -> Result<OntologyModel> {
    let text = fs::read_to_string(&config.ontology_path)
        .with_context(|| format!("cannot read {}", config.ontology_path.display()))?;
    let doc = turtle::parse(&text)
        .map_err(|e| anyhow!("{}: {e}", config.ontology_path.display()))?;
    OntologyModel::load(&doc).map_err(|e| anyhow!("{}: {e}", config.ontology_path.display()))
}

/// Renders a term with prefixed names where a declared namespace applies.
fn prefixed(term: &Term, prefixes: &BTreeMap<String, String>) -> String {
    match term {
        Term::Iri(iri) => {
            for (prefix, ns) in prefixes {
                if let Some(local) = iri.as_str().strip_prefix(ns.as_str()) {
                    let plain = !local.is_empty()
                        && local.chars().all(|c| c.is_alphanumeric() || c == '_');
                    if plain {
                        return format!("{prefix}:{local}");
                    }
                }
            }
            iri.to_string()
        }
        Term::Literal(_) => term.canonical(),
        Term::Quoted(inner) => format!(
            "<< {} {} {} >>",
            prefixed(inner.subject(), prefixes),
            prefixed(&Term::Iri(inner.predicate().clone()), prefixes),
            prefixed(inner.object(), prefixes),
        ),
    }
}

fn print_stats(store: &GraphStore) {
    let stats = store.stats();
    println!("triples: {}", stats.triples);
    println!("nested: {}", stats.nested);
    println!("events: {}", stats.events);
    println!("entities: {}", stats.entities);
}

fn read_clauses(path: &Path) -> Result<Vec<construct::Clause>> {
    let (clauses, errors) = construct::read_corpus(path)
        .with_context(|| format!("cannot read {}", path.display()))?;
    for error in &errors {
        log::warn!("{}: line {}: {}", path.display(), error.line, error.message);
    }
    if clauses.is_empty() {
        bail!("{}: no usable clauses", path.display());
    }
    Ok(clauses)
}

fn cmd_import(config: &AppConfig, files: &[PathBuf]) -> Result<()> {
    if files.is_empty() {
        bail!("import needs at least one .ttls file");
    }
    let mut store = load_store(config, false)?;
    for file in files {
        let added = merge_file(&mut store, file)?;
        println!("{}: {added} new triple(s)", file.display());
    }
    save_store(&store, &config.store_path)?;
    print_stats(&store);
    Ok(())
}

fn cmd_query(config: &AppConfig, text: &str, format: &str) -> Result<()> {
    let store = load_store(config, true)?;
    let parsed = query::parse_query(text).map_err(|e| anyhow!("query: {e}"))?;
    let table = query::evaluate(&store, &parsed);
    let prefixes = store.prefixes();
    match format {
        "json" => {
            for row in &table.rows {
                let object: BTreeMap<&str, Option<String>> = table
                    .header
                    .iter()
                    .zip(row)
                    .map(|(var, cell)| {
                        (var.as_str(), cell.as_ref().map(|t| prefixed(t, prefixes)))
                    })
                    .collect();
                println!("{}", serde_json::to_string(&object).expect("row serializes"));
            }
        }
        _ => {
            println!("{}", table.header.join("\t"));
            for row in &table.rows {
                let cells: Vec<String> = row
                    .iter()
                    .map(|cell| {
                        cell.as_ref().map(|t| prefixed(t, prefixes)).unwrap_or_default()
                    })
                    .collect();
                println!("{}", cells.join("\t"));
            }
        }
    }
    Ok(())
}

fn cmd_map(config: &AppConfig, term: &str, kind: &str) -> Result<()> {
    let kind = match kind {
        "entity" => DocKind::Entity,
        "event" => DocKind::Event,
        other => bail!("unknown kind '{other}': expected entity or event"),
    };
    let store = load_store(config, true)?;
    let onto = load_ontology(config)?;
    let index = LexicalIndex::build(&store, &onto).map_err(|e| anyhow!("index: {e}"))?;
    for hit in index.top_k(term, config.top_k, kind) {
        println!("{}\t{:.6}", hit.id, hit.score);
    }
    Ok(())
}

fn cmd_extract(config: &AppConfig, clauses: &Path, id: &str, staging_dir: &Path) -> Result<()> {
    let corpus = read_clauses(clauses)?;
    let clause = corpus
        .iter()
        .find(|c| c.id == id)
        .ok_or_else(|| anyhow!("clause {id} not found in {}", clauses.display()))?;
    let onto = load_ontology(config)?;
    let gateway = config.build_gateway()?;
    let staged = construct::extract_clause(clause, &onto, &gateway, &config.gateway.model)?;
    fs::create_dir_all(staging_dir)?;
    let path = staging_dir.join(format!("{id}.stage.ttls"));
    construct::write_staging(&staged, &path)?;
    println!("staged {} ({} triple(s)) -> {}", id, staged.graph.triples.len(), path.display());
    if !staged.reviewer_note.is_empty() {
        println!("note: {}", staged.reviewer_note);
    }
    Ok(())
}

fn cmd_commit(config: &AppConfig, files: &[PathBuf]) -> Result<()> {
    if files.is_empty() {
        bail!("commit needs at least one staging file");
    }
    let mut store = load_store(config, false)?;
    let mut triples_added = 0;
    let mut nested_added = 0;
    for file in files {
        let staged = construct::read_staging(file)?;
        let delta = construct::commit(&staged, &mut store)
            .map_err(|e| anyhow!("{}: {e}", file.display()))?;
        triples_added += delta.triples_added;
        nested_added += delta.nested_added;
    }
    save_store(&store, &config.store_path)?;
    println!("committed {} file(s): {triples_added} triple(s), {nested_added} nested", files.len());
    print_stats(&store);
    Ok(())
}

fn cmd_ingest(config: &AppConfig, clauses: &Path, staging_dir: &Path, approve: bool) -> Result<()> {
    let corpus = read_clauses(clauses)?;
    let onto = load_ontology(config)?;
    let gateway = config.build_gateway()?;
    fs::create_dir_all(staging_dir)?;
    let summary =
        construct::ingest_corpus(&corpus, staging_dir, &onto, &gateway, &config.gateway.model)?;
    print!("{}", summary.markdown());
    if summary.failures.len() == corpus.len() {
        bail!("every clause failed to extract");
    }
    if approve {
        let failed: Vec<&str> = summary.failures.iter().map(|(id, _)| id.as_str()).collect();
        let mut store = load_store(config, false)?;
        for clause in &corpus {
            if failed.contains(&clause.id.as_str()) {
                continue;
            }
            let path = staging_dir.join(format!("{}.stage.ttls", clause.id));
            let mut staged = construct::read_staging(&path)?;
            staged.status = Status::Approved;
            construct::write_staging(&staged, &path)?;
            construct::commit(&staged, &mut store).map_err(|e| anyhow!("{}: {e}", clause.id))?;
        }
        save_store(&store, &config.store_path)?;
        print_stats(&store);
    }
    Ok(())
}

fn cmd_review(
    config: &AppConfig,
    clauses: &Path,
    mode: ReviewMode,
    catalog_path: Option<&Path>,
) -> Result<()> {
    let corpus = read_clauses(clauses)?;
    let gateway = config.build_gateway()?;
    let model = &config.gateway.model;

    // mode-specific context, built once
    let mut graph: Option<(GraphStore, LexicalIndex)> = None;
    let mut catalog: Option<ClauseCatalog> = None;
    match mode {
        ReviewMode::Nckg => {
            let store = load_store(config, true)?;
            let onto = load_ontology(config)?;
            let index = LexicalIndex::build(&store, &onto).map_err(|e| anyhow!("index: {e}"))?;
            graph = Some((store, index));
        }
        ReviewMode::VectorBaseline => {
            let provisions = match catalog_path {
                Some(path) => read_clauses(path)?,
                None => corpus.clone(),
            };
            catalog = Some(ClauseCatalog::build(&provisions));
        }
        ReviewMode::LlmOnly => {}
    }

    fs::create_dir_all(&config.output_dir)?;
    let bundles_dir = config.output_dir.join("bundles");
    let mut lines = String::new();
    let mut failures: Vec<(String, String)> = Vec::new();
    for clause in &corpus {
        let context = match (&graph, &catalog) {
            _ if mode == ReviewMode::LlmOnly => ReviewContext::LlmOnly,
            (Some((store, index)), _) => {
                ReviewContext::Nckg { store, index, top_k: config.top_k }
            }
            (_, Some(catalog)) => ReviewContext::Vector { catalog },
            _ => unreachable!("context built per mode above"),
        };
        match review::review(clause, mode, context, &gateway, model) {
            Ok(outcome) => {
                lines.push_str(
                    &serde_json::to_string(&outcome.verdict).expect("verdict serializes"),
                );
                lines.push('\n');
                if let Some(bundle) = &outcome.bundle {
                    fs::create_dir_all(&bundles_dir)?;
                    let mut dump = String::new();
                    dump.push_str(&format!("terms: {}\n", bundle.extracted_terms.join("; ")));
                    for (term, matches) in bundle.entity_matches.iter().chain(&bundle.event_matches)
                    {
                        for hit in matches {
                            dump.push_str(&format!(
                                "match\t{term}\t{:?}\t{}\t{:.6}\n",
                                hit.kind, hit.id, hit.score
                            ));
                        }
                    }
                    dump.push_str("triples:\n");
                    dump.push_str(&bundle.context_text());
                    dump.push_str(&format!("\ncategories: {}\n", bundle.categories_text()));
                    atomic_write(&bundles_dir.join(format!("{}.txt", clause.id)), &dump)?;
                }
            }
            Err(e) => {
                log::warn!("clause {}: {e}", clause.id);
                failures.push((clause.id.clone(), e.to_string()));
            }
        }
    }

    let verdicts_path = config.output_dir.join("verdicts.jsonl");
    atomic_write(&verdicts_path, &lines)?;
    if !failures.is_empty() {
        let failed: String =
            failures.iter().map(|(id, msg)| format!("{id}\t{msg}\n")).collect();
        atomic_write(&config.output_dir.join("failures.txt"), &failed)?;
    }
    println!(
        "reviewed {} clause(s), {} failed -> {}",
        corpus.len() - failures.len(),
        failures.len(),
        verdicts_path.display()
    );
    if failures.len() == corpus.len() {
        bail!("every clause failed to review");
    }
    Ok(())
}

fn cmd_eval(config: &AppConfig, gold: &Path, verdicts: &Path, rs: Option<&Path>) -> Result<()> {
    let gold = report::read_gold(gold)?;
    let verdicts = report::read_verdicts(verdicts)?;
    let rs_scores = rs.map(report::read_rs_scores).transpose()?;
    let run = report::evaluate_run(&gold, &verdicts, rs_scores.as_ref())?;
    fs::create_dir_all(&config.output_dir)?;
    run.write(&config.output_dir)?;
    println!("macro_f1: {:.4}", run.macro_f1);
    if let Some(mean) = run.rs_mean {
        println!("rs_mean: {mean:.1}");
    }
    Ok(())
}

fn run(cli: Cli) -> Result<()> {
    let config = resolve_config(&cli.globals)?;
    let format = cli.globals.format.as_deref().unwrap_or("tsv");
    match &cli.command {
        Command::Import { files } => cmd_import(&config, files),
        Command::Stats => {
            let store = load_store(&config, true)?;
            print_stats(&store);
            Ok(())
        }
        Command::Query { file, inline } => {
            let text = match (file, inline) {
                (Some(path), None) => fs::read_to_string(path)
                    .with_context(|| format!("cannot read {}", path.display()))?,
                (None, Some(text)) => text.clone(),
                _ => bail!("query needs exactly one of --file or --inline"),
            };
            cmd_query(&config, &text, format)
        }
        Command::Map { term, kind } => cmd_map(&config, term, kind),
        Command::Extract { clauses, id, staging_dir } => {
            cmd_extract(&config, clauses, id, staging_dir)
        }
        Command::Commit { files } => cmd_commit(&config, files),
        Command::Ingest { clauses, staging_dir, approve } => {
            cmd_ingest(&config, clauses, staging_dir, *approve)
        }
        Command::Review { clauses, mode, catalog } => {
            let mode: ReviewMode = mode.parse().map_err(|e| anyhow!("{e}"))?;
            cmd_review(&config, clauses, mode, catalog.as_deref())
        }
        Command::Eval { gold, verdicts, rs } => {
            cmd_eval(&config, gold, verdicts, rs.as_deref())
        }
    }
}

fn main() {
    env_logger::init();
    let cli = Cli::parse();
    if let Err(e) = run(cli) {
        eprintln!("error: {e:#}");
        std::process::exit(1);
    }
}
