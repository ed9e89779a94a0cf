//! Semi-automatic clause-to-graph extraction with a file-based human
//! review step.
//!
//! Extraction runs five LLM steps per clause: actor NER, actor-object
//! relation linking, property NER, constraint NER, and nested linking.
//! The result is staged as an editable Turtle-star file with a comment
//! header; only approved stagings are committed to the store.

use std::collections::{BTreeMap, BTreeSet};
use std::fs;
use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};
use thiserror::Error;

use nckg_core::ontology::OntologyModel;
use nckg_core::store::{GraphStore, StoreError};
use nckg_core::term::{Iri, Term, Triple};
use nckg_core::turtle::{self, Document};
use nckg_core::vocab;

use crate::gateway::{ChatRequest, Gateway, GatewayError};
use crate::ioutil::atomic_write;
use crate::templates::{self, TemplateId};

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Serialize, Deserialize)]
pub enum Source {
    #[serde(rename = "FIDIC")]
    Fidic,
    #[serde(rename = "NEC")]
    Nec,
    Other,
}

impl Source {
    pub fn as_str(&self) -> &'static str {
        match self {
            Source::Fidic => "FIDIC",
            Source::Nec => "NEC",
            Source::Other => "Other",
        }
    }

    pub fn from_str_loose(s: &str) -> Source {
        match s.trim() {
            "FIDIC" => Source::Fidic,
            "NEC" => Source::Nec,
            _ => Source::Other,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct Clause {
    pub id: String,
    pub source: Source,
    #[serde(default)]
    pub section: String,
    pub text: String,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct CorpusLineError {
    pub line: usize,
    pub message: String,
}

/// Reads a corpus JSONL file; malformed lines are collected, not fatal.
pub fn read_corpus(path: &Path) -> std::io::Result<(Vec<Clause>, Vec<CorpusLineError>)> {
    let text = fs::read_to_string(path)?;
    let mut clauses = Vec::new();
    let mut errors = Vec::new();
    for (idx, line) in text.lines().enumerate() {
        if line.trim().is_empty() {
            continue;
        }
        match serde_json::from_str::<Clause>(line) {
            Ok(clause) if clause.text.trim().is_empty() => errors.push(CorpusLineError {
                line: idx + 1,
                message: "clause text is empty".to_string(),
            }),
            Ok(clause) => clauses.push(clause),
            Err(e) => errors.push(CorpusLineError { line: idx + 1, message: e.to_string() }),
        }
    }
    Ok((clauses, errors))
}

/// Turns a surface span into a camelCase local name: leading articles
/// drop, the first word keeps its case, later words are capitalized.
/// "advance payment" becomes "advancePayment", "the Project Manager"
/// becomes "ProjectManager".
pub fn mint_local(span: &str) -> String {
    let words: Vec<String> = span
        .split(|c: char| !c.is_alphanumeric())
        .filter(|w| !w.is_empty())
        .map(|w| w.to_string())
        .collect();
    let mut words = words.as_slice();
    while let Some(first) = words.first() {
        if words.len() > 1 && ["the", "a", "an"].contains(&first.to_lowercase().as_str()) {
            words = &words[1..];
        } else {
            break;
        }
    }
    let mut out = String::new();
    for (i, word) in words.iter().enumerate() {
        if i == 0 {
            out.push_str(word);
        } else {
            let mut chars = word.chars();
            if let Some(first) = chars.next() {
                out.extend(first.to_uppercase());
                out.push_str(chars.as_str());
            }
        }
    }
    out
}

pub fn mint_iri(span: &str) -> Option<Iri> {
    let local = mint_local(span);
    if local.is_empty() {
        return None;
    }
    Some(vocab::ckg(&local))
}

/// The per-clause extraction result: typed instances, asserted triples,
/// and the span-to-IRI minting log.
#[derive(Debug, Clone, PartialEq, Eq, Default)]
pub struct ClauseGraph {
    pub clause_id: String,
    /// instance IRI -> ontology class IRI, used for `rdf:type` on commit
    pub types: BTreeMap<Iri, Iri>,
    pub triples: Vec<Triple>,
    pub minted: BTreeMap<String, Iri>,
}

impl ClauseGraph {
    pub fn entities(&self) -> BTreeSet<Iri> {
        let mut out = BTreeSet::new();
        for triple in &self.triples {
            triple.visit_node_iris(&mut |iri| {
                out.insert(iri.clone());
            });
        }
        out
    }

    /// Every event in the graph: asserted plain triples plus all quoted
    /// triples.
    pub fn events(&self) -> BTreeSet<Triple> {
        let mut out = BTreeSet::new();
        for triple in &self.triples {
            if triple.inner_depth() == 0 {
                out.insert(triple.clone());
            }
            triple.visit_quoted(&mut |q| {
                out.insert(q.clone());
            });
        }
        out
    }

    pub fn nested_count(&self) -> usize {
        self.triples.iter().filter(|t| t.inner_depth() > 0).count()
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Status {
    Pending,
    Approved,
    Rejected,
}

impl Status {
    pub fn as_str(&self) -> &'static str {
        match self {
            Status::Pending => "pending",
            Status::Approved => "approved",
            Status::Rejected => "rejected",
        }
    }

    pub fn parse(s: &str) -> Option<Status> {
        match s.trim().to_lowercase().as_str() {
            "pending" => Some(Status::Pending),
            "approved" => Some(Status::Approved),
            "rejected" => Some(Status::Rejected),
            _ => None,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct StagedExtraction {
    pub clause: Clause,
    pub graph: ClauseGraph,
    pub status: Status,
    pub reviewer_note: String,
}

#[derive(Debug, Error)]
pub enum ExtractError {
    #[error("extraction step {step} failed: {source}")]
    Gateway {
        step: &'static str,
        #[source]
        source: GatewayError,
    },
    #[error("extraction step {step} returned unusable output: {message}")]
    BadOutput { step: &'static str, message: String },
    #[error("no contract actors or objects recognized in clause {0}")]
    EmptyExtraction(String),
    #[error("prompt rendering failed: {0}")]
    Render(#[from] nckg_core::prompt::RenderError),
}

fn ask(
    gateway: &Gateway,
    model: &str,
    step: &'static str,
    template: TemplateId,
    slots: &[(&str, &str)],
) -> Result<String, ExtractError> {
    let prompt = templates::render(template, slots)?;
    let request = ChatRequest::prompt(model, prompt, template);
    let response = gateway
        .complete(&request)
        .map_err(|source| ExtractError::Gateway { step, source })?;
    Ok(response.content)
}

fn parse_string_array(step: &'static str, content: &str) -> Result<Vec<String>, ExtractError> {
    let value: serde_json::Value = serde_json::from_str(content.trim())
        .map_err(|e| ExtractError::BadOutput { step, message: e.to_string() })?;
    let array = value.as_array().ok_or_else(|| ExtractError::BadOutput {
        step,
        message: "expected a JSON array".to_string(),
    })?;
    array
        .iter()
        .map(|item| {
            item.as_str().map(str::to_string).ok_or_else(|| ExtractError::BadOutput {
                step,
                message: "expected an array of strings".to_string(),
            })
        })
        .collect()
}

fn parse_tuple_array(
    step: &'static str,
    content: &str,
    arity: usize,
) -> Result<Vec<Vec<String>>, ExtractError> {
    let value: serde_json::Value = serde_json::from_str(content.trim())
        .map_err(|e| ExtractError::BadOutput { step, message: e.to_string() })?;
    let array = value.as_array().ok_or_else(|| ExtractError::BadOutput {
        step,
        message: "expected a JSON array".to_string(),
    })?;
    let mut out = Vec::new();
    for item in array {
        let tuple = item.as_array().ok_or_else(|| ExtractError::BadOutput {
            step,
            message: "expected an array of arrays".to_string(),
        })?;
        if tuple.len() != arity {
            return Err(ExtractError::BadOutput {
                step,
                message: format!("expected {arity}-element tuples, got {}", tuple.len()),
            });
        }
        out.push(
            tuple
                .iter()
                .map(|cell| {
                    cell.as_str().map(str::to_string).ok_or_else(|| ExtractError::BadOutput {
                        step,
                        message: "tuple cells must be strings".to_string(),
                    })
                })
                .collect::<Result<Vec<String>, _>>()?,
        );
    }
    Ok(out)
}

const STRING_ARRAY_FORMAT: &str =
    "Output a JSON array of strings, one per span. Output [] if none are present.";
const PAIR_ARRAY_FORMAT: &str = "Output a JSON array of [object, property] pairs, where object \
     is the contract object span and property is the property span. Output [] if none are present.";

/// Runs the five extraction steps against the gateway and stages the
/// resulting graph as Pending.
pub fn extract_clause(
    clause: &Clause,
    onto: &OntologyModel,
    gateway: &Gateway,
    model: &str,
) -> Result<StagedExtraction, ExtractError> {
    let mut graph = ClauseGraph { clause_id: clause.id.clone(), ..ClauseGraph::default() };
    let mut notes = Vec::new();

    // step 1: actor and object NER
    let actors = parse_string_array(
        "actor-ner",
        &ask(
            gateway,
            model,
            "actor-ner",
            TemplateId::Ner,
            &[
                ("clause", &clause.text),
                (
                    "target_class",
                    "contract actor: a party or role such as the Employer, Contractor, \
                     Engineer or Project Manager",
                ),
                ("output_format", STRING_ARRAY_FORMAT),
            ],
        )?,
    )?;
    let objects = parse_string_array(
        "object-ner",
        &ask(
            gateway,
            model,
            "object-ner",
            TemplateId::Ner,
            &[
                ("clause", &clause.text),
                (
                    "target_class",
                    "contract object: a tangible or documentary artifact such as the works, \
                     equipment, programme, payment or guarantee",
                ),
                ("output_format", STRING_ARRAY_FORMAT),
            ],
        )?,
    )?;
    if actors.is_empty() && objects.is_empty() {
        return Err(ExtractError::EmptyExtraction(clause.id.clone()));
    }

    let mint = |graph: &mut ClauseGraph, span: &str, class: Iri| -> Option<Iri> {
        let iri = mint_iri(span)?;
        graph.minted.insert(span.to_string(), iri.clone());
        graph.types.entry(iri.clone()).or_insert(class);
        Some(iri)
    };
    for span in &actors {
        mint(&mut graph, span, vocab::contract_actor());
    }
    for span in &objects {
        mint(&mut graph, span, vocab::contract_object());
    }

    // step 2: actor-object events
    let candidates = actors
        .iter()
        .chain(&objects)
        .map(String::as_str)
        .collect::<Vec<_>>()
        .join("; ");
    let event_rows = parse_tuple_array(
        "event-link",
        &ask(
            gateway,
            model,
            "event-link",
            TemplateId::RelationLink,
            &[
                ("clause", &clause.text),
                ("candidates", &candidates),
                (
                    "instruction",
                    "Link each contract actor to the contract object it acts upon; the \
                     predicate is the action verb connecting them.",
                ),
            ],
        )?,
        3,
    )?;
    let known: BTreeSet<Iri> = graph.types.keys().cloned().collect();
    let mut events: Vec<Triple> = Vec::new();
    for row in event_rows {
        let (Some(s), Some(p), Some(o)) =
            (mint_iri(&row[0]), mint_iri(&row[1]), mint_iri(&row[2]))
        else {
            notes.push(format!("dropped event row with unusable cells: {row:?}"));
            continue;
        };
        if !known.contains(&s) || !known.contains(&o) {
            notes.push(format!(
                "dropped event ({} {} {}): subject or object was not extracted in step 1",
                s.local_name(),
                p.local_name(),
                o.local_name()
            ));
            continue;
        }
        graph.minted.insert(row[0].clone(), s.clone());
        graph.minted.insert(row[2].clone(), o.clone());
        events.push(Triple::new(Term::Iri(s), p, Term::Iri(o)).expect("iri subject"));
    }

    // step 3: property events
    let property_rows = parse_tuple_array(
        "property-ner",
        &ask(
            gateway,
            model,
            "property-ner",
            TemplateId::Ner,
            &[
                ("clause", &clause.text),
                (
                    "target_class",
                    "contract property: a state or attribute ascribed to a contract object",
                ),
                ("output_format", PAIR_ARRAY_FORMAT),
            ],
        )?,
        2,
    )?;
    for row in property_rows {
        let (Some(object), Some(property)) = (mint_iri(&row[0]), mint_iri(&row[1])) else {
            notes.push(format!("dropped property row with unusable cells: {row:?}"));
            continue;
        };
        graph.minted.insert(row[0].clone(), object.clone());
        graph.minted.insert(row[1].clone(), property.clone());
        graph.types.entry(object.clone()).or_insert(vocab::contract_object());
        graph.types.entry(property.clone()).or_insert(vocab::contract_property());
        events.push(
            Triple::new(Term::Iri(object), vocab::has_property(), Term::Iri(property))
                .expect("iri subject"),
        );
    }

    // step 4: constraint NER
    let constraints = parse_string_array(
        "constraint-ner",
        &ask(
            gateway,
            model,
            "constraint-ner",
            TemplateId::Ner,
            &[
                ("clause", &clause.text),
                (
                    "target_class",
                    "contract constraint: a condition, exception, or temporal, amount or \
                     result restriction governing when an obligation applies",
                ),
                ("output_format", STRING_ARRAY_FORMAT),
            ],
        )?,
    )?;
    for span in &constraints {
        mint(&mut graph, span, vocab::contract_constraint());
    }

    // step 5: nested linking over events and constraints
    let mut event_labels: BTreeMap<String, Triple> = BTreeMap::new();
    for event in &events {
        event_labels.insert(event_label(event), event.clone());
    }
    let nested_candidates = event_labels
        .keys()
        .map(String::as_str)
        .chain(constraints.iter().map(String::as_str))
        .collect::<Vec<_>>()
        .join("; ");
    let nested_rows = parse_tuple_array(
        "nested-link",
        &ask(
            gateway,
            model,
            "nested-link",
            TemplateId::RelationLink,
            &[
                ("clause", &clause.text),
                ("candidates", &nested_candidates),
                (
                    "instruction",
                    "Link events (written as evt:subject predicate object) to the constraints \
                     that govern them and to other events they depend on. Use predicates such \
                     as hasConstraint, hasCondition, exception, unless, otherwise, or a \
                     temporal predicate like within90daysOf.",
                ),
            ],
        )?,
        3,
    )?;

    let mut triples: Vec<Triple> = events.clone();
    for row in nested_rows {
        let Some(subject) = resolve_nested_cell(&row[0], &event_labels, &graph) else {
            notes.push(format!("dropped nested row, unknown subject: {row:?}"));
            continue;
        };
        let Some(predicate) = mint_iri(&row[1]) else {
            notes.push(format!("dropped nested row, unusable predicate: {row:?}"));
            continue;
        };
        let Some(object) = resolve_nested_cell(&row[2], &event_labels, &graph) else {
            notes.push(format!("dropped nested row, unknown object: {row:?}"));
            continue;
        };
        if subject.as_quoted().is_none() && object.as_quoted().is_none() {
            notes.push(format!("dropped nested row, neither side is an event: {row:?}"));
            continue;
        }
        match Triple::new(subject, predicate, object) {
            Ok(triple) => triples.push(triple),
            Err(e) => notes.push(format!("dropped nested row: {e}")),
        }
    }
    graph.triples = triples;

    // surface meta-model deviations to the reviewer
    let mut preview = GraphStore::new();
    for (instance, class) in &graph.types {
        let _ = preview.insert(
            Triple::new(Term::Iri(instance.clone()), vocab::rdf_type(), Term::Iri(class.clone()))
                .expect("iri subject"),
        );
    }
    for triple in &graph.triples {
        let _ = preview.insert(triple.clone());
    }
    for diagnostic in onto.validate(&preview) {
        notes.push(format!("{:?}: {}", diagnostic.severity, diagnostic.message));
    }

    Ok(StagedExtraction {
        clause: clause.clone(),
        graph,
        status: Status::Pending,
        reviewer_note: notes.join("\n"),
    })
}

/// `evt:subject predicate object` labels events in nested-link prompts.
fn event_label(event: &Triple) -> String {
    let part = |term: &Term| match term {
        Term::Iri(iri) => iri.local_name().to_string(),
        Term::Literal(lit) => lit.lexical().to_string(),
        Term::Quoted(_) => "?".to_string(),
    };
    format!(
        "evt:{} {} {}",
        part(event.subject()),
        event.predicate().local_name(),
        part(event.object())
    )
}

fn resolve_nested_cell(
    cell: &str,
    events: &BTreeMap<String, Triple>,
    graph: &ClauseGraph,
) -> Option<Term> {
    if let Some(event) = events.get(cell.trim()) {
        return Some(Term::quoted(event.clone()));
    }
    if cell.trim().starts_with("evt:") {
        return None;
    }
    let iri = graph
        .minted
        .get(cell.trim())
        .cloned()
        .or_else(|| mint_iri(cell).filter(|i| graph.types.contains_key(i)))?;
    Some(Term::Iri(iri))
}

#[derive(Debug, Error)]
pub enum StagingError {
    #[error("cannot access staging file {path}: {source}")]
    Io {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },
    #[error("staging file {path} has no '# status:' header")]
    StatusMissing { path: PathBuf },
    #[error("staging file {path} header is invalid: {message}")]
    BadHeader { path: PathBuf, message: String },
    #[error("staging file {path}: {source}")]
    Parse {
        path: PathBuf,
        #[source]
        source: nckg_core::turtle::ParseError,
    },
}

fn escape_header(text: &str) -> String {
    text.replace('\\', "\\\\").replace('\n', "\\n")
}

fn unescape_header(text: &str) -> String {
    let mut out = String::with_capacity(text.len());
    let mut chars = text.chars();
    while let Some(c) = chars.next() {
        if c != '\\' {
            out.push(c);
            continue;
        }
        match chars.next() {
            Some('n') => out.push('\n'),
            Some('\\') => out.push('\\'),
            Some(other) => {
                out.push('\\');
                out.push(other);
            }
            None => out.push('\\'),
        }
    }
    out
}

/// Staging file layout: a `#`-comment header carrying clause metadata,
/// status, reviewer note, type and minting records, followed by the
/// graph as Turtle-star. The body is what reviewers hand-edit.
pub fn write_staging(staged: &StagedExtraction, path: &Path) -> Result<(), StagingError> {
    let mut out = String::new();
    out.push_str(&format!("# clause: {}\n", staged.clause.id));
    out.push_str(&format!("# source: {}\n", staged.clause.source.as_str()));
    out.push_str(&format!("# section: {}\n", escape_header(&staged.clause.section)));
    out.push_str(&format!("# status: {}\n", staged.status.as_str()));
    out.push_str(&format!("# note: {}\n", escape_header(&staged.reviewer_note)));
    out.push_str(&format!("# text: {}\n", escape_header(&staged.clause.text)));
    for (instance, class) in &staged.graph.types {
        out.push_str(&format!("# type: {} {}\n", instance.local_name(), class.local_name()));
    }
    for (span, iri) in &staged.graph.minted {
        out.push_str(&format!("# span: {} -> {}\n", escape_header(span), iri.local_name()));
    }
    out.push('\n');
    let doc = Document {
        prefixes: BTreeMap::from([(vocab::CKG_PREFIX.to_string(), vocab::CKG_NS.to_string())]),
        triples: staged.graph.triples.clone(),
    };
    out.push_str(&turtle::serialize(&doc));
    atomic_write(path, &out).map_err(|source| StagingError::Io { path: path.to_path_buf(), source })
}

pub fn read_staging(path: &Path) -> Result<StagedExtraction, StagingError> {
    let text = fs::read_to_string(path)
        .map_err(|source| StagingError::Io { path: path.to_path_buf(), source })?;
    let bad = |message: String| StagingError::BadHeader { path: path.to_path_buf(), message };

    let mut clause_id = None;
    let mut source = Source::Other;
    let mut section = String::new();
    let mut status = None;
    let mut note = String::new();
    let mut clause_text = String::new();
    let mut types = BTreeMap::new();
    let mut minted = BTreeMap::new();

    for line in text.lines() {
        let Some(rest) = line.strip_prefix("# ") else { continue };
        let Some((key, value)) = rest.split_once(':') else { continue };
        let value = value.trim_start();
        match key {
            "clause" => clause_id = Some(value.to_string()),
            "source" => source = Source::from_str_loose(value),
            "section" => section = unescape_header(value),
            "status" => {
                status = Some(
                    Status::parse(value)
                        .ok_or_else(|| bad(format!("unknown status '{value}'")))?,
                )
            }
            "note" => note = unescape_header(value),
            "text" => clause_text = unescape_header(value),
            "type" => {
                let (instance, class) = value
                    .split_once(' ')
                    .ok_or_else(|| bad(format!("malformed type record '{value}'")))?;
                types.insert(vocab::ckg(instance.trim()), vocab::ckg(class.trim()));
            }
            "span" => {
                let (span, local) = value
                    .rsplit_once(" -> ")
                    .ok_or_else(|| bad(format!("malformed span record '{value}'")))?;
                minted.insert(unescape_header(span), vocab::ckg(local.trim()));
            }
            _ => {}
        }
    }

    let status = status.ok_or(StagingError::StatusMissing { path: path.to_path_buf() })?;
    let clause_id = clause_id.ok_or_else(|| bad("missing '# clause:' header".to_string()))?;
    let doc = turtle::parse(&text)
        .map_err(|source| StagingError::Parse { path: path.to_path_buf(), source })?;

    Ok(StagedExtraction {
        clause: Clause { id: clause_id.clone(), source, section, text: clause_text },
        graph: ClauseGraph { clause_id, types, triples: doc.triples, minted },
        status,
        reviewer_note: note,
    })
}

#[derive(Debug, Clone, Copy, Default, PartialEq, Eq)]
pub struct CommitDelta {
    pub triples_added: usize,
    pub nested_added: usize,
}

#[derive(Debug, Error)]
pub enum CommitError {
    #[error("staging for clause {0} is not approved")]
    NotApproved(String),
    #[error(transparent)]
    Store(#[from] StoreError),
}

/// Merges an approved staging into the store, adding `rdf:type` links
/// for the staged instances. Set semantics make this idempotent.
pub fn commit(staged: &StagedExtraction, store: &mut GraphStore) -> Result<CommitDelta, CommitError> {
    if staged.status != Status::Approved {
        return Err(CommitError::NotApproved(staged.clause.id.clone()));
    }
    let mut delta = CommitDelta::default();
    for (instance, class) in &staged.graph.types {
        let triple =
            Triple::new(Term::Iri(instance.clone()), vocab::rdf_type(), Term::Iri(class.clone()))
                .expect("iri subject");
        if store.insert(triple)? {
            delta.triples_added += 1;
        }
    }
    for triple in &staged.graph.triples {
        let nested = triple.inner_depth() > 0;
        if store.insert(triple.clone())? {
            delta.triples_added += 1;
            if nested {
                delta.nested_added += 1;
            }
        }
    }
    Ok(delta)
}

#[derive(Debug, Clone, Default, PartialEq, Eq)]
pub struct SourceCounts {
    pub clauses: usize,
    pub triples: usize,
    pub nested: usize,
}

#[derive(Debug, Clone, Default, PartialEq, Eq)]
pub struct IngestSummary {
    pub per_source: BTreeMap<Source, SourceCounts>,
    pub failures: Vec<(String, String)>,
}

impl IngestSummary {
    pub fn totals(&self) -> SourceCounts {
        let mut total = SourceCounts::default();
        for counts in self.per_source.values() {
            total.clauses += counts.clauses;
            total.triples += counts.triples;
            total.nested += counts.nested;
        }
        total
    }

    pub fn markdown(&self) -> String {
        let mut out = String::new();
        out.push_str("| Data source | Clauses staged | Triples extracted | Nested triples |\n");
        out.push_str("|---|---|---|---|\n");
        for (source, counts) in &self.per_source {
            out.push_str(&format!(
                "| {} | {} | {} | {} |\n",
                source.as_str(),
                counts.clauses,
                counts.triples,
                counts.nested
            ));
        }
        let total = self.totals();
        out.push_str(&format!(
            "| Total | {} | {} | {} |\n",
            total.clauses, total.triples, total.nested
        ));
        if !self.failures.is_empty() {
            out.push_str(&format!("\n{} clause(s) failed:\n", self.failures.len()));
            for (id, message) in &self.failures {
                out.push_str(&format!("- {id}: {message}\n"));
            }
        }
        out
    }
}

/// Extracts every clause into `staging_dir` as `<id>.stage.ttls`.
/// Failures are per-clause; the batch continues.
pub fn ingest_corpus(
    clauses: &[Clause],
    staging_dir: &Path,
    onto: &OntologyModel,
    gateway: &Gateway,
    model: &str,
) -> Result<IngestSummary, StagingError> {
    let mut summary = IngestSummary::default();
    for clause in clauses {
        match extract_clause(clause, onto, gateway, model) {
            Ok(staged) => {
                let path = staging_dir.join(format!("{}.stage.ttls", clause.id));
                write_staging(&staged, &path)?;
                let counts = summary.per_source.entry(clause.source).or_default();
                counts.clauses += 1;
                counts.triples += staged.graph.triples.len() + staged.graph.types.len();
                counts.nested += staged.graph.nested_count();
            }
            Err(e) => summary.failures.push((clause.id.clone(), e.to_string())),
        }
    }
    Ok(summary)
}
