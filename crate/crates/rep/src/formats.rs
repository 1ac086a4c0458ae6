//! On-disk formats: pattern and lexicon tables, matcher blobs, model text,
//! corpora, and the TOML script and persona documents.

use std::fmt::Write as _;
use std::fs;
use std::path::{Path, PathBuf};

use rep_core::dialogue::ScriptDocument;
use rep_core::pattern::blob;
use rep_core::pattern::{CompiledMatcher, PatternError, PatternSource};
use rep_core::persona::Persona;
use rep_core::personality::{
    EvidenceEntry, EvidenceLexicon, EvidenceVector, ItemParams, TraitError, TraitModel, TrainingCorpus, TRAITS,
};
use serde::{Deserialize, Serialize};

pub const MODEL_HEADER: &str = "rep-trait-model 1";
pub const CORPUS_FORMAT: &str = "rep-corpus/1";

#[derive(Debug, thiserror::Error)]
pub enum FormatError {
    #[error("{path}: {source}")]
    Io { path: PathBuf, source: std::io::Error },
    #[error("{what} line {line}: {message}")]
    Line { what: &'static str, line: usize, message: String },
    #[error("{what}: {message}")]
    Document { what: &'static str, message: String },
    #[error(transparent)]
    Pattern(#[from] PatternError),
    #[error(transparent)]
    Trait(#[from] TraitError),
}

fn line_err(what: &'static str, line: usize, message: impl Into<String>) -> FormatError {
    FormatError::Line { what, line, message: message.into() }
}

pub fn read_text(path: &Path) -> Result<String, FormatError> {
    fs::read_to_string(path).map_err(|source| FormatError::Io { path: path.into(), source })
}

pub fn write_file(path: &Path, bytes: impl AsRef<[u8]>) -> Result<(), FormatError> {
    fs::write(path, bytes).map_err(|source| FormatError::Io { path: path.into(), source })
}

/// Non-empty, non-comment lines with their 1-based numbers.
fn table_lines(text: &str) -> impl Iterator<Item = (usize, &str)> {
    text.lines()
        .enumerate()
        .map(|(i, l)| (i + 1, l.trim_end_matches('\r')))
        .filter(|(_, l)| !l.trim().is_empty() && !l.starts_with('#'))
}

/// `<pattern_id>\t<dsl>` per line.
pub fn parse_patterns(text: &str) -> Result<Vec<PatternSource>, FormatError> {
    table_lines(text)
        .map(|(n, l)| {
            let (id, dsl) = l.split_once('\t').ok_or_else(|| line_err("patterns", n, "expected <id>\\t<pattern>"))?;
            if id.is_empty() {
                return Err(line_err("patterns", n, "empty pattern id"));
            }
            Ok(PatternSource::new(id, dsl))
        })
        .collect()
}

pub fn format_patterns(patterns: &[PatternSource]) -> String {
    let mut out = String::new();
    for p in patterns {
        let _ = writeln!(out, "{}\t{}", p.pattern_id, p.text);
    }
    out
}

pub fn read_blob(path: &Path) -> Result<CompiledMatcher, FormatError> {
    let bytes = fs::read(path).map_err(|source| FormatError::Io { path: path.into(), source })?;
    Ok(blob::from_bytes(&bytes)?)
}

pub fn write_blob(path: &Path, m: &CompiledMatcher) -> Result<(), FormatError> {
    write_file(path, blob::to_bytes(m))
}

/// `evidence_id\ttrait_id\tpattern_id\tcue` per line.
pub fn parse_lexicon(text: &str) -> Result<EvidenceLexicon, FormatError> {
    let entries = table_lines(text)
        .map(|(n, l)| {
            let f: Vec<&str> = l.splitn(4, '\t').collect();
            let [evidence_id, trait_id, pattern_id, cue] = f[..] else {
                return Err(line_err("lexicon", n, "expected 4 tab-separated fields"));
            };
            Ok(EvidenceEntry {
                evidence_id: evidence_id.into(),
                trait_id: trait_id.into(),
                pattern_id: pattern_id.into(),
                cue: cue.into(),
            })
        })
        .collect::<Result<Vec<_>, _>>()?;
    Ok(EvidenceLexicon::new(entries)?)
}

pub fn format_lexicon(lexicon: &EvidenceLexicon) -> String {
    let mut out = String::from("# evidence_id\ttrait_id\tpattern_id\tcue\n");
    for e in lexicon.entries() {
        let _ = writeln!(out, "{}\t{}\t{}\t{}", e.evidence_id, e.trait_id, e.pattern_id, e.cue);
    }
    out
}

/// Line-oriented model text. Numbers carry 17 significant digits so the
/// document round-trips exactly.
pub fn format_model(model: &TraitModel) -> String {
    let mut out = format!("{MODEL_HEADER}\n");
    for id in &model.evidence_ids {
        let _ = writeln!(out, "evidence {id}");
    }
    for t in &model.traits {
        let _ = writeln!(out, "trait {}", t.trait_id);
        for p in &t.items {
            let _ = writeln!(
                out,
                "item {} {:.16e} {:.16e} {:.16e}",
                model.evidence_ids[p.item], p.mu, p.lambda, p.sigma2
            );
        }
    }
    out
}

pub fn parse_model(text: &str) -> Result<TraitModel, FormatError> {
    let mut lines = table_lines(text);
    match lines.next() {
        Some((_, MODEL_HEADER)) => {}
        Some((n, other)) => return Err(line_err("model", n, format!("expected `{MODEL_HEADER}`, found `{other}`"))),
        None => return Err(line_err("model", 1, "empty document")),
    }
    let mut model = TraitModel::empty(Vec::new());
    model.traits.clear();
    for (n, l) in lines {
        let mut f = l.split_whitespace();
        match f.next() {
            Some("evidence") => {
                if !model.traits.is_empty() {
                    return Err(line_err("model", n, "evidence after the first trait"));
                }
                let id = f.next().ok_or_else(|| line_err("model", n, "missing evidence id"))?;
                model.evidence_ids.push(id.into());
            }
            Some("trait") => {
                let id = f.next().ok_or_else(|| line_err("model", n, "missing trait id"))?;
                model.traits.push(rep_core::personality::TraitParams { trait_id: id.into(), items: Vec::new() });
            }
            Some("item") => {
                let t = model.traits.last_mut().ok_or_else(|| line_err("model", n, "item before any trait"))?;
                let id = f.next().ok_or_else(|| line_err("model", n, "missing evidence id"))?;
                let item = model
                    .evidence_ids
                    .iter()
                    .position(|e| e == id)
                    .ok_or_else(|| line_err("model", n, format!("unknown evidence `{id}`")))?;
                let mut num = || -> Result<f64, FormatError> {
                    let s = f.next().ok_or_else(|| line_err("model", n, "missing number"))?;
                    s.parse().map_err(|_| line_err("model", n, format!("bad number `{s}`")))
                };
                let (mu, lambda, sigma2) = (num()?, num()?, num()?);
                t.items.push(ItemParams { item, mu, lambda, sigma2 });
            }
            _ => return Err(line_err("model", n, format!("unknown record `{l}`"))),
        }
    }
    model.validate()?;
    Ok(model)
}

#[derive(Serialize, Deserialize)]
struct CorpusHeader {
    format: String,
    evidence_ids: Vec<String>,
}

#[derive(Serialize, Deserialize)]
struct CorpusUser {
    n_tokens: u32,
    counts: Vec<u32>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    theta: Option<Vec<f64>>,
}

/// JSON lines: a header naming the evidence items, then one user per line with
/// counts and, for synthetic data, the generating traits in catalog order.
pub fn format_corpus(evidence_ids: &[String], corpus: &TrainingCorpus) -> String {
    let header = CorpusHeader { format: CORPUS_FORMAT.into(), evidence_ids: evidence_ids.to_vec() };
    let mut out = serde_json::to_string(&header).unwrap();
    out.push('\n');
    for (i, u) in corpus.users.iter().enumerate() {
        let theta = corpus.theta.as_ref().map(|t| t[i].clone());
        let row = CorpusUser { n_tokens: u.n_tokens, counts: u.counts.clone(), theta };
        out.push_str(&serde_json::to_string(&row).unwrap());
        out.push('\n');
    }
    out
}

pub fn parse_corpus(text: &str) -> Result<(Vec<String>, TrainingCorpus), FormatError> {
    let mut lines = table_lines(text);
    let (_, first) = lines.next().ok_or_else(|| line_err("corpus", 1, "empty document"))?;
    let header: CorpusHeader = serde_json::from_str(first).map_err(|e| line_err("corpus", 1, e.to_string()))?;
    if header.format != CORPUS_FORMAT {
        return Err(line_err("corpus", 1, format!("unsupported format `{}`", header.format)));
    }
    let mut users = Vec::new();
    let mut thetas = Vec::new();
    for (n, l) in lines {
        let u: CorpusUser = serde_json::from_str(l).map_err(|e| line_err("corpus", n, e.to_string()))?;
        if u.counts.len() != header.evidence_ids.len() {
            return Err(line_err("corpus", n, "count vector length differs from the header"));
        }
        match u.theta {
            Some(t) if t.len() == TRAITS.len() => thetas.push(t),
            Some(_) => return Err(line_err("corpus", n, "theta must have one value per catalog trait")),
            None => {}
        }
        users.push(EvidenceVector::from_counts(u.counts, u.n_tokens));
    }
    let theta = (!thetas.is_empty() && thetas.len() == users.len()).then_some(thetas);
    Ok((header.evidence_ids, TrainingCorpus { users, theta }))
}

pub fn parse_script(text: &str) -> Result<ScriptDocument, FormatError> {
    toml::from_str(text).map_err(|e| FormatError::Document { what: "script", message: e.to_string() })
}

pub fn parse_persona(text: &str) -> Result<Persona, FormatError> {
    let p: Persona = toml::from_str(text).map_err(|e| FormatError::Document { what: "persona", message: e.to_string() })?;
    p.validate().map_err(|e| FormatError::Document { what: "persona", message: e.to_string() })?;
    Ok(p)
}
