use std::collections::HashMap;
use std::fs;
use std::path::{Path, PathBuf};

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use super::text::split_sentences;
use crate::docmodel::{Document, ReferenceSlides, SentenceDraft, Token};
use crate::error::{Error, Result};

#[derive(Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
struct DocumentJson {
    id: String,
    #[serde(default)]
    title: String,
    sections: Vec<SectionJson>,
}

#[derive(Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
struct SectionJson {
    heading: String,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    text: Option<String>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    sentences: Option<Vec<SentenceJson>>,
}

#[derive(Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
struct SentenceJson {
    tokens: Vec<Token>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    text: Option<String>,
}

#[derive(Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
struct SlidesJson {
    #[serde(default)]
    id: String,
    pages: Vec<Vec<String>>,
}

/// Parses the JSON document format. Sections carry either raw `text`
/// (split and tokenized here) or pre-tokenized `sentences`, never both.
pub fn parse_document(bytes: &[u8]) -> Result<Document> {
    let raw: DocumentJson = serde_json::from_slice(bytes)?;
    let mut sections = Vec::with_capacity(raw.sections.len());
    for (idx, section) in raw.sections.into_iter().enumerate() {
        let drafts = match (section.text, section.sentences) {
            (Some(text), None) => split_sentences(&text)
                .iter()
                .map(|s| SentenceDraft::from_text(s))
                .filter(|d| !d.tokens.is_empty())
                .collect(),
            (None, Some(sentences)) => sentences
                .into_iter()
                .map(|s| {
                    let mut draft = SentenceDraft::from_tokens(s.tokens);
                    if let Some(text) = s.text {
                        draft.text = text;
                    }
                    draft
                })
                .collect(),
            _ => {
                return Err(Error::MalformedInput(format!(
                    "section {idx} of `{}` must have exactly one of `text` or `sentences`",
                    raw.id
                )))
            }
        };
        sections.push((section.heading, drafts));
    }
    Document::build(raw.id, raw.title, sections)
}

/// Writes a document in the pre-tokenized form of the JSON format.
pub fn serialize_document(doc: &Document) -> Result<Vec<u8>> {
    let raw = DocumentJson {
        id: doc.id.clone(),
        title: doc.title.clone(),
        sections: doc
            .sections
            .iter()
            .map(|section| SectionJson {
                heading: section.heading.clone(),
                text: None,
                sentences: Some(
                    section
                        .sentences
                        .iter()
                        .map(|s| SentenceJson {
                            tokens: s.tokens.clone(),
                            text: Some(s.text.clone()),
                        })
                        .collect(),
                ),
            })
            .collect(),
    };
    Ok(serde_json::to_vec_pretty(&raw)?)
}

pub fn parse_slides(bytes: &[u8]) -> Result<ReferenceSlides> {
    let raw: SlidesJson = serde_json::from_slice(bytes)?;
    Ok(ReferenceSlides::new(raw.id, raw.pages))
}

pub fn serialize_slides(slides: &ReferenceSlides) -> Result<Vec<u8>> {
    let raw = SlidesJson {
        id: slides.id.clone(),
        pages: slides.pages.clone(),
    };
    Ok(serde_json::to_vec_pretty(&raw)?)
}

pub fn read_document(path: impl AsRef<Path>) -> Result<Document> {
    let path = path.as_ref();
    let bytes = fs::read(path)?;
    parse_document(&bytes).map_err(|e| with_path(e, path))
}

/// Reads slides; an empty id is replaced by the file stem.
pub fn read_slides(path: impl AsRef<Path>) -> Result<ReferenceSlides> {
    let path = path.as_ref();
    let bytes = fs::read(path)?;
    let mut slides = parse_slides(&bytes).map_err(|e| with_path(e, path))?;
    if slides.id.is_empty() {
        slides.id = file_stem(path);
    }
    Ok(slides)
}

fn with_path(err: Error, path: &Path) -> Error {
    match err {
        Error::MalformedInput(msg) => Error::MalformedInput(format!("{}: {msg}", path.display())),
        other => other,
    }
}

fn file_stem(path: &Path) -> String {
    path.file_stem()
        .map(|s| s.to_string_lossy().into_owned())
        .unwrap_or_default()
}

fn json_files(dir: &Path) -> Result<Vec<PathBuf>> {
    let mut files: Vec<PathBuf> = fs::read_dir(dir)?
        .filter_map(|entry| entry.ok().map(|e| e.path()))
        .filter(|p| p.extension().is_some_and(|e| e == "json"))
        .collect();
    files.sort();
    Ok(files)
}

/// A document paired with its reference slides.
#[derive(Debug, Clone)]
pub struct CorpusPair {
    pub doc: Document,
    pub slides: ReferenceSlides,
}

/// Loads every `*.json` document in `docs_dir`, and when `slides_dir` is
/// given pairs each with the slides of the same id. Sorted by document id.
pub fn load_corpus(docs_dir: &Path, slides_dir: Option<&Path>) -> Result<Vec<CorpusPair>> {
    let docs: Vec<Document> = json_files(docs_dir)?
        .par_iter()
        .map(read_document)
        .collect::<Result<_>>()?;
    let mut slides_by_id: HashMap<String, ReferenceSlides> = HashMap::new();
    if let Some(dir) = slides_dir {
        let all: Vec<ReferenceSlides> = json_files(dir)?
            .par_iter()
            .map(read_slides)
            .collect::<Result<_>>()?;
        for s in all {
            slides_by_id.insert(s.id.clone(), s);
        }
    }
    let mut pairs = Vec::with_capacity(docs.len());
    for doc in docs {
        let slides = match slides_dir {
            Some(_) => slides_by_id.remove(&doc.id).ok_or_else(|| {
                Error::MalformedInput(format!("no slides found for document `{}`", doc.id))
            })?,
            None => ReferenceSlides::new(doc.id.clone(), vec![]),
        };
        pairs.push(CorpusPair { doc, slides });
    }
    pairs.sort_by(|a, b| a.doc.id.cmp(&b.doc.id));
    for w in pairs.windows(2) {
        if w[0].doc.id == w[1].doc.id {
            return Err(Error::MalformedInput(format!(
                "duplicate document id `{}`",
                w[0].doc.id
            )));
        }
    }
    Ok(pairs)
}
