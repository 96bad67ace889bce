//! Two-level slide assembly: noun phrases as first-level bullets over the
//! selected sentences, section headings as titles, at most four sentences
//! per slide.

mod render;
mod tagger;

use std::collections::{BTreeMap, BTreeSet, HashSet};

use serde::{Deserialize, Serialize};

use crate::docmodel::{Document, Sentence, Token};
use crate::error::{Error, Result};

pub use render::{parse_deck_json, render, RenderFormat};
pub use tagger::{chunk_spans, Tag, Tagger};

pub const MIN_PHRASE_WORDS: usize = 2;
pub const MAX_PHRASE_WORDS: usize = 10;
/// Phrases found in more documents than this are dropped.
pub const MAX_DOCUMENT_FREQUENCY: usize = 10;
pub const MAX_TITLE_TOKENS: usize = 5;
pub const MAX_SENTENCES_PER_SLIDE: usize = 4;

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct NounPhrase {
    pub tokens: Vec<Token>,
    pub word_len: usize,
    /// Position of the sentence the phrase came from.
    pub source_sentence: usize,
}

impl NounPhrase {
    pub fn new(tokens: Vec<Token>, source_sentence: usize) -> Self {
        let word_len = tokens.iter().filter(|t| t.is_word()).count();
        NounPhrase {
            tokens,
            word_len,
            source_sentence,
        }
    }

    /// Space-joined tokens; also the document-frequency key.
    pub fn text(&self) -> String {
        crate::docmodel::join_tokens(&self.tokens)
    }
}

/// Phrase text → number of documents containing it.
pub type DfIndex = BTreeMap<String, usize>;

pub fn extract_noun_phrases(sentence: &Sentence, tagger: &Tagger) -> Vec<NounPhrase> {
    let tags = tagger.tag(&sentence.tokens);
    chunk_spans(&tags)
        .into_iter()
        .map(|(start, end)| NounPhrase::new(sentence.tokens[start..end].to_vec(), sentence.position))
        .collect()
}

fn keep_phrase(phrase: &NounPhrase, df_index: Option<&DfIndex>) -> bool {
    if !(MIN_PHRASE_WORDS..=MAX_PHRASE_WORDS).contains(&phrase.word_len) {
        return false;
    }
    match df_index {
        Some(index) => index.get(&phrase.text()).copied().unwrap_or(0) <= MAX_DOCUMENT_FREQUENCY,
        None => true,
    }
}

/// Drops phrases outside 2–10 words or above the document-frequency cap,
/// and repeats of an already kept token sequence. Order is preserved.
pub fn filter_phrases(phrases: Vec<NounPhrase>, df_index: Option<&DfIndex>) -> Vec<NounPhrase> {
    let mut seen = HashSet::new();
    filter_with_seen(phrases, df_index, &mut seen)
}

fn filter_with_seen(
    phrases: Vec<NounPhrase>,
    df_index: Option<&DfIndex>,
    seen: &mut HashSet<Vec<Token>>,
) -> Vec<NounPhrase> {
    phrases
        .into_iter()
        .filter(|p| keep_phrase(p, df_index))
        .filter(|p| seen.insert(p.tokens.clone()))
        .collect()
}

/// Counts, per phrase, the documents in which it occurs.
pub fn build_df_index(docs: &[Document], tagger: &Tagger) -> DfIndex {
    let mut index = DfIndex::new();
    for doc in docs {
        let phrases: BTreeSet<String> = doc
            .sentences()
            .flat_map(|s| extract_noun_phrases(s, tagger))
            .map(|p| p.text())
            .collect();
        for phrase in phrases {
            *index.entry(phrase).or_insert(0) += 1;
        }
    }
    index
}

fn truncate_words(text: &str, limit: usize) -> String {
    text.split_whitespace().take(limit).collect::<Vec<_>>().join(" ")
}

/// Heading of the sentence's section cut to five tokens; the document
/// title stands in for an empty heading.
pub fn slide_title(first_sentence: &Sentence, doc: &Document) -> Result<String> {
    let section = doc
        .section_index_of(first_sentence.position)
        .map(|i| &doc.sections[i])
        .ok_or_else(|| {
            Error::MalformedInput(format!(
                "sentence {} is not part of `{}`",
                first_sentence.position, doc.id
            ))
        })?;
    let heading = if section.heading.trim().is_empty() {
        &doc.title
    } else {
        &section.heading
    };
    Ok(truncate_words(heading, MAX_TITLE_TOKENS))
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SlideItem {
    /// First-level bullets.
    pub phrases: Vec<NounPhrase>,
    /// Second-level bullet.
    pub sentence: Sentence,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Slide {
    pub title: String,
    pub items: Vec<SlideItem>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SlideDeck {
    pub doc_id: String,
    pub slides: Vec<Slide>,
}

/// Sizes of ⌈g/4⌉ chunks as even as possible, larger chunks first.
pub fn split_sizes(group: usize) -> Vec<usize> {
    if group == 0 {
        return Vec::new();
    }
    let count = group.div_ceil(MAX_SENTENCES_PER_SLIDE);
    let (base, extra) = (group / count, group % count);
    (0..count).map(|i| base + usize::from(i < extra)).collect()
}

/// Groups consecutive selected sentences of the same section and splits
/// each group into slides of at most four sentences.
pub fn build_deck(
    selected: &[&Sentence],
    doc: &Document,
    df_index: Option<&DfIndex>,
    tagger: &Tagger,
) -> Result<SlideDeck> {
    for pair in selected.windows(2) {
        if pair[0].position >= pair[1].position {
            return Err(Error::MalformedInput(
                "selected sentences must be in document order".into(),
            ));
        }
    }
    let mut groups: Vec<Vec<&Sentence>> = Vec::new();
    let mut current_section = None;
    for &sentence in selected {
        let section = doc.section_index_of(sentence.position).ok_or_else(|| {
            Error::MalformedInput(format!("sentence {} is not part of `{}`", sentence.position, doc.id))
        })?;
        if current_section != Some(section) {
            groups.push(Vec::new());
            current_section = Some(section);
        }
        groups.last_mut().expect("group pushed").push(sentence);
    }

    let mut slides = Vec::new();
    for group in groups {
        let mut rest = group.as_slice();
        for size in split_sizes(group.len()) {
            let (chunk, tail) = rest.split_at(size);
            rest = tail;
            let mut seen = HashSet::new();
            let items = chunk
                .iter()
                .map(|&sentence| SlideItem {
                    phrases: filter_with_seen(extract_noun_phrases(sentence, tagger), df_index, &mut seen),
                    sentence: sentence.clone(),
                })
                .collect();
            slides.push(Slide {
                title: slide_title(chunk[0], doc)?,
                items,
            });
        }
    }
    Ok(SlideDeck {
        doc_id: doc.id.clone(),
        slides,
    })
}

/// Structural checks on a deck; returns every violation found.
pub fn check_deck(deck: &SlideDeck) -> Vec<String> {
    let mut problems = Vec::new();
    let mut last_first = None;
    for (i, slide) in deck.slides.iter().enumerate() {
        if slide.items.is_empty() {
            problems.push(format!("slide {i} is empty"));
        }
        if slide.items.len() > MAX_SENTENCES_PER_SLIDE {
            problems.push(format!("slide {i} has {} sentences", slide.items.len()));
        }
        let title_tokens = slide.title.split_whitespace().count();
        if title_tokens > MAX_TITLE_TOKENS {
            problems.push(format!("slide {i} title has {title_tokens} tokens"));
        }
        for item in &slide.items {
            for phrase in &item.phrases {
                if !(MIN_PHRASE_WORDS..=MAX_PHRASE_WORDS).contains(&phrase.word_len) {
                    problems.push(format!("slide {i} phrase `{}` has {} words", phrase.text(), phrase.word_len));
                }
            }
        }
        if let Some(first) = slide.items.first().map(|it| it.sentence.position) {
            if last_first.is_some_and(|prev| prev >= first) {
                problems.push(format!("slide {i} is out of document order"));
            }
            last_first = Some(first);
        }
    }
    problems
}
