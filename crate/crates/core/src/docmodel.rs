//! Domain types shared by every stage: tokens, sentences, sections,
//! documents, reference slides and the per-sentence label/score vectors.

use std::fmt;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::ingest::tokenize;

/// A lowercased, whitespace-free, non-empty token.
#[derive(Debug, Clone, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(try_from = "String", into = "String")]
pub struct Token(String);

impl Token {
    /// Normalizes `text` to lowercase and validates it.
    pub fn new(text: &str) -> Result<Self> {
        if text.is_empty() {
            return Err(Error::MalformedInput("empty token".into()));
        }
        if text.chars().any(char::is_whitespace) {
            return Err(Error::MalformedInput(format!(
                "token {text:?} contains whitespace"
            )));
        }
        Ok(Token(text.to_lowercase()))
    }

    pub(crate) fn from_normalized(text: String) -> Self {
        debug_assert!(!text.is_empty() && !text.chars().any(char::is_whitespace));
        Token(text)
    }

    pub fn as_str(&self) -> &str {
        &self.0
    }

    /// A token counts as a word unless it consists solely of punctuation.
    pub fn is_word(&self) -> bool {
        self.0.chars().any(char::is_alphanumeric)
    }
}

impl TryFrom<String> for Token {
    type Error = Error;

    fn try_from(value: String) -> Result<Self> {
        Token::new(&value)
    }
}

impl From<Token> for String {
    fn from(token: Token) -> Self {
        token.0
    }
}

impl fmt::Display for Token {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&self.0)
    }
}

/// Shorthand used heavily in tests and fixtures.
pub fn tokens(words: &[&str]) -> Vec<Token> {
    words
        .iter()
        .map(|w| Token::new(w).expect("valid token"))
        .collect()
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Sentence {
    /// Surface text used when rendering the sentence as a bullet.
    pub text: String,
    pub tokens: Vec<Token>,
    /// Global 0-based index in the document's flattened sentence list.
    pub position: usize,
    /// Number of tokens that are not pure punctuation.
    pub length_words: usize,
}

impl Sentence {
    fn new(text: String, tokens: Vec<Token>, position: usize) -> Self {
        let length_words = tokens.iter().filter(|t| t.is_word()).count();
        Sentence {
            text,
            tokens,
            position,
            length_words,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Section {
    pub heading: String,
    pub sentences: Vec<Sentence>,
}

/// Raw sentence content before positions are assigned.
#[derive(Debug, Clone)]
pub struct SentenceDraft {
    pub text: String,
    pub tokens: Vec<Token>,
}

impl SentenceDraft {
    pub fn from_text(text: &str) -> Self {
        SentenceDraft {
            text: text.trim().to_string(),
            tokens: tokenize(text),
        }
    }

    pub fn from_tokens(tokens: Vec<Token>) -> Self {
        let text = join_tokens(&tokens);
        SentenceDraft { text, tokens }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Document {
    pub id: String,
    pub title: String,
    pub sections: Vec<Section>,
}

impl Document {
    /// Assembles a document, assigning global sentence positions in section
    /// order. Fails with `EmptyDocument` when no section holds a sentence.
    pub fn build(
        id: impl Into<String>,
        title: impl Into<String>,
        sections: Vec<(String, Vec<SentenceDraft>)>,
    ) -> Result<Self> {
        let id = id.into();
        let mut position = 0;
        let mut built = Vec::with_capacity(sections.len());
        for (idx, (heading, drafts)) in sections.into_iter().enumerate() {
            if idx > 0 && heading.trim().is_empty() {
                return Err(Error::MalformedInput(format!(
                    "section {idx} of `{id}` has an empty heading"
                )));
            }
            let mut sentences = Vec::with_capacity(drafts.len());
            for draft in drafts {
                if draft.tokens.is_empty() {
                    return Err(Error::MalformedInput(format!(
                        "sentence {position} of `{id}` has no tokens"
                    )));
                }
                sentences.push(Sentence::new(draft.text, draft.tokens, position));
                position += 1;
            }
            built.push(Section {
                heading,
                sentences,
            });
        }
        if position == 0 {
            return Err(Error::EmptyDocument(id));
        }
        Ok(Document {
            id,
            title: title.into(),
            sections: built,
        })
    }

    /// Total sentence count.
    pub fn n(&self) -> usize {
        self.sections.iter().map(|s| s.sentences.len()).sum()
    }

    /// Sentences in global position order.
    pub fn sentences(&self) -> impl Iterator<Item = &Sentence> + '_ {
        self.sections.iter().flat_map(|s| s.sentences.iter())
    }

    pub fn sentence(&self, position: usize) -> Option<&Sentence> {
        self.sentences().nth(position)
    }

    /// Index of the section holding the sentence at `position`.
    pub fn section_index_of(&self, position: usize) -> Option<usize> {
        let mut start = 0;
        for (idx, section) in self.sections.iter().enumerate() {
            let end = start + section.sentences.len();
            if position < end {
                return Some(idx);
            }
            start = end;
        }
        None
    }

    /// Checks that positions run 0..n-1 across sections.
    pub fn validate(&self) -> Result<()> {
        for (expected, sentence) in self.sentences().enumerate() {
            if sentence.position != expected {
                return Err(Error::MalformedInput(format!(
                    "sentence position {} found where {expected} was expected",
                    sentence.position
                )));
            }
            if sentence.tokens.is_empty() {
                return Err(Error::MalformedInput(format!(
                    "sentence {expected} has no tokens"
                )));
            }
        }
        Ok(())
    }
}

/// Σ length_words over all sentences.
pub fn word_count(doc: &Document) -> usize {
    doc.sentences().map(|s| s.length_words).sum()
}

/// Ground-truth slide text: pages of lines.
#[derive(Debug, Clone, PartialEq)]
pub struct ReferenceSlides {
    pub id: String,
    pub pages: Vec<Vec<String>>,
    pub flat_tokens: Vec<Token>,
}

impl ReferenceSlides {
    pub fn new(id: impl Into<String>, pages: Vec<Vec<String>>) -> Self {
        let flat_tokens = pages
            .iter()
            .flat_map(|page| page.iter())
            .flat_map(|line| tokenize(line))
            .collect();
        ReferenceSlides {
            id: id.into(),
            pages,
            flat_tokens,
        }
    }

    /// Each non-empty line as its own token sequence, for summary-level ROUGE-L.
    pub fn line_tokens(&self) -> Vec<Vec<Token>> {
        self.pages
            .iter()
            .flat_map(|page| page.iter())
            .map(|line| tokenize(line))
            .filter(|t| !t.is_empty())
            .collect()
    }
}

/// Tokenized lines concatenated in page order, then line order.
pub fn flatten_reference(slides: &ReferenceSlides) -> Vec<Token> {
    slides.flat_tokens.clone()
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(transparent)]
pub struct LabelVector(pub Vec<u8>);

impl LabelVector {
    pub fn zeros(n: usize) -> Self {
        LabelVector(vec![0; n])
    }

    pub fn len(&self) -> usize {
        self.0.len()
    }

    pub fn is_empty(&self) -> bool {
        self.0.is_empty()
    }

    pub fn positives(&self) -> impl Iterator<Item = usize> + '_ {
        self.0
            .iter()
            .enumerate()
            .filter(|(_, &y)| y == 1)
            .map(|(i, _)| i)
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(transparent)]
pub struct ScoreVector(pub Vec<f64>);

impl ScoreVector {
    /// Validates that every score lies in the closed unit interval.
    pub fn new(scores: Vec<f64>) -> Result<Self> {
        if let Some(bad) = scores.iter().find(|p| !(0.0..=1.0).contains(*p)) {
            return Err(Error::MalformedInput(format!("score {bad} outside [0, 1]")));
        }
        Ok(ScoreVector(scores))
    }

    pub fn len(&self) -> usize {
        self.0.len()
    }

    pub fn is_empty(&self) -> bool {
        self.0.is_empty()
    }
}

pub(crate) fn join_tokens(tokens: &[Token]) -> String {
    tokens
        .iter()
        .map(Token::as_str)
        .collect::<Vec<_>>()
        .join(" ")
}
