use std::collections::HashMap;

use serde::{Deserialize, Serialize};

use crate::docmodel::{Document, Token};

pub const PAD: usize = 0;
pub const UNK: usize = 1;
const PAD_STR: &str = "<pad>";
const UNK_STR: &str = "<unk>";

/// Token↔id mapping with PAD at 0 and UNK at 1.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(from = "Vec<String>", into = "Vec<String>")]
pub struct Vocab {
    ids: HashMap<String, usize>,
    tokens: Vec<String>,
}

impl Vocab {
    /// Builds a vocabulary from tokens in id order, after PAD and UNK.
    pub fn from_tokens<I, S>(tokens: I) -> Self
    where
        I: IntoIterator<Item = S>,
        S: Into<String>,
    {
        let mut vocab = Vocab {
            ids: HashMap::new(),
            tokens: vec![PAD_STR.to_string(), UNK_STR.to_string()],
        };
        for token in tokens {
            let token = token.into();
            if token == PAD_STR || token == UNK_STR || vocab.ids.contains_key(&token) {
                continue;
            }
            vocab.ids.insert(token.clone(), vocab.tokens.len());
            vocab.tokens.push(token);
        }
        vocab
    }

    pub fn len(&self) -> usize {
        self.tokens.len()
    }

    pub fn is_empty(&self) -> bool {
        false
    }

    pub fn id(&self, token: &str) -> usize {
        self.ids.get(token).copied().unwrap_or(UNK)
    }

    pub fn ids_of(&self, tokens: &[Token]) -> Vec<usize> {
        tokens.iter().map(|t| self.id(t.as_str())).collect()
    }

    pub fn token(&self, id: usize) -> Option<&str> {
        self.tokens.get(id).map(String::as_str)
    }

    /// Tokens in id order, including the reserved entries.
    pub fn tokens(&self) -> &[String] {
        &self.tokens
    }
}

impl From<Vec<String>> for Vocab {
    fn from(tokens: Vec<String>) -> Self {
        Vocab::from_tokens(tokens.into_iter().skip(2))
    }
}

impl From<Vocab> for Vec<String> {
    fn from(vocab: Vocab) -> Self {
        vocab.tokens
    }
}

/// Keeps tokens seen at least `min_count` times, ordered by descending
/// frequency then lexicographically.
pub fn build_vocab(corpus: &[Document], min_count: usize) -> Vocab {
    let min_count = min_count.max(1);
    let mut counts: HashMap<&str, usize> = HashMap::new();
    for doc in corpus {
        for sentence in doc.sentences() {
            for token in &sentence.tokens {
                *counts.entry(token.as_str()).or_default() += 1;
            }
        }
    }
    let mut kept: Vec<(&str, usize)> = counts
        .into_iter()
        .filter(|&(_, c)| c >= min_count)
        .collect();
    kept.sort_by(|a, b| b.1.cmp(&a.1).then_with(|| a.0.cmp(b.0)));
    Vocab::from_tokens(kept.into_iter().map(|(t, _)| t.to_string()))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::docmodel::{tokens, SentenceDraft};

    fn corpus(sentences: &[&[&str]]) -> Vec<Document> {
        let drafts = sentences
            .iter()
            .map(|s| SentenceDraft::from_tokens(tokens(s)))
            .collect();
        vec![Document::build("c", "", vec![("Intro".into(), drafts)]).unwrap()]
    }

    #[test]
    fn threshold_maps_rare_tokens_to_unk() {
        let docs = corpus(&[&["model"; 5]]);
        let vocab = build_vocab(&docs, 6);
        assert_eq!(vocab.id("model"), UNK);
        assert_eq!(build_vocab(&docs, 5).id("model"), 2);
    }

    #[test]
    fn ties_break_lexicographically() {
        let docs = corpus(&[&["zeta", "alpha", "beta", "beta"]]);
        let vocab = build_vocab(&docs, 1);
        assert_eq!(vocab.id("beta"), 2);
        assert_eq!(vocab.id("alpha"), 3);
        assert_eq!(vocab.id("zeta"), 4);
    }

    #[test]
    fn empty_corpus_has_only_reserved_ids() {
        let vocab = build_vocab(&[], 1);
        assert_eq!(vocab.len(), 2);
        assert_eq!(vocab.token(PAD), Some("<pad>"));
        assert_eq!(vocab.id("anything"), UNK);
    }

    #[test]
    fn serde_round_trip_preserves_ids() {
        let vocab = build_vocab(&corpus(&[&["b", "a", "a"]]), 1);
        let json = serde_json::to_string(&vocab).unwrap();
        let back: Vocab = serde_json::from_str(&json).unwrap();
        assert_eq!(back, vocab);
        assert_eq!(back.id("a"), 2);
    }

    #[test]
    fn ids_are_stable_across_builds() {
        let docs = corpus(&[&["x", "y", "z", "y", "x", "q"]]);
        assert_eq!(build_vocab(&docs, 1), build_vocab(&docs, 1));
    }
}
