//! Lexicon + suffix part-of-speech tagger and a determiner-adjective-noun
//! chunker.

use std::collections::HashMap;

use serde::{Deserialize, Serialize};

use crate::docmodel::Token;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum Tag {
    Det,
    Adj,
    Noun,
    Verb,
    Adv,
    Prep,
    Pron,
    Conj,
    Num,
    Punct,
}

const DETERMINERS: &[&str] = &[
    "the", "a", "an", "this", "that", "these", "those", "our", "their", "its", "his", "her", "my",
    "your", "each", "every", "some", "any", "all", "no", "another", "both", "either", "neither",
    "such",
];
const PRONOUNS: &[&str] = &[
    "we", "i", "you", "he", "she", "it", "they", "them", "us", "me", "him", "which", "who", "whom",
    "whose", "what", "there", "here", "one",
];
const PREPOSITIONS: &[&str] = &[
    "of", "in", "on", "at", "by", "for", "with", "from", "to", "into", "onto", "over", "under",
    "between", "among", "through", "during", "without", "within", "about", "against", "across",
    "after", "before", "behind", "below", "above", "beyond", "than", "via", "per", "upon",
    "toward", "towards", "as", "like",
];
const CONJUNCTIONS: &[&str] = &[
    "and", "or", "but", "nor", "yet", "so", "while", "whereas", "if", "because", "although",
    "though", "since", "unless", "whether",
];
const VERBS: &[&str] = &[
    "is", "are", "was", "were", "be", "been", "being", "am", "has", "have", "had", "do", "does",
    "did", "can", "could", "will", "would", "may", "might", "shall", "should", "must", "use",
    "uses", "make", "makes", "show", "shows", "shown", "propose", "proposes", "present",
    "presents", "predict", "predicts", "run", "runs", "take", "takes", "give", "gives", "given",
    "obtain", "obtains", "achieve", "achieves", "improve", "improves", "outperform",
    "outperforms", "compute", "computes", "generate", "generates", "learn", "learns", "train",
    "trains", "select", "selects", "apply", "applies", "measure", "measures", "extract",
    "extracts", "rank", "ranks", "encode", "encodes", "produce", "produces", "compare",
    "compares", "contain", "contains", "include", "includes", "provide", "provides", "require",
    "requires", "allow", "allows", "help", "helps", "find", "finds", "found", "see", "seen",
    "get", "gets", "build", "builds", "combine", "combines", "describe", "describes", "become",
    "becomes", "remain", "remains", "reach", "reaches", "yield", "yields", "reduce", "reduces",
    "increase", "increases", "depend", "depends", "consist", "consists", "capture", "captures",
];
const ADVERBS: &[&str] = &[
    "not", "very", "also", "only", "however", "thus", "therefore", "often", "usually", "then",
    "well", "more", "most", "less", "further", "still", "already", "again", "even", "much",
];
const ADJECTIVES: &[&str] = &[
    "new", "large", "small", "high", "low", "good", "best", "better", "different", "several",
    "many", "few", "other", "same", "main", "important", "key", "novel", "simple", "complex",
    "recent", "standard", "previous", "final", "similar", "significant", "efficient", "deep",
    "long", "short", "related", "human", "automatic", "salient", "first", "second", "last",
    "next", "whole", "entire", "hierarchical", "top", "extractive", "abstractive",
];
const ADJ_SUFFIXES: &[&str] = &["al", "ive", "ous", "ful", "able", "ible", "ic", "less"];

/// Rule-based tagger: exact lexicon entries first, then suffix heuristics,
/// defaulting to noun.
#[derive(Debug, Clone)]
pub struct Tagger {
    lexicon: HashMap<String, Tag>,
}

impl Default for Tagger {
    fn default() -> Self {
        let mut lexicon = HashMap::new();
        for (words, tag) in [
            (DETERMINERS, Tag::Det),
            (PRONOUNS, Tag::Pron),
            (PREPOSITIONS, Tag::Prep),
            (CONJUNCTIONS, Tag::Conj),
            (VERBS, Tag::Verb),
            (ADVERBS, Tag::Adv),
            (ADJECTIVES, Tag::Adj),
        ] {
            for w in words {
                lexicon.insert((*w).to_string(), tag);
            }
        }
        Tagger { lexicon }
    }
}

impl Tagger {
    /// Adds or overrides lexicon entries.
    pub fn with_entries<'a>(mut self, entries: impl IntoIterator<Item = (&'a str, Tag)>) -> Self {
        for (word, tag) in entries {
            self.lexicon.insert(word.to_lowercase(), tag);
        }
        self
    }

    pub fn tag(&self, tokens: &[Token]) -> Vec<Tag> {
        let mut tags: Vec<Tag> = Vec::with_capacity(tokens.len());
        for token in tokens {
            let prev = tags.last().copied();
            tags.push(self.tag_one(token.as_str(), prev));
        }
        tags
    }

    fn tag_one(&self, word: &str, prev: Option<Tag>) -> Tag {
        if let Some(&tag) = self.lexicon.get(word) {
            return tag;
        }
        if !word.chars().any(char::is_alphanumeric) {
            return Tag::Punct;
        }
        if word.chars().all(|c| c.is_ascii_digit()) {
            return Tag::Num;
        }
        let long = word.chars().count() > 4;
        if long && word.ends_with("ly") {
            return Tag::Adv;
        }
        if long && (word.ends_with("ing") || word.ends_with("ed")) {
            // participles modifying a following noun
            return if matches!(prev, Some(Tag::Det | Tag::Adj)) {
                Tag::Adj
            } else {
                Tag::Verb
            };
        }
        if long && ADJ_SUFFIXES.iter().any(|s| word.ends_with(s)) {
            return Tag::Adj;
        }
        Tag::Noun
    }
}

/// Maximal, non-overlapping `Det? Adj* Noun+` spans scanned left to right,
/// as half-open token ranges.
pub fn chunk_spans(tags: &[Tag]) -> Vec<(usize, usize)> {
    let mut spans = Vec::new();
    let mut i = 0;
    while i < tags.len() {
        let mut j = i;
        if tags[j] == Tag::Det {
            j += 1;
        }
        while j < tags.len() && tags[j] == Tag::Adj {
            j += 1;
        }
        let noun_start = j;
        while j < tags.len() && tags[j] == Tag::Noun {
            j += 1;
        }
        if j > noun_start {
            spans.push((i, j));
            i = j;
        } else {
            i += 1;
        }
    }
    spans
}
