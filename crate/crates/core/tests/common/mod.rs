#![allow(dead_code)]

use std::path::PathBuf;

use deckgen::docmodel::{Document, ReferenceSlides, SentenceDraft, Token};
use deckgen::ingest::{load_corpus, CorpusPair};
use rand::seq::SliceRandom;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

pub fn fixture_dir() -> PathBuf {
    PathBuf::from(env!("CARGO_MANIFEST_DIR")).join("fixtures")
}

pub fn fixture_corpus() -> Vec<CorpusPair> {
    let root = fixture_dir().join("corpus");
    load_corpus(&root.join("docs"), Some(&root.join("slides"))).unwrap()
}

/// A document with disjoint per-sentence vocabularies and slides that copy
/// a known subset of its sentences verbatim.
pub struct PlantedDoc {
    pub pair: CorpusPair,
    pub planted: Vec<usize>,
}

fn word(doc: usize, sent: usize, tok: usize) -> String {
    format!("w{doc}x{sent}x{tok}")
}

pub fn planted_doc(rng: &mut ChaCha8Rng, index: usize, n: usize) -> PlantedDoc {
    let drafts: Vec<SentenceDraft> = (0..n)
        .map(|s| {
            let len = rng.gen_range(3..9);
            let tokens = (0..len).map(|t| Token::new(&word(index, s, t)).unwrap()).collect();
            SentenceDraft::from_tokens(tokens)
        })
        .collect();
    let k = rng.gen_range(1..=n.min(5));
    let mut planted: Vec<usize> = (0..n).collect::<Vec<_>>().choose_multiple(rng, k).copied().collect();
    planted.sort_unstable();
    let doc = Document::build(format!("planted-{index}"), "Planted", vec![("Body".into(), drafts)]).unwrap();
    let lines = planted
        .iter()
        .map(|&p| doc.sentence(p).unwrap().text.clone())
        .collect();
    let slides = ReferenceSlides::new(doc.id.clone(), vec![lines]);
    PlantedDoc {
        pair: CorpusPair { doc, slides },
        planted,
    }
}

const TOPIC: &[&str] = &[
    "ranking", "slides", "summary", "sentence", "encoder", "attention", "window", "oracle", "budget",
    "knapsack", "bullet", "phrase",
];
const FILLER: &[&str] = &[
    "the", "of", "and", "we", "this", "in", "that", "for", "with", "it", "is", "a", "on", "as",
    "related", "prior", "appendix", "thanks", "grant", "footnote", "reviewers", "copyright",
];

/// Ten synthetic documents whose slides are verbatim copies of some
/// sentences; copied sentences draw on a topical vocabulary.
pub fn overfit_corpus(seed: u64) -> Vec<CorpusPair> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    (0..10)
        .map(|d| {
            let n = rng.gen_range(8..14);
            let mut key: Vec<usize> = (0..n).collect();
            key.shuffle(&mut rng);
            key.truncate(3);
            let drafts: Vec<SentenceDraft> = (0..n)
                .map(|s| {
                    let len = rng.gen_range(4..9);
                    let pool = if key.contains(&s) { TOPIC } else { FILLER };
                    let tokens = (0..len)
                        .map(|_| Token::new(pool.choose(&mut rng).unwrap()).unwrap())
                        .collect();
                    SentenceDraft::from_tokens(tokens)
                })
                .collect();
            let doc = Document::build(format!("synthetic-{d:02}"), "Synthetic", vec![("Body".into(), drafts)]).unwrap();
            let lines = key.iter().map(|&k| doc.sentence(k).unwrap().text.clone()).collect();
            let slides = ReferenceSlides::new(doc.id.clone(), vec![lines]);
            CorpusPair { doc, slides }
        })
        .collect()
}
