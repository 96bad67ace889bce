//! Corpus splits, label caching, AUC and ROUGE evaluation.

use std::collections::{HashMap, HashSet};
use std::fs;
use std::io::Write as _;
use std::path::Path;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use super::config::SplitSpec;
use super::model::Model;
use crate::docmodel::{Document, LabelVector, ScoreVector};
use crate::error::{Error, Result};
use crate::ingest::{serialize_document, stable_hash, CorpusPair, TOKENIZER_VERSION};
use crate::labeler::{label_document, WindowConfig};
use crate::rouge::{mean_recall, summary_recall, SummaryRouge};
use crate::selector::{select_for_document, Selector};

/// Corpus indices per split.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Splits {
    pub train: Vec<usize>,
    pub validation: Vec<usize>,
    pub test: Vec<usize>,
}

/// Resolves a split specification against a corpus in id order.
pub fn split_corpus(corpus: &[CorpusPair], spec: &SplitSpec) -> Result<Splits> {
    let n = corpus.len();
    let splits = match spec {
        SplitSpec::AllTrain => Splits {
            train: (0..n).collect(),
            validation: vec![],
            test: vec![],
        },
        SplitSpec::Counts {
            train,
            validation,
            test,
        } => {
            if train + validation + test != n {
                return Err(Error::InvalidConfig(format!(
                    "split counts {train}+{validation}+{test} do not cover {n} documents"
                )));
            }
            Splits {
                train: (0..*train).collect(),
                validation: (*train..train + validation).collect(),
                test: (train + validation..n).collect(),
            }
        }
        SplitSpec::Ids {
            train,
            validation,
            test,
        } => {
            let index: HashMap<&str, usize> = corpus.iter().enumerate().map(|(i, p)| (p.doc.id.as_str(), i)).collect();
            let resolve = |ids: &[String]| -> Result<Vec<usize>> {
                ids.iter()
                    .map(|id| {
                        index
                            .get(id.as_str())
                            .copied()
                            .ok_or_else(|| Error::InvalidConfig(format!("split names unknown document `{id}`")))
                    })
                    .collect()
            };
            let splits = Splits {
                train: resolve(train)?,
                validation: resolve(validation)?,
                test: resolve(test)?,
            };
            let named = splits.train.len() + splits.validation.len() + splits.test.len();
            if named != n {
                return Err(Error::InvalidConfig(format!(
                    "split id lists name {named} documents, corpus has {n}"
                )));
            }
            splits
        }
    };
    let mut seen = HashSet::new();
    for &i in splits.train.iter().chain(&splits.validation).chain(&splits.test) {
        if !seen.insert(corpus[i].doc.id.as_str()) {
            return Err(Error::InvalidConfig(format!(
                "document `{}` appears in more than one split",
                corpus[i].doc.id
            )));
        }
    }
    Ok(splits)
}

/// Area under the ROC curve by rank statistics, ties counting one half.
/// `None` when either class is absent.
pub fn auc(scores: &[f64], labels: &[u8]) -> Option<f64> {
    assert_eq!(scores.len(), labels.len(), "scores and labels differ in length");
    let mut order: Vec<usize> = (0..scores.len()).collect();
    order.sort_by(|&a, &b| scores[a].total_cmp(&scores[b]));
    let positives = labels.iter().filter(|&&y| y == 1).count();
    let negatives = labels.len() - positives;
    if positives == 0 || negatives == 0 {
        return None;
    }
    let mut rank_sum = 0.0;
    let mut i = 0;
    while i < order.len() {
        let mut j = i;
        while j + 1 < order.len() && scores[order[j + 1]] == scores[order[i]] {
            j += 1;
        }
        let mid_rank = (i + j) as f64 / 2.0 + 1.0;
        rank_sum += mid_rank * order[i..=j].iter().filter(|&&k| labels[k] == 1).count() as f64;
        i = j + 1;
    }
    let p = positives as f64;
    Some((rank_sum - p * (p + 1.0) / 2.0) / (p * negatives as f64))
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
struct CacheEntry {
    id: String,
    w: usize,
    max_per_window: Option<usize>,
    tokenizer: String,
    content_hash: u64,
    labels: Vec<u8>,
}

/// Oracle labels persisted as JSON lines, keyed by document id, window
/// settings, tokenizer version and a hash of the document content.
type CacheKey = (String, usize, Option<usize>, String, u64);

#[derive(Debug, Default)]
pub struct LabelCache {
    entries: HashMap<CacheKey, Vec<u8>>,
    dirty: bool,
}

fn content_hash(doc: &Document) -> Result<u64> {
    let bytes = serialize_document(doc)?;
    Ok(stable_hash(&String::from_utf8_lossy(&bytes)))
}

impl LabelCache {
    /// Reads a cache file; a missing file gives an empty cache.
    pub fn open(path: &Path) -> Result<Self> {
        let mut cache = LabelCache::default();
        let text = match fs::read_to_string(path) {
            Ok(t) => t,
            Err(e) if e.kind() == std::io::ErrorKind::NotFound => return Ok(cache),
            Err(e) => return Err(e.into()),
        };
        for line in text.lines().filter(|l| !l.trim().is_empty()) {
            let e: CacheEntry = serde_json::from_str(line)?;
            cache
                .entries
                .insert((e.id, e.w, e.max_per_window, e.tokenizer, e.content_hash), e.labels);
        }
        Ok(cache)
    }

    /// Cached labels for every pair, computing (in parallel) those missing.
    pub fn labels_for(&mut self, corpus: &[CorpusPair], window: &WindowConfig) -> Result<Vec<LabelVector>> {
        let keys: Vec<_> = corpus
            .iter()
            .map(|p| {
                Ok((
                    p.doc.id.clone(),
                    window.w,
                    window.max_per_window,
                    TOKENIZER_VERSION.to_string(),
                    content_hash(&p.doc)?,
                ))
            })
            .collect::<Result<_>>()?;
        let computed: Vec<Option<LabelVector>> = corpus
            .par_iter()
            .zip(&keys)
            .map(|(pair, key)| {
                if self.entries.contains_key(key) {
                    Ok(None)
                } else {
                    Ok(Some(label_document(&pair.doc, &pair.slides, window)?.labels))
                }
            })
            .collect::<Result<_>>()?;
        let mut out = Vec::with_capacity(corpus.len());
        for (key, fresh) in keys.into_iter().zip(computed) {
            if let Some(labels) = fresh {
                self.entries.insert(key.clone(), labels.0);
                self.dirty = true;
            }
            out.push(LabelVector(self.entries[&key].clone()));
        }
        Ok(out)
    }

    /// Writes the cache if anything was added.
    pub fn save(&mut self, path: &Path) -> Result<()> {
        if !self.dirty {
            return Ok(());
        }
        let mut rows: Vec<CacheEntry> = self
            .entries
            .iter()
            .map(|((id, w, max_per_window, tokenizer, content_hash), labels)| CacheEntry {
                id: id.clone(),
                w: *w,
                max_per_window: *max_per_window,
                tokenizer: tokenizer.clone(),
                content_hash: *content_hash,
                labels: labels.clone(),
            })
            .collect();
        rows.sort_by(|a, b| (&a.id, a.w, a.max_per_window).cmp(&(&b.id, b.w, b.max_per_window)));
        let mut file = fs::File::create(path)?;
        for row in rows {
            writeln!(file, "{}", serde_json::to_string(&row)?)?;
        }
        self.dirty = false;
        Ok(())
    }
}

/// Pads truncated scores with zeros so every sentence has one.
pub fn pad_scores(scores: &ScoreVector, n: usize) -> ScoreVector {
    let mut padded = scores.0.clone();
    padded.resize(n.max(padded.len()), 0.0);
    ScoreVector(padded)
}

/// Uniform random scores, seeded per document.
pub fn random_scores(doc: &Document, seed: u64) -> ScoreVector {
    let mut rng = ChaCha8Rng::seed_from_u64(seed ^ stable_hash(&doc.id));
    ScoreVector((0..doc.n()).map(|_| rng.gen::<f64>()).collect())
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct DocRouge {
    pub id: String,
    pub rouge: SummaryRouge,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct EvalReport {
    pub per_doc: Vec<DocRouge>,
    pub mean: SummaryRouge,
}

/// ROUGE recall of the selected sentences for one document.
pub fn selection_rouge(pair: &CorpusPair, scores: &ScoreVector, selector: &dyn Selector, fraction: f64) -> Result<SummaryRouge> {
    let scores = pad_scores(scores, pair.doc.n());
    let decision = select_for_document(&pair.doc, &scores, selector, fraction)?;
    let summary: Vec<_> = pair
        .doc
        .sentences()
        .zip(&decision)
        .filter(|(_, &x)| x == 1)
        .map(|(s, _)| s.tokens.clone())
        .collect();
    Ok(summary_recall(&summary, &pair.slides))
}

/// Selection ROUGE for externally supplied scores, one vector per pair.
pub fn evaluate_scores(
    corpus: &[CorpusPair],
    scores: &[ScoreVector],
    selector: &dyn Selector,
    fraction: f64,
) -> Result<EvalReport> {
    if corpus.len() != scores.len() {
        return Err(Error::LengthMismatch {
            left: corpus.len(),
            right: scores.len(),
        });
    }
    let per_doc: Vec<DocRouge> = corpus
        .par_iter()
        .zip(scores)
        .map(|(pair, s)| {
            Ok(DocRouge {
                id: pair.doc.id.clone(),
                rouge: selection_rouge(pair, s, selector, fraction)?,
            })
        })
        .collect::<Result<_>>()?;
    let mean = mean_recall(&per_doc.iter().map(|d| d.rouge).collect::<Vec<_>>());
    Ok(EvalReport { per_doc, mean })
}

/// Predict, select and score every document against its slides.
pub fn evaluate(model: &Model, corpus: &[CorpusPair], selector: &dyn Selector, fraction: f64) -> Result<EvalReport> {
    if corpus.is_empty() {
        return Err(Error::EmptyCorpus);
    }
    let scores: Vec<ScoreVector> = corpus.par_iter().map(|p| model.predict(&p.doc)).collect::<Result<_>>()?;
    evaluate_scores(corpus, &scores, selector, fraction)
}

/// [`evaluate`] on a checkpoint file.
pub fn evaluate_checkpoint(
    checkpoint: &Path,
    corpus: &[CorpusPair],
    selector: &dyn Selector,
    fraction: f64,
) -> Result<EvalReport> {
    evaluate(&Model::load(checkpoint)?, corpus, selector, fraction)
}
