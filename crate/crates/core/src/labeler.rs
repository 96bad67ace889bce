//! Windowed oracle labeling: greedy ROUGE-1 recall improvement restricted
//! to consecutive, non-overlapping sentence windows.

use std::collections::HashMap;

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::docmodel::{flatten_reference, Document, LabelVector, ReferenceSlides, Token};
use crate::error::{Error, Result};
use crate::ingest::CorpusPair;
use crate::rouge::{mean_recall, summary_recall, SummaryRouge};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct WindowConfig {
    /// Window size in sentences.
    pub w: usize,
    /// Cap on positives per window; `None` labels every improving sentence.
    pub max_per_window: Option<usize>,
}

impl Default for WindowConfig {
    fn default() -> Self {
        WindowConfig {
            w: 10,
            max_per_window: None,
        }
    }
}

impl WindowConfig {
    pub fn new(w: usize) -> Self {
        WindowConfig {
            w,
            max_per_window: None,
        }
    }

    pub fn validate(&self) -> Result<()> {
        if self.w == 0 {
            return Err(Error::InvalidConfig("window size must be at least 1".into()));
        }
        if self.max_per_window == Some(0) {
            return Err(Error::InvalidConfig("max_per_window must be at least 1".into()));
        }
        Ok(())
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct LabelOutcome {
    pub labels: LabelVector,
    /// Set when the reference flattens to no tokens; labels are all zero.
    pub empty_reference: bool,
}

/// Running clipped unigram overlap between a growing selection and a
/// fixed reference.
struct Coverage<'a> {
    reference: HashMap<&'a Token, usize>,
    reference_total: usize,
    selected: HashMap<&'a Token, usize>,
    overlap: usize,
}

impl<'a> Coverage<'a> {
    fn new(reference: &'a [Token]) -> Self {
        let mut counts = HashMap::new();
        for t in reference {
            *counts.entry(t).or_insert(0) += 1;
        }
        Coverage {
            reference: counts,
            reference_total: reference.len(),
            selected: HashMap::new(),
            overlap: 0,
        }
    }

    fn recall(&self) -> f64 {
        self.overlap as f64 / self.reference_total as f64
    }

    /// Overlap gained by adding `sentence` to the selection.
    fn gain(&self, sentence: &[Token]) -> usize {
        let mut local: HashMap<&Token, usize> = HashMap::new();
        for t in sentence {
            *local.entry(t).or_insert(0) += 1;
        }
        local
            .into_iter()
            .map(|(t, add)| {
                let cap = self.reference.get(t).copied().unwrap_or(0);
                let have = self.selected.get(t).copied().unwrap_or(0);
                (have + add).min(cap) - have.min(cap)
            })
            .sum()
    }

    fn add(&mut self, sentence: &'a [Token]) {
        for t in sentence {
            let cap = self.reference.get(t).copied().unwrap_or(0);
            let have = self.selected.entry(t).or_insert(0);
            if *have < cap {
                self.overlap += 1;
            }
            *have += 1;
        }
    }
}

/// Labels a sentence 1 when, inside its window, adding it to the
/// document-wide selection strictly increases ROUGE-1 recall against the
/// flattened slides. Within a window the best-gain sentence is taken
/// first; ties go to the smaller position.
pub fn label_document(doc: &Document, slides: &ReferenceSlides, cfg: &WindowConfig) -> Result<LabelOutcome> {
    cfg.validate()?;
    let n = doc.n();
    let reference = flatten_reference(slides);
    if reference.is_empty() {
        log::warn!("document `{}`: reference slides are empty, all labels 0", doc.id);
        return Ok(LabelOutcome {
            labels: LabelVector::zeros(n),
            empty_reference: true,
        });
    }
    let sentences: Vec<&[Token]> = doc.sentences().map(|s| s.tokens.as_slice()).collect();
    let mut coverage = Coverage::new(&reference);
    let mut labels = vec![0u8; n];
    let cap = cfg.max_per_window.unwrap_or(usize::MAX);

    for start in (0..n).step_by(cfg.w) {
        let end = (start + cfg.w).min(n);
        let mut taken = 0;
        while taken < cap {
            let best = (start..end)
                .filter(|&i| labels[i] == 0)
                .map(|i| (i, coverage.gain(sentences[i])))
                .filter(|&(_, g)| g > 0)
                .max_by(|a, b| a.1.cmp(&b.1).then_with(|| b.0.cmp(&a.0)));
            let Some((i, _)) = best else { break };
            let before = coverage.recall();
            coverage.add(sentences[i]);
            assert!(
                coverage.recall() > before,
                "oracle recall must strictly increase with each positive label"
            );
            labels[i] = 1;
            taken += 1;
        }
    }
    Ok(LabelOutcome {
        labels: LabelVector(labels),
        empty_reference: false,
    })
}

/// Token lists of the positively labeled sentences, in position order.
pub fn oracle_summary(doc: &Document, labels: &LabelVector) -> Result<Vec<Vec<Token>>> {
    if labels.len() != doc.n() {
        return Err(Error::LengthMismatch {
            left: labels.len(),
            right: doc.n(),
        });
    }
    Ok(doc
        .sentences()
        .zip(&labels.0)
        .filter(|(_, &y)| y == 1)
        .map(|(s, _)| s.tokens.clone())
        .collect())
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct SweepRow {
    pub w: usize,
    pub r1: f64,
    pub r2: f64,
    pub rl: f64,
}

/// Mean oracle-summary recall over the corpus for each window size, in
/// input order.
pub fn sweep_window_sizes(corpus: &[CorpusPair], sizes: &[usize]) -> Result<Vec<SweepRow>> {
    if sizes.is_empty() {
        return Err(Error::InvalidConfig("window size list is empty".into()));
    }
    sizes
        .iter()
        .map(|&w| {
            let cfg = WindowConfig::new(w);
            let per_doc: Vec<SummaryRouge> = corpus
                .par_iter()
                .map(|pair| {
                    let outcome = label_document(&pair.doc, &pair.slides, &cfg)?;
                    let summary = oracle_summary(&pair.doc, &outcome.labels)?;
                    Ok(summary_recall(&summary, &pair.slides))
                })
                .collect::<Result<_>>()?;
            let mean = mean_recall(&per_doc);
            Ok(SweepRow {
                w,
                r1: mean.r1,
                r2: mean.r2,
                rl: mean.rl,
            })
        })
        .collect()
}
