//! ROUGE-N and summary-level ROUGE-L over token sequences.

use std::collections::HashMap;
use std::hash::Hash;

use serde::{Deserialize, Serialize};

use crate::docmodel::{ReferenceSlides, Token};

#[derive(Debug, Clone, Copy, PartialEq, Default, Serialize, Deserialize)]
pub struct RougeScore {
    pub recall: f64,
    pub precision: f64,
    pub f1: f64,
}

impl RougeScore {
    pub fn from_counts(hits: usize, reference_total: usize, candidate_total: usize) -> Self {
        let ratio = |num: usize, den: usize| if den == 0 { 0.0 } else { num as f64 / den as f64 };
        let recall = ratio(hits, reference_total);
        let precision = ratio(hits, candidate_total);
        let f1 = if precision + recall > 0.0 {
            2.0 * precision * recall / (precision + recall)
        } else {
            0.0
        };
        RougeScore {
            recall,
            precision,
            f1,
        }
    }
}

fn ngram_counts<T: Eq + Hash>(tokens: &[T], n: usize) -> HashMap<&[T], usize> {
    let mut counts = HashMap::new();
    if n > 0 && tokens.len() >= n {
        for gram in tokens.windows(n) {
            *counts.entry(gram).or_insert(0) += 1;
        }
    }
    counts
}

/// Size of the clipped n-gram multiset intersection, plus the n-gram
/// totals of candidate and reference.
pub fn ngram_overlap<T: Eq + Hash>(candidate: &[T], reference: &[T], n: usize) -> (usize, usize, usize) {
    let cand = ngram_counts(candidate, n);
    let refc = ngram_counts(reference, n);
    let hits = cand
        .iter()
        .map(|(gram, &c)| c.min(refc.get(gram).copied().unwrap_or(0)))
        .sum();
    (hits, cand.values().sum(), refc.values().sum())
}

/// Clipped ROUGE-N with recall over the reference and precision over
/// the candidate.
pub fn rouge_n(candidate: &[Token], reference: &[Token], n: usize) -> RougeScore {
    let (hits, cand_total, ref_total) = ngram_overlap(candidate, reference, n);
    RougeScore::from_counts(hits, ref_total, cand_total)
}

fn lcs_table<T: Eq>(a: &[T], b: &[T]) -> Vec<Vec<usize>> {
    let mut table = vec![vec![0usize; b.len() + 1]; a.len() + 1];
    for i in 1..=a.len() {
        for j in 1..=b.len() {
            table[i][j] = if a[i - 1] == b[j - 1] {
                table[i - 1][j - 1] + 1
            } else {
                table[i - 1][j].max(table[i][j - 1])
            };
        }
    }
    table
}

/// Length of the longest common subsequence.
pub fn lcs_len<T: Eq>(a: &[T], b: &[T]) -> usize {
    lcs_table(a, b)[a.len()][b.len()]
}

/// Indices into `reference` that belong to one longest common subsequence
/// with `candidate`.
pub fn lcs_reference_hits<T: Eq>(reference: &[T], candidate: &[T]) -> Vec<usize> {
    let table = lcs_table(reference, candidate);
    let (mut i, mut j) = (reference.len(), candidate.len());
    let mut hits = Vec::with_capacity(table[i][j]);
    while i > 0 && j > 0 {
        if reference[i - 1] == candidate[j - 1] {
            hits.push(i - 1);
            i -= 1;
            j -= 1;
        } else if table[i - 1][j] >= table[i][j - 1] {
            i -= 1;
        } else {
            j -= 1;
        }
    }
    hits.reverse();
    hits
}

/// Summary-level ROUGE-L. For every reference sentence the union of its
/// LCS hits against each candidate sentence is taken; a hit on token `t`
/// is credited only while both the reference and candidate still have an
/// unused occurrence of `t`.
pub fn rouge_l(candidate_sents: &[Vec<Token>], reference_sents: &[Vec<Token>]) -> RougeScore {
    let cand_total: usize = candidate_sents.iter().map(Vec::len).sum();
    let ref_total: usize = reference_sents.iter().map(Vec::len).sum();
    let mut cand_budget: HashMap<&Token, usize> = HashMap::new();
    for t in candidate_sents.iter().flatten() {
        *cand_budget.entry(t).or_insert(0) += 1;
    }
    let mut ref_budget: HashMap<&Token, usize> = HashMap::new();
    for t in reference_sents.iter().flatten() {
        *ref_budget.entry(t).or_insert(0) += 1;
    }

    let mut hits = 0;
    for reference in reference_sents {
        let mut union = vec![false; reference.len()];
        for candidate in candidate_sents {
            for idx in lcs_reference_hits(reference, candidate) {
                union[idx] = true;
            }
        }
        for (idx, _) in union.iter().enumerate().filter(|(_, &hit)| hit) {
            let token = &reference[idx];
            let c = cand_budget.get_mut(token).expect("hit token is in candidate");
            let r = ref_budget.get_mut(token).expect("hit token is in reference");
            if *c > 0 && *r > 0 {
                *c -= 1;
                *r -= 1;
                hits += 1;
            }
        }
    }
    RougeScore::from_counts(hits, ref_total, cand_total)
}

/// Recall of a sentence-list summary against reference slides: ROUGE-1
/// and ROUGE-2 over flattened tokens, ROUGE-L with slide lines as the
/// reference sentences.
#[derive(Debug, Clone, Copy, PartialEq, Default, Serialize, Deserialize)]
pub struct SummaryRouge {
    pub r1: f64,
    pub r2: f64,
    pub rl: f64,
}

pub fn summary_recall(summary: &[Vec<Token>], slides: &ReferenceSlides) -> SummaryRouge {
    let flat: Vec<Token> = summary.iter().flatten().cloned().collect();
    SummaryRouge {
        r1: rouge_n(&flat, &slides.flat_tokens, 1).recall,
        r2: rouge_n(&flat, &slides.flat_tokens, 2).recall,
        rl: rouge_l(summary, &slides.line_tokens()).recall,
    }
}

/// Arithmetic mean of per-document scores, accumulated in input order.
pub fn mean_recall(scores: &[SummaryRouge]) -> SummaryRouge {
    if scores.is_empty() {
        return SummaryRouge::default();
    }
    let n = scores.len() as f64;
    let mut total = SummaryRouge::default();
    for s in scores {
        total.r1 += s.r1;
        total.r2 += s.r2;
        total.rl += s.rl;
    }
    SummaryRouge {
        r1: total.r1 / n,
        r2: total.r2 / n,
        rl: total.rl / n,
    }
}
