//! Budgeted sentence selection. Strategies implement [`Selector`] and are
//! looked up by name in a [`SelectorRegistry`] (`greedy`, `greedy-stop`,
//! `exact`).

use std::cmp::Ordering;
use std::sync::Arc;

use indexmap::IndexMap;

use crate::docmodel::{word_count, Document, ScoreVector, Sentence};
use crate::error::{Error, Result};

pub const MAX_ITEMS: usize = 10_000;
pub const MAX_BUDGET: usize = 1_000_000;
/// Cap on DP table cells (items × capacity).
pub const MAX_DP_CELLS: usize = 100_000_000;

/// max Σ l_i·x_i·p_i subject to Σ l_i·x_i < max_len.
#[derive(Debug, Clone, PartialEq)]
pub struct SelectionProblem {
    pub lengths: Vec<usize>,
    pub scores: Vec<f64>,
    pub max_len: usize,
}

impl SelectionProblem {
    pub fn new(lengths: Vec<usize>, scores: Vec<f64>, max_len: usize) -> Result<Self> {
        if lengths.len() != scores.len() {
            return Err(Error::LengthMismatch {
                left: lengths.len(),
                right: scores.len(),
            });
        }
        if max_len == 0 {
            return Err(Error::InvalidConfig("max_len must be at least 1".into()));
        }
        if lengths.contains(&0) {
            return Err(Error::InvalidConfig("sentence lengths must be positive".into()));
        }
        if scores.iter().any(|s| !s.is_finite()) {
            return Err(Error::InvalidConfig("scores must be finite".into()));
        }
        Ok(SelectionProblem {
            lengths,
            scores,
            max_len,
        })
    }

    pub fn len(&self) -> usize {
        self.lengths.len()
    }

    pub fn is_empty(&self) -> bool {
        self.lengths.is_empty()
    }

    /// Σ l_i·x_i·p_i.
    pub fn objective(&self, decision: &[u8]) -> f64 {
        decision
            .iter()
            .enumerate()
            .filter(|(_, &x)| x == 1)
            .map(|(i, _)| self.lengths[i] as f64 * self.scores[i])
            .sum()
    }

    pub fn total_length(&self, decision: &[u8]) -> usize {
        decision
            .iter()
            .zip(&self.lengths)
            .filter(|(&x, _)| x == 1)
            .map(|(_, &l)| l)
            .sum()
    }

    pub fn is_feasible(&self, decision: &[u8]) -> bool {
        decision.len() == self.len() && self.total_length(decision) < self.max_len
    }
}

/// A selection problem over the scoreable sentences of a document.
/// Sentences without countable words (or without a score) are never
/// candidates.
#[derive(Debug, Clone)]
pub struct DocumentSelection {
    pub problem: SelectionProblem,
    /// Document position of each problem item.
    pub positions: Vec<usize>,
    pub n: usize,
}

impl DocumentSelection {
    pub fn new(doc: &Document, scores: &ScoreVector, max_len: usize) -> Result<Self> {
        let mut lengths = Vec::new();
        let mut item_scores = Vec::new();
        let mut positions = Vec::new();
        for (sentence, &p) in doc.sentences().zip(&scores.0) {
            if sentence.length_words == 0 {
                continue;
            }
            lengths.push(sentence.length_words);
            item_scores.push(p);
            positions.push(sentence.position);
        }
        Ok(DocumentSelection {
            problem: SelectionProblem::new(lengths, item_scores, max_len)?,
            positions,
            n: doc.n(),
        })
    }

    /// Expands a problem decision to one entry per document sentence.
    pub fn expand(&self, decision: &[u8]) -> Vec<u8> {
        let mut full = vec![0u8; self.n];
        for (item, &x) in decision.iter().enumerate() {
            full[self.positions[item]] = x;
        }
        full
    }
}

/// floor(fraction × word_count), at least 1.
pub fn budget(doc: &Document, fraction: f64) -> Result<usize> {
    if !(fraction > 0.0 && fraction <= 1.0) {
        return Err(Error::InvalidConfig(format!("fraction {fraction} outside (0, 1]")));
    }
    let words = word_count(doc) as f64;
    // tolerate representation error such as 0.29 × 100 = 28.999…
    Ok(((fraction * words + 1e-9).floor() as usize).max(1))
}

pub trait Selector: Send + Sync {
    fn name(&self) -> &'static str;

    /// Returns x ∈ {0,1}^n with Σ l_i·x_i < max_len.
    fn select(&self, problem: &SelectionProblem) -> Result<Vec<u8>>;
}

/// Adds sentences by descending score (ties: smaller index) while the
/// running length stays under the budget.
#[derive(Debug, Clone, Copy, Default)]
pub struct GreedySelector {
    /// Halt at the first sentence that does not fit instead of skipping it.
    pub stop_on_overflow: bool,
}

impl Selector for GreedySelector {
    fn name(&self) -> &'static str {
        if self.stop_on_overflow {
            "greedy-stop"
        } else {
            "greedy"
        }
    }

    fn select(&self, problem: &SelectionProblem) -> Result<Vec<u8>> {
        Ok(select_greedy(problem, self.stop_on_overflow))
    }
}

pub fn select_greedy(problem: &SelectionProblem, stop_on_overflow: bool) -> Vec<u8> {
    let mut order: Vec<usize> = (0..problem.len()).collect();
    order.sort_by(|&a, &b| {
        problem.scores[b]
            .partial_cmp(&problem.scores[a])
            .unwrap_or(Ordering::Equal)
            .then(a.cmp(&b))
    });
    let mut decision = vec![0u8; problem.len()];
    let mut used = 0;
    for i in order {
        if used + problem.lengths[i] < problem.max_len {
            used += problem.lengths[i];
            decision[i] = 1;
        } else if stop_on_overflow {
            break;
        }
    }
    decision
}

/// Exact 0/1 knapsack by dynamic programming over integer word lengths.
#[derive(Debug, Clone, Copy, Default)]
pub struct ExactSelector;

impl Selector for ExactSelector {
    fn name(&self) -> &'static str {
        "exact"
    }

    fn select(&self, problem: &SelectionProblem) -> Result<Vec<u8>> {
        select_exact(problem)
    }
}

/// Optimal decision under Σ l_i·x_i ≤ max_len − 1. Among optimal sets the
/// lexicographically smallest sorted index list is returned; objective
/// values within a relative 1e−12 of each other count as ties.
pub fn select_exact(problem: &SelectionProblem) -> Result<Vec<u8>> {
    let n = problem.len();
    if n > MAX_ITEMS {
        return Err(Error::ProblemTooLarge(format!("{n} items exceed {MAX_ITEMS}")));
    }
    if problem.max_len > MAX_BUDGET {
        return Err(Error::ProblemTooLarge(format!(
            "budget {} exceeds {MAX_BUDGET}",
            problem.max_len
        )));
    }
    let total: usize = problem.lengths.iter().sum();
    let capacity = (problem.max_len - 1).min(total);
    let width = capacity + 1;
    if (n + 1).saturating_mul(width) > MAX_DP_CELLS {
        return Err(Error::ProblemTooLarge(format!(
            "{n} items × {width} capacities exceed {MAX_DP_CELLS} cells"
        )));
    }
    let values: Vec<f64> = (0..n)
        .map(|i| problem.lengths[i] as f64 * problem.scores[i])
        .collect();

    // best[i][c]: optimum using items i.. with capacity c
    let mut best = vec![0.0f64; (n + 1) * width];
    for i in (0..n).rev() {
        let (head, tail) = best.split_at_mut((i + 1) * width);
        let row = &mut head[i * width..];
        let next = &tail[..width];
        let l = problem.lengths[i];
        for c in 0..width {
            let skip = next[c];
            row[c] = if l <= c {
                skip.max(values[i] + next[c - l])
            } else {
                skip
            };
        }
    }

    let scale = values.iter().fold(0.0f64, |m, v| m.max(v.abs())).max(1.0);
    let tol = 1e-12 * scale * (n.max(1) as f64);
    let mut decision = vec![0u8; n];
    let mut c = capacity;
    let mut target = best[c];
    for i in 0..n {
        // an empty completion sorts first
        if target <= tol {
            break;
        }
        let l = problem.lengths[i];
        if l <= c {
            let with = values[i] + best[(i + 1) * width + c - l];
            if with >= target - tol {
                decision[i] = 1;
                target -= values[i];
                c -= l;
            }
        }
    }
    Ok(decision)
}

/// Selected sentences in document order.
pub fn selected_sentences<'a>(doc: &'a Document, decision: &[u8]) -> Result<Vec<&'a Sentence>> {
    if decision.len() != doc.n() {
        return Err(Error::LengthMismatch {
            left: decision.len(),
            right: doc.n(),
        });
    }
    Ok(doc
        .sentences()
        .zip(decision)
        .filter(|(_, &x)| x == 1)
        .map(|(s, _)| s)
        .collect())
}

/// Selection strategies by name.
pub struct SelectorRegistry {
    entries: IndexMap<&'static str, Arc<dyn Selector>>,
}

impl SelectorRegistry {
    pub fn empty() -> Self {
        SelectorRegistry {
            entries: IndexMap::new(),
        }
    }

    pub fn register(&mut self, selector: Arc<dyn Selector>) {
        self.entries.insert(selector.name(), selector);
    }

    pub fn get(&self, name: &str) -> Result<Arc<dyn Selector>> {
        self.entries.get(name).cloned().ok_or_else(|| Error::UnknownStrategy {
            kind: "selection method",
            name: name.to_string(),
            available: self.names().join(", "),
        })
    }

    pub fn names(&self) -> Vec<&'static str> {
        self.entries.keys().copied().collect()
    }
}

impl Default for SelectorRegistry {
    fn default() -> Self {
        let mut registry = Self::empty();
        registry.register(Arc::new(GreedySelector::default()));
        registry.register(Arc::new(GreedySelector {
            stop_on_overflow: true,
        }));
        registry.register(Arc::new(ExactSelector));
        registry
    }
}

/// Scores, builds and solves the selection problem for one document and
/// returns the full-length decision.
pub fn select_for_document(
    doc: &Document,
    scores: &ScoreVector,
    selector: &dyn Selector,
    fraction: f64,
) -> Result<Vec<u8>> {
    let max_len = budget(doc, fraction)?;
    let selection = DocumentSelection::new(doc, scores, max_len)?;
    let decision = selector.select(&selection.problem)?;
    Ok(selection.expand(&decision))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::docmodel::{tokens, SentenceDraft};

    fn problem(lengths: &[usize], scores: &[f64], max_len: usize) -> SelectionProblem {
        SelectionProblem::new(lengths.to_vec(), scores.to_vec(), max_len).unwrap()
    }

    fn doc_with_words(counts: &[usize]) -> Document {
        let drafts = counts
            .iter()
            .map(|&c| {
                let words: Vec<String> = (0..c).map(|i| format!("w{i}")).collect();
                let refs: Vec<&str> = words.iter().map(String::as_str).collect();
                SentenceDraft::from_tokens(tokens(&refs))
            })
            .collect();
        Document::build("d", "T", vec![("S".into(), drafts)]).unwrap()
    }

    #[test]
    fn budget_cases() {
        assert_eq!(budget(&doc_with_words(&[500, 500]), 0.2).unwrap(), 200);
        assert_eq!(budget(&doc_with_words(&[3]), 0.2).unwrap(), 1);
        assert_eq!(budget(&doc_with_words(&[7, 2]), 1.0).unwrap(), 9);
        assert_eq!(budget(&doc_with_words(&[100]), 0.29).unwrap(), 29);
        assert!(budget(&doc_with_words(&[3]), 0.0).is_err());
        assert!(budget(&doc_with_words(&[3]), 1.5).is_err());
    }

    #[test]
    fn greedy_hand_trace() {
        let p = problem(&[3, 4, 5], &[0.9, 0.6, 0.8], 8);
        assert_eq!(select_greedy(&p, false), vec![1, 1, 0]);
        assert_eq!(select_greedy(&p, true), vec![1, 0, 0]);
    }

    #[test]
    fn greedy_ties_prefer_earlier() {
        let p = problem(&[2, 2, 2, 2], &[0.5; 4], 5);
        assert_eq!(select_greedy(&p, false), vec![1, 1, 0, 0]);
    }

    #[test]
    fn strict_budget_of_one_selects_nothing() {
        let p = problem(&[1, 2, 3], &[0.9, 0.9, 0.9], 1);
        assert_eq!(select_greedy(&p, false), vec![0, 0, 0]);
        assert_eq!(select_exact(&p).unwrap(), vec![0, 0, 0]);
    }

    #[test]
    fn exact_beats_greedy_on_constructed_instance() {
        let p = problem(&[5, 3, 3], &[0.9, 0.8, 0.8], 7);
        let exact = select_exact(&p).unwrap();
        let greedy = select_greedy(&p, false);
        assert_eq!(exact, vec![0, 1, 1]);
        assert_eq!(greedy, vec![1, 0, 0]);
        assert!((p.objective(&exact) - 4.8).abs() < 1e-12);
        assert!((p.objective(&greedy) - 4.5).abs() < 1e-12);
    }

    #[test]
    fn exact_singleton_and_infeasible() {
        assert_eq!(select_exact(&problem(&[3], &[0.2], 10)).unwrap(), vec![1]);
        assert_eq!(select_exact(&problem(&[4, 5], &[0.9, 0.9], 4)).unwrap(), vec![0, 0]);
        assert_eq!(select_exact(&problem(&[], &[], 4)).unwrap(), Vec::<u8>::new());
    }

    #[test]
    fn exact_prefers_lexicographically_smallest_optimum() {
        // {0,1,2}, {0,3} and {1,2,..} variants all reach 4.0; {0,1,2} sorts first
        let p = problem(&[2, 1, 1, 2], &[1.0, 1.0, 1.0, 1.0], 5);
        assert_eq!(select_exact(&p).unwrap(), vec![1, 1, 1, 0]);
        // any two items are optimal; {0,1} sorts first
        let q = problem(&[2, 2, 2, 2], &[1.0, 1.0, 1.0, 1.0], 5);
        assert_eq!(select_exact(&q).unwrap(), vec![1, 1, 0, 0]);
        // zero-score items are left out
        let z = problem(&[2, 1], &[1.0, 0.0], 10);
        assert_eq!(select_exact(&z).unwrap(), vec![1, 0]);
    }

    #[test]
    fn exact_guards_problem_size() {
        let big = problem(&[1], &[0.5], MAX_BUDGET + 1);
        assert!(matches!(select_exact(&big).unwrap_err(), Error::ProblemTooLarge(_)));
        let many = problem(&vec![1; MAX_ITEMS + 1], &vec![0.5; MAX_ITEMS + 1], 10);
        assert!(matches!(select_exact(&many).unwrap_err(), Error::ProblemTooLarge(_)));
    }

    #[test]
    fn problem_validation() {
        assert!(SelectionProblem::new(vec![1], vec![], 3).is_err());
        assert!(SelectionProblem::new(vec![0], vec![0.5], 3).is_err());
        assert!(SelectionProblem::new(vec![1], vec![0.5], 0).is_err());
    }

    #[test]
    fn selected_sentences_keep_document_order() {
        let d = doc_with_words(&[1, 2, 3]);
        let picked = selected_sentences(&d, &[0, 1, 1]).unwrap();
        assert_eq!(picked.iter().map(|s| s.position).collect::<Vec<_>>(), vec![1, 2]);
        assert!(selected_sentences(&d, &[0, 0, 0]).unwrap().is_empty());
        assert_eq!(selected_sentences(&d, &[1, 1, 1]).unwrap().len(), 3);
        assert!(selected_sentences(&d, &[1]).is_err());
    }

    #[test]
    fn punctuation_only_sentences_are_not_candidates() {
        let drafts = vec![
            SentenceDraft::from_tokens(tokens(&["a", "b"])),
            SentenceDraft::from_tokens(tokens(&["..."])),
            SentenceDraft::from_tokens(tokens(&["c"])),
        ];
        let d = Document::build("d", "", vec![("S".into(), drafts)]).unwrap();
        let scores = ScoreVector(vec![0.1, 0.9, 0.5]);
        let decision = select_for_document(&d, &scores, &ExactSelector, 1.0).unwrap();
        assert_eq!(decision, vec![0, 0, 1]);
    }

    #[test]
    fn registry_resolves_names() {
        let registry = SelectorRegistry::default();
        assert_eq!(registry.names(), vec!["greedy", "greedy-stop", "exact"]);
        assert_eq!(registry.get("exact").unwrap().name(), "exact");
        assert!(registry.get("ilp").is_err());
    }
}
