//! Sentence scoring head: position, content, salience and novelty terms
//! combined through a sigmoid, with a running probability-weighted summary
//! state, plus the class-weighted negative log-likelihood.

use rand::Rng;
use serde::{Deserialize, Serialize};

use crate::docmodel::{LabelVector, ScoreVector};
use crate::encoder::SentenceEmbedding;
use crate::error::{Error, Result};
use crate::neuralcore::{xavier_uniform, Graph, Matrix, ParamStore, Var, PROB_CLAMP};

pub const W_POS: &str = "rank.w_pos";
pub const W_CONTENT: &str = "rank.w_content";
pub const W_SALIENCE: &str = "rank.w_salience";
pub const W_NOVELTY: &str = "rank.w_novelty";
pub const POSITION_TABLE: &str = "rank.position";

/// Magnitudes of the class weights applied to positive and negative labels.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct LossWeights {
    pub positive_weight: f64,
    pub negative_weight: f64,
}

impl Default for LossWeights {
    fn default() -> Self {
        LossWeights {
            positive_weight: 85.0,
            negative_weight: 2.0,
        }
    }
}

impl LossWeights {
    pub fn validate(&self) -> Result<()> {
        if !(self.positive_weight > 0.0 && self.negative_weight > 0.0) {
            return Err(Error::InvalidConfig("loss weights must be positive".into()));
        }
        Ok(())
    }
}

/// Registers the ranker parameters; the position table starts at zero.
pub fn init_ranker_params<R: Rng + ?Sized>(
    store: &mut ParamStore,
    width: usize,
    max_sentences: usize,
    rng: &mut R,
) -> Result<()> {
    store.insert(W_POS, &[width, 1], xavier_uniform(rng, width, 1, width))?;
    store.insert(W_CONTENT, &[width, 1], xavier_uniform(rng, width, 1, width))?;
    store.insert(W_SALIENCE, &[width, width], xavier_uniform(rng, width, width, width * width))?;
    store.insert(W_NOVELTY, &[width, width], xavier_uniform(rng, width, width, width * width))?;
    store.insert_zeros(POSITION_TABLE, &[max_sentences, width])?;
    Ok(())
}

/// Tape handles for one sentence's score and its four additive terms.
#[derive(Debug, Clone, Copy)]
pub struct ScoreTerms {
    pub pos: Var,
    pub content: Var,
    pub salience: Var,
    pub novelty: Var,
    pub prob: Var,
}

/// Scores sentences in order. Sentence i sees the summary state
/// Σ_{j<i} p_j·E_{s_j}; the state for i = 0 is the zero vector.
pub fn score_sentences(
    g: &mut Graph,
    store: &ParamStore,
    sentences: &[SentenceEmbedding],
    doc: Var,
) -> Result<Vec<ScoreTerms>> {
    let n = sentences.len();
    let max = store
        .get(POSITION_TABLE)
        .map(|p| p.dims().0)
        .ok_or_else(|| Error::ShapeMismatch(format!("missing parameter `{POSITION_TABLE}`")))?;
    if n > max {
        return Err(Error::TooManySentences { found: n, max });
    }
    if n == 0 {
        return Ok(Vec::new());
    }
    let width = g.value(sentences[0].vector).cols;

    let rows: Vec<Var> = sentences.iter().map(|s| s.vector).collect();
    let stacked = g.concat_rows(&rows);
    let stacked_t = g.transpose(stacked);
    let positions: Vec<usize> = (0..n).collect();
    let pos_rows = g.lookup(store, POSITION_TABLE, &positions)?;
    let w_pos = g.param(store, W_POS)?;
    let w_content = g.param(store, W_CONTENT)?;
    let w_salience = g.param(store, W_SALIENCE)?;
    let w_novelty = g.param(store, W_NOVELTY)?;

    let pos_all = g.matmul(pos_rows, w_pos);
    let content_all = g.matmul(stacked, w_content);
    let doc_proj = g.matmul(doc, w_salience);
    let salience_all = g.matmul(doc_proj, stacked_t);

    let mut summary = g.constant(Matrix::zeros(1, width));
    let mut out = Vec::with_capacity(n);
    for (i, sentence) in sentences.iter().enumerate() {
        let pos = g.slice(pos_all, i, 0, 1, 1);
        let content = g.slice(content_all, i, 0, 1, 1);
        let salience = g.slice(salience_all, 0, i, 1, 1);
        let sent_t = g.slice(stacked_t, 0, i, width, 1);
        let summary_proj = g.matmul(summary, w_novelty);
        let novelty = g.matmul(summary_proj, sent_t);
        let logit = g.add(pos, content);
        let logit = g.add(logit, salience);
        let logit = g.add(logit, novelty);
        let prob = g.sigmoid(logit);
        let weighted = g.matmul(prob, sentence.vector);
        summary = g.add(summary, weighted);
        out.push(ScoreTerms {
            pos,
            content,
            salience,
            novelty,
            prob,
        });
    }
    Ok(out)
}

/// Probabilities from scored terms, in sentence order.
pub fn probabilities(g: &Graph, terms: &[ScoreTerms]) -> ScoreVector {
    ScoreVector(terms.iter().map(|t| g.value(t.prob).item()).collect())
}

/// Class-weighted NLL on the tape.
pub fn weighted_loss_on_tape(
    g: &mut Graph,
    terms: &[ScoreTerms],
    labels: &LabelVector,
    weights: &LossWeights,
) -> Result<Var> {
    if terms.len() != labels.len() {
        return Err(Error::LengthMismatch {
            left: terms.len(),
            right: labels.len(),
        });
    }
    let probs: Vec<Var> = terms.iter().map(|t| t.prob).collect();
    let stacked = g.concat_rows(&probs);
    let y: Vec<f64> = labels.0.iter().map(|&v| f64::from(v)).collect();
    Ok(g.weighted_nll(stacked, &y, weights.positive_weight, weights.negative_weight))
}

/// Σ_i [w⁺·y_i·(−ln p_i) + w⁻·(1−y_i)·(−ln(1−p_i))] with p clamped to
/// [1e−7, 1−1e−7].
pub fn weighted_loss(scores: &ScoreVector, labels: &LabelVector, weights: &LossWeights) -> Result<f64> {
    if scores.len() != labels.len() {
        return Err(Error::LengthMismatch {
            left: scores.len(),
            right: labels.len(),
        });
    }
    Ok(scores
        .0
        .iter()
        .zip(&labels.0)
        .map(|(&p, &y)| {
            let p = p.clamp(PROB_CLAMP, 1.0 - PROB_CLAMP);
            let y = f64::from(y);
            weights.positive_weight * y * -p.ln() + weights.negative_weight * (1.0 - y) * -(1.0 - p).ln()
        })
        .sum())
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::encoder::constant_sentence;
    use rand::SeedableRng;
    use rand_chacha::ChaCha8Rng;

    fn store(width: usize, max: usize) -> ParamStore {
        let mut s = ParamStore::new();
        init_ranker_params(&mut s, width, max, &mut ChaCha8Rng::seed_from_u64(1)).unwrap();
        s
    }

    fn zero_all(s: &mut ParamStore) {
        for (_, p) in s.iter_mut() {
            p.value.iter_mut().for_each(|v| *v = 0.0);
        }
    }

    #[test]
    fn zero_parameters_give_one_half() {
        let mut s = store(4, 8);
        zero_all(&mut s);
        let mut g = Graph::new();
        let sents: Vec<_> = (0..3).map(|i| constant_sentence(&mut g, vec![i as f64, 1.0, -2.0, 0.5])).collect();
        let doc = g.constant(Matrix::row_vector(vec![1.0; 4]));
        let terms = score_sentences(&mut g, &s, &sents, doc).unwrap();
        assert_eq!(probabilities(&g, &terms).0, vec![0.5; 3]);
    }

    #[test]
    fn first_sentence_has_no_novelty_term() {
        let s = store(4, 8);
        let mut g = Graph::new();
        let sents = [constant_sentence(&mut g, vec![3.0, -1.0, 2.0, 7.0])];
        let doc = g.constant(Matrix::row_vector(vec![1.0; 4]));
        let terms = score_sentences(&mut g, &s, &sents, doc).unwrap();
        assert_eq!(g.value(terms[0].novelty).item(), 0.0);
    }

    #[test]
    fn negating_novelty_weights_flips_the_term() {
        let mut s = store(2, 4);
        let mut g = Graph::new();
        let sents: Vec<_> = [[0.4, -0.2], [0.1, 0.9]]
            .iter()
            .map(|v| constant_sentence(&mut g, v.to_vec()))
            .collect();
        let doc = g.constant(Matrix::row_vector(vec![0.3, 0.3]));
        let before = score_sentences(&mut g, &s, &sents, doc).unwrap();
        let novelty_before = g.value(before[1].novelty).item();
        let negated: Vec<f64> = s.get(W_NOVELTY).unwrap().value.iter().map(|v| -v).collect();
        s.set(W_NOVELTY, negated).unwrap();
        let mut g2 = Graph::new();
        let sents2: Vec<_> = [[0.4, -0.2], [0.1, 0.9]]
            .iter()
            .map(|v| constant_sentence(&mut g2, v.to_vec()))
            .collect();
        let doc2 = g2.constant(Matrix::row_vector(vec![0.3, 0.3]));
        // the summary state at i = 1 depends only on p_0, which has no novelty term
        let after = score_sentences(&mut g2, &s, &sents2, doc2).unwrap();
        assert!(novelty_before != 0.0);
        assert_eq!(g2.value(after[1].novelty).item(), -novelty_before);
    }

    #[test]
    fn too_many_sentences_is_an_error() {
        let s = store(2, 2);
        let mut g = Graph::new();
        let sents: Vec<_> = (0..3).map(|_| constant_sentence(&mut g, vec![0.0, 0.0])).collect();
        let doc = g.constant(Matrix::row_vector(vec![0.0, 0.0]));
        assert!(matches!(
            score_sentences(&mut g, &s, &sents, doc).unwrap_err(),
            Error::TooManySentences { found: 3, max: 2 }
        ));
    }

    #[test]
    fn redundancy_lowers_later_scores() {
        // equal sentences, zero position table, E·W_nov·Eᵀ < 0 so the
        // growing summary pushes probabilities down
        let mut s = store(2, 6);
        zero_all(&mut s);
        s.set(W_NOVELTY, vec![-1.0, 0.0, 0.0, -1.0]).unwrap();
        s.set(W_CONTENT, vec![1.0, 1.0]).unwrap();
        let mut g = Graph::new();
        let sents: Vec<_> = (0..5).map(|_| constant_sentence(&mut g, vec![0.6, 0.8])).collect();
        let doc = g.constant(Matrix::row_vector(vec![0.0, 0.0]));
        let terms = score_sentences(&mut g, &s, &sents, doc).unwrap();
        let p = probabilities(&g, &terms).0;
        for w in p.windows(2) {
            assert!(w[1] <= w[0], "{p:?}");
        }
        assert!(p[4] < p[0]);
    }

    #[test]
    fn loss_hand_values() {
        let w = LossWeights::default();
        let pos = weighted_loss(&ScoreVector(vec![0.5]), &LabelVector(vec![1]), &w).unwrap();
        assert!((pos - 85.0 * 2f64.ln()).abs() < 1e-12);
        assert!((pos - 58.9175).abs() < 1e-4);
        let neg = weighted_loss(&ScoreVector(vec![0.5]), &LabelVector(vec![0]), &w).unwrap();
        assert!((neg - 1.3863).abs() < 1e-4);
    }

    #[test]
    fn clamped_perfect_predictions_are_near_zero() {
        let w = LossWeights::default();
        let scores = ScoreVector(vec![1.0 - 1e-7, 1e-7, 1.0, 0.0]);
        let labels = LabelVector(vec![1, 0, 1, 0]);
        let loss = weighted_loss(&scores, &labels, &w).unwrap();
        assert!(loss >= 0.0);
        assert!(loss / 4.0 < 1e-4);
    }

    #[test]
    fn loss_length_mismatch() {
        let err = weighted_loss(&ScoreVector(vec![0.5]), &LabelVector(vec![1, 0]), &LossWeights::default()).unwrap_err();
        assert!(matches!(err, Error::LengthMismatch { .. }));
    }
}
