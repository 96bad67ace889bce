//! Sentence and document embeddings. A shared BiLSTM runs over word
//! embeddings; the pooling strategy (`simple` or `attention`) is selected
//! by name from an [`EncoderRegistry`].

use std::sync::Arc;

use indexmap::IndexMap;
use rand::Rng;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::neuralcore::{xavier_uniform, Graph, Matrix, ParamStore, Var};

pub const EMBEDDING: &str = "embedding";
pub const ATTN_WORD: &str = "attn.word";
pub const ATTN_SENT: &str = "attn.sent";
pub const DOC_W: &str = "doc.w";
pub const DOC_B: &str = "doc.b";

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct EncoderConfig {
    /// Word embedding width; also the LSTM hidden size per direction.
    pub d: usize,
    /// Attention dimension (number of attention rows).
    pub k: usize,
    pub max_tokens: usize,
    pub max_sentences: usize,
    /// Name of the registered encoder strategy.
    pub mode: String,
}

impl Default for EncoderConfig {
    fn default() -> Self {
        EncoderConfig {
            d: 50,
            k: 100,
            max_tokens: 50,
            max_sentences: 500,
            mode: "simple".into(),
        }
    }
}

impl EncoderConfig {
    pub fn validate(&self) -> Result<()> {
        for (name, v) in [
            ("d", self.d),
            ("k", self.k),
            ("max_tokens", self.max_tokens),
            ("max_sentences", self.max_sentences),
        ] {
            if v == 0 {
                return Err(Error::InvalidConfig(format!("{name} must be positive")));
            }
        }
        EncoderRegistry::default().get(&self.mode)?;
        Ok(())
    }

    /// Width of sentence and document embeddings.
    pub fn width(&self) -> usize {
        2 * self.d
    }
}

/// Output of sentence encoding.
#[derive(Debug, Clone, Copy)]
pub struct SentenceEmbedding {
    /// 1×2d sentence vector.
    pub vector: Var,
    /// m×2d per-token BiLSTM states, kept by attention pooling.
    pub hidden: Option<Var>,
}

/// A pooling strategy over BiLSTM states.
pub trait EncoderStrategy: Send + Sync {
    fn name(&self) -> &'static str;

    /// Adds strategy-specific parameters to the store.
    fn init_params(&self, store: &mut ParamStore, cfg: &EncoderConfig, rng: &mut dyn rand::RngCore) -> Result<()>;

    fn encode_sentence(
        &self,
        g: &mut Graph,
        store: &ParamStore,
        cfg: &EncoderConfig,
        token_ids: &[usize],
    ) -> Result<SentenceEmbedding>;

    fn encode_document(&self, g: &mut Graph, store: &ParamStore, sentences: &[SentenceEmbedding]) -> Result<Var>;
}

/// Encoder strategies by name.
pub struct EncoderRegistry {
    entries: IndexMap<&'static str, Arc<dyn EncoderStrategy>>,
}

impl EncoderRegistry {
    pub fn empty() -> Self {
        EncoderRegistry {
            entries: IndexMap::new(),
        }
    }

    pub fn register(&mut self, strategy: Arc<dyn EncoderStrategy>) {
        self.entries.insert(strategy.name(), strategy);
    }

    pub fn get(&self, name: &str) -> Result<Arc<dyn EncoderStrategy>> {
        self.entries.get(name).cloned().ok_or_else(|| Error::UnknownStrategy {
            kind: "encoder mode",
            name: name.to_string(),
            available: self.names().join(", "),
        })
    }

    pub fn names(&self) -> Vec<&'static str> {
        self.entries.keys().copied().collect()
    }
}

impl Default for EncoderRegistry {
    fn default() -> Self {
        let mut registry = Self::empty();
        registry.register(Arc::new(SimpleEncoder));
        registry.register(Arc::new(AttentionEncoder));
        registry
    }
}

fn lstm_names(dir: &str) -> [String; 3] {
    [format!("lstm.{dir}.w"), format!("lstm.{dir}.u"), format!("lstm.{dir}.b")]
}

/// Registers the word embedding table and both LSTM directions. Gate
/// layout along the 4h axis: input, forget, candidate, output; forget
/// biases start at 1.
pub fn init_shared_params<R: Rng + ?Sized>(
    store: &mut ParamStore,
    cfg: &EncoderConfig,
    embeddings: Vec<f64>,
    vocab_size: usize,
    rng: &mut R,
) -> Result<()> {
    let (d, h) = (cfg.d, cfg.d);
    store.insert(EMBEDDING, &[vocab_size, d], embeddings)?;
    for dir in ["fw", "bw"] {
        let [w, u, b] = lstm_names(dir);
        store.insert(&w, &[d, 4 * h], xavier_uniform(rng, d, 4 * h, d * 4 * h))?;
        store.insert(&u, &[h, 4 * h], xavier_uniform(rng, h, 4 * h, h * 4 * h))?;
        let mut bias = vec![0.0; 4 * h];
        bias[h..2 * h].iter_mut().for_each(|x| *x = 1.0);
        store.insert(&b, &[4 * h], bias)?;
    }
    Ok(())
}

fn lstm_pass(g: &mut Graph, store: &ParamStore, dir: &str, inputs: Var, order: &[usize]) -> Result<Vec<Var>> {
    let [w, u, b] = lstm_names(dir);
    let w = g.param(store, &w)?;
    let u = g.param(store, &u)?;
    let b = g.param(store, &b)?;
    let h_size = g.value(u).rows;
    let projected = g.matmul(inputs, w);
    let mut states = vec![None; order.len()];
    let mut h_prev: Option<Var> = None;
    let mut c_prev: Option<Var> = None;
    for &t in order {
        let x_t = g.slice(projected, t, 0, 1, 4 * h_size);
        let mut z = g.add(x_t, b);
        if let Some(h) = h_prev {
            let rec = g.matmul(h, u);
            z = g.add(z, rec);
        }
        let zi = g.slice(z, 0, 0, 1, h_size);
        let zf = g.slice(z, 0, h_size, 1, h_size);
        let zg = g.slice(z, 0, 2 * h_size, 1, h_size);
        let zo = g.slice(z, 0, 3 * h_size, 1, h_size);
        let i = g.sigmoid(zi);
        let f = g.sigmoid(zf);
        let cand = g.tanh(zg);
        let o = g.sigmoid(zo);
        let fresh = g.mul(i, cand);
        let c = match c_prev {
            Some(c_prev) => {
                let kept = g.mul(f, c_prev);
                g.add(kept, fresh)
            }
            None => fresh,
        };
        let c_act = g.tanh(c);
        let h = g.mul(o, c_act);
        states[t] = Some(h);
        h_prev = Some(h);
        c_prev = Some(c);
    }
    Ok(states.into_iter().map(|s| s.expect("every step visited")).collect())
}

/// Forward and backward hidden states (each 1×d) for every real token,
/// indexed by token position. Tokens beyond `max_tokens` are dropped.
pub fn bilstm(g: &mut Graph, store: &ParamStore, cfg: &EncoderConfig, token_ids: &[usize]) -> Result<(Vec<Var>, Vec<Var>)> {
    if token_ids.is_empty() {
        return Err(Error::EmptySentence);
    }
    let ids = &token_ids[..token_ids.len().min(cfg.max_tokens)];
    let inputs = g.lookup(store, EMBEDDING, ids)?;
    let forward_order: Vec<usize> = (0..ids.len()).collect();
    let backward_order: Vec<usize> = (0..ids.len()).rev().collect();
    let fw = lstm_pass(g, store, "fw", inputs, &forward_order)?;
    let bw = lstm_pass(g, store, "bw", inputs, &backward_order)?;
    Ok((fw, bw))
}

/// Attention pooling: softmax(W·Hᵀ) row-wise over the m rows of `h`,
/// then the mean over the k context vectors.
pub fn attention_pool(g: &mut Graph, weights: Var, h: Var) -> Var {
    let ht = g.transpose(h);
    let logits = g.matmul(weights, ht);
    let attn = g.softmax_rows(logits);
    let context = g.matmul(attn, h);
    g.mean_rows(context)
}

/// ReLU(W · mean(E_s) + b) with the mean taken as a row vector.
pub fn simple_doc_embedding(g: &mut Graph, store: &ParamStore, sentences: &[SentenceEmbedding]) -> Result<Var> {
    let rows: Vec<Var> = sentences.iter().map(|s| s.vector).collect();
    let stacked = g.concat_rows(&rows);
    let mean = g.mean_rows(stacked);
    let w = g.param(store, DOC_W)?;
    let b = g.param(store, DOC_B)?;
    // row-vector convention: (W·m)ᵀ = m·Wᵀ
    let wt = g.transpose(w);
    let affine = g.matmul(mean, wt);
    let shifted = g.add(affine, b);
    Ok(g.relu(shifted))
}

/// Sentence-level attention with its own k×2d matrix.
pub fn attention_doc_embedding(g: &mut Graph, store: &ParamStore, sentences: &[SentenceEmbedding]) -> Result<Var> {
    let rows: Vec<Var> = sentences.iter().map(|s| s.vector).collect();
    let stacked = g.concat_rows(&rows);
    let w = g.param(store, ATTN_SENT)?;
    Ok(attention_pool(g, w, stacked))
}

/// Final BiLSTM states: forward at the last token, backward at the first.
pub struct SimpleEncoder;

impl EncoderStrategy for SimpleEncoder {
    fn name(&self) -> &'static str {
        "simple"
    }

    fn init_params(&self, store: &mut ParamStore, cfg: &EncoderConfig, rng: &mut dyn rand::RngCore) -> Result<()> {
        let width = cfg.width();
        store.insert(DOC_W, &[width, width], xavier_uniform(rng, width, width, width * width))?;
        store.insert_zeros(DOC_B, &[width])?;
        Ok(())
    }

    fn encode_sentence(
        &self,
        g: &mut Graph,
        store: &ParamStore,
        cfg: &EncoderConfig,
        token_ids: &[usize],
    ) -> Result<SentenceEmbedding> {
        let (fw, bw) = bilstm(g, store, cfg, token_ids)?;
        let last = *fw.last().expect("non-empty");
        let vector = g.concat_cols(&[last, bw[0]]);
        Ok(SentenceEmbedding { vector, hidden: None })
    }

    fn encode_document(&self, g: &mut Graph, store: &ParamStore, sentences: &[SentenceEmbedding]) -> Result<Var> {
        simple_doc_embedding(g, store, sentences)
    }
}

/// Word-level and sentence-level self-attention.
pub struct AttentionEncoder;

impl EncoderStrategy for AttentionEncoder {
    fn name(&self) -> &'static str {
        "attention"
    }

    fn init_params(&self, store: &mut ParamStore, cfg: &EncoderConfig, rng: &mut dyn rand::RngCore) -> Result<()> {
        let (k, width) = (cfg.k, cfg.width());
        store.insert(ATTN_WORD, &[k, width], xavier_uniform(rng, width, k, k * width))?;
        store.insert(ATTN_SENT, &[k, width], xavier_uniform(rng, width, k, k * width))?;
        Ok(())
    }

    fn encode_sentence(
        &self,
        g: &mut Graph,
        store: &ParamStore,
        cfg: &EncoderConfig,
        token_ids: &[usize],
    ) -> Result<SentenceEmbedding> {
        let (fw, bw) = bilstm(g, store, cfg, token_ids)?;
        let fw = g.concat_rows(&fw);
        let bw = g.concat_rows(&bw);
        let hidden = g.concat_cols(&[fw, bw]);
        let w = g.param(store, ATTN_WORD)?;
        let vector = attention_pool(g, w, hidden);
        Ok(SentenceEmbedding {
            vector,
            hidden: Some(hidden),
        })
    }

    fn encode_document(&self, g: &mut Graph, store: &ParamStore, sentences: &[SentenceEmbedding]) -> Result<Var> {
        attention_doc_embedding(g, store, sentences)
    }
}

/// Convenience for tests and inspection: a constant row vector node.
pub fn constant_sentence(g: &mut Graph, values: Vec<f64>) -> SentenceEmbedding {
    SentenceEmbedding {
        vector: g.constant(Matrix::row_vector(values)),
        hidden: None,
    }
}
