//! Encoder plus ranker bound to a vocabulary, with checkpoint I/O.

use std::path::Path;
use std::sync::Arc;

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::docmodel::{Document, LabelVector, ScoreVector};
use crate::encoder::{init_shared_params, EncoderConfig, EncoderRegistry, EncoderStrategy};
use crate::error::{Error, Result};
use crate::ingest::{EmbeddingMatrix, Vocab, TOKENIZER_VERSION};
use crate::neuralcore::{load_checkpoint, load_checkpoint_into, save_checkpoint, Graph, ParamStore, Var};
use crate::ranker::{
    init_ranker_params, probabilities, score_sentences, weighted_loss_on_tape, LossWeights, ScoreTerms,
};

/// Model description stored in the checkpoint header.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
struct ModelHeader {
    encoder: EncoderConfig,
    vocab_size: usize,
    max_positions: usize,
    tokenizer: String,
    vocab: Vocab,
}

pub struct Model {
    pub config: EncoderConfig,
    pub vocab: Vocab,
    pub store: ParamStore,
    strategy: Arc<dyn EncoderStrategy>,
}

impl std::fmt::Debug for Model {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.debug_struct("Model")
            .field("config", &self.config)
            .field("vocab_size", &self.vocab.len())
            .field("params", &self.store.len())
            .finish()
    }
}

impl Model {
    /// Fresh parameters drawn from a generator seeded with `seed`. Missing
    /// `embeddings` fall back to hash-seeded random rows.
    pub fn init(config: EncoderConfig, vocab: Vocab, embeddings: Option<EmbeddingMatrix>, seed: u64) -> Result<Self> {
        config.validate()?;
        let strategy = EncoderRegistry::default().get(&config.mode)?;
        let embeddings = embeddings.unwrap_or_else(|| EmbeddingMatrix::random(&vocab, config.d));
        if embeddings.dim != config.d || embeddings.rows() != vocab.len() {
            return Err(Error::ShapeMismatch(format!(
                "embedding matrix is {}x{}, model needs {}x{}",
                embeddings.rows(),
                embeddings.dim,
                vocab.len(),
                config.d
            )));
        }
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let mut store = ParamStore::new();
        init_shared_params(&mut store, &config, embeddings.data, vocab.len(), &mut rng)?;
        strategy.init_params(&mut store, &config, &mut rng)?;
        init_ranker_params(&mut store, config.width(), config.max_sentences, &mut rng)?;
        Ok(Model {
            config,
            vocab,
            store,
            strategy,
        })
    }

    pub fn strategy_name(&self) -> &'static str {
        self.strategy.name()
    }

    /// Number of leading sentences the model scores.
    pub fn scored_len(&self, doc: &Document) -> usize {
        doc.n().min(self.config.max_sentences)
    }

    /// Builds the scoring graph for the first `scored_len(doc)` sentences.
    pub fn forward(&self, g: &mut Graph, doc: &Document) -> Result<Vec<ScoreTerms>> {
        let n = self.scored_len(doc);
        let mut sentences = Vec::with_capacity(n);
        for sentence in doc.sentences().take(n) {
            let ids = self.vocab.ids_of(&sentence.tokens);
            sentences.push(self.strategy.encode_sentence(g, &self.store, &self.config, &ids)?);
        }
        let doc_vec = self.strategy.encode_document(g, &self.store, &sentences)?;
        score_sentences(g, &self.store, &sentences, doc_vec)
    }

    /// Weighted loss node over the scored prefix of `labels`.
    pub fn loss(&self, g: &mut Graph, doc: &Document, labels: &LabelVector, weights: &LossWeights) -> Result<Var> {
        if labels.len() != doc.n() {
            return Err(Error::LengthMismatch {
                left: labels.len(),
                right: doc.n(),
            });
        }
        let terms = self.forward(g, doc)?;
        let prefix = LabelVector(labels.0[..terms.len()].to_vec());
        weighted_loss_on_tape(g, &terms, &prefix, weights)
    }

    /// Scores for the first `max_sentences` sentences; longer documents are
    /// truncated with a warning.
    pub fn predict(&self, doc: &Document) -> Result<ScoreVector> {
        if doc.n() > self.config.max_sentences {
            log::warn!(
                "document `{}` has {} sentences; scoring the first {}",
                doc.id,
                doc.n(),
                self.config.max_sentences
            );
        }
        let mut g = Graph::new();
        let terms = self.forward(&mut g, doc)?;
        Ok(probabilities(&g, &terms))
    }

    fn header(&self) -> Result<serde_json::Value> {
        Ok(serde_json::to_value(ModelHeader {
            encoder: self.config.clone(),
            vocab_size: self.vocab.len(),
            max_positions: self.config.max_sentences,
            tokenizer: TOKENIZER_VERSION.into(),
            vocab: self.vocab.clone(),
        })?)
    }

    pub fn save(&self, path: impl AsRef<Path>) -> Result<()> {
        save_checkpoint(&self.store, &self.header()?, path)
    }

    /// Rebuilds a model from a checkpoint.
    pub fn load(path: impl AsRef<Path>) -> Result<Self> {
        let (store, header) = load_checkpoint(path)?;
        let header: ModelHeader = serde_json::from_value(header)
            .map_err(|e| Error::ShapeMismatch(format!("checkpoint model header: {e}")))?;
        if header.tokenizer != TOKENIZER_VERSION {
            log::warn!(
                "checkpoint tokenizer `{}` differs from `{TOKENIZER_VERSION}`",
                header.tokenizer
            );
        }
        let mut model = Model::init(header.encoder, header.vocab, None, 0)?;
        for (name, param) in model.store.iter_mut() {
            let loaded = store
                .get(name)
                .ok_or_else(|| Error::ShapeMismatch(format!("checkpoint lacks `{name}`")))?;
            if loaded.shape != param.shape {
                return Err(Error::ShapeMismatch(format!(
                    "`{name}` is {:?} in the checkpoint, expected {:?}",
                    loaded.shape, param.shape
                )));
            }
            param.value.clone_from(&loaded.value);
        }
        if store.len() != model.store.len() {
            return Err(Error::ShapeMismatch("checkpoint has unexpected parameters".into()));
        }
        Ok(model)
    }

    /// Loads checkpoint values into this model's existing parameters; the
    /// shapes must agree.
    pub fn load_weights(&mut self, path: impl AsRef<Path>) -> Result<()> {
        load_checkpoint_into(path, &mut self.store)?;
        Ok(())
    }
}
