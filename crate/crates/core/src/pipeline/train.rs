//! Training loop and end-to-end orchestration.

use std::fs;
use std::path::{Path, PathBuf};
use std::time::Instant;

use rand::seq::SliceRandom;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use super::config::TrainConfig;
use super::eval::{evaluate, split_corpus, EvalReport, LabelCache};
use super::model::Model;
use crate::docmodel::{Document, LabelVector};
use crate::error::{Error, Result};
use crate::ingest::{build_vocab, load_embeddings, CorpusPair};
use crate::neuralcore::{adadelta_step, clip_gradients, Graph};
use crate::selector::{selected_sentences, Selector, SelectorRegistry};
use crate::slidegen::{build_deck, render, DfIndex, RenderFormat, SlideDeck, Tagger};

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct EpochLog {
    pub epoch: usize,
    pub mean_loss: f64,
    pub validation_r1: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TrainReport {
    pub checkpoint: PathBuf,
    pub epochs: Vec<EpochLog>,
    pub best_epoch: usize,
    pub seconds: f64,
}

/// Where labels for training come from.
pub enum LabelSource<'a> {
    /// Computed from the reference slides with the configured window.
    Oracle,
    /// Computed once and kept in the given cache file.
    Cached(&'a Path),
    /// Supplied by the caller, one vector per corpus pair.
    Given(&'a [LabelVector]),
}

fn corpus_labels(corpus: &[CorpusPair], cfg: &TrainConfig, source: LabelSource<'_>) -> Result<Vec<LabelVector>> {
    match source {
        LabelSource::Oracle => LabelCache::default().labels_for(corpus, &cfg.window),
        LabelSource::Cached(path) => {
            let mut cache = LabelCache::open(path)?;
            let labels = cache.labels_for(corpus, &cfg.window)?;
            cache.save(path)?;
            Ok(labels)
        }
        LabelSource::Given(labels) => {
            if labels.len() != corpus.len() {
                return Err(Error::LengthMismatch {
                    left: labels.len(),
                    right: corpus.len(),
                });
            }
            Ok(labels.to_vec())
        }
    }
}

fn pick<T: Clone>(items: &[T], idx: &[usize]) -> Vec<T> {
    idx.iter().map(|&i| items[i].clone()).collect()
}

/// Builds a freshly initialized model whose vocabulary covers `docs`.
pub fn init_model(docs: &[Document], cfg: &TrainConfig) -> Result<Model> {
    let vocab = build_vocab(docs, cfg.min_count);
    let embeddings = match &cfg.embeddings {
        Some(path) => Some(load_embeddings(path, &vocab, cfg.encoder.d)?),
        None => None,
    };
    Model::init(cfg.encoder.clone(), vocab, embeddings, cfg.seed)
}

/// One optimizer step on one document; returns the loss before the update.
pub fn train_step(model: &mut Model, doc: &Document, labels: &LabelVector, cfg: &TrainConfig) -> Result<f64> {
    let mut g = Graph::new();
    let loss = model.loss(&mut g, doc, labels, &cfg.loss)?;
    let value = g.value(loss).item();
    if !value.is_finite() {
        return Err(Error::NonFiniteLoss(value));
    }
    g.backward(loss, &mut model.store);
    if let Some(max_norm) = cfg.clip_norm {
        clip_gradients(&mut model.store, max_norm);
    }
    adadelta_step(&mut model.store, &cfg.optimizer);
    Ok(value)
}

/// Trains on the train split and writes the checkpoint with the best
/// validation ROUGE-1 recall to `checkpoint`. With no validation
/// documents the training documents stand in.
pub fn train(corpus: &[CorpusPair], cfg: &TrainConfig, labels: LabelSource<'_>, checkpoint: &Path) -> Result<TrainReport> {
    train_with_model(corpus, cfg, labels, checkpoint).map(|(report, _)| report)
}

/// [`train`] that also returns the final in-memory model.
pub fn train_with_model(
    corpus: &[CorpusPair],
    cfg: &TrainConfig,
    labels: LabelSource<'_>,
    checkpoint: &Path,
) -> Result<(TrainReport, Model)> {
    cfg.validate()?;
    if corpus.is_empty() {
        return Err(Error::EmptyCorpus);
    }
    let started = Instant::now();
    let splits = split_corpus(corpus, &cfg.split)?;
    if splits.train.is_empty() {
        return Err(Error::EmptyCorpus);
    }
    let labels = corpus_labels(corpus, cfg, labels)?;
    let train_pairs = pick(corpus, &splits.train);
    let train_labels = pick(&labels, &splits.train);
    let validation = if splits.validation.is_empty() {
        log::info!("no validation documents; validating on the training set");
        train_pairs.clone()
    } else {
        pick(corpus, &splits.validation)
    };
    let selector: std::sync::Arc<dyn Selector> = SelectorRegistry::default().get(&cfg.method)?;

    let docs: Vec<Document> = train_pairs.iter().map(|p| p.doc.clone()).collect();
    let mut model = init_model(&docs, cfg)?;
    let mut rng = ChaCha8Rng::seed_from_u64(cfg.seed);
    let mut order: Vec<usize> = (0..train_pairs.len()).collect();
    let mut epochs = Vec::with_capacity(cfg.epochs);
    let mut best: Option<(f64, usize)> = None;

    for epoch in 1..=cfg.epochs {
        order.shuffle(&mut rng);
        let mut total = 0.0;
        for &i in &order {
            total += train_step(&mut model, &train_pairs[i].doc, &train_labels[i], cfg)?;
        }
        let mean_loss = total / order.len() as f64;
        let validation_r1 = evaluate(&model, &validation, selector.as_ref(), cfg.fraction)?.mean.r1;
        log::info!("epoch {epoch}: mean loss {mean_loss:.4}, validation R-1 {validation_r1:.4}");
        epochs.push(EpochLog {
            epoch,
            mean_loss,
            validation_r1,
        });
        if best.is_none_or(|(r1, _)| validation_r1 > r1) {
            best = Some((validation_r1, epoch));
            model.save(checkpoint)?;
        }
    }
    let report = TrainReport {
        checkpoint: checkpoint.to_path_buf(),
        epochs,
        best_epoch: best.map_or(1, |(_, e)| e),
        seconds: started.elapsed().as_secs_f64(),
    };
    Ok((report, model))
}

/// Selects sentences for `doc` and assembles its deck.
pub fn deck_for_document(
    doc: &Document,
    scores: &crate::docmodel::ScoreVector,
    selector: &dyn Selector,
    fraction: f64,
    df_index: Option<&DfIndex>,
    tagger: &Tagger,
) -> Result<SlideDeck> {
    let scores = super::eval::pad_scores(scores, doc.n());
    let decision = crate::selector::select_for_document(doc, &scores, selector, fraction)?;
    let selected = selected_sentences(doc, &decision)?;
    build_deck(&selected, doc, df_index, tagger)
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PipelineReport {
    pub train: TrainReport,
    /// ROUGE of the generated decks on the evaluated documents.
    pub decks: EvalReport,
    pub deck_files: Vec<PathBuf>,
}

/// Labels, trains, and writes one Markdown and one JSON deck per
/// evaluated document into `out_dir`. Evaluated documents are the test
/// split, or the whole corpus when the split has no test documents.
pub fn run_pipeline(
    corpus: &[CorpusPair],
    cfg: &TrainConfig,
    out_dir: &Path,
    df_index: Option<&DfIndex>,
) -> Result<PipelineReport> {
    fs::create_dir_all(out_dir)?;
    let checkpoint = out_dir.join("model.ckpt");
    let cache_path = out_dir.join("label_cache.jsonl");
    let train = train(corpus, cfg, LabelSource::Cached(&cache_path), &checkpoint)?;
    let model = Model::load(&checkpoint)?;
    let splits = split_corpus(corpus, &cfg.split)?;
    let targets = if splits.test.is_empty() {
        corpus.to_vec()
    } else {
        pick(corpus, &splits.test)
    };
    let selector = SelectorRegistry::default().get(&cfg.method)?;
    let tagger = Tagger::default();
    let decks_dir = out_dir.join("decks");
    fs::create_dir_all(&decks_dir)?;
    let mut deck_files = Vec::new();
    let mut per_doc = Vec::new();
    for pair in &targets {
        let scores = model.predict(&pair.doc)?;
        let deck = deck_for_document(&pair.doc, &scores, selector.as_ref(), cfg.fraction, df_index, &tagger)?;
        let summary: Vec<_> = deck
            .slides
            .iter()
            .flat_map(|s| s.items.iter().map(|it| it.sentence.tokens.clone()))
            .collect();
        per_doc.push(super::eval::DocRouge {
            id: pair.doc.id.clone(),
            rouge: crate::rouge::summary_recall(&summary, &pair.slides),
        });
        for (format, ext) in [(RenderFormat::Markdown, "md"), (RenderFormat::Json, "json")] {
            let path = decks_dir.join(format!("{}.{ext}", pair.doc.id));
            fs::write(&path, render(&deck, format)?)?;
            deck_files.push(path);
        }
    }
    let mean = crate::rouge::mean_recall(&per_doc.iter().map(|d| d.rouge).collect::<Vec<_>>());
    let report = PipelineReport {
        train,
        decks: EvalReport { per_doc, mean },
        deck_files,
    };
    fs::write(out_dir.join("report.json"), serde_json::to_vec_pretty(&report)?)?;
    Ok(report)
}
