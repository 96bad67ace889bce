mod common;

use deckgen::docmodel::{Document, LabelVector, SentenceDraft};
use deckgen::encoder::EncoderConfig;
use deckgen::error::Error;
use deckgen::ingest::build_vocab;
use deckgen::labeler::{label_document, WindowConfig};
use deckgen::pipeline::{
    evaluate_checkpoint, train, train_with_model, LabelSource, Model, SplitSpec, TrainConfig,
};
use deckgen::selector::{ExactSelector, GreedySelector};

fn small(epochs: usize, seed: u64) -> TrainConfig {
    TrainConfig {
        epochs,
        encoder: EncoderConfig {
            d: 8,
            k: 4,
            max_tokens: 50,
            max_sentences: 50,
            mode: "simple".into(),
        },
        seed,
        ..TrainConfig::default()
    }
}

#[test]
fn loss_falls_below_a_fifth_of_the_first_epoch() {
    let corpus = common::overfit_corpus(21);
    let labels: Vec<LabelVector> = corpus
        .iter()
        .map(|p| label_document(&p.doc, &p.slides, &WindowConfig::default()).unwrap().labels)
        .collect();
    let dir = tempfile::tempdir().unwrap();
    let report = train(&corpus, &small(200, 3), LabelSource::Given(&labels), &dir.path().join("m")).unwrap();
    let first = report.epochs[0].mean_loss;
    let last = report.epochs.last().unwrap().mean_loss;
    assert!(last < 0.2 * first, "{first} -> {last}");
}

#[test]
fn saved_checkpoint_is_at_least_as_good_as_epoch_one() {
    let corpus = common::overfit_corpus(22);
    let dir = tempfile::tempdir().unwrap();
    let path = dir.path().join("m.ckpt");
    let cfg = small(30, 4);
    let report = train(&corpus, &cfg, LabelSource::Oracle, &path).unwrap();
    let best = report.epochs[report.best_epoch - 1].validation_r1;
    assert!(best >= report.epochs[0].validation_r1);
    assert!(report.epochs.iter().all(|e| e.validation_r1 <= best));
    let reevaluated = evaluate_checkpoint(&path, &corpus, &ExactSelector, cfg.fraction).unwrap();
    assert!((reevaluated.mean.r1 - best).abs() < 0.05, "{} vs {best}", reevaluated.mean.r1);
}

#[test]
fn evaluation_is_a_pure_function_of_its_inputs() {
    let corpus = common::fixture_corpus();
    let dir = tempfile::tempdir().unwrap();
    let path = dir.path().join("m.ckpt");
    train(&corpus, &small(2, 5), LabelSource::Oracle, &path).unwrap();
    for selector in [&ExactSelector as &dyn deckgen::selector::Selector, &GreedySelector::default()] {
        let a = evaluate_checkpoint(&path, &corpus, selector, 0.2).unwrap();
        let b = evaluate_checkpoint(&path, &corpus, selector, 0.2).unwrap();
        assert_eq!(a, b);
    }
}

#[test]
fn zero_epochs_is_a_configuration_error() {
    let corpus = common::overfit_corpus(23);
    let dir = tempfile::tempdir().unwrap();
    let err = train(&corpus, &small(0, 1), LabelSource::Oracle, &dir.path().join("m")).unwrap_err();
    assert!(matches!(err, Error::InvalidConfig(_)));
}

#[test]
fn empty_corpus_is_rejected() {
    let dir = tempfile::tempdir().unwrap();
    let err = train(&[], &small(1, 1), LabelSource::Oracle, &dir.path().join("m")).unwrap_err();
    assert!(matches!(err, Error::EmptyCorpus));
}

#[test]
fn splits_keep_validation_out_of_training() {
    let corpus = common::overfit_corpus(24);
    let dir = tempfile::tempdir().unwrap();
    let cfg = TrainConfig {
        split: SplitSpec::Counts {
            train: 6,
            validation: 2,
            test: 2,
        },
        ..small(2, 1)
    };
    let (_, model) = train_with_model(&corpus, &cfg, LabelSource::Oracle, &dir.path().join("m")).unwrap();
    let train_docs: Vec<Document> = corpus[..6].iter().map(|p| p.doc.clone()).collect();
    assert_eq!(model.vocab, build_vocab(&train_docs, 1));
}

#[test]
fn documents_past_the_position_limit_are_truncated() {
    let drafts: Vec<SentenceDraft> = (0..501)
        .map(|i| SentenceDraft::from_text(&format!("Sentence {i} says something.")))
        .collect();
    let doc = Document::build("long", "", vec![("Body".into(), drafts)]).unwrap();
    let cfg = EncoderConfig {
        d: 2,
        k: 2,
        ..EncoderConfig::default()
    };
    let model = Model::init(cfg, build_vocab(std::slice::from_ref(&doc), 1), None, 1).unwrap();
    let scores = model.predict(&doc).unwrap();
    assert_eq!(scores.len(), 500);
    assert_eq!(model.predict(&doc).unwrap(), scores);
}
