//! Training, evaluation and end-to-end orchestration.

mod config;
mod eval;
mod model;
mod train;

pub use config::{SplitSpec, TrainConfig};
pub use eval::{
    auc, evaluate, evaluate_checkpoint, evaluate_scores, pad_scores, random_scores, selection_rouge, split_corpus,
    DocRouge, EvalReport, LabelCache, Splits,
};
pub use model::Model;
pub use train::{
    deck_for_document, init_model, run_pipeline, train, train_step, train_with_model, EpochLog, LabelSource,
    PipelineReport, TrainReport,
};
