//! Extractive slide generation for scientific papers.
//!
//! Stages: oracle labeling against reference slides ([`labeler`]), a
//! recurrent sentence/document encoder ([`encoder`]) feeding a sequential
//! ranker ([`ranker`]), budgeted sentence selection ([`selector`]) and
//! two-level slide assembly ([`slidegen`]). [`pipeline`] wires them into
//! training, evaluation and end-to-end runs.

pub mod docmodel;
pub mod encoder;
pub mod error;
pub mod ingest;
pub mod labeler;
pub mod neuralcore;
pub mod pipeline;
pub mod ranker;
pub mod rouge;
pub mod selector;
pub mod slidegen;

pub use docmodel::{Document, LabelVector, ReferenceSlides, ScoreVector, Section, Sentence, Token};
pub use error::{Error, Result};
