//! Text processing and file I/O: tokenization, sentence splitting,
//! vocabularies, pretrained embeddings and the JSON document/slide formats.

mod embeddings;
mod format;
mod text;
mod vocab;

pub use embeddings::{load_embeddings, random_row, stable_hash, EmbeddingMatrix};
pub use format::{
    load_corpus, parse_document, parse_slides, read_document, read_slides, serialize_document,
    serialize_slides, CorpusPair,
};
pub use text::{split_sentences, tokenize, TOKENIZER_VERSION};
pub use vocab::{build_vocab, Vocab, PAD, UNK};
