use std::fs;
use std::path::Path;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use super::vocab::{Vocab, PAD};
use crate::error::{Error, Result};

/// One row of `dim` values per vocabulary id, row-major.
#[derive(Debug, Clone, PartialEq)]
pub struct EmbeddingMatrix {
    pub dim: usize,
    pub data: Vec<f64>,
}

impl EmbeddingMatrix {
    pub fn rows(&self) -> usize {
        self.data.len().checked_div(self.dim).unwrap_or(0)
    }

    pub fn row(&self, id: usize) -> &[f64] {
        &self.data[id * self.dim..(id + 1) * self.dim]
    }

    /// Seeded-hash rows for every token and a zero PAD row.
    pub fn random(vocab: &Vocab, dim: usize) -> Self {
        let mut data = Vec::with_capacity(vocab.len() * dim);
        for (id, token) in vocab.tokens().iter().enumerate() {
            if id == PAD {
                data.extend(std::iter::repeat_n(0.0, dim));
            } else {
                data.extend(random_row(token, dim));
            }
        }
        EmbeddingMatrix { dim, data }
    }
}

/// 64-bit FNV-1a; stable across platforms and releases.
pub fn stable_hash(token: &str) -> u64 {
    const OFFSET: u64 = 0xcbf2_9ce4_8422_2325;
    const PRIME: u64 = 0x0000_0100_0000_01b3;
    token
        .bytes()
        .fold(OFFSET, |h, b| (h ^ u64::from(b)).wrapping_mul(PRIME))
}

/// Uniform values in [-0.1, 0.1] seeded by the token's stable hash.
pub fn random_row(token: &str, dim: usize) -> Vec<f64> {
    let mut rng = ChaCha8Rng::seed_from_u64(stable_hash(token));
    (0..dim).map(|_| rng.gen_range(-0.1..=0.1)).collect()
}

/// Reads a `token v1 .. vd` text file. Vocabulary tokens absent from the
/// file get seeded random rows; the PAD row stays zero.
pub fn load_embeddings(path: impl AsRef<Path>, vocab: &Vocab, dim: usize) -> Result<EmbeddingMatrix> {
    let text = fs::read_to_string(path)?;
    let mut matrix = EmbeddingMatrix::random(vocab, dim);
    for (lineno, line) in text.lines().enumerate() {
        let mut fields = line.split_whitespace();
        let Some(token) = fields.next() else { continue };
        let values: Vec<&str> = fields.collect();
        if values.len() != dim {
            return Err(Error::DimensionMismatch {
                line: lineno + 1,
                expected: dim,
                found: values.len(),
            });
        }
        let id = vocab.id(token);
        if vocab.token(id) != Some(token) || id == PAD {
            continue;
        }
        let row = &mut matrix.data[id * dim..(id + 1) * dim];
        for (slot, raw) in row.iter_mut().zip(values) {
            let value: f64 = raw.parse().map_err(|_| {
                Error::MalformedInput(format!("line {}: bad number {raw:?}", lineno + 1))
            })?;
            if !value.is_finite() {
                return Err(Error::MalformedInput(format!(
                    "line {}: non-finite value",
                    lineno + 1
                )));
            }
            *slot = value;
        }
    }
    Ok(matrix)
}

#[cfg(test)]
mod tests {
    use super::*;
    use std::io::Write;

    fn write_tmp(content: &str) -> tempfile::NamedTempFile {
        let mut file = tempfile::NamedTempFile::new().unwrap();
        file.write_all(content.as_bytes()).unwrap();
        file
    }

    #[test]
    fn file_rows_are_copied() {
        let values: Vec<String> = (0..50).map(|i| format!("{}", i as f64 / 100.0)).collect();
        let file = write_tmp(&format!("cat {}\nother {}\n", values.join(" "), values.join(" ")));
        let vocab = Vocab::from_tokens(["cat", "dog"]);
        let m = load_embeddings(file.path(), &vocab, 50).unwrap();
        let expected: Vec<f64> = (0..50).map(|i| i as f64 / 100.0).collect();
        assert_eq!(m.row(vocab.id("cat")), expected.as_slice());
        assert!(m.row(PAD).iter().all(|&v| v == 0.0));
        assert_eq!(m.rows(), vocab.len());
    }

    #[test]
    fn missing_tokens_are_reproducible() {
        let file = write_tmp("cat 0.5 0.5 0.5\n");
        let vocab = Vocab::from_tokens(["cat", "dog"]);
        let a = load_embeddings(file.path(), &vocab, 3).unwrap();
        let b = load_embeddings(file.path(), &vocab, 3).unwrap();
        let dog = vocab.id("dog");
        assert_eq!(a.row(dog), b.row(dog));
        assert!(a.row(dog).iter().all(|v| (-0.1..=0.1).contains(v)));
        assert_ne!(a.row(dog), a.row(vocab.id("<unk>")));
    }

    #[test]
    fn short_line_is_dimension_mismatch() {
        let values: Vec<String> = (0..49).map(|_| "0.1".to_string()).collect();
        let file = write_tmp(&format!("cat {}\n", values.join(" ")));
        let vocab = Vocab::from_tokens(["cat"]);
        let err = load_embeddings(file.path(), &vocab, 50).unwrap_err();
        assert!(matches!(
            err,
            Error::DimensionMismatch {
                line: 1,
                expected: 50,
                found: 49
            }
        ));
    }

    #[test]
    fn missing_file_is_io_error() {
        let vocab = Vocab::from_tokens(["cat"]);
        let err = load_embeddings("/nonexistent/embeddings.txt", &vocab, 3).unwrap_err();
        assert!(matches!(err, Error::Io(_)));
    }

    #[test]
    fn fnv_reference_values() {
        assert_eq!(stable_hash(""), 0xcbf29ce484222325);
        assert_eq!(stable_hash("a"), 0xaf63dc4c8601ec8c);
    }
}
