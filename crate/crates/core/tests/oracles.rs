//! Independent scalar recomputations of the encoder and ranker forward
//! passes, compared against the tape implementation.

use deckgen::encoder::{
    init_shared_params, EncoderConfig, EncoderRegistry, ATTN_SENT, ATTN_WORD, DOC_B, DOC_W, EMBEDDING,
};
use deckgen::neuralcore::{Graph, ParamStore};
use deckgen::ranker::{
    init_ranker_params, probabilities, score_sentences, POSITION_TABLE, W_CONTENT, W_NOVELTY, W_POS, W_SALIENCE,
};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

const TOL: f64 = 1e-10;

fn sigmoid(x: f64) -> f64 {
    1.0 / (1.0 + (-x).exp())
}

/// Row-major parameter accessor.
struct P<'a> {
    v: &'a [f64],
    cols: usize,
}

impl P<'_> {
    fn at(&self, r: usize, c: usize) -> f64 {
        self.v[r * self.cols + c]
    }
}

fn param<'a>(store: &'a ParamStore, name: &str) -> P<'a> {
    let p = store.get(name).unwrap();
    let cols = if p.shape.len() == 1 { p.shape[0] } else { p.shape[1..].iter().product() };
    P { v: &p.value, cols }
}

/// Replaces every parameter with seeded values in [-0.8, 0.8].
fn randomize(store: &mut ParamStore, seed: u64) {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    for (_, p) in store.iter_mut() {
        for v in p.value.iter_mut() {
            *v = rng.gen_range(-0.8..0.8);
        }
    }
}

/// One LSTM direction over `xs` in the given order; returns h per position.
fn scalar_lstm(store: &ParamStore, dir: &str, xs: &[Vec<f64>], order: &[usize], h: usize) -> Vec<Vec<f64>> {
    let w = param(store, &format!("lstm.{dir}.w"));
    let u = param(store, &format!("lstm.{dir}.u"));
    let b = param(store, &format!("lstm.{dir}.b"));
    let d = xs[0].len();
    let mut hs = vec![vec![0.0; h]; xs.len()];
    let mut h_prev = vec![0.0; h];
    let mut c_prev = vec![0.0; h];
    for &t in order {
        let z: Vec<f64> = (0..4 * h)
            .map(|j| {
                let mut s = b.at(0, j);
                for i in 0..d {
                    s += xs[t][i] * w.at(i, j);
                }
                for i in 0..h {
                    s += h_prev[i] * u.at(i, j);
                }
                s
            })
            .collect();
        let mut h_new = vec![0.0; h];
        let mut c_new = vec![0.0; h];
        for j in 0..h {
            let gi = sigmoid(z[j]);
            let gf = sigmoid(z[h + j]);
            let gc = z[2 * h + j].tanh();
            let go = sigmoid(z[3 * h + j]);
            c_new[j] = gf * c_prev[j] + gi * gc;
            h_new[j] = go * c_new[j].tanh();
        }
        hs[t] = h_new.clone();
        h_prev = h_new;
        c_prev = c_new;
    }
    hs
}

fn scalar_hidden(store: &ParamStore, ids: &[usize], d: usize) -> Vec<Vec<f64>> {
    let emb = param(store, EMBEDDING);
    let xs: Vec<Vec<f64>> = ids.iter().map(|&id| (0..d).map(|j| emb.at(id, j)).collect()).collect();
    let fwd: Vec<usize> = (0..ids.len()).collect();
    let bwd: Vec<usize> = (0..ids.len()).rev().collect();
    let fw = scalar_lstm(store, "fw", &xs, &fwd, d);
    let bw = scalar_lstm(store, "bw", &xs, &bwd, d);
    fw.into_iter().zip(bw).map(|(f, b)| [f, b].concat()).collect()
}

fn scalar_attention(weights: &P<'_>, k: usize, h: &[Vec<f64>]) -> Vec<f64> {
    let width = h[0].len();
    let mut out = vec![0.0; width];
    for r in 0..k {
        let logits: Vec<f64> = h
            .iter()
            .map(|row| (0..width).map(|c| weights.at(r, c) * row[c]).sum())
            .collect();
        let max = logits.iter().cloned().fold(f64::NEG_INFINITY, f64::max);
        let exps: Vec<f64> = logits.iter().map(|l| (l - max).exp()).collect();
        let total: f64 = exps.iter().sum();
        for (row, e) in h.iter().zip(&exps) {
            for c in 0..width {
                out[c] += e / total * row[c] / k as f64;
            }
        }
    }
    out
}

fn setup(mode: &str, d: usize, k: usize, vocab: usize, seed: u64) -> (ParamStore, EncoderConfig) {
    let cfg = EncoderConfig {
        d,
        k,
        max_tokens: 50,
        max_sentences: 10,
        mode: mode.into(),
    };
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut store = ParamStore::new();
    init_shared_params(&mut store, &cfg, vec![0.0; vocab * d], vocab, &mut rng).unwrap();
    EncoderRegistry::default()
        .get(mode)
        .unwrap()
        .init_params(&mut store, &cfg, &mut rng)
        .unwrap();
    init_ranker_params(&mut store, cfg.width(), cfg.max_sentences, &mut rng).unwrap();
    randomize(&mut store, seed + 1);
    (store, cfg)
}

fn assert_close(a: &[f64], b: &[f64]) {
    assert_eq!(a.len(), b.len());
    for (x, y) in a.iter().zip(b) {
        assert!((x - y).abs() < TOL, "{a:?} vs {b:?}");
    }
}

#[test]
fn simple_sentence_embedding_matches_scalar_lstm() {
    let (store, cfg) = setup("simple", 2, 3, 6, 11);
    let ids = [2, 5, 3];
    let mut g = Graph::new();
    let strategy = EncoderRegistry::default().get("simple").unwrap();
    let e = strategy.encode_sentence(&mut g, &store, &cfg, &ids).unwrap();
    let h = scalar_hidden(&store, &ids, 2);
    let expected = [&h[2][..2], &h[0][2..]].concat();
    assert_close(&g.value(e.vector).data, &expected);
}

#[test]
fn attention_sentence_embedding_matches_scalar_recomputation() {
    let (store, cfg) = setup("attention", 2, 3, 6, 12);
    let ids = [4, 1, 2];
    let mut g = Graph::new();
    let strategy = EncoderRegistry::default().get("attention").unwrap();
    let e = strategy.encode_sentence(&mut g, &store, &cfg, &ids).unwrap();
    let h = scalar_hidden(&store, &ids, 2);
    let expected = scalar_attention(&param(&store, ATTN_WORD), 3, &h);
    assert_close(&g.value(e.vector).data, &expected);
}

#[test]
fn document_embeddings_match_scalar_recomputation() {
    for mode in ["simple", "attention"] {
        let (store, cfg) = setup(mode, 2, 3, 8, 13);
        let strategy = EncoderRegistry::default().get(mode).unwrap();
        let sentences: [&[usize]; 3] = [&[2, 3], &[4, 5, 6], &[7]];
        let mut g = Graph::new();
        let embedded: Vec<_> = sentences
            .iter()
            .map(|ids| strategy.encode_sentence(&mut g, &store, &cfg, ids).unwrap())
            .collect();
        let doc = strategy.encode_document(&mut g, &store, &embedded).unwrap();
        let rows: Vec<Vec<f64>> = embedded.iter().map(|e| g.value(e.vector).data.clone()).collect();
        let expected = if mode == "simple" {
            let w = param(&store, DOC_W);
            let b = param(&store, DOC_B);
            let mean: Vec<f64> = (0..4).map(|c| rows.iter().map(|r| r[c]).sum::<f64>() / 3.0).collect();
            (0..4)
                .map(|i| {
                    let s: f64 = b.at(0, i) + (0..4).map(|j| w.at(i, j) * mean[j]).sum::<f64>();
                    s.max(0.0)
                })
                .collect()
        } else {
            scalar_attention(&param(&store, ATTN_SENT), 3, &rows)
        };
        assert_close(&g.value(doc).data, &expected);
    }
}

#[test]
fn ranker_probabilities_match_scalar_recomputation() {
    let (store, _) = setup("simple", 1, 1, 4, 14);
    let mut g = Graph::new();
    let rows = [vec![0.3, -0.7], vec![0.9, 0.1], vec![-0.4, 0.5]];
    let doc_vec = vec![0.2, 0.6];
    let sentences: Vec<_> = rows
        .iter()
        .map(|r| deckgen::encoder::constant_sentence(&mut g, r.clone()))
        .collect();
    let doc = g.constant(deckgen::neuralcore::Matrix::row_vector(doc_vec.clone()));
    let terms = score_sentences(&mut g, &store, &sentences, doc).unwrap();
    let got = probabilities(&g, &terms).0;

    let pos_table = param(&store, POSITION_TABLE);
    let w_pos = param(&store, W_POS);
    let w_content = param(&store, W_CONTENT);
    let w_sal = param(&store, W_SALIENCE);
    let w_nov = param(&store, W_NOVELTY);
    let bilinear = |a: &[f64], m: &P<'_>, b: &[f64]| -> f64 {
        let mut s = 0.0;
        for i in 0..2 {
            for j in 0..2 {
                s += a[i] * m.at(i, j) * b[j];
            }
        }
        s
    };
    let mut summary = [0.0, 0.0];
    let mut expected = Vec::new();
    for (i, e) in rows.iter().enumerate() {
        let pos: f64 = (0..2).map(|c| pos_table.at(i, c) * w_pos.at(c, 0)).sum();
        let content: f64 = (0..2).map(|c| e[c] * w_content.at(c, 0)).sum();
        let salience = bilinear(&doc_vec, &w_sal, e);
        let novelty = bilinear(&summary, &w_nov, e);
        let p = sigmoid(pos + content + salience + novelty);
        summary[0] += p * e[0];
        summary[1] += p * e[1];
        expected.push(p);
    }
    assert_close(&got, &expected);
}
