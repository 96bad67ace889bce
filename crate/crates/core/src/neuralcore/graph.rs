use std::collections::HashMap;

use super::matrix::Matrix;
use super::store::{ParamId, ParamStore};
use crate::error::Result;

/// Probabilities are clamped to `[PROB_CLAMP, 1 − PROB_CLAMP]` before logs.
pub const PROB_CLAMP: f64 = 1e-7;

/// Handle to a node on the tape.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub struct Var(usize);

#[derive(Debug)]
enum Op {
    Constant,
    Param(ParamId),
    Lookup(ParamId, Vec<usize>),
    MatMul(Var, Var),
    /// Elementwise sum; a 1×c right operand is broadcast over rows.
    Add(Var, Var),
    Mul(Var, Var),
    Scale(Var, f64),
    Sigmoid(Var),
    Tanh(Var),
    Relu(Var),
    SoftmaxRows(Var),
    MeanRows(Var),
    ConcatCols(Vec<Var>),
    ConcatRows(Vec<Var>),
    Slice { src: Var, row: usize, col: usize },
    Transpose(Var),
    WeightedNll {
        probs: Var,
        labels: Vec<f64>,
        positive_weight: f64,
        negative_weight: f64,
    },
}

#[derive(Debug)]
struct Node {
    value: Matrix,
    op: Op,
}

/// A single-use tape: build the forward graph, then call [`Graph::backward`].
#[derive(Debug, Default)]
pub struct Graph {
    nodes: Vec<Node>,
    param_cache: HashMap<ParamId, Var>,
}

fn sigmoid(x: f64) -> f64 {
    if x >= 0.0 {
        1.0 / (1.0 + (-x).exp())
    } else {
        let e = x.exp();
        e / (1.0 + e)
    }
}

impl Graph {
    pub fn new() -> Self {
        Self::default()
    }

    pub fn len(&self) -> usize {
        self.nodes.len()
    }

    pub fn is_empty(&self) -> bool {
        self.nodes.is_empty()
    }

    fn push(&mut self, value: Matrix, op: Op) -> Var {
        self.nodes.push(Node { value, op });
        Var(self.nodes.len() - 1)
    }

    pub fn value(&self, v: Var) -> &Matrix {
        &self.nodes[v.0].value
    }

    pub fn constant(&mut self, value: Matrix) -> Var {
        self.push(value, Op::Constant)
    }

    /// The full parameter as a matrix; repeated calls share one node.
    pub fn param(&mut self, store: &ParamStore, name: &str) -> Result<Var> {
        let id = store.id(name)?;
        if let Some(&v) = self.param_cache.get(&id) {
            return Ok(v);
        }
        let v = self.push(store.by_id(id).as_matrix(), Op::Param(id));
        self.param_cache.insert(id, v);
        Ok(v)
    }

    /// Gathers rows of a parameter table.
    pub fn lookup(&mut self, store: &ParamStore, name: &str, rows: &[usize]) -> Result<Var> {
        let id = store.id(name)?;
        let param = store.by_id(id);
        let (_, cols) = param.dims();
        let mut data = Vec::with_capacity(rows.len() * cols);
        for &r in rows {
            data.extend_from_slice(&param.value[r * cols..(r + 1) * cols]);
        }
        Ok(self.push(Matrix::new(rows.len(), cols, data), Op::Lookup(id, rows.to_vec())))
    }

    pub fn matmul(&mut self, a: Var, b: Var) -> Var {
        let value = self.value(a).matmul(self.value(b));
        self.push(value, Op::MatMul(a, b))
    }

    pub fn add(&mut self, a: Var, b: Var) -> Var {
        let (av, bv) = (self.value(a), self.value(b));
        let value = if av.shape() == bv.shape() {
            let mut out = av.clone();
            out.add_assign(bv);
            out
        } else {
            assert!(
                bv.rows == 1 && bv.cols == av.cols,
                "add: cannot broadcast {:?} onto {:?}",
                bv.shape(),
                av.shape()
            );
            let mut out = av.clone();
            for r in 0..out.rows {
                for c in 0..out.cols {
                    out.data[r * out.cols + c] += bv.data[c];
                }
            }
            out
        };
        self.push(value, Op::Add(a, b))
    }

    pub fn mul(&mut self, a: Var, b: Var) -> Var {
        let (av, bv) = (self.value(a), self.value(b));
        assert_eq!(av.shape(), bv.shape(), "mul: shape mismatch");
        let data = av.data.iter().zip(&bv.data).map(|(x, y)| x * y).collect();
        let value = Matrix::new(av.rows, av.cols, data);
        self.push(value, Op::Mul(a, b))
    }

    pub fn scale(&mut self, a: Var, factor: f64) -> Var {
        let value = self.value(a).map(|x| x * factor);
        self.push(value, Op::Scale(a, factor))
    }

    pub fn sigmoid(&mut self, a: Var) -> Var {
        let value = self.value(a).map(sigmoid);
        self.push(value, Op::Sigmoid(a))
    }

    pub fn tanh(&mut self, a: Var) -> Var {
        let value = self.value(a).map(f64::tanh);
        self.push(value, Op::Tanh(a))
    }

    pub fn relu(&mut self, a: Var) -> Var {
        let value = self.value(a).map(|x| x.max(0.0));
        self.push(value, Op::Relu(a))
    }

    /// Softmax applied independently to each row.
    pub fn softmax_rows(&mut self, a: Var) -> Var {
        let mut value = self.value(a).clone();
        let cols = value.cols;
        for row in value.data.chunks_mut(cols.max(1)) {
            let max = row.iter().copied().fold(f64::NEG_INFINITY, f64::max);
            let mut total = 0.0;
            for x in row.iter_mut() {
                *x = (*x - max).exp();
                total += *x;
            }
            for x in row.iter_mut() {
                *x /= total;
            }
        }
        self.push(value, Op::SoftmaxRows(a))
    }

    /// Mean over rows, giving a 1×c row vector.
    pub fn mean_rows(&mut self, a: Var) -> Var {
        let av = self.value(a);
        let mut data = vec![0.0; av.cols];
        for r in 0..av.rows {
            for (d, x) in data.iter_mut().zip(av.row(r)) {
                *d += x;
            }
        }
        let n = av.rows as f64;
        data.iter_mut().for_each(|d| *d /= n);
        let value = Matrix::row_vector(data);
        self.push(value, Op::MeanRows(a))
    }

    pub fn concat_cols(&mut self, parts: &[Var]) -> Var {
        let rows = self.value(parts[0]).rows;
        let cols: usize = parts.iter().map(|&p| self.value(p).cols).sum();
        let mut data = Vec::with_capacity(rows * cols);
        for r in 0..rows {
            for &p in parts {
                let pv = self.value(p);
                assert_eq!(pv.rows, rows, "concat_cols: row mismatch");
                data.extend_from_slice(pv.row(r));
            }
        }
        self.push(Matrix::new(rows, cols, data), Op::ConcatCols(parts.to_vec()))
    }

    pub fn concat_rows(&mut self, parts: &[Var]) -> Var {
        let cols = self.value(parts[0]).cols;
        let mut data = Vec::new();
        let mut rows = 0;
        for &p in parts {
            let pv = self.value(p);
            assert_eq!(pv.cols, cols, "concat_rows: column mismatch");
            data.extend_from_slice(&pv.data);
            rows += pv.rows;
        }
        self.push(Matrix::new(rows, cols, data), Op::ConcatRows(parts.to_vec()))
    }

    /// The `rows`×`cols` block starting at (`row`, `col`).
    pub fn slice(&mut self, src: Var, row: usize, col: usize, rows: usize, cols: usize) -> Var {
        let sv = self.value(src);
        assert!(row + rows <= sv.rows && col + cols <= sv.cols, "slice out of bounds");
        let mut data = Vec::with_capacity(rows * cols);
        for r in row..row + rows {
            data.extend_from_slice(&sv.row(r)[col..col + cols]);
        }
        self.push(Matrix::new(rows, cols, data), Op::Slice { src, row, col })
    }

    pub fn transpose(&mut self, a: Var) -> Var {
        let value = self.value(a).transpose();
        self.push(value, Op::Transpose(a))
    }

    /// Σ_i [pw·y_i·(−ln p_i) + nw·(1−y_i)·(−ln(1−p_i))] with p clamped.
    pub fn weighted_nll(&mut self, probs: Var, labels: &[f64], positive_weight: f64, negative_weight: f64) -> Var {
        let pv = self.value(probs);
        assert_eq!(pv.data.len(), labels.len(), "weighted_nll: label count");
        let loss = pv
            .data
            .iter()
            .zip(labels)
            .map(|(&p, &y)| {
                let p = p.clamp(PROB_CLAMP, 1.0 - PROB_CLAMP);
                -(positive_weight * y * p.ln() + negative_weight * (1.0 - y) * (1.0 - p).ln())
            })
            .sum();
        self.push(
            Matrix::scalar(loss),
            Op::WeightedNll {
                probs,
                labels: labels.to_vec(),
                positive_weight,
                negative_weight,
            },
        )
    }

    /// Reverse accumulation from the scalar `loss`; parameter gradients
    /// are added into the store's gradient buffers.
    pub fn backward(&self, loss: Var, store: &mut ParamStore) {
        assert_eq!(self.value(loss).shape(), (1, 1), "backward from a non-scalar");
        let mut grads: Vec<Option<Matrix>> = (0..=loss.0).map(|_| None).collect();
        grads[loss.0] = Some(Matrix::scalar(1.0));

        fn accumulate(grads: &mut [Option<Matrix>], v: Var, g: Matrix) {
            match &mut grads[v.0] {
                Some(existing) => existing.add_assign(&g),
                slot => *slot = Some(g),
            }
        }

        for idx in (0..=loss.0).rev() {
            let Some(g) = grads[idx].take() else { continue };
            let node = &self.nodes[idx];
            match &node.op {
                Op::Constant => {}
                Op::Param(id) => {
                    let param = store.by_id_mut(*id);
                    for (dst, src) in param.grad.iter_mut().zip(&g.data) {
                        *dst += src;
                    }
                }
                Op::Lookup(id, rows) => {
                    let param = store.by_id_mut(*id);
                    let cols = g.cols;
                    for (i, &r) in rows.iter().enumerate() {
                        let dst = &mut param.grad[r * cols..(r + 1) * cols];
                        for (d, s) in dst.iter_mut().zip(g.row(i)) {
                            *d += s;
                        }
                    }
                }
                Op::MatMul(a, b) => {
                    let av = self.value(*a);
                    let bv = self.value(*b);
                    accumulate(&mut grads, *a, g.matmul(&bv.transpose()));
                    accumulate(&mut grads, *b, av.transpose().matmul(&g));
                }
                Op::Add(a, b) => {
                    let bshape = self.value(*b).shape();
                    if bshape == g.shape() {
                        accumulate(&mut grads, *b, g.clone());
                    } else {
                        let mut reduced = vec![0.0; g.cols];
                        for r in 0..g.rows {
                            for (d, x) in reduced.iter_mut().zip(g.row(r)) {
                                *d += x;
                            }
                        }
                        accumulate(&mut grads, *b, Matrix::row_vector(reduced));
                    }
                    accumulate(&mut grads, *a, g);
                }
                Op::Mul(a, b) => {
                    let av = self.value(*a);
                    let bv = self.value(*b);
                    let ga = g.data.iter().zip(&bv.data).map(|(x, y)| x * y).collect();
                    let gb = g.data.iter().zip(&av.data).map(|(x, y)| x * y).collect();
                    accumulate(&mut grads, *a, Matrix::new(g.rows, g.cols, ga));
                    accumulate(&mut grads, *b, Matrix::new(g.rows, g.cols, gb));
                }
                Op::Scale(a, factor) => accumulate(&mut grads, *a, g.map(|x| x * factor)),
                Op::Sigmoid(a) => {
                    let data = g.data.iter().zip(&node.value.data).map(|(gx, y)| gx * y * (1.0 - y)).collect();
                    accumulate(&mut grads, *a, Matrix::new(g.rows, g.cols, data));
                }
                Op::Tanh(a) => {
                    let data = g.data.iter().zip(&node.value.data).map(|(gx, y)| gx * (1.0 - y * y)).collect();
                    accumulate(&mut grads, *a, Matrix::new(g.rows, g.cols, data));
                }
                Op::Relu(a) => {
                    let input = self.value(*a);
                    let data = g
                        .data
                        .iter()
                        .zip(&input.data)
                        .map(|(gx, x)| if *x > 0.0 { *gx } else { 0.0 })
                        .collect();
                    accumulate(&mut grads, *a, Matrix::new(g.rows, g.cols, data));
                }
                Op::SoftmaxRows(a) => {
                    let y = &node.value;
                    let mut out = Matrix::zeros(g.rows, g.cols);
                    for r in 0..g.rows {
                        let dot: f64 = g.row(r).iter().zip(y.row(r)).map(|(a, b)| a * b).sum();
                        for c in 0..g.cols {
                            let yi = y.get(r, c);
                            out.data[r * g.cols + c] = yi * (g.get(r, c) - dot);
                        }
                    }
                    accumulate(&mut grads, *a, out);
                }
                Op::MeanRows(a) => {
                    let rows = self.value(*a).rows;
                    let mut out = Matrix::zeros(rows, g.cols);
                    for r in 0..rows {
                        for c in 0..g.cols {
                            out.data[r * g.cols + c] = g.data[c] / rows as f64;
                        }
                    }
                    accumulate(&mut grads, *a, out);
                }
                Op::ConcatCols(parts) => {
                    let mut offset = 0;
                    for &p in parts {
                        let cols = self.value(p).cols;
                        let mut out = Vec::with_capacity(g.rows * cols);
                        for r in 0..g.rows {
                            out.extend_from_slice(&g.row(r)[offset..offset + cols]);
                        }
                        accumulate(&mut grads, p, Matrix::new(g.rows, cols, out));
                        offset += cols;
                    }
                }
                Op::ConcatRows(parts) => {
                    let mut offset = 0;
                    for &p in parts {
                        let rows = self.value(p).rows;
                        let data = g.data[offset * g.cols..(offset + rows) * g.cols].to_vec();
                        accumulate(&mut grads, p, Matrix::new(rows, g.cols, data));
                        offset += rows;
                    }
                }
                Op::Slice { src, row, col } => {
                    let (rows, cols) = self.value(*src).shape();
                    let mut out = Matrix::zeros(rows, cols);
                    for r in 0..g.rows {
                        let dst = &mut out.data[(row + r) * cols + col..(row + r) * cols + col + g.cols];
                        dst.copy_from_slice(g.row(r));
                    }
                    accumulate(&mut grads, *src, out);
                }
                Op::Transpose(a) => accumulate(&mut grads, *a, g.transpose()),
                Op::WeightedNll {
                    probs,
                    labels,
                    positive_weight,
                    negative_weight,
                } => {
                    let upstream = g.item();
                    let pv = self.value(*probs);
                    let data = pv
                        .data
                        .iter()
                        .zip(labels)
                        .map(|(&p, &y)| {
                            if !(PROB_CLAMP..=1.0 - PROB_CLAMP).contains(&p) {
                                return 0.0;
                            }
                            upstream * (-positive_weight * y / p + negative_weight * (1.0 - y) / (1.0 - p))
                        })
                        .collect();
                    accumulate(&mut grads, *probs, Matrix::new(pv.rows, pv.cols, data));
                }
            }
        }
    }
}
