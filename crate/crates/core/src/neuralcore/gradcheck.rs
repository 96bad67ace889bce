use rand::seq::index::sample;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

use super::graph::{Graph, Var};
use super::store::ParamStore;
use crate::error::{Error, Result};

/// Coordinates sampled per parameter by [`gradient_check`].
pub const MAX_COORDS_PER_PARAM: usize = 200;

/// A scalar function of the parameters with an analytic gradient.
pub trait Objective {
    fn loss(&self, store: &ParamStore) -> Result<f64>;

    /// Evaluates the loss and writes its gradient into the (zeroed)
    /// gradient buffers of `store`.
    fn loss_and_grad(&self, store: &mut ParamStore) -> Result<f64>;
}

/// Adapts a tape-building closure into an [`Objective`].
pub struct GraphObjective<F>(pub F);

impl<F> Objective for GraphObjective<F>
where
    F: Fn(&mut Graph, &ParamStore) -> Result<Var>,
{
    fn loss(&self, store: &ParamStore) -> Result<f64> {
        let mut graph = Graph::new();
        let loss = (self.0)(&mut graph, store)?;
        Ok(graph.value(loss).item())
    }

    fn loss_and_grad(&self, store: &mut ParamStore) -> Result<f64> {
        let mut graph = Graph::new();
        let loss = (self.0)(&mut graph, store)?;
        graph.backward(loss, store);
        Ok(graph.value(loss).item())
    }
}

fn finite(value: f64) -> Result<f64> {
    if value.is_finite() {
        Ok(value)
    } else {
        Err(Error::NonFiniteLoss(value))
    }
}

/// Compares analytic gradients with central differences on up to
/// [`MAX_COORDS_PER_PARAM`] seeded-random coordinates per parameter and
/// returns the largest |a − n| / max(1e−8, |a| + |n|).
pub fn gradient_check<O: Objective>(objective: &O, store: &mut ParamStore, eps: f64, seed: u64) -> Result<f64> {
    store.zero_grad();
    finite(objective.loss_and_grad(store)?)?;
    let analytic: Vec<Vec<f64>> = store.iter().map(|(_, p)| p.grad.clone()).collect();
    store.zero_grad();

    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut worst = 0.0f64;
    for (pidx, grads) in analytic.iter().enumerate() {
        let len = grads.len();
        let coords: Vec<usize> = if len <= MAX_COORDS_PER_PARAM {
            (0..len).collect()
        } else {
            let mut picked = sample(&mut rng, len, MAX_COORDS_PER_PARAM).into_vec();
            picked.sort_unstable();
            picked
        };
        for i in coords {
            let original = param_value(store, pidx, i);
            set_param_value(store, pidx, i, original + eps);
            let plus = finite(objective.loss(store)?)?;
            set_param_value(store, pidx, i, original - eps);
            let minus = finite(objective.loss(store)?)?;
            set_param_value(store, pidx, i, original);
            let numeric = (plus - minus) / (2.0 * eps);
            let a = grads[i];
            let rel = (a - numeric).abs() / (a.abs() + numeric.abs()).max(1e-8);
            worst = worst.max(rel);
        }
    }
    Ok(worst)
}

fn param_value(store: &ParamStore, pidx: usize, i: usize) -> f64 {
    store.by_id(super::store::ParamId(pidx)).value[i]
}

fn set_param_value(store: &mut ParamStore, pidx: usize, i: usize, v: f64) {
    store.by_id_mut(super::store::ParamId(pidx)).value[i] = v;
}

#[cfg(test)]
mod tests {
    use super::*;

    struct SumOfSquares {
        grad_scale: f64,
    }

    impl Objective for SumOfSquares {
        fn loss(&self, store: &ParamStore) -> Result<f64> {
            Ok(store.get("theta").unwrap().value.iter().map(|x| x * x).sum())
        }

        fn loss_and_grad(&self, store: &mut ParamStore) -> Result<f64> {
            let loss = self.loss(store)?;
            let p = store.get_mut("theta").unwrap();
            for (g, x) in p.grad.iter_mut().zip(p.value.clone()) {
                *g += self.grad_scale * 2.0 * x;
            }
            Ok(loss)
        }
    }

    fn theta() -> ParamStore {
        let mut store = ParamStore::new();
        store.insert("theta", &[2], vec![1.0, 2.0]).unwrap();
        store
    }

    #[test]
    fn quadratic_is_exact() {
        let mut store = theta();
        let mut probe = store.clone();
        SumOfSquares { grad_scale: 1.0 }.loss_and_grad(&mut probe).unwrap();
        assert_eq!(probe.get("theta").unwrap().grad, vec![2.0, 4.0]);
        let err = gradient_check(&SumOfSquares { grad_scale: 1.0 }, &mut store, 1e-4, 0).unwrap();
        assert!(err < 1e-8, "{err}");
        assert_eq!(store.get("theta").unwrap().value, vec![1.0, 2.0]);
    }

    #[test]
    fn wrong_gradient_is_caught() {
        let err = gradient_check(&SumOfSquares { grad_scale: 2.0 }, &mut theta(), 1e-4, 0).unwrap();
        assert!(err > 0.3, "{err}");
    }

    #[test]
    fn non_finite_loss_is_an_error() {
        let objective = GraphObjective(|g: &mut Graph, s: &ParamStore| {
            let x = g.param(s, "theta")?;
            let inf = g.constant(super::super::Matrix::row_vector(vec![f64::INFINITY, 0.0]));
            let y = g.mul(x, inf);
            let ones = g.constant(super::super::Matrix::new(2, 1, vec![1.0, 1.0]));
            Ok(g.matmul(y, ones))
        });
        let err = gradient_check(&objective, &mut theta(), 1e-4, 0).unwrap_err();
        assert!(matches!(err, Error::NonFiniteLoss(_)));
    }

    #[test]
    fn tape_ops_pass_the_check() {
        use super::super::Matrix;
        let mut store = ParamStore::new();
        store.insert("a", &[3, 4], (0..12).map(|i| (i as f64 * 0.37).sin()).collect()).unwrap();
        store.insert("b", &[4], (0..4).map(|i| (i as f64 * 0.71).cos()).collect()).unwrap();
        store.insert("w", &[4, 2], (0..8).map(|i| (i as f64 * 1.3).sin() * 0.5).collect()).unwrap();
        let objective = GraphObjective(|g: &mut Graph, s: &ParamStore| {
            let a = g.param(s, "a")?;
            let b = g.param(s, "b")?;
            let w = g.param(s, "w")?;
            let x = g.add(a, b);
            let t = g.tanh(x);
            let sg = g.sigmoid(x);
            let prod = g.mul(t, sg);
            let at = g.transpose(prod);
            let sm = g.softmax_rows(at);
            let back = g.transpose(sm);
            let h = g.matmul(back, w);
            let cat = g.concat_cols(&[h, h]);
            let rows = g.concat_rows(&[cat, cat]);
            let part = g.slice(rows, 1, 1, 4, 2);
            let m = g.mean_rows(part);
            let scaled = g.scale(m, 3.0);
            let ones = g.constant(Matrix::new(2, 1, vec![1.0, -2.0]));
            let z = g.matmul(scaled, ones);
            let p = g.sigmoid(z);
            Ok(g.weighted_nll(p, &[1.0], 85.0, 2.0))
        });
        let err = gradient_check(&objective, &mut store, 1e-5, 7).unwrap();
        assert!(err < 1e-6, "{err}");
    }
}
