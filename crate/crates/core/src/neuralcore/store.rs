use indexmap::IndexMap;
use rand::Rng;

use super::matrix::Matrix;
use crate::error::{Error, Result};

/// Index of a parameter inside its store.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub struct ParamId(pub usize);

/// A named array with its gradient buffer and AdaDelta accumulators.
#[derive(Debug, Clone, PartialEq)]
pub struct Param {
    pub shape: Vec<usize>,
    pub value: Vec<f64>,
    pub grad: Vec<f64>,
    /// Running average of squared gradients.
    pub acc_grad: Vec<f64>,
    /// Running average of squared updates.
    pub acc_update: Vec<f64>,
}

impl Param {
    fn new(shape: Vec<usize>, value: Vec<f64>) -> Self {
        let len = value.len();
        Param {
            shape,
            value,
            grad: vec![0.0; len],
            acc_grad: vec![0.0; len],
            acc_update: vec![0.0; len],
        }
    }

    /// Rows and columns of the 2-D view: rank 0 is 1×1, rank 1 is a row
    /// vector and higher ranks fold trailing axes into columns.
    pub fn dims(&self) -> (usize, usize) {
        match self.shape.as_slice() {
            [] => (1, 1),
            [n] => (1, *n),
            [r, rest @ ..] => (*r, rest.iter().product()),
        }
    }

    pub fn as_matrix(&self) -> Matrix {
        let (r, c) = self.dims();
        Matrix::new(r, c, self.value.clone())
    }

    pub fn len(&self) -> usize {
        self.value.len()
    }

    pub fn is_empty(&self) -> bool {
        self.value.is_empty()
    }
}

/// Ordered collection of named parameters; iteration follows insertion order.
#[derive(Debug, Clone, Default, PartialEq)]
pub struct ParamStore {
    params: IndexMap<String, Param>,
}

impl ParamStore {
    pub fn new() -> Self {
        Self::default()
    }

    pub fn insert(&mut self, name: &str, shape: &[usize], value: Vec<f64>) -> Result<ParamId> {
        let expected: usize = shape.iter().product();
        if value.len() != expected {
            return Err(Error::ShapeMismatch(format!(
                "`{name}`: {} values for shape {shape:?}",
                value.len()
            )));
        }
        if self.params.contains_key(name) {
            return Err(Error::InvalidConfig(format!("duplicate parameter `{name}`")));
        }
        let (idx, _) = self
            .params
            .insert_full(name.to_string(), Param::new(shape.to_vec(), value));
        Ok(ParamId(idx))
    }

    pub fn insert_zeros(&mut self, name: &str, shape: &[usize]) -> Result<ParamId> {
        self.insert(name, shape, vec![0.0; shape.iter().product()])
    }

    pub fn id(&self, name: &str) -> Result<ParamId> {
        self.params
            .get_index_of(name)
            .map(ParamId)
            .ok_or_else(|| Error::ShapeMismatch(format!("missing parameter `{name}`")))
    }

    pub fn get(&self, name: &str) -> Option<&Param> {
        self.params.get(name)
    }

    pub fn get_mut(&mut self, name: &str) -> Option<&mut Param> {
        self.params.get_mut(name)
    }

    pub fn by_id(&self, id: ParamId) -> &Param {
        &self.params[id.0]
    }

    pub fn by_id_mut(&mut self, id: ParamId) -> &mut Param {
        &mut self.params[id.0]
    }

    pub fn name_of(&self, id: ParamId) -> &str {
        self.params.get_index(id.0).map(|(k, _)| k.as_str()).unwrap_or("")
    }

    /// Overwrites a parameter's values, keeping its shape.
    pub fn set(&mut self, name: &str, value: Vec<f64>) -> Result<()> {
        let param = self
            .params
            .get_mut(name)
            .ok_or_else(|| Error::ShapeMismatch(format!("missing parameter `{name}`")))?;
        if param.value.len() != value.len() {
            return Err(Error::ShapeMismatch(format!(
                "`{name}` has {} values, got {}",
                param.value.len(),
                value.len()
            )));
        }
        param.value = value;
        Ok(())
    }

    pub fn iter(&self) -> impl Iterator<Item = (&str, &Param)> + '_ {
        self.params.iter().map(|(k, v)| (k.as_str(), v))
    }

    pub fn iter_mut(&mut self) -> impl Iterator<Item = (&str, &mut Param)> + '_ {
        self.params.iter_mut().map(|(k, v)| (k.as_str(), v))
    }

    pub fn len(&self) -> usize {
        self.params.len()
    }

    pub fn is_empty(&self) -> bool {
        self.params.is_empty()
    }

    pub fn zero_grad(&mut self) {
        for param in self.params.values_mut() {
            param.grad.iter_mut().for_each(|g| *g = 0.0);
        }
    }

    pub fn grad_norm(&self) -> f64 {
        self.params
            .values()
            .flat_map(|p| p.grad.iter())
            .map(|g| g * g)
            .sum::<f64>()
            .sqrt()
    }
}

/// U(−r, r) with r = √(6 / (fan_in + fan_out)).
pub fn xavier_uniform<R: Rng + ?Sized>(rng: &mut R, fan_in: usize, fan_out: usize, len: usize) -> Vec<f64> {
    let r = (6.0 / (fan_in + fan_out) as f64).sqrt();
    (0..len).map(|_| rng.gen_range(-r..r)).collect()
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn insert_validates_shape_and_names() {
        let mut store = ParamStore::new();
        store.insert("w", &[2, 3], vec![0.0; 6]).unwrap();
        assert!(store.insert("w", &[1], vec![0.0]).is_err());
        assert!(store.insert("v", &[2], vec![0.0; 3]).is_err());
        let p = store.get("w").unwrap();
        assert_eq!(p.dims(), (2, 3));
        assert_eq!(p.grad.len(), 6);
    }

    #[test]
    fn iteration_follows_insertion_order() {
        let mut store = ParamStore::new();
        for name in ["z", "a", "m"] {
            store.insert_zeros(name, &[1]).unwrap();
        }
        let names: Vec<_> = store.iter().map(|(n, _)| n).collect();
        assert_eq!(names, vec!["z", "a", "m"]);
        assert_eq!(store.name_of(store.id("a").unwrap()), "a");
    }

    #[test]
    fn rank_views() {
        let mut store = ParamStore::new();
        store.insert("s", &[], vec![1.0]).unwrap();
        store.insert("v", &[4], vec![0.0; 4]).unwrap();
        store.insert("t", &[2, 3, 4], vec![0.0; 24]).unwrap();
        assert_eq!(store.get("s").unwrap().dims(), (1, 1));
        assert_eq!(store.get("v").unwrap().dims(), (1, 4));
        assert_eq!(store.get("t").unwrap().dims(), (2, 12));
    }
}
