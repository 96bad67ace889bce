use serde::{Deserialize, Serialize};

use super::store::ParamStore;
use crate::error::{Error, Result};

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct AdaDeltaConfig {
    pub learning_rate: f64,
    pub rho: f64,
    pub epsilon: f64,
}

impl Default for AdaDeltaConfig {
    fn default() -> Self {
        AdaDeltaConfig {
            learning_rate: 0.1,
            rho: 0.95,
            epsilon: 1e-6,
        }
    }
}

impl AdaDeltaConfig {
    pub fn validate(&self) -> Result<()> {
        if self.learning_rate.is_nan() || self.learning_rate <= 0.0 {
            return Err(Error::InvalidConfig("learning_rate must be positive".into()));
        }
        if !(self.rho > 0.0 && self.rho < 1.0) {
            return Err(Error::InvalidConfig("rho must lie in (0, 1)".into()));
        }
        if self.epsilon.is_nan() || self.epsilon <= 0.0 {
            return Err(Error::InvalidConfig("epsilon must be positive".into()));
        }
        Ok(())
    }
}

/// One AdaDelta update scaled by the learning rate, then zeroes gradients.
pub fn adadelta_step(store: &mut ParamStore, cfg: &AdaDeltaConfig) {
    let AdaDeltaConfig {
        learning_rate,
        rho,
        epsilon,
    } = *cfg;
    for (_, param) in store.iter_mut() {
        for i in 0..param.value.len() {
            let g = param.grad[i];
            let eg = rho * param.acc_grad[i] + (1.0 - rho) * g * g;
            let delta = -learning_rate * ((param.acc_update[i] + epsilon).sqrt() / (eg + epsilon).sqrt()) * g;
            param.acc_grad[i] = eg;
            param.acc_update[i] = rho * param.acc_update[i] + (1.0 - rho) * delta * delta;
            param.value[i] += delta;
            param.grad[i] = 0.0;
        }
    }
}

/// Rescales all gradients so their global L2 norm is at most `max_norm`.
/// Returns the norm before clipping.
pub fn clip_gradients(store: &mut ParamStore, max_norm: f64) -> f64 {
    let norm = store.grad_norm();
    if norm > max_norm && norm > 0.0 {
        let factor = max_norm / norm;
        for (_, param) in store.iter_mut() {
            param.grad.iter_mut().for_each(|g| *g *= factor);
        }
    }
    norm
}
