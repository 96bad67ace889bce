//! Trainable-array machinery: parameter storage, a reverse-mode tape over
//! a closed set of matrix operations, AdaDelta, finite-difference gradient
//! checking and the binary checkpoint format.

mod adadelta;
mod checkpoint;
mod gradcheck;
mod graph;
mod matrix;
mod store;

pub use adadelta::{adadelta_step, clip_gradients, AdaDeltaConfig};
pub use checkpoint::{load_checkpoint, load_checkpoint_into, save_checkpoint, CHECKPOINT_MAGIC};
pub use gradcheck::{gradient_check, GraphObjective, Objective, MAX_COORDS_PER_PARAM};
pub use graph::{Graph, Var, PROB_CLAMP};
pub use matrix::Matrix;
pub use store::{xavier_uniform, Param, ParamId, ParamStore};
