//! Policy/value network: a small post-norm transformer encoder over the
//! user × subband token grid, mean pooling, and two MLP heads (softmax policy,
//! softplus value). Forward and backward passes are written out by hand in
//! `f64`.

mod adam;
mod checkpoint;
mod loss;
mod model;
mod params;
mod positional;
mod train;

pub use adam::{AdamConfig, AdamState};
pub use checkpoint::{load_checkpoint, read_checkpoint, save_checkpoint, write_checkpoint, Checkpoint};
pub use loss::{loss, log_softmax, softmax, softplus};
pub use model::{backward, BlockTrace, Prediction, Trace};
pub use params::{Gradients, NetworkConfig, NetworkParameters, NetworkShape, LEAKY_SLOPE, LN_EPS};
pub use positional::positional_encoding_2d;
pub use train::{batch_loss_and_gradient, train, TrainingSample};
