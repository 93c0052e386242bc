//! MU-MIMO downlink scheduling laboratory.
//!
//! The crate is organised bottom-up:
//!
//! - [`radio`] samples environments: user drops, multipath channels, CSI
//!   impairments and buffer states.
//! - [`phy`] turns an environment plus a final allocation into a scalar
//!   proportional-fair reward (SLNR precoding, SINR, link adaptation, BLEP).
//! - [`mdp`] is the tree-structured episode: action enumeration, transitions
//!   and the token features consumed by the network.
//! - [`nn`] is the transformer policy/value network with hand-written
//!   backpropagation and Adam.
//! - [`mcts`] is the PUCT tree search and episode runner.
//! - [`baseline`] is the PFTF greedy marginal-utility scheduler.
//! - [`harness`] wires everything into training, evaluation, the exhaustive
//!   oracle and CDF export.

pub mod alloc;
pub mod baseline;
pub mod error;
pub mod harness;
pub mod linalg;
pub mod mcts;
pub mod mdp;
pub mod nn;
pub mod phy;
pub mod radio;
pub mod rng;
pub mod tensor;

pub use alloc::Allocation;
pub use error::{Error, Result};
pub use tensor::Matrix;
