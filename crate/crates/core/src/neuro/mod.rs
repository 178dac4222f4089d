//! Small dense networks, reverse-mode gradients and an Adam optimizer.

mod adam;
pub mod checkpoint;
mod mlp;

pub use adam::{Adam, AdamConfig};
pub use mlp::{Activation, ForwardCache, Gradients, Mlp};
