//! A small dense neural-network engine: matrices, linear layers with
//! LeakyReLU, losses, Adam, and weight initialization.

pub mod adam;
pub mod gradcheck;
pub mod init;
pub mod loss;
pub mod matrix;
pub mod mlp;

#[cfg(test)]
pub(crate) mod testing;

pub use adam::{AdamConfig, AdamState};
pub use init::{initialize, InitScheme};
pub use loss::{correlation_loss, mse_loss, Correlation};
pub use matrix::Matrix;
pub use mlp::{Linear, Mlp, MlpGrads, Trace, LEAKY_SLOPE};
