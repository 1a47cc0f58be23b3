//! Forward and backward kernels for the layer types the networks use.

pub mod activation;
pub mod attention;
pub mod conv;
pub mod linear;
pub mod loss;
pub mod pool;

pub use activation::{relu, sigmoid, softmax};
pub use attention::attention;
pub use conv::conv3d;
pub use linear::linear;
pub use loss::cross_entropy;
pub use pool::maxpool3d;
