//! Focused linear attention for long-sequence speech separation.
//!
//! - [`tensor`]: dense `f64` tensors, elementary kernels and live-element
//!   accounting.
//! - [`autodiff`]: eager and tape-recorded evaluation, reverse-mode
//!   gradients and a finite-difference checker.
//! - [`attention`]: softmax, vanilla linear and focused linear attention,
//!   multi-head and gated block wrappers.
//! - [`sepnet`]: a toy two-speaker separator trained with PIT SI-SNR.
//! - [`bench`]: scaling measurements of the attention variants.

pub mod attention;
pub mod autodiff;
pub mod bench;
pub mod checks;
pub mod error;
pub mod sepnet;
pub mod tensor;

pub use error::{Error, Result};
pub use tensor::Tensor;
