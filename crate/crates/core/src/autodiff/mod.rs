//! Differentiable evaluation.
//!
//! Model code is written once against [`Graph`]. [`Eval`] runs it eagerly
//! on plain tensors, dropping intermediates as soon as they go out of
//! scope, which is what inference and the benchmark use. [`Tape`] records
//! every op with its output so that [`Tape::backward`] can replay the
//! recording in reverse and return parameter gradients.

mod eval;
mod gradcheck;
mod tape;

pub use eval::Eval;
pub use gradcheck::{grad_check, grad_check_params, DEFAULT_STEP};
pub use tape::{GradMap, Tape, Var};

use crate::error::Result;
use crate::tensor::Tensor;

/// The op set shared by eager evaluation and the recording tape.
///
/// Ops that take their input by value may reuse its storage.
pub trait Graph {
    type Value: Clone;

    /// Input that never receives a gradient.
    fn constant(&mut self, t: Tensor) -> Result<Self::Value>;
    /// Trainable leaf, reported under `name` by the backward pass.
    fn param(&mut self, name: &str, t: &Tensor) -> Result<Self::Value>;
    fn tensor<'a>(&'a self, v: &'a Self::Value) -> &'a Tensor;

    fn matmul(&mut self, a: &Self::Value, b: &Self::Value) -> Result<Self::Value>;
    /// `a·bᵀ`
    fn matmul_nt(&mut self, a: &Self::Value, b: &Self::Value) -> Result<Self::Value>;
    /// `aᵀ·b`
    fn matmul_tn(&mut self, a: &Self::Value, b: &Self::Value) -> Result<Self::Value>;
    fn add(&mut self, a: &Self::Value, b: &Self::Value) -> Result<Self::Value>;
    fn sub(&mut self, a: &Self::Value, b: &Self::Value) -> Result<Self::Value>;
    fn mul(&mut self, a: &Self::Value, b: &Self::Value) -> Result<Self::Value>;
    fn scale(&mut self, a: Self::Value, c: f64) -> Result<Self::Value>;
    fn relu(&mut self, a: &Self::Value) -> Result<Self::Value>;
    fn sigmoid(&mut self, a: &Self::Value) -> Result<Self::Value>;
    fn silu(&mut self, a: &Self::Value) -> Result<Self::Value>;
    fn layer_norm(
        &mut self,
        x: &Self::Value,
        gain: &Self::Value,
        bias: &Self::Value,
        eps: f64,
    ) -> Result<Self::Value>;
    fn softmax_rows(&mut self, s: Self::Value) -> Result<Self::Value>;
    fn depthwise_conv1d(&mut self, x: &Self::Value, kernel: &Self::Value) -> Result<Self::Value>;
    fn focused_feature_map(&mut self, x: &Self::Value, p: f64, eps: f64) -> Result<Self::Value>;
    fn column_sums(&mut self, x: &Self::Value) -> Result<Self::Value>;
    fn normalize_rows(
        &mut self,
        num: &Self::Value,
        den: &Self::Value,
        eps: f64,
    ) -> Result<Self::Value>;
    fn slice_cols(&mut self, x: &Self::Value, start: usize, end: usize) -> Result<Self::Value>;
    fn concat_cols(&mut self, parts: &[Self::Value]) -> Result<Self::Value>;
    fn frames(&mut self, wave: &Self::Value, window: usize, stride: usize) -> Result<Self::Value>;
    fn overlap_add(
        &mut self,
        frames: &Self::Value,
        stride: usize,
        len: usize,
    ) -> Result<Self::Value>;
    /// Scale-invariant SNR in dB of `est` against a fixed reference, capped at `cap`.
    fn si_snr(&mut self, est: &Self::Value, reference: &Tensor, cap: f64) -> Result<Self::Value>;
    /// Sum of all elements as a scalar.
    fn sum(&mut self, x: &Self::Value) -> Result<Self::Value>;
}
