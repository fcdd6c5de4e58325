use crate::autodiff::Graph;
use crate::error::Result;
use crate::sepnet::metrics;
use crate::tensor::{ops, Tensor};

/// Eager evaluation without recording.
#[derive(Debug, Default, Clone, Copy)]
pub struct Eval;

impl Graph for Eval {
    type Value = Tensor;

    fn constant(&mut self, t: Tensor) -> Result<Tensor> {
        Ok(t)
    }

    fn param(&mut self, _name: &str, t: &Tensor) -> Result<Tensor> {
        Ok(t.clone())
    }

    fn tensor<'a>(&'a self, v: &'a Tensor) -> &'a Tensor {
        v
    }

    fn matmul(&mut self, a: &Tensor, b: &Tensor) -> Result<Tensor> {
        ops::matmul(a, b)?.finite("matmul")
    }

    fn matmul_nt(&mut self, a: &Tensor, b: &Tensor) -> Result<Tensor> {
        ops::matmul_nt(a, b)?.finite("matmul_nt")
    }

    fn matmul_tn(&mut self, a: &Tensor, b: &Tensor) -> Result<Tensor> {
        ops::matmul_tn(a, b)?.finite("matmul_tn")
    }

    fn add(&mut self, a: &Tensor, b: &Tensor) -> Result<Tensor> {
        ops::add(a, b)?.finite("add")
    }

    fn sub(&mut self, a: &Tensor, b: &Tensor) -> Result<Tensor> {
        ops::sub(a, b)?.finite("sub")
    }

    fn mul(&mut self, a: &Tensor, b: &Tensor) -> Result<Tensor> {
        ops::mul(a, b)?.finite("mul")
    }

    fn scale(&mut self, mut a: Tensor, c: f64) -> Result<Tensor> {
        a.data_mut().iter_mut().for_each(|v| *v *= c);
        a.finite("scale")
    }

    fn relu(&mut self, a: &Tensor) -> Result<Tensor> {
        Ok(ops::relu(a))
    }

    fn sigmoid(&mut self, a: &Tensor) -> Result<Tensor> {
        Ok(ops::sigmoid(a))
    }

    fn silu(&mut self, a: &Tensor) -> Result<Tensor> {
        Ok(ops::silu(a))
    }

    fn layer_norm(&mut self, x: &Tensor, gain: &Tensor, bias: &Tensor, eps: f64) -> Result<Tensor> {
        ops::layer_norm(x, gain, bias, eps)?.finite("layer_norm")
    }

    fn softmax_rows(&mut self, mut s: Tensor) -> Result<Tensor> {
        ops::softmax_rows_in_place(&mut s);
        s.finite("softmax_rows")
    }

    fn depthwise_conv1d(&mut self, x: &Tensor, kernel: &Tensor) -> Result<Tensor> {
        ops::depthwise_conv1d(x, kernel)?.finite("depthwise_conv1d")
    }

    fn focused_feature_map(&mut self, x: &Tensor, p: f64, eps: f64) -> Result<Tensor> {
        ops::focused_feature_map(x, p, eps)?.finite("focused_feature_map")
    }

    fn column_sums(&mut self, x: &Tensor) -> Result<Tensor> {
        ops::column_sums(x)?.finite("column_sums")
    }

    fn normalize_rows(&mut self, num: &Tensor, den: &Tensor, eps: f64) -> Result<Tensor> {
        ops::normalize_rows(num, den, eps)?.finite("normalize_rows")
    }

    fn slice_cols(&mut self, x: &Tensor, start: usize, end: usize) -> Result<Tensor> {
        ops::slice_cols(x, start, end)
    }

    fn concat_cols(&mut self, parts: &[Tensor]) -> Result<Tensor> {
        let refs: Vec<&Tensor> = parts.iter().collect();
        ops::concat_cols(&refs)
    }

    fn frames(&mut self, wave: &Tensor, window: usize, stride: usize) -> Result<Tensor> {
        ops::frames(wave, window, stride)
    }

    fn overlap_add(&mut self, frames: &Tensor, stride: usize, len: usize) -> Result<Tensor> {
        ops::overlap_add(frames, stride, len)?.finite("overlap_add")
    }

    fn si_snr(&mut self, est: &Tensor, reference: &Tensor, cap: f64) -> Result<Tensor> {
        Ok(Tensor::scalar(metrics::si_snr(est, reference, cap)?))
    }

    fn sum(&mut self, x: &Tensor) -> Result<Tensor> {
        Tensor::scalar(x.sum()).finite("sum")
    }
}
