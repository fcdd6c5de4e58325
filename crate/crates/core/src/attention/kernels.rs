//! Single-head attention kernels on `N×d` query, key and value matrices.

use crate::autodiff::{Eval, Graph};
use crate::error::{Error, Result};
use crate::tensor::Tensor;

/// Feature map applied to queries and keys before linear attention.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum FeatureMap {
    Relu,
    /// Focused kernel with focus factor `p`.
    Focused(f64),
}

/// Evaluation order for linear attention.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Order {
    /// Materializes the `N×N` similarity matrix first.
    Quadratic,
    /// Contracts keys with values first; no `N×N` intermediate.
    Linear,
}

/// Denominator guard shared by the feature map and the normalization.
pub const ATTENTION_EPS: f64 = 1e-12;

fn check_qkv(q: &Tensor, k: &Tensor, v: &Tensor) -> Result<()> {
    let (nq, dq) = q.dims2("attention")?;
    let (nk, dk) = k.dims2("attention")?;
    let (nv, _) = v.dims2("attention")?;
    if dq != dk || nq != nk {
        return Err(Error::dim("attention", q.shape(), k.shape()));
    }
    if nk != nv {
        return Err(Error::dim("attention", k.shape(), v.shape()));
    }
    Ok(())
}

pub fn apply_feature_map<G: Graph>(g: &mut G, x: &G::Value, map: FeatureMap) -> Result<G::Value> {
    match map {
        FeatureMap::Relu => g.relu(x),
        FeatureMap::Focused(p) => g.focused_feature_map(x, p, ATTENTION_EPS),
    }
}

/// `softmax(Q·Kᵀ/√d)·V`, materializing the `N×N` weights.
pub fn softmax_attention<G: Graph>(
    g: &mut G,
    q: &G::Value,
    k: &G::Value,
    v: &G::Value,
) -> Result<G::Value> {
    check_qkv(g.tensor(q), g.tensor(k), g.tensor(v))?;
    let d = g.tensor(q).shape()[1];
    let scores = g.matmul_nt(q, k)?;
    let scores = g.scale(scores, 1.0 / (d as f64).sqrt())?;
    let weights = g.softmax_rows(scores)?;
    g.matmul(&weights, v)
}

/// Row-normalized similarity `φ(Q)φ(K)ᵀ`; rows whose mass is below
/// [`ATTENTION_EPS`] are zero.
pub fn linear_attention_weights<G: Graph>(
    g: &mut G,
    q: &G::Value,
    k: &G::Value,
    map: FeatureMap,
) -> Result<G::Value> {
    let fq = apply_feature_map(g, q, map)?;
    let fk = apply_feature_map(g, k, map)?;
    let sim = g.matmul_nt(&fq, &fk)?;
    let n = g.tensor(&sim).shape()[1];
    let ones = g.constant(Tensor::full(&[n, 1], 1.0))?;
    let mass = g.matmul(&sim, &ones)?;
    g.normalize_rows(&sim, &mass, ATTENTION_EPS)
}

/// Kernelized attention `Σ_j sim(i,j)·V_j / Σ_j sim(i,j)` with
/// `sim = φ(Q)φ(K)ᵀ`. Both orders give the same result; only
/// [`Order::Linear`] avoids the `N×N` matrix.
pub fn vanilla_linear_attention<G: Graph>(
    g: &mut G,
    q: &G::Value,
    k: &G::Value,
    v: &G::Value,
    map: FeatureMap,
    order: Order,
) -> Result<G::Value> {
    check_qkv(g.tensor(q), g.tensor(k), g.tensor(v))?;
    match order {
        Order::Quadratic => {
            let weights = linear_attention_weights(g, q, k, map)?;
            g.matmul(&weights, v)
        }
        Order::Linear => {
            let fq = apply_feature_map(g, q, map)?;
            let fk = apply_feature_map(g, k, map)?;
            let kv = g.matmul_tn(&fk, v)?;
            let num = g.matmul(&fq, &kv)?;
            let ksum = g.column_sums(&fk)?;
            let den = g.matmul_nt(&fq, &ksum)?;
            g.normalize_rows(&num, &den, ATTENTION_EPS)
        }
    }
}

/// Focused linear attention: linear-order attention with the focused
/// kernel plus a depthwise convolution of `V` that restores the rank the
/// low-rank similarity loses.
pub fn focused_linear_attention<G: Graph>(
    g: &mut G,
    q: &G::Value,
    k: &G::Value,
    v: &G::Value,
    p: f64,
    dwc_kernel: &G::Value,
) -> Result<G::Value> {
    let attn = vanilla_linear_attention(g, q, k, v, FeatureMap::Focused(p), Order::Linear)?;
    let local = g.depthwise_conv1d(v, dwc_kernel)?;
    g.add(&attn, &local)
}

/// Plain-tensor entry points.
pub mod eager {
    use super::*;
    use crate::tensor::ops;

    pub fn focused_feature_map(x: &Tensor, p: f64) -> Result<Tensor> {
        ops::focused_feature_map(x, p, ATTENTION_EPS)
    }

    pub fn softmax_attention(q: &Tensor, k: &Tensor, v: &Tensor) -> Result<Tensor> {
        super::softmax_attention(&mut Eval, q, k, v)
    }

    pub fn vanilla_linear_attention(
        q: &Tensor,
        k: &Tensor,
        v: &Tensor,
        map: FeatureMap,
        order: Order,
    ) -> Result<Tensor> {
        super::vanilla_linear_attention(&mut Eval, q, k, v, map, order)
    }

    pub fn linear_attention_weights(q: &Tensor, k: &Tensor, map: FeatureMap) -> Result<Tensor> {
        super::linear_attention_weights(&mut Eval, q, k, map)
    }

    pub fn focused_linear_attention(
        q: &Tensor,
        k: &Tensor,
        v: &Tensor,
        p: f64,
        dwc_kernel: &Tensor,
    ) -> Result<Tensor> {
        super::focused_linear_attention(&mut Eval, q, k, v, p, dwc_kernel)
    }
}
