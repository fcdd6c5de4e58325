use crate::attention::kernels::{softmax_attention, vanilla_linear_attention, FeatureMap, Order};
use crate::attention::{AttentionKind, FlaConfig, FlaParams, GateActivation};
use crate::autodiff::{Eval, Graph};
use crate::error::Result;
use crate::tensor::Tensor;

/// LayerNorm epsilon of the block's pre-norm.
pub const NORM_EPS: f64 = 1e-5;

/// Block weights bound into a [`Graph`].
#[derive(Debug, Clone)]
pub struct FlaWeights<V> {
    pub wq: V,
    pub wk: V,
    pub wv: V,
    pub wo: V,
    pub dwc_kernel: V,
    pub wg: V,
    pub norm_gain: V,
    pub norm_bias: V,
}

impl<V: Clone> FlaWeights<V> {
    /// Registers every weight of `params` as a parameter named `{prefix}.{weight}`.
    pub fn bind<G: Graph<Value = V>>(g: &mut G, params: &FlaParams, prefix: &str) -> Result<Self> {
        params.validate()?;
        let mut p = |name: &str, t: &Tensor| g.param(&format!("{prefix}.{name}"), t);
        Ok(FlaWeights {
            wq: p("wq", &params.wq)?,
            wk: p("wk", &params.wk)?,
            wv: p("wv", &params.wv)?,
            wo: p("wo", &params.wo)?,
            dwc_kernel: p("dwc_kernel", &params.dwc_kernel)?,
            wg: p("wg", &params.wg)?,
            norm_gain: p("norm_gain", &params.norm_gain)?,
            norm_bias: p("norm_bias", &params.norm_bias)?,
        })
    }
}

/// Projects `x` to queries, keys and values, runs `kind` attention on each
/// contiguous channel block of width `d/h`, concatenates the heads and
/// applies the output projection. For [`AttentionKind::Fla`] the depthwise
/// convolution of `V` is added before the output projection.
pub fn multi_head_attention<G: Graph>(
    g: &mut G,
    x: &G::Value,
    w: &FlaWeights<G::Value>,
    config: &FlaConfig,
    kind: AttentionKind,
) -> Result<G::Value> {
    config.validate()?;
    let q = g.matmul(x, &w.wq)?;
    let k = g.matmul(x, &w.wk)?;
    let v = g.matmul(x, &w.wv)?;
    let hd = config.head_dim();

    let mut heads = Vec::with_capacity(config.heads);
    for h in 0..config.heads {
        let (qh, kh, vh) = if config.heads == 1 {
            (q.clone(), k.clone(), v.clone())
        } else {
            let (lo, hi) = (h * hd, (h + 1) * hd);
            (
                g.slice_cols(&q, lo, hi)?,
                g.slice_cols(&k, lo, hi)?,
                g.slice_cols(&v, lo, hi)?,
            )
        };
        let out = match kind {
            AttentionKind::Softmax => softmax_attention(g, &qh, &kh, &vh)?,
            AttentionKind::Vla => {
                vanilla_linear_attention(g, &qh, &kh, &vh, FeatureMap::Relu, Order::Linear)?
            }
            AttentionKind::Fla => vanilla_linear_attention(
                g,
                &qh,
                &kh,
                &vh,
                FeatureMap::Focused(config.focus),
                Order::Linear,
            )?,
        };
        heads.push(out);
    }
    let mut merged = if heads.len() == 1 {
        heads.pop().expect("one head")
    } else {
        g.concat_cols(&heads)?
    };
    drop(heads);

    if kind == AttentionKind::Fla {
        // The convolution is per channel, so one pass over all of V equals
        // per-head passes with each head's slice of the kernel.
        let local = g.depthwise_conv1d(&v, &w.dwc_kernel)?;
        merged = g.add(&merged, &local)?;
    }
    g.matmul(&merged, &w.wo)
}

/// `Y = X + gate ⊙ attention(Z)` with `Z = LayerNorm(X)` shared by both
/// branches and `gate = act(Z·Wg)`. Without the gate, `Y = X + attention(Z)`.
pub fn attention_block<G: Graph>(
    g: &mut G,
    x: &G::Value,
    w: &FlaWeights<G::Value>,
    config: &FlaConfig,
    kind: AttentionKind,
) -> Result<G::Value> {
    let z = g.layer_norm(x, &w.norm_gain, &w.norm_bias, NORM_EPS)?;
    let mut a = multi_head_attention(g, &z, w, config, kind)?;
    if config.gated {
        let pre = g.matmul(&z, &w.wg)?;
        let gate = match config.gate_activation {
            GateActivation::Silu => g.silu(&pre)?,
            GateActivation::Sigmoid => g.sigmoid(&pre)?,
        };
        a = g.mul(&gate, &a)?;
    }
    g.add(x, &a)
}

/// Multi-head focused linear attention on plain tensors.
pub fn multi_head_fla(x: &Tensor, params: &FlaParams) -> Result<Tensor> {
    let mut g = Eval;
    let w = FlaWeights::bind(&mut g, params, "fla")?;
    multi_head_attention(&mut g, x, &w, &params.config, AttentionKind::Fla)
}

/// Gated focused-linear-attention block on plain tensors.
pub fn gated_fla(x: &Tensor, params: &FlaParams) -> Result<Tensor> {
    let mut g = Eval;
    let w = FlaWeights::bind(&mut g, params, "fla")?;
    attention_block(&mut g, x, &w, &params.config, AttentionKind::Fla)
}
