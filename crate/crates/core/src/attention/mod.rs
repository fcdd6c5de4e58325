//! Softmax, vanilla linear and focused linear attention, the multi-head
//! wrapper and the gated residual block.

mod block;
mod kernels;

pub use block::{
    attention_block, gated_fla, multi_head_attention, multi_head_fla, FlaWeights, NORM_EPS,
};
pub use kernels::{
    apply_feature_map, eager, focused_linear_attention, linear_attention_weights,
    softmax_attention, vanilla_linear_attention, FeatureMap, Order, ATTENTION_EPS,
};

use std::fmt;
use std::str::FromStr;

use rand::Rng;

use crate::error::{Error, Result};
use crate::tensor::Tensor;

/// Which similarity the attention block uses.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum AttentionKind {
    Softmax,
    /// Linear attention with a ReLU feature map.
    Vla,
    /// Focused kernel plus depthwise-convolution correction.
    Fla,
}

impl AttentionKind {
    pub const ALL: [AttentionKind; 3] = [
        AttentionKind::Softmax,
        AttentionKind::Vla,
        AttentionKind::Fla,
    ];

    pub fn name(self) -> &'static str {
        match self {
            AttentionKind::Softmax => "softmax",
            AttentionKind::Vla => "vla",
            AttentionKind::Fla => "fla",
        }
    }
}

impl fmt::Display for AttentionKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for AttentionKind {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s.trim().to_ascii_lowercase().as_str() {
            "softmax" => Ok(AttentionKind::Softmax),
            "vla" => Ok(AttentionKind::Vla),
            "fla" => Ok(AttentionKind::Fla),
            other => Err(Error::Config(format!("unknown attention mode {other:?}"))),
        }
    }
}

/// Attention kind plus the gate ablation flag.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub struct AttentionMode {
    pub kind: AttentionKind,
    pub gated: bool,
}

impl AttentionMode {
    pub fn gated(kind: AttentionKind) -> Self {
        AttentionMode { kind, gated: true }
    }
}

/// Activation of the gate branch.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Default)]
pub enum GateActivation {
    #[default]
    Silu,
    Sigmoid,
}

/// Hyperparameters of one attention block.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct FlaConfig {
    pub dim: usize,
    pub heads: usize,
    /// Focus factor `p` of the focused kernel.
    pub focus: f64,
    /// Depthwise-convolution kernel size `k`.
    pub kernel_size: usize,
    pub gated: bool,
    pub gate_activation: GateActivation,
}

impl FlaConfig {
    pub fn new(dim: usize, heads: usize) -> Self {
        FlaConfig {
            dim,
            heads,
            focus: 3.0,
            kernel_size: 7,
            gated: true,
            gate_activation: GateActivation::Silu,
        }
    }

    pub fn validate(&self) -> Result<()> {
        if self.dim == 0 || self.heads == 0 || self.dim % self.heads != 0 {
            return Err(Error::Config(format!(
                "channel width {} is not divisible by {} heads",
                self.dim, self.heads
            )));
        }
        if self.kernel_size % 2 == 0 {
            return Err(Error::Config(format!(
                "DWC kernel size must be odd, got {}",
                self.kernel_size
            )));
        }
        if !(self.focus > 0.0 && self.focus.is_finite()) {
            return Err(Error::Config(format!(
                "focus factor must be positive, got {}",
                self.focus
            )));
        }
        Ok(())
    }

    pub fn head_dim(&self) -> usize {
        self.dim / self.heads
    }
}

/// Weights of one gated attention block. Projections act on row vectors
/// (`Q = X·Wq`).
#[derive(Debug, Clone, PartialEq)]
pub struct FlaParams {
    pub config: FlaConfig,
    pub wq: Tensor,
    pub wk: Tensor,
    pub wv: Tensor,
    pub wo: Tensor,
    /// `d×k`, one kernel row per channel.
    pub dwc_kernel: Tensor,
    pub wg: Tensor,
    pub norm_gain: Tensor,
    pub norm_bias: Tensor,
}

/// Standard deviation of the noise added to the delta-initialized DWC kernel.
pub const DWC_INIT_NOISE: f64 = 0.02;

impl FlaParams {
    /// Projections drawn from N(0, 1/d); the DWC kernel starts as a centered
    /// delta plus N(0, 0.02²) noise; the norm starts as the identity affine map.
    pub fn init<R: Rng + ?Sized>(config: FlaConfig, rng: &mut R) -> Result<Self> {
        config.validate()?;
        let d = config.dim;
        let std = 1.0 / (d as f64).sqrt();
        let wq = Tensor::randn(&[d, d], std, rng);
        let wk = Tensor::randn(&[d, d], std, rng);
        let wv = Tensor::randn(&[d, d], std, rng);
        let wo = Tensor::randn(&[d, d], std, rng);
        let wg = Tensor::randn(&[d, d], std, rng);
        let mut dwc_kernel = Tensor::randn(&[d, config.kernel_size], DWC_INIT_NOISE, rng);
        let center = config.kernel_size / 2;
        for c in 0..d {
            dwc_kernel.data_mut()[c * config.kernel_size + center] += 1.0;
        }
        Ok(FlaParams {
            config,
            wq,
            wk,
            wv,
            wo,
            dwc_kernel,
            wg,
            norm_gain: Tensor::full(&[d], 1.0),
            norm_bias: Tensor::zeros(&[d]),
        })
    }

    /// Checks every weight shape against the config.
    pub fn validate(&self) -> Result<()> {
        self.config.validate()?;
        let d = self.config.dim;
        for (name, t) in self.tensors() {
            let expected: &[usize] = match name {
                "dwc_kernel" => &[d, self.config.kernel_size],
                "norm_gain" | "norm_bias" => &[d],
                _ => &[d, d],
            };
            if t.shape() != expected {
                return Err(Error::dim("FlaParams", expected, t.shape()));
            }
        }
        Ok(())
    }

    pub fn tensors(&self) -> [(&'static str, &Tensor); 8] {
        [
            ("wq", &self.wq),
            ("wk", &self.wk),
            ("wv", &self.wv),
            ("wo", &self.wo),
            ("dwc_kernel", &self.dwc_kernel),
            ("wg", &self.wg),
            ("norm_gain", &self.norm_gain),
            ("norm_bias", &self.norm_bias),
        ]
    }

    pub fn tensors_mut(&mut self) -> [(&'static str, &mut Tensor); 8] {
        [
            ("wq", &mut self.wq),
            ("wk", &mut self.wk),
            ("wv", &mut self.wv),
            ("wo", &mut self.wo),
            ("dwc_kernel", &mut self.dwc_kernel),
            ("wg", &mut self.wg),
            ("norm_gain", &mut self.norm_gain),
            ("norm_bias", &mut self.norm_bias),
        ]
    }
}
