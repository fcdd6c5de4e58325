use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

use crate::attention::{
    attention_block, AttentionKind, FlaConfig, FlaParams, FlaWeights, GateActivation,
};
use crate::autodiff::{Eval, Graph};
use crate::error::{Error, Result};
use crate::tensor::{ops, Tensor};

/// Number of sources the network separates.
pub const SPEAKERS: usize = 2;

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SepNetConfig {
    /// Encoder window in samples.
    pub enc_kernel: usize,
    /// Encoder hop in samples.
    pub enc_stride: usize,
    /// Latent channel width.
    pub channels: usize,
    pub blocks: usize,
    pub heads: usize,
    pub focus: f64,
    pub dwc_kernel: usize,
    pub sample_rate: u32,
    pub gated: bool,
    pub gate_activation: GateActivation,
}

impl Default for SepNetConfig {
    fn default() -> Self {
        Self::toy()
    }
}

impl SepNetConfig {
    /// 1 s at 8 kHz scale: K=16, S=8, d=32, four blocks of four heads, p=3, k=7.
    pub fn toy() -> Self {
        SepNetConfig {
            enc_kernel: 16,
            enc_stride: 8,
            channels: 32,
            blocks: 4,
            heads: 4,
            focus: 3.0,
            dwc_kernel: 7,
            sample_rate: 8000,
            gated: true,
            gate_activation: GateActivation::Silu,
        }
    }

    /// Smallest configuration used for gradient checks.
    pub fn tiny() -> Self {
        SepNetConfig {
            channels: 8,
            blocks: 1,
            heads: 2,
            ..Self::toy()
        }
    }

    pub fn block_config(&self) -> FlaConfig {
        FlaConfig {
            dim: self.channels,
            heads: self.heads,
            focus: self.focus,
            kernel_size: self.dwc_kernel,
            gated: self.gated,
            gate_activation: self.gate_activation,
        }
    }

    pub fn validate(&self) -> Result<()> {
        if self.enc_stride == 0 || self.enc_stride > self.enc_kernel {
            return Err(Error::Config(format!(
                "encoder stride {} must be in 1..={}",
                self.enc_stride, self.enc_kernel
            )));
        }
        if self.blocks == 0 {
            return Err(Error::Config(
                "at least one attention block is required".into(),
            ));
        }
        if self.sample_rate == 0 {
            return Err(Error::Config("sample rate must be positive".into()));
        }
        self.block_config().validate()
    }

    /// Latent frames produced for a signal of `len` samples.
    pub fn frames_for(&self, len: usize) -> Result<usize> {
        ops::frame_count(len, self.enc_kernel, self.enc_stride)
    }
}

/// Toy single-path separator: strided linear encoder with ReLU, a stack of
/// gated attention blocks, sigmoid masks on the shared latent, and one
/// overlap-add linear decoder per speaker.
#[derive(Debug, Clone, PartialEq)]
pub struct SepNet {
    pub config: SepNetConfig,
    /// `K×d`
    pub encoder: Tensor,
    /// `d×K` each
    pub decoders: [Tensor; SPEAKERS],
    pub blocks: Vec<FlaParams>,
    /// `d×2d`
    pub split: Tensor,
}

impl SepNet {
    pub fn init(config: SepNetConfig, seed: u64) -> Result<Self> {
        config.validate()?;
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let (k, d) = (config.enc_kernel, config.channels);
        let dstd = 1.0 / (d as f64).sqrt();
        let encoder = Tensor::randn(&[k, d], 1.0 / (k as f64).sqrt(), &mut rng);
        let blocks = (0..config.blocks)
            .map(|_| FlaParams::init(config.block_config(), &mut rng))
            .collect::<Result<Vec<_>>>()?;
        let split = Tensor::randn(&[d, SPEAKERS * d], dstd, &mut rng);
        let decoders = [
            Tensor::randn(&[d, k], dstd, &mut rng),
            Tensor::randn(&[d, k], dstd, &mut rng),
        ];
        Ok(SepNet {
            config,
            encoder,
            decoders,
            blocks,
            split,
        })
    }

    /// All parameters with their names, in a fixed order.
    pub fn params(&self) -> Vec<(String, &Tensor)> {
        let mut out = vec![("encoder".to_string(), &self.encoder)];
        for (i, b) in self.blocks.iter().enumerate() {
            out.extend(
                b.tensors()
                    .into_iter()
                    .map(|(n, t)| (format!("block{i}.{n}"), t)),
            );
        }
        out.push(("split".to_string(), &self.split));
        out.extend(
            self.decoders
                .iter()
                .enumerate()
                .map(|(i, t)| (format!("decoder{i}"), t)),
        );
        out
    }

    pub fn params_mut(&mut self) -> Vec<(String, &mut Tensor)> {
        let mut out = vec![("encoder".to_string(), &mut self.encoder)];
        for (i, b) in self.blocks.iter_mut().enumerate() {
            out.extend(
                b.tensors_mut()
                    .into_iter()
                    .map(|(n, t)| (format!("block{i}.{n}"), t)),
            );
        }
        out.push(("split".to_string(), &mut self.split));
        out.extend(
            self.decoders
                .iter_mut()
                .enumerate()
                .map(|(i, t)| (format!("decoder{i}"), t)),
        );
        out
    }

    /// Copy of `self` with parameters replaced by the same-named entries of `values`.
    pub fn with_params(
        &self,
        values: &std::collections::BTreeMap<String, Tensor>,
    ) -> Result<SepNet> {
        let mut net = self.clone();
        for (name, slot) in net.params_mut() {
            let v = values
                .get(&name)
                .ok_or_else(|| Error::Contract(format!("missing parameter {name}")))?;
            if v.shape() != slot.shape() {
                return Err(Error::dim("with_params", slot.shape(), v.shape()));
            }
            *slot = v.clone();
        }
        Ok(net)
    }

    pub fn parameter_count(&self) -> usize {
        self.params().iter().map(|(_, t)| t.len()).sum()
    }

    /// Checks parameter shapes against the config.
    pub fn validate(&self) -> Result<()> {
        self.config.validate()?;
        let (k, d) = (self.config.enc_kernel, self.config.channels);
        let check = |t: &Tensor, shape: &[usize]| {
            if t.shape() == shape {
                Ok(())
            } else {
                Err(Error::dim("SepNet", shape, t.shape()))
            }
        };
        check(&self.encoder, &[k, d])?;
        check(&self.split, &[d, SPEAKERS * d])?;
        for dec in &self.decoders {
            check(dec, &[d, k])?;
        }
        if self.blocks.len() != self.config.blocks {
            return Err(Error::Config(format!(
                "config has {} blocks but {} were supplied",
                self.config.blocks,
                self.blocks.len()
            )));
        }
        for b in &self.blocks {
            b.validate()?;
            if b.config != self.config.block_config() {
                return Err(Error::Config(
                    "block hyperparameters differ from the network config".into(),
                ));
            }
        }
        Ok(())
    }

    /// `ReLU(frames(wave)·encoder)`: one `d`-dimensional latent per frame.
    pub fn encode_in<G: Graph>(&self, g: &mut G, wave: &G::Value) -> Result<G::Value> {
        let basis = g.param("encoder", &self.encoder)?;
        let frames = g.frames(wave, self.config.enc_kernel, self.config.enc_stride)?;
        let pre = g.matmul(&frames, &basis)?;
        g.relu(&pre)
    }

    pub fn encode(&self, wave: &Tensor) -> Result<Tensor> {
        self.encode_in(&mut Eval, wave)
    }

    /// Full forward pass; each estimate has the mixture's length.
    pub fn forward<G: Graph>(&self, g: &mut G, mixture: &G::Value) -> Result<[G::Value; SPEAKERS]> {
        let len = g.tensor(mixture).len();
        let d = self.config.channels;
        let latent = self.encode_in(g, mixture)?;

        let mut x = latent.clone();
        for (i, block) in self.blocks.iter().enumerate() {
            let w = FlaWeights::bind(g, block, &format!("block{i}"))?;
            x = attention_block(g, &x, &w, &block.config, AttentionKind::Fla)?;
        }

        let split = g.param("split", &self.split)?;
        let logits = g.matmul(&x, &split)?;
        let masks = g.sigmoid(&logits)?;
        let mut outs = Vec::with_capacity(SPEAKERS);
        for s in 0..SPEAKERS {
            let mask = g.slice_cols(&masks, s * d, (s + 1) * d)?;
            let masked = g.mul(&mask, &latent)?;
            let basis = g.param(&format!("decoder{s}"), &self.decoders[s])?;
            let frames = g.matmul(&masked, &basis)?;
            outs.push(g.overlap_add(&frames, self.config.enc_stride, len)?);
        }
        let second = outs.pop().expect("two speakers");
        let first = outs.pop().expect("two speakers");
        Ok([first, second])
    }

    /// Separates a mixture into two estimates of the same length.
    pub fn separate(&self, mixture: &Tensor) -> Result<[Tensor; SPEAKERS]> {
        let wave = Tensor::new(&[mixture.len()], mixture.data().to_vec())?;
        self.forward(&mut Eval, &wave)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn config_validation() {
        assert!(SepNetConfig::toy().validate().is_ok());
        assert!(SepNetConfig {
            blocks: 0,
            ..SepNetConfig::toy()
        }
        .validate()
        .is_err());
        assert!(SepNetConfig {
            enc_stride: 17,
            ..SepNetConfig::toy()
        }
        .validate()
        .is_err());
        assert!(SepNetConfig {
            heads: 3,
            ..SepNetConfig::toy()
        }
        .validate()
        .is_err());
    }

    #[test]
    fn encode_frame_counts() {
        let net = SepNet::init(SepNetConfig::tiny(), 0).unwrap();
        assert_eq!(
            net.encode(&Tensor::zeros(&[8000])).unwrap().shape(),
            &[999, 8]
        );
        assert_eq!(net.encode(&Tensor::zeros(&[16])).unwrap().shape(), &[1, 8]);
        assert!(matches!(
            net.encode(&Tensor::zeros(&[15])),
            Err(Error::InputTooShort { .. })
        ));
    }

    #[test]
    fn param_names_are_unique() {
        let net = SepNet::init(SepNetConfig::toy(), 0).unwrap();
        let names: std::collections::BTreeSet<_> =
            net.params().into_iter().map(|(n, _)| n).collect();
        assert_eq!(names.len(), net.params().len());
        assert!(net.validate().is_ok());
    }
}
