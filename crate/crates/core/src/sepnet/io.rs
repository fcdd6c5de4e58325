//! Versioned flat binary model files and raw `f32` PCM.
//!
//! Model layout, all integers and floats little-endian:
//!
//! ```text
//! magic      8 bytes  "FLASEPNT"
//! version    u32      1
//! config     enc_kernel u32, enc_stride u32, channels u32, blocks u32,
//!            heads u32, focus f64, dwc_kernel u32, sample_rate u32,
//!            gated u8, gate_activation u8 (0 = SiLU, 1 = sigmoid)
//! count      u32      number of parameter tensors
//! tensor     name_len u32, name (UTF-8), rank u32, dims u64 × rank,
//!            data f64 × product(dims)
//! ```

use std::io::{Read, Write};

use crate::attention::GateActivation;
use crate::error::{Error, Result};
use crate::sepnet::{SepNet, SepNetConfig};
use crate::tensor::Tensor;

pub const MAGIC: &[u8; 8] = b"FLASEPNT";
pub const FORMAT_VERSION: u32 = 1;

fn put_u32(w: &mut impl Write, v: usize) -> Result<()> {
    let v = u32::try_from(v).map_err(|_| Error::Format(format!("{v} does not fit in u32")))?;
    w.write_all(&v.to_le_bytes())?;
    Ok(())
}

fn get_u32(r: &mut impl Read) -> Result<u32> {
    let mut b = [0u8; 4];
    r.read_exact(&mut b)?;
    Ok(u32::from_le_bytes(b))
}

fn get_u64(r: &mut impl Read) -> Result<u64> {
    let mut b = [0u8; 8];
    r.read_exact(&mut b)?;
    Ok(u64::from_le_bytes(b))
}

fn get_f64(r: &mut impl Read) -> Result<f64> {
    Ok(f64::from_bits(get_u64(r)?))
}

fn get_u8(r: &mut impl Read) -> Result<u8> {
    let mut b = [0u8; 1];
    r.read_exact(&mut b)?;
    Ok(b[0])
}

pub fn write_model(net: &SepNet, w: &mut impl Write) -> Result<()> {
    let c = &net.config;
    w.write_all(MAGIC)?;
    w.write_all(&FORMAT_VERSION.to_le_bytes())?;
    put_u32(w, c.enc_kernel)?;
    put_u32(w, c.enc_stride)?;
    put_u32(w, c.channels)?;
    put_u32(w, c.blocks)?;
    put_u32(w, c.heads)?;
    w.write_all(&c.focus.to_le_bytes())?;
    put_u32(w, c.dwc_kernel)?;
    w.write_all(&c.sample_rate.to_le_bytes())?;
    w.write_all(&[u8::from(c.gated)])?;
    w.write_all(&[match c.gate_activation {
        GateActivation::Silu => 0,
        GateActivation::Sigmoid => 1,
    }])?;

    let params = net.params();
    put_u32(w, params.len())?;
    for (name, t) in params {
        put_u32(w, name.len())?;
        w.write_all(name.as_bytes())?;
        put_u32(w, t.rank())?;
        for &d in t.shape() {
            w.write_all(&(d as u64).to_le_bytes())?;
        }
        for v in t.data() {
            w.write_all(&v.to_le_bytes())?;
        }
    }
    Ok(())
}

pub fn read_model(r: &mut impl Read) -> Result<SepNet> {
    let mut magic = [0u8; 8];
    r.read_exact(&mut magic)?;
    if &magic != MAGIC {
        return Err(Error::Format("not a model file (bad magic)".into()));
    }
    let version = get_u32(r)?;
    if version != FORMAT_VERSION {
        return Err(Error::Format(format!(
            "unsupported model version {version}"
        )));
    }
    let config = SepNetConfig {
        enc_kernel: get_u32(r)? as usize,
        enc_stride: get_u32(r)? as usize,
        channels: get_u32(r)? as usize,
        blocks: get_u32(r)? as usize,
        heads: get_u32(r)? as usize,
        focus: get_f64(r)?,
        dwc_kernel: get_u32(r)? as usize,
        sample_rate: get_u32(r)?,
        gated: get_u8(r)? != 0,
        gate_activation: match get_u8(r)? {
            0 => GateActivation::Silu,
            1 => GateActivation::Sigmoid,
            other => return Err(Error::Format(format!("unknown gate activation {other}"))),
        },
    };
    config.validate()?;

    // Shapes come from a freshly initialized net; every slot must be overwritten.
    let mut net = SepNet::init(config, 0)?;
    let count = get_u32(r)? as usize;
    let mut seen = std::collections::BTreeSet::new();
    {
        let mut slots = net.params_mut();
        if count != slots.len() {
            return Err(Error::Format(format!(
                "expected {} tensors, file has {count}",
                slots.len()
            )));
        }
        for _ in 0..count {
            let name_len = get_u32(r)? as usize;
            let mut name = vec![0u8; name_len];
            r.read_exact(&mut name)?;
            let name = String::from_utf8(name)
                .map_err(|_| Error::Format("tensor name is not UTF-8".into()))?;
            let rank = get_u32(r)? as usize;
            let dims = (0..rank)
                .map(|_| Ok(get_u64(r)? as usize))
                .collect::<Result<Vec<_>>>()?;
            let slot = slots
                .iter_mut()
                .find(|(n, _)| *n == name)
                .ok_or_else(|| Error::Format(format!("unexpected tensor {name:?}")))?;
            if slot.1.shape() != dims.as_slice() {
                return Err(Error::dim("read_model", slot.1.shape(), &dims));
            }
            for v in slot.1.data_mut() {
                *v = get_f64(r)?;
            }
            seen.insert(name);
        }
    }
    if seen.len() != count {
        return Err(Error::Format("duplicate tensor names".into()));
    }
    Ok(net)
}

pub fn save_model(net: &SepNet, path: &std::path::Path) -> Result<()> {
    let mut w = std::io::BufWriter::new(std::fs::File::create(path)?);
    write_model(net, &mut w)?;
    w.flush()?;
    Ok(())
}

pub fn load_model(path: &std::path::Path) -> Result<SepNet> {
    read_model(&mut std::io::BufReader::new(std::fs::File::open(path)?))
}

/// Headerless little-endian `f32` mono PCM.
pub fn read_pcm_f32(bytes: &[u8]) -> Result<Tensor> {
    if bytes.len() % 4 != 0 {
        return Err(Error::Format(format!(
            "PCM byte length {} is not a multiple of 4",
            bytes.len()
        )));
    }
    let samples: Vec<f64> = bytes
        .chunks_exact(4)
        .map(|b| f64::from(f32::from_le_bytes([b[0], b[1], b[2], b[3]])))
        .collect();
    Tensor::new(&[samples.len()], samples)
}

pub fn write_pcm_f32(wave: &Tensor) -> Vec<u8> {
    wave.data()
        .iter()
        .flat_map(|&v| (v as f32).to_le_bytes())
        .collect()
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn model_round_trip() {
        let net = SepNet::init(SepNetConfig::tiny(), 5).unwrap();
        let mut buf = Vec::new();
        write_model(&net, &mut buf).unwrap();
        assert_eq!(&buf[..8], MAGIC);
        let back = read_model(&mut buf.as_slice()).unwrap();
        assert_eq!(back, net);
    }

    #[test]
    fn rejects_bad_magic_and_truncation() {
        let net = SepNet::init(SepNetConfig::tiny(), 5).unwrap();
        let mut buf = Vec::new();
        write_model(&net, &mut buf).unwrap();
        let mut bad = buf.clone();
        bad[0] = b'X';
        assert!(matches!(
            read_model(&mut bad.as_slice()),
            Err(Error::Format(_))
        ));
        assert!(read_model(&mut &buf[..buf.len() - 3]).is_err());
    }

    #[test]
    fn pcm_round_trip() {
        let wave = Tensor::new(&[3], vec![0.5, -0.25, 1.0]).unwrap();
        let bytes = write_pcm_f32(&wave);
        assert_eq!(bytes.len(), 12);
        assert_eq!(read_pcm_f32(&bytes).unwrap(), wave);
        assert!(read_pcm_f32(&bytes[..5]).is_err());
    }
}
