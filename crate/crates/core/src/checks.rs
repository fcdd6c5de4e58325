//! Gradient checks of every differentiable attention op and of the full
//! separation loss, shared by the CLI and the test suites.

use std::collections::BTreeMap;

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

use crate::attention::{
    attention_block, focused_linear_attention, multi_head_attention, softmax_attention,
    vanilla_linear_attention, AttentionKind, FeatureMap, FlaConfig, FlaParams, FlaWeights, Order,
    ATTENTION_EPS, NORM_EPS,
};
use crate::autodiff::{grad_check, grad_check_params, Graph, Tape, Var, DEFAULT_STEP};
use crate::error::Result;
use crate::sepnet::{grad_check_loss, synth_mixture, SepNet, SepNetConfig};
use crate::tensor::{ops, Tensor};

/// Tolerance for single attention ops.
pub const OP_TOLERANCE: f64 = 1e-4;
/// Tolerance for the deep composition of the full model loss.
pub const MODEL_TOLERANCE: f64 = 1e-3;

#[derive(Debug, Clone)]
pub struct GradientCheck {
    pub name: String,
    pub max_rel_error: f64,
    pub tolerance: f64,
}

impl GradientCheck {
    pub fn passed(&self) -> bool {
        self.max_rel_error < self.tolerance
    }
}

/// Weighted sum with fixed random weights, so that no gradient is trivially uniform.
fn reduce(tape: &mut Tape, y: Var, seed: u64) -> Result<Var> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let w = Tensor::randn(tape.value(y).shape(), 1.0, &mut rng);
    let w = tape.constant(w)?;
    let prod = tape.mul(&y, &w)?;
    tape.sum(&prod)
}

/// Smallest |entry| allowed at a check point: direct inputs stay well clear
/// of the ReLU kink (a focused map with p=3 flattens entries near zero into
/// gradients that drown in rounding noise); projected block inputs, with
/// many more entries, only need to stay off it.
const INPUT_MARGIN: f64 = 0.1;
const PROJECTED_MARGIN: f64 = 1e-3;

/// Linear attention is invariant to scaling a query row, and a channel that
/// no key activates is invisible to every query. Either way some gradient
/// entries are exactly zero and both estimates reduce to rounding noise, so
/// check points are drawn away from those degenerate sets: each query row
/// needs two positive channels per head, each key channel two positive
/// keys, and no entry may sit near the ReLU kink.
fn generic_qk(q: &Tensor, k: &Tensor, heads: usize, margin: f64) -> bool {
    let d = q.shape()[1];
    let dh = d / heads;
    let away_from_kink = |t: &Tensor| t.data().iter().all(|v| v.abs() > margin);
    let rows_ok = q.data().chunks(d).all(|row| {
        row.chunks(dh)
            .all(|head| head.iter().filter(|&&v| v > 0.0).count() >= 2)
    });
    let cols_ok = (0..d).all(|c| k.data().chunks(d).filter(|row| row[c] > 0.0).count() >= 2);
    away_from_kink(q) && away_from_kink(k) && rows_ok && cols_ok
}

fn qkv_params(n: usize, d: usize, rng: &mut ChaCha8Rng) -> BTreeMap<String, Tensor> {
    loop {
        let q = Tensor::randn(&[n, d], 1.0, rng);
        let k = Tensor::randn(&[n, d], 1.0, rng);
        if generic_qk(&q, &k, 1, INPUT_MARGIN) {
            let v = Tensor::randn(&[n, d], 1.0, rng);
            return BTreeMap::from([
                ("q".to_string(), q),
                ("k".to_string(), k),
                ("v".to_string(), v),
            ]);
        }
    }
}

/// Draws a block and an input whose projected queries are generic for
/// both the plain multi-head path and the normalized gated path.
fn block_point(rng: &mut ChaCha8Rng) -> Result<(FlaParams, Tensor)> {
    loop {
        let params = FlaParams::init(FlaConfig::new(8, 2), rng)?;
        let x = Tensor::randn(&[6, 8], 1.0, rng);
        let z = ops::layer_norm(&x, &params.norm_gain, &params.norm_bias, NORM_EPS)?;
        let heads = params.config.heads;
        let mut ok = true;
        for input in [&x, &z] {
            ok &= generic_qk(
                &ops::matmul(input, &params.wq)?,
                &ops::matmul(input, &params.wk)?,
                heads,
                PROJECTED_MARGIN,
            );
        }
        if ok {
            return Ok((params, x));
        }
    }
}

fn bind_qkv(tape: &mut Tape, p: &BTreeMap<String, Tensor>) -> Result<(Var, Var, Var)> {
    Ok((
        tape.param("q", &p["q"])?,
        tape.param("k", &p["k"])?,
        tape.param("v", &p["v"])?,
    ))
}

fn block_params(params: &FlaParams) -> BTreeMap<String, Tensor> {
    let mut map: BTreeMap<String, Tensor> = params
        .tensors()
        .into_iter()
        .map(|(n, t)| (format!("blk.{n}"), t.clone()))
        .collect();
    map.insert("x".into(), Tensor::zeros(&[0]));
    map
}

fn with_block(params: &FlaParams, values: &BTreeMap<String, Tensor>) -> FlaParams {
    let mut p = params.clone();
    for (name, slot) in p.tensors_mut() {
        *slot = values[&format!("blk.{name}")].clone();
    }
    p
}

/// Runs every check with inputs drawn from `seed`.
pub fn gradient_checks(seed: u64) -> Result<Vec<GradientCheck>> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut out = Vec::new();
    let mut push = |name: &str, err: f64, tol: f64| {
        out.push(GradientCheck {
            name: name.to_string(),
            max_rel_error: err,
            tolerance: tol,
        });
    };
    let h = DEFAULT_STEP;

    let x = Tensor::randn(&[5, 4], 1.0, &mut rng);
    for p in [1.0, 3.0, 8.0] {
        let err = grad_check(
            |t, x| {
                let y = t.focused_feature_map(&x, p, ATTENTION_EPS)?;
                reduce(t, y, 1)
            },
            &x,
            h,
        )?;
        push(&format!("focused_feature_map p={p}"), err, OP_TOLERANCE);
    }

    let k = Tensor::randn(&[4, 3], 0.5, &mut rng);
    let params = BTreeMap::from([("x".to_string(), x.clone()), ("kernel".to_string(), k)]);
    let err = grad_check_params(
        |t, p| {
            let x = t.param("x", &p["x"])?;
            let k = t.param("kernel", &p["kernel"])?;
            let y = t.depthwise_conv1d(&x, &k)?;
            reduce(t, y, 2)
        },
        &params,
        h,
    )?;
    push("depthwise_conv1d", err, OP_TOLERANCE);

    let params = BTreeMap::from([
        ("x".to_string(), Tensor::randn(&[3, 5], 1.5, &mut rng)),
        ("gain".to_string(), Tensor::randn(&[5], 1.0, &mut rng)),
        ("bias".to_string(), Tensor::randn(&[5], 1.0, &mut rng)),
    ]);
    let err = grad_check_params(
        |t, p| {
            let x = t.param("x", &p["x"])?;
            let g = t.param("gain", &p["gain"])?;
            let b = t.param("bias", &p["bias"])?;
            let y = t.layer_norm(&x, &g, &b, 1e-5)?;
            reduce(t, y, 3)
        },
        &params,
        h,
    )?;
    push("layer_norm", err, OP_TOLERANCE);

    let s = Tensor::randn(&[4, 6], 2.0, &mut rng);
    let err = grad_check(
        |t, s| {
            let y = t.softmax_rows(s)?;
            reduce(t, y, 4)
        },
        &s,
        h,
    )?;
    push("softmax_rows", err, OP_TOLERANCE);

    let qkv = qkv_params(6, 4, &mut rng);
    let err = grad_check_params(
        |t, p| {
            let (q, k, v) = bind_qkv(t, p)?;
            let y = softmax_attention(t, &q, &k, &v)?;
            reduce(t, y, 5)
        },
        &qkv,
        h,
    )?;
    push("softmax_attention", err, OP_TOLERANCE);

    for (label, map) in [
        ("relu", FeatureMap::Relu),
        ("focused", FeatureMap::Focused(3.0)),
    ] {
        for order in [Order::Quadratic, Order::Linear] {
            let err = grad_check_params(
                |t, p| {
                    let (q, k, v) = bind_qkv(t, p)?;
                    let y = vanilla_linear_attention(t, &q, &k, &v, map, order)?;
                    reduce(t, y, 6)
                },
                &qkv,
                h,
            )?;
            push(
                &format!("vanilla_linear_attention {label} {order:?}"),
                err,
                OP_TOLERANCE,
            );
        }
    }

    let mut with_kernel = qkv.clone();
    with_kernel.insert("kernel".into(), Tensor::randn(&[4, 3], 0.5, &mut rng));
    let err = grad_check_params(
        |t, p| {
            let (q, k, v) = bind_qkv(t, p)?;
            let ker = t.param("kernel", &p["kernel"])?;
            let y = focused_linear_attention(t, &q, &k, &v, 3.0, &ker)?;
            reduce(t, y, 7)
        },
        &with_kernel,
        h,
    )?;
    push("focused_linear_attention", err, OP_TOLERANCE);

    let (block, x) = block_point(&mut rng)?;
    let mut values = block_params(&block);
    values.insert("x".into(), x);
    for (name, gated, multi) in [
        ("multi_head_fla", true, true),
        ("gated_fla", true, false),
        ("ungated_fla", false, false),
    ] {
        let cfg = FlaConfig {
            gated,
            ..block.config
        };
        let err = grad_check_params(
            |t, p| {
                let probe = with_block(
                    &FlaParams {
                        config: cfg,
                        ..block.clone()
                    },
                    p,
                );
                let x = t.param("x", &p["x"])?;
                let w = FlaWeights::bind(t, &probe, "blk")?;
                let y = if multi {
                    multi_head_attention(t, &x, &w, &cfg, AttentionKind::Fla)?
                } else {
                    attention_block(t, &x, &w, &cfg, AttentionKind::Fla)?
                };
                reduce(t, y, 8)
            },
            &values,
            h,
        )?;
        push(name, err, OP_TOLERANCE);
    }

    let net = SepNet::init(SepNetConfig::tiny(), seed)?;
    let sample = synth_mixture(seed, 256, net.config.sample_rate);
    push(
        "sepnet pit loss (tiny)",
        grad_check_loss(&net, &sample, h)?,
        MODEL_TOLERANCE,
    );

    Ok(out)
}
