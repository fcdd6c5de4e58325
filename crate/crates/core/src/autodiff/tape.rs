use std::collections::BTreeMap;

use crate::autodiff::Graph;
use crate::error::{Error, Result};
use crate::sepnet::metrics;
use crate::tensor::{ops, Tensor};

/// Handle to a node recorded on a [`Tape`].
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub struct Var(usize);

impl Var {
    pub fn index(self) -> usize {
        self.0
    }
}

#[derive(Debug)]
enum Op {
    Constant,
    Param(String),
    MatMul(Var, Var),
    MatMulNt(Var, Var),
    MatMulTn(Var, Var),
    Add(Var, Var),
    Sub(Var, Var),
    Mul(Var, Var),
    Scale(Var, f64),
    Relu(Var),
    Sigmoid(Var),
    Silu(Var),
    LayerNorm {
        x: Var,
        gain: Var,
        bias: Var,
        eps: f64,
    },
    Softmax(Var),
    Conv {
        x: Var,
        kernel: Var,
    },
    Focused {
        x: Var,
        p: f64,
        eps: f64,
    },
    ColumnSums(Var),
    NormalizeRows {
        num: Var,
        den: Var,
        eps: f64,
    },
    SliceCols {
        x: Var,
        start: usize,
    },
    ConcatCols(Vec<Var>),
    Frames {
        wave: Var,
        stride: usize,
    },
    OverlapAdd {
        frames: Var,
        stride: usize,
    },
    SiSnr {
        est: Var,
        reference: Tensor,
        cap: f64,
    },
    Sum(Var),
}

impl Op {
    fn inputs(&self) -> Vec<Var> {
        use Op::*;
        match self {
            Constant | Param(_) => vec![],
            MatMul(a, b) | MatMulNt(a, b) | MatMulTn(a, b) | Add(a, b) | Sub(a, b) | Mul(a, b) => {
                vec![*a, *b]
            }
            Scale(a, _) | Relu(a) | Sigmoid(a) | Silu(a) | Softmax(a) | ColumnSums(a) | Sum(a) => {
                vec![*a]
            }
            LayerNorm { x, gain, bias, .. } => vec![*x, *gain, *bias],
            Conv { x, kernel } => vec![*x, *kernel],
            Focused { x, .. } | SliceCols { x, .. } => vec![*x],
            NormalizeRows { num, den, .. } => vec![*num, *den],
            ConcatCols(parts) => parts.clone(),
            Frames { wave, .. } => vec![*wave],
            OverlapAdd { frames, .. } => vec![*frames],
            SiSnr { est, .. } => vec![*est],
        }
    }
}

#[derive(Debug)]
struct Node {
    value: Tensor,
    op: Op,
    needs_grad: bool,
}

/// Records a computation for reverse-mode differentiation.
///
/// Nodes are appended in evaluation order, so every node's inputs precede
/// it. A tape is single-owner; build a fresh one per forward pass.
#[derive(Debug, Default)]
pub struct Tape {
    nodes: Vec<Node>,
}

/// Gradient of a scalar with respect to every parameter on the tape, by name.
#[derive(Debug, Clone, Default)]
pub struct GradMap {
    grads: BTreeMap<String, Tensor>,
}

impl GradMap {
    pub fn get(&self, name: &str) -> Option<&Tensor> {
        self.grads.get(name)
    }

    pub fn iter(&self) -> impl Iterator<Item = (&String, &Tensor)> {
        self.grads.iter()
    }

    pub fn len(&self) -> usize {
        self.grads.len()
    }

    pub fn is_empty(&self) -> bool {
        self.grads.is_empty()
    }

    /// L2 norm over all gradients taken together.
    pub fn global_norm(&self) -> f64 {
        self.grads
            .values()
            .map(|g| g.data().iter().map(|v| v * v).sum::<f64>())
            .sum::<f64>()
            .sqrt()
    }

    pub fn scale(&mut self, c: f64) {
        for g in self.grads.values_mut() {
            g.data_mut().iter_mut().for_each(|v| *v *= c);
        }
    }

    /// Adds `other` into `self`, name by name.
    pub fn accumulate(&mut self, other: GradMap) -> Result<()> {
        for (name, g) in other.grads {
            match self.grads.get_mut(&name) {
                Some(acc) => add_into(acc, &g)?,
                None => {
                    self.grads.insert(name, g);
                }
            }
        }
        Ok(())
    }
}

fn add_into(acc: &mut Tensor, g: &Tensor) -> Result<()> {
    if acc.shape() != g.shape() {
        return Err(Error::dim("gradient accumulation", acc.shape(), g.shape()));
    }
    for (a, &b) in acc.data_mut().iter_mut().zip(g.data()) {
        *a += b;
    }
    Ok(())
}

impl Tape {
    pub fn new() -> Self {
        Self::default()
    }

    pub fn len(&self) -> usize {
        self.nodes.len()
    }

    pub fn is_empty(&self) -> bool {
        self.nodes.is_empty()
    }

    pub fn value(&self, v: Var) -> &Tensor {
        &self.nodes[v.0].value
    }

    fn push(&mut self, value: Tensor, op: Op, name: &str) -> Result<Var> {
        let value = value.finite(name)?;
        let needs_grad = match &op {
            Op::Param(_) => true,
            other => other.inputs().iter().any(|v| self.nodes[v.0].needs_grad),
        };
        self.nodes.push(Node {
            value,
            op,
            needs_grad,
        });
        Ok(Var(self.nodes.len() - 1))
    }

    /// Gradients of the scalar `loss` with respect to every parameter.
    ///
    /// Parameters the loss does not depend on get zero gradients.
    pub fn backward(&self, loss: Var) -> Result<GradMap> {
        let root = &self.nodes[loss.0];
        if root.value.len() != 1 {
            return Err(Error::Contract(format!(
                "backward needs a scalar loss, got shape {:?}",
                root.value.shape()
            )));
        }
        let mut grads: Vec<Option<Tensor>> = (0..self.nodes.len()).map(|_| None).collect();
        grads[loss.0] = Some(Tensor::full(root.value.shape(), 1.0));
        let mut out = GradMap::default();

        for idx in (0..self.nodes.len()).rev() {
            let node = &self.nodes[idx];
            if let Op::Param(name) = &node.op {
                let g = grads[idx]
                    .take()
                    .unwrap_or_else(|| Tensor::zeros(node.value.shape()));
                match out.grads.get_mut(name) {
                    Some(acc) => add_into(acc, &g)?,
                    None => {
                        out.grads.insert(name.clone(), g);
                    }
                }
                continue;
            }
            let Some(g) = grads[idx].take() else { continue };
            if !node.needs_grad {
                continue;
            }
            for (input, gi) in self.input_grads(node, &g)? {
                if !self.nodes[input.0].needs_grad {
                    continue;
                }
                match &mut grads[input.0] {
                    Some(acc) => add_into(acc, &gi)?,
                    slot => *slot = Some(gi),
                }
            }
        }
        Ok(out)
    }

    /// Vector-Jacobian products of one node for each of its inputs.
    fn input_grads(&self, node: &Node, g: &Tensor) -> Result<Vec<(Var, Tensor)>> {
        let val = |v: &Var| &self.nodes[v.0].value;
        let y = &node.value;
        Ok(match &node.op {
            Op::Constant | Op::Param(_) => vec![],
            Op::MatMul(a, b) => vec![
                (*a, ops::matmul_nt(g, val(b))?),
                (*b, ops::matmul_tn(val(a), g)?),
            ],
            Op::MatMulNt(a, b) => vec![
                (*a, ops::matmul(g, val(b))?),
                (*b, ops::matmul_tn(g, val(a))?),
            ],
            Op::MatMulTn(a, b) => vec![
                (*a, ops::matmul_nt(val(b), g)?),
                (*b, ops::matmul(val(a), g)?),
            ],
            Op::Add(a, b) => vec![(*a, g.clone()), (*b, g.clone())],
            Op::Sub(a, b) => vec![(*a, g.clone()), (*b, ops::scale(g, -1.0))],
            Op::Mul(a, b) => vec![(*a, ops::mul(g, val(b))?), (*b, ops::mul(g, val(a))?)],
            Op::Scale(a, c) => vec![(*a, ops::scale(g, *c))],
            Op::Relu(a) => {
                let x = val(a);
                let data = g
                    .data()
                    .iter()
                    .zip(x.data())
                    .map(|(&g, &x)| if x > 0.0 { g } else { 0.0 })
                    .collect();
                vec![(*a, Tensor::new(x.shape(), data)?)]
            }
            Op::Sigmoid(a) => {
                let data = g
                    .data()
                    .iter()
                    .zip(y.data())
                    .map(|(&g, &s)| g * s * (1.0 - s))
                    .collect();
                vec![(*a, Tensor::new(y.shape(), data)?)]
            }
            Op::Silu(a) => {
                let x = val(a);
                let data = g
                    .data()
                    .iter()
                    .zip(x.data())
                    .map(|(&g, &x)| {
                        let s = ops::sigmoid_scalar(x);
                        g * s * (1.0 + x * (1.0 - s))
                    })
                    .collect();
                vec![(*a, Tensor::new(x.shape(), data)?)]
            }
            Op::LayerNorm { x, gain, bias, eps } => {
                let (dx, dg, db) = layer_norm_backward(val(x), val(gain), g, *eps)?;
                vec![(*x, dx), (*gain, dg), (*bias, db)]
            }
            Op::Softmax(a) => {
                let m = *y.shape().last().unwrap_or(&1);
                let mut dx = Tensor::zeros(y.shape());
                for ((drow, grow), yrow) in dx
                    .data_mut()
                    .chunks_exact_mut(m)
                    .zip(g.data().chunks_exact(m))
                    .zip(y.data().chunks_exact(m))
                {
                    let inner = ops::dot(grow, yrow);
                    for j in 0..m {
                        drow[j] = yrow[j] * (grow[j] - inner);
                    }
                }
                vec![(*a, dx)]
            }
            Op::Conv { x, kernel } => {
                let (dx, dk) = conv_backward(val(x), val(kernel), g)?;
                vec![(*x, dx), (*kernel, dk)]
            }
            Op::Focused { x, p, eps } => vec![(*x, focused_backward(val(x), g, *p, *eps)?)],
            Op::ColumnSums(a) => {
                let x = val(a);
                let d = g.len();
                let mut dx = Tensor::zeros(x.shape());
                for row in dx.data_mut().chunks_exact_mut(d.max(1)) {
                    row.copy_from_slice(g.data());
                }
                vec![(*a, dx)]
            }
            Op::NormalizeRows { num, den, eps } => {
                let (n, d) = y.dims2("normalize_rows")?;
                let dv = val(den);
                let mut dnum = Tensor::zeros(&[n, d]);
                let mut dden = Tensor::zeros(dv.shape());
                for i in 0..n {
                    let z = dv.data()[i];
                    if z < *eps {
                        continue;
                    }
                    let inv = 1.0 / (z + eps);
                    let grow = g.row(i);
                    for (o, &gv) in dnum.data_mut()[i * d..(i + 1) * d].iter_mut().zip(grow) {
                        *o = gv * inv;
                    }
                    dden.data_mut()[i] = -ops::dot(grow, y.row(i)) * inv;
                }
                vec![(*num, dnum), (*den, dden)]
            }
            Op::SliceCols { x, start } => {
                let xv = val(x);
                let (n, d) = xv.dims2("slice_cols")?;
                let w = g.shape()[1];
                let mut dx = Tensor::zeros(&[n, d]);
                for i in 0..n {
                    dx.data_mut()[i * d + start..i * d + start + w].copy_from_slice(g.row(i));
                }
                vec![(*x, dx)]
            }
            Op::ConcatCols(parts) => {
                let mut off = 0;
                let mut out = Vec::with_capacity(parts.len());
                for p in parts {
                    let w = val(p).shape()[1];
                    out.push((*p, ops::slice_cols(g, off, off + w)?));
                    off += w;
                }
                out
            }
            Op::Frames { wave, stride } => {
                let wv = val(wave);
                let mut dw = Tensor::zeros(wv.shape());
                for t in 0..g.shape()[0] {
                    for (i, &gv) in g.row(t).iter().enumerate() {
                        dw.data_mut()[t * stride + i] += gv;
                    }
                }
                vec![(*wave, dw)]
            }
            Op::OverlapAdd { frames, stride } => {
                let fv = val(frames);
                let (n, window) = fv.dims2("overlap_add")?;
                let counts = ops::overlap_counts(n, window, *stride, g.len());
                let mut df = Tensor::zeros(&[n, window]);
                for t in 0..n {
                    for i in 0..window {
                        let s = t * stride + i;
                        if s < g.len() {
                            df.data_mut()[t * window + i] = g.data()[s] / counts[s];
                        }
                    }
                }
                vec![(*frames, df)]
            }
            Op::SiSnr {
                est,
                reference,
                cap,
            } => {
                let (_, grad) = metrics::si_snr_with_grad(val(est), reference, *cap)?;
                let upstream = g.item()?;
                let data = grad.into_iter().map(|v| v * upstream).collect();
                vec![(*est, Tensor::new(val(est).shape(), data)?)]
            }
            Op::Sum(a) => vec![(*a, Tensor::full(val(a).shape(), g.item()?))],
        })
    }
}

fn layer_norm_backward(
    x: &Tensor,
    gain: &Tensor,
    g: &Tensor,
    eps: f64,
) -> Result<(Tensor, Tensor, Tensor)> {
    let d = gain.len();
    let mut dx = Tensor::zeros(x.shape());
    let mut dgain = Tensor::zeros(gain.shape());
    let mut dbias = Tensor::zeros(gain.shape());
    let gd = gain.data();
    let mut xhat = vec![0.0; d];
    let mut dxhat = vec![0.0; d];
    for ((row, grow), drow) in x
        .data()
        .chunks_exact(d)
        .zip(g.data().chunks_exact(d))
        .zip(dx.data_mut().chunks_exact_mut(d))
    {
        let (mean, inv) = ops::row_moments(row, eps);
        for j in 0..d {
            xhat[j] = (row[j] - mean) * inv;
            dxhat[j] = grow[j] * gd[j];
            dgain.data_mut()[j] += grow[j] * xhat[j];
            dbias.data_mut()[j] += grow[j];
        }
        let m1 = dxhat.iter().sum::<f64>() / d as f64;
        let m2 = ops::dot(&dxhat, &xhat) / d as f64;
        for j in 0..d {
            drow[j] = inv * (dxhat[j] - m1 - xhat[j] * m2);
        }
    }
    Ok((dx, dgain, dbias))
}

fn conv_backward(x: &Tensor, kernel: &Tensor, g: &Tensor) -> Result<(Tensor, Tensor)> {
    let (n, c) = x.dims2("depthwise_conv1d")?;
    let (_, k) = kernel.dims2("depthwise_conv1d")?;
    let pad = (k - 1) / 2;
    let taps = ops::transpose(kernel)?;
    let mut dx = Tensor::zeros(&[n, c]);
    let mut dtaps = Tensor::zeros(&[k, c]);
    let (xd, td, gd) = (x.data(), taps.data(), g.data());
    for t in 0..n {
        let grow = &gd[t * c..(t + 1) * c];
        for j in 0..k {
            let Some(src) = (t + j).checked_sub(pad).filter(|&s| s < n) else {
                continue;
            };
            let tap = &td[j * c..(j + 1) * c];
            let dxrow = &mut dx.data_mut()[src * c..(src + 1) * c];
            for ch in 0..c {
                dxrow[ch] += tap[ch] * grow[ch];
            }
            let xrow = &xd[src * c..(src + 1) * c];
            let dtap = &mut dtaps.data_mut()[j * c..(j + 1) * c];
            for ch in 0..c {
                dtap[ch] += grow[ch] * xrow[ch];
            }
        }
    }
    Ok((dx, ops::transpose(&dtaps)?))
}

fn focused_backward(x: &Tensor, g: &Tensor, p: f64, eps: f64) -> Result<Tensor> {
    let d = *x.shape().last().unwrap_or(&1);
    let mut dx = Tensor::zeros(x.shape());
    if d == 0 {
        return Ok(dx);
    }
    // Mirrors the forward pass: s = (r/m)^p with m = max(r).
    let mut s = vec![0.0; d];
    for ((row, grow), drow) in x
        .data()
        .chunks_exact(d)
        .zip(g.data().chunks_exact(d))
        .zip(dx.data_mut().chunks_exact_mut(d))
    {
        let (argmax, m) =
            row.iter().enumerate().fold(
                (0, 0.0f64),
                |(bi, bm), (i, &v)| if v > bm { (i, v) } else { (bi, bm) },
            );
        if m <= 0.0 {
            continue;
        }
        let mut nr2 = 0.0;
        let mut ns2 = 0.0;
        for j in 0..d {
            s[j] = if row[j] > 0.0 {
                ops::pow(row[j] / m, p)
            } else {
                0.0
            };
            if row[j] > 0.0 {
                nr2 += row[j] * row[j];
            }
            ns2 += s[j] * s[j];
        }
        let (nr, ns) = (nr2.sqrt(), ns2.sqrt());
        let den = ns + eps;
        let c = nr / den;
        let gs = ops::dot(grow, &s);
        // Through ‖s‖ in the denominator and ‖r‖ in the numerator.
        let via_ns = nr * gs / (den * den * ns);
        let via_nr = gs / (den * nr);
        for j in 0..d {
            let r = row[j];
            if r <= 0.0 {
                continue;
            }
            let ds = c * grow[j] - via_ns * s[j];
            drow[j] = via_nr * r + ds * p * ops::pow(r / m, p - 1.0) / m;
        }
        // The map depends on m only through eps.
        drow[argmax] -= nr * p * eps * gs / (m * den * den);
    }
    Ok(dx)
}

impl Graph for Tape {
    type Value = Var;

    fn constant(&mut self, t: Tensor) -> Result<Var> {
        self.push(t, Op::Constant, "constant")
    }

    fn param(&mut self, name: &str, t: &Tensor) -> Result<Var> {
        self.push(t.clone(), Op::Param(name.to_string()), name)
    }

    fn tensor<'a>(&'a self, v: &'a Var) -> &'a Tensor {
        self.value(*v)
    }

    fn matmul(&mut self, a: &Var, b: &Var) -> Result<Var> {
        let out = ops::matmul(self.value(*a), self.value(*b))?;
        self.push(out, Op::MatMul(*a, *b), "matmul")
    }

    fn matmul_nt(&mut self, a: &Var, b: &Var) -> Result<Var> {
        let out = ops::matmul_nt(self.value(*a), self.value(*b))?;
        self.push(out, Op::MatMulNt(*a, *b), "matmul_nt")
    }

    fn matmul_tn(&mut self, a: &Var, b: &Var) -> Result<Var> {
        let out = ops::matmul_tn(self.value(*a), self.value(*b))?;
        self.push(out, Op::MatMulTn(*a, *b), "matmul_tn")
    }

    fn add(&mut self, a: &Var, b: &Var) -> Result<Var> {
        let out = ops::add(self.value(*a), self.value(*b))?;
        self.push(out, Op::Add(*a, *b), "add")
    }

    fn sub(&mut self, a: &Var, b: &Var) -> Result<Var> {
        let out = ops::sub(self.value(*a), self.value(*b))?;
        self.push(out, Op::Sub(*a, *b), "sub")
    }

    fn mul(&mut self, a: &Var, b: &Var) -> Result<Var> {
        let out = ops::mul(self.value(*a), self.value(*b))?;
        self.push(out, Op::Mul(*a, *b), "mul")
    }

    fn scale(&mut self, a: Var, c: f64) -> Result<Var> {
        let out = ops::scale(self.value(a), c);
        self.push(out, Op::Scale(a, c), "scale")
    }

    fn relu(&mut self, a: &Var) -> Result<Var> {
        let out = ops::relu(self.value(*a));
        self.push(out, Op::Relu(*a), "relu")
    }

    fn sigmoid(&mut self, a: &Var) -> Result<Var> {
        let out = ops::sigmoid(self.value(*a));
        self.push(out, Op::Sigmoid(*a), "sigmoid")
    }

    fn silu(&mut self, a: &Var) -> Result<Var> {
        let out = ops::silu(self.value(*a));
        self.push(out, Op::Silu(*a), "silu")
    }

    fn layer_norm(&mut self, x: &Var, gain: &Var, bias: &Var, eps: f64) -> Result<Var> {
        let out = ops::layer_norm(self.value(*x), self.value(*gain), self.value(*bias), eps)?;
        self.push(
            out,
            Op::LayerNorm {
                x: *x,
                gain: *gain,
                bias: *bias,
                eps,
            },
            "layer_norm",
        )
    }

    fn softmax_rows(&mut self, s: Var) -> Result<Var> {
        let out = ops::softmax_rows(self.value(s))?;
        self.push(out, Op::Softmax(s), "softmax_rows")
    }

    fn depthwise_conv1d(&mut self, x: &Var, kernel: &Var) -> Result<Var> {
        let out = ops::depthwise_conv1d(self.value(*x), self.value(*kernel))?;
        self.push(
            out,
            Op::Conv {
                x: *x,
                kernel: *kernel,
            },
            "depthwise_conv1d",
        )
    }

    fn focused_feature_map(&mut self, x: &Var, p: f64, eps: f64) -> Result<Var> {
        let out = ops::focused_feature_map(self.value(*x), p, eps)?;
        self.push(out, Op::Focused { x: *x, p, eps }, "focused_feature_map")
    }

    fn column_sums(&mut self, x: &Var) -> Result<Var> {
        let out = ops::column_sums(self.value(*x))?;
        self.push(out, Op::ColumnSums(*x), "column_sums")
    }

    fn normalize_rows(&mut self, num: &Var, den: &Var, eps: f64) -> Result<Var> {
        let out = ops::normalize_rows(self.value(*num), self.value(*den), eps)?;
        self.push(
            out,
            Op::NormalizeRows {
                num: *num,
                den: *den,
                eps,
            },
            "normalize_rows",
        )
    }

    fn slice_cols(&mut self, x: &Var, start: usize, end: usize) -> Result<Var> {
        let out = ops::slice_cols(self.value(*x), start, end)?;
        self.push(out, Op::SliceCols { x: *x, start }, "slice_cols")
    }

    fn concat_cols(&mut self, parts: &[Var]) -> Result<Var> {
        let refs: Vec<&Tensor> = parts.iter().map(|p| self.value(*p)).collect();
        let out = ops::concat_cols(&refs)?;
        self.push(out, Op::ConcatCols(parts.to_vec()), "concat_cols")
    }

    fn frames(&mut self, wave: &Var, window: usize, stride: usize) -> Result<Var> {
        let out = ops::frames(self.value(*wave), window, stride)?;
        self.push(
            out,
            Op::Frames {
                wave: *wave,
                stride,
            },
            "frames",
        )
    }

    fn overlap_add(&mut self, frames: &Var, stride: usize, len: usize) -> Result<Var> {
        let out = ops::overlap_add(self.value(*frames), stride, len)?;
        self.push(
            out,
            Op::OverlapAdd {
                frames: *frames,
                stride,
            },
            "overlap_add",
        )
    }

    fn si_snr(&mut self, est: &Var, reference: &Tensor, cap: f64) -> Result<Var> {
        let v = metrics::si_snr(self.value(*est), reference, cap)?;
        self.push(
            Tensor::scalar(v),
            Op::SiSnr {
                est: *est,
                reference: reference.clone(),
                cap,
            },
            "si_snr",
        )
    }

    fn sum(&mut self, x: &Var) -> Result<Var> {
        let out = Tensor::scalar(self.value(*x).sum());
        self.push(out, Op::Sum(*x), "sum")
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn linear_map_gradient_is_input_broadcast() {
        let mut tape = Tape::new();
        let w = tape
            .param(
                "w",
                &Tensor::from_rows(&[&[1.0, 2.0, 3.0], &[4.0, 5.0, 6.0]]).unwrap(),
            )
            .unwrap();
        let x = tape
            .constant(Tensor::new(&[3, 1], vec![0.5, -1.0, 2.0]).unwrap())
            .unwrap();
        let y = tape.matmul(&w, &x).unwrap();
        let loss = tape.sum(&y).unwrap();
        let grads = tape.backward(loss).unwrap();
        let gw = grads.get("w").unwrap();
        assert_eq!(gw.row(0), &[0.5, -1.0, 2.0]);
        assert_eq!(gw.row(1), &[0.5, -1.0, 2.0]);
    }

    #[test]
    fn relu_gate_gradient() {
        let mut tape = Tape::new();
        let x = tape
            .param("x", &Tensor::new(&[2], vec![-1.0, 2.0]).unwrap())
            .unwrap();
        let r = tape.relu(&x).unwrap();
        let loss = tape.sum(&r).unwrap();
        assert_eq!(
            tape.backward(loss).unwrap().get("x").unwrap().data(),
            &[0.0, 1.0]
        );
    }

    #[test]
    fn relu_subgradient_at_zero_is_zero() {
        let mut tape = Tape::new();
        let x = tape
            .param("x", &Tensor::new(&[1], vec![0.0]).unwrap())
            .unwrap();
        let r = tape.relu(&x).unwrap();
        let loss = tape.sum(&r).unwrap();
        assert_eq!(
            tape.backward(loss).unwrap().get("x").unwrap().data(),
            &[0.0]
        );
    }

    #[test]
    fn loss_gradient_of_itself_is_one() {
        let mut tape = Tape::new();
        let x = tape.param("x", &Tensor::scalar(3.0)).unwrap();
        assert_eq!(tape.backward(x).unwrap().get("x").unwrap().data(), &[1.0]);
    }

    #[test]
    fn non_scalar_loss_is_rejected() {
        let mut tape = Tape::new();
        let x = tape.param("x", &Tensor::zeros(&[2])).unwrap();
        assert!(matches!(tape.backward(x), Err(Error::Contract(_))));
    }

    #[test]
    fn unused_parameters_get_zero_gradients() {
        let mut tape = Tape::new();
        let x = tape.param("x", &Tensor::scalar(3.0)).unwrap();
        tape.param("unused", &Tensor::zeros(&[2, 2])).unwrap();
        let grads = tape.backward(x).unwrap();
        assert_eq!(grads.get("unused").unwrap(), &Tensor::zeros(&[2, 2]));
    }

    #[test]
    fn shared_inputs_accumulate() {
        // loss = sum(x ⊙ x) → grad 2x
        let mut tape = Tape::new();
        let x = tape
            .param("x", &Tensor::new(&[3], vec![1.0, -2.0, 0.5]).unwrap())
            .unwrap();
        let sq = tape.mul(&x, &x).unwrap();
        let loss = tape.sum(&sq).unwrap();
        assert_eq!(
            tape.backward(loss).unwrap().get("x").unwrap().data(),
            &[2.0, -4.0, 1.0]
        );
    }

    #[test]
    fn recording_rejects_non_finite_values() {
        let mut tape = Tape::new();
        let err = tape
            .constant(Tensor::new(&[1], vec![f64::NAN]).unwrap())
            .unwrap_err();
        assert!(matches!(err, Error::Numeric(_)));
    }
}
