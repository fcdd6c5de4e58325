//! Forward kernels. Everything here is a pure function of its inputs.
//!
//! Matrices are 2-D row-major tensors. Ops documented as acting on the
//! "last axis" treat any tensor as `len / d` rows of width `d`.

use crate::error::{Error, Result};
use crate::tensor::Tensor;

fn same_shape(op: &'static str, a: &Tensor, b: &Tensor) -> Result<()> {
    if a.shape() != b.shape() {
        return Err(Error::dim(op, a.shape(), b.shape()));
    }
    Ok(())
}

fn last_dim(t: &Tensor) -> usize {
    t.shape().last().copied().unwrap_or(1)
}

// Matrix products and sums accumulate with a running compensation term
// (Neumaier). Plain accumulation loses ~1e-16 of the *summand* scale per
// step, which swamps outputs that cancel to near zero; the two attention
// orders sum in different orders and would otherwise disagree there.

#[inline(always)]
fn add_comp(s: &mut f64, c: &mut f64, x: f64) {
    let t = *s + x;
    let z = t - *s;
    *c += (*s - (t - z)) + (x - z);
    *s = t;
}

/// `C = A·B` for `A: m×k`, `B: k×n`.
pub fn matmul(a: &Tensor, b: &Tensor) -> Result<Tensor> {
    let (m, k) = a.dims2("matmul")?;
    let (k2, n) = b.dims2("matmul")?;
    if k != k2 {
        return Err(Error::dim("matmul", a.shape(), b.shape()));
    }
    let mut c = Tensor::try_zeros(&[m, n])?;
    let (ad, bd) = (a.data(), b.data());
    let cd = c.data_mut();
    let mut comp = vec![0.0; n];
    for i in 0..m {
        let crow = &mut cd[i * n..(i + 1) * n];
        comp.fill(0.0);
        for (l, &ail) in ad[i * k..(i + 1) * k].iter().enumerate() {
            if ail == 0.0 {
                continue;
            }
            let brow = &bd[l * n..(l + 1) * n];
            for ((s, e), &b) in crow.iter_mut().zip(comp.iter_mut()).zip(brow) {
                add_comp(s, e, ail * b);
            }
        }
        for (s, e) in crow.iter_mut().zip(&comp) {
            *s += e;
        }
    }
    Ok(c)
}

/// `C = A·Bᵀ` for `A: m×k`, `B: n×k`.
pub fn matmul_nt(a: &Tensor, b: &Tensor) -> Result<Tensor> {
    let (_, k) = a.dims2("matmul_nt")?;
    let (_, k2) = b.dims2("matmul_nt")?;
    if k != k2 {
        return Err(Error::dim("matmul_nt", a.shape(), b.shape()));
    }
    // Row-by-row dot products are short when k is a head width; going
    // through Bᵀ lets the inner loop run along the long output rows.
    matmul(a, &transpose(b)?)
}

/// `C = Aᵀ·B` for `A: k×m`, `B: k×n`.
pub fn matmul_tn(a: &Tensor, b: &Tensor) -> Result<Tensor> {
    let (k, m) = a.dims2("matmul_tn")?;
    let (k2, n) = b.dims2("matmul_tn")?;
    if k != k2 {
        return Err(Error::dim("matmul_tn", a.shape(), b.shape()));
    }
    let mut c = Tensor::try_zeros(&[m, n])?;
    let (ad, bd) = (a.data(), b.data());
    let cd = c.data_mut();
    let mut comp = vec![0.0; n];
    for i in 0..m {
        let crow = &mut cd[i * n..(i + 1) * n];
        comp.fill(0.0);
        for l in 0..k {
            let ali = ad[l * m + i];
            if ali == 0.0 {
                continue;
            }
            let brow = &bd[l * n..(l + 1) * n];
            for ((s, e), &b) in crow.iter_mut().zip(comp.iter_mut()).zip(brow) {
                add_comp(s, e, ali * b);
            }
        }
        for (s, e) in crow.iter_mut().zip(&comp) {
            *s += e;
        }
    }
    Ok(c)
}

#[inline]
pub(crate) fn dot(a: &[f64], b: &[f64]) -> f64 {
    // Four independent lanes so the loop vectorizes.
    let mut s = [0.0; 4];
    let mut e = [0.0; 4];
    let chunks = a.len() / 4;
    for c in 0..chunks {
        for l in 0..4 {
            add_comp(&mut s[l], &mut e[l], a[4 * c + l] * b[4 * c + l]);
        }
    }
    let (mut total, mut err) = (0.0, 0.0);
    for l in 0..4 {
        add_comp(&mut total, &mut err, s[l]);
        err += e[l];
    }
    for i in 4 * chunks..a.len() {
        add_comp(&mut total, &mut err, a[i] * b[i]);
    }
    total + err
}

pub fn transpose(a: &Tensor) -> Result<Tensor> {
    let (m, n) = a.dims2("transpose")?;
    let mut t = Tensor::try_zeros(&[n, m])?;
    let (ad, td) = (a.data(), t.data_mut());
    for i in 0..m {
        for j in 0..n {
            td[j * m + i] = ad[i * n + j];
        }
    }
    Ok(t)
}

fn zip_with(
    op: &'static str,
    a: &Tensor,
    b: &Tensor,
    f: impl Fn(f64, f64) -> f64,
) -> Result<Tensor> {
    same_shape(op, a, b)?;
    let data = a
        .data()
        .iter()
        .zip(b.data())
        .map(|(&x, &y)| f(x, y))
        .collect();
    Tensor::new(a.shape(), data)
}

pub fn add(a: &Tensor, b: &Tensor) -> Result<Tensor> {
    zip_with("add", a, b, |x, y| x + y)
}

pub fn sub(a: &Tensor, b: &Tensor) -> Result<Tensor> {
    zip_with("sub", a, b, |x, y| x - y)
}

/// Elementwise (Hadamard) product.
pub fn mul(a: &Tensor, b: &Tensor) -> Result<Tensor> {
    zip_with("mul", a, b, |x, y| x * y)
}

pub fn scale(a: &Tensor, c: f64) -> Tensor {
    a.map(|x| c * x)
}

pub fn relu(a: &Tensor) -> Tensor {
    a.map(|x| if x > 0.0 { x } else { 0.0 })
}

#[inline]
pub(crate) fn sigmoid_scalar(x: f64) -> f64 {
    if x >= 0.0 {
        1.0 / (1.0 + (-x).exp())
    } else {
        let e = x.exp();
        e / (1.0 + e)
    }
}

pub fn sigmoid(a: &Tensor) -> Tensor {
    a.map(sigmoid_scalar)
}

/// `x·σ(x)`.
pub fn silu(a: &Tensor) -> Tensor {
    a.map(|x| x * sigmoid_scalar(x))
}

/// Normalizes each last-axis row to zero mean and unit variance, then
/// applies `gain ⊙ · + bias`.
pub fn layer_norm(x: &Tensor, gain: &Tensor, bias: &Tensor, eps: f64) -> Result<Tensor> {
    let d = last_dim(x);
    if gain.len() != d || bias.len() != d {
        return Err(Error::dim("layer_norm", x.shape(), gain.shape()));
    }
    let mut out = Tensor::try_zeros(x.shape())?;
    let (g, b) = (gain.data(), bias.data());
    for (row, orow) in x
        .data()
        .chunks_exact(d)
        .zip(out.data_mut().chunks_exact_mut(d))
    {
        let (mean, inv_std) = row_moments(row, eps);
        for j in 0..d {
            orow[j] = (row[j] - mean) * inv_std * g[j] + b[j];
        }
    }
    Ok(out)
}

/// Mean and `1/sqrt(var + eps)` of one row.
pub(crate) fn row_moments(row: &[f64], eps: f64) -> (f64, f64) {
    let d = row.len() as f64;
    let mean = row.iter().sum::<f64>() / d;
    let var = row.iter().map(|v| (v - mean) * (v - mean)).sum::<f64>() / d;
    (mean, 1.0 / (var + eps).sqrt())
}

/// Row-wise softmax with per-row max subtraction.
pub fn softmax_rows(s: &Tensor) -> Result<Tensor> {
    let mut out = s.clone();
    softmax_rows_in_place(&mut out);
    Ok(out)
}

pub fn softmax_rows_in_place(s: &mut Tensor) {
    let m = last_dim(s);
    if m == 0 {
        return;
    }
    for row in s.data_mut().chunks_exact_mut(m) {
        let max = row.iter().fold(f64::NEG_INFINITY, |a, &b| a.max(b));
        let mut total = 0.0;
        for v in row.iter_mut() {
            *v = (*v - max).exp();
            total += *v;
        }
        let inv = 1.0 / total;
        for v in row.iter_mut() {
            *v *= inv;
        }
    }
}

pub(crate) fn check_odd_kernel(k: usize) -> Result<()> {
    if k % 2 == 0 {
        return Err(Error::Config(format!(
            "convolution kernel size must be odd, got {k}"
        )));
    }
    Ok(())
}

/// Same-length depthwise convolution along time with zero padding of
/// `(k-1)/2` on each side: `y[t][c] = Σ_j kernel[c][j]·x[t+j-(k-1)/2][c]`.
pub fn depthwise_conv1d(x: &Tensor, kernel: &Tensor) -> Result<Tensor> {
    let (n, c) = x.dims2("depthwise_conv1d")?;
    let (kc, k) = kernel.dims2("depthwise_conv1d")?;
    if kc != c {
        return Err(Error::dim("depthwise_conv1d", x.shape(), kernel.shape()));
    }
    check_odd_kernel(k)?;
    let pad = (k - 1) / 2;
    let taps = transpose(kernel)?;
    let mut y = Tensor::try_zeros(&[n, c])?;
    let (xd, td, yd) = (x.data(), taps.data(), y.data_mut());
    for t in 0..n {
        let yrow = &mut yd[t * c..(t + 1) * c];
        for j in 0..k {
            let Some(src) = (t + j).checked_sub(pad).filter(|&s| s < n) else {
                continue;
            };
            let xrow = &xd[src * c..(src + 1) * c];
            let tap = &td[j * c..(j + 1) * c];
            for ch in 0..c {
                yrow[ch] += tap[ch] * xrow[ch];
            }
        }
    }
    Ok(y)
}

pub(crate) fn check_focus(p: f64) -> Result<()> {
    if !(p > 0.0 && p.is_finite()) {
        return Err(Error::Config(format!(
            "focus factor must be positive, got {p}"
        )));
    }
    Ok(())
}

#[inline]
pub(crate) fn pow(x: f64, p: f64) -> f64 {
    if p.fract() == 0.0 && p.abs() < 64.0 {
        x.powi(p as i32)
    } else {
        x.powf(p)
    }
}

/// Row-wise focused kernel: with `r = relu(row)`,
/// `out = ‖r‖ / (‖r^p‖ + eps) · r^p`. The output keeps the norm of `r`
/// while sharpening ratios between its components to the power `p`.
///
/// Powers are taken of `r / max(r)`, which leaves the map unchanged but
/// keeps `‖·‖ ≥ 1`, so `eps` only guards the all-zero row and large `p`
/// cannot underflow or overflow.
pub fn focused_feature_map(x: &Tensor, p: f64, eps: f64) -> Result<Tensor> {
    check_focus(p)?;
    let d = last_dim(x);
    let mut out = Tensor::try_zeros(x.shape())?;
    if d == 0 {
        return Ok(out);
    }
    for (row, orow) in x
        .data()
        .chunks_exact(d)
        .zip(out.data_mut().chunks_exact_mut(d))
    {
        let m = row.iter().fold(0.0f64, |m, &v| m.max(v));
        if m <= 0.0 {
            continue;
        }
        let mut nr = 0.0;
        let mut ns = 0.0;
        for (o, &v) in orow.iter_mut().zip(row) {
            if v > 0.0 {
                let s = pow(v / m, p);
                *o = s;
                nr += v * v;
                ns += s * s;
            }
        }
        let c = nr.sqrt() / (ns.sqrt() + eps);
        for o in orow.iter_mut() {
            *o *= c;
        }
    }
    Ok(out)
}

/// Sum over rows: `N×d → 1×d`.
pub fn column_sums(x: &Tensor) -> Result<Tensor> {
    let (_, d) = x.dims2("column_sums")?;
    let mut s = Tensor::try_zeros(&[1, d])?;
    let sd = s.data_mut();
    let mut comp = vec![0.0; d];
    for row in x.data().chunks_exact(d.max(1)) {
        for ((a, e), &v) in sd.iter_mut().zip(comp.iter_mut()).zip(row) {
            add_comp(a, e, v);
        }
    }
    for (a, e) in sd.iter_mut().zip(&comp) {
        *a += e;
    }
    Ok(s)
}

/// `out[i] = num[i] / (den[i] + eps)`, except rows whose denominator is
/// below `eps`, which become zero rows.
pub fn normalize_rows(num: &Tensor, den: &Tensor, eps: f64) -> Result<Tensor> {
    let (n, d) = num.dims2("normalize_rows")?;
    if den.len() != n {
        return Err(Error::dim("normalize_rows", num.shape(), den.shape()));
    }
    let mut out = Tensor::try_zeros(&[n, d])?;
    for (i, orow) in out
        .data_mut()
        .chunks_exact_mut(d.max(1))
        .enumerate()
        .take(n)
    {
        let z = den.data()[i];
        if z < eps {
            continue;
        }
        let inv = 1.0 / (z + eps);
        for (o, &v) in orow.iter_mut().zip(num.row(i)) {
            *o = v * inv;
        }
    }
    Ok(out)
}

/// Columns `start..end` of a matrix.
pub fn slice_cols(x: &Tensor, start: usize, end: usize) -> Result<Tensor> {
    let (n, d) = x.dims2("slice_cols")?;
    if start > end || end > d {
        return Err(Error::Contract(format!(
            "column range {start}..{end} out of bounds for width {d}"
        )));
    }
    let w = end - start;
    let mut out = Tensor::try_zeros(&[n, w])?;
    for (i, orow) in out
        .data_mut()
        .chunks_exact_mut(w.max(1))
        .enumerate()
        .take(n)
    {
        orow.copy_from_slice(&x.row(i)[start..end]);
    }
    Ok(out)
}

/// Horizontal concatenation of matrices with equal row counts.
pub fn concat_cols(parts: &[&Tensor]) -> Result<Tensor> {
    let Some(first) = parts.first() else {
        return Err(Error::Contract(
            "concat_cols needs at least one part".into(),
        ));
    };
    let (n, _) = first.dims2("concat_cols")?;
    let mut total = 0;
    for p in parts {
        let (pn, pd) = p.dims2("concat_cols")?;
        if pn != n {
            return Err(Error::dim("concat_cols", first.shape(), p.shape()));
        }
        total += pd;
    }
    let mut out = Tensor::try_zeros(&[n, total])?;
    let od = out.data_mut();
    let mut off = 0;
    for p in parts {
        let w = p.shape()[1];
        for i in 0..n {
            od[i * total + off..i * total + off + w].copy_from_slice(p.row(i));
        }
        off += w;
    }
    Ok(out)
}

/// Number of strided frames of `window` samples in a signal of `len` samples.
pub fn frame_count(len: usize, window: usize, stride: usize) -> Result<usize> {
    if window == 0 || stride == 0 {
        return Err(Error::Config(
            "frame window and stride must be positive".into(),
        ));
    }
    if len < window {
        return Err(Error::InputTooShort { len, min: window });
    }
    Ok((len - window) / stride + 1)
}

/// Cuts a 1-D signal into `frame_count` rows of `window` samples, hop `stride`.
pub fn frames(wave: &Tensor, window: usize, stride: usize) -> Result<Tensor> {
    let n = frame_count(wave.len(), window, stride)?;
    let mut out = Tensor::try_zeros(&[n, window])?;
    let w = wave.data();
    for (t, orow) in out.data_mut().chunks_exact_mut(window).enumerate() {
        orow.copy_from_slice(&w[t * stride..t * stride + window]);
    }
    Ok(out)
}

/// Per-sample count of frames covering it.
pub(crate) fn overlap_counts(frames: usize, window: usize, stride: usize, len: usize) -> Vec<f64> {
    let mut counts = vec![0.0; len];
    for t in 0..frames {
        for i in 0..window {
            if let Some(c) = counts.get_mut(t * stride + i) {
                *c += 1.0;
            }
        }
    }
    counts
}

/// Overlap-add of rectangular frames into a signal of `len` samples,
/// divided by the per-sample overlap count. Samples no frame covers are zero;
/// frame samples past `len` are dropped.
pub fn overlap_add(frames: &Tensor, stride: usize, len: usize) -> Result<Tensor> {
    let (n, window) = frames.dims2("overlap_add")?;
    let counts = overlap_counts(n, window, stride, len);
    let mut out = Tensor::try_zeros(&[len])?;
    let od = out.data_mut();
    for t in 0..n {
        for (i, &v) in frames.row(t).iter().enumerate() {
            if let Some(o) = od.get_mut(t * stride + i) {
                *o += v;
            }
        }
    }
    for (o, &c) in od.iter_mut().zip(&counts) {
        if c > 0.0 {
            *o /= c;
        }
    }
    Ok(out)
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::{assert_abs_diff_eq, assert_relative_eq};

    fn t(rows: &[&[f64]]) -> Tensor {
        Tensor::from_rows(rows).unwrap()
    }

    #[test]
    fn matmul_identity_and_hand_product() {
        let b = t(&[&[3.0, 4.0], &[5.0, 6.0]]);
        assert_eq!(matmul(&Tensor::eye(2), &b).unwrap(), b);
        let c = matmul(&t(&[&[1.0, 2.0]]), &t(&[&[3.0], &[4.0]])).unwrap();
        assert_eq!(c.data(), &[11.0]);
    }

    #[test]
    fn matmul_shape_mismatch_reports_both_shapes() {
        let err = matmul(&Tensor::zeros(&[2, 3]), &Tensor::zeros(&[4, 2])).unwrap_err();
        let msg = err.to_string();
        assert!(msg.contains("[2, 3]") && msg.contains("[4, 2]"), "{msg}");
    }

    #[test]
    fn transposed_products_agree_with_plain_matmul() {
        let a = t(&[&[1.0, -2.0, 0.5], &[3.0, 0.0, 1.0]]);
        let b = t(&[&[2.0, 1.0, -1.0], &[0.0, 4.0, 2.0]]);
        let nt = matmul_nt(&a, &b).unwrap();
        let reference = matmul(&a, &transpose(&b).unwrap()).unwrap();
        assert_eq!(nt, reference);
        let tn = matmul_tn(&a, &b).unwrap();
        let reference = matmul(&transpose(&a).unwrap(), &b).unwrap();
        assert_eq!(tn, reference);
    }

    #[test]
    fn conv_delta_kernel_is_identity() {
        let x = t(&[&[1.0, -1.0], &[2.0, 0.5], &[3.0, 7.0], &[-4.0, 2.0]]);
        let mut k = Tensor::zeros(&[2, 5]);
        k.data_mut()[2] = 1.0;
        k.data_mut()[7] = 1.0;
        assert_eq!(depthwise_conv1d(&x, &k).unwrap(), x);
    }

    #[test]
    fn conv_hand_example() {
        let x = t(&[&[1.0], &[2.0], &[3.0]]);
        let k = t(&[&[1.0, 0.0, -1.0]]);
        assert_eq!(depthwise_conv1d(&x, &k).unwrap().data(), &[-2.0, -2.0, 2.0]);
    }

    #[test]
    fn conv_averaging_keeps_constant_interior() {
        let x = t(&[&[2.0], &[2.0], &[2.0], &[2.0], &[2.0], &[2.0]]);
        let k = Tensor::full(&[1, 3], 1.0 / 3.0);
        let y = depthwise_conv1d(&x, &k).unwrap();
        for i in 1..5 {
            assert_abs_diff_eq!(y.data()[i], 2.0, epsilon = 1e-15);
        }
    }

    #[test]
    fn conv_rejects_even_kernel() {
        let err = depthwise_conv1d(&Tensor::zeros(&[4, 1]), &Tensor::zeros(&[1, 4])).unwrap_err();
        assert!(matches!(err, Error::Config(_)));
    }

    #[test]
    fn layer_norm_examples() {
        let one = Tensor::full(&[3], 1.0);
        let zero = Tensor::zeros(&[3]);
        let y = layer_norm(&Tensor::new(&[3], vec![5.0; 3]).unwrap(), &one, &zero, 1e-5).unwrap();
        assert_eq!(y.data(), &[0.0, 0.0, 0.0]);

        let y = layer_norm(
            &t(&[&[1.0, -1.0]]),
            &Tensor::full(&[2], 1.0),
            &Tensor::zeros(&[2]),
            1e-5,
        )
        .unwrap();
        let expected = 1.0 / (1.0f64 + 1e-5).sqrt();
        assert_abs_diff_eq!(y.data()[0], expected, epsilon = 1e-15);
        assert_abs_diff_eq!(y.data()[1], -expected, epsilon = 1e-15);

        let y = layer_norm(
            &t(&[&[0.3, -8.0]]),
            &Tensor::zeros(&[2]),
            &Tensor::full(&[2], 7.0),
            1e-5,
        )
        .unwrap();
        assert_eq!(y.data(), &[7.0, 7.0]);
    }

    #[test]
    fn softmax_examples() {
        let y = softmax_rows(&t(&[&[0.0, 0.0], &[2f64.ln(), 0.0], &[1000.0, 0.0]])).unwrap();
        assert_eq!(y.row(0), &[0.5, 0.5]);
        assert_abs_diff_eq!(y.at(1, 0), 2.0 / 3.0, epsilon = 1e-15);
        assert_abs_diff_eq!(y.at(1, 1), 1.0 / 3.0, epsilon = 1e-15);
        assert_abs_diff_eq!(y.at(2, 0), 1.0, epsilon = 1e-15);
        assert!(y.at(2, 1) >= 0.0 && y.at(2, 1) < 1e-300);
        assert!(y.is_finite());
    }

    #[test]
    fn focused_map_examples() {
        let y = focused_feature_map(&t(&[&[1.0, 2.0]]), 3.0, 1e-12).unwrap();
        // Closed form up to the relative 1e-12 denominator guard.
        let c = 5f64.sqrt() / 65f64.sqrt();
        assert_relative_eq!(y.data()[0], c, max_relative = 1e-11);
        assert_relative_eq!(y.data()[1], 8.0 * c, max_relative = 1e-11);
        assert_abs_diff_eq!(y.data()[0], 0.27735, epsilon = 1e-5);
        assert_abs_diff_eq!(y.data()[1], 2.21880, epsilon = 1e-5);

        let y = focused_feature_map(&t(&[&[-1.0, -2.0]]), 3.0, 1e-12).unwrap();
        assert_eq!(y.data(), &[0.0, 0.0]);

        let y = focused_feature_map(&t(&[&[0.0, 1.0, 0.0]]), 2.5, 1e-12).unwrap();
        // Exact up to the 1e-12 denominator guard.
        assert_abs_diff_eq!(y.data()[1], 1.0, epsilon = 1e-11);
    }

    #[test]
    fn focused_map_rejects_nonpositive_focus() {
        assert!(matches!(
            focused_feature_map(&Tensor::zeros(&[1, 2]), 0.0, 1e-12),
            Err(Error::Config(_))
        ));
        assert!(matches!(
            focused_feature_map(&Tensor::zeros(&[1, 2]), -1.0, 1e-12),
            Err(Error::Config(_))
        ));
    }

    #[test]
    fn normalize_rows_zeroes_empty_denominators() {
        let y = normalize_rows(
            &t(&[&[2.0, 4.0], &[1.0, 1.0]]),
            &Tensor::new(&[2, 1], vec![2.0, 0.0]).unwrap(),
            1e-12,
        )
        .unwrap();
        assert_abs_diff_eq!(y.at(0, 1), 2.0, epsilon = 1e-11);
        assert_eq!(y.row(1), &[0.0, 0.0]);
    }

    #[test]
    fn framing_and_overlap_add() {
        assert_eq!(frame_count(8000, 16, 8).unwrap(), 999);
        assert_eq!(frame_count(16, 16, 5).unwrap(), 1);
        assert!(matches!(
            frame_count(15, 16, 8),
            Err(Error::InputTooShort { len: 15, min: 16 })
        ));

        // Frames of a signal overlap-add back to the signal where covered.
        let wave = Tensor::new(&[11], (0..11).map(f64::from).collect()).unwrap();
        let f = frames(&wave, 4, 2).unwrap();
        assert_eq!(f.shape(), &[4, 4]);
        let back = overlap_add(&f, 2, 11).unwrap();
        assert_eq!(&back.data()[..10], &wave.data()[..10]);
        assert_eq!(back.data()[10], 0.0);
    }

    #[test]
    fn slicing_and_concat_round_trip() {
        let x = t(&[&[1.0, 2.0, 3.0, 4.0], &[5.0, 6.0, 7.0, 8.0]]);
        let a = slice_cols(&x, 0, 1).unwrap();
        let b = slice_cols(&x, 1, 4).unwrap();
        assert_eq!(concat_cols(&[&a, &b]).unwrap(), x);
    }
}
