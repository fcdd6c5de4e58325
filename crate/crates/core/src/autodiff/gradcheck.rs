//! Central-difference check of tape gradients.

use std::collections::BTreeMap;

use crate::autodiff::{Graph, Tape, Var};
use crate::error::{Error, Result};
use crate::tensor::Tensor;

/// Default finite-difference step.
pub const DEFAULT_STEP: f64 = 1e-5;

/// Compares the tape gradient of a scalar function at `x` with central
/// differences of step `h` and returns the largest relative error
/// `|analytic − numeric| / max(|analytic|, |numeric|, 1e-8)` over all
/// coordinates.
pub fn grad_check<F>(f: F, x: &Tensor, h: f64) -> Result<f64>
where
    F: Fn(&mut Tape, Var) -> Result<Var>,
{
    let params = BTreeMap::from([("x".to_string(), x.clone())]);
    grad_check_params(
        |tape, params| {
            let x = tape.param("x", &params["x"])?;
            f(tape, x)
        },
        &params,
        h,
    )
}

/// [`grad_check`] over several named inputs at once. `f` receives the
/// (possibly perturbed) inputs and must register each one on the tape with
/// [`Graph::param`] under its map key.
pub fn grad_check_params<F>(f: F, params: &BTreeMap<String, Tensor>, h: f64) -> Result<f64>
where
    F: Fn(&mut Tape, &BTreeMap<String, Tensor>) -> Result<Var>,
{
    let eval = |params: &BTreeMap<String, Tensor>| -> Result<(Tape, Var)> {
        let mut tape = Tape::new();
        let out = f(&mut tape, params)?;
        Ok((tape, out))
    };
    let probe = |params: &BTreeMap<String, Tensor>| -> Result<f64> {
        let (tape, out) = eval(params)?;
        let v = tape.value(out).item()?;
        if !v.is_finite() {
            return Err(Error::Numeric("grad_check probe".into()));
        }
        Ok(v)
    };

    let (tape, out) = eval(params)?;
    let grads = tape.backward(out)?;
    drop(tape);

    let mut worst: f64 = 0.0;
    let mut shifted = params.clone();
    for (name, value) in params {
        let analytic = grads
            .get(name)
            .ok_or_else(|| Error::Contract(format!("no gradient for {name}")))?;
        for i in 0..value.len() {
            let orig = value.data()[i];
            shifted.get_mut(name).expect("cloned").data_mut()[i] = orig + h;
            let up = probe(&shifted)?;
            shifted.get_mut(name).expect("cloned").data_mut()[i] = orig - h;
            let down = probe(&shifted)?;
            shifted.get_mut(name).expect("cloned").data_mut()[i] = orig;

            let numeric = (up - down) / (2.0 * h);
            let a = analytic.data()[i];
            let err = (a - numeric).abs() / a.abs().max(numeric.abs()).max(1e-8);
            worst = worst.max(err);
        }
    }
    Ok(worst)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn quadratic_is_exact() {
        let x = Tensor::new(&[4], vec![0.3, -1.2, 2.0, 0.7]).unwrap();
        let err = grad_check(
            |t, x| {
                let sq = t.mul(&x, &x)?;
                let s = t.sum(&sq)?;
                t.scale(s, 0.5)
            },
            &x,
            DEFAULT_STEP,
        )
        .unwrap();
        assert!(err < 1e-8, "{err}");
    }

    #[test]
    fn constant_function_agrees_near_zero() {
        let x = Tensor::from_rows(&[&[0.1, 2.0, -0.3], &[1.0, 1.5, 0.0]]).unwrap();
        let mut tape = Tape::new();
        let v = tape.param("x", &x).unwrap();
        let s = tape.softmax_rows(v).unwrap();
        let loss = tape.sum(&s).unwrap();
        let g = tape.backward(loss).unwrap();
        assert!(g.get("x").unwrap().max_abs() < 1e-15);
        // Both sides are rounding noise; the relative measure stays bounded.
        let err = grad_check(
            |t, x| {
                let s = t.softmax_rows(x)?;
                t.sum(&s)
            },
            &x,
            DEFAULT_STEP,
        )
        .unwrap();
        assert!(err < 1e-2, "{err}");
    }

    #[test]
    fn non_finite_probe_is_an_error() {
        // sigmoid saturates cleanly, but scaling by a huge constant overflows.
        let x = Tensor::new(&[1], vec![1e300]).unwrap();
        let res = grad_check(|t, x| t.scale(x, 1e10), &x, DEFAULT_STEP);
        assert!(matches!(res, Err(Error::Numeric(_))));
    }
}
