use crate::error::{Error, Result};

/// Least-squares power law `t ≈ e^intercept · N^exponent`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SlopeFit {
    pub exponent: f64,
    /// In log-seconds.
    pub intercept: f64,
    pub r2: f64,
}

/// Fits a line to `(ln N, ln seconds)`. Needs at least three points with
/// strictly increasing, positive `N` and positive times.
pub fn fit_slope(points: &[(f64, f64)]) -> Result<SlopeFit> {
    if points.len() < 3 {
        return Err(Error::Config(format!(
            "slope fit needs at least 3 points, got {}",
            points.len()
        )));
    }
    for &(n, t) in points {
        if !(n > 0.0 && t > 0.0) || !n.is_finite() || !t.is_finite() {
            return Err(Error::Domain(format!(
                "slope fit needs positive values, got ({n}, {t})"
            )));
        }
    }
    if points.windows(2).any(|w| w[1].0 <= w[0].0) {
        return Err(Error::Config(
            "slope fit needs strictly increasing N".into(),
        ));
    }
    let k = points.len() as f64;
    let xs: Vec<f64> = points.iter().map(|p| p.0.ln()).collect();
    let ys: Vec<f64> = points.iter().map(|p| p.1.ln()).collect();
    let mx = xs.iter().sum::<f64>() / k;
    let my = ys.iter().sum::<f64>() / k;
    let sxx: f64 = xs.iter().map(|x| (x - mx).powi(2)).sum();
    let sxy: f64 = xs.iter().zip(&ys).map(|(x, y)| (x - mx) * (y - my)).sum();
    let exponent = sxy / sxx;
    let intercept = my - exponent * mx;
    let ss_tot: f64 = ys.iter().map(|y| (y - my).powi(2)).sum();
    let ss_res: f64 = xs
        .iter()
        .zip(&ys)
        .map(|(x, y)| (y - intercept - exponent * x).powi(2))
        .sum();
    let r2 = if ss_tot > 0.0 {
        (1.0 - ss_res / ss_tot).clamp(0.0, 1.0)
    } else {
        1.0
    };
    Ok(SlopeFit {
        exponent,
        intercept,
        r2,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_abs_diff_eq;

    fn power_law(c: f64, e: f64) -> Vec<(f64, f64)> {
        [1024.0, 2048.0, 4096.0, 8192.0, 16384.0]
            .iter()
            .map(|&n| (n, c * f64::powf(n, e)))
            .collect()
    }

    #[test]
    fn exact_on_noiseless_power_laws() {
        for e in [1.0, 2.0, 1.5] {
            let fit = fit_slope(&power_law(3e-7, e)).unwrap();
            assert_abs_diff_eq!(fit.exponent, e, epsilon = 1e-12);
            assert_abs_diff_eq!(fit.intercept, 3e-7f64.ln(), epsilon = 1e-9);
            assert_abs_diff_eq!(fit.r2, 1.0, epsilon = 1e-12);
        }
    }

    #[test]
    fn hand_least_squares() {
        // Equally spaced in ln N, so the slope is (y3 − y1) / (x3 − x1).
        let fit = fit_slope(&[(1000.0, 0.01), (2000.0, 0.021), (4000.0, 0.0405)]).unwrap();
        let expected = (0.0405f64 / 0.01).ln() / 4f64.ln();
        assert_abs_diff_eq!(fit.exponent, expected, epsilon = 1e-12);
        assert_abs_diff_eq!(fit.exponent, 1.009, epsilon = 5e-4);
        assert!(fit.r2 > 0.99 && fit.r2 <= 1.0);
    }

    #[test]
    fn rejects_bad_inputs() {
        assert!(matches!(
            fit_slope(&[(1.0, 1.0), (2.0, 2.0)]),
            Err(Error::Config(_))
        ));
        assert!(matches!(
            fit_slope(&[(1.0, 1.0), (2.0, 0.0), (3.0, 1.0)]),
            Err(Error::Domain(_))
        ));
        assert!(matches!(
            fit_slope(&[(1.0, 1.0), (2.0, -1.0), (3.0, 1.0)]),
            Err(Error::Domain(_))
        ));
        assert!(matches!(
            fit_slope(&[(2.0, 1.0), (1.0, 1.0), (3.0, 1.0)]),
            Err(Error::Config(_))
        ));
    }
}
