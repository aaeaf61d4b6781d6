//! Small statistics helpers: Wilson intervals, quantiles and a log-log fit.

/// Standard normal quantile at 0.99, for one-sided 99% bounds.
pub const Z_99_ONE_SIDED: f64 = 2.326_347_874_040_841;

/// Wilson score interval `(lower, upper)` for `successes` out of `trials`
/// at critical value `z`. Each side is a one-sided bound at the level that
/// `z` corresponds to.
pub fn wilson_interval(successes: u64, trials: u64, z: f64) -> (f64, f64) {
    if trials == 0 {
        return (0.0, 1.0);
    }
    let n = trials as f64;
    let p = successes as f64 / n;
    let z2 = z * z;
    let denom = 1.0 + z2 / n;
    let centre = p + z2 / (2.0 * n);
    let half = z * (p * (1.0 - p) / n + z2 / (4.0 * n * n)).sqrt();
    let lo = ((centre - half) / denom).max(0.0);
    let hi = ((centre + half) / denom).min(1.0);
    // The closed form can leave rounding noise at the ends.
    let lo = if successes == 0 { 0.0 } else { lo };
    let hi = if successes == trials { 1.0 } else { hi };
    (lo, hi)
}

/// Linear-interpolation quantile (R type 7) of already sorted data.
pub fn quantile_sorted(sorted: &[f64], q: f64) -> Option<f64> {
    if sorted.is_empty() {
        return None;
    }
    let h = (sorted.len() - 1) as f64 * q.clamp(0.0, 1.0);
    let lo = h.floor() as usize;
    let hi = h.ceil() as usize;
    Some(sorted[lo] + (h - lo as f64) * (sorted[hi] - sorted[lo]))
}

/// Median, first and third quartile.
pub fn median_iqr(values: &[f64]) -> Option<(f64, f64, f64)> {
    let mut v = values.to_vec();
    v.sort_by(f64::total_cmp);
    Some((
        quantile_sorted(&v, 0.5)?,
        quantile_sorted(&v, 0.25)?,
        quantile_sorted(&v, 0.75)?,
    ))
}

pub fn mean(values: &[f64]) -> Option<f64> {
    (!values.is_empty()).then(|| values.iter().sum::<f64>() / values.len() as f64)
}

#[derive(Debug, Clone, Copy, PartialEq, serde::Serialize)]
pub struct LinearFit {
    pub slope: f64,
    pub intercept: f64,
    pub r_squared: f64,
}

/// Ordinary least squares `y = slope * x + intercept`.
pub fn ols(xs: &[f64], ys: &[f64]) -> Option<LinearFit> {
    if xs.len() != ys.len() || xs.len() < 2 {
        return None;
    }
    let n = xs.len() as f64;
    let mx = xs.iter().sum::<f64>() / n;
    let my = ys.iter().sum::<f64>() / n;
    let sxx: f64 = xs.iter().map(|x| (x - mx) * (x - mx)).sum();
    let sxy: f64 = xs.iter().zip(ys).map(|(x, y)| (x - mx) * (y - my)).sum();
    let syy: f64 = ys.iter().map(|y| (y - my) * (y - my)).sum();
    if sxx == 0.0 {
        return None;
    }
    let slope = sxy / sxx;
    let r_squared = if syy == 0.0 { 1.0 } else { sxy * sxy / (sxx * syy) };
    Some(LinearFit {
        slope,
        intercept: my - slope * mx,
        r_squared,
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn wilson_reference_values() {
        // 10 / 100 at z = 1.96: (0.0552, 0.1744).
        let (lo, hi) = wilson_interval(10, 100, 1.96);
        assert!((lo - 0.055_229).abs() < 1e-5, "{lo}");
        assert!((hi - 0.174_366).abs() < 1e-5, "{hi}");
        assert_eq!(wilson_interval(0, 50, Z_99_ONE_SIDED).0, 0.0);
        assert_eq!(wilson_interval(50, 50, Z_99_ONE_SIDED).1, 1.0);
        assert_eq!(wilson_interval(0, 0, 2.0), (0.0, 1.0));
        // Upper bound for zero failures is z^2 / (n + z^2).
        let (_, hi) = wilson_interval(0, 1000, Z_99_ONE_SIDED);
        let z2 = Z_99_ONE_SIDED * Z_99_ONE_SIDED;
        assert!((hi - z2 / (1000.0 + z2)).abs() < 1e-12);
    }

    #[test]
    fn quantiles() {
        let v = [1.0, 2.0, 3.0, 4.0];
        assert_eq!(quantile_sorted(&v, 0.5), Some(2.5));
        assert_eq!(quantile_sorted(&v, 0.25), Some(1.75));
        assert_eq!(quantile_sorted(&v, 1.0), Some(4.0));
        assert_eq!(median_iqr(&[3.0, 1.0, 2.0]), Some((2.0, 1.5, 2.5)));
        assert_eq!(median_iqr(&[]), None);
        assert_eq!(mean(&[1.0, 2.0]), Some(1.5));
    }

    #[test]
    fn exact_power_law_fit() {
        let xs: Vec<f64> = [1.0f64, 2.0, 4.0].iter().map(|x| x.ln()).collect();
        let ys: Vec<f64> = [1.0f64, 4.0, 16.0].iter().map(|y| y.ln()).collect();
        let fit = ols(&xs, &ys).unwrap();
        assert!((fit.slope - 2.0).abs() < 1e-12);
        assert!(fit.intercept.abs() < 1e-12);
        assert!((fit.r_squared - 1.0).abs() < 1e-12);
        assert!(ols(&[1.0], &[1.0]).is_none());
        assert!(ols(&[1.0, 1.0], &[1.0, 2.0]).is_none());
    }
}
