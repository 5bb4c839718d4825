use super::MetricError;

/// Linear-interpolated empirical quantile of sorted data at `p ∈ [0, 1]`.
pub fn quantile(sorted: &[f64], p: f64) -> f64 {
    let n = sorted.len();
    if n == 1 {
        return sorted[0];
    }
    let h = (n - 1) as f64 * p.clamp(0.0, 1.0);
    let lo = h.floor() as usize;
    let hi = (lo + 1).min(n - 1);
    sorted[lo] + (h - lo as f64) * (sorted[hi] - sorted[lo])
}

/// Quantile pairs `(Q_x(p_i), Q_y(p_i))` at `p_i = i/(q+1)`, `i = 1..=q`.
pub fn qq_points(x: &[f64], y: &[f64], q: usize) -> Result<Vec<(f64, f64)>, MetricError> {
    if x.is_empty() || y.is_empty() {
        return Err(MetricError::Empty);
    }
    if q < 2 {
        return Err(MetricError::InvalidArgument("q must be at least 2".into()));
    }
    let mut sx = x.to_vec();
    let mut sy = y.to_vec();
    sx.sort_by(f64::total_cmp);
    sy.sort_by(f64::total_cmp);
    Ok((1..=q)
        .map(|i| {
            let p = i as f64 / (q + 1) as f64;
            (quantile(&sx, p), quantile(&sy, p))
        })
        .collect())
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn identity_and_scaling() {
        let x = [3.0, -1.0, 0.5, 2.0, 7.0];
        for (a, b) in qq_points(&x, &x, 9).unwrap() {
            assert_eq!(a, b);
        }
        let y: Vec<f64> = x.iter().map(|v| 2.0 * v).collect();
        for (a, b) in qq_points(&x, &y, 9).unwrap() {
            assert!((b - 2.0 * a).abs() < 1e-12);
        }
    }

    #[test]
    fn two_quantiles() {
        let x = [0.0, 3.0];
        let pts = qq_points(&x, &x, 2).unwrap();
        assert_eq!(pts.len(), 2);
        assert!((pts[0].0 - 1.0).abs() < 1e-12 && (pts[1].0 - 2.0).abs() < 1e-12);
    }

    #[test]
    fn empty_rejected() {
        assert_eq!(qq_points(&[], &[1.0], 3), Err(MetricError::Empty));
    }
}
