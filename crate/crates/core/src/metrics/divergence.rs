use super::MetricError;

/// A probability mass function over ordered bin identifiers.
#[derive(Debug, Clone, PartialEq)]
pub struct Histogram {
    support: Vec<i64>,
    mass: Vec<f64>,
}

impl Histogram {
    pub fn new(support: Vec<i64>, mass: Vec<f64>) -> Result<Self, MetricError> {
        if support.is_empty() || support.len() != mass.len() {
            return Err(MetricError::InvalidHistogram(format!(
                "{} bins, {} masses",
                support.len(),
                mass.len()
            )));
        }
        if support.windows(2).any(|w| w[0] >= w[1]) {
            return Err(MetricError::InvalidHistogram("support must be strictly increasing".into()));
        }
        if mass.iter().any(|m| !m.is_finite() || *m < 0.0) {
            return Err(MetricError::InvalidHistogram("masses must be finite and non-negative".into()));
        }
        let total: f64 = mass.iter().sum();
        if (total - 1.0).abs() > 1e-9 {
            return Err(MetricError::InvalidHistogram(format!("masses sum to {total}")));
        }
        Ok(Self { support, mass })
    }

    /// Bins numbered `0..n`.
    pub fn from_masses(mass: Vec<f64>) -> Result<Self, MetricError> {
        Self::new((0..mass.len() as i64).collect(), mass)
    }

    /// Normalized counts, bins numbered `0..n`.
    pub fn from_counts(counts: &[f64]) -> Result<Self, MetricError> {
        let total: f64 = counts.iter().sum();
        if !(total > 0.0) {
            return Err(MetricError::InvalidHistogram("no counts".into()));
        }
        Self::from_masses(counts.iter().map(|c| c / total).collect())
    }

    pub fn support(&self) -> &[i64] {
        &self.support
    }

    pub fn mass(&self) -> &[f64] {
        &self.mass
    }
}

fn check_support(p: &Histogram, q: &Histogram) -> Result<(), MetricError> {
    if p.support != q.support {
        return Err(MetricError::SupportMismatch);
    }
    Ok(())
}

/// `Σ p log(p/q)` in nats, with `0 log 0 = 0`.
pub fn kl_divergence(p: &Histogram, q: &Histogram) -> Result<f64, MetricError> {
    check_support(p, q)?;
    let mut acc = 0.0;
    for ((&pi, &qi), &bin) in p.mass.iter().zip(&q.mass).zip(&p.support) {
        if pi == 0.0 {
            continue;
        }
        if qi == 0.0 {
            return Err(MetricError::NotAbsolutelyContinuous { bin });
        }
        acc += pi * (pi / qi).ln();
    }
    Ok(acc.max(0.0))
}

/// Jensen-Shannon divergence in nats, bounded by `ln 2`.
pub fn jsd(p: &Histogram, q: &Histogram) -> Result<f64, MetricError> {
    check_support(p, q)?;
    let mut acc = 0.0;
    for (&pi, &qi) in p.mass.iter().zip(&q.mass) {
        let m = 0.5 * (pi + qi);
        if pi > 0.0 {
            acc += 0.5 * pi * (pi / m).ln();
        }
        if qi > 0.0 {
            acc += 0.5 * qi * (qi / m).ln();
        }
    }
    Ok(acc.clamp(0.0, std::f64::consts::LN_2))
}

/// Histograms of two 1-D samples over `bins` equal-width bins spanning
/// their pooled range.
pub fn shared_histograms(x: &[f64], y: &[f64], bins: usize) -> Result<(Histogram, Histogram), MetricError> {
    if x.is_empty() || y.is_empty() {
        return Err(MetricError::Empty);
    }
    if bins == 0 {
        return Err(MetricError::InvalidArgument("bins must be positive".into()));
    }
    let (lo, hi) = x
        .iter()
        .chain(y)
        .fold((f64::INFINITY, f64::NEG_INFINITY), |(l, h), &v| (l.min(v), h.max(v)));
    let width = (hi - lo) / bins as f64;
    let count = |s: &[f64]| {
        let mut c = vec![0.0; bins];
        for &v in s {
            let b = if width > 0.0 {
                (((v - lo) / width) as usize).min(bins - 1)
            } else {
                0
            };
            c[b] += 1.0;
        }
        c
    };
    Ok((Histogram::from_counts(&count(x))?, Histogram::from_counts(&count(y))?))
}

#[cfg(test)]
mod tests {
    use super::*;

    fn h(m: &[f64]) -> Histogram {
        Histogram::from_masses(m.to_vec()).unwrap()
    }

    #[test]
    fn kl_examples() {
        assert_eq!(kl_divergence(&h(&[0.3, 0.7]), &h(&[0.3, 0.7])).unwrap(), 0.0);
        let v = kl_divergence(&h(&[0.5, 0.5]), &h(&[0.25, 0.75])).unwrap();
        assert!((v - 0.143_841_036_225_890_4).abs() < 1e-12);
        let v = kl_divergence(&h(&[1.0, 0.0]), &h(&[0.5, 0.5])).unwrap();
        assert!((v - std::f64::consts::LN_2).abs() < 1e-15);
    }

    #[test]
    fn kl_errors() {
        assert_eq!(
            kl_divergence(&h(&[0.5, 0.5]), &h(&[1.0, 0.0])),
            Err(MetricError::NotAbsolutelyContinuous { bin: 1 })
        );
        assert_eq!(
            kl_divergence(&h(&[1.0]), &h(&[0.5, 0.5])),
            Err(MetricError::SupportMismatch)
        );
    }

    #[test]
    fn jsd_disjoint_is_ln2() {
        let v = jsd(&h(&[1.0, 0.0]), &h(&[0.0, 1.0])).unwrap();
        assert!((v - std::f64::consts::LN_2).abs() < 1e-15);
        assert_eq!(jsd(&h(&[0.2, 0.8]), &h(&[0.2, 0.8])).unwrap(), 0.0);
    }

    #[test]
    fn histogram_validation() {
        assert!(Histogram::from_masses(vec![0.5, 0.4]).is_err());
        assert!(Histogram::new(vec![1, 0], vec![0.5, 0.5]).is_err());
    }

    #[test]
    fn shared_bins() {
        let (p, q) = shared_histograms(&[0.0, 0.0, 1.0], &[1.0], 2).unwrap();
        assert_eq!(p.mass(), &[2.0 / 3.0, 1.0 / 3.0]);
        assert_eq!(q.mass(), &[0.0, 1.0]);
    }
}
