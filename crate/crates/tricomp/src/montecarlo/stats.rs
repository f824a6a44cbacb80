//! Sample statistics for simulation output: normal-approximation
//! confidence intervals, Kolmogorov-Smirnov distances, moments, and
//! density histograms.

use crate::error::{Error, Result};

/// Two-sided 95% normal quantile.
pub const Z95: f64 = 1.959963984540054;

#[derive(Debug, Clone, Copy)]
pub struct MeanCi {
    pub mean: f64,
    pub half_width: f64,
    pub n: usize,
}

impl MeanCi {
    pub fn lo(&self) -> f64 {
        self.mean - self.half_width
    }

    pub fn hi(&self) -> f64 {
        self.mean + self.half_width
    }

    /// True when the interval intersects [lo, hi].
    pub fn overlaps(&self, lo: f64, hi: f64) -> bool {
        self.lo() <= hi && self.hi() >= lo
    }
}

fn require_finite(xs: &[f64]) -> Result<()> {
    if xs.iter().any(|x| !x.is_finite()) {
        return Err(Error::Numerical("sample contains a non-finite value".into()));
    }
    Ok(())
}

/// Sample mean with a 95% normal-approximation half-width.
pub fn mean_ci(xs: &[f64]) -> Result<MeanCi> {
    if xs.len() < 2 {
        return Err(Error::Degenerate(format!(
            "need at least 2 samples, got {}",
            xs.len()
        )));
    }
    require_finite(xs)?;
    let n = xs.len() as f64;
    let mean = xs.iter().sum::<f64>() / n;
    let var = xs.iter().map(|x| (x - mean) * (x - mean)).sum::<f64>() / (n - 1.0);
    Ok(MeanCi {
        mean,
        half_width: Z95 * (var / n).sqrt(),
        n: xs.len(),
    })
}

fn sorted_copy(xs: &[f64]) -> Vec<f64> {
    let mut s = xs.to_vec();
    s.sort_by(f64::total_cmp);
    s
}

/// One-sample Kolmogorov-Smirnov statistic against a reference CDF.
pub fn ks_vs_cdf(xs: &[f64], cdf: &dyn Fn(f64) -> f64) -> Result<f64> {
    if xs.is_empty() {
        return Err(Error::Degenerate("empty sample".into()));
    }
    require_finite(xs)?;
    let s = sorted_copy(xs);
    let n = s.len() as f64;
    let mut d: f64 = 0.0;
    for (i, &x) in s.iter().enumerate() {
        let f = cdf(x);
        if !(0.0..=1.0).contains(&f) {
            return Err(Error::Numerical(format!("reference CDF left [0,1] at {x}: {f}")));
        }
        d = d.max((f - i as f64 / n).abs());
        d = d.max((f - (i as f64 + 1.0) / n).abs());
    }
    Ok(d)
}

/// Two-sample Kolmogorov-Smirnov statistic.
pub fn ks_two_sample(a: &[f64], b: &[f64]) -> Result<f64> {
    if a.is_empty() || b.is_empty() {
        return Err(Error::Degenerate("empty sample".into()));
    }
    require_finite(a)?;
    require_finite(b)?;
    let sa = sorted_copy(a);
    let sb = sorted_copy(b);
    let (na, nb) = (sa.len() as f64, sb.len() as f64);
    let (mut i, mut j) = (0usize, 0usize);
    let mut d: f64 = 0.0;
    while i < sa.len() && j < sb.len() {
        // consume whole tie runs from both sides so the step functions are
        // compared strictly between jump points
        let x = sa[i].min(sb[j]);
        while i < sa.len() && sa[i] == x {
            i += 1;
        }
        while j < sb.len() && sb[j] == x {
            j += 1;
        }
        d = d.max((i as f64 / na - j as f64 / nb).abs());
    }
    Ok(d)
}

/// Excess kurtosis (fourth standardized central moment minus 3).
pub fn excess_kurtosis(xs: &[f64]) -> Result<f64> {
    if xs.len() < 4 {
        return Err(Error::Degenerate("need at least 4 samples".into()));
    }
    require_finite(xs)?;
    let n = xs.len() as f64;
    let mean = xs.iter().sum::<f64>() / n;
    let m2 = xs.iter().map(|x| (x - mean).powi(2)).sum::<f64>() / n;
    let m4 = xs.iter().map(|x| (x - mean).powi(4)).sum::<f64>() / n;
    if m2 <= 0.0 {
        return Err(Error::Degenerate("zero-variance sample".into()));
    }
    Ok(m4 / (m2 * m2) - 3.0)
}

/// Empirical quantile with linear interpolation, q in [0, 1].
pub fn quantile(xs: &[f64], q: f64) -> Result<f64> {
    if xs.is_empty() {
        return Err(Error::Degenerate("empty sample".into()));
    }
    if !(0.0..=1.0).contains(&q) {
        return Err(Error::Domain(format!("quantile level {q} outside [0,1]")));
    }
    require_finite(xs)?;
    let s = sorted_copy(xs);
    let h = q * (s.len() - 1) as f64;
    let lo = h.floor() as usize;
    let hi = h.ceil() as usize;
    Ok(s[lo] + (h - lo as f64) * (s[hi] - s[lo]))
}

/// Density histogram over equal-width bins.
#[derive(Debug, Clone)]
pub struct Histogram {
    pub lo: f64,
    pub width: f64,
    pub density: Vec<f64>,
    pub n: usize,
}

impl Histogram {
    pub fn bins(&self) -> usize {
        self.density.len()
    }

    pub fn center(&self, i: usize) -> f64 {
        self.lo + (i as f64 + 0.5) * self.width
    }
}

/// Builds a density histogram; bin count defaults to the Freedman-Diaconis
/// rule clamped to [8, 512].
pub fn histogram(xs: &[f64], bins: Option<usize>) -> Result<Histogram> {
    if xs.len() < 8 {
        return Err(Error::Degenerate(format!(
            "need at least 8 samples, got {}",
            xs.len()
        )));
    }
    require_finite(xs)?;
    let lo = xs.iter().cloned().fold(f64::INFINITY, f64::min);
    let hi = xs.iter().cloned().fold(f64::NEG_INFINITY, f64::max);
    if !(hi > lo) {
        return Err(Error::Degenerate("all samples identical".into()));
    }
    let k = match bins {
        Some(k) if k >= 1 => k,
        Some(_) => return Err(Error::Domain("bin count must be >= 1".into())),
        None => {
            let iqr = quantile(xs, 0.75)? - quantile(xs, 0.25)?;
            if iqr > 0.0 {
                let h = 2.0 * iqr / (xs.len() as f64).cbrt();
                (((hi - lo) / h).ceil() as usize).clamp(8, 512)
            } else {
                ((xs.len() as f64).sqrt().ceil() as usize).clamp(8, 512)
            }
        }
    };
    let width = (hi - lo) / k as f64;
    let mut counts = vec![0u64; k];
    for &x in xs {
        let i = (((x - lo) / width) as usize).min(k - 1);
        counts[i] += 1;
    }
    let norm = 1.0 / (xs.len() as f64 * width);
    Ok(Histogram {
        lo,
        width,
        density: counts.iter().map(|&c| c as f64 * norm).collect(),
        n: xs.len(),
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::montecarlo::rng::{keyed_exp, keyed_uniform, StreamTag};
    use approx::assert_relative_eq;

    #[test]
    fn mean_ci_matches_hand_computation() {
        let xs = [1.0, 2.0, 3.0, 4.0];
        let ci = mean_ci(&xs).unwrap();
        assert_relative_eq!(ci.mean, 2.5);
        let sd = (5.0f64 / 3.0).sqrt();
        assert_relative_eq!(ci.half_width, Z95 * sd / 2.0, max_relative = 1e-12);
        assert!(ci.overlaps(2.0, 2.1));
        assert!(!ci.overlaps(100.0, 101.0));
        assert!(mean_ci(&[1.0]).is_err());
        assert!(mean_ci(&[1.0, f64::INFINITY]).is_err());
    }

    #[test]
    fn ks_statistics_behave() {
        let n = 50_000u64;
        let u: Vec<f64> = (0..n).map(|i| keyed_uniform(3, StreamTag::Drop, &[i])).collect();
        let d = ks_vs_cdf(&u, &|x: f64| x.clamp(0.0, 1.0)).unwrap();
        assert!(d < 0.01, "uniform KS {d}");
        let e: Vec<f64> = (0..n).map(|i| keyed_exp(4, StreamTag::Drop, &[i])).collect();
        let d2 = ks_vs_cdf(&e, &|x: f64| -(-x).exp_m1()).unwrap();
        assert!(d2 < 0.01, "exponential KS {d2}");
        assert_eq!(ks_two_sample(&u, &u).unwrap(), 0.0);
        let d3 = ks_two_sample(&u, &e).unwrap();
        assert!(d3 > 0.3, "uniform vs exponential KS {d3}");
    }

    #[test]
    fn kurtosis_of_known_shapes() {
        let n = 400_000u64;
        let e: Vec<f64> = (0..n).map(|i| keyed_exp(5, StreamTag::Drop, &[i])).collect();
        let k = excess_kurtosis(&e).unwrap();
        assert!((k - 6.0).abs() < 0.5, "exponential excess kurtosis {k}");
        let u: Vec<f64> = (0..n).map(|i| keyed_uniform(6, StreamTag::Drop, &[i])).collect();
        let ku = excess_kurtosis(&u).unwrap();
        assert!((ku + 1.2).abs() < 0.05, "uniform excess kurtosis {ku}");
    }

    #[test]
    fn quantiles_interpolate() {
        let xs = [4.0, 1.0, 3.0, 2.0];
        assert_relative_eq!(quantile(&xs, 0.0).unwrap(), 1.0);
        assert_relative_eq!(quantile(&xs, 1.0).unwrap(), 4.0);
        assert_relative_eq!(quantile(&xs, 0.5).unwrap(), 2.5);
    }

    #[test]
    fn histogram_is_a_density() {
        let n = 100_000u64;
        let e: Vec<f64> = (0..n).map(|i| keyed_exp(7, StreamTag::Drop, &[i])).collect();
        let h = histogram(&e, None).unwrap();
        let mass: f64 = h.density.iter().map(|d| d * h.width).sum();
        assert_relative_eq!(mass, 1.0, max_relative = 1e-12);
        let mid = h.center(0);
        let expect = (-mid).exp();
        let got = h.density[0];
        assert!((got - expect).abs() < 0.05, "density at {mid}: {got} vs {expect}");
    }
}
