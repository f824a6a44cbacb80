//! Structural distributions of the model: the common link distance of an
//! equidistant typical point, its dimensionless square, the coherent
//! amplitude sum, the heavy-tailed aggregate received power, and the mean
//! best-of-three gain used by the selection-scheme rate formula.

use crate::error::{Error, Result};
use crate::params::ModelParams;
use crate::quad::integrate_adaptive;
use crate::specfun::{erfc, lgamma, regularized_p_inv};
use std::f64::consts::PI;

/// Density of the common link distance d of an equidistant typical point:
/// f(x) = 2 (lambda pi)^2 x^3 exp(-lambda pi x^2).
pub fn distance_pdf(x: f64, lambda: f64) -> f64 {
    if x <= 0.0 {
        return 0.0;
    }
    let lp = lambda * PI;
    2.0 * lp * lp * x.powi(3) * (-lp * x * x).exp()
}

/// Density of U = lambda pi d^2, a Gamma(2, 1) variable: u exp(-u). All
/// intensity dependence of the geometry is absorbed into this one variable.
pub fn pdf_u(u: f64) -> f64 {
    if u < 0.0 {
        0.0
    } else {
        u * (-u).exp()
    }
}

/// P(U > u) = (1 + u) exp(-u), the closed Poisson tail of Gamma(2, 1).
pub fn ccdf_u(u: f64) -> f64 {
    if u < 0.0 {
        1.0
    } else {
        (1.0 + u) * (-u).exp()
    }
}

/// Density of a single amplitude ‖h‖ with M antennas:
/// 2 x^(2M-1) exp(-x^2) / Gamma(M).
pub fn amp_pdf(x: f64, m_antennas: u32) -> f64 {
    if x <= 0.0 {
        return 0.0;
    }
    let m = m_antennas as f64;
    (((2.0 * m - 1.0) * x.ln() - x * x - lgamma(m)).exp()) * 2.0
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum SumPdfMode {
    /// Triple convolution of the single-amplitude density, evaluated by
    /// nested adaptive quadrature. Slow but assumption-free.
    Exact,
    /// Nakagami density with the moment-matched (m, omega) pair.
    Approx,
}

/// Density of T = ‖h_1‖ + ‖h_2‖ + ‖h_3‖ at `t`.
pub fn sum_pdf(t: f64, m_antennas: u32, mode: SumPdfMode) -> Result<f64> {
    if t <= 0.0 {
        return Ok(0.0);
    }
    match mode {
        SumPdfMode::Approx => {
            let mm = super::moments::moment_match(m_antennas);
            let m = mm.m as f64;
            // Nakagami(m, omega): 2 m^m t^(2m-1) exp(-m t^2 / omega) / (Gamma(m) omega^m)
            let ln = m * m.ln() + (2.0 * m - 1.0) * t.ln() - m * t * t / mm.omega
                - lgamma(m)
                - m * mm.omega.ln();
            Ok(2.0 * ln.exp())
        }
        SumPdfMode::Exact => {
            let f = |x: f64| amp_pdf(x, m_antennas);
            let conv2 = |s: f64| -> f64 {
                if s <= 0.0 {
                    return 0.0;
                }
                integrate_adaptive(&|x| f(x) * f(s - x), 0.0, s, 1e-10).unwrap_or(f64::NAN)
            };
            let v = integrate_adaptive(&|s| conv2(s) * f(t - s), 0.0, t, 1e-9)?;
            if !v.is_finite() {
                return Err(Error::Numerical(format!(
                    "sum density convolution failed at t = {t}"
                )));
            }
            Ok(v)
        }
    }
}

/// Density of the aggregate far-field power with unit-mean exponential marks
/// at alpha = 4: a one-sided stable law with index 1/2 (scale c = lambda^2
/// pi^4 / 8), f(x) = sqrt(c / 2 pi) x^(-3/2) exp(-c / 2x).
pub fn levy_pdf(x: f64, lambda: f64) -> f64 {
    if x <= 0.0 {
        return 0.0;
    }
    let c = lambda * lambda * PI.powi(4) / 8.0;
    (c / (2.0 * PI)).sqrt() * x.powf(-1.5) * (-c / (2.0 * x)).exp()
}

/// CDF of the same law: erfc(sqrt(c / 2x)).
pub fn levy_cdf(x: f64, lambda: f64) -> Result<f64> {
    if x <= 0.0 {
        return Ok(0.0);
    }
    let c = lambda * lambda * PI.powi(4) / 8.0;
    erfc((c / (2.0 * x)).sqrt())
}

/// Mode of the aggregate-power density, c/3.
pub fn levy_mode(lambda: f64) -> f64 {
    lambda * lambda * PI.powi(4) / 24.0
}

/// E[max of three i.i.d. Gamma(M,1)] via the quantile representation
/// int_0^1 3 u^2 Qf(u) du, where Qf is the Gamma(M,1) quantile function.
pub fn mean_max_of_three(m_antennas: u32) -> Result<f64> {
    let m = m_antennas as f64;
    let v = integrate_adaptive(
        &|u| 3.0 * u * u * regularized_p_inv(m, u).unwrap_or(f64::NAN),
        0.0,
        1.0 - 1e-12,
        1e-9,
    )?;
    if !v.is_finite() {
        return Err(Error::Numerical(
            "quantile integration for the best-of-three mean failed".into(),
        ));
    }
    Ok(v)
}

/// Guard radius such that the disc holds the coop set with the stated
/// probability margin: the default analysis cut 24 / sqrt(lambda).
pub fn default_r_cut(params: &ModelParams) -> f64 {
    24.0 / params.lambda.sqrt()
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::quad::integrate_to_inf;
    use approx::assert_relative_eq;

    #[test]
    fn distance_pdf_normalizes_with_correct_second_moment() {
        let lambda = 0.02;
        let total = integrate_to_inf(&|x| distance_pdf(x, lambda), 0.0, 1.0, 1e-10).unwrap();
        assert_relative_eq!(total.value, 1.0, max_relative = 1e-9);
        let second = integrate_to_inf(&|x| x * x * distance_pdf(x, lambda), 0.0, 1.0, 1e-10).unwrap();
        assert_relative_eq!(second.value, 2.0 / (lambda * PI), max_relative = 1e-9);
    }

    #[test]
    fn u_density_and_tail_are_consistent() {
        assert_relative_eq!(ccdf_u(0.0), 1.0);
        let total = integrate_to_inf(&|u| pdf_u(u), 0.0, 1.0, 1e-10).unwrap();
        assert_relative_eq!(total.value, 1.0, max_relative = 1e-10);
        for u in [0.1, 0.7, 2.0, 5.0] {
            let h = 1e-6;
            let deriv = (ccdf_u(u + h) - ccdf_u(u - h)) / (2.0 * h);
            assert_relative_eq!(-deriv, pdf_u(u), max_relative = 1e-8);
        }
    }

    #[test]
    fn amp_pdf_normalizes() {
        for m in 1..=4u32 {
            let total = integrate_to_inf(&|x| amp_pdf(x, m), 0.0, 0.5, 1e-10).unwrap();
            assert_relative_eq!(total.value, 1.0, max_relative = 1e-9);
        }
    }

    #[test]
    fn sum_pdf_exact_spots() {
        assert_relative_eq!(
            sum_pdf(2.0, 1, SumPdfMode::Exact).unwrap(),
            0.402535463391533,
            max_relative = 1e-7
        );
        assert_relative_eq!(
            sum_pdf(1.0, 1, SumPdfMode::Exact).unwrap(),
            0.0435713133706738,
            max_relative = 1e-7
        );
        assert_relative_eq!(
            sum_pdf(3.0, 2, SumPdfMode::Exact).unwrap(),
            0.258951540708060,
            max_relative = 1e-7
        );
    }

    #[test]
    fn sum_pdf_approx_normalizes_and_tracks_exact() {
        for m in [1u32, 2] {
            let total = integrate_to_inf(&|t| sum_pdf(t, m, SumPdfMode::Approx).unwrap(), 0.0, 1.0, 1e-9)
                .unwrap();
            assert_relative_eq!(total.value, 1.0, max_relative = 1e-8);
        }
        // near the bulk the match stays within a few percent
        for &t in &[2.0, 2.5, 3.0] {
            let e = sum_pdf(t, 1, SumPdfMode::Exact).unwrap();
            let a = sum_pdf(t, 1, SumPdfMode::Approx).unwrap();
            assert!((a - e).abs() / e < 0.06, "t={t}: exact {e}, approx {a}");
        }
    }

    #[test]
    fn levy_normalization_mode_and_cdf() {
        let lambda = 0.02;
        let mode = levy_mode(lambda);
        assert_relative_eq!(mode, 1.623484850566707e-3, max_relative = 1e-12);
        let h = mode * 1e-5;
        let d = (levy_pdf(mode + h, lambda) - levy_pdf(mode - h, lambda)) / (2.0 * h);
        assert!(d.abs() * mode / levy_pdf(mode, lambda) < 1e-6, "density not flat at mode");
        // CDF from quadrature of the density
        for x in [5e-4, 2e-3, 1e-2] {
            let q = integrate_adaptive(&|y| levy_pdf(y, lambda), 0.0, x, 1e-10).unwrap();
            assert_relative_eq!(q, levy_cdf(x, lambda).unwrap(), max_relative = 1e-7);
        }
        // heavy tail: the mean diverges, the CDF approaches 1 slowly
        assert!(levy_cdf(1.0, lambda).unwrap() < 0.95);
    }

    #[test]
    fn mean_max_values() {
        assert_relative_eq!(mean_max_of_three(1).unwrap(), 11.0 / 6.0, max_relative = 1e-8);
        assert_relative_eq!(mean_max_of_three(2).unwrap(), 3.212963, max_relative = 1e-6);
        assert_relative_eq!(mean_max_of_three(3).unwrap(), 4.495628, max_relative = 1e-6);
        assert_relative_eq!(mean_max_of_three(4).unwrap(), 5.730673, max_relative = 1e-6);
    }

    #[test]
    fn mean_max_against_monte_carlo() {
        use rand::SeedableRng;
        use rand_distr::Distribution;
        let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(23);
        let g = rand_distr::Gamma::new(2.0, 1.0).unwrap();
        let n = 300_000;
        let mut acc = 0.0;
        for _ in 0..n {
            let a: f64 = g.sample(&mut rng);
            let b: f64 = g.sample(&mut rng);
            let c: f64 = g.sample(&mut rng);
            acc += a.max(b).max(c);
        }
        assert_relative_eq!(acc / n as f64, mean_max_of_three(2).unwrap(), max_relative = 5e-3);
    }
}
