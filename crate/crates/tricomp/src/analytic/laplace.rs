//! Laplace machinery of the interference field seen from an equidistant
//! typical point, in the dimensionless variable u = lambda pi d^2.
//!
//! For a field of intensity rho outside the disc of radius d carrying marks
//! with E[(1 + y v^-alpha)^-q]-type kernels, the log transform is
//! (rho/lambda) u theta_0(c) with c the d-free argument; the higher column
//! entries theta_n collect the derivative terms the finite Gamma shape
//! requires. Everything here is affine in u, which is what makes the
//! coverage integrals collapse.

use crate::analytic::moments::moment_match;
use crate::error::{Error, Result};
use crate::params::{ModelParams, SchemeId};
use crate::specfun::hyp_2f1;

/// theta column for the unit-exponential kernel (q = 1).
pub fn theta_column(len: usize, c: f64, alpha: f64) -> Result<Vec<f64>> {
    theta_column_kernel(len, c, alpha, 1.0)
}

/// theta column for the general kernel exponent q:
/// theta_0 = 1 - F(q, -beta; 1-beta; -c),
/// theta_n = -c^n (q)_n (-beta)_n / (n! (1-beta)_n) F(q+n, n-beta; n+1-beta; -c),
/// with beta = 2/alpha. The entries depend on the geometry only through c.
pub fn theta_column_kernel(len: usize, c: f64, alpha: f64, q: f64) -> Result<Vec<f64>> {
    if len == 0 {
        return Err(Error::Domain("theta column needs at least one entry".into()));
    }
    if !(c >= 0.0) || !c.is_finite() {
        return Err(Error::Domain(format!("transform argument must be >= 0, got {c}")));
    }
    if !(alpha > 2.0) {
        return Err(Error::Config("path-loss exponent must exceed 2".into()));
    }
    let beta = 2.0 / alpha;
    let mut out = Vec::with_capacity(len);
    out.push(1.0 - hyp_2f1(q, -beta, 1.0 - beta, -c)?);
    let mut poch = 1.0;
    let mut c_pow = 1.0;
    for n in 1..len {
        let nf = n as f64;
        poch *= (q + nf - 1.0) * (nf - 1.0 - beta) / (nf * (nf - beta));
        c_pow *= c;
        let f = hyp_2f1(q + nf, nf - beta, nf + 1.0 - beta, -c)?;
        out.push(-c_pow * poch * f);
    }
    Ok(out)
}

/// Laplace transform of the interference power at the equidistant typical
/// point with common link distance `d`, evaluated at `s`.
pub fn laplace_interference(scheme: SchemeId, s: f64, d: f64, p: &ModelParams) -> Result<f64> {
    p.validate()?;
    if !(s >= 0.0) || !s.is_finite() {
        return Err(Error::Domain(format!("transform point must be >= 0, got {s}")));
    }
    if !(d > 0.0) {
        return Err(Error::Singularity("link distance must be positive".into()));
    }
    let u = p.lambda * std::f64::consts::PI * d * d;
    let dma = d.powf(-p.alpha);
    match scheme {
        SchemeId::Jt => {
            // thinned groups, aggregated gain mean mu
            let theta0 = theta_column(1, p.mu * s * dma, p.alpha)?[0];
            Ok((p.nu() * u * theta0).exp())
        }
        SchemeId::Ops => {
            // full-intensity singletons outside the disc, cooperators silent
            let theta0 = theta_column(1, s * dma, p.alpha)?[0];
            Ok((u * theta0).exp())
        }
        SchemeId::Rps => {
            // full field plus the two non-serving cooperators exactly at d
            let c = s * dma;
            let theta0 = theta_column(1, c, p.alpha)?[0];
            Ok((u * theta0).exp() / ((1.0 + c) * (1.0 + c)))
        }
        other => Err(Error::Domain(format!(
            "no analytic interference transform for baseline scheme {other}"
        ))),
    }
}

/// A coverage column that is affine in u: entry k reads a[k] u + b[k].
/// `weights` are the signed weights applied to the matrix-exponential column
/// when collapsing it to a probability.
#[derive(Debug, Clone)]
pub struct AffineColumn {
    pub a: Vec<f64>,
    pub b: Vec<f64>,
    pub weights: Vec<f64>,
}

impl AffineColumn {
    pub fn len(&self) -> usize {
        self.a.len()
    }

    pub fn is_empty(&self) -> bool {
        self.a.is_empty()
    }

    pub fn at_u(&self, u: f64) -> Vec<f64> {
        self.a.iter().zip(&self.b).map(|(&a, &b)| a * u + b).collect()
    }
}

fn omega_of(p: &ModelParams) -> (u32, f64) {
    let mm = moment_match(p.antennas);
    (mm.m, p.omega_override.unwrap_or(mm.omega))
}

/// Column for coherent three-station transmission: matched Gamma shape m,
/// argument c = m mu gamma / omega, scaled by the intensity ratio nu.
pub fn jt_column(gamma: f64, p: &ModelParams) -> Result<AffineColumn> {
    let (m, omega) = omega_of(p);
    let c = m as f64 * p.mu * gamma / omega;
    let theta = theta_column(m as usize, c, p.alpha)?;
    let nu = p.nu();
    Ok(AffineColumn {
        a: theta.iter().map(|&t| nu * t).collect(),
        b: vec![0.0; m as usize],
        weights: vec![1.0; m as usize],
    })
}

/// Column for uniform single-station serving: exact Gamma(M,1) gain, full
/// interferer field plus the two non-serving cooperators at distance d,
/// whose transform contributes the u-free part.
pub fn rps_column(gamma: f64, p: &ModelParams) -> Result<AffineColumn> {
    let m = p.antennas as usize;
    let theta = theta_column(m, gamma, p.alpha)?;
    let mut b = vec![0.0; m];
    b[0] = -2.0 * (1.0 + gamma).ln();
    let ratio = gamma / (1.0 + gamma);
    let mut pow = 1.0;
    for (k, bk) in b.iter_mut().enumerate().skip(1) {
        pow *= ratio;
        *bk = 2.0 / k as f64 * pow;
    }
    Ok(AffineColumn { a: theta, b, weights: vec![1.0; m] })
}

/// Coefficients of (sum_{k<M} x^k / k!)^n.
fn truncated_exp_power(m_antennas: u32, n: u32) -> Vec<f64> {
    let mut base = Vec::with_capacity(m_antennas as usize);
    let mut inv_fact = 1.0;
    for k in 0..m_antennas {
        if k > 0 {
            inv_fact /= k as f64;
        }
        base.push(inv_fact);
    }
    let mut acc = vec![1.0];
    for _ in 0..n {
        let mut next = vec![0.0; acc.len() + base.len() - 1];
        for (i, &x) in acc.iter().enumerate() {
            for (j, &y) in base.iter().enumerate() {
                next[i + j] += x * y;
            }
        }
        acc = next;
    }
    acc
}

/// n-th moment column of the strongest-of-three selection: transform order
/// n at argument c = n gamma with the truncated-exponential weights. The
/// inclusion-exclusion combination 3 E_1 - 3 E_2 + E_3 yields the coverage.
pub fn ops_term_column(n: u32, gamma: f64, p: &ModelParams) -> Result<AffineColumn> {
    if !(1..=3).contains(&n) {
        return Err(Error::Domain(format!("selection moment order must be 1..=3, got {n}")));
    }
    let m = p.antennas;
    let dim = (n * (m - 1) + 1) as usize;
    let cfs = truncated_exp_power(m, n);
    debug_assert_eq!(cfs.len(), dim);
    let theta = theta_column(dim, n as f64 * gamma, p.alpha)?;
    let nf = n as f64;
    let mut weights = Vec::with_capacity(dim);
    let mut fact = 1.0;
    let mut n_pow = 1.0;
    for (j, &cf) in cfs.iter().enumerate() {
        if j > 0 {
            fact *= j as f64;
            n_pow *= nf;
        }
        weights.push(cf * fact / n_pow);
    }
    Ok(AffineColumn { a: theta, b: vec![0.0; dim], weights })
}

/// Column for the comparison model that keeps the three members of each
/// interferer group as independent unit-mark stations (kernel exponent 3)
/// at the thinned intensity.
pub fn pv_kernel_column(gamma: f64, p: &ModelParams) -> Result<AffineColumn> {
    let (m, omega) = omega_of(p);
    let c = m as f64 * gamma / omega;
    let theta = theta_column_kernel(m as usize, c, p.alpha, 3.0)?;
    let nu = p.nu();
    Ok(AffineColumn {
        a: theta.iter().map(|&t| nu * t).collect(),
        b: vec![0.0; m as usize],
        weights: vec![1.0; m as usize],
    })
}

/// The Toeplitz column at a given u for schemes with a single column. The
/// selection scheme combines three transform orders and has no single
/// column; ask `ops_term_column` for its pieces.
pub fn toeplitz_coverage_column(
    scheme: SchemeId,
    gamma: f64,
    u: f64,
    p: &ModelParams,
) -> Result<Vec<f64>> {
    if !(u >= 0.0) {
        return Err(Error::Domain(format!("u must be >= 0, got {u}")));
    }
    match scheme {
        SchemeId::Jt => Ok(jt_column(gamma, p)?.at_u(u)),
        SchemeId::Rps => Ok(rps_column(gamma, p)?.at_u(u)),
        SchemeId::Ops => Err(Error::Domain(
            "the selection scheme uses a family of columns; see ops_term_column".into(),
        )),
        other => Err(Error::Domain(format!("no coverage column for baseline scheme {other}"))),
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_relative_eq;

    fn p_default() -> ModelParams {
        ModelParams::default_network()
    }

    #[test]
    fn theta0_matches_arctan_form_at_alpha4() {
        // 1 - F(1, -1/2; 1/2; -c) = -sqrt(c) arctan(sqrt(c))
        for c in [0.1, 1.0, 7.5, 120.0] {
            let th = theta_column(1, c, 4.0).unwrap()[0];
            assert_relative_eq!(th, -(c.sqrt()) * c.sqrt().atan(), max_relative = 1e-12);
        }
    }

    #[test]
    fn theta_matches_finite_differences() {
        // theta_n = (-c)^n / n! d^n/dc^n [1 - F(q, -b; 1-b; -c)]
        let alpha = 4.0;
        for &q in &[1.0, 3.0] {
            let c = 0.7;
            let h = 1e-5;
            let g = |x: f64| 1.0 - hyp_2f1(q, -0.5, 0.5, -x).unwrap();
            let col = theta_column_kernel(3, c, alpha, q).unwrap();
            let d1 = (g(c + h) - g(c - h)) / (2.0 * h);
            assert_relative_eq!(col[1], -c * d1, max_relative = 1e-7);
            // second difference needs a wider step to beat rounding noise
            let h2 = 1e-4;
            let d2 = (g(c + h2) - 2.0 * g(c) + g(c - h2)) / (h2 * h2);
            assert_relative_eq!(col[2], c * c / 2.0 * d2, max_relative = 1e-5);
        }
    }

    #[test]
    fn columns_are_intensity_free() {
        let p1 = ModelParams::new(0.02, 4.0, 2).unwrap();
        let p2 = ModelParams::new(0.0071, 4.0, 2).unwrap();
        for gamma in [0.5, 1.0, 8.0] {
            let c1 = jt_column(gamma, &p1).unwrap();
            let c2 = jt_column(gamma, &p2).unwrap();
            assert_eq!(c1.a, c2.a);
            let r1 = rps_column(gamma, &p1).unwrap();
            let r2 = rps_column(gamma, &p2).unwrap();
            assert_eq!(r1.a, r2.a);
            assert_eq!(r1.b, r2.b);
            let o1 = ops_term_column(2, gamma, &p1).unwrap();
            let o2 = ops_term_column(2, gamma, &p2).unwrap();
            assert_eq!(o1.a, o2.a);
            assert_eq!(o1.weights, o2.weights);
        }
    }

    #[test]
    fn laplace_spot_values() {
        let p = p_default();
        let mm = moment_match(1);
        let d = 2.0f64;
        let s = mm.m as f64 * 1.0 * d.powf(p.alpha) / mm.omega;
        let l_jt = laplace_interference(SchemeId::Jt, s, d, &p).unwrap();
        assert_relative_eq!(l_jt, 0.928144594251127, max_relative = 1e-12);
        // log transform at the same point
        let u = p.lambda * std::f64::consts::PI * d * d;
        let theta0 = theta_column(1, p.mu * s * d.powf(-p.alpha), p.alpha).unwrap()[0];
        assert_relative_eq!(p.nu() * u * theta0, -0.0745677455628745, max_relative = 1e-12);

        let s_ops = 1.0 * d.powf(p.alpha); // c = gamma = 1
        let l_ops = laplace_interference(SchemeId::Ops, s_ops, d, &p).unwrap();
        assert_relative_eq!(l_ops, 0.820868717415540, max_relative = 1e-12);

        let l_rps = laplace_interference(SchemeId::Rps, s_ops, d, &p).unwrap();
        assert_relative_eq!(l_rps, l_ops / 4.0, max_relative = 1e-12);
    }

    #[test]
    fn laplace_is_monotone_and_bounded() {
        let p = p_default();
        let mut last = 1.0;
        for i in 0..20 {
            let s = 0.5 * i as f64 * 16.0;
            let l = laplace_interference(SchemeId::Jt, s, 2.0, &p).unwrap();
            assert!(l <= last + 1e-15 && l > 0.0 && l <= 1.0);
            last = l;
        }
    }

    #[test]
    fn truncated_exp_power_coefficients() {
        assert_eq!(truncated_exp_power(1, 3), vec![1.0]);
        assert_eq!(truncated_exp_power(2, 2), vec![1.0, 2.0, 1.0]);
        let m3n2 = truncated_exp_power(3, 2);
        assert_eq!(m3n2.len(), 5);
        assert_relative_eq!(m3n2[2], 2.0); // x^2: 2*(1)(1/2) + 1*1
        assert_relative_eq!(m3n2[4], 0.25);
    }

    #[test]
    fn rps_constant_terms() {
        let p = ModelParams::new(0.02, 4.0, 3).unwrap();
        let col = rps_column(1.0, &p).unwrap();
        assert_relative_eq!(col.b[0], -2.0 * 2.0f64.ln(), max_relative = 1e-14);
        assert_relative_eq!(col.b[1], 1.0, max_relative = 1e-14);
        assert_relative_eq!(col.b[2], 0.25, max_relative = 1e-14);
    }

    #[test]
    fn column_dimensions_follow_the_shape() {
        let p = ModelParams::new(0.02, 4.0, 2).unwrap();
        assert_eq!(jt_column(1.0, &p).unwrap().len(), 6); // matched shape for M=2
        assert_eq!(rps_column(1.0, &p).unwrap().len(), 2); // exact Gamma(2,1)
        assert_eq!(ops_term_column(3, 1.0, &p).unwrap().len(), 4); // 3(M-1)+1
    }
}
