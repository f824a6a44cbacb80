//! Gamma-family kernels: log-gamma, regularized incomplete gamma (both
//! tails), its inverse, and erfc expressed through the upper tail.

use crate::error::{Error, Result};

/// Lanczos coefficients, g = 7, 9 terms.
const LANCZOS: [f64; 9] = [
    0.999_999_999_999_809_93,
    676.520_368_121_885_1,
    -1_259.139_216_722_402_8,
    771.323_428_777_653_13,
    -176.615_029_162_140_59,
    12.507_343_278_686_905,
    -0.138_571_095_265_720_12,
    9.984_369_578_019_571_6e-6,
    1.505_632_735_149_311_6e-7,
];

/// Natural log of Gamma(x) for x > 0.
pub fn lgamma(x: f64) -> f64 {
    debug_assert!(x > 0.0, "lgamma domain: x > 0, got {x}");
    if x < 0.5 {
        // reflection keeps the Lanczos argument comfortably positive
        let (s, _) = sin_pi(x);
        return std::f64::consts::PI.ln() - s.abs().ln() - lgamma(1.0 - x);
    }
    let x = x - 1.0;
    let mut a = LANCZOS[0];
    let t = x + 7.5;
    for (i, &c) in LANCZOS.iter().enumerate().skip(1) {
        a += c / (x + i as f64);
    }
    0.5 * (2.0 * std::f64::consts::PI).ln() + (x + 0.5) * t.ln() - t + a.ln()
}

/// sin(pi x) computed via range reduction; returns (value, x rounded to i64).
fn sin_pi(x: f64) -> (f64, i64) {
    let k = x.floor();
    let r = x - k;
    (if r == 0.0 { 0.0 } else { (std::f64::consts::PI * r).sin() * if (k as i64) % 2 == 0 { 1.0 } else { -1.0 } }, k as i64)
}

/// (ln|Gamma(x)|, sign) for non-pole real x; poles (x nonpositive integer)
/// are a domain error.
pub fn lgamma_signed(x: f64) -> Result<(f64, f64)> {
    if x > 0.0 {
        return Ok((lgamma(x), 1.0));
    }
    if x == x.floor() {
        return Err(Error::Domain(format!("Gamma pole at x = {x}")));
    }
    // Gamma(x) = pi / (sin(pi x) Gamma(1-x))
    let (s, _) = sin_pi(x);
    let lg = std::f64::consts::PI.ln() - s.abs().ln() - lgamma(1.0 - x);
    Ok((lg, s.signum()))
}

pub fn gamma_fn(x: f64) -> f64 {
    lgamma(x).exp()
}

/// All four members of the incomplete-gamma family at (a, x).
#[derive(Debug, Clone, Copy)]
pub struct GammaFamily {
    /// Gamma(a)
    pub gamma: f64,
    /// lower incomplete gamma(a, x)
    pub lower: f64,
    /// upper incomplete Gamma(a, x)
    pub upper: f64,
    /// regularized upper tail Q(a, x) = upper / gamma
    pub regularized_q: f64,
}

pub fn gamma_family(a: f64, x: f64) -> Result<GammaFamily> {
    if !a.is_finite() || !x.is_finite() || a <= 0.0 || x < 0.0 {
        return Err(Error::Domain(format!(
            "gamma_family requires a > 0, x >= 0 (got a = {a}, x = {x})"
        )));
    }
    let g = gamma_fn(a);
    let p = regularized_p(a, x)?;
    let q = 1.0 - p;
    Ok(GammaFamily {
        gamma: g,
        lower: p * g,
        upper: q * g,
        regularized_q: q,
    })
}

const IG_EPS: f64 = 1e-15;
const IG_ITMAX: usize = 600;

/// Regularized lower incomplete gamma P(a, x).
pub fn regularized_p(a: f64, x: f64) -> Result<f64> {
    if x == 0.0 {
        return Ok(0.0);
    }
    if x < a + 1.0 {
        // series expansion converges quickly on this side
        let mut ap = a;
        let mut term = 1.0 / a;
        let mut sum = term;
        for _ in 0..IG_ITMAX {
            ap += 1.0;
            term *= x / ap;
            sum += term;
            if term.abs() < sum.abs() * IG_EPS {
                let lg = a * x.ln() - x - lgamma(a);
                return Ok((sum * lg.exp()).clamp(0.0, 1.0));
            }
        }
        Err(Error::Numerical(format!(
            "incomplete gamma series failed to converge (a = {a}, x = {x})"
        )))
    } else {
        // Lentz continued fraction for the upper tail
        let tiny = 1e-300;
        let mut b = x + 1.0 - a;
        let mut c = 1.0 / tiny;
        let mut d = 1.0 / b;
        let mut h = d;
        for i in 1..=IG_ITMAX {
            let an = -(i as f64) * (i as f64 - a);
            b += 2.0;
            d = an * d + b;
            if d.abs() < tiny {
                d = tiny;
            }
            c = b + an / c;
            if c.abs() < tiny {
                c = tiny;
            }
            d = 1.0 / d;
            let del = d * c;
            h *= del;
            if (del - 1.0).abs() < IG_EPS {
                let lg = a * x.ln() - x - lgamma(a);
                let q = (lg.exp() * h).clamp(0.0, 1.0);
                return Ok(1.0 - q);
            }
        }
        Err(Error::Numerical(format!(
            "incomplete gamma continued fraction failed to converge (a = {a}, x = {x})"
        )))
    }
}

pub fn regularized_q(a: f64, x: f64) -> Result<f64> {
    Ok(1.0 - regularized_p(a, x)?)
}

/// Inverse of P(a, .) by bisection to 1e-12 relative on x.
pub fn regularized_p_inv(a: f64, u: f64) -> Result<f64> {
    if !(0.0..1.0).contains(&u) {
        return Err(Error::Domain(format!("inverse CDF argument {u} outside [0,1)")));
    }
    if u == 0.0 {
        return Ok(0.0);
    }
    let mut hi = a.max(1.0);
    while regularized_p(a, hi)? < u {
        hi *= 2.0;
        if hi > 1e12 {
            return Err(Error::Numerical("inverse gamma CDF bracket blew up".into()));
        }
    }
    let mut lo = 0.0_f64;
    for _ in 0..200 {
        let mid = 0.5 * (lo + hi);
        if regularized_p(a, mid)? < u {
            lo = mid;
        } else {
            hi = mid;
        }
        if hi - lo <= 1e-12 * hi.max(1.0) {
            break;
        }
    }
    Ok(0.5 * (lo + hi))
}

/// erfc(y) for y >= 0, via the upper gamma tail at a = 1/2.
pub fn erfc(y: f64) -> Result<f64> {
    if y < 0.0 {
        return Err(Error::Domain("erfc implemented for y >= 0".into()));
    }
    regularized_q(0.5, y * y)
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_relative_eq;

    #[test]
    fn lgamma_integers() {
        // Gamma(n) = (n-1)!
        let mut f = 1.0;
        for n in 1..15u32 {
            assert_relative_eq!(lgamma(n as f64).exp(), f, max_relative = 1e-12);
            f *= n as f64;
        }
    }

    #[test]
    fn lgamma_half() {
        assert_relative_eq!(
            gamma_fn(0.5),
            std::f64::consts::PI.sqrt(),
            max_relative = 1e-13
        );
        assert_relative_eq!(
            gamma_fn(1.5),
            0.5 * std::f64::consts::PI.sqrt(),
            max_relative = 1e-13
        );
    }

    #[test]
    fn lgamma_signed_reflection() {
        // Gamma(-0.5) = -2 sqrt(pi)
        let (lg, s) = lgamma_signed(-0.5).unwrap();
        assert_relative_eq!(s * lg.exp(), -2.0 * std::f64::consts::PI.sqrt(), max_relative = 1e-12);
        // Gamma(-1.5) = 4 sqrt(pi) / 3
        let (lg, s) = lgamma_signed(-1.5).unwrap();
        assert_relative_eq!(s * lg.exp(), 4.0 * std::f64::consts::PI.sqrt() / 3.0, max_relative = 1e-12);
        assert!(lgamma_signed(-2.0).is_err());
    }

    #[test]
    fn family_trivial_points() {
        // Q(1, x) = exp(-x)
        let f = gamma_family(1.0, 2.0).unwrap();
        assert_relative_eq!(f.regularized_q, (-2.0_f64).exp(), max_relative = 1e-12);
        // x = 0: Q = 1, lower = 0, Gamma(3) = 2
        let f = gamma_family(3.0, 0.0).unwrap();
        assert_eq!(f.regularized_q, 1.0);
        assert_eq!(f.lower, 0.0);
        assert_relative_eq!(f.gamma, 2.0, max_relative = 1e-12);
    }

    #[test]
    fn family_additivity() {
        for &a in &[0.5, 1.0, 2.0, 3.5] {
            for &x in &[0.0, 0.3, 1.0, 4.0, 17.0, 50.0] {
                let f = gamma_family(a, x).unwrap();
                assert_relative_eq!(f.lower + f.upper, f.gamma, max_relative = 1e-12);
                assert!((0.0..=1.0).contains(&f.regularized_q));
            }
        }
    }

    /// Cross-check the lower tail against adaptive quadrature of t^{a-1}e^{-t}.
    #[test]
    fn family_vs_quadrature() {
        let f = gamma_family(1.5, 1.0).unwrap();
        let num = crate::quad::integrate_adaptive(&|t: f64| t.powf(0.5) * (-t).exp(), 0.0, 1.0, 1e-12)
            .unwrap();
        assert_relative_eq!(f.lower, num, max_relative = 1e-9);
    }

    #[test]
    fn inverse_roundtrip() {
        for &a in &[1.0, 2.0, 4.0] {
            for &u in &[0.01, 0.3, 0.5, 0.9, 0.999] {
                let x = regularized_p_inv(a, u).unwrap();
                assert_relative_eq!(regularized_p(a, x).unwrap(), u, epsilon = 1e-9);
            }
        }
    }

    #[test]
    fn erfc_known_values() {
        assert_relative_eq!(erfc(0.0).unwrap(), 1.0, max_relative = 1e-12);
        assert_relative_eq!(erfc(1.0).unwrap(), 0.15729920705028513, max_relative = 1e-10);
    }
}
