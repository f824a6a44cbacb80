//! Quadrature: generalized Gauss-Laguerre rules for the radial outer
//! integrals (weight u e^{-u}), adaptive Gauss-Kronrod on finite intervals,
//! and a panel scheme for semi-infinite integrands with truncated tails.

use std::sync::OnceLock;

use crate::error::{Error, Result};
use crate::specfun::gamma::lgamma;

/// Gauss-Laguerre rule for integrals of the form
/// int_0^inf u e^{-u} g(u) du  ~  sum w_i g(x_i)
/// (generalized rule with weight exponent 1; the weights absorb u e^{-u}).
#[derive(Debug, Clone)]
pub struct GaussLaguerre {
    pub nodes: Vec<f64>,
    pub weights: Vec<f64>,
}

impl GaussLaguerre {
    /// Newton iteration on the generalized Laguerre polynomial L_n^{(1)}.
    pub fn new(n: usize) -> Result<Self> {
        let alf = 1.0_f64;
        let mut nodes = vec![0.0; n];
        let mut weights = vec![0.0; n];
        let nf = n as f64;
        let mut z = 0.0_f64;
        for i in 0..n {
            if i == 0 {
                z = (1.0 + alf) * (3.0 + 0.92 * alf) / (1.0 + 2.4 * nf + 1.8 * alf);
            } else if i == 1 {
                z += (15.0 + 6.25 * alf) / (1.0 + 0.9 * alf + 2.5 * nf);
            } else {
                let ai = (i - 1) as f64;
                z += ((1.0 + 2.55 * ai) / (1.9 * ai) + 1.26 * ai * alf / (1.0 + 3.5 * ai))
                    * (z - nodes[i - 2])
                    / (1.0 + 0.3 * alf);
            }
            let recurrence = |z: f64| -> (f64, f64) {
                let mut p1 = 1.0;
                let mut p2 = 0.0;
                for j in 1..=n {
                    let jf = j as f64;
                    let p3 = p2;
                    p2 = p1;
                    p1 = ((2.0 * jf - 1.0 + alf - z) * p2 - (jf - 1.0 + alf) * p3) / jf;
                }
                (p1, p2)
            };
            let mut p2 = 0.0;
            let mut pp = 0.0;
            let mut converged = false;
            let mut prev_step = f64::INFINITY;
            for _ in 0..200 {
                let (a, b) = recurrence(z);
                p2 = b;
                pp = (nf * a - (nf + alf) * b) / z;
                let step = a / pp;
                z -= step;
                // stop on a clean relative step, or once the step hits the
                // rounding-noise floor and stops shrinking
                let at_floor = step.abs() < 1e-10 * z.abs().max(1.0) && step.abs() >= prev_step;
                if step.abs() <= 1e-13 * z.abs().max(1.0) || at_floor {
                    converged = true;
                    break;
                }
                prev_step = step.abs();
            }
            if !converged {
                return Err(Error::Numerical(format!(
                    "Gauss-Laguerre node {i} of {n} did not converge"
                )));
            }
            nodes[i] = z;
            weights[i] = -(lgamma(alf + nf) - lgamma(nf)).exp() / (pp * nf * p2);
        }
        Ok(GaussLaguerre { nodes, weights })
    }

    pub fn integrate(&self, g: &dyn Fn(f64) -> f64) -> f64 {
        self.nodes
            .iter()
            .zip(&self.weights)
            .map(|(&x, &w)| w * g(x))
            .sum()
    }
}

pub fn laguerre_64() -> &'static GaussLaguerre {
    static CELL: OnceLock<GaussLaguerre> = OnceLock::new();
    CELL.get_or_init(|| GaussLaguerre::new(64).expect("64-node rule construction"))
}

pub fn laguerre_128() -> &'static GaussLaguerre {
    static CELL: OnceLock<GaussLaguerre> = OnceLock::new();
    CELL.get_or_init(|| GaussLaguerre::new(128).expect("128-node rule construction"))
}

// 7-15 Gauss-Kronrod pair; right-half abscissae on [-1, 1].
const XGK: [f64; 8] = [
    0.991455371120813,
    0.949107912342759,
    0.864864423359769,
    0.741531185599394,
    0.586087235467691,
    0.405845151377397,
    0.207784955007898,
    0.0,
];
const WGK: [f64; 8] = [
    0.022935322010529,
    0.063092092629979,
    0.104790010322250,
    0.140653259715525,
    0.169004726639267,
    0.190350578064785,
    0.204432940075298,
    0.209482141084728,
];
const WG: [f64; 4] = [
    0.129484966168870,
    0.279705391489277,
    0.381830050505119,
    0.417959183673469,
];

/// One Kronrod panel: returns (K15 value, |K15 - G7| error estimate).
fn kronrod_panel(f: &dyn Fn(f64) -> f64, a: f64, b: f64) -> (f64, f64) {
    let c = 0.5 * (a + b);
    let h = 0.5 * (b - a);
    let fc = f(c);
    let mut k = WGK[7] * fc;
    let mut g = WG[3] * fc;
    for j in 0..7 {
        let x = h * XGK[j];
        let flo = f(c - x);
        let fhi = f(c + x);
        k += WGK[j] * (flo + fhi);
        if j % 2 == 1 {
            g += WG[j / 2] * (flo + fhi);
        }
    }
    (k * h, (k - g).abs() * h)
}

#[derive(Debug, Clone, Copy)]
pub struct QuadResult {
    pub value: f64,
    pub abs_err_est: f64,
    pub evals: usize,
}

/// Adaptive bisection with per-interval acceptance err <= rel_tol |K| + abs floor.
pub fn integrate_adaptive_diag(
    f: &dyn Fn(f64) -> f64,
    a: f64,
    b: f64,
    rel_tol: f64,
) -> Result<QuadResult> {
    let mut stack = vec![(a, b, 0u32)];
    let mut value = 0.0;
    let mut err_acc = 0.0;
    let mut evals = 0usize;
    while let Some((lo, hi, depth)) = stack.pop() {
        let (k, e) = kronrod_panel(f, lo, hi);
        evals += 15;
        if evals > 2_000_000 {
            return Err(Error::Numerical("adaptive quadrature evaluation budget exhausted".into()));
        }
        if e <= rel_tol * k.abs() + 1e-15 || depth >= 48 {
            value += k;
            err_acc += e;
        } else {
            let mid = 0.5 * (lo + hi);
            stack.push((lo, mid, depth + 1));
            stack.push((mid, hi, depth + 1));
        }
    }
    Ok(QuadResult {
        value,
        abs_err_est: err_acc,
        evals,
    })
}

pub fn integrate_adaptive(f: &dyn Fn(f64) -> f64, a: f64, b: f64, rel_tol: f64) -> Result<f64> {
    Ok(integrate_adaptive_diag(f, a, b, rel_tol)?.value)
}

/// Semi-infinite integral via geometrically growing panels starting at
/// width `h0`. The tail is truncated once the panel mass and the integrand
/// at the panel edge have both fallen below 1e-12 of the running scale,
/// twice in a row.
pub fn integrate_to_inf(f: &dyn Fn(f64) -> f64, a: f64, h0: f64, rel_tol: f64) -> Result<QuadResult> {
    let mut lo = a;
    let mut h = h0.max(1e-12);
    let mut acc = 0.0;
    let mut err = 0.0;
    let mut evals = 0usize;
    let mut peak = 0.0_f64;
    let mut quiet = 0u32;
    for _ in 0..2000 {
        let hi = lo + h;
        let r = integrate_adaptive_diag(f, lo, hi, rel_tol)?;
        acc += r.value;
        err += r.abs_err_est;
        evals += r.evals;
        let edge = f(hi).abs();
        peak = peak.max(r.value.abs() / h).max(edge);
        let scale = acc.abs().max(peak * h0).max(1e-300);
        if r.value.abs() <= 1e-12 * scale && edge <= 1e-12 * peak.max(1e-300) {
            quiet += 1;
            if quiet >= 2 {
                return Ok(QuadResult { value: acc, abs_err_est: err, evals });
            }
        } else {
            quiet = 0;
        }
        lo = hi;
        h *= 2.0;
    }
    Err(Error::Numerical("semi-infinite quadrature did not reach its tail".into()))
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_relative_eq;

    #[test]
    fn laguerre_moments() {
        // int u^k u e^{-u} du = (k+1)!
        for rule in [laguerre_64(), laguerre_128()] {
            let mut fact = 1.0_f64;
            for k in 0..20u32 {
                fact *= (k + 1) as f64;
                let v = rule.integrate(&|u| u.powi(k as i32));
                assert_relative_eq!(v, fact, max_relative = 1e-10);
            }
        }
    }

    #[test]
    fn laguerre_weight_sum() {
        let s: f64 = laguerre_64().weights.iter().sum();
        assert_relative_eq!(s, 1.0, max_relative = 1e-12); // Gamma(2)
    }

    #[test]
    fn laguerre_vs_adaptive_on_smooth() {
        // e^{-u/2} against u e^{-u}: exact 1/(1.5)^2
        let v = laguerre_64().integrate(&|u| (-0.5 * u).exp());
        assert_relative_eq!(v, 1.0 / 2.25, max_relative = 1e-10);
    }

    #[test]
    fn adaptive_known_integrals() {
        let v = integrate_adaptive(&|x: f64| x.sin(), 0.0, std::f64::consts::PI, 1e-12).unwrap();
        assert_relative_eq!(v, 2.0, max_relative = 1e-11);
        let v = integrate_adaptive(&|x: f64| (-x * x).exp(), -8.0, 8.0, 1e-12).unwrap();
        assert_relative_eq!(v, std::f64::consts::PI.sqrt(), max_relative = 1e-11);
    }

    #[test]
    fn semi_infinite_tail() {
        let r = integrate_to_inf(&|x: f64| (-x).exp(), 0.0, 1.0, 1e-12).unwrap();
        assert_relative_eq!(r.value, 1.0, max_relative = 1e-10);
        // heavy-ish algebraic tail
        let r = integrate_to_inf(&|x: f64| 1.0 / (1.0 + x * x), 0.0, 1.0, 1e-12).unwrap();
        assert_relative_eq!(r.value, std::f64::consts::FRAC_PI_2, max_relative = 1e-8);
    }
}
