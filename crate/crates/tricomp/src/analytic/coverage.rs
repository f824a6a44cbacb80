//! Threshold coverage P(SIR > gamma) for an equidistant typical point.
//!
//! Every scheme reduces to signed sums over the first column of exp(T) for
//! lower-triangular Toeplitz T whose column is affine in u = lambda pi d^2.
//! The u average against the Gamma(2,1) density is then available two ways:
//! an exact polynomial reduction (the primary path, manifestly free of the
//! intensity) and Gauss-Laguerre quadrature over u (the cross-check). A
//! disagreement beyond the target tolerance escalates to a 128-node rule and
//! finally to adaptive bisection.

use crate::analytic::laplace::{
    jt_column, ops_term_column, pv_kernel_column, rps_column, AffineColumn,
};
use crate::analytic::moments::moment_match;
use crate::error::{Error, Result};
use crate::params::{ModelParams, SchemeId};
use crate::quad::{integrate_adaptive, laguerre_128, laguerre_64, GaussLaguerre};
use crate::specfun::{hyp_2f1, lgamma, ltt_exp, ToeplitzFirstColumn};

const REL_AGREE: f64 = 1e-7;

#[derive(Debug, Clone, Copy)]
pub struct CoverageResult {
    pub value: f64,
    /// Exact u-reduction (polynomial moments of the Gamma(2,1) weight).
    pub reduced: f64,
    /// Best quadrature evaluation used for the cross-check.
    pub quadrature: f64,
    /// Relative gap between the two paths.
    pub discrepancy: f64,
    /// 128-node rule was engaged.
    pub refined: bool,
    /// Adaptive bisection fallback was engaged (its value is returned).
    pub adaptive: bool,
}

/// Exact value of int_0^inf u e^{-u} sum_k w_k [exp(T(u))]_k du for an
/// affine column, via the off-diagonal polynomial recursion and the moments
/// int u^{j+1} e^{-(1-a0)u} du = (j+1)! / (1-a0)^{j+2}.
fn reduced_value(col: &AffineColumn) -> Result<f64> {
    let m = col.len();
    let a0 = col.a[0];
    let b0 = col.b[0];
    if !(a0 < 1.0) {
        return Err(Error::Numerical(format!(
            "u integral diverges: leading column entry {a0} >= 1"
        )));
    }
    let mut polys: Vec<Vec<f64>> = Vec::with_capacity(m);
    polys.push(vec![1.0]);
    for n in 1..m {
        let mut next = vec![0.0; n + 1];
        for i in 0..n {
            let f = (n - i) as f64 / n as f64;
            let a = col.a[n - i];
            let b = col.b[n - i];
            for (j, &pj) in polys[i].iter().enumerate() {
                next[j] += f * b * pj;
                next[j + 1] += f * a * pj;
            }
        }
        polys.push(next);
    }
    let inv = 1.0 / (1.0 - a0);
    // moments[j] = (j+1)! inv^(j+2)
    let mut moments = Vec::with_capacity(m + 1);
    moments.push(inv * inv);
    for j in 1..=m {
        let prev = moments[j - 1];
        moments.push(prev * (j + 1) as f64 * inv);
    }
    let mut total = 0.0;
    for (k, poly) in polys.iter().enumerate() {
        let mut term = 0.0;
        for (j, &pj) in poly.iter().enumerate() {
            term += pj * moments[j];
        }
        total += col.weights[k] * term;
    }
    let v = b0.exp() * total;
    if !v.is_finite() {
        return Err(Error::Numerical("u reduction overflowed".into()));
    }
    Ok(v)
}

fn column_sum_at_u(col: &AffineColumn, u: f64) -> Result<f64> {
    let q = ltt_exp(&ToeplitzFirstColumn::new(col.at_u(u))?)?;
    Ok(q
        .entries
        .iter()
        .zip(&col.weights)
        .map(|(&qi, &wi)| qi * wi)
        .sum())
}

fn quad_value(col: &AffineColumn, rule: &GaussLaguerre) -> Result<f64> {
    let mut acc = 0.0;
    for (&u, &w) in rule.nodes.iter().zip(&rule.weights) {
        acc += w * column_sum_at_u(col, u)?;
    }
    Ok(acc)
}

fn adaptive_value(terms: &[(f64, AffineColumn)]) -> Result<f64> {
    let g = |u: f64| -> f64 {
        let mut s = 0.0;
        for (coef, col) in terms {
            match column_sum_at_u(col, u) {
                Ok(v) => s += coef * v,
                Err(_) => return f64::NAN,
            }
        }
        u * (-u).exp() * s
    };
    // the Gamma(2,1) weight leaves < 1e-24 of its mass beyond u = 60
    let v = integrate_adaptive(&g, 0.0, 60.0, 1e-9)?;
    if !v.is_finite() {
        return Err(Error::Numerical("adaptive u integration failed".into()));
    }
    Ok(v)
}

/// Shared engine: signed combination of affine-column averages with the
/// reduction as primary path and quadrature as the cross-check.
pub(crate) fn coverage_from_terms(terms: &[(f64, AffineColumn)]) -> Result<CoverageResult> {
    let mut reduced = 0.0;
    let mut quad = 0.0;
    for (coef, col) in terms {
        reduced += coef * reduced_value(col)?;
        quad += coef * quad_value(col, laguerre_64())?;
    }
    let scale = reduced.abs().max(1e-12);
    let mut discrepancy = (reduced - quad).abs() / scale;
    let mut refined = false;
    let mut adaptive = false;
    let value = reduced;
    if discrepancy > REL_AGREE {
        refined = true;
        let mut q128 = 0.0;
        for (coef, col) in terms {
            q128 += coef * quad_value(col, laguerre_128())?;
        }
        quad = q128;
        discrepancy = (reduced - quad).abs() / scale;
        if discrepancy > REL_AGREE {
            // the fixed rules cannot resolve steep exponents; bisect instead.
            // The reduction stays authoritative (its moment formula is exact
            // for any a0 < 1); the refined quadrature is a diagnostic.
            adaptive = true;
            let a = adaptive_value(terms)?;
            quad = a;
            discrepancy = (reduced - a).abs() / scale;
        }
    }
    // tolerate sub-epsilon excursions from cancellation, reject real ones
    if !(-1e-9..=1.0 + 1e-9).contains(&value) {
        return Err(Error::Numerical(format!(
            "coverage left [0, 1]: {value}"
        )));
    }
    Ok(CoverageResult {
        value: value.clamp(0.0, 1.0),
        reduced,
        quadrature: quad,
        discrepancy,
        refined,
        adaptive,
    })
}

fn scheme_terms(scheme: SchemeId, gamma: f64, p: &ModelParams) -> Result<Vec<(f64, AffineColumn)>> {
    match scheme {
        SchemeId::Jt => Ok(vec![(1.0, jt_column(gamma, p)?)]),
        SchemeId::Rps => Ok(vec![(1.0, rps_column(gamma, p)?)]),
        SchemeId::Ops => Ok(vec![
            (3.0, ops_term_column(1, gamma, p)?),
            (-3.0, ops_term_column(2, gamma, p)?),
            (1.0, ops_term_column(3, gamma, p)?),
        ]),
        other => Err(Error::Domain(format!(
            "no analytic coverage for baseline scheme {other}"
        ))),
    }
}

/// Coverage probability P(SIR > gamma) with full diagnostics.
pub fn coverage(scheme: SchemeId, gamma: f64, p: &ModelParams) -> Result<CoverageResult> {
    p.validate()?;
    if !gamma.is_finite() || gamma < 0.0 {
        return Err(Error::Domain(format!("threshold must be >= 0, got {gamma}")));
    }
    if gamma == 0.0 {
        return Ok(CoverageResult {
            value: 1.0,
            reduced: 1.0,
            quadrature: 1.0,
            discrepancy: 0.0,
            refined: false,
            adaptive: false,
        });
    }
    coverage_from_terms(&scheme_terms(scheme, gamma, p)?)
}

pub fn coverage_value(scheme: SchemeId, gamma: f64, p: &ModelParams) -> Result<f64> {
    Ok(coverage(scheme, gamma, p)?.value)
}

/// Coverage for the comparison model with independent unit-mark group
/// members (kernel exponent 3), used by the cross-model rate comparison.
pub(crate) fn coverage_pv_kernel(gamma: f64, p: &ModelParams) -> Result<f64> {
    if gamma == 0.0 {
        return Ok(1.0);
    }
    Ok(coverage_from_terms(&[(1.0, pv_kernel_column(gamma, p)?)])?.value)
}

/// V(gamma) = (2 gamma / (alpha - 2)) F(1, 1-beta; 2-beta; -gamma); satisfies
/// 1 + V(gamma) = F(1, -beta; 1-beta; -gamma) and reduces to
/// sqrt(gamma) arctan(sqrt(gamma)) at alpha = 4.
pub fn v_factor(gamma: f64, alpha: f64) -> Result<f64> {
    if !(alpha > 2.0) {
        return Err(Error::Config("path-loss exponent must exceed 2".into()));
    }
    let beta = 2.0 / alpha;
    Ok(2.0 * gamma / (alpha - 2.0) * hyp_2f1(1.0, 1.0 - beta, 2.0 - beta, -gamma)?)
}

/// Single-antenna closed forms (the matched shape stays 3 for coherent
/// transmission, and the selection/uniform schemes have exponential gains).
pub fn coverage_closed_form_m1(scheme: SchemeId, gamma: f64, p: &ModelParams) -> Result<f64> {
    p.validate()?;
    if p.antennas != 1 {
        return Err(Error::Domain(format!(
            "closed forms hold for one antenna, got {}",
            p.antennas
        )));
    }
    if gamma == 0.0 {
        return Ok(1.0);
    }
    let alpha = p.alpha;
    match scheme {
        SchemeId::Ops => {
            let mut acc = 0.0;
            for (n, coef) in [(1.0, 3.0), (2.0, -3.0), (3.0, 1.0)] {
                let v = v_factor(n * gamma, alpha)?;
                acc += coef / ((1.0 + v) * (1.0 + v));
            }
            Ok(acc)
        }
        SchemeId::Rps => {
            let v = v_factor(gamma, alpha)?;
            Ok(1.0 / ((1.0 + gamma) * (1.0 + gamma) * (1.0 + v) * (1.0 + v)))
        }
        SchemeId::Jt => {
            let mm = moment_match(1);
            let omega = p.omega_override.unwrap_or(mm.omega);
            let m = mm.m as f64;
            let mu = p.mu;
            let nu = p.nu();
            let beta = 2.0 / alpha;
            let a_s = m * gamma / omega;
            let w = mu * m * gamma / omega;
            let f1 = hyp_2f1(1.0, 1.0 - beta, 2.0 - beta, -w)?;
            let f2 = hyp_2f1(2.0, 2.0 - beta, 3.0 - beta, -w)?;
            let f3 = hyp_2f1(3.0, 3.0 - beta, 4.0 - beta, -w)?;
            let v1 = 2.0 * mu * m * gamma / ((alpha - 2.0) * omega) * f1;
            let v2 = 2.0 * mu / (2.0 - alpha) * f1 + mu * mu * m * gamma / (omega * (alpha - 1.0)) * f2;
            let v3 = 2.0 * mu * mu / (alpha - 1.0) * f2
                - 4.0 * mu.powi(3) * m * gamma / (omega * (3.0 * alpha - 2.0)) * f3;
            let d = 1.0 + nu * v1;
            Ok(d.powi(-2) - 2.0 * a_s * v2 * nu * d.powi(-3)
                + a_s * a_s / 2.0 * (6.0 * nu * nu * v2 * v2 * d.powi(-4) + 2.0 * nu * v3 * d.powi(-3)))
        }
        other => Err(Error::Domain(format!("no closed form for scheme {other}"))),
    }
}

/// Upper bound on the uniform-selection coverage from the exponential
/// squeeze of the Gamma(M,1) tail with rate (M!)^(-1/M); exact at M = 1.
pub fn coverage_alzer_bound(gamma: f64, p: &ModelParams) -> Result<f64> {
    p.validate()?;
    if gamma == 0.0 {
        return Ok(1.0);
    }
    let m = p.antennas;
    let beta_rate = (lgamma(m as f64 + 1.0) / -(m as f64)).exp();
    let mut acc = 0.0;
    let mut sign = 1.0;
    for k in 1..=m {
        let ln_binom = lgamma(m as f64 + 1.0) - lgamma(k as f64 + 1.0) - lgamma((m - k) as f64 + 1.0);
        let x = k as f64 * beta_rate * gamma;
        let v = v_factor(x, p.alpha)?;
        acc += sign * ln_binom.exp() / ((1.0 + x) * (1.0 + x) * (1.0 + v) * (1.0 + v));
        sign = -sign;
    }
    Ok(acc)
}
