//! Mean spectral efficiency E[ln(1 + SIR)] in nats per channel use.
//!
//! The exact path integrates the coverage curve over thresholds e^t - 1.
//! The fast path applies the Laplace-ratio identity for E[ln(1 + X/Y)] with
//! a moment-matched numerator, which collapses everything into a single
//! integral over the transform variable.

use crate::analytic::coverage::coverage_value;
use crate::analytic::distributions::mean_max_of_three;
use crate::analytic::moments::moment_match;
use crate::error::{Error, Result};
use crate::params::{ModelParams, SchemeId};
use crate::quad::{integrate_adaptive, integrate_to_inf};
use crate::specfun::gamma_family;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum SeMethod {
    Exact,
    Approx,
}

/// Thresholds above e^T_MAX - 1 contribute below 1e-15 nats for alpha > 2.5.
const T_MAX: f64 = 40.0;

/// W(s) = e^{-s} + s^beta gamma_lower(1 - beta, s): the Laplace factor of a
/// unit-distance interference field normalized to unit intensity ratio.
pub fn hamdi_w(s: f64, alpha: f64) -> Result<f64> {
    if !(alpha > 2.0) {
        return Err(Error::Config("path-loss exponent must exceed 2".into()));
    }
    if s < 0.0 {
        return Err(Error::Domain(format!("transform variable must be >= 0, got {s}")));
    }
    if s == 0.0 {
        return Ok(1.0);
    }
    let beta = 2.0 / alpha;
    Ok((-s).exp() + s.powf(beta) * gamma_family(1.0 - beta, s)?.lower)
}

fn approx_se(scheme: SchemeId, p: &ModelParams) -> Result<f64> {
    let alpha = p.alpha;
    let mm = moment_match(p.antennas);
    let omega = p.omega_override.unwrap_or(mm.omega);
    let integrand: Box<dyn Fn(f64) -> f64> = match scheme {
        SchemeId::Jt => {
            let nu = p.nu();
            let rate = omega / p.mu;
            Box::new(move |s: f64| {
                let w = match hamdi_w(s, alpha) {
                    Ok(v) => v,
                    Err(_) => return f64::NAN,
                };
                let shade = 1.0 + nu * (w - 1.0);
                -(-s * rate).exp_m1() / (s * shade * shade)
            })
        }
        SchemeId::Ops => {
            let n_sel = mean_max_of_three(p.antennas)?;
            Box::new(move |s: f64| {
                let w = match hamdi_w(s, alpha) {
                    Ok(v) => v,
                    Err(_) => return f64::NAN,
                };
                -(-s * n_sel).exp_m1() / (s * w * w)
            })
        }
        SchemeId::Rps => {
            let mean_gain = p.antennas as f64;
            Box::new(move |s: f64| {
                let w = match hamdi_w(s, alpha) {
                    Ok(v) => v,
                    Err(_) => return f64::NAN,
                };
                -(-s * mean_gain).exp_m1() * (-2.0 * s).exp() / (s * w * w)
            })
        }
        other => {
            return Err(Error::Domain(format!(
                "no analytic spectral efficiency for baseline scheme {other}"
            )))
        }
    };
    let r = integrate_to_inf(&integrand, 0.0, 1.0, 1e-9)?;
    if !r.value.is_finite() {
        return Err(Error::Numerical("rate transform integral failed".into()));
    }
    Ok(r.value)
}

fn exact_se(scheme: SchemeId, p: &ModelParams) -> Result<f64> {
    let f = |t: f64| coverage_value(scheme, t.exp_m1(), p).unwrap_or(f64::NAN);
    let v = integrate_adaptive(&f, 0.0, T_MAX, 1e-8)?;
    if !v.is_finite() {
        return Err(Error::Numerical("rate threshold integral failed".into()));
    }
    Ok(v)
}

/// Spectral efficiency in nats per channel use.
pub fn spectral_efficiency(scheme: SchemeId, method: SeMethod, p: &ModelParams) -> Result<f64> {
    p.validate()?;
    if scheme.is_baseline() {
        return Err(Error::Domain(format!(
            "no analytic spectral efficiency for baseline scheme {scheme}"
        )));
    }
    match method {
        SeMethod::Exact => exact_se(scheme, p),
        SeMethod::Approx => approx_se(scheme, p),
    }
}
