//! Rate comparison against the nearest-three dynamic selection model in
//! which cooperating and interfering stations are drawn from the plain
//! point process rather than from the triangulation structure.
//!
//! In that model every interfering station carries its own unit-mean mark
//! (kernel exponent 3 per grouped triple), while coherent service still
//! comes from three equidistant stations. Both rates fall out of the same
//! threshold integral, so the comparison is a like-for-like quadrature.

use crate::analytic::coverage::coverage_pv_kernel;
use crate::analytic::se::{spectral_efficiency, SeMethod};
use crate::error::{Error, Result};
use crate::params::{ModelParams, SchemeId};
use crate::quad::integrate_adaptive;

#[derive(Debug, Clone, Copy)]
pub struct PvSeComparison {
    /// Coherent rate with triangulation-grouped interference.
    pub se_delaunay: f64,
    /// Coherent rate with per-station interference marks.
    pub se_pv: f64,
    /// se_delaunay - se_pv.
    pub margin: f64,
}

pub fn pv_dyn3_se_comparison(p: &ModelParams) -> Result<PvSeComparison> {
    p.validate()?;
    let se_delaunay = spectral_efficiency(SchemeId::Jt, SeMethod::Exact, p)?;
    let f = |t: f64| coverage_pv_kernel(t.exp_m1(), p).unwrap_or(f64::NAN);
    let se_pv = integrate_adaptive(&f, 0.0, 40.0, 1e-8)?;
    if !se_pv.is_finite() {
        return Err(Error::Numerical("comparison rate integral failed".into()));
    }
    Ok(PvSeComparison {
        se_delaunay,
        se_pv,
        margin: se_delaunay - se_pv,
    })
}
