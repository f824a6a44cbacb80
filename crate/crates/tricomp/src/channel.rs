//! Small-scale fading and per-drop power assembly.
//!
//! Stations carry M-antenna Rayleigh channels. With conjugate beamforming a
//! serving station contributes amplitude `‖h‖` coherently; a station beaming
//! at someone else collapses to a single CN(0,1) effective coefficient
//! regardless of M, so interferer gains are Exp(1) marks on the path loss.

use crate::error::{Error, Result};
use crate::params::SchemeId;
use rand::Rng;
use rand_distr::{Distribution, Exp1, StandardNormal};

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Cplx {
    pub re: f64,
    pub im: f64,
}

impl Cplx {
    #[inline]
    pub fn abs_sq(self) -> f64 {
        self.re * self.re + self.im * self.im
    }
}

/// One CN(0,1) draw.
pub fn draw_cn01<R: Rng + ?Sized>(rng: &mut R) -> Cplx {
    let re: f64 = StandardNormal.sample(rng);
    let im: f64 = StandardNormal.sample(rng);
    Cplx { re: re * std::f64::consts::FRAC_1_SQRT_2, im: im * std::f64::consts::FRAC_1_SQRT_2 }
}

/// M i.i.d. CN(0,1) antenna coefficients.
pub fn draw_channel<R: Rng + ?Sized>(rng: &mut R, m: u32) -> Vec<Cplx> {
    (0..m).map(|_| draw_cn01(rng)).collect()
}

/// Beamforming power gain ‖h‖², distributed Gamma(M, 1).
pub fn channel_gain(h: &[Cplx]) -> f64 {
    h.iter().map(|c| c.abs_sq()).sum()
}

/// Effective coefficient of a station precoding for another user, as seen
/// here: the inner product of independent unit-power vectors, again CN(0,1).
pub fn effective_interference_coefficient<R: Rng + ?Sized>(rng: &mut R) -> Cplx {
    draw_cn01(rng)
}

/// The same coefficient built from the explicit vector construction:
/// probe^H (beam / ‖beam‖). The distribution is CN(0,1) for every vector
/// length, which is what justifies the direct draw above.
pub fn effective_coefficient_from_vectors(probe: &[Cplx], beam: &[Cplx]) -> Result<Cplx> {
    if probe.len() != beam.len() || probe.is_empty() {
        return Err(Error::Domain(
            "channel vectors must have equal positive length".into(),
        ));
    }
    let norm = channel_gain(beam).sqrt();
    if !(norm > 0.0) {
        return Err(Error::Degenerate("zero beamforming vector".into()));
    }
    let mut re = 0.0;
    let mut im = 0.0;
    for (a, b) in probe.iter().zip(beam) {
        re += a.re * b.re + a.im * b.im;
        im += a.re * b.im - a.im * b.re;
    }
    Ok(Cplx {
        re: re / norm,
        im: im / norm,
    })
}

/// Per-station fade state for the three cooperating stations in one drop.
/// `amp[i]` = ‖h_i‖ and `gain[i]` = ‖h_i‖² from the same channel draw.
#[derive(Debug, Clone, Copy)]
pub struct FadeTriple {
    pub amp: [f64; 3],
    pub gain: [f64; 3],
}

impl FadeTriple {
    pub fn from_gains(gain: [f64; 3]) -> Self {
        Self { amp: gain.map(f64::sqrt), gain }
    }
}

pub fn draw_fade_triple<R: Rng + ?Sized>(rng: &mut R, m: u32) -> FadeTriple {
    let mut gain = [0.0; 3];
    for g in &mut gain {
        *g = channel_gain(&draw_channel(rng, m));
    }
    FadeTriple::from_gains(gain)
}

/// Received signal power for one drop.
///
/// JT adds the three stations coherently; OPS serves from the station with
/// the strongest instantaneous received power (returning its index) while
/// the other two stay silent; RPS serves from `serving` while the other two
/// keep transmitting elsewhere. Baseline schemes reuse these shapes: the
/// plain nearest-station link is RPS with a single station, and dynamic
/// three-station cooperation is the JT sum over its own set.
pub fn desired_power(
    scheme: SchemeId,
    dist: &[f64; 3],
    fade: &FadeTriple,
    alpha: f64,
    serving: usize,
) -> Result<(f64, usize)> {
    if dist.iter().any(|&d| !(d > 0.0)) {
        return Err(Error::Domain("link distances must be positive".into()));
    }
    match scheme {
        SchemeId::Jt | SchemeId::PvDyn3 => {
            let t: f64 = (0..3)
                .map(|i| dist[i].powf(-alpha / 2.0) * fade.amp[i])
                .sum();
            Ok((t * t, 0))
        }
        SchemeId::Ops => {
            let (best, _) = (0..3)
                .map(|i| (i, dist[i].powf(-alpha) * fade.gain[i]))
                .fold((0usize, f64::MIN), |acc, (i, p)| if p > acc.1 { (i, p) } else { acc });
            Ok((dist[best].powf(-alpha) * fade.gain[best], best))
        }
        SchemeId::Rps | SchemeId::PvNoComp => {
            if serving > 2 {
                return Err(Error::Domain(format!("serving index {serving} out of range")));
            }
            Ok((dist[serving].powf(-alpha) * fade.gain[serving], serving))
        }
    }
}

/// Interferer side of one drop, with groups either kept at their true
/// member distances or collapsed to triple weight at the group centroid.
#[derive(Debug, Clone, Default)]
pub struct InterferenceGeometry {
    pub group_member_dists: Vec<[f64; 3]>,
    pub group_centroid_dists: Vec<f64>,
    pub single_dists: Vec<f64>,
}

/// Coherent group seen through one effective coefficient: mark times the
/// summed path gain of its members.
#[inline]
pub fn group_power_exact(member_dists: &[f64; 3], alpha: f64, mark: f64) -> f64 {
    mark * member_dists.iter().map(|&d| d.powf(-alpha)).sum::<f64>()
}

/// Group collapsed to its centroid: triple weight at one distance.
#[inline]
pub fn group_power_collapsed(centroid_dist: f64, alpha: f64, mark: f64) -> f64 {
    mark * 3.0 * centroid_dist.powf(-alpha)
}

#[inline]
pub fn single_power(d: f64, alpha: f64, mark: f64) -> f64 {
    mark * d.powf(-alpha)
}

/// Grouping semantics for the interference sum.
pub use crate::params::InterferenceMode;

/// Total interference power for one drop. `extra_dists` lists stations of
/// the cooperating set that keep transmitting to other users (the two
/// non-serving stations under RPS); they always enter individually.
pub fn interference_power<R: Rng + ?Sized>(
    geom: &InterferenceGeometry,
    mode: InterferenceMode,
    alpha: f64,
    extra_dists: &[f64],
    rng: &mut R,
) -> f64 {
    let mut total = 0.0;
    match mode {
        InterferenceMode::Exact18 => {
            for md in &geom.group_member_dists {
                let mark = effective_interference_coefficient(rng).abs_sq();
                total += group_power_exact(md, alpha, mark);
            }
        }
        InterferenceMode::Grouped19 => {
            for &cd in &geom.group_centroid_dists {
                let mark = effective_interference_coefficient(rng).abs_sq();
                total += group_power_collapsed(cd, alpha, mark);
            }
        }
        InterferenceMode::PerBs => {
            for md in &geom.group_member_dists {
                for &d in md {
                    let e: f64 = Exp1.sample(rng);
                    total += single_power(d, alpha, e);
                }
            }
        }
    }
    for &d in &geom.single_dists {
        let e: f64 = Exp1.sample(rng);
        total += single_power(d, alpha, e);
    }
    for &d in extra_dists {
        let e: f64 = Exp1.sample(rng);
        total += single_power(d, alpha, e);
    }
    total
}

/// Instantaneous signal-to-interference ratio. An interference-free drop
/// yields +inf, which upstream tallies treat as covered at any threshold.
pub fn sir_sample(desired: f64, interference: f64) -> Result<f64> {
    if !desired.is_finite() || desired < 0.0 || interference.is_nan() || interference < 0.0 {
        return Err(Error::Numerical(format!(
            "invalid power pair: desired {desired}, interference {interference}"
        )));
    }
    if interference == 0.0 {
        return Ok(f64::INFINITY);
    }
    Ok(desired / interference)
}
