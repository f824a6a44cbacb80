use std::fmt;
use std::str::FromStr;

use crate::error::{Error, Result};

/// Transmission scheme selector.
///
/// `Jt`, `Ops`, `Rps` are the three triangle-cooperation schemes (coherent
/// joint transmission, best-of-three point selection, random point
/// selection). `PvNoComp` and `PvDyn3` are the nearest-cell baselines:
/// serve from the single nearest BS, or coherent joint transmission from the
/// three nearest BSs found by exhaustive search.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum SchemeId {
    Jt,
    Ops,
    Rps,
    PvNoComp,
    PvDyn3,
}

impl SchemeId {
    pub fn is_baseline(self) -> bool {
        matches!(self, SchemeId::PvNoComp | SchemeId::PvDyn3)
    }
}

impl fmt::Display for SchemeId {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let s = match self {
            SchemeId::Jt => "JT",
            SchemeId::Ops => "OPS",
            SchemeId::Rps => "RPS",
            SchemeId::PvNoComp => "PV_NoCoMP",
            SchemeId::PvDyn3 => "PV_Dyn3",
        };
        f.write_str(s)
    }
}

impl FromStr for SchemeId {
    type Err = Error;
    fn from_str(s: &str) -> Result<Self> {
        match s {
            "JT" | "jt" => Ok(SchemeId::Jt),
            "OPS" | "ops" => Ok(SchemeId::Ops),
            "RPS" | "rps" => Ok(SchemeId::Rps),
            "PV_NoCoMP" | "pv_nocomp" => Ok(SchemeId::PvNoComp),
            "PV_Dyn3" | "pv_dyn3" => Ok(SchemeId::PvDyn3),
            _ => Err(Error::Config(format!("unknown scheme '{s}'"))),
        }
    }
}

/// How interference from the non-serving base stations is evaluated.
///
/// - `Exact18`: interferers are partitioned into disjoint triangle groups;
///   within a group the per-BS complex coefficients add coherently at their
///   true distances, and group powers add.
/// - `Grouped19`: each group is collapsed to a single co-located source at
///   the group's representative distance (UE to group centroid), radiating
///   the coherent sum of the three per-BS coefficients.
/// - `PerBs`: every interferer contributes an independent unit-mean
///   exponential gain at its own distance (no grouping).
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum InterferenceMode {
    Exact18,
    Grouped19,
    PerBs,
}

impl fmt::Display for InterferenceMode {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let s = match self {
            InterferenceMode::Exact18 => "Exact18",
            InterferenceMode::Grouped19 => "Grouped19",
            InterferenceMode::PerBs => "PerBS",
        };
        f.write_str(s)
    }
}

impl FromStr for InterferenceMode {
    type Err = Error;
    fn from_str(s: &str) -> Result<Self> {
        match s {
            "Exact18" | "exact18" => Ok(InterferenceMode::Exact18),
            "Grouped19" | "grouped19" => Ok(InterferenceMode::Grouped19),
            "PerBS" | "PerBs" | "perbs" => Ok(InterferenceMode::PerBs),
            _ => Err(Error::Config(format!("unknown interference mode '{s}'"))),
        }
    }
}

/// UE placement class relative to its three cooperating BSs.
///
/// TypeI: equidistant from all three (a vertex of the nearest-cell diagram).
/// TypeII: equidistant from exactly two. TypeIII: all three distances
/// distinct (generic interior position).
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum UeType {
    TypeI,
    TypeII,
    TypeIII,
}

impl fmt::Display for UeType {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let s = match self {
            UeType::TypeI => "TypeI",
            UeType::TypeII => "TypeII",
            UeType::TypeIII => "TypeIII",
        };
        f.write_str(s)
    }
}

impl FromStr for UeType {
    type Err = Error;
    fn from_str(s: &str) -> Result<Self> {
        match s {
            "TypeI" | "typei" | "I" => Ok(UeType::TypeI),
            "TypeII" | "typeii" | "II" => Ok(UeType::TypeII),
            "TypeIII" | "typeiii" | "III" => Ok(UeType::TypeIII),
            _ => Err(Error::Config(format!("unknown UE type '{s}'"))),
        }
    }
}

/// Every symbol the analytic formulas consume.
///
/// Transmit power is normalized to 1. `mu` is the mean of the aggregated
/// per-group interferer gain and `lambda_prime` the thinned interferer-group
/// intensity; they encode the grouping approximation, not fundamental
/// constants, so both are overridable. `omega_override` replaces the
/// moment-matched second moment of the coherent amplitude sum where it enters
/// the coverage formulas (used by sensitivity checks).
#[derive(Debug, Clone, PartialEq)]
pub struct ModelParams {
    /// BS intensity per square meter.
    pub lambda: f64,
    /// Path-loss exponent; must exceed 2 or interference integrals diverge.
    pub alpha: f64,
    /// Antennas per BS.
    pub antennas: u32,
    /// Mean of the aggregated interferer-group gain (default 3).
    pub mu: f64,
    /// Thinned interferer-group intensity (default lambda/3).
    pub lambda_prime: f64,
    pub omega_override: Option<f64>,
}

impl ModelParams {
    pub fn new(lambda: f64, alpha: f64, antennas: u32) -> Result<Self> {
        let p = ModelParams {
            lambda,
            alpha,
            antennas,
            mu: 3.0,
            lambda_prime: lambda / 3.0,
            omega_override: None,
        };
        p.validate()?;
        Ok(p)
    }

    /// Paper-scale defaults: lambda = 0.02 per m^2, alpha = 4, single antenna.
    pub fn default_network() -> Self {
        ModelParams::new(0.02, 4.0, 1).expect("defaults are valid")
    }

    pub fn validate(&self) -> Result<()> {
        if !self.lambda.is_finite() || self.lambda <= 0.0 {
            return Err(Error::Config("lambda must be positive".into()));
        }
        if !self.alpha.is_finite() || self.alpha <= 2.0 {
            return Err(Error::Config(
                "path-loss exponent must exceed 2".into(),
            ));
        }
        if self.antennas < 1 {
            return Err(Error::Config("antennas must be >= 1".into()));
        }
        if !self.mu.is_finite() || self.mu <= 0.0 {
            return Err(Error::Config("mu must be positive".into()));
        }
        if !self.lambda_prime.is_finite()
            || self.lambda_prime <= 0.0
            || self.lambda_prime > self.lambda
        {
            return Err(Error::Config(
                "lambda_prime must lie in (0, lambda]".into(),
            ));
        }
        if let Some(om) = self.omega_override {
            if !om.is_finite() || om <= 0.0 {
                return Err(Error::Config("omega override must be positive".into()));
            }
        }
        Ok(())
    }

    /// Intensity ratio lambda_prime / lambda; the coverage integrands depend
    /// on the thinned field only through this ratio, which is what makes the
    /// single-antenna curves intensity-free. The default grouping thins by
    /// exactly one third, so that case returns the exact ratio rather than
    /// a twice-rounded quotient; otherwise intensity pairs that should give
    /// identical curves would differ in the last bit.
    pub fn nu(&self) -> f64 {
        if self.lambda_prime == self.lambda / 3.0 {
            1.0 / 3.0
        } else {
            self.lambda_prime / self.lambda
        }
    }

    pub fn with_antennas(&self, antennas: u32) -> Self {
        ModelParams {
            antennas,
            ..self.clone()
        }
    }
}

/// Gamma moment match for the squared coherent amplitude sum U = T^2:
/// `omega` = E[T^2], `m_raw` = omega^2 / (E[T^4] - omega^2), `m` rounded.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct MomentMatch {
    pub omega: f64,
    pub m_raw: f64,
    pub m: u32,
}
