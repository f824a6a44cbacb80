//! Drop-based network simulation.
//!
//! A run draws fresh station realizations, hosts many user drops per
//! realization, and derives every random quantity from (master seed, tag,
//! index path), so results are reproducible and independent of the rayon
//! worker count.

pub mod rng;
pub mod runner;
pub mod stats;

pub use rng::{keyed_exp, keyed_station_gain, keyed_uniform, stream, StreamTag};
pub use runner::{
    coverage_points, effective_coefficient_gain_samples, empirical_pdf, estimate_coverage,
    estimate_se, paired_dyn3_se_diff, quantity_samples, run_baseline, se_from_sirs, simulate,
    sir_samples, typical_distance_samples, GammaPoint, PdfQuantity, SimResult,
};
pub use stats::{
    excess_kurtosis, histogram, ks_two_sample, ks_vs_cdf, mean_ci, quantile, Histogram, MeanCi,
    Z95,
};

use crate::error::{Error, Result};
use crate::geometry::Window;
use crate::params::{InterferenceMode, ModelParams, SchemeId, UeType};

pub fn db_to_linear(db: f64) -> f64 {
    10f64.powf(db / 10.0)
}

pub fn linear_to_db(x: f64) -> f64 {
    10.0 * x.log10()
}

/// Threshold grid of Fig-style sweeps: -10..20 dB in 31 points, linear SIR.
pub fn default_gamma_grid() -> Vec<f64> {
    (0..31).map(|i| db_to_linear(-10.0 + i as f64)).collect()
}

#[derive(Debug, Clone)]
pub struct SimConfig {
    pub params: ModelParams,
    pub window_side: f64,
    /// Guard margin keeping drops away from the window boundary.
    pub guard: f64,
    /// Interference accounting radius around the drop point.
    pub r_cut: f64,
    /// Total drops, split as evenly as possible across realizations.
    pub drops: u64,
    pub realizations: u32,
    pub scheme: SchemeId,
    pub interference_mode: InterferenceMode,
    pub ue_type: UeType,
    /// Linear SIR thresholds.
    pub gamma_grid: Vec<f64>,
    pub master_seed: u64,
}

impl SimConfig {
    /// Full-scale defaults: 1e4-side window, 100 realizations with 100
    /// drops each.
    pub fn new(params: ModelParams) -> Self {
        let root = params.lambda.sqrt();
        Self {
            params,
            window_side: 1e4,
            guard: 5.0 / root,
            r_cut: 24.0 / root,
            drops: 10_000,
            realizations: 100,
            scheme: SchemeId::Jt,
            interference_mode: InterferenceMode::Grouped19,
            ue_type: UeType::TypeI,
            gamma_grid: default_gamma_grid(),
            master_seed: 42,
        }
    }

    /// Small-window variant for interactive runs: same guard and cut
    /// radius, far fewer stations per realization.
    pub fn desk_scale(params: ModelParams) -> Self {
        Self {
            window_side: 700.0,
            drops: 20_000,
            realizations: 200,
            ..Self::new(params)
        }
    }

    pub fn drops_in_realization(&self, r: u32) -> u64 {
        let base = self.drops / self.realizations as u64;
        let extra = self.drops % self.realizations as u64;
        base + u64::from((r as u64) < extra)
    }

    pub fn validate(&self) -> Result<()> {
        self.params.validate()?;
        let w = Window::new(self.window_side)?;
        if !(self.guard >= 0.0) || 2.0 * self.guard >= w.side {
            return Err(Error::Config(format!(
                "guard {} leaves no interior in a window of side {}",
                self.guard, w.side
            )));
        }
        if !(self.r_cut > 0.0) {
            return Err(Error::Config("interference radius must be positive".into()));
        }
        if self.drops == 0 || self.realizations == 0 {
            return Err(Error::Config("drops and realizations must be positive".into()));
        }
        let expected = self.params.lambda * w.area();
        if expected < 30.0 {
            return Err(Error::Config(format!(
                "window holds only {expected:.1} stations on average; too small to triangulate reliably"
            )));
        }
        if self.gamma_grid.is_empty() {
            return Err(Error::Config("threshold grid is empty".into()));
        }
        if self.gamma_grid.iter().any(|g| !g.is_finite() || *g < 0.0) {
            return Err(Error::Config("thresholds must be finite and >= 0".into()));
        }
        Ok(())
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn default_config_validates() {
        let cfg = SimConfig::new(ModelParams::default_network());
        cfg.validate().unwrap();
        let desk = SimConfig::desk_scale(ModelParams::default_network());
        desk.validate().unwrap();
        assert_eq!(desk.window_side, 700.0);
    }

    #[test]
    fn drop_split_covers_total() {
        let mut cfg = SimConfig::desk_scale(ModelParams::default_network());
        cfg.drops = 103;
        cfg.realizations = 10;
        let total: u64 = (0..10).map(|r| cfg.drops_in_realization(r)).sum();
        assert_eq!(total, 103);
        assert_eq!(cfg.drops_in_realization(0), 11);
        assert_eq!(cfg.drops_in_realization(9), 10);
    }

    #[test]
    fn bad_configs_are_rejected() {
        let mut cfg = SimConfig::desk_scale(ModelParams::default_network());
        cfg.guard = 400.0;
        assert!(cfg.validate().is_err());
        let mut cfg = SimConfig::desk_scale(ModelParams::default_network());
        cfg.gamma_grid = vec![-1.0];
        assert!(cfg.validate().is_err());
        let mut cfg = SimConfig::desk_scale(ModelParams::new(1e-6, 4.0, 1).unwrap());
        cfg.window_side = 700.0;
        cfg.guard = 1.0;
        assert!(cfg.validate().is_err(), "too few stations should be rejected");
    }

    #[test]
    fn db_conversion_round_trips() {
        for db in [-10.0, 0.0, 7.5, 20.0] {
            assert!((linear_to_db(db_to_linear(db)) - db).abs() < 1e-12);
        }
        assert_eq!(default_gamma_grid().len(), 31);
    }
}
