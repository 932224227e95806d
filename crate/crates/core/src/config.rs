//! Scenario description shared by every stage of the pipeline.

use std::f64::consts::PI;

use crate::error::{Error, Result};

/// Full description of one multi-surface MIMO scenario, in SI units.
///
/// Positions are planar coordinates in meters; the transmitter and receiver
/// sit at height zero and every surface is mounted at `irs_height`.
#[derive(Debug, Clone, PartialEq)]
pub struct SystemConfig {
    pub n_tx: usize,
    pub n_rx: usize,
    /// Carrier wavelength, meters.
    pub wavelength: f64,
    pub tx_spacing: f64,
    pub rx_spacing: f64,
    pub irs_spacing: f64,
    pub tx_pos: [f64; 2],
    pub rx_pos: [f64; 2],
    pub irs_height: f64,
    /// Receiver noise power, watts.
    pub noise_power: f64,
    /// Transmit power budget, watts.
    pub power_budget: f64,
    /// Total number of reflecting elements shared by all surfaces.
    pub element_budget: usize,
    pub num_surfaces: usize,
    /// Power gain at the 1 m reference distance.
    pub pathloss_ref_gain: f64,
}

impl Default for SystemConfig {
    /// The reference deployment: 8x4 MIMO at 2 GHz over an 85 m link,
    /// 30 dBm transmit power, -80 dBm noise and 2400 elements.
    fn default() -> Self {
        let wavelength = 0.15;
        SystemConfig {
            n_tx: 8,
            n_rx: 4,
            wavelength,
            tx_spacing: wavelength / 2.0,
            rx_spacing: wavelength / 2.0,
            irs_spacing: wavelength / 2.0,
            tx_pos: [0.0, 0.0],
            rx_pos: [85.0, 0.0],
            irs_height: 5.0,
            noise_power: dbm_to_watts(-80.0),
            power_budget: dbm_to_watts(30.0),
            element_budget: 2400,
            num_surfaces: 4,
            pathloss_ref_gain: free_space_ref_gain(wavelength),
        }
    }
}

impl SystemConfig {
    pub fn validate(&self) -> Result<()> {
        let positive = [
            ("wavelength", self.wavelength),
            ("tx_spacing", self.tx_spacing),
            ("rx_spacing", self.rx_spacing),
            ("irs_spacing", self.irs_spacing),
            ("irs_height", self.irs_height),
            ("noise_power", self.noise_power),
            ("power_budget", self.power_budget),
            ("pathloss_ref_gain", self.pathloss_ref_gain),
        ];
        for (name, value) in positive {
            if !(value.is_finite() && value > 0.0) {
                return Err(Error::domain(format!(
                    "{name} must be positive, got {value}"
                )));
            }
        }
        if self.n_tx == 0 || self.n_rx == 0 {
            return Err(Error::domain("antenna counts must be positive"));
        }
        if self.num_surfaces == 0 {
            return Err(Error::domain("at least one surface is required"));
        }
        if self.num_surfaces > self.n_tx.min(self.n_rx) {
            return Err(Error::domain(format!(
                "{} surfaces exceed min(n_tx, n_rx) = {}",
                self.num_surfaces,
                self.n_tx.min(self.n_rx)
            )));
        }
        if self.tx_pos == self.rx_pos {
            return Err(Error::domain("transmitter and receiver must not coincide"));
        }
        Ok(())
    }

    pub fn with_surfaces(&self, k: usize) -> Self {
        SystemConfig {
            num_surfaces: k,
            ..self.clone()
        }
    }
}

/// Free-space reference gain `(lambda / 4 pi)^2`.
pub fn free_space_ref_gain(wavelength: f64) -> f64 {
    (wavelength / (4.0 * PI)).powi(2)
}

pub fn dbm_to_watts(dbm: f64) -> f64 {
    10f64.powf((dbm - 30.0) / 10.0)
}

pub fn watts_to_dbm(watts: f64) -> f64 {
    10.0 * watts.log10() + 30.0
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn defaults_are_valid() {
        let cfg = SystemConfig::default();
        cfg.validate().unwrap();
        assert!((cfg.noise_power - 1e-11).abs() < 1e-24);
        assert!((cfg.power_budget - 1.0).abs() < 1e-15);
    }

    #[test]
    fn rejects_too_many_surfaces() {
        let cfg = SystemConfig::default().with_surfaces(5);
        assert!(matches!(cfg.validate(), Err(Error::Domain(_))));
    }

    #[test]
    fn dbm_round_trip() {
        for dbm in [-80.0, 0.0, 30.0, 47.5] {
            assert!((watts_to_dbm(dbm_to_watts(dbm)) - dbm).abs() < 1e-12);
        }
    }
}
