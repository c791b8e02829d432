//! The published reference design used by the examples, the acceptance
//! suite and `configs/reference.toml`.
//!
//! A 4 µA SQUID biased to L0 = 100 pH, shunted by 7.036 pF (bare resonance
//! near 6 GHz), pumped at 12 GHz and matched to 50 Ω through a Ruthroff
//! transformer with Z_oo = 10 Ω. The series resonator between transformer and
//! SQUID carries the reactance slope; at zero slope the gain is Lorentzian,
//! around 1.6 nH it flattens and above about 2 nH it splits in two.

use std::f64::consts::TAU;

use crate::gain::AmplifierConfig;
use crate::network::{CoupledLineSpec, Element, EnvironmentChain};
use crate::pumpistor::{bias_for_inductance, OperatingPoint, SquidSpec};
use crate::quantities::{to_angular, Frequency};

pub const CRITICAL_CURRENT: f64 = 4e-6;
pub const BIASED_INDUCTANCE: f64 = 100e-12;
pub const SHUNT_CAPACITANCE: f64 = 7.036e-12;
pub const PUMP_FREQUENCY_HZ: f64 = 12e9;
pub const PHI_AC: f64 = 0.255;
pub const SOURCE_IMPEDANCE: f64 = 50.0;
pub const Z_ODD: f64 = 10.0;
pub const Z_EVEN: f64 = 7140.0;
pub const LINE_LENGTH: f64 = 0.5e-3;
pub const PHASE_VELOCITY: f64 = 1.2e8;
/// Reactance slope giving the flat profile, H.
pub const FLAT_SLOPE: f64 = 1.6e-9;
pub const TARGET_GAIN_DB: f64 = 20.0;
pub const RIPPLE_BAND_HZ: (f64, f64) = (5.85e9, 6.15e9);
pub const GRID_HZ: (f64, f64) = (4e9, 8e9);
pub const GRID_POINTS: usize = 801;

pub fn reference_squid() -> SquidSpec<f64> {
    SquidSpec::new(CRITICAL_CURRENT).expect("reference critical current is valid")
}

pub fn reference_phi_dc() -> f64 {
    bias_for_inductance(&reference_squid(), BIASED_INDUCTANCE).expect("reference L0 is reachable")
}

pub fn reference_transformer() -> CoupledLineSpec<f64> {
    CoupledLineSpec::new(SOURCE_IMPEDANCE, Z_ODD, Z_EVEN, LINE_LENGTH, PHASE_VELOCITY)
        .expect("reference transformer is valid")
}

/// Reference design with the given reactance slope (H).
pub fn reference_config_with_slope(slope: f64) -> AmplifierConfig<f64> {
    let pump = TAU * PUMP_FREQUENCY_HZ;
    AmplifierConfig {
        squid: reference_squid(),
        operating_point: OperatingPoint::new(reference_phi_dc(), PHI_AC, pump)
            .expect("reference operating point is valid"),
        environment: EnvironmentChain::new(SOURCE_IMPEDANCE)
            .with_element(Element::Ruthroff(reference_transformer()))
            .with_element(Element::SeriesResonator {
                slope,
                center: pump / 2.0,
            })
            .with_shunt_capacitance(SHUNT_CAPACITANCE),
    }
}

/// Reference design at zero reactance slope (Lorentzian gain).
pub fn reference_config() -> AmplifierConfig<f64> {
    reference_config_with_slope(0.0)
}

/// Reference design at the flat-gain slope.
pub fn reference_flat_config() -> AmplifierConfig<f64> {
    reference_config_with_slope(FLAT_SLOPE)
}

/// Uniform grid over 4–8 GHz with 801 points (5 MHz spacing).
pub fn reference_grid() -> Vec<Frequency<f64>> {
    uniform_grid(GRID_HZ.0, GRID_HZ.1, GRID_POINTS)
}

pub fn reference_band() -> (Frequency<f64>, Frequency<f64>) {
    (
        to_angular(RIPPLE_BAND_HZ.0).expect("positive"),
        to_angular(RIPPLE_BAND_HZ.1).expect("positive"),
    )
}

/// Uniform grid of `n ≥ 1` cyclic frequencies from `f_lo` to `f_hi`, Hz.
pub fn uniform_grid(f_lo: f64, f_hi: f64, n: usize) -> Vec<Frequency<f64>> {
    if n == 1 {
        return vec![to_angular(f_lo).expect("positive frequency")];
    }
    (0..n)
        .map(|k| {
            let f = f_lo + (f_hi - f_lo) * k as f64 / (n - 1) as f64;
            to_angular(f).expect("positive frequency")
        })
        .collect()
}

/// Transformer-free design with a constant real 12.5 Ω environment (the
/// transformer's low-frequency output), used for the Lorentzian regime.
pub fn lorentzian_config(phi_ac: f64) -> AmplifierConfig<f64> {
    AmplifierConfig {
        squid: reference_squid(),
        operating_point: OperatingPoint::new(reference_phi_dc(), phi_ac, TAU * PUMP_FREQUENCY_HZ)
            .expect("valid operating point"),
        environment: EnvironmentChain::new(SOURCE_IMPEDANCE / 4.0).with_shunt_capacitance(SHUNT_CAPACITANCE),
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::gain::{gain_metrics, gain_sweep, ProfileClass};

    #[test]
    fn reference_bias_gives_100_ph() {
        let l0 = reference_squid().biased_inductance(reference_phi_dc()).unwrap();
        assert!((l0 - 100e-12).abs() < 1e-24);
    }

    #[test]
    fn reference_configs_validate() {
        reference_config().validate().unwrap();
        reference_flat_config().validate().unwrap();
        lorentzian_config(0.25).validate().unwrap();
        assert_eq!(reference_grid().len(), 801);
    }

    #[test]
    fn flat_reference_meets_targets() {
        let curve = gain_sweep(&reference_flat_config(), &reference_grid()).unwrap();
        let m = gain_metrics(&curve, TARGET_GAIN_DB - 1.0, reference_band()).unwrap();
        assert!(m.peak_gain_db >= TARGET_GAIN_DB, "{m:?}");
        assert!(m.ripple_db <= 1.0, "{m:?}");
        assert_eq!(m.profile_class, Some(ProfileClass::Flattened));
    }
}
