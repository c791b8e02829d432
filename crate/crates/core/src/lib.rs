//! Frequency-domain model and design optimizer for impedance-matched
//! Josephson parametric amplifiers.
//!
//! The physics layers ([`network`], [`pumpistor`], [`gain`], [`noise`]) are
//! generic over the scalar type; the aliases below fix it to `f64`, which is
//! what the optimizer and the command-line tool use.

// Negated comparisons are NaN guards.
#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod error;
pub mod gain;
pub mod network;
pub mod noise;
pub mod optimizer;
pub mod pumpistor;
pub mod quantities;
pub mod reference;
pub mod scalar;
pub mod simplex;

pub use error::{Error, Result};
pub use gain::{
    classify_profile, fit_lorentzian, gain_bandwidth_product, gain_metrics, gain_sweep, reflection_gain,
    GainMetrics, LorentzianFit, ProfileClass,
};
pub use network::{environment_admittance, reactance_slope, ruthroff_impedance, transformation_ratio};
pub use noise::{added_photons, fit_noise, noise_forward, planck_occupancy_temperature, sql_temperature};
pub use optimizer::{optimize, sweep, Bound, Evaluation, Objective, OptimizeOutcome, Param, ParameterSpace};
pub use pumpistor::{pumpistor_admittance, pumpistor_elements};
pub use quantities::{to_angular, ImmittanceKind, PhysicalConstants};
pub use scalar::Scalar;

pub type Frequency = quantities::Frequency<f64>;
pub type Immittance = quantities::ComplexImmittance<f64>;
pub type Abcd = network::AbcdMatrix<f64>;
pub type CoupledLineSpec = network::CoupledLineSpec<f64>;
pub type Element = network::Element<f64>;
pub type EnvironmentChain = network::EnvironmentChain<f64>;
pub type SquidSpec = pumpistor::SquidSpec<f64>;
pub type OperatingPoint = pumpistor::OperatingPoint<f64>;
pub type PumpistorElements = pumpistor::PumpistorElements<f64>;
pub type AmplifierConfig = gain::AmplifierConfig<f64>;
pub type GainCurve = gain::GainCurve<f64>;
pub type GainPoint = gain::GainPoint<f64>;
pub type NoiseDataset = noise::NoiseDataset<f64>;
pub type NoiseSample = noise::NoiseSample<f64>;
pub type NoiseFitResult = noise::NoiseFitResult<f64>;
