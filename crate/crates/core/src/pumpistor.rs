//! Small-signal (pumpistor) model of a flux-pumped SQUID.
//!
//! A SQUID biased at Φ_dc and flux-modulated with amplitude Φ_ac at ω_p looks,
//! at the signal frequency ω_s, like a static admittance
//! `Y_A = 1/(jω_sL0) + 1/(jω_sL1 + X)` whose `X` depends on the external
//! admittance at the idler `ω_i = ω_p − ω_s`. With a passive idler load,
//! `Re(X) < 0`: the pumped branch is a negative resistance.
//!
//! Fluxes are carried as fractions of Φ₀ since the model only depends on
//! those ratios.

use num_complex::Complex;

use crate::error::{Error, Result};
use crate::quantities::{reciprocal, ComplexImmittance, FLUX_QUANTUM};
use crate::scalar::Scalar;

/// Josephson inductance of the SQUID at zero bias, L_J = Φ₀/(2π I_c).
pub fn squid_inductance<T: Scalar>(critical_current: T) -> Result<T> {
    if !(critical_current > T::zero()) || !critical_current.is_finite() {
        return Err(Error::Domain(format!(
            "critical current must be positive, got {critical_current} A"
        )));
    }
    Ok(T::lit(FLUX_QUANTUM) / (T::TAU() * critical_current))
}

/// SQUID described by its critical current.
///
/// The resonator capacitor lives in the environment chain (it is part of the
/// admittance the SQUID sees), not here.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SquidSpec<T> {
    pub critical_current: T,
    zero_bias_inductance: T,
}

impl<T: Scalar> SquidSpec<T> {
    pub fn new(critical_current: T) -> Result<Self> {
        Ok(Self {
            critical_current,
            zero_bias_inductance: squid_inductance(critical_current)?,
        })
    }

    /// L_J in H.
    #[inline]
    pub fn inductance(&self) -> T {
        self.zero_bias_inductance
    }

    /// Bias-dependent inductance L0 = L_J / cos(πΦ_dc/Φ₀).
    pub fn biased_inductance(&self, phi_dc: T) -> Result<T> {
        let cos = bias_cos(phi_dc)?;
        Ok(self.zero_bias_inductance / cos)
    }
}

/// Flux bias (as Φ/Φ₀), modulation amplitude (as Φ/Φ₀) and pump frequency.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct OperatingPoint<T> {
    /// Φ_dc/Φ₀, in [0, 0.5).
    pub phi_dc: T,
    /// Φ_ac/Φ₀, > 0.
    pub phi_ac: T,
    /// ω_p in rad/s.
    pub pump_omega: T,
}

impl<T: Scalar> OperatingPoint<T> {
    pub fn new(phi_dc: T, phi_ac: T, pump_omega: T) -> Result<Self> {
        let op = Self {
            phi_dc,
            phi_ac,
            pump_omega,
        };
        op.validate()?;
        Ok(op)
    }

    /// Builds the operating point from fluxes in Wb.
    pub fn from_webers(flux_dc: T, flux_ac: T, pump_omega: T) -> Result<Self> {
        let phi0 = T::lit(FLUX_QUANTUM);
        Self::new(flux_dc / phi0, flux_ac / phi0, pump_omega)
    }

    pub fn validate(&self) -> Result<()> {
        bias_cos(self.phi_dc)?;
        if !(self.phi_ac > T::zero()) || !self.phi_ac.is_finite() {
            return Err(Error::Domain(format!(
                "Φ_ac/Φ₀ must be positive, got {}",
                self.phi_ac
            )));
        }
        if !(self.pump_omega > T::zero()) || !self.pump_omega.is_finite() {
            return Err(Error::Domain(format!(
                "pump frequency must be positive, got {} rad/s",
                self.pump_omega
            )));
        }
        Ok(())
    }

    /// ω_i = ω_p − ω_s, required to be positive.
    pub fn idler(&self, signal_omega: T) -> Result<T> {
        let wi = self.pump_omega - signal_omega;
        if wi > T::zero() {
            Ok(wi)
        } else {
            Err(Error::Domain(format!(
                "idler frequency ω_p − ω_s = {wi} rad/s is not positive"
            )))
        }
    }
}

/// cos(πΦ_dc/Φ₀), rejecting biases outside [0, 1/2).
fn bias_cos<T: Scalar>(phi_dc: T) -> Result<T> {
    let half = T::lit(0.5);
    if !phi_dc.is_finite() || phi_dc < T::zero() || phi_dc > half {
        return Err(Error::Domain(format!(
            "Φ_dc/Φ₀ must lie in [0, 0.5), got {phi_dc}"
        )));
    }
    let cos = (T::PI() * phi_dc).cos();
    if phi_dc == half || cos <= T::lit(1e-12) {
        return Err(Error::Divergence {
            phi_dc: phi_dc.as_f64(),
        });
    }
    Ok(cos)
}

/// L0, L1 and X of the pumpistor at one signal frequency.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct PumpistorElements<T> {
    /// H
    pub l0: T,
    /// H
    pub l1: T,
    /// Ω
    pub x: Complex<T>,
}

/// Pumpistor elements:
///
/// ```text
/// L0 = L_J / cos(πΦ_dc/Φ₀)
/// L1 = −4 L_J cos(πΦ_dc/Φ₀) / (π² sin²(πΦ_dc/Φ₀)) · (Φ₀/Φ_ac)²
/// X  = −4 ω_s ω_i L_J² Y*_ext(ω_i) / (π² sin²(πΦ_dc/Φ₀)) · (Φ₀/Φ_ac)²
/// ```
///
/// `y_ext_idler` is the full environment admittance at ω_i (an impedance is
/// inverted first).
pub fn pumpistor_elements<T: Scalar>(
    squid: &SquidSpec<T>,
    op: &OperatingPoint<T>,
    signal_omega: T,
    y_ext_idler: ComplexImmittance<T>,
) -> Result<PumpistorElements<T>> {
    op.validate()?;
    if !(signal_omega > T::zero()) {
        return Err(Error::Domain(format!(
            "signal frequency must be positive, got {signal_omega} rad/s"
        )));
    }
    let idler = op.idler(signal_omega)?;
    let cos = bias_cos(op.phi_dc)?;
    let sin = (T::PI() * op.phi_dc).sin();
    if op.phi_dc == T::zero() || sin == T::zero() {
        return Err(Error::DegenerateBias);
    }
    let y_idler = y_ext_idler.to_admittance()?.value;
    let lj = squid.inductance();
    let pi2 = T::PI() * T::PI();
    // 4/(π² sin²) · (Φ₀/Φ_ac)²
    let coupling = T::lit(4.0) / (pi2 * sin * sin) / (op.phi_ac * op.phi_ac);
    Ok(PumpistorElements {
        l0: lj / cos,
        l1: -coupling * lj * cos,
        x: y_idler.conj() * (-coupling * signal_omega * idler * lj * lj),
    })
}

/// Y_A(ω_s) = 1/(jω_sL0) + 1/(jω_sL1 + X).
pub fn pumpistor_admittance<T: Scalar>(
    elems: &PumpistorElements<T>,
    signal_omega: T,
) -> Result<ComplexImmittance<T>> {
    let j = Complex::new(T::zero(), T::one());
    let bare = j * (signal_omega * elems.l0);
    let pumped = j * (signal_omega * elems.l1) + elems.x;
    let scale = (signal_omega * elems.l1).abs() + elems.x.norm();
    if pumped.norm() <= T::epsilon() * scale || pumped.norm() == T::zero() {
        return Err(Error::SingularOperatingPoint {
            omega: signal_omega.as_f64(),
        });
    }
    if bare.norm() == T::zero() {
        return Err(Error::Singular("zero bias inductance branch".into()));
    }
    Ok(ComplexImmittance::admittance(
        reciprocal(bare) + reciprocal(pumped),
    ))
}

/// Unpumped resonance of the biased SQUID with capacitance `capacitance`
/// against a real environment `z0`: ω₀ = 1/√(L0 C) and Q = ω₀ Z₀ C.
pub fn bare_resonance<T: Scalar>(
    squid: &SquidSpec<T>,
    phi_dc: T,
    z0: T,
    capacitance: T,
) -> Result<(T, T)> {
    if !(capacitance > T::zero()) {
        return Err(Error::Domain(format!(
            "resonator capacitance must be positive, got {capacitance} F"
        )));
    }
    if !(z0 > T::zero()) {
        return Err(Error::Domain(format!("Z0 must be positive, got {z0} Ω")));
    }
    let l0 = squid.biased_inductance(phi_dc)?;
    let omega0 = T::one() / (l0 * capacitance).sqrt();
    Ok((omega0, omega0 * z0 * capacitance))
}

/// Bias Φ_dc/Φ₀ at which the SQUID inductance equals `l0`.
pub fn bias_for_inductance<T: Scalar>(squid: &SquidSpec<T>, l0: T) -> Result<T> {
    let ratio = squid.inductance() / l0;
    if !(ratio > T::zero() && ratio <= T::one()) {
        return Err(Error::Domain(format!(
            "L0 = {l0} H is not reachable from L_J = {} H",
            squid.inductance()
        )));
    }
    Ok(ratio.acos() / T::PI())
}
