//! Physical constants, frequency handling and complex immittances.
//!
//! Internally every frequency is angular (rad/s) and every quantity is SI.
//! Conversion from cyclic units happens only at the boundary via
//! [`to_angular`] and [`Frequency::hz`].

use num_complex::Complex;

use crate::error::{Error, Result};
use crate::scalar::Scalar;

/// Magnetic flux quantum Φ₀ in Wb (CODATA 2018).
pub const FLUX_QUANTUM: f64 = 2.067833848e-15;
/// Reduced Planck constant ħ in J·s (CODATA 2018).
pub const REDUCED_PLANCK: f64 = 1.054571817e-34;
/// Boltzmann constant k_B in J/K (CODATA 2018, exact).
pub const BOLTZMANN: f64 = 1.380649e-23;

/// The three constants the model depends on, as a value that can be handed
/// around or reported.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct PhysicalConstants {
    pub flux_quantum: f64,
    pub reduced_planck: f64,
    pub boltzmann: f64,
}

impl PhysicalConstants {
    pub const CODATA: Self = Self {
        flux_quantum: FLUX_QUANTUM,
        reduced_planck: REDUCED_PLANCK,
        boltzmann: BOLTZMANN,
    };

    /// ħ/k_B in K·s, the temperature scale per unit angular frequency.
    pub fn hbar_over_kb(&self) -> f64 {
        self.reduced_planck / self.boltzmann
    }
}

/// Angular frequency in rad/s.
#[derive(Debug, Clone, Copy, PartialEq, PartialOrd, Default)]
pub struct Frequency<T>(T);

impl<T: Scalar> Frequency<T> {
    /// Wraps an angular frequency. Returns a domain error unless it is
    /// strictly positive and finite.
    pub fn new(omega: T) -> Result<Self> {
        if omega > T::zero() && omega.is_finite() {
            Ok(Self(omega))
        } else {
            Err(Error::Domain(format!(
                "angular frequency must be positive and finite, got {omega}"
            )))
        }
    }

    /// Wraps a value without validation. Callers guarantee positivity.
    pub(crate) fn new_unchecked(omega: T) -> Self {
        Self(omega)
    }

    #[inline]
    pub fn omega(self) -> T {
        self.0
    }

    /// Cyclic frequency ω/2π in Hz.
    #[inline]
    pub fn hz(self) -> T {
        self.0 / T::TAU()
    }
}

/// Converts a cyclic frequency in Hz into angular frequency.
pub fn to_angular<T: Scalar>(f_hz: T) -> Result<Frequency<T>> {
    if !(f_hz > T::zero()) || !f_hz.is_finite() {
        return Err(Error::Domain(format!(
            "frequency must be positive and finite, got {f_hz} Hz"
        )));
    }
    Ok(Frequency(T::TAU() * f_hz))
}

/// Whether an immittance value is an impedance (Ω) or an admittance (S).
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum ImmittanceKind {
    Impedance,
    Admittance,
}

impl ImmittanceKind {
    pub fn flipped(self) -> Self {
        match self {
            ImmittanceKind::Impedance => ImmittanceKind::Admittance,
            ImmittanceKind::Admittance => ImmittanceKind::Impedance,
        }
    }
}

/// A complex impedance or admittance with its kind carried alongside.
///
/// No passivity check is applied: pumped (active) values legitimately have a
/// negative real part.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ComplexImmittance<T> {
    pub value: Complex<T>,
    pub kind: ImmittanceKind,
}

impl<T: Scalar> ComplexImmittance<T> {
    pub fn impedance(value: Complex<T>) -> Self {
        Self {
            value,
            kind: ImmittanceKind::Impedance,
        }
    }

    pub fn admittance(value: Complex<T>) -> Self {
        Self {
            value,
            kind: ImmittanceKind::Admittance,
        }
    }

    pub fn real_impedance(ohms: T) -> Self {
        Self::impedance(Complex::new(ohms, T::zero()))
    }

    pub fn real_admittance(siemens: T) -> Self {
        Self::admittance(Complex::new(siemens, T::zero()))
    }

    pub fn is_impedance(&self) -> bool {
        self.kind == ImmittanceKind::Impedance
    }

    /// Reciprocal value with the kind toggled.
    pub fn invert(self) -> Result<Self> {
        immittance_invert(self)
    }

    /// The value as an impedance, inverting if necessary.
    pub fn to_impedance(self) -> Result<Self> {
        match self.kind {
            ImmittanceKind::Impedance => Ok(self),
            ImmittanceKind::Admittance => self.invert(),
        }
    }

    /// The value as an admittance, inverting if necessary.
    pub fn to_admittance(self) -> Result<Self> {
        match self.kind {
            ImmittanceKind::Admittance => Ok(self),
            ImmittanceKind::Impedance => self.invert(),
        }
    }
}

/// Reciprocal of an immittance, switching impedance and admittance.
pub fn immittance_invert<T: Scalar>(x: ComplexImmittance<T>) -> Result<ComplexImmittance<T>> {
    let v = x.value;
    if !(v.re != T::zero() || v.im != T::zero()) || !v.re.is_finite() || !v.im.is_finite() {
        return Err(Error::Singular(format!(
            "cannot invert immittance {} + {}j",
            v.re, v.im
        )));
    }
    Ok(ComplexImmittance {
        value: reciprocal(v),
        kind: x.kind.flipped(),
    })
}

/// Complex reciprocal using Smith's scaling, which keeps intermediate values
/// in range and the rounding error at a couple of ulp.
pub(crate) fn reciprocal<T: Scalar>(z: Complex<T>) -> Complex<T> {
    if z.re.abs() >= z.im.abs() {
        let r = z.im / z.re;
        let d = z.re + z.im * r;
        Complex::new(T::one() / d, -r / d)
    } else {
        let r = z.re / z.im;
        let d = z.re * r + z.im;
        Complex::new(r / d, -T::one() / d)
    }
}
