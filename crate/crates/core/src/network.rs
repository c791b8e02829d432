//! Two-port cascade engine and the Ruthroff coupled-line transformer.
//!
//! The environment seen by the SQUID is described as an [`EnvironmentChain`]:
//! a real source impedance, an ordered list of lossless elements running from
//! the source toward the SQUID, and the resonator shunt capacitor sitting at
//! the SQUID plane. [`environment_admittance`] folds the chain into the
//! admittance `Y_ext(ω)` used by the pumpistor and gain models.
//!
//! The Ruthroff transformer is only available as a terminated one-port (its
//! closed-form input impedance assumes the high-impedance side is loaded by
//! `Z_o`), so in a chain it must sit directly at the source.

use num_complex::Complex;

use crate::error::{Error, Result};
use crate::quantities::{reciprocal, ComplexImmittance, Frequency};
use crate::scalar::Scalar;

/// Minimum Z_oe/Z_oo for the tightly-coupled approximation to hold.
pub const MIN_EVEN_ODD_RATIO: f64 = 50.0;

/// Relative threshold on the Ruthroff denominator, in units of `Z_o`.
pub const POLE_THRESHOLD: f64 = 1e-12;

/// Chain (ABCD) parameters of a two-port. `b` is in Ω, `c` in S.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct AbcdMatrix<T> {
    pub a: Complex<T>,
    pub b: Complex<T>,
    pub c: Complex<T>,
    pub d: Complex<T>,
}

impl<T: Scalar> AbcdMatrix<T> {
    pub fn new(a: Complex<T>, b: Complex<T>, c: Complex<T>, d: Complex<T>) -> Self {
        Self { a, b, c, d }
    }

    pub fn identity() -> Self {
        let one = Complex::new(T::one(), T::zero());
        let zero = Complex::new(T::zero(), T::zero());
        Self::new(one, zero, zero, one)
    }

    /// Series element with impedance `z`.
    pub fn series(z: Complex<T>) -> Self {
        let mut m = Self::identity();
        m.b = z;
        m
    }

    /// Shunt element with admittance `y`.
    pub fn shunt(y: Complex<T>) -> Self {
        let mut m = Self::identity();
        m.c = y;
        m
    }

    /// `ad − bc`; equal to one for reciprocal networks.
    pub fn determinant(&self) -> Complex<T> {
        self.a * self.d - self.b * self.c
    }

    /// Matrix product `self · rhs` (self closer to port 1).
    pub fn then(&self, rhs: &Self) -> Self {
        Self {
            a: self.a * rhs.a + self.b * rhs.c,
            b: self.a * rhs.b + self.b * rhs.d,
            c: self.c * rhs.a + self.d * rhs.c,
            d: self.c * rhs.b + self.d * rhs.d,
        }
    }

    /// Impedance seen at port 1 when port 2 is terminated in `z_load`.
    pub fn input_impedance(&self, z_load: Complex<T>) -> Result<Complex<T>> {
        let num = self.a * z_load + self.b;
        let den = self.c * z_load + self.d;
        let scale = num.norm() + den.norm();
        if den.norm() <= T::epsilon() * T::epsilon() * scale || !scale.is_finite() {
            return Err(Error::Singular(
                "two-port input impedance is unbounded (open circuit)".into(),
            ));
        }
        Ok(num * reciprocal(den))
    }
}

/// Left-to-right product of a list of two-ports; the empty product is the
/// identity.
pub fn cascade<T: Scalar>(ms: &[AbcdMatrix<T>]) -> AbcdMatrix<T> {
    ms.iter()
        .fold(AbcdMatrix::identity(), |acc, m| acc.then(m))
}

/// Electrical length θ = ωl/v of a line section, in rad.
#[inline]
pub fn electrical_angle<T: Scalar>(omega: T, velocity: T, length: T) -> T {
    omega * length / velocity
}

/// Lossless transmission line of characteristic impedance `z_c`, phase
/// velocity `velocity` and length `length` at angular frequency `omega`.
pub fn tline_abcd<T: Scalar>(
    z_c: T,
    velocity: T,
    length: T,
    omega: Frequency<T>,
) -> Result<AbcdMatrix<T>> {
    if !(z_c > T::zero()) || !(velocity > T::zero()) || !(length >= T::zero()) {
        return Err(Error::InvalidSpec(format!(
            "transmission line needs Z_c > 0, v > 0, l ≥ 0 (got {z_c}, {velocity}, {length})"
        )));
    }
    let theta = electrical_angle(omega.omega(), velocity, length);
    let (s, c) = theta.sin_cos();
    let j = Complex::new(T::zero(), T::one());
    let cos = Complex::new(c, T::zero());
    Ok(AbcdMatrix::new(cos, j * (z_c * s), j * (s / z_c), cos))
}

/// Ruthroff (4:1) coupled-line transformer parameters.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct CoupledLineSpec<T> {
    /// Z_o: characteristic impedance of the input (high-impedance) line, Ω.
    pub z_high: T,
    /// Z_oo: odd-mode impedance, Ω.
    pub z_odd: T,
    /// Z_oe: even-mode impedance, Ω.
    pub z_even: T,
    /// Physical length of the coupled section, m.
    pub length: T,
    /// Odd-mode phase velocity, m/s.
    pub velocity: T,
}

impl<T: Scalar> CoupledLineSpec<T> {
    pub fn new(z_high: T, z_odd: T, z_even: T, length: T, velocity: T) -> Result<Self> {
        let spec = Self {
            z_high,
            z_odd,
            z_even,
            length,
            velocity,
        };
        spec.validate()?;
        Ok(spec)
    }

    pub fn validate(&self) -> Result<()> {
        let positive = |v: T| v > T::zero() && v.is_finite();
        if !positive(self.z_high) || !positive(self.z_odd) || !positive(self.z_even) {
            return Err(Error::InvalidSpec(
                "coupled-line impedances must be positive".into(),
            ));
        }
        if !positive(self.length) || !positive(self.velocity) {
            return Err(Error::InvalidSpec(
                "coupled-line length and velocity must be positive".into(),
            ));
        }
        let ratio = self.z_even / self.z_odd;
        if ratio < T::lit(MIN_EVEN_ODD_RATIO) {
            return Err(Error::InvalidSpec(format!(
                "Z_oe/Z_oo = {ratio} is below {MIN_EVEN_ODD_RATIO}; the tight-coupling model does not apply"
            )));
        }
        Ok(())
    }

    /// θ = ωl/v of the coupled section.
    pub fn theta(&self, omega: T) -> T {
        electrical_angle(omega, self.velocity, self.length)
    }

    /// Angular frequency at which the section has electrical length `theta`.
    pub fn omega_at(&self, theta: T) -> T {
        theta * self.velocity / self.length
    }

    /// First transformer pole (θ = π), in Hz: v/(2l).
    pub fn cutoff_hz(&self) -> T {
        self.velocity / (T::lit(2.0) * self.length)
    }
}

/// Low-port impedance of the Ruthroff transformer at electrical length θ:
///
/// `Z_ext = 2Z_oo (Z_o cosθ − 2jZ_oo sinθ) / (4Z_oo(cosθ + 1) − jZ_o sinθ)`
pub fn ruthroff_impedance_at_angle<T: Scalar>(
    spec: &CoupledLineSpec<T>,
    theta: T,
) -> Result<Complex<T>> {
    let (s, c) = theta.sin_cos();
    let two = T::lit(2.0);
    let zo = spec.z_high;
    let zoo = spec.z_odd;
    let num = Complex::new(zo * c, -two * zoo * s);
    let den = ruthroff_denominator(zo, zoo, theta);
    if den.norm() < T::lit(POLE_THRESHOLD) * zo.abs() {
        return Err(Error::Pole {
            theta: theta.as_f64(),
            cutoff_hz: spec.cutoff_hz().as_f64(),
        });
    }
    Ok(num * reciprocal(den) * (two * zoo))
}

pub(crate) fn ruthroff_denominator<T: Scalar>(zo: T, zoo: T, theta: T) -> Complex<T> {
    let (s, c) = theta.sin_cos();
    Complex::new(T::lit(4.0) * zoo * (c + T::one()), -zo * s)
}

/// Impedance at the low-impedance port of the transformer, terminated in its
/// own `Z_o`.
pub fn ruthroff_impedance<T: Scalar>(
    spec: &CoupledLineSpec<T>,
    omega: Frequency<T>,
) -> Result<ComplexImmittance<T>> {
    spec.validate()?;
    ruthroff_impedance_at_angle(spec, spec.theta(omega.omega())).map(ComplexImmittance::impedance)
}

/// Transformation ratio of the transformer at one frequency.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct TransformRatio<T> {
    pub z_ext: Complex<T>,
    /// |Z_o / Z_ext|
    pub magnitude: T,
    /// Re(Z_o / Z_ext)
    pub real: T,
}

#[derive(Debug, Clone, PartialEq)]
pub struct RatioPoint<T> {
    pub omega: T,
    pub ratio: Result<TransformRatio<T>>,
}

/// Impedance transformation ratio over a strictly increasing frequency grid.
/// Grid points at a transformer pole carry the pole error; the rest are
/// still evaluated.
pub fn transformation_ratio<T: Scalar>(
    spec: &CoupledLineSpec<T>,
    grid: &[Frequency<T>],
) -> Result<Vec<RatioPoint<T>>> {
    spec.validate()?;
    if grid.windows(2).any(|w| !(w[1].omega() > w[0].omega())) {
        return Err(Error::Usage("frequency grid must be strictly increasing".into()));
    }
    Ok(grid
        .iter()
        .map(|w| RatioPoint {
            omega: w.omega(),
            ratio: ruthroff_impedance_at_angle(spec, spec.theta(w.omega())).map(|z_ext| {
                let r = reciprocal(z_ext) * spec.z_high;
                TransformRatio {
                    z_ext,
                    magnitude: r.norm(),
                    real: r.re,
                }
            }),
        })
        .collect())
}

/// One lossless element of the environment chain.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum Element<T> {
    TransmissionLine { z_c: T, velocity: T, length: T },
    SeriesInductor { inductance: T },
    SeriesCapacitor { capacitance: T },
    ShuntCapacitor { capacitance: T },
    /// Series LC resonant at `center` (rad/s) whose reactance slope there is
    /// `slope` (H): X(ω) = (slope/2)(ω − center²/ω).
    SeriesResonator { slope: T, center: T },
    /// Ruthroff transformer, only valid directly at the source.
    Ruthroff(CoupledLineSpec<T>),
}

impl<T: Scalar> Element<T> {
    pub fn validate(&self) -> Result<()> {
        let bad = |what: &str| Err(Error::InvalidSpec(what.to_string()));
        match *self {
            Element::TransmissionLine {
                z_c,
                velocity,
                length,
            } => {
                if !(z_c > T::zero()) || !(velocity > T::zero()) || !(length >= T::zero()) {
                    return bad("transmission line needs Z_c > 0, v > 0, l ≥ 0");
                }
            }
            Element::SeriesInductor { inductance } => {
                if !(inductance >= T::zero()) {
                    return bad("series inductance must be ≥ 0");
                }
            }
            Element::SeriesCapacitor { capacitance } => {
                if !(capacitance > T::zero()) {
                    return bad("series capacitance must be > 0");
                }
            }
            Element::ShuntCapacitor { capacitance } => {
                if !(capacitance >= T::zero()) {
                    return bad("shunt capacitance must be ≥ 0");
                }
            }
            Element::SeriesResonator { slope, center } => {
                if !(slope >= T::zero()) || !(center > T::zero()) {
                    return bad("series resonator needs slope ≥ 0 and center > 0");
                }
            }
            Element::Ruthroff(spec) => spec.validate()?,
        }
        Ok(())
    }

    /// Two-port representation. The transformer has none and reports an
    /// invalid-spec error.
    pub fn abcd(&self, omega: Frequency<T>) -> Result<AbcdMatrix<T>> {
        let w = omega.omega();
        let j = Complex::new(T::zero(), T::one());
        match *self {
            Element::TransmissionLine {
                z_c,
                velocity,
                length,
            } => tline_abcd(z_c, velocity, length, omega),
            Element::SeriesInductor { inductance } => Ok(AbcdMatrix::series(j * (w * inductance))),
            Element::SeriesCapacitor { capacitance } => {
                Ok(AbcdMatrix::series(-j / (w * capacitance)))
            }
            Element::ShuntCapacitor { capacitance } => Ok(AbcdMatrix::shunt(j * (w * capacitance))),
            Element::SeriesResonator { slope, center } => {
                let x = slope / T::lit(2.0) * (w - center * center / w);
                Ok(AbcdMatrix::series(j * x))
            }
            Element::Ruthroff(_) => Err(Error::InvalidSpec(
                "the Ruthroff transformer is a terminated one-port and has no ABCD form".into(),
            )),
        }
    }
}

/// Source, lossless elements (ordered from the source toward the SQUID) and
/// the resonator capacitor at the SQUID plane.
#[derive(Debug, Clone, PartialEq)]
pub struct EnvironmentChain<T> {
    /// Real source (reference) impedance, Ω.
    pub source_impedance: T,
    pub elements: Vec<Element<T>>,
    /// Shunt capacitance at the SQUID plane, F.
    pub shunt_capacitance: T,
}

impl<T: Scalar> EnvironmentChain<T> {
    pub fn new(source_impedance: T) -> Self {
        Self {
            source_impedance,
            elements: Vec::new(),
            shunt_capacitance: T::zero(),
        }
    }

    pub fn with_element(mut self, element: Element<T>) -> Self {
        self.elements.push(element);
        self
    }

    pub fn with_shunt_capacitance(mut self, capacitance: T) -> Self {
        self.shunt_capacitance = capacitance;
        self
    }

    pub fn validate(&self) -> Result<()> {
        if !(self.source_impedance > T::zero()) || !self.source_impedance.is_finite() {
            return Err(Error::InvalidSpec("source impedance must be positive".into()));
        }
        if !(self.shunt_capacitance >= T::zero()) || !self.shunt_capacitance.is_finite() {
            return Err(Error::InvalidSpec("shunt capacitance must be ≥ 0".into()));
        }
        for (i, el) in self.elements.iter().enumerate() {
            el.validate()?;
            if let Element::Ruthroff(spec) = el {
                if i != 0 {
                    return Err(Error::InvalidSpec(
                        "the Ruthroff transformer must be the element adjacent to the source".into(),
                    ));
                }
                let mismatch = (spec.z_high - self.source_impedance).abs();
                if mismatch > T::lit(1e-12) * self.source_impedance {
                    return Err(Error::InvalidSpec(format!(
                        "transformer Z_o = {} Ω differs from the source impedance {} Ω",
                        spec.z_high, self.source_impedance
                    )));
                }
            }
        }
        Ok(())
    }

    /// Impedance looking from the SQUID plane back toward the source,
    /// excluding the SQUID-plane shunt capacitor.
    pub fn looking_back_impedance(&self, omega: Frequency<T>) -> Result<ComplexImmittance<T>> {
        self.validate()?;
        let (termination, rest) = match self.elements.first() {
            Some(Element::Ruthroff(spec)) => (
                ruthroff_impedance_at_angle(spec, spec.theta(omega.omega()))?,
                &self.elements[1..],
            ),
            _ => (
                Complex::new(self.source_impedance, T::zero()),
                &self.elements[..],
            ),
        };
        // Every element is symmetric (A = D), so reversing the list gives the
        // two-port seen from the SQUID side.
        let mats = rest
            .iter()
            .rev()
            .map(|e| e.abcd(omega))
            .collect::<Result<Vec<_>>>()?;
        let z = cascade(&mats).input_impedance(termination)?;
        Ok(ComplexImmittance::impedance(z))
    }

    /// The chain's Ruthroff transformer, if any.
    pub fn transformer(&self) -> Option<&CoupledLineSpec<T>> {
        self.elements.iter().find_map(|e| match e {
            Element::Ruthroff(spec) => Some(spec),
            _ => None,
        })
    }
}

/// Admittance seen by the SQUID: `Y_ext(ω) = jωC + 1/Z_back(ω)`.
pub fn environment_admittance<T: Scalar>(
    chain: &EnvironmentChain<T>,
    omega: Frequency<T>,
) -> Result<ComplexImmittance<T>> {
    let z = chain.looking_back_impedance(omega)?;
    let y = z.invert()?;
    let jwc = Complex::new(T::zero(), omega.omega() * chain.shunt_capacitance);
    Ok(ComplexImmittance::admittance(y.value + jwc))
}

/// dX/dω of the looking-back impedance at `omega0`, in H, by a central
/// difference with step 1e-5·ω₀.
pub fn reactance_slope<T: Scalar>(chain: &EnvironmentChain<T>, omega0: Frequency<T>) -> Result<T> {
    chain.validate()?;
    let w0 = omega0.omega();
    let h = T::lit(1e-5) * w0;
    if let Some(spec) = chain.transformer() {
        // A pole strictly inside the stencil would be stepped over silently.
        let lo = spec.theta(w0 - h) / T::PI();
        let hi = spec.theta(w0 + h) / T::PI();
        let mut k = lo.ceil();
        if k.to_i64().is_some_and(|n| n % 2 == 0) {
            k += T::one();
        }
        if k <= hi {
            return Err(Error::Pole {
                theta: (k * T::PI()).as_f64(),
                cutoff_hz: spec.cutoff_hz().as_f64(),
            });
        }
    }
    let plus = chain.looking_back_impedance(Frequency::new_unchecked(w0 + h))?;
    let minus = chain.looking_back_impedance(Frequency::new_unchecked(w0 - h))?;
    Ok((plus.value.im - minus.value.im) / (T::lit(2.0) * h))
}
