//! Reflection gain of the pumped amplifier and its figures of merit.
//!
//! For each signal frequency the environment admittance is evaluated at both
//! the signal and the idler, the pumpistor is built from the idler value, and
//! the reflection coefficient is taken at the SQUID plane:
//!
//! ```text
//! G = (Y*_ext − Y_A) / (Y_ext + Y_A)
//! ```
//!
//! This is the power-wave reflection coefficient. For a real `Y_ext` it is
//! the familiar `(Y_ext − Y_A)/(Y_ext + Y_A)`; for a complex one, the
//! conjugate keeps `|G|` equal to the reflection magnitude at the source
//! port of a lossless network (unit gain with the pump off).

use num_complex::Complex;
use rayon::prelude::*;
use serde::Serialize;

use crate::error::{Error, Result};
use crate::network::{environment_admittance, EnvironmentChain};
use crate::pumpistor::{pumpistor_admittance, pumpistor_elements, OperatingPoint, SquidSpec};
use crate::quantities::{reciprocal, ComplexImmittance, Frequency};
use crate::scalar::Scalar;
use crate::simplex::{self, SimplexOptions};

/// Everything needed to evaluate the gain at a signal frequency.
#[derive(Debug, Clone, PartialEq)]
pub struct AmplifierConfig<T> {
    pub squid: SquidSpec<T>,
    pub operating_point: OperatingPoint<T>,
    pub environment: EnvironmentChain<T>,
}

impl<T: Scalar> AmplifierConfig<T> {
    pub fn validate(&self) -> Result<()> {
        self.operating_point.validate()?;
        self.environment.validate()
    }

    /// Complex reflection gain at `omega`.
    pub fn gain_at(&self, omega: Frequency<T>) -> Result<Complex<T>> {
        let ws = omega.omega();
        let wi = self.operating_point.idler(ws)?;
        let y_s = environment_admittance(&self.environment, omega)?;
        let y_i = environment_admittance(&self.environment, Frequency::new(wi)?)?;
        let elems = pumpistor_elements(&self.squid, &self.operating_point, ws, y_i)?;
        let y_a = pumpistor_admittance(&elems, ws)?;
        reflection_gain(y_s, y_a).map_err(|e| match e {
            Error::OscillationThreshold { .. } => Error::OscillationThreshold {
                omega: Some(ws.as_f64()),
            },
            other => other,
        })
    }
}

/// Reflection coefficient of the pumpistor load against the environment.
pub fn reflection_gain<T: Scalar>(
    y_ext: ComplexImmittance<T>,
    y_a: ComplexImmittance<T>,
) -> Result<Complex<T>> {
    let ye = y_ext.to_admittance()?.value;
    let ya = y_a.to_admittance()?.value;
    let den = ye + ya;
    let scale = ye.norm() + ya.norm();
    if den.norm() <= T::lit(1e-12) * scale || den.norm() == T::zero() {
        return Err(Error::OscillationThreshold { omega: None });
    }
    Ok((ye.conj() - ya) * reciprocal(den))
}

/// Power gain in dB, 20·log10|G|.
#[inline]
pub fn gain_db<T: Scalar>(g: Complex<T>) -> T {
    T::lit(20.0) * g.norm().log10()
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct GainPoint<T> {
    /// rad/s
    pub omega: T,
    pub g: Complex<T>,
    pub gain_db: T,
}

#[derive(Debug, Clone, PartialEq)]
pub struct RejectedPoint {
    /// rad/s
    pub omega: f64,
    pub error: Error,
}

/// Sampled gain profile. Points whose evaluation failed are kept aside with
/// the reason, so `points` only holds finite gains.
#[derive(Debug, Clone, PartialEq, Default)]
pub struct GainCurve<T> {
    pub points: Vec<GainPoint<T>>,
    pub rejected: Vec<RejectedPoint>,
}

impl<T: Scalar> GainCurve<T> {
    /// Curve from (ω, dB) pairs with zero-phase gains, for measured or
    /// synthetic data.
    pub fn from_db(samples: &[(T, T)]) -> Result<Self> {
        if samples.windows(2).any(|w| !(w[1].0 > w[0].0)) {
            return Err(Error::Usage("frequency grid must be strictly increasing".into()));
        }
        let points = samples
            .iter()
            .map(|&(omega, db)| {
                if !db.is_finite() {
                    return Err(Error::Usage(format!("gain {db} dB is not finite")));
                }
                let mag = T::lit(10.0).powf(db / T::lit(20.0));
                Ok(GainPoint {
                    omega,
                    g: Complex::new(mag, T::zero()),
                    gain_db: db,
                })
            })
            .collect::<Result<_>>()?;
        Ok(Self {
            points,
            rejected: Vec::new(),
        })
    }

    pub fn len(&self) -> usize {
        self.points.len()
    }

    pub fn is_empty(&self) -> bool {
        self.points.is_empty()
    }

    fn omegas_f64(&self) -> Vec<f64> {
        self.points.iter().map(|p| p.omega.as_f64()).collect()
    }

    fn db_f64(&self) -> Vec<f64> {
        self.points.iter().map(|p| p.gain_db.as_f64()).collect()
    }

    /// Copy of the curve with `offset_db` added to every point.
    pub fn offset_db(&self, offset_db: T) -> Self {
        let scale = T::lit(10.0).powf(offset_db / T::lit(20.0));
        Self {
            points: self
                .points
                .iter()
                .map(|p| GainPoint {
                    omega: p.omega,
                    g: p.g * scale,
                    gain_db: p.gain_db + offset_db,
                })
                .collect(),
            rejected: self.rejected.clone(),
        }
    }
}

/// Evaluates the gain over `grid`, in parallel, keeping grid order.
pub fn gain_sweep<T: Scalar>(config: &AmplifierConfig<T>, grid: &[Frequency<T>]) -> Result<GainCurve<T>> {
    if grid.is_empty() {
        return Err(Error::Usage("empty frequency grid".into()));
    }
    if grid.windows(2).any(|w| !(w[1].omega() > w[0].omega())) {
        return Err(Error::Usage("frequency grid must be strictly increasing".into()));
    }
    config.validate()?;

    let evaluated: Vec<(T, Result<Complex<T>>)> = grid
        .par_iter()
        .map(|&w| (w.omega(), config.gain_at(w)))
        .collect();

    let mut curve = GainCurve::default();
    for (omega, res) in evaluated {
        match res.and_then(|g| {
            let db = gain_db(g);
            if db.is_finite() {
                Ok((g, db))
            } else {
                Err(Error::Singular(format!("gain magnitude {} has no finite dB value", g.norm())))
            }
        }) {
            Ok((g, gain_db)) => curve.points.push(GainPoint { omega, g, gain_db }),
            Err(error) => curve.rejected.push(RejectedPoint {
                omega: omega.as_f64(),
                error,
            }),
        }
    }
    Ok(curve)
}

/// Shape of a gain profile.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum ProfileClass {
    Lorentzian,
    Flattened,
    DoublePeaked,
}

impl std::fmt::Display for ProfileClass {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(match self {
            ProfileClass::Lorentzian => "lorentzian",
            ProfileClass::Flattened => "flattened",
            ProfileClass::DoublePeaked => "double_peaked",
        })
    }
}

/// Figures of merit of a gain curve. Frequencies and bandwidths are cyclic
/// (Hz).
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct GainMetrics {
    pub peak_gain_db: f64,
    pub peak_frequency_hz: f64,
    pub level_db: f64,
    pub bandwidth_at_level_hz: f64,
    pub bandwidth_3db_hz: f64,
    /// √(peak linear power gain) × 3-dB bandwidth.
    pub gbw_product_hz: f64,
    pub band_hz: (f64, f64),
    pub ripple_db: f64,
    pub profile_class: Option<ProfileClass>,
    pub warnings: Vec<String>,
}

/// √(10^(peak/10)) · bandwidth.
pub fn gain_bandwidth_product(peak_gain_db: f64, bandwidth_hz: f64) -> f64 {
    10f64.powf(peak_gain_db / 20.0) * bandwidth_hz
}

/// Grid maximum refined by a parabola through its neighbours.
fn refined_peak(x: &[f64], y: &[f64]) -> (f64, f64) {
    let i = y
        .iter()
        .enumerate()
        .max_by(|a, b| a.1.total_cmp(b.1))
        .map(|(i, _)| i)
        .expect("non-empty");
    if i == 0 || i + 1 == y.len() {
        return (x[i], y[i]);
    }
    let (x0, x1, x2) = (x[i - 1], x[i], x[i + 1]);
    let (y0, y1, y2) = (y[i - 1], y[i], y[i + 1]);
    let d01 = (y1 - y0) / (x1 - x0);
    let d12 = (y2 - y1) / (x2 - x1);
    let curv = (d12 - d01) / (x2 - x0);
    if !(curv < 0.0) {
        return (x[i], y[i]);
    }
    // y = y1 + b(x − x1) + curv(x − x1)², with b the slope at x1.
    let b = d01 + curv * (x1 - x0);
    let dx = (-b / (2.0 * curv)).clamp(x0 - x1, x2 - x1);
    (x1 + dx, y1 + b * dx + curv * dx * dx)
}

/// Refined peak of the curve as (ω in rad/s, gain in dB), or `None` for an
/// empty curve.
pub fn peak_gain<T: Scalar>(curve: &GainCurve<T>) -> Option<(f64, f64)> {
    if curve.is_empty() {
        return None;
    }
    Some(refined_peak(&curve.omegas_f64(), &curve.db_f64()))
}

/// Total measure of x where y ≥ level, interpolating linearly at crossings.
fn measure_above(x: &[f64], y: &[f64], level: f64) -> f64 {
    let mut total = 0.0;
    for k in 0..x.len().saturating_sub(1) {
        let (xa, xb, ya, yb) = (x[k], x[k + 1], y[k], y[k + 1]);
        let (above_a, above_b) = (ya >= level, yb >= level);
        total += match (above_a, above_b) {
            (true, true) => xb - xa,
            (false, false) => 0.0,
            (true, false) => (xb - xa) * (ya - level) / (ya - yb),
            (false, true) => (xb - xa) * (yb - level) / (yb - ya),
        };
    }
    total
}

/// Bandwidth (Hz) over which the curve is at or above `level_db`.
pub fn bandwidth_at<T: Scalar>(curve: &GainCurve<T>, level_db: f64) -> f64 {
    measure_above(&curve.omegas_f64(), &curve.db_f64(), level_db) / std::f64::consts::TAU
}

/// Peak, bandwidth at `level_db`, 3-dB gain-bandwidth product, ripple inside
/// `band` and profile class.
pub fn gain_metrics<T: Scalar>(
    curve: &GainCurve<T>,
    level_db: f64,
    band: (Frequency<T>, Frequency<T>),
) -> Result<GainMetrics> {
    if curve.is_empty() {
        return Err(Error::Usage("gain curve has no valid points".into()));
    }
    let (lo, hi) = (band.0.omega().as_f64(), band.1.omega().as_f64());
    if !(hi >= lo) {
        return Err(Error::Usage("band upper edge is below its lower edge".into()));
    }
    let x = curve.omegas_f64();
    let y = curve.db_f64();
    let (peak_omega, peak_db) = refined_peak(&x, &y);
    if level_db > peak_db {
        return Err(Error::NoBandwidth {
            level_db,
            peak_db,
        });
    }
    let tau = std::f64::consts::TAU;
    let bandwidth_at_level_hz = measure_above(&x, &y, level_db) / tau;
    let bandwidth_3db_hz = measure_above(&x, &y, peak_db - 3.0) / tau;

    let in_band: Vec<f64> = x
        .iter()
        .zip(&y)
        .filter(|(w, _)| **w >= lo && **w <= hi)
        .map(|(_, g)| *g)
        .collect();
    if in_band.is_empty() {
        return Err(Error::Usage("ripple band contains no grid points".into()));
    }
    let ripple_db = in_band.iter().cloned().fold(f64::NEG_INFINITY, f64::max)
        - in_band.iter().cloned().fold(f64::INFINITY, f64::min);

    let mut warnings = Vec::new();
    let resolved = y.iter().filter(|g| **g >= peak_db - 3.0).count();
    if resolved < 8 {
        let msg = format!(
            "only {resolved} grid points inside the 3-dB width; bandwidth interpolation may be coarse"
        );
        log::warn!("{msg}");
        warnings.push(msg);
    }

    let profile_class = if curve.len() >= MIN_CLASSIFY_POINTS {
        Some(classify_profile(curve)?)
    } else {
        None
    };

    Ok(GainMetrics {
        peak_gain_db: peak_db,
        peak_frequency_hz: peak_omega / tau,
        level_db,
        bandwidth_at_level_hz,
        bandwidth_3db_hz,
        gbw_product_hz: gain_bandwidth_product(peak_db, bandwidth_3db_hz),
        band_hz: (lo / tau, hi / tau),
        ripple_db,
        profile_class,
        warnings,
    })
}

pub const MIN_CLASSIFY_POINTS: usize = 32;
/// Minimum height of each peak above the valley between them, dB.
pub const DOUBLE_PEAK_MIN_DEPTH_DB: f64 = 0.5;
/// Largest relative residual still counted as Lorentzian.
pub const LORENTZIAN_MAX_RESIDUAL: f64 = 0.02;

/// Least-squares fit `B + A / (1 + ((ω − c)/γ)²)` to the linear power gain.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct LorentzianFit {
    /// rad/s
    pub center: f64,
    /// rad/s
    pub half_width: f64,
    pub amplitude: f64,
    pub baseline: f64,
    /// ‖y − fit‖₂ / ‖y‖₂
    pub relative_residual: f64,
}

/// Lorentzian fit in linear power by variable projection: amplitude and
/// baseline solved linearly, centre and width by simplex search.
pub fn fit_lorentzian<T: Scalar>(curve: &GainCurve<T>) -> Result<LorentzianFit> {
    if curve.len() < 4 {
        return Err(Error::Usage("need at least 4 points for a Lorentzian fit".into()));
    }
    let w = curve.omegas_f64();
    let power: Vec<f64> = curve.db_f64().iter().map(|g| 10f64.powf(g / 10.0)).collect();
    let (w_lo, w_hi) = (w[0], w[w.len() - 1]);
    let mid = 0.5 * (w_lo + w_hi);
    let half_span = 0.5 * (w_hi - w_lo);
    let x: Vec<f64> = w.iter().map(|v| (v - mid) / half_span).collect();
    let norm_y = power.iter().map(|v| v * v).sum::<f64>().sqrt();

    let solve = |c: f64, gamma: f64| -> Option<(f64, f64, f64)> {
        let (mut s1, mut sp, mut spp, mut sy, mut spy) = (0.0, 0.0, 0.0, 0.0, 0.0);
        for (xi, yi) in x.iter().zip(&power) {
            let u = (xi - c) / gamma;
            let p = 1.0 / (1.0 + u * u);
            s1 += 1.0;
            sp += p;
            spp += p * p;
            sy += yi;
            spy += p * yi;
        }
        let det = s1 * spp - sp * sp;
        if det.abs() <= 1e-14 * s1 * spp {
            return None;
        }
        let baseline = (spp * sy - sp * spy) / det;
        let amplitude = (s1 * spy - sp * sy) / det;
        let ss: f64 = x
            .iter()
            .zip(&power)
            .map(|(xi, yi)| {
                let u = (xi - c) / gamma;
                let r = yi - baseline - amplitude / (1.0 + u * u);
                r * r
            })
            .sum();
        Some((amplitude, baseline, ss.sqrt() / norm_y))
    };

    let imax = power
        .iter()
        .enumerate()
        .max_by(|a, b| a.1.total_cmp(b.1))
        .map(|(i, _)| i)
        .expect("non-empty");
    let pmin = power.iter().cloned().fold(f64::INFINITY, f64::min);
    let half = 0.5 * (power[imax] + pmin);
    let above = measure_above(&x, &power, half);
    let step = 2.0 / (x.len() - 1) as f64;
    let gamma0 = (0.5 * above).max(step);

    let objective = |p: &[f64]| -> f64 {
        let gamma = p[1].exp();
        solve(p[0], gamma).map_or(f64::INFINITY, |(_, _, r)| r)
    };
    let opts = SimplexOptions {
        max_evals: 4000,
        x_tol: 1e-12,
        f_tol: 1e-16,
    };
    let mut best = simplex::minimize(
        objective,
        simplex::axis_simplex(&[x[imax], gamma0.ln()], &[0.5 * gamma0, 0.3]),
        opts,
        |_| {},
    );
    for _ in 0..2 {
        let again = simplex::minimize(
            objective,
            simplex::axis_simplex(&best.x, &[0.1 * best.x[1].exp(), 0.1]),
            opts,
            |_| {},
        );
        if again.fx < best.fx {
            best = again;
        } else {
            break;
        }
    }
    let gamma = best.x[1].exp();
    let (amplitude, baseline, relative_residual) = solve(best.x[0], gamma)
        .ok_or_else(|| Error::DegenerateFit("Lorentzian basis is rank deficient".into()))?;
    Ok(LorentzianFit {
        center: mid + best.x[0] * half_span,
        half_width: gamma * half_span,
        amplitude,
        baseline,
        relative_residual,
    })
}

/// Whether two local maxima both rise at least `DOUBLE_PEAK_MIN_DEPTH_DB`
/// above the lowest point between them.
fn has_double_peak(y: &[f64]) -> bool {
    let maxima: Vec<usize> = (1..y.len() - 1)
        .filter(|&i| y[i] > y[i - 1] && y[i] >= y[i + 1])
        .collect();
    for (a, &i) in maxima.iter().enumerate() {
        for &j in &maxima[a + 1..] {
            let valley = y[i..=j].iter().cloned().fold(f64::INFINITY, f64::min);
            if y[i] - valley >= DOUBLE_PEAK_MIN_DEPTH_DB && y[j] - valley >= DOUBLE_PEAK_MIN_DEPTH_DB {
                return true;
            }
        }
    }
    false
}

/// Classifies a gain profile as Lorentzian, flattened or double-peaked.
pub fn classify_profile<T: Scalar>(curve: &GainCurve<T>) -> Result<ProfileClass> {
    if curve.len() < MIN_CLASSIFY_POINTS {
        return Err(Error::Usage(format!(
            "profile classification needs at least {MIN_CLASSIFY_POINTS} points, got {}",
            curve.len()
        )));
    }
    if has_double_peak(&curve.db_f64()) {
        return Ok(ProfileClass::DoublePeaked);
    }
    let fit = fit_lorentzian(curve)?;
    Ok(if fit.relative_residual <= LORENTZIAN_MAX_RESIDUAL {
        ProfileClass::Lorentzian
    } else {
        ProfileClass::Flattened
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::network::Element;
    use crate::pumpistor::bias_for_inductance;
    use crate::quantities::to_angular;
    use approx::assert_relative_eq;
    use std::f64::consts::{PI, TAU};

    fn grid(f_lo: f64, f_hi: f64, n: usize) -> Vec<Frequency<f64>> {
        (0..n)
            .map(|k| to_angular(f_lo + (f_hi - f_lo) * k as f64 / (n - 1) as f64).unwrap())
            .collect()
    }

    fn resistive_config(z: f64, c: f64, phi_ac: f64) -> AmplifierConfig<f64> {
        let squid = SquidSpec::new(4e-6).unwrap();
        let phi_dc = bias_for_inductance(&squid, 100e-12).unwrap();
        AmplifierConfig {
            squid,
            operating_point: OperatingPoint::new(phi_dc, phi_ac, TAU * 12e9).unwrap(),
            environment: EnvironmentChain::new(z).with_shunt_capacitance(c),
        }
    }

    fn synthetic(f: impl Fn(f64) -> f64, n: usize) -> GainCurve<f64> {
        let samples: Vec<(f64, f64)> = (0..n)
            .map(|k| {
                let w = TAU * (5e9 + 2e9 * k as f64 / (n - 1) as f64);
                (w, 10.0 * f(w).log10())
            })
            .collect();
        GainCurve::from_db(&samples).unwrap()
    }

    #[test]
    fn reflection_gain_examples() {
        let ya = ComplexImmittance::admittance(Complex::new(0.0, -0.3));
        let g = reflection_gain(ComplexImmittance::real_admittance(0.08), ya).unwrap();
        assert_relative_eq!(g.norm(), 1.0, max_relative = 1e-14);

        let g = reflection_gain(
            ComplexImmittance::real_admittance(0.08),
            ComplexImmittance::real_admittance(-0.072),
        )
        .unwrap();
        assert_relative_eq!(g.re, 19.0, max_relative = 1e-12);
        assert_relative_eq!(gain_db(g), 25.575, epsilon = 1e-3);

        let g = reflection_gain(
            ComplexImmittance::real_admittance(0.05),
            ComplexImmittance::real_admittance(0.05),
        )
        .unwrap();
        assert_eq!(g.norm(), 0.0);

        let r = reflection_gain(
            ComplexImmittance::real_admittance(0.05),
            ComplexImmittance::real_admittance(-0.05),
        );
        assert!(matches!(r, Err(Error::OscillationThreshold { omega: None })));
    }

    #[test]
    fn complex_environment_keeps_unit_gain_for_reactive_load() {
        let ye = ComplexImmittance::admittance(Complex::new(0.08, 0.26));
        let ya = ComplexImmittance::admittance(Complex::new(0.0, -0.31));
        let g = reflection_gain(ye, ya).unwrap();
        assert_relative_eq!(g.norm(), 1.0, max_relative = 1e-14);
    }

    #[test]
    fn empty_grid_is_usage_error() {
        let c = resistive_config(12.5, 7.036e-12, 0.25);
        assert!(matches!(gain_sweep(&c, &[]), Err(Error::Usage(_))));
    }

    #[test]
    fn pump_off_sweep_is_unitary() {
        let c = resistive_config(12.5, 7.036e-12, 1e-6);
        let curve = gain_sweep(&c, &grid(3e9, 9e9, 301)).unwrap();
        assert!(curve.rejected.is_empty());
        for p in &curve.points {
            assert!((p.g.norm() - 1.0).abs() <= 1e-4, "{p:?}");
        }
    }

    #[test]
    fn signal_idler_symmetry_with_constant_environment() {
        let c = resistive_config(12.5, 0.0, 0.25);
        let half = c.operating_point.pump_omega / 2.0;
        for k in 1..50 {
            let d = 2.0 * PI * 1e8 * k as f64;
            let up = c.gain_at(Frequency::new(half + d).unwrap()).unwrap();
            let dn = c.gain_at(Frequency::new(half - d).unwrap()).unwrap();
            assert!((gain_db(up) - gain_db(dn)).abs() <= 1e-6);
        }
    }

    #[test]
    fn idler_must_be_positive() {
        let c = resistive_config(12.5, 7.036e-12, 0.25);
        let curve = gain_sweep(&c, &grid(11e9, 13e9, 5)).unwrap();
        assert!(curve
            .rejected
            .iter()
            .all(|r| matches!(r.error, Error::Domain(_))));
        assert_eq!(curve.rejected.len(), 3);
    }

    #[test]
    fn gbw_checkpoints() {
        assert_relative_eq!(gain_bandwidth_product(20.0, 200e6), 2.0e9, max_relative = 1e-12);
        assert_relative_eq!(gain_bandwidth_product(17.0, 450e6), 3.19e9, max_relative = 2e-3);
    }

    #[test]
    fn metrics_on_flat_curve() {
        let curve = synthetic(|_| 100.0, 64);
        let band = (to_angular(5.5e9).unwrap(), to_angular(6.5e9).unwrap());
        let m = gain_metrics(&curve, 19.0, band).unwrap();
        assert_eq!(m.ripple_db, 0.0);
        assert_relative_eq!(m.peak_gain_db, 20.0, epsilon = 1e-12);
        assert_relative_eq!(m.bandwidth_at_level_hz, 2e9, max_relative = 1e-9);
        assert!(matches!(
            gain_metrics(&curve, 21.0, band),
            Err(Error::NoBandwidth { .. })
        ));
    }

    #[test]
    fn metrics_on_lorentzian() {
        // Power Lorentzian with peak 100 and FWHM 2γ = 200 MHz.
        let c = TAU * 6e9;
        let g = TAU * 100e6;
        let curve = synthetic(|w| 100.0 / (1.0 + ((w - c) / g).powi(2)), 2001);
        let band = (to_angular(5.9e9).unwrap(), to_angular(6.1e9).unwrap());
        let m = gain_metrics(&curve, 17.0, band).unwrap();
        assert_relative_eq!(m.peak_gain_db, 20.0, epsilon = 1e-6);
        assert_relative_eq!(m.peak_frequency_hz, 6e9, max_relative = 1e-9);
        // Level 17 dB ≈ half power: width 2γ·√(100/10^1.7 − 1).
        let expect = 2.0 * 100e6 * (100.0 / 10f64.powf(1.7) - 1.0).sqrt();
        assert_relative_eq!(m.bandwidth_at_level_hz, expect, max_relative = 1e-4);
        assert_relative_eq!(m.ripple_db, 20.0 - 10.0 * (100.0 / 2.0f64).log10(), epsilon = 2e-3);
        assert_eq!(m.profile_class, Some(ProfileClass::Lorentzian));
    }

    #[test]
    fn parabolic_peak_refinement() {
        let x = [0.0, 1.0, 2.0, 3.0];
        let y: Vec<f64> = x.iter().map(|v| 5.0 - (v - 1.3) * (v - 1.3)).collect();
        let (xp, yp) = refined_peak(&x, &y);
        assert_relative_eq!(xp, 1.3, epsilon = 1e-12);
        assert_relative_eq!(yp, 5.0, epsilon = 1e-12);
    }

    #[test]
    fn classify_synthetic_shapes() {
        let c = TAU * 6e9;
        let g = TAU * 100e6;
        let lor = synthetic(|w| 1.0 + 99.0 / (1.0 + ((w - c) / g).powi(2)), 401);
        assert_eq!(classify_profile(&lor).unwrap(), ProfileClass::Lorentzian);
        let fit = fit_lorentzian(&lor).unwrap();
        assert!(fit.relative_residual < 1e-8);
        assert_relative_eq!(fit.center, c, max_relative = 1e-9);
        assert_relative_eq!(fit.half_width, g, max_relative = 1e-7);

        // Two Lorentzians 400 MHz apart with a ~1 dB dip between them.
        let two = |d: f64| {
            move |w: f64| {
                let l = |x0: f64| 1.0 / (1.0 + ((w - x0) / (TAU * 120e6)).powi(2));
                100.0 * (l(c - TAU * d) + l(c + TAU * d))
            }
        };
        let dipped = synthetic(two(150e6), 401);
        let y = dipped.db_f64();
        let center = y[200];
        let top = y.iter().cloned().fold(f64::NEG_INFINITY, f64::max);
        assert!(top - center > 0.5 && top - center < 2.0, "dip {}", top - center);
        assert_eq!(classify_profile(&dipped).unwrap(), ProfileClass::DoublePeaked);

        // Super-Gaussian plateau: single maximum, clearly not Lorentzian.
        let flat = synthetic(|w| 1.0 + 99.0 * (-((w - c) / (TAU * 300e6)).powi(4)).exp(), 401);
        assert_eq!(classify_profile(&flat).unwrap(), ProfileClass::Flattened);
    }

    #[test]
    fn classification_needs_enough_points() {
        let curve = synthetic(|_| 10.0, 31);
        assert!(matches!(classify_profile(&curve), Err(Error::Usage(_))));
    }

    #[test]
    fn classification_invariant_under_db_offset() {
        let c = TAU * 6e9;
        let flat = synthetic(|w| 1.0 + 99.0 * (-((w - c) / (TAU * 300e6)).powi(4)).exp(), 201);
        let lor = synthetic(|w| 1.0 + 99.0 / (1.0 + ((w - c) / (TAU * 80e6)).powi(2)), 201);
        for curve in [flat, lor] {
            let base = classify_profile(&curve).unwrap();
            for off in [-13.0, -2.5, 0.7, 9.0] {
                assert_eq!(classify_profile(&curve.offset_db(off)).unwrap(), base);
            }
        }
    }

    #[test]
    fn transformer_environment_evaluates() {
        let mut cfg = resistive_config(50.0, 7.036e-12, 0.25);
        let spec = crate::network::CoupledLineSpec::new(50.0, 10.0, 7140.0, 0.5e-3, 1.2e8).unwrap();
        cfg.environment.elements.push(Element::Ruthroff(spec));
        let curve = gain_sweep(&cfg, &grid(5e9, 7e9, 101)).unwrap();
        assert!(curve.rejected.is_empty());
        assert!(curve.points.iter().any(|p| p.gain_db > 10.0));
    }

    #[test]
    fn f32_sweep_runs() {
        let squid = SquidSpec::<f32>::new(4e-6).unwrap();
        let cfg = AmplifierConfig {
            squid,
            operating_point: OperatingPoint::new(0.19243, 0.25, (TAU * 12e9) as f32).unwrap(),
            environment: EnvironmentChain::new(12.5f32).with_shunt_capacitance(7.036e-12),
        };
        let g: Vec<Frequency<f32>> = (0..11)
            .map(|k| to_angular(5.5e9f32 + 1e8 * k as f32).unwrap())
            .collect();
        let curve = gain_sweep(&cfg, &g).unwrap();
        let peak = curve.points.iter().map(|p| p.gain_db).fold(f32::MIN, f32::max);
        assert!(peak > 15.0, "{peak}");
    }
}
