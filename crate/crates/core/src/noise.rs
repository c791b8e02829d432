//! Hot/cold-load noise calibration.
//!
//! The measured noise spectral density, referred to the amplifier input and
//! expressed in kelvin, follows
//!
//! ```text
//! S(ω, T) = 2G · (P(ω, T) + T_sys),   P = (ħω/k_B) / (exp(ħω/k_B T) − 1)
//! ```
//!
//! which is linear in P, so (G, T_sys) come out of an ordinary straight-line
//! fit.

use serde::Serialize;

use crate::error::{Error, Result};
use crate::quantities::{Frequency, PhysicalConstants};
use crate::scalar::Scalar;

/// Temperature ratio below which the fit is flagged as poorly conditioned.
pub const MIN_TEMPERATURE_SPAN: f64 = 2.0;

fn photon_temperature<T: Scalar>(omega: Frequency<T>) -> T {
    T::lit(PhysicalConstants::CODATA.hbar_over_kb()) * omega.omega()
}

/// Planck occupancy expressed as a temperature, in kelvin.
pub fn planck_occupancy_temperature<T: Scalar>(omega: Frequency<T>, temperature: T) -> Result<T> {
    if !(temperature > T::zero()) || !temperature.is_finite() {
        return Err(Error::Domain(format!("temperature {temperature} K must be positive and finite")));
    }
    let t_ph = photon_temperature(omega);
    Ok(t_ph / (t_ph / temperature).exp_m1())
}

/// Forward model `2G · (P(ω, T) + T_sys)`.
pub fn noise_forward<T: Scalar>(omega: Frequency<T>, temperature: T, gain: T, t_sys: T) -> Result<T> {
    if !(gain > T::zero()) || !gain.is_finite() {
        return Err(Error::Domain(format!("gain {gain} must be positive and finite")));
    }
    if !t_sys.is_finite() {
        return Err(Error::Domain(format!("system noise temperature {t_sys} K is not finite")));
    }
    let p = planck_occupancy_temperature(omega, temperature)?;
    Ok(T::lit(2.0) * gain * (p + t_sys))
}

/// `k_B T_sys / ħω`.
pub fn added_photons<T: Scalar>(t_sys: T, omega: Frequency<T>) -> Result<T> {
    if !(t_sys >= T::zero()) || !t_sys.is_finite() {
        return Err(Error::Domain(format!("system noise temperature {t_sys} K must be non-negative")));
    }
    Ok(t_sys / photon_temperature(omega))
}

/// Standard quantum limit `ħω / 2k_B`, in kelvin.
pub fn sql_temperature<T: Scalar>(omega: Frequency<T>) -> T {
    T::lit(0.5) * photon_temperature(omega)
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct NoiseSample<T> {
    /// Source temperature, K.
    pub temperature: T,
    /// Input-referred noise spectral density, K.
    pub psd: T,
    /// Relative least-squares weight; `None` counts as 1.
    pub weight: Option<T>,
}

impl<T: Scalar> NoiseSample<T> {
    pub fn new(temperature: T, psd: T) -> Self {
        Self {
            temperature,
            psd,
            weight: None,
        }
    }

    pub fn weighted(temperature: T, psd: T, weight: T) -> Self {
        Self {
            temperature,
            psd,
            weight: Some(weight),
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct NoiseDataset<T> {
    pub angular_frequency: Frequency<T>,
    pub samples: Vec<NoiseSample<T>>,
}

impl<T: Scalar> NoiseDataset<T> {
    pub fn new(angular_frequency: Frequency<T>, samples: Vec<NoiseSample<T>>) -> Result<Self> {
        let ds = Self {
            angular_frequency,
            samples,
        };
        ds.validate()?;
        Ok(ds)
    }

    pub fn validate(&self) -> Result<()> {
        if self.samples.len() < 2 {
            return Err(Error::Usage(format!(
                "noise fit needs at least 2 samples, got {}",
                self.samples.len()
            )));
        }
        for (i, s) in self.samples.iter().enumerate() {
            if !(s.temperature > T::zero()) || !s.temperature.is_finite() {
                return Err(Error::Domain(format!("sample {i}: temperature {} K must be positive", s.temperature)));
            }
            if !s.psd.is_finite() {
                return Err(Error::Domain(format!("sample {i}: spectral density is not finite")));
            }
            if let Some(w) = s.weight {
                if !(w > T::zero()) || !w.is_finite() {
                    return Err(Error::Domain(format!("sample {i}: weight {w} must be positive")));
                }
            }
        }
        Ok(())
    }

    /// Dataset with every spectral density multiplied by `scale`.
    pub fn scaled(&self, scale: T) -> Self {
        Self {
            angular_frequency: self.angular_frequency,
            samples: self
                .samples
                .iter()
                .map(|s| NoiseSample {
                    psd: s.psd * scale,
                    ..*s
                })
                .collect(),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct NoiseFitResult<T> {
    pub gain_estimate: T,
    /// K
    pub system_noise_temperature: T,
    pub n_add: T,
    /// Weighted RMS residual, same units as S.
    pub residual_rms: T,
    /// `None` when there are no residual degrees of freedom.
    pub gain_std_error: Option<T>,
    pub system_noise_temperature_std_error: Option<T>,
    /// The unconstrained T_sys was negative and has been set to zero.
    pub t_sys_clamped: bool,
    /// Unconstrained intercept estimate before clamping, K.
    pub unconstrained_t_sys: T,
    pub warnings: Vec<String>,
}

/// Weighted straight-line fit of S against P, then G = a/2, T_sys = b/a.
pub fn fit_noise<T: Scalar>(data: &NoiseDataset<T>) -> Result<NoiseFitResult<T>> {
    data.validate()?;
    let omega = data.angular_frequency;
    let rows: Vec<(T, T, T)> = data
        .samples
        .iter()
        .map(|s| {
            Ok((
                planck_occupancy_temperature(omega, s.temperature)?,
                s.psd,
                s.weight.unwrap_or_else(T::one),
            ))
        })
        .collect::<Result<_>>()?;

    let sw: T = rows.iter().map(|r| r.2).sum();
    let p_mean = rows.iter().map(|r| r.2 * r.0).sum::<T>() / sw;
    let s_mean = rows.iter().map(|r| r.2 * r.1).sum::<T>() / sw;
    let sxx: T = rows.iter().map(|(p, _, w)| *w * (*p - p_mean) * (*p - p_mean)).sum();
    let sxy: T = rows
        .iter()
        .map(|(p, s, w)| *w * (*p - p_mean) * (*s - s_mean))
        .sum();
    let sp2: T = rows.iter().map(|(p, _, w)| *w * *p * *p).sum();
    if !(sxx > T::lit(1e-24) * sp2) {
        return Err(Error::DegenerateFit(
            "all samples share the same source temperature; slope is undetermined".into(),
        ));
    }
    let a = sxy / sxx;
    if !(a > T::zero()) {
        return Err(Error::DegenerateFit(format!(
            "fitted slope {a} is not positive; gain would be non-physical"
        )));
    }
    let b = s_mean - a * p_mean;

    let ss: T = rows
        .iter()
        .map(|(p, s, w)| {
            let r = *s - a * *p - b;
            *w * r * r
        })
        .sum();
    let residual_rms = (ss / sw).sqrt();

    let n = rows.len();
    let (se_a, se_t) = if n > 2 {
        let sigma2 = ss / T::from_usize(n - 2).expect("sample count fits the scalar");
        let var_a = sigma2 / sxx;
        let var_b = sigma2 * (T::one() / sw + p_mean * p_mean / sxx);
        let cov_ab = -p_mean * sigma2 / sxx;
        // Delta method for b/a.
        let var_t = var_b / (a * a) + b * b * var_a / (a * a * a * a) - T::lit(2.0) * b * cov_ab / (a * a * a);
        (Some(var_a.sqrt()), Some(var_t.max(T::zero()).sqrt()))
    } else {
        (None, None)
    };

    let mut warnings = Vec::new();
    let t_min = data.samples.iter().map(|s| s.temperature).fold(T::infinity(), T::min);
    let t_max = data.samples.iter().map(|s| s.temperature).fold(T::zero(), T::max);
    if t_max / t_min < T::lit(MIN_TEMPERATURE_SPAN) {
        let msg = format!(
            "source temperatures span a ratio of {:.3}; below {MIN_TEMPERATURE_SPAN} the fit is poorly conditioned",
            (t_max / t_min).as_f64()
        );
        log::warn!("{msg}");
        warnings.push(msg);
    }

    let unconstrained = b / a;
    let clamped = unconstrained < T::zero();
    let t_sys = if clamped {
        let msg = format!("unconstrained T_sys = {unconstrained} K is negative; clamped to 0");
        log::warn!("{msg}");
        warnings.push(msg);
        T::zero()
    } else {
        unconstrained
    };

    Ok(NoiseFitResult {
        gain_estimate: a / T::lit(2.0),
        system_noise_temperature: t_sys,
        n_add: added_photons(t_sys, omega)?,
        residual_rms,
        gain_std_error: se_a.map(|s| s / T::lit(2.0)),
        system_noise_temperature_std_error: se_t,
        t_sys_clamped: clamped,
        unconstrained_t_sys: unconstrained,
        warnings,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::quantities::to_angular;
    use approx::assert_relative_eq;
    use proptest::prelude::*;
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;
    use rand_distr::{Distribution, Normal};

    fn w(ghz: f64) -> Frequency<f64> {
        to_angular(ghz * 1e9).unwrap()
    }

    fn synthetic(omega: Frequency<f64>, g: f64, t_sys: f64, temps: &[f64]) -> NoiseDataset<f64> {
        let samples = temps
            .iter()
            .map(|&t| NoiseSample::new(t, noise_forward(omega, t, g, t_sys).unwrap()))
            .collect();
        NoiseDataset::new(omega, samples).unwrap()
    }

    fn linspace(a: f64, b: f64, n: usize) -> Vec<f64> {
        (0..n).map(|k| a + (b - a) * k as f64 / (n - 1) as f64).collect()
    }

    #[test]
    fn planck_examples() {
        // ħω/k_B at 6 GHz, computed independently.
        let t_ph = 1.054571817e-34 * 2.0 * std::f64::consts::PI * 6e9 / 1.380649e-23;
        assert_relative_eq!(t_ph, 0.2879, max_relative = 1e-3);
        let p = planck_occupancy_temperature(w(6.0), 3.0).unwrap();
        assert_relative_eq!(p, 2.858, max_relative = 1e-3);

        let hot = 100.0 * t_ph;
        let p = planck_occupancy_temperature(w(6.0), hot).unwrap();
        assert_relative_eq!(p, hot - 0.5 * t_ph, max_relative = 1e-3);

        assert!(planck_occupancy_temperature(w(6.0), 0.01 * t_ph).unwrap() < 1e-40);
        assert!(matches!(planck_occupancy_temperature(w(6.0), 0.0), Err(Error::Domain(_))));
        assert!(matches!(planck_occupancy_temperature(w(6.0), -1.0), Err(Error::Domain(_))));
    }

    #[test]
    fn forward_examples() {
        assert!(noise_forward(w(6.0), 1e-3, 10.0, 0.0).unwrap() < 1e-100);
        let s = noise_forward(w(6.0), 3.0, 100.0, 0.38).unwrap();
        assert_relative_eq!(s, 647.6, max_relative = 1e-3);
        let s2 = noise_forward(w(6.0), 3.0, 200.0, 0.38).unwrap();
        assert_eq!(s2, 2.0 * s);
        assert!(noise_forward(w(6.0), 3.0, 0.0, 0.38).is_err());
    }

    #[test]
    fn photon_conversions() {
        assert_relative_eq!(added_photons(0.38, w(6.35)).unwrap(), 1.25, max_relative = 1e-2);
        assert_eq!(added_photons(0.0, w(6.35)).unwrap(), 0.0);
        assert_relative_eq!(sql_temperature(w(6.0)), 0.1440, max_relative = 1e-3);
        assert_eq!(sql_temperature(w(12.0)), 2.0 * sql_temperature(w(6.0)));
        for f in [1.0, 4.2, 6.35, 7.25, 11.0] {
            assert_eq!(added_photons(sql_temperature(w(f)), w(f)).unwrap(), 0.5);
        }
    }

    #[test]
    fn noiseless_round_trip() {
        let ds = synthetic(w(6.0), 50.0, 0.5, &linspace(0.4, 3.0, 10));
        let fit = fit_noise(&ds).unwrap();
        assert_relative_eq!(fit.gain_estimate, 50.0, max_relative = 1e-9);
        assert_relative_eq!(fit.system_noise_temperature, 0.5, max_relative = 1e-9);
        assert!(!fit.t_sys_clamped);
        assert!(fit.warnings.is_empty());
    }

    #[test]
    fn two_samples_interpolate_exactly() {
        let omega = w(6.0);
        let ds = NoiseDataset::new(
            omega,
            vec![NoiseSample::new(0.5, 80.0), NoiseSample::new(2.5, 260.0)],
        )
        .unwrap();
        let fit = fit_noise(&ds).unwrap();
        assert!(fit.residual_rms <= 1e-12 * 260.0);
        assert_eq!(fit.gain_std_error, None);
        for s in &ds.samples {
            let back = noise_forward(omega, s.temperature, fit.gain_estimate, fit.system_noise_temperature).unwrap();
            assert_relative_eq!(back, s.psd, max_relative = 1e-12);
        }
    }

    #[test]
    fn equal_temperatures_are_degenerate() {
        let ds = NoiseDataset::new(
            w(6.0),
            vec![NoiseSample::new(1.0, 100.0), NoiseSample::new(1.0, 101.0), NoiseSample::new(1.0, 99.0)],
        )
        .unwrap();
        assert!(matches!(fit_noise(&ds), Err(Error::DegenerateFit(_))));
    }

    #[test]
    fn dataset_validation() {
        assert!(NoiseDataset::new(w(6.0), vec![NoiseSample::new(1.0, 1.0)]).is_err());
        assert!(NoiseDataset::new(w(6.0), vec![NoiseSample::new(1.0, 1.0), NoiseSample::new(-1.0, 1.0)]).is_err());
        assert!(NoiseDataset::new(
            w(6.0),
            vec![NoiseSample::weighted(1.0, 1.0, 0.0), NoiseSample::new(2.0, 1.0)]
        )
        .is_err());
    }

    #[test]
    fn narrow_span_warns() {
        let ds = synthetic(w(6.0), 50.0, 0.5, &linspace(1.0, 1.5, 5));
        let fit = fit_noise(&ds).unwrap();
        assert_eq!(fit.warnings.len(), 1);
    }

    #[test]
    fn negative_intercept_is_clamped() {
        let ds = synthetic(w(6.0), 20.0, -0.1, &linspace(0.4, 3.0, 8));
        let fit = fit_noise(&ds).unwrap();
        assert!(fit.t_sys_clamped);
        assert_eq!(fit.system_noise_temperature, 0.0);
        assert_relative_eq!(fit.unconstrained_t_sys, -0.1, max_relative = 1e-9);
        assert_eq!(fit.n_add, 0.0);
    }

    #[test]
    fn weights_pick_out_consistent_samples() {
        let omega = w(6.0);
        let mut ds = synthetic(omega, 50.0, 0.5, &linspace(0.4, 3.0, 6));
        for s in &mut ds.samples {
            s.weight = Some(1e6);
        }
        ds.samples.push(NoiseSample::weighted(1.7, 1e4, 1e-9));
        let fit = fit_noise(&ds).unwrap();
        assert_relative_eq!(fit.system_noise_temperature, 0.5, max_relative = 1e-6);
    }

    #[test]
    fn monte_carlo_one_percent_noise() {
        let omega = w(6.0);
        let temps = linspace(0.4, 3.0, 50);
        let clean: Vec<f64> = temps
            .iter()
            .map(|&t| noise_forward(omega, t, 50.0, 0.5).unwrap())
            .collect();
        let normal = Normal::new(0.0, 0.01).unwrap();
        let mut rng = ChaCha8Rng::seed_from_u64(7);
        let trials = 500;
        let mut hits = 0;
        let mut mean_residual = 0.0;
        for _ in 0..trials {
            let samples = temps
                .iter()
                .zip(&clean)
                .map(|(&t, &s)| NoiseSample::new(t, s * (1.0 + normal.sample(&mut rng))))
                .collect();
            let ds = NoiseDataset::new(omega, samples).unwrap();
            let fit = fit_noise(&ds).unwrap();
            if (fit.system_noise_temperature - 0.5).abs() <= 0.05 * 0.5 {
                hits += 1;
            }
            mean_residual += ds
                .samples
                .iter()
                .map(|s| {
                    s.psd
                        - noise_forward(omega, s.temperature, fit.gain_estimate, fit.unconstrained_t_sys).unwrap()
                })
                .sum::<f64>()
                / ds.samples.len() as f64;
        }
        assert!(hits as f64 >= 0.95 * trials as f64, "{hits}/{trials}");
        // Residual mean of an OLS fit with intercept is zero per trial.
        assert!((mean_residual / trials as f64).abs() < 1e-9 * 300.0);
    }

    #[test]
    fn standard_errors_cover_truth() {
        let omega = w(6.0);
        let temps = linspace(0.4, 3.0, 50);
        let normal = Normal::new(0.0, 0.01).unwrap();
        let mut rng = ChaCha8Rng::seed_from_u64(11);
        let mut covered = 0;
        for _ in 0..200 {
            let samples = temps
                .iter()
                .map(|&t| NoiseSample::new(t, noise_forward(omega, t, 50.0, 0.5).unwrap() * (1.0 + normal.sample(&mut rng))))
                .collect();
            let fit = fit_noise(&NoiseDataset::new(omega, samples).unwrap()).unwrap();
            let se = fit.system_noise_temperature_std_error.unwrap();
            if (fit.system_noise_temperature - 0.5).abs() <= 2.0 * se {
                covered += 1;
            }
        }
        assert!(covered >= 170, "{covered}/200");
    }

    #[test]
    fn f32_fit() {
        let omega = to_angular(6e9f32).unwrap();
        let samples = [0.5f32, 1.0, 2.0, 3.0]
            .iter()
            .map(|&t| NoiseSample::new(t, noise_forward(omega, t, 50.0, 0.5).unwrap()))
            .collect();
        let fit = fit_noise(&NoiseDataset::new(omega, samples).unwrap()).unwrap();
        assert!((fit.system_noise_temperature - 0.5).abs() < 1e-3);
    }

    proptest! {
        #[test]
        fn round_trip_random(g in 10.0f64..1e4, t_sys in 0.05f64..2.0, f in 4.0f64..8.0) {
            let ds = synthetic(w(f), g, t_sys, &linspace(0.4, 3.0, 12));
            let fit = fit_noise(&ds).unwrap();
            prop_assert!((fit.gain_estimate - g).abs() <= 1e-9 * g);
            prop_assert!((fit.system_noise_temperature - t_sys).abs() <= 1e-9 * t_sys);
        }

        #[test]
        fn planck_monotone(f in 1.0f64..12.0, t in 0.05f64..5.0, dt in 0.01f64..1.0, df in 0.1f64..3.0) {
            let p = planck_occupancy_temperature(w(f), t).unwrap();
            prop_assert!(planck_occupancy_temperature(w(f), t + dt).unwrap() > p);
            prop_assert!(planck_occupancy_temperature(w(f + df), t).unwrap() < p);
        }

        #[test]
        fn invariant_under_reorder_and_scale(seed in any::<u64>(), scale in 0.01f64..100.0) {
            let omega = w(6.0);
            let mut rng = ChaCha8Rng::seed_from_u64(seed);
            let normal = Normal::new(0.0, 0.01).unwrap();
            let samples: Vec<_> = linspace(0.4, 3.0, 20)
                .into_iter()
                .map(|t| NoiseSample::new(t, noise_forward(omega, t, 50.0, 0.5).unwrap() * (1.0 + normal.sample(&mut rng))))
                .collect();
            let ds = NoiseDataset::new(omega, samples).unwrap();
            let base = fit_noise(&ds).unwrap();

            let mut shuffled = ds.clone();
            for i in (1..shuffled.samples.len()).rev() {
                let j = rng.random_range(0..=i);
                shuffled.samples.swap(i, j);
            }
            let re = fit_noise(&shuffled).unwrap();
            prop_assert!((re.gain_estimate - base.gain_estimate).abs() <= 1e-10 * base.gain_estimate);
            prop_assert!((re.unconstrained_t_sys - base.unconstrained_t_sys).abs() <= 1e-9);

            let sc = fit_noise(&ds.scaled(scale)).unwrap();
            prop_assert!((sc.gain_estimate - scale * base.gain_estimate).abs() <= 1e-10 * scale * base.gain_estimate);
            prop_assert!((sc.unconstrained_t_sys - base.unconstrained_t_sys).abs() <= 1e-9);
        }
    }
}
