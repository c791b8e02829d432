//! Parameter sweeps and boxed Nelder–Mead design optimization.
//!
//! A design is scored by the bandwidth over which its gain stays within 1 dB
//! of the target, provided the peak reaches the target and the ripple inside
//! the band of interest stays under the limit. Designs that miss either
//! constraint score zero and carry a violation measured in dB.

use std::collections::BTreeSet;
use std::fmt;
use std::str::FromStr;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::Serialize;

use crate::error::{Error, Result};
use crate::gain::{gain_metrics, gain_sweep, peak_gain, AmplifierConfig, GainCurve, GainMetrics};
use crate::network::Element;
use crate::quantities::Frequency;
use crate::simplex::{self, SimplexOptions};

pub const DEFAULT_BUDGET: usize = 500;
pub const MIN_BUDGET: usize = 10;
pub const DEFAULT_RIPPLE_LIMIT_DB: f64 = 1.0;

/// Penalty assigned to designs whose evaluation fails outright.
const FAILED_VIOLATION: f64 = 1e6;

/// A tunable field of [`AmplifierConfig`]. Values are SI: Ω, H, Φ₀ units,
/// rad/s, F.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum Param {
    ZOdd,
    PhiDc,
    PhiAc,
    PumpOmega,
    ShuntCapacitance,
    /// Slope of the series resonator; one is appended at ω_p/2 when the
    /// chain has none. Applied last so the centre follows a swept pump.
    ReactanceSlope,
}

impl Param {
    pub const ALL: [Param; 6] = [
        Param::ZOdd,
        Param::PhiDc,
        Param::PhiAc,
        Param::PumpOmega,
        Param::ShuntCapacitance,
        Param::ReactanceSlope,
    ];

    pub fn name(self) -> &'static str {
        match self {
            Param::ZOdd => "z_odd",
            Param::PhiDc => "phi_dc",
            Param::PhiAc => "phi_ac",
            Param::PumpOmega => "pump_omega",
            Param::ShuntCapacitance => "c_shunt",
            Param::ReactanceSlope => "reactance_slope",
        }
    }

    /// Writes `value` into the matching field of `config`.
    pub fn apply(self, config: &mut AmplifierConfig<f64>, value: f64) -> Result<()> {
        if !value.is_finite() {
            return Err(Error::Usage(format!("{} = {value} is not finite", self.name())));
        }
        match self {
            Param::ZOdd => {
                let spec = config
                    .environment
                    .elements
                    .iter_mut()
                    .find_map(|e| match e {
                        Element::Ruthroff(spec) => Some(spec),
                        _ => None,
                    })
                    .ok_or_else(|| Error::Usage("z_odd needs a Ruthroff transformer in the chain".into()))?;
                spec.z_odd = value;
            }
            Param::PhiDc => config.operating_point.phi_dc = value,
            Param::PhiAc => config.operating_point.phi_ac = value,
            Param::PumpOmega => config.operating_point.pump_omega = value,
            Param::ShuntCapacitance => config.environment.shunt_capacitance = value,
            Param::ReactanceSlope => {
                let center = config.operating_point.pump_omega / 2.0;
                let existing = config.environment.elements.iter_mut().find_map(|e| match e {
                    Element::SeriesResonator { slope, .. } => Some(slope),
                    _ => None,
                });
                match existing {
                    Some(slope) => *slope = value,
                    None => config
                        .environment
                        .elements
                        .push(Element::SeriesResonator { slope: value, center }),
                }
            }
        }
        Ok(())
    }
}

impl fmt::Display for Param {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for Param {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        Param::ALL
            .into_iter()
            .find(|p| p.name() == s)
            .ok_or_else(|| {
                let known: Vec<_> = Param::ALL.iter().map(|p| p.name()).collect();
                Error::Usage(format!("unknown parameter `{s}` (known: {})", known.join(", ")))
            })
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct Bound {
    pub param: Param,
    pub lower: f64,
    pub upper: f64,
}

/// Box of named parameters, kept in canonical parameter order so that the
/// order they were listed in never matters.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ParameterSpace {
    bounds: Vec<Bound>,
}

impl ParameterSpace {
    pub fn new(mut bounds: Vec<Bound>) -> Result<Self> {
        if bounds.is_empty() {
            return Err(Error::Usage("parameter space is empty".into()));
        }
        let mut seen = BTreeSet::new();
        for b in &bounds {
            if !seen.insert(b.param) {
                return Err(Error::Usage(format!("parameter `{}` listed twice", b.param)));
            }
            if !b.lower.is_finite() || !b.upper.is_finite() || !(b.lower < b.upper) {
                return Err(Error::Usage(format!(
                    "bounds for `{}` must be finite with lower < upper, got [{}, {}]",
                    b.param, b.lower, b.upper
                )));
            }
        }
        bounds.sort_by_key(|b| b.param);
        Ok(Self { bounds })
    }

    pub fn bounds(&self) -> &[Bound] {
        &self.bounds
    }

    pub fn dim(&self) -> usize {
        self.bounds.len()
    }

    fn unit_to_values(&self, u: &[f64]) -> Vec<f64> {
        self.bounds
            .iter()
            .zip(u)
            .map(|(b, &t)| b.lower + t.clamp(0.0, 1.0) * (b.upper - b.lower))
            .collect()
    }

    pub fn contains(&self, values: &[f64]) -> bool {
        values.len() == self.dim()
            && self
                .bounds
                .iter()
                .zip(values)
                .all(|(b, v)| *v >= b.lower && *v <= b.upper)
    }

    /// `base` with every parameter set from `values` (canonical order).
    pub fn apply(&self, base: &AmplifierConfig<f64>, values: &[f64]) -> Result<AmplifierConfig<f64>> {
        if values.len() != self.dim() {
            return Err(Error::Usage(format!(
                "expected {} parameter values, got {}",
                self.dim(),
                values.len()
            )));
        }
        let mut cfg = base.clone();
        for (b, v) in self.bounds.iter().zip(values) {
            b.param.apply(&mut cfg, *v)?;
        }
        Ok(cfg)
    }
}

/// Flat-gain design target.
#[derive(Debug, Clone, PartialEq)]
pub struct Objective {
    pub target_gain_db: f64,
    pub band: (Frequency<f64>, Frequency<f64>),
    pub ripple_limit_db: f64,
    /// Signal frequencies every design is evaluated on.
    pub grid: Vec<Frequency<f64>>,
}

impl Objective {
    pub fn new(target_gain_db: f64, band: (Frequency<f64>, Frequency<f64>), grid: Vec<Frequency<f64>>) -> Result<Self> {
        let o = Self {
            target_gain_db,
            band,
            ripple_limit_db: DEFAULT_RIPPLE_LIMIT_DB,
            grid,
        };
        o.validate()?;
        Ok(o)
    }

    pub fn with_ripple_limit(mut self, ripple_limit_db: f64) -> Result<Self> {
        self.ripple_limit_db = ripple_limit_db;
        self.validate()?;
        Ok(self)
    }

    pub fn validate(&self) -> Result<()> {
        if !self.target_gain_db.is_finite() {
            return Err(Error::Usage("target gain must be finite".into()));
        }
        if !(self.ripple_limit_db >= 0.0) {
            return Err(Error::Usage("ripple limit must be ≥ 0 dB".into()));
        }
        let (lo, hi) = (self.band.0.omega(), self.band.1.omega());
        if !(hi > lo) {
            return Err(Error::Usage("band upper edge must exceed its lower edge".into()));
        }
        if self.grid.windows(2).any(|w| !(w[1].omega() > w[0].omega())) {
            return Err(Error::Usage("objective grid must be strictly increasing".into()));
        }
        if !self.grid.iter().any(|w| w.omega() >= lo && w.omega() <= hi) {
            return Err(Error::Usage("objective grid has no points inside the band".into()));
        }
        Ok(())
    }

    /// Level at which bandwidth is scored.
    pub fn level_db(&self) -> f64 {
        self.target_gain_db - 1.0
    }

    /// Scores `config`. Never fails: evaluation errors become infeasible
    /// points with the error message attached.
    pub fn evaluate(&self, config: &AmplifierConfig<f64>) -> Evaluation {
        let curve = match gain_sweep(config, &self.grid) {
            Ok(c) => c,
            Err(e) => return Evaluation::failed(e),
        };
        let metrics = match metrics_at(&curve, self.level_db(), self.band) {
            Ok(m) => m,
            Err(e) => return Evaluation::failed(e),
        };
        let mut violation = (self.target_gain_db - metrics.peak_gain_db).max(0.0)
            + (metrics.ripple_db - self.ripple_limit_db).max(0.0);
        let mut error = None;
        if let Some(r) = curve.rejected.first() {
            violation += 1.0 + curve.rejected.len() as f64 / self.grid.len() as f64;
            error = Some(format!(
                "{} grid point(s) rejected, first at {:.6e} Hz: {}",
                curve.rejected.len(),
                r.omega / std::f64::consts::TAU,
                r.error
            ));
        }
        let feasible = violation == 0.0;
        Evaluation {
            values: Vec::new(),
            score: if feasible { metrics.bandwidth_at_level_hz } else { 0.0 },
            feasible,
            violation,
            metrics: Some(metrics),
            error,
        }
    }
}

/// Metrics at `level_db`, falling back to the peak level when the curve never
/// reaches it.
fn metrics_at(curve: &GainCurve<f64>, level_db: f64, band: (Frequency<f64>, Frequency<f64>)) -> Result<GainMetrics> {
    match gain_metrics(curve, level_db, band) {
        Err(Error::NoBandwidth { peak_db, .. }) => gain_metrics(curve, peak_db, band),
        other => other,
    }
}

/// One scored design.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Evaluation {
    /// Parameter values in canonical order.
    pub values: Vec<f64>,
    /// Bandwidth at target − 1 dB in Hz; 0 when infeasible.
    pub score: f64,
    pub feasible: bool,
    /// Peak shortfall plus ripple excess in dB, plus a penalty for rejected
    /// grid points. Zero exactly when feasible.
    pub violation: f64,
    pub metrics: Option<GainMetrics>,
    pub error: Option<String>,
}

impl Evaluation {
    fn failed(e: Error) -> Self {
        Self {
            values: Vec::new(),
            score: 0.0,
            feasible: false,
            violation: FAILED_VIOLATION,
            metrics: None,
            error: Some(e.to_string()),
        }
    }

    /// Quantity minimized by the search: feasible points rank by score,
    /// infeasible ones by violation, and every feasible point beats every
    /// infeasible one.
    fn merit(&self) -> f64 {
        if self.feasible {
            -self.score / 1e9
        } else {
            self.violation
        }
    }

    /// Whether `self` is a strictly better design than `other`.
    pub fn better_than(&self, other: &Evaluation) -> bool {
        self.merit() < other.merit()
    }
}

/// Scores the design obtained by setting `values` on `base`.
pub fn evaluate_point(
    base: &AmplifierConfig<f64>,
    space: &ParameterSpace,
    objective: &Objective,
    values: &[f64],
) -> Evaluation {
    let mut ev = match space.apply(base, values) {
        Ok(cfg) => objective.evaluate(&cfg),
        Err(e) => Evaluation::failed(e),
    };
    ev.values = values.to_vec();
    ev
}

#[derive(Debug, Clone, PartialEq)]
pub struct SweepRow {
    pub value: f64,
    pub metrics: Result<GainMetrics>,
    /// Grid points that could not be evaluated.
    pub rejected: usize,
}

/// Evaluates `config` with `param` set to each value in turn. Metrics use
/// `level_db`, or 3 dB below the peak when `None`.
pub fn sweep(
    config: &AmplifierConfig<f64>,
    param: Param,
    values: &[f64],
    grid: &[Frequency<f64>],
    band: (Frequency<f64>, Frequency<f64>),
    level_db: Option<f64>,
) -> Result<Vec<SweepRow>> {
    if values.is_empty() {
        return Err(Error::Usage("sweep needs at least one value".into()));
    }
    Ok(values
        .par_iter()
        .map(|&value| {
            let run = || -> Result<(GainMetrics, usize)> {
                let mut cfg = config.clone();
                param.apply(&mut cfg, value)?;
                let curve = gain_sweep(&cfg, grid)?;
                let level = match level_db {
                    Some(l) => l,
                    None => {
                        peak_gain(&curve)
                            .ok_or_else(|| {
                                curve.rejected.first().map_or_else(
                                    || Error::Usage("empty gain curve".into()),
                                    |r| r.error.clone(),
                                )
                            })?
                            .1
                            - 3.0
                    }
                };
                Ok((gain_metrics(&curve, level, band)?, curve.rejected.len()))
            };
            match run() {
                Ok((m, rejected)) => SweepRow {
                    value,
                    metrics: Ok(m),
                    rejected,
                },
                Err(e) => SweepRow {
                    value,
                    metrics: Err(e),
                    rejected: 0,
                },
            }
        })
        .collect())
}

#[derive(Debug, Clone, PartialEq)]
pub struct OptimizeOutcome {
    /// Best feasible design, or the least-violating one when nothing is
    /// feasible.
    pub best: Evaluation,
    pub best_config: AmplifierConfig<f64>,
    pub feasible: bool,
    /// Every evaluation in the order it was made.
    pub trace: Vec<Evaluation>,
    pub seed: u64,
    pub budget: usize,
}

/// Nelder–Mead on the unit cube of `space`, started from the midpoint with
/// seeded perturbations and restarted around the incumbent whenever the
/// simplex collapses, until `budget` evaluations are spent. Deterministic for
/// fixed inputs and seed.
pub fn optimize(
    base: &AmplifierConfig<f64>,
    space: &ParameterSpace,
    objective: &Objective,
    budget: usize,
    seed: u64,
) -> Result<OptimizeOutcome> {
    if budget < MIN_BUDGET {
        return Err(Error::Usage(format!("budget must be at least {MIN_BUDGET}, got {budget}")));
    }
    objective.validate()?;
    let n = space.dim();
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut trace: Vec<Evaluation> = Vec::with_capacity(budget);

    let mut center = vec![0.5; n];
    let mut radius = 0.25;
    while trace.len() + n < budget && radius > 1e-6 {
        let mut start = Vec::with_capacity(n + 1);
        start.push(center.clone());
        for i in 0..n {
            let mut v = center.clone();
            for (k, c) in v.iter_mut().enumerate() {
                if k == i {
                    let sign = if *c + radius > 1.0 { -1.0 } else { 1.0 };
                    *c += sign * radius * rng.random_range(0.8..1.2);
                } else {
                    *c += radius * rng.random_range(-0.1..0.1);
                }
            }
            start.push(v);
        }
        let remaining = budget - trace.len();
        let opts = SimplexOptions {
            max_evals: remaining,
            x_tol: 1e-6,
            f_tol: 1e-9,
        };
        let result = simplex::minimize(
            |u| {
                let ev = evaluate_point(base, space, objective, &space.unit_to_values(u));
                let merit = ev.merit();
                trace.push(ev);
                merit
            },
            start,
            opts,
            |u| u.iter_mut().for_each(|t| *t = t.clamp(0.0, 1.0)),
        );
        log::debug!(
            "simplex pass: {} evals, merit {:.6e}, converged {}",
            result.evals,
            result.fx,
            result.converged
        );
        if !result.converged {
            break;
        }
        center = result.x;
        radius *= 0.5;
    }

    let best = trace
        .iter()
        .fold(None::<&Evaluation>, |acc, ev| match acc {
            Some(b) if !ev.better_than(b) => Some(b),
            _ => Some(ev),
        })
        .cloned()
        .ok_or_else(|| Error::Usage("budget too small for one simplex".into()))?;
    let best_config = space.apply(base, &best.values)?;
    Ok(OptimizeOutcome {
        feasible: best.feasible,
        best,
        best_config,
        trace,
        seed,
        budget,
    })
}

/// Full-factorial grid with `points_per_axis` values per parameter
/// (endpoints included), evaluated in parallel, in row-major order.
pub fn grid_search(
    base: &AmplifierConfig<f64>,
    space: &ParameterSpace,
    objective: &Objective,
    points_per_axis: usize,
) -> Result<Vec<Evaluation>> {
    if points_per_axis < 2 {
        return Err(Error::Usage("grid search needs at least 2 points per axis".into()));
    }
    let n = space.dim();
    let total = points_per_axis
        .checked_pow(n as u32)
        .filter(|t| *t <= 10_000_000)
        .ok_or_else(|| Error::Usage("grid search is too large".into()))?;
    let points: Vec<Vec<f64>> = (0..total)
        .map(|mut idx| {
            let mut u = vec![0.0; n];
            for k in (0..n).rev() {
                u[k] = (idx % points_per_axis) as f64 / (points_per_axis - 1) as f64;
                idx /= points_per_axis;
            }
            space.unit_to_values(&u)
        })
        .collect();
    evaluate_points(base, space, objective, &points)
}

/// Scores each of `points`, in parallel, keeping order.
pub fn evaluate_points(
    base: &AmplifierConfig<f64>,
    space: &ParameterSpace,
    objective: &Objective,
    points: &[Vec<f64>],
) -> Result<Vec<Evaluation>> {
    objective.validate()?;
    Ok(points
        .par_iter()
        .map(|v| evaluate_point(base, space, objective, v))
        .collect())
}

/// Best entry of a list of evaluations (first wins ties).
pub fn best_of(evals: &[Evaluation]) -> Option<&Evaluation> {
    evals.iter().fold(None, |acc: Option<&Evaluation>, ev| match acc {
        Some(b) if !ev.better_than(b) => Some(b),
        _ => Some(ev),
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::gain::ProfileClass;
    use crate::reference::*;
    use std::f64::consts::TAU;

    fn coarse_objective(target: f64) -> Objective {
        Objective::new(target, reference_band(), uniform_grid(5e9, 7e9, 201)).unwrap()
    }

    fn slope_space(hi: f64) -> ParameterSpace {
        ParameterSpace::new(vec![Bound {
            param: Param::ReactanceSlope,
            lower: 0.0,
            upper: hi,
        }])
        .unwrap()
    }

    #[test]
    fn param_names_round_trip() {
        for p in Param::ALL {
            assert_eq!(p.name().parse::<Param>().unwrap(), p);
        }
        assert!(matches!("z_even".parse::<Param>(), Err(Error::Usage(_))));
    }

    #[test]
    fn space_validation() {
        let b = |param, lower, upper| Bound { param, lower, upper };
        assert!(ParameterSpace::new(vec![]).is_err());
        assert!(ParameterSpace::new(vec![b(Param::PhiAc, 0.3, 0.2)]).is_err());
        assert!(ParameterSpace::new(vec![b(Param::PhiAc, 0.1, f64::INFINITY)]).is_err());
        assert!(ParameterSpace::new(vec![b(Param::PhiAc, 0.1, 0.2), b(Param::PhiAc, 0.1, 0.3)]).is_err());
        let s = ParameterSpace::new(vec![b(Param::ReactanceSlope, 0.0, 1e-9), b(Param::ZOdd, 5.0, 20.0)]).unwrap();
        assert_eq!(s.bounds()[0].param, Param::ZOdd);
    }

    #[test]
    fn apply_sets_fields() {
        let mut cfg = reference_config();
        Param::ZOdd.apply(&mut cfg, 12.0).unwrap();
        assert_eq!(cfg.environment.transformer().unwrap().z_odd, 12.0);
        Param::ReactanceSlope.apply(&mut cfg, 1e-9).unwrap();
        assert!(cfg
            .environment
            .elements
            .iter()
            .any(|e| matches!(e, Element::SeriesResonator { slope, .. } if *slope == 1e-9)));

        let mut bare = lorentzian_config(0.2);
        assert!(Param::ZOdd.apply(&mut bare, 10.0).is_err());
        Param::ReactanceSlope.apply(&mut bare, 2e-9).unwrap();
        assert_eq!(
            bare.environment.elements,
            vec![Element::SeriesResonator {
                slope: 2e-9,
                center: TAU * 6e9
            }]
        );
    }

    #[test]
    fn score_is_order_free() {
        let obj = coarse_objective(20.0);
        let b1 = Bound { param: Param::ReactanceSlope, lower: 0.0, upper: 3e-9 };
        let b2 = Bound { param: Param::PhiAc, lower: 0.2, upper: 0.3 };
        let s1 = ParameterSpace::new(vec![b1, b2]).unwrap();
        let s2 = ParameterSpace::new(vec![b2, b1]).unwrap();
        assert_eq!(s1, s2);
        let base = lorentzian_config(0.25);
        let mut by_hand = base.clone();
        Param::ReactanceSlope.apply(&mut by_hand, 1.5e-9).unwrap();
        Param::PhiAc.apply(&mut by_hand, 0.25).unwrap();
        let ev = evaluate_point(&base, &s1, &obj, &[0.25, 1.5e-9]);
        assert_eq!(ev.score, obj.evaluate(&by_hand).score);
    }

    #[test]
    fn single_point_sweep_matches_direct_evaluation() {
        let cfg = reference_config();
        let grid = uniform_grid(5e9, 7e9, 201);
        let rows = sweep(&cfg, Param::ReactanceSlope, &[1.45e-9], &grid, reference_band(), Some(19.0)).unwrap();
        assert_eq!(rows.len(), 1);
        let direct = gain_metrics(
            &gain_sweep(&reference_config_with_slope(1.45e-9), &grid).unwrap(),
            19.0,
            reference_band(),
        )
        .unwrap();
        assert_eq!(rows[0].metrics.as_ref().unwrap(), &direct);
    }

    #[test]
    fn unknown_parameter_name_is_usage_error() {
        assert!(matches!("slope".parse::<Param>(), Err(Error::Usage(_))));
    }

    #[test]
    fn slope_sweep_classification() {
        let slopes = [0.0, 0.7e-9, 1.45e-9, 2.2e-9];
        let rows = sweep(
            &reference_config(),
            Param::ReactanceSlope,
            &slopes,
            &reference_grid(),
            reference_band(),
            None,
        )
        .unwrap();
        let classes: Vec<_> = rows
            .iter()
            .map(|r| r.metrics.as_ref().unwrap().profile_class.unwrap())
            .collect();
        use ProfileClass::*;
        assert_eq!(classes, vec![Lorentzian, Lorentzian, Flattened, DoublePeaked]);
    }

    #[test]
    fn peak_gain_rises_with_pump_until_threshold() {
        let values: Vec<f64> = (0..30).map(|k| 0.05 + 0.0075 * k as f64).collect();
        let rows = sweep(
            &lorentzian_config(0.1),
            Param::PhiAc,
            &values,
            &uniform_grid(5.5e9, 6.5e9, 401),
            reference_band(),
            None,
        )
        .unwrap();
        let peaks: Vec<f64> = rows
            .iter()
            .map_while(|r| r.metrics.as_ref().ok().map(|m| m.peak_gain_db))
            .collect();
        assert!(peaks.len() >= 20);
        // Below threshold the peak gain grows monotonically.
        let below: Vec<f64> = values.iter().zip(&peaks).filter(|(v, _)| **v < 0.27).map(|(_, p)| *p).collect();
        assert!(below.windows(2).all(|w| w[1] > w[0]), "{below:?}");
    }

    #[test]
    fn optimizer_finds_flat_slope() {
        let obj = coarse_objective(TARGET_GAIN_DB);
        let space = slope_space(3e-9);
        let out = optimize(&reference_config(), &space, &obj, 120, 1).unwrap();
        assert!(out.feasible);
        let m = out.best.metrics.as_ref().unwrap();
        assert!(m.ripple_db <= 1.0 && m.peak_gain_db >= 20.0, "{m:?}");
        assert!(out.trace.len() <= 120);
        assert!(out.trace.iter().all(|e| space.contains(&e.values)));

        let grid = grid_search(&reference_config(), &space, &obj, 60).unwrap();
        let best_grid = best_of(&grid).unwrap();
        assert!(out.best.score >= best_grid.score, "{} < {}", out.best.score, best_grid.score);
    }

    #[test]
    fn unreachable_target_is_infeasible() {
        let obj = coarse_objective(60.0);
        let space = ParameterSpace::new(vec![Bound {
            param: Param::PhiAc,
            lower: 0.01,
            upper: 0.05,
        }])
        .unwrap();
        let out = optimize(&lorentzian_config(0.02), &space, &obj, 30, 3).unwrap();
        assert!(!out.feasible);
        assert_eq!(out.best.score, 0.0);
        assert!(out.best.violation > 0.0);
    }

    #[test]
    fn optimizer_is_deterministic() {
        let obj = coarse_objective(20.0);
        let space = ParameterSpace::new(vec![
            Bound { param: Param::ReactanceSlope, lower: 0.0, upper: 3e-9 },
            Bound { param: Param::PhiAc, lower: 0.2, upper: 0.27 },
        ])
        .unwrap();
        let a = optimize(&reference_config(), &space, &obj, 40, 9).unwrap();
        let b = optimize(&reference_config(), &space, &obj, 40, 9).unwrap();
        assert_eq!(a.trace, b.trace);
        let c = optimize(&reference_config(), &space, &obj, 40, 10).unwrap();
        assert_ne!(a.trace, c.trace);
    }

    #[test]
    fn tiny_budget_rejected() {
        let obj = coarse_objective(20.0);
        assert!(matches!(
            optimize(&reference_config(), &slope_space(3e-9), &obj, 9, 0),
            Err(Error::Usage(_))
        ));
    }
}
