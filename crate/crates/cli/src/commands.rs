use std::collections::BTreeMap;
use std::f64::consts::{PI, TAU};
use std::path::{Path, PathBuf};
use std::time::Instant;

use jpa_forge::network::ruthroff_impedance_at_angle;
use jpa_forge::noise::sql_temperature;
use jpa_forge::optimizer::{self, Objective, ParameterSpace};
use jpa_forge::{gain_metrics, gain_sweep, to_angular, transformation_ratio, NoiseDataset, NoiseSample};
use serde::Deserialize;
use serde_json::{json, Value};

use crate::config::{lookup_parameter, parameter_name, GridSection, RunConfig};
use crate::output::{num, opt_num, out_path, to_value, write_csv, RunReport};
use crate::{CliError, Format};

pub struct Context {
    pub out_dir: PathBuf,
    pub seed: u64,
    pub format: Format,
    pub started: Instant,
}

impl Context {
    fn finish(&self, mut report: RunReport, name: &str) -> Result<(), CliError> {
        report.duration_s = self.started.elapsed().as_secs_f64();
        let path = out_path(&self.out_dir, name);
        report.write(&path)?;
        log::info!("wrote {}", path.display());
        Ok(())
    }

    /// Writes a CSV, or returns the rows as JSON objects for `--format json`.
    fn table(
        &self,
        report: &mut RunReport,
        name: &str,
        header: &[&str],
        rows: Vec<Vec<String>>,
    ) -> Result<Option<Value>, CliError> {
        match self.format {
            Format::Csv => {
                let path = out_path(&self.out_dir, name);
                write_csv(&path, header, &rows)?;
                report.outputs.push(path.display().to_string());
                Ok(None)
            }
            Format::Json => Ok(Some(Value::Array(
                rows.into_iter()
                    .map(|r| {
                        Value::Object(
                            header
                                .iter()
                                .zip(r)
                                .map(|(h, v)| {
                                    let cell = if v.is_empty() {
                                        Value::Null
                                    } else {
                                        v.parse::<f64>()
                                            .ok()
                                            .and_then(|x| serde_json::Number::from_f64(x).map(Value::Number))
                                            .unwrap_or(Value::String(v))
                                    };
                                    (h.to_string(), cell)
                                })
                                .collect(),
                        )
                    })
                    .collect(),
            ))),
        }
    }
}

pub fn transformer(
    ctx: &Context,
    cfg: &RunConfig,
    fmin: Option<f64>,
    fmax: Option<f64>,
    points: Option<usize>,
) -> Result<(), CliError> {
    let spec = cfg.transformer_spec()?;
    let cutoff = spec.cutoff_hz();
    let section = cfg.transformer;
    let grid_cfg = GridSection {
        f_min_ghz: fmin.or(section.map(|s| s.f_min_ghz)).unwrap_or(0.01),
        f_max_ghz: fmax
            .or(section.map(|s| s.f_max_ghz))
            .unwrap_or(2.0 * cutoff / 1e9),
        points: points.or(section.map(|s| s.points)).unwrap_or(1001),
    };
    let grid = grid_cfg.frequencies()?;
    let ratios = transformation_ratio(&spec, &grid)?;

    let mut report = RunReport::new("transformer", ctx.seed);
    report.config = json!({ "environment": cfg.environment, "transformer": grid_cfg });

    let mut rows = Vec::with_capacity(ratios.len());
    let mut poles = 0usize;
    for p in &ratios {
        let f = p.omega / TAU;
        match &p.ratio {
            Ok(r) => rows.push(vec![num(f), num(r.z_ext.re), num(r.z_ext.im), num(r.magnitude), num(r.real)]),
            Err(e) => {
                poles += 1;
                report.warnings.push(format!("f = {} Hz: {e}", num(f)));
                rows.push(vec![num(f), String::new(), String::new(), String::new(), String::new()]);
            }
        }
    }
    for w in grid.windows(2) {
        let (a, b) = (spec.theta(w[0].omega()) / PI, spec.theta(w[1].omega()) / PI);
        // Odd multiples of π strictly between two grid points.
        let mut k = ((a + 1.0) / 2.0).floor() * 2.0 + 1.0;
        while k < b {
            if k > a {
                report.warnings.push(format!(
                    "transformer pole at {} Hz lies between grid points {} and {} Hz",
                    num(spec.omega_at(k * PI) / TAU),
                    num(w[0].hz()),
                    num(w[1].hz())
                ));
            }
            k += 2.0;
        }
    }

    let z_low = ruthroff_impedance_at_angle(&spec, 1e-4)?;
    let low_ratio = spec.z_high / z_low.norm();
    let table = ctx.table(
        &mut report,
        "transformer.csv",
        &["freq_hz", "re_zext_ohm", "im_zext_ohm", "ratio_mag", "ratio_re"],
        rows,
    )?;
    report.metrics = json!({
        "cutoff_frequency_hz": cutoff,
        "low_frequency_ratio": low_ratio,
        "points": ratios.len(),
        "pole_rows": poles,
    });
    if let Some(t) = table {
        report.metrics["curve"] = t;
    }
    let all_poles = poles == ratios.len();
    ctx.finish(report, "transformer.json")?;
    if all_poles {
        return Err(jpa_forge::Error::Pole {
            theta: spec.theta(grid[0].omega()),
            cutoff_hz: cutoff,
        }
        .into());
    }
    Ok(())
}

pub fn gain(ctx: &Context, cfg: &RunConfig) -> Result<(), CliError> {
    let amp = cfg.amplifier()?;
    let grid = cfg.grid()?;
    let band = cfg.band()?;
    let curve = gain_sweep(&amp, &grid)?;
    let Some((_, peak_db)) = jpa_forge::gain::peak_gain(&curve) else {
        return Err(curve
            .rejected
            .first()
            .map(|r| r.error.clone())
            .unwrap_or_else(|| jpa_forge::Error::Usage("empty gain curve".into()))
            .into());
    };
    let level = cfg.level_db().unwrap_or(peak_db - 3.0);
    let mut report = RunReport::new("gain", ctx.seed);
    let metrics = match gain_metrics(&curve, level, band) {
        Err(e @ jpa_forge::Error::NoBandwidth { .. }) => {
            report.warnings.push(e.to_string());
            let mut m = gain_metrics(&curve, peak_db - 3.0, band)?;
            m.level_db = level;
            m.bandwidth_at_level_hz = 0.0;
            m
        }
        other => other?,
    };
    report.config = to_value(&resolved(cfg, level));
    report.warnings.extend(metrics.warnings.iter().cloned());

    let mut rows = Vec::with_capacity(grid.len());
    let (mut ok, mut bad) = (curve.points.iter().peekable(), curve.rejected.iter().peekable());
    for w in &grid {
        let f = num(w.hz());
        if ok.peek().is_some_and(|p| p.omega == w.omega()) {
            let p = ok.next().expect("peeked");
            rows.push(vec![f, num(p.gain_db), num(p.g.re), num(p.g.im)]);
        } else if bad.peek().is_some_and(|r| r.omega == w.omega()) {
            let r = bad.next().expect("peeked");
            report.errors.push(format!("f = {f} Hz: {}", r.error));
            rows.push(vec![f, String::new(), String::new(), String::new()]);
        }
    }
    let table = ctx.table(&mut report, "gain.csv", &["freq_hz", "gain_db", "re_g", "im_g"], rows)?;
    report.metrics = to_value(&metrics);
    if let Some(t) = table {
        report.metrics["curve"] = t;
    }
    ctx.finish(report, "gain.json")
}

/// Config echo with the bandwidth level filled in.
fn resolved(cfg: &RunConfig, level_db: f64) -> RunConfig {
    let mut out = cfg.clone();
    if let Some(m) = out.metrics.as_mut() {
        m.level_db = Some(level_db);
    }
    out
}

#[derive(Debug, Deserialize)]
#[serde(deny_unknown_fields)]
struct NoiseRow {
    #[serde(rename = "temperature_K")]
    temperature: f64,
    #[serde(rename = "psd_K")]
    psd: f64,
    #[serde(default)]
    weight: Option<f64>,
}

#[derive(Debug, Default, Deserialize)]
#[serde(deny_unknown_fields)]
struct NoiseSidecar {
    freq_ghz: Option<f64>,
    psd_scale: Option<f64>,
}

pub fn noise_fit(
    ctx: &Context,
    datafile: &Path,
    freq_ghz: Option<f64>,
    psd_scale: Option<f64>,
) -> Result<(), CliError> {
    let sidecar_path = PathBuf::from(format!("{}.json", datafile.display()));
    let sidecar: NoiseSidecar = if sidecar_path.exists() {
        let text = std::fs::read_to_string(&sidecar_path)?;
        serde_json::from_str(&text)
            .map_err(|e| CliError::Config(format!("{}: {e}", sidecar_path.display())))?
    } else {
        NoiseSidecar::default()
    };
    let freq_ghz = freq_ghz.or(sidecar.freq_ghz).ok_or_else(|| {
        CliError::Config("signal frequency missing: pass --freq-ghz or add freq_ghz to the sidecar".into())
    })?;
    let scale = psd_scale.or(sidecar.psd_scale).unwrap_or(1.0);
    if !scale.is_finite() || scale <= 0.0 {
        return Err(CliError::Config(format!("psd scale must be positive, got {scale}")));
    }
    let omega = to_angular(freq_ghz * 1e9).map_err(|e| CliError::Config(format!("freq_ghz: {e}")))?;

    let mut reader = csv::ReaderBuilder::new()
        .trim(csv::Trim::All)
        .from_path(datafile)
        .map_err(|e| CliError::Config(format!("{}: {e}", datafile.display())))?;
    let mut samples = Vec::new();
    for (i, row) in reader.deserialize::<NoiseRow>().enumerate() {
        let r = row.map_err(|e| CliError::Config(format!("{}: row {}: {e}", datafile.display(), i + 1)))?;
        samples.push(NoiseSample {
            temperature: r.temperature,
            psd: r.psd * scale,
            weight: r.weight,
        });
    }
    let dataset = NoiseDataset::new(omega, samples).map_err(|e| match e {
        jpa_forge::Error::DegenerateFit(_) => CliError::Core(e),
        other => CliError::Config(other.to_string()),
    })?;
    let fit = jpa_forge::fit_noise(&dataset)?;

    let mut report = RunReport::new("noise-fit", ctx.seed);
    report.config = json!({
        "datafile": datafile.display().to_string(),
        "freq_ghz": freq_ghz,
        "psd_scale": scale,
        "samples": dataset.samples.len(),
    });
    report.warnings = fit.warnings.clone();
    let mut metrics = to_value(&fit);
    metrics["sql_temperature_k"] = json!(sql_temperature(omega));
    metrics["frequency_hz"] = json!(omega.hz());
    report.metrics = metrics;
    ctx.finish(report, "noise_fit.json")
}

pub fn optimize(ctx: &Context, cfg: &RunConfig) -> Result<(), CliError> {
    let amp = cfg.amplifier()?;
    let grid = cfg.grid()?;
    let band = cfg.band()?;
    let section = cfg.optimize_section()?;
    let space = ParameterSpace::new(section.bounds()?)?;
    let objective = Objective::new(section.target_gain_db, band, grid)?.with_ripple_limit(section.ripple_limit_db)?;
    let outcome = optimizer::optimize(&amp, &space, &objective, section.budget, ctx.seed)?;

    let names: Vec<(&str, f64)> = space.bounds().iter().map(|b| parameter_name(b.param)).collect();
    let mut header: Vec<&str> = vec!["eval"];
    header.extend(names.iter().map(|(n, _)| *n));
    header.extend([
        "score_hz",
        "feasible",
        "violation",
        "peak_gain_db",
        "ripple_db",
        "bandwidth_at_level_hz",
        "error",
    ]);
    let rows: Vec<Vec<String>> = outcome
        .trace
        .iter()
        .enumerate()
        .map(|(i, ev)| {
            let mut r = vec![i.to_string()];
            r.extend(ev.values.iter().zip(&names).map(|(v, (_, s))| num(v / s)));
            r.push(num(ev.score));
            r.push(ev.feasible.to_string());
            r.push(num(ev.violation));
            r.push(opt_num(ev.metrics.as_ref().map(|m| m.peak_gain_db)));
            r.push(opt_num(ev.metrics.as_ref().map(|m| m.ripple_db)));
            r.push(opt_num(ev.metrics.as_ref().map(|m| m.bandwidth_at_level_hz)));
            r.push(ev.error.clone().unwrap_or_default());
            r
        })
        .collect();

    let mut report = RunReport::new("optimize", ctx.seed);
    report.config = to_value(cfg);
    let table = ctx.table(&mut report, "optimize_trace.csv", &header, rows)?;
    let best_params: BTreeMap<&str, f64> = names
        .iter()
        .zip(&outcome.best.values)
        .map(|((n, s), v)| (*n, v / s))
        .collect();
    report.metrics = json!({
        "feasible": outcome.feasible,
        "score_hz": outcome.best.score,
        "violation": outcome.best.violation,
        "best_parameters": best_params,
        "gain_metrics": outcome.best.metrics,
        "evaluations": outcome.trace.len(),
        "budget": outcome.budget,
        "best_config": to_value(&cfg.with_amplifier(&outcome.best_config)),
    });
    if let Some(t) = table {
        report.metrics["trace"] = t;
    }
    if let Some(e) = &outcome.best.error {
        report.errors.push(e.clone());
    }
    ctx.finish(report, "optimize.json")?;
    if !outcome.feasible {
        return Err(CliError::Infeasible(format!(
            "best violation {} at {:?}",
            num(outcome.best.violation),
            best_params
        )));
    }
    Ok(())
}

pub fn sweep(ctx: &Context, cfg: &RunConfig) -> Result<(), CliError> {
    let amp = cfg.amplifier()?;
    let grid = cfg.grid()?;
    let band = cfg.band()?;
    let section = cfg.sweep_section()?;
    let (param, scale) = lookup_parameter(&section.parameter)?;
    let values: Vec<f64> = section.values.iter().map(|v| v * scale).collect();
    let rows = optimizer::sweep(&amp, param, &values, &grid, band, cfg.level_db())?;

    let mut report = RunReport::new("sweep", ctx.seed);
    report.config = to_value(cfg);
    let header = [
        section.parameter.as_str(),
        "peak_gain_db",
        "peak_frequency_hz",
        "bandwidth_3db_hz",
        "bandwidth_at_level_hz",
        "gbw_product_hz",
        "ripple_db",
        "profile_class",
        "rejected_points",
        "error",
    ];
    let mut table_rows = Vec::with_capacity(rows.len());
    let mut first_error = None;
    let mut any_ok = false;
    for (row, v) in rows.iter().zip(&section.values) {
        match &row.metrics {
            Ok(m) => {
                any_ok = true;
                table_rows.push(vec![
                    num(*v),
                    num(m.peak_gain_db),
                    num(m.peak_frequency_hz),
                    num(m.bandwidth_3db_hz),
                    num(m.bandwidth_at_level_hz),
                    num(m.gbw_product_hz),
                    num(m.ripple_db),
                    m.profile_class.map(|c| c.to_string()).unwrap_or_default(),
                    row.rejected.to_string(),
                    String::new(),
                ]);
            }
            Err(e) => {
                report.errors.push(format!("{} = {}: {e}", section.parameter, num(*v)));
                first_error.get_or_insert_with(|| e.clone());
                let mut r = vec![num(*v)];
                r.extend(std::iter::repeat_n(String::new(), 8));
                r.push(e.to_string());
                table_rows.push(r);
            }
        }
    }
    let table = ctx.table(&mut report, "sweep.csv", &header, table_rows)?;
    report.metrics = json!({
        "parameter": section.parameter,
        "rows": rows.iter().zip(&section.values).map(|(r, v)| json!({
            "value": v,
            "metrics": r.metrics.as_ref().ok(),
        })).collect::<Vec<_>>(),
    });
    if let Some(t) = table {
        report.metrics["table"] = t;
    }
    ctx.finish(report, "sweep.json")?;
    match (any_ok, first_error) {
        (false, Some(e)) => Err(e.into()),
        _ => Ok(()),
    }
}
