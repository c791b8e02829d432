//! Run configuration file. Keys carry their unit; frequencies are cyclic GHz
//! and become angular only when converted to core types here.

use std::collections::BTreeMap;
use std::f64::consts::TAU;
use std::path::Path;

use jpa_forge::optimizer::{Bound, Param};
use jpa_forge::{
    AmplifierConfig, CoupledLineSpec, Element, EnvironmentChain, Frequency, OperatingPoint, SquidSpec,
};
use serde::{Deserialize, Serialize};

use crate::CliError;

const GHZ: f64 = 1e9;
const NANO: f64 = 1e-9;
const PICO: f64 = 1e-12;
const MICRO: f64 = 1e-6;
const MILLI: f64 = 1e-3;

#[derive(Debug, Clone, PartialEq, Default, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct RunConfig {
    #[serde(skip_serializing_if = "Option::is_none")]
    pub squid: Option<SquidSection>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub operating_point: Option<OperatingPointSection>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub environment: Option<EnvironmentSection>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub grid: Option<GridSection>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub metrics: Option<MetricsSection>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub transformer: Option<GridSection>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub sweep: Option<SweepSection>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub optimize: Option<OptimizeSection>,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SquidSection {
    pub critical_current_ua: f64,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct OperatingPointSection {
    pub phi_dc_over_phi0: f64,
    pub phi_ac_over_phi0: f64,
    pub f_pump_ghz: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct EnvironmentSection {
    pub source_impedance_ohm: f64,
    pub c_shunt_pf: f64,
    /// Ordered from the source toward the SQUID.
    #[serde(default)]
    pub elements: Vec<ElementEntry>,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(tag = "type", rename_all = "snake_case", deny_unknown_fields)]
pub enum ElementEntry {
    Ruthroff {
        z_odd_ohm: f64,
        z_even_ohm: f64,
        length_mm: f64,
        velocity_m_per_s: f64,
    },
    TransmissionLine {
        z_c_ohm: f64,
        length_mm: f64,
        velocity_m_per_s: f64,
    },
    SeriesInductor {
        inductance_nh: f64,
    },
    SeriesCapacitor {
        capacitance_pf: f64,
    },
    ShuntCapacitor {
        capacitance_pf: f64,
    },
    SeriesResonator {
        reactance_slope_nh: f64,
        center_ghz: f64,
    },
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct GridSection {
    pub f_min_ghz: f64,
    pub f_max_ghz: f64,
    pub points: usize,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct MetricsSection {
    /// Ripple band, GHz.
    pub band_ghz: [f64; 2],
    /// Level for the reported bandwidth; 3 dB below the peak when absent.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub level_db: Option<f64>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SweepSection {
    pub parameter: String,
    pub values: Vec<f64>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct OptimizeSection {
    pub target_gain_db: f64,
    #[serde(default = "default_ripple")]
    pub ripple_limit_db: f64,
    #[serde(default = "default_budget")]
    pub budget: usize,
    /// Parameter name → [lower, upper] in the name's unit.
    pub bounds: BTreeMap<String, [f64; 2]>,
}

fn default_ripple() -> f64 {
    jpa_forge::optimizer::DEFAULT_RIPPLE_LIMIT_DB
}

fn default_budget() -> usize {
    jpa_forge::optimizer::DEFAULT_BUDGET
}

/// Config-file parameter names with their unit and factor to SI.
pub const PARAMETERS: [(&str, Param, f64); 6] = [
    ("z_odd_ohm", Param::ZOdd, 1.0),
    ("reactance_slope_nh", Param::ReactanceSlope, NANO),
    ("phi_dc_over_phi0", Param::PhiDc, 1.0),
    ("phi_ac_over_phi0", Param::PhiAc, 1.0),
    ("f_pump_ghz", Param::PumpOmega, TAU * GHZ),
    ("c_shunt_pf", Param::ShuntCapacitance, PICO),
];

pub fn lookup_parameter(name: &str) -> Result<(Param, f64), CliError> {
    PARAMETERS
        .iter()
        .find(|(n, _, _)| *n == name)
        .map(|(_, p, s)| (*p, *s))
        .ok_or_else(|| {
            let known: Vec<_> = PARAMETERS.iter().map(|(n, _, _)| *n).collect();
            CliError::Config(format!("unknown parameter `{name}` (known: {})", known.join(", ")))
        })
}

pub fn parameter_name(param: Param) -> (&'static str, f64) {
    PARAMETERS
        .iter()
        .find(|(_, p, _)| *p == param)
        .map(|(n, _, s)| (*n, *s))
        .expect("every parameter has a config name")
}

fn require<'a, T>(section: &'a Option<T>, name: &str) -> Result<&'a T, CliError> {
    section
        .as_ref()
        .ok_or_else(|| CliError::Config(format!("missing section [{name}]")))
}

impl RunConfig {
    pub fn load(path: &Path) -> Result<Self, CliError> {
        let text = std::fs::read_to_string(path)
            .map_err(|e| CliError::Config(format!("cannot read {}: {e}", path.display())))?;
        Self::parse(&text).map_err(|e| match e {
            CliError::Config(m) => CliError::Config(format!("{}: {m}", path.display())),
            other => other,
        })
    }

    pub fn parse(text: &str) -> Result<Self, CliError> {
        toml::from_str(text).map_err(|e| CliError::Config(e.to_string()))
    }

    pub fn amplifier(&self) -> Result<AmplifierConfig, CliError> {
        let squid = require(&self.squid, "squid")?;
        let op = require(&self.operating_point, "operating_point")?;
        let env = require(&self.environment, "environment")?;
        let amp = AmplifierConfig {
            squid: SquidSpec::new(squid.critical_current_ua * MICRO)?,
            operating_point: OperatingPoint::new(op.phi_dc_over_phi0, op.phi_ac_over_phi0, TAU * (op.f_pump_ghz * GHZ))?,
            environment: env.chain()?,
        };
        amp.validate()?;
        Ok(amp)
    }

    /// Replaces the amplifier sections with `amp`, in file units.
    pub fn with_amplifier(&self, amp: &AmplifierConfig) -> Self {
        let mut out = self.clone();
        out.squid = Some(SquidSection {
            critical_current_ua: amp.squid.critical_current / MICRO,
        });
        out.operating_point = Some(OperatingPointSection {
            phi_dc_over_phi0: amp.operating_point.phi_dc,
            phi_ac_over_phi0: amp.operating_point.phi_ac,
            f_pump_ghz: amp.operating_point.pump_omega / TAU / GHZ,
        });
        out.environment = Some(EnvironmentSection::from_chain(&amp.environment));
        out
    }

    pub fn transformer_spec(&self) -> Result<CoupledLineSpec, CliError> {
        let env = require(&self.environment, "environment")?;
        env.chain()?
            .transformer()
            .copied()
            .ok_or_else(|| CliError::Config("[environment] has no element with type = \"ruthroff\"".into()))
    }

    pub fn grid(&self) -> Result<Vec<Frequency>, CliError> {
        require(&self.grid, "grid")?.frequencies()
    }

    pub fn band(&self) -> Result<(Frequency, Frequency), CliError> {
        let m = require(&self.metrics, "metrics")?;
        Ok((ghz(m.band_ghz[0], "band_ghz")?, ghz(m.band_ghz[1], "band_ghz")?))
    }

    pub fn level_db(&self) -> Option<f64> {
        self.metrics.and_then(|m| m.level_db)
    }

    pub fn sweep_section(&self) -> Result<&SweepSection, CliError> {
        require(&self.sweep, "sweep")
    }

    pub fn optimize_section(&self) -> Result<&OptimizeSection, CliError> {
        require(&self.optimize, "optimize")
    }
}

fn ghz(v: f64, key: &str) -> Result<Frequency, CliError> {
    jpa_forge::to_angular(v * GHZ).map_err(|e| CliError::Config(format!("{key}: {e}")))
}

impl GridSection {
    pub fn frequencies(&self) -> Result<Vec<Frequency>, CliError> {
        if self.points == 0 {
            return Err(CliError::Config("points must be at least 1".into()));
        }
        if self.points > 1 && self.f_max_ghz.partial_cmp(&self.f_min_ghz) != Some(std::cmp::Ordering::Greater) {
            return Err(CliError::Config("f_max_ghz must exceed f_min_ghz".into()));
        }
        ghz(self.f_min_ghz, "f_min_ghz")?;
        ghz(self.f_max_ghz, "f_max_ghz")?;
        Ok(jpa_forge::reference::uniform_grid(
            self.f_min_ghz * GHZ,
            self.f_max_ghz * GHZ,
            self.points,
        ))
    }
}

impl EnvironmentSection {
    pub fn chain(&self) -> Result<EnvironmentChain, CliError> {
        let z0 = self.source_impedance_ohm;
        let mut chain = EnvironmentChain::new(z0).with_shunt_capacitance(self.c_shunt_pf * PICO);
        for e in &self.elements {
            chain = chain.with_element(match *e {
                ElementEntry::Ruthroff {
                    z_odd_ohm,
                    z_even_ohm,
                    length_mm,
                    velocity_m_per_s,
                } => Element::Ruthroff(CoupledLineSpec::new(
                    z0,
                    z_odd_ohm,
                    z_even_ohm,
                    length_mm * MILLI,
                    velocity_m_per_s,
                )?),
                ElementEntry::TransmissionLine {
                    z_c_ohm,
                    length_mm,
                    velocity_m_per_s,
                } => Element::TransmissionLine {
                    z_c: z_c_ohm,
                    velocity: velocity_m_per_s,
                    length: length_mm * MILLI,
                },
                ElementEntry::SeriesInductor { inductance_nh } => Element::SeriesInductor {
                    inductance: inductance_nh * NANO,
                },
                ElementEntry::SeriesCapacitor { capacitance_pf } => Element::SeriesCapacitor {
                    capacitance: capacitance_pf * PICO,
                },
                ElementEntry::ShuntCapacitor { capacitance_pf } => Element::ShuntCapacitor {
                    capacitance: capacitance_pf * PICO,
                },
                ElementEntry::SeriesResonator {
                    reactance_slope_nh,
                    center_ghz,
                } => Element::SeriesResonator {
                    slope: reactance_slope_nh * NANO,
                    center: TAU * (center_ghz * GHZ),
                },
            });
        }
        chain.validate()?;
        Ok(chain)
    }

    pub fn from_chain(chain: &EnvironmentChain) -> Self {
        let elements = chain
            .elements
            .iter()
            .map(|e| match *e {
                Element::Ruthroff(s) => ElementEntry::Ruthroff {
                    z_odd_ohm: s.z_odd,
                    z_even_ohm: s.z_even,
                    length_mm: s.length / MILLI,
                    velocity_m_per_s: s.velocity,
                },
                Element::TransmissionLine { z_c, velocity, length } => ElementEntry::TransmissionLine {
                    z_c_ohm: z_c,
                    length_mm: length / MILLI,
                    velocity_m_per_s: velocity,
                },
                Element::SeriesInductor { inductance } => ElementEntry::SeriesInductor {
                    inductance_nh: inductance / NANO,
                },
                Element::SeriesCapacitor { capacitance } => ElementEntry::SeriesCapacitor {
                    capacitance_pf: capacitance / PICO,
                },
                Element::ShuntCapacitor { capacitance } => ElementEntry::ShuntCapacitor {
                    capacitance_pf: capacitance / PICO,
                },
                Element::SeriesResonator { slope, center } => ElementEntry::SeriesResonator {
                    reactance_slope_nh: slope / NANO,
                    center_ghz: center / TAU / GHZ,
                },
            })
            .collect();
        Self {
            source_impedance_ohm: chain.source_impedance,
            c_shunt_pf: chain.shunt_capacitance / PICO,
            elements,
        }
    }
}

impl OptimizeSection {
    pub fn bounds(&self) -> Result<Vec<Bound>, CliError> {
        self.bounds
            .iter()
            .map(|(name, [lo, hi])| {
                let (param, scale) = lookup_parameter(name)?;
                Ok(Bound {
                    param,
                    lower: lo * scale,
                    upper: hi * scale,
                })
            })
            .collect()
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    const SAMPLE: &str = r#"
[squid]
critical_current_ua = 4.0

[operating_point]
phi_dc_over_phi0 = 0.19
phi_ac_over_phi0 = 0.25
f_pump_ghz = 12.0

[environment]
source_impedance_ohm = 50.0
c_shunt_pf = 7.036

[[environment.elements]]
type = "ruthroff"
z_odd_ohm = 10.0
z_even_ohm = 7140.0
length_mm = 0.5
velocity_m_per_s = 1.2e8

[[environment.elements]]
type = "series_resonator"
reactance_slope_nh = 1.6
center_ghz = 6.0
"#;

    #[test]
    fn parses_and_converts_units() {
        let cfg = RunConfig::parse(SAMPLE).unwrap();
        let amp = cfg.amplifier().unwrap();
        assert!((amp.operating_point.pump_omega - TAU * 12e9).abs() < 1.0);
        assert!((amp.environment.shunt_capacitance - 7.036e-12).abs() < 1e-24);
        assert_eq!(amp.environment.transformer().unwrap().z_high, 50.0);
        let back = cfg.with_amplifier(&amp);
        let again = back.amplifier().unwrap();
        assert_eq!(again.environment.elements.len(), 2);
        assert!((again.operating_point.pump_omega - amp.operating_point.pump_omega).abs() < 1e-3);
    }

    #[test]
    fn unknown_key_rejected() {
        let text = SAMPLE.replace("f_pump_ghz", "f_pump");
        let err = RunConfig::parse(&text).unwrap_err();
        assert!(err.to_string().contains("f_pump"), "{err}");
    }

    #[test]
    fn unknown_element_key_rejected() {
        let text = SAMPLE.replace("center_ghz", "center_hz");
        assert!(RunConfig::parse(&text).is_err());
    }

    #[test]
    fn missing_key_named_in_error() {
        let text = SAMPLE.replace("phi_ac_over_phi0 = 0.25\n", "");
        let err = RunConfig::parse(&text).unwrap_err();
        assert!(err.to_string().contains("phi_ac_over_phi0"), "{err}");
    }

    #[test]
    fn missing_section_named() {
        let cfg = RunConfig::parse("[squid]\ncritical_current_ua = 4.0\n").unwrap();
        let err = cfg.amplifier().unwrap_err();
        assert!(err.to_string().contains("operating_point"));
    }

    #[test]
    fn parameter_table_is_total() {
        for p in Param::ALL {
            let (name, scale) = parameter_name(p);
            assert_eq!(lookup_parameter(name).unwrap(), (p, scale));
        }
        assert!(lookup_parameter("z_odd").is_err());
    }
}
