//! Run configuration: a TOML file layered over built-in defaults, then
//! `key=value` overrides addressed by dotted paths (`chain.j2=0.3`,
//! `pulse.1.phase=3.14159`).
//!
//! Frequencies in the file are in units of 2π·MHz and are converted to rad/μs
//! when the configuration is resolved.

use std::f64::consts::PI;
use std::path::Path;

use serde::{Deserialize, Serialize};
use thiserror::Error;
use toml::{Table, Value};

use crate::chain::{flip_resonance, ChainParams};
use crate::drive::Pulse;
use crate::integrator::StepPolicy;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum ConfigError {
    #[error("cannot read config {path}: {reason}")]
    Io { path: String, reason: String },
    #[error("malformed config: {0}")]
    Malformed(String),
    #[error("unknown config key: {0}")]
    UnknownKey(String),
    #[error("non-physical config value: {0}")]
    NonPhysical(String),
}

/// Chain parameters in 2π·MHz.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct ChainSection {
    pub larmor: Vec<f64>,
    pub j1: f64,
    pub j2: f64,
    pub rabi: f64,
}

impl Default for ChainSection {
    fn default() -> Self {
        Self {
            larmor: vec![100.0, 200.0, 400.0],
            j1: 5.0,
            j2: 0.2,
            rabi: 0.1,
        }
    }
}

/// One pulse. Either a symbolic transition (`from` state, `spin` to flip) or
/// an explicit `carrier` in 2π·MHz; an explicit carrier takes precedence.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct PulseSpec {
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub from: Option<usize>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub spin: Option<usize>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub carrier: Option<f64>,
    /// Radians.
    #[serde(default)]
    pub phase: f64,
    /// Rotation angle in units of π.
    pub angle_pi: f64,
}

impl PulseSpec {
    pub fn flip(from: usize, spin: usize, angle_pi: f64) -> Self {
        Self {
            from: Some(from),
            spin: Some(spin),
            carrier: None,
            phase: 0.0,
            angle_pi,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct PolicySection {
    pub points_per_period: u32,
    pub max_dt: f64,
    pub convergence_check: bool,
}

impl Default for PolicySection {
    fn default() -> Self {
        let p = StepPolicy::default();
        Self {
            points_per_period: p.points_per_period,
            max_dt: p.max_dt,
            convergence_check: p.convergence_check,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct OutputSection {
    /// Integrator steps between time-series samples.
    pub stride: usize,
}

impl Default for OutputSection {
    fn default() -> Self {
        Self { stride: 100 }
    }
}

/// Grid of J′/J ratios.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct SweepSpec {
    pub start: f64,
    pub stop: f64,
    pub step: f64,
    /// Sign of the target `(|0…0⟩ ± |1 0…0 1⟩)/√2`.
    pub target_sign: f64,
}

impl Default for SweepSpec {
    fn default() -> Self {
        Self {
            start: 0.0,
            stop: 0.2,
            step: 0.005,
            target_sign: -1.0,
        }
    }
}

impl SweepSpec {
    /// Grid points `start + i·step` up to `stop` (inclusive, with a little slack
    /// for rounding).
    pub fn grid(&self) -> Vec<f64> {
        let n = ((self.stop - self.start) / self.step + 1e-9).floor() as usize + 1;
        (0..n).map(|i| self.start + i as f64 * self.step).collect()
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct RunConfig {
    pub chain: ChainSection,
    pub policy: PolicySection,
    pub output: OutputSection,
    pub sweep: SweepSpec,
    pub pulse: Vec<PulseSpec>,
}

impl Default for RunConfig {
    fn default() -> Self {
        Self {
            chain: ChainSection::default(),
            policy: PolicySection::default(),
            output: OutputSection::default(),
            sweep: SweepSpec::default(),
            // π/2 on spin 0 from |000⟩, then π on spin 2 from |001⟩
            pulse: vec![PulseSpec::flip(0, 0, 0.5), PulseSpec::flip(1, 2, 1.0)],
        }
    }
}

/// A configuration turned into simulation inputs.
#[derive(Debug, Clone, PartialEq)]
pub struct Resolved {
    pub params: ChainParams,
    pub pulses: Vec<Pulse>,
    pub policy: StepPolicy,
}

impl RunConfig {
    pub fn validate(&self) -> Result<(), ConfigError> {
        self.resolve().map(|_| ())?;
        let s = &self.sweep;
        if s.step.is_nan() || s.step <= 0.0 || !s.start.is_finite() || !s.stop.is_finite() {
            return Err(ConfigError::NonPhysical(format!("sweep step {} must be positive", s.step)));
        }
        if s.start < 0.0 || s.stop < s.start {
            return Err(ConfigError::NonPhysical(format!(
                "sweep range [{}, {}] must be non-negative and ordered",
                s.start, s.stop
            )));
        }
        if s.target_sign.abs() != 1.0 {
            return Err(ConfigError::NonPhysical("sweep.target_sign must be 1 or -1".into()));
        }
        if self.output.stride == 0 {
            return Err(ConfigError::NonPhysical("output.stride must be at least 1".into()));
        }
        Ok(())
    }

    pub fn chain_params(&self) -> Result<ChainParams, ConfigError> {
        let c = &self.chain;
        ChainParams::from_mhz(&c.larmor, c.j1, c.j2, c.rabi)
            .map_err(|e| ConfigError::NonPhysical(e.to_string()))
    }

    /// Resolves carriers through the chain's resonances and builds the step policy.
    pub fn resolve(&self) -> Result<Resolved, ConfigError> {
        let params = self.chain_params()?;
        if self.pulse.is_empty() {
            return Err(ConfigError::NonPhysical("at least one pulse is required".into()));
        }
        let mut pulses = Vec::with_capacity(self.pulse.len());
        for (i, spec) in self.pulse.iter().enumerate() {
            let carrier = match (spec.carrier, spec.from, spec.spin) {
                (Some(mhz), _, _) => mhz * std::f64::consts::TAU,
                (None, Some(from), Some(spin)) => {
                    let x = params
                        .basis(from)
                        .map_err(|e| ConfigError::NonPhysical(format!("pulse {i}: {e}")))?;
                    flip_resonance(&params, x, spin)
                        .map_err(|e| ConfigError::NonPhysical(format!("pulse {i}: {e}")))?
                }
                _ => {
                    return Err(ConfigError::Malformed(format!(
                        "pulse {i} needs either `carrier` or both `from` and `spin`"
                    )))
                }
            };
            let pulse = Pulse::new(carrier, spec.phase, spec.angle_pi * PI)
                .map_err(|e| ConfigError::NonPhysical(format!("pulse {i}: {e}")))?;
            pulses.push(pulse);
        }
        let p = &self.policy;
        if p.points_per_period == 0 || p.max_dt.is_nan() || p.max_dt <= 0.0 {
            return Err(ConfigError::NonPhysical(
                "policy needs points_per_period >= 1 and max_dt > 0".into(),
            ));
        }
        let policy = StepPolicy {
            points_per_period: p.points_per_period,
            max_dt: p.max_dt,
            convergence_check: p.convergence_check,
            strict_norm: true,
        };
        Ok(Resolved {
            params,
            pulses,
            policy,
        })
    }

    /// The configuration as TOML text.
    pub fn to_toml(&self) -> String {
        toml::to_string(self).expect("config serializes")
    }

    /// Parses TOML text layered over the defaults.
    pub fn from_toml(text: &str, overrides: &[String]) -> Result<Self, ConfigError> {
        let file: Table = text
            .parse()
            .map_err(|e: toml::de::Error| ConfigError::Malformed(e.message().trim().to_string()))?;
        let mut base = Value::try_from(RunConfig::default()).expect("defaults serialize");
        merge(&mut base, Value::Table(file));
        for o in overrides {
            apply_override(&mut base, o)?;
        }
        let config: RunConfig = base.try_into().map_err(classify)?;
        config.validate()?;
        Ok(config)
    }
}

fn classify(e: toml::de::Error) -> ConfigError {
    let msg = e.message().trim().to_string();
    if msg.contains("unknown field") {
        ConfigError::UnknownKey(msg)
    } else {
        ConfigError::Malformed(msg)
    }
}

/// Tables merge key by key; anything else is replaced wholesale.
fn merge(base: &mut Value, over: Value) {
    match (base, over) {
        (Value::Table(b), Value::Table(o)) => {
            for (k, v) in o {
                match b.get_mut(&k) {
                    Some(existing) => merge(existing, v),
                    None => {
                        b.insert(k, v);
                    }
                }
            }
        }
        (b, o) => *b = o,
    }
}

fn parse_value(raw: &str) -> Value {
    let raw = raw.trim();
    format!("v = {raw}")
        .parse::<Table>()
        .ok()
        .and_then(|mut t| t.remove("v"))
        .unwrap_or_else(|| Value::String(raw.to_string()))
}

/// Applies one `dotted.key=value` override.
pub fn apply_override(root: &mut Value, assignment: &str) -> Result<(), ConfigError> {
    let (key, raw) = assignment
        .split_once('=')
        .ok_or_else(|| ConfigError::Malformed(format!("override `{assignment}` is not key=value")))?;
    let segments: Vec<&str> = key.trim().split('.').collect();
    if segments.iter().any(|s| s.is_empty()) {
        return Err(ConfigError::Malformed(format!("bad override key `{key}`")));
    }
    let mut node = root;
    for (depth, seg) in segments.iter().enumerate() {
        let last = depth + 1 == segments.len();
        node = match node {
            Value::Table(t) => {
                if last {
                    t.insert(seg.to_string(), parse_value(raw));
                    return Ok(());
                }
                t.entry(seg.to_string()).or_insert_with(|| Value::Table(Table::new()))
            }
            Value::Array(items) => {
                let idx: usize = seg
                    .parse()
                    .map_err(|_| ConfigError::Malformed(format!("`{seg}` in `{key}` is not an array index")))?;
                let len = items.len();
                let item = items.get_mut(idx).ok_or_else(|| {
                    ConfigError::Malformed(format!("index {idx} in `{key}` out of range (length {len})"))
                })?;
                if last {
                    *item = parse_value(raw);
                    return Ok(());
                }
                item
            }
            _ => {
                return Err(ConfigError::UnknownKey(format!(
                    "`{key}` descends into a scalar value"
                )))
            }
        };
    }
    Ok(())
}

/// Reads `path` (or the defaults when `None`) and applies `overrides`.
pub fn load_config(path: Option<&Path>, overrides: &[String]) -> Result<RunConfig, ConfigError> {
    let text = match path {
        Some(p) => std::fs::read_to_string(p).map_err(|e| ConfigError::Io {
            path: p.display().to_string(),
            reason: e.to_string(),
        })?,
        None => String::new(),
    };
    RunConfig::from_toml(&text, overrides)
}

#[cfg(test)]
mod tests {
    use super::*;
    use std::f64::consts::TAU;

    #[test]
    fn defaults_reproduce_reference_parameters() {
        let c = load_config(None, &[]).unwrap();
        let r = c.resolve().unwrap();
        assert_eq!(r.params, ChainParams::reference());
        assert!((r.pulses[0].carrier() - 105.2 * TAU).abs() < 1e-9);
        assert!((r.pulses[1].carrier() - 404.8 * TAU).abs() < 1e-9);
        assert!((r.pulses[0].angle() - PI / 2.0).abs() < 1e-15);
        assert_eq!(c.sweep.grid().len(), 41);
    }

    #[test]
    fn file_and_overrides_layer() {
        let text = "[chain]\nj2 = 0.3\n[output]\nstride = 7\n";
        let c = RunConfig::from_toml(text, &["pulse.1.phase=3.5".into(), "chain.rabi = 0.2".into()]).unwrap();
        assert_eq!(c.chain.j2, 0.3);
        assert_eq!(c.chain.j1, 5.0);
        assert_eq!(c.output.stride, 7);
        assert_eq!(c.pulse[1].phase, 3.5);
        assert_eq!(c.chain.rabi, 0.2);
    }

    #[test]
    fn explicit_carrier_overrides_transition() {
        let c = RunConfig::from_toml("", &["pulse.0.carrier=106".into()]).unwrap();
        let r = c.resolve().unwrap();
        assert!((r.pulses[0].carrier() - 106.0 * TAU).abs() < 1e-12);
    }

    #[test]
    fn distinct_diagnostics() {
        assert!(matches!(RunConfig::from_toml("chain = [", &[]), Err(ConfigError::Malformed(_))));
        assert!(matches!(RunConfig::from_toml("[chain]\nbogus = 1\n", &[]), Err(ConfigError::UnknownKey(_))));
        assert!(matches!(RunConfig::from_toml("", &["nope.x=1".into()]), Err(ConfigError::UnknownKey(_))));
        assert!(matches!(RunConfig::from_toml("", &["chain.rabi=-1".into()]), Err(ConfigError::NonPhysical(_))));
        assert!(matches!(
            RunConfig::from_toml("", &["chain.larmor=[100, 100, 400]".into()]),
            Err(ConfigError::NonPhysical(_))
        ));
        assert!(matches!(RunConfig::from_toml("", &["sweep.step=0".into()]), Err(ConfigError::NonPhysical(_))));
        assert!(matches!(RunConfig::from_toml("", &["chain.j1".into()]), Err(ConfigError::Malformed(_))));
        assert!(matches!(RunConfig::from_toml("", &["pulse.5.phase=1".into()]), Err(ConfigError::Malformed(_))));
        assert!(matches!(
            RunConfig::from_toml("[[pulse]]\nphase = 0.0\nangle_pi = 1.0\n", &[]),
            Err(ConfigError::Malformed(_))
        ));
        assert!(matches!(
            load_config(Some(Path::new("/nonexistent/cfg.toml")), &[]),
            Err(ConfigError::Io { .. })
        ));
    }

    #[test]
    fn serialized_config_round_trips() {
        let c = RunConfig::from_toml("", &["chain.j2=0.35".into(), "pulse.0.carrier=105".into()]).unwrap();
        let again = RunConfig::from_toml(&c.to_toml(), &[]).unwrap();
        assert_eq!(c, again);
    }

    #[test]
    fn pulse_list_replaced_by_file() {
        let text = "[[pulse]]\nfrom = 0\nspin = 1\nangle_pi = 1.0\n";
        let c = RunConfig::from_toml(text, &[]).unwrap();
        assert_eq!(c.pulse.len(), 1);
        assert_eq!(c.pulse[0].spin, Some(1));
    }
}
