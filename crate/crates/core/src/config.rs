//! JSON configuration with documented defaults, dotted-key overrides and
//! whole-config validation.

use std::fmt;
use std::path::{Path, PathBuf};
use std::sync::Arc;

use nalgebra::Vector3;
use serde::{Deserialize, Deserializer, Serialize, Serializer};
use serde_json::Value;

use crate::airframe::{load_airframe, Airframe};
use crate::engagement::{EngagementConfig, LaunchConfig};
use crate::error::{Error, Result};
use crate::guidance::{AutopilotConfig, GuidanceConfig, LosSource};
use crate::montecarlo::{linspace, SweepConfig};
use crate::observer::{validate_gains, ObserverConfig, ObserverGains};
use crate::seeker::SeekerConfig;
use crate::targets::{derive_seed, sample_phase, TargetConfig, TargetKind};

/// Environment variable supplying the master seed.
pub const SEED_ENV: &str = "PGS_SEED";

/// A number, or the string `"auto"` for a derived value.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum AutoValue {
    Auto,
    Value(f64),
}

impl Serialize for AutoValue {
    fn serialize<S: Serializer>(&self, s: S) -> std::result::Result<S::Ok, S::Error> {
        match self {
            AutoValue::Auto => s.serialize_str("auto"),
            AutoValue::Value(v) => s.serialize_f64(*v),
        }
    }
}

impl<'de> Deserialize<'de> for AutoValue {
    fn deserialize<D: Deserializer<'de>>(d: D) -> std::result::Result<Self, D::Error> {
        #[derive(Deserialize)]
        #[serde(untagged)]
        enum Raw {
            Num(f64),
            Str(String),
        }
        match Raw::deserialize(d)? {
            Raw::Num(v) => Ok(AutoValue::Value(v)),
            Raw::Str(s) if s == "auto" => Ok(AutoValue::Auto),
            Raw::Str(s) => Err(serde::de::Error::custom(format!(
                "expected a number or \"auto\", found \"{s}\""
            ))),
        }
    }
}

impl fmt::Display for AutoValue {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            AutoValue::Auto => f.write_str("auto"),
            AutoValue::Value(v) => write!(f, "{v}"),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct ObserverSection {
    pub k1: f64,
    pub k2: f64,
    pub k3: f64,
    pub k4: f64,
    pub epsilon: f64,
    /// Prediction horizon; `auto` uses the seeker lag.
    pub delta: AutoValue,
    pub paper_literal_step1: bool,
}

impl Default for ObserverSection {
    fn default() -> Self {
        Self {
            k1: 4.0,
            k2: 6.0,
            k3: 4.0,
            k4: 1.0,
            epsilon: 0.05,
            delta: AutoValue::Auto,
            paper_literal_step1: false,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct SeekerSection {
    pub lag_time_constant: f64,
}

impl Default for SeekerSection {
    fn default() -> Self {
        Self {
            lag_time_constant: 0.2,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct GuidanceSection {
    pub nav_ratio: f64,
    pub source: LosSource,
    pub warmup: f64,
    pub gravity_compensation: bool,
    pub blind_range: f64,
}

impl Default for GuidanceSection {
    fn default() -> Self {
        let g = GuidanceConfig::default();
        Self {
            nav_ratio: g.nav_ratio,
            source: g.source,
            warmup: g.warmup,
            gravity_compensation: g.gravity_compensation,
            blind_range: g.blind_range,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct AutopilotSection {
    pub actuator_time_constant: f64,
    pub deflection_limit: f64,
    pub accel_feedback: f64,
}

impl Default for AutopilotSection {
    fn default() -> Self {
        let a = AutopilotConfig::default();
        Self {
            actuator_time_constant: a.actuator_time_constant,
            deflection_limit: a.deflection_limit,
            accel_feedback: a.accel_feedback,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct TargetSection {
    pub kind: TargetKind,
    pub position: [f64; 3],
    pub speed: f64,
    pub weave_amplitude: f64,
    pub weave_frequency: f64,
    /// Weave phase in rad; `auto` draws it from the master seed.
    pub phase: AutoValue,
}

impl Default for TargetSection {
    fn default() -> Self {
        let t = TargetConfig::default();
        Self {
            kind: t.kind,
            position: t.initial_position.into(),
            speed: t.speed,
            weave_amplitude: t.weave_amplitude,
            weave_frequency: t.weave_frequency,
            phase: AutoValue::Value(t.phase),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct EngagementSection {
    pub dt: f64,
    pub max_time: f64,
    pub launch_speed: f64,
    pub launch_elevation_deg: f64,
}

impl Default for EngagementSection {
    fn default() -> Self {
        let l = LaunchConfig::default();
        Self {
            dt: 1e-3,
            max_time: 60.0,
            launch_speed: l.speed,
            launch_elevation_deg: l.elevation.to_degrees(),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize, Default)]
#[serde(default, deny_unknown_fields)]
pub struct AirframeSection {
    /// Airframe dataset file; `null` selects the embedded generic airframe.
    pub dataset: Option<PathBuf>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct SweepSection {
    pub delays: Vec<f64>,
    pub samples_per_delay: usize,
    pub sources: Vec<LosSource>,
}

impl Default for SweepSection {
    fn default() -> Self {
        let s = SweepConfig::default();
        Self {
            delays: s.delays,
            samples_per_delay: s.samples_per_delay,
            sources: s.sources,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize, Default)]
#[serde(default, deny_unknown_fields)]
pub struct SimConfig {
    pub seed: u64,
    pub observer: ObserverSection,
    pub seeker: SeekerSection,
    pub guidance: GuidanceSection,
    pub autopilot: AutopilotSection,
    pub target: TargetSection,
    pub engagement: EngagementSection,
    pub airframe: AirframeSection,
    pub sweep: SweepSection,
}

fn merge(base: &mut Value, patch: Value) {
    match (base, patch) {
        (Value::Object(b), Value::Object(p)) => {
            for (k, v) in p {
                match b.get_mut(&k) {
                    Some(slot) if slot.is_object() && v.is_object() => merge(slot, v),
                    _ => {
                        b.insert(k, v);
                    }
                }
            }
        }
        (b, p) => *b = p,
    }
}

/// Parses the right-hand side of `KEY=VALUE`: JSON if it parses, otherwise
/// a bare string.
fn override_value(raw: &str) -> Value {
    serde_json::from_str(raw).unwrap_or_else(|_| Value::String(raw.to_string()))
}

/// Applies one `a.b.c=value` override. The key must already exist in the
/// fully defaulted config.
pub fn apply_override(doc: &mut Value, assignment: &str) -> Result<()> {
    let (key, raw) = assignment
        .split_once('=')
        .ok_or_else(|| Error::invalid("--set", format!("`{assignment}` is not KEY=VALUE")))?;
    let key = key.trim();
    let mut slot = &mut *doc;
    for part in key.split('.') {
        slot = match slot {
            Value::Object(map) => map
                .get_mut(part)
                .ok_or_else(|| Error::UnknownKey(key.to_string()))?,
            _ => return Err(Error::UnknownKey(key.to_string())),
        };
    }
    *slot = override_value(raw);
    Ok(())
}

fn deserialize(doc: Value) -> Result<SimConfig> {
    serde_json::from_value(doc).map_err(|e| {
        let msg = e.to_string();
        match msg.strip_prefix("unknown field `") {
            Some(rest) => Error::UnknownKey(rest.split('`').next().unwrap_or(rest).to_string()),
            None => Error::Json(e),
        }
    })
}

impl SimConfig {
    /// Defaults, then the file, then each override in order.
    pub fn resolve(file: Option<&Path>, overrides: &[String]) -> Result<Self> {
        let mut doc = serde_json::to_value(SimConfig::default())?;
        let mut base_dir = None;
        if let Some(path) = file {
            let text = std::fs::read_to_string(path)?;
            let patch: Value = serde_json::from_str(&text)?;
            if !patch.is_object() {
                return Err(Error::invalid("config", "top level must be a JSON object"));
            }
            // unknown keys in the file are caught by deny_unknown_fields
            deserialize(patch.clone())?;
            merge(&mut doc, patch);
            base_dir = path.parent().map(Path::to_path_buf);
        }
        for o in overrides {
            apply_override(&mut doc, o)?;
        }
        let mut cfg = deserialize(doc)?;
        if let (Some(dir), Some(ds)) = (base_dir, cfg.airframe.dataset.as_mut()) {
            if ds.is_relative() && !ds.as_os_str().is_empty() {
                *ds = dir.join(&*ds);
            }
        }
        Ok(cfg)
    }

    pub fn from_json_str(text: &str) -> Result<Self> {
        let mut doc = serde_json::to_value(SimConfig::default())?;
        let patch: Value = serde_json::from_str(text)?;
        deserialize(patch.clone())?;
        merge(&mut doc, patch);
        deserialize(doc)
    }

    pub fn to_json_pretty(&self) -> Result<String> {
        Ok(serde_json::to_string_pretty(self)?)
    }

    /// Every violation in the config, not just the first.
    pub fn validate(&self) -> Vec<String> {
        let mut errs = Vec::new();
        let o = &self.observer;
        if ![o.k1, o.k2, o.k3, o.k4].iter().all(|k| k.is_finite()) {
            errs.push("observer.k1..k4 must be finite".to_string());
        } else if !validate_gains(o.k1, o.k2, o.k3, o.k4) {
            errs.push(format!(
                "observer gains ({}, {}, {}, {}) fail the Hurwitz test: need k1 > 0, k4 > 0, k1*k2 - k3 > 0 and (k1*k2 - k3)*k3 - k1^2*k4 > 0",
                o.k1, o.k2, o.k3, o.k4
            ));
        }
        if !(o.epsilon > 0.0 && o.epsilon.is_finite()) {
            errs.push("observer.epsilon must be > 0".to_string());
        }
        if let AutoValue::Value(d) = o.delta {
            if !(d >= 0.0 && d.is_finite()) {
                errs.push("observer.delta must be >= 0 or \"auto\"".to_string());
            }
        }
        let lag = self.seeker.lag_time_constant;
        if !(lag >= 0.0 && lag.is_finite()) {
            errs.push("seeker.lag_time_constant must be >= 0".to_string());
        }
        let e = &self.engagement;
        if !(e.dt > 0.0 && e.dt.is_finite()) {
            errs.push("engagement.dt must be > 0".to_string());
        } else if o.epsilon > 0.0 && e.dt > o.epsilon / 4.0 {
            errs.push(format!(
                "engagement.dt = {} exceeds observer.epsilon/4 = {}",
                e.dt,
                o.epsilon / 4.0
            ));
        }
        if !(e.max_time > 0.0 && e.max_time.is_finite()) {
            errs.push("engagement.max_time must be > 0".to_string());
        }
        if !(e.launch_speed > 0.0 && e.launch_speed.is_finite()) {
            errs.push("engagement.launch_speed must be > 0".to_string());
        }
        if !(e.launch_elevation_deg.abs() < 90.0) {
            errs.push("engagement.launch_elevation_deg must be within (-90, 90)".to_string());
        }
        if let AutoValue::Value(p) = self.target.phase {
            if !p.is_finite() {
                errs.push("target.phase must be finite or \"auto\"".to_string());
            }
        }
        errs.extend(self.guidance_config().validate());
        errs.extend(self.autopilot_config().validate());
        errs.extend(self.target_config().validate());
        errs.extend(self.sweep_config().validate());
        if let Some(path) = &self.airframe.dataset {
            if let Err(e) = load_airframe(path) {
                errs.push(format!("airframe.dataset {}: {e}", path.display()));
            }
        }
        errs
    }

    pub fn horizon(&self) -> f64 {
        match self.observer.delta {
            AutoValue::Auto => self.seeker.lag_time_constant,
            AutoValue::Value(d) => d,
        }
    }

    pub fn guidance_config(&self) -> GuidanceConfig {
        let g = &self.guidance;
        GuidanceConfig {
            nav_ratio: g.nav_ratio,
            source: g.source,
            warmup: g.warmup,
            gravity_compensation: g.gravity_compensation,
            blind_range: g.blind_range,
        }
    }

    pub fn autopilot_config(&self) -> AutopilotConfig {
        let a = &self.autopilot;
        AutopilotConfig {
            actuator_time_constant: a.actuator_time_constant,
            deflection_limit: a.deflection_limit,
            accel_feedback: a.accel_feedback,
        }
    }

    pub fn target_config(&self) -> TargetConfig {
        let t = &self.target;
        TargetConfig {
            kind: t.kind,
            initial_position: Vector3::from(t.position),
            speed: t.speed,
            weave_amplitude: t.weave_amplitude,
            weave_frequency: t.weave_frequency,
            phase: match t.phase {
                AutoValue::Auto => sample_phase(derive_seed(self.seed, 0)),
                AutoValue::Value(p) => p,
            },
        }
    }

    pub fn sweep_config(&self) -> SweepConfig {
        SweepConfig {
            delays: self.sweep.delays.clone(),
            samples_per_delay: self.sweep.samples_per_delay,
            master_seed: self.seed,
            sources: self.sweep.sources.clone(),
        }
    }

    pub fn load_airframe(&self) -> Result<Airframe> {
        match &self.airframe.dataset {
            Some(path) => load_airframe(path),
            None => Ok(Airframe::generic()),
        }
    }

    /// Validated engagement configuration.
    pub fn engagement_config(&self) -> Result<EngagementConfig> {
        let errs = self.validate();
        if !errs.is_empty() {
            return Err(Error::Validation(errs));
        }
        let o = &self.observer;
        let gains = ObserverGains::new(o.k1, o.k2, o.k3, o.k4)?;
        let observer = ObserverConfig::new(gains, o.epsilon, self.horizon())?
            .with_paper_literal_step1(o.paper_literal_step1);
        let e = &self.engagement;
        Ok(EngagementConfig {
            dt: e.dt,
            max_time: e.max_time,
            launch: LaunchConfig {
                speed: e.launch_speed,
                elevation: e.launch_elevation_deg.to_radians(),
                position: Vector3::zeros(),
            },
            observer,
            seeker: SeekerConfig::new(self.seeker.lag_time_constant)?,
            guidance: self.guidance_config(),
            autopilot: self.autopilot_config(),
            target: self.target_config(),
            airframe: Arc::new(self.load_airframe()?),
        })
    }
}

/// Master seed precedence: config file, then `PGS_SEED`, then `--seed`.
pub fn resolve_seed(file_seed: u64, env: Option<&str>, flag: Option<u64>) -> Result<u64> {
    if let Some(s) = flag {
        return Ok(s);
    }
    match env.map(str::trim).filter(|s| !s.is_empty()) {
        Some(s) => s
            .parse()
            .map_err(|_| Error::invalid(SEED_ENV, format!("`{s}` is not an unsigned integer"))),
        None => Ok(file_seed),
    }
}

/// Default sweep delays, for documentation and tests.
pub fn default_delays() -> Vec<f64> {
    linspace(0.025, 0.35, 8)
}
