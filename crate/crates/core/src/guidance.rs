//! Proportional navigation and the fin-deflection autopilot.

use std::fmt;
use std::str::FromStr;

use nalgebra::Vector3;
use serde::{Deserialize, Serialize};

use crate::airframe::VehicleState;
use crate::error::{Error, Result};
use crate::seeker::lag_update;
use crate::targets::PointState;

/// Which LOS-rate signal drives the guidance law.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum LosSource {
    True,
    Delayed,
    Predicted,
}

impl LosSource {
    pub fn as_str(&self) -> &'static str {
        match self {
            LosSource::True => "true",
            LosSource::Delayed => "delayed",
            LosSource::Predicted => "predicted",
        }
    }
}

impl fmt::Display for LosSource {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

impl FromStr for LosSource {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "true" => Ok(LosSource::True),
            "delayed" => Ok(LosSource::Delayed),
            "predicted" => Ok(LosSource::Predicted),
            other => Err(Error::invalid(
                "guidance.source",
                format!("`{other}` is not one of true, delayed, predicted"),
            )),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct GuidanceConfig {
    pub nav_ratio: f64,
    pub source: LosSource,
    /// Seconds during which a `Predicted` source falls back to the delayed signal.
    pub warmup: f64,
    /// Adds the gravity bias to the pitch-plane demand.
    pub gravity_compensation: bool,
    /// Range inside which the seeker is blind and the last command is held, m.
    pub blind_range: f64,
}

impl GuidanceConfig {
    pub fn validate(&self) -> Vec<String> {
        let mut errs = Vec::new();
        if !(self.nav_ratio > 0.0 && self.nav_ratio.is_finite()) {
            errs.push("guidance.nav_ratio must be > 0".to_string());
        }
        if !(self.warmup >= 0.0 && self.warmup.is_finite()) {
            errs.push("guidance.warmup must be >= 0".to_string());
        }
        if !(self.blind_range >= 0.0 && self.blind_range.is_finite()) {
            errs.push("guidance.blind_range must be >= 0".to_string());
        }
        errs
    }
}

impl Default for GuidanceConfig {
    fn default() -> Self {
        Self {
            nav_ratio: 4.0,
            source: LosSource::Predicted,
            warmup: 2.0,
            gravity_compensation: true,
            blind_range: 200.0,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct AutopilotConfig {
    pub actuator_time_constant: f64,
    pub deflection_limit: f64,
    /// Proportional correction on the acceleration error, dimensionless.
    pub accel_feedback: f64,
}

impl AutopilotConfig {
    pub fn validate(&self) -> Vec<String> {
        let mut errs = Vec::new();
        if !(self.actuator_time_constant > 0.0 && self.actuator_time_constant.is_finite()) {
            errs.push("autopilot.actuator_time_constant must be > 0".to_string());
        }
        if !(self.deflection_limit > 0.0 && self.deflection_limit.is_finite()) {
            errs.push("autopilot.deflection_limit must be > 0".to_string());
        }
        if !(self.accel_feedback >= 0.0 && self.accel_feedback.is_finite()) {
            errs.push("autopilot.accel_feedback must be >= 0".to_string());
        }
        errs
    }
}

impl Default for AutopilotConfig {
    fn default() -> Self {
        Self {
            actuator_time_constant: 0.02,
            deflection_limit: 0.52,
            accel_feedback: 0.0,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Default)]
pub struct GuidanceCommand {
    /// Lateral acceleration demand in the LOS frame `[elevation, azimuth]`, m/s^2.
    pub accel_cmd: [f64; 2],
    /// Fin deflections `[pitch, yaw]`, rad.
    pub deflection_cmd: [f64; 2],
}

/// `-(R . Rdot) / |R|`, positive while closing.
pub fn closing_velocity(missile: &VehicleState, target: &PointState) -> Result<f64> {
    closing_velocity_rel(
        &(target.position - missile.position),
        &(target.velocity - missile.velocity),
    )
}

pub fn closing_velocity_rel(r: &Vector3<f64>, rdot: &Vector3<f64>) -> Result<f64> {
    let range = r.norm();
    if !(range > 0.0) {
        return Err(Error::ZeroRange);
    }
    Ok(-r.dot(rdot) / range)
}

pub fn pn_command(los_rate: [f64; 2], vc: f64, config: &GuidanceConfig) -> [f64; 2] {
    let k = config.nav_ratio * vc;
    [k * los_rate[0], k * los_rate[1]]
}

pub fn select_source(
    t: f64,
    config: &GuidanceConfig,
    true_rate: [f64; 2],
    delayed_rate: [f64; 2],
    predicted_rate: [f64; 2],
) -> [f64; 2] {
    match config.source {
        LosSource::True => true_rate,
        LosSource::Delayed => delayed_rate,
        LosSource::Predicted if t < config.warmup => delayed_rate,
        LosSource::Predicted => predicted_rate,
    }
}

/// Advances the fin deflections one step.
///
/// The demand `gain * (cmd + accel_feedback * (cmd - achieved))` is clamped
/// to the deflection limit; the fins follow it through a first-order actuator
/// lag. `accel_to_deflection_gain` is the inverse of the trimmed
/// acceleration-per-radian at the current flight condition.
pub fn autopilot_step(
    cmd_accel: [f64; 2],
    achieved_accel: [f64; 2],
    prev_deflection: [f64; 2],
    dt: f64,
    ap: &AutopilotConfig,
    accel_to_deflection_gain: f64,
) -> Result<[f64; 2]> {
    if !(dt > 0.0) {
        return Err(Error::invalid("dt", "must be > 0"));
    }
    let limit = ap.deflection_limit;
    let mut out = [0.0; 2];
    for i in 0..2 {
        let demand = cmd_accel[i] + ap.accel_feedback * (cmd_accel[i] - achieved_accel[i]);
        let target = (accel_to_deflection_gain * demand).clamp(-limit, limit);
        out[i] = lag_update(prev_deflection[i], target, dt, ap.actuator_time_constant);
    }
    Ok(out)
}
