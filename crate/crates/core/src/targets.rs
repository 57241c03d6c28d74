//! Kinematic point targets: level flight and vertical sinusoidal weave.

use std::f64::consts::TAU;

use nalgebra::Vector3;
use rand::{RngExt, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct PointState {
    pub position: Vector3<f64>,
    pub velocity: Vector3<f64>,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum TargetKind {
    Level,
    Weaving,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct TargetConfig {
    pub kind: TargetKind,
    pub initial_position: Vector3<f64>,
    /// Horizontal speed toward the launch site (the origin), m/s.
    pub speed: f64,
    /// Vertical velocity amplitude, m/s.
    pub weave_amplitude: f64,
    /// rad/s
    pub weave_frequency: f64,
    /// rad
    pub phase: f64,
}

impl Default for TargetConfig {
    fn default() -> Self {
        Self {
            kind: TargetKind::Level,
            initial_position: Vector3::new(10_000.0, 0.0, 2_000.0),
            speed: 200.0,
            weave_amplitude: 5.0,
            weave_frequency: 3.0,
            phase: 0.0,
        }
    }
}

impl TargetConfig {
    pub fn validate(&self) -> Vec<String> {
        let mut errs = Vec::new();
        if !(self.speed > 0.0 && self.speed.is_finite()) {
            errs.push("target.speed must be > 0".to_string());
        }
        if !(self.weave_amplitude >= 0.0 && self.weave_amplitude.is_finite()) {
            errs.push("target.weave_amplitude must be >= 0".to_string());
        }
        if self.kind == TargetKind::Weaving
            && !(self.weave_frequency > 0.0 && self.weave_frequency.is_finite())
        {
            errs.push("target.weave_frequency must be > 0 for a weaving target".to_string());
        }
        if !self.phase.is_finite() {
            errs.push("target.phase must be finite".to_string());
        }
        if !self.initial_position.iter().all(|x| x.is_finite()) {
            errs.push("target.position must be finite".to_string());
        } else if self.initial_position.xy().norm() == 0.0 {
            errs.push("target.position must not be directly above the launch site".to_string());
        }
        errs
    }

    fn horizontal_velocity(&self) -> Vector3<f64> {
        let h = self.initial_position.xy();
        let dir = -h / h.norm();
        Vector3::new(dir.x, dir.y, 0.0) * self.speed
    }
}

pub fn target_state(t: f64, config: &TargetConfig) -> PointState {
    let v_h = config.horizontal_velocity();
    let mut position = config.initial_position + v_h * t;
    let mut velocity = v_h;
    if config.kind == TargetKind::Weaving && config.weave_amplitude > 0.0 {
        let a = config.weave_amplitude;
        let w = config.weave_frequency;
        let phi = config.phase;
        velocity.z = a * (w * t + phi).sin();
        position.z += (a / w) * (phi.cos() - (w * t + phi).cos());
    }
    PointState { position, velocity }
}

/// Analytic target acceleration.
pub fn target_acceleration(t: f64, config: &TargetConfig) -> Vector3<f64> {
    if config.kind == TargetKind::Weaving {
        let a = config.weave_amplitude;
        let w = config.weave_frequency;
        Vector3::new(0.0, 0.0, a * w * (w * t + config.phase).cos())
    } else {
        Vector3::zeros()
    }
}

/// Uniform phase on `[0, 2pi)` from a ChaCha8 stream seeded with `seed`.
pub fn sample_phase(seed: u64) -> f64 {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let phase = rng.random::<f64>() * TAU;
    if phase >= TAU {
        0.0
    } else {
        phase
    }
}

/// Seed for work item `index` under `master_seed`. SplitMix64 finaliser over
/// the pair, so each item's stream is independent of execution order.
pub fn derive_seed(master_seed: u64, index: u64) -> u64 {
    let mut z = master_seed
        .wrapping_mul(0x9E37_79B9_7F4A_7C15)
        .wrapping_add(index.wrapping_add(1).wrapping_mul(0xBF58_476D_1CE4_E5B9));
    z = (z ^ (z >> 30)).wrapping_mul(0xBF58_476D_1CE4_E5B9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94D0_49BB_1331_11EB);
    z ^ (z >> 31)
}
