//! Closed-loop engagement: airframe, seeker lag, two observers, PN guidance
//! and autopilot, all advanced on one fixed step.

pub mod export;
pub mod metrics;

use std::sync::Arc;

use nalgebra::Vector3;
use serde::{Deserialize, Serialize};

use crate::airframe::{
    atmosphere, forces_and_moments, trim_accel_per_deflection, vehicle_rhs, Airframe, Deflections,
    StandardAtmosphere, VehicleState, G0, STALL_WARNING_ANGLE,
};
use crate::error::{Error, Result};
use crate::guidance::{
    autopilot_step, closing_velocity_rel, pn_command, select_source, AutopilotConfig,
    GuidanceConfig, LosSource,
};
use crate::observer::{observer_step, reset, ObserverConfig, ObserverGains, ObserverState};
use crate::ode::rk4_step;
use crate::seeker::{delay_step, los_rate, LosFrame, SeekerConfig, SeekerState};
use crate::targets::{target_state, PointState, TargetConfig};

pub use metrics::{
    accel_stats, closest_approach, commanded_accel_stats, los_rmse, los_rmse_with_min,
    miss_distance, AccelStats, MissDistance,
};

/// Steps of increasing range after the minimum that end the engagement.
const OPENING_STEPS: usize = 3;

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct LaunchConfig {
    /// Rail exit speed, m/s.
    pub speed: f64,
    /// Launch elevation, rad. Azimuth always points at the target.
    pub elevation: f64,
    pub position: Vector3<f64>,
}

impl Default for LaunchConfig {
    fn default() -> Self {
        Self {
            speed: 20.0,
            elevation: 45f64.to_radians(),
            position: Vector3::zeros(),
        }
    }
}

#[derive(Debug, Clone)]
pub struct EngagementConfig {
    pub dt: f64,
    pub max_time: f64,
    pub launch: LaunchConfig,
    pub observer: ObserverConfig,
    pub seeker: SeekerConfig,
    pub guidance: GuidanceConfig,
    pub autopilot: AutopilotConfig,
    pub target: TargetConfig,
    pub airframe: Arc<Airframe>,
}

impl Default for EngagementConfig {
    fn default() -> Self {
        let lag = 0.2;
        Self {
            dt: 1e-3,
            max_time: 60.0,
            launch: LaunchConfig::default(),
            observer: ObserverConfig::new(ObserverGains::binomial(), 0.05, lag)
                .expect("default observer is valid"),
            seeker: SeekerConfig::new(lag).expect("default seeker is valid"),
            guidance: GuidanceConfig::default(),
            autopilot: AutopilotConfig::default(),
            target: TargetConfig::default(),
            airframe: Arc::new(Airframe::generic()),
        }
    }
}

impl EngagementConfig {
    /// Sets the seeker lag and the matching observer horizon.
    pub fn with_lag(mut self, lag: f64) -> Result<Self> {
        self.seeker = SeekerConfig::new(lag)?;
        self.observer = ObserverConfig::new(self.observer.gains(), self.observer.epsilon(), lag)?
            .with_paper_literal_step1(self.observer.paper_literal_step1());
        Ok(self)
    }

    pub fn with_source(mut self, source: LosSource) -> Self {
        self.guidance.source = source;
        self
    }

    pub fn validate(&self) -> Vec<String> {
        let mut errs = Vec::new();
        if !(self.dt > 0.0 && self.dt.is_finite()) {
            errs.push("engagement.dt must be > 0".to_string());
        } else if self.dt > self.observer.max_step() {
            errs.push(format!(
                "engagement.dt = {} exceeds observer.epsilon/4 = {}",
                self.dt,
                self.observer.max_step()
            ));
        }
        if !(self.max_time > 0.0 && self.max_time.is_finite()) {
            errs.push("engagement.max_time must be > 0".to_string());
        }
        if !(self.launch.speed > 0.0 && self.launch.speed.is_finite()) {
            errs.push("engagement.launch_speed must be > 0".to_string());
        }
        if !(self.launch.elevation.abs() < std::f64::consts::FRAC_PI_2) {
            errs.push("engagement.launch_elevation must be within (-90, 90) degrees".to_string());
        }
        errs.extend(self.guidance.validate());
        errs.extend(self.autopilot.validate());
        errs.extend(self.target.validate());
        errs
    }

    fn launch_state(&self) -> VehicleState {
        let to_target = self.target.initial_position - self.launch.position;
        let yaw = to_target.y.atan2(to_target.x);
        let pitch = self.launch.elevation;
        let axes = crate::airframe::BodyAxes::new(pitch, yaw);
        VehicleState {
            position: self.launch.position,
            velocity: axes.x * self.launch.speed,
            pitch,
            yaw,
            pitch_rate: 0.0,
            yaw_rate: 0.0,
            mass: self.airframe.thrust.initial_mass,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum TerminationReason {
    ClosestApproach,
    GroundImpact,
    Timeout,
    ObserverDivergence,
}

impl TerminationReason {
    pub fn as_str(&self) -> &'static str {
        match self {
            TerminationReason::ClosestApproach => "closest_approach",
            TerminationReason::GroundImpact => "ground_impact",
            TerminationReason::Timeout => "timeout",
            TerminationReason::ObserverDivergence => "observer_divergence",
        }
    }
}

/// Full time history of one engagement. Every series has one entry per step.
#[derive(Debug, Clone, Default)]
pub struct EngagementRecord {
    pub t: Vec<f64>,
    pub los_true: Vec<[f64; 2]>,
    pub los_delayed: Vec<[f64; 2]>,
    pub los_predicted: Vec<[f64; 2]>,
    /// PN demand in the LOS frame `[elevation, azimuth]`.
    pub accel_cmd: Vec<[f64; 2]>,
    /// `[pitch, yaw]` fin deflections.
    pub deflection: Vec<[f64; 2]>,
    pub missile: Vec<VehicleState>,
    pub target: Vec<PointState>,
    pub range: Vec<f64>,

    pub miss_distance: f64,
    pub miss_time: f64,
    pub termination_reason: Option<TerminationReason>,
    pub diagnostic: Option<String>,
    /// Time at which a `Predicted` source took over from the delayed signal.
    pub switch_time: Option<f64>,
    /// Last step whose LOS estimate fed the guidance command; afterwards the
    /// seeker is blind and the command is held.
    pub blind_time: Option<f64>,
    pub max_incidence: f64,
    pub warnings: Vec<String>,
}

impl EngagementRecord {
    pub fn len(&self) -> usize {
        self.t.len()
    }

    pub fn is_empty(&self) -> bool {
        self.t.is_empty()
    }

    fn reserve(&mut self, n: usize) {
        self.t.reserve(n);
        self.los_true.reserve(n);
        self.los_delayed.reserve(n);
        self.los_predicted.reserve(n);
        self.accel_cmd.reserve(n);
        self.deflection.reserve(n);
        self.missile.reserve(n);
        self.target.reserve(n);
        self.range.reserve(n);
    }

    /// Series lengths agree and timestamps strictly increase.
    pub fn is_consistent(&self) -> bool {
        let n = self.t.len();
        [
            self.los_true.len(),
            self.los_delayed.len(),
            self.los_predicted.len(),
            self.accel_cmd.len(),
            self.deflection.len(),
            self.missile.len(),
            self.target.len(),
            self.range.len(),
        ]
        .iter()
        .all(|&l| l == n)
            && self.t.windows(2).all(|w| w[1] > w[0])
    }
}

/// Signals of a single step, before they are appended to the record.
struct Sample {
    t: f64,
    los_true: [f64; 2],
    los_delayed: [f64; 2],
    los_predicted: [f64; 2],
    accel_cmd: [f64; 2],
    deflection: [f64; 2],
    missile: VehicleState,
    target: PointState,
    range: f64,
}

impl EngagementRecord {
    fn push(&mut self, s: Sample) {
        self.t.push(s.t);
        self.los_true.push(s.los_true);
        self.los_delayed.push(s.los_delayed);
        self.los_predicted.push(s.los_predicted);
        self.accel_cmd.push(s.accel_cmd);
        self.deflection.push(s.deflection);
        self.missile.push(s.missile);
        self.target.push(s.target);
        self.range.push(s.range);
    }
}

struct LoopState {
    missile: VehicleState,
    seeker: SeekerState,
    observers: [ObserverState; 2],
    deflection: [f64; 2],
    min_range: f64,
    held_cmd: Option<[f64; 2]>,
    opening: usize,
    prev_range: f64,
}

enum StepOutcome {
    Continue,
    Stop(TerminationReason),
}

/// Runs one engagement to termination.
///
/// Fails only on an invalid configuration. Numerical trouble during the run
/// ends the record with [`TerminationReason::ObserverDivergence`].
pub fn run_engagement(config: &EngagementConfig) -> Result<EngagementRecord> {
    let errs = config.validate();
    if !errs.is_empty() {
        return Err(Error::Validation(errs));
    }

    let max_steps = (config.max_time / config.dt).ceil() as usize;
    let mut record = EngagementRecord::default();
    record.reserve(max_steps.min(200_000) + 1);

    let mut st = LoopState {
        missile: config.launch_state(),
        seeker: SeekerState::default(),
        observers: [ObserverState::default(); 2],
        deflection: [0.0; 2],
        min_range: f64::INFINITY,
        held_cmd: None,
        opening: 0,
        prev_range: f64::INFINITY,
    };

    let mut n = 0usize;
    let reason = loop {
        match step(config, &mut st, &mut record, n, max_steps) {
            Ok(StepOutcome::Continue) => n += 1,
            Ok(StepOutcome::Stop(reason)) => break reason,
            Err(e) => {
                record.diagnostic = Some(e.to_string());
                break TerminationReason::ObserverDivergence;
            }
        }
    };
    record.termination_reason = Some(reason);

    if config.guidance.source == LosSource::Predicted {
        record.switch_time = record.t.iter().copied().find(|&t| t >= config.guidance.warmup);
    }
    if record.max_incidence > STALL_WARNING_ANGLE {
        record.warnings.push(format!(
            "peak incidence {:.1} deg exceeds the {:.0} deg linear-aerodynamics range",
            record.max_incidence.to_degrees(),
            STALL_WARNING_ANGLE.to_degrees()
        ));
    }
    if !record.is_empty() {
        let m = miss_distance(&record)?;
        record.miss_distance = m.distance;
        record.miss_time = m.time;
    }
    Ok(record)
}

fn step(
    config: &EngagementConfig,
    st: &mut LoopState,
    record: &mut EngagementRecord,
    n: usize,
    max_steps: usize,
) -> Result<StepOutcome> {
    let dt = config.dt;
    let t = n as f64 * dt;
    let airframe = &*config.airframe;

    if !st.missile.is_finite() {
        return Err(Error::NonFinite("missile state".into()));
    }

    let target = target_state(t, &config.target);
    let r = target.position - st.missile.position;
    let rdot = target.velocity - st.missile.velocity;
    let range = r.norm();

    if range == 0.0 {
        record.push(Sample {
            t,
            los_true: [0.0; 2],
            los_delayed: st.seeker.delayed_rate,
            los_predicted: [st.observers[0].step2[0], st.observers[1].step2[0]],
            accel_cmd: [0.0; 2],
            deflection: st.deflection,
            missile: st.missile,
            target,
            range,
        });
        return Ok(StepOutcome::Stop(TerminationReason::ClosestApproach));
    }

    // seeker and observers
    let sigma = los_rate(&r, &rdot)?;
    if n == 0 {
        st.seeker = SeekerState {
            delayed_rate: sigma,
            last_true_rate: sigma,
        };
        for c in 0..2 {
            st.observers[c] = reset(&config.observer, sigma[c])?;
        }
    } else {
        st.seeker = delay_step(&st.seeker, sigma, dt, &config.seeker)?;
        for c in 0..2 {
            st.observers[c] =
                observer_step(&st.observers[c], st.seeker.delayed_rate[c], dt, &config.observer)?;
        }
    }
    let delayed = st.seeker.delayed_rate;
    let predicted = [st.observers[0].step2[0], st.observers[1].step2[0]];

    // guidance
    let los = select_source(t, &config.guidance, sigma, delayed, predicted);
    let vc = closing_velocity_rel(&r, &rdot)?;
    let accel_los = match st.held_cmd {
        Some(held) => held,
        None => pn_command(los, vc, &config.guidance),
    };
    if range < config.guidance.blind_range && st.held_cmd.is_none() {
        st.held_cmd = Some(accel_los);
        record.blind_time = Some(t);
    }
    let frame = LosFrame::new(&r)?;
    let mut demand = frame.e_v * accel_los[0] + frame.e_h * accel_los[1];
    if config.guidance.gravity_compensation {
        demand.z += G0;
    }

    // autopilot, scheduled on the current flight condition
    let axes = st.missile.axes();
    let atm = atmosphere(st.missile.position.z)?;
    let prev = Deflections {
        pitch: st.deflection[0],
        yaw: st.deflection[1],
    };
    let fm = forces_and_moments(
        &st.missile,
        prev,
        &airframe.aero,
        airframe.thrust.thrust_at(t),
        &atm,
    )?;
    record.max_incidence = record.max_incidence.max(fm.alpha.abs()).max(fm.beta.abs());
    let achieved = [
        fm.aero_body.z / st.missile.mass,
        fm.aero_body.y / st.missile.mass,
    ];
    let per_rad =
        trim_accel_per_deflection(airframe, fm.mach, fm.dynamic_pressure, st.missile.mass);
    let gain = 1.0 / per_rad.max(1e-6);
    st.deflection = autopilot_step(
        [demand.dot(&axes.z), demand.dot(&axes.y)],
        achieved,
        st.deflection,
        dt,
        &config.autopilot,
        gain,
    )?;

    record.push(Sample {
        t,
        los_true: sigma,
        los_delayed: delayed,
        los_predicted: predicted,
        accel_cmd: accel_los,
        deflection: st.deflection,
        missile: st.missile,
        target,
        range,
    });

    // termination
    if range < st.min_range {
        st.min_range = range;
        st.opening = 0;
    } else if range > st.prev_range {
        st.opening += 1;
    }
    st.prev_range = range;
    if st.opening >= OPENING_STEPS {
        return Ok(StepOutcome::Stop(TerminationReason::ClosestApproach));
    }
    if n > 0 && st.missile.position.z <= 0.0 && st.missile.velocity.z < 0.0 {
        return Ok(StepOutcome::Stop(TerminationReason::GroundImpact));
    }
    if n >= max_steps {
        return Ok(StepOutcome::Stop(TerminationReason::Timeout));
    }

    // airframe
    let defl = Deflections {
        pitch: st.deflection[0],
        yaw: st.deflection[1],
    };
    let y = rk4_step(t, &st.missile.to_array(), dt, |tau, y| {
        vehicle_rhs(&VehicleState::from_array(y), defl, airframe, tau, &StandardAtmosphere)
            .map(|(d, _)| d)
    })?;
    st.missile = VehicleState::from_array(&y);
    Ok(StepOutcome::Continue)
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct MetricsReport {
    /// Delayed vs true LOS rate from the end of warm-up to blind range, rad/s.
    pub rmse_delayed: Option<f64>,
    /// Predicted vs true LOS rate from the end of warm-up to blind range, rad/s.
    pub rmse_predicted: Option<f64>,
    /// Over the whole record, including the blind terminal phase.
    pub rmse_delayed_full: Option<f64>,
    pub rmse_predicted_full: Option<f64>,
    /// Predicted value against the delayed signal `delta` later.
    pub rmse_prediction_horizon: Option<f64>,
    pub miss_distance: f64,
    pub miss_time: f64,
    pub peak_accel_cmd: f64,
    pub integrated_abs_deflection: f64,
    pub termination_reason: TerminationReason,
    pub switch_time: Option<f64>,
    pub duration: f64,
    pub steps: usize,
    pub warnings: Vec<String>,
    pub diagnostic: Option<String>,
}

pub fn compute_metrics(record: &EngagementRecord, config: &EngagementConfig) -> Result<MetricsReport> {
    if record.is_empty() {
        return Err(Error::EmptyRecord);
    }
    let dt = config.dt;
    let end = match record.blind_time {
        Some(tb) => record.t.partition_point(|&t| t <= tb),
        None => record.len(),
    };
    let skip = ((config.guidance.warmup / dt).ceil() as usize).min(end);
    let window = |s: &[[f64; 2]]| s[skip..end].to_vec();
    let rmse = |p: &[[f64; 2]], r: &[[f64; 2]], delta: f64| los_rmse(p, r, delta, dt).ok();

    let tr = window(&record.los_true);
    let de = window(&record.los_delayed);
    let pr = window(&record.los_predicted);
    let horizon = config.observer.delta();
    let rmse_prediction_horizon = if ((horizon / dt).round() * dt - horizon).abs() <= 1e-9 {
        rmse(&pr, &de, horizon)
    } else {
        None
    };
    let stats = commanded_accel_stats(record)?;
    Ok(MetricsReport {
        rmse_delayed: rmse(&de, &tr, 0.0),
        rmse_predicted: rmse(&pr, &tr, 0.0),
        rmse_delayed_full: rmse(&record.los_delayed, &record.los_true, 0.0),
        rmse_predicted_full: rmse(&record.los_predicted, &record.los_true, 0.0),
        rmse_prediction_horizon,
        miss_distance: record.miss_distance,
        miss_time: record.miss_time,
        peak_accel_cmd: stats.peak,
        integrated_abs_deflection: stats.integral_abs_deflection,
        termination_reason: record
            .termination_reason
            .unwrap_or(TerminationReason::ObserverDivergence),
        switch_time: record.switch_time,
        duration: *record.t.last().unwrap(),
        steps: record.len(),
        warnings: record.warnings.clone(),
        diagnostic: record.diagnostic.clone(),
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn forced_timeout() {
        let mut c = EngagementConfig::default();
        c.max_time = 0.001;
        let rec = run_engagement(&c).unwrap();
        assert_eq!(rec.termination_reason, Some(TerminationReason::Timeout));
        assert!(rec.is_consistent());
        assert_eq!(rec.len(), 2);
    }

    #[test]
    fn invalid_config_rejected_with_all_violations() {
        let mut c = EngagementConfig::default();
        c.dt = 0.1;
        c.max_time = -1.0;
        c.guidance.nav_ratio = 0.0;
        match run_engagement(&c) {
            Err(Error::Validation(v)) => assert_eq!(v.len(), 3, "{v:?}"),
            other => panic!("{other:?}"),
        }
    }
}
