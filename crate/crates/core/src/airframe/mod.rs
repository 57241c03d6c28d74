//! Five-degree-of-freedom skid-to-turn missile model.
//!
//! Inertial frame: `x` downrange, `y` crossrange, `z` up. Body attitude is a
//! yaw-then-pitch Euler sequence with roll held at zero. Body axes:
//!
//! * `bx` longitudinal, nose forward
//! * `by` yaw-plane normal (`dbx/dyaw / cos(pitch)`)
//! * `bz` pitch-plane normal (`dbx/dpitch`)
//!
//! Angle of attack is measured in the `bx`/`bz` plane and sideslip in the
//! `bx`/`by` plane; both are positive when the nose sits on the positive side
//! of the velocity vector, so the same coefficient table serves both planes.

pub mod aero;
pub mod atmosphere;
pub mod dataset;
pub mod thrust;

use nalgebra::Vector3;

pub use aero::{aero_coefficients, AeroCoefficients, AeroRow, AeroTable};
pub use atmosphere::{atmosphere, AtmosphereModel, AtmosphereSample, StandardAtmosphere, Vacuum, G0};
pub use dataset::{load_airframe, parse_airframe, GENERIC_AIRFRAME};
pub use thrust::ThrustProfile;

use crate::error::{Error, Result};

/// Incidence above which the linear aerodynamics are no longer trusted.
pub const STALL_WARNING_ANGLE: f64 = 25.0 * std::f64::consts::PI / 180.0;

#[derive(Debug, Clone, PartialEq)]
pub struct Airframe {
    pub aero: AeroTable,
    pub thrust: ThrustProfile,
    /// Transverse moment of inertia (pitch and yaw), kg m^2.
    pub inertia: f64,
}

impl Airframe {
    pub fn new(aero: AeroTable, thrust: ThrustProfile, inertia: f64) -> Result<Self> {
        if !(inertia > 0.0 && inertia.is_finite()) {
            return Err(Error::invalid("reference.inertia", "must be > 0"));
        }
        Ok(Self {
            aero,
            thrust,
            inertia,
        })
    }

    /// The embedded generic dataset.
    pub fn generic() -> Self {
        parse_airframe(GENERIC_AIRFRAME).expect("embedded airframe dataset is valid")
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct VehicleState {
    pub position: Vector3<f64>,
    pub velocity: Vector3<f64>,
    pub pitch: f64,
    pub yaw: f64,
    pub pitch_rate: f64,
    pub yaw_rate: f64,
    pub mass: f64,
}

pub const VEHICLE_STATE_LEN: usize = 11;

impl VehicleState {
    pub fn to_array(&self) -> [f64; VEHICLE_STATE_LEN] {
        let p = &self.position;
        let v = &self.velocity;
        [
            p.x,
            p.y,
            p.z,
            v.x,
            v.y,
            v.z,
            self.pitch,
            self.yaw,
            self.pitch_rate,
            self.yaw_rate,
            self.mass,
        ]
    }

    pub fn from_array(y: &[f64; VEHICLE_STATE_LEN]) -> Self {
        Self {
            position: Vector3::new(y[0], y[1], y[2]),
            velocity: Vector3::new(y[3], y[4], y[5]),
            pitch: y[6],
            yaw: y[7],
            pitch_rate: y[8],
            yaw_rate: y[9],
            mass: y[10],
        }
    }

    pub fn is_finite(&self) -> bool {
        self.to_array().iter().all(|x| x.is_finite())
    }

    pub fn axes(&self) -> BodyAxes {
        BodyAxes::new(self.pitch, self.yaw)
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct BodyAxes {
    pub x: Vector3<f64>,
    pub y: Vector3<f64>,
    pub z: Vector3<f64>,
}

impl BodyAxes {
    pub fn new(pitch: f64, yaw: f64) -> Self {
        let (sp, cp) = pitch.sin_cos();
        let (sy, cy) = yaw.sin_cos();
        Self {
            x: Vector3::new(cp * cy, cp * sy, sp),
            y: Vector3::new(-sy, cy, 0.0),
            z: Vector3::new(-sp * cy, -sp * sy, cp),
        }
    }
}

/// Fin deflections in radians. Positive deflection rotates the nose toward
/// the positive plane normal.
#[derive(Debug, Clone, Copy, PartialEq, Default)]
pub struct Deflections {
    pub pitch: f64,
    pub yaw: f64,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ForcesMoments {
    /// Total inertial force including thrust and gravity, N.
    pub force: Vector3<f64>,
    /// Aerodynamic force in body axes (axial, yaw-plane normal, pitch-plane normal), N.
    pub aero_body: Vector3<f64>,
    pub pitch_moment: f64,
    pub yaw_moment: f64,
    pub alpha: f64,
    pub beta: f64,
    pub mach: f64,
    pub dynamic_pressure: f64,
}

/// Normal force and moment in one maneuver plane.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct PlaneLoads {
    pub normal_force: f64,
    pub moment: f64,
}

/// Loads in a single plane. Shared by pitch and yaw, which is what makes the
/// airframe cruciform.
pub fn plane_loads(
    row: &AeroRow,
    qbar_s: f64,
    length: f64,
    airspeed: f64,
    incidence: f64,
    body_rate: f64,
    deflection: f64,
) -> PlaneLoads {
    let rate_term = body_rate * length / (2.0 * airspeed);
    PlaneLoads {
        normal_force: qbar_s * (row.cn_alpha * incidence + row.cn_delta * deflection),
        moment: qbar_s
            * length
            * (row.cm_alpha * incidence + row.cm_q * rate_term + row.cm_delta * deflection),
    }
}

pub fn forces_and_moments(
    state: &VehicleState,
    deflections: Deflections,
    table: &AeroTable,
    thrust: f64,
    atm: &AtmosphereSample,
) -> Result<ForcesMoments> {
    let airspeed = state.velocity.norm();
    if !(airspeed > 0.0) {
        return Err(Error::ZeroAirspeed);
    }
    let axes = state.axes();
    let u = state.velocity.dot(&axes.x);
    let v = state.velocity.dot(&axes.y);
    let w = state.velocity.dot(&axes.z);
    let alpha = (-w).atan2(u);
    let beta = (-v).atan2(u);

    let mach = airspeed / atm.speed_of_sound;
    let qbar = 0.5 * atm.density * airspeed * airspeed;
    let s = table.reference_area;
    let d = table.reference_length;
    let row = table.interpolate(mach);
    let coeff = aero_coefficients(table, mach, 0.0)?;

    let pitch = plane_loads(&row, qbar * s, d, airspeed, alpha, state.pitch_rate, deflections.pitch);
    let yaw = plane_loads(&row, qbar * s, d, airspeed, beta, state.yaw_rate, deflections.yaw);

    let axial = -qbar * s * coeff.ca;
    let aero_body = Vector3::new(axial, yaw.normal_force, pitch.normal_force);
    let force = axes.x * (aero_body.x + thrust)
        + axes.y * aero_body.y
        + axes.z * aero_body.z
        + Vector3::new(0.0, 0.0, -state.mass * G0);

    Ok(ForcesMoments {
        force,
        aero_body,
        pitch_moment: pitch.moment,
        yaw_moment: yaw.moment,
        alpha,
        beta,
        mach,
        dynamic_pressure: qbar,
    })
}

/// Time derivative of the flattened [`VehicleState`], with the loads used.
pub fn vehicle_rhs(
    state: &VehicleState,
    deflections: Deflections,
    airframe: &Airframe,
    t: f64,
    atmosphere: &dyn AtmosphereModel,
) -> Result<([f64; VEHICLE_STATE_LEN], ForcesMoments)> {
    let atm = atmosphere.sample(state.position.z)?;
    let thrust = airframe.thrust.thrust_at(t);
    let fm = forces_and_moments(state, deflections, &airframe.aero, thrust, &atm)?;
    let accel = fm.force / state.mass;
    let cos_pitch = state.pitch.cos();
    let d = [
        state.velocity.x,
        state.velocity.y,
        state.velocity.z,
        accel.x,
        accel.y,
        accel.z,
        state.pitch_rate,
        state.yaw_rate / cos_pitch,
        fm.pitch_moment / airframe.inertia,
        fm.yaw_moment / airframe.inertia,
        -airframe.thrust.mass_flow(t),
    ];
    Ok((d, fm))
}

/// Steady lateral acceleration per radian of deflection at the given flight
/// condition, m/s^2 per rad.
pub fn trim_accel_per_deflection(
    airframe: &Airframe,
    mach: f64,
    dynamic_pressure: f64,
    mass: f64,
) -> f64 {
    let row = airframe.aero.interpolate(mach);
    dynamic_pressure * airframe.aero.reference_area * row.trim_cn_per_delta() / mass
}
