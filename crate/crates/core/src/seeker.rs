//! True line-of-sight rate and the first-order seeker lag.
//!
//! LOS channels are resolved in a frame attached to the line of sight:
//! `u = R/|R|`, `e_h = z x u / |z x u|` (horizontal) and `e_v = u x e_h`
//! (vertical). The elevation (pitch) channel is `du/dt . e_v` and the azimuth
//! (yaw) channel is `du/dt . e_h`.

use nalgebra::Vector3;

use crate::airframe::VehicleState;
use crate::error::{Error, Result};
use crate::targets::PointState;

/// LOS unit vector and its two perpendicular channel directions.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct LosFrame {
    pub u: Vector3<f64>,
    pub e_h: Vector3<f64>,
    pub e_v: Vector3<f64>,
}

impl LosFrame {
    pub fn new(relative_position: &Vector3<f64>) -> Result<Self> {
        let range = relative_position.norm();
        if !(range > 0.0) {
            return Err(Error::ZeroRange);
        }
        let u = relative_position / range;
        let horizontal = Vector3::z().cross(&u);
        let e_h = if horizontal.norm() > 1e-12 {
            horizontal.normalize()
        } else {
            // LOS is vertical, azimuth is undefined; pick a fixed horizontal axis.
            Vector3::y()
        };
        let e_v = u.cross(&e_h);
        Ok(Self { u, e_h, e_v })
    }
}

/// `[elevation, azimuth]` LOS rate of the missile-to-target line, rad/s.
pub fn true_los_rate(missile: &VehicleState, target: &PointState) -> Result<[f64; 2]> {
    los_rate(
        &(target.position - missile.position),
        &(target.velocity - missile.velocity),
    )
}

/// `[elevation, azimuth]` LOS rate from relative position `r` and velocity `rdot`.
pub fn los_rate(r: &Vector3<f64>, rdot: &Vector3<f64>) -> Result<[f64; 2]> {
    let frame = LosFrame::new(r)?;
    let range2 = r.norm_squared();
    // omega x u, the rotation rate of the LOS unit vector
    let udot = r.cross(rdot).cross(r) / (range2 * range2.sqrt());
    Ok([udot.dot(&frame.e_v), udot.dot(&frame.e_h)])
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SeekerConfig {
    lag_time_constant: f64,
}

impl SeekerConfig {
    pub fn new(lag_time_constant: f64) -> Result<Self> {
        if !(lag_time_constant >= 0.0 && lag_time_constant.is_finite()) {
            return Err(Error::invalid("seeker.lag_time_constant", "must be finite and >= 0"));
        }
        Ok(Self { lag_time_constant })
    }

    pub fn lag_time_constant(&self) -> f64 {
        self.lag_time_constant
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Default)]
pub struct SeekerState {
    pub delayed_rate: [f64; 2],
    pub last_true_rate: [f64; 2],
}

/// Exact discretisation of the first-order lag for a signal held constant
/// over `dt`. A zero time constant passes the input straight through.
pub fn lag_update(previous: f64, input: f64, dt: f64, time_constant: f64) -> f64 {
    if time_constant == 0.0 {
        return input;
    }
    let decay = (-dt / time_constant).exp();
    previous * decay + input * (1.0 - decay)
}

pub fn delay_step(
    state: &SeekerState,
    true_rate: [f64; 2],
    dt: f64,
    config: &SeekerConfig,
) -> Result<SeekerState> {
    if !(dt > 0.0) {
        return Err(Error::invalid("dt", "must be > 0"));
    }
    for (i, v) in true_rate.iter().enumerate() {
        if !v.is_finite() {
            return Err(Error::NonFinite(format!("true LOS rate channel {i}")));
        }
    }
    let t = config.lag_time_constant;
    Ok(SeekerState {
        delayed_rate: [
            lag_update(state.delayed_rate[0], true_rate[0], dt, t),
            lag_update(state.delayed_rate[1], true_rate[1], dt, t),
        ],
        last_true_rate: true_rate,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_relative_eq;
    use proptest::prelude::*;

    fn v(x: f64, y: f64, z: f64) -> Vector3<f64> {
        Vector3::new(x, y, z)
    }

    #[test]
    fn pure_closing_has_no_rate() {
        let r = los_rate(&v(1000.0, 0.0, 1000.0), &v(-310.0, 0.0, -310.0)).unwrap();
        assert_relative_eq!(r[0], 0.0, epsilon = 1e-15);
        assert_relative_eq!(r[1], 0.0, epsilon = 1e-15);
    }

    #[test]
    fn elevation_example() {
        let r = los_rate(&v(1000.0, 0.0, 0.0), &v(0.0, 0.0, 10.0)).unwrap();
        assert_relative_eq!(r[0], 0.01, max_relative = 1e-14);
        assert_eq!(r[1], 0.0);
        let r = los_rate(&v(1000.0, 0.0, 0.0), &v(0.0, 10.0, 0.0)).unwrap();
        assert_eq!(r[0], 0.0);
        assert_relative_eq!(r[1], 0.01, max_relative = 1e-14);
    }

    #[test]
    fn zero_range_is_an_error() {
        let zero = Vector3::zeros();
        assert!(matches!(los_rate(&zero, &zero), Err(Error::ZeroRange)));
    }

    #[test]
    fn zero_lag_passes_through() {
        let c = SeekerConfig::new(0.0).unwrap();
        let s = delay_step(&SeekerState::default(), [0.3, -0.2], 1e-3, &c).unwrap();
        assert_eq!(s.delayed_rate, [0.3, -0.2]);
        assert!(SeekerConfig::new(-0.1).is_err());
        assert!(delay_step(&s, [0.0, 0.0], 0.0, &c).is_err());
        assert!(delay_step(&s, [f64::NAN, 0.0], 1e-3, &c).is_err());
    }

    #[test]
    fn step_response_matches_closed_form() {
        let lag = 0.2;
        let c = SeekerConfig::new(lag).unwrap();
        for dt in [1e-3f64, 0.01, 0.05] {
            let mut s = SeekerState::default();
            let n = (1.0 / dt).round() as usize;
            for _ in 0..n {
                s = delay_step(&s, [2.0, 2.0], dt, &c).unwrap();
            }
            let t = n as f64 * dt;
            assert_relative_eq!(s.delayed_rate[0], 2.0 * (1.0 - (-t / lag).exp()), max_relative = 1e-12);
        }
        let s = SeekerState {
            delayed_rate: [0.7, 0.7],
            ..Default::default()
        };
        assert_eq!(delay_step(&s, [0.7, 0.7], 1e-3, &c).unwrap().delayed_rate, [0.7, 0.7]);
    }

    proptest! {
        #[test]
        fn range_scaling(scale in 0.1f64..10.0, x in 100.0f64..5000.0, vz in -50.0f64..50.0, vy in -50.0f64..50.0) {
            let a = los_rate(&v(x, 0.0, 0.0), &v(0.0, vy, vz)).unwrap();
            let b = los_rate(&v(scale * x, 0.0, 0.0), &v(0.0, vy, vz)).unwrap();
            prop_assert!((b[0] * scale - a[0]).abs() <= 1e-12 * a[0].abs().max(1e-9));
            prop_assert!((b[1] * scale - a[1]).abs() <= 1e-12 * a[1].abs().max(1e-9));
        }

        #[test]
        fn composition_is_exact(n in 1usize..50, dt in 1e-4f64..1e-2, lag in 0.01f64..0.5, c in -1.0f64..1.0, x0 in -1.0f64..1.0) {
            let cfg = SeekerConfig::new(lag).unwrap();
            let mut s = SeekerState { delayed_rate: [x0, x0], ..Default::default() };
            for _ in 0..n {
                s = delay_step(&s, [c, c], dt, &cfg).unwrap();
            }
            let one = delay_step(&SeekerState { delayed_rate: [x0, x0], ..Default::default() }, [c, c], n as f64 * dt, &cfg).unwrap();
            prop_assert!((s.delayed_rate[0] - one.delayed_rate[0]).abs() < 1e-12);
        }

        #[test]
        fn output_is_convex_combination(prev in -1.0f64..1.0, input in -1.0f64..1.0, dt in 1e-4f64..1.0, lag in 0.0f64..1.0) {
            let out = lag_update(prev, input, dt, lag);
            prop_assert!(out >= prev.min(input) - 1e-15 && out <= prev.max(input) + 1e-15);
        }
    }

    #[test]
    fn error_decays_by_e_per_time_constant() {
        let lag = 0.25;
        let c = SeekerConfig::new(lag).unwrap();
        let dt = 1e-3;
        let mut s = SeekerState::default();
        for _ in 0..250 {
            s = delay_step(&s, [1.0, 1.0], dt, &c).unwrap();
        }
        assert_relative_eq!(1.0 - s.delayed_rate[0], (-1.0f64).exp(), max_relative = 1e-10);
    }
}
