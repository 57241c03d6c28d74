use crate::error::{Error, Result};

/// Tabulated motor thrust with linear interpolation between breakpoints.
///
/// Mass flow is proportional to thrust so that the full propellant mass is
/// consumed exactly at burnout.
#[derive(Debug, Clone, PartialEq)]
pub struct ThrustProfile {
    times: Vec<f64>,
    thrust: Vec<f64>,
    pub initial_mass: f64,
    pub propellant_mass: f64,
    total_impulse: f64,
}

impl ThrustProfile {
    pub fn new(
        points: Vec<(f64, f64)>,
        initial_mass: f64,
        propellant_mass: f64,
    ) -> Result<Self> {
        if points.len() < 2 {
            return Err(Error::invalid("thrust", "at least two breakpoints are required"));
        }
        if points.windows(2).any(|w| !(w[1].0 > w[0].0)) {
            return Err(Error::invalid("thrust", "time breakpoints must be strictly ascending"));
        }
        if points[0].0 < 0.0 {
            return Err(Error::invalid("thrust", "time breakpoints must be >= 0"));
        }
        if points.iter().any(|p| !(p.1 >= 0.0) || !p.1.is_finite()) {
            return Err(Error::invalid("thrust", "thrust must be finite and >= 0"));
        }
        if !(initial_mass > 0.0) || !(propellant_mass >= 0.0) || propellant_mass >= initial_mass {
            return Err(Error::invalid(
                "mass",
                "need launch > 0 and 0 <= propellant < launch",
            ));
        }
        let (times, thrust): (Vec<f64>, Vec<f64>) = points.into_iter().unzip();
        let total_impulse = times
            .windows(2)
            .zip(thrust.windows(2))
            .map(|(t, f)| 0.5 * (f[0] + f[1]) * (t[1] - t[0]))
            .sum::<f64>();
        if propellant_mass > 0.0 && !(total_impulse > 0.0) {
            return Err(Error::invalid("thrust", "propellant without impulse"));
        }
        Ok(Self {
            times,
            thrust,
            initial_mass,
            propellant_mass,
            total_impulse,
        })
    }

    pub fn burnout_time(&self) -> f64 {
        *self.times.last().unwrap()
    }

    pub fn total_impulse(&self) -> f64 {
        self.total_impulse
    }

    pub fn burnout_mass(&self) -> f64 {
        self.initial_mass - self.propellant_mass
    }

    pub fn breakpoints(&self) -> impl Iterator<Item = (f64, f64)> + '_ {
        self.times.iter().copied().zip(self.thrust.iter().copied())
    }

    pub fn thrust_at(&self, t: f64) -> f64 {
        if t < self.times[0] || t > self.burnout_time() {
            return 0.0;
        }
        let hi = self.times.partition_point(|&x| x <= t);
        if hi >= self.times.len() {
            return self.thrust[self.thrust.len() - 1];
        }
        let (t0, t1) = (self.times[hi - 1], self.times[hi]);
        let (f0, f1) = (self.thrust[hi - 1], self.thrust[hi]);
        f0 + (f1 - f0) * (t - t0) / (t1 - t0)
    }

    /// Propellant consumption rate, kg/s (positive).
    pub fn mass_flow(&self, t: f64) -> f64 {
        if self.total_impulse > 0.0 {
            self.thrust_at(t) * self.propellant_mass / self.total_impulse
        } else {
            0.0
        }
    }
}
