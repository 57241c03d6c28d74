//! International Standard Atmosphere (1976), 0 to 47 km geopotential altitude.

use crate::error::{Error, Result};

pub const SEA_LEVEL_TEMPERATURE: f64 = 288.15;
pub const SEA_LEVEL_PRESSURE: f64 = 101_325.0;
/// Specific gas constant of dry air, J/(kg K).
pub const GAS_CONSTANT: f64 = 287.052_87;
pub const GAMMA: f64 = 1.4;
pub const G0: f64 = 9.806_65;
pub const CEILING: f64 = 47_000.0;

/// (base altitude m, lapse rate K/m)
const LAYERS: [(f64, f64); 4] = [
    (0.0, -0.0065),
    (11_000.0, 0.0),
    (20_000.0, 0.001),
    (32_000.0, 0.0028),
];

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct AtmosphereSample {
    pub density: f64,
    pub speed_of_sound: f64,
    pub temperature: f64,
    pub pressure: f64,
}

/// Source of atmospheric properties for the dynamics.
pub trait AtmosphereModel: Send + Sync {
    fn sample(&self, altitude: f64) -> Result<AtmosphereSample>;
}

#[derive(Debug, Clone, Copy, Default)]
pub struct StandardAtmosphere;

impl AtmosphereModel for StandardAtmosphere {
    fn sample(&self, altitude: f64) -> Result<AtmosphereSample> {
        atmosphere(altitude)
    }
}

/// Zero-density atmosphere with sea-level temperature; removes all aerodynamic loads.
#[derive(Debug, Clone, Copy, Default)]
pub struct Vacuum;

impl AtmosphereModel for Vacuum {
    fn sample(&self, _altitude: f64) -> Result<AtmosphereSample> {
        let sl = atmosphere(0.0)?;
        Ok(AtmosphereSample {
            density: 0.0,
            pressure: 0.0,
            ..sl
        })
    }
}

fn layer_pressure(t_base: f64, p_base: f64, lapse: f64, dh: f64) -> (f64, f64) {
    if lapse == 0.0 {
        let p = p_base * (-G0 * dh / (GAS_CONSTANT * t_base)).exp();
        (t_base, p)
    } else {
        let t = t_base + lapse * dh;
        let p = p_base * (t / t_base).powf(-G0 / (lapse * GAS_CONSTANT));
        (t, p)
    }
}

/// Standard-atmosphere state at `altitude` metres. Negative altitudes clamp to
/// sea level; altitudes above 47 km are rejected.
pub fn atmosphere(altitude: f64) -> Result<AtmosphereSample> {
    if altitude.is_nan() {
        return Err(Error::NonFinite("altitude".into()));
    }
    if altitude > CEILING {
        return Err(Error::AboveCeiling(altitude));
    }
    let h = altitude.max(0.0);

    let mut t_base = SEA_LEVEL_TEMPERATURE;
    let mut p_base = SEA_LEVEL_PRESSURE;
    let mut temperature = t_base;
    let mut pressure = p_base;
    for (i, &(base, lapse)) in LAYERS.iter().enumerate() {
        let top = LAYERS.get(i + 1).map_or(CEILING, |l| l.0);
        let dh = h.min(top) - base;
        (temperature, pressure) = layer_pressure(t_base, p_base, lapse, dh);
        if h <= top {
            break;
        }
        t_base = temperature;
        p_base = pressure;
    }

    Ok(AtmosphereSample {
        density: pressure / (GAS_CONSTANT * temperature),
        speed_of_sound: (GAMMA * GAS_CONSTANT * temperature).sqrt(),
        temperature,
        pressure,
    })
}
