use crate::error::{Error, Result};

/// Linear aerodynamic parameters at one Mach breakpoint.
///
/// Angles in radians. `cm_q` multiplies the nondimensional rate `q d / (2 V)`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct AeroRow {
    pub mach: f64,
    pub cn_alpha: f64,
    pub ca0: f64,
    pub cm_alpha: f64,
    pub cm_q: f64,
    pub cn_delta: f64,
    pub cm_delta: f64,
}

impl AeroRow {
    fn lerp(&self, other: &AeroRow, w: f64) -> AeroRow {
        let f = |a: f64, b: f64| a + (b - a) * w;
        AeroRow {
            mach: f(self.mach, other.mach),
            cn_alpha: f(self.cn_alpha, other.cn_alpha),
            ca0: f(self.ca0, other.ca0),
            cm_alpha: f(self.cm_alpha, other.cm_alpha),
            cm_q: f(self.cm_q, other.cm_q),
            cn_delta: f(self.cn_delta, other.cn_delta),
            cm_delta: f(self.cm_delta, other.cm_delta),
        }
    }

    /// Steady normal-force coefficient per radian of fin deflection once the
    /// pitching moment is trimmed (`cm_alpha * alpha + cm_delta * delta = 0`).
    pub fn trim_cn_per_delta(&self) -> f64 {
        self.cn_alpha * (-self.cm_delta / self.cm_alpha) + self.cn_delta
    }
}

/// Pitch-plane coefficient table over Mach. The yaw plane reuses it with
/// sideslip in place of angle of attack (cruciform airframe).
#[derive(Debug, Clone, PartialEq)]
pub struct AeroTable {
    rows: Vec<AeroRow>,
    pub reference_area: f64,
    pub reference_length: f64,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct AeroCoefficients {
    pub cn: f64,
    pub ca: f64,
    pub cm: f64,
}

impl AeroTable {
    pub fn new(rows: Vec<AeroRow>, reference_area: f64, reference_length: f64) -> Result<Self> {
        if rows.len() < 2 {
            return Err(Error::invalid("aero", "at least two Mach breakpoints are required"));
        }
        if rows.windows(2).any(|w| !(w[1].mach > w[0].mach)) {
            return Err(Error::invalid("aero", "Mach breakpoints must be strictly ascending"));
        }
        if let Some(r) = rows.iter().find(|r| !(r.cm_alpha < 0.0)) {
            return Err(Error::invalid(
                "aero",
                format!("cm_alpha must be negative (statically stable), got {} at Mach {}", r.cm_alpha, r.mach),
            ));
        }
        if !(reference_area > 0.0 && reference_length > 0.0) {
            return Err(Error::invalid("reference", "area and length must be positive"));
        }
        Ok(Self {
            rows,
            reference_area,
            reference_length,
        })
    }

    pub fn rows(&self) -> &[AeroRow] {
        &self.rows
    }

    /// Row linearly interpolated in Mach, clamped to the table ends.
    pub fn interpolate(&self, mach: f64) -> AeroRow {
        let first = &self.rows[0];
        let last = &self.rows[self.rows.len() - 1];
        if mach <= first.mach {
            return *first;
        }
        if mach >= last.mach {
            return *last;
        }
        let hi = self.rows.partition_point(|r| r.mach <= mach);
        let (a, b) = (&self.rows[hi - 1], &self.rows[hi]);
        if mach == a.mach {
            return *a;
        }
        a.lerp(b, (mach - a.mach) / (b.mach - a.mach))
    }
}

/// Static coefficients at `mach` and incidence `aoa`. Rate and control terms
/// are applied in the force/moment assembly.
pub fn aero_coefficients(table: &AeroTable, mach: f64, aoa: f64) -> Result<AeroCoefficients> {
    if !(mach > 0.0) {
        return Err(Error::invalid("mach", "must be > 0"));
    }
    let row = table.interpolate(mach);
    Ok(AeroCoefficients {
        cn: row.cn_alpha * aoa,
        ca: row.ca0,
        cm: row.cm_alpha * aoa,
    })
}
