//! Plain-text airframe dataset reader.
//!
//! ```text
//! [reference]        area, length, inertia
//! [mass]             launch, propellant
//! [aero]             rows: mach cn_alpha ca0 cm_alpha cm_q cn_delta cm_delta
//! [thrust]           rows: time thrust
//! ```

use std::collections::HashMap;
use std::path::Path;

use super::aero::{AeroRow, AeroTable};
use super::thrust::ThrustProfile;
use super::Airframe;
use crate::error::{Error, Result};

pub const GENERIC_AIRFRAME: &str = include_str!("../../data/generic_airframe.txt");

#[derive(Default)]
struct Sections {
    keys: HashMap<(String, String), (usize, f64)>,
    rows: HashMap<String, Vec<(usize, Vec<f64>)>>,
}

fn parse_number(line: usize, token: &str) -> Result<f64> {
    token.parse::<f64>().map_err(|_| Error::Dataset {
        line,
        message: format!("`{token}` is not a number"),
    })
}

fn split_sections(text: &str) -> Result<Sections> {
    let mut out = Sections::default();
    let mut section: Option<String> = None;
    for (idx, raw) in text.lines().enumerate() {
        let line = idx + 1;
        let content = raw.split('#').next().unwrap_or("").trim();
        if content.is_empty() {
            continue;
        }
        if let Some(name) = content.strip_prefix('[').and_then(|s| s.strip_suffix(']')) {
            section = Some(name.trim().to_string());
            continue;
        }
        let Some(sec) = section.clone() else {
            return Err(Error::Dataset {
                line,
                message: "content before the first [section]".into(),
            });
        };
        if let Some((k, v)) = content.split_once('=') {
            let value = parse_number(line, v.trim())?;
            out.keys.insert((sec, k.trim().to_string()), (line, value));
        } else {
            let values = content
                .split_whitespace()
                .map(|tok| parse_number(line, tok))
                .collect::<Result<Vec<_>>>()?;
            out.rows.entry(sec).or_default().push((line, values));
        }
    }
    Ok(out)
}

impl Sections {
    fn key(&self, section: &str, key: &str) -> Result<f64> {
        self.keys
            .get(&(section.to_string(), key.to_string()))
            .map(|(_, v)| *v)
            .ok_or_else(|| Error::Dataset {
                line: 0,
                message: format!("missing `{key}` in [{section}]"),
            })
    }

    fn table(&self, section: &str, width: usize) -> Result<Vec<Vec<f64>>> {
        let rows = self.rows.get(section).ok_or_else(|| Error::Dataset {
            line: 0,
            message: format!("missing [{section}] table"),
        })?;
        rows.iter()
            .map(|(line, r)| {
                if r.len() == width {
                    Ok(r.clone())
                } else {
                    Err(Error::Dataset {
                        line: *line,
                        message: format!("[{section}] rows need {width} columns, found {}", r.len()),
                    })
                }
            })
            .collect()
    }
}

pub fn parse_airframe(text: &str) -> Result<Airframe> {
    let s = split_sections(text)?;
    let aero_rows = s
        .table("aero", 7)?
        .into_iter()
        .map(|r| AeroRow {
            mach: r[0],
            cn_alpha: r[1],
            ca0: r[2],
            cm_alpha: r[3],
            cm_q: r[4],
            cn_delta: r[5],
            cm_delta: r[6],
        })
        .collect();
    let aero = AeroTable::new(
        aero_rows,
        s.key("reference", "area")?,
        s.key("reference", "length")?,
    )?;
    let thrust = ThrustProfile::new(
        s.table("thrust", 2)?.into_iter().map(|r| (r[0], r[1])).collect(),
        s.key("mass", "launch")?,
        s.key("mass", "propellant")?,
    )?;
    Airframe::new(aero, thrust, s.key("reference", "inertia")?)
}

pub fn load_airframe(path: &Path) -> Result<Airframe> {
    parse_airframe(&std::fs::read_to_string(path)?)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn embedded_dataset_loads() {
        let af = parse_airframe(GENERIC_AIRFRAME).unwrap();
        assert_eq!(af.aero.rows().len(), 5);
        assert_eq!(
            af.aero.rows().iter().map(|r| r.mach).collect::<Vec<_>>(),
            vec![0.4, 0.8, 1.2, 2.0, 3.0]
        );
        assert!(af.aero.rows().iter().all(|r| (10.0..=20.0).contains(&r.cn_alpha)));
        assert_eq!(af.thrust.burnout_time(), 6.0);
    }

    #[test]
    fn reports_line_numbers() {
        let text = "[reference]\narea = 0.03\nlength = x\n";
        match parse_airframe(text) {
            Err(Error::Dataset { line, .. }) => assert_eq!(line, 3),
            other => panic!("{other:?}"),
        }
        let text = GENERIC_AIRFRAME.replace("-12.0     -3000.0", "-12.0");
        assert!(matches!(parse_airframe(&text), Err(Error::Dataset { .. })));
    }

    #[test]
    fn unstable_row_rejected_at_load() {
        let text = GENERIC_AIRFRAME.replace("-12.0     -3000.0", "1.0     -3000.0");
        assert!(matches!(
            parse_airframe(&text),
            Err(Error::InvalidParameter { .. })
        ));
    }
}
