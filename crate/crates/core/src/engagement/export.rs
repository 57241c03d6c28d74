//! CSV export of an engagement time history.

use std::io::Write;

use super::EngagementRecord;
use crate::error::Result;

pub const RECORD_COLUMNS: [&str; 18] = [
    "t",
    "lam_true_p",
    "lam_true_y",
    "lam_del_p",
    "lam_del_y",
    "lam_pred_p",
    "lam_pred_y",
    "acc_cmd_p",
    "acc_cmd_y",
    "defl_p",
    "defl_y",
    "mx",
    "my",
    "mz",
    "tx",
    "ty",
    "tz",
    "range",
];

/// Writes one row per step. Floats use the shortest representation that
/// round-trips.
pub fn write_record_csv<W: Write>(record: &EngagementRecord, writer: W) -> Result<()> {
    let mut w = csv::Writer::from_writer(writer);
    w.write_record(RECORD_COLUMNS)?;
    let mut row: Vec<String> = Vec::with_capacity(RECORD_COLUMNS.len());
    for i in 0..record.len() {
        row.clear();
        let m = &record.missile[i].position;
        let tg = &record.target[i].position;
        let values = [
            record.t[i],
            record.los_true[i][0],
            record.los_true[i][1],
            record.los_delayed[i][0],
            record.los_delayed[i][1],
            record.los_predicted[i][0],
            record.los_predicted[i][1],
            record.accel_cmd[i][0],
            record.accel_cmd[i][1],
            record.deflection[i][0],
            record.deflection[i][1],
            m.x,
            m.y,
            m.z,
            tg.x,
            tg.y,
            tg.z,
            record.range[i],
        ];
        row.extend(values.iter().map(|v| v.to_string()));
        w.write_record(&row)?;
    }
    w.flush()?;
    Ok(())
}
