//! Engagement metrics: LOS-rate RMSE, refined miss distance, command effort.

use nalgebra::Vector3;
use serde::{Deserialize, Serialize};

use super::EngagementRecord;
use crate::error::{Error, Result};

/// Minimum aligned samples for an engagement RMSE.
pub const MIN_RMSE_OVERLAP: usize = 100;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct MissDistance {
    pub distance: f64,
    pub time: f64,
}

/// Two-channel RMSE of `predicted[i]` against `reference[i + delta/dt]`,
/// reported as the root of the mean of the two channel mean-squared errors.
pub fn los_rmse(
    predicted: &[[f64; 2]],
    reference: &[[f64; 2]],
    delta: f64,
    dt: f64,
) -> Result<f64> {
    los_rmse_with_min(predicted, reference, delta, dt, MIN_RMSE_OVERLAP)
}

pub fn los_rmse_with_min(
    predicted: &[[f64; 2]],
    reference: &[[f64; 2]],
    delta: f64,
    dt: f64,
    min_overlap: usize,
) -> Result<f64> {
    if !(dt > 0.0) || !(delta >= 0.0) {
        return Err(Error::MisalignedHorizon { delta, dt });
    }
    let steps = delta / dt;
    let shift = steps.round();
    if (steps - shift).abs() * dt > 1e-9 {
        return Err(Error::MisalignedHorizon { delta, dt });
    }
    let shift = shift as usize;
    let n = predicted
        .len()
        .min(reference.len().saturating_sub(shift));
    if n < min_overlap.max(1) {
        return Err(Error::ShortOverlap(n));
    }
    let mut sum = [0.0; 2];
    for i in 0..n {
        for c in 0..2 {
            let e = predicted[i][c] - reference[i + shift][c];
            sum[c] += e * e;
        }
    }
    Ok(((sum[0] + sum[1]) / (2.0 * n as f64)).sqrt())
}

/// Closest approach of a relative trajectory sampled at `times`.
///
/// The minimum-range sample is refined with a second-order kinematic model
/// `R + V s + A s^2 / 2` over the two adjacent intervals. `A` comes from a
/// central difference of the relative velocity.
pub fn closest_approach(
    times: &[f64],
    rel_position: &[Vector3<f64>],
    rel_velocity: &[Vector3<f64>],
) -> Result<MissDistance> {
    let n = times.len();
    if n == 0 || rel_position.len() != n || rel_velocity.len() != n {
        return Err(Error::EmptyRecord);
    }
    let (k, _) = rel_position
        .iter()
        .map(|r| r.norm())
        .enumerate()
        .fold((0, f64::INFINITY), |best, (i, r)| if r < best.1 { (i, r) } else { best });

    let r = rel_position[k];
    let v = rel_velocity[k];
    let a = if n >= 3 {
        let (lo, hi) = if k == 0 {
            (0, 1)
        } else if k == n - 1 {
            (n - 2, n - 1)
        } else {
            (k - 1, k + 1)
        };
        (rel_velocity[hi] - rel_velocity[lo]) / (times[hi] - times[lo])
    } else {
        Vector3::zeros()
    };
    let s_lo = if k > 0 { times[k - 1] - times[k] } else { 0.0 };
    let s_hi = if k + 1 < n { times[k + 1] - times[k] } else { 0.0 };

    let (s, d) = minimise_quadratic_path(&r, &v, &a, s_lo, s_hi);
    Ok(MissDistance {
        distance: d.min(r.norm()),
        time: if d < r.norm() { times[k] + s } else { times[k] },
    })
}

/// Minimum of `|r + v s + a s^2/2|` for `s` in `[lo, hi]`.
fn minimise_quadratic_path(
    r: &Vector3<f64>,
    v: &Vector3<f64>,
    a: &Vector3<f64>,
    lo: f64,
    hi: f64,
) -> (f64, f64) {
    let pos = |s: f64| r + v * s + a * (0.5 * s * s);
    let dist = |s: f64| pos(s).norm();
    if hi <= lo {
        return (0.0, r.norm());
    }

    // Newton on d/ds |p|^2 / 2 = p . p'
    let vv = v.norm_squared();
    let mut s = if vv > 0.0 { (-r.dot(v) / vv).clamp(lo, hi) } else { 0.0 };
    let mut converged = false;
    for _ in 0..50 {
        let p = pos(s);
        let dp = v + a * s;
        let g = p.dot(&dp);
        let h = dp.norm_squared() + p.dot(a);
        if !(h > 0.0) {
            break;
        }
        let next = (s - g / h).clamp(lo, hi);
        if (next - s).abs() <= 1e-15 * (hi - lo).max(1.0) {
            s = next;
            converged = true;
            break;
        }
        s = next;
    }
    let mut best = (s, dist(s));
    for edge in [lo, 0.0, hi] {
        let d = dist(edge);
        if d < best.1 {
            best = (edge, d);
        }
    }
    if !converged {
        // Degenerate curvature: sample the model densely instead.
        let n = 200;
        for i in 0..=n {
            let si = lo + (hi - lo) * i as f64 / n as f64;
            let d = dist(si);
            if d < best.1 {
                best = (si, d);
            }
        }
    }
    best
}

/// Refined closest approach of a recorded engagement.
pub fn miss_distance(record: &EngagementRecord) -> Result<MissDistance> {
    if record.is_empty() {
        return Err(Error::EmptyRecord);
    }
    let rel_p: Vec<_> = record
        .target
        .iter()
        .zip(&record.missile)
        .map(|(t, m)| t.position - m.position)
        .collect();
    let rel_v: Vec<_> = record
        .target
        .iter()
        .zip(&record.missile)
        .map(|(t, m)| t.velocity - m.velocity)
        .collect();
    closest_approach(&record.t, &rel_p, &rel_v)
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct AccelStats {
    pub peak: f64,
    pub integral_abs_deflection: f64,
}

/// Peak `|accel_cmd|_2` and trapezoidal integral of `|deflection|_1`.
pub fn accel_stats(t: &[f64], accel_cmd: &[[f64; 2]], deflection: &[[f64; 2]]) -> AccelStats {
    let peak = accel_cmd
        .iter()
        .map(|a| a[0].hypot(a[1]))
        .fold(0.0, f64::max);
    let l1 = |d: &[f64; 2]| d[0].abs() + d[1].abs();
    let integral_abs_deflection = t
        .windows(2)
        .zip(deflection.windows(2))
        .map(|(t, d)| 0.5 * (l1(&d[0]) + l1(&d[1])) * (t[1] - t[0]))
        .sum();
    AccelStats {
        peak,
        integral_abs_deflection,
    }
}

pub fn commanded_accel_stats(record: &EngagementRecord) -> Result<AccelStats> {
    if record.is_empty() {
        return Err(Error::EmptyRecord);
    }
    Ok(accel_stats(&record.t, &record.accel_cmd, &record.deflection))
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_relative_eq;

    #[test]
    fn rmse_examples() {
        let p = [[0.0, 0.0], [1.0, 1.0], [2.0, 2.0]];
        let z = [[0.0, 0.0]; 3];
        assert_relative_eq!(
            los_rmse_with_min(&p, &z, 0.0, 0.01, 1).unwrap(),
            (5.0f64 / 3.0).sqrt(),
            epsilon = 1e-12
        );
        assert!(matches!(los_rmse(&p, &z, 0.0, 0.01), Err(Error::ShortOverlap(3))));

        let truth: Vec<[f64; 2]> = (0..500).map(|i| [(i as f64).sin(), (i as f64).cos()]).collect();
        let shifted: Vec<[f64; 2]> = truth[20..].to_vec();
        assert_eq!(los_rmse(&shifted, &truth, 0.02, 1e-3).unwrap(), 0.0);
        let offset: Vec<[f64; 2]> = truth.iter().map(|x| [x[0] + 0.3, x[1] - 0.3]).collect();
        assert_relative_eq!(los_rmse(&offset, &truth, 0.0, 1e-3).unwrap(), 0.3, max_relative = 1e-12);
        assert!(matches!(
            los_rmse(&offset, &truth, 0.0105, 1e-3),
            Err(Error::MisalignedHorizon { .. })
        ));
    }

    #[test]
    fn accel_stats_examples() {
        let t: Vec<f64> = (0..=100).map(|i| i as f64 * 0.01).collect();
        let zero = vec![[0.0; 2]; t.len()];
        assert_eq!(
            accel_stats(&t, &zero, &zero),
            AccelStats {
                peak: 0.0,
                integral_abs_deflection: 0.0
            }
        );
        let mut spike = zero.clone();
        spike[40] = [3.0, 4.0];
        assert_eq!(accel_stats(&t, &spike, &zero).peak, 5.0);
        let constant = vec![[0.1, -0.1]; t.len()];
        assert_relative_eq!(
            accel_stats(&t, &zero, &constant).integral_abs_deflection,
            2.0 * 0.1 * 1.0,
            max_relative = 1e-12
        );
    }

    #[test]
    fn passing_through_a_sample_gives_zero() {
        let times: Vec<f64> = (0..11).map(|i| i as f64 * 0.1).collect();
        let v = Vector3::new(-10.0, 0.0, 0.0);
        let rel_p: Vec<_> = times.iter().map(|t| Vector3::new(5.0, 0.0, 0.0) + v * *t).collect();
        let rel_v = vec![v; times.len()];
        let m = closest_approach(&times, &rel_p, &rel_v).unwrap();
        assert!(m.distance < 1e-12);
        assert_relative_eq!(m.time, 0.5, epsilon = 1e-12);
    }

    #[test]
    fn opening_geometry_minimum_at_start() {
        let times: Vec<f64> = (0..11).map(|i| i as f64 * 0.1).collect();
        let v = Vector3::new(10.0, 2.0, 0.0);
        let rel_p: Vec<_> = times.iter().map(|t| Vector3::new(5.0, 1.0, 0.0) + v * *t).collect();
        let m = closest_approach(&times, &rel_p, &vec![v; times.len()]).unwrap();
        assert_relative_eq!(m.distance, Vector3::new(5.0, 1.0, 0.0).norm());
        assert_eq!(m.time, 0.0);
    }

    #[test]
    fn empty_is_error() {
        assert!(closest_approach(&[], &[], &[]).is_err());
    }
}
