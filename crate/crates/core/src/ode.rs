//! Fixed-step classical Runge-Kutta integration over flat state arrays.

/// Advances `y` from `t` to `t + dt` with one classical RK4 step.
///
/// The right-hand side may fail; the first error aborts the step.
pub fn rk4_step<const N: usize, E>(
    t: f64,
    y: &[f64; N],
    dt: f64,
    mut rhs: impl FnMut(f64, &[f64; N]) -> Result<[f64; N], E>,
) -> Result<[f64; N], E> {
    let half = 0.5 * dt;
    let k1 = rhs(t, y)?;
    let k2 = rhs(t + half, &axpy(y, half, &k1))?;
    let k3 = rhs(t + half, &axpy(y, half, &k2))?;
    let k4 = rhs(t + dt, &axpy(y, dt, &k3))?;

    let sixth = dt / 6.0;
    let mut out = *y;
    for i in 0..N {
        out[i] += sixth * (k1[i] + 2.0 * k2[i] + 2.0 * k3[i] + k4[i]);
    }
    Ok(out)
}

#[inline]
fn axpy<const N: usize>(y: &[f64; N], a: f64, x: &[f64; N]) -> [f64; N] {
    let mut out = *y;
    for i in 0..N {
        out[i] += a * x[i];
    }
    out
}
