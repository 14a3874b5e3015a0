//! Dormand–Prince 5(4) embedded Runge–Kutta integrator for small fixed-size systems.

use crate::error::{Error, Result};
use crate::scalar::{lit, Real};

/// Step-size control parameters.
#[derive(Debug, Clone, Copy)]
pub struct OdeOptions<T> {
    pub rtol: T,
    pub atol: T,
    /// Upper bound on `|h|`; keeps dense output fine enough for interpolation.
    pub max_step: T,
    pub initial_step: Option<T>,
    pub max_steps: usize,
}

impl<T: Real> OdeOptions<T> {
    pub fn new(tol: T) -> Self {
        Self {
            rtol: tol,
            atol: tol,
            max_step: T::infinity(),
            initial_step: None,
            max_steps: 1_000_000,
        }
    }

    pub fn max_step(mut self, h: T) -> Self {
        self.max_step = h;
        self
    }
}

#[derive(Debug, Clone, Copy, Default, PartialEq, Eq)]
pub struct OdeStats {
    pub accepted: usize,
    pub rejected: usize,
}

const C: [f64; 7] = [0.0, 1.0 / 5.0, 3.0 / 10.0, 4.0 / 5.0, 8.0 / 9.0, 1.0, 1.0];
const A: [[f64; 6]; 7] = [
    [0.0; 6],
    [1.0 / 5.0, 0.0, 0.0, 0.0, 0.0, 0.0],
    [3.0 / 40.0, 9.0 / 40.0, 0.0, 0.0, 0.0, 0.0],
    [44.0 / 45.0, -56.0 / 15.0, 32.0 / 9.0, 0.0, 0.0, 0.0],
    [
        19372.0 / 6561.0,
        -25360.0 / 2187.0,
        64448.0 / 6561.0,
        -212.0 / 729.0,
        0.0,
        0.0,
    ],
    [
        9017.0 / 3168.0,
        -355.0 / 33.0,
        46732.0 / 5247.0,
        49.0 / 176.0,
        -5103.0 / 18656.0,
        0.0,
    ],
    [
        35.0 / 384.0,
        0.0,
        500.0 / 1113.0,
        125.0 / 192.0,
        -2187.0 / 6784.0,
        11.0 / 84.0,
    ],
];
// fifth-order weights equal the last row of A (first-same-as-last)
const E: [f64; 7] = [
    71.0 / 57600.0,
    0.0,
    -71.0 / 16695.0,
    71.0 / 1920.0,
    -17253.0 / 339200.0,
    22.0 / 525.0,
    -1.0 / 40.0,
];

/// Integrates `y' = f(t, y)` from `t0` to `t1` (either direction).
///
/// After every accepted step `on_step(t, &mut y)` is called; it may modify
/// the state (e.g. to project back onto a constraint manifold), and the
/// integrator continues from the modified state.
pub fn integrate<T: Real, const N: usize>(
    mut f: impl FnMut(T, &[T; N]) -> [T; N],
    t0: T,
    y0: [T; N],
    t1: T,
    opts: OdeOptions<T>,
    mut on_step: impl FnMut(T, &mut [T; N]),
) -> Result<([T; N], OdeStats)> {
    let mut stats = OdeStats::default();
    if t0 == t1 {
        return Ok((y0, stats));
    }
    let dir = if t1 > t0 { T::one() } else { -T::one() };
    let span = (t1 - t0).abs();
    let mut h = opts
        .initial_step
        .unwrap_or_else(|| {
            span.min(opts.max_step)
                .min(opts.rtol.powf(lit(0.2)) * lit(0.1))
        })
        .abs()
        .min(opts.max_step);
    let mut t = t0;
    let mut y = y0;
    let mut k = [[T::zero(); N]; 7];
    k[0] = f(t, &y);

    while (t1 - t) * dir > T::zero() {
        if stats.accepted + stats.rejected >= opts.max_steps {
            return Err(Error::Integration(format!(
                "step budget exhausted at t = {t}"
            )));
        }
        let remaining = (t1 - t).abs();
        let last = h >= remaining;
        if last {
            h = remaining;
        }
        let hs = h * dir;
        for s in 1..7 {
            let mut ys = y;
            for (j, kj) in k.iter().enumerate().take(s) {
                let a: T = lit(A[s][j]);
                if a != T::zero() {
                    for i in 0..N {
                        ys[i] = ys[i] + hs * a * kj[i];
                    }
                }
            }
            k[s] = f(t + hs * lit(C[s]), &ys);
        }
        let mut y_new = y;
        for (j, kj) in k.iter().enumerate().take(6) {
            let b: T = lit(A[6][j]);
            for i in 0..N {
                y_new[i] = y_new[i] + hs * b * kj[i];
            }
        }
        let mut err_sq = T::zero();
        for i in 0..N {
            let mut e = T::zero();
            for (j, kj) in k.iter().enumerate() {
                e = e + lit::<T>(E[j]) * kj[i];
            }
            let scale = opts.atol + opts.rtol * y[i].abs().max(y_new[i].abs());
            let r = hs * e / scale;
            err_sq = err_sq + r * r;
        }
        let err = (err_sq / lit(N as f64)).sqrt();
        if !err.is_finite() {
            return Err(Error::Integration(format!("non-finite state near t = {t}")));
        }
        if err <= T::one() {
            t = if last { t1 } else { t + hs };
            y = y_new;
            on_step(t, &mut y);
            k[0] = f(t, &y);
            stats.accepted += 1;
            let grow = if err == T::zero() {
                lit(5.0)
            } else {
                (lit::<T>(0.9) * err.powf(lit(-0.2))).min(lit(5.0))
            };
            h = (h * grow).min(opts.max_step);
        } else {
            stats.rejected += 1;
            h = h * (lit::<T>(0.9) * err.powf(lit(-0.2))).max(lit(0.2));
        }
        if h <= span * T::epsilon() {
            return Err(Error::Integration(format!(
                "step size underflow at t = {t}"
            )));
        }
    }
    Ok((y, stats))
}
