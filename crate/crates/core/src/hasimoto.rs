//! The Hasimoto transform of a curve evolving by LLG, the nonlocal
//! dissipative Schrödinger equations it leads to, and their explicit
//! singular solutions.

use num_complex::Complex;

use crate::error::{domain, input, Result};
use crate::field::{ComplexField, Grid};
use crate::norms::Trajectory;
use crate::quad::{integrate, QuadOptions};
use crate::scalar::{cplx, lit, Real};
use crate::semigroup::GlParams;
use crate::spectral::{Boundary, Spectral};

type C<T> = Complex<T>;

/// Curvature and torsion of a curve sampled on a grid.
#[derive(Debug, Clone, PartialEq)]
pub struct FilamentData<T: Real> {
    grid: Grid<T>,
    curvature: Vec<T>,
    torsion: Vec<T>,
}

impl<T: Real> FilamentData<T> {
    pub fn new(grid: Grid<T>, curvature: Vec<T>, torsion: Vec<T>) -> Result<Self> {
        if curvature.len() != grid.len() || torsion.len() != grid.len() {
            return input("curvature and torsion must have one sample per grid point");
        }
        if curvature
            .iter()
            .any(|k| !(k.is_finite() && *k >= T::zero()))
        {
            return domain("curvature must be finite and nonnegative");
        }
        if torsion.iter().any(|t| !t.is_finite()) {
            return domain("torsion must be finite");
        }
        Ok(Self {
            grid,
            curvature,
            torsion,
        })
    }

    /// `κ_{c,α}(·, t)` and `τ_{c,α}(·, t)` of the self-similar solutions.
    pub fn self_similar(c: T, alpha: T, t: T, grid: Grid<T>) -> Result<Self> {
        let p = GlParams::new(alpha)?;
        check_time(t)?;
        let pts = grid.points();
        let curvature = pts
            .iter()
            .map(|&x| c / t.sqrt() * (-alpha * x * x / (lit::<T>(4.0) * t)).exp())
            .collect();
        let torsion = pts
            .iter()
            .map(|&x| p.beta() * x / (lit::<T>(2.0) * t))
            .collect();
        Self::new(grid, curvature, torsion)
    }

    pub fn grid(&self) -> &Grid<T> {
        &self.grid
    }

    pub fn curvature(&self) -> &[T] {
        &self.curvature
    }

    pub fn torsion(&self) -> &[T] {
        &self.torsion
    }
}

/// A solution snapshot of the forced nonlocal equation.
#[derive(Debug, Clone, PartialEq)]
pub struct NonlocalState<T: Real> {
    pub v: ComplexField<T>,
    pub a_of_t: T,
}

impl<T: Real> NonlocalState<T> {
    /// `v_{c,α}(·, t)` together with `A(t)`.
    pub fn self_similar(c: T, alpha: T, t: T, grid: Grid<T>) -> Result<Self> {
        let v = ComplexField::from_fn(grid, |x| v_selfsim(c, alpha, x, t).unwrap_or_default())?;
        Ok(Self {
            v,
            a_of_t: forcing_a(c, alpha, t)?,
        })
    }
}

fn check_time<T: Real>(t: T) -> Result<()> {
    if !(t > T::zero() && t.is_finite()) {
        return domain(format!("time must be positive, got {t}"));
    }
    Ok(())
}

/// `∫_0^x f` at every grid point from samples of `f` and `f'`, integrating
/// the piecewise cubic Hermite interpolant exactly. Points left of the
/// origin receive the signed value `-∫_x^0 f`.
pub fn cumulative_from_origin<T: Real>(grid: &Grid<T>, f: &[T], df: &[T]) -> Result<Vec<T>> {
    let n = grid.len();
    if f.len() != n || df.len() != n {
        return input("samples do not match the grid");
    }
    let h = grid.spacing();
    let (lo, hi) = (grid.x(0), grid.x(n - 1));
    if !(lo <= T::zero() && hi >= T::zero()) || n < 2 {
        return input("the grid must contain the origin");
    }
    let twelve: T = lit(12.0);
    let two: T = lit(2.0);
    let mut acc = Vec::with_capacity(n);
    acc.push(T::zero());
    for i in 0..n - 1 {
        let cell = h * (f[i] + f[i + 1]) / two + h * h * (df[i] - df[i + 1]) / twelve;
        acc.push(acc[i] + cell);
    }
    // value of the running integral at x = 0
    let k = (((-lo) / h).floor().to_usize().unwrap_or(0)).min(n - 2);
    let s = (-lo - h * lit(k as f64)) / h;
    let partial = {
        let (s2, s3, s4) = (s * s, s * s * s, s * s * s * s);
        let i00 = s4 / two - s3 + s;
        let i10 = s4 / lit(4.0) - s3 * lit(2.0) / lit(3.0) + s2 / two;
        let i01 = -s4 / two + s3;
        let i11 = s4 / lit(4.0) - s3 / lit(3.0);
        h * (f[k] * i00 + h * df[k] * i10 + f[k + 1] * i01 + h * df[k + 1] * i11)
    };
    let at_origin = acc[k] + partial;
    Ok(acc.into_iter().map(|a| a - at_origin).collect())
}

/// Second-order finite-difference derivative of real samples.
fn fd_derivative<T: Real>(f: &[T], h: T) -> Vec<T> {
    let n = f.len();
    let two: T = lit(2.0);
    (0..n)
        .map(|i| match i {
            0 => (-lit::<T>(3.0) * f[0] + lit::<T>(4.0) * f[1] - f[2]) / (two * h),
            _ if i == n - 1 => {
                (lit::<T>(3.0) * f[n - 1] - lit::<T>(4.0) * f[n - 2] + f[n - 3]) / (two * h)
            }
            _ => (f[i + 1] - f[i - 1]) / (two * h),
        })
        .collect()
}

/// `v(x) = κ(x)·exp(i∫_0^x τ)`.
pub fn filament_function<T: Real>(fd: &FilamentData<T>) -> Result<ComplexField<T>> {
    if fd.grid.len() < 3 {
        return input("need at least three samples");
    }
    let dtau = fd_derivative(&fd.torsion, fd.grid.spacing());
    let phase = cumulative_from_origin(&fd.grid, &fd.torsion, &dtau)?;
    let values = fd
        .curvature
        .iter()
        .zip(&phase)
        .map(|(&k, &ph)| C::from_polar(k, ph))
        .collect();
    ComplexField::new(fd.grid, values)
}

/// `v_{c,α}(x, t) = (c/√t)·exp((-α+iβ)x²/4t)`.
pub fn v_selfsim<T: Real>(c: T, alpha: T, x: T, t: T) -> Result<C<T>> {
    let p = GlParams::new(alpha)?;
    check_time(t)?;
    let e = cplx(-alpha, p.beta()) * (x * x / (lit::<T>(4.0) * t));
    Ok(e.exp() * (c / t.sqrt()))
}

/// `A(t) = βc²/t`.
pub fn forcing_a<T: Real>(c: T, alpha: T, t: T) -> Result<T> {
    let p = GlParams::new(alpha)?;
    check_time(t)?;
    Ok(p.beta() * c * c / t)
}

/// `∫_0^x Im(v̄ ∂_y v) dy` for `v_{c,α}`, i.e. `(βc²/2αt)(1 - e^{-αx²/2t})`.
///
/// At `α = 0` the limit `βc²x²/(4t²)` is returned.
pub fn nonlocal_selfsim<T: Real>(c: T, alpha: T, x: T, t: T) -> Result<T> {
    let p = GlParams::new(alpha)?;
    check_time(t)?;
    let y = alpha * x * x / (lit::<T>(2.0) * t);
    // (1 - e^{-y})/α without cancellation
    let ratio = if alpha == T::zero() {
        x * x / (lit::<T>(2.0) * t)
    } else {
        -(-y).exp_m1() / alpha
    };
    Ok(p.beta() * c * c / (lit::<T>(2.0) * t) * ratio)
}

/// `w_{c,α}(x, t) = (c/√t)·exp(iβ|c|²ln(t)/2 + (iβ-α)x²/4t)`.
pub fn w_explicit<T: Real>(c: C<T>, alpha: T, x: T, t: T) -> Result<C<T>> {
    let p = GlParams::new(alpha)?;
    check_time(t)?;
    if c == C::new(T::zero(), T::zero()) {
        return domain("w needs a nonzero amplitude");
    }
    let beta = p.beta();
    let phase = cplx(T::zero(), beta * c.norm_sqr() * t.ln() / lit(2.0));
    let e = phase + cplx(-alpha, beta) * (x * x / (lit::<T>(4.0) * t));
    Ok(c / t.sqrt() * e.exp())
}

/// `∫_0^x Im(v̄ ∂_y v) dy` at every grid point, with spectral derivatives.
pub fn nonlocal_term<T: Real>(v: &[C<T>], spectral: &Spectral<T>) -> Result<Vec<T>> {
    let (vx, vxx) = spectral.derivatives(v);
    let f: Vec<T> = v.iter().zip(&vx).map(|(a, b)| (a.conj() * b).im).collect();
    let df: Vec<T> = v.iter().zip(&vxx).map(|(a, b)| (a.conj() * b).im).collect();
    cumulative_from_origin(spectral.grid(), &f, &df)
}

/// Max-norm residual of
/// `i∂_t v + (β-iα)∂_xx v + (v/2)(β|v|² + 2α∫_0^x Im(v̄∂_x v) - A(t))`
/// on the interior time samples.
pub fn residual_forced<T: Real>(
    tr: &Trajectory<T, C<T>>,
    p: &GlParams<T>,
    forcing: impl Fn(T) -> T,
) -> Result<T> {
    if tr.len() < 3 {
        return input(format!(
            "residuals need at least three time samples, got {}",
            tr.len()
        ));
    }
    let spectral = Spectral::new(*tr.grid(), Boundary::Periodic);
    let coef = p.schrodinger_coefficient();
    let (alpha, beta) = (p.alpha(), p.beta());
    let i = cplx(T::zero(), T::one());
    let half: T = lit(0.5);
    let two: T = lit(2.0);
    let t = tr.times();
    let vals = tr.values();
    let mut worst = T::zero();
    for k in 1..tr.len() - 1 {
        let (h1, h2) = (t[k] - t[k - 1], t[k + 1] - t[k]);
        let w = [
            -h2 / (h1 * (h1 + h2)),
            (h2 - h1) / (h1 * h2),
            h1 / (h2 * (h1 + h2)),
        ];
        let v = &vals[k];
        let (_, vxx) = spectral.derivatives(v);
        let nl = nonlocal_term(v, &spectral)?;
        let a = forcing(t[k]);
        for j in 0..v.len() {
            let vt = vals[k - 1][j] * w[0] + v[j] * w[1] + vals[k + 1][j] * w[2];
            let bracket = beta * v[j].norm_sqr() + two * alpha * nl[j] - a;
            let r = i * vt + coef * vxx[j] + v[j] * (bracket * half);
            worst = worst.max(r.norm());
        }
    }
    Ok(worst)
}

/// Residual of the forced nonlocal equation with `A(t) = βc²/t`.
pub fn residual_nonlocal<T: Real>(tr: &Trajectory<T, C<T>>, c: T, alpha: T) -> Result<T> {
    let p = GlParams::new(alpha)?;
    let beta = p.beta();
    residual_forced(tr, &p, |t| beta * c * c / t)
}

/// Residual of the unforced nonlocal equation.
pub fn residual_bis<T: Real>(tr: &Trajectory<T, C<T>>, alpha: T) -> Result<T> {
    let p = GlParams::new(alpha)?;
    residual_forced(tr, &p, |_| T::zero())
}

/// `∫ w_{c,α}(x, t)φ(x) dx` at one time, split into modulus and phase.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Pairing<T> {
    pub t: T,
    pub value: C<T>,
    pub modulus: T,
    /// Phase continued from the previous entry of the sequence.
    pub phase: T,
}

/// Pairs `w_{c,α}(·, t)` with a test function supported in `support` for
/// each `t`, integrating in the similarity variable `y = x/√t`.
pub fn weak_limit_pairing<T: Real>(
    c: C<T>,
    alpha: T,
    phi: impl Fn(T) -> T,
    support: (T, T),
    times: &[T],
) -> Result<Vec<Pairing<T>>> {
    let p = GlParams::new(alpha)?;
    let (a, b) = support;
    if !(a < b && a.is_finite() && b.is_finite()) {
        return domain("test function support must be a bounded interval");
    }
    let beta = p.beta();
    // e^{-αy²/4} < e^{-60} beyond this
    let cut = if alpha > T::zero() {
        (lit::<T>(240.0) / alpha).sqrt()
    } else {
        T::infinity()
    };
    let opts = QuadOptions::with_tol(lit(1e-15), lit(1e-11));
    let mut out: Vec<Pairing<T>> = Vec::with_capacity(times.len());
    for &t in times {
        check_time(t)?;
        let value = if c == C::new(T::zero(), T::zero()) {
            C::new(T::zero(), T::zero())
        } else {
            let st = t.sqrt();
            let lo = (a / st).max(-cut);
            let hi = (b / st).min(cut);
            let inner = if lo < hi {
                integrate(
                    |y: T| (cplx(-alpha, beta) * (y * y / lit(4.0))).exp() * phi(st * y),
                    lo,
                    hi,
                    opts,
                )?
            } else {
                C::new(T::zero(), T::zero())
            };
            c * inner * cplx(T::zero(), beta * c.norm_sqr() * t.ln() / lit(2.0)).exp()
        };
        let raw = value.arg();
        let phase = match out.last() {
            Some(prev) => {
                let tau = T::TAU();
                raw + ((prev.phase - raw) / tau).round() * tau
            }
            None => raw,
        };
        out.push(Pairing {
            t,
            value,
            modulus: value.norm(),
            phase,
        });
    }
    Ok(out)
}
