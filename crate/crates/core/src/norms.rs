//! Discrete estimators for the BMO semi-norm and the Carleson-type X and Y
//! space–time norms, plus the closed-form Carleson integral of the
//! self-similar gradient.
//!
//! All suprema are taken over finite families of windows and balls, so every
//! estimator is a lower bound of the continuum quantity that increases under
//! refinement of the families.

use num_complex::Complex;

use crate::error::{domain, input, Error, Result};
use crate::field::{vec3, ComplexField, Grid, SpinField, Vec3};
use crate::quad::{integrate, QuadOptions};
use crate::scalar::{from_usize, lit, Real};

pub use crate::specfun::e1;

/// Values a field can take: scalars, complex numbers or 3-vectors.
pub trait FieldValue<T: Real>: Copy + Send + Sync {
    fn zero() -> Self;
    fn add(self, other: Self) -> Self;
    fn scale(self, s: T) -> Self;
    fn magnitude(self) -> T;

    #[inline]
    fn dist(self, other: Self) -> T {
        self.add(other.scale(-T::one())).magnitude()
    }
}

impl<T: Real> FieldValue<T> for T {
    fn zero() -> Self {
        T::zero()
    }
    fn add(self, other: Self) -> Self {
        self + other
    }
    fn scale(self, s: T) -> Self {
        self * s
    }
    fn magnitude(self) -> T {
        self.abs()
    }
}

impl<T: Real> FieldValue<T> for Complex<T> {
    fn zero() -> Self {
        Complex::new(T::zero(), T::zero())
    }
    fn add(self, other: Self) -> Self {
        self + other
    }
    fn scale(self, s: T) -> Self {
        self * s
    }
    fn magnitude(self) -> T {
        self.norm()
    }
}

impl<T: Real> FieldValue<T> for Vec3<T> {
    fn zero() -> Self {
        [T::zero(); 3]
    }
    fn add(self, other: Self) -> Self {
        vec3::add(self, other)
    }
    fn scale(self, s: T) -> Self {
        vec3::scale(s, self)
    }
    fn magnitude(self) -> T {
        vec3::norm(self)
    }
}

/// Number of grid points in a window of radius `r`.
fn window_len<T: Real>(grid: &Grid<T>, r: T) -> usize {
    let l = (r + r) / grid.spacing();
    l.round().to_usize().unwrap_or(usize::MAX).max(1)
}

fn window_lengths<T: Real>(grid: &Grid<T>, radii: &[T]) -> Result<Vec<usize>> {
    if radii.is_empty() {
        return input("window list is empty");
    }
    if radii.iter().any(|&r| !(r > T::zero())) {
        return input("window radii must be positive");
    }
    let mut lens: Vec<usize> = radii
        .iter()
        .map(|&r| window_len(grid, r))
        .filter(|&l| l >= 2 && l <= grid.len())
        .collect();
    lens.sort_unstable();
    lens.dedup();
    if lens.is_empty() {
        return input(
            "no window fits on the grid: radii are below the spacing or above the extent",
        );
    }
    Ok(lens)
}

/// Window mean, taken relative to the first sample so constant windows are exact.
fn mean<T: Real, V: FieldValue<T>>(values: &[V]) -> V {
    let base = values[0];
    let minus = base.scale(-T::one());
    let sum = values[1..]
        .iter()
        .fold(V::zero(), |acc, &v| acc.add(v.add(minus)));
    base.add(sum.scale(T::one() / from_usize(values.len())))
}

/// Largest mean oscillation `(1/|B|)∫_B |f - f_B|` over all windows.
///
/// Each radius `r` becomes a window of `round(2r/h)` consecutive samples,
/// placed at every grid position; integrals are midpoint sums.
pub fn bmo_seminorm<T: Real, V: FieldValue<T>>(
    values: &[V],
    grid: &Grid<T>,
    radii: &[T],
) -> Result<T> {
    check_len(values.len(), grid)?;
    let mut best = T::zero();
    for l in window_lengths(grid, radii)? {
        let inv = T::one() / from_usize(l);
        for w in values.windows(l) {
            let avg = mean(w);
            let osc: T = w.iter().map(|&v| v.dist(avg)).sum::<T>() * inv;
            best = best.max(osc);
        }
    }
    Ok(best)
}

/// Largest double average `(1/|B|²)∫_B∫_B |f(y) - f(z)|` over the same
/// windows as [`bmo_seminorm`]; lies between one and two times it.
pub fn bmo_double_average<T: Real, V: FieldValue<T>>(
    values: &[V],
    grid: &Grid<T>,
    radii: &[T],
) -> Result<T> {
    check_len(values.len(), grid)?;
    let mut best = T::zero();
    for l in window_lengths(grid, radii)? {
        let inv2 = T::one() / from_usize::<T>(l * l);
        let pair_sum = |start: usize| -> T {
            let w = &values[start..start + l];
            let mut s = T::zero();
            for i in 0..l {
                for j in i + 1..l {
                    s = s + w[i].dist(w[j]);
                }
            }
            s + s
        };
        let mut s = pair_sum(0);
        best = best.max(s * inv2);
        for start in 1..=values.len() - l {
            if start % 64 == 0 {
                s = pair_sum(start);
            } else {
                // slide: drop pairs with the outgoing sample, add those with the incoming one
                let out = values[start - 1];
                let inc = values[start + l - 1];
                let mut delta = T::zero();
                for &v in &values[start..start + l - 1] {
                    delta = delta + inc.dist(v) - out.dist(v);
                }
                s = s + delta + delta;
            }
            best = best.max(s * inv2);
        }
    }
    Ok(best)
}

fn check_len<T: Real>(n: usize, grid: &Grid<T>) -> Result<()> {
    if n != grid.len() {
        return input(format!("{n} samples for a grid of {} points", grid.len()));
    }
    Ok(())
}

/// Radii `extent·2^{-k}` for `k = 0..levels`, dropping those below the spacing.
pub fn dyadic_radii<T: Real>(grid: &Grid<T>, levels: usize) -> Vec<T> {
    let mut r = grid.extent();
    let mut out = Vec::new();
    for _ in 0..levels {
        if r < grid.spacing() {
            break;
        }
        out.push(r);
        r = r * lit(0.5);
    }
    out
}

/// BMO semi-norm of a spin field over dyadic windows.
pub fn spin_bmo<T: Real>(m: &SpinField<T>, levels: usize) -> Result<T> {
    bmo_seminorm(m.values(), m.grid(), &dyadic_radii(m.grid(), levels))
}

/// BMO semi-norm of a complex field over dyadic windows.
pub fn complex_bmo<T: Real>(u: &ComplexField<T>, levels: usize) -> Result<T> {
    bmo_seminorm(u.values(), u.grid(), &dyadic_radii(u.grid(), levels))
}

/// Time-indexed samples of a field on one spatial grid, with optional gradients.
#[derive(Debug, Clone, PartialEq)]
pub struct Trajectory<T, V> {
    grid: Grid<T>,
    times: Vec<T>,
    values: Vec<Vec<V>>,
    gradients: Option<Vec<Vec<V>>>,
}

impl<T: Real, V: FieldValue<T>> Trajectory<T, V> {
    pub fn new(grid: Grid<T>, times: Vec<T>, values: Vec<Vec<V>>) -> Result<Self> {
        if times.is_empty() {
            return input("trajectory has no samples");
        }
        if times.len() != values.len() {
            return input(format!(
                "{} times but {} snapshots",
                times.len(),
                values.len()
            ));
        }
        if !(times[0] > T::zero()) || times.windows(2).any(|w| !(w[1] > w[0])) {
            return input("sample times must be positive and strictly increasing");
        }
        for v in &values {
            check_len(v.len(), &grid)?;
            if v.iter().any(|z| !z.magnitude().is_finite()) {
                return input("trajectory contains non-finite samples");
            }
        }
        Ok(Self {
            grid,
            times,
            values,
            gradients: None,
        })
    }

    pub fn with_gradients(mut self, gradients: Vec<Vec<V>>) -> Result<Self> {
        if gradients.len() != self.times.len() {
            return input("gradient snapshots do not match the sample times");
        }
        for g in &gradients {
            check_len(g.len(), &self.grid)?;
        }
        self.gradients = Some(gradients);
        Ok(self)
    }

    #[inline]
    pub fn grid(&self) -> &Grid<T> {
        &self.grid
    }

    #[inline]
    pub fn times(&self) -> &[T] {
        &self.times
    }

    #[inline]
    pub fn values(&self) -> &[Vec<V>] {
        &self.values
    }

    #[inline]
    pub fn gradients(&self) -> Option<&[Vec<V>]> {
        self.gradients.as_deref()
    }

    #[inline]
    pub fn len(&self) -> usize {
        self.times.len()
    }

    #[inline]
    pub fn is_empty(&self) -> bool {
        self.times.is_empty()
    }

    /// Pointwise difference of two trajectories sampled identically.
    pub fn difference(&self, other: &Self) -> Result<Self> {
        if !self.grid.same_as(&other.grid) || self.times != other.times {
            return input("trajectories are sampled differently");
        }
        let diff = |a: &[Vec<V>], b: &[Vec<V>]| -> Vec<Vec<V>> {
            a.iter()
                .zip(b)
                .map(|(x, y)| {
                    x.iter()
                        .zip(y)
                        .map(|(&p, &q)| p.add(q.scale(-T::one())))
                        .collect()
                })
                .collect()
        };
        let mut out = Self::new(
            self.grid,
            self.times.clone(),
            diff(&self.values, &other.values),
        )?;
        if let (Some(a), Some(b)) = (&self.gradients, &other.gradients) {
            out = out.with_gradients(diff(a, b))?;
        }
        Ok(out)
    }
}

impl<T: Real> Trajectory<T, Complex<T>> {
    pub fn from_complex_fields(times: Vec<T>, fields: Vec<ComplexField<T>>) -> Result<Self> {
        let grid = *fields
            .first()
            .ok_or_else(|| Error::Input("no fields".into()))?
            .grid();
        if fields.iter().any(|f| !f.grid().same_as(&grid)) {
            return input("fields are sampled on different grids");
        }
        Self::new(
            grid,
            times,
            fields.into_iter().map(ComplexField::into_values).collect(),
        )
    }
}

impl<T: Real> Trajectory<T, Vec3<T>> {
    pub fn from_spin_fields(times: Vec<T>, fields: Vec<SpinField<T>>) -> Result<Self> {
        let grid = *fields
            .first()
            .ok_or_else(|| Error::Input("no fields".into()))?
            .grid();
        if fields.iter().any(|f| !f.grid().same_as(&grid)) {
            return input("fields are sampled on different grids");
        }
        Self::new(
            grid,
            times,
            fields.into_iter().map(SpinField::into_values).collect(),
        )
    }
}

/// Family of parabolic balls `Q_r(x) = B_r(x) × [0, r²]`.
#[derive(Debug, Clone, PartialEq)]
pub struct ParabolicBallSet<T> {
    centers: Vec<T>,
    radii: Vec<T>,
}

impl<T: Real> ParabolicBallSet<T> {
    pub fn new(centers: Vec<T>, radii: Vec<T>) -> Result<Self> {
        if centers.is_empty() || radii.is_empty() {
            return input("ball family is empty");
        }
        if radii.iter().any(|&r| !(r > T::zero())) {
            return input("ball radii must be positive");
        }
        Ok(Self { centers, radii })
    }

    /// Every `stride`-th grid point as a center, radii `r_max·2^{-k}` for
    /// `k < levels` where `r_max` is the largest radius whose ball fits both
    /// the spatial domain around 0 and the sampled time range.
    pub fn dyadic(grid: &Grid<T>, t_max: T, levels: usize, stride: usize) -> Result<Self> {
        let r_max = grid.extent().min(t_max.sqrt());
        let mut radii = Vec::new();
        let mut r = r_max;
        for _ in 0..levels {
            if r < grid.spacing() {
                break;
            }
            radii.push(r);
            r = r * lit(0.5);
        }
        let centers = (0..grid.len())
            .step_by(stride.max(1))
            .map(|i| grid.x(i))
            .collect();
        Self::new(centers, radii)
    }

    #[inline]
    pub fn centers(&self) -> &[T] {
        &self.centers
    }

    #[inline]
    pub fn radii(&self) -> &[T] {
        &self.radii
    }
}

/// The two addends of a Carleson-type norm.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct NormParts<T> {
    /// Weighted sup-in-time part.
    pub sup: T,
    /// Supremum over parabolic balls.
    pub carleson: T,
}

impl<T: Real> NormParts<T> {
    #[inline]
    pub fn total(&self) -> T {
        self.sup + self.carleson
    }
}

/// `sup_{x,r} r^{-1} ∫_{Q_r(x)} F` where `density[k][i] = F(x_i, t_k)`.
///
/// Space integrals are midpoint sums over the grid points inside `B_r(x)`;
/// time integrals use the trapezoid rule in `ln t` from the first sample up
/// to `min(r², t_last)`, so the part of `[0, t_first]` is omitted and the
/// result is a lower bound. Balls that leave the spatial grid are skipped.
fn carleson_sup<T: Real>(
    grid: &Grid<T>,
    times: &[T],
    density: &[Vec<T>],
    balls: &ParabolicBallSet<T>,
) -> Result<T> {
    let h = grid.spacing();
    // prefix sums per time level
    let prefix: Vec<Vec<T>> = density
        .iter()
        .map(|row| {
            let mut acc = Vec::with_capacity(row.len() + 1);
            acc.push(T::zero());
            let mut s = T::zero();
            for &v in row {
                s = s + v;
                acc.push(s);
            }
            acc
        })
        .collect();
    let lo_x = grid.origin() - h * lit(0.5);
    let hi_x = grid.origin() + h * (from_usize::<T>(grid.len()) - lit(0.5));
    let ln_t: Vec<T> = times.iter().map(|t| t.ln()).collect();
    let mut best = T::zero();
    let mut used = false;
    for &r in balls.radii() {
        let t_end = (r * r).min(*times.last().unwrap());
        let n_t = times.iter().take_while(|&&t| t <= t_end).count();
        if n_t == 0 {
            continue;
        }
        for &x in balls.centers() {
            if x - r < lo_x - h * lit(1e-9) || x + r > hi_x + h * lit(1e-9) {
                continue;
            }
            // grid points with |x_i - x| < r
            let first = ((x - r - grid.origin()) / h)
                .ceil()
                .max(T::zero())
                .to_usize()
                .unwrap();
            let last_excl =
                (((x + r - grid.origin()) / h).floor().to_usize().unwrap() + 1).min(grid.len());
            if first >= last_excl {
                continue;
            }
            used = true;
            let space = |k: usize| (prefix[k][last_excl] - prefix[k][first]) * h;
            // ∫ F dt = ∫ F·t d(ln t)
            let mut integral = T::zero();
            let mut prev = space(0) * times[0];
            for k in 1..n_t {
                let cur = space(k) * times[k];
                integral = integral + (prev + cur) * lit(0.5) * (ln_t[k] - ln_t[k - 1]);
                prev = cur;
            }
            if n_t < times.len() && t_end > times[n_t - 1] {
                // partial last interval, interpolated in ln t
                let k = n_t;
                let w = (t_end.ln() - ln_t[k - 1]) / (ln_t[k] - ln_t[k - 1]);
                let next = space(k) * times[k];
                let at_end = prev + (next - prev) * w;
                integral = integral + (prev + at_end) * lit(0.5) * (t_end.ln() - ln_t[k - 1]);
            }
            best = best.max(integral / r);
        }
    }
    if !used {
        return input("no parabolic ball fits inside the sampled space-time box");
    }
    Ok(best)
}

/// `[v]_X = sup_t √t‖∇v‖_∞ + sup_{Q_r(x)} (r^{-1}∫_{Q_r(x)} |∇v|²)^{1/2}`.
pub fn x_seminorm<T: Real, V: FieldValue<T>>(
    tr: &Trajectory<T, V>,
    balls: &ParabolicBallSet<T>,
) -> Result<NormParts<T>> {
    let grads = tr
        .gradients()
        .ok_or_else(|| Error::Input("trajectory carries no gradients".into()))?;
    let mut sup = T::zero();
    for (t, g) in tr.times().iter().zip(grads) {
        let m = g.iter().map(|v| v.magnitude()).fold(T::zero(), T::max);
        sup = sup.max(t.sqrt() * m);
    }
    let density: Vec<Vec<T>> = grads
        .iter()
        .map(|g| g.iter().map(|v| v.magnitude().powi(2)).collect())
        .collect();
    let carleson = carleson_sup(tr.grid(), tr.times(), &density, balls)?.sqrt();
    Ok(NormParts { sup, carleson })
}

/// `‖v‖_Y = sup_t t‖v‖_∞ + sup_{Q_r(x)} r^{-1}∫_{Q_r(x)} |v|`.
pub fn y_norm<T: Real, V: FieldValue<T>>(
    tr: &Trajectory<T, V>,
    balls: &ParabolicBallSet<T>,
) -> Result<NormParts<T>> {
    let mut sup = T::zero();
    for (&t, v) in tr.times().iter().zip(tr.values()) {
        let m = v.iter().map(|z| z.magnitude()).fold(T::zero(), T::max);
        sup = sup.max(t * m);
    }
    let density: Vec<Vec<T>> = tr
        .values()
        .iter()
        .map(|v| v.iter().map(|z| z.magnitude()).collect())
        .collect();
    let carleson = carleson_sup(tr.grid(), tr.times(), &density, balls)?;
    Ok(NormParts { sup, carleson })
}

/// Carleson integral of `|∂ₓ m_{c,α}|²` over `Q_r(x)`, divided by `r`:
/// `(√2c²/√α) ∫ E₁(z²) dz` over `[√(α/2)(x/r - 1), √(α/2)(x/r + 1)]`.
pub fn carleson_selfsim<T: Real>(c: T, alpha: T, x: T, r: T) -> Result<T> {
    if !(r > T::zero()) {
        return domain(format!("ball radius must be positive, got {r}"));
    }
    if !(alpha > T::zero() && alpha <= T::one()) {
        return domain(format!("damping must lie in (0, 1], got {alpha}"));
    }
    if c == T::zero() {
        return Ok(T::zero());
    }
    let k = (alpha * lit(0.5)).sqrt();
    let lo = k * (x / r - T::one());
    let hi = k * (x / r + T::one());
    let f = |z: T| e1(z * z).unwrap_or(T::zero());
    let opts = QuadOptions::with_tol(
        lit::<T>(1e-14).max(T::epsilon()),
        lit::<T>(1e-12).max(T::epsilon() * lit(16.0)),
    );
    let integral = if lo < T::zero() && hi > T::zero() {
        integrate(f, lo, T::zero(), opts)? + integrate(f, T::zero(), hi, opts)?
    } else {
        integrate(f, lo, hi, opts)?
    };
    Ok(T::SQRT_2() * c * c / alpha.sqrt() * integral)
}

/// The bound `2√(2π)c²/√α` satisfied by [`carleson_selfsim`] for every ball.
pub fn carleson_selfsim_bound<T: Real>(c: T, alpha: T) -> T {
    lit::<T>(2.0) * (T::PI() + T::PI()).sqrt() * c * c / alpha.sqrt()
}
