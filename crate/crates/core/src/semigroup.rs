//! The Ginzburg–Landau semigroup `S_α(t) = e^{(α+iβ)tΔ}`.
//!
//! Three realizations are provided: pointwise evaluation of the complex
//! Gaussian kernel, a Fourier-multiplier action on grid fields, and the
//! exact action on step data `a₊χ_{x>0} + a₋χ_{x<0}` through the complex
//! error function.

use num_complex::Complex;

use crate::error::{domain, Error, Result};
use crate::field::{ComplexField, Grid};
use crate::scalar::{cplx, lit, Real};
use crate::specfun::erf_complex;
use crate::spectral::{Boundary, Spectral};

/// Damping `α ∈ (0, 1]`, exchange `β = sqrt(1 - α²)` and spatial dimension.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct GlParams<T> {
    alpha: T,
    beta: T,
    dim: usize,
}

impl<T: Real> GlParams<T> {
    pub fn new(alpha: T) -> Result<Self> {
        Self::with_dim(alpha, 1)
    }

    pub fn with_dim(alpha: T, dim: usize) -> Result<Self> {
        if !(alpha > T::zero() && alpha <= T::one()) {
            return domain(format!("damping must lie in (0, 1], got {alpha}"));
        }
        if dim == 0 {
            return domain("spatial dimension must be at least 1");
        }
        let beta = (T::one() - alpha * alpha).max(T::zero()).sqrt();
        Ok(Self { alpha, beta, dim })
    }

    #[inline]
    pub fn alpha(&self) -> T {
        self.alpha
    }

    #[inline]
    pub fn beta(&self) -> T {
        self.beta
    }

    #[inline]
    pub fn dim(&self) -> usize {
        self.dim
    }

    /// `α + iβ`.
    #[inline]
    pub fn diffusivity(&self) -> Complex<T> {
        cplx(self.alpha, self.beta)
    }

    /// `β - iα`, the coefficient of the Laplacian in the Schrödinger form.
    #[inline]
    pub fn schrodinger_coefficient(&self) -> Complex<T> {
        cplx(self.beta, -self.alpha)
    }

    /// Fourier symbol `e^{-(α+iβ)ξ²t}`.
    #[inline]
    pub fn symbol(&self, xi: T, t: T) -> Complex<T> {
        (-self.diffusivity() * (xi * xi * t)).exp()
    }
}

fn check_time<T: Real>(t: T, strict: bool) -> Result<()> {
    let ok = if strict {
        t > T::zero()
    } else {
        t >= T::zero()
    };
    if ok && t.is_finite() {
        Ok(())
    } else {
        domain(format!(
            "time must be {} 0, got {t}",
            if strict { ">" } else { ">=" }
        ))
    }
}

/// `G_α(x, t) = exp(-|x|²/(4(α+iβ)t)) / (4π(α+iβ)t)^{N/2}` with `N = x.len()`.
pub fn kernel_value<T: Real>(x: &[T], t: T, p: &GlParams<T>) -> Result<Complex<T>> {
    check_time(t, true)?;
    if x.len() != p.dim() {
        return Err(Error::Input(format!(
            "point has {} coordinates, expected {}",
            x.len(),
            p.dim()
        )));
    }
    let r2: T = x.iter().map(|&xi| xi * xi).sum();
    let d = p.diffusivity();
    let four_pi: T = lit(4.0 * std::f64::consts::PI);
    let base = d * (four_pi * t);
    let norm = base.powf(lit::<T>(0.5) * lit::<T>(p.dim() as f64));
    Ok((-(d * lit::<T>(4.0) * t).inv() * r2).exp() / norm)
}

/// `(S_α(t) u⁰)(x)` for the step datum `u⁰ = a₊χ_{x>0} + a₋χ_{x<0}`.
pub fn apply_to_step<T: Real>(
    a_plus: Complex<T>,
    a_minus: Complex<T>,
    x: T,
    t: T,
    p: &GlParams<T>,
) -> Result<Complex<T>> {
    check_time(t, true)?;
    if p.dim() != 1 {
        return Err(Error::Unsupported(
            "step data are only defined in one dimension".into(),
        ));
    }
    let half: T = lit(0.5);
    let z = cplx(x, T::zero()) / (p.diffusivity() * (lit::<T>(4.0) * t)).sqrt();
    Ok((a_plus + a_minus) * half + (a_plus - a_minus) * half * erf_complex(z))
}

/// `∂ₓ(S_α(t) u⁰)(x) = (a₊ - a₋) G_α(x, t)` for step data.
pub fn step_gradient<T: Real>(
    a_plus: Complex<T>,
    a_minus: Complex<T>,
    x: T,
    t: T,
    p: &GlParams<T>,
) -> Result<Complex<T>> {
    if p.dim() != 1 {
        return Err(Error::Unsupported(
            "step data are only defined in one dimension".into(),
        ));
    }
    Ok((a_plus - a_minus) * kernel_value(&[x], t, p)?)
}

/// [`apply_to_step`] sampled on a grid.
pub fn step_field<T: Real>(
    a_plus: Complex<T>,
    a_minus: Complex<T>,
    grid: Grid<T>,
    t: T,
    p: &GlParams<T>,
) -> Result<ComplexField<T>> {
    let values = grid
        .points()
        .into_iter()
        .map(|x| apply_to_step(a_plus, a_minus, x, t, p))
        .collect::<Result<Vec<_>>>()?;
    ComplexField::new(grid, values)
}

/// Spectral realization of `S_α(t)` on a fixed one-dimensional grid.
#[derive(Debug, Clone)]
pub struct Semigroup<T: Real> {
    spectral: Spectral<T>,
    params: GlParams<T>,
}

impl<T: Real> Semigroup<T> {
    pub fn new(grid: Grid<T>, boundary: Boundary, params: GlParams<T>) -> Result<Self> {
        if params.dim() != 1 {
            return Err(Error::Unsupported(
                "the spectral semigroup is one-dimensional".into(),
            ));
        }
        Ok(Self {
            spectral: Spectral::new(grid, boundary),
            params,
        })
    }

    #[inline]
    pub fn params(&self) -> &GlParams<T> {
        &self.params
    }

    #[inline]
    pub fn spectral(&self) -> &Spectral<T> {
        &self.spectral
    }

    #[inline]
    pub fn grid(&self) -> &Grid<T> {
        self.spectral.grid()
    }

    /// `S_α(t) u` by the Fourier multiplier `e^{-(α+iβ)ξ²t}`.
    ///
    /// Logs a warning when the input is not resolved at the Nyquist mode,
    /// since the periodized result is then polluted by aliasing.
    pub fn apply(&self, u: &ComplexField<T>, t: T) -> Result<ComplexField<T>> {
        check_time(t, false)?;
        if !u.grid().same_as(self.grid()) {
            return Err(Error::Input(
                "field grid differs from the semigroup grid".into(),
            ));
        }
        if t == T::zero() {
            return Ok(u.clone());
        }
        let fraction = self.spectral.nyquist_fraction(u.values());
        if fraction > lit(1e-12) {
            log::warn!("field is under-resolved: Nyquist-band fraction {fraction:e}");
        }
        ComplexField::new(*u.grid(), self.apply_values(u.values(), t))
    }

    /// Unchecked variant of [`Semigroup::apply`] on raw samples.
    pub fn apply_values(&self, values: &[Complex<T>], t: T) -> Vec<Complex<T>> {
        let p = self.params;
        self.spectral.apply_multiplier(values, |xi| p.symbol(xi, t))
    }

    /// Multiplies a spectrum (as produced by [`Spectral::forward`]) by the symbol.
    pub fn evolve_spectrum(&self, spectrum: &mut [Complex<T>], t: T) {
        let p = self.params;
        self.spectral
            .multiply_spectrum(spectrum, |xi| p.symbol(xi, t));
    }
}
