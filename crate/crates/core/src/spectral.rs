//! FFT-based differentiation and Fourier multipliers on a uniform grid.
//!
//! Two boundary treatments are available. `Periodic` treats the samples as
//! one period of a periodic function. `Reflecting` mirrors the samples about
//! both ends (half-sample symmetric extension) before transforming, which is
//! exact for fields whose derivatives vanish at the domain edges, such as
//! spin fields that settle to different constants at the two ends.

use std::fmt;
use std::sync::Arc;

use num_complex::Complex;
use rustfft::{Fft, FftPlanner};

use crate::field::Grid;
use crate::scalar::{from_usize, Real};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum Boundary {
    #[default]
    Periodic,
    Reflecting,
}

/// Precomputed FFT plans and wavenumbers for one grid.
#[derive(Clone)]
pub struct Spectral<T: Real> {
    grid: Grid<T>,
    boundary: Boundary,
    wavenumbers: Vec<T>,
    nyquist: Option<usize>,
    forward: Arc<dyn Fft<T>>,
    inverse: Arc<dyn Fft<T>>,
}

impl<T: Real> fmt::Debug for Spectral<T> {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_struct("Spectral")
            .field("grid", &self.grid)
            .field("boundary", &self.boundary)
            .field("transform_len", &self.wavenumbers.len())
            .finish()
    }
}

impl<T: Real> Spectral<T> {
    pub fn new(grid: Grid<T>, boundary: Boundary) -> Self {
        let m = match boundary {
            Boundary::Periodic => grid.len(),
            Boundary::Reflecting => 2 * grid.len(),
        };
        let mut planner = FftPlanner::<T>::new();
        let forward = planner.plan_fft_forward(m);
        let inverse = planner.plan_fft_inverse(m);
        let period = grid.spacing() * from_usize(m);
        let two_pi = T::PI() + T::PI();
        let wavenumbers = (0..m)
            .map(|k| {
                let signed = if k <= m / 2 {
                    k as f64
                } else {
                    k as f64 - m as f64
                };
                two_pi * T::from_f64(signed).unwrap() / period
            })
            .collect();
        let nyquist = (m % 2 == 0).then_some(m / 2);
        Self {
            grid,
            boundary,
            wavenumbers,
            nyquist,
            forward,
            inverse,
        }
    }

    #[inline]
    pub fn grid(&self) -> &Grid<T> {
        &self.grid
    }

    #[inline]
    pub fn boundary(&self) -> Boundary {
        self.boundary
    }

    /// Angular wavenumbers of the transform, in FFT order.
    #[inline]
    pub fn wavenumbers(&self) -> &[T] {
        &self.wavenumbers
    }

    #[inline]
    pub fn transform_len(&self) -> usize {
        self.wavenumbers.len()
    }

    fn extend(&self, values: &[Complex<T>]) -> Vec<Complex<T>> {
        debug_assert_eq!(values.len(), self.grid.len());
        match self.boundary {
            Boundary::Periodic => values.to_vec(),
            Boundary::Reflecting => {
                let mut ext = Vec::with_capacity(2 * values.len());
                ext.extend_from_slice(values);
                ext.extend(values.iter().rev().copied());
                ext
            }
        }
    }

    /// Unnormalized discrete Fourier coefficients of the (extended) samples.
    pub fn forward(&self, values: &[Complex<T>]) -> Vec<Complex<T>> {
        let mut buf = self.extend(values);
        self.forward.process(&mut buf);
        buf
    }

    /// Inverse of [`Spectral::forward`], truncated back to the grid.
    pub fn inverse(&self, mut spectrum: Vec<Complex<T>>) -> Vec<Complex<T>> {
        self.inverse.process(&mut spectrum);
        let scale = T::one() / from_usize(spectrum.len());
        spectrum.truncate(self.grid.len());
        for z in spectrum.iter_mut() {
            *z = *z * scale;
        }
        spectrum
    }

    /// Applies the Fourier multiplier `symbol(xi)` to the samples.
    pub fn apply_multiplier(
        &self,
        values: &[Complex<T>],
        symbol: impl Fn(T) -> Complex<T>,
    ) -> Vec<Complex<T>> {
        let mut spec = self.forward(values);
        for (z, &xi) in spec.iter_mut().zip(&self.wavenumbers) {
            *z = *z * symbol(xi);
        }
        self.inverse(spec)
    }

    /// Multiplies an already transformed spectrum in place.
    pub fn multiply_spectrum(&self, spectrum: &mut [Complex<T>], symbol: impl Fn(T) -> Complex<T>) {
        for (z, &xi) in spectrum.iter_mut().zip(&self.wavenumbers) {
            *z = *z * symbol(xi);
        }
    }

    /// First derivative; the Nyquist mode is dropped so real data stays real.
    pub fn derivative(&self, values: &[Complex<T>]) -> Vec<Complex<T>> {
        let mut spec = self.forward(values);
        self.differentiate_spectrum(&mut spec);
        self.inverse(spec)
    }

    /// In-place `d/dx` of a spectrum.
    pub fn differentiate_spectrum(&self, spec: &mut [Complex<T>]) {
        for (k, (z, &xi)) in spec.iter_mut().zip(&self.wavenumbers).enumerate() {
            if Some(k) == self.nyquist {
                *z = Complex::new(T::zero(), T::zero());
            } else {
                *z = Complex::new(-z.im * xi, z.re * xi);
            }
        }
    }

    /// First and second derivatives from a single forward transform.
    pub fn derivatives(&self, values: &[Complex<T>]) -> (Vec<Complex<T>>, Vec<Complex<T>>) {
        let spec = self.forward(values);
        let mut d1 = spec.clone();
        self.differentiate_spectrum(&mut d1);
        let mut d2 = spec;
        for (z, &xi) in d2.iter_mut().zip(&self.wavenumbers) {
            *z = *z * (-xi * xi);
        }
        (self.inverse(d1), self.inverse(d2))
    }

    /// Derivative of a real-valued sample vector.
    pub fn derivative_real(&self, values: &[T]) -> Vec<T> {
        let z: Vec<Complex<T>> = values.iter().map(|&v| Complex::new(v, T::zero())).collect();
        self.derivative(&z).into_iter().map(|c| c.re).collect()
    }

    /// Samples of `f(x + dx)` by spectral interpolation.
    pub fn shift(&self, values: &[Complex<T>], dx: T) -> Vec<Complex<T>> {
        self.apply_multiplier(values, |xi| Complex::new(T::zero(), xi * dx).exp())
    }

    /// Ratio of the largest Nyquist-band coefficient to the largest coefficient.
    ///
    /// Used as an aliasing indicator: a resolved field has a ratio far below 1e-12.
    pub fn nyquist_fraction(&self, values: &[Complex<T>]) -> T {
        let spec = self.forward(values);
        let peak = spec.iter().map(|z| z.norm()).fold(T::zero(), T::max);
        if peak == T::zero() {
            return T::zero();
        }
        let m = spec.len();
        // modes within 2 of the Nyquist index
        let mid = m / 2;
        let lo = mid.saturating_sub(2);
        let hi = (mid + 2).min(m - 1);
        let tail = spec[lo..=hi]
            .iter()
            .map(|z| z.norm())
            .fold(T::zero(), T::max);
        tail / peak
    }
}
