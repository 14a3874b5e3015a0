//! Uniform 1-D grids and the complex / sphere-valued fields that live on them.

use num_complex::Complex;

use crate::error::{input, Result};
use crate::scalar::{from_usize, lit, to_f64, unit_tolerance, Real};

/// A point of R^3.
pub type Vec3<T> = [T; 3];

pub mod vec3 {
    use super::Vec3;
    use crate::scalar::Real;

    #[inline]
    pub fn add<T: Real>(a: Vec3<T>, b: Vec3<T>) -> Vec3<T> {
        [a[0] + b[0], a[1] + b[1], a[2] + b[2]]
    }

    #[inline]
    pub fn sub<T: Real>(a: Vec3<T>, b: Vec3<T>) -> Vec3<T> {
        [a[0] - b[0], a[1] - b[1], a[2] - b[2]]
    }

    #[inline]
    pub fn scale<T: Real>(s: T, a: Vec3<T>) -> Vec3<T> {
        [s * a[0], s * a[1], s * a[2]]
    }

    #[inline]
    pub fn dot<T: Real>(a: Vec3<T>, b: Vec3<T>) -> T {
        a[0] * b[0] + a[1] * b[1] + a[2] * b[2]
    }

    #[inline]
    pub fn cross<T: Real>(a: Vec3<T>, b: Vec3<T>) -> Vec3<T> {
        [
            a[1] * b[2] - a[2] * b[1],
            a[2] * b[0] - a[0] * b[2],
            a[0] * b[1] - a[1] * b[0],
        ]
    }

    #[inline]
    pub fn norm<T: Real>(a: Vec3<T>) -> T {
        dot(a, a).sqrt()
    }

    #[inline]
    pub fn dist<T: Real>(a: Vec3<T>, b: Vec3<T>) -> T {
        norm(sub(a, b))
    }

    /// Returns `a / |a|`; the zero vector is returned unchanged.
    #[inline]
    pub fn normalize<T: Real>(a: Vec3<T>) -> Vec3<T> {
        let n = norm(a);
        if n > T::zero() {
            scale(T::one() / n, a)
        } else {
            a
        }
    }

    /// Reflection `(a1, a2, a3) -> (a1, -a2, -a3)` relating the two limit vectors.
    #[inline]
    pub fn reflect<T: Real>(a: Vec3<T>) -> Vec3<T> {
        [a[0], -a[1], -a[2]]
    }
}

/// Uniform grid `x_i = origin + i * spacing`, `i = 0..len`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Grid<T> {
    origin: T,
    spacing: T,
    len: usize,
}

impl<T: Real> Grid<T> {
    pub fn new(origin: T, spacing: T, len: usize) -> Result<Self> {
        if !(spacing > T::zero()) || !spacing.is_finite() {
            return input(format!("grid spacing must be positive, got {spacing}"));
        }
        if !origin.is_finite() {
            return input("grid origin must be finite");
        }
        if len < 2 {
            return input(format!("a grid needs at least 2 samples, got {len}"));
        }
        Ok(Self {
            origin,
            spacing,
            len,
        })
    }

    /// Cell-centred grid covering `[-half_width, half_width]` with `len` cells.
    ///
    /// The sample points are symmetric about 0 and, for even `len`, 0 itself
    /// is not a node. This is the layout the reflecting spectral mode expects.
    pub fn centered(half_width: T, len: usize) -> Result<Self> {
        if !(half_width > T::zero()) {
            return input(format!("half width must be positive, got {half_width}"));
        }
        let h = (half_width + half_width) / from_usize(len.max(1));
        Self::new(-half_width + h * lit(0.5), h, len)
    }

    /// Node grid on `[-half_width, half_width]` whose middle sample is exactly 0.
    pub fn symmetric_nodes(half_width: T, len_half: usize) -> Result<Self> {
        if len_half == 0 || !(half_width > T::zero()) {
            return input("symmetric node grid needs positive half width and len");
        }
        let h = half_width / from_usize(len_half);
        Self::new(-half_width, h, 2 * len_half + 1)
    }

    #[inline]
    pub fn origin(&self) -> T {
        self.origin
    }

    #[inline]
    pub fn spacing(&self) -> T {
        self.spacing
    }

    #[inline]
    pub fn len(&self) -> usize {
        self.len
    }

    #[inline]
    pub fn is_empty(&self) -> bool {
        self.len == 0
    }

    #[inline]
    pub fn x(&self, i: usize) -> T {
        self.origin + self.spacing * from_usize(i)
    }

    pub fn points(&self) -> Vec<T> {
        (0..self.len).map(|i| self.x(i)).collect()
    }

    /// Half-width of the covered interval, counting half a cell at each end.
    pub fn extent(&self) -> T {
        self.spacing * from_usize(self.len) * lit(0.5)
    }

    /// Index of the sample nearest to `x`; ties go to the larger index.
    pub fn nearest(&self, x: T) -> usize {
        let r = ((x - self.origin) / self.spacing).to_f64().unwrap_or(0.0);
        let i = (r + 0.5).floor();
        i.clamp(0.0, (self.len - 1) as f64) as usize
    }

    /// Same grid with each spacing scaled by `factor` (used for parabolic rescaling).
    pub fn scaled(&self, factor: T) -> Result<Self> {
        Self::new(self.origin * factor, self.spacing * factor, self.len)
    }

    pub fn same_as(&self, other: &Self) -> bool {
        self.len == other.len
            && (self.spacing - other.spacing).abs() <= self.spacing * lit(1e-12)
            && (self.origin - other.origin).abs() <= self.spacing * lit(1e-9)
    }
}

/// Complex samples on a uniform grid.
#[derive(Debug, Clone, PartialEq)]
pub struct ComplexField<T> {
    grid: Grid<T>,
    values: Vec<Complex<T>>,
}

impl<T: Real> ComplexField<T> {
    pub fn new(grid: Grid<T>, values: Vec<Complex<T>>) -> Result<Self> {
        if values.len() != grid.len() {
            return input(format!(
                "field has {} samples but the grid has {}",
                values.len(),
                grid.len()
            ));
        }
        if let Some(i) = values
            .iter()
            .position(|z| !z.re.is_finite() || !z.im.is_finite())
        {
            return input(format!("non-finite sample at x = {}", to_f64(grid.x(i))));
        }
        Ok(Self { grid, values })
    }

    pub fn from_fn(grid: Grid<T>, f: impl Fn(T) -> Complex<T>) -> Result<Self> {
        let values = (0..grid.len()).map(|i| f(grid.x(i))).collect();
        Self::new(grid, values)
    }

    pub fn constant(grid: Grid<T>, q: Complex<T>) -> Result<Self> {
        Self::new(grid, vec![q; grid.len()])
    }

    #[inline]
    pub fn grid(&self) -> &Grid<T> {
        &self.grid
    }

    #[inline]
    pub fn values(&self) -> &[Complex<T>] {
        &self.values
    }

    pub fn into_values(self) -> Vec<Complex<T>> {
        self.values
    }

    pub fn sup_norm(&self) -> T {
        self.values.iter().map(|z| z.norm()).fold(T::zero(), T::max)
    }

    /// `max_i |u_i - v_i|`; the grids must agree.
    pub fn sup_distance(&self, other: &Self) -> T {
        self.values
            .iter()
            .zip(&other.values)
            .map(|(a, b)| (a - b).norm())
            .fold(T::zero(), T::max)
    }
}

/// Unit 3-vectors on a uniform grid.
#[derive(Debug, Clone, PartialEq)]
pub struct SpinField<T> {
    grid: Grid<T>,
    values: Vec<Vec3<T>>,
}

impl<T: Real> SpinField<T> {
    pub fn new(grid: Grid<T>, values: Vec<Vec3<T>>) -> Result<Self> {
        if values.len() != grid.len() {
            return input(format!(
                "field has {} samples but the grid has {}",
                values.len(),
                grid.len()
            ));
        }
        let tol = unit_tolerance::<T>();
        for (i, m) in values.iter().enumerate() {
            if m.iter().any(|c| !c.is_finite()) {
                return input(format!("non-finite spin at x = {}", to_f64(grid.x(i))));
            }
            let dev = (vec3::norm(*m) - T::one()).abs();
            if dev > tol {
                return input(format!(
                    "spin at x = {} is not unit length (| |m| - 1 | = {:e})",
                    to_f64(grid.x(i)),
                    to_f64(dev)
                ));
            }
        }
        Ok(Self { grid, values })
    }

    /// Builds a field from `f`, renormalizing every sample to the sphere.
    pub fn from_fn_normalized(grid: Grid<T>, f: impl Fn(T) -> Vec3<T>) -> Result<Self> {
        let values = (0..grid.len())
            .map(|i| vec3::normalize(f(grid.x(i))))
            .collect();
        Self::new(grid, values)
    }

    pub fn constant(grid: Grid<T>, q: Vec3<T>) -> Result<Self> {
        Self::new(grid, vec![q; grid.len()])
    }

    #[inline]
    pub fn grid(&self) -> &Grid<T> {
        &self.grid
    }

    #[inline]
    pub fn values(&self) -> &[Vec3<T>] {
        &self.values
    }

    pub fn into_values(self) -> Vec<Vec3<T>> {
        self.values
    }

    /// Smallest third component over the grid together with its location.
    pub fn min_m3(&self) -> (T, T) {
        let mut best = (T::infinity(), self.grid.x(0));
        for (i, m) in self.values.iter().enumerate() {
            if m[2] < best.0 {
                best = (m[2], self.grid.x(i));
            }
        }
        best
    }

    pub fn sup_distance(&self, other: &Self) -> T {
        self.values
            .iter()
            .zip(&other.values)
            .map(|(a, b)| vec3::dist(*a, *b))
            .fold(T::zero(), T::max)
    }
}
