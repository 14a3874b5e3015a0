//! Stereographic projection from the South Pole, `P(m) = (m₁ + i m₂)/(1 + m₃)`,
//! its inverse, rotations of spin fields, and chain-rule gradients.

use num_complex::Complex;

use crate::error::{Error, Result};
use crate::field::{vec3, ComplexField, SpinField, Vec3};
use crate::scalar::{lit, to_f64, Real};

/// Proper rotation of `ℝ³`, stored row-major.
pub type Matrix3<T> = [[T; 3]; 3];

/// `P(m)` for a single unit vector.
#[inline]
pub fn project_point<T: Real>(m: Vec3<T>) -> Complex<T> {
    Complex::new(m[0], m[1]) / (T::one() + m[2])
}

/// `P⁻¹(u)` for a single complex number.
#[inline]
pub fn inverse_point<T: Real>(u: Complex<T>) -> Vec3<T> {
    let r2 = u.norm_sqr();
    let s = T::one() + r2;
    let two: T = lit(2.0);
    [two * u.re / s, two * u.im / s, (T::one() - r2) / s]
}

/// Derivative of `P(m)` along a curve with tangent `dm`.
#[inline]
pub fn project_gradient<T: Real>(m: Vec3<T>, dm: Vec3<T>) -> Complex<T> {
    let s = T::one() + m[2];
    Complex::new(dm[0], dm[1]) / s - Complex::new(m[0], m[1]) * (dm[2] / (s * s))
}

/// Derivative of `P⁻¹(u)` along a curve with tangent `du`.
#[inline]
pub fn inverse_gradient<T: Real>(u: Complex<T>, du: Complex<T>) -> Vec3<T> {
    let two: T = lit(2.0);
    let s = T::one() + u.norm_sqr();
    let d_r2 = two * (u.conj() * du).re;
    let planar = du * (two / s) - u * (two * d_r2 / (s * s));
    [planar.re, planar.im, -two * d_r2 / (s * s)]
}

/// Projects a spin field whose third component stays at least `delta` above `-1`.
pub fn project<T: Real>(m: &SpinField<T>, delta: T) -> Result<ComplexField<T>> {
    if !(delta > T::zero() && delta <= lit(2.0)) {
        return Err(Error::Domain(format!(
            "pole margin must lie in (0, 2], got {delta}"
        )));
    }
    let floor = delta - T::one();
    let grid = *m.grid();
    let mut values = Vec::with_capacity(grid.len());
    for (i, &mi) in m.values().iter().enumerate() {
        if mi[2] < floor {
            return Err(Error::PoleProximity {
                x: to_f64(grid.x(i)),
                t: None,
                m3: to_f64(mi[2]),
                floor: to_f64(floor),
            });
        }
        values.push(project_point(mi));
    }
    ComplexField::new(grid, values)
}

/// `P⁻¹(u) = (2 Re u, 2 Im u, 1 - |u|²)/(1 + |u|²)`.
pub fn inverse_project<T: Real>(u: &ComplexField<T>) -> Result<SpinField<T>> {
    let values = u.values().iter().map(|&z| inverse_point(z)).collect();
    SpinField::new(*u.grid(), values)
}

/// Checks `RᵀR = I` and `det R = 1` to within `1e-12` (scaled for `f32`).
pub fn check_rotation<T: Real>(r: &Matrix3<T>) -> Result<()> {
    let tol = crate::scalar::unit_tolerance::<T>();
    for i in 0..3 {
        for j in 0..3 {
            let dot: T = (0..3).map(|k| r[k][i] * r[k][j]).sum();
            let target = if i == j { T::one() } else { T::zero() };
            if (dot - target).abs() > tol {
                return Err(Error::Input(format!(
                    "matrix is not orthogonal: (RᵀR)[{i}][{j}] = {dot}"
                )));
            }
        }
    }
    let det = vec3::dot(r[0], vec3::cross(r[1], r[2]));
    if (det - T::one()).abs() > tol {
        return Err(Error::Input(format!(
            "matrix is not a proper rotation: det = {det}"
        )));
    }
    Ok(())
}

#[inline]
pub fn apply_matrix<T: Real>(r: &Matrix3<T>, v: Vec3<T>) -> Vec3<T> {
    [vec3::dot(r[0], v), vec3::dot(r[1], v), vec3::dot(r[2], v)]
}

/// Applies a rotation pointwise.
pub fn rotate<T: Real>(m: &SpinField<T>, r: &Matrix3<T>) -> Result<SpinField<T>> {
    check_rotation(r)?;
    let values = m
        .values()
        .iter()
        .map(|&v| vec3::normalize(apply_matrix(r, v)))
        .collect();
    SpinField::new(*m.grid(), values)
}

/// Rotation by `angle` about the unit `axis` (Rodrigues' formula).
pub fn axis_angle<T: Real>(axis: Vec3<T>, angle: T) -> Matrix3<T> {
    let [x, y, z] = vec3::normalize(axis);
    let (s, c) = angle.sin_cos();
    let k = T::one() - c;
    [
        [c + x * x * k, x * y * k - z * s, x * z * k + y * s],
        [y * x * k + z * s, c + y * y * k, y * z * k - x * s],
        [z * x * k - y * s, z * y * k + x * s, c + z * z * k],
    ]
}
