//! Special functions: the error function of complex argument, the
//! integrated Gaussian `Erf`, and the exponential integral `E1`.

use num_complex::Complex;

use crate::error::{domain, Result};
use crate::scalar::{from_usize, lit, Real};

const MAX_TERMS: usize = 10_000;

/// Both power series lose roughly `e^{2b²}` digits to cancellation, where
/// `b` is `|Im z|` for the scaled series and `|Re z|` for the Maclaurin
/// series; each is used only where `b` stays below this bound.
const CANCELLATION_BOUND: f64 = 1.5;

/// Beyond this radius the continued fraction is always preferred on the
/// real side of the diagonal.
const SERIES_RADIUS: f64 = 4.0;

enum Branch {
    Scaled,
    Maclaurin,
    ContinuedFraction,
}

fn branch<T: Real>(z: Complex<T>) -> Branch {
    let bound = lit::<T>(CANCELLATION_BOUND);
    if z.im.abs() <= bound && z.norm() < lit(SERIES_RADIUS) {
        Branch::Scaled
    } else if z.re.abs() <= bound {
        Branch::Maclaurin
    } else {
        Branch::ContinuedFraction
    }
}

/// `erf(z)` for complex `z`.
///
/// Chooses between two power series and the Laplace continued fraction for
/// `erfc` so that cancellation never costs more than about two digits, and
/// uses `erf(-z) = -erf(z)` for the left half-plane.
pub fn erf_complex<T: Real>(z: Complex<T>) -> Complex<T> {
    if z.re < T::zero() {
        return -erf_complex(-z);
    }
    match branch(z) {
        Branch::Scaled => erf_scaled_series(z),
        Branch::Maclaurin => erf_maclaurin(z),
        Branch::ContinuedFraction => Complex::new(T::one(), T::zero()) - erfc_continued_fraction(z),
    }
}

/// `erfc(z) = 1 - erf(z)` for complex `z`, accurate in the far right half-plane.
pub fn erfc_complex<T: Real>(z: Complex<T>) -> Complex<T> {
    let one = Complex::new(T::one(), T::zero());
    if z.re < T::zero() {
        return one + one - erfc_complex(-z);
    }
    match branch(z) {
        Branch::ContinuedFraction => erfc_continued_fraction(z),
        _ => one - erf_complex(z),
    }
}

/// `erf z = 2/sqrt(pi) e^{-z^2} sum z (2z^2)^n / (2n+1)!!`
fn erf_scaled_series<T: Real>(z: Complex<T>) -> Complex<T> {
    let z2 = z * z;
    let mut term = z;
    let mut sum = z;
    for n in 1..MAX_TERMS {
        term = term * (z2 * lit::<T>(2.0)) / from_usize::<T>(2 * n + 1);
        sum = sum + term;
        if term.norm() <= T::epsilon() * sum.norm() {
            break;
        }
    }
    sum * (-z2).exp() * T::FRAC_2_SQRT_PI()
}

/// `erf z = 2/sqrt(pi) sum (-1)^n z^{2n+1} / (n! (2n+1))`
fn erf_maclaurin<T: Real>(z: Complex<T>) -> Complex<T> {
    let z2 = z * z;
    let mut power = z;
    let mut sum = z;
    for n in 1..MAX_TERMS {
        power = -power * z2 / from_usize::<T>(n);
        let term = power / from_usize::<T>(2 * n + 1);
        sum = sum + term;
        if term.norm() <= T::epsilon() * sum.norm() {
            break;
        }
    }
    sum * T::FRAC_2_SQRT_PI()
}

/// `erfc(z) = e^{-z^2}/sqrt(pi) · 1/(z + (1/2)/(z + 1/(z + (3/2)/(z + ...))))`, `Re z >= 0`.
fn erfc_continued_fraction<T: Real>(z: Complex<T>) -> Complex<T> {
    let tiny = T::min_positive_value().sqrt();
    let eps = T::epsilon();
    let mut f = z;
    if f.norm() < tiny {
        f = Complex::new(tiny, T::zero());
    }
    let mut c = f;
    let mut d = Complex::new(T::zero(), T::zero());
    for n in 1..MAX_TERMS {
        let a = from_usize::<T>(n) * lit(0.5);
        d = z + d * a;
        if d.norm() < tiny {
            d = Complex::new(tiny, T::zero());
        }
        d = d.inv();
        c = z + c.inv() * a;
        if c.norm() < tiny {
            c = Complex::new(tiny, T::zero());
        }
        let delta = c * d;
        f = f * delta;
        if (delta - T::one()).norm() < eps {
            break;
        }
    }
    (-z * z).exp() / f / T::PI().sqrt()
}

/// Real error function.
pub fn erf<T: Real>(x: T) -> T {
    erf_complex(Complex::new(x, T::zero())).re
}

/// Real complementary error function, accurate in relative terms for large `x`.
pub fn erfc<T: Real>(x: T) -> T {
    if x >= lit(2.0) {
        erfc_continued_fraction(Complex::new(x, T::zero())).re
    } else {
        T::one() - erf(x)
    }
}

/// `Erf(s) = ∫_0^s e^{-σ²/4} dσ = sqrt(pi)·erf(s/2)`.
pub fn big_erf<T: Real>(s: T) -> T {
    T::PI().sqrt() * erf(s * lit(0.5))
}

/// Exponential integral `E1(y) = ∫_y^∞ e^{-z}/z dz` for `y > 0`.
pub fn e1<T: Real>(y: T) -> Result<T> {
    if !(y > T::zero()) || !y.is_finite() {
        return domain(format!("E1 requires a finite positive argument, got {y}"));
    }
    let eps = T::epsilon();
    if y <= T::one() {
        let euler_gamma: T = lit(0.577_215_664_901_532_9);
        let mut sum = T::zero();
        let mut power = T::one();
        for k in 1..MAX_TERMS {
            power = -power * y / from_usize::<T>(k);
            let term = power / from_usize::<T>(k);
            sum = sum + term;
            if term.abs() <= eps * sum.abs() {
                break;
            }
        }
        Ok(-euler_gamma - y.ln() - sum)
    } else {
        let tiny = T::min_positive_value().sqrt();
        let mut b = y + T::one();
        let mut c = T::one() / tiny;
        let mut d = T::one() / b;
        let mut h = d;
        for i in 1..MAX_TERMS {
            let i = from_usize::<T>(i);
            let a = -i * i;
            b = b + lit(2.0);
            d = T::one() / (a * d + b);
            c = b + a / c;
            let delta = c * d;
            h = h * delta;
            if (delta - T::one()).abs() < eps {
                break;
            }
        }
        Ok(h * (-y).exp())
    }
}
