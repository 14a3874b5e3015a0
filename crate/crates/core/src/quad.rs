//! Globally adaptive Gauss–Kronrod (7, 15) quadrature.

use std::ops::{Add, Mul, Sub};

use num_complex::Complex;

use crate::error::{Error, Result};
use crate::scalar::{lit, Real};

/// Values that can be integrated: reals and complex numbers.
pub trait Integrand<T: Real>:
    Copy + Add<Output = Self> + Sub<Output = Self> + Mul<T, Output = Self>
{
    fn zero() -> Self;
    fn magnitude(&self) -> T;
}

impl<T: Real> Integrand<T> for T {
    fn zero() -> Self {
        T::zero()
    }
    fn magnitude(&self) -> T {
        self.abs()
    }
}

impl<T: Real> Integrand<T> for Complex<T> {
    fn zero() -> Self {
        Complex::new(T::zero(), T::zero())
    }
    fn magnitude(&self) -> T {
        self.norm()
    }
}

const XGK: [f64; 8] = [
    0.991_455_371_120_812_6,
    0.949_107_912_342_758_5,
    0.864_864_423_359_769_1,
    0.741_531_185_599_394_4,
    0.586_087_235_467_691_1,
    0.405_845_151_377_397_2,
    0.207_784_955_007_898_5,
    0.0,
];
const WGK: [f64; 8] = [
    0.022_935_322_010_529_22,
    0.063_092_092_629_978_55,
    0.104_790_010_322_250_2,
    0.140_653_259_715_525_9,
    0.169_004_726_639_267_9,
    0.190_350_578_064_785_4,
    0.204_432_940_075_298_9,
    0.209_482_141_084_727_8,
];
const WG: [f64; 4] = [
    0.129_484_966_168_869_7,
    0.279_705_391_489_276_7,
    0.381_830_050_505_118_9,
    0.417_959_183_673_469_4,
];

/// Tolerances and limits for [`integrate`].
#[derive(Debug, Clone, Copy)]
pub struct QuadOptions<T> {
    pub abs_tol: T,
    pub rel_tol: T,
    pub max_intervals: usize,
}

impl<T: Real> Default for QuadOptions<T> {
    fn default() -> Self {
        Self {
            abs_tol: lit(1e-13),
            rel_tol: lit(1e-12),
            max_intervals: 4000,
        }
    }
}

impl<T: Real> QuadOptions<T> {
    pub fn with_tol(abs_tol: T, rel_tol: T) -> Self {
        Self {
            abs_tol,
            rel_tol,
            ..Self::default()
        }
    }
}

struct Piece<T, V> {
    a: T,
    b: T,
    value: V,
    error: T,
}

fn gk15<T: Real, V: Integrand<T>>(f: &mut impl FnMut(T) -> V, a: T, b: T) -> (V, T) {
    let center = (a + b) * lit(0.5);
    let half = (b - a) * lit(0.5);
    let fc = f(center);
    let mut kronrod = fc * lit(WGK[7]);
    let mut gauss = fc * lit(WG[3]);
    for j in 0..7 {
        let dx = half * lit(XGK[j]);
        let pair = f(center - dx) + f(center + dx);
        kronrod = kronrod + pair * lit(WGK[j]);
        if j % 2 == 1 {
            gauss = gauss + pair * lit(WG[j / 2]);
        }
    }
    let value = kronrod * half;
    let error = ((kronrod - gauss) * half).magnitude();
    (value, error)
}

/// `∫_a^b f` to within `max(abs_tol, rel_tol·|I|)`.
pub fn integrate<T: Real, V: Integrand<T>>(
    mut f: impl FnMut(T) -> V,
    a: T,
    b: T,
    opts: QuadOptions<T>,
) -> Result<V> {
    if a == b {
        return Ok(V::zero());
    }
    let (value, error) = gk15(&mut f, a, b);
    let mut pieces = vec![Piece { a, b, value, error }];
    loop {
        let total = pieces.iter().fold(V::zero(), |acc, p| acc + p.value);
        let err: T = pieces.iter().map(|p| p.error).sum();
        if !err.is_finite() || !total.magnitude().is_finite() {
            return Err(Error::Integration("non-finite integrand".into()));
        }
        if err <= opts.abs_tol.max(opts.rel_tol * total.magnitude()) {
            return Ok(total);
        }
        if pieces.len() >= opts.max_intervals {
            return Err(Error::Integration(format!(
                "quadrature on [{a}, {b}] did not reach tolerance: error estimate {err} with {} intervals",
                pieces.len()
            )));
        }
        let worst = pieces
            .iter()
            .enumerate()
            .max_by(|x, y| x.1.error.partial_cmp(&y.1.error).unwrap())
            .map(|(i, _)| i)
            .unwrap();
        let p = pieces.swap_remove(worst);
        let mid = (p.a + p.b) * lit(0.5);
        if mid == p.a || mid == p.b {
            return Err(Error::Integration(format!("interval collapsed near {mid}")));
        }
        for (lo, hi) in [(p.a, mid), (mid, p.b)] {
            let (value, error) = gk15(&mut f, lo, hi);
            pieces.push(Piece {
                a: lo,
                b: hi,
                value,
                error,
            });
        }
    }
}

/// `∫_a^∞ f`, mapped onto `[0, 1)` by `x = a + u/(1-u)`.
pub fn integrate_to_infinity<T: Real, V: Integrand<T>>(
    mut f: impl FnMut(T) -> V,
    a: T,
    opts: QuadOptions<T>,
) -> Result<V> {
    integrate(
        |u: T| {
            let w = T::one() - u;
            if w <= T::zero() {
                return V::zero();
            }
            f(a + u / w) * (T::one() / (w * w))
        },
        T::zero(),
        T::one(),
        opts,
    )
}
