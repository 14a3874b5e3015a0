//! Self-similar expanders `m_{c,α}(x, t) = f_{c,α}(x/√t)`.
//!
//! The profile `f` is the unit tangent of a curve with curvature
//! `κ(s) = c·e^{-αs²/4}` and torsion `τ(s) = βs/2`, obtained by integrating
//! the Serret–Frenet system from `f(0) = e₁`, `n(0) = e₂`, `b(0) = e₃`.
//! The tangent converges to limit vectors `A±` as `s → ±∞`, and the
//! self-similar solution has initial datum `A⁺χ_{x>0} + A⁻χ_{x<0}`.

use crate::error::{domain, input, Error, Result};
use crate::field::{vec3, Grid, SpinField, Vec3};
use crate::ode::{integrate, OdeOptions};
use crate::quad::{self, QuadOptions};
use crate::scalar::{from_usize, lit, to_f64, unit_tolerance, Real};
use crate::specfun::{big_erf, erfc};

/// Largest arclength step, so the quintic interpolant stays far below the
/// integration tolerance.
const MAX_ARCLENGTH_STEP: f64 = 0.05;

/// Curvature `c·e^{-αs²/4}`.
#[inline]
pub fn curvature<T: Real>(c: T, alpha: T, s: T) -> T {
    c * (-alpha * s * s * lit(0.25)).exp()
}

/// Torsion `βs/2`.
#[inline]
pub fn torsion<T: Real>(alpha: T, s: T) -> T {
    beta_of(alpha) * s * lit(0.5)
}

#[inline]
fn beta_of<T: Real>(alpha: T) -> T {
    (T::one() - alpha * alpha).max(T::zero()).sqrt()
}

/// `∫_s^∞ c·e^{-ασ²/4} dσ = c·sqrt(π/α)·erfc(s·sqrt(α)/2)`, which bounds `|f(s) - A⁺|`.
pub fn tail_integral<T: Real>(c: T, alpha: T, s: T) -> T {
    c * (T::PI() / alpha).sqrt() * erfc(s * alpha.sqrt() * lit(0.5))
}

/// Closed-form profile at `α = 1`: `(cos(c·Erf s), sin(c·Erf s), 0)`.
pub fn explicit_profile<T: Real>(c: T, s: T) -> Vec3<T> {
    let phase = c * big_erf(s);
    [phase.cos(), phase.sin(), T::zero()]
}

/// Lower bound `θ_{c,α} ≥ arccos(1 - c²π + 32c³√π/α²)`, valid for `0 < c < α²√π/32`.
pub fn theta_lower_bound<T: Real>(c: T, alpha: T) -> Option<T> {
    let sqrt_pi = T::PI().sqrt();
    if !(c > T::zero() && c < alpha * alpha * sqrt_pi / lit(32.0)) {
        return None;
    }
    let arg = T::one() - c * c * T::PI() + lit::<T>(32.0) * c * c * c * sqrt_pi / (alpha * alpha);
    Some(arg.max(-T::one()).min(T::one()).acos())
}

/// Angle `θ ∈ [0, π]` between `A⁺` and `A⁻ = (A⁺₁, -A⁺₂, -A⁺₃)`, i.e.
/// `arccos(2(A⁺₁)² - 1)`, computed without cancellation.
pub fn angle_from_limit<T: Real>(a_plus: Vec3<T>) -> T {
    let transverse = (a_plus[1] * a_plus[1] + a_plus[2] * a_plus[2]).sqrt();
    lit::<T>(2.0) * transverse.atan2(a_plus[0].abs())
}

/// Serret–Frenet samples of `f_{c,α}` on `[-s_max, s_max]`.
#[derive(Debug, Clone, PartialEq)]
pub struct Profile<T> {
    c: T,
    alpha: T,
    tol: T,
    s: Vec<T>,
    f: Vec<Vec3<T>>,
    n: Vec<Vec3<T>>,
    b: Vec<Vec3<T>>,
    a_plus: Vec3<T>,
    a_minus: Vec3<T>,
    tail_bound: T,
    origin: usize,
}

/// Angle between the two limit vectors of a profile.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct AngleResult<T> {
    pub theta: T,
    pub c: T,
    pub alpha: T,
}

fn frame_rhs<T: Real>(c: T, alpha: T, s: T, y: &[T; 9]) -> [T; 9] {
    let k = curvature(c, alpha, s);
    let tau = torsion(alpha, s);
    let mut d = [T::zero(); 9];
    for i in 0..3 {
        let (f, n, b) = (y[i], y[3 + i], y[6 + i]);
        d[i] = k * n;
        d[3 + i] = -k * f + tau * b;
        d[6 + i] = -tau * n;
    }
    d
}

fn split<T: Real>(y: &[T; 9]) -> (Vec3<T>, Vec3<T>, Vec3<T>) {
    ([y[0], y[1], y[2]], [y[3], y[4], y[5]], [y[6], y[7], y[8]])
}

fn frame_defect<T: Real>(f: Vec3<T>, n: Vec3<T>, b: Vec3<T>) -> T {
    let one = T::one();
    [
        (vec3::norm(f) - one).abs(),
        (vec3::norm(n) - one).abs(),
        (vec3::norm(b) - one).abs(),
        vec3::dot(f, n).abs(),
        vec3::dot(f, b).abs(),
        vec3::dot(n, b).abs(),
    ]
    .into_iter()
    .fold(T::zero(), T::max)
}

fn gram_schmidt<T: Real>(y: &mut [T; 9]) {
    let (f, n, _) = split(y);
    let f = vec3::normalize(f);
    let n = vec3::normalize(vec3::sub(n, vec3::scale(vec3::dot(n, f), f)));
    let b = vec3::cross(f, n);
    y[..3].copy_from_slice(&f);
    y[3..6].copy_from_slice(&n);
    y[6..].copy_from_slice(&b);
}

/// Quintic Hermite interpolation on `[0, 1]` with end values, slopes and
/// second derivatives (slopes and curvatures already scaled by `h`, `h²`).
fn hermite5<T: Real>(u: T, p0: [Vec3<T>; 3], p1: [Vec3<T>; 3]) -> (Vec3<T>, Vec3<T>) {
    let u2 = u * u;
    let u3 = u2 * u;
    let u4 = u3 * u;
    let u5 = u4 * u;
    let l = |x: f64| lit::<T>(x);
    let h = [
        T::one() - l(10.0) * u3 + l(15.0) * u4 - l(6.0) * u5,
        u - l(6.0) * u3 + l(8.0) * u4 - l(3.0) * u5,
        l(0.5) * u2 - l(1.5) * u3 + l(1.5) * u4 - l(0.5) * u5,
        l(10.0) * u3 - l(15.0) * u4 + l(6.0) * u5,
        -l(4.0) * u3 + l(7.0) * u4 - l(3.0) * u5,
        l(0.5) * u3 - u4 + l(0.5) * u5,
    ];
    let dh = [
        -l(30.0) * u2 + l(60.0) * u3 - l(30.0) * u4,
        T::one() - l(18.0) * u2 + l(32.0) * u3 - l(15.0) * u4,
        u - l(4.5) * u2 + l(6.0) * u3 - l(2.5) * u4,
        l(30.0) * u2 - l(60.0) * u3 + l(30.0) * u4,
        -l(12.0) * u2 + l(28.0) * u3 - l(15.0) * u4,
        l(1.5) * u2 - l(4.0) * u3 + l(2.5) * u4,
    ];
    let coeffs = [p0[0], p0[1], p0[2], p1[0], p1[1], p1[2]];
    let mut v = [T::zero(); 3];
    let mut dv = [T::zero(); 3];
    for (k, cf) in coeffs.iter().enumerate() {
        for i in 0..3 {
            v[i] = v[i] + h[k] * cf[i];
            dv[i] = dv[i] + dh[k] * cf[i];
        }
    }
    (v, dv)
}

/// Builds `f_{c,α}` with local integration tolerance `tol`.
///
/// `c = 0` is accepted and yields the constant profile `e₁`.
pub fn build_profile<T: Real>(c: T, alpha: T, tol: T) -> Result<Profile<T>> {
    if !(c >= T::zero()) || !c.is_finite() {
        return domain(format!(
            "similarity amplitude must be non-negative, got {c}"
        ));
    }
    if !(alpha > T::zero() && alpha <= T::one()) {
        return domain(format!("damping must lie in (0, 1], got {alpha}"));
    }
    if !(tol > lit(1e-14) && tol < lit(1e-4)) {
        return domain(format!("tolerance must lie in (1e-14, 1e-4), got {tol}"));
    }
    let s_cap = lit::<T>(100.0) / alpha.sqrt();
    if tail_integral(c, alpha, s_cap) >= tol {
        return Err(Error::Integration(format!(
            "tail bound not below {tol} before s = {s_cap}"
        )));
    }
    // bisection for the smallest s with tail < tol, never below 1/√α
    let mut lo = T::zero();
    let mut hi = s_cap;
    for _ in 0..200 {
        let mid = (lo + hi) * lit(0.5);
        if tail_integral(c, alpha, mid) < tol {
            hi = mid;
        } else {
            lo = mid;
        }
        if hi - lo < lit(1e-6) {
            break;
        }
    }
    let s_max = hi.max(T::one() / alpha.sqrt());
    let tail_bound = tail_integral(c, alpha, s_max);

    let opts = OdeOptions::new(tol).max_step(lit(MAX_ARCLENGTH_STEP));
    let y0 = [
        T::one(),
        T::zero(),
        T::zero(),
        T::zero(),
        T::one(),
        T::zero(),
        T::zero(),
        T::zero(),
        T::one(),
    ];
    let run = |end: T| -> Result<Vec<(T, [T; 9])>> {
        let mut nodes = vec![(T::zero(), y0)];
        integrate(
            |s, y: &[T; 9]| frame_rhs(c, alpha, s, y),
            T::zero(),
            y0,
            end,
            opts,
            |s, y| {
                let (f, n, b) = split(y);
                if frame_defect(f, n, b) > tol {
                    gram_schmidt(y);
                }
                nodes.push((s, *y));
            },
        )?;
        Ok(nodes)
    };
    let forward = run(s_max)?;
    let backward = run(-s_max)?;

    let total = forward.len() + backward.len() - 1;
    let mut s = Vec::with_capacity(total);
    let mut f = Vec::with_capacity(total);
    let mut n = Vec::with_capacity(total);
    let mut b = Vec::with_capacity(total);
    for (si, y) in backward.iter().skip(1).rev().chain(forward.iter()) {
        let (fi, ni, bi) = split(y);
        s.push(*si);
        f.push(fi);
        n.push(ni);
        b.push(bi);
    }
    let origin = backward.len() - 1;
    let a_plus = *f.last().unwrap();
    let a_minus = f[0];
    log::debug!(
        "profile c = {c}, alpha = {alpha}: {} nodes on [-{s_max}, {s_max}], tail {tail_bound:e}",
        s.len()
    );
    Ok(Profile {
        c,
        alpha,
        tol,
        s,
        f,
        n,
        b,
        a_plus,
        a_minus,
        tail_bound,
        origin,
    })
}

impl<T: Real> Profile<T> {
    #[inline]
    pub fn c(&self) -> T {
        self.c
    }

    #[inline]
    pub fn alpha(&self) -> T {
        self.alpha
    }

    #[inline]
    pub fn beta(&self) -> T {
        beta_of(self.alpha)
    }

    #[inline]
    pub fn tol(&self) -> T {
        self.tol
    }

    #[inline]
    pub fn s_max(&self) -> T {
        *self.s.last().unwrap()
    }

    /// Arclength nodes chosen by the integrator, ascending.
    #[inline]
    pub fn s_grid(&self) -> &[T] {
        &self.s
    }

    #[inline]
    pub fn tangents(&self) -> &[Vec3<T>] {
        &self.f
    }

    #[inline]
    pub fn normals(&self) -> &[Vec3<T>] {
        &self.n
    }

    #[inline]
    pub fn binormals(&self) -> &[Vec3<T>] {
        &self.b
    }

    /// Index of the node at `s = 0`.
    #[inline]
    pub fn origin_index(&self) -> usize {
        self.origin
    }

    /// Integrated tangent at `s_max`, within `tail_bound` of `A⁺`.
    #[inline]
    pub fn a_plus(&self) -> Vec3<T> {
        self.a_plus
    }

    /// Integrated tangent at `-s_max`.
    #[inline]
    pub fn a_minus(&self) -> Vec3<T> {
        self.a_minus
    }

    /// `∫_{s_max}^∞ κ`, the guaranteed truncation error of the limit vectors.
    #[inline]
    pub fn tail_bound(&self) -> T {
        self.tail_bound
    }

    #[inline]
    pub fn curvature(&self, s: T) -> T {
        curvature(self.c, self.alpha, s)
    }

    /// Largest deviation of the stored frames from orthonormality.
    pub fn max_frame_defect(&self) -> T {
        (0..self.s.len())
            .map(|i| frame_defect(self.f[i], self.n[i], self.b[i]))
            .fold(T::zero(), T::max)
    }

    /// `(A⁺, A⁻)` with `A⁻` from the reflection symmetry of the profile.
    pub fn limit_vectors(&self) -> (Vec3<T>, Vec3<T>) {
        (self.a_plus, vec3::reflect(self.a_plus))
    }

    pub fn angle(&self) -> AngleResult<T> {
        AngleResult {
            theta: angle_from_limit(self.a_plus),
            c: self.c,
            alpha: self.alpha,
        }
    }

    fn node_jets(&self, i: usize) -> [[Vec3<T>; 3]; 3] {
        let s = self.s[i];
        let k = self.curvature(s);
        let dk = -self.alpha * s * lit(0.5) * k;
        let tau = torsion(self.alpha, s);
        let dtau = self.beta() * lit(0.5);
        let (f, n, b) = (self.f[i], self.n[i], self.b[i]);
        let df = vec3::scale(k, n);
        let dn = vec3::add(vec3::scale(-k, f), vec3::scale(tau, b));
        let db = vec3::scale(-tau, n);
        let ddf = vec3::add(vec3::scale(dk, n), vec3::scale(k, dn));
        let ddn = vec3::add(
            vec3::add(vec3::scale(-dk, f), vec3::scale(-k, df)),
            vec3::add(vec3::scale(dtau, b), vec3::scale(tau, db)),
        );
        let ddb = vec3::add(vec3::scale(-dtau, n), vec3::scale(-tau, dn));
        [[f, df, ddf], [n, dn, ddn], [b, db, ddb]]
    }

    fn locate(&self, s: T) -> (usize, T, T) {
        let i = match self.s.binary_search_by(|p| p.partial_cmp(&s).unwrap()) {
            Ok(i) => i.min(self.s.len() - 2),
            Err(i) => i.clamp(1, self.s.len() - 1) - 1,
        };
        let h = self.s[i + 1] - self.s[i];
        (i, h, (s - self.s[i]) / h)
    }

    fn interpolate(&self, s: T, which: usize) -> (Vec3<T>, Vec3<T>) {
        let (i, h, u) = self.locate(s);
        let j0 = self.node_jets(i)[which];
        let j1 = self.node_jets(i + 1)[which];
        let scale = |j: [Vec3<T>; 3]| [j[0], vec3::scale(h, j[1]), vec3::scale(h * h, j[2])];
        let (v, dv) = hermite5(u, scale(j0), scale(j1));
        (v, vec3::scale(T::one() / h, dv))
    }

    /// `f(s)`, renormalized to the sphere; the limit vectors beyond `±s_max`.
    pub fn tangent(&self, s: T) -> Vec3<T> {
        if s >= self.s_max() {
            return self.a_plus;
        }
        if s <= -self.s_max() {
            return self.a_minus;
        }
        vec3::normalize(self.interpolate(s, 0).0)
    }

    /// `f'(s)`, the derivative of the interpolant of the integrated tangent.
    ///
    /// Beyond `±s_max` the frame is not integrated; the value there is
    /// `κ(s)·n(±s_max)`, of size below `κ(s_max)`.
    pub fn tangent_derivative(&self, s: T) -> Vec3<T> {
        let s_max = self.s_max();
        if s.abs() >= s_max {
            let idx = if s > T::zero() { self.s.len() - 1 } else { 0 };
            return vec3::scale(self.curvature(s), self.n[idx]);
        }
        self.interpolate(s, 0).1
    }

    /// Interpolated unit normal.
    pub fn normal(&self, s: T) -> Vec3<T> {
        let s = s.max(-self.s_max()).min(self.s_max());
        vec3::normalize(self.interpolate(s, 1).0)
    }
}

fn check_time<T: Real>(t: T) -> Result<()> {
    if t > T::zero() && t.is_finite() {
        Ok(())
    } else {
        domain(format!("time must be positive, got {t}"))
    }
}

/// `m_{c,α}(x, t) = f(x/√t)`.
pub fn evaluate_m<T: Real>(p: &Profile<T>, x: T, t: T) -> Result<Vec3<T>> {
    check_time(t)?;
    Ok(p.tangent(x / t.sqrt()))
}

/// `∂ₓ m_{c,α}(x, t) = f'(x/√t)/√t`.
pub fn m_gradient<T: Real>(p: &Profile<T>, x: T, t: T) -> Result<Vec3<T>> {
    check_time(t)?;
    let r = t.sqrt();
    Ok(vec3::scale(T::one() / r, p.tangent_derivative(x / r)))
}

/// `m_{c,α}(·, t)` sampled on a grid.
pub fn sample_m<T: Real>(p: &Profile<T>, grid: Grid<T>, t: T) -> Result<SpinField<T>> {
    check_time(t)?;
    let values = grid
        .points()
        .into_iter()
        .map(|x| p.tangent(x / t.sqrt()))
        .collect();
    SpinField::new(grid, values)
}

/// `∫ |∂ₓ m_{c,α}(x, t)|² dx` by adaptive quadrature of the profile derivative.
pub fn dirichlet_energy<T: Real>(p: &Profile<T>, t: T) -> Result<T> {
    check_time(t)?;
    if p.c() == T::zero() {
        return Ok(T::zero());
    }
    let r = t.sqrt();
    let opts = QuadOptions::with_tol(
        lit::<T>(1e-12).max(T::epsilon()),
        lit::<T>(1e-10).max(T::epsilon() * lit(64.0)),
    );
    // ∫|f'(x/√t)|²/t dx = t^{-1/2} ∫|f'(s)|² ds
    let integrand = |s: T| {
        let d = p.tangent_derivative(s);
        vec3::dot(d, d)
    };
    let s_max = p.s_max();
    let inner = quad::integrate(integrand, -s_max, T::zero(), opts)?
        + quad::integrate(integrand, T::zero(), s_max, opts)?;
    // beyond ±s_max |f'| = κ exactly
    let c = p.c();
    let a = p.alpha();
    let outer = c * c * (lit::<T>(2.0) * T::PI() / a).sqrt() * erfc(s_max * (a * lit(0.5)).sqrt());
    Ok((inner + outer) / r)
}

/// Piecewise-constant field `A⁺` for `x > 0`, `A⁻` for `x < 0`; the node
/// nearest to 0 takes `A⁺`.
pub fn step_data<T: Real>(
    a_plus: Vec3<T>,
    a_minus: Vec3<T>,
    grid: Grid<T>,
) -> Result<SpinField<T>> {
    let tol = unit_tolerance::<T>();
    for (name, v) in [("A+", a_plus), ("A-", a_minus)] {
        if (vec3::norm(v) - T::one()).abs() > tol {
            return input(format!(
                "{name} is not a unit vector (|{name}| = {})",
                vec3::norm(v)
            ));
        }
    }
    let zero = grid.nearest(T::zero());
    let values = (0..grid.len())
        .map(|i| if i >= zero { a_plus } else { a_minus })
        .collect();
    SpinField::new(grid, values)
}

/// Angle `θ_{c,α}` between the limit vectors.
pub fn angle<T: Real>(c: T, alpha: T, tol: T) -> Result<AngleResult<T>> {
    Ok(build_profile(c, alpha, tol)?.angle())
}

/// Profile tolerance used inside root finding.
fn root_profile_tol<T: Real>() -> T {
    lit::<T>(1e-12).max(T::epsilon() * lit(1e4))
}

/// Bisection for `c` in `bracket` with `|θ_{c,α} - theta| < tol`.
pub fn find_c_for_angle<T: Real>(theta: T, alpha: T, bracket: (T, T), tol: T) -> Result<T> {
    let (mut lo, mut hi) = bracket;
    if !(lo < hi) || lo < T::zero() {
        return Err(Error::Bracket {
            lo: to_f64(lo),
            hi: to_f64(hi),
            reason: "bracket must satisfy 0 <= lo < hi".into(),
        });
    }
    let ptol = root_profile_tol::<T>();
    let g = |c: T| -> Result<T> { Ok(angle(c, alpha, ptol)?.theta - theta) };
    let mut g_lo = g(lo)?;
    let g_hi = g(hi)?;
    if g_lo == T::zero() {
        return Ok(lo);
    }
    if g_hi == T::zero() {
        return Ok(hi);
    }
    if (g_lo > T::zero()) == (g_hi > T::zero()) {
        return Err(Error::Bracket {
            lo: to_f64(lo),
            hi: to_f64(hi),
            reason: format!("angle minus target has the same sign at both ends ({g_lo}, {g_hi})"),
        });
    }
    for _ in 0..200 {
        let mid = (lo + hi) * lit(0.5);
        let g_mid = g(mid)?;
        if g_mid.abs() < tol && hi - lo < tol {
            return Ok(mid);
        }
        if (g_mid > T::zero()) == (g_lo > T::zero()) {
            lo = mid;
            g_lo = g_mid;
        } else {
            hi = mid;
        }
        if hi - lo <= T::epsilon() * hi {
            break;
        }
    }
    let mid = (lo + hi) * lit(0.5);
    let residual = g(mid)?.abs();
    if residual < tol {
        Ok(mid)
    } else {
        Err(Error::Bracket {
            lo: to_f64(lo),
            hi: to_f64(hi),
            reason: format!("bisection stalled with angle residual {residual}"),
        })
    }
}

/// Result of the multiplicity search.
#[derive(Debug, Clone, PartialEq)]
pub struct Multiplicity<T> {
    /// Roots found, strictly increasing.
    pub cs: Vec<T>,
    /// `θ_{c_j,α} - θ` at each root.
    pub residuals: Vec<T>,
    pub requested: usize,
    /// Why the search stopped early, if it did.
    pub failure: Option<Error>,
}

impl<T> Multiplicity<T> {
    pub fn is_complete(&self) -> bool {
        self.failure.is_none()
    }
}

/// Up to `k` amplitudes `c₁ < … < c_k` with `θ_{c_j,α} = theta`, one per
/// interval `[(j-1)√π/2, j√π/2]`.
///
/// At `α = 1` these intervals carry exactly one root each,
/// `ℓ√π ± θ/(2√π)`. For `α < 1` the sign change of `cos θ_c - cos θ` across
/// each interval is checked; the search stops at the first interval where it
/// fails and reports the roots found so far.
pub fn multiplicity_cs<T: Real>(theta: T, alpha: T, k: usize, tol: T) -> Result<Multiplicity<T>> {
    if !(theta > T::zero() && theta < T::PI()) {
        return domain(format!("target angle must lie in (0, π), got {theta}"));
    }
    let half = T::PI().sqrt() * lit(0.5);
    let mut out = Multiplicity {
        cs: Vec::new(),
        residuals: Vec::new(),
        requested: k,
        failure: None,
    };
    for j in 0..k {
        let bracket = (half * from_usize(j), half * from_usize(j + 1));
        match find_c_for_angle(theta, alpha, bracket, tol) {
            Ok(c) => {
                out.residuals
                    .push(angle(c, alpha, root_profile_tol())?.theta - theta);
                out.cs.push(c);
            }
            Err(e @ Error::Bracket { .. }) => {
                out.failure = Some(e);
                break;
            }
            Err(e) => return Err(e),
        }
    }
    Ok(out)
}

/// Max-norm residual of `-½ s f' = β f×f'' - α f×(f×f'')` on uniformly spaced
/// samples, with fourth-order central differences on the interior.
pub fn profile_residual_on_samples<T: Real>(s0: T, h: T, f: &[Vec3<T>], alpha: T) -> Result<T> {
    if f.len() < 5 {
        return input("need at least five samples");
    }
    let beta = beta_of(alpha);
    let twelve_h = lit::<T>(12.0) * h;
    let twelve_h2 = lit::<T>(12.0) * h * h;
    let mut worst = T::zero();
    for i in 2..f.len() - 2 {
        let s = s0 + h * from_usize(i);
        let mut d1 = [T::zero(); 3];
        let mut d2 = [T::zero(); 3];
        for c in 0..3 {
            let (a, b, m, d, e) = (f[i - 2][c], f[i - 1][c], f[i][c], f[i + 1][c], f[i + 2][c]);
            d1[c] = (a - lit::<T>(8.0) * b + lit::<T>(8.0) * d - e) / twelve_h;
            d2[c] =
                (-a + lit::<T>(16.0) * b - lit::<T>(30.0) * m + lit::<T>(16.0) * d - e) / twelve_h2;
        }
        let fi = f[i];
        let fxd2 = vec3::cross(fi, d2);
        let rhs = vec3::sub(
            vec3::scale(beta, fxd2),
            vec3::scale(alpha, vec3::cross(fi, fxd2)),
        );
        let lhs = vec3::scale(-s * lit(0.5), d1);
        worst = worst.max(vec3::dist(lhs, rhs));
    }
    Ok(worst)
}

/// Residual of the profile equation for a built profile, resampled with
/// spacing `0.01` on `[-s_r, s_r]`, `s_r = min(s_max, 10)`.
pub fn profile_ode_residual<T: Real>(p: &Profile<T>) -> Result<T> {
    let s_r = p.s_max().min(lit(10.0));
    let h: T = lit(0.01);
    let count = (lit::<T>(2.0) * s_r / h).floor().to_usize().unwrap() + 1;
    let s0 = -s_r;
    let f: Vec<Vec3<T>> = (0..count)
        .map(|i| p.tangent(s0 + h * from_usize(i)))
        .collect();
    profile_residual_on_samples(s0, h, &f, p.alpha())
}
