//! Mild solutions of the dissipative quasilinear Schrödinger equation
//!
//! `u_t = (α+iβ)u_xx + g(u)`, `g(u) = -2i(β-iα) ū u_x² / (1 + |u|²)`,
//!
//! which is the Landau–Lifshitz–Gilbert equation after stereographic
//! projection. Provides exponential time marching, Picard iteration of the
//! Duhamel map, PDE residuals and the smallness budget of the
//! well-posedness theory.

use num_complex::Complex;

use crate::error::{domain, input, Error, Result};
use crate::field::{vec3, ComplexField, Grid, SpinField, Vec3};
use crate::norms::{x_seminorm, NormParts, ParabolicBallSet, Trajectory};
use crate::scalar::{cplx, from_usize, lit, to_f64, Real};
use crate::selfsim::{self, Profile};
use crate::semigroup::{self, GlParams, Semigroup};
use crate::spectral::{Boundary, Spectral};
use crate::stereo;

/// Sup-norm beyond which a run is declared to have blown up.
const BLOW_UP_LEVEL: f64 = 1e6;

type C<T> = Complex<T>;

/// `g(u) = -2i(β-iα) ū (∇u)² / (1 + |u|²)`.
#[inline]
pub fn g_nonlinearity<T: Real>(u: C<T>, grad_u: C<T>, p: &GlParams<T>) -> C<T> {
    let two_i = cplx(T::zero(), lit(2.0));
    -two_i * p.schrodinger_coefficient() * u.conj() * grad_u * grad_u / (T::one() + u.norm_sqr())
}

fn g_samples<T: Real>(u: &[C<T>], ux: &[C<T>], p: &GlParams<T>) -> Vec<C<T>> {
    u.iter()
        .zip(ux)
        .map(|(&a, &b)| g_nonlinearity(a, b, p))
        .collect()
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum Scheme {
    /// `u⁺ = S(dt)(u + dt·g(u))`, first order.
    ExponentialEuler,
    /// `u½ = S(dt/2)(u + dt/2·g(u))`, `u⁺ = S(dt)u + dt·S(dt/2)g(u½)`, second order.
    #[default]
    ExponentialMidpoint,
}

/// Time-integration settings shared by the marching and Picard solvers.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SolverConfig<T> {
    pub t0: T,
    pub t_end: T,
    /// First step of the marching scheme.
    pub dt0: T,
    /// Geometric growth of successive steps (`>= 1`). For Picard iteration
    /// it is the ratio between consecutive sample times.
    pub growth: T,
    pub scheme: Scheme,
    /// Gauss–Legendre nodes per cell in the Duhamel quadrature.
    pub quadrature_nodes: usize,
    /// Picard stopping tolerance on the X-distance of successive iterates.
    pub tol: T,
}

impl<T: Real> SolverConfig<T> {
    /// Steps proportional to `t`: `dt/t` fixed so that `steps` steps span `[t0, t_end]`.
    pub fn geometric(t0: T, t_end: T, steps: usize) -> Result<Self> {
        let growth = (t_end / t0).powf(T::one() / from_usize(steps.max(1)));
        let cfg = Self {
            t0,
            t_end,
            dt0: t0 * (growth - T::one()),
            growth,
            scheme: Scheme::ExponentialMidpoint,
            quadrature_nodes: 4,
            tol: lit(1e-10),
        };
        cfg.validate()?;
        Ok(cfg)
    }

    /// Constant step `dt`.
    pub fn uniform(t0: T, t_end: T, dt: T) -> Result<Self> {
        let cfg = Self {
            t0,
            t_end,
            dt0: dt,
            growth: T::one(),
            scheme: Scheme::ExponentialMidpoint,
            quadrature_nodes: 4,
            tol: lit(1e-10),
        };
        cfg.validate()?;
        Ok(cfg)
    }

    pub fn with_scheme(mut self, scheme: Scheme) -> Self {
        self.scheme = scheme;
        self
    }

    pub fn validate(&self) -> Result<()> {
        if !(self.t0 > T::zero() && self.t0 < self.t_end && self.t_end.is_finite()) {
            return domain(format!(
                "need 0 < t0 < T, got t0 = {}, T = {}",
                self.t0, self.t_end
            ));
        }
        if !(self.growth >= T::one()) {
            return domain(format!("step growth must be >= 1, got {}", self.growth));
        }
        if !(self.dt0 > T::zero()) {
            return domain(format!("initial step must be positive, got {}", self.dt0));
        }
        if !(self.tol > T::zero()) {
            return domain("tolerance must be positive");
        }
        if !(1..=8).contains(&self.quadrature_nodes) {
            return domain("between 1 and 8 quadrature nodes are supported");
        }
        Ok(())
    }

    /// The sequence of step times `t0 < t1 < … < T`.
    pub fn step_times(&self) -> Vec<T> {
        let mut times = vec![self.t0];
        let mut t = self.t0;
        let mut dt = self.dt0;
        let slack = self.t_end * lit(1e-12);
        while t < self.t_end - slack {
            let step = if t + dt > self.t_end - slack {
                self.t_end - t
            } else {
                dt
            };
            t = if step == self.t_end - t {
                self.t_end
            } else {
                t + step
            };
            times.push(t);
            dt = dt * self.growth;
        }
        times
    }
}

/// FFT-based operators on one grid.
struct Engine<T: Real> {
    semigroup: Semigroup<T>,
}

impl<T: Real> Engine<T> {
    fn new(grid: Grid<T>, boundary: Boundary, p: GlParams<T>) -> Result<Self> {
        Ok(Self {
            semigroup: Semigroup::new(grid, boundary, p)?,
        })
    }

    fn spectral(&self) -> &Spectral<T> {
        self.semigroup.spectral()
    }

    fn params(&self) -> &GlParams<T> {
        self.semigroup.params()
    }

    fn derivative(&self, u: &[C<T>]) -> Vec<C<T>> {
        self.spectral().derivative(u)
    }

    fn g(&self, u: &[C<T>]) -> Vec<C<T>> {
        g_samples(u, &self.derivative(u), self.params())
    }

    fn step(&self, u: &[C<T>], dt: T, scheme: Scheme) -> Vec<C<T>> {
        let g0 = self.g(u);
        match scheme {
            Scheme::ExponentialEuler => {
                let w: Vec<_> = u.iter().zip(&g0).map(|(&a, &b)| a + b * dt).collect();
                self.semigroup.apply_values(&w, dt)
            }
            Scheme::ExponentialMidpoint => {
                let half = dt * lit(0.5);
                let w: Vec<_> = u.iter().zip(&g0).map(|(&a, &b)| a + b * half).collect();
                let mid = self.semigroup.apply_values(&w, half);
                let g_mid = self.g(&mid);
                let lin = self.semigroup.apply_values(u, dt);
                let forced = self.semigroup.apply_values(&g_mid, half);
                lin.iter().zip(&forced).map(|(&a, &b)| a + b * dt).collect()
            }
        }
    }
}

fn sup<T: Real>(u: &[C<T>]) -> T {
    u.iter().map(|z| z.norm()).fold(
        T::zero(),
        |a, b| if b.is_nan() { T::nan() } else { a.max(b) },
    )
}

/// Marches `u(·, t0)` to `T` with the configured exponential scheme,
/// recording every step together with spectral gradients.
pub fn time_march<T: Real>(
    u_at_t0: &ComplexField<T>,
    boundary: Boundary,
    cfg: &SolverConfig<T>,
    p: &GlParams<T>,
) -> Result<Trajectory<T, C<T>>> {
    cfg.validate()?;
    let engine = Engine::new(*u_at_t0.grid(), boundary, *p)?;
    let times = cfg.step_times();
    let mut values = Vec::with_capacity(times.len());
    let mut u = u_at_t0.values().to_vec();
    values.push(u.clone());
    for w in times.windows(2) {
        let next = engine.step(&u, w[1] - w[0], cfg.scheme);
        let s = sup(&next);
        if !(s <= lit(BLOW_UP_LEVEL)) {
            return Err(Error::BlowUp {
                time: to_f64(w[1]),
                last_valid_time: to_f64(w[0]),
            });
        }
        u = next;
        values.push(u.clone());
    }
    let gradients = values.iter().map(|v| engine.derivative(v)).collect();
    Trajectory::new(*u_at_t0.grid(), times, values)?.with_gradients(gradients)
}

/// Output of [`llg_solve`].
#[derive(Debug, Clone)]
pub struct LlgRun<T: Real> {
    /// Spin trajectory with chain-rule gradients.
    pub spins: Trajectory<T, Vec3<T>>,
    /// The projected trajectory.
    pub projected: Trajectory<T, C<T>>,
    /// Smallest third component along the flow and where it occurred.
    pub min_m3: T,
    pub min_m3_at: (T, T),
}

/// Solves LLG from `m(·, t0)`: project, march the projected equation with a
/// reflecting boundary, map back to the sphere.
///
/// A run in which the projected field exceeds `1e6` (the flow reaching the
/// South Pole) aborts with a pole-proximity error naming the first offending
/// sample.
pub fn llg_solve<T: Real>(
    m_at_t0: &SpinField<T>,
    delta: T,
    cfg: &SolverConfig<T>,
    p: &GlParams<T>,
) -> Result<LlgRun<T>> {
    let u0 = stereo::project(m_at_t0, delta)?;
    let projected = match time_march(&u0, Boundary::Reflecting, cfg, p) {
        Ok(tr) => tr,
        Err(Error::BlowUp { time, .. }) => {
            // re-run to locate the first offending sample
            return Err(locate_pole(&u0, cfg, p, time));
        }
        Err(e) => return Err(e),
    };
    let grid = *projected.grid();
    let grads = projected.gradients().expect("march records gradients");
    let mut spins = Vec::with_capacity(projected.len());
    let mut spin_grads = Vec::with_capacity(projected.len());
    let mut min_m3 = T::infinity();
    let mut min_at = (T::zero(), T::zero());
    for (k, (u, du)) in projected.values().iter().zip(grads).enumerate() {
        let m: Vec<Vec3<T>> = u.iter().map(|&z| stereo::inverse_point(z)).collect();
        for (i, mi) in m.iter().enumerate() {
            if mi[2] < min_m3 {
                min_m3 = mi[2];
                min_at = (grid.x(i), projected.times()[k]);
            }
        }
        spin_grads.push(
            u.iter()
                .zip(du)
                .map(|(&z, &dz)| stereo::inverse_gradient(z, dz))
                .collect(),
        );
        spins.push(m);
    }
    let spins =
        Trajectory::new(grid, projected.times().to_vec(), spins)?.with_gradients(spin_grads)?;
    Ok(LlgRun {
        spins,
        projected,
        min_m3,
        min_m3_at: min_at,
    })
}

fn locate_pole<T: Real>(
    u0: &ComplexField<T>,
    cfg: &SolverConfig<T>,
    p: &GlParams<T>,
    time: f64,
) -> Error {
    let Ok(engine) = Engine::new(*u0.grid(), Boundary::Reflecting, *p) else {
        return Error::BlowUp {
            time,
            last_valid_time: time,
        };
    };
    let times = cfg.step_times();
    let mut u = u0.values().to_vec();
    for w in times.windows(2) {
        let next = engine.step(&u, w[1] - w[0], cfg.scheme);
        if let Some(i) = next.iter().position(|z| !(z.norm() <= lit(BLOW_UP_LEVEL))) {
            let m3 = stereo::inverse_point(next[i])[2];
            return Error::PoleProximity {
                x: to_f64(u0.grid().x(i)),
                t: Some(to_f64(w[1])),
                m3: to_f64(m3),
                floor: to_f64(stereo::inverse_point(cplx(lit::<T>(BLOW_UP_LEVEL), T::zero()))[2]),
            };
        }
        u = next;
    }
    Error::BlowUp {
        time,
        last_valid_time: time,
    }
}

/// Three-point derivative weights at the middle of three unequally spaced times.
fn central_weights<T: Real>(t0: T, t1: T, t2: T) -> [T; 3] {
    let h1 = t1 - t0;
    let h2 = t2 - t1;
    [
        -h2 / (h1 * (h1 + h2)),
        (h2 - h1) / (h1 * h2),
        h1 / (h2 * (h1 + h2)),
    ]
}

fn check_samples(n: usize) -> Result<()> {
    if n < 3 {
        return input(format!(
            "residuals need at least three time samples, got {n}"
        ));
    }
    Ok(())
}

/// Max-norm residual of `iu_t + (β-iα)u_xx - 2(β-iα)ū u_x²/(1+|u|²)` on the
/// interior time samples, with spectral space derivatives.
pub fn residual_dnls<T: Real>(
    tr: &Trajectory<T, C<T>>,
    boundary: Boundary,
    p: &GlParams<T>,
) -> Result<T> {
    check_samples(tr.len())?;
    let spectral = Spectral::new(*tr.grid(), boundary);
    let i = cplx(T::zero(), T::one());
    let coef = p.schrodinger_coefficient();
    let two: T = lit(2.0);
    let mut worst = T::zero();
    let t = tr.times();
    let v = tr.values();
    for k in 1..tr.len() - 1 {
        let w = central_weights(t[k - 1], t[k], t[k + 1]);
        let (ux, uxx) = spectral.derivatives(&v[k]);
        for j in 0..v[k].len() {
            let ut = v[k - 1][j] * w[0] + v[k][j] * w[1] + v[k + 1][j] * w[2];
            let u = v[k][j];
            let r = i * ut + coef * uxx[j]
                - coef * u.conj() * ux[j] * ux[j] * two / (T::one() + u.norm_sqr());
            worst = worst.max(r.norm());
        }
    }
    Ok(worst)
}

/// Max-norm residual of `m_t - βm×m_xx + αm×(m×m_xx)` on the interior time samples.
pub fn residual_llg<T: Real>(
    tr: &Trajectory<T, Vec3<T>>,
    boundary: Boundary,
    p: &GlParams<T>,
) -> Result<T> {
    check_samples(tr.len())?;
    let spectral = Spectral::new(*tr.grid(), boundary);
    let (alpha, beta) = (p.alpha(), p.beta());
    let mut worst = T::zero();
    let t = tr.times();
    let v = tr.values();
    for k in 1..tr.len() - 1 {
        let w = central_weights(t[k - 1], t[k], t[k + 1]);
        // pack (m1, m2) into one complex transform and m3 into another
        let m12: Vec<C<T>> = v[k].iter().map(|m| cplx(m[0], m[1])).collect();
        let m3: Vec<C<T>> = v[k].iter().map(|m| cplx(m[2], T::zero())).collect();
        let (_, d12) = spectral.derivatives(&m12);
        let (_, d3) = spectral.derivatives(&m3);
        for j in 0..v[k].len() {
            let m = v[k][j];
            let mt = vec3::add(
                vec3::add(vec3::scale(w[0], v[k - 1][j]), vec3::scale(w[1], m)),
                vec3::scale(w[2], v[k + 1][j]),
            );
            let mxx = [d12[j].re, d12[j].im, d3[j].re];
            let mx_mxx = vec3::cross(m, mxx);
            let r = vec3::add(
                vec3::sub(mt, vec3::scale(beta, mx_mxx)),
                vec3::scale(alpha, vec3::cross(m, mx_mxx)),
            );
            worst = worst.max(vec3::norm(r));
        }
    }
    Ok(worst)
}

/// Spectral `∂ₓ` of every snapshot of a spin trajectory.
pub fn spin_gradients<T: Real>(
    tr: &Trajectory<T, Vec3<T>>,
    boundary: Boundary,
) -> Vec<Vec<Vec3<T>>> {
    let spectral = Spectral::new(*tr.grid(), boundary);
    tr.values()
        .iter()
        .map(|v| {
            let m12: Vec<C<T>> = v.iter().map(|m| cplx(m[0], m[1])).collect();
            let m3: Vec<C<T>> = v.iter().map(|m| cplx(m[2], T::zero())).collect();
            let d12 = spectral.derivative(&m12);
            let d3 = spectral.derivative(&m3);
            d12.iter()
                .zip(&d3)
                .map(|(a, b)| [a.re, a.im, b.re])
                .collect()
        })
        .collect()
}

/// Smallness parameters of the well-posedness theory and stand-ins for its
/// unknown constants.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct WellPosednessBudget<T> {
    /// Margin above the South Pole, `inf m₃ >= -1 + δ`.
    pub delta: T,
    /// BMO size of the initial spin field.
    pub eps0: T,
    /// Radius of the ball in which the solution is sought.
    pub rho: T,
    /// Sup-norm budget of the projected data.
    pub l: T,
    pub c_hat: T,
    pub k_hat: T,
}

impl<T: Real> WellPosednessBudget<T> {
    /// Budget with `Ĉ = K̂ = 1` and `L = 1/δ`.
    pub fn new(delta: T, eps0: T, rho: T) -> Result<Self> {
        let b = Self {
            delta,
            eps0,
            rho,
            l: T::one() / delta,
            c_hat: T::one(),
            k_hat: T::one(),
        };
        b.validate()?;
        Ok(b)
    }

    pub fn validate(&self) -> Result<()> {
        if !(self.delta > T::zero() && self.delta <= lit(2.0)) {
            return domain(format!(
                "pole margin must lie in (0, 2], got {}",
                self.delta
            ));
        }
        if !(self.eps0 >= T::zero() && self.rho > T::zero() && self.l >= T::zero()) {
            return domain("budget quantities must be positive");
        }
        if !(self.c_hat > T::zero() && self.k_hat > T::zero()) {
            return domain("constants must be positive");
        }
        Ok(())
    }
}

/// Evaluation of the smallness conditions with margins.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct BudgetReport<T> {
    /// `a = 8K⁴C`.
    pub a: T,
    /// `8K⁴Cδ⁻⁴(ρ + 8δ⁻²ε₀)²`, compared with `ρ`.
    pub llg_lhs: T,
    pub llg_pass: bool,
    /// `ε = 8δ⁻²ε₀`.
    pub eps: T,
    /// `8C(ρ + ε)²`, compared with `ρ`.
    pub dnls_lhs: T,
    pub dnls_pass: bool,
    /// `δ⁴/a`.
    pub rho_max: T,
    /// `δ⁶/(32a)`.
    pub eps0_max: T,
    /// `-1 + 2/(1 + K²(ρ + δ⁻¹)²)`, the guaranteed floor for `m₃` along the flow.
    pub m3_floor: T,
}

/// Evaluates both smallness inequalities; equality counts as a pass.
pub fn check_budget<T: Real>(b: &WellPosednessBudget<T>) -> BudgetReport<T> {
    let d = b.delta;
    let k4 = b.k_hat.powi(4);
    let a = lit::<T>(8.0) * k4 * b.c_hat;
    let eps = lit::<T>(8.0) * b.eps0 / (d * d);
    let llg_lhs = a / d.powi(4) * (b.rho + eps).powi(2);
    let dnls_lhs = lit::<T>(8.0) * b.c_hat * (b.rho + eps).powi(2);
    let slack = T::one() + lit::<T>(1e-12).max(T::epsilon() * lit(16.0));
    let inv_d = T::one() / d;
    BudgetReport {
        a,
        llg_lhs,
        llg_pass: llg_lhs <= b.rho * slack,
        eps,
        dnls_lhs,
        dnls_pass: dnls_lhs <= b.rho * slack,
        rho_max: d.powi(4) / a,
        eps0_max: d.powi(6) / (lit::<T>(32.0) * a),
        m3_floor: -T::one()
            + lit::<T>(2.0) / (T::one() + b.k_hat * b.k_hat * (b.rho + inv_d).powi(2)),
    }
}

/// Initial data for the Picard solver.
#[derive(Debug, Clone, PartialEq)]
pub enum PicardInitial<T: Real> {
    /// Samples of a localized or periodic field on the solver grid.
    Grid(ComplexField<T>),
    /// `a₊χ_{x>0} + a₋χ_{x<0}`, whose semigroup evolution is evaluated exactly.
    Step {
        a_plus: C<T>,
        a_minus: C<T>,
        grid: Grid<T>,
    },
}

impl<T: Real> PicardInitial<T> {
    pub fn grid(&self) -> &Grid<T> {
        match self {
            Self::Grid(f) => f.grid(),
            Self::Step { grid, .. } => grid,
        }
    }
}

/// Record of one Picard iterate.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct PicardState<T> {
    pub iterate: usize,
    /// X-distance to the previous iterate.
    pub x_difference: T,
    /// Sup-norm distance to the previous iterate over all samples.
    pub sup_difference: T,
}

/// Output of [`picard_solve`].
#[derive(Debug, Clone)]
pub struct PicardRun<T: Real> {
    pub trajectory: Trajectory<T, C<T>>,
    pub history: Vec<PicardState<T>>,
    pub converged: bool,
}

impl<T: Real> PicardRun<T> {
    /// Ratios of successive X-differences.
    pub fn factors(&self) -> Vec<T> {
        self.history
            .windows(2)
            .filter(|w| w[0].x_difference > T::zero())
            .map(|w| w[1].x_difference / w[0].x_difference)
            .collect()
    }

    /// Largest ratio of successive X-differences, ignoring the last step
    /// once the differences reach rounding level.
    pub fn contraction_factor(&self) -> T {
        let floor = lit::<T>(1e-13);
        self.history
            .windows(2)
            .filter(|w| w[0].x_difference > floor && w[1].x_difference > floor)
            .map(|w| w[1].x_difference / w[0].x_difference)
            .fold(T::zero(), T::max)
    }
}

const GAUSS: [&[(f64, f64)]; 8] = [
    &[(0.5, 1.0)],
    &[
        (0.211_324_865_405_187_1, 0.5),
        (0.788_675_134_594_812_9, 0.5),
    ],
    &[
        (0.112_701_665_379_258_3, 0.277_777_777_777_777_8),
        (0.5, 0.444_444_444_444_444_4),
        (0.887_298_334_620_741_7, 0.277_777_777_777_777_8),
    ],
    &[
        (0.069_431_844_202_973_71, 0.173_927_422_568_726_9),
        (0.330_009_478_207_571_9, 0.326_072_577_431_273_1),
        (0.669_990_521_792_428_1, 0.326_072_577_431_273_1),
        (0.930_568_155_797_026_3, 0.173_927_422_568_726_9),
    ],
    &[
        (0.046_910_077_030_668_0, 0.118_463_442_528_094_5),
        (0.230_765_344_947_158_5, 0.239_314_335_249_683_2),
        (0.5, 0.284_444_444_444_444_4),
        (0.769_234_655_052_841_5, 0.239_314_335_249_683_2),
        (0.953_089_922_969_332, 0.118_463_442_528_094_5),
    ],
    &[
        (0.033_765_242_898_423_99, 0.085_662_246_189_585_17),
        (0.169_395_306_766_867_7, 0.180_380_786_524_069_3),
        (0.380_690_406_958_401_5, 0.233_956_967_286_345_5),
        (0.619_309_593_041_598_5, 0.233_956_967_286_345_5),
        (0.830_604_693_233_132_3, 0.180_380_786_524_069_3),
        (0.966_234_757_101_576, 0.085_662_246_189_585_17),
    ],
    &[
        (0.025_446_043_828_620_74, 0.064_742_483_084_434_85),
        (0.129_234_407_200_302_8, 0.139_852_695_744_638_3),
        (0.297_077_424_311_301_4, 0.190_915_025_252_559_5),
        (0.5, 0.208_979_591_836_734_7),
        (0.702_922_575_688_698_6, 0.190_915_025_252_559_5),
        (0.870_765_592_799_697_2, 0.139_852_695_744_638_3),
        (0.974_553_956_171_379_3, 0.064_742_483_084_434_85),
    ],
    &[
        (0.019_855_071_751_231_88, 0.050_614_268_145_188_13),
        (0.101_666_761_293_186_6, 0.111_190_517_226_687_2),
        (0.237_233_795_041_835_5, 0.156_853_322_938_943_6),
        (0.408_282_678_752_175_1, 0.181_341_891_689_181),
        (0.591_717_321_247_825, 0.181_341_891_689_181),
        (0.762_766_204_958_164_5, 0.156_853_322_938_943_6),
        (0.898_333_238_706_813_4, 0.111_190_517_226_687_2),
        (0.980_144_928_248_768_1, 0.050_614_268_145_188_13),
    ],
];

/// Geometric sampling `t_k = t_min·r^k` covering `[t_min, max(T, 4 t_min)]`,
/// with `r = 2^{1/q}` so that `4 t_min` is a sample.
fn picard_times<T: Real>(cfg: &SolverConfig<T>) -> Result<(Vec<T>, usize)> {
    cfg.validate()?;
    if !(cfg.growth > T::one()) {
        return domain("Picard sampling needs a growth ratio above 1");
    }
    let q = (T::LN_2() / cfg.growth.ln())
        .round()
        .to_usize()
        .unwrap_or(1)
        .max(1);
    let r = lit::<T>(2.0).powf(T::one() / from_usize(q));
    let end = cfg.t_end.max(cfg.t0 * lit(4.0));
    let mut times = vec![cfg.t0];
    let mut k = 0;
    loop {
        k += 1;
        let t = cfg.t0 * r.powi(k);
        if t >= end * (T::one() - lit(1e-12)) {
            times.push(end);
            break;
        }
        times.push(t);
    }
    // indices k with t_k = 4 t_min exactly when the end is not clipped
    let four = 2 * q;
    if four < times.len() {
        times[four] = cfg.t0 * lit(4.0);
    }
    Ok((times, q))
}

/// Lagrange weights for interpolation at `x` through `nodes`.
fn lagrange_weights<T: Real>(nodes: &[T], x: T) -> Vec<T> {
    (0..nodes.len())
        .map(|i| {
            let mut w = T::one();
            for j in 0..nodes.len() {
                if j != i {
                    w = w * (x - nodes[j]) / (nodes[i] - nodes[j]);
                }
            }
            w
        })
        .collect()
}

/// Values and spectral gradients of one field.
type Sampled<T> = (Vec<C<T>>, Vec<C<T>>);

/// Values and gradients at every sample time.
type SampledTrajectory<T> = (Vec<Vec<C<T>>>, Vec<Vec<C<T>>>);

/// The Duhamel map on a fixed space grid and geometric time grid, carried
/// out in Fourier space.
struct Duhamel<'a, T: Real> {
    engine: Engine<T>,
    initial: &'a PicardInitial<T>,
    times: Vec<T>,
    q: usize,
    nodes: usize,
    /// `S(t_k)u⁰` and its gradient at each sample time.
    free: Vec<Sampled<T>>,
}

impl<'a, T: Real> Duhamel<'a, T> {
    fn new(
        initial: &'a PicardInitial<T>,
        times: Vec<T>,
        q: usize,
        nodes: usize,
        p: &GlParams<T>,
    ) -> Result<Self> {
        let grid = *initial.grid();
        let boundary = Boundary::Periodic;
        let engine = Engine::new(grid, boundary, *p)?;
        if let PicardInitial::Step { .. } = initial {
            let n = grid.len();
            let h = grid.spacing();
            let centre_ok = n.is_multiple_of(2) && (grid.x(n / 2)).abs() <= h * lit(1e-9);
            if !centre_ok {
                return input("step data need an even grid with a node at x = 0 in the middle");
            }
        }
        let free = times
            .iter()
            .map(|&t| -> Result<Sampled<T>> {
                match initial {
                    PicardInitial::Grid(u0) => {
                        let v = engine.semigroup.apply_values(u0.values(), t);
                        let dv = engine.derivative(&v);
                        Ok((v, dv))
                    }
                    PicardInitial::Step {
                        a_plus,
                        a_minus,
                        grid,
                    } => {
                        let mut v = Vec::with_capacity(grid.len());
                        let mut dv = Vec::with_capacity(grid.len());
                        for x in grid.points() {
                            v.push(semigroup::apply_to_step(*a_plus, *a_minus, x, t, p)?);
                            dv.push(semigroup::step_gradient(*a_plus, *a_minus, x, t, p)?);
                        }
                        Ok((v, dv))
                    }
                }
            })
            .collect::<Result<Vec<_>>>()?;
        Ok(Self {
            engine,
            initial,
            times,
            q,
            nodes,
            free,
        })
    }

    fn spectral(&self) -> &Spectral<T> {
        self.engine.spectral()
    }

    /// `∫_{t_k}^{t_{k+1}} S(t_{k+1} - s) g(s) ds` in Fourier space from
    /// spectra `g_hat` at the sample times, interpolated cubically in `ln t`.
    fn cell(&self, g_hat: &[Vec<C<T>>], k: usize) -> Vec<C<T>> {
        let n_t = self.times.len();
        let lo = k.saturating_sub(1).min(n_t.saturating_sub(4));
        let hi = (lo + 4).min(n_t);
        let stencil: Vec<T> = (lo..hi).map(|i| self.times[i].ln()).collect();
        let (a, b) = (self.times[k].ln(), self.times[k + 1].ln());
        let t_next = self.times[k + 1];
        let p = *self.engine.params();
        let xi = self.spectral().wavenumbers();
        let mut acc = vec![C::new(T::zero(), T::zero()); xi.len()];
        for &(node, weight) in GAUSS[self.nodes - 1] {
            let tau = a + (b - a) * lit(node);
            let s = tau.exp();
            // ds = s dτ
            let w = (b - a) * lit::<T>(weight) * s;
            let lw = lagrange_weights(&stencil, tau);
            for (j, acc_j) in acc.iter_mut().enumerate() {
                let mut gj = C::new(T::zero(), T::zero());
                for (m, &l) in lw.iter().enumerate() {
                    gj = gj + g_hat[lo + m][j] * l;
                }
                *acc_j = *acc_j + p.symbol(xi[j], t_next - s) * gj * w;
            }
        }
        acc
    }

    fn evolve(&self, spec: &[C<T>], dt: T) -> Vec<C<T>> {
        let mut out = spec.to_vec();
        self.engine.semigroup.evolve_spectrum(&mut out, dt);
        out
    }

    /// `Y ↦ Y(2·)` on the centred grid; samples mapped outside the grid are zero.
    fn dilate(&self, y: &[C<T>]) -> Vec<C<T>> {
        let n = y.len();
        let half = n / 2;
        (0..n)
            .map(|i| {
                let j = 2 * i as isize - half as isize;
                if j >= 0 && (j as usize) < n {
                    y[j as usize]
                } else {
                    C::new(T::zero(), T::zero())
                }
            })
            .collect()
    }

    /// Spectra of `I(t_k) = ∫_0^{t_k} S(t_k - s) g(s) ds` for all samples.
    fn integral_part(&self, g_hat: &[Vec<C<T>>], g0_hat: Option<&[C<T>]>) -> Vec<Vec<C<T>>> {
        let n_t = self.times.len();
        // P_k: contribution of [t_0, t_k]
        let mut partial = Vec::with_capacity(n_t);
        partial.push(vec![C::new(T::zero(), T::zero()); g_hat[0].len()]);
        for k in 0..n_t - 1 {
            let dt = self.times[k + 1] - self.times[k];
            let mut next = self.evolve(&partial[k], dt);
            for (a, b) in next.iter_mut().zip(self.cell(g_hat, k)) {
                *a = *a + b;
            }
            partial.push(next);
        }
        let t_min = self.times[0];
        // early layer I(t_min)
        let early: Vec<C<T>> = match self.initial {
            PicardInitial::Grid(_) => {
                // trapezoid on [0, t_min] with g(u⁰) transported by S(t_min)
                let g0 = g0_hat.expect("grid data supply g(u⁰)");
                let mut out = self.evolve(g0, t_min);
                for (a, b) in out.iter_mut().zip(&g_hat[0]) {
                    *a = (*a + *b) * (t_min * lit(0.5));
                }
                out
            }
            PicardInitial::Step { .. } => {
                // self-similarity: I(x, t_min) = I(2x, 4 t_min) = [S(3 t_min) I(t_min) + P_{2q}](2x)
                let f_hat = &partial[2 * self.q];
                let f_phys = self.spectral().inverse(f_hat.clone());
                let mut x = vec![C::new(T::zero(), T::zero()); f_phys.len()];
                for _ in 0..400 {
                    let sx = self
                        .spectral()
                        .inverse(self.evolve(&self.spectral().forward(&x), lit::<T>(3.0) * t_min));
                    let y: Vec<C<T>> = sx.iter().zip(&f_phys).map(|(a, b)| *a + *b).collect();
                    let next = self.dilate(&y);
                    let change = next
                        .iter()
                        .zip(&x)
                        .map(|(a, b)| (a - b).norm())
                        .fold(T::zero(), T::max);
                    let size = next.iter().map(|a| a.norm()).fold(T::zero(), T::max);
                    x = next;
                    if change <= T::epsilon() * lit::<T>(4.0) * size.max(T::min_positive_value())
                        || size == T::zero()
                    {
                        break;
                    }
                }
                self.spectral().forward(&x)
            }
        };
        (0..n_t)
            .map(|k| {
                let mut out = self.evolve(&early, self.times[k] - t_min);
                for (a, b) in out.iter_mut().zip(&partial[k]) {
                    *a = *a + *b;
                }
                out
            })
            .collect()
    }

    /// `T_{u⁰}(u)` at every sample: values and gradients.
    fn apply(&self, u: &[Vec<C<T>>], du: &[Vec<C<T>>]) -> SampledTrajectory<T> {
        let p = *self.engine.params();
        let g_hat: Vec<Vec<C<T>>> = u
            .iter()
            .zip(du)
            .map(|(v, dv)| self.spectral().forward(&g_samples(v, dv, &p)))
            .collect();
        let g0_hat = match self.initial {
            PicardInitial::Grid(u0) => Some(self.spectral().forward(&self.engine.g(u0.values()))),
            PicardInitial::Step { .. } => None,
        };
        let integral = self.integral_part(&g_hat, g0_hat.as_deref());
        let mut values = Vec::with_capacity(u.len());
        let mut grads = Vec::with_capacity(u.len());
        for (k, i_hat) in integral.into_iter().enumerate() {
            let mut d_hat = i_hat.clone();
            self.spectral().differentiate_spectrum(&mut d_hat);
            let iv = self.spectral().inverse(i_hat);
            let idv = self.spectral().inverse(d_hat);
            let (fv, fdv) = &self.free[k];
            values.push(fv.iter().zip(&iv).map(|(a, b)| *a + *b).collect());
            grads.push(fdv.iter().zip(&idv).map(|(a, b)| *a + *b).collect());
        }
        (values, grads)
    }
}

fn picard_balls<T: Real>(grid: &Grid<T>, times: &[T]) -> Result<ParabolicBallSet<T>> {
    ParabolicBallSet::dyadic(grid, *times.last().unwrap(), 8, 1)
}

/// Evaluates the Duhamel map `T_{u⁰}(u)(t) = S(t)u⁰ + ∫_0^t S(t-s)g(u(s))ds`.
///
/// The trajectory must be sampled on the Picard time grid of `cfg`
/// (geometric with ratio `2^{1/q}` from `cfg.t0`), carry gradients, and `t`
/// must be one of its sample times.
pub fn duhamel_apply<T: Real>(
    u0: &PicardInitial<T>,
    tr: &Trajectory<T, C<T>>,
    t: T,
    cfg: &SolverConfig<T>,
    p: &GlParams<T>,
) -> Result<ComplexField<T>> {
    let (times, q) = picard_times(cfg)?;
    let matches = tr.times().len() == times.len()
        && tr
            .times()
            .iter()
            .zip(&times)
            .all(|(a, b)| (*a - *b).abs() <= *b * lit(1e-12));
    if !matches {
        return Err(Error::Coverage(format!(
            "trajectory must be sampled at the {} geometric times from {} to {}",
            times.len(),
            cfg.t0,
            times.last().unwrap()
        )));
    }
    let k = times
        .iter()
        .position(|&s| (s - t).abs() <= s * lit(1e-12))
        .ok_or_else(|| Error::Coverage(format!("t = {t} is not a sample time")))?;
    if !tr.grid().same_as(u0.grid()) {
        return input("trajectory and initial data use different grids");
    }
    let grads = tr
        .gradients()
        .ok_or_else(|| Error::Input("trajectory carries no gradients".into()))?;
    let map = Duhamel::new(u0, times, q, cfg.quadrature_nodes, p)?;
    let (values, _) = map.apply(tr.values(), grads);
    ComplexField::new(*tr.grid(), values[k].clone())
}

/// Picard iteration `u ↦ T_{u⁰}(u)` from `u = S(t)u⁰`.
///
/// Stops when the X-distance between successive iterates falls below
/// `cfg.tol` or after `max_iters` iterates. If the distance grows three
/// times in a row the run is abandoned with a contraction-failure report.
pub fn picard_solve<T: Real>(
    u0: &PicardInitial<T>,
    cfg: &SolverConfig<T>,
    p: &GlParams<T>,
    max_iters: usize,
) -> Result<PicardRun<T>> {
    let (times, q) = picard_times(cfg)?;
    let grid = *u0.grid();
    let map = Duhamel::new(u0, times.clone(), q, cfg.quadrature_nodes, p)?;
    let balls = picard_balls(&grid, &times)?;
    let mut u: Vec<Vec<C<T>>> = map.free.iter().map(|(v, _)| v.clone()).collect();
    let mut du: Vec<Vec<C<T>>> = map.free.iter().map(|(_, d)| d.clone()).collect();
    let mut history: Vec<PicardState<T>> = Vec::new();
    let mut growths = 0;
    let mut converged = false;
    for iterate in 1..=max_iters {
        let (v, dv) = map.apply(&u, &du);
        let blown = v.iter().any(|row| !(sup(row) <= lit(BLOW_UP_LEVEL)));
        if blown {
            return Err(Error::BlowUp {
                time: to_f64(*times.last().unwrap()),
                last_valid_time: to_f64(times[0]),
            });
        }
        let diff_values: Vec<Vec<C<T>>> = v
            .iter()
            .zip(&u)
            .map(|(a, b)| a.iter().zip(b).map(|(x, y)| x - y).collect())
            .collect();
        let diff_grads: Vec<Vec<C<T>>> = dv
            .iter()
            .zip(&du)
            .map(|(a, b)| a.iter().zip(b).map(|(x, y)| x - y).collect())
            .collect();
        let sup_difference = diff_values.iter().map(|r| sup(r)).fold(T::zero(), T::max);
        let diff = Trajectory::new(grid, times.clone(), diff_values)?.with_gradients(diff_grads)?;
        let x_difference = x_seminorm(&diff, &balls)?.total();
        if let Some(last) = history.last() {
            if x_difference > last.x_difference {
                growths += 1;
            } else {
                growths = 0;
            }
        }
        history.push(PicardState {
            iterate,
            x_difference,
            sup_difference,
        });
        log::debug!("Picard iterate {iterate}: X-distance {x_difference:e}");
        u = v;
        du = dv;
        if x_difference <= cfg.tol {
            converged = true;
            break;
        }
        if growths >= 3 {
            let factor =
                history[history.len() - 1].x_difference / history[history.len() - 2].x_difference;
            return Err(Error::ContractionFailure {
                iterations: iterate,
                factor: to_f64(factor),
                differences: history.iter().map(|s| to_f64(s.x_difference)).collect(),
            });
        }
    }
    let trajectory = Trajectory::new(grid, times, u)?.with_gradients(du)?;
    Ok(PicardRun {
        trajectory,
        history,
        converged,
    })
}

/// Outcome of one stability run.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct StabilityReport<T> {
    pub eta: T,
    /// Measured `‖m(·, t0) - m_{c,α}(·, t0)‖_∞` after renormalization.
    pub eta_actual: T,
    pub x_distance: NormParts<T>,
    /// `[m - m_{c,α}]_X / η`.
    pub ratio: T,
    /// `sup_t √t‖∂ₓm - ∂ₓm_{c,α}‖_∞ / η`.
    pub gradient_ratio: T,
    /// Whether `η <= c√π/(2√α)`.
    pub within_hypothesis: bool,
}

/// Spatial and temporal discretization of a stability run.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct StabilitySetup<T> {
    pub half_width: T,
    pub points: usize,
    pub bump_center: T,
    pub bump_radius: T,
}

impl<T: Real> Default for StabilitySetup<T> {
    fn default() -> Self {
        Self {
            half_width: lit(16.0),
            points: 1024,
            bump_center: lit(0.3),
            bump_radius: T::one(),
        }
    }
}

/// Perturbs `m_{c,α}(·, t0)` by a smooth compactly supported bump of height
/// `η` along `e₃`, renormalizes, marches both fields with LLG and compares.
pub fn stability_experiment<T: Real>(
    profile: &Profile<T>,
    eta: T,
    cfg: &SolverConfig<T>,
    setup: &StabilitySetup<T>,
) -> Result<StabilityReport<T>> {
    let (c, alpha) = (profile.c(), profile.alpha());
    let p = GlParams::new(alpha)?;
    let grid = Grid::centered(setup.half_width, setup.points)?;
    let reference0 = selfsim::sample_m(profile, grid, cfg.t0)?;
    let bump = |x: T| {
        let y = (x - setup.bump_center) / setup.bump_radius;
        if y.abs() < T::one() {
            (T::one() - T::one() / (T::one() - y * y)).exp()
        } else {
            T::zero()
        }
    };
    let perturbed0 = if eta == T::zero() {
        reference0.clone()
    } else {
        SpinField::new(
            grid,
            reference0
                .values()
                .iter()
                .zip(grid.points())
                .map(|(m, x)| vec3::normalize([m[0], m[1], m[2] + eta * bump(x)]))
                .collect(),
        )?
    };
    let eta_actual = perturbed0.sup_distance(&reference0);
    let delta = (T::one() + reference0.min_m3().0.min(perturbed0.min_m3().0)) * lit(0.5);
    let reference = llg_solve(&reference0, delta, cfg, &p)?;
    let perturbed = llg_solve(&perturbed0, delta, cfg, &p)?;
    let diff = perturbed.spins.difference(&reference.spins)?;
    let balls = ParabolicBallSet::dyadic(&grid, cfg.t_end, 8, 1)?;
    let x_distance = x_seminorm(&diff, &balls)?;
    let ratio_of = |v: T| {
        if eta_actual > T::zero() {
            v / eta_actual
        } else {
            T::zero()
        }
    };
    Ok(StabilityReport {
        eta,
        eta_actual,
        x_distance,
        ratio: ratio_of(x_distance.total()),
        gradient_ratio: ratio_of(x_distance.sup),
        within_hypothesis: eta <= c * T::PI().sqrt() / (lit::<T>(2.0) * alpha.sqrt()),
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::specfun::big_erf;

    #[test]
    fn nonlinearity_values() {
        let p = GlParams::new(1.0).unwrap();
        assert_eq!(
            g_nonlinearity(C::new(0.3, 0.2), C::new(0.0, 0.0), &p),
            C::new(0.0, 0.0)
        );
        // -2i(0 - i)·1·1/2 = -1
        let g = g_nonlinearity(C::new(1.0, 0.0), C::new(1.0, 0.0), &p);
        assert!((g - C::new(-1.0, 0.0)).norm() < 1e-15);
        let q = GlParams::new(0.3).unwrap();
        for (u, du) in [
            (C::new(1.0, 0.0), C::new(0.5, 2.0)),
            (C::new(-3.0, 0.1), C::new(1.0, 1.0)),
        ] {
            assert!(g_nonlinearity(u, du, &q).norm() <= du.norm_sqr() + 1e-15);
        }
    }

    #[test]
    fn budget_examples() {
        let b = WellPosednessBudget::<f64>::new(2.0, 0.0, 1.0).unwrap();
        let r = check_budget(&b);
        assert!((r.llg_lhs - 0.5).abs() < 1e-15 && r.llg_pass);
        let delta: f64 = 0.7;
        let rho = delta.powi(4) / 8.0;
        let r = check_budget(&WellPosednessBudget::new(delta, 0.0, rho).unwrap());
        assert!(r.llg_pass);
        assert!((r.llg_lhs - rho).abs() < 1e-15);
        let eps0 = delta.powi(6) / (32.0 * 8.0) * 1.001;
        for rho in [1e-6, 1e-4, 1e-3, 0.01, 0.03, 0.1, 1.0] {
            assert!(!check_budget(&WellPosednessBudget::new(delta, eps0, rho).unwrap()).llg_pass);
        }
    }

    #[test]
    fn step_times_are_geometric_and_end_exactly() {
        let cfg = SolverConfig::geometric(0.1, 2.0, 50).unwrap();
        let t = cfg.step_times();
        assert_eq!(t.len(), 51);
        assert_eq!(*t.last().unwrap(), 2.0);
        let cfg = SolverConfig::uniform(0.1, 1.0, 0.3).unwrap();
        assert_eq!(cfg.step_times().len(), 4);
        assert!(SolverConfig::uniform(1.0, 0.5, 0.1).is_err());
    }

    #[test]
    fn constant_data_is_stationary() {
        let grid = Grid::centered(8.0, 64).unwrap();
        let p = GlParams::new(0.7).unwrap();
        let q = C::new(0.4, -0.2);
        let u0 = ComplexField::constant(grid, q).unwrap();
        let cfg = SolverConfig::uniform(0.1, 1.0, 0.05).unwrap();
        let tr = time_march(&u0, Boundary::Reflecting, &cfg, &p).unwrap();
        for v in tr.values() {
            assert!(v.iter().all(|z| (z - q).norm() < 1e-14));
        }
        let m = SpinField::constant(grid, [0.0, 0.6, 0.8]).unwrap();
        let run = llg_solve(&m, 1.0, &cfg, &p).unwrap();
        assert!(run
            .spins
            .values()
            .iter()
            .flatten()
            .all(|v| vec3::dist(*v, [0.0, 0.6, 0.8]) < 1e-14));
    }

    #[test]
    fn erf_solution_residual_at_alpha_one() {
        let c = 0.3;
        let grid = Grid::centered(16.0, 512).unwrap();
        let p = GlParams::new(1.0).unwrap();
        let times = vec![0.999, 1.0, 1.001];
        let values: Vec<Vec<C<f64>>> = times
            .iter()
            .map(|&t: &f64| {
                grid.points()
                    .iter()
                    .map(|&x| C::new(0.0, c * big_erf(x / t.sqrt())).exp())
                    .collect()
            })
            .collect();
        let tr = Trajectory::new(grid, times, values).unwrap();
        assert!(residual_dnls(&tr, Boundary::Reflecting, &p).unwrap() < 1e-6);
        let wrong = GlParams::new(0.5).unwrap();
        assert!(residual_dnls(&tr, Boundary::Reflecting, &wrong).unwrap() > 1e-2);
    }

    #[test]
    fn picard_constant_data_converges_at_once() {
        let grid = Grid::new(-8.0, 0.25, 64).unwrap();
        let p = GlParams::new(0.8).unwrap();
        let q = C::new(0.5, 0.5);
        let u0 = PicardInitial::Step {
            a_plus: q,
            a_minus: q,
            grid,
        };
        let mut cfg = SolverConfig::geometric(1.0 / 16.0, 1.0, 32).unwrap();
        cfg.growth = 2f64.powf(0.125);
        let run = picard_solve(&u0, &cfg, &p, 5).unwrap();
        assert!(run.converged);
        assert_eq!(run.history.len(), 1);
        assert!(run
            .trajectory
            .values()
            .iter()
            .flatten()
            .all(|z| (z - q).norm() < 1e-14));
    }
}
