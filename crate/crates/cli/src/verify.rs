//! The invariant suite behind `gilbert verify`.

use std::f64::consts::PI;

use gilbert::dnls::{self, WellPosednessBudget};
use gilbert::field::vec3;
use gilbert::hasimoto;
use gilbert::norms::{self, Trajectory};
use gilbert::quad::{integrate_to_infinity, QuadOptions};
use gilbert::selfsim;
use gilbert::semigroup;
use gilbert::specfun::big_erf;
use gilbert::spectral::Boundary;
use gilbert::stereo;
use gilbert::{ComplexField, GlParams, Grid, Semigroup, SpinField};
use num_complex::Complex64;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;

use crate::table::ResultTable;

#[derive(Debug, Clone, Copy)]
pub struct VerifyContext {
    pub seed: u64,
    /// Builds every profile with a slightly wrong amplitude, for fault injection.
    pub perturb_profile: bool,
}

impl VerifyContext {
    fn profile(&self, c: f64, alpha: f64) -> gilbert::Result<gilbert::Profile> {
        let c = if self.perturb_profile {
            c * (1.0 + 1e-3)
        } else {
            c
        };
        selfsim::build_profile(c, alpha, 1e-10)
    }

    fn rng(&self, salt: u64) -> ChaCha8Rng {
        ChaCha8Rng::seed_from_u64(self.seed ^ salt.wrapping_mul(0x9e37_79b9_7f4a_7c15))
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Measurement {
    pub measured: f64,
    pub bound: f64,
    pub pass: bool,
}

fn below(measured: f64, bound: f64) -> Measurement {
    Measurement {
        measured,
        bound,
        pass: measured <= bound,
    }
}

type Check = fn(&VerifyContext) -> gilbert::Result<Measurement>;

pub struct Invariant {
    pub name: &'static str,
    pub identity: &'static str,
    pub check: Check,
}

fn sup_diff(a: &[Complex64], b: &[Complex64]) -> f64 {
    a.iter()
        .zip(b)
        .map(|(x, y)| (x - y).norm())
        .fold(0.0, f64::max)
}

fn smooth_field(rng: &mut ChaCha8Rng, grid: Grid) -> gilbert::Result<ComplexField> {
    let modes: Vec<(Complex64, f64)> = (0..4)
        .map(|k| {
            (
                Complex64::new(rng.gen_range(-1.0..1.0), rng.gen_range(-1.0..1.0)),
                (k + 1) as f64,
            )
        })
        .collect();
    let period = 2.0 * grid.extent();
    ComplexField::from_fn(grid, |x| {
        modes
            .iter()
            .map(|(a, k)| a * Complex64::new(0.0, 2.0 * PI * k * x / period).exp())
            .sum()
    })
}

fn semigroup_law(ctx: &VerifyContext) -> gilbert::Result<Measurement> {
    let grid = Grid::centered(8.0, 256)?;
    let p = GlParams::new(0.6)?;
    let s = Semigroup::new(grid, Boundary::Periodic, p)?;
    let f = smooth_field(&mut ctx.rng(1), grid)?;
    let ab = s.apply(&s.apply(&f, 0.3)?, 0.5)?;
    let direct = s.apply(&f, 0.8)?;
    Ok(below(sup_diff(ab.values(), direct.values()), 1e-10))
}

fn semigroup_sup_bound(_: &VerifyContext) -> gilbert::Result<Measurement> {
    let mut worst: f64 = 0.0;
    for alpha in [0.2, 0.5, 0.9] {
        let p = GlParams::new(alpha)?;
        let grid = Grid::centered(10.0, 512)?;
        let a = Complex64::new(0.6, 0.8);
        let f = semigroup::step_field(a, -a, grid, 1.0, &p)?;
        worst = worst.max(f.sup_norm() * alpha.sqrt());
    }
    Ok(below(worst, 1.0 + 1e-12))
}

fn semigroup_gaussian(_: &VerifyContext) -> gilbert::Result<Measurement> {
    let grid = Grid::centered(20.0, 512)?;
    let p = GlParams::new(1.0)?;
    let s = Semigroup::new(grid, Boundary::Periodic, p)?;
    let f = ComplexField::from_fn(grid, |x| Complex64::new((-x * x).exp(), 0.0))?;
    let t = 0.7;
    let exact = ComplexField::from_fn(grid, |x| {
        Complex64::new(
            (-x * x / (1.0 + 4.0 * t)).exp() / (1.0 + 4.0 * t).sqrt(),
            0.0,
        )
    })?;
    Ok(below(s.apply(&f, t)?.sup_distance(&exact), 1e-10))
}

fn projection_estimates(ctx: &VerifyContext) -> gilbert::Result<Measurement> {
    let mut rng = ctx.rng(2);
    let mut worst: f64 = 0.0;
    for delta in [0.25, 0.5, 1.0] {
        let radius = (2.0 / delta - 1.0f64).sqrt() * 0.999;
        for _ in 0..200 {
            let mut draw = || {
                let a = Complex64::new(rng.gen_range(-1.0..1.0), rng.gen_range(-1.0..1.0));
                let b = Complex64::new(rng.gen_range(-1.0..1.0), rng.gen_range(-1.0..1.0));
                let k = rng.gen_range(0.5..3.0);
                let scale = radius * rng.gen_range(0.1..1.0) / (a.norm() + b.norm());
                move |x: f64| {
                    let e = Complex64::new(0.0, k * x).exp();
                    ((a + b * e) * scale, b * Complex64::new(0.0, k) * e * scale)
                }
            };
            let (f, g) = (draw(), draw());
            for i in 0..20 {
                let x = -3.0 + 0.3 * i as f64;
                let ((u, du), (v, dv)) = (f(x), g(x));
                let (m, n) = (stereo::inverse_point(u), stereo::inverse_point(v));
                let (dm, dn) = (
                    stereo::inverse_gradient(u, du),
                    stereo::inverse_gradient(v, dv),
                );
                let k = 4.0 / (delta * delta);
                let ratio = |lhs: f64, rhs: f64| {
                    if rhs > 0.0 {
                        lhs / rhs
                    } else if lhs > 1e-14 {
                        f64::INFINITY
                    } else {
                        0.0
                    }
                };
                worst = worst
                    .max(ratio(
                        (stereo::project_point(m) - stereo::project_point(n)).norm(),
                        k * vec3::dist(m, n),
                    ))
                    .max(ratio(
                        stereo::project_gradient(m, dm).norm(),
                        k * vec3::norm(dm),
                    ))
                    .max(ratio(vec3::dist(m, n), 3.0 * (u - v).norm()))
                    .max(ratio(vec3::norm(dm), 4.0 * du.norm()))
                    .max(ratio(
                        vec3::dist(dm, dn),
                        4.0 * (du - dv).norm() + 12.0 * (u - v).norm() * (du.norm() + dv.norm()),
                    ));
            }
        }
    }
    Ok(below(worst, 1.0 + 1e-12))
}

fn round_trip(ctx: &VerifyContext) -> gilbert::Result<Measurement> {
    let mut rng = ctx.rng(3);
    let grid = Grid::centered(4.0, 128)?;
    let phases: Vec<(f64, f64)> = (0..grid.len())
        .map(|_| (rng.gen_range(0.0..2.09), rng.gen_range(0.0..2.0 * PI)))
        .collect();
    let m = SpinField::new(
        grid,
        phases
            .iter()
            .map(|(th, ph)| [th.sin() * ph.cos(), th.sin() * ph.sin(), th.cos()])
            .collect(),
    )?;
    let back = stereo::inverse_project(&stereo::project(&m, 0.5)?)?;
    Ok(below(back.sup_distance(&m), 1e-12))
}

fn bmo_laws(ctx: &VerifyContext) -> gilbert::Result<Measurement> {
    let grid = Grid::centered(8.0, 256)?;
    let radii = norms::dyadic_radii(&grid, 6);
    let f = smooth_field(&mut ctx.rng(4), grid)?;
    let base = norms::bmo_seminorm(f.values(), &grid, &radii)?;
    let q = Complex64::new(3.0, -2.0);
    let shifted: Vec<Complex64> = f.values().iter().map(|z| z + q).collect();
    let scaled: Vec<Complex64> = f.values().iter().map(|z| z * 2.5).collect();
    let d1 = (norms::bmo_seminorm(&shifted, &grid, &radii)? - base).abs();
    let d2 = (norms::bmo_seminorm(&scaled, &grid, &radii)? - 2.5 * base).abs();
    Ok(below(d1.max(d2) / base, 1e-12))
}

fn bmo_sup_and_sandwich(ctx: &VerifyContext) -> gilbert::Result<Measurement> {
    let grid = Grid::centered(8.0, 256)?;
    let radii = norms::dyadic_radii(&grid, 6);
    let mut worst: f64 = 0.0;
    let mut rng = ctx.rng(5);
    for _ in 0..8 {
        let f = smooth_field(&mut rng, grid)?;
        let b = norms::bmo_seminorm(f.values(), &grid, &radii)?;
        let d = norms::bmo_double_average(f.values(), &grid, &radii)?;
        worst = worst
            .max(b / (2.0 * f.sup_norm()))
            .max(b / d)
            .max(d / (2.0 * b));
    }
    Ok(below(worst, 1.0 + 1e-8))
}

fn step_bmo(_: &VerifyContext) -> gilbert::Result<Measurement> {
    let grid = Grid::centered(4.0, 256)?;
    let a = [1.0, 0.0, 0.0];
    let b = [0.0, 1.0, 0.0];
    let m = selfsim::step_data(a, b, grid)?;
    let v = norms::spin_bmo(&m, 7)?;
    Ok(below((v - vec3::dist(a, b) / 2.0).abs(), 1e-12))
}

fn e1_integral(_: &VerifyContext) -> gilbert::Result<Measurement> {
    let opts = QuadOptions::with_tol(1e-14, 1e-12);
    let i = integrate_to_infinity(
        |y: f64| {
            if y == 0.0 {
                0.0
            } else {
                norms::e1(y * y).unwrap_or(0.0)
            }
        },
        0.0,
        opts,
    )?;
    Ok(below((i - PI.sqrt()).abs(), 1e-8))
}

fn carleson_bound(_: &VerifyContext) -> gilbert::Result<Measurement> {
    let mut worst: f64 = 0.0;
    for c in [0.1, 0.5, 1.0] {
        for alpha in [0.3, 0.6, 1.0] {
            for x in [0.0, 0.5, 2.0] {
                for r in [0.5, 1.0, 2.0] {
                    worst = worst.max(
                        norms::carleson_selfsim(c, alpha, x, r)?
                            / norms::carleson_selfsim_bound(c, alpha),
                    );
                }
            }
        }
    }
    Ok(below(worst, 1.0))
}

fn heat_flow_profile(ctx: &VerifyContext) -> gilbert::Result<Measurement> {
    let c = 0.8;
    let p = ctx.profile(c, 1.0)?;
    let worst = (-100..=100)
        .map(|i| {
            let s = 0.1 * i as f64;
            vec3::dist(p.tangent(s), selfsim::explicit_profile(c, s))
        })
        .fold(0.0, f64::max);
    Ok(below(worst, 1e-8))
}

fn derivative_law(ctx: &VerifyContext) -> gilbert::Result<Measurement> {
    let mut worst: f64 = 0.0;
    for c in [0.2, 0.8] {
        for alpha in [0.5, 1.0] {
            let p = ctx.profile(c, alpha)?;
            for i in 0..20 {
                let s = -5.0 + 0.5 * i as f64;
                let law = selfsim::curvature(c, alpha, s);
                worst = worst.max((vec3::norm(p.tangent_derivative(s)) - law).abs() / law);
            }
        }
    }
    Ok(below(worst, 1e-8))
}

fn limit_symmetry(ctx: &VerifyContext) -> gilbert::Result<Measurement> {
    let mut worst: f64 = 0.0;
    for c in [0.2, 0.8] {
        for alpha in [0.5, 1.0] {
            let p = ctx.profile(c, alpha)?;
            let ap = p.a_plus();
            let reflected = [ap[0], -ap[1], -ap[2]];
            worst = worst.max(vec3::dist(p.a_minus(), reflected) / (2.0 * p.tail_bound()));
        }
    }
    Ok(below(worst, 1.0))
}

fn angle_formula(ctx: &VerifyContext) -> gilbert::Result<Measurement> {
    let mut worst: f64 = 0.0;
    for i in 1..=15 {
        let c = 0.1 * i as f64;
        let theta = ctx.profile(c, 1.0)?.angle().theta;
        worst = worst.max((theta - (2.0 * c * PI.sqrt()).cos().acos()).abs());
    }
    Ok(below(worst, 1e-8))
}

fn energy_identity(ctx: &VerifyContext) -> gilbert::Result<Measurement> {
    let (c, alpha) = (0.5, 0.7);
    let p = ctx.profile(c, alpha)?;
    let mut worst: f64 = 0.0;
    for t in [0.25, 1.0, 4.0] {
        let law = c * c * (2.0 * PI / (alpha * t)).sqrt();
        worst = worst.max((selfsim::dirichlet_energy(&p, t)? - law).abs() / law);
    }
    Ok(below(worst, 5e-3))
}

fn nonlinearity_bound(ctx: &VerifyContext) -> gilbert::Result<Measurement> {
    let mut rng = ctx.rng(6);
    let mut worst: f64 = 0.0;
    for _ in 0..1000 {
        let p = GlParams::new(rng.gen_range(0.01..1.0))?;
        let u = Complex64::new(rng.gen_range(-5.0..5.0), rng.gen_range(-5.0..5.0));
        let du = Complex64::new(rng.gen_range(-5.0..5.0), rng.gen_range(-5.0..5.0));
        worst = worst.max(dnls::g_nonlinearity(u, du, &p).norm() / du.norm_sqr());
    }
    Ok(below(worst, 1.0 + 1e-12))
}

fn budget_saturation(_: &VerifyContext) -> gilbert::Result<Measurement> {
    let delta: f64 = 0.7;
    let rho = delta.powi(4) / 8.0;
    let r = dnls::check_budget(&WellPosednessBudget::new(delta, 0.0, rho)?);
    Ok(Measurement {
        measured: r.llg_lhs,
        bound: rho,
        pass: r.llg_pass,
    })
}

fn residual_erf(_: &VerifyContext) -> gilbert::Result<Measurement> {
    let c = 0.3;
    let grid = Grid::centered(16.0, 512)?;
    let p = GlParams::new(1.0)?;
    let times = vec![0.999, 1.0, 1.001];
    let values = times
        .iter()
        .map(|&t: &f64| {
            grid.points()
                .iter()
                .map(|&x| Complex64::new(0.0, c * big_erf(x / t.sqrt())).exp())
                .collect()
        })
        .collect();
    let tr = Trajectory::new(grid, times, values)?;
    Ok(below(
        dnls::residual_dnls(&tr, Boundary::Reflecting, &p)?,
        1e-6,
    ))
}

fn residual_llg_selfsim(ctx: &VerifyContext) -> gilbert::Result<Measurement> {
    let alpha = 0.6;
    let prof = ctx.profile(0.3, alpha)?;
    let grid = Grid::centered(16.0, 1024)?;
    let times = vec![0.999, 1.0, 1.001];
    let fields = times
        .iter()
        .map(|&t| selfsim::sample_m(&prof, grid, t))
        .collect::<gilbert::Result<Vec<_>>>()?;
    let tr = Trajectory::from_spin_fields(times, fields)?;
    Ok(below(
        dnls::residual_llg(&tr, Boundary::Reflecting, &GlParams::new(alpha)?)?,
        1e-5,
    ))
}

fn filament(_: &VerifyContext) -> gilbert::Result<Measurement> {
    let grid = Grid::centered(6.0, 600)?;
    let mut worst: f64 = 0.0;
    for (c, alpha, t) in [(0.2, 0.3, 0.25), (0.7, 0.6, 1.0), (1.3, 1.0, 3.0)] {
        let fd = hasimoto::FilamentData::self_similar(c, alpha, t, grid)?;
        let v = hasimoto::filament_function(&fd)?;
        for (x, z) in grid.points().into_iter().zip(v.values()) {
            worst = worst.max((z - hasimoto::v_selfsim(c, alpha, x, t)?).norm());
        }
    }
    Ok(below(worst, 1e-8))
}

fn nonlocal_residuals(forced: bool) -> gilbert::Result<Measurement> {
    let grid = Grid::centered(20.0, 1024)?;
    let times = [0.999, 1.0, 1.001];
    let values = times
        .iter()
        .map(|&t| {
            grid.points()
                .into_iter()
                .map(|x| {
                    if forced {
                        hasimoto::v_selfsim(0.4, 0.7, x, t)
                    } else {
                        hasimoto::w_explicit(Complex64::new(0.7, 0.0), 0.6, x, t)
                    }
                })
                .collect::<gilbert::Result<Vec<_>>>()
        })
        .collect::<gilbert::Result<Vec<_>>>()?;
    let tr = Trajectory::new(grid, times.to_vec(), values)?;
    let r = if forced {
        hasimoto::residual_nonlocal(&tr, 0.4, 0.7)?
    } else {
        hasimoto::residual_bis(&tr, 0.6)?
    };
    Ok(below(r, 1e-5))
}

fn weak_limit_away(_: &VerifyContext) -> gilbert::Result<Measurement> {
    let bump = |x: f64| {
        let y = 2.0 * x - 3.0;
        if y.abs() < 1.0 {
            (1.0 - 1.0 / (1.0 - y * y)).exp()
        } else {
            0.0
        }
    };
    let seq =
        hasimoto::weak_limit_pairing(Complex64::new(1.0, 0.0), 0.8, bump, (1.0, 2.0), &[1e-4])?;
    Ok(below(seq[0].modulus, 1e-6))
}

pub fn invariants() -> Vec<Invariant> {
    macro_rules! inv {
        ($name:expr, $identity:expr, $f:expr) => {
            Invariant {
                name: $name,
                identity: $identity,
                check: $f,
            }
        };
    }
    vec![
        inv!("semigroup.law", "S(t)S(s) = S(t+s)", semigroup_law),
        inv!(
            "semigroup.sup_bound",
            "sup |S(t)f| <= alpha^(-1/2) sup |f|",
            semigroup_sup_bound
        ),
        inv!(
            "semigroup.gaussian",
            "heat flow of a Gaussian",
            semigroup_gaussian
        ),
        inv!(
            "stereo.estimates",
            "pointwise projection estimates",
            projection_estimates
        ),
        inv!(
            "stereo.round_trip",
            "inverse projection undoes projection",
            round_trip
        ),
        inv!("norms.bmo_laws", "BMO shift and scale laws", bmo_laws),
        inv!(
            "norms.bmo_sandwich",
            "[f] <= 2 sup|f| and the double-average sandwich",
            bmo_sup_and_sandwich
        ),
        inv!("norms.step_bmo", "BMO of a step is half the jump", step_bmo),
        inv!(
            "norms.e1_integral",
            "integral of E1(y^2) equals sqrt(pi)",
            e1_integral
        ),
        inv!(
            "norms.carleson_bound",
            "Carleson integral of the self-similar gradient",
            carleson_bound
        ),
        inv!(
            "selfsim.heat_flow",
            "heat-flow profile closed form",
            heat_flow_profile
        ),
        inv!(
            "selfsim.derivative_law",
            "|f'(s)| = c exp(-alpha s^2/4)",
            derivative_law
        ),
        inv!(
            "selfsim.limit_symmetry",
            "A- is the reflection of A+",
            limit_symmetry
        ),
        inv!(
            "selfsim.angle",
            "heat-flow angle arccos(cos(2 c sqrt(pi)))",
            angle_formula
        ),
        inv!(
            "selfsim.energy",
            "Dirichlet energy c^2 sqrt(2 pi/(alpha t))",
            energy_identity
        ),
        inv!("dnls.g_bound", "|g(u)| <= |u_x|^2", nonlinearity_bound),
        inv!(
            "dnls.budget",
            "budget saturation counts as a pass",
            budget_saturation
        ),
        inv!(
            "dnls.residual_erf",
            "Erf solution of the projected heat flow",
            residual_erf
        ),
        inv!(
            "dnls.residual_llg",
            "self-similar solutions solve LLG",
            residual_llg_selfsim
        ),
        inv!(
            "hasimoto.filament",
            "filament function of the self-similar curves",
            filament
        ),
        inv!(
            "hasimoto.residual_forced",
            "v_{c,alpha} solves the forced nonlocal equation",
            |_| nonlocal_residuals(true)
        ),
        inv!(
            "hasimoto.residual_unforced",
            "w solves the unforced nonlocal equation",
            |_| nonlocal_residuals(false)
        ),
        inv!(
            "hasimoto.weak_limit",
            "pairings away from the origin vanish",
            weak_limit_away
        ),
    ]
}

/// Runs the selected invariants in parallel; the exit flag is true iff all pass.
pub fn run(ctx: &VerifyContext, only: &[String]) -> (ResultTable, bool) {
    let selected: Vec<Invariant> = invariants()
        .into_iter()
        .filter(|inv| only.is_empty() || only.iter().any(|o| inv.name.contains(o.as_str())))
        .collect();
    let results: Vec<Result<Measurement, String>> = selected
        .par_iter()
        .map(|inv| (inv.check)(ctx).map_err(|e| e.to_string()))
        .collect();
    let mut table = ResultTable::new(
        "verify",
        &[
            ("name", "invariant"),
            ("identity", "identity or inequality checked"),
            ("measured", "measured quantity"),
            ("bound", "tolerance or bound"),
            ("pass", "whether the check passed"),
        ],
    );
    let mut all = true;
    for (inv, res) in selected.iter().zip(results) {
        let row = match res {
            Ok(m) => {
                all &= m.pass;
                vec![
                    inv.name.into(),
                    inv.identity.into(),
                    m.measured.into(),
                    m.bound.into(),
                    m.pass.into(),
                ]
            }
            Err(e) => {
                all = false;
                vec![
                    inv.name.into(),
                    format!("{} (error: {e})", inv.identity).into(),
                    f64::NAN.into(),
                    f64::NAN.into(),
                    false.into(),
                ]
            }
        };
        table.push(row);
    }
    table.meta("seed", ctx.seed);
    table.meta("perturb_profile", ctx.perturb_profile);
    (table, all)
}
