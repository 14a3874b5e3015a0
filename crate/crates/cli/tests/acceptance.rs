//! Acceptance criteria, one PASS/FAIL line each. The lines go straight to
//! the stderr handle so they show up even when the harness captures output.

use std::f64::consts::{E, FRAC_PI_2, PI};
use std::io::Write;

use gilbert::dnls::{self, llg_solve, picard_solve, PicardInitial, StabilitySetup};
use gilbert::field::{vec3, Vec3};
use gilbert::hasimoto::{residual_bis, residual_nonlocal, weak_limit_pairing};
use gilbert::norms::{self, x_seminorm, ParabolicBallSet, Trajectory};
use gilbert::quad::{integrate, integrate_to_infinity, QuadOptions};
use gilbert::selfsim::{self, build_profile};
use gilbert::spectral::Boundary;
use gilbert::stereo::{inverse_gradient, inverse_point, project_gradient, project_point};
use gilbert::{ComplexField, GlParams, Grid, Semigroup, SolverConfig, SpinField};
use gilbert_cli::commands::cmd_multiplicity;
use gilbert_cli::config::MultiplicityConfig;
use num_complex::Complex64;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;

struct Verdict {
    pass: bool,
    detail: String,
}

type Criterion = (&'static str, fn() -> Verdict);

fn verdict(pass: bool, detail: String) -> Verdict {
    Verdict { pass, detail }
}

/// `Erf(s) = ∫₀ˢ e^{-σ²/4} dσ` through the C library error function.
fn big_erf(s: f64) -> f64 {
    PI.sqrt() * libm::erf(s / 2.0)
}

fn sup_diff(a: &[Complex64], b: &[Complex64]) -> f64 {
    a.iter()
        .zip(b)
        .map(|(x, y)| (x - y).norm())
        .fold(0.0, f64::max)
}

fn c1_heat_flow_profile() -> Verdict {
    let c = 0.8;
    let p = build_profile(c, 1.0, 1e-10).unwrap();
    let mut worst: f64 = 0.0;
    for i in -400..=400 {
        let s = 0.025 * i as f64;
        let phase = c * big_erf(s);
        worst = worst.max(vec3::dist(p.tangent(s), [phase.cos(), phase.sin(), 0.0]));
    }
    verdict(
        worst < 1e-8,
        format!("max |f - (cos cErf, sin cErf, 0)| = {worst:.3e} (tol 1e-8)"),
    )
}

fn c2_derivative_law() -> Verdict {
    let mut worst: f64 = 0.0;
    for c in [0.2, 0.8] {
        for alpha in [0.5, 1.0] {
            let p = build_profile(c, alpha, 1e-10).unwrap();
            for i in 0..20 {
                let s: f64 = -4.75 + 0.5 * i as f64;
                let law = c * (-alpha * s * s / 4.0).exp();
                worst = worst.max((vec3::norm(p.tangent_derivative(s)) - law).abs() / law);
            }
        }
    }
    verdict(
        worst < 1e-8,
        format!("max relative error of |f'| = {worst:.3e} (tol 1e-8)"),
    )
}

fn c3_limit_symmetry() -> Verdict {
    let mut worst: f64 = 0.0;
    let mut pass = true;
    for c in [0.2, 0.8] {
        for alpha in [0.5, 1.0] {
            let p = build_profile(c, alpha, 1e-10).unwrap();
            let (ap, am) = (p.a_plus(), p.a_minus());
            let gap = vec3::dist(am, [ap[0], -ap[1], -ap[2]]);
            pass &= gap < 2.0 * p.tail_bound();
            worst = worst.max(gap / (2.0 * p.tail_bound()));
        }
    }
    verdict(
        pass,
        format!("max |A- - reflected A+| / (2 tail_bound) = {worst:.3e} (< 1)"),
    )
}

fn c4_angles() -> Verdict {
    let mut worst: f64 = 0.0;
    for i in 1..=15 {
        let c = 0.1 * i as f64;
        let theta = build_profile(c, 1.0, 1e-10).unwrap().angle().theta;
        worst = worst.max((theta - (2.0 * c * PI.sqrt()).cos().acos()).abs());
    }
    let mut violations = 0;
    let mut checked = 0;
    for alpha in [0.5f64, 0.75, 1.0] {
        let top = alpha * alpha * PI.sqrt() / 32.0;
        for k in 1..=12 {
            let c = top * 10f64.powf(-(k as f64) / 4.0);
            let bound = (1.0 - c * c * PI + 32.0 * c.powi(3) * PI.sqrt() / (alpha * alpha))
                .clamp(-1.0, 1.0)
                .acos();
            let theta = build_profile(c, alpha, 1e-12).unwrap().angle().theta;
            checked += 1;
            if theta < bound {
                violations += 1;
            }
        }
    }
    verdict(
        worst < 1e-8 && violations == 0,
        format!("max |theta - arccos(cos 2c sqrt(pi))| = {worst:.3e} (tol 1e-8); lower bound violations {violations}/{checked}"),
    )
}

fn c5_multiplicity() -> Verdict {
    let roots = |alpha: f64, k: usize| -> (Vec<f64>, i32) {
        let out = cmd_multiplicity(&MultiplicityConfig {
            alpha,
            theta: FRAC_PI_2,
            k,
            tol: 1e-13,
        })
        .unwrap();
        let cs = out
            .table
            .column("c")
            .unwrap()
            .iter()
            .map(|c| c.as_f64().unwrap())
            .collect();
        (cs, out.exit)
    };
    let (cs, exit1) = roots(1.0, 4);
    let expected: Vec<f64> = [0.25, 0.75, 1.25, 1.75]
        .iter()
        .map(|q| q * PI.sqrt())
        .collect();
    let err1 = if cs.len() == 4 {
        sup_real(&cs, &expected)
    } else {
        f64::INFINITY
    };
    let (cs, exit2) = roots(0.999, 2);
    let err2 = cs
        .iter()
        .map(|&c| (build_profile(c, 0.999, 1e-12).unwrap().angle().theta - FRAC_PI_2).abs())
        .fold(0.0, f64::max);
    let pass = exit1 == 0 && exit2 == 0 && err1 < 1e-8 && cs.len() == 2 && err2 < 1e-6;
    verdict(pass, format!("alpha=1 root error {err1:.3e} (tol 1e-8); alpha=0.999 {} roots, max |theta - pi/2| = {err2:.3e} (tol 1e-6)", cs.len()))
}

fn sup_real(a: &[f64], b: &[f64]) -> f64 {
    a.iter()
        .zip(b)
        .map(|(x, y)| (x - y).abs())
        .fold(0.0, f64::max)
}

fn c6_energy() -> Verdict {
    let mut worst: f64 = 0.0;
    for (c, alpha) in [(0.3, 0.8), (0.8, 0.5), (0.5, 1.0)] {
        let p = build_profile(c, alpha, 1e-10).unwrap();
        for t in [0.25, 1.0, 4.0] {
            let law = c * c * (2.0 * PI / (alpha * t)).sqrt();
            worst = worst.max((selfsim::dirichlet_energy(&p, t).unwrap() - law).abs() / law);
        }
    }
    verdict(
        worst < 5e-3,
        format!("max relative energy error {worst:.3e} (tol 5e-3)"),
    )
}

/// Carleson average of `|∂ₓm_{c,α}|²` by nested quadrature, with `t = s²`
/// and the inner variable scaled by `s`.
fn carleson_brute_force(c: f64, alpha: f64, x: f64, r: f64) -> f64 {
    let opts = QuadOptions::with_tol(1e-14, 1e-11);
    let outer = |s: f64| {
        if s == 0.0 {
            return 0.0;
        }
        let density = |z: f64| c * c / s * (-alpha * z * z / 2.0).exp();
        let cut = (80.0 / alpha).sqrt();
        let (lo, hi) = (((x - r) / s).max(-cut), ((x + r) / s).min(cut));
        if lo >= hi {
            return 0.0;
        }
        let peak = 0.0f64.clamp(lo, hi);
        2.0 * s
            * (integrate(density, lo, peak, opts).unwrap()
                + integrate(density, peak, hi, opts).unwrap())
    };
    integrate(outer, 0.0, r, opts).unwrap() / r
}

fn c7_exponential_integral() -> Verdict {
    let opts = QuadOptions::with_tol(1e-15, 1e-13);
    let e1 = |y: f64| {
        if y == 0.0 {
            0.0
        } else {
            norms::e1(y * y).unwrap()
        }
    };
    let split =
        integrate(e1, 0.0, 1.0, opts).unwrap() + integrate_to_infinity(e1, 1.0, opts).unwrap();
    let e1_err = (split - PI.sqrt()).abs();
    let mut over = 0usize;
    let mut brute_err: f64 = 0.0;
    for c in [0.1, 0.5, 1.0] {
        for alpha in [0.3f64, 0.6, 1.0] {
            let bound = 2.0 * (2.0 * PI).sqrt() * c * c / alpha.sqrt();
            for x in [0.0, 0.5, 2.0] {
                for r in [0.5, 1.0, 2.0] {
                    let closed = norms::carleson_selfsim(c, alpha, x, r).unwrap();
                    over += usize::from(closed > bound);
                    brute_err =
                        brute_err.max((closed - carleson_brute_force(c, alpha, x, r)).abs());
                }
            }
        }
    }
    verdict(
        e1_err < 1e-8 && over == 0 && brute_err < 1e-6,
        format!("|int E1(y^2) - sqrt(pi)| = {e1_err:.3e} (tol 1e-8); bound exceeded {over}/81; max brute-force gap {brute_err:.3e} (tol 1e-6)"),
    )
}

fn random_field(rng: &mut ChaCha8Rng, grid: Grid) -> ComplexField {
    let period = 2.0 * grid.extent();
    let modes: Vec<(Complex64, f64)> = (1..=6)
        .map(|k| {
            (
                Complex64::new(rng.gen_range(-1.0..1.0), rng.gen_range(-1.0..1.0)),
                k as f64,
            )
        })
        .collect();
    ComplexField::from_fn(grid, |x| {
        modes
            .iter()
            .map(|(a, k)| a * Complex64::new(0.0, 2.0 * PI * k * x / period).exp())
            .sum()
    })
    .unwrap()
}

fn c8_semigroup() -> Verdict {
    let mut rng = ChaCha8Rng::seed_from_u64(8);
    let grid = Grid::centered(32.0, 1024).unwrap();
    let (mut law, mut sup_excess, mut gauss): (f64, f64, f64) = (0.0, 0.0, 0.0);
    for alpha in [0.2, 0.6, 1.0] {
        let p = GlParams::new(alpha).unwrap();
        let s = Semigroup::new(grid, Boundary::Periodic, p).unwrap();
        for _ in 0..4 {
            let f = random_field(&mut rng, grid);
            let (a, b) = (rng.gen_range(0.01..1.0), rng.gen_range(0.01..1.0));
            let two = s.apply(&s.apply(&f, a).unwrap(), b).unwrap();
            law = law.max(two.sup_distance(&s.apply(&f, a + b).unwrap()));
            let bound = f.sup_norm() / alpha.sqrt();
            sup_excess = sup_excess.max(s.apply(&f, a).unwrap().sup_norm() / bound);
        }
        let d = Complex64::new(alpha, (1.0 - alpha * alpha).sqrt());
        let f = ComplexField::from_fn(grid, |x| Complex64::new((-x * x).exp(), 0.0)).unwrap();
        for t in [0.1, 0.7, 2.0] {
            let q = 1.0 + 4.0 * d * t;
            let exact: Vec<Complex64> = grid
                .points()
                .iter()
                .map(|&x| (-x * x / q).exp() / q.sqrt())
                .collect();
            gauss = gauss.max(sup_diff(s.apply(&f, t).unwrap().values(), &exact));
        }
    }
    verdict(
        law < 1e-10 && sup_excess <= 1.0 + 1e-10 && gauss < 1e-10,
        format!("semigroup law {law:.3e} (tol 1e-10); max sup ratio to alpha^(-1/2) bound {sup_excess:.4}; Gaussian error {gauss:.3e} (tol 1e-10)"),
    )
}

/// Random trigonometric polynomial with its derivative, scaled so its sup on
/// `[-4, 4]` is a random fraction of `radius`.
struct Analytic {
    terms: Vec<(Complex64, f64)>,
    offset: Complex64,
    scale: f64,
}

impl Analytic {
    fn random(rng: &mut ChaCha8Rng, radius: f64) -> Self {
        let terms = (0..3)
            .map(|_| {
                (
                    Complex64::new(rng.gen_range(-1.0..1.0), rng.gen_range(-1.0..1.0)),
                    rng.gen_range(-3.0..3.0),
                )
            })
            .collect();
        let offset = Complex64::new(rng.gen_range(-1.0..1.0), rng.gen_range(-1.0..1.0));
        let mut f = Self {
            terms,
            offset,
            scale: 1.0,
        };
        let peak = (0..=800)
            .map(|i| f.value(-4.0 + 0.01 * i as f64).norm())
            .fold(0.0, f64::max);
        f.scale = radius * rng.gen_range(0.2..1.0) / peak;
        f
    }

    fn value(&self, x: f64) -> Complex64 {
        (self
            .terms
            .iter()
            .map(|(a, k)| a * Complex64::new(0.0, k * x).exp())
            .sum::<Complex64>()
            + self.offset)
            * self.scale
    }

    fn derivative(&self, x: f64) -> Complex64 {
        self.terms
            .iter()
            .map(|(a, k)| a * Complex64::new(0.0, *k) * Complex64::new(0.0, k * x).exp())
            .sum::<Complex64>()
            * self.scale
    }
}

fn c9_projection_estimates() -> Verdict {
    let mut rng = ChaCha8Rng::seed_from_u64(9);
    let slack = 1.0 + 1e-12;
    let (mut violations, mut checked) = (0usize, 0usize);
    for delta in [0.25f64, 0.5, 1.0] {
        let radius = (2.0 / delta - 1.0).sqrt() * 0.999;
        for _ in 0..1000 {
            let (f, g) = (
                Analytic::random(&mut rng, radius),
                Analytic::random(&mut rng, radius),
            );
            for i in 0..=40 {
                let x = -4.0 + 0.2 * i as f64;
                let (u, v, du, dv) = (f.value(x), g.value(x), f.derivative(x), g.derivative(x));
                let (m, n): (Vec3<f64>, Vec3<f64>) = (inverse_point(u), inverse_point(v));
                let (dm, dn) = (inverse_gradient(u, du), inverse_gradient(v, dv));
                let k = 4.0 / (delta * delta);
                let checks = [
                    (project_point(m) - project_point(n)).norm()
                        <= k * vec3::dist(m, n) * slack + 1e-14,
                    project_gradient(m, dm).norm() <= k * vec3::norm(dm) * slack + 1e-14,
                    vec3::dist(m, n) <= 3.0 * (u - v).norm() * slack + 1e-14,
                    vec3::norm(dm) <= 4.0 * du.norm() * slack + 1e-14,
                    vec3::dist(dm, dn)
                        <= (4.0 * (du - dv).norm()
                            + 12.0 * (u - v).norm() * (du.norm() + dv.norm()))
                            * slack
                            + 1e-14,
                ];
                violations += checks.iter().filter(|ok| !**ok).count();
                checked += checks.len();
            }
        }
    }
    verdict(
        violations == 0,
        format!("{violations} violations in {checked} checks"),
    )
}

fn sampled(
    grid: Grid,
    times: &[f64],
    f: impl Fn(f64, f64) -> Complex64,
) -> Trajectory<f64, Complex64> {
    let values = times
        .iter()
        .map(|&t| grid.points().iter().map(|&x| f(x, t)).collect())
        .collect();
    Trajectory::new(grid, times.to_vec(), values).unwrap()
}

fn c10_residuals() -> Verdict {
    let times = [0.999, 1.0, 1.001];
    let (c, alpha) = (0.3, 0.6);
    let prof = build_profile(c, alpha, 1e-10).unwrap();
    let grid = Grid::centered(16.0, 1024).unwrap();
    let fields = times
        .iter()
        .map(|&t| selfsim::sample_m(&prof, grid, t).unwrap())
        .collect();
    let llg = dnls::residual_llg(
        &Trajectory::from_spin_fields(times.to_vec(), fields).unwrap(),
        Boundary::Reflecting,
        &GlParams::new(alpha).unwrap(),
    )
    .unwrap();

    let erf = sampled(grid, &times, |x, t| {
        Complex64::new(0.0, 0.3 * big_erf(x / t.sqrt())).exp()
    });
    let heat =
        dnls::residual_dnls(&erf, Boundary::Reflecting, &GlParams::new(1.0).unwrap()).unwrap();

    let wide = Grid::centered(20.0, 1024).unwrap();
    let (cv, av) = (0.4, 0.7f64);
    let bv = (1.0 - av * av).sqrt();
    let v = sampled(wide, &times, |x, t| {
        cv / t.sqrt() * Complex64::new(-av, bv).scale(x * x / (4.0 * t)).exp()
    });
    let forced = residual_nonlocal(&v, cv, av).unwrap();

    let (cw, aw) = (Complex64::new(0.5, 0.4), 0.6f64);
    let bw = (1.0 - aw * aw).sqrt();
    let w = sampled(wide, &times, |x, t| {
        cw / t.sqrt()
            * (Complex64::new(0.0, bw * cw.norm_sqr() * t.ln() / 2.0)
                + Complex64::new(-aw, bw).scale(x * x / (4.0 * t)))
            .exp()
    });
    let unforced = residual_bis(&w, aw).unwrap();
    verdict(
        llg < 1e-5 && heat < 1e-6 && forced < 1e-5 && unforced < 1e-5,
        format!("LLG {llg:.3e} (tol 1e-5); heat flow {heat:.3e} (tol 1e-6); forced {forced:.3e} (tol 1e-5); unforced {unforced:.3e} (tol 1e-5)"),
    )
}

fn c11_solver() -> Verdict {
    let (c, alpha) = (0.3, 0.8);
    let prof = build_profile(c, alpha, 1e-10).unwrap();
    let p = GlParams::new(alpha).unwrap();
    let grid = Grid::centered(16.0, 1024).unwrap();
    let m0 = selfsim::sample_m(&prof, grid, 0.1).unwrap();
    let exact = SpinField::new(
        grid,
        grid.points()
            .iter()
            .map(|&x| selfsim::evaluate_m(&prof, x, 2.0).unwrap())
            .collect(),
    )
    .unwrap();
    let errors: Vec<f64> = [50, 100, 200]
        .iter()
        .map(|&n| {
            let run =
                llg_solve(&m0, 0.5, &SolverConfig::geometric(0.1, 2.0, n).unwrap(), &p).unwrap();
            SpinField::new(grid, run.spins.values().last().unwrap().clone())
                .unwrap()
                .sup_distance(&exact)
        })
        .collect();
    let orders: Vec<f64> = errors.windows(2).map(|w| (w[0] / w[1]).log2()).collect();
    let best = errors[2];
    verdict(
        errors[0] < 1e-3 && orders.iter().all(|o| *o >= 1.8),
        format!("sup errors {:.3e}/{:.3e}/{best:.3e} at 50/100/200 steps (tol 1e-3); orders {:.2}, {:.2} (>= 1.8)", errors[0], errors[1], orders[0], orders[1]),
    )
}

fn picard_grid() -> Grid {
    Grid::new(-16.0, 1.0 / 32.0, 1024).unwrap()
}

fn picard_config() -> SolverConfig {
    let mut cfg = SolverConfig::geometric(1.0 / 16.0, 1.0, 32).unwrap();
    cfg.growth = 2f64.powf(0.125);
    cfg.tol = 1e-11;
    cfg
}

fn c12_picard() -> Verdict {
    let c = 0.1;
    let a = Complex64::new(0.0, c * PI.sqrt()).exp();
    let grid = picard_grid();
    let initial = PicardInitial::Step {
        a_plus: a,
        a_minus: a.conj(),
        grid,
    };
    let run = picard_solve(&initial, &picard_config(), &GlParams::new(1.0).unwrap(), 40).unwrap();
    let factor = run.contraction_factor();
    let times = run.trajectory.times().to_vec();
    let pts = grid.points();
    let erf = |x: f64, t: f64| Complex64::new(0.0, c * big_erf(x / t.sqrt())).exp();
    let values = times
        .iter()
        .map(|&t| pts.iter().map(|&x| erf(x, t)).collect())
        .collect();
    let grads = times
        .iter()
        .map(|&t| {
            pts.iter()
                .map(|&x| {
                    Complex64::new(0.0, c / t.sqrt() * (-x * x / (4.0 * t)).exp()) * erf(x, t)
                })
                .collect()
        })
        .collect();
    let exact = Trajectory::new(grid, times, values)
        .unwrap()
        .with_gradients(grads)
        .unwrap();
    let balls = ParabolicBallSet::dyadic(&grid, 1.0, 8, 1).unwrap();
    let dist = x_seminorm(&run.trajectory.difference(&exact).unwrap(), &balls)
        .unwrap()
        .total();
    let mut damped = Vec::new();
    for alpha in [0.6, 0.8] {
        let prof = build_profile(0.2, alpha, 1e-10).unwrap();
        let (ap, am) = prof.limit_vectors();
        let u0 = PicardInitial::Step {
            a_plus: project_point(ap),
            a_minus: project_point(am),
            grid,
        };
        let r = picard_solve(&u0, &picard_config(), &GlParams::new(alpha).unwrap(), 40).unwrap();
        damped.push(format!(
            "alpha={alpha}: factor {:.3} converged {}",
            r.contraction_factor(),
            r.converged
        ));
    }
    verdict(
        run.converged && factor < 0.9 && dist < 1e-4,
        format!(
            "alpha=1 factor {factor:.3} (< 0.9), X-distance to Erf {dist:.3e} (tol 1e-4); {}",
            damped.join("; ")
        ),
    )
}

fn c13_stability() -> Verdict {
    let prof = build_profile(0.3, 0.8, 1e-10).unwrap();
    let cfg = SolverConfig::geometric(0.1, 2.0, 100).unwrap();
    let runs: Vec<(f64, usize, f64)> = [(1e-3, 1024), (1e-4, 1024), (1e-3, 2048), (1e-4, 2048)]
        .par_iter()
        .map(|&(eta, points)| {
            let setup = StabilitySetup {
                points,
                ..StabilitySetup::default()
            };
            (
                eta,
                points,
                dnls::stability_experiment(&prof, eta, &cfg, &setup)
                    .unwrap()
                    .ratio,
            )
        })
        .collect();
    let r = |eta: f64, n: usize| runs.iter().find(|q| q.0 == eta && q.1 == n).unwrap().2;
    let amp = (r(1e-3, 1024) / r(1e-4, 1024)).max(r(1e-4, 1024) / r(1e-3, 1024));
    let refine = [1e-3, 1e-4]
        .iter()
        .map(|&e| (r(e, 2048) / r(e, 1024) - 1.0).abs())
        .fold(0.0, f64::max);
    let finite = runs.iter().all(|q| q.2.is_finite() && q.2 > 0.0);
    verdict(
        finite && amp < 2.0 && refine < 0.2,
        format!("ratios {:.4}/{:.4} at eta 1e-3/1e-4; amplitude spread {amp:.4} (< 2); refinement change {:.2}% (< 20%)", r(1e-3, 1024), r(1e-4, 1024), 100.0 * refine),
    )
}

fn c14_weak_limits() -> Verdict {
    let bump = |x: f64| {
        let y = 2.0 * x - 3.0;
        if y.abs() < 1.0 {
            (1.0 - 1.0 / (1.0 - y * y)).exp()
        } else {
            0.0
        }
    };
    let away = weak_limit_pairing(
        Complex64::new(1.0, 0.0),
        0.8,
        bump,
        (1.0, 2.0),
        &[1e-1, 1e-2, 1e-3, 1e-4],
    )
    .unwrap();
    let tail = away.last().unwrap().modulus;
    let alpha: f64 = 0.5;
    let beta = (1.0 - alpha * alpha).sqrt();
    let c = Complex64::new(1.0, 0.0);
    let t = 1e-6;
    let seq =
        weak_limit_pairing(c, alpha, |x: f64| (-x * x).exp(), (-6.0, 6.0), &[t, t / E]).unwrap();
    let increment = seq[0].phase - seq[1].phase;
    let gap = (increment - beta * c.norm_sqr() / 2.0).abs();
    verdict(tail < 1e-6 && gap < 1e-3, format!("pairing at t=1e-4 {tail:.3e} (tol 1e-6); phase increment {increment:.6} vs {:.6} (tol 1e-3)", beta / 2.0))
}

/// Mean oscillation over every window of every length, straight from the definition.
fn brute_bmo(values: &[Vec3<f64>]) -> f64 {
    let n = values.len();
    let mut best: f64 = 0.0;
    for len in 2..=n {
        for start in 0..=n - len {
            let w = &values[start..start + len];
            let mut avg = [0.0; 3];
            for v in w {
                for k in 0..3 {
                    avg[k] += v[k] / len as f64;
                }
            }
            best = best.max(w.iter().map(|v| vec3::dist(*v, avg)).sum::<f64>() / len as f64);
        }
    }
    best
}

fn c15_norm_invariances() -> Verdict {
    let mut rng = ChaCha8Rng::seed_from_u64(15);
    let grid = Grid::centered(8.0, 256).unwrap();
    let radii = norms::dyadic_radii(&grid, 6);
    let (mut law, mut sup_ratio, mut sandwich): (f64, f64, f64) = (0.0, 0.0, 0.0);
    for _ in 0..10 {
        let f = random_field(&mut rng, grid);
        let b = norms::bmo_seminorm(f.values(), &grid, &radii).unwrap();
        let q = Complex64::new(rng.gen_range(-5.0..5.0), rng.gen_range(-5.0..5.0));
        let lambda: f64 = rng.gen_range(-4.0..4.0);
        let shifted: Vec<Complex64> = f.values().iter().map(|z| z + q).collect();
        let scaled: Vec<Complex64> = f.values().iter().map(|z| z * lambda).collect();
        law = law
            .max((norms::bmo_seminorm(&shifted, &grid, &radii).unwrap() - b).abs() / b)
            .max(
                (norms::bmo_seminorm(&scaled, &grid, &radii).unwrap() - lambda.abs() * b).abs() / b,
            );
        sup_ratio = sup_ratio.max(b / (2.0 * f.sup_norm()));
        let d = norms::bmo_double_average(f.values(), &grid, &radii).unwrap();
        sandwich = sandwich.max(b / d - 1.0).max(d / (2.0 * b) - 1.0);
    }
    let small = Grid::centered(4.0, 128).unwrap();
    let (ap, am) = ([0.6, 0.8, 0.0], [0.0, 0.0, 1.0]);
    let step = selfsim::step_data(ap, am, small).unwrap();
    let half_jump = vec3::dist(ap, am) / 2.0;
    let step_gap = (norms::spin_bmo(&step, 7).unwrap() - half_jump)
        .abs()
        .max((brute_bmo(step.values()) - half_jump).abs());
    verdict(
        law < 1e-12 && sup_ratio <= 1.0 && sandwich <= 1e-8 && step_gap < 1e-12,
        format!("shift/scale law {law:.3e} (tol 1e-12); max [f]/(2 sup|f|) {sup_ratio:.4}; sandwich excess {sandwich:.3e} (tol 1e-8); step BMO gap {step_gap:.3e}"),
    )
}

#[test]
fn acceptance_criteria() {
    let criteria: Vec<Criterion> = vec![
        ("heat-flow profile oracle", c1_heat_flow_profile),
        ("profile derivative law", c2_derivative_law),
        ("limit-vector symmetry", c3_limit_symmetry),
        ("angle formulas", c4_angles),
        ("multiplicity", c5_multiplicity),
        ("energy identity", c6_energy),
        (
            "exponential integral and Carleson bound",
            c7_exponential_integral,
        ),
        ("semigroup", c8_semigroup),
        ("projection estimates", c9_projection_estimates),
        ("PDE residuals", c10_residuals),
        ("solver against the self-similar solution", c11_solver),
        ("Picard contraction", c12_picard),
        ("stability", c13_stability),
        ("weak limits", c14_weak_limits),
        ("norm invariances", c15_norm_invariances),
    ];
    let verdicts: Vec<Verdict> = criteria.par_iter().map(|(_, f)| f()).collect();
    let mut report = String::new();
    for (i, ((name, _), v)) in criteria.iter().zip(&verdicts).enumerate() {
        let tag = if v.pass { "PASS" } else { "FAIL" };
        report.push_str(&format!("{tag} {:>2} {name}: {}\n", i + 1, v.detail));
    }
    std::io::stderr().write_all(report.as_bytes()).unwrap();
    let failed: Vec<usize> = verdicts
        .iter()
        .enumerate()
        .filter(|(_, v)| !v.pass)
        .map(|(i, _)| i + 1)
        .collect();
    assert!(failed.is_empty(), "failed criteria {failed:?}\n{report}");
}
