use gilbert::field::{vec3, Grid, Vec3};
use gilbert::norms::{
    carleson_selfsim, carleson_selfsim_bound, x_seminorm, y_norm, ParabolicBallSet, Trajectory,
};
use gilbert::quad::{integrate, QuadOptions};
use gilbert::selfsim::{self, build_profile, Profile};

fn geometric_times(t0: f64, t1: f64, per_doubling: usize) -> Vec<f64> {
    let n = ((t1 / t0).log2() * per_doubling as f64).ceil() as usize;
    (0..=n)
        .map(|k| t0 * (t1 / t0).powf(k as f64 / n as f64))
        .collect()
}

fn spin_trajectory(p: &Profile<f64>, grid: Grid<f64>, times: &[f64]) -> Trajectory<f64, Vec3<f64>> {
    let pts = grid.points();
    let values = times
        .iter()
        .map(|&t| {
            pts.iter()
                .map(|&x| selfsim::evaluate_m(p, x, t).unwrap())
                .collect()
        })
        .collect();
    let grads = times
        .iter()
        .map(|&t| {
            pts.iter()
                .map(|&x| selfsim::m_gradient(p, x, t).unwrap())
                .collect()
        })
        .collect();
    Trajectory::new(grid, times.to_vec(), values)
        .unwrap()
        .with_gradients(grads)
        .unwrap()
}

#[test]
fn x_seminorm_of_the_self_similar_solution() {
    let (c, alpha) = (0.3, 0.6);
    let p = build_profile(c, alpha, 1e-10).unwrap();
    let grid = Grid::new(-32.0, 1.0 / 16.0, 1024).unwrap();
    let times = geometric_times(0.01, 10.0, 6);
    let tr = spin_trajectory(&p, grid, &times);
    let balls = ParabolicBallSet::dyadic(&grid, 10.0, 8, 2).unwrap();
    let parts = x_seminorm(&tr, &balls).unwrap();
    assert!((parts.sup - c).abs() < 1e-9, "sup part {}", parts.sup);
    assert!(parts.total() <= 4.0 * c / alpha.powf(0.25));
    let carleson_cap = carleson_selfsim_bound(c, alpha).sqrt();
    assert!(parts.carleson > 0.0 && parts.carleson <= carleson_cap);
}

#[test]
fn x_seminorm_is_invariant_under_parabolic_rescaling() {
    let (c, alpha, lambda) = (0.4, 0.8, 2.0);
    let p = build_profile(c, alpha, 1e-10).unwrap();
    let grid = Grid::new(-24.0, 3.0 / 64.0, 1024).unwrap();
    let times = geometric_times(0.02, 8.0, 4);
    let tr = spin_trajectory(&p, grid, &times);
    let balls = ParabolicBallSet::dyadic(&grid, 8.0, 7, 1).unwrap();
    let base = x_seminorm(&tr, &balls).unwrap();

    // v_λ(x, t) = v(λx, λ²t) sampled where (λx, λ²t) hits the original samples
    let grid_l = grid.scaled(1.0 / lambda).unwrap();
    let times_l: Vec<f64> = times.iter().map(|t| t / (lambda * lambda)).collect();
    let grads_l: Vec<Vec<Vec3<f64>>> = tr
        .gradients()
        .unwrap()
        .iter()
        .map(|g| g.iter().map(|d| vec3::scale(lambda, *d)).collect())
        .collect();
    let tr_l = Trajectory::new(grid_l, times_l, tr.values().to_vec())
        .unwrap()
        .with_gradients(grads_l)
        .unwrap();
    let balls_l = ParabolicBallSet::dyadic(&grid_l, 8.0 / (lambda * lambda), 7, 1).unwrap();
    let scaled = x_seminorm(&tr_l, &balls_l).unwrap();
    assert!((scaled.sup - base.sup).abs() < 1e-6);
    assert!(
        (scaled.carleson - base.carleson).abs() < 1e-6,
        "{} vs {}",
        scaled.carleson,
        base.carleson
    );
}

#[test]
fn y_norm_of_energy_density_is_below_x_squared() {
    let p = build_profile(0.5, 0.7, 1e-10).unwrap();
    let grid = Grid::new(-24.0, 3.0 / 64.0, 1024).unwrap();
    let times = geometric_times(0.02, 4.0, 6);
    let tr = spin_trajectory(&p, grid, &times);
    let density: Vec<Vec<f64>> = tr
        .gradients()
        .unwrap()
        .iter()
        .map(|g| g.iter().map(|d| vec3::dot(*d, *d)).collect())
        .collect();
    let dens = Trajectory::new(grid, times.clone(), density).unwrap();
    let balls = ParabolicBallSet::dyadic(&grid, 4.0, 7, 1).unwrap();
    let x = x_seminorm(&tr, &balls).unwrap().total();
    let y = y_norm(&dens, &balls).unwrap().total();
    assert!(y <= x * x, "Y = {y}, X² = {}", x * x);
}

/// `(1/r)∫_0^{r²}∫_{x-r}^{x+r} |∂ₓm_{c,α}|² dy dt` by nested adaptive quadrature,
/// with `t = s²` to tame the `t^{-1/2}` singularity.
fn carleson_brute_force(c: f64, alpha: f64, x: f64, r: f64) -> f64 {
    let opts = QuadOptions::with_tol(1e-14, 1e-11);
    let outer = |s: f64| {
        if s == 0.0 {
            return 0.0;
        }
        // y = s·z keeps the Gaussian at unit width for every t
        let density = |z: f64| c * c / s * (-alpha * z * z / 2.0).exp();
        let cut = (80.0 / alpha).sqrt();
        let (lo, hi) = (((x - r) / s).max(-cut), ((x + r) / s).min(cut));
        let peak = if lo < hi { 0.0f64.clamp(lo, hi) } else { lo };
        let inner = if lo < hi {
            integrate(density, lo, peak, opts).unwrap()
                + integrate(density, peak, hi, opts).unwrap()
        } else {
            0.0
        };
        2.0 * s * inner
    };
    integrate(outer, 0.0, r, opts).unwrap() / r
}

#[test]
fn carleson_closed_form_matches_brute_force() {
    for c in [0.1, 0.5, 1.0] {
        for alpha in [0.3, 0.6, 1.0] {
            for x in [0.0, 0.5, 2.0] {
                for r in [0.5, 1.0, 2.0] {
                    let closed = carleson_selfsim(c, alpha, x, r).unwrap();
                    let brute = carleson_brute_force(c, alpha, x, r);
                    assert!(
                        (closed - brute).abs() < 1e-6 * brute.max(1.0),
                        "{c} {alpha} {x} {r}: {closed} vs {brute}"
                    );
                    assert!(closed <= carleson_selfsim_bound(c, alpha));
                }
            }
        }
    }
}

#[test]
fn angle_is_continuous_and_tends_to_the_heat_flow_value() {
    let c = 0.7;
    let exact = (2.0 * c * std::f64::consts::PI.sqrt()).cos().acos();
    let mut previous: Option<f64> = None;
    let mut gaps = Vec::new();
    for alpha in [0.9, 0.95, 0.99, 0.999, 1.0] {
        let theta = selfsim::angle(c, alpha, 1e-10).unwrap().theta;
        if let Some(prev) = previous {
            assert!((theta - prev).abs() < 0.2);
        }
        previous = Some(theta);
        gaps.push((theta - exact).abs());
    }
    assert!(gaps.windows(2).all(|w| w[1] <= w[0] + 1e-9), "{gaps:?}");
    assert!(gaps[4] < 1e-8);
}

#[test]
fn profile_solves_its_ode_and_frames_stay_orthonormal() {
    for (c, alpha) in [(0.2, 0.5), (0.8, 0.5), (0.2, 1.0), (1.5, 0.3)] {
        let p = build_profile(c, alpha, 1e-10).unwrap();
        assert!(p.max_frame_defect() < 1e-9);
        assert!(
            selfsim::profile_ode_residual(&p).unwrap() < 1e-5,
            "({c}, {alpha})"
        );
        let e = selfsim::dirichlet_energy(&p, 1.0).unwrap();
        let law = c * c * (2.0 * std::f64::consts::PI / alpha).sqrt();
        assert!((e - law).abs() < 5e-3 * law);
    }
}
