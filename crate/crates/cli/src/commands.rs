//! One function per subcommand. Each returns the table it produced and the
//! process exit status it implies.

use std::path::{Path, PathBuf};

use gilbert::dnls::{self, PicardInitial, SolverConfig, StabilitySetup};
use gilbert::field::{vec3, Vec3};
use gilbert::hasimoto::{self, FilamentData};
use gilbert::norms::{x_seminorm, ParabolicBallSet, Trajectory};
use gilbert::selfsim;
use gilbert::spectral::{Boundary, Spectral};
use gilbert::{stereo, GlParams, Grid, SpinField};
use num_complex::Complex64;
use rayon::prelude::*;
use serde_json::json;

use crate::config::*;
use crate::table::{Cell, ResultTable};
use crate::{CliError, EXIT_BRACKET, EXIT_OK};

pub struct Outcome {
    pub table: ResultTable,
    pub exit: i32,
    /// Extra files written next to the table.
    pub files: Vec<PathBuf>,
}

impl Outcome {
    fn ok(table: ResultTable) -> Self {
        Self {
            table,
            exit: EXIT_OK,
            files: Vec::new(),
        }
    }
}

fn v3(v: Vec3<f64>) -> serde_json::Value {
    json!([v[0], v[1], v[2]])
}

pub fn cmd_profile(cfg: &ProfileConfig) -> Result<Outcome, CliError> {
    cfg.validate()?;
    let p = selfsim::build_profile(cfg.c, cfg.alpha, cfg.tol)?;
    let mut table = ResultTable::new(
        "profile",
        &[
            ("s", "similarity variable x/sqrt(t)"),
            ("f1", "profile component 1"),
            ("f2", "profile component 2"),
            ("f3", "profile component 3"),
            ("df_norm", "|f'(s)|"),
            ("curvature", "c exp(-alpha s^2/4)"),
            ("identity", "identity checked by df_norm = curvature"),
        ],
    );
    let n = (cfg.s_out / cfg.ds).round() as i64;
    for i in -n..=n {
        let s = i as f64 * cfg.ds;
        let f = p.tangent(s);
        let df = vec3::norm(p.tangent_derivative(s));
        table.push(vec![
            s.into(),
            f[0].into(),
            f[1].into(),
            f[2].into(),
            df.into(),
            p.curvature(s).into(),
            "profile derivative law".into(),
        ]);
    }
    let (ap, am) = p.limit_vectors();
    let angle = p.angle();
    table.meta("c", cfg.c);
    table.meta("alpha", cfg.alpha);
    table.meta("a_plus", v3(ap));
    table.meta("a_minus", v3(am));
    table.meta("theta", angle.theta);
    table.meta("tail_bound", p.tail_bound());
    table.meta("s_max", p.s_max());
    Ok(Outcome::ok(table))
}

/// Reads `x, m1, m2, m3` samples matching `grid`.
fn read_spin_csv(path: &Path, grid: &Grid) -> Result<SpinField, CliError> {
    let mut reader = csv::ReaderBuilder::new()
        .comment(Some(b'#'))
        .trim(csv::Trim::All)
        .from_path(path)
        .map_err(|e| CliError::Config(format!("{}: {e}", path.display())))?;
    let mut values = Vec::with_capacity(grid.len());
    for (i, rec) in reader.records().enumerate() {
        let rec = rec.map_err(|e| CliError::Config(format!("{}: {e}", path.display())))?;
        let nums: Vec<f64> = rec
            .iter()
            .map(|f| f.parse::<f64>())
            .collect::<Result<_, _>>()
            .map_err(|e| CliError::Config(format!("{} row {}: {e}", path.display(), i + 1)))?;
        if nums.len() != 4 {
            return Err(CliError::Config(format!(
                "{} row {}: expected x, m1, m2, m3",
                path.display(),
                i + 1
            )));
        }
        if i >= grid.len() || (nums[0] - grid.x(i)).abs() > 1e-9 * grid.spacing().max(1.0) {
            return Err(CliError::Config(format!(
                "{} row {}: x does not match the configured grid",
                path.display(),
                i + 1
            )));
        }
        let m = [nums[1], nums[2], nums[3]];
        if (vec3::norm(m) - 1.0).abs() > 1e-6 {
            return Err(CliError::Config(format!(
                "{} row {}: spin is not a unit vector",
                path.display(),
                i + 1
            )));
        }
        values.push(vec3::normalize(m));
    }
    if values.len() != grid.len() {
        return Err(CliError::Config(format!(
            "{}: expected {} rows, found {}",
            path.display(),
            grid.len(),
            values.len()
        )));
    }
    Ok(SpinField::new(*grid, values)?)
}

/// Solution of the step problem at `t0` by Picard iteration on `[t0/16, t0]`.
fn step_state(
    c: f64,
    grid: Grid,
    t0: f64,
    p: &GlParams,
    delta: f64,
) -> Result<(SpinField, serde_json::Value), CliError> {
    let prof = selfsim::build_profile(c, p.alpha(), 1e-10)?;
    let (ap, am) = prof.limit_vectors();
    let limits = SpinField::new(Grid::new(-1.0, 2.0, 2)?, vec![am, ap])?;
    let u = stereo::project(&limits, delta)?;
    let handle = PicardInitial::Step {
        a_plus: u.values()[1],
        a_minus: u.values()[0],
        grid,
    };
    let mut cfg = SolverConfig::geometric(t0 / 16.0, t0, 32)?;
    cfg.growth = 2f64.powf(0.125);
    cfg.tol = 1e-12;
    let run = dnls::picard_solve(&handle, &cfg, p, 60)?;
    if !run.converged {
        log::warn!(
            "Picard iteration stopped before reaching tolerance {:e}",
            cfg.tol
        );
    }
    let last = run.trajectory.values().last().expect("nonempty");
    let m = SpinField::new(
        grid,
        last.iter().map(|&z| stereo::inverse_point(z)).collect(),
    )?;
    let info = json!({
        "iterations": run.history.len(),
        "converged": run.converged,
        "contraction_factor": run.contraction_factor(),
        "x_differences": run.history.iter().map(|s| s.x_difference).collect::<Vec<_>>(),
    });
    Ok((m, info))
}

fn snapshot_path(out: &Path, t: f64) -> PathBuf {
    let stem = out
        .file_stem()
        .map(|s| s.to_string_lossy().into_owned())
        .unwrap_or_else(|| "run".into());
    out.with_file_name(format!("{stem}_snap_{t}.csv"))
}

pub fn cmd_solve(cfg: &SolveConfig, out: Option<&Path>, run_id: &str) -> Result<Outcome, CliError> {
    cfg.validate()?;
    let grid = cfg.grid.grid()?;
    let p = GlParams::new(cfg.alpha)?;
    let mut table = ResultTable::new(
        "solve",
        &[
            ("t", "time"),
            ("sup_u", "sup |u|, u the projected field"),
            ("sqrt_t_grad_u", "sqrt(t) sup |u_x|"),
            ("sqrt_t_grad_m", "sqrt(t) sup |m_x|"),
            ("min_m3", "smallest third spin component"),
            ("energy", "integral of |m_x|^2"),
            (
                "residual",
                "local residual of the projected equation (interior samples)",
            ),
        ],
    );
    let (m0, oracle) = match &cfg.initial {
        InitialData::SelfSimilar { c } => {
            let prof = selfsim::build_profile(*c, cfg.alpha, 1e-10)?;
            (selfsim::sample_m(&prof, grid, cfg.t0)?, Some(prof))
        }
        InitialData::Step { c } => {
            let (m, info) = step_state(*c, grid, cfg.t0, &p, cfg.delta)?;
            table.meta("picard", info);
            (m, Some(selfsim::build_profile(*c, cfg.alpha, 1e-10)?))
        }
        InitialData::Constant { m } => (SpinField::constant(grid, vec3::normalize(*m))?, None),
        InitialData::File { path } => (read_spin_csv(Path::new(path), &grid)?, None),
    };
    let scfg =
        SolverConfig::geometric(cfg.t0, cfg.t_end, cfg.steps)?.with_scheme((&cfg.scheme).into());
    let run = dnls::llg_solve(&m0, cfg.delta, &scfg, &p)?;
    let u = &run.projected;
    let times = u.times();
    let h = grid.spacing();
    for k in 0..u.len() {
        let t = times[k];
        let sup_u = u.values()[k].iter().map(|z| z.norm()).fold(0.0, f64::max);
        let gu = u.gradients().unwrap()[k]
            .iter()
            .map(|z| z.norm())
            .fold(0.0, f64::max);
        let gm: Vec<f64> = run.spins.gradients().unwrap()[k]
            .iter()
            .map(|d| vec3::norm(*d))
            .collect();
        let min_m3 = run.spins.values()[k]
            .iter()
            .map(|m| m[2])
            .fold(f64::INFINITY, f64::min);
        let residual = if k == 0 || k + 1 == u.len() {
            f64::NAN
        } else {
            let local = Trajectory::new(
                grid,
                times[k - 1..=k + 1].to_vec(),
                u.values()[k - 1..=k + 1].to_vec(),
            )?;
            dnls::residual_dnls(&local, Boundary::Reflecting, &p)?
        };
        table.push(vec![
            t.into(),
            sup_u.into(),
            (t.sqrt() * gu).into(),
            (t.sqrt() * gm.iter().cloned().fold(0.0, f64::max)).into(),
            min_m3.into(),
            (gm.iter().map(|g| g * g).sum::<f64>() * h).into(),
            residual.into(),
        ]);
    }
    let balls = ParabolicBallSet::dyadic(&grid, cfg.t_end, 8, 1)?;
    let xu = x_seminorm(u, &balls)?;
    let xm = x_seminorm(&run.spins, &balls)?;
    table.meta("x_sup_u", xu.sup);
    table.meta("x_carleson_u", xu.carleson);
    table.meta("x_sup_m", xm.sup);
    table.meta("x_carleson_m", xm.carleson);
    table.meta("min_m3", run.min_m3);
    table.meta("min_m3_at", json!([run.min_m3_at.0, run.min_m3_at.1]));
    if let Some(prof) = oracle {
        let exact = selfsim::sample_m(&prof, grid, cfg.t_end)?;
        let last = SpinField::new(grid, run.spins.values().last().unwrap().clone())?;
        table.meta("final_selfsim_error", last.sup_distance(&exact));
    }
    let mut files = Vec::new();
    if !cfg.snapshots.is_empty() {
        match out {
            None => log::warn!("snapshots requested without --out; none written"),
            Some(out) => {
                for &ts in &cfg.snapshots {
                    let k = (0..times.len())
                        .min_by(|&a, &b| (times[a] - ts).abs().total_cmp(&(times[b] - ts).abs()))
                        .unwrap();
                    let mut snap = ResultTable::new(
                        "snapshot",
                        &[
                            ("x", "position"),
                            ("m1", "spin component 1"),
                            ("m2", "spin component 2"),
                            ("m3", "spin component 3"),
                            ("u_re", "real part of the projected field"),
                            ("u_im", "imaginary part of the projected field"),
                        ],
                    );
                    snap.meta("t", times[k]);
                    for (i, x) in grid.points().into_iter().enumerate() {
                        let m = run.spins.values()[k][i];
                        let z = u.values()[k][i];
                        snap.push(vec![
                            x.into(),
                            m[0].into(),
                            m[1].into(),
                            m[2].into(),
                            z.re.into(),
                            z.im.into(),
                        ]);
                    }
                    let path = snapshot_path(out, ts);
                    snap.write(Some(&path), run_id)?;
                    files.push(path);
                }
            }
        }
    }
    Ok(Outcome {
        table,
        exit: EXIT_OK,
        files,
    })
}

pub fn cmd_stability(cfg: &StabilityConfig) -> Result<Outcome, CliError> {
    cfg.validate()?;
    let prof = selfsim::build_profile(cfg.c, cfg.alpha, 1e-10)?;
    let scfg = SolverConfig::geometric(cfg.t0, cfg.t_end, cfg.steps)?;
    let tuples: Vec<(f64, usize)> = cfg
        .etas
        .iter()
        .flat_map(|&e| cfg.grid_points.iter().map(move |&n| (e, n)))
        .collect();
    let reports = tuples
        .par_iter()
        .map(|&(eta, points)| {
            let setup = StabilitySetup {
                half_width: cfg.half_width,
                points,
                ..StabilitySetup::default()
            };
            dnls::stability_experiment(&prof, eta, &scfg, &setup).map(|r| (eta, points, r))
        })
        .collect::<Result<Vec<_>, _>>()?;
    let mut table = ResultTable::new(
        "stability",
        &[
            ("eta", "requested perturbation size"),
            ("points", "grid points"),
            ("eta_actual", "realized sup distance of the initial spins"),
            ("x_sup", "sup_t sqrt(t) |d_x(m - m_ref)|"),
            ("x_carleson", "Carleson part of the X distance"),
            ("x_distance", "X distance"),
            ("ratio", "x_distance / eta_actual"),
            ("gradient_ratio", "x_sup / eta_actual"),
            (
                "hypothesis",
                "whether eta respects the smallness hypothesis",
            ),
        ],
    );
    for (eta, points, r) in reports {
        let note = if r.within_hypothesis {
            "ok"
        } else {
            "warning: eta exceeds c*sqrt(pi)/(2*sqrt(alpha))"
        };
        table.push(vec![
            eta.into(),
            points.into(),
            r.eta_actual.into(),
            r.x_distance.sup.into(),
            r.x_distance.carleson.into(),
            r.x_distance.total().into(),
            r.ratio.into(),
            r.gradient_ratio.into(),
            note.into(),
        ]);
    }
    table.meta("c", cfg.c);
    table.meta("alpha", cfg.alpha);
    Ok(Outcome::ok(table))
}

pub fn cmd_multiplicity(cfg: &MultiplicityConfig) -> Result<Outcome, CliError> {
    cfg.validate()?;
    let result = selfsim::multiplicity_cs(cfg.theta, cfg.alpha, cfg.k, cfg.tol)?;
    let grads = result
        .cs
        .par_iter()
        .map(|&c| {
            selfsim::build_profile(c, cfg.alpha, 1e-10)
                .map(|p| vec3::norm(p.tangent_derivative(0.0)))
        })
        .collect::<Result<Vec<_>, _>>()?;
    let mut table = ResultTable::new(
        "multiplicity",
        &[
            ("j", "root index"),
            ("c", "amplitude with the requested angle"),
            ("theta_error", "theta(c) - theta"),
            (
                "sqrt_t_grad_m",
                "sqrt(t) sup |m_x| of the corresponding solution",
            ),
            ("identity", "identity checked by sqrt_t_grad_m = c"),
        ],
    );
    for (j, ((c, r), g)) in result
        .cs
        .iter()
        .zip(&result.residuals)
        .zip(&grads)
        .enumerate()
    {
        table.push(vec![
            (j + 1).into(),
            (*c).into(),
            (*r).into(),
            (*g).into(),
            "gradient amplitude equals c".into(),
        ]);
    }
    table.meta("alpha", cfg.alpha);
    table.meta("theta", cfg.theta);
    table.meta("requested", cfg.k);
    let exit = match &result.failure {
        Some(e) => {
            log::error!(
                "root search stopped after {} of {} roots: {e}",
                result.cs.len(),
                cfg.k
            );
            table.meta("failure", e.to_string());
            EXIT_BRACKET
        }
        None => EXIT_OK,
    };
    Ok(Outcome {
        table,
        exit,
        files: Vec::new(),
    })
}

pub fn cmd_hasimoto(cfg: &HasimotoConfig) -> Result<Outcome, CliError> {
    cfg.validate()?;
    let grid = cfg.grid.grid()?;
    let spectral = Spectral::new(grid, Boundary::Periodic);
    let (c, alpha) = (cfg.c, cfg.alpha);
    let w_amp = Complex64::new(cfg.w_amplitude[0], cfg.w_amplitude[1]);
    let rows = cfg
        .times
        .par_iter()
        .map(|&t| -> Result<Vec<Cell>, CliError> {
            let fd = FilamentData::self_similar(c, alpha, t, grid)?;
            let v = hasimoto::filament_function(&fd)?;
            let mut filament_error = 0f64;
            let mut vals = Vec::with_capacity(grid.len());
            for (x, z) in grid.points().into_iter().zip(v.values()) {
                let exact = hasimoto::v_selfsim(c, alpha, x, t)?;
                filament_error = filament_error.max((z - exact).norm());
                vals.push(exact);
            }
            let nl = hasimoto::nonlocal_term(&vals, &spectral)?;
            let mut nonlocal_error = 0f64;
            for (x, q) in grid.points().into_iter().zip(&nl) {
                nonlocal_error = nonlocal_error.max((q - hasimoto::nonlocal_selfsim(c, alpha, x, t)?).abs());
            }
            let times = [t - cfg.dt, t, t + cfg.dt];
            let sample = |f: &dyn Fn(f64, f64) -> gilbert::Result<Complex64>| -> Result<Trajectory<f64, Complex64>, CliError> {
                let values = times
                    .iter()
                    .map(|&s| grid.points().into_iter().map(|x| f(x, s)).collect::<gilbert::Result<Vec<_>>>())
                    .collect::<gilbert::Result<Vec<_>>>()?;
                Ok(Trajectory::new(grid, times.to_vec(), values)?)
            };
            let vt = sample(&|x, s| hasimoto::v_selfsim(c, alpha, x, s))?;
            let wt = sample(&|x, s| hasimoto::w_explicit(w_amp, alpha, x, s))?;
            let pairing = hasimoto::weak_limit_pairing(w_amp, alpha, |x: f64| (-x * x).exp(), (-6.0, 6.0), &[t])?[0];
            Ok(vec![
                t.into(),
                hasimoto::forcing_a(c, alpha, t)?.into(),
                filament_error.into(),
                nonlocal_error.into(),
                hasimoto::residual_nonlocal(&vt, c, alpha)?.into(),
                hasimoto::residual_bis(&wt, alpha)?.into(),
                pairing.modulus.into(),
                pairing.phase.into(),
            ])
        })
        .collect::<Result<Vec<_>, _>>()?;
    let mut table = ResultTable::new(
        "hasimoto",
        &[
            ("t", "time"),
            ("forcing", "A(t) = beta c^2 / t"),
            (
                "filament_error",
                "sup |filament function of (kappa, tau) - v_{c,alpha}|",
            ),
            (
                "nonlocal_error",
                "sup |quadrature - closed form| of the nonlocal term",
            ),
            (
                "residual_forced",
                "residual of the forced nonlocal equation on v_{c,alpha}",
            ),
            (
                "residual_unforced",
                "residual of the unforced nonlocal equation on w",
            ),
            ("pairing_modulus", "|integral of w(x,t) exp(-x^2) dx|"),
            ("pairing_phase", "phase of the same pairing"),
        ],
    );
    for r in rows {
        table.push(r);
    }
    table.meta("c", c);
    table.meta("alpha", alpha);
    table.meta("w_amplitude", json!(cfg.w_amplitude));
    Ok(Outcome::ok(table))
}
