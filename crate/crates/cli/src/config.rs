//! JSON run configurations. Unknown keys are rejected.

use std::path::Path;

use serde::{Deserialize, Serialize};

use crate::CliError;

fn check(ok: bool, msg: impl Into<String>) -> Result<(), CliError> {
    if ok {
        Ok(())
    } else {
        Err(CliError::Config(msg.into()))
    }
}

fn check_alpha(alpha: f64) -> Result<(), CliError> {
    check(
        alpha > 0.0 && alpha <= 1.0,
        format!("alpha must lie in (0, 1], got {alpha}"),
    )
}

/// Uniform spatial grid `[-half_width, half_width)` with `points` samples.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct GridConfig {
    pub half_width: f64,
    pub points: usize,
}

impl Default for GridConfig {
    fn default() -> Self {
        Self {
            half_width: 16.0,
            points: 1024,
        }
    }
}

impl GridConfig {
    pub fn validate(&self) -> Result<(), CliError> {
        check(
            self.half_width > 0.0 && self.half_width.is_finite(),
            "grid half_width must be positive",
        )?;
        check(
            self.points.is_power_of_two() && self.points >= 16 && self.points <= 1 << 16,
            format!(
                "grid points must be a power of two in [16, 65536], got {}",
                self.points
            ),
        )
    }

    /// Grid with a node at the origin: `x_i = -L + 2L·i/N`.
    pub fn grid(&self) -> Result<gilbert::Grid, CliError> {
        self.validate()?;
        Ok(gilbert::Grid::new(
            -self.half_width,
            2.0 * self.half_width / self.points as f64,
            self.points,
        )?)
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct ProfileConfig {
    pub c: f64,
    pub alpha: f64,
    pub tol: f64,
    /// Output samples cover `[-s_out, s_out]`.
    pub s_out: f64,
    pub ds: f64,
}

impl Default for ProfileConfig {
    fn default() -> Self {
        Self {
            c: 0.5,
            alpha: 1.0,
            tol: 1e-10,
            s_out: 10.0,
            ds: 0.1,
        }
    }
}

impl ProfileConfig {
    pub fn validate(&self) -> Result<(), CliError> {
        check_alpha(self.alpha)?;
        check(self.c >= 0.0 && self.c.is_finite(), "c must be nonnegative")?;
        check(
            self.s_out > 0.0 && self.ds > 0.0 && self.s_out / self.ds <= 1e6,
            "need s_out > 0 and a moderate ds > 0",
        )
    }
}

/// Initial data for `solve`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, rename_all = "snake_case", tag = "kind")]
pub enum InitialData {
    /// The jump between the limit vectors of the profile with amplitude `c`,
    /// carried to `t0` by Picard iteration.
    Step { c: f64 },
    /// `m_{c,α}(·, t0)`.
    SelfSimilar { c: f64 },
    /// A constant spin.
    Constant { m: [f64; 3] },
    /// CSV with columns `x, m1, m2, m3` sampled on the configured grid.
    File { path: String },
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, rename_all = "snake_case")]
pub enum SchemeName {
    ExponentialEuler,
    ExponentialMidpoint,
}

impl From<&SchemeName> for gilbert::dnls::Scheme {
    fn from(s: &SchemeName) -> Self {
        match s {
            SchemeName::ExponentialEuler => Self::ExponentialEuler,
            SchemeName::ExponentialMidpoint => Self::ExponentialMidpoint,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct SolveConfig {
    pub alpha: f64,
    pub grid: GridConfig,
    pub t0: f64,
    pub t_end: f64,
    pub steps: usize,
    pub scheme: SchemeName,
    pub initial: InitialData,
    /// Pole margin required of the initial data.
    pub delta: f64,
    /// Times at which snapshots are written next to the output table.
    pub snapshots: Vec<f64>,
}

impl Default for SolveConfig {
    fn default() -> Self {
        Self {
            alpha: 0.8,
            grid: GridConfig::default(),
            t0: 0.1,
            t_end: 2.0,
            steps: 150,
            scheme: SchemeName::ExponentialMidpoint,
            initial: InitialData::SelfSimilar { c: 0.3 },
            delta: 0.1,
            snapshots: Vec::new(),
        }
    }
}

impl SolveConfig {
    pub fn validate(&self) -> Result<(), CliError> {
        check_alpha(self.alpha)?;
        self.grid.validate()?;
        check(self.t0 > 0.0 && self.t0 < self.t_end, "need 0 < t0 < t_end")?;
        check(
            (1..=100_000).contains(&self.steps),
            "steps must lie in [1, 100000]",
        )?;
        check(
            self.delta > 0.0 && self.delta <= 2.0,
            "delta must lie in (0, 2]",
        )?;
        match &self.initial {
            InitialData::Step { c } | InitialData::SelfSimilar { c } => {
                check(*c >= 0.0 && c.is_finite(), "c must be nonnegative")
            }
            InitialData::Constant { m } => {
                let n = (m[0] * m[0] + m[1] * m[1] + m[2] * m[2]).sqrt();
                check(
                    (n - 1.0).abs() < 1e-9,
                    "constant spin must be a unit vector",
                )
            }
            InitialData::File { path } => {
                check(!path.is_empty(), "initial data file path is empty")
            }
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct StabilityConfig {
    pub c: f64,
    pub alpha: f64,
    pub etas: Vec<f64>,
    pub grid_points: Vec<usize>,
    pub half_width: f64,
    pub t0: f64,
    pub t_end: f64,
    pub steps: usize,
}

impl Default for StabilityConfig {
    fn default() -> Self {
        Self {
            c: 0.3,
            alpha: 0.8,
            etas: vec![1e-2, 1e-3, 1e-4],
            grid_points: vec![1024, 2048],
            half_width: 16.0,
            t0: 0.1,
            t_end: 2.0,
            steps: 100,
        }
    }
}

impl StabilityConfig {
    pub fn validate(&self) -> Result<(), CliError> {
        check_alpha(self.alpha)?;
        check(self.c > 0.0 && self.c.is_finite(), "c must be positive")?;
        check(
            self.etas.iter().all(|e| *e >= 0.0 && e.is_finite()),
            "perturbation sizes must be nonnegative",
        )?;
        for &n in &self.grid_points {
            GridConfig {
                half_width: self.half_width,
                points: n,
            }
            .validate()?;
        }
        check(self.t0 > 0.0 && self.t0 < self.t_end, "need 0 < t0 < t_end")?;
        check(
            (1..=100_000).contains(&self.steps),
            "steps must lie in [1, 100000]",
        )
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct MultiplicityConfig {
    pub alpha: f64,
    pub theta: f64,
    pub k: usize,
    pub tol: f64,
}

impl Default for MultiplicityConfig {
    fn default() -> Self {
        Self {
            alpha: 1.0,
            theta: std::f64::consts::FRAC_PI_2,
            k: 4,
            tol: 1e-12,
        }
    }
}

impl MultiplicityConfig {
    pub fn validate(&self) -> Result<(), CliError> {
        check_alpha(self.alpha)?;
        check(
            self.theta > 0.0 && self.theta < std::f64::consts::PI,
            "theta must lie in (0, π)",
        )?;
        check(self.k <= 64, "at most 64 roots")?;
        check(
            self.tol > 0.0 && self.tol < 1e-3,
            "tol must lie in (0, 1e-3)",
        )
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct HasimotoConfig {
    pub c: f64,
    pub alpha: f64,
    /// Amplitude of `w` as `[re, im]`.
    pub w_amplitude: [f64; 2],
    pub times: Vec<f64>,
    /// Half-spacing of the three time samples used for `∂_t`.
    pub dt: f64,
    pub grid: GridConfig,
}

impl Default for HasimotoConfig {
    fn default() -> Self {
        Self {
            c: 0.4,
            alpha: 0.7,
            w_amplitude: [0.7, 0.0],
            times: vec![0.5, 1.0, 2.0],
            dt: 1e-3,
            grid: GridConfig {
                half_width: 24.0,
                points: 2048,
            },
        }
    }
}

impl HasimotoConfig {
    pub fn validate(&self) -> Result<(), CliError> {
        check_alpha(self.alpha)?;
        self.grid.validate()?;
        check(self.c >= 0.0 && self.c.is_finite(), "c must be nonnegative")?;
        check(
            self.w_amplitude != [0.0, 0.0],
            "w needs a nonzero amplitude",
        )?;
        check(
            self.dt > 0.0 && self.times.iter().all(|&t| t > 2.0 * self.dt),
            "times must exceed the difference step",
        )
    }
}

#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct VerifyConfig {
    /// Restrict the run to invariants whose name contains one of these.
    pub only: Vec<String>,
}

/// Reads a JSON configuration; missing files and schema errors are config errors.
pub fn load<T: for<'de> Deserialize<'de> + Default>(path: Option<&Path>) -> Result<T, CliError> {
    match path {
        None => Ok(T::default()),
        Some(p) => {
            let text = std::fs::read_to_string(p)
                .map_err(|e| CliError::Config(format!("{}: {e}", p.display())))?;
            serde_json::from_str(&text)
                .map_err(|e| CliError::Config(format!("{}: {e}", p.display())))
        }
    }
}
