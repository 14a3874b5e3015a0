//! Numerical toolkit for the Landau–Lifshitz–Gilbert equation in one space
//! dimension.
//!
//! The crate is organised around the stereographic reduction of LLG to a
//! dissipative quasilinear Schrödinger equation:
//!
//! * [`semigroup`]: the Ginzburg–Landau semigroup `e^{(α+iβ)tΔ}`, spectrally
//!   and exactly on step data;
//! * [`stereo`]: stereographic projection and its inverse;
//! * [`norms`]: BMO, Carleson-type X/Y norms, `E1`;
//! * [`selfsim`]: Serret–Frenet construction of self-similar profiles;
//! * [`dnls`]: nonlinearity, time marching, Picard iteration, residuals;
//! * [`hasimoto`]: filament function and the nonlocal Schrödinger equations.
//!
//! Everything is generic over [`Real`] (`f32` or `f64`); the aliases at the
//! crate root fix the scalar to `f64`.

#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod dnls;
pub mod error;
pub mod field;
pub mod hasimoto;
pub mod norms;
pub mod ode;
pub mod quad;
pub mod scalar;
pub mod selfsim;
pub mod semigroup;
pub mod specfun;
pub mod spectral;
pub mod stereo;

pub use error::{Error, Result};
pub use field::{vec3, Vec3};
pub use scalar::Real;
pub use spectral::Boundary;

pub type Grid = field::Grid<f64>;
pub type ComplexField = field::ComplexField<f64>;
pub type SpinField = field::SpinField<f64>;
pub type GlParams = semigroup::GlParams<f64>;
pub type Semigroup = semigroup::Semigroup<f64>;
pub type Profile = selfsim::Profile<f64>;
pub type SolverConfig = dnls::SolverConfig<f64>;
pub type Budget = dnls::WellPosednessBudget<f64>;
