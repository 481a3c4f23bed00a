//! Relaxation solver for linear symmetric hyperbolic systems
//! `∂ₜW + Σⱼ Bⱼ∂ⱼW = 0` whose state is constrained to a closed convex set `K`.
//!
//! The constraint is enforced by the penalized problem
//!
//! ```text
//! ∂ₜW − ηΔW + Σⱼ Bⱼ∂ⱼW = (P_K(W) − W)/ε
//! ```
//!
//! advanced by Strang splitting of exact relaxation, upwind (or Rusanov)
//! transport and explicit diffusion. [`verify`] turns the estimates known
//! for this problem into numerical checks.
//!
//! Every type is generic over [`Scalar`] (`f32` or `f64`); the `*64` and
//! `*32` aliases below fix the precision.

pub mod convex;
pub mod format;
pub mod grid;
pub mod linalg;
pub mod scalar;
pub mod solver;
pub mod system;
pub mod verify;

pub use convex::{ConvexError, ConvexSet, ProjectionOptions, Shape};
pub use grid::{Field, Grid, GridError, Region};
pub use scalar::Scalar;
pub use solver::{
    parabolic_run, run, Relaxation, RunFailure, RunReport, Scheme, SolverConfig, SolverError,
};
pub use system::{FriedrichsSystem, Model, ModelSpec, SystemError};

pub type ConvexSet64 = ConvexSet<f64>;
pub type Shape64 = Shape<f64>;
pub type Grid64 = Grid<f64>;
pub type Field64 = Field<f64>;
pub type FriedrichsSystem64 = FriedrichsSystem<f64>;
pub type Model64 = Model<f64>;
pub type SolverConfig64 = SolverConfig<f64>;
pub type RunReport64 = RunReport<f64>;

pub type ConvexSet32 = ConvexSet<f32>;
pub type Shape32 = Shape<f32>;
pub type Grid32 = Grid<f32>;
pub type Field32 = Field<f32>;
pub type FriedrichsSystem32 = FriedrichsSystem<f32>;
pub type Model32 = Model<f32>;
pub type SolverConfig32 = SolverConfig<f32>;
pub type RunReport32 = RunReport<f32>;
