//! Proximal-gradient (iterative hard-thresholding) solvers for optimal control
//! problems with an `L⁰` control cost
//!
//! ```text
//!     min  ½‖y_u − y_d‖² + (α/2)‖u‖² + β‖u‖₀   subject to |u| ≤ b,
//! ```
//!
//! where `y_u` solves an elliptic PDE discretized with P1 finite elements on a
//! structured triangulation of the unit square and `u` is piecewise constant.
//!
//! The crate is organised bottom-up:
//!
//! * [`scalar_prox`]: closed-form pointwise proximal maps (hard thresholding with
//!   box constraints, soft thresholding, the switching prox), fixed-point tests
//!   and the convex envelope of the `L⁰` integrand.
//! * [`mesh_fem`]: mesh, assembly and linear solves for state and adjoint.
//! * [`control_problem`]: objective pieces `f`, `g`, `∇f` and support functionals.
//! * [`iht_solver`]: the iteration with fixed or line-searched prox weights.
//! * [`experiments`]: drivers for the numerical studies exposed by the CLI.

pub mod control_problem;
pub mod error;
pub mod experiments;
pub mod iht_solver;
pub mod mesh_fem;
pub mod scalar_prox;

pub use control_problem::{ControlProblem, MisfitQuadrature, PenaltyKind, ProblemSpec, Target};
pub use error::{Error, Result};
pub use iht_solver::{
    IterationRecord, SolveReport, SolverOptions, StepStrategy, StrategyKind, Termination,
};
pub use mesh_fem::{AssembledPde, ControlField, Mesh, PdeKind, StateField};
