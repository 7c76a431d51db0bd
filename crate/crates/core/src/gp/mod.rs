//! Geometric programming: standard form, log-domain transform and a
//! barrier-method solver.

mod barrier;
pub mod convex;
pub mod linalg;
mod problem;

pub use barrier::{kkt_residual, solve, solve_from};
pub use convex::{to_convex, ConvexForm, LogSumExp};
pub use problem::{GpError, GpProblem, GpSolution, SolveStatus, SolverOptions};
