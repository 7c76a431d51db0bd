//! Weighted-sum-rate power control for interference-limited wireless
//! networks, solved as a sequence of geometric programs.
//!
//! The numeric core is generic over [`Real`] (`f32` or `f64`); the aliases
//! below fix the common double-precision instantiation.

pub mod gp;
pub mod oracle;
pub mod posy;
pub mod power;
pub mod scalar;
pub mod scenario;

pub use scalar::Real;

pub type Monomial = posy::Monomial<f64>;
pub type Posynomial = posy::Posynomial<f64>;
pub type GpProblem = gp::GpProblem<f64>;
pub type GpSolution = gp::GpSolution<f64>;
pub type SolverOptions = gp::SolverOptions<f64>;
pub type PowerControlProblem = power::PowerControlProblem<f64>;
pub type CondensedMonomial = power::CondensedMonomial<f64>;
pub type ScaReport = power::ScaReport<f64>;
pub type ScaOptions = power::ScaOptions<f64>;
pub type OracleResult = oracle::OracleResult<f64>;
