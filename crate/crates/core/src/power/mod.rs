//! Weighted-sum-rate power control: the link model, the GP surrogate and
//! the successive condensation loop.

pub mod condense;
mod init;
pub mod problem;
mod sca;
pub mod standard_form;

pub use condense::{condense_agm, condense_proposed, CondenseError, CondensedMonomial};
pub use init::{feasible_init, feasible_init_with_hint, min_common_slack, InitError};
pub use problem::{example1, PowerControlProblem, ProblemError, ProblemFile, DEFAULT_P_MIN};
pub use sca::{check_feasible, sca_solve, ScaError, ScaIterate, ScaOptions, ScaReport, Termination};
pub use standard_form::build_standard_form;
