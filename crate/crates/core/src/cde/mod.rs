//! Controlled differential equations `dy = sum_i f_i(y) dx^i` driven by
//! piecewise-linear paths.

mod expm;
mod fields;
mod order;
mod problem;
mod solve;
mod step;

pub use expm::expm;
pub use fields::{AsGeneral, BuiltinFields, FnVectorFields, LinearVectorFields, VectorFields};
pub use order::{convergence_order, ConvergenceReport, ConvergenceRow};
pub use problem::{FieldSpec, ProblemSpec};
pub use solve::{adjoint_solve, solve, Method, Partition, SolveOptions, Trajectory};
pub use step::{euler_step, log_ode_step, picard_solve_linear, MAX_GENERAL_ORDER};
