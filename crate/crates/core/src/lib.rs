//! Path signatures, signature kernels and solvers for controlled
//! differential equations driven by piecewise-linear paths.
//!
//! ```
//! use sigkit::{signature, Path};
//!
//! let x = Path::from_points(vec![vec![0.0, 0.0], vec![1.0, 0.0], vec![1.0, 1.0]]).unwrap();
//! let s = signature(&x, 2).unwrap();
//! assert_eq!(s.tensor().level(2), &[0.5, 1.0, 0.0, 0.5]);
//! ```

pub mod cde;
pub mod error;
pub mod io;
pub mod kernels;
pub mod learning;
pub mod lyndon;
pub mod paths;
pub mod quadrature;
pub mod signature;
pub mod tensor;

pub use cde::{
    adjoint_solve, convergence_order, euler_step, log_ode_step, picard_solve_linear, solve,
    BuiltinFields, LinearVectorFields, Method, Partition, ProblemSpec, SolveOptions, Trajectory,
    VectorFields,
};
pub use error::{Error, Result};
pub use kernels::{
    gram, kernel_tail_bound, pde_kernel, truncated_kernel, weighted_kernel_mc,
    weighted_kernel_quadrature, GramMatrix, KernelConfig, KernelMethod,
};
pub use learning::{
    brownian_fit_statistic, distribution_kernel, kernel_ridge_fit, kernel_ridge_predict,
    mmd_sq_unbiased, sig_regression_fit, sig_regression_predict, two_sample_test, MmdReport,
    Regularizer, RidgeModel, SigRegressionModel,
};
pub use lyndon::{lie_dimension, log_signature, lyndon_words, LieElement};
pub use paths::{sample_brownian, Path, TimeSeries};
pub use signature::{
    expected_brownian_signature, prefix_signatures, signature, signature_interval,
};
pub use tensor::{
    GroupLike, MomentDistribution, TruncatedTensor, WeightSequence, Word, WordPoly,
};
