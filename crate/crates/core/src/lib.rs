//! Projection-free composite minimization.
//!
//! The crate implements conditional gradient (Frank-Wolfe) methods for
//! problems of the form `min f(x) + g(x)` where `f` has a Hölder-continuous
//! gradient and `g` is convex with a cheap linear-minimization oracle:
//!
//! - [`solver`]: the main loop with a parameter-dependent step, an adaptive
//!   (parameter-free) backtracking step and the classical open-loop rules;
//! - [`oracles`]: closed-form oracles for ℓq balls, entropy-regularized
//!   simplices and the box/simplex blocks of a factorization problem;
//! - [`problems`]: three seeded problem families with certified constants;
//! - [`theory`]: rate envelopes, line-search certificates and iteration
//!   bounds used to audit solver traces;
//! - [`cli`]: the experiment harness behind the `condgrad` binary.

pub mod cli;
pub mod error;
pub mod numerics;
pub mod oracles;
pub mod problems;
pub mod solver;
pub mod theory;

pub use error::{Error, Result};
pub use numerics::{DenseMatrix, DenseVector};
pub use oracles::LmoResult;
pub use problems::{CompositeProblem, Instance, InstanceSpec, ProblemConstants};
pub use solver::{solve, SolverTrace, Status, StepRule, Termination, TraceRecord};
