//! Nonnegative matrix factorization under the KL divergence,
//!
//! ```text
//! min_{W ≥ 0, H ≥ 0}  D(X, WH) + g(W, H),   D(X, Y) = Σ X log(X/Y) − X + Y,
//! ```
//!
//! solved by majorization-minimization Bregman proximal gradient steps
//! ([`solvers::Mmbpg`]) and their extrapolated variant with adaptive restart
//! ([`solvers::Mmbpge`]). Multiplicative updates, coordinate descent and a
//! proximal gradient method are included for comparison.
//!
//! ```
//! use klnmf::data::{generate_synthetic, initial_point, SynthSpec};
//! use klnmf::solvers::{run_solver, SolverConfig};
//!
//! let (problem, _truth) = generate_synthetic(&SynthSpec::new(20, 15, 3, 1)).unwrap();
//! let z0 = initial_point(&problem, 2, true).unwrap();
//! let mut cfg = SolverConfig::default();
//! cfg.run.max_iter = 50;
//! let out = run_solver(&problem, &z0, &cfg).unwrap();
//! assert!(out.trace.last().objective < out.trace.records[0].objective);
//! ```

pub mod baselines;
pub mod bregman;
pub mod data;
pub mod error;
pub mod matrix;
pub mod model;
pub mod registry;
pub mod report;
pub mod runner;
pub mod solvers;

pub use error::{Error, Result};
pub use matrix::{DenseMatrix, FactorPair};
pub use model::{KlProblem, RegKind, Regularizer};
pub use registry::{Algorithm, AlgorithmSettings, Registry, RestartReason, StepInfo};
pub use runner::{run, RunOptions, RunOutput, SolverTrace, StopReason, TraceRecord};
