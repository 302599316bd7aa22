//! Randomized block-coordinate primal-dual solver for
//! `min_x f(x) + g(x) + h(Ax)` with smooth `f`, block-separable `g` and a
//! nonsmooth `h` handled by smoothing with a decreasing parameter.

pub mod blocks;
pub mod error;
pub mod functions;
pub mod oracle;
pub mod problems;
pub mod schedule;
pub mod smoothing;
pub mod solver;

pub use blocks::{BlockPartition, BlockSparseMatrix, CscMatrix};
pub use error::{Result, SmartcdError};
pub use functions::{ConjugatePart, CoordTerm, ScalarProx, SeparablePart, SmoothPart};
pub use problems::ProblemSpec;
pub use schedule::{Regime, Sampler, Schedule};
pub use solver::{run, RunOutput, SolverConfig, Trace, TraceRecord, Variant};
