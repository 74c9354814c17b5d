//! Exact symbolic calculus for the model kernels of L2-optimal holomorphic
//! jet extension on the Bargmann space, plus a numerical laboratory on
//! projective spaces that measures extension operators, multiplicative
//! defects and Bergman-type projectors for powers of the hyperplane bundle.
//!
//! Layout:
//! - [`coeff`], [`poly`]: the exact coefficient ring and amplitude polynomials;
//! - [`kernels`]: the five model kernel bases and their composition calculus;
//! - [`quad`]: Gauss quadratures and the independent composition oracle;
//! - [`fock`]: truncated Bargmann-space matrix realizations;
//! - [`geometry`], [`projective`]: Fubini-Study metric data and the curved
//!   testbed on CP^1 / CP^2;
//! - [`analysis`]: profile comparisons and trend fits;
//! - [`parse`]: the canonical kernel text syntax;
//! - [`verify`], [`experiments`], [`report`]: the identity suite, named
//!   experiments and report emission used by the CLI.

pub mod analysis;
pub mod coeff;
pub mod error;
pub mod experiments;
pub mod fock;
pub mod geometry;
pub mod kernels;
pub mod parse;
pub mod poly;
pub mod projective;
pub mod quad;
pub mod report;
pub mod verify;

pub use coeff::{GaussRat, PiCoeff};
pub use error::{Error, Result};
pub use kernels::{
    build_model_kernel, compose, IndexSet, JetKernel, KernelBase, KernelKind, LogKernel, ModelKind,
    PolyKernel,
};
pub use poly::{MultiPoly, Parity, Var, VarDims};
pub use projective::{HomogSpace, JetSetup, Lab, SubmanifoldKind};
pub use report::{ExperimentReport, RunConfig};
