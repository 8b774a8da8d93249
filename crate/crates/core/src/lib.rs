//! Maximum-likelihood density estimation over normalized spline window
//! functions.
//!
//! A density is modeled as a nonnegative combination of normalized window
//! functions (Bernstein polynomials, B-splines on sample-derived knots, or
//! piecewise Bernstein families over a partitioned domain) and fitted to
//! i.i.d. observations by constrained likelihood maximization. The simplex
//! constraint on the coefficients guarantees the estimate is itself a
//! probability density.
//!
//! ```
//! use windens::{fit, gen_exponential, Method, SolverConfig};
//!
//! let samples = gen_exponential(180, 7);
//! let est = fit(&samples, Method::bezier(), &SolverConfig::default()).unwrap();
//! assert!(est.pdf(1.0) > 0.0);
//! let mass = est.total_coefficient();
//! assert!(mass > 0.999_999 && mass <= 1.0 + 1e-12);
//! ```

// `!(x > 0.0)` deliberately treats NaN as a failure; the suggested
// `x <= 0.0` would let NaN through.
#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod basis;
pub mod bench;
pub mod config;
pub mod error;
pub mod estimator;
pub mod io;
pub mod partition;
pub mod rng;
pub mod samples;
pub mod solver;

pub use basis::{bezier_eval, Domain, KnotVector, WindowBasis, WindowFamily};
pub use config::SolverConfig;
pub use error::{Error, Result};
pub use estimator::{
    fit, integrate_piecewise, kl_sanity, l1_error, simpson, DensityEstimate, KlSanity, Method,
};
pub use partition::{gaps, partition, DomainPartition, GapArray};
pub use rng::SplitMix64;
pub use samples::{
    gen_bimodal, gen_exponential, gen_trimodal, generate, true_pdf, SampleSet, SampleSource,
};
pub use solver::{
    compute_residual, inner_solve, outer_fit, recover_u, rescale_v, AlphaState, DesignMatrix,
    FitReport, GramMatrix, Termination,
};
