//! Numerical laboratory for the Quicksort limit law.
//!
//! The library is organized around one object and one map. The object is the
//! limiting distribution of normalized Quicksort comparison counts; the map is
//! the distributional transformation that sends the law of `Z` to the law of
//! `U Z + (1-U) Z* + g(U)`, with `U` uniform on (0,1) and `Z`, `Z*`
//! independent copies. The limit law is the unique zero-mean, finite-variance
//! fixed point of that map, and the full fixed-point set is its convolution
//! family with Cauchy distributions.
//!
//! Modules:
//! - [`dist`]: empirical samples, characteristic-function grids, Cauchy laws,
//!   and the metrics that compare them.
//! - [`quicksort`]: the comparison-count recursion, its exact expectation, and
//!   the toll function `g`.
//! - [`transform`]: the transformation on samples, on coupled pairs, and on
//!   characteristic-function grids.
//! - [`fixed_point`]: fixed-point approximation by iteration and verification
//!   of the Cauchy convolution family.
//! - [`analysis`]: small-`t` structure of a characteristic function: the
//!   integral equation for `psi - 1`, the slope `beta`, and envelope bounds.
//! - [`attraction`]: recursive weight trees, tail bounds for the maximal
//!   weight, and domain-of-attraction experiments for the homogeneous map.
//!
//! Every stochastic routine takes a [`Stream`]; results are reproducible for
//! a fixed stream and independent of thread count.

pub mod analysis;
pub mod attraction;
pub mod dist;
mod error;
pub mod exec;
pub mod fixed_point;
pub mod interp;
pub mod quad;
pub mod quicksort;
pub mod stream;
pub mod tolerances;
pub mod transform;

pub use error::{Error, Result};
pub use stream::Stream;
