//! Identification intervals for measurable selections of a random interval
//! `Y = [y_L, y_U]`.
//!
//! The latent variable `y*` is only known to satisfy `y_L <= y* <= y_U`. This
//! crate computes the sharp ranges of its mean, median, quantiles and event
//! probabilities, with and without a scalar restriction (a fixed mean, median,
//! r-th moment or alpha-quantile), on finite weighted scenario instances.
//!
//! Every closed-form bound has an independent brute-force counterpart in
//! [`oracle`], which solves the same extremal problem over a finite candidate
//! grid.
//!
//! The crate is `no_std` (it needs `alloc`). IO, file formats and the CLI live
//! in the `selection-bounds-cli` companion crate.
//!
//! ```
//! use selection_bounds::{median, DiscreteInstance};
//!
//! let instance = DiscreteInstance::from_triples(&[(0.0, 1.0, 1.0)]).unwrap();
//! let bounds = median::median_restricted_mean_interval(&instance, 0.5).unwrap();
//! assert_eq!((bounds.lo, bounds.hi), (0.25, 0.75));
//! ```

#![cfg_attr(not(test), no_std)]

extern crate alloc;

mod error;
pub mod model;
pub mod laws;
pub mod benchmark;
pub mod rearrangement;
pub mod median;
pub mod event;
pub mod extensions;
pub mod oracle;
mod numeric;

pub use error::{Error, Result};
pub use model::{ClosedInterval, DiscreteInstance, Scenario, Side, StepDistribution};
pub use laws::{ComonotoneSpec, ParametricLaw};
pub use benchmark::{Choice, Selection, SelectionStats};
pub use event::TargetSet;
