//! Finite-dimensional noncommutative probability.
//!
//! The ambient algebra is the complex `d x d` matrices with the normalized
//! trace `tau(x) = tr(x) / d`. Filtrations are tensor towers
//! `M_0 = C1 ⊆ M_1 ⊆ ... ⊆ M_n` whose conditional expectations are
//! normalized partial traces. On top of this the crate builds operator
//! martingales, the closed-form tail bounds they satisfy, and a randomized
//! harness that evaluates both sides of each inequality on generated
//! instances.
//!
//! - [`algebra`]: Hermitian elements, spectral calculus, tail probabilities
//!   and Schatten norms.
//! - [`condexp`]: tensor filtrations, partial-trace and pinching conditional
//!   expectations.
//! - [`martingale`]: martingale and supermartingale construction, validation
//!   and hypothesis-constant extraction.
//! - [`bounds`]: scalar bound formulas.
//! - [`checkers`]: instance-level comparisons and the suite runner.

#![forbid(unsafe_code)]

pub mod algebra;
pub mod bounds;
pub mod checkers;
pub mod condexp;
pub mod error;
pub mod martingale;
pub mod rng;

pub use algebra::{HermitianElement, SpectralDecomposition, TracialState};
pub use checkers::{CheckResult, SuiteConfig, SuiteKind, TheoremId, Tolerance};
pub use condexp::{Pinching, TensorFiltration};
pub use error::{Error, Result};
pub use martingale::{BoundParams, MartingaleSequence, SequenceKind};
pub use rng::SampleStream;
