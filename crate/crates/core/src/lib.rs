//! Switching sequence design for switched-array channel sounders.
//!
//! The crate covers the whole design loop for the activation order of antenna
//! pairs in a switched MIMO sounder:
//!
//! * [`array`]: array responses from EADF coefficient matrices or closed-form
//!   isotropic ULAs, with analytic angular derivatives.
//! * [`signal`]: switching sequences, Doppler phase vectors, basis vectors and
//!   synthetic received signals.
//! * [`ambiguity`]: single-polarization and polarimetric spatio-temporal
//!   ambiguity functions and the integrated ambiguity objective.
//! * [`fisher`]: Jacobian, Fisher information, CRLB and the Doppler/angle
//!   cross-information cost functions.
//! * [`fourier`]: the spectrum-median sequence cost and sampled initial
//!   sequence selection.
//! * [`optimizer`]: simulated annealing and the end-to-end design pipelines.
//! * [`evaluator`]: concentrated maximum-likelihood estimation and Monte
//!   Carlo benchmarking against CRLB references.
//! * [`report`]: CSV / text serialization of all pipeline outputs.
//! * [`complexity`]: runtime scaling kernels and log-log slope fits.
//!
//! Angles are radians and Doppler is Hz in every API; only Monte Carlo
//! metrics and CSV outputs switch azimuth to degrees.

// `!(x > 0.0)` is used on purpose: it also rejects NaN.
#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod ambiguity;
pub mod array;
pub mod complexity;
mod error;
pub mod evaluator;
pub mod fisher;
pub mod fourier;
pub mod linalg;
pub mod optimizer;
pub mod report;
pub mod rng;
pub mod signal;

pub use error::{Error, Result};
pub use num_complex::Complex64;

pub use ambiguity::{AmbiguityGrid, StructuralParams};
pub use array::{ArrayModel, Eadf, Polarization};
pub use fisher::{FisherCostConfig, FisherMatrix, Parameter};
pub use fourier::FourierStepConfig;
pub use optimizer::{AnnealConfig, DesignReport};
pub use signal::{PathParameters, SoundingConfig, SwitchingSequence};
