//! Continuous-time transfer-function identification from sampled data with
//! the simplified refined instrumental variable (SRIVC) estimator.
//!
//! The intersample behaviour of every sampled signal is explicit: the true
//! system input, the input used in the regressor, the input used in the
//! instrument and the measured output each carry their own [`Hold`].
//!
//! * [`ctlti`]: polynomials and transfer functions in the derivative operator.
//! * [`holdsim`]: realization, ZOH/FOH discretization and filter banks.
//! * [`estimator`]: regressor, instrument, iteration and initialization.
//! * [`signals`]: test inputs, noise and record synthesis.
//! * [`mcharness`]: Monte Carlo sweeps, summaries and plot data.
//! * [`cli`]: the `srivc` command-line front end.

// `!(x > 0.0)` is used deliberately so that NaN is rejected too.
#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod cli;
pub mod ctlti;
pub mod error;
pub mod estimator;
pub mod holdsim;
pub mod mcharness;
pub mod signals;

pub use ctlti::{CtPolynomial, CtTransferFunction, ParameterVector};
pub use error::{Error, Result};
pub use estimator::{EstimationResult, HoldPolicy, Init, SrivcConfig};
pub use holdsim::{Hold, SampledSignal};
pub use signals::{NoiseSpec, SampledRecord};
