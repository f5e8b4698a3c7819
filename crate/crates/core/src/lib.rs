//! Numerical toolkit for non-coherent Rayleigh block-fading MIMO channels in
//! the wideband (low SNR) regime.
//!
//! The crate evaluates closed forms for capacity, the sublinear capacity
//! term, coherence-length thresholds, the random coding error exponent,
//! outage and low-SNR diversity, and provides independent Monte Carlo and
//! quadrature oracles to check them against.
//!
//! Conventions used throughout:
//!
//! * all information quantities are in nats;
//! * SNR is linear (never dB);
//! * `CN(0, 1)` means a circularly-symmetric complex Gaussian with total
//!   variance 1, i.e. real and imaginary parts each `N(0, 1/2)`.
//!
//! Closed forms drop their asymptotic remainders. Every function that does
//! so names the dropped remainder in its documentation and, where results
//! are structured, in a `dropped` field.

// `!(x > 0.0)` style guards are deliberate: they also reject NaN.
#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod capacity;
pub mod channel;
pub mod error;
pub mod iid;
pub mod optimize;
pub mod oracle;
pub mod quadrature;
pub mod reliability;
pub mod rng;
pub mod special;

pub use channel::{ChannelDims, ComplexMatrix};
pub use error::{Error, Result};
pub use rng::RngStream;
