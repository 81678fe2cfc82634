//! Predictive and retrodictive dynamics of a two-level atom coupled to a
//! single-mode cavity field (Jaynes-Cummings model).
//!
//! The predictive direction asks: given the prepared atom and field, what is
//! the probability of a later measurement outcome? The retrodictive direction
//! inverts the question: given the measurement outcome and the initial field,
//! what is the probability that a particular atomic state was prepared?
//! Both share the same exact pairwise Jaynes-Cummings evolution; the
//! [`oracle`] module provides an independent dense-matrix propagator used to
//! validate it, and [`retrodiction::bayes_invert`] provides an independent
//! Bayesian route to the same retrodictive probabilities.
//!
//! Conventions used throughout:
//! - natural units, `hbar = 1`; the coupling constant sets the time scale and
//!   all elapsed times are reported as the dimensionless product
//!   `lambda * tau`;
//! - 2x2 atomic matrices are stored in `{|g>, |e>}` basis order;
//! - joint amplitudes are indexed by photon number `n = 0..=n_max`.

pub mod analysis;
pub mod cli;
pub mod core_state;
pub mod jc_evolution;
pub mod oracle;
pub mod retrodiction;

mod error;

pub use error::Error;

/// Crate-wide result alias.
pub type Result<T> = std::result::Result<T, Error>;
