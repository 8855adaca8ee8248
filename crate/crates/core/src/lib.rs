//! Simulation and certification toolkit for entanglement-assisted stochastic
//! communication.
//!
//! A sender holds two symbols `(x1, x2) ∈ [n]²` and transmits one
//! `n`-dimensional quantum message; the receiver, who shares an entangled
//! state with the sender, chooses `y ∈ {1, 2}` and must output `x_y`. The
//! crate is organised as:
//!
//! - [`linalg`]: dense complex matrices, eigendecompositions, Schmidt decompositions.
//! - [`protocol`]: Weyl–Heisenberg encodings, product measurements, MUB games,
//!   correlation tables and the success-rate functionals.
//! - [`bounds`]: classical, unassisted and Schmidt-number limits, a numerical
//!   verifier for every inequality behind the Schmidt-number bound, and
//!   reference values for the MUB game.
//! - [`optimize`]: see-saw lower bounds in the relaxed and physical scenarios.
//! - [`stats`]: estimation from count data, Poisson bootstrap, Azuma–Hoeffding p-values.

pub mod bounds;
pub mod error;
pub mod linalg;
pub mod optimize;
pub mod protocol;
pub mod stats;

pub use error::{Error, Result};
pub use linalg::{ComplexMatrix, StateVector, C64};
pub use protocol::{CorrelationTable, DensityOperator, Povm, StochasticProtocol};
