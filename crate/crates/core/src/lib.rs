//! Truncated Fock-space simulation of postselecting linear-optical devices.
//!
//! The library models a passive optical circuit acting on a multimode bosonic
//! Hilbert space truncated by total photon number, measures a subset of the
//! modes with photon counters of finite quantum efficiency, and evaluates how
//! faithfully the postselected output reproduces a desired pure state.  Three
//! figures of merit are produced for every configuration: the overlap fidelity
//! `F_o`, the correct output fidelity `F_c`, and the retrodictive fidelity
//! `F_r`, together with the outcome probabilities and extraction weights
//! behind them.

pub mod channels;
pub mod error;
pub mod fidelity;
pub mod fock;
pub mod gates;
pub mod measurement;
pub mod postselect;
pub mod tolerance;
pub mod validate;

pub use error::{Error, Result};
