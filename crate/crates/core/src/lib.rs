//! Detection and decoding for slotted asynchronous coded communication.
//!
//! In each slot the transmitter either stays silent (feeding the channel a
//! distinguished input symbol) or sends one of `M` codewords drawn uniformly
//! from a fixed type class. The receiver must decide between "noise" and
//! "codeword", and decode in the latter case. This crate provides:
//!
//! - the optimal rejection rule combining summed and maximal codeword
//!   likelihoods against a scaled noise likelihood, plus its two limiting
//!   variants ([`detector`]);
//! - exact single-letter random-coding exponents for the false-alarm,
//!   misdetection and decoding-error probabilities ([`exponents`]);
//! - simulation and exact small-instance oracles that cross-validate the
//!   exponents against ensemble averages ([`validation`]);
//! - the finite-alphabet probability primitives everything else is built on
//!   ([`probability`], [`channel`]).
//!
//! All rates, exponents and log-likelihoods are in nats. Heavy loops (output
//! enumeration, Monte Carlo batches, simplex grid searches) run on rayon when
//! the default `parallel` feature is enabled; results are bit-identical to the
//! sequential fallback because work is split into fixed chunks reduced in a
//! fixed order.

pub mod channel;
pub mod detector;
pub mod exec;
pub mod exponents;
pub mod numerics;
pub mod probability;
pub mod validation;

mod error;

pub use error::{Error, Result};
