//! MDS erasure coding as a non-cooperative game in slotted non-persistent
//! CSMA networks.
//!
//! - [`gf256`] and [`erasure`]: a systematic Cauchy MDS codec over GF(256).
//! - [`model`]: the closed-form success, recovery, throughput and delay model.
//! - [`sim`]: a seeded slot-level CSMA simulator used as a Monte Carlo oracle.
//! - [`game`]: per-player delay utilities, best responses and equilibrium search.
//! - [`harness`]: config parsing, scenarios, CSV and SVG output.

pub mod erasure;
pub mod game;
pub mod gf256;
pub mod harness;
pub mod model;
pub mod sim;
