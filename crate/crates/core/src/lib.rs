//! # splitmeas
//!
//! Given quantum subsystems whose states are prepared independently and a
//! joint POVM acting on all of them, build one POVM per subsystem whose
//! combined Shannon mutual information with the prepared states is at least
//! that of the joint POVM, and check this by computing every probability
//! explicitly.
//!
//! - [`qcore`]: complex matrices, tensor products, partial traces, states and POVMs.
//! - [`probability`]: joint outcome tables, entropies, (conditional) mutual
//!   information, and Csiszár measures.
//! - [`constructions`]: the prior-weighted and best-context projected POVMs.
//! - [`generators`]: seeded random scenarios plus the BB84 / Bell-basis scenario.
//! - [`harness`]: per-trial checks and aggregated verification reports.

#![forbid(unsafe_code)]

pub mod constructions;
pub mod error;
pub mod generators;
pub mod harness;
pub mod probability;
pub mod qcore;

pub use error::{Error, Result};
