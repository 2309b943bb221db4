//! Byzantine lattice agreement over finite powerset lattices.
//!
//! Three synchronous algorithms share one lockstep simulator: an early
//! stopping gradecast loop ([`bla_sqrtf`]), id-based group halving
//! ([`bla_logn`]) and label-driven classification ([`bla_logf`]). The
//! [`checker`] module turns finished executions into pass/fail verdicts.

pub mod bla_logf;
pub mod bla_logn;
pub mod bla_sqrtf;
pub mod checker;
pub mod error;
pub mod gradecast;
pub mod label;
pub mod lattice;
pub mod protocol;
pub mod setgradecast;
pub mod sim;

pub use error::{ConfigError, ParseError, ProtocolError};
pub use lattice::{Element, GeneratingSet, ProcessId, Tag, Universe};
pub use sim::{execute, run, Algorithm, AdversarySpec, RunConfig, RunReport, Verdict};
