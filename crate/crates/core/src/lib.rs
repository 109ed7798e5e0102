//! Many-to-many matching with contracts.
//!
//! Markets of workers and firms who sign bilateral contracts, with choice
//! functions built from greedy or ranked-table preferences. The crate decides
//! stability and firm-quasi-stability of allocations, computes the Blair lattice
//! operations and the Tarski operator on quasi-stable allocations, runs
//! generalized deferred acceptance, and re-equilibrates markets after firms
//! enter or workers leave. [`oracle`] provides brute-force ground truth for
//! small markets and [`gen`] produces seeded random ones.

pub mod choice;
pub mod cli;
pub mod da;
pub mod error;
pub mod fixtures;
pub mod format;
pub mod gen;
pub mod lattice;
pub mod model;
pub mod oracle;
pub mod rng;
pub mod scenario;
pub mod set;
pub mod stability;

pub use choice::{ChoiceSpec, Property, VerificationReport};
pub use da::{da_outcome, da_run, verify_trace, worker_pessimal, DaTrace, ProposalStrategy};
pub use error::{Error, Result, Violation};
pub use format::{load_market, parse_market, save_market};
pub use model::{Agent, Allocation, Contract, Market, Side, View};
pub use set::ContractSet;
