//! Simulation laboratory for two randomized self-stabilizing maximal
//! independent set algorithms in the state model.
//!
//! * [`byzantine`]: a degree-weighted candidacy algorithm that contains the
//!   influence of Byzantine nodes under a fair distributed daemon.
//! * [`anonymous`]: deterministic candidacy with coin-flip withdrawal for
//!   anonymous networks under an adversarial distributed daemon.
//!
//! The [`engine`] executes transitions (valid move sets applied
//! simultaneously), [`daemon`] decides which activable nodes fire,
//! [`adversary`] drives Byzantine nodes, [`analysis`] and [`colors`] hold the
//! legitimacy predicates and proof-level instrumentation, and [`harness`]
//! runs seeded trials and sweeps.

pub mod adversary;
pub mod analysis;
pub mod anonymous;
pub mod byzantine;
pub mod colors;
pub mod daemon;
pub mod engine;
pub mod error;
pub mod golden;
pub mod graph;
pub mod harness;
pub mod rng;
pub mod runspec;
pub mod state;
pub mod stats;
pub mod trace;

pub use error::{Error, Result};
pub use graph::{ByzantineSet, Graph, GraphKind, NodeId};
pub use state::{Algorithm, Configuration, Rule};
