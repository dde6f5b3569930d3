//! Deterministic simulator and exact analysis toolkit for EPol, a
//! decentralized polling protocol that runs directly on a social graph.
//!
//! A population of `N` users each votes +1 or -1; everyone should learn the
//! exact tally with no central server and no cryptography, against a
//! coalition of dishonest participants that wants to bias the outcome and
//! deanonymize voters without ever doing anything provably wrong. Votes are
//! split into additive shares over a privacy parameter `k`, collected sums
//! are relayed along per-source node orderings guaranteed by the graph's
//! *m-broadcasting* property, and every corrupted relay is outvoted by an
//! `m`-fold majority.
//!
//! The crate provides:
//!
//! - [`graph`]: generators for the known-good graph families, the
//!   m-broadcasting checker with reusable witness orderings, role
//!   assignment, and text formats;
//! - [`protocol`]: the per-node state machine (sharing, relaying, majority
//!   decisions, aggregation);
//! - [`adversary`]: coalition misbehavior and the certain/greedy/non-greedy
//!   vote disclosure rules;
//! - [`analysis`]: every closed-form privacy, accuracy, security and
//!   reliability expression in arbitrary-precision rationals;
//! - [`sim`]: the seeded discrete-event engine with crash and message-loss
//!   injection, plus the enumeration and Monte Carlo oracles the test suite
//!   compares everything against.
//!
//! ```
//! use epol::adversary::AdversaryModel;
//! use epol::graph::{check_m_broadcasting, generate_cluster_ring};
//! use epol::sim::{run_poll, FaultPlan, PollConfig};
//!
//! let graph = generate_cluster_ring(16, 1).unwrap();
//! let cert = check_m_broadcasting(&graph, 3).expect_ok();
//! let config = PollConfig::new(1, 3, vec![0.9, 0.1], 0.5);
//! let metrics = run_poll(
//!     &graph,
//!     &cert,
//!     &config,
//!     &AdversaryModel::honest(),
//!     &FaultPlan::none(),
//!     7,
//! )
//! .unwrap();
//! assert_eq!(metrics.results[0], Some(metrics.truth));
//! ```
//!
//! The narrative guide in `book/` walks through the concepts; its code
//! samples are compiled as doc-tests below so the book and the library
//! cannot drift apart.

pub mod adversary;
pub mod analysis;
pub mod error;
pub mod graph;
pub mod protocol;
pub mod sim;

pub use error::Error;

/// Crate-wide result alias.
pub type Result<T> = std::result::Result<T, Error>;

// Keep the book's runnable snippets compiling; rustdoc executes them as
// doc-tests even though the modules are private.
#[doc = include_str!("../../../book/src/introduction.md")]
mod book_introduction {}
#[doc = include_str!("../../../book/src/graphs.md")]
mod book_graphs {}
#[doc = include_str!("../../../book/src/protocol.md")]
mod book_protocol {}
#[doc = include_str!("../../../book/src/adversary.md")]
mod book_adversary {}
#[doc = include_str!("../../../book/src/accuracy.md")]
mod book_accuracy {}
#[doc = include_str!("../../../book/src/faults.md")]
mod book_faults {}
#[doc = include_str!("../../../book/src/simulation.md")]
mod book_simulation {}
