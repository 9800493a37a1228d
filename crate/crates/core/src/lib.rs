//! Network-wide key-rate evaluation for quantum key distribution (QKD) rings.
//!
//! Two architectures can serve all-to-all secure communication on a metro
//! ring with one Alice/Bob module pair per node:
//!
//! * **Relayed** — modules are wired to their ring neighbours and keys for
//!   distant node pairs are forwarded hop by hop through trusted
//!   intermediate key-management servers (one-time-pad re-encryption at
//!   every hop). Relaying consumes key material on every traversed link.
//! * **Switched** — optical switches connect arbitrary modules over chord
//!   fibers, building direct QKD links in time-division phases. Every pair
//!   gets end-to-end keys, at the price of switch loss, a pairing penalty
//!   for unmatched modules, and reconfiguration dead time.
//!
//! The crate computes the max-min consumed secret key rate of both
//! architectures on uniform odd-`N` rings, cross-checks the closed forms
//! against brute-force oracles (path enumeration, duration optimization),
//! and verifies the rates dynamically with a deterministic discrete-event
//! simulation of the key-management layer.
//!
//! ```
//! use qkdrb_core::{compare, relayed, ring, skr, switched};
//!
//! let model = skr::GenerationModel::reference();
//! let ring = ring::RingScenario::new(9, 2.0, 0.24, ring::ChordMode::Circle).unwrap();
//! let cfg = switched::SwitchedConfig::reference();
//!
//! let c_r = relayed::consumption_bps(&ring, &model);
//! let c_s = switched::consumption_bps(&ring, &model, &cfg).unwrap();
//! let gain = compare::relative_gain_percent(c_s, c_r).unwrap();
//! assert!(gain > 0.0, "switched should win on a dense ring");
//! ```

pub mod compare;
pub mod error;
pub mod relayed;
pub mod ring;
pub mod rng;
pub mod sim;
pub mod skr;
pub mod switched;

pub use error::{Error, Result};
