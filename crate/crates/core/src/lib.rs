//! Property testers for distributions over long strings, where a tester pays
//! per queried bit of each sample.
//!
//! The crate is split along the same lines as the experiments it supports:
//!
//! * [`bitcore`]: strings, the systematic code and key decoding.
//! * [`dists`]: exact finite distributions and the structured constructions.
//! * [`metrics`]: variation distance, exact earth mover's distance and the
//!   distance-to-property oracles used as ground truth.
//! * [`access`]: sessions over a fixed sample matrix with per-model guards,
//!   plus the offline log validator.
//! * [`testers`]: the testers themselves.
//! * [`lab`]: instance generators, the repair analysis, numeric inequality
//!   sweeps and the Monte Carlo harness.

pub mod access;
pub mod bitcore;
pub mod dists;
mod error;
pub mod exact;
pub mod lab;
pub mod metrics;
pub mod testers;

pub use access::{Event, ModelSpec, QueryLog, Session, Verdict};
pub use bitcore::{BitString, Key, SymString, SystematicCode};
pub use dists::{Dist, FnTable, MapFn, PairFn, SetFn};
pub use error::{Error, Result};
pub use exact::Rational;
pub use metrics::{Property, TransferPlan};
pub use testers::{TesterKind, TesterSpec};
