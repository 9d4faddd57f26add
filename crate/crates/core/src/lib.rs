//! Route origin validation measurement toolkit.
//!
//! Validates announcements against VRPs, simulates BGP propagation under
//! per-AS ROV policies, preprocesses control- and data-plane paths, and
//! classifies ASes by the evidence those paths carry.

pub mod experiment;
pub mod ingest;
pub mod rpki;
pub mod simnet;
pub mod text;
pub mod classify;
pub mod correlate;
pub mod ixp;
pub mod pipeline;
pub mod propgraph;
