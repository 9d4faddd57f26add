//! BGP/ROV propagation simulator producing ground-truth measurement
//! artifacts for the two-prefix hijack experiment.

pub mod converge;
pub mod emit;
pub mod fixtures;
pub mod generate;
mod run;
pub mod scenario;
pub mod topology;

use thiserror::Error;

use crate::rpki::{Asn, Prefix};

pub use converge::{converge, ConvergedState, RibEntry};
pub use emit::{emit_control_paths, emit_traceroutes, NoiseConfig};
pub use generate::{generate, GenerateError, GeneratorParams};
pub use run::{run_experiment, ExperimentArtifacts, ForwardingPath};
pub use scenario::{Scenario, ScenarioError};
pub use topology::{
    AsKind, AsNode, Exemption, IxpSessionKind, IxpVia, PeeringSession, Relationship, RovPolicy, Topology,
    TopologyError,
};

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum SimError {
    #[error("no fixed point for {prefix} after {rounds} rounds (policy dispute)")]
    NonConvergence { prefix: Prefix, rounds: usize },
    #[error("origin AS {0} is not in the topology")]
    UnknownOrigin(Asn),
    #[error("origin AS {0} is an IXP")]
    IxpOrigin(Asn),
    #[error("route for {prefix} at AS {at} violates the export rules")]
    ExportViolation { prefix: Prefix, at: Asn },
    #[error(transparent)]
    Topology(#[from] TopologyError),
}
