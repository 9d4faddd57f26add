//! JSON scenario files: an explicit topology or generator parameters,
//! noise settings and a seed.

use serde::{Deserialize, Serialize};
use thiserror::Error;

use super::emit::NoiseConfig;
use super::fixtures;
use super::generate::{generate, GenerateError, GeneratorParams};
use super::run::{run_experiment, ExperimentArtifacts};
use super::topology::{AsNode, IxpSessionKind, PeeringSession, RovPolicy, Topology, TopologyError};
use super::SimError;
use crate::experiment::{Configuration, Experiment};

#[derive(Clone, Copy, Debug, Default, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct NoiseSpec {
    #[serde(default)]
    pub unresponsive_prob: f64,
    #[serde(default)]
    pub internal_ip_prob: f64,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(untagged)]
pub enum TopologySpec {
    Explicit {
        nodes: Vec<AsNode>,
        sessions: Vec<PeeringSession>,
    },
    Generated {
        generator: GeneratorParams,
    },
}

/// The top-level `seed` drives both noise and topology generation.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Scenario {
    #[serde(default)]
    pub seed: u64,
    #[serde(default)]
    pub experiment: Experiment,
    #[serde(default)]
    pub noise: NoiseSpec,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub max_rounds: Option<usize>,
    #[serde(flatten)]
    pub topology: TopologySpec,
}

#[derive(Debug, Error)]
pub enum ScenarioError {
    #[error("scenario line {line}, column {column}: {message}")]
    Parse { line: usize, column: usize, message: String },
    #[error("unknown built-in scenario `{0}`")]
    UnknownBuiltin(String),
    #[error("noise probability {0} is outside [0, 1]")]
    BadNoise(f64),
    #[error("scenario topology: {0}")]
    Topology(#[from] TopologyError),
    #[error("scenario generator: {0}")]
    Generate(#[from] GenerateError),
    #[error(transparent)]
    Simulation(#[from] SimError),
}

pub const BUILTINS: &[&str] = &["fig2", "fig2-norov", "ixp-mixed", "ixp-direct", "ixp-routeserver"];

impl Scenario {
    pub fn from_json(text: &str) -> Result<Self, ScenarioError> {
        let s: Scenario = serde_json::from_str(text).map_err(|e| ScenarioError::Parse {
            line: e.line(),
            column: e.column(),
            message: e.to_string(),
        })?;
        for p in [s.noise.unresponsive_prob, s.noise.internal_ip_prob] {
            if !(0.0..=1.0).contains(&p) {
                return Err(ScenarioError::BadNoise(p));
            }
        }
        let seed = s.seed;
        Ok(s.with_seed(seed))
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(self).expect("scenario serializes")
    }

    pub fn explicit(topology: &Topology) -> Self {
        Scenario {
            seed: 0,
            experiment: Experiment::canonical(),
            noise: NoiseSpec::default(),
            max_rounds: None,
            topology: TopologySpec::Explicit {
                nodes: topology.nodes().to_vec(),
                sessions: topology.sessions().to_vec(),
            },
        }
    }

    pub fn generated(params: GeneratorParams) -> Self {
        Scenario {
            seed: params.seed,
            experiment: Experiment::canonical(),
            noise: NoiseSpec::default(),
            max_rounds: None,
            topology: TopologySpec::Generated { generator: params },
        }
    }

    /// Built-in fixtures. `fig2` has AS2 enforcing strictly; `fig2-norov`
    /// has no enforcement; the `-ixp-` variants carry AS2–AS3 across a
    /// Strict exchange.
    pub fn builtin(name: &str) -> Result<Self, ScenarioError> {
        let topo = match name {
            "fig2" => fixtures::fig2(RovPolicy::Strict),
            "fig2-norov" => fixtures::fig2(RovPolicy::None),
            "ixp-mixed" => fixtures::ixp_mixed(),
            "ixp-direct" => fixtures::ixp_exchange(IxpSessionKind::Direct, IxpSessionKind::Direct),
            "ixp-routeserver" => fixtures::ixp_exchange(IxpSessionKind::Routeserver, IxpSessionKind::Routeserver),
            other => return Err(ScenarioError::UnknownBuiltin(other.to_string())),
        };
        Ok(Scenario::explicit(&topo))
    }

    /// Replaces the seed everywhere it is used.
    pub fn with_seed(mut self, seed: u64) -> Self {
        self.seed = seed;
        if let TopologySpec::Generated { generator } = &mut self.topology {
            generator.seed = seed;
        }
        self
    }

    pub fn noise(&self) -> NoiseConfig {
        NoiseConfig {
            unresponsive_prob: self.noise.unresponsive_prob,
            internal_ip_prob: self.noise.internal_ip_prob,
            seed: self.seed,
        }
    }

    pub fn build_topology(&self) -> Result<Topology, ScenarioError> {
        Ok(match &self.topology {
            TopologySpec::Explicit { nodes, sessions } => Topology::new(nodes.clone(), sessions.clone())?,
            TopologySpec::Generated { generator } => generate(generator, &self.experiment)?,
        })
    }

    pub fn run(&self) -> Result<(Topology, ExperimentArtifacts), ScenarioError> {
        let topology = self.build_topology()?;
        let vrps = [
            self.experiment.vrps(Configuration::A),
            self.experiment.vrps(Configuration::B),
        ];
        let art = run_experiment(&topology, &self.experiment, vrps, &self.noise(), self.max_rounds)?;
        Ok((topology, art))
    }
}
