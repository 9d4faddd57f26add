use std::collections::BTreeMap;

use super::converge::{check_export_safety, converge, ConvergedState};
use super::emit::{
    emit_control_paths, emit_traceroutes, expected_hops, forwarding_chain, ixp_sessions, mapping_tables, probe_id,
    NoiseConfig,
};
use super::topology::{AsKind, IxpSessionKind, RovPolicy, Topology};
use super::SimError;
use crate::experiment::{Configuration, Experiment};
use crate::ingest::{ControlRecord, Hop, IxpId, IxpLan, TracerouteRecord};
use crate::rpki::{Asn, Prefix, Vrp};

/// Forwarding path a probe's packets take, as ingest should recover it.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct ForwardingPath {
    pub probe_id: String,
    pub configuration: Configuration,
    pub prefix: Prefix,
    pub hops: Vec<Hop>,
    pub reached: bool,
}

/// Everything one simulated two-configuration experiment produces.
#[derive(Clone, Debug)]
pub struct ExperimentArtifacts {
    pub experiment: Experiment,
    pub vrps: [Vec<Vrp>; 2],
    pub states: [ConvergedState; 2],
    pub control: Vec<ControlRecord>,
    pub traceroutes: Vec<TracerouteRecord>,
    pub ip2as: Vec<(Prefix, Asn)>,
    pub ixp_lans: Vec<(Prefix, IxpLan)>,
    pub ground_truth: BTreeMap<Asn, RovPolicy>,
    pub as_kinds: BTreeMap<Asn, AsKind>,
    pub ixp_sessions: Vec<(IxpId, Asn, Asn, IxpSessionKind)>,
    pub forwarding: Vec<ForwardingPath>,
    /// ASes with no session path to the first origin.
    pub unreachable: Vec<Asn>,
}

pub fn run_experiment(
    topology: &Topology,
    experiment: &Experiment,
    vrps: [Vec<Vrp>; 2],
    noise: &NoiseConfig,
    max_rounds: Option<usize>,
) -> Result<ExperimentArtifacts, SimError> {
    let mut states = Vec::with_capacity(2);
    let mut control = Vec::new();
    let mut traceroutes = Vec::new();
    let mut forwarding = Vec::new();
    for config in Configuration::BOTH {
        let state = converge(topology, experiment, &vrps[config.index()], max_rounds)?;
        check_export_safety(topology, &state)?;
        control.extend(emit_control_paths(topology, &state, config));
        traceroutes.extend(emit_traceroutes(topology, &state, config, noise));
        for v in topology.ordered() {
            let node = topology.node(v);
            if !node.hosts_probe {
                continue;
            }
            for (pi, prefix) in state.prefixes.iter().enumerate() {
                let chain = forwarding_chain(topology, &state, pi, v);
                forwarding.push(ForwardingPath {
                    probe_id: probe_id(node.asn),
                    configuration: config,
                    prefix: *prefix,
                    hops: expected_hops(topology, &chain),
                    reached: chain.reached,
                });
            }
        }
        states.push(state);
    }
    let (ip2as, ixp_lans) = mapping_tables(topology);
    let states: [ConvergedState; 2] = states.try_into().expect("two configurations");
    Ok(ExperimentArtifacts {
        experiment: *experiment,
        vrps,
        states,
        control,
        traceroutes,
        ip2as,
        ixp_lans,
        ground_truth: topology.ground_truth(),
        as_kinds: topology
            .nodes()
            .iter()
            .filter(|n| n.kind != AsKind::Ixp)
            .map(|n| (n.asn, n.kind))
            .collect(),
        ixp_sessions: ixp_sessions(topology),
        forwarding,
        unreachable: topology.unreachable_from(experiment.origins()[0]),
    })
}
