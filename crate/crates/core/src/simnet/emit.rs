//! Turns a converged state into measurement artifacts: collector AS paths
//! and noisy three-run traceroutes.

use std::net::Ipv4Addr;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use super::converge::ConvergedState;
use super::topology::{AsKind, IxpSessionKind, Topology};
use crate::experiment::Configuration;
use crate::ingest::{ControlRecord, Hop, IxpId, IxpLan, RawHop, TracerouteRecord};
use crate::rpki::{Asn, Prefix};

pub const RUNS_PER_TRACE: usize = 3;

#[derive(Clone, Copy, Debug, Default, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct NoiseConfig {
    #[serde(default)]
    pub unresponsive_prob: f64,
    #[serde(default)]
    pub internal_ip_prob: f64,
    #[serde(default)]
    pub seed: u64,
}

impl NoiseConfig {
    pub fn none(seed: u64) -> Self {
        NoiseConfig {
            unresponsive_prob: 0.0,
            internal_ip_prob: 0.0,
            seed,
        }
    }
}

pub fn probe_id(asn: Asn) -> String {
    format!("probe-{}", asn.0)
}

pub fn collector_id(asn: Asn) -> String {
    format!("rc-{}", asn.0)
}

/// IXP id used for an IXP node in emitted LAN tables.
pub fn ixp_id(ixp: Asn) -> IxpId {
    IxpId(ixp.0)
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct ChainStep {
    pub node: usize,
    /// Session used to reach the next step; `None` on the last step.
    pub via: Option<usize>,
}

/// Node sequence packets follow from a source toward the origin it
/// selected.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct ForwardingChain {
    pub steps: Vec<ChainStep>,
    /// Whether the chain ends at an originating AS.
    pub reached: bool,
}

pub fn forwarding_chain(topology: &Topology, state: &ConvergedState, prefix_idx: usize, from: usize) -> ForwardingChain {
    let mut steps = Vec::new();
    let mut cur = from;
    loop {
        let Some(entry) = state.best(prefix_idx, cur) else {
            steps.push(ChainStep { node: cur, via: None });
            return ForwardingChain { steps, reached: false };
        };
        let Some(session) = entry.learned_from else {
            steps.push(ChainStep { node: cur, via: None });
            return ForwardingChain { steps, reached: true };
        };
        steps.push(ChainStep {
            node: cur,
            via: Some(session),
        });
        let s = topology.session(session);
        let here = topology.node(cur).asn;
        let next = if s.a == here { s.b } else { s.a };
        cur = topology.index_of(next).expect("session endpoint exists");
        if steps.len() > topology.nodes().len() {
            // Loop-free selection guarantees termination; guard anyway.
            return ForwardingChain { steps, reached: false };
        }
    }
}

/// The condensed hop list a zero-noise traceroute along `chain` maps to.
pub fn expected_hops(topology: &Topology, chain: &ForwardingChain) -> Vec<Hop> {
    let mut out = Vec::new();
    for step in &chain.steps {
        out.push(Hop::As(topology.node(step.node).asn));
        if let Some(via) = step.via.and_then(|s| topology.session(s).via_ixp) {
            out.push(Hop::Ixp(ixp_id(via.ixp)));
        }
    }
    out
}

fn pick(ips: &[Ipv4Addr], key: Asn) -> Ipv4Addr {
    ips[key.0 as usize % ips.len()]
}

/// Router addresses a traceroute along `chain` answers with.
pub fn chain_ips(topology: &Topology, chain: &ForwardingChain) -> Vec<Ipv4Addr> {
    let mut out = Vec::new();
    let mut prev: Option<Asn> = None;
    for (i, step) in chain.steps.iter().enumerate() {
        let node = topology.node(step.node);
        let ingress = match prev {
            Some(p) => pick(&node.router_ips, p),
            None => node.router_ips[0],
        };
        out.push(ingress);
        if let Some(next) = chain.steps.get(i + 1).map(|s| topology.node(s.node).asn) {
            let egress = pick(&node.router_ips, next);
            if egress != ingress {
                out.push(egress);
            }
            let session = topology.session(step.via.expect("non-final step has a session"));
            if let Some(via) = session.via_ixp {
                let ixp = topology.get(via.ixp).expect("validated IXP");
                out.push(pick(&ixp.router_ips, next));
            }
        }
        prev = Some(node.asn);
    }
    out
}

fn noisy_run(ips: &[Ipv4Addr], noise: &NoiseConfig, rng: &mut ChaCha8Rng) -> Vec<RawHop> {
    ips.iter()
        .map(|ip| {
            if noise.unresponsive_prob > 0.0 && rng.random_bool(noise.unresponsive_prob.min(1.0)) {
                RawHop::Timeout
            } else if noise.internal_ip_prob > 0.0 && rng.random_bool(noise.internal_ip_prob.min(1.0)) {
                RawHop::Ip(Ipv4Addr::new(10, rng.random(), rng.random(), rng.random_range(1..255)))
            } else {
                RawHop::Ip(*ip)
            }
        })
        .collect()
}

fn rng_for(noise: &NoiseConfig, config: Configuration) -> ChaCha8Rng {
    let salt = (config.index() as u64 + 1).wrapping_mul(0x9e37_79b9_7f4a_7c15);
    ChaCha8Rng::seed_from_u64(noise.seed ^ salt)
}

/// Three runs per probe and prefix, probes in ascending ASN order.
pub fn emit_traceroutes(
    topology: &Topology,
    state: &ConvergedState,
    config: Configuration,
    noise: &NoiseConfig,
) -> Vec<TracerouteRecord> {
    let mut rng = rng_for(noise, config);
    let mut out = Vec::new();
    for v in topology.ordered() {
        let node = topology.node(v);
        if !node.hosts_probe {
            continue;
        }
        for (pi, prefix) in state.prefixes.iter().enumerate() {
            let chain = forwarding_chain(topology, state, pi, v);
            let ips = chain_ips(topology, &chain);
            let runs = (0..RUNS_PER_TRACE).map(|_| noisy_run(&ips, noise, &mut rng)).collect();
            out.push(TracerouteRecord {
                probe_id: probe_id(node.asn),
                configuration: config,
                prefix: *prefix,
                runs,
            });
        }
    }
    out
}

/// One AS path per collector and prefix where the collector holds a route.
pub fn emit_control_paths(topology: &Topology, state: &ConvergedState, config: Configuration) -> Vec<ControlRecord> {
    let mut out = Vec::new();
    for v in topology.ordered() {
        let node = topology.node(v);
        if !node.hosts_collector {
            continue;
        }
        for (pi, prefix) in state.prefixes.iter().enumerate() {
            if let Some(entry) = state.best(pi, v) {
                out.push(ControlRecord {
                    configuration: config,
                    collector: collector_id(node.asn),
                    prefix: *prefix,
                    as_path: entry.as_path.clone(),
                });
            }
        }
    }
    out
}

/// IP-to-AS and IXP LAN tables covering every router address.
pub fn mapping_tables(topology: &Topology) -> (Vec<(Prefix, Asn)>, Vec<(Prefix, IxpLan)>) {
    let mut ases = Vec::new();
    let mut lans = Vec::new();
    for v in topology.ordered() {
        let node = topology.node(v);
        for ip in &node.router_ips {
            if node.kind == AsKind::Ixp {
                lans.push((
                    Prefix::host(*ip),
                    IxpLan {
                        id: ixp_id(node.asn),
                        name: format!("ixp-{}", node.asn.0),
                    },
                ));
            } else {
                ases.push((Prefix::host(*ip), node.asn));
            }
        }
    }
    (ases, lans)
}

/// Ground-truth IXP sessions: `(ixp, a, b, kind)`.
pub fn ixp_sessions(topology: &Topology) -> Vec<(IxpId, Asn, Asn, IxpSessionKind)> {
    let mut out: Vec<_> = topology
        .sessions()
        .iter()
        .filter_map(|s| s.via_ixp.map(|v| (ixp_id(v.ixp), s.a.min(s.b), s.a.max(s.b), v.kind)))
        .collect();
    out.sort();
    out
}
