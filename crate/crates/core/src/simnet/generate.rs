//! Seeded synthetic topologies: a Tier-1 clique, a preferential-attachment
//! provider hierarchy, sparse transit peering and IXP fabrics.

use std::collections::BTreeSet;
use std::net::Ipv4Addr;

use rand::seq::SliceRandom;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use super::topology::{AsKind, AsNode, Exemption, IxpSessionKind, PeeringSession, RovPolicy, Topology, TopologyError};
use crate::experiment::Experiment;
use crate::rpki::Asn;

/// First ASN handed to generated non-origin ASes.
pub const BASE_ASN: u32 = 1000;
/// First ASN handed to generated IXPs.
pub const BASE_IXP_ASN: u32 = 60000;

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct GeneratorParams {
    /// Total AS count including the two origins, excluding IXPs.
    pub nodes: usize,
    pub tier1: usize,
    /// Share of the non-Tier-1, non-origin ASes that provide transit.
    pub isp_fraction: f64,
    pub strict_fraction: f64,
    pub depreference_fraction: f64,
    pub selective_fraction: f64,
    pub probe_fraction: f64,
    pub collector_fraction: f64,
    /// Chance of each additional provider beyond the first.
    pub multihome_prob: f64,
    /// Transit providers of each origin.
    pub origin_providers: usize,
    /// Chance that two ISPs peer privately.
    pub peer_prob: f64,
    pub ixps: usize,
    pub ixp_member_prob: f64,
    /// Chance that two members of one IXP peer there.
    pub ixp_session_prob: f64,
    /// Share of IXP sessions that bypass the routeserver.
    pub direct_fraction: f64,
    pub ixp_policy: RovPolicy,
    pub seed: u64,
}

impl Default for GeneratorParams {
    fn default() -> Self {
        GeneratorParams {
            nodes: 500,
            tier1: 8,
            isp_fraction: 0.25,
            strict_fraction: 0.2,
            depreference_fraction: 0.1,
            selective_fraction: 0.0,
            probe_fraction: 0.3,
            collector_fraction: 0.05,
            multihome_prob: 0.5,
            origin_providers: 3,
            peer_prob: 0.02,
            ixps: 3,
            ixp_member_prob: 0.15,
            ixp_session_prob: 0.3,
            direct_fraction: 0.3,
            ixp_policy: RovPolicy::Strict,
            seed: 0,
        }
    }
}

#[derive(Debug, Clone, PartialEq, thiserror::Error)]
pub enum GenerateError {
    #[error("need at least {min} nodes for {tier1} Tier-1 ASes and two origins, got {nodes}")]
    TooFewNodes { nodes: usize, tier1: usize, min: usize },
    #[error("too many nodes for the generated address plan ({0})")]
    TooManyNodes(usize),
    #[error("fraction `{name}` = {value} is outside [0, 1]")]
    BadFraction { name: &'static str, value: f64 },
    #[error("origins need at least one provider")]
    NoOriginProviders,
    #[error("policy fractions sum to {0}, above 1")]
    PolicyOverflow(f64),
    #[error(transparent)]
    Topology(#[from] TopologyError),
}

fn router_block(index: usize, count: usize) -> Vec<Ipv4Addr> {
    let base = u32::from(Ipv4Addr::new(11, 0, 0, 0)) + ((index as u32) << 8);
    (1..=count as u32).map(|k| Ipv4Addr::from(base + k)).collect()
}

fn weighted_pick(rng: &mut ChaCha8Rng, pool: &[usize], weight: &[usize], exclude: &BTreeSet<usize>) -> Option<usize> {
    let total: usize = pool.iter().filter(|i| !exclude.contains(i)).map(|&i| weight[i]).sum();
    if total == 0 {
        return None;
    }
    let mut r = rng.random_range(0..total);
    for &i in pool {
        if exclude.contains(&i) {
            continue;
        }
        if r < weight[i] {
            return Some(i);
        }
        r -= weight[i];
    }
    None
}

impl GeneratorParams {
    fn check(&self) -> Result<(), GenerateError> {
        let min = self.tier1.max(1) + 3;
        if self.nodes < min {
            return Err(GenerateError::TooFewNodes {
                nodes: self.nodes,
                tier1: self.tier1,
                min,
            });
        }
        if self.nodes + self.ixps > 60000 || self.ixps > 255 {
            return Err(GenerateError::TooManyNodes(self.nodes));
        }
        for (name, value) in [
            ("isp_fraction", self.isp_fraction),
            ("strict_fraction", self.strict_fraction),
            ("depreference_fraction", self.depreference_fraction),
            ("selective_fraction", self.selective_fraction),
            ("probe_fraction", self.probe_fraction),
            ("collector_fraction", self.collector_fraction),
            ("multihome_prob", self.multihome_prob),
            ("peer_prob", self.peer_prob),
            ("ixp_member_prob", self.ixp_member_prob),
            ("ixp_session_prob", self.ixp_session_prob),
            ("direct_fraction", self.direct_fraction),
        ] {
            if !(0.0..=1.0).contains(&value) {
                return Err(GenerateError::BadFraction { name, value });
            }
        }
        if self.origin_providers == 0 {
            return Err(GenerateError::NoOriginProviders);
        }
        let sum = self.strict_fraction + self.depreference_fraction + self.selective_fraction;
        if sum > 1.0 + 1e-9 {
            return Err(GenerateError::PolicyOverflow(sum));
        }
        Ok(())
    }
}

pub fn generate(params: &GeneratorParams, experiment: &Experiment) -> Result<Topology, GenerateError> {
    params.check()?;
    let mut rng = ChaCha8Rng::seed_from_u64(params.seed);
    let tier1 = params.tier1.max(1);
    let others = params.nodes - tier1 - 2;
    let isps = ((others as f64) * params.isp_fraction).round() as usize;
    let stubs = others - isps;

    let mut nodes = Vec::with_capacity(params.nodes + params.ixps);
    for i in 0..tier1 {
        nodes.push(AsNode::new(Asn(BASE_ASN + i as u32), AsKind::Tier1, router_block(i, 4)));
    }
    for i in tier1..tier1 + isps {
        nodes.push(AsNode::new(Asn(BASE_ASN + i as u32), AsKind::Isp, router_block(i, 3)));
    }
    for i in tier1 + isps..tier1 + isps + stubs {
        let count = rng.random_range(1..=2);
        nodes.push(AsNode::new(Asn(BASE_ASN + i as u32), AsKind::Stub, router_block(i, count)));
    }
    let origin_idx = [nodes.len(), nodes.len() + 1];
    for (k, origin) in experiment.origins().into_iter().enumerate() {
        nodes.push(AsNode::new(origin, AsKind::Stub, router_block(origin_idx[k], 1)));
    }

    let mut sessions = Vec::new();
    let mut linked: BTreeSet<(usize, usize)> = BTreeSet::new();
    let mut link = |a: usize, b: usize| linked.insert((a.min(b), a.max(b)));
    for a in 0..tier1 {
        for b in a + 1..tier1 {
            link(a, b);
            sessions.push(PeeringSession::peers(nodes[a].asn, nodes[b].asn));
        }
    }

    // Providers are always created before their customers, so the
    // customer-provider graph is acyclic.
    let mut weight = vec![1usize; nodes.len()];
    let mut transit: Vec<usize> = (0..tier1).collect();
    let customers: Vec<usize> = (tier1..tier1 + isps + stubs).chain(origin_idx).collect();
    for c in customers {
        let mut chosen = BTreeSet::new();
        let mut want = 1;
        if origin_idx.contains(&c) {
            want = params.origin_providers;
        } else {
            while want < 3 && rng.random_bool(params.multihome_prob) {
                want += 1;
            }
        }
        while chosen.len() < want {
            match weighted_pick(&mut rng, &transit, &weight, &chosen) {
                Some(p) => {
                    chosen.insert(p);
                }
                None => break,
            }
        }
        for &p in &chosen {
            weight[p] += 1;
            link(c, p);
            sessions.push(PeeringSession::customer_of(nodes[c].asn, nodes[p].asn));
        }
        if nodes[c].kind == AsKind::Isp {
            transit.push(c);
        }
    }

    for a in tier1..tier1 + isps {
        for b in a + 1..tier1 + isps {
            if rng.random_bool(params.peer_prob) && link(a, b) {
                sessions.push(PeeringSession::peers(nodes[a].asn, nodes[b].asn));
            }
        }
    }

    let eligible: Vec<usize> = (tier1..tier1 + isps + stubs).collect();
    for k in 0..params.ixps {
        let ixp_asn = Asn(BASE_IXP_ASN + k as u32);
        let lan: Vec<Ipv4Addr> = (1..=64).map(|h| Ipv4Addr::new(185, 1, k as u8, h)).collect();
        nodes.push(AsNode::new(ixp_asn, AsKind::Ixp, lan).with_policy(params.ixp_policy));
        let members: Vec<usize> = eligible
            .iter()
            .copied()
            .filter(|_| rng.random_bool(params.ixp_member_prob))
            .collect();
        for (x, &a) in members.iter().enumerate() {
            for &b in &members[x + 1..] {
                if !rng.random_bool(params.ixp_session_prob) {
                    continue;
                }
                let kind = if rng.random_bool(params.direct_fraction) {
                    IxpSessionKind::Direct
                } else {
                    IxpSessionKind::Routeserver
                };
                if link(a, b) {
                    sessions.push(PeeringSession::peers(nodes[a].asn, nodes[b].asn).at_ixp(ixp_asn, kind));
                }
            }
        }
    }

    let mut pool: Vec<usize> = (0..tier1 + isps + stubs).collect();
    pool.shuffle(&mut rng);
    let pool_len = pool.len() as f64;
    let count = |f: f64| (pool_len * f).round() as usize;
    let (ns, nd, nsel) = (
        count(params.strict_fraction),
        count(params.depreference_fraction),
        count(params.selective_fraction),
    );
    for (rank, &i) in pool.iter().enumerate() {
        nodes[i].rov_policy = if rank < ns {
            RovPolicy::Strict
        } else if rank < ns + nd {
            RovPolicy::Depreference
        } else if rank < ns + nd + nsel {
            RovPolicy::Selective(Exemption::Customer)
        } else {
            RovPolicy::None
        };
    }

    pool.shuffle(&mut rng);
    for &i in pool.iter().take(count(params.probe_fraction)) {
        nodes[i].hosts_probe = true;
    }
    pool.shuffle(&mut rng);
    for &i in pool.iter().take(count(params.collector_fraction).max(1)) {
        nodes[i].hosts_collector = true;
    }

    Ok(Topology::new(nodes, sessions)?)
}
