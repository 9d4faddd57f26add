use std::collections::{BTreeMap, BTreeSet, HashMap, VecDeque};
use std::fmt;
use std::net::Ipv4Addr;
use std::str::FromStr;

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::rpki::Asn;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum AsKind {
    Tier1,
    Isp,
    Stub,
    Ixp,
}

impl fmt::Display for AsKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            AsKind::Tier1 => "tier1",
            AsKind::Isp => "isp",
            AsKind::Stub => "stub",
            AsKind::Ixp => "ixp",
        })
    }
}

impl FromStr for AsKind {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s.trim().to_ascii_lowercase().as_str() {
            "tier1" | "tier-1" => Ok(AsKind::Tier1),
            "isp" => Ok(AsKind::Isp),
            "stub" => Ok(AsKind::Stub),
            "ixp" => Ok(AsKind::Ixp),
            other => Err(format!("unknown AS kind `{other}`")),
        }
    }
}

/// Sessions on which a selective deployment skips ROV.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub enum Exemption {
    Customer,
}

/// How an AS treats ROV-invalid routes at import.
#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(try_from = "String", into = "String")]
pub enum RovPolicy {
    #[default]
    None,
    Strict,
    Depreference,
    Selective(Exemption),
}

impl RovPolicy {
    pub fn enforces(&self) -> bool {
        !matches!(self, RovPolicy::None)
    }
}

impl fmt::Display for RovPolicy {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            RovPolicy::None => "none",
            RovPolicy::Strict => "strict",
            RovPolicy::Depreference => "depreference",
            RovPolicy::Selective(Exemption::Customer) => "selective-customer",
        })
    }
}

impl FromStr for RovPolicy {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s.trim().to_ascii_lowercase().as_str() {
            "none" => Ok(RovPolicy::None),
            "strict" => Ok(RovPolicy::Strict),
            "depreference" | "depref" => Ok(RovPolicy::Depreference),
            "selective-customer" | "selective" => Ok(RovPolicy::Selective(Exemption::Customer)),
            other => Err(format!("unknown ROV policy `{other}`")),
        }
    }
}

impl TryFrom<String> for RovPolicy {
    type Error = String;

    fn try_from(s: String) -> Result<Self, Self::Error> {
        s.parse()
    }
}

impl From<RovPolicy> for String {
    fn from(p: RovPolicy) -> Self {
        p.to_string()
    }
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct AsNode {
    pub asn: Asn,
    pub kind: AsKind,
    #[serde(default)]
    pub rov_policy: RovPolicy,
    pub router_ips: Vec<Ipv4Addr>,
    #[serde(default)]
    pub hosts_probe: bool,
    #[serde(default)]
    pub hosts_collector: bool,
}

impl AsNode {
    pub fn new(asn: Asn, kind: AsKind, router_ips: Vec<Ipv4Addr>) -> Self {
        AsNode {
            asn,
            kind,
            rov_policy: RovPolicy::None,
            router_ips,
            hosts_probe: false,
            hosts_collector: false,
        }
    }

    pub fn with_policy(mut self, policy: RovPolicy) -> Self {
        self.rov_policy = policy;
        self
    }

    pub fn with_probe(mut self) -> Self {
        self.hosts_probe = true;
        self
    }

    pub fn with_collector(mut self) -> Self {
        self.hosts_collector = true;
        self
    }
}

/// `CustomerToProvider` means `a` buys transit from `b`.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Relationship {
    #[serde(alias = "c2p")]
    CustomerToProvider,
    #[serde(alias = "p2p")]
    PeerToPeer,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum IxpSessionKind {
    Routeserver,
    Direct,
}

impl fmt::Display for IxpSessionKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            IxpSessionKind::Routeserver => "routeserver",
            IxpSessionKind::Direct => "direct",
        })
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct IxpVia {
    pub ixp: Asn,
    pub kind: IxpSessionKind,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct PeeringSession {
    pub a: Asn,
    pub b: Asn,
    pub relationship: Relationship,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub via_ixp: Option<IxpVia>,
}

impl PeeringSession {
    pub fn customer_of(customer: Asn, provider: Asn) -> Self {
        PeeringSession {
            a: customer,
            b: provider,
            relationship: Relationship::CustomerToProvider,
            via_ixp: None,
        }
    }

    pub fn peers(a: Asn, b: Asn) -> Self {
        PeeringSession {
            a,
            b,
            relationship: Relationship::PeerToPeer,
            via_ixp: None,
        }
    }

    pub fn at_ixp(mut self, ixp: Asn, kind: IxpSessionKind) -> Self {
        self.via_ixp = Some(IxpVia { ixp, kind });
        self
    }
}

/// Role of a neighbor as seen from the local AS.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum NeighborRole {
    Customer,
    Peer,
    Provider,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct Link {
    pub session: usize,
    pub neighbor: usize,
    pub role: NeighborRole,
}

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum TopologyError {
    #[error("AS {0} declared twice")]
    DuplicateAsn(Asn),
    #[error("AS {0} has no router addresses")]
    NoRouterIps(Asn),
    #[error("router address {ip} owned by both AS {first} and AS {second}")]
    SharedRouterIp { ip: Ipv4Addr, first: Asn, second: Asn },
    #[error("session {index} references unknown AS {asn}")]
    UnknownEndpoint { index: usize, asn: Asn },
    #[error("session {index} connects AS {asn} to itself")]
    SelfSession { index: usize, asn: Asn },
    #[error("session {index} terminates on IXP {asn}; IXPs only carry sessions")]
    IxpEndpoint { index: usize, asn: Asn },
    #[error("session {index} runs via AS {asn}, which is not an IXP")]
    NotAnIxp { index: usize, asn: Asn },
    #[error("more than one session between AS {a} and AS {b} of the same kind")]
    DuplicateSession { a: Asn, b: Asn },
    #[error("IXP {0} cannot host probes or collectors")]
    IxpVantagePoint(Asn),
}

/// A validated AS-level topology with per-node adjacency.
#[derive(Clone, Debug)]
pub struct Topology {
    nodes: Vec<AsNode>,
    sessions: Vec<PeeringSession>,
    index: HashMap<Asn, usize>,
    adjacency: Vec<Vec<Link>>,
}

impl Topology {
    pub fn new(nodes: Vec<AsNode>, sessions: Vec<PeeringSession>) -> Result<Self, TopologyError> {
        let mut index = HashMap::with_capacity(nodes.len());
        let mut owners: HashMap<Ipv4Addr, Asn> = HashMap::new();
        for (i, node) in nodes.iter().enumerate() {
            if index.insert(node.asn, i).is_some() {
                return Err(TopologyError::DuplicateAsn(node.asn));
            }
            if node.router_ips.is_empty() {
                return Err(TopologyError::NoRouterIps(node.asn));
            }
            if node.kind == AsKind::Ixp && (node.hosts_probe || node.hosts_collector) {
                return Err(TopologyError::IxpVantagePoint(node.asn));
            }
            for ip in &node.router_ips {
                if let Some(first) = owners.insert(*ip, node.asn) {
                    if first != node.asn {
                        return Err(TopologyError::SharedRouterIp {
                            ip: *ip,
                            first,
                            second: node.asn,
                        });
                    }
                }
            }
        }

        let mut adjacency = vec![Vec::new(); nodes.len()];
        let mut seen = BTreeSet::new();
        for (si, s) in sessions.iter().enumerate() {
            let lookup = |asn: Asn| {
                index
                    .get(&asn)
                    .copied()
                    .ok_or(TopologyError::UnknownEndpoint { index: si, asn })
            };
            let (ia, ib) = (lookup(s.a)?, lookup(s.b)?);
            if ia == ib {
                return Err(TopologyError::SelfSession { index: si, asn: s.a });
            }
            for (i, asn) in [(ia, s.a), (ib, s.b)] {
                if nodes[i].kind == AsKind::Ixp {
                    return Err(TopologyError::IxpEndpoint { index: si, asn });
                }
            }
            if let Some(via) = s.via_ixp {
                let ix = lookup(via.ixp)?;
                if nodes[ix].kind != AsKind::Ixp {
                    return Err(TopologyError::NotAnIxp {
                        index: si,
                        asn: via.ixp,
                    });
                }
            }
            let key = (s.a.min(s.b), s.a.max(s.b), s.via_ixp.map(|v| v.kind));
            if !seen.insert(key) {
                return Err(TopologyError::DuplicateSession { a: key.0, b: key.1 });
            }
            let (role_of_b, role_of_a) = match s.relationship {
                Relationship::CustomerToProvider => (NeighborRole::Provider, NeighborRole::Customer),
                Relationship::PeerToPeer => (NeighborRole::Peer, NeighborRole::Peer),
            };
            adjacency[ia].push(Link {
                session: si,
                neighbor: ib,
                role: role_of_b,
            });
            adjacency[ib].push(Link {
                session: si,
                neighbor: ia,
                role: role_of_a,
            });
        }
        for links in &mut adjacency {
            links.sort_by_key(|l| (nodes[l.neighbor].asn, l.session));
        }
        Ok(Topology {
            nodes,
            sessions,
            index,
            adjacency,
        })
    }

    pub fn nodes(&self) -> &[AsNode] {
        &self.nodes
    }

    pub fn sessions(&self) -> &[PeeringSession] {
        &self.sessions
    }

    pub fn node(&self, idx: usize) -> &AsNode {
        &self.nodes[idx]
    }

    pub fn index_of(&self, asn: Asn) -> Option<usize> {
        self.index.get(&asn).copied()
    }

    pub fn get(&self, asn: Asn) -> Option<&AsNode> {
        self.index_of(asn).map(|i| &self.nodes[i])
    }

    pub fn links(&self, idx: usize) -> &[Link] {
        &self.adjacency[idx]
    }

    pub fn session(&self, idx: usize) -> &PeeringSession {
        &self.sessions[idx]
    }

    /// Node indices in ascending ASN order.
    pub fn ordered(&self) -> Vec<usize> {
        let mut v: Vec<usize> = (0..self.nodes.len()).collect();
        v.sort_by_key(|&i| self.nodes[i].asn);
        v
    }

    /// ASes (IXPs excluded) that cannot reach `from` over sessions,
    /// ignoring routing policy.
    pub fn unreachable_from(&self, from: Asn) -> Vec<Asn> {
        let Some(start) = self.index_of(from) else {
            return Vec::new();
        };
        let mut seen = vec![false; self.nodes.len()];
        let mut queue = VecDeque::from([start]);
        seen[start] = true;
        while let Some(v) = queue.pop_front() {
            for l in &self.adjacency[v] {
                if !seen[l.neighbor] {
                    seen[l.neighbor] = true;
                    queue.push_back(l.neighbor);
                }
            }
        }
        let mut out: Vec<Asn> = self
            .nodes
            .iter()
            .zip(&seen)
            .filter(|(n, s)| !**s && n.kind != AsKind::Ixp)
            .map(|(n, _)| n.asn)
            .collect();
        out.sort();
        out
    }

    pub fn ground_truth(&self) -> BTreeMap<Asn, RovPolicy> {
        self.nodes
            .iter()
            .filter(|n| n.kind != AsKind::Ixp)
            .map(|n| (n.asn, n.rov_policy))
            .collect()
    }
}
