//! Round-based best-route iteration under Gao-Rexford preferences and
//! per-AS ROV import policies.

use std::cmp::Ordering;

use super::topology::{AsKind, IxpSessionKind, NeighborRole, RovPolicy, Topology};
use super::SimError;
use crate::experiment::Experiment;
use crate::rpki::{validate, Asn, Prefix, Validity, Vrp};

pub const LOCAL_PREF_CUSTOMER: i32 = 300;
pub const LOCAL_PREF_PEER: i32 = 200;
pub const LOCAL_PREF_PROVIDER: i32 = 100;
pub const DEPREFERENCE_PENALTY: i32 = 150;
const LOCAL_PREF_SELF: i32 = 1000;

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct RibEntry {
    pub prefix: Prefix,
    /// Starts with the holding AS and ends with the origin.
    pub as_path: Vec<Asn>,
    pub origin: Asn,
    /// Session index; `None` for self-originated routes.
    pub learned_from: Option<usize>,
    /// Role of the neighbor the route was learned from.
    pub learned_role: Option<NeighborRole>,
    pub verdict: Validity,
    pub local_pref: i32,
    /// Accepted with a depreference penalty. Such routes rank below every
    /// unpenalized route regardless of relationship.
    pub depreferenced: bool,
}

impl RibEntry {
    pub fn next_hop(&self) -> Option<Asn> {
        self.as_path.get(1).copied()
    }
}

/// Best route per node (indexed like [`Topology::nodes`]) for both
/// experiment prefixes.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct ConvergedState {
    pub prefixes: [Prefix; 2],
    pub origins: [Asn; 2],
    pub ribs: [Vec<Option<RibEntry>>; 2],
    pub rounds: [usize; 2],
}

impl ConvergedState {
    pub fn best(&self, prefix_idx: usize, node: usize) -> Option<&RibEntry> {
        self.ribs[prefix_idx][node].as_ref()
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
enum Admission {
    Reject,
    Accept { penalty: i32 },
}

fn admit(policy: RovPolicy, verdict: Validity, sender_is_customer: bool) -> Admission {
    if verdict != Validity::Invalid {
        return Admission::Accept { penalty: 0 };
    }
    match policy {
        RovPolicy::None => Admission::Accept { penalty: 0 },
        RovPolicy::Strict => Admission::Reject,
        RovPolicy::Depreference => Admission::Accept {
            penalty: DEPREFERENCE_PENALTY,
        },
        RovPolicy::Selective(_) if sender_is_customer => Admission::Accept { penalty: 0 },
        RovPolicy::Selective(_) => Admission::Reject,
    }
}

fn base_pref(role: NeighborRole) -> i32 {
    match role {
        NeighborRole::Customer => LOCAL_PREF_CUSTOMER,
        NeighborRole::Peer => LOCAL_PREF_PEER,
        NeighborRole::Provider => LOCAL_PREF_PROVIDER,
    }
}

/// Gao-Rexford export: customer and self routes go everywhere, peer and
/// provider routes only to customers.
pub fn exports(route_role: Option<NeighborRole>, receiver_role: NeighborRole) -> bool {
    matches!(route_role, None | Some(NeighborRole::Customer)) || receiver_role == NeighborRole::Customer
}

struct Candidate {
    entry: RibEntry,
    neighbor_asn: Asn,
    session: usize,
}

fn better(a: &Candidate, b: &Candidate) -> Ordering {
    a.entry
        .depreferenced
        .cmp(&b.entry.depreferenced)
        .then(b.entry.local_pref.cmp(&a.entry.local_pref))
        .then(a.entry.as_path.len().cmp(&b.entry.as_path.len()))
        .then(a.neighbor_asn.cmp(&b.neighbor_asn))
        .then(a.session.cmp(&b.session))
}

fn role_of(topology: &Topology, holder: usize, neighbor: usize, session: usize) -> NeighborRole {
    topology
        .links(holder)
        .iter()
        .find(|l| l.neighbor == neighbor && l.session == session)
        .map(|l| l.role)
        .expect("link exists for session")
}

fn select(
    topology: &Topology,
    prev: &[Option<RibEntry>],
    v: usize,
    prefix: Prefix,
    verdict_of: &dyn Fn(Asn) -> Validity,
) -> Option<RibEntry> {
    let node = topology.node(v);
    let mut best: Option<Candidate> = None;
    for link in topology.links(v) {
        let Some(route) = prev[link.neighbor].as_ref() else {
            continue;
        };
        // Role of v as seen from the sender.
        let v_role_at_sender = role_of(topology, link.neighbor, v, link.session);
        if !exports(route.learned_role, v_role_at_sender) {
            continue;
        }
        if route.as_path.contains(&node.asn) {
            continue;
        }
        let verdict = verdict_of(route.origin);
        let sender_is_customer = link.role == NeighborRole::Customer;
        let mut penalty = 0;
        let session = topology.session(link.session);
        if let Some(via) = session.via_ixp.filter(|v| v.kind == IxpSessionKind::Routeserver) {
            let ixp_policy = topology.get(via.ixp).map(|n| n.rov_policy).unwrap_or_default();
            match admit(ixp_policy, verdict, false) {
                Admission::Reject => continue,
                Admission::Accept { penalty: p } => penalty = penalty.max(p),
            }
        }
        match admit(node.rov_policy, verdict, sender_is_customer) {
            Admission::Reject => continue,
            Admission::Accept { penalty: p } => penalty = penalty.max(p),
        }
        let mut as_path = Vec::with_capacity(route.as_path.len() + 1);
        as_path.push(node.asn);
        as_path.extend_from_slice(&route.as_path);
        let cand = Candidate {
            entry: RibEntry {
                prefix,
                as_path,
                origin: route.origin,
                learned_from: Some(link.session),
                learned_role: Some(link.role),
                verdict,
                local_pref: base_pref(link.role) - penalty,
                depreferenced: penalty > 0,
            },
            neighbor_asn: topology.node(link.neighbor).asn,
            session: link.session,
        };
        if best.as_ref().is_none_or(|b| better(&cand, b) == Ordering::Less) {
            best = Some(cand);
        }
    }
    best.map(|c| c.entry)
}

/// Runs one prefix to a fixed point. `max_rounds` defaults to twice the node
/// count.
pub fn converge_prefix(
    topology: &Topology,
    prefix: Prefix,
    origins: &[Asn],
    vrps: &[Vrp],
    max_rounds: Option<usize>,
) -> Result<(Vec<Option<RibEntry>>, usize), SimError> {
    let mut origin_idx = Vec::new();
    for &o in origins {
        let idx = topology.index_of(o).ok_or(SimError::UnknownOrigin(o))?;
        if topology.node(idx).kind == AsKind::Ixp {
            return Err(SimError::IxpOrigin(o));
        }
        origin_idx.push(idx);
    }
    let verdicts: Vec<(Asn, Validity)> = origins.iter().map(|&o| (o, validate(&prefix, o, vrps))).collect();
    let verdict_of = |asn: Asn| {
        verdicts
            .iter()
            .find(|(o, _)| *o == asn)
            .map(|(_, v)| *v)
            .unwrap_or(Validity::Unknown)
    };

    let n = topology.nodes().len();
    let mut state: Vec<Option<RibEntry>> = vec![None; n];
    for &i in &origin_idx {
        let asn = topology.node(i).asn;
        state[i] = Some(RibEntry {
            prefix,
            as_path: vec![asn],
            origin: asn,
            learned_from: None,
            learned_role: None,
            verdict: verdict_of(asn),
            local_pref: LOCAL_PREF_SELF,
            depreferenced: false,
        });
    }
    let order = topology.ordered();
    let cap = max_rounds.unwrap_or(2 * n).max(1);
    // Each round sweeps the nodes in ascending ASN order and updates in
    // place, so later nodes see earlier nodes' choices from the same round.
    // Fully simultaneous updates oscillate on depreference cycles that have
    // a stable solution.
    for round in 1..=cap {
        let mut changed = false;
        for &v in &order {
            if origin_idx.contains(&v) || topology.node(v).kind == AsKind::Ixp {
                continue;
            }
            let chosen = select(topology, &state, v, prefix, &verdict_of);
            if chosen != state[v] {
                state[v] = chosen;
                changed = true;
            }
        }
        if !changed {
            return Ok((state, round));
        }
    }
    Err(SimError::NonConvergence { prefix, rounds: cap })
}

pub fn converge(
    topology: &Topology,
    experiment: &Experiment,
    vrps: &[Vrp],
    max_rounds: Option<usize>,
) -> Result<ConvergedState, SimError> {
    let prefixes = experiment.prefixes();
    let origins = experiment.origins();
    let (r0, n0) = converge_prefix(topology, prefixes[0], &origins, vrps, max_rounds)?;
    let (r1, n1) = converge_prefix(topology, prefixes[1], &origins, vrps, max_rounds)?;
    Ok(ConvergedState {
        prefixes,
        origins,
        ribs: [r0, r1],
        rounds: [n0, n1],
    })
}

/// Checks every selected route against the export rule it was learned
/// under. A violation means the simulator itself is broken.
pub fn check_export_safety(topology: &Topology, state: &ConvergedState) -> Result<(), SimError> {
    for (pi, rib) in state.ribs.iter().enumerate() {
        for (v, entry) in rib.iter().enumerate() {
            let Some(entry) = entry else { continue };
            let Some(session) = entry.learned_from else { continue };
            let link = topology
                .links(v)
                .iter()
                .find(|l| l.session == session)
                .expect("learned over own session");
            let sender = rib[link.neighbor]
                .as_ref()
                .ok_or(SimError::ExportViolation {
                    prefix: state.prefixes[pi],
                    at: topology.node(v).asn,
                })?;
            let v_role_at_sender = role_of(topology, link.neighbor, v, session);
            if !exports(sender.learned_role, v_role_at_sender) || sender.as_path[..] != entry.as_path[1..] {
                return Err(SimError::ExportViolation {
                    prefix: state.prefixes[pi],
                    at: topology.node(v).asn,
                });
            }
        }
    }
    Ok(())
}
