//! Small hand-built topologies with known outcomes.

use std::net::Ipv4Addr;

use super::topology::{AsKind, AsNode, IxpSessionKind, PeeringSession, RovPolicy, Topology};
use crate::experiment::{ORIGIN_A, ORIGIN_B};
use crate::rpki::Asn;

/// ASN of the exchange in [`ixp_exchange`].
pub const EXCHANGE: Asn = Asn(64700);

fn routers(block: u8, count: u8) -> Vec<Ipv4Addr> {
    (1..=count).map(|i| Ipv4Addr::new(11, 0, block, i)).collect()
}

fn fig2_nodes(policy_of_as2: RovPolicy) -> Vec<AsNode> {
    vec![
        AsNode::new(Asn(1), AsKind::Stub, routers(1, 2)).with_probe().with_collector(),
        AsNode::new(Asn(2), AsKind::Isp, routers(2, 2)).with_policy(policy_of_as2),
        AsNode::new(Asn(3), AsKind::Isp, routers(3, 2)),
        AsNode::new(ORIGIN_A, AsKind::Stub, routers(4, 1)),
        AsNode::new(ORIGIN_B, AsKind::Stub, routers(5, 1)),
    ]
}

/// Five-node hijack scenario: AS1 and AS3 hang off AS2, the first origin
/// is a direct customer of AS2 and the second sits behind AS3. AS1 hosts
/// the only probe and collector.
pub fn fig2(policy_of_as2: RovPolicy) -> Topology {
    let sessions = vec![
        PeeringSession::customer_of(Asn(1), Asn(2)),
        PeeringSession::customer_of(ORIGIN_A, Asn(2)),
        PeeringSession::customer_of(Asn(3), Asn(2)),
        PeeringSession::customer_of(ORIGIN_B, Asn(3)),
    ];
    Topology::new(fig2_nodes(policy_of_as2), sessions).expect("valid fixture")
}

/// Both origins buy transit from AS10, which peers across one Strict
/// exchange with AS20 and AS30. AS20 and AS30 host probes.
pub fn ixp_exchange(kind_20: IxpSessionKind, kind_30: IxpSessionKind) -> Topology {
    let lan = (1..=4).map(|i| Ipv4Addr::new(185, 1, 0, i)).collect();
    let nodes = vec![
        AsNode::new(Asn(10), AsKind::Isp, routers(10, 2)),
        AsNode::new(Asn(20), AsKind::Stub, routers(20, 2)).with_probe().with_collector(),
        AsNode::new(Asn(30), AsKind::Stub, routers(30, 2)).with_probe().with_collector(),
        AsNode::new(ORIGIN_A, AsKind::Stub, routers(4, 1)),
        AsNode::new(ORIGIN_B, AsKind::Stub, routers(5, 1)),
        AsNode::new(EXCHANGE, AsKind::Ixp, lan).with_policy(RovPolicy::Strict),
    ];
    let sessions = vec![
        PeeringSession::customer_of(ORIGIN_A, Asn(10)),
        PeeringSession::customer_of(ORIGIN_B, Asn(10)),
        PeeringSession::peers(Asn(10), Asn(20)).at_ixp(EXCHANGE, kind_20),
        PeeringSession::peers(Asn(10), Asn(30)).at_ixp(EXCHANGE, kind_30),
    ];
    Topology::new(nodes, sessions).expect("valid fixture")
}

/// [`ixp_exchange`] with a direct session to AS20 and a routeserver
/// session to AS30.
pub fn ixp_mixed() -> Topology {
    ixp_exchange(IxpSessionKind::Direct, IxpSessionKind::Routeserver)
}
