//! Parsing of raw measurement exports and the preprocessing that turns them
//! into [`MeasuredPath`] values.

mod control;
mod mapping;
mod traceroute;

use std::fmt;
use std::net::Ipv4Addr;

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::experiment::Configuration;
use crate::rpki::{Asn, Prefix, Validity};

pub use control::{format_control_dump, load_control_dump, parse_control_dump, ControlRecord};
pub use mapping::{
    is_unmappable, parse_ip2as, parse_ixp_lans, parse_target_equivalence, IpMappingDb, IxpLan,
    LpmTable, Mapped,
};
pub use traceroute::{
    condense, format_traceroutes, majority_vote, map_and_condense, map_hops, parse_traceroutes,
    preprocess_traceroutes, resolve_target, HopObservation, MappedHops, PreprocessStats, RawHop,
    TracerouteRecord,
};

/// IXP identifier from the peering-LAN dataset. Shown negated in hop lists.
#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(transparent)]
pub struct IxpId(pub u32);

impl fmt::Display for IxpId {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}", self.0)
    }
}

/// One condensed hop: an AS, an IXP peering LAN, or an unresponsive /
/// unmappable hop.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum Hop {
    As(Asn),
    Ixp(IxpId),
    Absent,
}

impl Hop {
    pub fn asn(&self) -> Option<Asn> {
        match self {
            Hop::As(a) => Some(*a),
            _ => None,
        }
    }

    /// Signed id as used in exported hop lists: ASNs positive, IXPs negative.
    pub fn signed(&self) -> Option<i64> {
        match self {
            Hop::As(a) => Some(i64::from(a.0)),
            Hop::Ixp(i) => Some(-i64::from(i.0)),
            Hop::Absent => None,
        }
    }
}

impl fmt::Display for Hop {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self.signed() {
            Some(v) => write!(f, "{v}"),
            None => f.write_str("*"),
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Plane {
    Control,
    Data,
}

impl fmt::Display for Plane {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Plane::Control => "control",
            Plane::Data => "data",
        })
    }
}

/// A preprocessed AS-level path from a probe (data plane) or collector
/// (control plane).
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct MeasuredPath {
    pub source_id: String,
    pub plane: Plane,
    pub prefix: Prefix,
    pub configuration: Configuration,
    pub hops: Vec<Hop>,
    pub reached_origin: Option<Asn>,
    pub verdict: Validity,
    /// Responsive router addresses and the AS they map to.
    pub routers: Vec<(Asn, Ipv4Addr)>,
    /// Hops accepted on a single responsive run out of three.
    pub single_run_hops: u32,
}

impl MeasuredPath {
    /// Positive hops in order, IXP and absent hops removed.
    pub fn as_sequence(&self) -> Vec<Asn> {
        self.hops.iter().filter_map(Hop::asn).collect()
    }

    pub fn contains(&self, asn: Asn) -> bool {
        self.hops.contains(&Hop::As(asn))
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum IngestError {
    #[error("line {line}: malformed record: {message}")]
    MalformedRecord { line: usize, message: String },
    #[error("line {line}: unknown configuration label `{label}`")]
    UnknownConfigurationLabel { line: usize, label: String },
}

impl IngestError {
    pub(crate) fn malformed(line: usize, message: impl Into<String>) -> Self {
        IngestError::MalformedRecord {
            line,
            message: message.into(),
        }
    }
}
