use std::collections::{BTreeMap, BTreeSet};
use std::fmt;
use std::net::Ipv4Addr;
use std::str::FromStr;

use serde::{Deserialize, Deserializer, Serialize, Serializer};

use super::{Hop, IngestError, IpMappingDb, Mapped, MeasuredPath, Plane};
use crate::experiment::{Configuration, Experiment};
use crate::rpki::{validate, Asn, Prefix, Validity, Vrp};
use crate::text::{Lines, ParseMode};

/// One hop of one traceroute run: a replying address or `*`.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub enum RawHop {
    Timeout,
    Ip(Ipv4Addr),
}

impl fmt::Display for RawHop {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            RawHop::Timeout => f.write_str("*"),
            RawHop::Ip(ip) => write!(f, "{ip}"),
        }
    }
}

impl FromStr for RawHop {
    type Err = std::net::AddrParseError;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s.trim() {
            "*" => Ok(RawHop::Timeout),
            other => other.parse().map(RawHop::Ip),
        }
    }
}

impl Serialize for RawHop {
    fn serialize<S: Serializer>(&self, serializer: S) -> Result<S::Ok, S::Error> {
        serializer.collect_str(self)
    }
}

impl<'de> Deserialize<'de> for RawHop {
    fn deserialize<D: Deserializer<'de>>(deserializer: D) -> Result<Self, D::Error> {
        let s = String::deserialize(deserializer)?;
        s.parse().map_err(serde::de::Error::custom)
    }
}

/// One traceroute measurement (normally three runs) from a probe towards
/// one experiment prefix.
#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct TracerouteRecord {
    pub probe_id: String,
    pub configuration: Configuration,
    pub prefix: Prefix,
    pub runs: Vec<Vec<RawHop>>,
}

#[derive(Deserialize)]
#[serde(deny_unknown_fields)]
struct WireRecord {
    probe_id: ProbeId,
    configuration: String,
    prefix: Prefix,
    runs: Vec<Vec<RawHop>>,
}

#[derive(Deserialize)]
#[serde(untagged)]
enum ProbeId {
    Text(String),
    Number(u64),
}

pub fn parse_traceroutes(text: &str, mode: ParseMode) -> Result<Vec<TracerouteRecord>, IngestError> {
    let mut out = Vec::new();
    for item in Lines::new(text, mode) {
        let (line, record) = item.map_err(|e| IngestError::malformed(e.line, e.to_string()))?;
        let wire: WireRecord =
            serde_json::from_str(record).map_err(|e| IngestError::malformed(line, e.to_string()))?;
        let configuration = wire.configuration.parse().map_err(|_| {
            IngestError::UnknownConfigurationLabel {
                line,
                label: wire.configuration.clone(),
            }
        })?;
        if wire.runs.is_empty() {
            return Err(IngestError::malformed(line, "record has no runs"));
        }
        let probe_id = match wire.probe_id {
            ProbeId::Text(s) => s,
            ProbeId::Number(n) => n.to_string(),
        };
        out.push(TracerouteRecord {
            probe_id,
            configuration,
            prefix: wire.prefix,
            runs: wire.runs,
        });
    }
    Ok(out)
}

pub fn format_traceroutes(records: &[TracerouteRecord]) -> String {
    let mut s = String::new();
    for r in records {
        s.push_str(&serde_json::to_string(r).expect("records serialize"));
        s.push('\n');
    }
    s
}

/// The observations for one hop position across the runs that reached it.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct HopObservation {
    pub runs: Vec<RawHop>,
}

impl HopObservation {
    pub fn new(runs: Vec<RawHop>) -> Self {
        HopObservation { runs }
    }

    fn vote(&self) -> Vote {
        let mut counts: Vec<(Ipv4Addr, usize)> = Vec::new();
        for hop in &self.runs {
            if let RawHop::Ip(ip) = hop {
                match counts.iter_mut().find(|(c, _)| c == ip) {
                    Some((_, n)) => *n += 1,
                    None => counts.push((*ip, 1)),
                }
            }
        }
        if let Some((ip, _)) = counts.iter().find(|(_, n)| *n >= 2) {
            return Vote::Consensus(*ip);
        }
        match counts.as_slice() {
            [(ip, 1)] => Vote::Single(*ip),
            _ => Vote::NoConsensus,
        }
    }
}

enum Vote {
    Consensus(Ipv4Addr),
    Single(Ipv4Addr),
    NoConsensus,
}

/// Majority over the runs that answered. A hop answered by only one run is
/// taken as-is.
pub fn majority_vote(hop: &HopObservation) -> Option<Ipv4Addr> {
    match hop.vote() {
        Vote::Consensus(ip) | Vote::Single(ip) => Some(ip),
        Vote::NoConsensus => None,
    }
}

fn observations(record: &TracerouteRecord) -> Vec<HopObservation> {
    let depth = record.runs.iter().map(Vec::len).max().unwrap_or(0);
    (0..depth)
        .map(|i| HopObservation::new(record.runs.iter().filter_map(|r| r.get(i).copied()).collect()))
        .collect()
}

#[derive(Clone, Debug, Default, PartialEq, Eq)]
pub struct MappedHops {
    pub hops: Vec<Hop>,
    pub routers: Vec<(Asn, Ipv4Addr)>,
}

pub fn map_hops(ip_hops: &[Option<Ipv4Addr>], db: &IpMappingDb) -> MappedHops {
    let mut out = MappedHops::default();
    for ip in ip_hops {
        let hop = match ip.map(|ip| (ip, db.lookup(ip))) {
            Some((ip, Mapped::As(asn))) => {
                out.routers.push((asn, ip));
                Hop::As(asn)
            }
            Some((_, Mapped::Ixp(id))) => Hop::Ixp(id),
            Some((_, Mapped::Unmapped)) | None => Hop::Absent,
        };
        out.hops.push(hop);
    }
    out
}

/// Merges consecutive equal ids and drops absent runs flanked by the same
/// AS. The result is a fixed point: `condense(condense(x)) == condense(x)`.
pub fn condense(hops: &[Hop]) -> Vec<Hop> {
    let mut out: Vec<Hop> = Vec::with_capacity(hops.len());
    for &hop in hops {
        match hop {
            Hop::As(asn) => {
                let absent_tail = out.iter().rev().take_while(|h| **h == Hop::Absent).count();
                let before = out.len() - absent_tail;
                if before > 0 && out[before - 1] == Hop::As(asn) {
                    out.truncate(before);
                    continue;
                }
                out.push(hop);
            }
            Hop::Ixp(_) => {
                if out.last() != Some(&hop) {
                    out.push(hop);
                }
            }
            Hop::Absent => out.push(hop),
        }
    }
    out
}

pub fn map_and_condense(ip_hops: &[Option<Ipv4Addr>], db: &IpMappingDb) -> Vec<Hop> {
    condense(&map_hops(ip_hops, db).hops)
}

/// Maps the final responsive AS hop to a target, directly or through the
/// upstream equivalence map, and validates the reached origin.
pub fn resolve_target(
    hops: &[Hop],
    db: &IpMappingDb,
    origins: &[Asn],
    prefix: &Prefix,
    vrps: &[Vrp],
) -> (Option<Asn>, Validity) {
    let last = hops.iter().rev().find_map(Hop::asn);
    let reached = last.and_then(|asn| {
        if origins.contains(&asn) {
            Some(asn)
        } else {
            db.target_for(asn).filter(|t| origins.contains(t))
        }
    });
    match reached {
        Some(origin) => (Some(origin), validate(prefix, origin, vrps)),
        None => (None, Validity::Unknown),
    }
}

#[derive(Clone, Debug, Default, PartialEq, Eq)]
pub struct PreprocessStats {
    pub records: usize,
    pub incomplete_probes: usize,
    pub foreign_prefix_records: usize,
    pub all_unresponsive_paths: usize,
    pub unreached_paths: usize,
    pub single_run_hops: u64,
}

/// Turns raw traceroutes into data-plane paths. Probes lacking a measurement
/// to either prefix in either configuration are dropped entirely, as are
/// paths with no responsive hop.
pub fn preprocess_traceroutes(
    records: &[TracerouteRecord],
    db: &IpMappingDb,
    experiment: &Experiment,
    vrps: [&[Vrp]; 2],
) -> (Vec<MeasuredPath>, PreprocessStats) {
    let mut stats = PreprocessStats {
        records: records.len(),
        ..Default::default()
    };
    let mut coverage: BTreeMap<&str, BTreeSet<(Configuration, usize)>> = BTreeMap::new();
    for r in records {
        let entry = coverage.entry(r.probe_id.as_str()).or_default();
        if let Some(idx) = experiment.prefix_index(&r.prefix) {
            entry.insert((r.configuration, idx));
        }
    }
    let complete: BTreeSet<&str> = coverage
        .iter()
        .filter(|(_, seen)| seen.len() == 4)
        .map(|(id, _)| *id)
        .collect();
    stats.incomplete_probes = coverage.len() - complete.len();

    let origins = experiment.origins();
    let mut out = Vec::new();
    for r in records {
        if experiment.prefix_index(&r.prefix).is_none() {
            stats.foreign_prefix_records += 1;
            continue;
        }
        if !complete.contains(r.probe_id.as_str()) {
            continue;
        }
        let mut single = 0u32;
        let ips: Vec<Option<Ipv4Addr>> = observations(r)
            .iter()
            .map(|obs| match obs.vote() {
                Vote::Consensus(ip) => Some(ip),
                Vote::Single(ip) => {
                    single += 1;
                    Some(ip)
                }
                Vote::NoConsensus => None,
            })
            .collect();
        let mapped = map_hops(&ips, db);
        let hops = condense(&mapped.hops);
        if hops.iter().all(|h| *h == Hop::Absent) {
            stats.all_unresponsive_paths += 1;
            continue;
        }
        let (reached_origin, verdict) = resolve_target(
            &hops,
            db,
            &origins,
            &r.prefix,
            vrps[r.configuration.index()],
        );
        if reached_origin.is_none() {
            stats.unreached_paths += 1;
        }
        stats.single_run_hops += u64::from(single);
        out.push(MeasuredPath {
            source_id: r.probe_id.clone(),
            plane: Plane::Data,
            prefix: r.prefix,
            configuration: r.configuration,
            hops,
            reached_origin,
            verdict,
            routers: mapped.routers,
            single_run_hops: single,
        });
    }
    (out, stats)
}
