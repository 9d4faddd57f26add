//! IPv4 prefixes, validated ROA payloads and the route origin validation
//! verdict.
//!
//! Matching follows RFC 6811: a VRP covers an announcement when the first
//! `vrp.prefix.len` bits agree and the announcement is at least as specific.
//! A covered announcement is valid when some covering VRP names the origin
//! and permits the announced length.

use std::fmt;
use std::net::Ipv4Addr;
use std::str::FromStr;

use serde::{Deserialize, Deserializer, Serialize, Serializer};
use thiserror::Error;

use crate::text::{Lines, ParseMode};

/// An autonomous system number. Zero is reserved and never a valid origin.
#[derive(Clone, Copy, Debug, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(transparent)]
pub struct Asn(pub u32);

impl Asn {
    pub fn get(self) -> u32 {
        self.0
    }
}

impl fmt::Display for Asn {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}", self.0)
    }
}

impl FromStr for Asn {
    type Err = AsnParseError;

    /// Accepts `212795` as well as `AS212795`.
    fn from_str(s: &str) -> Result<Self, Self::Err> {
        let s = s.trim();
        let digits = s
            .strip_prefix("AS")
            .or_else(|| s.strip_prefix("as"))
            .unwrap_or(s);
        let value: u32 = digits
            .parse()
            .map_err(|_| AsnParseError(s.to_string()))?;
        if value == 0 {
            return Err(AsnParseError(s.to_string()));
        }
        Ok(Asn(value))
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Error)]
#[error("invalid AS number `{0}`")]
pub struct AsnParseError(String);

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum PrefixError {
    #[error("prefix length {0} exceeds 32")]
    LengthOutOfRange(u8),
    #[error("host bits set in {addr}/{len}")]
    HostBitsSet { addr: Ipv4Addr, len: u8 },
    #[error("malformed prefix `{0}`")]
    Malformed(String),
}

/// An IPv4 prefix with all host bits cleared.
#[derive(Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct Prefix {
    addr: u32,
    len: u8,
}

impl Prefix {
    pub fn new(addr: Ipv4Addr, len: u8) -> Result<Self, PrefixError> {
        if len > 32 {
            return Err(PrefixError::LengthOutOfRange(len));
        }
        let raw = u32::from(addr);
        if raw & !mask(len) != 0 {
            return Err(PrefixError::HostBitsSet { addr, len });
        }
        Ok(Prefix { addr: raw, len })
    }

    /// Builds the prefix of length `len` containing `addr`, clearing host bits.
    pub fn truncating(addr: Ipv4Addr, len: u8) -> Result<Self, PrefixError> {
        if len > 32 {
            return Err(PrefixError::LengthOutOfRange(len));
        }
        Ok(Prefix {
            addr: u32::from(addr) & mask(len),
            len,
        })
    }

    pub fn host(addr: Ipv4Addr) -> Self {
        Prefix {
            addr: u32::from(addr),
            len: 32,
        }
    }

    pub fn addr(&self) -> Ipv4Addr {
        Ipv4Addr::from(self.addr)
    }

    pub fn bits(&self) -> u32 {
        self.addr
    }

    pub fn len(&self) -> u8 {
        self.len
    }

    pub fn is_empty(&self) -> bool {
        self.len == 0 && self.addr == 0
    }

    pub fn contains(&self, ip: Ipv4Addr) -> bool {
        u32::from(ip) & mask(self.len) == self.addr
    }

    /// True when `other` lies inside `self` (equal or more specific).
    pub fn covers(&self, other: &Prefix) -> bool {
        other.len >= self.len && other.addr & mask(self.len) == self.addr
    }

    /// Number of addresses in the prefix.
    pub fn size(&self) -> u64 {
        1u64 << (32 - u32::from(self.len))
    }

    /// The `index`-th address of the prefix, wrapping inside it.
    pub fn nth(&self, index: u64) -> Ipv4Addr {
        let offset = (index % self.size()) as u32;
        Ipv4Addr::from(self.addr | offset)
    }
}

pub(crate) fn mask(len: u8) -> u32 {
    if len == 0 {
        0
    } else {
        u32::MAX << (32 - u32::from(len))
    }
}

impl fmt::Display for Prefix {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}/{}", self.addr(), self.len)
    }
}

impl fmt::Debug for Prefix {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        fmt::Display::fmt(self, f)
    }
}

impl FromStr for Prefix {
    type Err = PrefixError;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        let s = s.trim();
        let (addr, len) = s
            .split_once('/')
            .ok_or_else(|| PrefixError::Malformed(s.to_string()))?;
        let addr: Ipv4Addr = addr
            .parse()
            .map_err(|_| PrefixError::Malformed(s.to_string()))?;
        if len.is_empty() || len.len() > 2 || !len.bytes().all(|b| b.is_ascii_digit()) {
            return Err(PrefixError::Malformed(s.to_string()));
        }
        let len: u8 = len
            .parse()
            .map_err(|_| PrefixError::Malformed(s.to_string()))?;
        Prefix::new(addr, len)
    }
}

impl Serialize for Prefix {
    fn serialize<S: Serializer>(&self, serializer: S) -> Result<S::Ok, S::Error> {
        serializer.collect_str(self)
    }
}

impl<'de> Deserialize<'de> for Prefix {
    fn deserialize<D: Deserializer<'de>>(deserializer: D) -> Result<Self, D::Error> {
        let s = String::deserialize(deserializer)?;
        s.parse().map_err(serde::de::Error::custom)
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum VrpError {
    #[error("max length {max_length} outside {prefix_len}..=32")]
    MaxLength { prefix_len: u8, max_length: u8 },
    #[error("origin AS 0 is not a valid VRP origin")]
    ZeroOrigin,
}

/// A validated ROA payload: `(prefix, max_length, origin)`.
#[derive(Clone, Copy, Debug, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
pub struct Vrp {
    prefix: Prefix,
    max_length: u8,
    origin: Asn,
}

impl Vrp {
    pub fn new(prefix: Prefix, max_length: u8, origin: Asn) -> Result<Self, VrpError> {
        if max_length < prefix.len() || max_length > 32 {
            return Err(VrpError::MaxLength {
                prefix_len: prefix.len(),
                max_length,
            });
        }
        if origin.0 == 0 {
            return Err(VrpError::ZeroOrigin);
        }
        Ok(Vrp {
            prefix,
            max_length,
            origin,
        })
    }

    /// A VRP whose max length equals the prefix length.
    pub fn exact(prefix: Prefix, origin: Asn) -> Result<Self, VrpError> {
        Vrp::new(prefix, prefix.len(), origin)
    }

    pub fn prefix(&self) -> Prefix {
        self.prefix
    }

    pub fn max_length(&self) -> u8 {
        self.max_length
    }

    pub fn origin(&self) -> Asn {
        self.origin
    }
}

impl fmt::Display for Vrp {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{},{},{}", self.prefix, self.max_length, self.origin)
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Error)]
#[error("a ROA must authorize at least one prefix")]
pub struct EmptyRoa;

/// VRPs published under one signing identity.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Roa {
    label: String,
    authorized: Vec<Vrp>,
}

impl Roa {
    pub fn new(label: impl Into<String>, authorized: Vec<Vrp>) -> Result<Self, EmptyRoa> {
        if authorized.is_empty() {
            return Err(EmptyRoa);
        }
        Ok(Roa {
            label: label.into(),
            authorized,
        })
    }

    pub fn label(&self) -> &str {
        &self.label
    }

    pub fn authorized(&self) -> &[Vrp] {
        &self.authorized
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Validity {
    Valid,
    Invalid,
    Unknown,
}

impl fmt::Display for Validity {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Validity::Valid => "valid",
            Validity::Invalid => "invalid",
            Validity::Unknown => "unknown",
        })
    }
}

pub fn covers(vrp: &Vrp, announced: &Prefix) -> bool {
    vrp.prefix.covers(announced)
}

pub fn validate<'a, I>(announced: &Prefix, origin: Asn, vrps: I) -> Validity
where
    I: IntoIterator<Item = &'a Vrp>,
{
    let mut covered = false;
    for vrp in vrps {
        if !covers(vrp, announced) {
            continue;
        }
        if vrp.origin == origin && announced.len() <= vrp.max_length {
            return Validity::Valid;
        }
        covered = true;
    }
    if covered {
        Validity::Invalid
    } else {
        Validity::Unknown
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum VrpFileError {
    #[error("line {line}: {message}")]
    Malformed { line: usize, message: String },
}

/// Parses `prefix/len,max_length,asn` records. An empty or missing max
/// length defaults to the prefix length.
pub fn parse_vrps(text: &str, mode: ParseMode) -> Result<Vec<Vrp>, VrpFileError> {
    let mut out = Vec::new();
    for item in Lines::new(text, mode) {
        let (line, record) = item.map_err(|e| VrpFileError::Malformed {
            line: e.line,
            message: e.to_string(),
        })?;
        let bad = |message: String| VrpFileError::Malformed { line, message };
        let fields: Vec<&str> = record.split(',').map(str::trim).collect();
        let (prefix, max_length, asn) = match fields.as_slice() {
            [p, a] => (*p, "", *a),
            [p, m, a] => (*p, *m, *a),
            _ => return Err(bad(format!("expected 2 or 3 fields, got {}", fields.len()))),
        };
        let prefix: Prefix = prefix.parse().map_err(|e: PrefixError| bad(e.to_string()))?;
        let max_length = if max_length.is_empty() {
            prefix.len()
        } else {
            max_length
                .parse()
                .map_err(|_| bad(format!("bad max length `{max_length}`")))?
        };
        let asn: Asn = asn.parse().map_err(|e: AsnParseError| bad(e.to_string()))?;
        out.push(Vrp::new(prefix, max_length, asn).map_err(|e| bad(e.to_string()))?);
    }
    Ok(out)
}

pub fn format_vrps(vrps: &[Vrp]) -> String {
    let mut s = String::new();
    for vrp in vrps {
        s.push_str(&vrp.to_string());
        s.push('\n');
    }
    s
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    fn p(s: &str) -> Prefix {
        s.parse().unwrap()
    }

    fn vrp(s: &str, max: u8, asn: u32) -> Vrp {
        Vrp::new(p(s), max, Asn(asn)).unwrap()
    }

    /// Independent oracle: compare the leading bits one at a time.
    fn oracle_covers(vrp_addr: [u8; 4], vrp_len: u8, ann_addr: [u8; 4], ann_len: u8) -> bool {
        if ann_len < vrp_len {
            return false;
        }
        (0..vrp_len as usize).all(|i| {
            let bit = |a: [u8; 4]| (a[i / 8] >> (7 - i % 8)) & 1;
            bit(vrp_addr) == bit(ann_addr)
        })
    }

    #[test]
    fn prefix_rejects_host_bits() {
        assert!(matches!(
            "45.155.129.1/24".parse::<Prefix>(),
            Err(PrefixError::HostBitsSet { .. })
        ));
        assert!(matches!(
            "10.0.0.0/33".parse::<Prefix>(),
            Err(PrefixError::LengthOutOfRange(33))
        ));
        assert!("0.0.0.0/0".parse::<Prefix>().is_ok());
        assert!("1.2.3.4".parse::<Prefix>().is_err());
        assert!("1.2.3.0/+8".parse::<Prefix>().is_err());
    }

    #[test]
    fn covers_examples() {
        let v = vrp("45.155.129.0/24", 24, 1);
        assert!(covers(&v, &p("45.155.129.0/24")));
        assert!(!covers(&v, &p("45.155.131.0/24")));
        let wide = vrp("45.155.128.0/22", 24, 1);
        let ann = p("45.155.129.0/24");
        assert!(covers(&wide, &ann));
        assert_eq!(
            covers(&wide, &ann),
            oracle_covers([45, 155, 128, 0], 22, [45, 155, 129, 0], 24)
        );
    }

    #[test]
    fn validate_examples() {
        let set = [vrp("45.155.129.0/24", 24, 212795)];
        assert_eq!(validate(&p("45.155.129.0/24"), Asn(212795), &set), Validity::Valid);
        assert_eq!(validate(&p("45.155.129.0/24"), Asn(208162), &set), Validity::Invalid);
        assert_eq!(validate(&p("45.155.200.0/24"), Asn(212795), &set), Validity::Unknown);
        // Every /25 below the /24 exceeds the max length.
        for half in [p("45.155.129.0/25"), p("45.155.129.128/25")] {
            assert_eq!(validate(&half, Asn(212795), &set), Validity::Invalid);
        }
    }

    #[test]
    fn overlapping_vrps_disjunction() {
        let set = [vrp("10.0.0.0/8", 8, 1), vrp("10.1.0.0/16", 24, 2)];
        assert_eq!(validate(&p("10.1.2.0/24"), Asn(2), &set), Validity::Valid);
        assert_eq!(validate(&p("10.1.2.0/24"), Asn(1), &set), Validity::Invalid);
        assert_eq!(validate(&p("10.0.0.0/8"), Asn(1), &set), Validity::Valid);
    }

    #[test]
    fn vrp_invariants() {
        assert!(Vrp::new(p("10.0.0.0/16"), 15, Asn(1)).is_err());
        assert!(Vrp::new(p("10.0.0.0/16"), 33, Asn(1)).is_err());
        assert_eq!(Vrp::new(p("10.0.0.0/16"), 16, Asn(0)), Err(VrpError::ZeroOrigin));
        assert!(Roa::new("x", vec![]).is_err());
    }

    #[test]
    fn vrp_file_defaults_max_length() {
        let text = "# comment\n45.155.129.0/24,,212795\n\n45.155.131.0/24,208162\n10.0.0.0/8,24,AS65000\n";
        let vrps = parse_vrps(text, ParseMode::Lenient).unwrap();
        assert_eq!(vrps.len(), 3);
        assert_eq!(vrps[0].max_length(), 24);
        assert_eq!(vrps[1].origin(), Asn(208162));
        assert_eq!(vrps[2].max_length(), 24);
        assert!(parse_vrps(text, ParseMode::Strict).is_err());
        let err = parse_vrps("10.0.0.0/8,7,1\n", ParseMode::Lenient).unwrap_err();
        assert!(err.to_string().starts_with("line 1"));
    }

    proptest! {
        #[test]
        fn covers_matches_bit_oracle(a in any::<[u8; 4]>(), al in 0u8..=32, b in any::<[u8; 4]>(), bl in 0u8..=32) {
            let vp = Prefix::truncating(Ipv4Addr::from(a), al).unwrap();
            let ann = Prefix::truncating(Ipv4Addr::from(b), bl).unwrap();
            let v = Vrp::new(vp, 32, Asn(1)).unwrap();
            prop_assert_eq!(
                covers(&v, &ann),
                oracle_covers(vp.addr().octets(), al, ann.addr().octets(), bl)
            );
        }

        #[test]
        fn adding_vrp_never_turns_valid_into_unknown(
            base in proptest::collection::vec((any::<u16>(), 16u8..=24, 16u8..=28, 1u32..4), 0..5),
            extra in (any::<u16>(), 16u8..=24, 16u8..=28, 1u32..4),
            ann in (any::<u16>(), 16u8..=28, 1u32..4),
        ) {
            let mk = |(hi, len, max, asn): (u16, u8, u8, u32)| {
                let pf = Prefix::truncating(Ipv4Addr::from(u32::from(hi) << 16 | 0x8000), len).unwrap();
                Vrp::new(pf, max.max(len), Asn(asn)).unwrap()
            };
            let mut set: Vec<Vrp> = base.into_iter().map(mk).collect();
            let announced = Prefix::truncating(Ipv4Addr::from(u32::from(ann.0) << 16), ann.1).unwrap();
            let before = validate(&announced, Asn(ann.2), &set);
            set.push(mk(extra));
            let after = validate(&announced, Asn(ann.2), &set);
            if before == Validity::Valid {
                prop_assert_eq!(after, Validity::Valid);
            }
            if before != Validity::Unknown {
                prop_assert_ne!(after, Validity::Unknown);
            }
        }

        #[test]
        fn prefix_display_round_trips(a in any::<[u8; 4]>(), len in 0u8..=32) {
            let pf = Prefix::truncating(Ipv4Addr::from(a), len).unwrap();
            prop_assert_eq!(pf.to_string().parse::<Prefix>().unwrap(), pf);
        }
    }
}
