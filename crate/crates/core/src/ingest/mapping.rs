use std::collections::{BTreeMap, HashMap};
use std::net::Ipv4Addr;

use super::{IngestError, IxpId};
use crate::rpki::{mask, Asn, Prefix};
use crate::text::{Lines, ParseMode};

/// Longest-prefix-match table keyed by IPv4 prefix.
#[derive(Clone, Debug)]
pub struct LpmTable<V> {
    by_len: Vec<HashMap<u32, V>>,
}

impl<V> Default for LpmTable<V> {
    fn default() -> Self {
        LpmTable {
            by_len: (0..=32).map(|_| HashMap::new()).collect(),
        }
    }
}

impl<V> LpmTable<V> {
    pub fn new() -> Self {
        Self::default()
    }

    pub fn insert(&mut self, prefix: Prefix, value: V) -> Option<V> {
        self.by_len[usize::from(prefix.len())].insert(prefix.bits(), value)
    }

    pub fn lookup(&self, ip: Ipv4Addr) -> Option<(Prefix, &V)> {
        let raw = u32::from(ip);
        for len in (0..=32u8).rev() {
            let table = &self.by_len[usize::from(len)];
            if table.is_empty() {
                continue;
            }
            let key = raw & mask(len);
            if let Some(v) = table.get(&key) {
                let prefix = Prefix::new(Ipv4Addr::from(key), len).expect("masked key");
                return Some((prefix, v));
            }
        }
        None
    }

    pub fn len(&self) -> usize {
        self.by_len.iter().map(HashMap::len).sum()
    }

    pub fn is_empty(&self) -> bool {
        self.len() == 0
    }
}

/// Special-purpose space that never maps to an AS: RFC 1918, shared
/// address space, loopback, link-local and "this network".
pub fn is_unmappable(ip: Ipv4Addr) -> bool {
    let o = ip.octets();
    ip.is_private()
        || ip.is_loopback()
        || ip.is_link_local()
        || ip.is_unspecified()
        || ip.is_broadcast()
        || o[0] == 0
        || (o[0] == 100 && (o[1] & 0xc0) == 64)
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct IxpLan {
    pub id: IxpId,
    pub name: String,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Mapped {
    As(Asn),
    Ixp(IxpId),
    Unmapped,
}

/// IP to AS / IXP mapping plus the upstream-to-target equivalence map.
/// Immutable after loading.
#[derive(Clone, Debug, Default)]
pub struct IpMappingDb {
    ases: LpmTable<Asn>,
    lans: LpmTable<IxpLan>,
    equivalence: BTreeMap<Asn, Asn>,
}

impl IpMappingDb {
    pub fn new() -> Self {
        Self::default()
    }

    pub fn from_tables(
        ases: Vec<(Prefix, Asn)>,
        lans: Vec<(Prefix, IxpLan)>,
        equivalence: Vec<(Asn, Asn)>,
    ) -> Self {
        let mut db = IpMappingDb::new();
        for (p, a) in ases {
            db.ases.insert(p, a);
        }
        for (p, l) in lans {
            db.lans.insert(p, l);
        }
        db.equivalence.extend(equivalence);
        db
    }

    pub fn insert_as(&mut self, prefix: Prefix, asn: Asn) {
        self.ases.insert(prefix, asn);
    }

    pub fn insert_lan(&mut self, prefix: Prefix, lan: IxpLan) {
        self.lans.insert(prefix, lan);
    }

    pub fn insert_equivalence(&mut self, asn: Asn, target: Asn) {
        self.equivalence.insert(asn, target);
    }

    /// LAN prefixes take precedence over AS prefixes.
    pub fn lookup(&self, ip: Ipv4Addr) -> Mapped {
        if is_unmappable(ip) {
            return Mapped::Unmapped;
        }
        if let Some((_, lan)) = self.lans.lookup(ip) {
            return Mapped::Ixp(lan.id);
        }
        match self.ases.lookup(ip) {
            Some((_, asn)) => Mapped::As(*asn),
            None => Mapped::Unmapped,
        }
    }

    pub fn target_for(&self, asn: Asn) -> Option<Asn> {
        self.equivalence.get(&asn).copied()
    }

    /// IXP names keyed by id, for reports.
    pub fn ixp_names(&self) -> BTreeMap<IxpId, String> {
        let mut out = BTreeMap::new();
        for table in &self.lans.by_len {
            for lan in table.values() {
                out.entry(lan.id).or_insert_with(|| lan.name.clone());
            }
        }
        out
    }
}

fn parse_prefix(line: usize, s: &str) -> Result<Prefix, IngestError> {
    s.parse()
        .map_err(|e: crate::rpki::PrefixError| IngestError::malformed(line, e.to_string()))
}

fn parse_asn(line: usize, s: &str) -> Result<Asn, IngestError> {
    s.parse()
        .map_err(|e: crate::rpki::AsnParseError| IngestError::malformed(line, e.to_string()))
}

fn strict(e: crate::text::StrictViolation) -> IngestError {
    IngestError::malformed(e.line, e.to_string())
}

/// `prefix/len,asn`
pub fn parse_ip2as(text: &str, mode: ParseMode) -> Result<Vec<(Prefix, Asn)>, IngestError> {
    let mut out = Vec::new();
    for item in Lines::new(text, mode) {
        let (line, record) = item.map_err(strict)?;
        let (p, a) = record
            .split_once(',')
            .ok_or_else(|| IngestError::malformed(line, "expected `prefix/len,asn`"))?;
        out.push((parse_prefix(line, p)?, parse_asn(line, a)?));
    }
    Ok(out)
}

/// `prefix/len,ixp_id,ixp_name`; the name may be empty or contain commas.
pub fn parse_ixp_lans(text: &str, mode: ParseMode) -> Result<Vec<(Prefix, IxpLan)>, IngestError> {
    let mut out = Vec::new();
    for item in Lines::new(text, mode) {
        let (line, record) = item.map_err(strict)?;
        let mut fields = record.splitn(3, ',');
        let prefix = parse_prefix(line, fields.next().unwrap_or_default())?;
        let id = fields
            .next()
            .ok_or_else(|| IngestError::malformed(line, "missing ixp_id"))?
            .trim();
        let id: u32 = id
            .parse()
            .map_err(|_| IngestError::malformed(line, format!("bad ixp_id `{id}`")))?;
        let name = fields.next().unwrap_or("").trim().to_string();
        out.push((prefix, IxpLan { id: IxpId(id), name }));
    }
    Ok(out)
}

/// `asn,target_asn`
pub fn parse_target_equivalence(text: &str, mode: ParseMode) -> Result<Vec<(Asn, Asn)>, IngestError> {
    let mut out = Vec::new();
    for item in Lines::new(text, mode) {
        let (line, record) = item.map_err(strict)?;
        let (a, t) = record
            .split_once(',')
            .ok_or_else(|| IngestError::malformed(line, "expected `asn,target_asn`"))?;
        out.push((parse_asn(line, a)?, parse_asn(line, t)?));
    }
    Ok(out)
}
