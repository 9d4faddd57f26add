//! Text export of path graphs: `asn1,asn2,kind,ixp_id,valid,invalid` per
//! edge, `asn` alone for a vertex without edges.

use std::collections::BTreeSet;
use std::fmt::Write as _;

use thiserror::Error;

use super::{EdgeKind, PathGraph};
use crate::ingest::IxpId;
use crate::rpki::Asn;
use crate::text::{Lines, ParseMode};

#[derive(Debug, Clone, PartialEq, Eq, Error)]
#[error("edge list line {line}: {message}")]
pub struct EdgeListError {
    pub line: usize,
    pub message: String,
}

fn err(line: usize, message: impl Into<String>) -> EdgeListError {
    EdgeListError {
        line,
        message: message.into(),
    }
}

pub fn format_edge_list(g: &PathGraph) -> String {
    let mut s = String::new();
    let mut touched = BTreeSet::new();
    for ((a, b), e) in g.edges() {
        touched.insert(*a);
        touched.insert(*b);
        let ixp = match e.kind {
            EdgeKind::Direct => String::new(),
            EdgeKind::Indirect(id) => id.to_string(),
        };
        let _ = writeln!(s, "{},{},{},{},{},{}", a.0, b.0, e.kind, ixp, e.valid, e.invalid);
    }
    for v in g.vertices().difference(&touched) {
        let _ = writeln!(s, "{}", v.0);
    }
    s
}

pub fn parse_edge_list(text: &str, mode: ParseMode) -> Result<PathGraph, EdgeListError> {
    let mut g = PathGraph::new();
    for item in Lines::new(text, mode) {
        let (line, record) = item.map_err(|e| err(e.line, e.to_string()))?;
        let fields: Vec<&str> = record.split(',').map(str::trim).collect();
        let asn = |s: &str| s.parse::<Asn>().map_err(|e| err(line, e.to_string()));
        let count = |s: &str| s.parse::<u32>().map_err(|_| err(line, format!("bad counter `{s}`")));
        match fields.as_slice() {
            [v] => g.add_vertex(asn(v)?),
            [a, b, kind, ixp, valid, invalid] => {
                let kind = match (*kind, *ixp) {
                    ("direct", "") => EdgeKind::Direct,
                    ("indirect", id) => EdgeKind::Indirect(IxpId(
                        id.parse().map_err(|_| err(line, format!("bad ixp_id `{id}`")))?,
                    )),
                    ("direct", _) => return Err(err(line, "direct edge with an ixp_id")),
                    (other, _) => return Err(err(line, format!("unknown edge kind `{other}`"))),
                };
                let (a, b) = (asn(a)?, asn(b)?);
                if a == b {
                    return Err(err(line, "self-loop"));
                }
                g.add_edge(a, b, kind, count(valid)?, count(invalid)?);
            }
            _ => return Err(err(line, format!("expected 1 or 6 fields, got {}", fields.len()))),
        }
    }
    Ok(g)
}
