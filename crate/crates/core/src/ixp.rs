//! Routeserver approximation and invalid-path leakage per IXP.

use std::collections::{BTreeMap, BTreeSet};
use std::fmt::Write as _;

use crate::ingest::{Hop, IxpId, MeasuredPath};
use crate::rpki::{Asn, Validity};
use crate::simnet::IxpSessionKind;

/// Two members seen adjacent across one IXP's address space.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct IxpPeering {
    pub ixp: IxpId,
    /// Lower ASN first.
    pub members: (Asn, Asn),
    pub valid_paths: u32,
    pub invalid_paths: u32,
}

impl IxpPeering {
    /// Peerings that never carried an invalid path are taken to run over
    /// the routeserver.
    pub fn inferred_kind(&self) -> IxpSessionKind {
        if self.invalid_paths == 0 {
            IxpSessionKind::Routeserver
        } else {
            IxpSessionKind::Direct
        }
    }

    pub fn total(&self) -> u32 {
        self.valid_paths + self.invalid_paths
    }
}

pub type PeeringKey = (IxpId, Asn, Asn);

/// Every `[X, -ixp, Y]` window accrues the path's verdict once per path.
/// Unknown-verdict paths and IXP hops at a path end are ignored.
pub fn extract_peerings(paths: &[MeasuredPath]) -> BTreeMap<PeeringKey, IxpPeering> {
    let mut out: BTreeMap<PeeringKey, IxpPeering> = BTreeMap::new();
    for p in paths {
        let invalid = match p.verdict {
            Validity::Valid => false,
            Validity::Invalid => true,
            Validity::Unknown => continue,
        };
        let mut keys = BTreeSet::new();
        for w in p.hops.windows(3) {
            if let [Hop::As(x), Hop::Ixp(ixp), Hop::As(y)] = *w {
                if x != y {
                    keys.insert((ixp, x.min(y), x.max(y)));
                }
            }
        }
        for key in keys {
            let entry = out.entry(key).or_insert_with(|| IxpPeering {
                ixp: key.0,
                members: (key.1, key.2),
                valid_paths: 0,
                invalid_paths: 0,
            });
            if invalid {
                entry.invalid_paths += 1;
            } else {
                entry.valid_paths += 1;
            }
        }
    }
    out
}

#[derive(Clone, Debug, Default, PartialEq)]
pub struct IxpReport {
    pub ixp: IxpId,
    pub total_paths: u64,
    pub invalid_paths: u64,
    pub routeserver_peerings: u64,
    pub direct_peerings: u64,
    pub routeserver_paths: u64,
    pub direct_paths: u64,
}

fn mean(paths: u64, peerings: u64) -> Option<f64> {
    (peerings > 0).then(|| paths as f64 / peerings as f64)
}

impl IxpReport {
    pub fn invalid_fraction(&self) -> f64 {
        if self.total_paths == 0 {
            0.0
        } else {
            self.invalid_paths as f64 / self.total_paths as f64
        }
    }

    pub fn avg_direct(&self) -> Option<f64> {
        mean(self.direct_paths, self.direct_peerings)
    }

    pub fn avg_routeserver(&self) -> Option<f64> {
        mean(self.routeserver_paths, self.routeserver_peerings)
    }

    /// Mean paths per direct peering over mean paths per routeserver
    /// peering; absent when either class is empty.
    pub fn direct_to_routeserver_ratio(&self) -> Option<f64> {
        Some(self.avg_direct()? / self.avg_routeserver()?)
    }
}

pub fn ixp_report(peerings: &BTreeMap<PeeringKey, IxpPeering>) -> Vec<IxpReport> {
    let mut by_ixp: BTreeMap<IxpId, IxpReport> = BTreeMap::new();
    for p in peerings.values() {
        let r = by_ixp.entry(p.ixp).or_insert_with(|| IxpReport {
            ixp: p.ixp,
            ..Default::default()
        });
        let total = u64::from(p.total());
        r.total_paths += total;
        r.invalid_paths += u64::from(p.invalid_paths);
        match p.inferred_kind() {
            IxpSessionKind::Routeserver => {
                r.routeserver_peerings += 1;
                r.routeserver_paths += total;
            }
            IxpSessionKind::Direct => {
                r.direct_peerings += 1;
                r.direct_paths += total;
            }
        }
    }
    by_ixp.into_values().collect()
}

/// Ratio summary over the `top` IXPs by path count (all IXPs when `None`).
#[derive(Clone, Debug, Default, PartialEq)]
pub struct RatioSummary {
    pub ixps: usize,
    /// Ratio of the pooled per-peering means.
    pub pooled: Option<f64>,
    /// Mean of the per-IXP ratios that are defined.
    pub per_ixp_mean: Option<f64>,
}

pub fn ratio_summary(reports: &[IxpReport], top: Option<usize>) -> RatioSummary {
    let mut sorted: Vec<&IxpReport> = reports.iter().collect();
    sorted.sort_by(|a, b| b.total_paths.cmp(&a.total_paths).then(a.ixp.cmp(&b.ixp)));
    let chosen = &sorted[..top.unwrap_or(sorted.len()).min(sorted.len())];
    let sum = |f: fn(&IxpReport) -> u64| chosen.iter().map(|r| f(r)).sum::<u64>();
    let pooled = match (
        mean(sum(|r| r.direct_paths), sum(|r| r.direct_peerings)),
        mean(sum(|r| r.routeserver_paths), sum(|r| r.routeserver_peerings)),
    ) {
        (Some(d), Some(rs)) => Some(d / rs),
        _ => None,
    };
    let ratios: Vec<f64> = chosen.iter().filter_map(|r| r.direct_to_routeserver_ratio()).collect();
    let per_ixp_mean = (!ratios.is_empty()).then(|| ratios.iter().sum::<f64>() / ratios.len() as f64);
    RatioSummary {
        ixps: chosen.len(),
        pooled,
        per_ixp_mean,
    }
}

fn opt(v: Option<f64>) -> String {
    v.map(|x| format!("{x:.4}")).unwrap_or_default()
}

pub fn format_report(reports: &[IxpReport], names: &BTreeMap<IxpId, String>) -> String {
    let mut s = String::from(
        "ixp_id,name,total_paths,invalid_paths,invalid_fraction,routeserver_peerings,direct_peerings,\
         routeserver_paths,direct_paths,avg_paths_direct,avg_paths_routeserver,direct_routeserver_ratio\n",
    );
    for r in reports {
        let name = names.get(&r.ixp).map(String::as_str).unwrap_or("");
        let name = if name.contains(',') || name.contains('"') {
            format!("\"{}\"", name.replace('"', "\"\""))
        } else {
            name.to_string()
        };
        let _ = writeln!(
            s,
            "{},{},{},{},{:.4},{},{},{},{},{},{},{}",
            r.ixp,
            name,
            r.total_paths,
            r.invalid_paths,
            r.invalid_fraction(),
            r.routeserver_peerings,
            r.direct_peerings,
            r.routeserver_paths,
            r.direct_paths,
            opt(r.avg_direct()),
            opt(r.avg_routeserver()),
            opt(r.direct_to_routeserver_ratio())
        );
    }
    s
}

pub fn format_peerings(peerings: &BTreeMap<PeeringKey, IxpPeering>) -> String {
    let mut s = String::from("ixp_id,asn_a,asn_b,valid_paths,invalid_paths,inferred_kind\n");
    for p in peerings.values() {
        let _ = writeln!(
            s,
            "{},{},{},{},{},{}",
            p.ixp,
            p.members.0 .0,
            p.members.1 .0,
            p.valid_paths,
            p.invalid_paths,
            p.inferred_kind()
        );
    }
    s
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::experiment::{prefix_p1, Configuration};
    use crate::ingest::Plane;

    fn path(hops: Vec<Hop>, verdict: Validity) -> MeasuredPath {
        MeasuredPath {
            source_id: "p".into(),
            plane: Plane::Data,
            prefix: prefix_p1(),
            configuration: Configuration::A,
            hops,
            reached_origin: None,
            verdict,
            routers: vec![],
            single_run_hops: 0,
        }
    }

    fn a(n: u32) -> Hop {
        Hop::As(Asn(n))
    }

    fn x(n: u32) -> Hop {
        Hop::Ixp(IxpId(n))
    }

    #[test]
    fn extraction_examples() {
        let paths = vec![
            path(vec![a(1), x(7), a(2)], Validity::Invalid),
            path(vec![a(3), a(4)], Validity::Valid),
            path(vec![a(5), x(7), a(6)], Validity::Unknown),
            path(vec![x(7), a(6)], Validity::Valid),
        ];
        let p = extract_peerings(&paths);
        assert_eq!(p.len(), 1);
        let peering = &p[&(IxpId(7), Asn(1), Asn(2))];
        assert_eq!(peering.invalid_paths, 1);
        assert_eq!(peering.inferred_kind(), IxpSessionKind::Direct);

        let valid: Vec<MeasuredPath> = (0..5).map(|_| path(vec![a(2), x(7), a(1)], Validity::Valid)).collect();
        let p = extract_peerings(&valid);
        assert_eq!(p[&(IxpId(7), Asn(1), Asn(2))].inferred_kind(), IxpSessionKind::Routeserver);
    }

    #[test]
    fn report_arithmetic() {
        let r = IxpReport {
            ixp: IxpId(1),
            total_paths: 2982,
            invalid_paths: 1000,
            ..Default::default()
        };
        assert!((r.invalid_fraction() - 0.335).abs() < 5e-4);

        let mut paths = Vec::new();
        // Two direct peerings carrying six paths, three routeserver peerings carrying three.
        for (m, n, count) in [(1, 2, 3), (3, 4, 3)] {
            paths.push(path(vec![a(m), x(9), a(n)], Validity::Invalid));
            for _ in 1..count {
                paths.push(path(vec![a(m), x(9), a(n)], Validity::Valid));
            }
        }
        for m in [5, 6, 7] {
            paths.push(path(vec![a(m), x(9), a(100)], Validity::Valid));
        }
        let reports = ixp_report(&extract_peerings(&paths));
        assert_eq!(reports.len(), 1);
        assert_eq!(reports[0].direct_to_routeserver_ratio(), Some(3.0));
        assert_eq!(reports[0].total_paths, 9);
        let summary = ratio_summary(&reports, Some(5));
        assert_eq!(summary.pooled, Some(3.0));
        assert_eq!(summary.per_ixp_mean, Some(3.0));

        let rs_only = ixp_report(&extract_peerings(&[path(vec![a(1), x(3), a(2)], Validity::Valid)]));
        assert_eq!(rs_only[0].invalid_fraction(), 0.0);
        assert_eq!(rs_only[0].direct_to_routeserver_ratio(), None);
    }

    #[test]
    fn pooled_and_per_ixp_means_differ() {
        let reports = vec![
            IxpReport {
                ixp: IxpId(1),
                total_paths: 10,
                direct_peerings: 1,
                direct_paths: 8,
                routeserver_peerings: 2,
                routeserver_paths: 2,
                ..Default::default()
            },
            IxpReport {
                ixp: IxpId(2),
                total_paths: 4,
                direct_peerings: 1,
                direct_paths: 2,
                routeserver_peerings: 1,
                routeserver_paths: 2,
                ..Default::default()
            },
        ];
        let s = ratio_summary(&reports, None);
        assert_eq!(s.per_ixp_mean, Some((8.0 + 1.0) / 2.0));
        assert_eq!(s.pooled, Some(5.0 / (4.0 / 3.0)));
        assert_eq!(ratio_summary(&reports, Some(1)).ixps, 1);
    }
}
