//! Divergence points, per-AS evidence and category assignment.

use std::collections::{BTreeMap, BTreeSet};
use std::fmt::Write as _;
use std::net::Ipv4Addr;

use thiserror::Error;

use crate::experiment::{Configuration, Experiment};
use crate::ingest::{MeasuredPath, Plane};
use crate::rpki::{Asn, Validity};

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum ClassifyError {
    #[error("paths from `{left}` ({left_config}) and `{right}` ({right_config}) do not form a pair")]
    MismatchedPair {
        left: String,
        left_config: Configuration,
        right: String,
        right_config: Configuration,
    },
}

/// Last shared AS of a probe's two paths in one configuration, computed only
/// when both paths follow the ROAs. IXP and absent hops are ignored.
pub fn divergence_point(path_p1: &MeasuredPath, path_p2: &MeasuredPath) -> Result<Option<Asn>, ClassifyError> {
    if path_p1.source_id != path_p2.source_id
        || path_p1.configuration != path_p2.configuration
        || path_p1.prefix == path_p2.prefix
    {
        return Err(ClassifyError::MismatchedPair {
            left: path_p1.source_id.clone(),
            left_config: path_p1.configuration,
            right: path_p2.source_id.clone(),
            right_config: path_p2.configuration,
        });
    }
    if path_p1.verdict != Validity::Valid || path_p2.verdict != Validity::Valid {
        return Ok(None);
    }
    let (a, b) = (path_p1.as_sequence(), path_p2.as_sequence());
    if a == b {
        return Ok(None);
    }
    let common = a.iter().zip(&b).take_while(|(x, y)| x == y).count();
    Ok(common.checked_sub(1).map(|i| a[i]))
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct DivergenceRecord {
    pub probe_id: String,
    pub configuration: Configuration,
    pub divergence: Option<Asn>,
}

/// Pairs each source's paths to the two prefixes per configuration. The
/// first path seen for a (source, configuration, prefix) is used.
pub fn divergences(paths: &[MeasuredPath], experiment: &Experiment) -> Vec<DivergenceRecord> {
    let mut pairs: BTreeMap<(&str, Configuration), [Option<&MeasuredPath>; 2]> = BTreeMap::new();
    for p in paths {
        let Some(idx) = experiment.prefix_index(&p.prefix) else {
            continue;
        };
        let slot = &mut pairs.entry((p.source_id.as_str(), p.configuration)).or_default()[idx];
        if slot.is_none() {
            *slot = Some(p);
        }
    }
    pairs
        .into_iter()
        .filter_map(|((probe, configuration), pair)| {
            let [Some(p1), Some(p2)] = pair else {
                return None;
            };
            Some(DivergenceRecord {
                probe_id: probe.to_string(),
                configuration,
                divergence: divergence_point(p1, p2).expect("paired by construction"),
            })
        })
        .collect()
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct AsEvidence {
    pub asn: Asn,
    pub valid_paths: u32,
    pub invalid_paths: u32,
    /// Indexed by configuration.
    pub divergences: [u32; 2],
    /// `seen[configuration][prefix index]` on a path that reached a target.
    pub seen: [[bool; 2]; 2],
    pub invalid_routers: BTreeSet<Ipv4Addr>,
    pub routers: BTreeSet<Ipv4Addr>,
}

impl AsEvidence {
    pub fn new(asn: Asn) -> Self {
        AsEvidence {
            asn,
            valid_paths: 0,
            invalid_paths: 0,
            divergences: [0; 2],
            seen: [[false; 2]; 2],
            invalid_routers: BTreeSet::new(),
            routers: BTreeSet::new(),
        }
    }

    pub fn total_divergences(&self) -> u32 {
        self.divergences.iter().sum()
    }

    pub fn seen_in(&self, config: Configuration) -> bool {
        self.seen[config.index()].iter().any(|s| *s)
    }

    pub fn seen_everywhere(&self) -> bool {
        self.seen.iter().flatten().all(|s| *s)
    }
}

/// Folds paths into per-AS evidence. Only paths that reached a target
/// (Valid or Invalid) count; each AS counts once per path.
pub fn accumulate(
    paths: &[MeasuredPath],
    divergences: &[DivergenceRecord],
    experiment: &Experiment,
) -> BTreeMap<Asn, AsEvidence> {
    let mut out: BTreeMap<Asn, AsEvidence> = BTreeMap::new();
    for p in paths {
        let invalid = match p.verdict {
            Validity::Valid => false,
            Validity::Invalid => true,
            Validity::Unknown => continue,
        };
        let Some(pi) = experiment.prefix_index(&p.prefix) else {
            continue;
        };
        let ases: BTreeSet<Asn> = p.as_sequence().into_iter().collect();
        for asn in ases {
            let ev = out.entry(asn).or_insert_with(|| AsEvidence::new(asn));
            if invalid {
                ev.invalid_paths += 1;
            } else {
                ev.valid_paths += 1;
            }
            ev.seen[p.configuration.index()][pi] = true;
        }
        for (asn, ip) in &p.routers {
            if let Some(ev) = out.get_mut(asn) {
                ev.routers.insert(*ip);
                if invalid {
                    ev.invalid_routers.insert(*ip);
                }
            }
        }
    }
    for d in divergences {
        if let Some(asn) = d.divergence {
            out.entry(asn).or_insert_with(|| AsEvidence::new(asn)).divergences[d.configuration.index()] += 1;
        }
    }
    out
}

/// Data-plane category before the C5 pass, strictest rule first.
pub fn classify_data_plane(ev: &AsEvidence) -> u8 {
    let div_each = ev.divergences.iter().all(|d| *d >= 1);
    let div_any = ev.total_divergences() >= 1;
    if ev.invalid_paths == 0 {
        if ev.seen_everywhere() && div_each {
            7
        } else if Configuration::BOTH.iter().all(|c| ev.seen_in(*c)) && div_any {
            6
        } else {
            4
        }
    } else if ev.valid_paths >= 3 * ev.invalid_paths && div_each {
        3
    } else if ev.valid_paths >= 2 * ev.invalid_paths && div_any {
        2
    } else {
        1
    }
}

/// Moves C4 ASes to C5 when every reached path through them meets a C6/C7
/// AS strictly between them and the target.
pub fn upgrade_passive(categories: &mut BTreeMap<Asn, u8>, paths: &[MeasuredPath]) {
    let enforcing: BTreeSet<Asn> = categories
        .iter()
        .filter(|(_, c)| matches!(c, 6 | 7))
        .map(|(a, _)| *a)
        .collect();
    let mut protected: BTreeMap<Asn, bool> = BTreeMap::new();
    for p in paths {
        if p.verdict == Validity::Unknown {
            continue;
        }
        let seq = p.as_sequence();
        let end = match (seq.last(), p.reached_origin) {
            (Some(last), Some(origin)) if *last == origin => seq.len() - 1,
            _ => seq.len(),
        };
        for (i, asn) in seq.iter().enumerate() {
            if categories.get(asn) != Some(&4) {
                continue;
            }
            let covered = i < end && seq[i + 1..end].iter().any(|a| enforcing.contains(a));
            let slot = protected.entry(*asn).or_insert(true);
            *slot &= covered;
        }
    }
    for (asn, ok) in protected {
        if ok {
            categories.insert(asn, 5);
        }
    }
}

pub fn classify_control_plane(ev: &AsEvidence) -> u8 {
    if ev.invalid_paths > 0 {
        return 1;
    }
    if ev.seen_everywhere() {
        return 3;
    }
    let both_prefixes_one_config = ev.seen.iter().any(|c| c[0] && c[1]);
    let one_prefix_both_configs = (0..2).any(|pi| ev.seen[0][pi] && ev.seen[1][pi]);
    if both_prefixes_one_config || one_prefix_both_configs {
        4
    } else {
        2
    }
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct Thresholds {
    pub path_frac: f64,
    pub router_frac: f64,
}

impl Default for Thresholds {
    fn default() -> Self {
        Thresholds {
            path_frac: 0.10,
            router_frac: 0.10,
        }
    }
}

/// Whether a C1–C3 AS forwards few enough invalid paths on few enough
/// routers to count as enforcing. ASes without router observations are
/// never flagged.
pub fn thresholded(category: u8, ev: &AsEvidence, t: Thresholds) -> bool {
    if !(1..=3).contains(&category) || ev.routers.is_empty() {
        return false;
    }
    let total = f64::from(ev.valid_paths + ev.invalid_paths);
    let path_frac = f64::from(ev.invalid_paths) / total;
    let router_frac = ev.invalid_routers.len() as f64 / ev.routers.len() as f64;
    path_frac < t.path_frac && router_frac < t.router_frac
}

pub fn apply_threshold(categories: &BTreeMap<Asn, u8>, evidence: &BTreeMap<Asn, AsEvidence>, t: Thresholds) -> BTreeSet<Asn> {
    categories
        .iter()
        .filter(|(asn, cat)| evidence.get(asn).is_some_and(|ev| thresholded(**cat, ev, t)))
        .map(|(asn, _)| *asn)
        .collect()
}

/// Evidence and categories for one plane.
#[derive(Clone, Debug, Default, PartialEq)]
pub struct PlaneClassification {
    pub plane: Option<Plane>,
    pub evidence: BTreeMap<Asn, AsEvidence>,
    pub categories: BTreeMap<Asn, u8>,
    pub divergences: Vec<DivergenceRecord>,
    pub thresholded: BTreeSet<Asn>,
}

impl PlaneClassification {
    pub fn count(&self, category: u8) -> usize {
        self.categories.values().filter(|c| **c == category).count()
    }

    pub fn with_category(&self, set: &[u8]) -> BTreeSet<Asn> {
        self.categories
            .iter()
            .filter(|(_, c)| set.contains(c))
            .map(|(a, _)| *a)
            .collect()
    }
}

pub fn classify_data(paths: &[MeasuredPath], experiment: &Experiment, t: Thresholds) -> PlaneClassification {
    let divergences = divergences(paths, experiment);
    let evidence = accumulate(paths, &divergences, experiment);
    let mut categories: BTreeMap<Asn, u8> = evidence
        .values()
        .filter(|ev| ev.valid_paths + ev.invalid_paths > 0)
        .map(|ev| (ev.asn, classify_data_plane(ev)))
        .collect();
    upgrade_passive(&mut categories, paths);
    let thresholded = apply_threshold(&categories, &evidence, t);
    PlaneClassification {
        plane: Some(Plane::Data),
        evidence,
        categories,
        divergences,
        thresholded,
    }
}

pub fn classify_control(paths: &[MeasuredPath], experiment: &Experiment) -> PlaneClassification {
    let evidence = accumulate(paths, &[], experiment);
    let categories = evidence
        .values()
        .filter(|ev| ev.valid_paths + ev.invalid_paths > 0)
        .map(|ev| (ev.asn, classify_control_plane(ev)))
        .collect();
    PlaneClassification {
        plane: Some(Plane::Control),
        evidence,
        categories,
        divergences: Vec::new(),
        thresholded: BTreeSet::new(),
    }
}

pub const REPORT_HEADER: &str = "asn,plane,category,valid_paths,invalid_paths,div_a,div_b,thresholded";

pub fn format_report(planes: &[&PlaneClassification]) -> String {
    let mut s = format!("{REPORT_HEADER}\n");
    for pc in planes {
        let plane = pc.plane.map(|p| p.to_string()).unwrap_or_default();
        for (asn, cat) in &pc.categories {
            let ev = &pc.evidence[asn];
            let _ = writeln!(
                s,
                "{},{},{},{},{},{},{},{}",
                asn.0,
                plane,
                cat,
                ev.valid_paths,
                ev.invalid_paths,
                ev.divergences[0],
                ev.divergences[1],
                pc.thresholded.contains(asn)
            );
        }
    }
    s
}
