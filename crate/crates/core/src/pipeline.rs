//! File-boundary pipeline: simulator artifacts in, reports out. Every stage
//! reads and writes plain files so external datasets can be substituted at
//! any boundary.

use std::collections::{BTreeMap, BTreeSet};
use std::fmt::Write as _;
use std::fs;
use std::io;
use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::classify::{self, PlaneClassification, Thresholds};
use crate::correlate::{self, CorrelateError, SimilarityCounts, SimilarityVerdict};
use crate::experiment::{Configuration, Experiment, ExperimentError};
use crate::ingest::{
    self, format_control_dump, format_traceroutes, load_control_dump, parse_ip2as, parse_ixp_lans,
    parse_target_equivalence, parse_traceroutes, IngestError, IpMappingDb, MeasuredPath, PreprocessStats,
};
use crate::ixp::{self, IxpPeering, IxpReport, PeeringKey, RatioSummary};
use crate::propgraph::{self, GraphError, GraphMetrics, PathGraph};
use crate::rpki::{format_vrps, parse_vrps, Asn, Prefix, Vrp, VrpFileError};
use crate::simnet::{AsKind, ExperimentArtifacts, RovPolicy};
use crate::text::{Lines, ParseMode};

pub const TRACEROUTES: &str = "traceroutes.jsonl";
pub const CONTROL_DUMP: &str = "control_dump.txt";
pub const IP2AS: &str = "ip2as.csv";
pub const IXP_LANS: &str = "ixp_lans.csv";
pub const TARGETS: &str = "targets.csv";
pub const VRPS: [&str; 2] = ["vrps_a.csv", "vrps_b.csv"];
pub const EXPERIMENT: &str = "experiment.json";
pub const GROUND_TRUTH: &str = "ground_truth.csv";
pub const IXP_SESSIONS: &str = "ixp_sessions.csv";
pub const AS_TYPES: &str = "as_types.csv";
pub const CONTINENTS: &str = "continents.csv";
pub const MANIFEST: &str = "manifest.json";

pub const CLASSIFICATION_REPORT: &str = "classification.csv";
pub const CORRELATION_REPORT: &str = "correlation.csv";
pub const DIVERGENCE_REPORT: &str = "divergences.csv";
pub const IXP_REPORT: &str = "ixp_report.csv";
pub const IXP_PEERINGS: &str = "ixp_peerings.csv";
pub const GRAPH_METRICS: &str = "graph_metrics.csv";
pub const GRAPH_EDGES: [&str; 3] = ["g1_edges.csv", "g2_edges.csv", "g3_edges.csv"];
pub const TREE_DEPTH: &str = "tree_depth.csv";
pub const BY_TYPE: &str = "categories_by_type.csv";
pub const BY_CONTINENT: &str = "categories_by_continent.csv";
pub const SUMMARY: &str = "summary.txt";
pub const SCORECARD: &str = "scorecard.csv";

#[derive(Debug, Error)]
pub enum PipelineError {
    #[error("{}: {source}", path.display())]
    Io { path: PathBuf, source: io::Error },
    #[error("{file}: {source}")]
    Ingest { file: String, source: IngestError },
    #[error("{file}: {source}")]
    Vrps { file: String, source: VrpFileError },
    #[error("{file}: {message}")]
    Malformed { file: String, message: String },
    #[error("experiment: {0}")]
    Experiment(#[from] ExperimentError),
    #[error(transparent)]
    EdgeList(#[from] propgraph::EdgeListError),
    #[error("graph metrics: {0}")]
    Graph(#[from] GraphError),
    #[error("correlation: {0}")]
    Correlate(#[from] CorrelateError),
    #[error("{count} classified ASes are missing from the ground truth (first: AS {first})")]
    UniverseMismatch { count: usize, first: Asn },
    #[error("internal invariant violated: {0}")]
    Invariant(String),
}

impl PipelineError {
    /// Whether the failure is a bug rather than bad input.
    pub fn is_invariant_violation(&self) -> bool {
        matches!(
            self,
            PipelineError::Invariant(_) | PipelineError::Correlate(CorrelateError::IncompleteSets(..))
        )
    }
}

fn io_err(path: &Path) -> impl FnOnce(io::Error) -> PipelineError + '_ {
    move |source| PipelineError::Io {
        path: path.to_path_buf(),
        source,
    }
}

pub fn write_file(path: &Path, contents: &str) -> Result<(), PipelineError> {
    fs::write(path, contents).map_err(io_err(path))
}

fn read_optional(path: &Path) -> Result<Option<String>, PipelineError> {
    match fs::read_to_string(path) {
        Ok(s) => Ok(Some(s)),
        Err(e) if e.kind() == io::ErrorKind::NotFound => Ok(None),
        Err(e) => Err(io_err(path)(e)),
    }
}

fn ingest_err(file: &str) -> impl FnOnce(IngestError) -> PipelineError + '_ {
    move |source| PipelineError::Ingest {
        file: file.to_string(),
        source,
    }
}

/// Provenance record written next to every output set.
#[derive(Clone, Debug, Default, PartialEq, Serialize, Deserialize)]
pub struct RunManifest {
    pub tool_version: String,
    pub command: String,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub scenario: Option<String>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub seed: Option<u64>,
    pub inputs: Vec<String>,
    pub output_dir: String,
    pub stages: Vec<String>,
}

impl RunManifest {
    pub fn new(command: &str, output_dir: &Path) -> Self {
        RunManifest {
            tool_version: env!("CARGO_PKG_VERSION").to_string(),
            command: command.to_string(),
            output_dir: output_dir.display().to_string(),
            ..Default::default()
        }
    }

    pub fn write(&self, dir: &Path) -> Result<(), PipelineError> {
        let text = serde_json::to_string_pretty(self).expect("manifest serializes");
        write_file(&dir.join(MANIFEST), &(text + "\n"))
    }
}

fn policy_csv(truth: &BTreeMap<Asn, RovPolicy>) -> String {
    truth.iter().map(|(a, p)| format!("{},{}\n", a.0, p)).collect()
}

/// Writes simulator output in the ingest wire formats plus ground truth.
/// Returns the files written.
pub fn write_artifacts(art: &ExperimentArtifacts, dir: &Path) -> Result<Vec<PathBuf>, PipelineError> {
    fs::create_dir_all(dir).map_err(io_err(dir))?;
    let mut files: Vec<(&str, String)> = vec![
        (TRACEROUTES, format_traceroutes(&art.traceroutes)),
        (CONTROL_DUMP, format_control_dump(&art.control)),
        (IP2AS, art.ip2as.iter().map(|(p, a)| format!("{p},{}\n", a.0)).collect()),
        (
            IXP_LANS,
            art.ixp_lans.iter().map(|(p, l)| format!("{p},{},{}\n", l.id, l.name)).collect(),
        ),
        // Simulated targets always answer, so no upstream mapping is needed.
        (TARGETS, String::new()),
        (VRPS[0], format_vrps(&art.vrps[0])),
        (VRPS[1], format_vrps(&art.vrps[1])),
        (
            EXPERIMENT,
            serde_json::to_string_pretty(&art.experiment).expect("experiment serializes") + "\n",
        ),
        (GROUND_TRUTH, policy_csv(&art.ground_truth)),
        (
            IXP_SESSIONS,
            art.ixp_sessions
                .iter()
                .map(|(ixp, a, b, kind)| format!("{ixp},{},{},{kind}\n", a.0, b.0))
                .collect(),
        ),
        (
            AS_TYPES,
            art.as_kinds.iter().map(|(a, k)| format!("{},{k}\n", a.0)).collect(),
        ),
    ];
    let mut written = Vec::new();
    for (name, text) in files.drain(..) {
        let path = dir.join(name);
        write_file(&path, &text)?;
        written.push(path);
    }
    Ok(written)
}

/// `asn,value` records, as used by ground truth, type and continent files.
pub fn parse_asn_table(text: &str, mode: ParseMode, file: &str) -> Result<BTreeMap<Asn, String>, PipelineError> {
    let mut out = BTreeMap::new();
    for item in Lines::new(text, mode) {
        let bad = |line: usize, message: String| PipelineError::Malformed {
            file: file.to_string(),
            message: format!("line {line}: {message}"),
        };
        let (line, record) = item.map_err(|e| bad(e.line, e.to_string()))?;
        let (a, v) = record
            .split_once(',')
            .ok_or_else(|| bad(line, "expected `asn,value`".into()))?;
        let asn: Asn = a.trim().parse().map_err(|e: crate::rpki::AsnParseError| bad(line, e.to_string()))?;
        out.insert(asn, v.trim().to_string());
    }
    Ok(out)
}

pub fn parse_ground_truth(text: &str, mode: ParseMode) -> Result<BTreeMap<Asn, RovPolicy>, PipelineError> {
    parse_asn_table(text, mode, GROUND_TRUTH)?
        .into_iter()
        .map(|(a, p)| {
            p.parse().map(|p| (a, p)).map_err(|message| PipelineError::Malformed {
                file: GROUND_TRUTH.to_string(),
                message,
            })
        })
        .collect()
}

/// Recovers the experiment from the two VRP sets: each must authorize one
/// origin per prefix, swapped between configurations.
pub fn experiment_from_vrps(vrps: &[Vec<Vrp>; 2]) -> Option<Experiment> {
    let pairs = |v: &[Vrp]| -> Option<[(Prefix, Asn); 2]> {
        let set: BTreeSet<(Prefix, Asn)> = v.iter().map(|x| (x.prefix(), x.origin())).collect();
        let items: Vec<_> = set.into_iter().collect();
        items.try_into().ok()
    };
    let a = pairs(&vrps[0])?;
    let b = pairs(&vrps[1])?;
    let e = Experiment::new(a[0].1, a[1].1, a[0].0, a[1].0).ok()?;
    let swapped: BTreeSet<(Prefix, Asn)> = [(a[0].0, a[1].1), (a[1].0, a[0].1)].into();
    (swapped == b.into_iter().collect::<BTreeSet<_>>()).then_some(e)
}

#[derive(Clone, Copy, Debug, Default, PartialEq, Eq)]
pub enum EnforcingSet {
    /// Data-plane C6 and C7.
    #[default]
    C67,
    /// C3, C6 and C7.
    C367,
}

impl EnforcingSet {
    pub fn categories(self) -> &'static [u8] {
        match self {
            EnforcingSet::C67 => &[6, 7],
            EnforcingSet::C367 => &[3, 6, 7],
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct AnalyzeOptions {
    pub enforcing: EnforcingSet,
    pub thresholds: Thresholds,
    pub mode: ParseMode,
    /// IXPs included in the headline ratio summary.
    pub top_ixps: usize,
    /// Skip the eigenvalue computation.
    pub skip_spectrum: bool,
}

impl Default for AnalyzeOptions {
    fn default() -> Self {
        AnalyzeOptions {
            enforcing: EnforcingSet::C67,
            thresholds: Thresholds::default(),
            mode: ParseMode::Lenient,
            top_ixps: 5,
            skip_spectrum: false,
        }
    }
}

/// Parsed inputs of one analysis run.
#[derive(Clone, Debug)]
pub struct Inputs {
    pub experiment: Experiment,
    pub data_paths: Vec<MeasuredPath>,
    pub control_paths: Vec<MeasuredPath>,
    pub stats: PreprocessStats,
    pub ixp_names: BTreeMap<ingest::IxpId, String>,
    pub as_types: Option<BTreeMap<Asn, String>>,
    pub continents: Option<BTreeMap<Asn, String>>,
    pub warnings: Vec<String>,
}

pub fn load_inputs(dir: &Path, mode: ParseMode) -> Result<Inputs, PipelineError> {
    let mut warnings = Vec::new();
    let read = |name: &str| read_optional(&dir.join(name));

    let experiment_file = read(EXPERIMENT)?
        .map(|t| {
            serde_json::from_str::<Experiment>(&t).map_err(|e| PipelineError::Malformed {
                file: EXPERIMENT.into(),
                message: e.to_string(),
            })
        })
        .transpose()?;
    let mut vrps: [Option<Vec<Vrp>>; 2] = [None, None];
    for (i, name) in VRPS.iter().enumerate() {
        if let Some(t) = read(name)? {
            vrps[i] = Some(parse_vrps(&t, mode).map_err(|source| PipelineError::Vrps {
                file: name.to_string(),
                source,
            })?);
        }
    }
    let experiment = match (&experiment_file, &vrps) {
        (Some(e), _) => *e,
        (None, [Some(a), Some(b)]) => experiment_from_vrps(&[a.clone(), b.clone()]).ok_or_else(|| {
            PipelineError::Malformed {
                file: VRPS[0].into(),
                message: "VRP sets do not describe a two-origin swap; supply experiment.json".into(),
            }
        })?,
        _ => {
            warnings.push(format!("no {EXPERIMENT} or VRP files; using the canonical experiment"));
            Experiment::canonical()
        }
    };
    let vrps: [Vec<Vrp>; 2] = [
        vrps[0].clone().unwrap_or_else(|| experiment.vrps(Configuration::A)),
        vrps[1].clone().unwrap_or_else(|| experiment.vrps(Configuration::B)),
    ];

    let ases = read(IP2AS)?
        .map(|t| parse_ip2as(&t, mode).map_err(ingest_err(IP2AS)))
        .transpose()?
        .unwrap_or_default();
    let lans = read(IXP_LANS)?
        .map(|t| parse_ixp_lans(&t, mode).map_err(ingest_err(IXP_LANS)))
        .transpose()?
        .unwrap_or_default();
    let targets = read(TARGETS)?
        .map(|t| parse_target_equivalence(&t, mode).map_err(ingest_err(TARGETS)))
        .transpose()?
        .unwrap_or_default();
    let db = IpMappingDb::from_tables(ases, lans, targets);

    let (data_paths, stats) = match read(TRACEROUTES)? {
        Some(t) => {
            let records = parse_traceroutes(&t, mode).map_err(ingest_err(TRACEROUTES))?;
            ingest::preprocess_traceroutes(&records, &db, &experiment, [&vrps[0], &vrps[1]])
        }
        None => {
            warnings.push(format!("no {TRACEROUTES}; data-plane reports are empty"));
            (Vec::new(), PreprocessStats::default())
        }
    };
    let control_paths = match read(CONTROL_DUMP)? {
        Some(t) => load_control_dump(&t, mode, &experiment.origins(), [&vrps[0], &vrps[1]])
            .map_err(ingest_err(CONTROL_DUMP))?,
        None => {
            warnings.push(format!("no {CONTROL_DUMP}; control-plane reports are empty"));
            Vec::new()
        }
    };
    let as_types = read(AS_TYPES)?.map(|t| parse_asn_table(&t, mode, AS_TYPES)).transpose()?;
    let continents = read(CONTINENTS)?
        .map(|t| parse_asn_table(&t, mode, CONTINENTS))
        .transpose()?;
    if as_types.is_none() {
        warnings.push(format!("no {AS_TYPES}; type breakdown and tree depth skipped"));
    }
    if continents.is_none() {
        warnings.push(format!("no {CONTINENTS}; continent breakdown skipped"));
    }
    if data_paths.is_empty() && control_paths.is_empty() {
        warnings.push("no usable paths in the input".into());
    }
    Ok(Inputs {
        experiment,
        data_paths,
        control_paths,
        stats,
        ixp_names: db.ixp_names(),
        as_types,
        continents,
        warnings,
    })
}

#[derive(Clone, Debug)]
pub struct Analysis {
    pub inputs: Inputs,
    pub data: PlaneClassification,
    pub control: PlaneClassification,
    pub similarity: Vec<SimilarityVerdict>,
    pub similarity_counts: SimilarityCounts,
    pub peerings: BTreeMap<PeeringKey, IxpPeering>,
    pub ixp_reports: Vec<IxpReport>,
    pub top_ratio: RatioSummary,
    pub all_ratio: RatioSummary,
    pub graphs: [PathGraph; 3],
    pub metrics: Option<[GraphMetrics; 3]>,
    pub tree_depth: Option<BTreeMap<Asn, Option<u32>>>,
    pub thresholds: Thresholds,
}

pub fn analyze_inputs(inputs: Inputs, opts: &AnalyzeOptions) -> Result<Analysis, PipelineError> {
    let data = classify::classify_data(&inputs.data_paths, &inputs.experiment, opts.thresholds);
    let control = classify::classify_control(&inputs.control_paths, &inputs.experiment);
    let (similarity, similarity_counts) = correlate::intersect_and_score(&control.categories, &data.categories)?;
    let peerings = ixp::extract_peerings(&inputs.data_paths);
    let ixp_reports = ixp::ixp_report(&peerings);
    let top_ratio = ixp::ratio_summary(&ixp_reports, Some(opts.top_ixps));
    let all_ratio = ixp::ratio_summary(&ixp_reports, None);

    let g1 = propgraph::build_g1(&inputs.data_paths);
    let enforcing = data.with_category(opts.enforcing.categories());
    let g2 = propgraph::derive_g2(&g1, &enforcing);
    let g3 = propgraph::derive_g3(&g1);
    for (name, g) in [("G2", &g2), ("G3", &g3)] {
        if g.vertices() != g1.vertices() || g.edges().keys().any(|k| !g1.edges().contains_key(k)) {
            return Err(PipelineError::Invariant(format!("{name} is not a spanning subgraph of G1")));
        }
    }
    let metrics = if g1.vertex_count() == 0 {
        None
    } else {
        let m = |g: &PathGraph| {
            if opts.skip_spectrum {
                propgraph::metrics_without_spectrum(g)
            } else {
                propgraph::metrics(g)
            }
        };
        Some([m(&g1)?, m(&g2)?, m(&g3)?])
    };
    let tree_depth = inputs.as_types.as_ref().and_then(|types| {
        let roots: BTreeSet<Asn> = types
            .iter()
            .filter(|(_, t)| t.parse::<AsKind>().ok() == Some(AsKind::Tier1))
            .map(|(a, _)| *a)
            .collect();
        (!roots.is_empty()).then(|| propgraph::tree_depth(&g1, &roots))
    });
    Ok(Analysis {
        inputs,
        data,
        control,
        similarity,
        similarity_counts,
        peerings,
        ixp_reports,
        top_ratio,
        all_ratio,
        graphs: [g1, g2, g3],
        metrics,
        tree_depth,
        thresholds: opts.thresholds,
    })
}

pub fn analyze_dir(in_dir: &Path, opts: &AnalyzeOptions) -> Result<Analysis, PipelineError> {
    analyze_inputs(load_inputs(in_dir, opts.mode)?, opts)
}

pub const DATA_LABELS: [&str; 7] = [
    "no ROV",
    "weak depreference",
    "strong depreference",
    "no negative evidence",
    "no positive evidence",
    "ROV evidence",
    "strong evidence",
];

pub const CONTROL_LABELS: [&str; 4] = [
    "negative evidence",
    "no negative evidence",
    "strong positive evidence",
    "some positive evidence",
];

fn listing(out: &mut String, labels: &[&str], pc: &PlaneClassification) {
    let total = pc.categories.len();
    let width = labels.iter().map(|l| l.len()).max().unwrap_or(0) + 1;
    for (i, label) in labels.iter().enumerate() {
        let n = pc.count(i as u8 + 1);
        let pct = if total == 0 { 0.0 } else { 100.0 * n as f64 / total as f64 };
        let _ = writeln!(out, "[C{}] {:<width$} {:<3} [{:.1}%]", i + 1, format!("{label}:"), n, pct);
    }
}

fn breakdown(pc: &PlaneClassification, groups: &BTreeMap<Asn, String>, key: &str) -> String {
    let mut counts: BTreeMap<(&str, u8), usize> = BTreeMap::new();
    for (asn, cat) in &pc.categories {
        let group = groups.get(asn).map(String::as_str).unwrap_or("unknown");
        *counts.entry((group, *cat)).or_default() += 1;
    }
    let mut s = format!("{key},category,count\n");
    for ((g, c), n) in counts {
        let _ = writeln!(s, "{g},{c},{n}");
    }
    s
}

pub fn summary_text(a: &Analysis) -> String {
    let mut s = String::new();
    let st = &a.inputs.stats;
    let _ = writeln!(
        s,
        "Experiment: {} and {} announcing {} and {}",
        a.inputs.experiment.origins()[0],
        a.inputs.experiment.origins()[1],
        a.inputs.experiment.prefixes()[0],
        a.inputs.experiment.prefixes()[1]
    );
    let _ = writeln!(
        s,
        "Traceroute records: {} (incomplete probes {}, foreign-prefix records {}, all-unresponsive paths {}, unreached paths {}, single-run hops {})",
        st.records, st.incomplete_probes, st.foreign_prefix_records, st.all_unresponsive_paths, st.unreached_paths, st.single_run_hops
    );
    let _ = writeln!(
        s,
        "Paths: {} data-plane, {} control-plane\n",
        a.inputs.data_paths.len(),
        a.inputs.control_paths.len()
    );
    let _ = writeln!(s, "Control-plane categories ({} ASes):", a.control.categories.len());
    listing(&mut s, &CONTROL_LABELS, &a.control);
    let _ = writeln!(s, "\nData-plane categories ({} ASes):", a.data.categories.len());
    listing(&mut s, &DATA_LABELS, &a.data);
    let _ = writeln!(
        s,
        "Thresholded as enforcing (<{:.0}% invalid paths, <{:.0}% invalid routers): {}",
        100.0 * a.thresholds.path_frac,
        100.0 * a.thresholds.router_frac,
        a.data.thresholded.len()
    );
    let c = &a.similarity_counts;
    let _ = writeln!(
        s,
        "\nCross-plane similarity over {} ASes: high {}, medium {}, low {} (control only {}, data only {})",
        c.high + c.medium + c.low,
        c.high,
        c.medium,
        c.low,
        c.only_control,
        c.only_data
    );
    let ratio = |r: Option<f64>| r.map(|v| format!("{v:.2}x")).unwrap_or_else(|| "n/a".into());
    let _ = writeln!(
        s,
        "\nIXPs traversed: {}; direct/routeserver paths per peering: top {} pooled {}, per-IXP mean {}; all IXPs pooled {}, per-IXP mean {}",
        a.ixp_reports.len(),
        a.top_ratio.ixps,
        ratio(a.top_ratio.pooled),
        ratio(a.top_ratio.per_ixp_mean),
        ratio(a.all_ratio.pooled),
        ratio(a.all_ratio.per_ixp_mean)
    );
    if let Some(m) = &a.metrics {
        let _ = writeln!(s, "\nGraph metrics:");
        let rows: [(&str, Box<dyn Fn(&GraphMetrics) -> String>); 9] = [
            ("Vertices", Box::new(|m| m.vertex_count.to_string())),
            ("Edges", Box::new(|m| m.edge_count.to_string())),
            ("Components", Box::new(|m| m.component_count.to_string())),
            ("Largest Component", Box::new(|m| m.largest_component_size.to_string())),
            ("Avg. Node-Degree", Box::new(|m| format!("{:.2}", m.avg_node_degree))),
            ("Avg. Node-Degree (2E/V)", Box::new(|m| format!("{:.2}", m.mean_degree()))),
            (
                "Avg. Algebraic-Connectivity",
                Box::new(|m| {
                    m.avg_algebraic_connectivity
                        .map(|v| format!("{v:.2}"))
                        .unwrap_or_else(|| "n/a".into())
                }),
            ),
            ("Avg. Shortest-Path Length", Box::new(|m| format!("{:.2}", m.avg_shortest_path_length))),
            ("Avg. Longest-Path Length", Box::new(|m| format!("{:.2}", m.avg_longest_path_length))),
        ];
        let _ = writeln!(s, "{:<28} {:>9} {:>9} {:>9}", "Graph Parameters", "G1", "G2", "G3");
        for (label, f) in rows.iter() {
            let _ = writeln!(s, "{:<28} {:>9} {:>9} {:>9}", label, f(&m[0]), f(&m[1]), f(&m[2]));
        }
    }
    if !a.inputs.warnings.is_empty() {
        let _ = writeln!(s, "\nNotices:");
        for w in &a.inputs.warnings {
            let _ = writeln!(s, "- {w}");
        }
    }
    s
}

fn graph_files(a: &Analysis) -> Vec<(String, String)> {
    let mut files: Vec<(String, String)> = GRAPH_EDGES
        .iter()
        .zip(&a.graphs)
        .map(|(name, g)| (name.to_string(), propgraph::format_edge_list(g)))
        .collect();
    if let Some(m) = &a.metrics {
        files.push((
            GRAPH_METRICS.into(),
            propgraph::format_metrics_table(&[("G1", &m[0]), ("G2", &m[1]), ("G3", &m[2])]),
        ));
    }
    files
}

fn write_all(out: &Path, files: Vec<(String, String)>) -> Result<Vec<PathBuf>, PipelineError> {
    fs::create_dir_all(out).map_err(io_err(out))?;
    let mut written = Vec::new();
    for (name, text) in files {
        let path = out.join(name);
        write_file(&path, &text)?;
        written.push(path);
    }
    Ok(written)
}

/// Writes the three edge lists and the metric table.
pub fn write_graph_reports(a: &Analysis, out: &Path) -> Result<Vec<PathBuf>, PipelineError> {
    write_all(out, graph_files(a))
}

/// Writes every report of an analysis; returns the files written.
pub fn write_reports(a: &Analysis, out: &Path) -> Result<Vec<PathBuf>, PipelineError> {
    let mut files: Vec<(String, String)> = vec![
        (
            CLASSIFICATION_REPORT.into(),
            classify::format_report(&[&a.control, &a.data]),
        ),
        (CORRELATION_REPORT.into(), correlate::format_report(&a.similarity)),
        (DIVERGENCE_REPORT.into(), {
            let mut s = String::from("probe_id,configuration,divergence_asn\n");
            for d in &a.data.divergences {
                let asn = d.divergence.map(|x| x.0.to_string()).unwrap_or_default();
                let _ = writeln!(s, "{},{},{asn}", d.probe_id, d.configuration);
            }
            s
        }),
        (IXP_REPORT.into(), ixp::format_report(&a.ixp_reports, &a.inputs.ixp_names)),
        (IXP_PEERINGS.into(), ixp::format_peerings(&a.peerings)),
        (SUMMARY.into(), summary_text(a)),
    ];
    files.extend(graph_files(a));
    if let Some(depth) = &a.tree_depth {
        let mut s = String::from("asn,depth,dp_category\n");
        for (asn, d) in depth {
            let d = d.map(|v| v.to_string()).unwrap_or_default();
            let cat = a.data.categories.get(asn).map(|c| c.to_string()).unwrap_or_default();
            let _ = writeln!(s, "{},{d},{cat}", asn.0);
        }
        files.push((TREE_DEPTH.into(), s));
    }
    if let Some(types) = &a.inputs.as_types {
        files.push((BY_TYPE.into(), breakdown(&a.data, types, "type")));
    }
    if let Some(cont) = &a.inputs.continents {
        files.push((BY_CONTINENT.into(), breakdown(&a.data, cont, "continent")));
    }
    write_all(out, files)
}

/// Parses the classification report back into per-plane category maps.
pub fn parse_classification_report(text: &str) -> Result<[BTreeMap<Asn, u8>; 2], PipelineError> {
    let mut out = [BTreeMap::new(), BTreeMap::new()];
    for (i, line) in text.lines().enumerate().skip(1) {
        if line.trim().is_empty() {
            continue;
        }
        let bad = |m: &str| PipelineError::Malformed {
            file: CLASSIFICATION_REPORT.into(),
            message: format!("line {}: {m}", i + 1),
        };
        let f: Vec<&str> = line.split(',').collect();
        if f.len() != 8 {
            return Err(bad("expected 8 fields"));
        }
        let asn: Asn = f[0].parse().map_err(|_| bad("bad asn"))?;
        let cat: u8 = f[2].parse().map_err(|_| bad("bad category"))?;
        let plane = match f[1] {
            "control" => 0,
            "data" => 1,
            _ => return Err(bad("bad plane")),
        };
        out[plane].insert(asn, cat);
    }
    Ok(out)
}

/// Policy × category counts for one plane, plus detection precision and
/// recall per policy.
#[derive(Clone, Debug, Default, PartialEq)]
pub struct Scorecard {
    /// `(plane, policy) -> category -> count`.
    pub confusion: BTreeMap<(String, String), BTreeMap<u8, usize>>,
    pub detection: Vec<Detection>,
}

#[derive(Clone, Debug, PartialEq)]
pub struct Detection {
    pub policy: RovPolicy,
    pub categories: &'static [u8],
    pub true_positives: usize,
    pub predicted: usize,
    pub actual: usize,
}

impl Detection {
    pub fn precision(&self) -> Option<f64> {
        (self.predicted > 0).then(|| self.true_positives as f64 / self.predicted as f64)
    }

    pub fn recall(&self) -> Option<f64> {
        (self.actual > 0).then(|| self.true_positives as f64 / self.actual as f64)
    }
}

pub fn score(
    planes: &[BTreeMap<Asn, u8>; 2],
    truth: &BTreeMap<Asn, RovPolicy>,
) -> Result<Scorecard, PipelineError> {
    let missing: Vec<Asn> = planes
        .iter()
        .flat_map(|p| p.keys())
        .filter(|a| !truth.contains_key(a))
        .copied()
        .collect::<BTreeSet<_>>()
        .into_iter()
        .collect();
    if let Some(first) = missing.first() {
        return Err(PipelineError::UniverseMismatch {
            count: missing.len(),
            first: *first,
        });
    }
    let mut card = Scorecard::default();
    for (name, plane) in ["control", "data"].iter().zip(planes) {
        for (asn, cat) in plane {
            *card
                .confusion
                .entry((name.to_string(), truth[asn].to_string()))
                .or_default()
                .entry(*cat)
                .or_default() += 1;
        }
    }
    let data = &planes[1];
    let targets: [(RovPolicy, &'static [u8]); 3] = [
        (RovPolicy::Strict, &[6, 7]),
        (RovPolicy::Depreference, &[2, 3]),
        (RovPolicy::None, &[1]),
    ];
    for (policy, cats) in targets {
        let actual = data.keys().filter(|a| truth[a] == policy).count();
        let predicted = data.values().filter(|c| cats.contains(c)).count();
        let tp = data
            .iter()
            .filter(|(a, c)| truth[a] == policy && cats.contains(c))
            .count();
        card.detection.push(Detection {
            policy,
            categories: cats,
            true_positives: tp,
            predicted,
            actual,
        });
    }
    Ok(card)
}

pub fn format_scorecard(card: &Scorecard) -> String {
    let mut s = String::from("plane,policy,category,count\n");
    for ((plane, policy), cats) in &card.confusion {
        for (c, n) in cats {
            let _ = writeln!(s, "{plane},{policy},{c},{n}");
        }
    }
    s.push_str("\npolicy,categories,true_positives,predicted,actual,precision,recall\n");
    let opt = |v: Option<f64>| v.map(|x| format!("{x:.4}")).unwrap_or_default();
    for d in &card.detection {
        let cats: Vec<String> = d.categories.iter().map(|c| format!("C{c}")).collect();
        let _ = writeln!(
            s,
            "{},{},{},{},{},{},{}",
            d.policy,
            cats.join("+"),
            d.true_positives,
            d.predicted,
            d.actual,
            opt(d.precision()),
            opt(d.recall())
        );
    }
    s
}

/// Reads `classification.csv` from `analysis_dir` and scores it against a
/// ground-truth file.
pub fn score_dir(analysis_dir: &Path, ground_truth: &Path, mode: ParseMode) -> Result<Scorecard, PipelineError> {
    let report_path = analysis_dir.join(CLASSIFICATION_REPORT);
    let report = fs::read_to_string(&report_path).map_err(io_err(&report_path))?;
    let truth_text = fs::read_to_string(ground_truth).map_err(io_err(ground_truth))?;
    score(&parse_classification_report(&report)?, &parse_ground_truth(&truth_text, mode)?)
}
