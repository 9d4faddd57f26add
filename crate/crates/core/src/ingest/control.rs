use super::{Hop, IngestError, MeasuredPath, Plane};
use crate::experiment::Configuration;
use crate::rpki::{validate, Asn, Prefix, Vrp};
use crate::text::{Lines, ParseMode};

/// One line of the control-plane dump: `config,collector,prefix,as path`.
/// The AS path lists the collector side first and the origin last.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct ControlRecord {
    pub configuration: Configuration,
    pub collector: String,
    pub prefix: Prefix,
    pub as_path: Vec<Asn>,
}

pub fn parse_control_dump(text: &str, mode: ParseMode) -> Result<Vec<ControlRecord>, IngestError> {
    let mut out = Vec::new();
    for item in Lines::new(text, mode) {
        let (line, record) = item.map_err(|e| IngestError::malformed(e.line, e.to_string()))?;
        let fields: Vec<&str> = record.splitn(4, ',').map(str::trim).collect();
        let [config, collector, prefix, path] = fields.as_slice() else {
            return Err(IngestError::malformed(line, "expected 4 comma-separated fields"));
        };
        let configuration = config
            .parse()
            .map_err(|_| IngestError::UnknownConfigurationLabel {
                line,
                label: config.to_string(),
            })?;
        if collector.is_empty() {
            return Err(IngestError::malformed(line, "empty collector id"));
        }
        let prefix: Prefix = prefix
            .parse()
            .map_err(|e: crate::rpki::PrefixError| IngestError::malformed(line, e.to_string()))?;
        let as_path = path
            .split_whitespace()
            .map(|a| {
                a.parse::<Asn>()
                    .map_err(|e| IngestError::malformed(line, e.to_string()))
            })
            .collect::<Result<Vec<_>, _>>()?;
        if as_path.is_empty() {
            return Err(IngestError::malformed(line, "empty AS path"));
        }
        out.push(ControlRecord {
            configuration,
            collector: collector.to_string(),
            prefix,
            as_path,
        });
    }
    Ok(out)
}

pub fn format_control_dump(records: &[ControlRecord]) -> String {
    let mut s = String::new();
    for r in records {
        let path: Vec<String> = r.as_path.iter().map(Asn::to_string).collect();
        s.push_str(&format!(
            "{},{},{},{}\n",
            r.configuration,
            r.collector,
            r.prefix,
            path.join(" ")
        ));
    }
    s
}

/// Keeps paths whose origin is one of `origins`, collapses prepending and
/// validates each path under its configuration's VRPs.
pub fn load_control_dump(
    text: &str,
    mode: ParseMode,
    origins: &[Asn],
    vrps: [&[Vrp]; 2],
) -> Result<Vec<MeasuredPath>, IngestError> {
    let records = parse_control_dump(text, mode)?;
    Ok(records
        .into_iter()
        .filter_map(|r| {
            let origin = *r.as_path.last()?;
            if !origins.contains(&origin) {
                return None;
            }
            let mut hops: Vec<Hop> = r.as_path.iter().map(|a| Hop::As(*a)).collect();
            hops.dedup();
            Some(MeasuredPath {
                source_id: r.collector,
                plane: Plane::Control,
                prefix: r.prefix,
                configuration: r.configuration,
                hops,
                reached_origin: Some(origin),
                verdict: validate(&r.prefix, origin, vrps[r.configuration.index()]),
                routers: Vec::new(),
                single_run_hops: 0,
            })
        })
        .collect())
}
