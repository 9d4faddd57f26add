//! Cross-plane similarity of control-plane and data-plane categories.

use std::collections::BTreeMap;
use std::fmt;
use std::fmt::Write as _;

use serde::Serialize;
use thiserror::Error;

use crate::rpki::Asn;

#[derive(Clone, Copy, Debug, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize)]
pub enum Level {
    High,
    Medium,
    Low,
}

impl fmt::Display for Level {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Level::High => "high",
            Level::Medium => "medium",
            Level::Low => "low",
        })
    }
}

/// (control-plane category, data-plane category) tuples per level.
pub const HIGH: [(u8, u8); 10] = [(1, 1), (1, 2), (2, 3), (2, 4), (2, 5), (3, 6), (3, 7), (4, 5), (4, 6), (4, 7)];
pub const MEDIUM: [(u8, u8); 8] = [(1, 3), (2, 6), (2, 7), (3, 3), (3, 4), (3, 5), (4, 3), (4, 4)];
pub const LOW: [(u8, u8); 10] = [(1, 4), (1, 5), (1, 6), (1, 7), (2, 1), (2, 2), (3, 1), (3, 2), (4, 1), (4, 2)];

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum CorrelateError {
    #[error("category tuple ({control},{data}) is out of range")]
    OutOfRangeCategory { control: u8, data: u8 },
    #[error("similarity sets are inconsistent: tuple ({0},{1}) {2}")]
    IncompleteSets(u8, u8, &'static str),
}

/// Checks that the three sets partition the 4x7 tuple space.
pub fn check_sets() -> Result<(), CorrelateError> {
    for c in 1..=4u8 {
        for d in 1..=7u8 {
            let hits = [&HIGH[..], &MEDIUM[..], &LOW[..]]
                .iter()
                .filter(|set| set.contains(&(c, d)))
                .count();
            match hits {
                0 => return Err(CorrelateError::IncompleteSets(c, d, "is missing")),
                1 => {}
                _ => return Err(CorrelateError::IncompleteSets(c, d, "appears in more than one set")),
            }
        }
    }
    Ok(())
}

pub fn similarity(control: u8, data: u8) -> Result<Level, CorrelateError> {
    let t = (control, data);
    if HIGH.contains(&t) {
        Ok(Level::High)
    } else if MEDIUM.contains(&t) {
        Ok(Level::Medium)
    } else if LOW.contains(&t) {
        Ok(Level::Low)
    } else {
        Err(CorrelateError::OutOfRangeCategory { control, data })
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct SimilarityVerdict {
    pub asn: Asn,
    pub control: u8,
    pub data: u8,
    pub level: Level,
}

#[derive(Clone, Copy, Debug, Default, PartialEq, Eq)]
pub struct SimilarityCounts {
    pub high: usize,
    pub medium: usize,
    pub low: usize,
    pub only_control: usize,
    pub only_data: usize,
}

pub fn intersect_and_score(
    control: &BTreeMap<Asn, u8>,
    data: &BTreeMap<Asn, u8>,
) -> Result<(Vec<SimilarityVerdict>, SimilarityCounts), CorrelateError> {
    check_sets()?;
    let mut verdicts = Vec::new();
    let mut counts = SimilarityCounts::default();
    for (asn, &c) in control {
        let Some(&d) = data.get(asn) else {
            counts.only_control += 1;
            continue;
        };
        let level = similarity(c, d)?;
        match level {
            Level::High => counts.high += 1,
            Level::Medium => counts.medium += 1,
            Level::Low => counts.low += 1,
        }
        verdicts.push(SimilarityVerdict {
            asn: *asn,
            control: c,
            data: d,
            level,
        });
    }
    counts.only_data = data.keys().filter(|a| !control.contains_key(a)).count();
    Ok((verdicts, counts))
}

pub fn format_report(verdicts: &[SimilarityVerdict]) -> String {
    let mut s = String::from("asn,cp_cat,dp_cat,level\n");
    for v in verdicts {
        let _ = writeln!(s, "{},{},{},{}", v.asn.0, v.control, v.data, v.level);
    }
    s
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn sets_partition_the_tuple_space() {
        check_sets().unwrap();
        assert_eq!(HIGH.len() + MEDIUM.len() + LOW.len(), 28);
    }

    #[test]
    fn examples() {
        assert_eq!(similarity(1, 1).unwrap(), Level::High);
        assert_eq!(similarity(2, 6).unwrap(), Level::Medium);
        assert_eq!(similarity(3, 1).unwrap(), Level::Low);
        assert!(similarity(0, 1).is_err());
        assert!(similarity(4, 8).is_err());
    }

    #[test]
    fn intersection_counts() {
        let (v, c) = intersect_and_score(&BTreeMap::new(), &BTreeMap::new()).unwrap();
        assert!(v.is_empty());
        assert_eq!(c, SimilarityCounts::default());
        let cp: BTreeMap<Asn, u8> = [(Asn(1), 1), (Asn(2), 3), (Asn(3), 2)].into();
        let dp: BTreeMap<Asn, u8> = [(Asn(1), 1), (Asn(2), 1), (Asn(4), 7)].into();
        let (v, c) = intersect_and_score(&cp, &dp).unwrap();
        assert_eq!(v.len(), 2);
        assert_eq!(
            c,
            SimilarityCounts {
                high: 1,
                medium: 0,
                low: 1,
                only_control: 1,
                only_data: 1
            }
        );
        assert_eq!(format_report(&v), "asn,cp_cat,dp_cat,level\n1,1,1,high\n2,3,1,low\n");
    }
}
