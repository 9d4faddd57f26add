//! The two-origin, two-prefix hijack experiment shared by the simulator and
//! the analysis stages.

use std::fmt;
use std::net::Ipv4Addr;
use std::str::FromStr;

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::rpki::{Asn, Prefix, Vrp};

pub const ORIGIN_A: Asn = Asn(212795);
pub const ORIGIN_B: Asn = Asn(208162);

pub fn prefix_p1() -> Prefix {
    Prefix::new(Ipv4Addr::new(45, 155, 129, 0), 24).expect("static prefix")
}

pub fn prefix_p2() -> Prefix {
    Prefix::new(Ipv4Addr::new(45, 155, 131, 0), 24).expect("static prefix")
}

/// ROA assignment. `A` authorizes origin A for p1 and origin B for p2; `B`
/// is the swap.
#[derive(Clone, Copy, Debug, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
pub enum Configuration {
    A,
    B,
}

impl Configuration {
    pub const BOTH: [Configuration; 2] = [Configuration::A, Configuration::B];

    pub fn index(self) -> usize {
        match self {
            Configuration::A => 0,
            Configuration::B => 1,
        }
    }

    pub fn swapped(self) -> Self {
        match self {
            Configuration::A => Configuration::B,
            Configuration::B => Configuration::A,
        }
    }
}

impl fmt::Display for Configuration {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Configuration::A => "A",
            Configuration::B => "B",
        })
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Error)]
#[error("unknown configuration label `{0}`")]
pub struct UnknownConfigurationLabel(pub String);

impl FromStr for Configuration {
    type Err = UnknownConfigurationLabel;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s.trim() {
            "A" | "a" => Ok(Configuration::A),
            "B" | "b" => Ok(Configuration::B),
            other => Err(UnknownConfigurationLabel(other.to_string())),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum ExperimentError {
    #[error("the two origins must differ (both {0})")]
    SameOrigin(Asn),
    #[error("the two prefixes must differ (both {0})")]
    SamePrefix(Prefix),
}

/// Both origins announce both prefixes; the configuration decides which
/// announcements the ROAs authorize.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(try_from = "ExperimentRepr", into = "ExperimentRepr")]
pub struct Experiment {
    origin_a: Asn,
    origin_b: Asn,
    p1: Prefix,
    p2: Prefix,
}

impl Experiment {
    pub fn new(origin_a: Asn, origin_b: Asn, p1: Prefix, p2: Prefix) -> Result<Self, ExperimentError> {
        if origin_a == origin_b {
            return Err(ExperimentError::SameOrigin(origin_a));
        }
        if p1 == p2 {
            return Err(ExperimentError::SamePrefix(p1));
        }
        Ok(Experiment {
            origin_a,
            origin_b,
            p1,
            p2,
        })
    }

    pub fn canonical() -> Self {
        Experiment::new(ORIGIN_A, ORIGIN_B, prefix_p1(), prefix_p2()).expect("distinct constants")
    }

    pub fn origins(&self) -> [Asn; 2] {
        [self.origin_a, self.origin_b]
    }

    pub fn prefixes(&self) -> [Prefix; 2] {
        [self.p1, self.p2]
    }

    /// Index of `prefix` among `[p1, p2]`.
    pub fn prefix_index(&self, prefix: &Prefix) -> Option<usize> {
        self.prefixes().iter().position(|p| p == prefix)
    }

    /// Origin authorized for `prefix` under `config`.
    pub fn authorized_origin(&self, config: Configuration, prefix: &Prefix) -> Option<Asn> {
        let idx = self.prefix_index(prefix)?;
        let swap = config == Configuration::B;
        Some(if (idx == 0) != swap {
            self.origin_a
        } else {
            self.origin_b
        })
    }

    pub fn vrps(&self, config: Configuration) -> Vec<Vrp> {
        self.prefixes()
            .iter()
            .map(|p| {
                let origin = self.authorized_origin(config, p).expect("own prefix");
                Vrp::exact(*p, origin).expect("experiment VRPs are well formed")
            })
            .collect()
    }
}

#[derive(Serialize, Deserialize)]
struct ExperimentRepr {
    origin_a: Asn,
    origin_b: Asn,
    prefix_p1: Prefix,
    prefix_p2: Prefix,
}

impl TryFrom<ExperimentRepr> for Experiment {
    type Error = ExperimentError;

    fn try_from(r: ExperimentRepr) -> Result<Self, Self::Error> {
        Experiment::new(r.origin_a, r.origin_b, r.prefix_p1, r.prefix_p2)
    }
}

impl From<Experiment> for ExperimentRepr {
    fn from(e: Experiment) -> Self {
        ExperimentRepr {
            origin_a: e.origin_a,
            origin_b: e.origin_b,
            prefix_p1: e.p1,
            prefix_p2: e.p2,
        }
    }
}

impl Default for Experiment {
    fn default() -> Self {
        Experiment::canonical()
    }
}
