use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Serialize};

use super::rng::SplitMix64;
use super::CampaignError;

#[derive(Clone, Copy, PartialEq, Eq, Hash, Debug, Serialize, Deserialize, PartialOrd, Ord)]
#[serde(rename_all = "lowercase")]
pub enum Polarity {
    Sa0,
    Sa1,
}

impl Polarity {
    pub fn stuck_value(self) -> bool {
        self == Polarity::Sa1
    }

    pub fn name(self) -> &'static str {
        match self {
            Polarity::Sa0 => "sa0",
            Polarity::Sa1 => "sa1",
        }
    }
}

impl fmt::Display for Polarity {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for Polarity {
    type Err = String;
    fn from_str(s: &str) -> Result<Self, String> {
        match s {
            "sa0" | "0" => Ok(Polarity::Sa0),
            "sa1" | "1" => Ok(Polarity::Sa1),
            _ => Err(format!("unknown polarity `{s}` (expected sa0 or sa1)")),
        }
    }
}

/// How the fault sites of a multi-fault pattern are placed.
#[derive(Clone, Copy, PartialEq, Eq, Hash, Debug, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum FaultMode {
    /// `k` distinct sites chosen uniformly.
    Random,
    /// `k` consecutive sites in enumeration order from a uniform start.
    Burst,
}

impl FaultMode {
    pub fn name(self) -> &'static str {
        match self {
            FaultMode::Random => "random",
            FaultMode::Burst => "burst",
        }
    }
}

impl fmt::Display for FaultMode {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for FaultMode {
    type Err = String;
    fn from_str(s: &str) -> Result<Self, String> {
        match s {
            "random" => Ok(FaultMode::Random),
            "burst" => Ok(FaultMode::Burst),
            _ => Err(format!("unknown mode `{s}` (expected random or burst)")),
        }
    }
}

/// Indices into a netlist's fault-site list, all stuck at one value.
#[derive(Clone, PartialEq, Eq, Debug)]
pub struct FaultPattern {
    pub sites: Vec<u32>,
    pub polarity: Polarity,
}

impl FaultPattern {
    pub fn empty(polarity: Polarity) -> Self {
        FaultPattern {
            sites: Vec::new(),
            polarity,
        }
    }

    pub fn len(&self) -> usize {
        self.sites.len()
    }

    pub fn is_empty(&self) -> bool {
        self.sites.is_empty()
    }
}

/// Draw a pattern of `k` sites out of `site_count`.
///
/// Random mode runs `k` steps of a Fisher-Yates shuffle over
/// `0..site_count`, step `i` swapping position `i` with
/// `i + below(site_count - i)`. Burst mode draws the start with
/// `below(site_count - k + 1)`.
pub fn sample_pattern(
    rng: &mut SplitMix64,
    site_count: usize,
    k: usize,
    mode: FaultMode,
    polarity: Polarity,
) -> Result<FaultPattern, CampaignError> {
    if k == 0 || k > site_count {
        return Err(CampaignError::SizeOutOfRange {
            size: k,
            sites: site_count,
        });
    }
    let s = site_count as u64;
    let sites = match mode {
        FaultMode::Random => {
            // sparse view of the permuted array: only displaced slots are stored
            let mut displaced: Vec<(u64, u64)> = Vec::with_capacity(2 * k);
            let get =
                |d: &[(u64, u64)], i: u64| d.iter().rev().find(|e| e.0 == i).map_or(i, |e| e.1);
            let mut out = Vec::with_capacity(k);
            for i in 0..k as u64 {
                let j = i + rng.below(s - i);
                let vi = get(&displaced, i);
                let vj = get(&displaced, j);
                displaced.push((i, vj));
                displaced.push((j, vi));
                out.push(vj as u32);
            }
            out
        }
        FaultMode::Burst => {
            let start = rng.below(s - k as u64 + 1) as u32;
            (start..start + k as u32).collect()
        }
    };
    Ok(FaultPattern { sites, polarity })
}
