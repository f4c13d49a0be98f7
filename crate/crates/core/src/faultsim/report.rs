//! Coverage reports and their CSV / JSON forms.

use std::fmt::Write as _;

use serde::{Deserialize, Serialize};

use super::Polarity;
use crate::gate::FaultOutcomeClass;

/// Fault coverage: fraction of injections that did not end in silent
/// corruption, `(trials - sdc) / trials`.
pub fn fault_coverage(trials: u64, sdc: u64) -> f64 {
    if trials == 0 {
        1.0
    } else {
        (trials - sdc) as f64 / trials as f64
    }
}

/// Percentage with three decimals, as written to reports.
pub fn format_percent(fc: f64) -> String {
    format!("{:.3}", fc * 100.0)
}

#[derive(Clone, Copy, PartialEq, Eq, Hash, Debug, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum ReportMode {
    Random,
    Burst,
    /// Every site, both polarities, every input vector.
    Exhaustive,
}

impl ReportMode {
    pub fn name(self) -> &'static str {
        match self {
            ReportMode::Random => "random",
            ReportMode::Burst => "burst",
            ReportMode::Exhaustive => "exhaustive",
        }
    }

    fn parse(s: &str) -> Option<Self> {
        [
            ReportMode::Random,
            ReportMode::Burst,
            ReportMode::Exhaustive,
        ]
        .into_iter()
        .find(|m| m.name() == s)
    }
}

impl From<super::FaultMode> for ReportMode {
    fn from(m: super::FaultMode) -> Self {
        match m {
            super::FaultMode::Random => ReportMode::Random,
            super::FaultMode::Burst => ReportMode::Burst,
        }
    }
}

/// Outcome counts for one (polarity, mode, fault size) stratum.
#[derive(Clone, Copy, PartialEq, Eq, Debug)]
pub struct Stratum {
    pub polarity: Polarity,
    pub mode: ReportMode,
    pub fault_size: usize,
    pub trials: u64,
    pub masked: u64,
    pub detected: u64,
    pub sdc: u64,
}

impl Stratum {
    pub fn new(polarity: Polarity, mode: ReportMode, fault_size: usize) -> Self {
        Stratum {
            polarity,
            mode,
            fault_size,
            trials: 0,
            masked: 0,
            detected: 0,
            sdc: 0,
        }
    }

    pub fn record(&mut self, c: FaultOutcomeClass) {
        self.add_counts(1, c);
    }

    pub fn add_counts(&mut self, n: u64, c: FaultOutcomeClass) {
        self.trials += n;
        match c {
            FaultOutcomeClass::Masked => self.masked += n,
            FaultOutcomeClass::Detected => self.detected += n,
            FaultOutcomeClass::Sdc => self.sdc += n,
        }
    }

    pub fn absorb(&mut self, o: &Stratum) {
        self.trials += o.trials;
        self.masked += o.masked;
        self.detected += o.detected;
        self.sdc += o.sdc;
    }

    pub fn fc(&self) -> f64 {
        fault_coverage(self.trials, self.sdc)
    }

    pub fn is_consistent(&self) -> bool {
        self.masked + self.detected + self.sdc == self.trials
    }
}

#[derive(Clone, PartialEq, Eq, Debug, Serialize, Deserialize)]
pub struct ReportMeta {
    pub seed: u64,
    pub netlist_hash: String,
    pub site_count: usize,
    pub tool_version: String,
    /// `sa0`, `sa1`, or `both`.
    pub polarity: String,
    /// `random`, `burst`, `exhaustive`, or `mixed`.
    pub mode: String,
    /// `random` or `exhaustive`.
    pub input_policy: String,
}

#[derive(Clone, PartialEq, Eq, Debug)]
pub struct CoverageReport {
    pub meta: ReportMeta,
    pub strata: Vec<Stratum>,
}

pub const SUMMARY_HEADER: &str = "polarity,mode,fault_size,trials,masked,detected,sdc,fc_percent";
pub const TRIAL_HEADER: &str = "trial,fault_size,input_hex,sites,outcome";

#[derive(Debug, thiserror::Error)]
pub enum ReportParseError {
    #[error("bad CSV header `{0}`")]
    Header(String),
    #[error("CSV line {line}: {message}")]
    Row { line: usize, message: String },
    #[error("JSON: {0}")]
    Json(#[from] serde_json::Error),
}

#[derive(Serialize, Deserialize)]
struct RowJson {
    polarity: String,
    mode: String,
    fault_size: String,
    trials: u64,
    masked: u64,
    detected: u64,
    sdc: u64,
    fc_percent: f64,
}

#[derive(Serialize, Deserialize)]
struct ReportJson {
    #[serde(flatten)]
    meta: ReportMeta,
    strata: Vec<RowJson>,
    aggregate: RowJson,
}

impl CoverageReport {
    pub fn aggregate(&self) -> Stratum {
        let mut all = self
            .strata
            .first()
            .map_or(Stratum::new(Polarity::Sa0, ReportMode::Random, 0), |s| {
                Stratum::new(s.polarity, s.mode, 0)
            });
        for s in &self.strata {
            all.absorb(s);
        }
        all
    }

    pub fn fc(&self) -> f64 {
        self.aggregate().fc()
    }

    pub fn fc_percent(&self) -> String {
        format_percent(self.fc())
    }

    /// Concatenate two reports over the same netlist.
    pub fn merge(mut self, other: CoverageReport) -> CoverageReport {
        if self.meta.polarity != other.meta.polarity {
            self.meta.polarity = "both".into();
        }
        if self.meta.mode != other.meta.mode {
            self.meta.mode = "mixed".into();
        }
        self.strata.extend(other.strata);
        self
    }

    fn rows(&self) -> Vec<(String, String, String, Stratum)> {
        let mut rows: Vec<_> = self
            .strata
            .iter()
            .map(|s| {
                (
                    s.polarity.name().to_string(),
                    s.mode.name().to_string(),
                    s.fault_size.to_string(),
                    *s,
                )
            })
            .collect();
        rows.push((
            self.meta.polarity.clone(),
            self.meta.mode.clone(),
            "ALL".into(),
            self.aggregate(),
        ));
        rows
    }

    pub fn to_csv(&self) -> String {
        let mut out = String::from(SUMMARY_HEADER);
        out.push('\n');
        for (p, m, k, s) in self.rows() {
            writeln!(
                out,
                "{p},{m},{k},{},{},{},{},{}",
                s.trials,
                s.masked,
                s.detected,
                s.sdc,
                format_percent(s.fc())
            )
            .unwrap();
        }
        out
    }

    fn row_json(p: String, m: String, k: String, s: &Stratum) -> RowJson {
        RowJson {
            polarity: p,
            mode: m,
            fault_size: k,
            trials: s.trials,
            masked: s.masked,
            detected: s.detected,
            sdc: s.sdc,
            fc_percent: format_percent(s.fc()).parse().unwrap(),
        }
    }

    pub fn to_json(&self) -> String {
        let mut rows = self.rows();
        let (p, m, k, s) = rows.pop().unwrap();
        let doc = ReportJson {
            meta: self.meta.clone(),
            strata: rows
                .into_iter()
                .map(|(p, m, k, s)| Self::row_json(p, m, k, &s))
                .collect(),
            aggregate: Self::row_json(p, m, k, &s),
        };
        let mut text = serde_json::to_string_pretty(&doc).expect("report serializes");
        text.push('\n');
        text
    }

    pub fn from_json(text: &str) -> Result<CoverageReport, ReportParseError> {
        let doc: ReportJson = serde_json::from_str(text)?;
        let strata = doc
            .strata
            .into_iter()
            .enumerate()
            .map(|(i, r)| {
                stratum_from_fields(
                    &r.polarity,
                    &r.mode,
                    &r.fault_size,
                    r.trials,
                    r.masked,
                    r.detected,
                    r.sdc,
                )
                .map_err(|message| ReportParseError::Row {
                    line: i + 1,
                    message,
                })
            })
            .collect::<Result<_, _>>()?;
        Ok(CoverageReport {
            meta: doc.meta,
            strata,
        })
    }

    /// Per-stratum rows of a summary CSV; the `ALL` row is checked against
    /// the sum and dropped.
    pub fn strata_from_csv(text: &str) -> Result<Vec<Stratum>, ReportParseError> {
        let mut lines = text.lines();
        let header = lines.next().unwrap_or("");
        if header != SUMMARY_HEADER {
            return Err(ReportParseError::Header(header.to_string()));
        }
        let mut strata = Vec::new();
        let mut total: Option<Stratum> = None;
        for (i, line) in lines.enumerate() {
            let lineno = i + 2;
            let f: Vec<&str> = line.split(',').collect();
            let err = |message: String| ReportParseError::Row {
                line: lineno,
                message,
            };
            if f.len() != 8 {
                return Err(err(format!("expected 8 fields, found {}", f.len())));
            }
            let num = |s: &str| s.parse::<u64>().map_err(|e| err(format!("`{s}`: {e}")));
            let (t, m, d, s) = (num(f[3])?, num(f[4])?, num(f[5])?, num(f[6])?);
            if f[2] == "ALL" {
                let mut agg = Stratum::new(Polarity::Sa0, ReportMode::Random, 0);
                agg.trials = t;
                agg.masked = m;
                agg.detected = d;
                agg.sdc = s;
                total = Some(agg);
                continue;
            }
            strata.push(stratum_from_fields(f[0], f[1], f[2], t, m, d, s).map_err(err)?);
        }
        if let Some(agg) = total {
            let mut sum = Stratum::new(Polarity::Sa0, ReportMode::Random, 0);
            for s in &strata {
                sum.absorb(s);
            }
            if sum != agg {
                return Err(ReportParseError::Row {
                    line: 0,
                    message: "ALL row disagrees with strata".into(),
                });
            }
        }
        Ok(strata)
    }
}

fn stratum_from_fields(
    polarity: &str,
    mode: &str,
    size: &str,
    trials: u64,
    masked: u64,
    detected: u64,
    sdc: u64,
) -> Result<Stratum, String> {
    let polarity = polarity.parse::<Polarity>()?;
    let mode = ReportMode::parse(mode).ok_or_else(|| format!("unknown mode `{mode}`"))?;
    let fault_size = size
        .parse()
        .map_err(|_| format!("bad fault size `{size}`"))?;
    let s = Stratum {
        polarity,
        mode,
        fault_size,
        trials,
        masked,
        detected,
        sdc,
    };
    if !s.is_consistent() {
        return Err("counts do not sum to trials".into());
    }
    Ok(s)
}

/// One row of the optional per-trial log.
#[derive(Clone, PartialEq, Eq, Debug)]
pub struct TrialRecord {
    pub trial: u64,
    pub fault_size: usize,
    /// Primary input values, input `i` at index `i`.
    pub input: Vec<bool>,
    pub sites: Vec<u32>,
    pub outcome: FaultOutcomeClass,
}

/// Input vector as hex, input `i` at bit `i`.
pub fn input_hex(bits: &[bool]) -> String {
    if bits.is_empty() {
        return "0".into();
    }
    bits.chunks(4)
        .rev()
        .map(|c| {
            let nib = c
                .iter()
                .enumerate()
                .fold(0u32, |a, (i, &b)| a | ((b as u32) << i));
            char::from_digit(nib, 16).unwrap()
        })
        .collect()
}

/// Per-trial CSV with site names resolved through `site_name`.
pub fn trials_to_csv(records: &[TrialRecord], site_name: impl Fn(u32) -> String) -> String {
    let mut out = String::from(TRIAL_HEADER);
    out.push('\n');
    for r in records {
        let sites: Vec<String> = r.sites.iter().map(|&s| site_name(s)).collect();
        writeln!(
            out,
            "{},{},{},{},{}",
            r.trial,
            r.fault_size,
            input_hex(&r.input),
            sites.join(";"),
            r.outcome
        )
        .unwrap();
    }
    out
}

#[cfg(test)]
mod tests {
    use super::*;

    fn sample() -> CoverageReport {
        let mut a = Stratum::new(Polarity::Sa0, ReportMode::Random, 1);
        a.add_counts(990, FaultOutcomeClass::Detected);
        a.add_counts(8, FaultOutcomeClass::Masked);
        a.add_counts(2, FaultOutcomeClass::Sdc);
        let mut b = Stratum::new(Polarity::Sa0, ReportMode::Random, 2);
        b.add_counts(7, FaultOutcomeClass::Detected);
        CoverageReport {
            meta: ReportMeta {
                seed: 1,
                netlist_hash: "abc".into(),
                site_count: 16,
                tool_version: "0.1.0".into(),
                polarity: "sa0".into(),
                mode: "random".into(),
                input_policy: "random".into(),
            },
            strata: vec![a, b],
        }
    }

    #[test]
    fn fc_formula() {
        assert_eq!(fault_coverage(1000, 2), 0.998);
        assert_eq!(format_percent(0.998), "99.800");
        assert_eq!(format_percent(0.99831), "99.831");
        let r = sample();
        assert_eq!(r.strata[0].fc(), 0.998);
        assert!(r.strata.iter().all(|s| s.is_consistent()));
    }

    #[test]
    fn csv_layout() {
        let csv = sample().to_csv();
        let lines: Vec<&str> = csv.lines().collect();
        assert_eq!(lines[0], SUMMARY_HEADER);
        assert_eq!(lines[1], "sa0,random,1,1000,8,990,2,99.800");
        assert_eq!(lines[3], "sa0,random,ALL,1007,8,997,2,99.801");
    }

    #[test]
    fn csv_json_round_trip() {
        let r = sample();
        let csv = r.to_csv();
        assert_eq!(CoverageReport::strata_from_csv(&csv).unwrap(), r.strata);
        let back = CoverageReport::from_json(&r.to_json()).unwrap();
        assert_eq!(back, r);
        assert_eq!(back.to_csv(), csv);
    }

    #[test]
    fn csv_rejects_garbage() {
        assert!(CoverageReport::strata_from_csv("nope\n").is_err());
        let bad = format!("{SUMMARY_HEADER}\nsa0,random,1,10,1,1,1,70.000\n");
        assert!(CoverageReport::strata_from_csv(&bad).is_err());
    }

    #[test]
    fn trial_csv() {
        let recs = vec![TrialRecord {
            trial: 3,
            fault_size: 2,
            input: crate::netlist::vector_bits(0x53, 8),
            sites: vec![1, 4],
            outcome: FaultOutcomeClass::Detected,
        }];
        let csv = trials_to_csv(&recs, |s| format!("s{s}"));
        assert_eq!(csv, format!("{TRIAL_HEADER}\n3,2,53,s1;s4,detected\n"));
        assert_eq!(input_hex(&[true, false]), "1");
        assert_eq!(input_hex(&crate::netlist::vector_bits(0xa, 9)), "00a");
        assert_eq!(input_hex(&[]), "0");
    }
}
