use rayon::prelude::*;

use super::pattern::{sample_pattern, FaultMode, FaultPattern, Polarity};
use super::report::{CoverageReport, ReportMeta, ReportMode, Stratum, TrialRecord};
use super::rng::{trial_rng, SplitMix64};
use super::CampaignError;
use crate::gate::{classify_words, FaultOutcomeClass};
use crate::netlist::{
    exhaustive_block, exhaustive_block_count, DualRailNetlist, Injection, Simulator,
};

/// Largest input count for which every input vector is enumerated.
pub const MAX_EXHAUSTIVE_INPUTS: usize = 20;

// golden outputs are tabulated up front for netlists this small
const GOLDEN_CACHE_INPUTS: usize = 16;

const CHUNK: u64 = 2048;

#[derive(Clone, Copy, PartialEq, Eq, Debug)]
pub enum InputPolicy {
    /// One uniformly random input vector per trial.
    Random,
    /// Every pattern is applied to all `2^n` input vectors; each
    /// (pattern, vector) pair counts as one trial.
    Exhaustive,
}

impl InputPolicy {
    pub fn name(self) -> &'static str {
        match self {
            InputPolicy::Random => "random",
            InputPolicy::Exhaustive => "exhaustive",
        }
    }
}

impl std::str::FromStr for InputPolicy {
    type Err = String;
    fn from_str(s: &str) -> Result<Self, String> {
        match s {
            "random" => Ok(InputPolicy::Random),
            "exhaustive" => Ok(InputPolicy::Exhaustive),
            _ => Err(format!(
                "unknown input policy `{s}` (expected random or exhaustive)"
            )),
        }
    }
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct CampaignConfig {
    pub polarity: Polarity,
    pub mode: FaultMode,
    /// Fault sizes `k`, one stratum each.
    pub sizes: Vec<usize>,
    /// Fault patterns drawn in total, split evenly over `sizes`; the first
    /// `trials % sizes.len()` sizes get one extra.
    pub trials: u64,
    pub seed: u64,
    pub inputs: InputPolicy,
    /// Worker threads; 0 uses the global rayon pool.
    pub workers: usize,
    pub record_trials: bool,
}

impl Default for CampaignConfig {
    fn default() -> Self {
        CampaignConfig {
            polarity: Polarity::Sa0,
            mode: FaultMode::Random,
            sizes: (1..=14).collect(),
            trials: 400_000,
            seed: 1,
            inputs: InputPolicy::Random,
            workers: 0,
            record_trials: false,
        }
    }
}

impl CampaignConfig {
    pub fn validate(&self, d: &DualRailNetlist) -> Result<(), CampaignError> {
        let sites = d.site_count();
        if sites == 0 {
            return Err(CampaignError::NoSites);
        }
        if self.sizes.is_empty() {
            return Err(CampaignError::NoSizes);
        }
        if self.trials == 0 {
            return Err(CampaignError::ZeroTrials);
        }
        if self.trials < self.sizes.len() as u64 {
            return Err(CampaignError::TooFewTrials {
                trials: self.trials,
                strata: self.sizes.len(),
            });
        }
        if let Some(&k) = self.sizes.iter().find(|&&k| k == 0 || k > sites) {
            return Err(CampaignError::SizeOutOfRange { size: k, sites });
        }
        if self.inputs == InputPolicy::Exhaustive && d.input_count() > MAX_EXHAUSTIVE_INPUTS {
            return Err(CampaignError::TooManyInputs {
                inputs: d.input_count(),
                max: MAX_EXHAUSTIVE_INPUTS,
            });
        }
        Ok(())
    }

    /// Patterns drawn per stratum.
    pub fn stratum_trials(&self) -> Vec<u64> {
        let n = self.sizes.len() as u64;
        (0..n)
            .map(|i| self.trials / n + u64::from(i < self.trials % n))
            .collect()
    }
}

#[derive(Clone, Debug)]
pub struct CampaignResult {
    pub report: CoverageReport,
    /// Filled when `record_trials` is set.
    pub trials: Vec<TrialRecord>,
}

/// Run `f` on a pool of `workers` threads (0: the global pool).
pub(crate) fn with_workers<T: Send>(
    workers: usize,
    f: impl FnOnce() -> T + Send,
) -> Result<T, CampaignError> {
    if workers == 0 {
        return Ok(f());
    }
    let pool = rayon::ThreadPoolBuilder::new()
        .num_threads(workers)
        .build()
        .map_err(|e| CampaignError::ThreadPool(e.to_string()))?;
    Ok(pool.install(f))
}

/// Input vectors in 64-lane blocks together with fault-free outputs.
struct VectorSet {
    blocks: Vec<Block>,
}

struct Block {
    inputs: Vec<u64>,
    active: u64,
    golden: Vec<(u64, u64)>,
}

impl VectorSet {
    fn exhaustive(d: &DualRailNetlist) -> Self {
        let n = d.input_count();
        let mut sim = Simulator::new(d);
        let blocks = (0..exhaustive_block_count(n))
            .map(|b| {
                let (inputs, active) = exhaustive_block(n, b);
                let golden = sim.run(&inputs, None);
                Block {
                    inputs,
                    active,
                    golden,
                }
            })
            .collect();
        VectorSet { blocks }
    }

    /// `count` vectors from a fixed seeded stream.
    fn sampled(d: &DualRailNetlist, count: u64, seed: u64) -> Self {
        let n = d.input_count();
        let mut rng = SplitMix64::new(seed);
        let mut sim = Simulator::new(d);
        let mut blocks = Vec::new();
        let mut left = count;
        while left > 0 {
            let lanes = left.min(64);
            let mut inputs = vec![0u64; n];
            for l in 0..lanes {
                for (i, bit) in draw_input(&mut rng, n).into_iter().enumerate() {
                    inputs[i] |= (bit as u64) << l;
                }
            }
            let active = if lanes == 64 { !0 } else { (1u64 << lanes) - 1 };
            let golden = sim.run(&inputs, None);
            blocks.push(Block {
                inputs,
                active,
                golden,
            });
            left -= lanes;
        }
        VectorSet { blocks }
    }

    fn lane_bits(&self, block: usize, lane: u32) -> Vec<bool> {
        self.blocks[block]
            .inputs
            .iter()
            .map(|w| (w >> lane) & 1 == 1)
            .collect()
    }

    /// Fault-free outputs of exhaustive vector `v`, moved to lane 0.
    fn golden_of(&self, v: usize) -> Vec<(u64, u64)> {
        let lane = (v % 64) as u32;
        self.blocks[v / 64]
            .golden
            .iter()
            .map(|&(h, l)| ((h >> lane) & 1, (l >> lane) & 1))
            .collect()
    }
}

fn draw_input(rng: &mut SplitMix64, n: usize) -> Vec<bool> {
    let mut bits = Vec::with_capacity(n);
    while bits.len() < n {
        let w = rng.next_u64();
        let take = (n - bits.len()).min(64);
        bits.extend((0..take).map(|i| (w >> i) & 1 == 1));
    }
    bits
}

fn lane0_words(bits: &[bool]) -> Vec<u64> {
    bits.iter().map(|&b| b as u64).collect()
}

fn class_of(masked: u64, detected: u64, sdc: u64) -> FaultOutcomeClass {
    if sdc != 0 {
        FaultOutcomeClass::Sdc
    } else if detected != 0 {
        FaultOutcomeClass::Detected
    } else {
        debug_assert!(masked != 0);
        FaultOutcomeClass::Masked
    }
}

fn load(inj: &mut Injection, d: &DualRailNetlist, pattern: &FaultPattern) {
    inj.clear();
    let sites = d.fault_sites();
    let v = pattern.polarity.stuck_value();
    for &s in &pattern.sites {
        inj.insert(&sites[s as usize], v);
    }
}

/// Apply one fault pattern to one input vector and classify the outputs.
pub fn run_trial(d: &DualRailNetlist, pattern: &FaultPattern, input: &[bool]) -> FaultOutcomeClass {
    let words = lane0_words(input);
    let mut sim = Simulator::new(d);
    let golden = sim.run(&words, None);
    let mut inj = Injection::new(d);
    load(&mut inj, d, pattern);
    let faulty = sim.run(&words, Some(&inj));
    let (m, det, s) = classify_words(&golden, &faulty, 1);
    class_of(m, det, s)
}

struct Ctx<'a> {
    d: &'a DualRailNetlist,
    cfg: &'a CampaignConfig,
    vectors: Option<VectorSet>,
}

#[derive(Default)]
struct ChunkOut {
    counts: [u64; 3],
    records: Vec<TrialRecord>,
}

impl ChunkOut {
    fn add(&mut self, c: FaultOutcomeClass, n: u64) {
        self.counts[c as usize] += n;
    }
}

fn run_chunk(ctx: &Ctx, k: usize, start: u64, len: u64) -> ChunkOut {
    let (d, cfg) = (ctx.d, ctx.cfg);
    let n = d.input_count();
    let mut sim = Simulator::new(d);
    let mut inj = Injection::new(d);
    let mut out = ChunkOut::default();
    for idx in start..start + len {
        let mut rng = trial_rng(cfg.seed, idx);
        match cfg.inputs {
            InputPolicy::Random => {
                let input = draw_input(&mut rng, n);
                let pattern = sample_pattern(&mut rng, d.site_count(), k, cfg.mode, cfg.polarity)
                    .expect("sizes validated");
                let words = lane0_words(&input);
                let golden = match &ctx.vectors {
                    Some(v) => v.golden_of(
                        input
                            .iter()
                            .enumerate()
                            .fold(0usize, |a, (i, &b)| a | ((b as usize) << i)),
                    ),
                    None => sim.run(&words, None),
                };
                load(&mut inj, d, &pattern);
                let faulty = sim.run(&words, Some(&inj));
                let (m, det, s) = classify_words(&golden, &faulty, 1);
                let class = class_of(m, det, s);
                out.add(class, 1);
                if cfg.record_trials {
                    out.records.push(TrialRecord {
                        trial: idx,
                        fault_size: k,
                        input,
                        sites: pattern.sites,
                        outcome: class,
                    });
                }
            }
            InputPolicy::Exhaustive => {
                let vectors = ctx.vectors.as_ref().expect("vector set built");
                let pattern = sample_pattern(&mut rng, d.site_count(), k, cfg.mode, cfg.polarity)
                    .expect("sizes validated");
                load(&mut inj, d, &pattern);
                for (bi, block) in vectors.blocks.iter().enumerate() {
                    let faulty = sim.run(&block.inputs, Some(&inj));
                    let (m, det, s) = classify_words(&block.golden, &faulty, block.active);
                    out.add(FaultOutcomeClass::Masked, m.count_ones() as u64);
                    out.add(FaultOutcomeClass::Detected, det.count_ones() as u64);
                    out.add(FaultOutcomeClass::Sdc, s.count_ones() as u64);
                    if cfg.record_trials {
                        for lane in 0..64u32 {
                            if (block.active >> lane) & 1 == 0 {
                                continue;
                            }
                            out.records.push(TrialRecord {
                                trial: idx,
                                fault_size: k,
                                input: vectors.lane_bits(bi, lane),
                                sites: pattern.sites.clone(),
                                outcome: class_of(
                                    (m >> lane) & 1,
                                    (det >> lane) & 1,
                                    (s >> lane) & 1,
                                ),
                            });
                        }
                    }
                }
            }
        }
    }
    out
}

/// Run a campaign. The result depends only on the netlist and `cfg` minus
/// `workers`: trial `i` (numbered across strata in order) draws from
/// `trial_rng(seed, i)`, first the input vector, then the pattern.
pub fn run_campaign(
    d: &DualRailNetlist,
    cfg: &CampaignConfig,
) -> Result<CampaignResult, CampaignError> {
    cfg.validate(d)?;
    let n = d.input_count();
    let vectors = match cfg.inputs {
        InputPolicy::Exhaustive => Some(VectorSet::exhaustive(d)),
        InputPolicy::Random if n <= GOLDEN_CACHE_INPUTS => Some(VectorSet::exhaustive(d)),
        InputPolicy::Random => None,
    };
    let ctx = Ctx { d, cfg, vectors };

    let mut chunks = Vec::new();
    let mut offset = 0u64;
    for (si, (&k, count)) in cfg.sizes.iter().zip(cfg.stratum_trials()).enumerate() {
        let mut t = 0;
        while t < count {
            let len = CHUNK.min(count - t);
            chunks.push((si, k, offset + t, len));
            t += len;
        }
        offset += count;
    }

    let outs: Vec<ChunkOut> = with_workers(cfg.workers, || {
        chunks
            .par_iter()
            .map(|&(_, k, start, len)| run_chunk(&ctx, k, start, len))
            .collect()
    })?;

    let mode = ReportMode::from(cfg.mode);
    let mut strata: Vec<Stratum> = cfg
        .sizes
        .iter()
        .map(|&k| Stratum::new(cfg.polarity, mode, k))
        .collect();
    let mut records = Vec::new();
    for (&(si, ..), out) in chunks.iter().zip(outs) {
        for c in [
            FaultOutcomeClass::Masked,
            FaultOutcomeClass::Detected,
            FaultOutcomeClass::Sdc,
        ] {
            strata[si].add_counts(out.counts[c as usize], c);
        }
        records.extend(out.records);
    }
    let report = CoverageReport {
        meta: ReportMeta {
            seed: cfg.seed,
            netlist_hash: d.fingerprint().to_string(),
            site_count: d.site_count(),
            tool_version: crate::VERSION.to_string(),
            polarity: cfg.polarity.name().into(),
            mode: mode.name().into(),
            input_policy: cfg.inputs.name().into(),
        },
        strata,
    };
    Ok(CampaignResult {
        report,
        trials: records,
    })
}

/// A single stuck-at fault that corrupted the outputs without detection.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct SdcCase {
    pub site: usize,
    pub polarity: Polarity,
    pub input: Vec<bool>,
}

#[derive(Clone, Debug)]
pub struct SingleFaultResult {
    /// Strata `sa0 k=1` and `sa1 k=1`, one trial per (site, input vector).
    pub report: CoverageReport,
    pub sdc: Vec<SdcCase>,
}

/// Every site at both polarities against every input vector, or against
/// `vector_budget` seeded random vectors when the netlist has more than
/// [`MAX_EXHAUSTIVE_INPUTS`] inputs.
pub fn exhaustive_single_fault(
    d: &DualRailNetlist,
    vector_budget: u64,
    seed: u64,
    workers: usize,
) -> Result<SingleFaultResult, CampaignError> {
    if d.site_count() == 0 {
        return Err(CampaignError::NoSites);
    }
    let exhaustive = d.input_count() <= MAX_EXHAUSTIVE_INPUTS;
    let vectors = if exhaustive {
        VectorSet::exhaustive(d)
    } else {
        if vector_budget == 0 {
            return Err(CampaignError::ZeroTrials);
        }
        VectorSet::sampled(d, vector_budget, seed)
    };
    let jobs: Vec<(usize, Polarity)> = [Polarity::Sa0, Polarity::Sa1]
        .into_iter()
        .flat_map(|p| (0..d.site_count()).map(move |s| (s, p)))
        .collect();
    let per_job: Vec<([u64; 3], Vec<SdcCase>)> = with_workers(workers, || {
        jobs.par_iter()
            .map_init(
                || (Simulator::new(d), Injection::new(d)),
                |(sim, inj), &(site, polarity)| {
                    load(
                        inj,
                        d,
                        &FaultPattern {
                            sites: vec![site as u32],
                            polarity,
                        },
                    );
                    let mut counts = [0u64; 3];
                    let mut sdc = Vec::new();
                    for (bi, block) in vectors.blocks.iter().enumerate() {
                        let faulty = sim.run(&block.inputs, Some(inj));
                        let (m, det, s) = classify_words(&block.golden, &faulty, block.active);
                        counts[0] += m.count_ones() as u64;
                        counts[1] += det.count_ones() as u64;
                        counts[2] += s.count_ones() as u64;
                        let mut bits = s;
                        while bits != 0 {
                            let lane = bits.trailing_zeros();
                            sdc.push(SdcCase {
                                site,
                                polarity,
                                input: vectors.lane_bits(bi, lane),
                            });
                            bits &= bits - 1;
                        }
                    }
                    (counts, sdc)
                },
            )
            .collect()
    })?;

    let mut strata = [
        Stratum::new(Polarity::Sa0, ReportMode::Exhaustive, 1),
        Stratum::new(Polarity::Sa1, ReportMode::Exhaustive, 1),
    ];
    let mut sdc = Vec::new();
    for (&(_, p), (counts, cases)) in jobs.iter().zip(per_job) {
        let st = &mut strata[p as usize];
        st.add_counts(counts[0], FaultOutcomeClass::Masked);
        st.add_counts(counts[1], FaultOutcomeClass::Detected);
        st.add_counts(counts[2], FaultOutcomeClass::Sdc);
        sdc.extend(cases);
    }
    let report = CoverageReport {
        meta: ReportMeta {
            seed,
            netlist_hash: d.fingerprint().to_string(),
            site_count: d.site_count(),
            tool_version: crate::VERSION.to_string(),
            polarity: "both".into(),
            mode: ReportMode::Exhaustive.name().into(),
            input_policy: if exhaustive { "exhaustive" } else { "random" }.into(),
        },
        strata: strata.to_vec(),
    };
    Ok(SingleFaultResult { report, sdc })
}
