mod common;

use proptest::prelude::*;
use scpdp_core::faultsim::report::{trials_to_csv, TRIAL_HEADER};
use scpdp_core::faultsim::{
    exhaustive_single_fault, run_campaign, run_trial, CampaignConfig, CampaignError,
    CoverageReport, FaultMode, FaultPattern, InputPolicy, Polarity,
};
use scpdp_core::netlist::{
    expand_dual_rail, parse_netlist, vector_bits, CircuitFaultSite, DualRailNetlist,
};
use scpdp_core::sbox::{build_sbox_netlist, canonical_sbox, CompositeFieldParams};
use scpdp_core::FaultOutcomeClass;

use common::{build, netspec, XOR_NETLIST};

fn dual(text: &str) -> DualRailNetlist {
    expand_dual_rail(&parse_netlist(text).unwrap())
}

fn sbox() -> DualRailNetlist {
    expand_dual_rail(&build_sbox_netlist(&CompositeFieldParams::standard()).unwrap())
}

fn site_of(d: &DualRailNetlist, name: &str) -> u32 {
    d.find_site(name)
        .unwrap_or_else(|| panic!("no site {name}")) as u32
}

#[test]
fn run_trial_examples() {
    let d = sbox();
    assert_eq!(
        run_trial(
            &d,
            &FaultPattern::empty(Polarity::Sa0),
            &vector_bits(0x53, 8)
        ),
        FaultOutcomeClass::Masked
    );

    // y0's high rail stuck opposite to its value: the pair becomes 00 or 11
    let hi = d.pair(d.source().lookup("y0").unwrap()).hi;
    let y0 = d
        .fault_sites()
        .iter()
        .position(|s| *s == CircuitFaultSite::Net(hi))
        .unwrap() as u32;
    for x in [0x00u8, 0x01, 0x53, 0xff] {
        let bit = canonical_sbox(x) & 1 == 1;
        let p = FaultPattern {
            sites: vec![y0],
            polarity: if bit { Polarity::Sa0 } else { Polarity::Sa1 },
        };
        assert_eq!(
            run_trial(&d, &p, &vector_bits(x as u128, 8)),
            FaultOutcomeClass::Detected,
            "{x:#04x}"
        );
    }

    let x = dual(XOR_NETLIST);
    let p = FaultPattern {
        sites: vec![site_of(&x, "a.hi"), site_of(&x, "a.lo")],
        polarity: Polarity::Sa1,
    };
    assert_eq!(
        run_trial(&x, &p, &[false, false]),
        FaultOutcomeClass::Detected
    );
}

#[test]
fn double_fault_across_cells_can_be_silent() {
    let x = dual(XOR_NETLIST);
    let p = FaultPattern {
        sites: vec![site_of(&x, "y@o.out"), site_of(&x, "y@ob.sum")],
        polarity: Polarity::Sa0,
    };
    assert_eq!(run_trial(&x, &p, &[true, false]), FaultOutcomeClass::Sdc);
}

#[test]
fn config_validation() {
    let d = dual(XOR_NETLIST);
    let base = CampaignConfig {
        trials: 100,
        sizes: vec![1, 2],
        ..Default::default()
    };
    assert!(base.validate(&d).is_ok());
    let bad = |c: CampaignConfig| run_campaign(&d, &c).unwrap_err();
    assert_eq!(
        bad(CampaignConfig {
            trials: 0,
            ..base.clone()
        }),
        CampaignError::ZeroTrials
    );
    assert_eq!(
        bad(CampaignConfig {
            sizes: vec![],
            ..base.clone()
        }),
        CampaignError::NoSizes
    );
    assert_eq!(
        bad(CampaignConfig {
            sizes: vec![17],
            ..base.clone()
        }),
        CampaignError::SizeOutOfRange {
            size: 17,
            sites: 16
        }
    );
    assert_eq!(
        bad(CampaignConfig {
            trials: 1,
            ..base.clone()
        }),
        CampaignError::TooFewTrials {
            trials: 1,
            strata: 2
        }
    );
    assert_eq!(
        CampaignConfig {
            trials: 400_000,
            ..Default::default()
        }
        .stratum_trials()[..2],
        [28_572, 28_572]
    );
    assert_eq!(
        CampaignConfig::default()
            .stratum_trials()
            .iter()
            .sum::<u64>(),
        400_000
    );
}

#[test]
fn determinism_across_workers() {
    let d = sbox();
    for mode in [FaultMode::Random, FaultMode::Burst] {
        let cfg = CampaignConfig {
            mode,
            trials: 3000,
            seed: 42,
            sizes: (1..=14).collect(),
            ..Default::default()
        };
        let runs: Vec<CoverageReport> = [1, 2, 5]
            .iter()
            .map(|&w| {
                run_campaign(
                    &d,
                    &CampaignConfig {
                        workers: w,
                        ..cfg.clone()
                    },
                )
                .unwrap()
                .report
            })
            .collect();
        for r in &runs[1..] {
            assert_eq!(r.to_csv(), runs[0].to_csv());
            assert_eq!(r.to_json(), runs[0].to_json());
        }
        let other = run_campaign(&d, &CampaignConfig { seed: 43, ..cfg })
            .unwrap()
            .report;
        assert_ne!(other.to_csv(), runs[0].to_csv());
    }
}

#[test]
fn per_trial_log_matches_summary() {
    let d = dual(XOR_NETLIST);
    let cfg = CampaignConfig {
        trials: 50,
        sizes: vec![1, 3],
        record_trials: true,
        ..Default::default()
    };
    let r = run_campaign(&d, &cfg).unwrap();
    assert_eq!(r.trials.len(), 50);
    assert_eq!(
        r.trials.iter().map(|t| t.trial).collect::<Vec<_>>(),
        (0..50).collect::<Vec<u64>>()
    );
    let sdc = r
        .trials
        .iter()
        .filter(|t| t.outcome == FaultOutcomeClass::Sdc)
        .count() as u64;
    assert_eq!(sdc, r.report.aggregate().sdc);
    let sites = d.fault_sites();
    let csv = trials_to_csv(&r.trials, |s| d.site_name(&sites[s as usize]));
    assert!(csv.starts_with(TRIAL_HEADER));
    assert_eq!(csv.lines().count(), 51);

    // replaying a logged trial gives the logged outcome
    for t in &r.trials {
        let p = FaultPattern {
            sites: t.sites.clone(),
            polarity: Polarity::Sa0,
        };
        assert_eq!(run_trial(&d, &p, &t.input), t.outcome);
    }

    let ex = run_campaign(
        &d,
        &CampaignConfig {
            inputs: InputPolicy::Exhaustive,
            ..cfg
        },
    )
    .unwrap();
    assert_eq!(ex.report.aggregate().trials, 200);
    assert_eq!(ex.trials.len(), 200);
}

#[test]
fn single_gate_netlists_have_full_single_fault_coverage() {
    for kind in ["and", "or", "xor", "nand", "nor", "xnor"] {
        let d = dual(&format!("input a b\noutput y\ngate {kind} y a b\n"));
        let r = exhaustive_single_fault(&d, 0, 0, 1).unwrap();
        assert!(r.sdc.is_empty(), "{kind}: {:?}", r.sdc);
        assert_eq!(r.report.aggregate().trials, 16 * 2 * 4);
        assert_eq!(r.report.fc(), 1.0);
    }
}

#[test]
fn not_only_netlist_never_corrupts_silently() {
    let d = dual("input a\noutput y\ngate not y a\n");
    assert_eq!(d.site_count(), 2);
    let r = exhaustive_single_fault(&d, 0, 0, 0).unwrap();
    assert!(r.sdc.is_empty());
    assert_eq!(r.report.aggregate().trials, 2 * 2 * 2);
}

#[test]
fn sampled_vectors_for_wide_netlists() {
    let mut text = String::from("input");
    for i in 0..22 {
        text.push_str(&format!(" x{i}"));
    }
    text.push_str("\noutput y\ngate and y x0 x21\n");
    let d = dual(&text);
    let r = exhaustive_single_fault(&d, 100, 9, 0).unwrap();
    assert_eq!(r.report.meta.input_policy, "random");
    assert_eq!(r.report.aggregate().trials, d.site_count() as u64 * 2 * 100);
    assert_eq!(
        exhaustive_single_fault(&d, 0, 9, 0).unwrap_err(),
        CampaignError::ZeroTrials
    );
}

/// Exact outcome distribution by enumerating every pattern of size k and
/// every input vector.
fn exact_distribution(
    d: &DualRailNetlist,
    k: usize,
    mode: FaultMode,
    polarity: Polarity,
) -> [f64; 3] {
    let s = d.site_count();
    let mut patterns: Vec<Vec<u32>> = Vec::new();
    match mode {
        FaultMode::Burst => {
            for start in 0..=(s - k) as u32 {
                patterns.push((start..start + k as u32).collect());
            }
        }
        FaultMode::Random => {
            let mut idx: Vec<u32> = (0..k as u32).collect();
            loop {
                patterns.push(idx.clone());
                let mut i = k;
                while i > 0 && idx[i - 1] as usize == s - k + i - 1 {
                    i -= 1;
                }
                if i == 0 {
                    break;
                }
                idx[i - 1] += 1;
                for j in i..k {
                    idx[j] = idx[j - 1] + 1;
                }
            }
        }
    }
    let n = d.input_count();
    let mut counts = [0u64; 3];
    for p in &patterns {
        let fp = FaultPattern {
            sites: p.clone(),
            polarity,
        };
        for v in 0..1u128 << n {
            counts[run_trial(d, &fp, &vector_bits(v, n)) as usize] += 1;
        }
    }
    let total = counts.iter().sum::<u64>() as f64;
    counts.map(|c| c as f64 / total)
}

/// Pearson statistic against the exact distribution; categories with zero
/// probability must be empty.
fn chi_squared(observed: [u64; 3], p: [f64; 3]) -> f64 {
    let n = observed.iter().sum::<u64>() as f64;
    let mut stat = 0.0;
    for (o, p) in observed.iter().zip(p) {
        if p == 0.0 {
            assert_eq!(*o, 0, "observed an impossible outcome");
            continue;
        }
        let e = n * p;
        stat += (*o as f64 - e).powi(2) / e;
    }
    stat
}

// chi-squared, 2 degrees of freedom, p = 0.001
const CHI2_CRIT: f64 = 13.82;

fn cross_check(d: &DualRailNetlist, sizes: Vec<usize>, mode: FaultMode, trials: u64) {
    for polarity in [Polarity::Sa0, Polarity::Sa1] {
        let cfg = CampaignConfig {
            polarity,
            mode,
            sizes: sizes.clone(),
            trials,
            seed: 7,
            ..Default::default()
        };
        let r = run_campaign(d, &cfg).unwrap().report;
        for st in &r.strata {
            let exact = exact_distribution(d, st.fault_size, mode, polarity);
            let stat = chi_squared([st.masked, st.detected, st.sdc], exact);
            assert!(
                stat < CHI2_CRIT,
                "{polarity} {mode} k={}: chi2 {stat:.2}, exact {exact:?}, {st:?}",
                st.fault_size
            );
        }
    }
}

#[test]
fn campaign_frequencies_match_enumeration_small_circuit() {
    // 8 sites: three input pairs plus const1
    let d = dual("input a b c\noutput y z w k\ngate not y a\ngate buf z b\ngate not w c\ngate buf k const1\n");
    assert_eq!(d.site_count(), 8);
    cross_check(&d, (1..=8).collect(), FaultMode::Random, 8 * 4000);
    cross_check(&d, (1..=8).collect(), FaultMode::Burst, 8 * 4000);
}

#[test]
fn campaign_frequencies_match_enumeration_xor() {
    let d = dual(XOR_NETLIST);
    cross_check(&d, vec![1, 2, 3], FaultMode::Random, 3 * 6000);
    cross_check(&d, (1..=16).collect(), FaultMode::Burst, 16 * 3000);
}

#[test]
fn outputs_all_stuck_is_never_silent() {
    let d = sbox();
    let sites: Vec<u32> = d
        .source()
        .outputs()
        .iter()
        .flat_map(|&s| {
            let p = d.pair(s);
            [p.hi, p.lo]
        })
        .map(|net| {
            d.fault_sites()
                .iter()
                .position(|s| *s == CircuitFaultSite::Net(net))
                .unwrap() as u32
        })
        .collect();
    for polarity in [Polarity::Sa0, Polarity::Sa1] {
        let p = FaultPattern {
            sites: sites.clone(),
            polarity,
        };
        for x in 0..256u128 {
            assert_ne!(
                run_trial(&d, &p, &vector_bits(x, 8)),
                FaultOutcomeClass::Sdc
            );
        }
    }
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(32))]

    #[test]
    fn strata_account_for_every_trial(spec in netspec(), seed in any::<u64>(), burst in any::<bool>()) {
        let d = expand_dual_rail(&build(&spec));
        let k_max = d.site_count().min(6);
        let cfg = CampaignConfig {
            mode: if burst { FaultMode::Burst } else { FaultMode::Random },
            sizes: (1..=k_max).collect(),
            trials: 97,
            seed,
            ..Default::default()
        };
        let r = run_campaign(&d, &cfg).unwrap().report;
        prop_assert_eq!(r.aggregate().trials, 97);
        for s in &r.strata {
            prop_assert!(s.is_consistent());
            prop_assert!((0.0..=1.0).contains(&s.fc()));
        }
        let again = run_campaign(&d, &CampaignConfig { workers: 3, ..cfg }).unwrap().report;
        prop_assert_eq!(again, r.clone());
        prop_assert_eq!(CoverageReport::from_json(&r.to_json()).unwrap().to_csv(), r.to_csv());
    }
}
