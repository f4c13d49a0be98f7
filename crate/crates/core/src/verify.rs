//! Exhaustive per-gate checks: truth tables, Boolean Difference tables and
//! the single-fault detection proof.

use std::fmt;

use crate::gate::{
    classify, FaultOutcomeClass, GateKind, GateWiring, InputRail, LocalFaultSite, OutputRail,
    RailPair, LOCAL_SITE_COUNT,
};

/// Assignment of the four input rails, indexed by [`InputRail::index`].
pub type RailValues = [bool; 4];

fn pairs_of(r: &RailValues) -> (RailPair, RailPair) {
    (RailPair::new(r[0], r[1]), RailPair::new(r[2], r[3]))
}

/// Value of one output rail with the four input rails driven independently.
pub fn rail_function(w: &GateWiring, kind: GateKind, rail: OutputRail, rails: &RailValues) -> bool {
    let (a, b) = pairs_of(rails);
    let out = w.eval(kind, a, b, &[]);
    match rail {
        OutputRail::O => out.hi,
        OutputRail::OBar => out.lo,
    }
}

/// Returns the first valid input `(a, b)` on which the gate disagrees with
/// its Boolean function, or `None` when all four agree.
pub fn gate_truth_mismatch(w: &GateWiring, kind: GateKind) -> Option<(bool, bool, RailPair)> {
    for a in [false, true] {
        for b in [false, true] {
            let out = w.eval(kind, RailPair::encode(a), RailPair::encode(b), &[]);
            if out != RailPair::encode(kind.apply(a, b)) {
                return Some((a, b, out));
            }
        }
    }
    None
}

pub fn gate_truth_check(kind: GateKind) -> bool {
    gate_truth_mismatch(&GateWiring::SCPDP, kind).is_none()
}

/// `f(s=0) XOR f(s=1)` tabulated over the three rails other than `s`.
///
/// Row `i` assigns `others[j]` the value of bit `j` of `i`.
#[derive(Clone, Copy, PartialEq, Eq, Debug)]
pub struct BdTable {
    pub kind: GateKind,
    pub rail: OutputRail,
    pub wrt: InputRail,
    pub others: [InputRail; 3],
    pub rows: [bool; 8],
}

impl BdTable {
    /// Full rail assignment for `row`, with `wrt` set to `wrt_value`.
    pub fn assignment(&self, row: usize, wrt_value: bool) -> RailValues {
        let mut r = [false; 4];
        r[self.wrt.index()] = wrt_value;
        for (j, o) in self.others.iter().enumerate() {
            r[o.index()] = (row >> j) & 1 == 1;
        }
        r
    }

    pub fn is_constant(&self, v: bool) -> bool {
        self.rows.iter().all(|&x| x == v)
    }

    /// True when the table equals `g` on every row.
    pub fn matches(&self, g: impl Fn(&RailValues) -> bool) -> bool {
        (0..8).all(|i| self.rows[i] == g(&self.assignment(i, false)))
    }

    /// True when the table equals `g` on every row where the other input's
    /// rails form a valid code (the single-fault premise).
    pub fn matches_on_valid_other(&self, g: impl Fn(&RailValues) -> bool) -> bool {
        let (x, y) = match self.wrt {
            InputRail::A | InputRail::ABar => (InputRail::B, InputRail::BBar),
            InputRail::B | InputRail::BBar => (InputRail::A, InputRail::ABar),
        };
        (0..8).all(|i| {
            let r = self.assignment(i, false);
            r[x.index()] == r[y.index()] || self.rows[i] == g(&r)
        })
    }

    /// Compact expression for the table over the remaining rails.
    pub fn describe(&self) -> String {
        if self.is_constant(false) {
            return "0".into();
        }
        if self.is_constant(true) {
            return "1".into();
        }
        for o in self.others {
            for neg in [false, true] {
                if self.matches(|r| r[o.index()] ^ neg) {
                    return literal(o, neg);
                }
            }
        }
        for (i, x) in self.others.iter().enumerate() {
            for y in &self.others[i + 1..] {
                if self.matches(|r| r[x.index()] ^ r[y.index()]) {
                    return format!("{x} ^ {y}");
                }
                if self.matches(|r| !(r[x.index()] ^ r[y.index()])) {
                    return format!("~({x} ^ {y})");
                }
            }
        }
        let terms: Vec<String> = (0..8)
            .filter(|&i| self.rows[i])
            .map(|i| {
                self.others
                    .iter()
                    .enumerate()
                    .map(|(j, o)| literal(*o, (i >> j) & 1 == 0))
                    .collect::<Vec<_>>()
                    .join("&")
            })
            .collect();
        terms.join(" | ")
    }
}

fn literal(r: InputRail, negated: bool) -> String {
    if negated {
        format!("~{r}")
    } else {
        r.to_string()
    }
}

impl fmt::Display for BdTable {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "d{}/d{} = {}", self.rail, self.wrt, self.describe())
    }
}

pub fn boolean_difference_with(
    w: &GateWiring,
    kind: GateKind,
    rail: OutputRail,
    wrt: InputRail,
) -> BdTable {
    let mut others = [InputRail::A; 3];
    for (slot, r) in others
        .iter_mut()
        .zip(InputRail::ALL.into_iter().filter(|&r| r != wrt))
    {
        *slot = r;
    }
    let mut t = BdTable {
        kind,
        rail,
        wrt,
        others,
        rows: [false; 8],
    };
    for i in 0..8 {
        let f0 = rail_function(w, kind, rail, &t.assignment(i, false));
        let f1 = rail_function(w, kind, rail, &t.assignment(i, true));
        t.rows[i] = f0 ^ f1;
    }
    t
}

pub fn boolean_difference(kind: GateKind, rail: OutputRail, wrt: InputRail) -> BdTable {
    boolean_difference_with(&GateWiring::SCPDP, kind, rail, wrt)
}

/// Every `(output rail, input rail)` table of one gate, `O` first.
pub fn boolean_difference_tables(w: &GateWiring, kind: GateKind) -> Vec<BdTable> {
    OutputRail::ALL
        .into_iter()
        .flat_map(|rail| {
            InputRail::ALL
                .into_iter()
                .map(move |wrt| boolean_difference_with(w, kind, rail, wrt))
        })
        .collect()
}

/// One closed-form dependency of the XOR gate's outputs.
pub struct BdIdentity {
    pub rail: OutputRail,
    pub wrt: InputRail,
    /// Human-readable form of the expected result.
    pub expected: &'static str,
    /// Expected result as a function of the four rails, exact on all rows.
    pub exact: fn(&RailValues) -> bool,
    /// Simplified constant that holds once the other input is a valid code.
    pub on_valid_other: Option<bool>,
}

const A: usize = 0;
const AB: usize = 1;
const B: usize = 2;
const BB: usize = 3;

/// The eight XOR dependencies, in the order `dO/d{A, B, A_bar, B_bar}`
/// then `dO_bar/d{A, B, A_bar, B_bar}`.
pub fn xor_bd_identities() -> Vec<BdIdentity> {
    use InputRail as R;
    use OutputRail as O;
    vec![
        BdIdentity {
            rail: O::O,
            wrt: R::A,
            expected: "0",
            exact: |_| false,
            on_valid_other: None,
        },
        BdIdentity {
            rail: O::O,
            wrt: R::B,
            expected: "~A_bar",
            exact: |r| !r[AB],
            on_valid_other: None,
        },
        BdIdentity {
            rail: O::O,
            wrt: R::ABar,
            expected: "~B ^ ~B_bar",
            exact: |r| !r[B] ^ !r[BB],
            on_valid_other: Some(true),
        },
        BdIdentity {
            rail: O::O,
            wrt: R::BBar,
            expected: "A_bar",
            exact: |r| r[AB],
            on_valid_other: None,
        },
        BdIdentity {
            rail: O::OBar,
            wrt: R::A,
            expected: "~B ^ ~B_bar",
            exact: |r| !r[B] ^ !r[BB],
            on_valid_other: Some(true),
        },
        BdIdentity {
            rail: O::OBar,
            wrt: R::B,
            expected: "~A",
            exact: |r| !r[A],
            on_valid_other: None,
        },
        BdIdentity {
            rail: O::OBar,
            wrt: R::ABar,
            expected: "0",
            exact: |_| false,
            on_valid_other: None,
        },
        BdIdentity {
            rail: O::OBar,
            wrt: R::BBar,
            expected: "A",
            exact: |r| r[A],
            on_valid_other: None,
        },
    ]
}

/// Result of checking one [`BdIdentity`] against a wiring.
#[derive(Clone, Debug)]
pub struct BdCheck {
    pub table: BdTable,
    pub expected: &'static str,
    pub exact_ok: bool,
    pub valid_other_ok: Option<bool>,
}

impl BdCheck {
    pub fn passed(&self) -> bool {
        self.exact_ok && self.valid_other_ok.unwrap_or(true)
    }
}

pub fn check_xor_identities(w: &GateWiring) -> Vec<BdCheck> {
    xor_bd_identities()
        .into_iter()
        .map(|id| {
            let table = boolean_difference_with(w, GateKind::Xor, id.rail, id.wrt);
            BdCheck {
                exact_ok: table.matches(id.exact),
                valid_other_ok: id
                    .on_valid_other
                    .map(|c| table.matches_on_valid_other(|_| c)),
                expected: id.expected,
                table,
            }
        })
        .collect()
}

/// Per-site outcome counts of a gate-level exhaustive single-fault sweep.
#[derive(Clone, Copy, PartialEq, Eq, Debug, Default)]
pub struct SiteCounts {
    pub masked: u32,
    pub detected: u32,
    pub sdc: u32,
}

impl SiteCounts {
    pub fn total(&self) -> u32 {
        self.masked + self.detected + self.sdc
    }

    fn add(&mut self, c: FaultOutcomeClass) {
        match c {
            FaultOutcomeClass::Masked => self.masked += 1,
            FaultOutcomeClass::Detected => self.detected += 1,
            FaultOutcomeClass::Sdc => self.sdc += 1,
        }
    }
}

#[derive(Clone, Copy, PartialEq, Eq, Debug)]
pub struct GateSdcCase {
    pub site: LocalFaultSite,
    pub stuck: bool,
    pub a: bool,
    pub b: bool,
    pub output: RailPair,
}

impl fmt::Display for GateSdcCase {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(
            f,
            "site {} stuck-at-{} with A={} B={} gives {}",
            self.site, self.stuck as u8, self.a as u8, self.b as u8, self.output
        )
    }
}

#[derive(Clone, Debug)]
pub struct GateFaultMatrix {
    pub kind: GateKind,
    pub per_site: [SiteCounts; LOCAL_SITE_COUNT],
    pub sdc_cases: Vec<GateSdcCase>,
}

impl GateFaultMatrix {
    pub fn totals(&self) -> SiteCounts {
        self.per_site
            .iter()
            .fold(SiteCounts::default(), |acc, c| SiteCounts {
                masked: acc.masked + c.masked,
                detected: acc.detected + c.detected,
                sdc: acc.sdc + c.sdc,
            })
    }

    /// `Ok` when no silent corruption was observed, else every SDC case.
    pub fn check(&self) -> Result<(), &[GateSdcCase]> {
        if self.sdc_cases.is_empty() {
            Ok(())
        } else {
            Err(&self.sdc_cases)
        }
    }
}

/// Outcome of a single stuck-at fault on a valid input.
pub fn single_fault_outcome(
    w: &GateWiring,
    kind: GateKind,
    site: LocalFaultSite,
    stuck: bool,
    a: bool,
    b: bool,
) -> (FaultOutcomeClass, RailPair) {
    let (pa, pb) = (RailPair::encode(a), RailPair::encode(b));
    let good = w.eval(kind, pa, pb, &[]);
    let bad = w.eval(kind, pa, pb, &[(site, stuck)]);
    (classify(&[good], &[bad]), bad)
}

/// All 16 sites x 2 polarities x 4 valid inputs.
pub fn single_fault_exhaustive_gate_with(w: &GateWiring, kind: GateKind) -> GateFaultMatrix {
    let mut m = GateFaultMatrix {
        kind,
        per_site: [SiteCounts::default(); LOCAL_SITE_COUNT],
        sdc_cases: Vec::new(),
    };
    for site in LocalFaultSite::all() {
        for stuck in [false, true] {
            for a in [false, true] {
                for b in [false, true] {
                    let (class, output) = single_fault_outcome(w, kind, site, stuck, a, b);
                    m.per_site[site.index()].add(class);
                    if class == FaultOutcomeClass::Sdc {
                        m.sdc_cases.push(GateSdcCase {
                            site,
                            stuck,
                            a,
                            b,
                            output,
                        });
                    }
                }
            }
        }
    }
    m
}

pub fn single_fault_exhaustive_gate(kind: GateKind) -> GateFaultMatrix {
    single_fault_exhaustive_gate_with(&GateWiring::SCPDP, kind)
}

/// A non-valid input that produced a valid output wrong for both possible
/// true values of the corrupted signal.
#[derive(Clone, Copy, PartialEq, Eq, Debug)]
pub struct PropagationViolation {
    pub kind: GateKind,
    pub a: RailPair,
    pub b: RailPair,
    pub output: RailPair,
}

/// Checks every (non-valid, valid) input combination in both argument
/// positions. Returns the violations found.
pub fn nonvalid_propagation_violations(
    w: &GateWiring,
    kind: GateKind,
) -> Vec<PropagationViolation> {
    let mut out = Vec::new();
    for bad in [RailPair::NONVALID_00, RailPair::NONVALID_11] {
        for good in [false, true] {
            for bad_first in [true, false] {
                let (a, b) = if bad_first {
                    (bad, RailPair::encode(good))
                } else {
                    (RailPair::encode(good), bad)
                };
                let y = w.eval(kind, a, b, &[]);
                let Some(v) = y.value() else { continue };
                let ok = [false, true].into_iter().any(|truth| {
                    let expect = if bad_first {
                        kind.apply(truth, good)
                    } else {
                        kind.apply(good, truth)
                    };
                    v == expect
                });
                if !ok {
                    out.push(PropagationViolation {
                        kind,
                        a,
                        b,
                        output: y,
                    });
                }
            }
        }
    }
    out
}
