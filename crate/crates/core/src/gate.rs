//! Logic-level model of the self-checking dual-rail gate family.
//!
//! Every gate reads two rail pairs `(A, A_bar)` and `(B, B_bar)` and drives
//! one rail pair `(O, O_bar)`. Each output rail is a single complex cell of
//! the form `NOT(NOT(p)·q + r·s)` where `p, q, r, s` select input rails.
//! The intermediate nodes of that cell are individually faultable, which is
//! how transistor-level defects are approximated at logic level.
//!
//! Evaluation is bit-parallel: every value is a `u64` whose lanes are
//! independent simulations. Scalar helpers wrap lane 0.

use std::fmt;

use serde::{Deserialize, Serialize};

/// A two-rail encoded logic value.
///
/// `(hi, lo) = (1, 0)` is logical 1 and `(0, 1)` is logical 0. The two
/// remaining codes, `00` and `11`, are non-valid and signal an error.
#[derive(Clone, Copy, PartialEq, Eq, Hash, Debug, Serialize, Deserialize)]
pub struct RailPair {
    pub hi: bool,
    pub lo: bool,
}

impl RailPair {
    pub const ZERO: RailPair = RailPair {
        hi: false,
        lo: true,
    };
    pub const ONE: RailPair = RailPair {
        hi: true,
        lo: false,
    };
    pub const NONVALID_00: RailPair = RailPair {
        hi: false,
        lo: false,
    };
    pub const NONVALID_11: RailPair = RailPair { hi: true, lo: true };

    /// All four codes in `(hi, lo)` binary order: 00, 01, 10, 11.
    pub const ALL: [RailPair; 4] = [
        RailPair::NONVALID_00,
        RailPair::ZERO,
        RailPair::ONE,
        RailPair::NONVALID_11,
    ];

    pub const fn new(hi: bool, lo: bool) -> Self {
        RailPair { hi, lo }
    }

    /// Valid encoding of a logical bit.
    pub const fn encode(value: bool) -> Self {
        RailPair {
            hi: value,
            lo: !value,
        }
    }

    pub const fn is_valid(self) -> bool {
        self.hi != self.lo
    }

    /// Logical value of a valid pair, `None` for 00 and 11.
    pub fn value(self) -> Option<bool> {
        self.is_valid().then_some(self.hi)
    }

    pub const fn swapped(self) -> Self {
        RailPair {
            hi: self.lo,
            lo: self.hi,
        }
    }
}

impl fmt::Display for RailPair {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "({},{})", self.hi as u8, self.lo as u8)
    }
}

/// Inversion is free in dual-rail logic: swap the rails.
pub const fn rail_not(x: RailPair) -> RailPair {
    x.swapped()
}

#[derive(Clone, Copy, PartialEq, Eq, Hash, Debug, Serialize, Deserialize)]
pub enum GateKind {
    And,
    Or,
    Xor,
}

impl GateKind {
    pub const ALL: [GateKind; 3] = [GateKind::And, GateKind::Or, GateKind::Xor];

    /// The Boolean function the gate realizes on valid inputs.
    pub fn apply(self, a: bool, b: bool) -> bool {
        match self {
            GateKind::And => a & b,
            GateKind::Or => a | b,
            GateKind::Xor => a ^ b,
        }
    }

    pub fn name(self) -> &'static str {
        match self {
            GateKind::And => "AND",
            GateKind::Or => "OR",
            GateKind::Xor => "XOR",
        }
    }

    fn index(self) -> usize {
        match self {
            GateKind::And => 0,
            GateKind::Or => 1,
            GateKind::Xor => 2,
        }
    }
}

impl fmt::Display for GateKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

/// One of the four input rails of a gate.
#[derive(Clone, Copy, PartialEq, Eq, Hash, Debug, PartialOrd, Ord)]
pub enum InputRail {
    A,
    ABar,
    B,
    BBar,
}

impl InputRail {
    pub const ALL: [InputRail; 4] = [InputRail::A, InputRail::ABar, InputRail::B, InputRail::BBar];

    pub const fn index(self) -> usize {
        self as usize
    }

    pub fn name(self) -> &'static str {
        match self {
            InputRail::A => "A",
            InputRail::ABar => "A_bar",
            InputRail::B => "B",
            InputRail::BBar => "B_bar",
        }
    }
}

impl fmt::Display for InputRail {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

#[derive(Clone, Copy, PartialEq, Eq, Hash, Debug)]
pub enum OutputRail {
    O,
    OBar,
}

impl OutputRail {
    pub const ALL: [OutputRail; 2] = [OutputRail::O, OutputRail::OBar];

    pub const fn index(self) -> usize {
        self as usize
    }

    pub fn name(self) -> &'static str {
        match self {
            OutputRail::O => "O",
            OutputRail::OBar => "O_bar",
        }
    }

    /// Short tag used in fault-site identifiers.
    pub fn tag(self) -> &'static str {
        match self {
            OutputRail::O => "o",
            OutputRail::OBar => "ob",
        }
    }
}

impl fmt::Display for OutputRail {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

/// Input selectors of one output-rail cell: `rail = NOT(NOT(p)·q + r·s)`.
#[derive(Clone, Copy, PartialEq, Eq, Hash, Debug)]
pub struct RailExpression {
    pub p: InputRail,
    pub q: InputRail,
    pub r: InputRail,
    pub s: InputRail,
}

impl RailExpression {
    pub const fn new(p: InputRail, q: InputRail, r: InputRail, s: InputRail) -> Self {
        RailExpression { p, q, r, s }
    }

    /// Rails this expression reads, deduplicated and sorted.
    pub fn reads(&self) -> Vec<InputRail> {
        let mut v = vec![self.p, self.q, self.r, self.s];
        v.sort();
        v.dedup();
        v
    }
}

impl fmt::Display for RailExpression {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "~(~{}&{} | {}&{})", self.p, self.q, self.r, self.s)
    }
}

/// Intermediate nodes of one output-rail cell, in evaluation order.
#[derive(Clone, Copy, PartialEq, Eq, Hash, Debug)]
pub enum InternalNode {
    /// `NOT(p)`
    Inv,
    /// `NOT(p)·q`
    Prod1,
    /// `r·s`
    Prod2,
    /// `prod1 + prod2`
    Sum,
    /// `NOT(sum)`, the cell output before it leaves the gate
    Out,
}

impl InternalNode {
    pub const ALL: [InternalNode; 5] = [
        InternalNode::Inv,
        InternalNode::Prod1,
        InternalNode::Prod2,
        InternalNode::Sum,
        InternalNode::Out,
    ];

    pub fn name(self) -> &'static str {
        match self {
            InternalNode::Inv => "inv",
            InternalNode::Prod1 => "prod1",
            InternalNode::Prod2 => "prod2",
            InternalNode::Sum => "sum",
            InternalNode::Out => "out",
        }
    }
}

/// A fault location inside one gate.
///
/// There are 16 per gate. Index order is fixed:
/// 0..4 input rails `A, A_bar, B, B_bar`; 4..6 output rails `O, O_bar`;
/// 6..11 the `O` cell internals; 11..16 the `O_bar` cell internals.
#[derive(Clone, Copy, PartialEq, Eq, Hash, Debug)]
pub enum LocalFaultSite {
    Input(InputRail),
    Output(OutputRail),
    Internal(OutputRail, InternalNode),
}

pub const LOCAL_SITE_COUNT: usize = 16;

impl LocalFaultSite {
    pub fn index(self) -> usize {
        match self {
            LocalFaultSite::Input(r) => r.index(),
            LocalFaultSite::Output(r) => 4 + r.index(),
            LocalFaultSite::Internal(r, n) => 6 + 5 * r.index() + n as usize,
        }
    }

    pub fn from_index(i: usize) -> Option<Self> {
        Some(match i {
            0..=3 => LocalFaultSite::Input(InputRail::ALL[i]),
            4..=5 => LocalFaultSite::Output(OutputRail::ALL[i - 4]),
            6..=15 => {
                let j = i - 6;
                LocalFaultSite::Internal(OutputRail::ALL[j / 5], InternalNode::ALL[j % 5])
            }
            _ => return None,
        })
    }

    pub fn all() -> impl Iterator<Item = LocalFaultSite> {
        (0..LOCAL_SITE_COUNT).map(|i| LocalFaultSite::from_index(i).unwrap())
    }

    /// The ten sites strictly inside the gate (not shared with neighbouring nets).
    pub fn internals() -> impl Iterator<Item = LocalFaultSite> {
        OutputRail::ALL.into_iter().flat_map(|r| {
            InternalNode::ALL
                .into_iter()
                .map(move |n| LocalFaultSite::Internal(r, n))
        })
    }
}

impl fmt::Display for LocalFaultSite {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            LocalFaultSite::Input(r) => write!(f, "{r}"),
            LocalFaultSite::Output(r) => write!(f, "{r}"),
            LocalFaultSite::Internal(r, n) => write!(f, "{}.{}", r.tag(), n.name()),
        }
    }
}

/// Stuck-at masks over the 16 local sites of one gate.
///
/// Bit `i` of `stuck0`/`stuck1` forces site `i`. A site present in both is
/// treated as stuck-at-1.
#[derive(Clone, Copy, PartialEq, Eq, Hash, Debug, Default)]
pub struct SiteMask {
    pub stuck0: u16,
    pub stuck1: u16,
}

impl SiteMask {
    pub const NONE: SiteMask = SiteMask {
        stuck0: 0,
        stuck1: 0,
    };

    pub fn from_faults(faults: &[(LocalFaultSite, bool)]) -> Self {
        let mut m = SiteMask::NONE;
        for &(site, stuck) in faults {
            m.insert(site, stuck);
        }
        m
    }

    pub fn insert(&mut self, site: LocalFaultSite, stuck: bool) {
        let bit = 1u16 << site.index();
        if stuck {
            self.stuck1 |= bit;
        } else {
            self.stuck0 |= bit;
        }
    }

    pub fn is_empty(&self) -> bool {
        (self.stuck0 | self.stuck1) == 0
    }

    #[inline(always)]
    fn apply(&self, idx: usize, v: u64) -> u64 {
        let bit = 1u16 << idx;
        if self.stuck1 & bit != 0 {
            !0
        } else if self.stuck0 & bit != 0 {
            0
        } else {
            v
        }
    }
}

/// Wiring of every gate kind's two output-rail cells.
///
/// [`GateWiring::SCPDP`] is the production table; other tables exist so
/// that the verification procedures can be exercised on deliberately
/// broken wirings.
#[derive(Clone, Copy, PartialEq, Eq, Debug)]
pub struct GateWiring {
    table: [[RailExpression; 2]; 3],
}

impl GateWiring {
    pub const SCPDP: GateWiring = {
        use InputRail::*;
        GateWiring {
            table: [
                // AND
                [
                    RailExpression::new(BBar, ABar, BBar, BBar),
                    RailExpression::new(A, A, A, B),
                ],
                // OR
                [
                    RailExpression::new(ABar, ABar, ABar, BBar),
                    RailExpression::new(A, B, A, A),
                ],
                // XOR
                [
                    RailExpression::new(ABar, B, ABar, BBar),
                    RailExpression::new(A, B, A, BBar),
                ],
            ],
        }
    };

    pub fn expression(&self, kind: GateKind, rail: OutputRail) -> RailExpression {
        self.table[kind.index()][rail.index()]
    }

    /// Copy of this table with one cell replaced.
    pub fn with_expression(mut self, kind: GateKind, rail: OutputRail, e: RailExpression) -> Self {
        self.table[kind.index()][rail.index()] = e;
        self
    }

    /// Bit-parallel evaluation. `a` and `b` are `(hi, lo)` lane words.
    #[inline]
    pub fn eval_words(
        &self,
        kind: GateKind,
        a: (u64, u64),
        b: (u64, u64),
        mask: &SiteMask,
    ) -> (u64, u64) {
        let rails = [
            mask.apply(0, a.0),
            mask.apply(1, a.1),
            mask.apply(2, b.0),
            mask.apply(3, b.1),
        ];
        let cells = &self.table[kind.index()];
        let o = eval_cell(&cells[0], &rails, mask, 6);
        let ob = eval_cell(&cells[1], &rails, mask, 11);
        (mask.apply(4, o), mask.apply(5, ob))
    }

    pub fn eval(
        &self,
        kind: GateKind,
        a: RailPair,
        b: RailPair,
        faults: &[(LocalFaultSite, bool)],
    ) -> RailPair {
        let (o, ob) = self.eval_words(
            kind,
            (lane(a.hi), lane(a.lo)),
            (lane(b.hi), lane(b.lo)),
            &SiteMask::from_faults(faults),
        );
        RailPair::new(o & 1 == 1, ob & 1 == 1)
    }
}

impl Default for GateWiring {
    fn default() -> Self {
        GateWiring::SCPDP
    }
}

#[inline(always)]
fn lane(b: bool) -> u64 {
    if b {
        !0
    } else {
        0
    }
}

#[inline(always)]
fn eval_cell(e: &RailExpression, rails: &[u64; 4], mask: &SiteMask, base: usize) -> u64 {
    let inv = mask.apply(base, !rails[e.p.index()]);
    let prod1 = mask.apply(base + 1, inv & rails[e.q.index()]);
    let prod2 = mask.apply(base + 2, rails[e.r.index()] & rails[e.s.index()]);
    let sum = mask.apply(base + 3, prod1 | prod2);
    mask.apply(base + 4, !sum)
}

/// Evaluate one gate of the production family with optional stuck-at faults.
pub fn eval_gate(
    kind: GateKind,
    a: RailPair,
    b: RailPair,
    faults: &[(LocalFaultSite, bool)],
) -> RailPair {
    GateWiring::SCPDP.eval(kind, a, b, faults)
}

/// Outcome of one faulty simulation compared against the fault-free one.
#[derive(Clone, Copy, PartialEq, Eq, Hash, Debug, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum FaultOutcomeClass {
    /// Every output valid and correct.
    Masked,
    /// At least one output pair is non-valid.
    Detected,
    /// Every output valid, at least one wrong: silent data corruption.
    Sdc,
}

impl FaultOutcomeClass {
    pub fn name(self) -> &'static str {
        match self {
            FaultOutcomeClass::Masked => "masked",
            FaultOutcomeClass::Detected => "detected",
            FaultOutcomeClass::Sdc => "sdc",
        }
    }
}

impl fmt::Display for FaultOutcomeClass {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

/// Classify a faulty output vector against the expected one.
///
/// Panics if the slices differ in length.
pub fn classify(expected: &[RailPair], actual: &[RailPair]) -> FaultOutcomeClass {
    assert_eq!(
        expected.len(),
        actual.len(),
        "output vectors differ in length"
    );
    if actual.iter().any(|p| !p.is_valid()) {
        FaultOutcomeClass::Detected
    } else if expected == actual {
        FaultOutcomeClass::Masked
    } else {
        FaultOutcomeClass::Sdc
    }
}

/// Lane masks `(masked, detected, sdc)` for bit-parallel output words.
///
/// Lanes outside `active` are reported in none of the three masks.
pub fn classify_words(
    expected: &[(u64, u64)],
    actual: &[(u64, u64)],
    active: u64,
) -> (u64, u64, u64) {
    assert_eq!(
        expected.len(),
        actual.len(),
        "output vectors differ in length"
    );
    let mut nonvalid = 0u64;
    let mut wrong = 0u64;
    for (&(eh, el), &(ah, al)) in expected.iter().zip(actual) {
        nonvalid |= !(ah ^ al);
        wrong |= (ah ^ eh) | (al ^ el);
    }
    let detected = nonvalid & active;
    let sdc = !nonvalid & wrong & active;
    let masked = !nonvalid & !wrong & active;
    (masked, detected, sdc)
}

#[cfg(test)]
mod tests {
    use super::*;

    const T: RailPair = RailPair::ONE;
    const F: RailPair = RailPair::ZERO;

    #[test]
    fn and_of_ones_is_one() {
        assert_eq!(eval_gate(GateKind::And, T, T, &[]), T);
    }

    #[test]
    fn and_with_11_input_and_one() {
        assert_eq!(
            eval_gate(GateKind::And, RailPair::NONVALID_11, T, &[]),
            RailPair::NONVALID_00
        );
    }

    #[test]
    fn and_masks_00_input_under_controlling_zero() {
        assert_eq!(eval_gate(GateKind::And, RailPair::NONVALID_00, F, &[]), F);
    }

    #[test]
    fn xor_with_a_bar_stuck_high() {
        let faults = [(LocalFaultSite::Input(InputRail::ABar), true)];
        assert_eq!(
            eval_gate(GateKind::Xor, T, T, &faults),
            RailPair::NONVALID_11
        );
    }

    #[test]
    fn or_of_zeros() {
        assert_eq!(eval_gate(GateKind::Or, F, F, &[]), F);
    }

    #[test]
    fn rail_not_swaps_and_fixes_nonvalid() {
        assert_eq!(rail_not(T), F);
        assert_eq!(rail_not(RailPair::NONVALID_00), RailPair::NONVALID_00);
        assert_eq!(rail_not(RailPair::NONVALID_11), RailPair::NONVALID_11);
        for x in RailPair::ALL {
            assert_eq!(rail_not(rail_not(x)), x);
        }
        for v in [false, true] {
            assert_eq!(rail_not(RailPair::encode(v)), RailPair::encode(!v));
        }
    }

    #[test]
    fn validity_is_rail_inequality() {
        for x in RailPair::ALL {
            assert_eq!(x.is_valid(), x.hi != x.lo);
            assert_eq!(x.value().is_some(), x.is_valid());
        }
    }

    #[test]
    fn local_site_indices_are_stable() {
        for (i, s) in LocalFaultSite::all().enumerate() {
            assert_eq!(s.index(), i);
        }
        assert_eq!(
            LocalFaultSite::from_index(0),
            Some(LocalFaultSite::Input(InputRail::A))
        );
        assert_eq!(
            LocalFaultSite::from_index(5),
            Some(LocalFaultSite::Output(OutputRail::OBar))
        );
        assert_eq!(
            LocalFaultSite::from_index(6),
            Some(LocalFaultSite::Internal(OutputRail::O, InternalNode::Inv))
        );
        assert_eq!(
            LocalFaultSite::from_index(15),
            Some(LocalFaultSite::Internal(
                OutputRail::OBar,
                InternalNode::Out
            ))
        );
        assert_eq!(LocalFaultSite::from_index(16), None);
        assert_eq!(LocalFaultSite::internals().count(), 10);
    }

    #[test]
    fn wiring_read_sets() {
        use InputRail::*;
        let w = GateWiring::SCPDP;
        for kind in GateKind::ALL {
            let o = w.expression(kind, OutputRail::O).reads();
            let ob = w.expression(kind, OutputRail::OBar).reads();
            assert!(!o.contains(&A));
            assert_eq!(o.contains(&B), kind == GateKind::Xor);
            assert!(!ob.contains(&ABar));
        }
    }

    #[test]
    fn classify_three_ways() {
        assert_eq!(
            classify(&[T], &[RailPair::NONVALID_11]),
            FaultOutcomeClass::Detected
        );
        assert_eq!(classify(&[T], &[T]), FaultOutcomeClass::Masked);
        assert_eq!(classify(&[T], &[F]), FaultOutcomeClass::Sdc);
        assert_eq!(
            classify(&[T, F], &[F, RailPair::NONVALID_00]),
            FaultOutcomeClass::Detected
        );
    }

    #[test]
    #[should_panic]
    fn classify_rejects_length_mismatch() {
        classify(&[T], &[T, T]);
    }

    #[test]
    fn classify_words_agrees_with_scalar() {
        let pairs = RailPair::ALL;
        // every (expected valid, actual any) combination on two outputs, one lane each
        let mut lane_idx = 0;
        let mut exp = [(0u64, 0u64); 2];
        let mut act = [(0u64, 0u64); 2];
        let mut want = Vec::new();
        for e0 in [F, T] {
            for e1 in [F, T] {
                for a0 in pairs {
                    for a1 in pairs {
                        let bit = 1u64 << lane_idx;
                        let [x0, x1] = &mut exp;
                        let [y0, y1] = &mut act;
                        for (slot, p) in [(x0, e0), (x1, e1), (y0, a0), (y1, a1)] {
                            if p.hi {
                                slot.0 |= bit;
                            }
                            if p.lo {
                                slot.1 |= bit;
                            }
                        }
                        want.push(classify(&[e0, e1], &[a0, a1]));
                        lane_idx += 1;
                    }
                }
            }
        }
        assert_eq!(lane_idx, 64);
        let (m, d, s) = classify_words(&exp, &act, !0);
        for (i, w) in want.iter().enumerate() {
            let bit = 1u64 << i;
            let got = if m & bit != 0 {
                FaultOutcomeClass::Masked
            } else if d & bit != 0 {
                FaultOutcomeClass::Detected
            } else {
                assert!(s & bit != 0);
                FaultOutcomeClass::Sdc
            };
            assert_eq!(&got, w, "lane {i}");
        }
        assert_eq!(m & d, 0);
        assert_eq!(m & s, 0);
        assert_eq!(d & s, 0);
    }
}
