//! Dual-rail compilation, fault-site enumeration and fault-injecting
//! simulation.

use std::collections::HashMap;
use std::fmt;

use sha2::{Digest, Sha256};

use super::{exhaustive_block, exhaustive_block_count, CellKind, SignalId, SingleRailNetlist};
use crate::faultsim::rng::SplitMix64;
use crate::gate::{GateKind, GateWiring, LocalFaultSite, OutputRail, RailPair, SiteMask};

#[derive(Clone, Copy, PartialEq, Eq, Hash, Debug, PartialOrd, Ord)]
pub struct NetId(pub u32);

impl NetId {
    pub fn index(self) -> usize {
        self.0 as usize
    }
}

/// The two nets carrying one logical signal: `hi` holds the value, `lo` its
/// complement.
#[derive(Clone, Copy, PartialEq, Eq, Hash, Debug)]
pub struct PairRef {
    pub hi: NetId,
    pub lo: NetId,
}

impl PairRef {
    pub fn swapped(self) -> Self {
        PairRef {
            hi: self.lo,
            lo: self.hi,
        }
    }
}

#[derive(Clone, Copy, PartialEq, Eq, Debug)]
pub enum NetDriver {
    /// Boundary encoder of a primary input; `complement` marks the `lo` rail.
    Input {
        signal: SignalId,
        complement: bool,
    },
    Constant(bool),
    Gate {
        gate: u32,
        rail: OutputRail,
    },
}

#[derive(Clone, PartialEq, Eq, Debug)]
pub struct Net {
    pub name: String,
    pub driver: NetDriver,
}

/// One instance of a dual-rail gate.
#[derive(Clone, PartialEq, Eq, Debug)]
pub struct DualGate {
    pub kind: GateKind,
    pub a: PairRef,
    pub b: PairRef,
    pub o: NetId,
    pub o_bar: NetId,
    /// Source signal this gate computes (possibly through a rail swap).
    pub signal: SignalId,
    /// True when the source signal reads `(o_bar, o)`.
    pub swapped: bool,
}

/// A single-rail inverter absorbed into the wiring.
#[derive(Clone, Copy, PartialEq, Eq, Debug)]
pub struct Swap {
    pub signal: SignalId,
    pub cell: CellKind,
}

/// A fault location in a compiled netlist.
#[derive(Clone, Copy, PartialEq, Eq, Hash, Debug)]
pub enum CircuitFaultSite {
    /// Stem fault on a whole net, seen by every reader.
    Net(NetId),
    /// One of the ten internal nodes of a gate instance.
    Internal { gate: u32, node: LocalFaultSite },
}

/// Compiled dual-rail netlist. Immutable once built.
#[derive(Clone, Debug)]
pub struct DualRailNetlist {
    source: SingleRailNetlist,
    nets: Vec<Net>,
    gates: Vec<DualGate>,
    pairs: Vec<PairRef>,
    swaps: Vec<Swap>,
    sites: Vec<CircuitFaultSite>,
    site_index: HashMap<String, usize>,
    fingerprint: String,
}

/// Compile a single-rail netlist to dual-rail gates.
///
/// `and/or/xor` become one gate each; `nand/nor/xnor` become the base gate
/// read through swapped rails; `not` swaps and `buf` aliases an existing
/// pair without creating nets.
pub fn expand_dual_rail(n: &SingleRailNetlist) -> DualRailNetlist {
    let mut nets = Vec::new();
    let mut pairs = vec![
        PairRef {
            hi: NetId(0),
            lo: NetId(0)
        };
        n.signal_count()
    ];
    let new_net = |nets: &mut Vec<Net>, name: String, driver: NetDriver| {
        nets.push(Net { name, driver });
        NetId(nets.len() as u32 - 1)
    };
    for &sig in n.inputs() {
        let name = n.name(sig);
        let hi = new_net(
            &mut nets,
            format!("{name}.hi"),
            NetDriver::Input {
                signal: sig,
                complement: false,
            },
        );
        let lo = new_net(
            &mut nets,
            format!("{name}.lo"),
            NetDriver::Input {
                signal: sig,
                complement: true,
            },
        );
        pairs[sig.index()] = PairRef { hi, lo };
    }
    for &(sig, v) in n.constants() {
        let name = n.name(sig);
        let hi = new_net(&mut nets, format!("{name}.hi"), NetDriver::Constant(v));
        let lo = new_net(&mut nets, format!("{name}.lo"), NetDriver::Constant(!v));
        pairs[sig.index()] = PairRef { hi, lo };
    }
    let mut gates = Vec::new();
    let mut swaps = Vec::new();
    for cell in n.cells() {
        let (base, swap) = cell.kind.dual_rail_form();
        let out_name = n.name(cell.output);
        if swap {
            swaps.push(Swap {
                signal: cell.output,
                cell: cell.kind,
            });
        }
        match base {
            None => {
                let p = pairs[cell.inputs[0].index()];
                pairs[cell.output.index()] = if swap { p.swapped() } else { p };
            }
            Some(kind) => {
                let gi = gates.len() as u32;
                let (o_tag, ob_tag) = if swap { ("lo", "hi") } else { ("hi", "lo") };
                let o = new_net(
                    &mut nets,
                    format!("{out_name}.{o_tag}"),
                    NetDriver::Gate {
                        gate: gi,
                        rail: OutputRail::O,
                    },
                );
                let o_bar = new_net(
                    &mut nets,
                    format!("{out_name}.{ob_tag}"),
                    NetDriver::Gate {
                        gate: gi,
                        rail: OutputRail::OBar,
                    },
                );
                gates.push(DualGate {
                    kind,
                    a: pairs[cell.inputs[0].index()],
                    b: pairs[cell.inputs[1].index()],
                    o,
                    o_bar,
                    signal: cell.output,
                    swapped: swap,
                });
                let p = PairRef { hi: o, lo: o_bar };
                pairs[cell.output.index()] = if swap { p.swapped() } else { p };
            }
        }
    }

    let mut sites: Vec<CircuitFaultSite> = (0..nets.len() as u32)
        .map(|i| CircuitFaultSite::Net(NetId(i)))
        .collect();
    for gi in 0..gates.len() as u32 {
        sites.extend(
            LocalFaultSite::internals().map(|node| CircuitFaultSite::Internal { gate: gi, node }),
        );
    }

    let fingerprint = {
        let digest = Sha256::digest(n.to_text().as_bytes());
        digest
            .iter()
            .map(|b| format!("{b:02x}"))
            .collect::<String>()
    };
    let mut d = DualRailNetlist {
        source: n.clone(),
        nets,
        gates,
        pairs,
        swaps,
        sites,
        site_index: HashMap::new(),
        fingerprint,
    };
    d.site_index = (0..d.sites.len())
        .map(|i| (d.site_name(&d.sites[i]), i))
        .collect();
    d
}

impl DualRailNetlist {
    pub fn source(&self) -> &SingleRailNetlist {
        &self.source
    }

    pub fn nets(&self) -> &[Net] {
        &self.nets
    }

    pub fn gates(&self) -> &[DualGate] {
        &self.gates
    }

    pub fn swaps(&self) -> &[Swap] {
        &self.swaps
    }

    /// Rail pair carrying a source signal.
    pub fn pair(&self, s: SignalId) -> PairRef {
        self.pairs[s.index()]
    }

    pub fn input_count(&self) -> usize {
        self.source.inputs().len()
    }

    pub fn output_count(&self) -> usize {
        self.source.outputs().len()
    }

    /// SHA-256 of the source netlist's canonical text, hex encoded.
    pub fn fingerprint(&self) -> &str {
        &self.fingerprint
    }

    /// Fault sites in enumeration order: nets in creation order, then each
    /// gate's ten internal nodes in gate order.
    pub fn fault_sites(&self) -> &[CircuitFaultSite] {
        &self.sites
    }

    pub fn site_count(&self) -> usize {
        self.sites.len()
    }

    /// Stable identifier: the net name (`y.hi`) or `<signal>@<rail>.<node>`
    /// for gate internals (`y@ob.prod1`).
    pub fn site_name(&self, site: &CircuitFaultSite) -> String {
        match *site {
            CircuitFaultSite::Net(n) => self.nets[n.index()].name.clone(),
            CircuitFaultSite::Internal { gate, node } => {
                let g = &self.gates[gate as usize];
                format!("{}@{}", self.source.name(g.signal), node)
            }
        }
    }

    /// Look up a site by name, or by `#<index>` into [`fault_sites`].
    ///
    /// [`fault_sites`]: DualRailNetlist::fault_sites
    pub fn find_site(&self, name: &str) -> Option<usize> {
        if let Some(idx) = name.strip_prefix('#') {
            return idx.parse().ok().filter(|&i: &usize| i < self.sites.len());
        }
        self.site_index.get(name).copied()
    }

    /// Evaluate all nets, 64 input vectors per word.
    pub fn eval_nets_words(
        &self,
        inputs: &[u64],
        injection: Option<&Injection>,
        nets: &mut Vec<u64>,
    ) {
        assert_eq!(
            inputs.len(),
            self.input_count(),
            "wrong number of input words"
        );
        nets.clear();
        nets.resize(self.nets.len(), 0);
        let force = |i: usize, v: u64| match injection {
            Some(inj) => inj.force_net(i, v),
            None => v,
        };
        let mut next = 0usize;
        for w in inputs {
            nets[next] = force(next, *w);
            nets[next + 1] = force(next + 1, !*w);
            next += 2;
        }
        for &(_, c) in self.source.constants() {
            let w = if c { !0 } else { 0 };
            nets[next] = force(next, w);
            nets[next + 1] = force(next + 1, !w);
            next += 2;
        }
        let wiring = GateWiring::SCPDP;
        for (gi, g) in self.gates.iter().enumerate() {
            let a = (nets[g.a.hi.index()], nets[g.a.lo.index()]);
            let b = (nets[g.b.hi.index()], nets[g.b.lo.index()]);
            let mask = injection.map_or(SiteMask::NONE, |inj| inj.gate[gi]);
            let (o, ob) = wiring.eval_words(g.kind, a, b, &mask);
            nets[g.o.index()] = force(g.o.index(), o);
            nets[g.o_bar.index()] = force(g.o_bar.index(), ob);
        }
    }

    /// Output rail words `(hi, lo)` from an evaluated net vector.
    pub fn output_words(&self, nets: &[u64]) -> Vec<(u64, u64)> {
        self.source
            .outputs()
            .iter()
            .map(|&s| {
                let p = self.pairs[s.index()];
                (nets[p.hi.index()], nets[p.lo.index()])
            })
            .collect()
    }

    pub fn simulate_words(&self, inputs: &[u64], injection: Option<&Injection>) -> Vec<(u64, u64)> {
        let mut nets = Vec::new();
        self.eval_nets_words(inputs, injection, &mut nets);
        self.output_words(&nets)
    }
}

/// Scalar convenience: one input vector, faults as `(site, stuck value)`.
pub fn simulate(
    d: &DualRailNetlist,
    inputs: &[bool],
    faults: &[(CircuitFaultSite, bool)],
) -> Vec<RailPair> {
    let words = super::bits_to_words(inputs);
    let inj = Injection::from_faults(d, faults);
    d.simulate_words(&words, Some(&inj))
        .into_iter()
        .map(|(h, l)| RailPair::new(h & 1 == 1, l & 1 == 1))
        .collect()
}

pub fn enumerate_fault_sites(d: &DualRailNetlist) -> Vec<CircuitFaultSite> {
    d.fault_sites().to_vec()
}

const NO_FORCE: u8 = 0;
const FORCE0: u8 = 1;
const FORCE1: u8 = 2;

/// Stuck-at faults compiled against one netlist. Reusable via [`clear`].
///
/// [`clear`]: Injection::clear
#[derive(Clone, Debug)]
pub struct Injection {
    net: Vec<u8>,
    gate: Vec<SiteMask>,
    touched_nets: Vec<u32>,
    touched_gates: Vec<u32>,
}

impl Injection {
    pub fn new(d: &DualRailNetlist) -> Self {
        Injection {
            net: vec![NO_FORCE; d.nets.len()],
            gate: vec![SiteMask::NONE; d.gates.len()],
            touched_nets: Vec::new(),
            touched_gates: Vec::new(),
        }
    }

    pub fn from_faults(d: &DualRailNetlist, faults: &[(CircuitFaultSite, bool)]) -> Self {
        let mut inj = Injection::new(d);
        for (s, v) in faults {
            inj.insert(s, *v);
        }
        inj
    }

    pub fn insert(&mut self, site: &CircuitFaultSite, stuck: bool) {
        match *site {
            CircuitFaultSite::Net(n) => {
                let slot = &mut self.net[n.index()];
                // stuck-at-1 wins if a net is listed with both polarities
                if *slot != FORCE1 {
                    *slot = if stuck { FORCE1 } else { FORCE0 };
                }
                self.touched_nets.push(n.0);
            }
            CircuitFaultSite::Internal { gate, node } => {
                self.gate[gate as usize].insert(node, stuck);
                self.touched_gates.push(gate);
            }
        }
    }

    pub fn clear(&mut self) {
        for n in self.touched_nets.drain(..) {
            self.net[n as usize] = NO_FORCE;
        }
        for g in self.touched_gates.drain(..) {
            self.gate[g as usize] = SiteMask::NONE;
        }
    }

    pub fn is_empty(&self) -> bool {
        self.touched_nets.is_empty() && self.touched_gates.is_empty()
    }

    #[inline(always)]
    fn force_net(&self, i: usize, v: u64) -> u64 {
        match self.net[i] {
            NO_FORCE => v,
            FORCE0 => 0,
            _ => !0,
        }
    }
}

/// Reusable simulation scratch space for one netlist.
pub struct Simulator<'a> {
    netlist: &'a DualRailNetlist,
    nets: Vec<u64>,
}

impl<'a> Simulator<'a> {
    pub fn new(netlist: &'a DualRailNetlist) -> Self {
        Simulator {
            netlist,
            nets: Vec::with_capacity(netlist.nets.len()),
        }
    }

    pub fn run(&mut self, inputs: &[u64], injection: Option<&Injection>) -> Vec<(u64, u64)> {
        self.netlist
            .eval_nets_words(inputs, injection, &mut self.nets);
        self.netlist.output_words(&self.nets)
    }

    /// Net values from the last [`run`](Simulator::run).
    pub fn nets(&self) -> &[u64] {
        &self.nets
    }
}

/// Why a compiled netlist disagreed with its source.
#[derive(Clone, PartialEq, Eq, Debug)]
pub enum EquivalenceFailure {
    /// A signal's rail pair was non-valid without any fault.
    NonValidPair { inputs: Vec<bool>, signal: String },
    /// An output's `hi` rail differs from the single-rail reference.
    OutputMismatch {
        inputs: Vec<bool>,
        output: String,
        expected: bool,
    },
}

impl EquivalenceFailure {
    pub fn inputs(&self) -> &[bool] {
        match self {
            EquivalenceFailure::NonValidPair { inputs, .. }
            | EquivalenceFailure::OutputMismatch { inputs, .. } => inputs,
        }
    }
}

impl fmt::Display for EquivalenceFailure {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let bits: String = self
            .inputs()
            .iter()
            .rev()
            .map(|&b| if b { '1' } else { '0' })
            .collect();
        match self {
            EquivalenceFailure::NonValidPair { signal, .. } => {
                write!(
                    f,
                    "input {bits}: signal `{signal}` has a non-valid rail pair"
                )
            }
            EquivalenceFailure::OutputMismatch {
                output, expected, ..
            } => {
                write!(
                    f,
                    "input {bits}: output `{output}` should be {}",
                    *expected as u8
                )
            }
        }
    }
}

/// Exhaustive when the netlist has at most 20 inputs, otherwise `budget`
/// vectors drawn from a fixed-seed generator.
pub fn check_equivalence(
    n: &SingleRailNetlist,
    d: &DualRailNetlist,
    budget: u64,
) -> Result<(), EquivalenceFailure> {
    let k = n.inputs().len();
    let check_block = |inputs: &[u64], active: u64| -> Result<(), EquivalenceFailure> {
        let reference = n.simulate_words(inputs);
        let mut nets = Vec::new();
        d.eval_nets_words(inputs, None, &mut nets);
        let lane_bits = |lane: u32| {
            inputs
                .iter()
                .map(|w| (w >> lane) & 1 == 1)
                .collect::<Vec<_>>()
        };
        for sig in 0..n.signal_count() {
            let p = d.pair(SignalId(sig as u32));
            let bad = !(nets[p.hi.index()] ^ nets[p.lo.index()]) & active;
            if bad != 0 {
                return Err(EquivalenceFailure::NonValidPair {
                    inputs: lane_bits(bad.trailing_zeros()),
                    signal: n.name(SignalId(sig as u32)).to_string(),
                });
            }
        }
        for (&s, r) in n.outputs().iter().zip(&reference) {
            let hi = nets[d.pair(s).hi.index()];
            let diff = (hi ^ r) & active;
            if diff != 0 {
                let lane = diff.trailing_zeros();
                return Err(EquivalenceFailure::OutputMismatch {
                    inputs: lane_bits(lane),
                    output: n.name(s).to_string(),
                    expected: (r >> lane) & 1 == 1,
                });
            }
        }
        Ok(())
    };
    if k <= 20 {
        for block in 0..exhaustive_block_count(k) {
            let (words, active) = exhaustive_block(k, block);
            check_block(&words, active)?;
        }
    } else {
        let mut rng = SplitMix64::new(0x5EED_0FEC);
        let mut left = budget;
        while left > 0 {
            let lanes = left.min(64);
            let active = if lanes == 64 { !0 } else { (1u64 << lanes) - 1 };
            let words: Vec<u64> = (0..k).map(|_| rng.next_u64()).collect();
            check_block(&words, active)?;
            left -= lanes;
        }
    }
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::netlist::parse_netlist;

    fn xor_net() -> DualRailNetlist {
        expand_dual_rail(&parse_netlist("input a b\noutput y\ngate xor y a b").unwrap())
    }

    #[test]
    fn xor_expansion_and_sites() {
        let d = xor_net();
        assert_eq!(d.gates().len(), 1);
        assert_eq!(d.nets().len(), 6);
        assert_eq!(d.site_count(), 16);
        let names: Vec<String> = d.fault_sites().iter().map(|s| d.site_name(s)).collect();
        assert_eq!(
            &names[..6],
            ["a.hi", "a.lo", "b.hi", "b.lo", "y.hi", "y.lo"]
        );
        assert_eq!(names[6], "y@o.inv");
        assert_eq!(names[15], "y@ob.out");
        assert_eq!(d.find_site("b.lo"), Some(3));
        assert_eq!(d.find_site("#15"), Some(15));
        assert_eq!(d.find_site("#16"), None);
    }

    #[test]
    fn xor_simulation_examples() {
        let d = xor_net();
        assert_eq!(simulate(&d, &[true, true], &[]), vec![RailPair::ZERO]);
        let a_lo = CircuitFaultSite::Net(NetId(1));
        assert_eq!(
            simulate(&d, &[true, true], &[(a_lo, true)]),
            vec![RailPair::NONVALID_11]
        );
        let a_hi = CircuitFaultSite::Net(NetId(0));
        assert_eq!(
            simulate(&d, &[false, false], &[(a_hi, false)]),
            vec![RailPair::ZERO]
        );
    }

    #[test]
    fn not_only_netlist_has_no_gates() {
        let n = parse_netlist("input a\noutput y\ngate not y a").unwrap();
        let d = expand_dual_rail(&n);
        assert!(d.gates().is_empty());
        assert_eq!(d.site_count(), 2);
        let a = d.pair(n.lookup("a").unwrap());
        assert_eq!(d.pair(n.lookup("y").unwrap()), a.swapped());
        assert_eq!(simulate(&d, &[true], &[]), vec![RailPair::ZERO]);
        assert_eq!(d.swaps().len(), 1);
    }

    #[test]
    fn buf_aliases() {
        let n = parse_netlist("input a\noutput y\ngate buf y a").unwrap();
        let d = expand_dual_rail(&n);
        assert_eq!(d.site_count(), 2);
        assert_eq!(
            d.pair(n.lookup("y").unwrap()),
            d.pair(n.lookup("a").unwrap())
        );
    }

    #[test]
    fn nand_swaps_rails() {
        let n = parse_netlist("input a b\noutput y\ngate nand y a b").unwrap();
        let d = expand_dual_rail(&n);
        assert_eq!(d.gates().len(), 1);
        assert_eq!(d.gates()[0].kind, GateKind::And);
        assert!(d.gates()[0].swapped);
        assert_eq!(simulate(&d, &[true, true], &[]), vec![RailPair::ZERO]);
        assert_eq!(simulate(&d, &[false, true], &[]), vec![RailPair::ONE]);
        assert!(check_equivalence(&n, &d, 0).is_ok());
    }

    #[test]
    fn equivalence_on_small_netlists() {
        for text in [
            "input a b\noutput y\ngate xor y a b",
            "input a b c\noutput y z\ngate nor t a b\ngate xnor y t c\ngate not z t",
            "input a\noutput y\ngate or y a const1",
        ] {
            let n = parse_netlist(text).unwrap();
            assert!(
                check_equivalence(&n, &expand_dual_rail(&n), 0).is_ok(),
                "{text}"
            );
        }
    }

    #[test]
    fn equivalence_with_random_budget() {
        let mut text = String::from("output y\n");
        for i in 0..24 {
            text += &format!("input x{i}\n");
        }
        text += "gate xor t0 x0 x1\n";
        for i in 1..23 {
            text += &format!("gate xor t{i} t{} x{}\n", i - 1, i + 1);
        }
        text += "gate not y t22\n";
        let n = parse_netlist(&text).unwrap();
        assert!(check_equivalence(&n, &expand_dual_rail(&n), 1000).is_ok());
    }

    #[test]
    fn equivalence_reports_counterexample() {
        let n = parse_netlist("input a b\noutput y\ngate and y a b").unwrap();
        let other = parse_netlist("input a b\noutput y\ngate or y a b").unwrap();
        let err = check_equivalence(&n, &expand_dual_rail(&other), 0).unwrap_err();
        match err {
            EquivalenceFailure::OutputMismatch {
                inputs, expected, ..
            } => {
                assert_eq!(inputs, vec![true, false]);
                assert!(!expected);
            }
            e => panic!("{e:?}"),
        }
    }

    #[test]
    fn injection_clear_resets() {
        let d = xor_net();
        let mut inj = Injection::new(&d);
        inj.insert(&d.fault_sites()[1], true);
        inj.insert(&d.fault_sites()[7], false);
        assert!(!inj.is_empty());
        inj.clear();
        assert!(inj.is_empty());
        let out = d.simulate_words(&[!0, !0], Some(&inj));
        assert_eq!(out, vec![(0, !0)]);
    }
}
