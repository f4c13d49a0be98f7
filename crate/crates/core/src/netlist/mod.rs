//! Single-rail combinational netlists and their dual-rail compilation.
//!
//! Text format, one statement per line, `#` starts a comment:
//!
//! ```text
//! input a b
//! output y
//! gate xor y a b
//! ```
//!
//! Statements may appear in any order. Gate kinds are `and or xor nand nor
//! xnor` (two inputs) and `not buf` (one input). The names `const0` and
//! `const1` are reserved constant signals that may be read without being
//! declared.

mod dual;
mod parse;

use std::cmp::Reverse;
use std::collections::{BinaryHeap, HashMap};
use std::fmt;

use thiserror::Error;

use crate::gate::GateKind;

pub use dual::{
    check_equivalence, enumerate_fault_sites, expand_dual_rail, simulate, CircuitFaultSite,
    DualGate, DualRailNetlist, EquivalenceFailure, Injection, Net, NetDriver, NetId, PairRef,
    Simulator, Swap,
};
pub use parse::parse_netlist;

pub const CONST0: &str = "const0";
pub const CONST1: &str = "const1";

#[derive(Clone, Copy, PartialEq, Eq, Hash, Debug)]
pub enum CellKind {
    And,
    Or,
    Xor,
    Nand,
    Nor,
    Xnor,
    Not,
    Buf,
}

impl CellKind {
    pub const ALL: [CellKind; 8] = [
        CellKind::And,
        CellKind::Or,
        CellKind::Xor,
        CellKind::Nand,
        CellKind::Nor,
        CellKind::Xnor,
        CellKind::Not,
        CellKind::Buf,
    ];

    pub fn from_name(s: &str) -> Option<Self> {
        CellKind::ALL.into_iter().find(|k| k.name() == s)
    }

    pub fn name(self) -> &'static str {
        match self {
            CellKind::And => "and",
            CellKind::Or => "or",
            CellKind::Xor => "xor",
            CellKind::Nand => "nand",
            CellKind::Nor => "nor",
            CellKind::Xnor => "xnor",
            CellKind::Not => "not",
            CellKind::Buf => "buf",
        }
    }

    pub fn arity(self) -> usize {
        match self {
            CellKind::Not | CellKind::Buf => 1,
            _ => 2,
        }
    }

    /// Dual-rail realization: the base gate (if any) and whether the output
    /// rails are swapped.
    pub fn dual_rail_form(self) -> (Option<GateKind>, bool) {
        match self {
            CellKind::And => (Some(GateKind::And), false),
            CellKind::Or => (Some(GateKind::Or), false),
            CellKind::Xor => (Some(GateKind::Xor), false),
            CellKind::Nand => (Some(GateKind::And), true),
            CellKind::Nor => (Some(GateKind::Or), true),
            CellKind::Xnor => (Some(GateKind::Xor), true),
            CellKind::Not => (None, true),
            CellKind::Buf => (None, false),
        }
    }

    #[inline]
    pub fn eval_words(self, a: u64, b: u64) -> u64 {
        match self {
            CellKind::And => a & b,
            CellKind::Or => a | b,
            CellKind::Xor => a ^ b,
            CellKind::Nand => !(a & b),
            CellKind::Nor => !(a | b),
            CellKind::Xnor => !(a ^ b),
            CellKind::Not => !a,
            CellKind::Buf => a,
        }
    }
}

impl fmt::Display for CellKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

#[derive(Clone, Copy, PartialEq, Eq, Hash, Debug, PartialOrd, Ord)]
pub struct SignalId(pub u32);

impl SignalId {
    pub fn index(self) -> usize {
        self.0 as usize
    }
}

#[derive(Clone, PartialEq, Eq, Debug)]
pub struct Cell {
    pub kind: CellKind,
    pub output: SignalId,
    pub inputs: Vec<SignalId>,
}

/// Errors from parsing or validating a netlist. Line numbers are 1-based.
#[derive(Clone, Debug, Error, PartialEq, Eq)]
pub enum NetlistError {
    #[error("line {line}: {message}")]
    Syntax { line: usize, message: String },
    #[error("line {line}: unknown statement `{word}`")]
    UnknownStatement { line: usize, word: String },
    #[error("line {line}: unknown gate kind `{kind}`")]
    UnknownGateKind { line: usize, kind: String },
    #[error("line {line}: `{kind}` takes {expected} input(s), found {found}")]
    Arity {
        line: usize,
        kind: CellKind,
        expected: usize,
        found: usize,
    },
    #[error("line {line}: invalid signal name `{name}`")]
    InvalidName { line: usize, name: String },
    #[error("line {line}: `{name}` is a reserved constant and cannot be driven")]
    ReservedName { line: usize, name: String },
    #[error("line {line}: signal `{name}` already driven on line {first}")]
    DuplicateDriver {
        line: usize,
        name: String,
        first: usize,
    },
    #[error("line {line}: signal `{name}` is never driven")]
    UndeclaredSignal { line: usize, name: String },
    #[error("line {line}: combinational cycle through `{name}`")]
    Cycle { line: usize, name: String },
}

impl NetlistError {
    pub fn line(&self) -> usize {
        match self {
            NetlistError::Syntax { line, .. }
            | NetlistError::UnknownStatement { line, .. }
            | NetlistError::UnknownGateKind { line, .. }
            | NetlistError::Arity { line, .. }
            | NetlistError::InvalidName { line, .. }
            | NetlistError::ReservedName { line, .. }
            | NetlistError::DuplicateDriver { line, .. }
            | NetlistError::UndeclaredSignal { line, .. }
            | NetlistError::Cycle { line, .. } => *line,
        }
    }
}

pub(crate) fn is_valid_name(s: &str) -> bool {
    let mut chars = s.chars();
    match chars.next() {
        Some(c) if c.is_ascii_alphabetic() || c == '_' => {}
        _ => return false,
    }
    chars.all(|c| c.is_ascii_alphanumeric() || c == '_')
}

/// Unvalidated statements, each tagged with its source line.
#[derive(Clone, Debug, Default)]
pub(crate) struct RawNetlist {
    pub inputs: Vec<(String, usize)>,
    pub outputs: Vec<(String, usize)>,
    pub gates: Vec<RawGate>,
}

#[derive(Clone, Debug)]
pub(crate) struct RawGate {
    pub kind: CellKind,
    pub output: String,
    pub inputs: Vec<String>,
    pub line: usize,
}

/// A validated combinational netlist.
///
/// Signal ids are canonical: primary inputs in declaration order, then any
/// constants read (`const0` before `const1`), then gate outputs in
/// topological order. Two netlists with the same serialization compare equal.
#[derive(Clone, PartialEq, Eq, Debug)]
pub struct SingleRailNetlist {
    names: Vec<String>,
    index: HashMap<String, SignalId>,
    inputs: Vec<SignalId>,
    constants: Vec<(SignalId, bool)>,
    outputs: Vec<SignalId>,
    cells: Vec<Cell>,
}

impl SingleRailNetlist {
    pub(crate) fn from_raw(raw: RawNetlist) -> Result<Self, NetlistError> {
        // driver table: name -> (line, Some(gate index) | None for input)
        let mut driver: HashMap<&str, (usize, Option<usize>)> = HashMap::new();
        for (name, line) in &raw.inputs {
            if name == CONST0 || name == CONST1 {
                return Err(NetlistError::ReservedName {
                    line: *line,
                    name: name.clone(),
                });
            }
            if let Some(&(first, _)) = driver.get(name.as_str()) {
                return Err(NetlistError::DuplicateDriver {
                    line: *line,
                    name: name.clone(),
                    first,
                });
            }
            driver.insert(name, (*line, None));
        }
        for (gi, g) in raw.gates.iter().enumerate() {
            if g.output == CONST0 || g.output == CONST1 {
                return Err(NetlistError::ReservedName {
                    line: g.line,
                    name: g.output.clone(),
                });
            }
            if let Some(&(first, _)) = driver.get(g.output.as_str()) {
                return Err(NetlistError::DuplicateDriver {
                    line: g.line,
                    name: g.output.clone(),
                    first,
                });
            }
            driver.insert(&g.output, (g.line, Some(gi)));
        }
        let is_const = |s: &str| s == CONST0 || s == CONST1;
        for g in &raw.gates {
            for i in &g.inputs {
                if !is_const(i) && !driver.contains_key(i.as_str()) {
                    return Err(NetlistError::UndeclaredSignal {
                        line: g.line,
                        name: i.clone(),
                    });
                }
            }
        }
        for (name, line) in &raw.outputs {
            if !is_const(name) && !driver.contains_key(name.as_str()) {
                return Err(NetlistError::UndeclaredSignal {
                    line: *line,
                    name: name.clone(),
                });
            }
        }

        // Kahn's algorithm, always releasing the lowest-numbered ready gate
        let n = raw.gates.len();
        let mut pending = vec![0usize; n];
        let mut readers: Vec<Vec<usize>> = vec![Vec::new(); n];
        for (gi, g) in raw.gates.iter().enumerate() {
            for i in &g.inputs {
                if let Some(&(_, Some(src))) = driver.get(i.as_str()) {
                    pending[gi] += 1;
                    readers[src].push(gi);
                }
            }
        }
        let mut ready: BinaryHeap<Reverse<usize>> =
            (0..n).filter(|&g| pending[g] == 0).map(Reverse).collect();
        let mut order = Vec::with_capacity(n);
        while let Some(Reverse(g)) = ready.pop() {
            order.push(g);
            for &r in &readers[g] {
                pending[r] -= 1;
                if pending[r] == 0 {
                    ready.push(Reverse(r));
                }
            }
        }
        if order.len() < n {
            let stuck = (0..n).find(|&g| pending[g] > 0).unwrap();
            let g = &raw.gates[stuck];
            return Err(NetlistError::Cycle {
                line: g.line,
                name: g.output.clone(),
            });
        }

        let mut nl = SingleRailNetlist {
            names: Vec::new(),
            index: HashMap::new(),
            inputs: Vec::new(),
            constants: Vec::new(),
            outputs: Vec::new(),
            cells: Vec::with_capacity(n),
        };
        for (name, _) in &raw.inputs {
            let id = nl.intern(name);
            nl.inputs.push(id);
        }
        let reads_const = |c: &str| {
            raw.gates.iter().any(|g| g.inputs.iter().any(|i| i == c))
                || raw.outputs.iter().any(|(o, _)| o == c)
        };
        for (c, v) in [(CONST0, false), (CONST1, true)] {
            if reads_const(c) {
                let id = nl.intern(c);
                nl.constants.push((id, v));
            }
        }
        for &gi in &order {
            let g = &raw.gates[gi];
            let output = nl.intern(&g.output);
            let inputs = g.inputs.iter().map(|i| nl.index[i.as_str()]).collect();
            nl.cells.push(Cell {
                kind: g.kind,
                output,
                inputs,
            });
        }
        for (name, _) in &raw.outputs {
            let id = nl.index[name.as_str()];
            nl.outputs.push(id);
        }
        Ok(nl)
    }

    fn intern(&mut self, name: &str) -> SignalId {
        let id = SignalId(self.names.len() as u32);
        self.names.push(name.to_string());
        self.index.insert(name.to_string(), id);
        id
    }

    pub fn signal_count(&self) -> usize {
        self.names.len()
    }

    pub fn name(&self, id: SignalId) -> &str {
        &self.names[id.index()]
    }

    pub fn lookup(&self, name: &str) -> Option<SignalId> {
        self.index.get(name).copied()
    }

    pub fn inputs(&self) -> &[SignalId] {
        &self.inputs
    }

    pub fn outputs(&self) -> &[SignalId] {
        &self.outputs
    }

    /// Constant signals read by the netlist with their values.
    pub fn constants(&self) -> &[(SignalId, bool)] {
        &self.constants
    }

    /// Cells in topological order.
    pub fn cells(&self) -> &[Cell] {
        &self.cells
    }

    pub fn count_of(&self, kind: CellKind) -> usize {
        self.cells.iter().filter(|c| c.kind == kind).count()
    }

    /// Evaluate every signal, 64 input vectors per word.
    pub fn eval_signals_words(&self, inputs: &[u64]) -> Vec<u64> {
        assert_eq!(
            inputs.len(),
            self.inputs.len(),
            "wrong number of input words"
        );
        let mut v = vec![0u64; self.names.len()];
        for (id, w) in self.inputs.iter().zip(inputs) {
            v[id.index()] = *w;
        }
        for &(id, c) in &self.constants {
            v[id.index()] = if c { !0 } else { 0 };
        }
        for c in &self.cells {
            let a = v[c.inputs[0].index()];
            let b = c.inputs.get(1).map_or(0, |i| v[i.index()]);
            v[c.output.index()] = c.kind.eval_words(a, b);
        }
        v
    }

    pub fn simulate_words(&self, inputs: &[u64]) -> Vec<u64> {
        let v = self.eval_signals_words(inputs);
        self.outputs.iter().map(|o| v[o.index()]).collect()
    }

    pub fn simulate(&self, inputs: &[bool]) -> Vec<bool> {
        let words: Vec<u64> = inputs.iter().map(|&b| if b { !0 } else { 0 }).collect();
        self.simulate_words(&words)
            .into_iter()
            .map(|w| w & 1 == 1)
            .collect()
    }

    /// Canonical text form: inputs, outputs, then gates in topological order.
    pub fn to_text(&self) -> String {
        self.to_string()
    }
}

impl fmt::Display for SingleRailNetlist {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if !self.inputs.is_empty() {
            f.write_str("input")?;
            for i in &self.inputs {
                write!(f, " {}", self.name(*i))?;
            }
            f.write_str("\n")?;
        }
        if !self.outputs.is_empty() {
            f.write_str("output")?;
            for o in &self.outputs {
                write!(f, " {}", self.name(*o))?;
            }
            f.write_str("\n")?;
        }
        for c in &self.cells {
            write!(f, "gate {} {}", c.kind, self.name(c.output))?;
            for i in &c.inputs {
                write!(f, " {}", self.name(*i))?;
            }
            f.write_str("\n")?;
        }
        Ok(())
    }
}

/// Programmatic netlist construction. Validation happens in [`finish`].
///
/// [`finish`]: NetlistBuilder::finish
#[derive(Clone, Debug, Default)]
pub struct NetlistBuilder {
    raw: RawNetlist,
    fresh: HashMap<String, usize>,
}

impl NetlistBuilder {
    pub fn new() -> Self {
        Self::default()
    }

    fn line(&self) -> usize {
        self.raw.inputs.len() + self.raw.outputs.len() + self.raw.gates.len() + 1
    }

    pub fn input(&mut self, name: impl Into<String>) -> String {
        let name = name.into();
        let line = self.line();
        self.raw.inputs.push((name.clone(), line));
        name
    }

    pub fn output(&mut self, name: impl Into<String>) {
        let line = self.line();
        self.raw.outputs.push((name.into(), line));
    }

    pub fn gate(&mut self, kind: CellKind, output: impl Into<String>, inputs: &[&str]) -> String {
        let output = output.into();
        let line = self.line();
        self.raw.gates.push(RawGate {
            kind,
            output: output.clone(),
            inputs: inputs.iter().map(|s| s.to_string()).collect(),
            line,
        });
        output
    }

    /// Next unused name of the form `<prefix><n>`.
    pub fn fresh_name(&mut self, prefix: &str) -> String {
        let n = self.fresh.entry(prefix.to_string()).or_insert(0);
        let name = format!("{prefix}{n}");
        *n += 1;
        name
    }

    /// Add a gate driving a fresh signal and return that signal.
    pub fn cell(&mut self, kind: CellKind, prefix: &str, inputs: &[&str]) -> String {
        let out = self.fresh_name(prefix);
        self.gate(kind, out, inputs)
    }

    pub fn finish(self) -> Result<SingleRailNetlist, NetlistError> {
        SingleRailNetlist::from_raw(self.raw)
    }
}

/// Input words for block `block` of an exhaustive sweep over `n_inputs`
/// inputs. Lane `l` carries vector `64 * block + l`, with primary input `i`
/// taking bit `i` of the vector. Also returns the mask of lanes in range.
pub fn exhaustive_block(n_inputs: usize, block: u64) -> (Vec<u64>, u64) {
    let base = block * 64;
    let total: u128 = 1u128 << n_inputs;
    let remaining = total.saturating_sub(base as u128);
    let active = if remaining >= 64 {
        !0
    } else {
        (1u64 << remaining) - 1
    };
    let words = (0..n_inputs)
        .map(|i| {
            let mut w = 0u64;
            for l in 0..64u64 {
                if ((base + l) >> i) & 1 == 1 {
                    w |= 1 << l;
                }
            }
            w
        })
        .collect();
    (words, active)
}

/// Number of 64-lane blocks in an exhaustive sweep.
pub fn exhaustive_block_count(n_inputs: usize) -> u64 {
    ((1u128 << n_inputs).div_ceil(64)) as u64
}

/// Lane-0 words for one input vector given as `bool`s.
pub fn bits_to_words(bits: &[bool]) -> Vec<u64> {
    bits.iter().map(|&b| if b { !0 } else { 0 }).collect()
}

/// Bits of `value` as an input vector of length `n` (input `i` = bit `i`).
pub fn vector_bits(value: u128, n: usize) -> Vec<bool> {
    (0..n).map(|i| i < 128 && (value >> i) & 1 == 1).collect()
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn builder_and_simulate() {
        let mut b = NetlistBuilder::new();
        b.input("a");
        b.input("b");
        let t = b.cell(CellKind::Nand, "t", &["a", "b"]);
        b.gate(CellKind::Not, "y", &[&t]);
        b.output("y");
        let n = b.finish().unwrap();
        for (a, bb) in [(false, false), (false, true), (true, false), (true, true)] {
            assert_eq!(n.simulate(&[a, bb]), vec![a & bb]);
        }
    }

    #[test]
    fn constants_are_bound() {
        let n = parse_netlist("input a\noutput y z\ngate xor y a const1\ngate and z a const0\n")
            .unwrap();
        assert_eq!(n.simulate(&[false]), vec![true, false]);
        assert_eq!(n.simulate(&[true]), vec![false, false]);
        assert_eq!(n.constants().len(), 2);
    }

    #[test]
    fn exhaustive_blocks_cover_vectors() {
        let (w, active) = exhaustive_block(3, 0);
        assert_eq!(active, 0xff);
        for l in 0..8u64 {
            for (i, word) in w.iter().enumerate() {
                assert_eq!((word >> l) & 1, (l >> i) & 1);
            }
        }
        assert_eq!(exhaustive_block_count(8), 4);
        let (w, active) = exhaustive_block(8, 3);
        assert_eq!(active, !0);
        assert_eq!(w[7], !0);
        assert_eq!(w[6], !0);
        assert_eq!(exhaustive_block_count(0), 1);
    }

    #[test]
    fn names() {
        assert!(is_valid_name("x0"));
        assert!(is_valid_name("_a_B9"));
        assert!(!is_valid_name("9x"));
        assert!(!is_valid_name("a-b"));
        assert!(!is_valid_name(""));
    }
}
