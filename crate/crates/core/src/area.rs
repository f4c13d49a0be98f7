//! Technology-independent area estimate.
//!
//! Every dual-rail gate costs 8 transistors. Inverters (including the output
//! inversion of nand/nor/xnor) are rail swaps and buffers are aliases, so
//! neither costs anything.

use std::fmt;

use serde::Serialize;

use crate::netlist::{CellKind, DualRailNetlist};

pub const TRANSISTORS_PER_GATE: u64 = 8;

#[derive(Clone, PartialEq, Eq, Debug, Serialize)]
pub struct CellCount {
    pub kind: String,
    pub count: usize,
}

#[derive(Clone, PartialEq, Eq, Debug, Serialize)]
pub struct AreaReport {
    /// Source cell counts, in [`CellKind::ALL`] order, zeros omitted.
    pub cells: Vec<CellCount>,
    /// Two-input dual-rail gates.
    pub gates: u64,
    pub transistors: u64,
    /// Rail swaps absorbed into the wiring at no cost.
    pub absorbed_inverters: usize,
}

impl AreaReport {
    pub fn of(d: &DualRailNetlist) -> AreaReport {
        let src = d.source();
        let cells = CellKind::ALL
            .iter()
            .map(|&k| CellCount {
                kind: k.name().to_string(),
                count: src.count_of(k),
            })
            .filter(|c| c.count > 0)
            .collect();
        let gates = d.gates().len() as u64;
        AreaReport {
            cells,
            gates,
            transistors: TRANSISTORS_PER_GATE * gates,
            absorbed_inverters: d.swaps().len(),
        }
    }
}

impl fmt::Display for AreaReport {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        for c in &self.cells {
            writeln!(f, "{:<5} {}", c.kind, c.count)?;
        }
        writeln!(f, "gates G = {}", self.gates)?;
        writeln!(f, "transistors T = 8 x G = {}", self.transistors)?;
        write!(
            f,
            "absorbed inverters = {} (0 transistors)",
            self.absorbed_inverters
        )
    }
}

/// Rough static-CMOS transistor count of a single-rail cell. Buffers are
/// taken as plain wires.
pub fn cmos_transistors(kind: CellKind) -> u64 {
    match kind {
        CellKind::Nand | CellKind::Nor => 4,
        CellKind::And | CellKind::Or => 6,
        CellKind::Xor | CellKind::Xnor => 12,
        CellKind::Not => 2,
        CellKind::Buf => 0,
    }
}

/// Naive duplication estimate: two copies of the single-rail circuit,
/// comparator not included.
#[derive(Clone, Copy, PartialEq, Eq, Debug, Serialize)]
pub struct DmrEstimate {
    pub baseline: u64,
    pub duplicated: u64,
}

impl DmrEstimate {
    pub fn of(d: &DualRailNetlist) -> DmrEstimate {
        let baseline = d
            .source()
            .cells()
            .iter()
            .map(|c| cmos_transistors(c.kind))
            .sum::<u64>();
        DmrEstimate {
            baseline,
            duplicated: 2 * baseline,
        }
    }
}

impl fmt::Display for DmrEstimate {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(
            f,
            "DMR (approximate): 2 x {} single-rail CMOS transistors = {}",
            self.baseline, self.duplicated
        )
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::netlist::{expand_dual_rail, parse_netlist};

    fn area(text: &str) -> AreaReport {
        AreaReport::of(&expand_dual_rail(&parse_netlist(text).unwrap()))
    }

    #[test]
    fn single_xor() {
        let a = area("input a b\noutput y\ngate xor y a b\n");
        assert_eq!((a.gates, a.transistors), (1, 8));
    }

    #[test]
    fn inverters_are_free() {
        let a = area("input a\noutput y\ngate not y a\n");
        assert_eq!((a.gates, a.transistors, a.absorbed_inverters), (0, 0, 1));
        let a = area("input a b\noutput y\ngate nand y a b\n");
        assert_eq!((a.gates, a.transistors, a.absorbed_inverters), (1, 8, 1));
    }

    #[test]
    fn dmr() {
        let d = expand_dual_rail(
            &parse_netlist("input a b\noutput y\ngate nand t a b\ngate not y t\n").unwrap(),
        );
        assert_eq!(
            DmrEstimate::of(&d),
            DmrEstimate {
                baseline: 6,
                duplicated: 12
            }
        );
    }
}
