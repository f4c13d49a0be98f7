#![allow(dead_code)]

use proptest::prelude::*;
use scpdp_core::faultsim::SplitMix64;
use scpdp_core::netlist::{CellKind, NetlistBuilder, SingleRailNetlist, CONST0, CONST1};

/// Shape of a random netlist; indices are reduced modulo what is available
/// when the netlist is built, so every spec is buildable.
#[derive(Clone, Debug)]
pub struct NetSpec {
    pub inputs: usize,
    pub gates: Vec<(usize, usize, usize)>,
    pub outputs: Vec<usize>,
    pub constants: bool,
}

pub fn build(spec: &NetSpec) -> SingleRailNetlist {
    let mut b = NetlistBuilder::new();
    let mut sigs: Vec<String> = (0..spec.inputs).map(|i| b.input(format!("i{i}"))).collect();
    for &(k, x, y) in &spec.gates {
        let kind = CellKind::ALL[k % CellKind::ALL.len()];
        let pool = sigs.len() + if spec.constants { 2 } else { 0 };
        let pick = |v: usize| match v % pool {
            i if i < sigs.len() => sigs[i].clone(),
            i if i == sigs.len() => CONST0.to_string(),
            _ => CONST1.to_string(),
        };
        let (a, c) = (pick(x), pick(y));
        let ins: Vec<&str> = if kind.arity() == 1 {
            vec![&a]
        } else {
            vec![&a, &c]
        };
        let out = b.cell(kind, "g", &ins);
        sigs.push(out);
    }
    let mut outs = vec![sigs.len() - 1];
    for &o in &spec.outputs {
        let o = o % sigs.len();
        if !outs.contains(&o) {
            outs.push(o);
        }
    }
    for o in outs {
        b.output(sigs[o].clone());
    }
    b.finish().expect("generated netlist is well formed")
}

pub fn netspec() -> impl Strategy<Value = NetSpec> {
    (
        1usize..=6,
        prop::collection::vec((0usize..8, any::<usize>(), any::<usize>()), 1..30),
        prop::collection::vec(any::<usize>(), 0..4),
        any::<bool>(),
    )
        .prop_map(|(inputs, gates, outputs, constants)| NetSpec {
            inputs,
            gates,
            outputs,
            constants,
        })
}

/// Seeded variant for tests that want a fixed sample.
pub fn random_spec(rng: &mut SplitMix64) -> NetSpec {
    let inputs = 1 + rng.below(8) as usize;
    let gates = (0..1 + rng.below(60))
        .map(|_| {
            (
                rng.below(8) as usize,
                rng.next_u64() as usize,
                rng.next_u64() as usize,
            )
        })
        .collect();
    let outputs = (0..rng.below(5)).map(|_| rng.next_u64() as usize).collect();
    NetSpec {
        inputs,
        gates,
        outputs,
        constants: rng.below(2) == 1,
    }
}

pub const XOR_NETLIST: &str = "input a b\noutput y\ngate xor y a b\n";
